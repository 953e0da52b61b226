# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport log, INFINITY

cnp.import_array()


cdef inline double cabs2(double re, double im) nogil:
    return re * re + im * im


def green_disc(z, z0):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] flat = np.ascontiguousarray(
        np.asarray(z, dtype=np.complex128).ravel())
    cdef Py_ssize_t n = flat.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double ar = complex(z0).real, ai = complex(z0).imag
    cdef double x, y, d2, e2
    with nogil:
        for i in range(n):
            x = flat[i].real
            y = flat[i].imag
            d2 = cabs2(x - ar, y - ai)
            # 1 - conj(z0) z
            e2 = cabs2(1.0 - (ar * x + ai * y), -(ar * y - ai * x))
            if d2 == 0.0:
                out[i] = -INFINITY
            else:
                out[i] = 0.5 * (log(d2) - log(e2))
    return out.reshape(np.shape(z))


def green_annulus(z, z0, double rho, int nterms):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] flat = np.ascontiguousarray(
        np.asarray(z, dtype=np.complex128).ravel())
    cdef Py_ssize_t n = flat.shape[0], i
    cdef int m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double complex c0 = complex(z0)
    cdef double rho2 = rho * rho
    cdef double b0 = log(abs(c0)) / log(rho)
    cdef double s2 = c0.real * c0.real + c0.imag * c0.imag
    # multipliers: u1 = w * k1, u2 = w * k2, u3 = (1/w) * k3, u4 = (1/w) * k4
    cdef double k1r = rho2 * c0.real / s2, k1i = -rho2 * c0.imag / s2
    cdef double k2r = c0.real, k2i = -c0.imag
    cdef double k3r = rho2 * c0.real, k3i = rho2 * c0.imag
    cdef double k4r = rho2 * c0.real / s2, k4i = rho2 * c0.imag / s2
    cdef double wr, wi, vr, vi, w2, d2, q
    cdef double u1r, u1i, u2r, u2i, u3r, u3i, u4r, u4i
    cdef double nr, ni, dr, di, ar, ai, br, bi, tr, ti
    for i in prange(n, nogil=True, schedule="static"):
        wr = flat[i].real
        wi = flat[i].imag
        d2 = (wr - c0.real) * (wr - c0.real) + (wi - c0.imag) * (wi - c0.imag)
        if d2 == 0.0:
            out[i] = -INFINITY
            continue
        w2 = wr * wr + wi * wi
        vr = wr / w2
        vi = -wi / w2
        u1r = wr * k1r - wi * k1i
        u1i = wr * k1i + wi * k1r
        u2r = wr * k2r - wi * k2i
        u2i = wr * k2i + wi * k2r
        u3r = vr * k3r - vi * k3i
        u3i = vr * k3i + vi * k3r
        u4r = vr * k4r - vi * k4i
        u4i = vr * k4i + vi * k4r
        nr = 1.0
        ni = 0.0
        dr = 1.0
        di = 0.0
        q = 1.0
        for m in range(nterms):
            ar = 1.0 - q * u1r
            ai = -q * u1i
            br = 1.0 - q * u3r
            bi = -q * u3i
            tr = ar * br - ai * bi
            ti = ar * bi + ai * br
            ar = nr * tr - ni * ti
            ni = nr * ti + ni * tr
            nr = ar
            ar = 1.0 - q * u2r
            ai = -q * u2i
            br = 1.0 - q * u4r
            bi = -q * u4i
            tr = ar * br - ai * bi
            ti = ar * bi + ai * br
            ar = dr * tr - di * ti
            di = dr * ti + di * tr
            dr = ar
            q = q * rho2
        out[i] = 0.5 * (log(d2) - b0 * log(w2) + log(nr * nr + ni * ni)
                        - log(dr * dr + di * di))
    return out.reshape(np.shape(z))


def edge_fraction_area(f, r_edges):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] fa = np.ascontiguousarray(
        np.asarray(f, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.ascontiguousarray(
        np.asarray(r_edges, dtype=np.float64))
    cdef Py_ssize_t nr = fa.shape[0] - 1, nt = fa.shape[1], i, j
    cdef double f0, f1, r0, r1, rs, col, total = 0.0
    with nogil:
        for j in range(nt):
            col = 0.0
            for i in range(nr):
                f0 = fa[i, j]
                f1 = fa[i + 1, j]
                if f0 < -1e300:
                    f0 = -1e300
                if f1 < -1e300:
                    f1 = -1e300
                r0 = r[i]
                r1 = r[i + 1]
                if f0 < 0.0 and f1 < 0.0:
                    col += 0.5 * (r1 * r1 - r0 * r0)
                elif f0 < 0.0:
                    rs = r0 + (r1 - r0) * (f0 / (f0 - f1))
                    col += 0.5 * (rs * rs - r0 * r0)
                elif f1 < 0.0:
                    rs = r0 + (r1 - r0) * (f0 / (f0 - f1))
                    col += 0.5 * (r1 * r1 - rs * rs)
            total += col
    return total
