# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels (hot loops).

Mirrors kernels._numpy operation for operation; the arithmetic expression
order must stay in sync so both backends give bit-identical fields.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, sqrt

cnp.import_array()

FREE = 0
DIRICHLET = 1

cdef int _FREE = 0
cdef int _DIRICHLET = 1

cdef int FAM_ZERO = 0
cdef int FAM_SATURATING = 1
cdef int FAM_ARCTAN_LIKE = 2
cdef int FAM_PW_LINEAR = 3
cdef int FAM_BUMP = 4


cdef inline double _h(int fam, const double* par, const double* kx,
                      const double* ky, const double* ks, int nk,
                      double u) nogil:
    cdef int lo, hi, mid
    if fam == FAM_ZERO:
        return 0.0
    if fam == FAM_SATURATING:
        return par[0] * u / (1.0 + fabs(u))
    if fam == FAM_ARCTAN_LIKE:
        return par[0] * u / sqrt(1.0 + u * u)
    if fam == FAM_PW_LINEAR:
        if u <= kx[0]:
            return ky[0]
        if u >= kx[nk - 1]:
            return ky[nk - 1]
        lo = 0
        hi = nk - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if kx[mid] <= u:
                lo = mid
            else:
                hi = mid
        return ky[lo] + (u - kx[lo]) * ks[lo]
    if fam == FAM_BUMP:
        return par[0] * u / (1.0 + u * u)
    return 0.0


cdef inline double _godunov(int fam, const double* par, const double* kx,
                            const double* ky, const double* ks, int nk,
                            const double* cx, const double* ch, int nc,
                            double a, double b) nogil:
    cdef double ha, hb, m
    cdef int i
    if a == b:
        return _h(fam, par, kx, ky, ks, nk, a)
    ha = _h(fam, par, kx, ky, ks, nk, a)
    hb = _h(fam, par, kx, ky, ks, nk, b)
    if a < b:
        m = ha if ha < hb else hb
        for i in range(nc):
            if a < cx[i] < b and ch[i] < m:
                m = ch[i]
        return m
    m = ha if ha > hb else hb
    for i in range(nc):
        if b < cx[i] < a and ch[i] > m:
            m = ch[i]
    return m


def run_span(double[::1] u, double[::1] w, double dt, int nsteps,
             int lkind, double lval, int rkind, double rval,
             int fam, double[::1] par, double[::1] kx, double[::1] ky,
             double[::1] ks, double[::1] cx, double[::1] ch, double lip,
             double[::1] out_left, double[::1] out_right):
    """Advance one interval by nsteps forward-Euler steps, in place."""
    cdef int n = u.shape[0]
    cdef int nk = kx.shape[0]
    cdef int nc = cx.shape[0]
    cdef double half_lip = 0.5 * lip
    cdef int s, i, bad
    cdef double fl, fr
    cdef cnp.ndarray[double, ndim=1] h_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] f_arr = np.empty(n - 1 if n > 1 else 0,
                                                      dtype=np.float64)
    cdef double[::1] h = h_arr
    cdef double[::1] fi = f_arr
    cdef const double* parp = &par[0] if par.shape[0] > 0 else NULL
    cdef const double* kxp = &kx[0] if nk > 0 else NULL
    cdef const double* kyp = &ky[0] if nk > 0 else NULL
    cdef const double* ksp = &ks[0] if ks.shape[0] > 0 else NULL
    cdef const double* cxp = &cx[0] if nc > 0 else NULL
    cdef const double* chp = &ch[0] if nc > 0 else NULL

    bad = -1
    with nogil:
        for s in range(nsteps):
            for i in range(n):
                h[i] = _h(fam, parp, kxp, kyp, ksp, nk, u[i])
            if lkind == _DIRICHLET:
                fl = _godunov(fam, parp, kxp, kyp, ksp, nk, cxp, chp, nc,
                              lval, u[0])
            else:
                fl = h[0]
            if rkind == _DIRICHLET:
                fr = _godunov(fam, parp, kxp, kyp, ksp, nk, cxp, chp, nc,
                              u[n - 1], rval)
            else:
                fr = h[n - 1]
            if n == 1:
                u[0] = u[0] - (dt / w[0]) * (fr - fl)
            else:
                for i in range(n - 1):
                    fi[i] = 0.5 * (h[i] + h[i + 1]) - half_lip * (u[i + 1] - u[i])
                u[0] = u[0] - (dt / w[0]) * (fi[0] - fl)
                for i in range(1, n - 1):
                    u[i] = u[i] - (dt / w[i]) * (fi[i] - fi[i - 1])
                u[n - 1] = u[n - 1] - (dt / w[n - 1]) * (fr - fi[n - 2])
            out_left[s] = fl
            out_right[s] = fr
            for i in range(n):
                if not isfinite(u[i]):
                    bad = s
                    break
            if bad >= 0:
                break
    if bad >= 0:
        raise FloatingPointError(
            f"non-finite cell value at step {bad}: the discrete max principle "
            "was violated, which signals an internal bug"
        )


def run_viscous(double[::1] u, double dx, double dt, int nsteps, double eps,
                int lkind, double lval, int rkind, double rval,
                int fam, double[::1] par, double[::1] kx, double[::1] ky,
                double[::1] ks, double lip,
                double[::1] out_left, double[::1] out_right,
                h_override=None):
    """Advance the parabolic regularization by nsteps explicit steps."""
    if h_override is not None:
        # Custom flux callables only exist on the numpy path.
        from . import _numpy
        return _numpy.run_viscous(
            np.asarray(u), dx, dt, nsteps, eps, lkind, lval, rkind, rval,
            fam, np.asarray(par), np.asarray(kx), np.asarray(ky),
            np.asarray(ks), lip, np.asarray(out_left), np.asarray(out_right),
            h_override=h_override)

    cdef int n = u.shape[0]
    cdef int nk = kx.shape[0]
    cdef double half_lip = 0.5 * lip
    cdef double r = eps * dt / (dx * dx)
    cdef double d = eps / dx
    cdef int s, i, bad
    cdef double gl, gr
    cdef cnp.ndarray[double, ndim=1] ue_arr = np.empty(n + 2, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] h_arr = np.empty(n + 2, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] fc_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] ue = ue_arr
    cdef double[::1] h = h_arr
    cdef double[::1] fc = fc_arr
    cdef const double* parp = &par[0] if par.shape[0] > 0 else NULL
    cdef const double* kxp = &kx[0] if nk > 0 else NULL
    cdef const double* kyp = &ky[0] if nk > 0 else NULL
    cdef const double* ksp = &ks[0] if ks.shape[0] > 0 else NULL

    bad = -1
    with nogil:
        for s in range(nsteps):
            gl = lval if lkind == _DIRICHLET else u[0]
            gr = rval if rkind == _DIRICHLET else u[n - 1]
            ue[0] = gl
            for i in range(n):
                ue[i + 1] = u[i]
            ue[n + 1] = gr
            for i in range(n + 2):
                h[i] = _h(fam, parp, kxp, kyp, ksp, nk, ue[i])
            for i in range(n + 1):
                fc[i] = 0.5 * (h[i] + h[i + 1]) - half_lip * (ue[i + 1] - ue[i])
            out_left[s] = fc[0] - d * (u[0] - gl)
            out_right[s] = fc[n] - d * (gr - u[n - 1])
            for i in range(n):
                u[i] = u[i] + (-(dt / dx) * (fc[i + 1] - fc[i])
                               + r * (ue[i + 2] - 2.0 * ue[i + 1] + ue[i]))
            for i in range(n):
                if not isfinite(u[i]):
                    bad = s
                    break
            if bad >= 0:
                break
    if bad >= 0:
        raise FloatingPointError(f"non-finite value at viscous step {bad}")
