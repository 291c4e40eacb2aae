"""Pure-numpy stepping kernels (fallback backend).

The compiled backend in ``_compiled.pyx`` mirrors these loops operation for
operation; keep the arithmetic expression order identical in both files so
the two backends produce bit-identical fields.
"""

from __future__ import annotations

import numpy as np

FREE = 0
DIRICHLET = 1

FAM_ZERO = 0
FAM_SATURATING = 1
FAM_ARCTAN_LIKE = 2
FAM_PW_LINEAR = 3
FAM_BUMP = 4


def h_eval(fam, par, kx, ky, ks, u):
    """Vectorized flux evaluation for the builtin families."""
    u = np.asarray(u, dtype=np.float64)
    if fam == FAM_ZERO:
        return np.zeros_like(u)
    if fam == FAM_SATURATING:
        return par[0] * u / (1.0 + np.abs(u))
    if fam == FAM_ARCTAN_LIKE:
        return par[0] * u / np.sqrt(1.0 + u * u)
    if fam == FAM_PW_LINEAR:
        j = np.clip(np.searchsorted(kx, u, side="right") - 1, 0, len(kx) - 2)
        out = ky[j] + (u - kx[j]) * ks[j]
        out = np.where(u <= kx[0], ky[0], out)
        out = np.where(u >= kx[-1], ky[-1], out)
        return out
    if fam == FAM_BUMP:
        return par[0] * u / (1.0 + u * u)
    raise ValueError(f"unknown flux family id {fam}")


def h_scalar(fam, par, kx, ky, ks, u):
    if fam == FAM_ZERO:
        return 0.0
    if fam == FAM_SATURATING:
        return par[0] * u / (1.0 + abs(u))
    if fam == FAM_ARCTAN_LIKE:
        return par[0] * u / np.sqrt(1.0 + u * u)
    if fam == FAM_PW_LINEAR:
        if u <= kx[0]:
            return float(ky[0])
        if u >= kx[-1]:
            return float(ky[-1])
        j = min(max(int(np.searchsorted(kx, u, side="right")) - 1, 0), len(kx) - 2)
        return float(ky[j] + (u - kx[j]) * ks[j])
    if fam == FAM_BUMP:
        return par[0] * u / (1.0 + u * u)
    raise ValueError(f"unknown flux family id {fam}")


def godunov_scalar(fam, par, kx, ky, ks, cx, ch, a, b):
    """Exact Godunov flux between states a (left) and b (right)."""
    if a == b:
        return h_scalar(fam, par, kx, ky, ks, a)
    ha = h_scalar(fam, par, kx, ky, ks, a)
    hb = h_scalar(fam, par, kx, ky, ks, b)
    if a < b:
        m = ha if ha < hb else hb
        for i in range(len(cx)):
            if a < cx[i] < b and ch[i] < m:
                m = ch[i]
        return m
    m = ha if ha > hb else hb
    for i in range(len(cx)):
        if b < cx[i] < a and ch[i] > m:
            m = ch[i]
    return m


def run_span(
    u,
    w,
    dt,
    nsteps,
    lkind,
    lval,
    rkind,
    rval,
    fam,
    par,
    kx,
    ky,
    ks,
    cx,
    ch,
    lip,
    out_left,
    out_right,
):
    """Advance one interval by ``nsteps`` forward-Euler steps, in place.

    Interior interfaces use the Rusanov flux with the global Lipschitz
    constant; Dirichlet boundary interfaces use the exact Godunov flux
    against the ghost value; free boundaries copy the edge cell (so the
    boundary flux is H(edge)).  Per-step boundary fluxes are written to
    ``out_left``/``out_right``.
    """
    n = u.shape[0]
    half_lip = 0.5 * lip
    for s in range(nsteps):
        h = h_eval(fam, par, kx, ky, ks, u)
        if lkind == DIRICHLET:
            fl = godunov_scalar(fam, par, kx, ky, ks, cx, ch, lval, u[0])
        else:
            fl = h[0]
        if rkind == DIRICHLET:
            fr = godunov_scalar(fam, par, kx, ky, ks, cx, ch, u[n - 1], rval)
        else:
            fr = h[n - 1]
        if n == 1:
            u[0] = u[0] - (dt / w[0]) * (fr - fl)
        else:
            fi = 0.5 * (h[:-1] + h[1:]) - half_lip * (u[1:] - u[:-1])
            u[0] = u[0] - (dt / w[0]) * (fi[0] - fl)
            u[1:-1] = u[1:-1] - (dt / w[1:-1]) * (fi[1:] - fi[:-1])
            u[n - 1] = u[n - 1] - (dt / w[n - 1]) * (fr - fi[n - 2])
        out_left[s] = fl
        out_right[s] = fr
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(
                f"non-finite cell value at step {s}: the discrete max principle "
                "was violated, which signals an internal bug"
            )


def run_viscous(
    u,
    dx,
    dt,
    nsteps,
    eps,
    lkind,
    lval,
    rkind,
    rval,
    fam,
    par,
    kx,
    ky,
    ks,
    lip,
    out_left,
    out_right,
    h_override=None,
):
    """Advance the parabolic regularization by ``nsteps`` explicit steps.

    Rusanov convection plus central second-difference diffusion ``eps`` on
    a uniform grid.  Dirichlet boundaries hold the ghost cell at the given
    value; free boundaries copy the edge cell.  Recorded boundary fluxes
    include the diffusive part.  ``h_override`` (a vectorized callable)
    replaces the builtin flux evaluation, e.g. for mollified variants.
    """
    n = u.shape[0]
    half_lip = 0.5 * lip
    r = eps * dt / (dx * dx)
    d = eps / dx
    for s in range(nsteps):
        gl = lval if lkind == DIRICHLET else u[0]
        gr = rval if rkind == DIRICHLET else u[n - 1]
        ue = np.empty(n + 2, dtype=np.float64)
        ue[0] = gl
        ue[1:-1] = u
        ue[-1] = gr
        if h_override is None:
            h = h_eval(fam, par, kx, ky, ks, ue)
        else:
            h = h_override(ue)
        fc = 0.5 * (h[:-1] + h[1:]) - half_lip * (ue[1:] - ue[:-1])
        out_left[s] = fc[0] - d * (u[0] - gl)
        out_right[s] = fc[n] - d * (gr - u[n - 1])
        u += -(dt / dx) * (fc[1:] - fc[:-1]) + r * (ue[2:] - 2.0 * u + ue[:-2])
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite value at viscous step {s}")
