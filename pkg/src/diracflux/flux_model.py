"""Bounded Lipschitz flux functions and the two-point numerical fluxes built on them.

A :class:`FluxModel` bundles a scalar flux ``H`` (normalized so that
``H(0) = 0``) with the analytic quantities the solver and the audit suite
need: the Lipschitz constant, the global sup/inf of ``H``, and the four
one-sided asymptotic bounds of ``H`` at ``u -> +inf`` and ``u -> -inf``.
All of these are supplied in closed form per flux family, never estimated
numerically, because the boundary-trace audits compare against them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# |u| beyond which a family with a one-sided limit is within FLUX_TOL of it.
FLUX_TOL = 1e-6

# Sentinel for "no saturation threshold" (flux has no one-sided limit).
NO_SATURATION = float("inf")

_FAMILIES = (
    "zero",
    "saturating_rational",
    "arctan_like",
    "bounded_piecewise_linear",
    "nonmonotone_bump",
)

# Integer ids used by the compiled/numpy stepping kernels.
FAMILY_IDS = {name: i for i, name in enumerate(_FAMILIES)}


@dataclass(frozen=True)
class FluxModel:
    """A flux ``H`` with its Lipschitz constant and asymptotic bounds.

    Immutable after construction; safe to share across threads.
    """

    family: str
    params: tuple[float, ...]
    eval: Callable[[np.ndarray | float], np.ndarray | float]
    lipschitz: float
    sup_h: float
    inf_h: float
    limsup_pinf: float
    liminf_pinf: float
    limsup_minf: float
    liminf_minf: float
    saturation_threshold: float
    # Interior extremum candidates of H (positions and values); monotone
    # between consecutive entries.  Used for exact interval max/min.
    critical_points: tuple[float, ...] = ()
    critical_values: tuple[float, ...] = ()
    # Piecewise-linear data (empty for analytic families).
    knots_x: np.ndarray = field(default_factory=lambda: np.empty(0))
    knots_y: np.ndarray = field(default_factory=lambda: np.empty(0))
    knot_slopes: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def family_id(self) -> int:
        return FAMILY_IDS[self.family]

    @property
    def param_array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=np.float64)

    def sup_abs(self) -> float:
        """max(|sup H|, |inf H|), the flux scale of the decay bounds."""
        return max(abs(self.sup_h), abs(self.inf_h))

    def max_on_interval(self, lo: float, hi: float) -> float:
        """Exact max of H over [lo, hi] (monotone between critical points)."""
        m = max(float(self.eval(lo)), float(self.eval(hi)))
        for x, h in zip(self.critical_points, self.critical_values):
            if lo < x < hi:
                m = max(m, h)
        return m

    def min_on_interval(self, lo: float, hi: float) -> float:
        """Exact min of H over [lo, hi]."""
        m = min(float(self.eval(lo)), float(self.eval(hi)))
        for x, h in zip(self.critical_points, self.critical_values):
            if lo < x < hi:
                m = min(m, h)
        return m


def _pw_linear_eval(kx: np.ndarray, ky: np.ndarray, slopes: np.ndarray):
    """Continuous piecewise-linear interpolant, clamped constant outside the knots.

    Written with explicit searchsorted + arithmetic (not np.interp) so the
    compiled kernel can reproduce it operation for operation.
    """

    def h(u):
        arr = np.asarray(u, dtype=np.float64)
        j = np.clip(np.searchsorted(kx, arr, side="right") - 1, 0, len(kx) - 2)
        out = ky[j] + (arr - kx[j]) * slopes[j]
        out = np.where(arr <= kx[0], ky[0], out)
        out = np.where(arr >= kx[-1], ky[-1], out)
        if np.isscalar(u) or np.ndim(u) == 0:
            return float(out)
        return out

    return h


def make_builtin(name: str, params: list[float] | tuple[float, ...] = ()) -> FluxModel:
    """Construct a builtin flux family with exact analytic metadata.

    Families:
      * ``zero``: H = 0.
      * ``saturating_rational`` [a]: H(u) = a*u/(1+|u|).
      * ``arctan_like`` [a]: H(u) = a*u/sqrt(1+u^2).
      * ``bounded_piecewise_linear`` [x0,y0,x1,y1,...]: continuous
        piecewise-linear through the knots, constant outside them.
      * ``nonmonotone_bump`` [a]: H(u) = a*u/(1+u^2), extrema at u = +-1.

    Raises ValueError for an unknown name or parameters violating H(0)=0
    or boundedness.
    """
    params = tuple(float(p) for p in params)

    if name == "zero":
        if params:
            raise ValueError("zero flux takes no parameters")
        return FluxModel(
            family=name,
            params=(),
            eval=lambda u: np.zeros_like(np.asarray(u, dtype=np.float64))
            if np.ndim(u)
            else 0.0,
            lipschitz=0.0,
            sup_h=0.0,
            inf_h=0.0,
            limsup_pinf=0.0,
            liminf_pinf=0.0,
            limsup_minf=0.0,
            liminf_minf=0.0,
            saturation_threshold=1.0,
        )

    if name == "saturating_rational":
        if len(params) != 1 or params[0] == 0.0:
            raise ValueError("saturating_rational needs one nonzero parameter a")
        a = params[0]

        def h_sat(u, _a=a):
            arr = np.asarray(u, dtype=np.float64)
            out = _a * arr / (1.0 + np.abs(arr))
            return float(out) if np.ndim(u) == 0 else out

        return FluxModel(
            family=name,
            params=params,
            eval=h_sat,
            lipschitz=abs(a),
            sup_h=abs(a),
            inf_h=-abs(a),
            limsup_pinf=a,
            liminf_pinf=a,
            limsup_minf=-a,
            liminf_minf=-a,
            saturation_threshold=abs(a) / FLUX_TOL - 1.0,
        )

    if name == "arctan_like":
        if len(params) != 1 or params[0] == 0.0:
            raise ValueError("arctan_like needs one nonzero parameter a")
        a = params[0]

        def h_atl(u, _a=a):
            arr = np.asarray(u, dtype=np.float64)
            out = _a * arr / np.sqrt(1.0 + arr * arr)
            return float(out) if np.ndim(u) == 0 else out

        # 1 - u/sqrt(1+u^2) <= s  at  u = (1-s)/sqrt(2s - s^2)
        s = FLUX_TOL / abs(a)
        m_sat = (1.0 - s) / np.sqrt(2.0 * s - s * s)
        return FluxModel(
            family=name,
            params=params,
            eval=h_atl,
            lipschitz=abs(a),
            sup_h=abs(a),
            inf_h=-abs(a),
            limsup_pinf=a,
            liminf_pinf=a,
            limsup_minf=-a,
            liminf_minf=-a,
            saturation_threshold=float(m_sat),
        )

    if name == "bounded_piecewise_linear":
        if len(params) < 4 or len(params) % 2 != 0:
            raise ValueError("bounded_piecewise_linear needs knots x0,y0,x1,y1,...")
        kx = np.asarray(params[0::2], dtype=np.float64)
        ky = np.asarray(params[1::2], dtype=np.float64)
        if not np.all(np.diff(kx) > 0):
            raise ValueError("knot abscissae must be strictly increasing")
        slopes = (ky[1:] - ky[:-1]) / (kx[1:] - kx[:-1])
        h = _pw_linear_eval(kx, ky, slopes)
        if h(0.0) != 0.0:
            raise ValueError("piecewise-linear flux must satisfy H(0)=0 exactly")
        interior = [(float(x), float(y)) for x, y in zip(kx[1:-1], ky[1:-1])]
        return FluxModel(
            family=name,
            params=params,
            eval=h,
            lipschitz=float(np.max(np.abs(slopes))),
            sup_h=float(np.max(ky)),
            inf_h=float(np.min(ky)),
            limsup_pinf=float(ky[-1]),
            liminf_pinf=float(ky[-1]),
            limsup_minf=float(ky[0]),
            liminf_minf=float(ky[0]),
            saturation_threshold=float(max(abs(kx[0]), abs(kx[-1]))),
            critical_points=tuple(x for x, _ in interior),
            critical_values=tuple(y for _, y in interior),
            knots_x=kx,
            knots_y=ky,
            knot_slopes=slopes,
        )

    if name == "nonmonotone_bump":
        if len(params) != 1 or params[0] == 0.0:
            raise ValueError("nonmonotone_bump needs one nonzero parameter a")
        a = params[0]

        def h_bump(u, _a=a):
            arr = np.asarray(u, dtype=np.float64)
            out = _a * arr / (1.0 + arr * arr)
            return float(out) if np.ndim(u) == 0 else out

        hi = abs(a) / 2.0
        return FluxModel(
            family=name,
            params=params,
            eval=h_bump,
            lipschitz=abs(a),
            sup_h=hi,
            inf_h=-hi,
            limsup_pinf=0.0,
            liminf_pinf=0.0,
            limsup_minf=0.0,
            liminf_minf=0.0,
            saturation_threshold=abs(a) / FLUX_TOL,
            critical_points=(-1.0, 1.0),
            critical_values=(-a / 2.0, a / 2.0),
        )

    raise ValueError(f"unknown flux family {name!r}")


def numerical_flux(u_left, u_right, model: FluxModel):
    """Two-point Rusanov flux F(a,b) = (H(a)+H(b))/2 - L*(b-a)/2.

    Consistent (F(u,u) = H(u)), nondecreasing in the first argument and
    nonincreasing in the second for any Lipschitz bounded H, which is what
    the interior update relies on.  Total function, no failure modes.
    """
    ha = model.eval(u_left)
    hb = model.eval(u_right)
    return 0.5 * (ha + hb) - 0.5 * model.lipschitz * (u_right - u_left)


def godunov_flux(u_left: float, u_right: float, model: FluxModel) -> float:
    """Exact two-point Godunov flux.

    ``min`` of H over [u_left, u_right] when u_left <= u_right, ``max``
    over [u_right, u_left] otherwise.  Used at Dirichlet boundary
    interfaces, where the Rusanov dissipation proportional to the
    ghost-interior jump would otherwise inject spurious mass that grows
    with the ghost value.  Stays inside [inf H, sup H] by construction.
    """
    a = float(u_left)
    b = float(u_right)
    if a == b:
        return float(model.eval(a))
    if a < b:
        return model.min_on_interval(a, b)
    return model.max_on_interval(b, a)
