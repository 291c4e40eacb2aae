"""Mass ledgers: each point mass drains at the jump of the flux trace
across its position.

For a positive atom the one-sided boundary fluxes recorded by the two
adjacent interval solvers satisfy ``f_plus >= f_minus`` (and the reverse
for a negative atom), so the running integral of ``f_plus - f_minus``
shrinks the mass monotonically toward zero.  The ledger integrates the
per-step traces exactly (each step's flux acts over that step's dt, which
reproduces the scheme's own mass exchange to round-off), clamps at zero,
and records the linearly interpolated death time when the clamp first
activates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flux_model import FluxModel


class TraceSignError(RuntimeError):
    """A boundary-trace jump violated its sign condition beyond tolerance."""


@dataclass
class MassLedger:
    """Running mass account of one atom."""

    atom_index: int
    position: float
    birth_mass: float
    sign_tol: float = 1e-10
    time: float = 0.0
    integral: float = 0.0
    mass: float = field(init=False)
    death_time: Optional[float] = None
    times: list[float] = field(default_factory=list)
    masses: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.birth_mass == 0.0:
            raise ValueError("atom mass must be nonzero")
        self.mass = self.birth_mass
        self.times.append(self.time)
        self.masses.append(self.mass)

    @property
    def alive(self) -> bool:
        return self.death_time is None

    @property
    def sign(self) -> float:
        return 1.0 if self.birth_mass > 0 else -1.0

    def curve(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.masses)


def _clamped_mass(birth: float, integral: float) -> float:
    raw = birth - integral
    if birth > 0:
        return raw if raw > 0.0 else 0.0
    return raw if raw < 0.0 else 0.0


def update(
    ledger: MassLedger,
    t0: float,
    dt: float,
    f_plus: np.ndarray,
    f_minus: np.ndarray,
) -> MassLedger:
    """Fold a contiguous block of per-step traces into the ledger.

    ``f_plus``/``f_minus`` are the traces on the right/left side of the
    atom, one value per step of length ``dt`` starting at ``t0``.  Raises
    :class:`TraceSignError` if the jump violates its sign condition beyond
    ``sign_tol`` (a broken trace; the run must abort).
    """
    if not ledger.alive:
        raise ValueError("ledger already closed by a death")
    if abs(t0 - ledger.time) > 1e-9 * max(1.0, abs(t0)):
        raise ValueError("trace block is not contiguous with the ledger")
    g = np.asarray(f_plus, dtype=np.float64) - np.asarray(f_minus, dtype=np.float64)
    if ledger.birth_mass > 0:
        bad = g < -ledger.sign_tol
    else:
        bad = g > ledger.sign_tol
    if np.any(bad):
        k = int(np.argmax(bad))
        raise TraceSignError(
            f"atom {ledger.atom_index}: trace jump {g[k]:.3e} at "
            f"t={t0 + k * dt:.6f} violates its sign condition "
            f"(tol {ledger.sign_tol:.3e})"
        )

    cum = ledger.integral + np.cumsum(g) * dt
    raw = ledger.birth_mass - cum
    if ledger.birth_mass > 0:
        crossed = raw <= 0.0
    else:
        crossed = raw >= 0.0

    n = g.size
    stop = int(np.argmax(crossed)) if bool(crossed.any()) else n
    for k in range(n):
        t_k = t0 + (k + 1) * dt
        if k < stop:
            ledger.integral = float(cum[k])
            ledger.mass = _clamped_mass(ledger.birth_mass, ledger.integral)
            ledger.time = t_k
            ledger.times.append(t_k)
            ledger.masses.append(ledger.mass)
        else:
            prev = ledger.birth_mass - ledger.integral
            theta = 1.0 if g[k] == 0.0 else prev / (g[k] * dt)
            theta = min(max(theta, 0.0), 1.0)
            t_cross = t0 + k * dt + theta * dt
            ledger.integral += float(g[k]) * theta * dt
            ledger.mass = 0.0
            ledger.time = t_cross
            ledger.death_time = t_cross
            ledger.times.append(t_cross)
            ledger.masses.append(0.0)
            break
    return ledger


def persistence_lower_bound(c: float, model: FluxModel) -> float:
    """Guaranteed survival time |c| / (2 sup|H|) of an atom of mass c.

    Returns +inf for a flux that is identically zero.
    """
    if c == 0.0:
        raise ValueError("atom mass must be nonzero")
    scale = model.sup_abs()
    if scale == 0.0:
        return math.inf
    return abs(c) / (2.0 * scale)


@dataclass(frozen=True)
class DecayBoundReport:
    ok: bool
    worst_margin: float
    worst_time: float

    def __str__(self):
        status = "PASS" if self.ok else "FAIL"
        return (
            f"mass-decay bound: {status} "
            f"(worst margin {self.worst_margin:.3e} at t={self.worst_time:.4f})"
        )


def mass_decay_bound_check(
    ledger: MassLedger, model: FluxModel, tol: float = 1e-10
) -> DecayBoundReport:
    """Check |C(t) - c| <= 2 sup|H| t + tol at every recorded sample.

    The margin is (bound - deviation); negative margin means failure.
    """
    t, m = ledger.curve()
    dev = np.abs(m - ledger.birth_mass)
    bound = 2.0 * model.sup_abs() * t + tol
    margins = bound - dev
    k = int(np.argmin(margins))
    return DecayBoundReport(
        ok=bool(np.all(margins >= 0.0)),
        worst_margin=float(margins[k]),
        worst_time=float(t[k]),
    )
