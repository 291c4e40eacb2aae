"""Quadrature audits of a computed trajectory.

Every check is a pure function of a :class:`~diracflux.epoch_manager.Trajectory`
(re-running a check gives a bit-identical result).  Space integrals use the
midpoint rule on the solver's own cells, time integrals the trapezoid rule
on the stored dense snapshots, and test functions are evaluated
analytically, so the reported residuals reflect the solution rather than
the quadrature.

The entropy-type integrands are evaluated with the shifted entropy
``|u - k| - |k|`` (same inequality, since the shift pairs with zeta_t and
the initial term identically), which keeps the numerics well conditioned
for the large ``k`` probed near the ghost values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .atom_dynamics import persistence_lower_bound
from .epoch_manager import Trajectory
from .flux_model import FluxModel
from .interval_solver import IntervalRunResult
from .measure_state import total_mass


def _q(s: np.ndarray) -> np.ndarray:
    """C1 piecewise-cubic bump profile on [-1, 1]: q(0)=1, q(+-1)=q'(+-1)=0."""
    a = np.abs(s)
    return np.where(a < 1.0, 2.0 * a**3 - 3.0 * a**2 + 1.0, 0.0)


def _dq(s: np.ndarray) -> np.ndarray:
    a = np.abs(s)
    return np.where(a < 1.0, 6.0 * s * a - 6.0 * s, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Tensor test function zeta(x, t) = alpha(x) * beta(t).

    ``alpha`` is a compactly supported C1 piecewise-cubic bump centered at
    ``x_center`` with half-width ``x_radius``.  ``beta`` is either the
    decaying profile q(t / t_end) (positive at t=0, vanishing at ``t_end``)
    or, when ``t_center``/``t_radius`` are set, a compact bump in time.
    """

    x_center: float
    x_radius: float
    t_end: float
    t_center: Optional[float] = None
    t_radius: Optional[float] = None

    def alpha(self, x):
        return _q((np.asarray(x, dtype=np.float64) - self.x_center) / self.x_radius)

    def dalpha(self, x):
        s = (np.asarray(x, dtype=np.float64) - self.x_center) / self.x_radius
        return _dq(s) / self.x_radius

    def beta(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.t_center is None:
            return _q(np.clip(t / self.t_end, 0.0, None))
        return _q((t - self.t_center) / self.t_radius)

    def dbeta(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.t_center is None:
            return _dq(np.clip(t / self.t_end, 0.0, None)) / self.t_end
        return _dq((t - self.t_center) / self.t_radius) / self.t_radius

    @property
    def t_support_end(self) -> float:
        if self.t_center is None:
            return self.t_end
        return self.t_center + self.t_radius

    def scale(self) -> float:
        """Size of the integrals a bounded solution can produce against zeta."""
        t_len = self.t_end if self.t_center is None else 2.0 * self.t_radius
        sup_da = 1.5 / self.x_radius
        sup_db = 1.5 / (self.t_end if self.t_center is None else self.t_radius)
        return 2.0 * self.x_radius * t_len * max(sup_db, sup_da, 1.0)


def random_test_functions(
    traj: Trajectory, count: int, seed: int, t_fraction: tuple[float, float] = (0.5, 1.0)
) -> list[TestFunction]:
    """Seeded family of decaying-in-time test functions inside the domain."""
    rng = np.random.default_rng(seed)
    a, b = float(traj.partition[0]), float(traj.partition[-1])
    span = b - a
    out = []
    for _ in range(count):
        r = rng.uniform(0.08, 0.3) * span
        c = rng.uniform(a + r, b - r)
        tau = traj.t_end * rng.uniform(*t_fraction)
        out.append(TestFunction(x_center=c, x_radius=r, t_end=tau))
    return out


def chebyshev_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n Chebyshev-spaced points on [lo, hi], sorted ascending."""
    i = np.arange(n)
    nodes = np.cos((2.0 * i + 1.0) * math.pi / (2.0 * n))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes)


def attained_range(traj: Trajectory, margin: float = 1.0) -> tuple[float, float]:
    return (
        float(traj.dense_fields.min()) - margin,
        float(traj.dense_fields.max()) + margin,
    )


def _dense_block(traj: Trajectory, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense times and fields restricted to [0, tau], with a node at tau."""
    t = traj.dense_times
    if t.size < 4:
        raise ValueError(
            "trajectory lacks dense snapshots; rerun solve with dense_target set"
        )
    if tau > t[-1] + 1e-9 * max(1.0, tau):
        raise ValueError("test function support exceeds the trajectory horizon")
    k = int(np.searchsorted(t, tau - 1e-12 * max(1.0, tau)))
    times = np.append(t[:k], tau)
    fields = np.vstack([traj.dense_fields[:k], traj.dense_interp(tau)])
    return times, fields


def _atom_time_integral(
    tr_times: np.ndarray, tr_masses: np.ndarray, weight, tau: float
) -> float:
    """Trapezoid integral of mass-curve * weight(t) over [0, tau]."""
    mask = tr_times <= tau
    t = np.append(tr_times[mask], tau)
    m = np.append(tr_masses[mask], np.interp(tau, tr_times, tr_masses))
    return float(np.trapz(m * weight(t), t))


def weak_residual(traj: Trajectory, zeta: TestFunction) -> float:
    """Residual of the distributional identity the solution must satisfy.

    Quadrature of  integral[u_r zeta_t + H(u_r) zeta_x] dx dt
    + sum_j integral C_j(t) zeta_t(x_j, t) dt + <u(0), zeta(., 0)>,
    where u(0) is the trajectory's own initial state.
    """
    tau = zeta.t_support_end
    times, fields = _dense_block(traj, tau)
    a_w = zeta.alpha(traj.centers) * traj.widths
    b_w = zeta.dalpha(traj.centers) * traj.widths
    beta = zeta.beta(times)
    dbeta = zeta.dbeta(times)

    p_t = fields @ a_w
    q_t = traj.model.eval(fields) @ b_w
    res = float(np.trapz(p_t * dbeta, times)) + float(np.trapz(q_t * beta, times))

    beta0 = float(zeta.beta(0.0))
    res += float(np.dot(traj.dense_fields[0], a_w)) * beta0
    for tr in traj.atom_traces:
        az = float(zeta.alpha(tr.position))
        if az == 0.0:
            continue
        res += az * _atom_time_integral(tr.times, tr.masses, zeta.dbeta, tau)
        res += az * tr.birth_mass * beta0
    return res


def entropy_residual(traj: Trajectory, k: float, zeta: TestFunction) -> float:
    """Entropy production against a nonnegative test function; contract >= -tol.

    Uses the shifted entropy pair phi_k(u) = |u-k| - |k| and
    psi_k(u) = sgn(u-k) (H(u) - H(k)); the singular part contributes
    |C_j(t)| against zeta_t.
    """
    tau = zeta.t_support_end
    times, fields = _dense_block(traj, tau)
    a_w = zeta.alpha(traj.centers) * traj.widths
    b_w = zeta.dalpha(traj.centers) * traj.widths
    beta = zeta.beta(times)
    dbeta = zeta.dbeta(times)

    hk = float(traj.model.eval(k))
    phi = np.abs(fields - k) - abs(k)
    psi = np.sign(fields - k) * (traj.model.eval(fields) - hk)

    res = float(np.trapz((phi @ a_w) * dbeta, times))
    res += float(np.trapz((psi @ b_w) * beta, times))

    beta0 = float(zeta.beta(0.0))
    u0 = traj.dense_fields[0]
    res += float(np.dot(np.abs(u0 - k) - abs(k), a_w)) * beta0
    for tr in traj.atom_traces:
        az = float(zeta.alpha(tr.position))
        if az == 0.0:
            continue
        res += az * _atom_time_integral(
            tr.times, np.abs(tr.masses), zeta.dbeta, tau
        )
        res += az * abs(tr.birth_mass) * beta0
    return res


@dataclass(frozen=True)
class CompatResult:
    atom_index: int
    k: float
    left_value: float
    right_value: float
    left_second: float
    right_second: float
    tol: float
    passed: bool


def compatibility_check(
    traj: Trajectory,
    j: int,
    k: float,
    beta: TestFunction,
    tol: float = 0.05,
) -> CompatResult:
    """One-sided entropy-flux sign audit at atom j.

    Evaluates the time integrals of sgn(u - k)(H(u) - H(k)) beta(t) at the
    first interior cell on each side of the atom (a second-cell probe is
    reported alongside for drift detection), with the one-sided sign picked
    by the atom's sign: for a positive atom the negative part must make the
    right integral <= tol and the left integral >= -tol; mirrored for a
    negative atom.  ``beta`` must be a time bump supported before the
    atom's death.
    """
    if j < 0 or j >= len(traj.atom_traces):
        raise ValueError(f"no atom with index {j}")
    tr = traj.atom_traces[j]
    t_j = tr.death_time if tr.death_time is not None else traj.t_end
    if beta.t_center is None or beta.t_support_end > t_j + 1e-12:
        raise ValueError("beta must be a compact time bump supported before the death")

    idx_r = int(np.searchsorted(traj.centers, tr.position))
    idx_l = idx_r - 1
    if idx_l < 0 or idx_r >= traj.centers.size:
        raise ValueError("atom has no interior neighbor cell on one side")

    times = traj.dense_times
    bvals = beta.beta(times)
    hk = float(traj.model.eval(k))
    positive = tr.birth_mass > 0

    def side_integral(idx: int) -> float:
        u_p = traj.dense_fields[:, idx]
        d = u_p - k
        if positive:
            sgn = np.where(d < 0.0, -1.0, 0.0)
        else:
            sgn = np.where(d > 0.0, 1.0, 0.0)
        return float(np.trapz(sgn * (traj.model.eval(u_p) - hk) * bvals, times))

    right = side_integral(idx_r)
    left = side_integral(idx_l)
    right2 = side_integral(idx_r + 1) if idx_r + 1 < traj.centers.size else right
    left2 = side_integral(idx_l - 1) if idx_l - 1 >= 0 else left
    passed = (right <= tol) and (left >= -tol)
    return CompatResult(
        atom_index=j,
        k=k,
        left_value=left,
        right_value=right,
        left_second=left2,
        right_second=right2,
        tol=tol,
        passed=passed,
    )


@dataclass(frozen=True)
class CheckRow:
    name: str
    tag: str
    residual: float
    tol: float
    passed: bool

    def render(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name:<34s} {self.tag:<16s} "
            f"{self.residual: .6e}  tol {self.tol: .3e}  {flag}"
        )


@dataclass
class VerificationReport:
    rows: list[CheckRow]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)

    def render(self) -> str:
        lines = [r.render() for r in self.rows]
        lines.append(f"overall: {'PASS' if self.ok else 'FAIL'} ({len(self.rows)} checks)")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {
                    "name": r.name,
                    "tag": r.tag,
                    "residual": r.residual,
                    "tol": r.tol,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }


def comparison_check(
    result_a: IntervalRunResult,
    result_b: IntervalRunResult,
    levels: tuple[float, float, float, float],
    model: FluxModel,
    tol: float,
) -> VerificationReport:
    """Ordered-data comparison with boundary penalty.

    Asserts integral [u_a - u_b]_+ <= integral [u0_a - u0_b]_+
    + ([m1 - n1]_+ + [m2 - n2]_+) * lipschitz * t + tol at every shared
    snapshot time of two runs on the same grid.
    """
    if result_a.centers.size != result_b.centers.size or not np.allclose(
        result_a.centers, result_b.centers
    ):
        raise ValueError("comparison requires identical discretizations")
    m1, m2, n1, n2 = levels
    w = result_a.widths
    init_gap = float(np.dot(np.clip(result_a.fields[0] - result_b.fields[0], 0, None), w))
    penalty_rate = (max(m1 - n1, 0.0) + max(m2 - n2, 0.0)) * model.lipschitz
    rows = []
    for t_a, f_a, f_b in zip(result_a.times, result_a.fields, result_b.fields):
        lhs = float(np.dot(np.clip(f_a - f_b, 0.0, None), w))
        rhs = init_gap + penalty_rate * t_a + tol
        rows.append(
            CheckRow(
                name=f"comparison@t={t_a:.4f}",
                tag="ordered-growth",
                residual=lhs - rhs + tol,
                tol=tol,
                passed=lhs <= rhs,
            )
        )
    return VerificationReport(rows)


def l1_growth_check(
    traj: Trajectory, model: FluxModel, tol: float = 1e-9
) -> VerificationReport:
    """Regular-part L1 growth bound at each snapshot.

    ||u_r(t)||_1 <= ||u_r(0)||_1 + sum_j |c_j| + 2 sup|H| t + tol; the atom
    term accounts for mass the dying atoms release into the field.
    """
    w = traj.widths
    base = float(np.dot(np.abs(traj.snapshots[0].regular.values), w))
    atom_budget = sum(abs(tr.birth_mass) for tr in traj.atom_traces)
    rate = 2.0 * model.sup_abs()
    rows = []
    for t, snap in zip(traj.times, traj.snapshots):
        lhs = float(np.dot(np.abs(snap.regular.values), w))
        rhs = base + atom_budget + rate * t + tol
        rows.append(
            CheckRow(
                name=f"l1-growth@t={t:.4f}",
                tag="l1-growth",
                residual=lhs - rhs + tol,
                tol=tol,
                passed=lhs <= rhs,
            )
        )
    return VerificationReport(rows)


def conservation_check(traj: Trajectory, tol: Optional[float] = None) -> CheckRow:
    """Total signed mass drift over the run (atoms included)."""
    if tol is None:
        tol = 10.0 * traj.config.dx
    m0 = total_mass(traj.snapshots[0])
    drift = max(abs(total_mass(s) - m0) for s in traj.snapshots)
    return CheckRow(
        name="conservation",
        tag="mass-drift",
        residual=drift,
        tol=tol,
        passed=drift <= tol,
    )


def sign_monotonicity_check(
    traj: Trajectory, j: int, decay_tol: Optional[float] = None
) -> CheckRow:
    """Atom-j audit: fixed sign, nonincreasing magnitude, bounded decay rate,
    death no earlier than the persistence bound."""
    if decay_tol is None:
        decay_tol = 10.0 * traj.config.dx
    tr = traj.atom_traces[j]
    t, m = tr.times, tr.masses
    sign_ok = bool(np.all(m * np.sign(tr.birth_mass) >= 0.0))
    mono_ok = bool(np.all(np.diff(np.abs(m)) <= 1e-12))
    dev = np.abs(m - tr.birth_mass) - (2.0 * traj.model.sup_abs() * t + decay_tol)
    decay_ok = bool(np.all(dev <= 0.0))
    death_ok = True
    if tr.death_time is not None:
        bound = persistence_lower_bound(tr.birth_mass, traj.model)
        death_ok = tr.death_time >= bound - traj.dt - 1e-12
    passed = sign_ok and mono_ok and decay_ok and death_ok
    return CheckRow(
        name=f"atom[{j}] sign/monotonicity",
        tag="mass-decay",
        residual=float(np.max(dev)),
        tol=decay_tol,
        passed=passed,
    )


def run_standard_checks(
    traj: Trajectory,
    n_zeta: int = 10,
    k_points: int = 21,
    seed: int = 20240,
    compat_tol: float = 0.05,
    checks: Sequence[str] = ("conservation", "weak", "entropy", "compatibility",
                             "l1_growth", "sign"),
) -> VerificationReport:
    """The full audit of one trajectory, as a flat report."""
    rows: list[CheckRow] = []
    zetas = random_test_functions(traj, n_zeta, seed)
    tol_weak = 5.0 * traj.config.dx / 1e-3 * 1e-3
    tol_entropy = traj.config.dx / 1e-3 * 1e-3

    if "conservation" in checks:
        rows.append(conservation_check(traj))

    if "weak" in checks:
        for i, z in enumerate(zetas):
            r = weak_residual(traj, z) / z.scale()
            rows.append(
                CheckRow(
                    name=f"weak-residual zeta[{i}]",
                    tag="weak-form",
                    residual=r,
                    tol=tol_weak,
                    passed=abs(r) <= tol_weak,
                )
            )

    if "entropy" in checks:
        lo, hi = attained_range(traj)
        kgrid = chebyshev_grid(lo, hi, k_points)
        for i, z in enumerate(zetas):
            worst = math.inf
            for k in kgrid:
                worst = min(worst, entropy_residual(traj, float(k), z))
            rows.append(
                CheckRow(
                    name=f"entropy-residual zeta[{i}]",
                    tag="entropy",
                    residual=worst,
                    tol=tol_entropy,
                    passed=worst >= -tol_entropy,
                )
            )

    if "compatibility" in checks:
        lo, hi = attained_range(traj)
        kgrid = chebyshev_grid(lo, hi, k_points)
        for j, tr in enumerate(traj.atom_traces):
            t_j = tr.death_time if tr.death_time is not None else traj.t_end
            betas = [
                TestFunction(
                    x_center=0.0,
                    x_radius=1.0,
                    t_end=traj.t_end,
                    t_center=t_j * c,
                    t_radius=t_j * r,
                )
                for c, r in ((0.5, 0.45), (0.3, 0.25), (0.7, 0.25), (0.5, 0.2), (0.25, 0.2))
            ]
            worst = -math.inf
            ok = True
            for k in kgrid:
                for beta in betas:
                    res = compatibility_check(traj, j, float(k), beta, tol=compat_tol)
                    ok = ok and res.passed
                    worst = max(worst, res.right_value, -res.left_value)
            rows.append(
                CheckRow(
                    name=f"compatibility atom[{j}]",
                    tag="one-sided-flux",
                    residual=worst,
                    tol=compat_tol,
                    passed=ok,
                )
            )

    if "l1_growth" in checks:
        rep = l1_growth_check(traj, traj.model)
        worst_row = max(rep.rows, key=lambda r: r.residual)
        rows.append(
            CheckRow(
                name="l1-growth (worst snapshot)",
                tag="l1-growth",
                residual=worst_row.residual,
                tol=worst_row.tol,
                passed=rep.ok,
            )
        )

    if "sign" in checks:
        for j in range(len(traj.atom_traces)):
            rows.append(sign_monotonicity_check(traj, j))

    return VerificationReport(rows)
