"""Full-line solver: interval decomposition, lock-step stepping, atom deaths.

The line is partitioned at the alive atoms; every subinterval evolves with
the shared time step, its boundary kind fixed by the signs of the adjacent
atoms (``singular_plus`` next to a positive atom, ``singular_minus`` next
to a negative one, ``free`` at the outer truncation).  Boundary fluxes feed
the mass ledgers.  When a ledger is about to cross zero, the step is split
at the interpolated crossing, all atoms that reach zero there die together,
the adjacent intervals merge, and a new epoch starts.  At most p+1 epochs
occur for p atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .atom_dynamics import MassLedger, persistence_lower_bound
from .atom_dynamics import update as ledger_update
from .flux_model import FluxModel
from .interval_solver import BoundarySpec, SolverConfig, advance_span
from .measure_state import Atom, MeasureState, RegularField


@dataclass(frozen=True)
class Span:
    """One subinterval: a cell range plus its two boundary conditions."""

    lo: int
    hi: int
    left: BoundarySpec
    right: BoundarySpec
    left_atom: Optional[int] = None
    right_atom: Optional[int] = None


@dataclass
class Epoch:
    """A maximal time window with a fixed set of alive atoms."""

    start: float
    end: float
    spans: list[Span]
    alive: tuple[int, ...]
    died: tuple[int, ...] = ()


@dataclass
class AtomTrace:
    """Recorded mass history of one atom."""

    index: int
    position: float
    birth_mass: float
    death_time: Optional[float]
    times: np.ndarray
    masses: np.ndarray

    def mass_at(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.masses)


@dataclass
class Trajectory:
    """Everything a run produced: snapshots, mass curves, epochs, dense data."""

    model: FluxModel
    config: SolverConfig
    m_ghost: float
    dt: float
    partition: np.ndarray
    panel_cells: np.ndarray
    centers: np.ndarray
    widths: np.ndarray
    t_end: float
    times: list[float]
    snapshots: list[MeasureState]
    atom_traces: list[AtomTrace]
    epochs: list[Epoch]
    dense_times: np.ndarray
    dense_fields: np.ndarray

    @property
    def initial(self) -> MeasureState:
        return self.snapshots[0]

    @property
    def final(self) -> MeasureState:
        return self.snapshots[-1]

    def dense_interp(self, t: float) -> np.ndarray:
        """Field at time t, linearly interpolated between dense snapshots."""
        k = int(np.searchsorted(self.dense_times, t))
        k = min(max(k, 1), self.dense_times.size - 1)
        t0, t1 = self.dense_times[k - 1], self.dense_times[k]
        if t1 == t0:
            return self.dense_fields[k]
        lam = (t - t0) / (t1 - t0)
        return (1 - lam) * self.dense_fields[k - 1] + lam * self.dense_fields[k]


def _build_spans(
    alive: Sequence[int],
    atom_cellb: Sequence[int],
    atom_signs: Sequence[float],
    n_cells: int,
    m_ghost: float,
) -> list[Span]:
    def side_spec(j: int) -> BoundarySpec:
        if atom_signs[j] > 0:
            return BoundarySpec.singular_plus(m_ghost)
        return BoundarySpec.singular_minus(m_ghost)

    spans: list[Span] = []
    bounds = [0] + [atom_cellb[j] for j in alive] + [n_cells]
    neighbors: list[Optional[int]] = [None] + list(alive) + [None]
    for k in range(len(bounds) - 1):
        la, ra = neighbors[k], neighbors[k + 1]
        left = BoundarySpec.free() if la is None else side_spec(la)
        right = BoundarySpec.free() if ra is None else side_spec(ra)
        spans.append(
            Span(lo=bounds[k], hi=bounds[k + 1], left=left, right=right,
                 left_atom=la, right_atom=ra)
        )
    return spans


def solve(
    model: FluxModel,
    state0: MeasureState,
    t_end: float,
    config: SolverConfig,
    output_times: Sequence[float] = (),
    dense_target: int = 0,
) -> Trajectory:
    """Compute the measure-valued solution up to ``t_end``.

    With no atoms this is a single free-boundary run.  Output times are
    snapshot requests only: each is served at the first step boundary at or
    past the request, with the honest time recorded.  ``dense_target``
    additionally stores ~that many evenly strided step snapshots for the
    audit quadratures.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if state0.time != 0.0:
        raise ValueError("initial state must be at time 0")

    reg0 = state0.regular
    u = reg0.values.copy()
    w = reg0.widths
    n_cells = u.size
    atoms0 = state0.atoms
    p = len(atoms0)

    dt = config.dt(model.lipschitz)
    data_scale = float(np.max(np.abs(u))) if n_cells else 0.0
    m_ghost = config.resolve_m_ghost(model, data_scale)
    sign_tol = max(10.0 * config.dx * model.lipschitz, 1e-12)

    ledgers = [
        MassLedger(
            atom_index=j,
            position=a.position,
            birth_mass=a.mass,
            sign_tol=sign_tol,
        )
        for j, a in enumerate(atoms0)
    ]
    part_index = {x: i for i, x in enumerate(reg0.partition.tolist())}
    atom_cellb = [int(reg0.panel_start[part_index[a.position]]) for a in atoms0]
    atom_signs = [a.sign for a in atoms0]
    max_drain = model.sup_h - model.inf_h

    tiny = 1e-12 * max(t_end, 1.0)
    requests = sorted(float(x) for x in output_times if 0.0 < float(x) <= t_end + tiny)
    total_est = max(1, int(math.ceil(t_end / dt))) if math.isfinite(dt) else 1
    dense_stride = max(1, total_est // dense_target) if dense_target > 0 else 0

    def make_snapshot(tt: float) -> MeasureState:
        regular = RegularField(
            reg0.partition.copy(), reg0.panel_cells.copy(), u.copy()
        )
        snap_atoms = [
            Atom(
                position=led.position,
                mass=led.mass,
                birth_mass=led.birth_mass,
                death_time=led.death_time,
            )
            for led in ledgers
        ]
        return MeasureState(time=tt, regular=regular, atoms=snap_atoms)

    times = [0.0]
    snapshots = [make_snapshot(0.0)]
    dense_times = [0.0]
    dense_fields = [u.copy()]
    epochs: list[Epoch] = []

    t = 0.0
    step_count = 0
    alive = [j for j in range(p)]

    def commit_records():
        nonlocal step_count
        if dense_stride and step_count % dense_stride == 0:
            dense_times.append(t)
            dense_fields.append(u.copy())
        while requests and t >= requests[0] - tiny:
            requests.pop(0)
            times.append(t)
            snapshots.append(make_snapshot(t))

    def atom_traces_of(span_outs, spans):
        """Map atom index -> (f_plus, f_minus) per-step arrays."""
        left_of: dict[int, np.ndarray] = {}
        right_of: dict[int, np.ndarray] = {}
        for sp, (ol, orr) in zip(spans, span_outs):
            if sp.right_atom is not None:
                left_of[sp.right_atom] = orr  # trace on the atom's left side
            if sp.left_atom is not None:
                right_of[sp.left_atom] = ol  # trace on the atom's right side
        return {j: (right_of[j], left_of[j]) for j in left_of}

    while t < t_end - tiny:
        spans = _build_spans(alive, atom_cellb, atom_signs, n_cells, m_ghost)
        epoch = Epoch(start=t, end=t_end, spans=spans, alive=tuple(alive))
        died: list[int] = []

        while t < t_end - tiny and not died:
            full_to_end = int(math.floor((t_end - t + tiny) / dt))
            if full_to_end == 0:
                n, bdt, careful = 1, t_end - t, bool(alive)
            else:
                bdt = dt
                n = full_to_end
                if requests:
                    n = min(n, max(1, int(math.ceil((requests[0] - t - tiny) / dt))))
                if dense_stride:
                    to_dense = dense_stride - (step_count % dense_stride)
                    n = min(n, to_dense)
                careful = False
                if alive and max_drain > 0.0:
                    min_c = min(abs(ledgers[j].mass) for j in alive)
                    safe = int(math.floor(min_c / (max_drain * dt))) - 1
                    if safe < 2:
                        careful, n = True, 1
                    else:
                        n = min(n, safe)
                n = max(n, 1)

            if careful:
                u_prev = u.copy()
            span_outs = []
            for sp in spans:
                ol = np.empty(n)
                orr = np.empty(n)
                advance_span(
                    u[sp.lo : sp.hi], w[sp.lo : sp.hi], bdt, n,
                    sp.left, sp.right, model, ol, orr,
                )
                span_outs.append((ol, orr))
            traces = atom_traces_of(span_outs, spans)

            commit_dt = bdt
            if careful:
                theta = 1.0
                for j in alive:
                    led = ledgers[j]
                    f_plus, f_minus = traces[j]
                    g = float(f_plus[0] - f_minus[0])
                    raw_prev = led.birth_mass - led.integral
                    raw_post = raw_prev - g * bdt
                    crossed = raw_post <= 0.0 if led.birth_mass > 0 else raw_post >= 0.0
                    if crossed and g != 0.0:
                        theta = min(theta, max(raw_prev / (g * bdt), 0.0))
                if theta < 1.0:
                    # split the step at the first interpolated death
                    u[:] = u_prev + theta * (u - u_prev)
                    commit_dt = theta * bdt

            for j in alive:
                f_plus, f_minus = traces[j]
                ledger_update(ledgers[j], t, commit_dt, f_plus[:n], f_minus[:n])
                led = ledgers[j]
                if not careful and not led.alive and (
                    led.death_time < t + n * commit_dt - tiny
                ):
                    raise AssertionError(
                        "atom crossed zero inside a chunk sized to exclude deaths"
                    )

            t += n * commit_dt
            step_count += 1 if careful else n

            for j in alive:
                led = ledgers[j]
                if led.alive and abs(led.mass) <= 1e-12 * abs(led.birth_mass):
                    led.death_time = t
                    led.mass = 0.0
                    led.times.append(t)
                    led.masses.append(0.0)
            died = [j for j in alive if not ledgers[j].alive]
            commit_records()

        epoch.end = t
        epoch.died = tuple(died)
        epochs.append(epoch)
        if died:
            alive = [j for j in alive if j not in died]

    if abs(times[-1] - t) > tiny or len(times) == 1:
        times.append(t)
        snapshots.append(make_snapshot(t))
    if abs(dense_times[-1] - t) > tiny:
        dense_times.append(t)
        dense_fields.append(u.copy())

    traces_out = [
        AtomTrace(
            index=j,
            position=led.position,
            birth_mass=led.birth_mass,
            death_time=led.death_time,
            times=np.asarray(led.times),
            masses=np.asarray(led.masses),
        )
        for j, led in enumerate(ledgers)
    ]
    return Trajectory(
        model=model,
        config=config,
        m_ghost=m_ghost,
        dt=dt,
        partition=reg0.partition.copy(),
        panel_cells=reg0.panel_cells.copy(),
        centers=reg0.centers.copy(),
        widths=reg0.widths.copy(),
        t_end=t_end,
        times=times,
        snapshots=snapshots,
        atom_traces=traces_out,
        epochs=epochs,
        dense_times=np.asarray(dense_times),
        dense_fields=np.asarray(dense_fields),
    )


def death_schedule(trajectory: Trajectory) -> list[tuple[int, float]]:
    """The (atom index, death time) pairs, sorted by time.

    Every death time respects the persistence lower bound up to one step.
    """
    out = [
        (tr.index, tr.death_time)
        for tr in trajectory.atom_traces
        if tr.death_time is not None
    ]
    out.sort(key=lambda item: (item[1], item[0]))
    for j, tau in out:
        bound = persistence_lower_bound(
            trajectory.atom_traces[j].birth_mass, trajectory.model
        )
        if tau < bound - trajectory.dt - 1e-12:
            raise AssertionError(
                f"atom {j} died at {tau:.6f}, before its persistence bound {bound:.6f}"
            )
    return out


def trajectory_distance(a: Trajectory, b: Trajectory) -> float:
    """Max over shared dense times of field L1 distance plus atom-mass gap.

    Requires identical grids and time steps (e.g. two runs differing only
    in the ghost magnitude).
    """
    if a.dense_times.size != b.dense_times.size or a.centers.size != b.centers.size:
        raise ValueError("trajectories are not comparable (different discretizations)")
    worst = 0.0
    for k in range(a.dense_times.size):
        d = float(np.dot(np.abs(a.dense_fields[k] - b.dense_fields[k]), a.widths))
        tk = a.dense_times[k]
        for ta, tb in zip(a.atom_traces, b.atom_traces):
            d += abs(float(ta.mass_at(tk)) - float(tb.mass_at(tk)))
        worst = max(worst, d)
    return worst
