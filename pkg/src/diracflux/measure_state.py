"""Data model for signed measures: a cell-averaged density plus point masses.

A state is ``u = u_r dx + sum_j c_j delta_{x_j}``: the regular part lives as
cell averages on a partitioned truncation of the line, the singular part as
a finite list of atoms pinned to partition breakpoints.  Atoms never move;
only their masses evolve.  States are value-semantic snapshots: mutate them
only inside the single-threaded stepping loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np


@dataclass
class Atom:
    """One point mass: fixed position, signed mass, and its life record.

    The sign of ``mass`` always equals the sign of ``birth_mass`` and
    ``|mass| <= |birth_mass|``: point masses shrink monotonically and never
    flip sign.  ``mass`` is zero only once ``death_time`` is set.
    """

    position: float
    mass: float
    birth_mass: float
    death_time: Optional[float] = None

    def __post_init__(self):
        if self.birth_mass == 0.0:
            raise ValueError("atom mass must be nonzero")
        self.validate()

    @property
    def alive(self) -> bool:
        return self.death_time is None

    @property
    def sign(self) -> float:
        return 1.0 if self.birth_mass > 0 else -1.0

    def validate(self):
        if self.death_time is None:
            if self.mass == 0.0:
                raise ValueError("alive atom has zero mass")
            if self.mass * self.birth_mass < 0.0:
                raise ValueError("atom mass changed sign")
        elif self.mass != 0.0:
            raise ValueError("dead atom has nonzero mass")
        if abs(self.mass) > abs(self.birth_mass) * (1.0 + 1e-12):
            raise ValueError("atom mass exceeds its birth mass")


@dataclass
class RegularField:
    """Cell averages of the density on a partitioned interval.

    ``partition`` holds the breakpoints (truncation endpoints, atom
    positions, and any data-segment edges); panel ``k`` spans
    ``partition[k]..partition[k+1]`` and carries ``panel_cells[k]`` cells of
    equal width.  ``values`` is the flat array of all cell averages.
    """

    partition: np.ndarray
    panel_cells: np.ndarray
    values: np.ndarray
    centers: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)
    panel_start: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.partition = np.asarray(self.partition, dtype=np.float64)
        self.panel_cells = np.asarray(self.panel_cells, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.partition.ndim != 1 or self.partition.size < 2:
            raise ValueError("partition needs at least two breakpoints")
        if not np.all(np.diff(self.partition) > 0):
            raise ValueError("partition breakpoints must be strictly increasing")
        if np.any(self.panel_cells < 1):
            raise ValueError("every panel needs at least one cell")
        if self.values.size != int(self.panel_cells.sum()):
            raise ValueError("values length does not match the panel layout")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        starts = np.concatenate(([0], np.cumsum(self.panel_cells)))
        self.panel_start = starts
        centers = np.empty(self.values.size)
        widths = np.empty(self.values.size)
        for k in range(self.panel_cells.size):
            a, b = self.partition[k], self.partition[k + 1]
            n = int(self.panel_cells[k])
            wk = (b - a) / n
            idx = slice(starts[k], starts[k + 1])
            centers[idx] = a + (np.arange(n) + 0.5) * wk
            widths[idx] = wk
        self.centers = centers
        self.widths = widths

    @property
    def n_cells(self) -> int:
        return self.values.size

    def panel_slice(self, k: int) -> slice:
        return slice(int(self.panel_start[k]), int(self.panel_start[k + 1]))

    def copy(self) -> "RegularField":
        return RegularField(
            self.partition.copy(), self.panel_cells.copy(), self.values.copy()
        )

    def with_values(self, values: np.ndarray) -> "RegularField":
        return RegularField(self.partition.copy(), self.panel_cells.copy(), values)


@dataclass
class MeasureState:
    """A snapshot in time: regular field plus atoms sorted by position."""

    time: float
    regular: RegularField
    atoms: list[Atom]

    def __post_init__(self):
        pos = [a.position for a in self.atoms]
        if any(q <= p for p, q in zip(pos, pos[1:])):
            raise ValueError("atom positions must be strictly increasing")
        breaks = set(self.regular.partition.tolist())
        for a in self.atoms:
            if a.position not in breaks:
                raise ValueError(
                    f"atom at {a.position} does not lie on a partition breakpoint"
                )

    def copy(self) -> "MeasureState":
        return MeasureState(
            self.time, self.regular.copy(), [replace(a) for a in self.atoms]
        )


def total_mass(state: MeasureState) -> float:
    """Signed total: cell averages times widths plus atom masses."""
    reg = float(np.dot(state.regular.values, state.regular.widths))
    return reg + sum(a.mass for a in state.atoms)


def singular_parts(state: MeasureState) -> tuple[list[Atom], list[Atom]]:
    """Partition the atoms by mass sign: (positive part, negative part)."""
    pos = [a for a in state.atoms if a.mass > 0]
    neg = [a for a in state.atoms if a.mass < 0]
    return pos, neg


def l1_norm_regular(state: MeasureState) -> float:
    """L1 norm of the regular part only."""
    return float(np.dot(np.abs(state.regular.values), state.regular.widths))


def _poly_antiderivative(coeffs: Sequence[float]):
    c = np.asarray(coeffs, dtype=np.float64)
    anti = c / (np.arange(c.size) + 1.0)

    def primitive(x: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(x)
        for k in range(anti.size - 1, -1, -1):
            acc = acc * x + anti[k]
        return acc * x

    return primitive


def build_initial_state(
    segments: Sequence[tuple[float, float, Sequence[float]]],
    atoms: Sequence[tuple[float, float]],
    domain: tuple[float, float],
    dx: float,
) -> MeasureState:
    """Assemble the t=0 state from data segments and an atom list.

    ``segments`` are non-overlapping ``(a, b, coeffs)`` entries giving the
    density as the polynomial ``sum coeffs[k] x^k`` on ``[a, b]``; the
    density is 0 outside all segments (the data must be constant outside a
    compact set for the truncation to be exact).  ``atoms`` are ``(x, c)``
    pairs with nonzero ``c``.  Atom positions and segment edges become
    partition breakpoints, so cell averages are exact per cell.
    """
    x_min, x_max = float(domain[0]), float(domain[1])
    if x_max <= x_min:
        raise ValueError("empty domain")
    if dx <= 0:
        raise ValueError("dx must be positive")

    segs = sorted((float(a), float(b), tuple(c)) for a, b, c in segments)
    for (a1, b1, _), (a2, _b2, _c2) in zip(segs, segs[1:]):
        if a2 < b1:
            raise ValueError(f"overlapping data segments at x={a2}")
    for a, b, _ in segs:
        if b <= a:
            raise ValueError("segment with nonpositive length")

    atom_list = sorted((float(x), float(c)) for x, c in atoms)
    for x, c in atom_list:
        if c == 0.0:
            raise ValueError("atom mass must be nonzero")
        if not (x_min < x < x_max):
            raise ValueError(f"atom at {x} lies outside the domain")
    xs = [x for x, _ in atom_list]
    if any(q <= p for p, q in zip(xs, xs[1:])):
        raise ValueError("atom positions must be strictly increasing")

    breaks = {x_min, x_max}
    breaks.update(xs)
    for a, b, _ in segs:
        for e in (a, b):
            if x_min < e < x_max:
                breaks.add(e)
    partition = np.array(sorted(breaks))

    panel_cells = np.maximum(
        1, np.rint(np.diff(partition) / dx).astype(np.int64)
    )

    values = np.zeros(int(panel_cells.sum()))
    starts = np.concatenate(([0], np.cumsum(panel_cells)))
    for k in range(panel_cells.size):
        a, b = partition[k], partition[k + 1]
        n = int(panel_cells[k])
        wk = (b - a) / n
        mid = a + (b - a) / 2.0
        seg = next((s for s in segs if s[0] <= mid <= s[1]), None)
        if seg is None:
            continue
        primitive = _poly_antiderivative(seg[2])
        edges = a + np.arange(n + 1) * wk
        pe = primitive(edges)
        values[starts[k] : starts[k + 1]] = (pe[1:] - pe[:-1]) / wk

    field_ = RegularField(partition, panel_cells, values)
    made = [Atom(position=x, mass=c, birth_mass=c) for x, c in atom_list]
    return MeasureState(time=0.0, regular=field_, atoms=made)
