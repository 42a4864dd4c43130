"""Cascade simulation over control paths.

Tracks the occupied equilibrium along a control trajectory, detects
per-sector catastrophe events (fold disappearances and stability
flips), aggregates them into trailing synchronization windows A(t) and
the order parameter Phi(t) = |A(t)|/k, builds the catastrophe graph
from co-events plus degeneracy-alignment diagnostics, and declares
apocalyptic times when a window reaches the configured threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .diagnostics import (TOL_RANK, DegenerateIsolated, corank,
                          discriminant_normal, normal_alignment_angle)
from .forms import TOL_DEGENERACY
from .network import (COND_LIMIT, NEWTON_MAX_ITER, TOL_EQUILIBRIUM,
                      NetworkSystem, make_equilibrium)
from .paths import ControlPath

ATTRIBUTION_TOL = 1e-3   # pre-fold block |eig| below this implicates a sector
BASIN_JUMP_TOL = 0.5     # sector displacement that counts as a basin change
ANGLE_MAX = 10.0         # degrees; normal-alignment cutoff for graph edges
ESCAPE_RADIUS = 50.0
RELAX_MAX_STEPS = 100_000
REFINE = 16              # substeps used to confirm a suspected fold


class Mechanism(enum.Enum):
    FOLD_DISAPPEARANCE = "fold_disappearance"
    STABILITY_FLIP = "stability_flip"


@dataclass(frozen=True)
class CatastropheEvent:
    """One sector-level catastrophe.

    Signatures are (negative eigencount, min |eigenvalue|) of the
    sector's Hessian block just before and just after the event;
    jump_size is the Euclidean displacement of the sector's relaxed
    state across the event step.
    """

    time: float
    sector: int
    mechanism: Mechanism
    pre_signature: tuple[int, float]
    post_signature: tuple[int, float]
    jump_size: float
    step: int


@dataclass
class EdgeData:
    min_alignment_angle: float | None
    co_event_count: int


@dataclass
class CatastropheGraph:
    """Graph on sectors; an edge means the two sectors' catastrophes were
    structurally coupled and degeneracy-aligned at least once."""

    k: int
    edges: dict[tuple[int, int], EdgeData] = field(default_factory=dict)

    def neighbors(self, i: int) -> set[int]:
        out = set()
        for (a, b) in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def component(self, i: int) -> frozenset[int]:
        seen = {i}
        stack = [i]
        while stack:
            for nb in self.neighbors(stack.pop()):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return frozenset(seen)

    def components(self) -> list[frozenset[int]]:
        remaining = set(range(self.k))
        out = []
        while remaining:
            c = self.component(min(remaining))
            out.append(c)
            remaining -= c
        return out

    def partition(self) -> tuple[tuple[int, ...], ...]:
        """Canonical (sorted) component partition, for comparisons."""
        return tuple(sorted(tuple(sorted(c)) for c in self.components()))


@dataclass(frozen=True)
class ApocalypticTime:
    """A declared synchronized-catastrophe time."""

    time: float
    size: int
    triggered_component: frozenset[int]
    components_involved: tuple[frozenset[int], ...]
    members: frozenset[int]


@dataclass(frozen=True)
class StepSeries:
    """Right-continuous step function sampled on the path grid."""

    times: np.ndarray
    values: tuple
    initial: object = None

    def __call__(self, t: float):
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        if i < 0:
            return self.initial
        return self.values[min(i, len(self.values) - 1)]


@dataclass
class CascadeReport:
    """Everything observed in one scenario run."""

    times: np.ndarray
    alphas: np.ndarray
    states: np.ndarray
    sector_neg: np.ndarray
    sector_minabs: np.ndarray
    full_min_sv: np.ndarray
    fold_flags: np.ndarray
    events: list[CatastropheEvent]
    A_of_t: StepSeries
    phi_of_t: StepSeries
    graph: CatastropheGraph
    apocalyptic_times: list[ApocalypticTime]
    tau_sync: float
    threshold: int | float
    angle_max: float

    @property
    def k(self) -> int:
        return self.sector_neg.shape[1]


class ScenarioAbort(RuntimeError):
    """The state left the configured escape radius (or relaxation stalled):
    the potential is not confining along this path. Carries diagnostics."""

    def __init__(self, reason: str, step: int, time: float, x_last, alpha):
        self.reason = reason
        self.step = step
        self.time = time
        self.x_last = np.asarray(x_last, dtype=float)
        self.alpha = np.asarray(alpha, dtype=float)
        super().__init__(
            f"scenario aborted ({reason}) at step {step}, t={time:.6g}, "
            f"x={self.x_last.tolist()}")


def _window_members(event_times: np.ndarray, event_sectors: np.ndarray,
                    t: float, tau: float) -> frozenset[int]:
    """Sectors with an event inside the trailing window (t - tau, t]."""
    lo = np.searchsorted(event_times, t - tau, side="right")
    hi = np.searchsorted(event_times, t, side="right")
    return frozenset(int(s) for s in event_sectors[lo:hi])


def _qualifies(size: int, k: int, threshold: int | float) -> bool:
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
        raise TypeError("threshold must be an int (count) or float (fraction)")
    if isinstance(threshold, int):
        return size >= threshold
    return size / k >= threshold


def derive_events(sys: NetworkSystem, times, states, sector_neg,
                  sector_minabs, fold_flags,
                  attribution_tol: float = ATTRIBUTION_TOL,
                  basin_jump_tol: float = BASIN_JUMP_TOL,
                  ) -> list[CatastropheEvent]:
    """Extract per-sector events from a tracked trajectory.

    A fold step is attributed to every sector whose pre-fold block
    |eigenvalue| is below attribution_tol, always including the sector
    with the smallest one, plus every sector displaced farther than
    basin_jump_tol by the post-fold relaxation (a sector swept into a
    new basin by the jump of another suffered a basin reconfiguration of
    its own, even though its block was not degenerate beforehand).
    Sectors whose negative-eigenvalue count changes without a fold get a
    stability-flip event.
    """
    events: list[CatastropheEvent] = []
    slices = [xs for xs, _ in sys.sector_slices()]
    S = len(times)
    for t in range(1, S):
        changed = [i for i in range(sys.k)
                   if sector_neg[t, i] != sector_neg[t - 1, i]]
        jumps = [float(np.linalg.norm(states[t, sl] - states[t - 1, sl]))
                 for sl in slices]
        if fold_flags[t]:
            attributed = {int(np.argmin(sector_minabs[t - 1]))}
            attributed |= {i for i in range(sys.k)
                           if sector_minabs[t - 1, i] < attribution_tol}
            attributed |= {i for i in range(sys.k)
                           if jumps[i] > basin_jump_tol}
            for i in sorted(attributed):
                events.append(CatastropheEvent(
                    float(times[t]), i, Mechanism.FOLD_DISAPPEARANCE,
                    (int(sector_neg[t - 1, i]), float(sector_minabs[t - 1, i])),
                    (int(sector_neg[t, i]), float(sector_minabs[t, i])),
                    jumps[i], t))
            for i in changed:
                if i not in attributed:
                    events.append(CatastropheEvent(
                        float(times[t]), i, Mechanism.STABILITY_FLIP,
                        (int(sector_neg[t - 1, i]), float(sector_minabs[t - 1, i])),
                        (int(sector_neg[t, i]), float(sector_minabs[t, i])),
                        jumps[i], t))
        else:
            for i in changed:
                events.append(CatastropheEvent(
                    float(times[t]), i, Mechanism.STABILITY_FLIP,
                    (int(sector_neg[t - 1, i]), float(sector_minabs[t - 1, i])),
                    (int(sector_neg[t, i]), float(sector_minabs[t, i])),
                    jumps[i], t))
    return events


def _event_diag_index(e: CatastropheEvent) -> int:
    """Step whose recorded state carries the event's degeneracy: the last
    pre-fold equilibrium for folds, the flip step itself for flips."""
    if e.mechanism is Mechanism.FOLD_DISAPPEARANCE:
        return e.step - 1
    return e.step


def build_graph(sys: NetworkSystem, events: list[CatastropheEvent],
                times, states, alphas, tau_sync: float,
                angle_max: float = ANGLE_MAX,
                tol_rank: float = TOL_RANK) -> CatastropheGraph:
    """Catastrophe graph from one scenario's events.

    Edge (i, j) requires structural coupling (nonzero epsilon*lambda),
    a pair of events within tau_sync of each other, and correlation at
    the earlier event's diagnostics: joint Hessian corank >= 2 or
    discriminant-normal alignment angle <= angle_max.
    """
    graph = CatastropheGraph(sys.k)
    eps = sys.coupling.epsilon
    lam = sys.coupling.lam
    by_sector: dict[int, list[CatastropheEvent]] = {}
    for e in events:
        by_sector.setdefault(e.sector, []).append(e)

    normal_cache: dict[tuple[int, int], np.ndarray | None] = {}

    def normal_at(step: int, sector: int):
        key = (step, sector)
        if key not in normal_cache:
            eq = make_equilibrium(sys, states[step], alphas[step])
            nrm = discriminant_normal(sys, eq, sector)
            normal_cache[key] = None if isinstance(nrm, DegenerateIsolated) else nrm
        return normal_cache[key]

    for i in range(sys.k):
        for j in range(i + 1, sys.k):
            if eps * lam[i, j] == 0.0:
                continue
            pairs = [(a, b) for a in by_sector.get(i, [])
                     for b in by_sector.get(j, [])
                     if abs(a.time - b.time) <= tau_sync]
            if not pairs:
                continue
            correlated = False
            min_angle = None
            for a, b in pairs:
                earlier = a if (a.time, a.sector) <= (b.time, b.sector) else b
                step = _event_diag_index(earlier)
                H = np.empty((sys.n, sys.n))
                K.hessian(*sys.packed, states[step], alphas[step], H)
                if corank(H, tol_rank) >= 2:
                    correlated = True
                ni = normal_at(step, i)
                nj = normal_at(step, j)
                if ni is not None and nj is not None:
                    ang = normal_alignment_angle(ni, nj)
                    if min_angle is None or ang < min_angle:
                        min_angle = ang
                    if ang <= angle_max:
                        correlated = True
            if correlated:
                graph.edges[(i, j)] = EdgeData(min_angle, len(pairs))
    return graph


def declare_apocalyptic(events: list[CatastropheEvent], k: int,
                        tau_sync: float, threshold: int | float,
                        graph: CatastropheGraph) -> list[ApocalypticTime]:
    """Scan event times for windows meeting the threshold.

    The threshold test is a strict >= on the window size (integer
    threshold) or on the fraction size/k (float threshold), evaluated at
    event times. A qualifying time within tau_sync of an already
    declared one is part of the same episode and not re-declared.
    """
    if not events:
        return []
    order = sorted(range(len(events)), key=lambda idx: events[idx].time)
    ev_times = np.array([events[idx].time for idx in order])
    ev_sectors = np.array([events[idx].sector for idx in order])
    out: list[ApocalypticTime] = []
    last_declared = None
    for te in sorted({e.time for e in events}):
        members = _window_members(ev_times, ev_sectors, te, tau_sync)
        if not _qualifies(len(members), k, threshold):
            continue
        if last_declared is not None and te - last_declared <= tau_sync:
            continue
        in_window = [e for e in events if te - tau_sync < e.time <= te]
        first = min(in_window, key=lambda e: (e.time, e.sector))
        triggered = graph.component(first.sector)
        involved = []
        for c in graph.components():
            if c & members:
                involved.append(c)
        out.append(ApocalypticTime(te, len(members), triggered,
                                   tuple(involved), members))
        last_declared = te
    return out


def run_scenario(sys: NetworkSystem, path: ControlPath, x0,
                 tau_sync: float, threshold: int | float,
                 angle_max: float = ANGLE_MAX,
                 escape_radius: float = ESCAPE_RADIUS,
                 basin_jump_tol: float = BASIN_JUMP_TOL,
                 attribution_tol: float = ATTRIBUTION_TOL,
                 refine: int = REFINE,
                 relax_max_steps: int = RELAX_MAX_STEPS,
                 tol_rank: float = TOL_RANK) -> CascadeReport:
    """Run one full cascade scenario.

    The initial state is relaxed by gradient flow at the first control
    point (pass x0 = 0 to relax from the origin), then the occupied
    equilibrium is continued step by step; see
    ``catnet._kernels.track_path`` for the fold semantics. Raises
    ScenarioAbort when the state escapes ``escape_radius``, which
    signals a non-confining potential rather than a bug.
    """
    if tau_sync <= 0.0:
        raise ValueError("tau_sync must be positive")
    _qualifies(0, sys.k, threshold)   # validate threshold type early
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.n,):
        raise ValueError(f"x0 has shape {x.shape}, need ({sys.n},)")
    alphas = np.ascontiguousarray(path.values, dtype=float)
    if alphas.shape[1] != sys.p:
        raise ValueError("path control dimension does not match the system")
    S = alphas.shape[0]
    states = np.empty((S, sys.n))
    neg = np.empty((S, sys.k), dtype=np.int32)
    minabs = np.empty((S, sys.k))
    fullmin = np.empty(S)
    fold_flags = np.zeros(S, dtype=np.int8)
    relaxed = np.zeros(S, dtype=np.int8)

    status, steps = K.track_path(
        *sys.packed, alphas, x, TOL_EQUILIBRIUM, NEWTON_MAX_ITER,
        basin_jump_tol, COND_LIMIT, TOL_DEGENERACY, refine,
        TOL_EQUILIBRIUM, relax_max_steps, escape_radius,
        states, neg, minabs, fullmin, fold_flags, relaxed)
    if status != K.TRACK_OK:
        reason = "escape" if status == K.TRACK_ESCAPED else "relax_stalled"
        step = min(steps, S - 1)
        raise ScenarioAbort(reason, steps, float(path.times[step]), x,
                            alphas[step])

    events = derive_events(sys, path.times, states, neg, minabs, fold_flags,
                           attribution_tol, basin_jump_tol)
    graph = build_graph(sys, events, path.times, states, alphas, tau_sync,
                        angle_max, tol_rank)

    ev_order = sorted(events, key=lambda e: e.time)
    ev_times = np.array([e.time for e in ev_order])
    ev_sectors = np.array([e.sector for e in ev_order], dtype=int)
    A_vals = []
    phi_vals = []
    for t in range(S):
        members = _window_members(ev_times, ev_sectors, float(path.times[t]),
                                  tau_sync)
        A_vals.append(members)
        phi_vals.append(len(members) / sys.k)
    A_of_t = StepSeries(path.times, tuple(A_vals), frozenset())
    phi_of_t = StepSeries(path.times, tuple(phi_vals), 0.0)

    apocalyptic = declare_apocalyptic(events, sys.k, tau_sync, threshold,
                                      graph)
    return CascadeReport(path.times, alphas, states, neg, minabs, fullmin,
                         fold_flags, events, A_of_t, phi_of_t, graph,
                         apocalyptic, tau_sync, threshold, angle_max)


def cascade_coverage_check(report: CascadeReport,
                           graph: CatastropheGraph | None = None) -> bool:
    """True when, at every apocalyptic time, the triggered component is
    entirely inside the synchronized set A(t)."""
    if not report.apocalyptic_times:
        raise ValueError("report has no apocalyptic times")
    graph = graph if graph is not None else report.graph
    for at in report.apocalyptic_times:
        triggered = graph.component(min(at.triggered_component))
        if not triggered <= at.members:
            return False
    return True


def structural_stability_experiment(sys: NetworkSystem, path: ControlPath,
                                    x0, eta: float, trials: int, seed: int,
                                    tau_sync: float,
                                    threshold: int | float,
                                    **scenario_kwargs) -> float:
    """Fraction of perturbed reruns preserving the component partition.

    Each trial shifts the whole control path by a constant per-control
    offset drawn uniformly from [-eta, eta] and perturbs every coupling
    weight the same way (symmetrically, keeping the zero diagonal), then
    reruns the scenario. Aborted trials count as not preserving.
    """
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    base = run_scenario(sys, path, x0, tau_sync, threshold,
                        **scenario_kwargs)
    base_partition = base.graph.partition()
    rng = np.random.default_rng(seed)
    k = sys.k
    iu = np.triu_indices(k, 1)
    preserved = 0
    for _ in range(trials):
        d_alpha = rng.uniform(-eta, eta, sys.p)
        d_lam_flat = rng.uniform(-eta, eta, len(iu[0]))
        lam2 = sys.coupling.lam.copy()
        lam2[iu] += d_lam_flat
        lam2[(iu[1], iu[0])] = lam2[iu]
        sys2 = NetworkSystem(sys.sectors,
                             type(sys.coupling)(sys.coupling.epsilon, lam2))
        path2 = ControlPath(path.times, path.values + d_alpha[None, :])
        try:
            rep = run_scenario(sys2, path2, x0, tau_sync, threshold,
                               **scenario_kwargs)
        except ScenarioAbort:
            continue
        if rep.graph.partition() == base_partition:
            preserved += 1
    return preserved / trials
