"""Parameter sweeps of the maximum charging power and a fidelity-based criticality locator."""
from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from . import __version__
from .charging import QuenchSpec, run_charging, tau_grid
from .eigensolver import SolverOptions, ground_state
from .errors import BatteryError, DomainError
from .operators import ChainParams, build_hamiltonian

KINDS = ("kappa_quench", "field_quench_tfi", "hybrid_tfi_annni", "custom")
AXES = ("kappa", "h")

# Every Ising line of the open-chain phase diagram lies at kappa <= 1/2 (all
# transition lines meet at h = 0, kappa = 1/2); beyond it fidelity dips
# belong to the floating/antiphase transitions.
ISING_KAPPA_MAX = 0.5

DEFAULT_KAPPA_GRID = (0.0, 1.0, 41)
DEFAULT_H_GRID = (0.2, 2.0, 37)


def uniform_grid(start: float, stop: float, points: int) -> tuple[float, ...]:
    if points < 1:
        raise DomainError(f"grid needs at least one point, got {points}")
    return tuple(float(x) for x in np.linspace(start, stop, points))


def _default_axis(kind: str) -> str:
    return "kappa" if kind == "kappa_quench" else "h"


@dataclass(frozen=True)
class SweepProtocol:
    """How (H0, H1) are built from one axis value ``x``.

    ========================  ===========================  =============================
    kind                      H0                           H1
    ========================  ===========================  =============================
    ``kappa_quench``          (kappa=x, h)                 (kappa=x+dkappa, h)
    ``field_quench_tfi``      (kappa=0, h=x)               (kappa=0, h=x+dh)
    ``hybrid_tfi_annni``      (kappa=0, h=x)               (kappa=dkappa, h=x)
    ``custom`` (axis kappa)   (kappa=x, h)                 (kappa=x+dkappa, h+dh)
    ``custom`` (axis h)       (kappa, h=x)                 (kappa+dkappa, h=x+dh)
    ========================  ===========================  =============================
    """

    kind: str
    grid: tuple[float, ...]
    L: int = 16
    J1: float = 1.0
    h: float = 0.4
    kappa: float = 0.0
    dkappa: float = 0.1
    dh: float = 0.1
    taus: tuple[float, ...] = field(default_factory=tau_grid)
    axis: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown protocol kind {self.kind!r}; expected one of {KINDS}")
        axis = self.axis or _default_axis(self.kind)
        if axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
        if self.kind != "custom" and axis != _default_axis(self.kind):
            raise DomainError(f"protocol {self.kind} sweeps {_default_axis(self.kind)}, not {axis}")
        object.__setattr__(self, "axis", axis)
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise DomainError("sweep grid is empty")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))

    def hamiltonians(self, x: float) -> tuple[ChainParams, ChainParams]:
        x = float(x)
        L, J1 = self.L, self.J1
        if self.kind == "kappa_quench":
            k0, k1, h0, h1 = x, x + self.dkappa, self.h, self.h
        elif self.kind == "field_quench_tfi":
            k0, k1, h0, h1 = 0.0, 0.0, x, x + self.dh
        elif self.kind == "hybrid_tfi_annni":
            k0, k1, h0, h1 = 0.0, self.dkappa, x, x
        elif self.axis == "kappa":
            k0, k1, h0, h1 = x, x + self.dkappa, self.h, self.h + self.dh
        else:
            k0, k1, h0, h1 = self.kappa, self.kappa + self.dkappa, x, x + self.dh
        return (
            ChainParams.from_kappa(L, k0, h0, J1=J1),
            ChainParams.from_kappa(L, k1, h1, J1=J1),
        )

    def quench(self, x: float) -> QuenchSpec:
        h0, h1 = self.hamiltonians(x)
        return QuenchSpec(h0=h0, h1=h1, taus=self.taus)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["grid"] = list(self.grid)
        out["taus"] = list(self.taus)
        return out


@dataclass(frozen=True)
class SweepPoint:
    axis: float
    kappa0: float
    kappa1: float
    h0: float
    h1: float
    p_max_per_spin: float = float("nan")
    tau_star: float = float("nan")
    w_at_tau_star_per_spin: float = float("nan")
    # "ok", "tau_max" (maximum on the last grid time) or "failed"
    status: str = "ok"
    message: str = ""
    ground_degenerate: bool = False


@dataclass(frozen=True, eq=False)
class SweepResult:
    protocol: SweepProtocol
    points: tuple[SweepPoint, ...]
    manifest: dict

    @property
    def failed(self) -> list[SweepPoint]:
        return [p for p in self.points if p.status == "failed"]

    @property
    def partial(self) -> bool:
        return bool(self.failed)

    def axis_values(self) -> np.ndarray:
        return np.array([p.axis for p in self.points])

    def p_max_curve(self) -> np.ndarray:
        return np.array([p.p_max_per_spin for p in self.points])

    def peak_axis(self) -> float:
        """Axis value of the global maximum of p_max per spin (first on ties)."""
        ok = [p for p in self.points if p.status != "failed"]
        if not ok:
            raise DomainError("sweep has no successful points")
        return max(ok, key=lambda p: p.p_max_per_spin).axis


def _evaluate_point(job):
    protocol, x, solver_opts, prop_opts = job
    h0, h1 = protocol.hamiltonians(x)
    base = dict(axis=float(x), kappa0=h0.kappa, kappa1=h1.kappa, h0=h0.h, h1=h1.h)
    try:
        trace = run_charging(protocol.quench(x), solver_opts, prop_opts)
    except BatteryError as exc:
        return SweepPoint(**base, status="failed", message=f"{type(exc).__name__}: {exc}")
    return SweepPoint(
        **base,
        p_max_per_spin=trace.p_max_per_spin,
        tau_star=trace.tau_star,
        w_at_tau_star_per_spin=trace.w_at_tau_star_per_spin,
        status="tau_max" if trace.tau_star_at_boundary else "ok",
        ground_degenerate=bool(trace.ground.degenerate),
    )


def _map(func, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def run_sweep(
    protocol: SweepProtocol,
    workers: int = 1,
    solver_opts: SolverOptions | None = None,
    prop_opts=None,
    order=None,
) -> SweepResult:
    """Evaluate the maximum charging power at every grid point of ``protocol``.

    Points are independent; ``order`` optionally permutes the evaluation
    order (results are always reported in grid order).  A failing point is
    recorded with status ``"failed"`` rather than aborting the sweep.
    """
    solver_opts = solver_opts or SolverOptions()
    started = datetime.now(timezone.utc)
    clock = time.perf_counter()

    n = len(protocol.grid)
    order = list(range(n)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise DomainError("order must be a permutation of the grid indices")
    jobs = [(protocol, protocol.grid[i], solver_opts, prop_opts) for i in order]
    evaluated = _map(_evaluate_point, jobs, workers)
    by_index = dict(zip(order, evaluated))
    points = tuple(by_index[i] for i in range(n))

    manifest = {
        "tool": "annni_battery",
        "version": __version__,
        "protocol": protocol.to_dict(),
        "solver": dataclasses.asdict(solver_opts),
        "propagator": dataclasses.asdict(prop_opts) if prop_opts is not None else None,
        "workers": workers,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - clock,
        "points": [
            {"axis": p.axis, "status": p.status, "message": p.message} for p in points
        ],
    }
    return SweepResult(protocol=protocol, points=points, manifest=manifest)


@dataclass(frozen=True, eq=False)
class CriticalPointEstimate:
    axis: str
    value: float
    susceptibility: float
    grid: tuple[float, ...]
    fidelities: np.ndarray
    delta: float
    boundary_limited: bool
    degenerate: bool = False

    @property
    def susceptibilities(self) -> np.ndarray:
        return 2.0 * (1.0 - self.fidelities) / self.delta**2

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "value": self.value,
            "susceptibility": self.susceptibility,
            "delta": self.delta,
            "boundary_limited": self.boundary_limited,
            "degenerate": self.degenerate,
            "grid": list(self.grid),
            "fidelities": [float(f) for f in self.fidelities],
        }


def _with_axis(template: ChainParams, axis: str, x: float) -> ChainParams:
    if axis == "kappa":
        return ChainParams.from_kappa(template.L, x, template.h, J1=template.J1)
    return dataclasses.replace(template, h=float(x))


def _fidelity_job(job):
    template, axis, x, delta, solver_opts = job
    a = ground_state(build_hamiltonian(_with_axis(template, axis, x)), solver_opts)
    b = ground_state(build_hamiltonian(_with_axis(template, axis, x + delta)), solver_opts)
    return float(abs(np.vdot(a.state, b.state))), bool(a.degenerate or b.degenerate)


def locate_critical_point(
    template: ChainParams,
    axis: str,
    grid,
    delta: float | None = None,
    solver_opts: SolverOptions | None = None,
    workers: int = 1,
) -> CriticalPointEstimate:
    """Pseudo-critical point from the minimum of the ground-state fidelity.

    ``F(x) = |<psi0(x)|psi0(x + delta)>|`` is evaluated on ``grid`` along
    ``axis`` (``"kappa"`` or ``"h"``), all other couplings taken from
    ``template``.  The minimizing grid point maximizes the fidelity
    susceptibility ``2 (1 - F) / delta**2``.
    """
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    grid = tuple(float(x) for x in grid)
    if len(grid) < 2:
        raise DomainError("fidelity scan needs at least two grid points")
    if delta is None:
        delta = (grid[-1] - grid[0]) / (len(grid) - 1) / 10.0
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    solver_opts = solver_opts or SolverOptions()

    jobs = [(template, axis, x, delta, solver_opts) for x in grid]
    results = _map(_fidelity_job, jobs, workers)
    fidelities = np.array([f for f, _ in results])
    degenerate = any(d for _, d in results)

    i = int(np.argmin(fidelities))
    flat = float(np.ptp(fidelities)) < 1e-12
    return CriticalPointEstimate(
        axis=axis,
        value=grid[i],
        susceptibility=float(2.0 * (1.0 - fidelities[i]) / delta**2),
        grid=grid,
        fidelities=fidelities,
        delta=float(delta),
        boundary_limited=flat or i == 0 or i == len(grid) - 1,
        degenerate=degenerate,
    )


def ising_window(grid, kappa_max: float = ISING_KAPPA_MAX) -> tuple[float, ...]:
    """Restrict a kappa grid to the region that can host the Ising transition."""
    return tuple(float(x) for x in grid if x <= kappa_max + 1e-12)


def critical_band(
    protocol: SweepProtocol,
    solver_opts: SolverOptions | None = None,
    workers: int = 1,
) -> tuple[CriticalPointEstimate, CriticalPointEstimate]:
    """Ising pseudo-critical points of (H1, H0) expressed on the sweep axis.

    The interval between the two marks where the charging Hamiltonian has
    already crossed the transition but the battery Hamiltonian has not.
    """
    grid = protocol.grid
    if protocol.axis == "kappa":
        grid = ising_window(grid)
    h0_ref, h1_ref = protocol.hamiltonians(grid[0])
    # shift so that H1 at axis value x is the template evaluated at x + offset
    if protocol.axis == "kappa":
        offset1 = h1_ref.kappa - grid[0]
        window1 = tuple(x for x in grid if x + offset1 <= ISING_KAPPA_MAX + 1e-12)
    else:
        offset1 = h1_ref.h - grid[0]
        window1 = grid
    if len(window1) < 2:
        window1 = grid
    est0 = locate_critical_point(h0_ref, protocol.axis, grid, solver_opts=solver_opts, workers=workers)
    shifted = locate_critical_point(
        h1_ref, protocol.axis, [x + offset1 for x in window1],
        delta=est0.delta, solver_opts=solver_opts, workers=workers,
    )
    est1 = dataclasses.replace(
        shifted,
        value=shifted.value - offset1,
        grid=tuple(window1),
    )
    return est1, est0


def curve_prominences(x, y) -> list[tuple[float, float]]:
    """Interior local maxima of ``y`` with prominence as a fraction of the curve range.

    Prominence is the height of a peak above the higher of the two minima
    separating it from taller terrain (or the curve ends) on either side.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y)
    x, y = x[keep], y[keep]
    if y.size < 3:
        return []
    span = float(np.ptp(y))
    if span == 0.0:
        return []
    peaks, _ = find_peaks(y)
    if peaks.size == 0:
        return []
    prominences = peak_prominences(y, peaks)[0]
    return [(float(x[i]), float(p / span)) for i, p in zip(peaks, prominences)]


def peak_prominence(result: SweepResult) -> list[tuple[float, float]]:
    return curve_prominences(result.axis_values(), result.p_max_curve())
