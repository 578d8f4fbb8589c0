"""Double-quench charging: stored energy W(tau), power P(tau) and its maximum.

The battery starts in the ground state of ``H0``; during a window of length
``tau`` it evolves under ``H1``; the stored energy is <psi(tau)|H0|psi(tau)> - E0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .eigensolver import DENSE_MAX_DIM, GroundStateResult, SolverOptions, dense_ground_state, ground_state
from .errors import CapacityError, DomainError
from .operators import ChainParams, build_hamiltonian, expectation
from .propagator import KrylovPropagator, PropagatorOptions

DEFAULT_TAU_MAX = 20.0
DEFAULT_TAU_POINTS = 101


def tau_grid(tau_max: float = DEFAULT_TAU_MAX, points: int = DEFAULT_TAU_POINTS) -> tuple[float, ...]:
    """Uniform charging-time grid on [0, tau_max] including both ends."""
    if points < 2:
        raise DomainError(f"tau grid needs at least 2 points, got {points}")
    if not tau_max > 0:
        raise DomainError(f"tau_max must be positive, got {tau_max}")
    return tuple(float(t) for t in np.linspace(0.0, tau_max, points))


@dataclass(frozen=True)
class QuenchSpec:
    """``h0`` defines the battery (and stored energy), ``h1`` drives the charging."""

    h0: ChainParams
    h1: ChainParams
    taus: tuple[float, ...] = field(default_factory=tau_grid)

    def __post_init__(self):
        if self.h0.L != self.h1.L:
            raise DomainError(f"H0 and H1 chain lengths differ: {self.h0.L} vs {self.h1.L}")
        taus = tuple(float(t) for t in self.taus)
        if len(taus) < 2:
            raise DomainError("tau grid needs at least 2 points")
        if taus[0] != 0.0:
            raise DomainError(f"tau grid must start at 0, got {taus[0]}")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise DomainError("tau grid must be strictly increasing")
        object.__setattr__(self, "taus", taus)

    @property
    def L(self) -> int:
        return self.h0.L


@dataclass(frozen=True, eq=False)
class ChargingTrace:
    """Sampled charging curve of one quench; totals, with per-spin views."""

    spec: QuenchSpec
    e0: float
    taus: np.ndarray
    work: np.ndarray
    power: np.ndarray
    p_max: float
    tau_star: float
    w_at_tau_star: float
    ground: GroundStateResult | None = None
    norm_drift: float = 0.0
    h1_drift: float = 0.0

    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def work_per_spin(self) -> np.ndarray:
        return self.work / self.L

    @property
    def power_per_spin(self) -> np.ndarray:
        return self.power / self.L

    @property
    def p_max_per_spin(self) -> float:
        return self.p_max / self.L

    @property
    def w_at_tau_star_per_spin(self) -> float:
        return self.w_at_tau_star / self.L

    @property
    def tau_star_at_boundary(self) -> bool:
        """True when the maximum sits on the last grid point and may not be interior."""
        return bool(self.tau_star == self.taus[-1])


def power_from_work(taus, work) -> np.ndarray:
    """P = W / tau with P(0) := 0 (W vanishes quadratically at small tau)."""
    taus = np.asarray(taus, dtype=float)
    work = np.asarray(work, dtype=float)
    power = np.zeros_like(work)
    positive = taus > 0
    power[positive] = work[positive] / taus[positive]
    return power


def _grid_maximum(taus, power):
    # tau = 0 is excluded; np.argmax returns the first (smallest-tau) maximizer
    taus = np.asarray(taus)
    candidates = np.flatnonzero(taus > 0)
    best = candidates[int(np.argmax(np.asarray(power)[candidates]))]
    return int(best)


def p_max_of(trace: ChargingTrace) -> tuple[float, float]:
    """(maximum power per spin, smallest charging time attaining it)."""
    i = _grid_maximum(trace.taus, trace.power)
    return float(trace.power[i] / trace.L), float(trace.taus[i])


def _assemble(spec, e0, work, ground=None, norm_drift=0.0, h1_drift=0.0) -> ChargingTrace:
    taus = np.asarray(spec.taus)
    work = np.asarray(work, dtype=float)
    power = power_from_work(taus, work)
    i = _grid_maximum(taus, power)
    return ChargingTrace(
        spec=spec,
        e0=float(e0),
        taus=taus,
        work=work,
        power=power,
        p_max=float(power[i]),
        tau_star=float(taus[i]),
        w_at_tau_star=float(work[i]),
        ground=ground,
        norm_drift=float(norm_drift),
        h1_drift=float(h1_drift),
    )


def run_charging(
    spec: QuenchSpec,
    solver_opts: SolverOptions | None = None,
    prop_opts: PropagatorOptions | None = None,
) -> ChargingTrace:
    """Run the quench on the sparse path: Lanczos ground state + Krylov evolution."""
    H0 = build_hamiltonian(spec.h0)
    H1 = build_hamiltonian(spec.h1)
    gs = ground_state(H0, solver_opts)
    e0 = gs.energy

    psi = gs.state
    e1_start = expectation(H1, psi)
    propagator = KrylovPropagator(H1, prop_opts)
    work = np.empty(len(spec.taus))
    h1_drift = 0.0
    for k, psi in enumerate(propagator.sample(psi, spec.taus)):
        h1_drift = max(h1_drift, abs(expectation(H1, psi) - e1_start))
        work[k] = expectation(H0, psi) - e0
    return _assemble(spec, e0, work, gs, propagator.max_norm_defect, h1_drift)


def run_charging_dense(spec: QuenchSpec) -> ChargingTrace:
    """Brute-force reference: dense ground state, dense exponential, dense quadratic form.

    Shares no numerical code with :func:`run_charging` beyond the matrix
    assembly; limited to small chains.
    """
    if spec.h0.dim > DENSE_MAX_DIM:
        raise CapacityError(f"dense pipeline capped at dim {DENSE_MAX_DIM}, got {spec.h0.dim}")
    H0 = build_hamiltonian(spec.h0)
    H1 = build_hamiltonian(spec.h1)
    e0, psi0 = dense_ground_state(H0)
    dense_h0 = H0.matrix.toarray()
    evals, evecs = scipy.linalg.eigh(H1.matrix.toarray())
    amplitudes = evecs.conj().T @ psi0
    work = np.empty(len(spec.taus))
    for k, tau in enumerate(spec.taus):
        psi = evecs @ (np.exp(-1j * evals * tau) * amplitudes)
        work[k] = float(np.vdot(psi, dense_h0 @ psi).real) - e0
    return _assemble(spec, e0, work)
