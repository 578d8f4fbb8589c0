"""Real-time evolution exp(-i H t) psi by adaptive Lanczos-Krylov substeps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .eigensolver import DENSE_MAX_DIM
from .errors import CapacityError, DomainError, NumericalError, StiffnessError
from .operators import SparseHamiltonian

NORM_TOL = 1e-9


@dataclass(frozen=True)
class PropagatorOptions:
    krylov_dim: int = 30
    substep_tol: float = 1e-10
    max_substeps: int = 10**6

    def __post_init__(self):
        if self.krylov_dim < 2:
            raise DomainError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if not self.substep_tol > 0:
            raise DomainError(f"substep_tol must be positive, got {self.substep_tol}")
        if self.max_substeps < 1:
            raise DomainError(f"max_substeps must be >= 1, got {self.max_substeps}")


class _KrylovProjection:
    """Lanczos basis of one substep with the eigendecomposition of its tridiagonal."""

    def __init__(self, matvec, psi, m):
        n = psi.shape[0]
        m = min(m, n)
        basis = np.empty((m, n), dtype=complex)
        basis[0] = psi
        alphas, betas = [], []
        beta_last = 0.0
        for j in range(m):
            w = matvec(basis[j])
            alpha = float(np.vdot(basis[j], w).real)
            w -= alpha * basis[j]
            if j > 0:
                w -= betas[-1] * basis[j - 1]
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w.conj()).conj()
            beta = float(np.linalg.norm(w))
            if not (np.isfinite(alpha) and np.isfinite(beta)):
                raise NumericalError("NaN/inf encountered in Krylov propagation")
            alphas.append(alpha)
            if beta <= 1e-13 * max(1.0, abs(alpha)):
                # invariant subspace: the projection is exact
                beta_last = 0.0
                break
            if j == m - 1:
                beta_last = beta
                break
            betas.append(beta)
            basis[j + 1] = w / beta
        self.basis = basis[: len(alphas)]
        self.beta_last = beta_last
        if len(alphas) == 1:
            self.theta, self.vecs = np.array(alphas), np.ones((1, 1))
        else:
            self.theta, self.vecs = scipy.linalg.eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas)
            )

    def coefficients(self, dt):
        """exp(-i T dt) e_1 in the Krylov basis."""
        return self.vecs @ (np.exp(-1j * self.theta * dt) * self.vecs[0].conj())

    def error_estimate(self, dt):
        # Saad's a posteriori bound: beta_m |e_m^T exp(-i T dt) e_1|
        if self.beta_last == 0.0:
            return 0.0
        return self.beta_last * abs(self.coefficients(dt)[-1])


class KrylovPropagator:
    """Integrator for trajectories under a fixed Hamiltonian.

    Each substep builds one Krylov basis and takes the largest step whose
    error estimate stays below ``substep_tol``; every requested output time
    inside that step is read off the same basis.
    """

    def __init__(self, H: SparseHamiltonian, opts: PropagatorOptions | None = None):
        self.H = H
        self.opts = opts or PropagatorOptions()
        self.substeps = 0
        # largest | ||psi|| - 1 | seen before renormalization
        self.max_norm_defect = 0.0

    def _largest_step(self, proj, limit, min_dt):
        tol = self.opts.substep_tol
        if proj.error_estimate(limit) <= tol:
            return limit
        lo, hi = 0.0, limit
        while hi - lo > 1e-3 * hi:
            mid = 0.5 * (lo + hi)
            if proj.error_estimate(mid) <= tol:
                lo = mid
            else:
                hi = mid
            if hi < min_dt:
                break
        if lo < min_dt:
            raise StiffnessError(
                f"required substep {lo:.3e} is below t/max_substeps = {min_dt:.3e}"
            )
        return lo

    def _checked(self, vec, scale):
        norm = np.linalg.norm(vec)
        if not np.isfinite(norm):
            raise NumericalError("NaN/inf encountered in Krylov propagation")
        self.max_norm_defect = max(self.max_norm_defect, abs(norm - 1.0))
        if abs(norm - 1.0) >= NORM_TOL:
            raise NumericalError(f"norm drifted to {norm!r} during propagation")
        return scale * vec / norm

    def sample(self, psi, times):
        """Yield exp(-i H t) psi for each of the non-decreasing, non-negative ``times``."""
        times = [float(t) for t in times]
        if any(t < 0 for t in times):
            raise DomainError("negative evolution time is not supported")
        if any(b < a for a, b in zip(times, times[1:])):
            raise DomainError("sample times must be non-decreasing")
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (self.H.dim,):
            raise DomainError(
                f"state of shape {psi.shape} does not match Hamiltonian dimension {self.H.dim}"
            )
        scale = np.linalg.norm(psi)
        if not np.isfinite(scale):
            raise NumericalError("input state contains NaN/inf")
        if scale == 0 or not times:
            for _ in times:
                yield psi.copy()
            return

        min_dt = times[-1] / self.opts.max_substeps
        current = psi / scale
        t_now = 0.0
        k = 0
        while k < len(times) and times[k] == 0.0:
            yield psi.copy()
            k += 1
        while k < len(times):
            proj = _KrylovProjection(self.H.matvec, current, self.opts.krylov_dim)
            dt = self._largest_step(proj, times[-1] - t_now, min_dt)
            self.substeps += 1
            reached = False
            while k < len(times) and times[k] - t_now <= dt:
                state = proj.basis.T @ proj.coefficients(times[k] - t_now)
                out = self._checked(state, scale)
                yield out
                current = out / scale
                reached = True
                k += 1
                # repeated times are served by the same state
                while k < len(times) and times[k] == times[k - 1]:
                    yield out.copy()
                    k += 1
            if reached:
                t_now = times[k - 1]
            else:
                current = self._checked(proj.basis.T @ proj.coefficients(dt), 1.0)
                t_now += dt

    def advance(self, psi, t: float) -> np.ndarray:
        if t < 0:
            raise DomainError(f"negative evolution time {t} is not supported")
        *_, last = self.sample(psi, [t])
        return last


def evolve(psi, H1: SparseHamiltonian, t: float, opts: PropagatorOptions | None = None) -> np.ndarray:
    """Approximate exp(-i H1 t) psi; ``t`` must be non-negative."""
    return KrylovPropagator(H1, opts).advance(psi, t)


def evolve_on_grid(psi, H1: SparseHamiltonian, times, opts: PropagatorOptions | None = None):
    """Yield the evolved state at each of the increasing ``times``.

    The trajectory is continued between grid points instead of restarting
    from t = 0 each time.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
        raise DomainError("times must be non-negative and strictly increasing")
    yield from KrylovPropagator(H1, opts).sample(psi, times)


def dense_expm_apply(psi, H1: SparseHamiltonian, t: float, max_dim: int = DENSE_MAX_DIM) -> np.ndarray:
    """exp(-i H1 t) psi through a full eigendecomposition (oracle; any sign of t)."""
    if H1.dim > max_dim:
        raise CapacityError(f"dense oracle capped at dim {max_dim}, got {H1.dim}")
    evals, evecs = scipy.linalg.eigh(H1.matrix.toarray())
    psi = np.asarray(psi, dtype=complex)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi))
