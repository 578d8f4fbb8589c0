"""Ground states by restarted Lanczos, plus a dense diagonalization oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapacityError, ConvergenceError, DomainError, NumericalError
from .operators import SparseHamiltonian, parity_signs

DEFAULT_SEED = 0x5EED
DENSE_MAX_DIM = 1 << 10

SECTORS = ("auto", "even", "odd", "full")


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`ground_state`.

    ``sector`` selects the Z2 parity sector the Lanczos start vector lives in.
    ``"auto"`` solves the even and odd sectors separately and keeps the lower
    one (even on a tie below ``degeneracy_tol``); ``"full"`` uses an
    unprojected start vector.
    """

    tol: float = 1e-10
    krylov_dim: int = 60
    max_restarts: int = 500
    seed: int = DEFAULT_SEED
    sector: str = "auto"
    degeneracy_tol: float = 1e-8

    def __post_init__(self):
        if self.tol <= 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.krylov_dim < 2:
            raise DomainError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if self.max_restarts < 1:
            raise DomainError(f"max_restarts must be >= 1, got {self.max_restarts}")
        if self.sector not in SECTORS:
            raise DomainError(f"sector must be one of {SECTORS}, got {self.sector!r}")


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    energy: float
    state: np.ndarray
    residual: float
    iterations: int
    gap: float
    degenerate: bool
    sector: str


@dataclass
class _SectorSolution:
    energy: float
    vector: np.ndarray
    residual: float
    matvecs: int
    second_ritz: float


def _lanczos_lowest(matvec, v0, tol, krylov_dim, max_restarts) -> _SectorSolution:
    """Explicitly restarted Lanczos with full (two-pass) reorthogonalization.

    Each restart begins from the current lowest Ritz vector.  Convergence is
    judged on the true residual ``||H x - E x||`` of the normalized Ritz
    vector, with ``E`` its Rayleigh quotient.
    """
    n = v0.shape[0]
    m = min(krylov_dim, n)
    basis = np.empty((m + 1, n), dtype=v0.dtype)
    x = v0 / np.linalg.norm(v0)
    matvecs = 0
    residual = np.inf
    second = np.inf

    for _ in range(max_restarts):
        basis[0] = x
        alphas, betas = [], []
        for j in range(m):
            w = matvec(basis[j])
            matvecs += 1
            alpha = float(np.vdot(basis[j], w).real)
            w = w - alpha * basis[j]
            if j > 0:
                w -= betas[-1] * basis[j - 1]
            for _pass in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1] @ w.conj()).conj()
            beta = float(np.linalg.norm(w))
            if not (np.isfinite(alpha) and np.isfinite(beta)):
                raise NumericalError("NaN/inf encountered in Lanczos iteration")
            alphas.append(alpha)
            theta, s = _tridiag_eig(alphas, betas)
            estimate = beta * abs(s[-1, 0])
            invariant = beta <= 1e-14 * max(1.0, abs(theta[0]))
            if invariant or estimate < 0.1 * tol or j == m - 1:
                break
            betas.append(beta)
            basis[j + 1] = w / beta

        k = len(alphas)
        x = basis[:k].T @ s[:, 0]
        x /= np.linalg.norm(x)
        hx = matvec(x)
        matvecs += 1
        energy = float(np.vdot(x, hx).real)
        residual = float(np.linalg.norm(hx - energy * x))
        if not np.isfinite(residual):
            raise NumericalError("NaN/inf encountered in Lanczos residual")
        second = float(theta[1]) if k > 1 else np.inf
        if residual < tol or invariant:
            return _SectorSolution(energy, x, residual, matvecs, second)

    raise ConvergenceError(
        f"Lanczos did not converge after {max_restarts} restarts "
        f"(last residual {residual:.3e}, tol {tol:.1e})",
        residual=residual,
    )


def _tridiag_eig(alphas, betas):
    if len(alphas) == 1:
        return np.array(alphas), np.ones((1, 1))
    return scipy.linalg.eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))


def _start_vector(dim: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(dim)


def ground_state(H: SparseHamiltonian, opts: SolverOptions | None = None) -> GroundStateResult:
    """Lowest eigenpair of ``H``.

    The start vector is a seeded Gaussian vector, so reruns with the same
    options are bit-identical.  The Hamiltonian is real, so the iteration runs
    in real arithmetic; the returned state is complex.
    """
    opts = opts or SolverOptions()
    v0 = _start_vector(H.dim, opts.seed)

    def solve(sector: str) -> _SectorSolution:
        start = v0
        if sector != "full":
            signs = parity_signs(H.L)
            start = np.where(signs == (1.0 if sector == "even" else -1.0), v0, 0.0)
        return _lanczos_lowest(
            H.matvec, start, opts.tol, opts.krylov_dim, opts.max_restarts
        )

    if opts.sector == "auto":
        even, odd = solve("even"), solve("odd")
        split = odd.energy - even.energy
        if split > -opts.degeneracy_tol:
            best, label, other = even, "even", odd.energy
        else:
            best, label, other = odd, "odd", even.energy
        iterations = even.matvecs + odd.matvecs
        gap = min(abs(other - best.energy), best.second_ritz - best.energy)
    else:
        best = solve(opts.sector)
        label = opts.sector
        iterations = best.matvecs
        gap = best.second_ritz - best.energy

    return GroundStateResult(
        energy=best.energy,
        state=best.vector.astype(complex),
        residual=best.residual,
        iterations=iterations,
        gap=float(gap),
        degenerate=bool(gap < opts.degeneracy_tol),
        sector=label,
    )


def _dense_matrix(H: SparseHamiltonian, max_dim: int) -> np.ndarray:
    if H.dim > max_dim:
        raise CapacityError(f"dense oracle capped at dim {max_dim}, got {H.dim}")
    return H.matrix.toarray()


def dense_spectrum(H: SparseHamiltonian, max_dim: int = DENSE_MAX_DIM) -> np.ndarray:
    """All eigenvalues of ``H`` in ascending order via full diagonalization."""
    return scipy.linalg.eigvalsh(_dense_matrix(H, max_dim))


def dense_ground_state(H: SparseHamiltonian, max_dim: int = DENSE_MAX_DIM):
    """(E0, normalized ground vector) from full diagonalization."""
    evals, evecs = scipy.linalg.eigh(_dense_matrix(H, max_dim))
    return float(evals[0]), evecs[:, 0].astype(complex)
