"""ANNNI chain Hamiltonians as sparse matrices in the sigma^z product basis.

Basis convention: a basis index ``b`` encodes site ``i`` (0-based) in bit ``i``;
bit value 0 is sigma^z = +1 and bit value 1 is sigma^z = -1.  The open chain
Hamiltonian is

    H = -J1 sum_i X_i X_{i+1} - J2 sum_i X_i X_{i+2} - h sum_i Z_i

with the nearest-neighbour sum over L-1 bonds and the next-nearest sum over
L-2 bonds.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DomainError, NumericalError

DEFAULT_MAX_L = 24
MAX_L_ENV = "QB_MAX_L"
IMAG_TOL = 1e-10


def max_sites() -> int:
    """Dimension cap on the chain length, overridable with ``QB_MAX_L``."""
    raw = os.environ.get(MAX_L_ENV)
    if raw is None or raw == "":
        return DEFAULT_MAX_L
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"{MAX_L_ENV}={raw!r} is not an integer") from exc
    if value < 1:
        raise DomainError(f"{MAX_L_ENV} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class ChainParams:
    """Couplings of one open ANNNI chain.

    ``J2 = -kappa * J1``; use :meth:`from_kappa` to build from the frustration
    parameter.
    """

    L: int
    J1: float = 1.0
    J2: float = 0.0
    h: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise DomainError(f"L must be an integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        for name in ("J1", "J2", "h"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.L < 1:
            raise DomainError(f"L must be >= 1, got {self.L}")
        if self.boundary != "open":
            raise DomainError(
                f"boundary {self.boundary!r} is not supported (only 'open')"
            )
        if self.J2 != 0.0 and self.L < 3:
            raise DomainError(
                f"J2={self.J2} needs L >= 3: the next-nearest-neighbour sum is "
                f"empty for L={self.L}"
            )

    @classmethod
    def from_kappa(cls, L: int, kappa: float, h: float, J1: float = 1.0) -> "ChainParams":
        # 0.0 - x keeps J2 = +0.0 when kappa = 0
        return cls(L=L, J1=J1, J2=0.0 - float(kappa) * float(J1), h=h)

    @property
    def kappa(self) -> float:
        if self.J1 == 0.0:
            raise DomainError("kappa = -J2/J1 is undefined for J1 = 0")
        return 0.0 - self.J2 / self.J1

    @property
    def dim(self) -> int:
        return 1 << self.L


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Real symmetric CSR matrix presented as a Hermitian operator.

    Treat as immutable; the underlying arrays are flagged read-only.
    """

    params: ChainParams
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def L(self) -> int:
        return self.params.L

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __matmul__(self, psi):
        return apply(self, psi)

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        """Unchecked product; complex vectors are split into real and imaginary parts."""
        if np.iscomplexobj(psi):
            # a real matrix times a complex vector is upcast by scipy on every call
            out = np.empty(self.matrix.shape[0], dtype=np.result_type(psi, np.float64))
            out.real = self.matrix @ psi.real
            out.imag = self.matrix @ psi.imag
            return out
        return self.matrix @ psi

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray().astype(complex)

    def hermiticity_defect(self) -> float:
        """Largest |H_ij - conj(H_ji)| over stored entries."""
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0


def _flip_masks(L: int, distance: int) -> list[int]:
    return [(1 << i) | (1 << (i + distance)) for i in range(L - distance)]


def build_hamiltonian(params: ChainParams) -> SparseHamiltonian:
    """Assemble the ANNNI Hamiltonian for ``params`` in CSR form."""
    limit = max_sites()
    if params.L > limit:
        raise CapacityError(
            f"L={params.L} exceeds the configured maximum L={limit} "
            f"(set {MAX_L_ENV} to raise it)"
        )
    L, dim = params.L, params.dim
    states = np.arange(dim, dtype=np.int64)

    rows, cols, vals = [], [], []
    if params.h != 0.0:
        # sum_i Z_i = L - 2 * popcount(b)
        popcount = np.zeros(dim, dtype=np.int64)
        for i in range(L):
            popcount += (states >> i) & 1
        rows.append(states)
        cols.append(states)
        vals.append(-params.h * (L - 2 * popcount).astype(np.float64))
    for coupling, distance in ((params.J1, 1), (params.J2, 2)):
        if coupling == 0.0:
            continue
        for mask in _flip_masks(L, distance):
            rows.append(states)
            cols.append(states ^ mask)
            vals.append(np.full(dim, -coupling))

    if rows:
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
        matrix.eliminate_zeros()
        matrix.sort_indices()
    else:
        matrix = sp.csr_matrix((dim, dim), dtype=np.float64)
    for arr in (matrix.data, matrix.indices, matrix.indptr):
        arr.flags.writeable = False
    return SparseHamiltonian(params=params, matrix=matrix)


def _check_dim(H: SparseHamiltonian, psi: np.ndarray) -> None:
    if psi.ndim != 1 or psi.shape[0] != H.dim:
        raise DomainError(
            f"state of shape {psi.shape} does not match Hamiltonian dimension {H.dim}"
        )


def apply(H: SparseHamiltonian, psi) -> np.ndarray:
    """Return the (unnormalized) vector ``H @ psi``."""
    psi = np.asarray(psi)
    _check_dim(H, psi)
    return H.matvec(psi)


def expectation(H: SparseHamiltonian, psi) -> float:
    """Real part of <psi|H|psi>; raises if the imaginary residue is not negligible."""
    psi = np.asarray(psi)
    _check_dim(H, psi)
    value = np.vdot(psi, H.matvec(psi))
    if not np.isfinite(value):
        raise NumericalError("non-finite expectation value")
    if abs(value.imag) >= IMAG_TOL:
        raise NumericalError(
            f"expectation has imaginary part {value.imag:.3e}; operator is not Hermitian"
        )
    return float(value.real)


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0 or not np.isfinite(norm):
        raise NumericalError(f"cannot normalize vector of norm {norm}")
    return psi / norm


def basis_state(L: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << L, dtype=complex)
    psi[index] = 1.0
    return psi


def parity_signs(L: int) -> np.ndarray:
    """Diagonal of the Z2 parity operator prod_i Z_i, i.e. (-1)**popcount(b)."""
    states = np.arange(1 << L, dtype=np.int64)
    popcount = np.zeros_like(states)
    for i in range(L):
        popcount += (states >> i) & 1
    return np.where(popcount % 2 == 0, 1.0, -1.0)


def reflection_permutation(L: int) -> np.ndarray:
    """Index map b -> b' with site i sent to site L-1-i."""
    states = np.arange(1 << L, dtype=np.int64)
    out = np.zeros_like(states)
    for i in range(L):
        out |= ((states >> i) & 1) << (L - 1 - i)
    return out


_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def _site_operator(L: int, ops: dict[int, str]) -> np.ndarray:
    # site 0 is the least significant bit, so it is the rightmost Kronecker factor
    factors = [_PAULI[ops.get(site, "I")] for site in reversed(range(L))]
    return reduce(np.kron, factors)


def dense_hamiltonian_kron(params: ChainParams) -> np.ndarray:
    """Independent dense construction from explicit Kronecker products.

    Validation oracle only; memory grows as 4**L.
    """
    L = params.L
    if L > 12:
        raise CapacityError(f"dense Kronecker oracle is capped at L=12, got L={L}")
    H = np.zeros((1 << L, 1 << L))
    for i in range(L - 1):
        H -= params.J1 * _site_operator(L, {i: "X", i + 1: "X"})
    for i in range(L - 2):
        H -= params.J2 * _site_operator(L, {i: "X", i + 2: "X"})
    for i in range(L):
        H -= params.h * _site_operator(L, {i: "Z"})
    return H
