"""Small-chain oracle checks run by ``annni-battery validate``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charging import QuenchSpec, run_charging, run_charging_dense
from .eigensolver import dense_spectrum, ground_state
from .operators import ChainParams, build_hamiltonian, dense_hamiltonian_kron
from .propagator import dense_expm_apply, evolve


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} {self.value:.3e} (tol {self.tolerance:.0e})"


def _check(name, value, tol) -> CheckResult:
    value = float(value)
    return CheckResult(name, bool(value < tol), value, tol)


def check_kron_oracle(L=8) -> CheckResult:
    params = ChainParams.from_kappa(L, 0.3, 0.4)
    diff = np.abs(build_hamiltonian(params).matrix.toarray() - dense_hamiltonian_kron(params)).max()
    return _check(f"hamiltonian vs Kronecker oracle (L={L})", diff, 1e-14)


def check_ground_energies(L=10) -> CheckResult:
    worst = 0.0
    for h in (0.2, 0.4, 1.0):
        for kappa in (0.0, 0.3, 0.6):
            H = build_hamiltonian(ChainParams.from_kappa(L, kappa, h))
            worst = max(worst, abs(ground_state(H).energy - dense_spectrum(H)[0]))
    return _check(f"Lanczos E0 vs dense spectrum (L={L}, 9 pts)", worst, 1e-9)


def check_propagator(L=8) -> CheckResult:
    H = build_hamiltonian(ChainParams.from_kappa(L, 0.4, 0.4))
    rng = np.random.default_rng(7)
    psi = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
    psi /= np.linalg.norm(psi)
    diff = np.linalg.norm(evolve(psi, H, 5.0) - dense_expm_apply(psi, H, 5.0))
    return _check(f"Krylov evolve vs dense expm (L={L}, t=5)", diff, 1e-8)


def check_pipeline(L=8) -> CheckResult:
    spec = QuenchSpec(ChainParams.from_kappa(L, 0.3, 0.4), ChainParams.from_kappa(L, 0.4, 0.4))
    sparse, dense = run_charging(spec), run_charging_dense(spec)
    diff = np.abs(sparse.work_per_spin - dense.work_per_spin).max()
    return _check(f"W(tau)/L sparse vs dense pipeline (L={L})", diff, 1e-8)


def check_null_quench(L=8) -> CheckResult:
    same = ChainParams.from_kappa(L, 0.3, 0.4)
    commuting = QuenchSpec(ChainParams.from_kappa(L, 0.0, 0.0), ChainParams.from_kappa(L, 0.1, 0.0))
    worst = max(
        np.abs(run_charging(QuenchSpec(same, same)).work_per_spin).max(),
        np.abs(run_charging(commuting).work_per_spin).max(),
    )
    return _check(f"null quenches max |W|/L (L={L})", worst, 1e-9)


CHECKS = (check_kron_oracle, check_ground_energies, check_propagator, check_pipeline, check_null_quench)


def run_validation() -> list[CheckResult]:
    return [check() for check in CHECKS]
