"""Single-qubit process representations and their analysis.

All process matrices are 4x4 arrays in the operator basis ``PAULI`` =
``{I, tau_1, tau_2, tau_3}``:

* chi matrix:   ``E(rho) = sum_mn chi[m, n] E_m rho E_n^dag``
* Pauli transfer matrix (PTM): ``R[i, j] = tr(E_i E(E_j)) / 2``, acting on ``(1, S1, S2, S3)``
* Choi matrix:  ``sum_ij |i><j| (x) E(|i><j|) / 2`` (unit trace)

With this normalization the chi and Choi matrices are unitarily equivalent,
so positivity and trace carry over directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qstate import PAULI, uhlmann_fidelity

_PHI_PLUS = np.eye(2, dtype=complex).reshape(4) / np.sqrt(2)
# Columns (I (x) E_m)|phi+>; an orthonormal basis, so choi = B chi B^dag.
_CHOI_BASIS = np.stack([np.kron(np.eye(2), e) @ _PHI_PLUS for e in PAULI], axis=1)

# chi -> PTM as a 16x16 linear map on row-major flattened matrices:
# R_ij = 1/2 sum_mn chi_mn tr(E_i E_m E_j E_n)   (E_n Hermitian)
_CHI_TO_PTM = 0.5 * np.einsum("iab,mbc,jcd,nda->ijmn", PAULI, PAULI, PAULI, PAULI).reshape(16, 16)
_PTM_TO_CHI = np.linalg.inv(_CHI_TO_PTM)


@dataclass(frozen=True)
class BlochMap:
    """Affine action ``S -> linear @ S + translation`` on Stokes vectors."""

    linear: np.ndarray
    translation: np.ndarray

    def __call__(self, s) -> np.ndarray:
        return np.asarray(s, dtype=float) @ self.linear.T + self.translation


def hermitian_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return (a + a.conj().T) / 2


def kraus_to_chi(kraus: Sequence[np.ndarray]) -> np.ndarray:
    # K_j = sum_m a_jm E_m with a_jm = tr(E_m K_j) / 2
    coeffs = np.array([np.einsum("mab,ba->m", PAULI, k) / 2 for k in kraus])
    return coeffs.T @ coeffs.conj()


def is_trace_preserving_kraus(kraus: Sequence[np.ndarray], tol: float = 1e-10) -> bool:
    total = sum(k.conj().T @ k for k in kraus)
    return bool(np.abs(total - np.eye(2)).max() <= tol)


def apply_kraus(kraus: Sequence[np.ndarray], rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in kraus)


def apply_chi(chi, rho) -> np.ndarray:
    return np.einsum("mn,mab,bc,ndc->ad", chi, PAULI, np.asarray(rho, dtype=complex), PAULI.conj())


def chi_to_ptm(chi) -> np.ndarray:
    r = (_CHI_TO_PTM @ np.asarray(chi, dtype=complex).reshape(16)).reshape(4, 4)
    return r.real


def ptm_to_chi(ptm) -> np.ndarray:
    chi = (_PTM_TO_CHI @ np.asarray(ptm, dtype=complex).reshape(16)).reshape(4, 4)
    return hermitian_part(chi)


def chi_to_choi(chi) -> np.ndarray:
    return _CHOI_BASIS @ np.asarray(chi, dtype=complex) @ _CHOI_BASIS.conj().T


def choi_to_chi(choi) -> np.ndarray:
    return _CHOI_BASIS.conj().T @ np.asarray(choi, dtype=complex) @ _CHOI_BASIS


def apply_choi(choi, rho) -> np.ndarray:
    """``E(rho) = 2 tr_in[(rho^T (x) I) choi]``."""
    c = np.asarray(choi, dtype=complex).reshape(2, 2, 2, 2)
    return 2 * np.einsum("ij,iajb->ab", np.asarray(rho, dtype=complex), c)


def chi_eigenvalues(chi) -> np.ndarray:
    """Real eigenvalues of a Hermitian chi, largest first."""
    return np.linalg.eigvalsh(hermitian_part(chi))[::-1]


def bloch_map(chi) -> BlochMap:
    r = chi_to_ptm(chi)
    return BlochMap(linear=r[1:, 1:].copy(), translation=r[1:, 0].copy())


def ellipsoid_radii(chi) -> np.ndarray:
    """Primary radii of the image of the Poincare sphere, largest first."""
    return np.linalg.svd(bloch_map(chi).linear, compute_uv=False)


def normalize_process(chi) -> np.ndarray:
    chi = hermitian_part(chi)
    tr = np.trace(chi).real
    if not tr > 0:
        raise ValueError(f"process matrix has non-positive trace {tr:.3g}")
    return chi / tr


def process_fidelity(chi1, chi2) -> float:
    """Uhlmann fidelity of two trace-normalized process matrices."""
    return uhlmann_fidelity(normalize_process(chi1), normalize_process(chi2))


def unitality_residual(chi) -> float:
    """Largest entry of ``E(I/2) - I/2``."""
    half = np.eye(2) / 2
    return float(np.abs(apply_chi(chi, half) - half).max())


def is_unital(chi, tol: float = 1e-9) -> bool:
    return unitality_residual(chi) <= tol


def is_completely_positive(chi, tol: float = 1e-8) -> bool:
    return bool(chi_eigenvalues(chi)[-1] >= -tol)


def trace_preservation_residual(chi) -> float:
    """Largest entry of ``sum_mn chi_mn E_n^dag E_m - I``; zero for trace-preserving maps."""
    total = np.einsum("mn,nab,mbc->ac", chi, PAULI.conj().transpose(0, 2, 1), PAULI)
    return float(np.abs(total - np.eye(2)).max())


def identity_chi() -> np.ndarray:
    chi = np.zeros((4, 4), dtype=complex)
    chi[0, 0] = 1
    return chi


def depolarizing_chi(p: float) -> np.ndarray:
    """``diag(1 - p, p/3, p/3, p/3)``; shrinks the Bloch ball by ``1 - 4p/3``."""
    return np.diag([1 - p, p / 3, p / 3, p / 3]).astype(complex)
