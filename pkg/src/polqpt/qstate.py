"""Polarization-qubit states: Stokes vectors, density matrices, canonical states.

Basis conventions (``{|h>, |v>}`` computational basis)::

    tau_1 = diag(1, -1)        S1: h / v
    tau_2 = [[0, 1], [1, 0]]   S2: +45 / -45 (p / m)
    tau_3 = [[0, -i], [i, 0]]  S3: right / left circular (r / l)

so that Stokes index ``i`` pairs with ``PAULI[i]`` and ``rho = (I + sum_i S_i tau_i) / 2``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import UnphysicalStateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
STOKES_NORM_TOL = 1e-9
_EIG_CUTOFF = 1e-14

IDENTITY = np.eye(2, dtype=complex)
TAU_1 = np.array([[1, 0], [0, -1]], dtype=complex)
TAU_2 = np.array([[0, 1], [1, 0]], dtype=complex)
TAU_3 = np.array([[0, -1j], [1j, 0]], dtype=complex)

#: Operator basis ``{I, tau_1, tau_2, tau_3}`` shared by states and process matrices.
PAULI = np.stack([IDENTITY, TAU_1, TAU_2, TAU_3])

_S = 1 / np.sqrt(2)
_CANONICAL = {
    "h": np.array([1, 0], dtype=complex),
    "v": np.array([0, 1], dtype=complex),
    "p": np.array([_S, _S], dtype=complex),
    "m": np.array([-_S, _S], dtype=complex),
    "r": np.array([_S, 1j * _S], dtype=complex),
    "l": np.array([1j * _S, _S], dtype=complex),
}
CANONICAL_LABELS = tuple(_CANONICAL)

#: Three mutually unbiased inputs used for the quarter-wave-plate scheme.
MUB_STOKES = {
    "a": (np.sqrt(1 / 3), 0.0, -np.sqrt(2 / 3)),
    "b": (np.sqrt(1 / 3), np.sqrt(1 / 2), np.sqrt(1 / 6)),
    "c": (np.sqrt(1 / 3), -np.sqrt(1 / 2), np.sqrt(1 / 6)),
}


class StokesVector(NamedTuple):
    """Point in the Poincare ball."""

    s1: float
    s2: float
    s3: float

    @property
    def degree(self) -> float:
        return degree_of_polarization(self)

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3], dtype=float)


def canonical_state(label: str) -> np.ndarray:
    """Return the unit amplitude vector of one of ``h, v, p, m, r, l``."""
    try:
        return _CANONICAL[label].copy()
    except KeyError:
        raise ValueError(
            f"unknown state label {label!r}; expected one of {', '.join(CANONICAL_LABELS)}"
        ) from None


def pure_density(psi) -> np.ndarray:
    """Projector ``|psi><psi|`` for a (normalized on the fly) amplitude vector."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero state vector")
    psi = psi / norm
    return np.outer(psi, psi.conj())


def canonical_density(label: str) -> np.ndarray:
    return pure_density(canonical_state(label))


def is_density_matrix(rho, atol: float = PSD_TOL) -> bool:
    rho = np.asarray(rho)
    if rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
        return False
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        return False
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -atol


def validate_density(rho) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a physical state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_density_matrix(rho):
        raise UnphysicalStateError("matrix is not Hermitian, unit-trace and positive semidefinite")
    return rho


def stokes_to_density(s) -> np.ndarray:
    """Density matrix ``(I + S . tau) / 2`` of a Stokes vector."""
    s = np.asarray(s, dtype=float)
    d = float(np.linalg.norm(s))
    if d > 1 + STOKES_NORM_TOL:
        raise UnphysicalStateError(f"degree of polarization {d:.12g} exceeds 1")
    return 0.5 * (IDENTITY + np.tensordot(s, PAULI[1:], axes=1))


def stokes_to_matrix(s) -> np.ndarray:
    """Like :func:`stokes_to_density` but without the physicality check (linear QST output)."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (IDENTITY + np.tensordot(s, PAULI[1:], axes=1))


def density_to_stokes(rho) -> StokesVector:
    rho = np.asarray(rho, dtype=complex)
    s = np.einsum("kij,ji->k", PAULI[1:], rho).real
    return StokesVector(*(float(x) for x in s))


def degree_of_polarization(s) -> float:
    return float(np.linalg.norm(np.asarray(s, dtype=float)))


def sqrtm_psd(a) -> np.ndarray:
    """Square root of a Hermitian matrix; negative and round-off eigenvalues set to zero."""
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.where(w > _EIG_CUTOFF * max(w.max(), 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(a, b) -> float:
    """``(tr sqrt(sqrt(a) b sqrt(a)))**2`` for PSD matrices of unit trace.

    Evaluated as the squared nuclear norm of ``sqrt(a) sqrt(b)``, which avoids
    taking square roots of round-off eigenvalues.
    """
    s = np.linalg.svd(sqrtm_psd(a) @ sqrtm_psd(b), compute_uv=False)
    return min(max(float(np.sum(s) ** 2), 0.0), 1.0)


def state_fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity between two qubit density matrices."""
    return uhlmann_fidelity(validate_density(rho1), validate_density(rho2))


def parse_state(spec) -> StokesVector:
    """Resolve a label (``h``...``l`` or MUB ``a, b, c``) or a Stokes triple."""
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in _CANONICAL:
            return density_to_stokes(canonical_density(key))
        if key in MUB_STOKES:
            return StokesVector(*MUB_STOKES[key])
        parts = key.strip("()[]").split(",")
        if len(parts) == 3:
            try:
                return StokesVector(*(float(p) for p in parts))
            except ValueError:
                pass
        raise ValueError(f"cannot interpret {spec!r} as a polarization state")
    values = tuple(float(x) for x in spec)
    if len(values) != 3:
        raise ValueError(f"Stokes vector needs 3 components, got {len(values)}")
    return StokesVector(*values)
