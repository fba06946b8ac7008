"""Jones calculus and the crystal walk-off model of the two depolarizers.

A birefringent crystal with complete walk-off (delay longer than the coherence
time) moves one polarization into the next discrete time bin.  With two
crossed crystals at most three bins ``t0, t1, t2`` are ever populated, so the
joint polarization/time state lives in a 6-dimensional space ordered as
``polarization (x) time``.  Tracing out time gives the polarization channel; its
Kraus operators are the time-bin blocks of the train's isometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ModeOverflowError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
#: Coherence time behind a 5 nm filter at 780 nm.
DEFAULT_COHERENCE_TIME = 180e-15  # s
N_MODES = 3
_OVERFLOW_TOL = 1e-14

SCHEME_I = "scheme_I"
SCHEME_II = "scheme_II"
SCHEMES = (SCHEME_I, SCHEME_II)


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def hwp_jones(angle: float) -> np.ndarray:
    """Half-wave plate with its fast axis at ``angle`` radians from horizontal."""
    c, s = np.cos(2 * angle), np.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_jones(angle: float) -> np.ndarray:
    """Quarter-wave plate ``diag(1, i)`` turned to ``angle``.

    Rotated with the coordinate (passive) rotation, so ``QWP(pi/4)`` is
    ``[[1, i], [i, 1]] / sqrt(2)`` and sends ``|h>`` to ``|r>``.
    """
    return rotation(-angle) @ np.diag([1, 1j]) @ rotation(angle)


@dataclass(frozen=True)
class WavePlate:
    kind: str  # "half" | "quarter"
    angle: float  # radians

    def __post_init__(self):
        if self.kind not in ("half", "quarter"):
            raise ValueError(f"wave plate kind must be 'half' or 'quarter', got {self.kind!r}")

    def jones(self) -> np.ndarray:
        return hwp_jones(self.angle) if self.kind == "half" else qwp_jones(self.angle)


@dataclass(frozen=True)
class CrystalSpec:
    """Birefringent crystal delaying one polarization by one time bin.

    ``birefringent_phase`` is the residual phase picked up by the delayed
    branch; it is what gets tuned so the whole train is the identity at zero
    plate angles.
    """

    delayed_axis: str  # "h" | "v"
    length: float = 1.0  # mm
    index_difference: float = 0.17
    birefringent_phase: float = 0.0

    def __post_init__(self):
        if self.delayed_axis not in ("h", "v"):
            raise ValueError(f"delayed_axis must be 'h' or 'v', got {self.delayed_axis!r}")
        if not self.length > 0:
            raise ValueError("crystal length must be positive")
        if not self.index_difference > 0:
            raise ValueError("refractive index difference must be positive")


@dataclass(frozen=True)
class ChannelScheme:
    tag: str
    control_angle: float  # radians: theta for scheme I, phi for scheme II

    def __post_init__(self):
        if self.tag not in SCHEMES:
            raise ValueError(f"unknown scheme {self.tag!r}; expected one of {SCHEMES}")


def walkoff_time(crystal: CrystalSpec) -> float:
    """Temporal walk-off ``L * dn / c`` in seconds (length given in mm)."""
    return crystal.length * 1e-3 * crystal.index_difference / SPEED_OF_LIGHT


def check_complete_walkoff(crystal: CrystalSpec, coherence_time: float = DEFAULT_COHERENCE_TIME) -> bool:
    if not coherence_time > 0:
        raise ValueError("coherence time must be positive")
    return walkoff_time(crystal) > coherence_time


# --- joint polarization/time states -----------------------------------------------------


def temporal_index(pol: int, mode: int) -> int:
    return N_MODES * pol + mode


def temporal_pure_state(pol_amplitudes, mode: int = 0) -> np.ndarray:
    """6-vector with the given polarization amplitudes in time bin ``mode``."""
    t = np.zeros(N_MODES, dtype=complex)
    t[mode] = 1
    return np.kron(np.asarray(pol_amplitudes, dtype=complex), t)


def temporal_density(pol_amplitudes, mode: int = 0) -> np.ndarray:
    psi = temporal_pure_state(pol_amplitudes, mode)
    return np.outer(psi, psi.conj())


def _crystal_operator(crystal: CrystalSpec) -> np.ndarray:
    delayed = 0 if crystal.delayed_axis == "h" else 1
    proj = np.zeros((2, 2), dtype=complex)
    proj[delayed, delayed] = 1
    shift = np.eye(N_MODES, k=-1, dtype=complex)  # |t_{k+1}><t_k|
    return (np.kron(np.eye(2) - proj, np.eye(N_MODES))
            + np.exp(1j * crystal.birefringent_phase) * np.kron(proj, shift))


def _last_bin_weight(crystal: CrystalSpec, rows) -> float:
    delayed = 0 if crystal.delayed_axis == "h" else 1
    return float(np.abs(rows[temporal_index(delayed, N_MODES - 1)]).max())


def apply_plate(state: np.ndarray, plate: WavePlate) -> np.ndarray:
    """Act on every time bin with the plate's Jones matrix (no mode coupling)."""
    op = np.kron(plate.jones(), np.eye(N_MODES))
    return op @ state @ op.conj().T


def apply_crystal(state: np.ndarray, crystal: CrystalSpec) -> np.ndarray:
    """Delay one polarization by a time bin on a 6x6 joint density matrix."""
    if _last_bin_weight(crystal, np.diag(state)) > _OVERFLOW_TOL:
        raise ModeOverflowError("crystal would push amplitude beyond the last time bin")
    op = _crystal_operator(crystal)
    return op @ state @ op.conj().T


Element = Union[WavePlate, CrystalSpec, np.ndarray]


def train_isometry(train: Sequence[Element]) -> np.ndarray:
    """6x2 isometry mapping a polarization input in bin ``t0`` through ``train``.

    Elements are applied left to right.  A raw 2x2 array is treated as a
    general mode-diagonal Jones element.
    """
    iso = np.kron(np.eye(2, dtype=complex), np.eye(N_MODES, 1, dtype=complex))
    for element in train:
        if isinstance(element, CrystalSpec):
            if _last_bin_weight(element, iso) > _OVERFLOW_TOL:
                raise ModeOverflowError("optical train needs more than three time bins")
            iso = _crystal_operator(element) @ iso
        else:
            jones = element.jones() if isinstance(element, WavePlate) else np.asarray(element, dtype=complex)
            iso = np.kron(jones, np.eye(N_MODES)) @ iso
    return iso


def kraus_from_train(train: Sequence[Element]) -> list[np.ndarray]:
    """Kraus operators ``<t_k| U |t_0>`` of a train, dropping all-zero blocks."""
    iso = train_isometry(train).reshape(2, N_MODES, 2)
    ops = [iso[:, k, :] for k in range(N_MODES)]
    return [k for k in ops if np.abs(k).max() > 1e-15]


def scheme_train(scheme: ChannelScheme) -> list[Element]:
    """Optical elements of a scheme in propagation order, phases calibrated for identity at zero."""
    a = scheme.control_angle
    if scheme.tag == SCHEME_I:
        # Both plates carry +theta/2 in this matrix convention, which makes
        # H(a) C H(a) = R(2a) C R(-2a): the first crystal rotated by theta.
        return [
            WavePlate("half", a / 2),
            CrystalSpec("v", birefringent_phase=0.0),
            WavePlate("half", a / 2),
            CrystalSpec("h", birefringent_phase=0.0),
        ]
    return [
        CrystalSpec("v", birefringent_phase=-np.pi / 2),  # cancels the i of QWP(0) on v
        WavePlate("quarter", a),
        CrystalSpec("h", birefringent_phase=0.0),
    ]


def channel_kraus(scheme: ChannelScheme) -> list[np.ndarray]:
    """Kraus set (at most three operators) of Scheme I or Scheme II."""
    return kraus_from_train(scheme_train(scheme))
