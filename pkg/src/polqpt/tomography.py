"""State and process tomography.

State estimates come from six-projector counts, either by direct linear
inversion or by a maximum-likelihood search over the Cholesky-type
parametrization ``rho = T^dag T / tr(T^dag T)`` (``T`` upper triangular with a
real diagonal).  The likelihood is the Gaussian approximation to the Poisson
count statistics::

    L(T) = sum_i (N_i p_i(T) - n_i)^2 / (2 N_i p_i(T))

Process matrices are reconstructed linearly from input/output Stokes pairs
(three inputs under a unitality assumption, four in general) and then made
physical by treating the Choi matrix as a two-qubit state: its probabilities
against sixteen product projectors become artificial counts for the same ML
search in dimension four.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DegenerateDataError, IllConditionedInputsError
from .measurement import (
    BASIS_PAIRS,
    DEFAULT_EXPOSURE,
    SIX_LABELS,
    CountRecord,
    Projector,
    canonical_six_set,
    canonical_sixteen_set,
    counts_by_label,
    probabilities,
    rng_for,
    simulate_counts,
)
from .optics import ChannelScheme, channel_kraus
from .process import (
    apply_chi,
    chi_to_choi,
    choi_to_chi,
    kraus_to_chi,
    normalize_process,
    ptm_to_chi,
)
from .qstate import StokesVector, density_to_stokes, parse_state, stokes_to_density, stokes_to_matrix

CONDITION_LIMIT = 1e8
UNITAL3 = "unital3"
FULL4 = "full4"


@dataclass(frozen=True)
class MLSettings:
    max_iterations: int = 5000
    convergence_tol: float = 1e-10
    probability_floor: float = 1e-12

    def __post_init__(self):
        if self.max_iterations <= 0 or self.convergence_tol <= 0 or self.probability_floor <= 0:
            raise ValueError("ML settings must all be positive")


STATE_SETTINGS = MLSettings(max_iterations=5000)
PROCESS_SETTINGS = MLSettings(max_iterations=20000)


@dataclass
class MLResult:
    rho: np.ndarray
    likelihood: float
    n_iterations: int
    history: list[float] = field(default_factory=list)


# --- Cholesky parametrization ------------------------------------------------------------


def params_to_factor(x: np.ndarray, dim: int) -> np.ndarray:
    """Upper-triangular ``T`` from ``dim**2`` reals: diagonal first, then (re, im) pairs."""
    t = np.zeros((dim, dim), dtype=complex)
    t[np.diag_indices(dim)] = x[:dim]
    iu = np.triu_indices(dim, k=1)
    off = x[dim:].reshape(-1, 2)
    t[iu] = off[:, 0] + 1j * off[:, 1]
    return t


def factor_to_params(t: np.ndarray) -> np.ndarray:
    dim = t.shape[0]
    iu = np.triu_indices(dim, k=1)
    off = np.stack([t[iu].real, t[iu].imag], axis=1).reshape(-1)
    return np.concatenate([np.diag(t).real, off])


def params_to_density(x: np.ndarray, dim: int) -> np.ndarray:
    t = params_to_factor(x, dim)
    a = t.conj().T @ t
    return a / np.trace(a).real


def density_to_params(rho, floor: float = 1e-12) -> np.ndarray:
    """Parameters of the nearest valid state: negative eigenvalues clipped to ``floor``."""
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, floor, None)
    w /= w.sum()
    clipped = (v * w) @ v.conj().T
    lower = np.linalg.cholesky((clipped + clipped.conj().T) / 2)
    return factor_to_params(lower.conj().T)


# --- likelihood --------------------------------------------------------------------------


def neg_log_likelihood(x, dim, operators, counts, exposures, floor=1e-12, gradient=False):
    """Gaussian-approximation negative log-likelihood (and its gradient in ``x``)."""
    t = params_to_factor(x, dim)
    a = t.conj().T @ t
    tr = np.trace(a).real
    p_raw = np.einsum("iab,ba->i", operators, a).real / tr
    p = np.maximum(p_raw, floor)
    value = float(np.sum((exposures * p - counts) ** 2 / (2 * exposures * p)))
    if not gradient:
        return value
    dl_dp = np.where(p_raw > floor, exposures / 2 - counts**2 / (2 * exposures * p**2), 0.0)
    w = (np.einsum("i,iab->ab", dl_dp, operators) - np.sum(dl_dp * p_raw) * np.eye(dim)) / tr
    g = w @ t.conj().T  # dL = 2 Re tr(G dT)
    grad_t = g.T
    iu = np.triu_indices(dim, k=1)
    grad = np.concatenate([
        2 * np.diag(grad_t).real,
        np.stack([2 * grad_t[iu].real, -2 * grad_t[iu].imag], axis=1).reshape(-1),
    ])
    return value, grad


def ml_search(
    operators,
    counts,
    exposures,
    initial,
    settings: MLSettings = STATE_SETTINGS,
) -> MLResult:
    """Minimize the likelihood over valid density matrices, starting near ``initial``.

    ``operators`` are the measured projectors (``k x d x d``); ``counts`` may be
    real-valued (artificial counts).  ``history`` holds the likelihood after
    every accepted optimizer step.
    """
    operators = np.asarray(operators, dtype=complex)
    counts = np.asarray(counts, dtype=float)
    exposures = np.broadcast_to(np.asarray(exposures, dtype=float), counts.shape)
    dim = operators.shape[1]
    # The objective scales linearly with exposure; divide it out so tolerances are scale-free.
    scale = float(np.mean(exposures))
    floor = settings.probability_floor

    def objective(x):
        value, grad = neg_log_likelihood(x, dim, operators, counts, exposures, floor, gradient=True)
        return value / scale, grad / scale

    x0 = density_to_params(initial, floor)
    history = [objective(x0)[0] * scale]

    def record(xk):
        history.append(neg_log_likelihood(xk, dim, operators, counts, exposures, floor))

    res = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={
            "maxiter": settings.max_iterations,
            "ftol": settings.convergence_tol,
            "gtol": 1e-14,
            "maxcor": 20,
        },
    )
    rho = params_to_density(res.x, dim)
    value = neg_log_likelihood(res.x, dim, operators, counts, exposures, floor)
    if res.nit >= settings.max_iterations and not res.success:
        raise ConvergenceError(
            f"ML search did not converge in {settings.max_iterations} iterations",
            best=rho,
            n_iterations=res.nit,
        )
    return MLResult(rho=rho, likelihood=value, n_iterations=int(res.nit), history=history)


# --- state tomography --------------------------------------------------------------------


def _six_counts(records: Sequence[CountRecord]) -> tuple[np.ndarray, np.ndarray]:
    by_label = counts_by_label(records)
    missing = [lab for lab in SIX_LABELS if lab not in by_label]
    if missing:
        raise DegenerateDataError(f"missing counts for projectors {missing}")
    counts = np.array([by_label[lab].counts for lab in SIX_LABELS], dtype=float)
    exposures = np.array([by_label[lab].exposure for lab in SIX_LABELS], dtype=float)
    return counts, exposures


def qst_linear(records: Sequence[CountRecord]) -> tuple[StokesVector, np.ndarray]:
    """Per-axis count ratios; the returned matrix may fail to be positive."""
    by_label = counts_by_label(records)
    _six_counts(records)
    s = []
    for plus, minus in BASIS_PAIRS:
        n_plus, n_minus = by_label[plus].counts, by_label[minus].counts
        total = n_plus + n_minus
        if total <= 0:
            raise DegenerateDataError(f"no counts in the {plus}/{minus} basis")
        s.append((n_plus - n_minus) / total)
    stokes = StokesVector(*s)
    return stokes, stokes_to_matrix(stokes)


def qst_ml_result(records: Sequence[CountRecord], settings: MLSettings = STATE_SETTINGS) -> MLResult:
    _, linear = qst_linear(records)
    counts, exposures = _six_counts(records)
    ops = np.array([p.operator for p in canonical_six_set()])
    return ml_search(ops, counts, exposures, linear, settings)


def qst_ml(records: Sequence[CountRecord], settings: MLSettings = STATE_SETTINGS) -> np.ndarray:
    """Maximum-likelihood density matrix from six-projector counts."""
    return qst_ml_result(records, settings).rho


# --- process tomography ------------------------------------------------------------------

Output = Union[Sequence[CountRecord], StokesVector, np.ndarray]
#: ``(input state, output data)`` pairs; output is counts, a Stokes vector or a 2x2 matrix.
TomographyInput = Sequence[tuple[object, Output]]


def output_stokes(output: Output, qst: str = "ml", settings: MLSettings = STATE_SETTINGS) -> np.ndarray:
    if isinstance(output, np.ndarray) and output.shape == (2, 2):
        return np.array(density_to_stokes(output))
    if len(output) and isinstance(output[0], CountRecord):
        if qst == "ml":
            return np.array(density_to_stokes(qst_ml(output, settings)))
        if qst == "linear":
            return np.array(qst_linear(output)[0])
        raise ValueError(f"unknown QST method {qst!r}")
    return np.array(parse_state(output))


def _pairs(data: TomographyInput, qst: str, settings: MLSettings) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.array([parse_state(s) for s, _ in data], dtype=float)
    outputs = np.array([output_stokes(out, qst, settings) for _, out in data], dtype=float)
    return inputs, outputs


def _affine_ptm(linear: np.ndarray, translation: np.ndarray) -> np.ndarray:
    r = np.zeros((4, 4))
    r[0, 0] = 1
    r[1:, 0] = translation
    r[1:, 1:] = linear
    return r


def qpt_linear_full(data: TomographyInput, qst: str = "ml", settings: MLSettings = STATE_SETTINGS) -> np.ndarray:
    """Linear chi from four inputs that do not lie on one plane of the Poincare sphere."""
    if len(data) != 4:
        raise ValueError(f"full process tomography needs 4 input states, got {len(data)}")
    inputs, outputs = _pairs(data, qst, settings)
    a = np.hstack([inputs, np.ones((4, 1))])
    if np.linalg.cond(a) > CONDITION_LIMIT:
        raise IllConditionedInputsError("input states are coplanar on the Poincare sphere")
    x = np.linalg.solve(a, outputs)  # rows: M^T then t
    return ptm_to_chi(_affine_ptm(x[:3].T, x[3]))


def qpt_linear_unital(data: TomographyInput, qst: str = "ml", settings: MLSettings = STATE_SETTINGS) -> np.ndarray:
    """Linear chi from three linearly independent inputs, assuming ``E(I) = I``."""
    if len(data) != 3:
        raise ValueError(f"unital process tomography needs 3 input states, got {len(data)}")
    inputs, outputs = _pairs(data, qst, settings)
    if np.linalg.cond(inputs) > CONDITION_LIMIT:
        raise IllConditionedInputsError("input Stokes vectors are linearly dependent")
    linear = np.linalg.solve(inputs, outputs).T
    return ptm_to_chi(_affine_ptm(linear, np.zeros(3)))


def chi_ml_physical(
    chi_linear,
    exposure: float = DEFAULT_EXPOSURE,
    settings: MLSettings = PROCESS_SETTINGS,
) -> np.ndarray:
    """Closest physical chi found by an ML state search on the Choi matrix.

    The (possibly non-positive) linear chi is read as a two-qubit state; its
    probabilities against the sixteen product projectors, floored at zero and
    scaled by ``exposure``, serve as counts for the four-dimensional search.
    """
    if not exposure > 0:
        raise ValueError("exposure must be positive")
    choi = chi_to_choi(normalize_process(chi_linear))
    sixteen = canonical_sixteen_set()
    ops = np.array([p.operator for p in sixteen])
    artificial = exposure * np.clip(probabilities(choi, sixteen), 0, None)
    try:
        result = ml_search(ops, artificial, exposure, choi, settings)
    except ConvergenceError as err:
        if err.best is not None:
            err.best = normalize_process(choi_to_chi(err.best))
        raise
    return normalize_process(choi_to_chi(result.rho))


# --- end-to-end simulation ---------------------------------------------------------------


def theory_chi(scheme: ChannelScheme) -> np.ndarray:
    return kraus_to_chi(channel_kraus(scheme))


def simulate_process_data(
    scheme: ChannelScheme,
    inputs: Sequence,
    exposure: float = DEFAULT_EXPOSURE,
    seed: int = 0,
    projectors: Sequence[Projector] | None = None,
) -> list[tuple[StokesVector, list[CountRecord]]]:
    """Counts for each input state sent through ``scheme``; input ``k`` uses child stream ``k``."""
    chi = theory_chi(scheme)
    projectors = canonical_six_set() if projectors is None else projectors
    data = []
    for k, s in enumerate(inputs):
        s_in = parse_state(s)
        rho_out = apply_chi(chi, stokes_to_density(s_in))
        data.append((s_in, simulate_counts(rho_out, projectors, exposure, rng_for(seed, k))))
    return data


@dataclass
class Reconstruction:
    chi: np.ndarray
    chi_linear: np.ndarray
    output_stokes: list[StokesVector]


def reconstruct_process_full(
    scheme: ChannelScheme,
    inputs: Sequence,
    exposure: float = DEFAULT_EXPOSURE,
    seed: int = 0,
    mode: str = UNITAL3,
    settings: MLSettings = STATE_SETTINGS,
    process_settings: MLSettings | None = None,
    qst: str = "ml",
) -> Reconstruction:
    expected = {UNITAL3: 3, FULL4: 4}
    if mode not in expected:
        raise ValueError(f"mode must be {UNITAL3!r} or {FULL4!r}, got {mode!r}")
    if len(inputs) != expected[mode]:
        raise ValueError(f"mode {mode} needs {expected[mode]} inputs, got {len(inputs)}")
    data = simulate_process_data(scheme, inputs, exposure, seed)
    stokes_pairs = [(s, output_stokes(counts, qst, settings)) for s, counts in data]
    solver = qpt_linear_unital if mode == UNITAL3 else qpt_linear_full
    chi_lin = solver(stokes_pairs)
    if process_settings is None:
        process_settings = replace(PROCESS_SETTINGS, probability_floor=settings.probability_floor)
    chi = chi_ml_physical(chi_lin, exposure, process_settings)
    return Reconstruction(chi, chi_lin, [StokesVector(*out) for _, out in stokes_pairs])


def reconstruct_process(
    scheme: ChannelScheme,
    inputs: Sequence,
    exposure: float = DEFAULT_EXPOSURE,
    seed: int = 0,
    mode: str = UNITAL3,
    settings: MLSettings = STATE_SETTINGS,
    qst: str = "ml",
) -> np.ndarray:
    """Simulated experiment: counts, per-input QST, linear QPT, ML physicalization."""
    return reconstruct_process_full(scheme, inputs, exposure, seed, mode, settings, qst=qst).chi
