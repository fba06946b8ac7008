"""Projective polarization measurements and Poisson count simulation.

Counts are drawn with numpy's ``PCG64`` bit generator seeded explicitly; there
is no module-level RNG.  Sweeps derive per-task generators from
``SeedSequence(seed, spawn_key=(index,))`` so results do not depend on
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qstate import canonical_density

DEFAULT_EXPOSURE = 25_000.0
SIX_LABELS = ("h", "v", "p", "m", "r", "l")
BASIS_PAIRS = (("h", "v"), ("p", "m"), ("r", "l"))
SIXTEEN_SINGLE = ("h", "v", "p", "r")


@dataclass(frozen=True)
class Projector:
    label: str
    operator: np.ndarray


@dataclass(frozen=True)
class CountRecord:
    """Counts observed behind one projector.

    ``exposure`` is the expected number of counts for probability one, i.e.
    the same scale for every projector setting.
    """

    label: str
    counts: int
    exposure: float = DEFAULT_EXPOSURE

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError("counts must be non-negative")
        if not self.exposure > 0:
            raise ValueError("exposure must be positive")


def rng_for(seed: int, index: int | None = None) -> np.random.Generator:
    """Generator for ``seed``, or for task ``index`` of a run seeded with ``seed``."""
    if index is None:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def child_seed(seed: int, index: int) -> int:
    """Deterministic integer seed for the ``index``-th task of a run."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def canonical_six_set() -> list[Projector]:
    return [Projector(label, canonical_density(label)) for label in SIX_LABELS]


def canonical_sixteen_set() -> list[Projector]:
    """Products ``P_a (x) P_b`` for ``a, b`` in ``h, v, p, r`` (first index slowest)."""
    return [
        Projector(a + b, np.kron(canonical_density(a), canonical_density(b)))
        for a in SIXTEEN_SINGLE
        for b in SIXTEEN_SINGLE
    ]


def gram_matrix(projectors: Sequence[Projector]) -> np.ndarray:
    ops = np.array([p.operator for p in projectors])
    return np.einsum("iab,jba->ij", ops, ops).real


def projection_probability(rho, projector: Projector) -> float:
    return float(np.real(np.trace(projector.operator @ np.asarray(rho, dtype=complex))))


def probabilities(rho, projectors: Sequence[Projector]) -> np.ndarray:
    ops = np.array([p.operator for p in projectors])
    return np.einsum("iab,ba->i", ops, np.asarray(rho, dtype=complex)).real


def simulate_counts(
    rho,
    projectors: Sequence[Projector],
    exposure: float = DEFAULT_EXPOSURE,
    seed: int | np.random.Generator = 0,
) -> list[CountRecord]:
    """Independent Poisson counts with mean ``exposure * tr(P rho)`` per projector."""
    if not exposure > 0:
        raise ValueError("exposure must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed)
    means = exposure * np.clip(probabilities(rho, projectors), 0, None)
    counts = rng.poisson(means)
    return [CountRecord(p.label, int(n), exposure) for p, n in zip(projectors, counts)]


def counts_by_label(records: Sequence[CountRecord]) -> dict[str, CountRecord]:
    return {r.label: r for r in records}
