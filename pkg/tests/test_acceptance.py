"""Acceptance suite: one check per numbered criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.
"""

import time

import numpy as np
import pytest

from polqpt.cli import main
from polqpt.measurement import canonical_six_set, simulate_counts
from polqpt.optics import SCHEME_I, SCHEME_II, ChannelScheme, channel_kraus
from polqpt.process import (
    apply_chi,
    apply_kraus,
    chi_eigenvalues,
    ellipsoid_radii,
    identity_chi,
    kraus_to_chi,
    process_fidelity,
)
from polqpt.qstate import MUB_STOKES, canonical_density, density_to_stokes, degree_of_polarization, stokes_to_density
from polqpt.tomography import chi_ml_physical, qpt_linear_full, qpt_linear_unital, reconstruct_process, theory_chi

MAGIC1 = np.arctan(1 / np.sqrt(2))
MAGIC2 = np.arctan(np.sqrt(2))
SWEEP = np.radians(np.linspace(0, 90, 37))

RESULTS: list[str] = []


def report(criterion, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail} ({elapsed:.2f} s, limit {limit:g} s)"
    RESULTS.append(line)
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def stokes_of(label):
    return tuple(density_to_stokes(canonical_density(label)))


def test_criterion_01_identity_calibration():
    with Timer() as t:
        fids = [process_fidelity(theory_chi(ChannelScheme(tag, 0.0)), identity_chi()) for tag in (SCHEME_I, SCHEME_II)]
    report(1, min(fids) >= 1 - 1e-9, f"min fidelity to identity {min(fids):.15f}", t.elapsed, 1)


def test_criterion_02_isotropic_point():
    with Timer() as t:
        chi = theory_chi(ChannelScheme(SCHEME_I, MAGIC2))
        radii_err = np.abs(ellipsoid_radii(chi) - 1 / 3).max()
        eig_err = np.abs(chi_eigenvalues(chi) - [1 / 3, 1 / 3, 1 / 3, 0]).max()
    report(2, radii_err <= 1e-9 and eig_err <= 1e-9, f"radius error {radii_err:.1e}, eigenvalue error {eig_err:.1e}", t.elapsed, 1)


def test_criterion_03_anisotropic_points():
    with Timer() as t:
        r1 = ellipsoid_radii(theory_chi(ChannelScheme(SCHEME_I, MAGIC1)))
        r2 = ellipsoid_radii(theory_chi(ChannelScheme(SCHEME_I, np.radians(67.5))))
        err1 = np.abs(r1 - [2 / 3, 2 / 3, 1 / 3]).max()
        err2 = np.abs(r2 - [0.70, 0.15, 0.15]).max()
    report(3, err1 <= 1e-6 and err2 <= 0.02, f"35.26 deg error {err1:.1e}, 67.5 deg radii {np.round(r2, 4)}", t.elapsed, 1)


def test_criterion_04_disk_processes():
    with Timer() as t:
        a = theory_chi(ChannelScheme(SCHEME_I, np.pi / 4))
        b = theory_chi(ChannelScheme(SCHEME_II, np.pi / 4))
        target = np.array([0.5, 0.25, 0.25, 0])
        eig_err = max(np.abs(chi_eigenvalues(a) - target).max(), np.abs(chi_eigenvalues(b) - target).max())
        diff = np.abs(a - b).max()
    report(4, eig_err <= 1e-9 and diff > 0.05, f"eigenvalue error {eig_err:.1e}, max chi entry difference {diff:.3f}", t.elapsed, 1)


def test_criterion_05_eigenvalue_structure():
    # Literal form: sorted spectrum, smallest <= 1e-9 and the middle two equal.
    with Timer() as t:
        smallest, middle, bad = 0.0, 0.0, []
        for tag in (SCHEME_I, SCHEME_II):
            for theta in SWEEP:
                eig = chi_eigenvalues(theory_chi(ChannelScheme(tag, theta)))
                smallest = max(smallest, abs(eig[3]))
                gap = abs(eig[1] - eig[2])
                middle = max(middle, gap)
                if gap > 1e-9:
                    bad.append(f"{tag}@{np.degrees(theta):g}")
    detail = f"max |smallest| {smallest:.1e}, max middle-pair gap {middle:.3f}, {len(bad)} violating points"
    report(5, smallest <= 1e-9 and middle <= 1e-9, detail, t.elapsed, 5)


def test_criterion_05_supplement_two_of_three_equal():
    # Reading that allows the doubled eigenvalue to sit above the single one.
    with Timer() as t:
        worst = 0.0
        for tag in (SCHEME_I, SCHEME_II):
            for theta in SWEEP:
                eig = chi_eigenvalues(theory_chi(ChannelScheme(tag, theta)))
                top = eig[:3]
                worst = max(worst, min(abs(top[0] - top[1]), abs(top[1] - top[2])), abs(eig[3]))
    report("5 (two of top three equal)", worst <= 1e-9, f"worst residual {worst:.1e}", t.elapsed, 5)


def test_criterion_06_unitality():
    rng = np.random.default_rng(6)
    with Timer() as t:
        worst = 0.0
        for tag in (SCHEME_I, SCHEME_II):
            for theta in rng.uniform(0, np.pi, 50):
                out = apply_chi(theory_chi(ChannelScheme(tag, theta)), np.eye(2) / 2)
                worst = max(worst, np.abs(out - np.eye(2) / 2).max())
    report(6, worst <= 1e-9, f"max |E(I/2) - I/2| {worst:.1e}", t.elapsed, 5)


def _mub_degrees():
    table = {}
    for label, s in MUB_STOKES.items():
        rho = stokes_to_density(s)
        table[label] = [
            degree_of_polarization(density_to_stokes(apply_chi(theory_chi(ChannelScheme(SCHEME_II, np.radians(d))), rho)))
            for d in (0, 15, 30, 45, 60, 75, 90)
        ]
    return np.array([table[k] for k in sorted(table)])


def test_criterion_07_mub_invariance():
    # Literal form: each input's output degree is constant across the angle grid.
    with Timer() as t:
        d = _mub_degrees()
        spread = (d.max(axis=1) - d.min(axis=1)).max()
    report(7, spread < 1e-9, f"max spread across angles {spread:.3f}; degrees {np.round(d[0], 3)}", t.elapsed, 2)


def test_criterion_07_supplement_equal_across_inputs():
    # Reading where the three inputs share one degree at every angle.
    with Timer() as t:
        d = _mub_degrees()
        spread = (d.max(axis=0) - d.min(axis=0)).max()
    report("7 (equal across inputs)", spread < 1e-9, f"max spread across inputs {spread:.1e}", t.elapsed, 2)


def test_criterion_08_reconstruction_fidelity():
    cases = [(ChannelScheme(SCHEME_I, np.radians(d)), ["h", "p", "r"]) for d in (35.26, 45, 54.74, 67.5)]
    cases.append((ChannelScheme(SCHEME_II, np.pi / 4), ["a", "b", "c"]))
    with Timer() as t:
        fids = [
            process_fidelity(reconstruct_process(scheme, inputs, 25000, seed), theory_chi(scheme))
            for scheme, inputs in cases
            for seed in range(20)
        ]
    ok = min(fids) >= 0.97 and np.mean(fids) >= 0.995
    report(8, ok, f"{len(fids)} runs, min {min(fids):.4f}, mean {np.mean(fids):.4f}", t.elapsed, 120)


def test_criterion_09_ml_exposure_robustness():
    scheme = ChannelScheme(SCHEME_I, np.pi / 4)
    chi = theory_chi(scheme)
    with Timer() as t:
        data = []
        for k, label in enumerate("hpr"):
            s = stokes_of(label)
            data.append((s, simulate_counts(apply_chi(chi, stokes_to_density(s)), canonical_six_set(), 25000, 900 + k)))
        linear = qpt_linear_unital(data)
        out = [chi_ml_physical(linear, n) for n in (25, 25000, 2.5e7)]
        fids = [process_fidelity(out[i], out[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    report(9, min(fids) >= 0.99, f"pairwise fidelities {np.round(fids, 8)}", t.elapsed, 60)


def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(10)
    full_inputs = [stokes_of(x) for x in "hvpr"]
    unital_inputs = [stokes_of(x) for x in "hpr"]
    with Timer() as t:
        worst = 0.0
        for _ in range(100):
            scheme = ChannelScheme(SCHEME_I if rng.uniform() < 0.5 else SCHEME_II, rng.uniform(0, np.pi))
            kraus = channel_kraus(scheme)
            truth = kraus_to_chi(kraus)

            def pairs(inputs):
                return [(s, apply_kraus(kraus, stokes_to_density(s))) for s in inputs]

            worst = max(
                worst,
                np.abs(qpt_linear_full(pairs(full_inputs)) - truth).max(),
                np.abs(qpt_linear_unital(pairs(unital_inputs)) - truth).max(),
            )
    report(10, worst <= 1e-8, f"max entry deviation {worst:.1e}", t.elapsed, 30)


@pytest.fixture
def quiet(capsys):
    yield
    capsys.readouterr()


def test_criterion_11_determinism(tmp_path, quiet):
    commands = [
        ["tomography", "--angle", "45", "--seed", "7", "--mode", "full4"],
        ["tomography", "--angle", "30", "--seed", "7", "--format", "csv"],
        ["sweep", "--sweep", "0:90:15", "--mode", "unital3", "--seed", "7"],
        ["ellipsoid", "--angle", "60", "--mode", "unital3", "--seed", "7", "--grid", "6x12"],
    ]
    with Timer() as t:
        identical = []
        for k, argv in enumerate(commands):
            a, b = tmp_path / f"{k}a", tmp_path / f"{k}b"
            codes = (main(argv + ["--out", str(a)]), main(argv + ["--out", str(b)]))
            identical.append(codes == (0, 0) and a.read_bytes() == b.read_bytes())
    report(11, all(identical), f"{sum(identical)}/{len(identical)} commands byte-identical", t.elapsed, 10)
