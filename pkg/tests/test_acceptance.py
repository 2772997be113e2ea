"""End-to-end acceptance checks, one test per headline property.

These are slower than the unit tests (a few minutes total): they enumerate
every lattice the exact engine can reach, run the full VMC correlator table,
and scan the large valence-bond lattices.
"""

import functools
import itertools
import math

import numpy as np
import pytest

from cslab.exact import (
    build_state,
    overlap,
    singlet_defect,
    total_spin,
    translation_overlap,
    ulsm_expectation_exact,
    zz_correlator,
)
from cslab.lattice import B_SPACING, Site, build_lattice
from cslab.qec import (
    code_from_states,
    kl_check,
    nn_bonds,
    singlet_reduction_check,
)
from cslab.theta import log_theta1
from cslab.valence_bond import (
    covering_from_pairs,
    enumerate_coverings,
    gap_parity_string,
    parity_class_census,
    seam_count,
    seam_parity,
    ulsm_vb_expectation,
)
from cslab.vmc import (
    VmcSchedule,
    origin_bond_sites,
    run_vmc,
    table1_report,
    ulsm_limit,
    ulsm_scan,
)
from cslab.wavefunction import (
    lattice_sign_identity_residual,
    make_wavefunction,
    sum_rule_residual,
)

ENUMERABLE = [(4, 2), (6, 2), (4, 3), (4, 4), (6, 3), (4, 5), (8, 3), (6, 4), (4, 6)]

SCHEDULE = VmcSchedule(
    n_chains=4, sweeps_warmup=2000, sweeps_measure=40000, block_size=100, seed=20240613
)


@functools.lru_cache(maxsize=None)
def state(N1, N2, n):
    return build_state(make_wavefunction(N1, N2, n))


def test_criterion1_singlet_exactness():
    for N1, N2 in ENUMERABLE:
        for n in (0, 1):
            sv = state(N1, N2, n)
            assert singlet_defect(sv) <= 1e-8, (N1, N2, n)
            assert total_spin(sv) <= 1e-8, (N1, N2, n)


def test_criterion2_translation_structure():
    for N1, N2 in [(4, 3), (6, 3), (8, 3)]:
        s0, s1 = state(N1, N2, 0), state(N1, N2, 1)
        assert abs(abs(translation_overlap(s1, s0, "x")) - 1) <= 1e-8
        assert abs(abs(translation_overlap(s0, s1, "x")) - 1) <= 1e-8
    for N1, N2 in [(4, 4), (6, 4)]:
        for n in (0, 1):
            sv = state(N1, N2, n)
            assert abs(abs(translation_overlap(sv, sv, "x")) - 1) <= 1e-8
    for N1, N2 in [(4, 3), (6, 3), (8, 3), (4, 4), (6, 4)]:
        for n in (0, 1):
            sv = state(N1, N2, n)
            assert abs(abs(translation_overlap(sv, sv, "y")) - 1) <= 1e-8


def test_criterion3_table1_reproduction():
    rows = table1_report(SCHEDULE)
    pulls = np.array([row["pull"] for row in rows])
    assert len(pulls) == 96
    assert (pulls <= 3.0).mean() >= 0.95
    assert pulls.max() <= 4.0


def test_criterion4_exact_vmc_cross_validation():
    for N1, N2 in ENUMERABLE:
        for n in (0, 1):
            spec = make_wavefunction(N1, N2, n)
            sv = state(N1, N2, n)
            i0, ix, iy = origin_bond_sites(spec.lattice)
            ests = run_vmc(spec, SCHEDULE, [("zz", i0, ix), ("zz", i0, iy), ("ulsm",)])
            for key, exact in (
                (("zz", i0, ix), zz_correlator(sv, i0, ix)),
                (("zz", i0, iy), zz_correlator(sv, i0, iy)),
            ):
                est = ests[key]
                assert abs(est.mean.real - exact) <= 3 * est.stderr, (N1, N2, n, key)
            est = ests[("ulsm",)]
            exact = ulsm_expectation_exact(sv)
            assert abs(est.mean.real - exact.real) <= 3 * est.stderr, (N1, N2, n)
            assert abs(est.mean.imag - exact.imag) <= 3 * max(est.stderr_im, 1e-12)


def test_criterion5_twist_expectation_trend():
    for sector in (0, 1):
        limit = ulsm_limit(3, sector)
        rows = ulsm_scan(3, [4, 8, 12, 16], sector, SCHEDULE)
        gaps = [abs(row["re"] - limit) for row in rows]
        assert all(b < a for a, b in zip(gaps, gaps[1:])), (sector, gaps)
        assert gaps[-1] <= 0.25
    # Even-row branch: signs flip relative to the odd-row branch.
    for sector in (0, 1):
        limit = ulsm_limit(4, sector)
        rows = ulsm_scan(4, [4, 8, 12, 16], sector, SCHEDULE)
        gaps = [abs(row["re"] - limit) for row in rows]
        assert all(b < a for a, b in zip(gaps, gaps[1:])), (sector, gaps)
        assert math.copysign(1.0, rows[-1]["re"]) == limit


def test_criterion6_valence_bond_topology():
    # Odd-row lattices: only the two alternating gap-parity classes appear.
    for N1, N2 in [(6, 3), (8, 3)]:
        census = parity_class_census(build_lattice(N1, N2))
        expected = {
            "".join("oe"[g % 2] for g in range(N1)),
            "".join("oe"[(g + 1) % 2] for g in range(N1)),
        }
        assert set(census) == expected, (N1, N2, census)
    # Even-row lattices: only the two uniform classes.
    for N1, N2 in [(6, 4), (8, 4)]:
        census = parity_class_census(build_lattice(N1, N2))
        assert set(census) == {"o" * N1, "e" * N1}, (N1, N2, census)

    # Reference dimerization layouts with known seam-crossing numbers.
    spec3 = build_lattice(6, 3)
    verticals3 = [((n1, 1), (n1, 2)) for n1 in range(-2, 4)]
    two = covering_from_pairs(
        spec3, verticals3 + [((a, 3), (b, 3)) for a, b in [(2, -2), (3, -1), (0, 1)]]
    )
    one = covering_from_pairs(
        spec3, verticals3 + [((a, 3), (b, 3)) for a, b in [(3, -2), (-1, 0), (1, 2)]]
    )
    assert (seam_count(spec3, two), seam_count(spec3, one)) == (2, 1)
    assert gap_parity_string(spec3, two) == "oeoeoe"
    assert gap_parity_string(spec3, one) == "eoeoeo"

    spec4 = build_lattice(6, 4)
    verticals4 = [((n1, 3), (n1, 4)) for n1 in range(-2, 4)]
    one4 = covering_from_pairs(
        spec4,
        verticals4
        + [((a, 1), (b, 1)) for a, b in [(-1, 0), (1, 2), (3, -2)]]
        + [((a, 2), (b, 2)) for a, b in [(-2, -1), (0, 1), (2, 3)]],
    )
    two4 = covering_from_pairs(
        spec4,
        verticals4
        + [((a, 1), (b, 1)) for a, b in [(2, -2), (3, -1), (0, 1)]]
        + [((a, 2), (b, 2)) for a, b in [(-1, 1), (2, 3), (-2, 0)]],
    )
    assert (seam_count(spec4, one4), seam_count(spec4, two4)) == (1, 2)
    assert gap_parity_string(spec4, one4) == "oooooo"
    assert gap_parity_string(spec4, two4) == "eeeeee"


def test_criterion6_product_formula_checks():
    from test_valence_bond import dense_vb_ulsm

    spec = build_lattice(4, 2)
    for cov in enumerate_coverings(spec):
        ref = dense_vb_ulsm(spec, cov)
        assert ulsm_vb_expectation(spec, cov) == pytest.approx(ref.real, abs=1e-12)
    long_spec = build_lattice(32, 3)
    for cov in itertools.islice(enumerate_coverings(long_spec), 500):
        assert ulsm_vb_expectation(long_spec, cov) * seam_parity(long_spec, cov) > 0


def test_criterion7_weight1_code_analysis():
    code = code_from_states(state(6, 4, 0), state(6, 4, 1))
    report = kl_check(code)
    assert report.max_diag_mismatch > 0.01
    (al, i), (be, j) = report.diag_argmax
    assert (al, be) == ("z", "z")
    assert frozenset((i, j)) in {frozenset(b) for b in nn_bonds(code.lattice)}
    assert report.single_pauli_max <= 1e-10
    for dims in [(4, 2), (4, 3)]:
        small = code_from_states(state(*dims, 0), state(*dims, 1))
        assert singlet_reduction_check(small) <= 1e-10


def test_criterion7_mismatch_decreases_with_height():
    """Known failure: the weight-1 violation is *not* monotone in lattice height.

    The target property asks for a strict decrease of max_diag_mismatch along
    4x2 -> 4x4 -> 4x6.  The first step decreases, but the raw overlap of the
    two sector states on 4xN2 grows with N2 (0.209 -> 0.640 -> 0.899), so the
    orthogonalized second basis state is increasingly contaminated by the
    first and the mismatch turns back up (about 0.11 -> 0.16 from 4x4 to
    4x6).  The bare-state correlator differences do decay (see the companion
    test below); the orthogonalized-code metric does not.
    """
    values = []
    for N2 in (2, 4, 6):
        code = code_from_states(state(4, N2, 0), state(4, N2, 1))
        values.append(kl_check(code).max_diag_mismatch)
    assert values[1] < values[0] and values[2] < values[1], (
        "max_diag_mismatch not strictly decreasing along 4x2 -> 4x4 -> 4x6: "
        f"{values}"
    )


def test_criterion7_raw_state_distinguishability_decays():
    # Sector distinguishability of the unorthogonalized states does shrink
    # with height: both nearest-neighbor correlator gaps drop monotonically.
    gaps_x, gaps_y = [], []
    for N2 in (2, 4, 6):
        s0, s1 = state(4, N2, 0), state(4, N2, 1)
        i0, ix, iy = origin_bond_sites(s0.lattice)
        gaps_x.append(abs(zz_correlator(s0, i0, ix) - zz_correlator(s1, i0, ix)))
        gaps_y.append(abs(zz_correlator(s0, i0, iy) - zz_correlator(s1, i0, iy)))
    assert gaps_x[0] > gaps_x[1] > gaps_x[2]
    assert gaps_y[0] > gaps_y[1] > gaps_y[2]


def test_criterion8_analytic_infrastructure():
    rng = np.random.default_rng(99)
    taus = [0.25j, 0.5j, 1.0j, 2.0j]
    for tau in taus:
        for _ in range(10):
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            t1 = log_theta1(z, tau).to_complex()
            # Oddness.
            assert log_theta1(-z, tau).to_complex() == pytest.approx(-t1, rel=1e-12, abs=1e-12)
            # z -> z + pi.
            assert log_theta1(z + math.pi, tau).to_complex() == pytest.approx(
                -t1, rel=1e-12, abs=1e-12
            )
            # z -> z + pi tau.
            q = np.exp(1j * math.pi * tau)
            shifted = log_theta1(z + math.pi * tau, tau).to_complex()
            assert shifted == pytest.approx(
                -t1 * np.exp(-2j * z) / q, rel=1e-12, abs=1e-12
            )

    for f, degree in ((lambda z: 1.0, 0), (lambda z: z, 1), (lambda z: z * z, 2)):
        near = sum_rule_residual(f, 5 * B_SPACING, degree)
        far = sum_rule_residual(f, 20 * B_SPACING, degree)
        assert far <= near * 1e-6, (degree, near, far)

    for _ in range(200):
        site = Site(int(rng.integers(-25, 26)), int(rng.integers(-25, 26)))
        assert lattice_sign_identity_residual(site) <= 1e-12
