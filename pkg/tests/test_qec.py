import numpy as np
import pytest

from cslab.exact import StateVector, build_state, overlap
from cslab.lattice import Site, build_lattice
from cslab.qec import (
    DegenerateCodeError,
    code_for_lattice,
    code_from_states,
    kl_check,
    nn_bonds,
    pattern_map,
    singlet_reduction_check,
    zz_only_metrics,
)
from cslab.wavefunction import make_wavefunction


def test_code_basis_orthonormal():
    code = code_for_lattice(4, 3)
    z, o = code.zero_L, code.one_L
    assert np.linalg.norm(z.amps) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(o.amps) == pytest.approx(1.0, abs=1e-12)
    assert abs(overlap(z, o)) <= 1e-12
    assert abs(code.raw_overlap) == pytest.approx(0.3734001757, abs=1e-8)


def test_degenerate_code_rejected():
    sv = build_state(make_wavefunction(4, 2, 0))
    with pytest.raises(DegenerateCodeError):
        code_from_states(sv, sv)


def test_mismatched_lattices_rejected():
    with pytest.raises(ValueError):
        code_from_states(
            build_state(make_wavefunction(4, 2, 0)),
            build_state(make_wavefunction(4, 3, 1)),
        )


def test_kl_report_4x2():
    code = code_for_lattice(4, 2)
    rep = kl_check(code)
    # Single-Pauli elements vanish on the singlet manifold.
    assert rep.single_pauli_max <= 1e-10
    # The worst diagonal mismatch is carried by a zz pair.
    (al, _), (be, _) = rep.diag_argmax
    assert (al, be) == ("z", "z")
    assert rep.max_diag_mismatch == pytest.approx(1.2765399563, abs=1e-8)


def test_translation_class_reduction_consistent_even_n2():
    code = code_for_lattice(4, 2)
    fast = kl_check(code, translation_classes=True)
    full = kl_check(code, translation_classes=False)
    assert fast.max_diag_mismatch == pytest.approx(full.max_diag_mismatch, abs=1e-12)
    assert fast.max_offdiag == pytest.approx(full.max_offdiag, abs=1e-12)


def test_singlet_reduction_shortcut():
    for dims in ((4, 2), (4, 3)):
        code = code_for_lattice(*dims)
        assert singlet_reduction_check(code) <= 1e-10


def test_corrupted_state_breaks_reduction():
    sv0 = build_state(make_wavefunction(4, 2, 0))
    sv1 = build_state(make_wavefunction(4, 2, 1))
    rng = np.random.default_rng(5)
    noise = rng.normal(size=sv1.amps.shape) + 1j * rng.normal(size=sv1.amps.shape)
    bad_amps = sv1.amps + 0.2 * noise / np.linalg.norm(noise)
    bad = StateVector(sv1.spec, bad_amps / np.linalg.norm(bad_amps))
    code = code_from_states(sv0, bad)
    assert singlet_reduction_check(code) > 1e-3


def test_hermiticity_of_entries():
    code = code_for_lattice(4, 3)
    rep = kl_check(code)
    # Diagonal expectation values of Hermitian products must be real.
    for label, e00, e11, _ in rep.entries:
        if isinstance(label[0], tuple) and isinstance(label[1], tuple):
            (al, i), (be, j) = label
            if i != j and al == be:
                assert abs(complex(e00).imag) <= 1e-10
                assert abs(complex(e11).imag) <= 1e-10


def test_swap_invariance_odd_n2():
    sv0 = build_state(make_wavefunction(4, 3, 0))
    sv1 = build_state(make_wavefunction(4, 3, 1))
    a = kl_check(code_from_states(sv0, sv1))
    b = kl_check(code_from_states(sv1, sv0))
    assert a.max_diag_mismatch == pytest.approx(b.max_diag_mismatch, abs=1e-10)
    assert a.max_offdiag == pytest.approx(b.max_offdiag, abs=1e-10)


def test_zz_only_metrics_match_report():
    code = code_for_lattice(4, 2)
    rep = kl_check(code, translation_classes=False)
    diag, off = zz_only_metrics(code)
    assert diag == pytest.approx(rep.max_diag_mismatch, abs=1e-10)
    assert off == pytest.approx(rep.max_offdiag, abs=1e-10)


def test_nn_bonds_cover_lattice():
    spec = build_lattice(6, 3)
    bonds = nn_bonds(spec)
    assert len(bonds) == 2 * spec.n_sites
    assert len(set(map(frozenset, bonds))) == 2 * spec.n_sites


def test_pattern_map_row_structure():
    # y translation is a symmetry of |Phi_n|^2, so each bond value repeats
    # down its column of the torus.
    from cslab.lattice import translate_index

    sv = build_state(make_wavefunction(6, 3, 0))
    spec = sv.lattice
    pm = pattern_map(sv)
    for (i, j), val in pm.items():
        i2 = translate_index(spec, i, "y")
        j2 = translate_index(spec, j, "y")
        assert pm[(i2, j2)] == pytest.approx(val, abs=1e-12)
