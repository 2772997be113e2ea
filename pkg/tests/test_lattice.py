import math

import numpy as np
import pytest

from cslab.lattice import (
    AmbiguousDisplacementError,
    B_SPACING,
    LatticeError,
    Site,
    bond_displacement,
    build_lattice,
    translate,
    translate_index,
    translation_permutation,
)
from cslab.wavefunction import SpinConfiguration


def test_spacing_squares_to_two_pi():
    assert B_SPACING**2 == pytest.approx(2 * math.pi, rel=1e-15)


def test_label_ranges_and_roundtrip():
    spec = build_lattice(6, 4)
    seen = set()
    for i in range(spec.n_sites):
        s = spec.site(i)
        assert -2 <= s.n1 <= 3
        assert 1 <= s.n2 <= 4
        assert spec.index(s) == i
        seen.add((s.n1, s.n2))
    assert len(seen) == 24


def test_rejects_bad_geometry():
    with pytest.raises(LatticeError):
        build_lattice(5, 3)
    with pytest.raises(LatticeError):
        build_lattice(4, 1)


def test_site_coordinates():
    s = Site(2, 3)
    assert s.x == pytest.approx(2 * B_SPACING)
    assert s.y == pytest.approx(3 * B_SPACING)
    assert s.z == pytest.approx(complex(2 * B_SPACING, 3 * B_SPACING))


def test_x_neighbor_displacement_away_from_seam():
    spec = build_lattice(6, 3)
    dx, dy = bond_displacement(spec, Site(0, 1), Site(1, 1), 2 * B_SPACING)
    assert dx == pytest.approx(B_SPACING)
    assert dy == 0


def test_seam_bond_resolves_to_minimal_image():
    spec = build_lattice(6, 3)
    # From n1 = N1/2 to n1 = -N1/2+1 the short way crosses the seam.
    dx, dy = bond_displacement(spec, Site(3, 1), Site(-2, 1), 2 * B_SPACING)
    assert dx == pytest.approx(B_SPACING)
    assert dy == 0


def test_half_period_tie_is_ambiguous():
    spec = build_lattice(4, 3)
    with pytest.raises(AmbiguousDisplacementError):
        bond_displacement(spec, Site(-1, 1), Site(1, 1), 2 * B_SPACING)


def test_out_of_bound_displacement_rejected():
    spec = build_lattice(8, 3)
    with pytest.raises(ValueError):
        bond_displacement(spec, Site(-3, 1), Site(0, 1), 2 * B_SPACING)


def test_translation_is_permutation():
    spec = build_lattice(6, 4)
    for direction in ("x", "y"):
        perm = translation_permutation(spec, direction)
        assert sorted(perm) == list(range(spec.n_sites))


def test_translation_order():
    spec = build_lattice(6, 4)
    i = spec.index(Site(1, 2))
    j = i
    for _ in range(spec.N1):
        j = translate_index(spec, j, "x")
    assert j == i
    j = i
    for _ in range(spec.N2):
        j = translate_index(spec, j, "y")
    assert j == i


def test_translate_configuration():
    spec = build_lattice(4, 2)
    cfg = SpinConfiguration((0, 1, 2, 3))  # bottom row up
    moved = translate(spec, cfg, "y")
    assert moved.up_sites == (4, 5, 6, 7)
    back = translate(spec, moved, "y")
    assert back == cfg
