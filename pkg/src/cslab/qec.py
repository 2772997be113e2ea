"""Approximate quantum-error-correction analysis of the encoded qubit.

The two degenerate states span a candidate code space.  After Gram-Schmidt
orthogonalization of the pair, the weight-1 Knill-Laflamme conditions

  <i_L| A_a^dag A_b |j_L> = c_ab delta_ij

are evaluated exactly for the error basis {identity} union {sigma^alpha_r}.
The violation metrics (worst diagonal mismatch, worst cross element) quantify
how far the finite-lattice pair is from an exact single-error-correcting
code; both must vanish as the correlators of the two states converge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cslab.exact import (
    DEFAULT_BUDGET,
    StateVector,
    _check_same_lattice,
    build_state,
    overlap,
    single_pauli_expectation,
)
from cslab.lattice import LatticeSpec, translate_index
from cslab.wavefunction import WaveFunctionSpec, make_wavefunction

_ORTHO_TOL = 1e-10

# (factor on an up spin being flipped down, factor on a down spin flipped up)
_FLIP_FACTORS = {"x": (1.0 + 0j, 1.0 + 0j), "y": (1j, -1j)}

# sigma^a sigma^b = delta_ab + i eps_abc sigma^c on one site
_EPS = {("x", "y"): ("z", 1), ("y", "x"): ("z", -1),
        ("y", "z"): ("x", 1), ("z", "y"): ("x", -1),
        ("z", "x"): ("y", 1), ("x", "z"): ("y", -1)}


class DegenerateCodeError(ValueError):
    """The two candidate basis states are numerically parallel."""


@dataclass
class CodePair:
    zero_L: StateVector
    one_L: StateVector
    raw_overlap: complex

    @property
    def lattice(self) -> LatticeSpec:
        return self.zero_L.lattice


@dataclass
class ViolationReport:
    max_diag_mismatch: float
    diag_argmax: tuple
    max_offdiag: float
    offdiag_argmax: tuple
    single_pauli_max: float
    zz_distance_mismatch: dict
    entries: list = field(repr=False)  # (label, e00, e11, e01)


def code_from_states(sv0: StateVector, sv1: StateVector) -> CodePair:
    """Orthonormal encoded basis from two states on the same lattice.

    zero_L is sv0 unchanged; one_L is the Gram-Schmidt complement of sv1.
    """
    _check_same_lattice(sv0, sv1)
    raw = overlap(sv0, sv1)
    if abs(raw) > 1.0 - _ORTHO_TOL:
        raise DegenerateCodeError(
            f"candidate basis states are parallel: |<0|1>| = {abs(raw):.3e}"
        )
    amps1 = sv1.amps - raw * sv0.amps
    amps1 /= np.linalg.norm(amps1)
    return CodePair(sv0, StateVector(sv1.spec, amps1), raw)


def build_code(
    spec0: WaveFunctionSpec,
    spec1: WaveFunctionSpec,
    budget: int = DEFAULT_BUDGET,
) -> CodePair:
    """Build both sector states by exact enumeration and orthogonalize."""
    if spec0.lattice != spec1.lattice:
        raise ValueError("code states must live on the same lattice")
    return code_from_states(build_state(spec0, budget), build_state(spec1, budget))


def code_for_lattice(N1: int, N2: int, budget: int = DEFAULT_BUDGET) -> CodePair:
    return build_code(make_wavefunction(N1, N2, 0), make_wavefunction(N1, N2, 1), budget)


def _min_image_distance(spec: LatticeSpec, i: int, j: int) -> tuple[int, int]:
    si, sj = spec.site(i), spec.site(j)
    d1 = abs((si.n1 - sj.n1 + spec.N1 // 2) % spec.N1 - spec.N1 // 2)
    d2 = abs((si.n2 - sj.n2 + spec.N2 // 2) % spec.N2 - spec.N2 // 2)
    return d1, d2


def _pair_elements(sv0: StateVector, sv1: StateVector, i: int, j: int):
    """All nine <a| sigma^al_i sigma^be_j |b> blocks for one site pair.

    Returns {(al, be): (e00, e11, e01)}.  The flip mask and target ranks are
    shared by the four spin-flip combinations, which dominates the cost.
    """
    basis = sv0.basis
    occ = basis.occupancy()
    a0, a1 = sv0.amps, sv1.amps
    out = {}

    sz_i = 2.0 * occ[:, i] - 1.0
    sz_j = 2.0 * occ[:, j] - 1.0
    s = sz_i * sz_j
    out[("z", "z")] = (
        complex(np.sum(np.abs(a0) ** 2 * s)),
        complex(np.sum(np.abs(a1) ** 2 * s)),
        complex(np.sum(np.conj(a0) * s * a1)),
    )

    # One flip plus one sigma^z changes Sz by +-2: zero against Sz = 0 bras.
    for al, be in (("x", "z"), ("y", "z"), ("z", "x"), ("z", "y")):
        out[(al, be)] = (0j, 0j, 0j)

    # Both sites flipped: only configurations with exactly one of the two up.
    mask = occ[:, i] != occ[:, j]
    occ_new = occ[mask].copy()
    occ_new[:, i] ^= 1
    occ_new[:, j] ^= 1
    sites_new = np.nonzero(occ_new)[1].reshape(-1, basis.N)
    ranks = basis.ranks(sites_new)
    up_i = occ[mask, i].astype(bool)
    b0, b1 = a0[mask], a1[mask]
    c0, c1 = np.conj(a0[ranks]), np.conj(a1[ranks])
    for al in ("x", "y"):
        fi = np.where(up_i, _FLIP_FACTORS[al][0], _FLIP_FACTORS[al][1])
        for be in ("x", "y"):
            # site j has the opposite occupation of site i on the mask
            fj = np.where(up_i, _FLIP_FACTORS[be][1], _FLIP_FACTORS[be][0])
            coef = fi * fj
            out[(al, be)] = (
                complex(np.sum(c0 * coef * b0)),
                complex(np.sum(c1 * coef * b1)),
                complex(np.sum(c0 * coef * b1)),
            )
    return out


def _displacement_class(spec: LatticeSpec, i: int, j: int) -> tuple[int, int]:
    si, sj = spec.site(i), spec.site(j)
    return (sj.n1 - si.n1) % spec.N1, (sj.n2 - si.n2) % spec.N2


def kl_check(code: CodePair, translation_classes: bool | None = None) -> ViolationReport:
    """Exact weight-1 Knill-Laflamme scan over all error-basis pairs.

    Products A_a^dag A_b cover: the identity pair, identity x single Pauli,
    same-site Pauli products (reduced by the Pauli algebra to identity plus
    single Paulis), and all two-site Pauli pairs.

    With translation_classes the two-site scan evaluates one representative
    pair per displacement class, which is exact when both code states are
    eigenstates of T_x and T_y (even N2 sectors); defaults to that case.
    """
    sv0, sv1 = code.zero_L, code.one_L
    spec = code.lattice
    M = spec.n_sites
    if translation_classes is None:
        translation_classes = spec.N2 % 2 == 0
    entries: list[tuple[tuple, complex, complex, complex]] = []

    cross_id = overlap(sv0, sv1)
    entries.append((("I", "I"), 1.0 + 0j, 1.0 + 0j, cross_id))

    singles = {}
    for r in range(M):
        for al in ("x", "y", "z"):
            e00 = single_pauli_expectation(sv0, sv0, r, al)
            e11 = single_pauli_expectation(sv1, sv1, r, al)
            e01 = single_pauli_expectation(sv0, sv1, r, al)
            singles[(al, r)] = (e00, e11, e01)
            entries.append((("I", (al, r)), e00, e11, e01))
    single_pauli_max = max(
        abs(v) for triple in singles.values() for v in triple
    )

    # Same-site products sigma^al sigma^be = delta + i eps sigma^gamma.
    for r in range(M):
        for al in ("x", "y", "z"):
            for be in ("x", "y", "z"):
                if al == be:
                    entries.append((((al, r), (be, r)), 1.0 + 0j, 1.0 + 0j, cross_id))
                else:
                    gam, sgn = _EPS[(al, be)]
                    e00, e11, e01 = (1j * sgn * v for v in singles[(gam, r)])
                    entries.append((((al, r), (be, r)), e00, e11, e01))

    zz_dist: dict[tuple[int, int], float] = {}
    seen_classes: set[tuple[int, int]] = set()
    for i in range(M):
        for j in range(i + 1, M):
            if translation_classes:
                cls = _displacement_class(spec, i, j)
                if cls in seen_classes:
                    continue
                seen_classes.add(cls)
            blocks = _pair_elements(sv0, sv1, i, j)
            for (al, be), (e00, e11, e01) in blocks.items():
                entries.append((((al, i), (be, j)), e00, e11, e01))
            e00, e11, _ = blocks[("z", "z")]
            d = _min_image_distance(spec, i, j)
            zz_dist[d] = max(zz_dist.get(d, 0.0), abs(e00 - e11))

    diag_gaps = [(abs(e00 - e11), label) for label, e00, e11, _ in entries]
    off = [(abs(e01), label) for label, _, _, e01 in entries]
    max_diag, diag_arg = max(diag_gaps, key=lambda t: t[0])
    max_off, off_arg = max(off, key=lambda t: t[0])
    return ViolationReport(
        max_diag_mismatch=float(max_diag),
        diag_argmax=diag_arg,
        max_offdiag=float(max_off),
        offdiag_argmax=off_arg,
        single_pauli_max=float(single_pauli_max),
        zz_distance_mismatch=zz_dist,
        entries=entries,
    )


def zz_only_metrics(code: CodePair) -> tuple[float, float]:
    """KL violation metrics predicted from sigma^z correlators alone.

    For singlet code states every spin correlator is isotropic and every
    single-spin element vanishes, so the worst-case weight-1 violation is
    decided entirely by the zz blocks.
    """
    sv0, sv1 = code.zero_L, code.one_L
    basis = sv0.basis
    occ = basis.occupancy()
    M = code.lattice.n_sites
    p0 = np.abs(sv0.amps) ** 2
    p1 = np.abs(sv1.amps) ** 2
    x01 = np.conj(sv0.amps) * sv1.amps
    max_diag = 0.0
    max_off = abs(overlap(sv0, sv1))
    sz = 2.0 * occ - 1.0
    for i in range(M):
        for j in range(i + 1, M):
            s = sz[:, i] * sz[:, j]
            max_diag = max(max_diag, abs(np.dot(p0, s) - np.dot(p1, s)))
            max_off = max(max_off, abs(np.sum(x01 * s)))
    return max_diag, max_off


def singlet_reduction_check(code: CodePair) -> float:
    """Discrepancy between the full weight-1 scan and the zz-only shortcut.

    Small only on the singlet manifold; a corrupted (non-singlet) basis state
    breaks the isotropy assumption and makes this blow up.
    """
    report = kl_check(code, translation_classes=False)
    pred_diag, pred_off = zz_only_metrics(code)
    return max(
        abs(report.max_diag_mismatch - pred_diag),
        abs(report.max_offdiag - pred_off),
        report.single_pauli_max,
    )


def nn_bonds(spec: LatticeSpec) -> list[tuple[int, int]]:
    """All nearest-neighbor bonds (one +x and one +y bond per site)."""
    bonds = []
    for i in range(spec.n_sites):
        for direction in ("x", "y"):
            j = translate_index(spec, i, direction)
            bonds.append((i, j))
    return bonds


def pattern_map(sv: StateVector) -> dict[tuple[int, int], float]:
    """<sigma^z_i sigma^z_j> for every nearest-neighbor bond (exact backend)."""
    occ = sv.basis.occupancy()
    p = np.abs(sv.amps) ** 2
    sz = 2.0 * occ - 1.0
    return {
        (i, j): float(np.dot(p, sz[:, i] * sz[:, j]))
        for (i, j) in nn_bonds(sv.lattice)
    }
