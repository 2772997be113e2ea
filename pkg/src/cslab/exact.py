"""Exact state vectors over the Sz = 0 configuration space.

Configurations are ranked by the combinatorial number system over the
canonical site order: a sorted up-site tuple (c_0 < c_1 < ...) has rank
sum_k C(c_k, k+1).  This gives O(1) index <-> configuration maps that are
identical across runs, so state-vector dumps are diffable.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass

import numpy as np

from cslab.lattice import LatticeSpec, Site, translation_permutation
from cslab.tables import AmplitudeTables
from cslab.wavefunction import SpinConfiguration, WaveFunctionSpec

DEFAULT_BUDGET = 3_000_000

_PAULI_FLIP = {"x": (1.0 + 0j, 1.0 + 0j), "y": (1j, -1j)}  # (up->down, down->up)


class EnumerationBudgetError(RuntimeError):
    """Configuration space too large to enumerate; use the VMC engine."""


class LatticeMismatchError(ValueError):
    """Operands live on different lattices."""


def binomial_table(n_max: int, k_max: int) -> np.ndarray:
    """C(n, k) for 0 <= n <= n_max, 0 <= k <= k_max (int64, exact at this scale)."""
    t = np.zeros((n_max + 1, k_max + 1), dtype=np.int64)
    t[:, 0] = 1
    for n in range(1, n_max + 1):
        for k in range(1, k_max + 1):
            t[n, k] = t[n - 1, k] + t[n - 1, k - 1]
    return t


@dataclass
class Basis:
    """All C(M, N) configurations of N up spins on M sites, in rank order."""

    M: int
    N: int
    sites: np.ndarray  # (D, N) int8, sorted per row
    binom: np.ndarray

    @property
    def dim(self) -> int:
        return self.sites.shape[0]

    def ranks(self, sites: np.ndarray) -> np.ndarray:
        """Combinatorial rank of each row of a sorted site array."""
        k = sites.shape[1]
        cols = np.arange(1, k + 1)
        return self.binom[sites.astype(np.int64), cols].sum(axis=1)

    def occupancy(self) -> np.ndarray:
        """(D, M) int8 occupation matrix (cached)."""
        occ = getattr(self, "_occ", None)
        if occ is None:
            occ = np.zeros((self.dim, self.M), dtype=np.int8)
            rows = np.repeat(np.arange(self.dim), self.N)
            occ[rows, self.sites.astype(np.int64).ravel()] = 1
            self._occ = occ
        return occ


_BASIS_CACHE: dict[tuple[int, int], Basis] = {}


def get_basis(M: int, N: int) -> Basis:
    key = (M, N)
    if key not in _BASIS_CACHE:
        binom = binomial_table(M, M)
        dim = int(binom[M, N])
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(M), N)),
            dtype=np.int8,
            count=dim * N,
        )
        lex = flat.reshape(dim, N)
        out = np.empty_like(lex)
        cols = np.arange(1, N + 1)
        ranks = binom[lex.astype(np.int64), cols].sum(axis=1)
        out[ranks] = lex
        _BASIS_CACHE[key] = Basis(M, N, out, binom)
        # Keep at most a few large bases resident.
        if len(_BASIS_CACHE) > 6:
            oldest = next(iter(_BASIS_CACHE))
            if oldest != key:
                del _BASIS_CACHE[oldest]
    return _BASIS_CACHE[key]


@dataclass
class StateVector:
    spec: WaveFunctionSpec
    amps: np.ndarray  # (D,) complex128, unit norm

    @property
    def lattice(self) -> LatticeSpec:
        return self.spec.lattice

    @property
    def basis(self) -> Basis:
        return get_basis(self.lattice.n_sites, self.lattice.n_bosons)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]


def enumeration_dim(lattice: LatticeSpec) -> int:
    return math.comb(lattice.n_sites, lattice.n_bosons)


def build_state(spec: WaveFunctionSpec, budget: int = DEFAULT_BUDGET) -> StateVector:
    """Normalized state vector for Phi_n; errors out above the enumeration budget."""
    dim = enumeration_dim(spec.lattice)
    if dim > budget:
        raise EnumerationBudgetError(
            f"{spec.lattice.N1}x{spec.lattice.N2} has {dim} configurations "
            f"(budget {budget}); use the VMC engine for this lattice"
        )
    basis = get_basis(spec.lattice.n_sites, spec.lattice.n_bosons)
    tables = AmplitudeTables(spec)
    logmag, phase = tables.config_logs(basis.sites)
    mx = np.max(logmag[np.isfinite(logmag)])
    mag = np.exp(logmag - mx)
    amps = mag * (np.cos(phase) + 1j * np.sin(phase))
    amps /= np.linalg.norm(amps)
    return StateVector(spec, amps)


def _check_same_lattice(a: StateVector, b: StateVector) -> None:
    if a.lattice != b.lattice:
        raise LatticeMismatchError(f"{a.lattice} vs {b.lattice}")


def _site_index(lattice: LatticeSpec, site) -> int:
    if isinstance(site, Site):
        return lattice.index(site)
    return int(site)


def overlap(a: StateVector, b: StateVector) -> complex:
    _check_same_lattice(a, b)
    return complex(np.vdot(a.amps, b.amps))


def amplitude(sv: StateVector, config: SpinConfiguration) -> complex:
    """Amplitude of one configuration (by combinatorial rank)."""
    sites = np.array([config.up_sites], dtype=np.int8)
    return complex(sv.amps[sv.basis.ranks(sites)[0]])


def _lowered_vector(sv: StateVector) -> np.ndarray:
    """S^- |sv>: dense vector in the (M, N-1) sector."""
    basis = sv.basis
    M, N = basis.M, basis.N
    target = get_basis(M, N - 1)
    out_re = np.zeros(target.dim)
    out_im = np.zeros(target.dim)
    sites = basis.sites.astype(np.int64)
    binom = basis.binom
    # Remove position k: columns j < k keep weight C(., j+1), j > k drop to C(., j).
    low = binom[sites, np.arange(1, N + 1)]  # C(c_j, j+1)
    high = binom[sites, np.arange(0, N)]  # C(c_j, j)
    pre = np.concatenate([np.zeros((basis.dim, 1), dtype=np.int64), np.cumsum(low, axis=1)], axis=1)
    suf = np.concatenate([np.cumsum(high[:, ::-1], axis=1)[:, ::-1], np.zeros((basis.dim, 1), dtype=np.int64)], axis=1)
    for k in range(N):
        ranks = pre[:, k] + suf[:, k + 1]
        out_re += np.bincount(ranks, weights=sv.amps.real, minlength=target.dim)
        out_im += np.bincount(ranks, weights=sv.amps.imag, minlength=target.dim)
    return out_re + 1j * out_im


def _raised_vector(sv: StateVector) -> np.ndarray:
    """S^+ |sv>: dense vector in the (M, N+1) sector."""
    basis = sv.basis
    M, N = basis.M, basis.N
    target = get_basis(M, N + 1)
    out_re = np.zeros(target.dim)
    out_im = np.zeros(target.dim)
    sites = basis.sites.astype(np.int64)
    binom = basis.binom
    occ = basis.occupancy()
    # Inclusive cumulative occupation: number of up sites <= d.
    occ_cum = np.cumsum(occ, axis=1)
    # Insert site d at position p: columns j < p keep C(., j+1), the new site
    # contributes C(d, p+1), columns j >= p shift to C(., j+2).
    low = binom[sites, np.arange(1, N + 1)]
    shifted = binom[sites, np.arange(2, N + 2)]
    pre = np.concatenate([np.zeros((basis.dim, 1), dtype=np.int64), np.cumsum(low, axis=1)], axis=1)
    suf = np.concatenate([np.cumsum(shifted[:, ::-1], axis=1)[:, ::-1], np.zeros((basis.dim, 1), dtype=np.int64)], axis=1)
    down_sites = np.nonzero(occ == 0)[1].reshape(basis.dim, M - N)
    for k in range(M - N):
        d = down_sites[:, k]
        p = occ_cum[np.arange(basis.dim), d]  # insertion position (sites < d are up)
        ranks = (
            pre[np.arange(basis.dim), p]
            + binom[d, p + 1]
            + suf[np.arange(basis.dim), p]
        )
        out_re += np.bincount(ranks, weights=sv.amps.real, minlength=target.dim)
        out_im += np.bincount(ranks, weights=sv.amps.imag, minlength=target.dim)
    return out_re + 1j * out_im


def singlet_defect(sv: StateVector) -> float:
    """|| S^- |sv> || accumulated in the Sz = -1 sector."""
    return float(np.linalg.norm(_lowered_vector(sv)))


def total_spin(sv: StateVector) -> float:
    """<S^2> at Sz = 0, computed as || S^+ |sv> ||^2."""
    return float(np.linalg.norm(_raised_vector(sv)) ** 2)


def zz_correlator(sv: StateVector, i, j) -> float:
    ii = _site_index(sv.lattice, i)
    jj = _site_index(sv.lattice, j)
    if ii == jj:
        raise ValueError("zz correlator requires distinct sites")
    occ = sv.basis.occupancy()
    s = (2 * occ[:, ii].astype(np.int64) - 1) * (2 * occ[:, jj].astype(np.int64) - 1)
    return float(np.sum(s * np.abs(sv.amps) ** 2))


def cross_zz(a: StateVector, b: StateVector, i, j) -> complex:
    _check_same_lattice(a, b)
    ii = _site_index(a.lattice, i)
    jj = _site_index(a.lattice, j)
    if ii == jj:
        raise ValueError("cross zz requires distinct sites")
    occ = a.basis.occupancy()
    s = (2 * occ[:, ii].astype(np.float64) - 1) * (2 * occ[:, jj] - 1)
    return complex(np.sum(np.conj(a.amps) * s * b.amps))


def pauli_string_element(a: StateVector, b: StateVector, sites, alphas) -> complex:
    """<a| prod_k sigma^{alphas[k]}_{sites[k]} |b> for distinct sites.

    sigma^x and sigma^y change the up-spin count site by site; contributions
    whose net count change is nonzero land in a different Sz sector and give
    zero against the Sz = 0 bra.
    """
    _check_same_lattice(a, b)
    idx = [_site_index(a.lattice, s) for s in sites]
    if len(set(idx)) != len(idx):
        raise ValueError("pauli string sites must be distinct")
    flips = [(i, al) for i, al in zip(idx, alphas) if al in ("x", "y")]
    zs = [i for i, al in zip(idx, alphas) if al == "z"]
    if any(al not in ("x", "y", "z") for al in alphas):
        raise ValueError(f"unknown Pauli labels {alphas}")

    basis = b.basis
    occ = basis.occupancy()
    if not flips:
        s = np.ones(basis.dim)
        for i in zs:
            s = s * (2 * occ[:, i] - 1)
        return complex(np.sum(np.conj(a.amps) * s * b.amps))

    # Net change in up count must vanish: half the flipped sites are up.
    n_up_flipped = occ[:, [i for i, _ in flips]].astype(np.int64).sum(axis=1)
    if len(flips) % 2 == 1:
        return 0j  # odd flip count always changes the sector
    mask = n_up_flipped == len(flips) // 2
    if not np.any(mask):
        return 0j

    coef = np.ones(int(mask.sum()), dtype=np.complex128)
    for i, al in flips:
        up = occ[mask, i].astype(bool)
        f_down, f_up = _PAULI_FLIP[al][0], _PAULI_FLIP[al][1]
        coef *= np.where(up, f_down, f_up)
    for i in zs:
        coef *= 2.0 * occ[mask, i] - 1.0

    occ_new = occ[mask].copy()
    for i, _ in flips:
        occ_new[:, i] ^= 1
    sites_new = np.nonzero(occ_new)[1].reshape(-1, basis.N)
    ranks = basis.ranks(sites_new)
    return complex(np.sum(np.conj(a.amps[ranks]) * coef * b.amps[mask]))


def single_pauli_expectation(a: StateVector, b: StateVector, r, alpha: str) -> complex:
    """<a| sigma^alpha_r |b>; x and y map into the Sz = +-1 sectors."""
    _check_same_lattice(a, b)
    i = _site_index(a.lattice, r)
    if alpha == "z":
        occ = a.basis.occupancy()
        return complex(np.sum(np.conj(a.amps) * (2.0 * occ[:, i] - 1.0) * b.amps))
    if alpha not in ("x", "y"):
        raise ValueError(f"unknown Pauli label {alpha!r}")
    # sigma^x/y_r |b> splits by the occupation of r into (N-1)- and (N+1)-up
    # pieces; the bra lives at N up spins, so both overlaps vanish identically.
    # Build the pieces anyway so the selection rule is exercised, not assumed.
    basis = b.basis
    occ = basis.occupancy()
    up = occ[:, i].astype(bool)
    total = 0j
    for sector_mask, delta in ((up, -1), (~up, +1)):
        if b.basis.N + delta != a.basis.N:
            continue  # bra has no support in this sector
        occ_new = occ[sector_mask].copy()
        occ_new[:, i] ^= 1
        sites_new = np.nonzero(occ_new)[1].reshape(-1, basis.N + delta)
        ranks = get_basis(basis.M, basis.N + delta).ranks(sites_new)
        f = _PAULI_FLIP[alpha][0] if delta == -1 else _PAULI_FLIP[alpha][1]
        total += np.sum(np.conj(a.amps[ranks]) * f * b.amps[sector_mask])
    return complex(total)


def translation_overlap(a: StateVector, b: StateVector, direction: str) -> complex:
    """<a| T_dir |b> with T permuting configurations by one lattice vector."""
    _check_same_lattice(a, b)
    perm = translation_permutation(a.lattice, direction)
    moved = np.sort(perm[b.basis.sites.astype(np.int64)], axis=1)
    ranks = b.basis.ranks(moved)
    return complex(np.sum(np.conj(a.amps[ranks]) * b.amps))


def ulsm_expectation_exact(sv: StateVector) -> complex:
    """<sv| U_LSM |sv> for the diagonal slow-twist operator."""
    lat = sv.lattice
    n1 = lat.n1_of_index()[sv.basis.sites.astype(np.int64)]
    S1 = n1.sum(axis=1)
    phase = ((-1j) ** lat.N2) * np.exp(1j * 2.0 * math.pi * S1 / lat.N1)
    return complex(np.sum(phase * np.abs(sv.amps) ** 2))


_EPS_TERMS = [
    (("x", "y", "z"), 1.0),
    (("y", "z", "x"), 1.0),
    (("z", "x", "y"), 1.0),
    (("x", "z", "y"), -1.0),
    (("y", "x", "z"), -1.0),
    (("z", "y", "x"), -1.0),
]


def chiral_order(sv: StateVector, triangle) -> float:
    """<sigma_1 . (sigma_2 x sigma_3)> on an ordered site triple."""
    idx = [_site_index(sv.lattice, s) for s in triangle]
    if len(set(idx)) != 3:
        raise ValueError("chiral order needs three distinct sites")
    total = 0j
    for alphas, sign in _EPS_TERMS:
        total += sign * pauli_string_element(sv, sv, idx, alphas)
    if abs(total.imag) > 1e-9:
        raise RuntimeError(f"chiral order came out non-real: {total}")
    return float(total.real)


_DUMP_MAGIC = b"CSLSTATE"


def dump_state(sv: StateVector, path) -> None:
    """Binary dump: header (N1, N2, sector, dim) + little-endian re/im pairs."""
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(
            struct.pack(
                "<iiiq", sv.lattice.N1, sv.lattice.N2, sv.spec.n, sv.dim
            )
        )
        interleaved = np.empty(2 * sv.dim)
        interleaved[0::2] = sv.amps.real
        interleaved[1::2] = sv.amps.imag
        fh.write(interleaved.astype("<f8").tobytes())


def load_state(path) -> StateVector:
    from cslab.wavefunction import make_wavefunction

    with open(path, "rb") as fh:
        magic = fh.read(len(_DUMP_MAGIC))
        if magic != _DUMP_MAGIC:
            raise ValueError("not a state-vector dump")
        N1, N2, sector, dim = struct.unpack("<iiiq", fh.read(20))
        data = np.frombuffer(fh.read(16 * dim), dtype="<f8")
    spec = make_wavefunction(N1, N2, sector)
    amps = data[0::2] + 1j * data[1::2]
    if amps.shape[0] != dim:
        raise ValueError("truncated state-vector dump")
    return StateVector(spec, amps)
