"""Metropolis sampling of |Phi_n|^2 with blocking error bars.

One sweep proposes M up<->down site exchanges; each proposal is accepted with
min(1, |Phi(c')/Phi(c)|^2) evaluated from log-amplitude tables, so only
well-conditioned ratios are ever formed.  Chains are fully independent with
per-chain streams derived from (seed, chain index) via numpy's SeedSequence;
the in-kernel generator is numba's Mersenne Twister, seeded per chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from cslab.lattice import Site
from cslab.tables import AmplitudeTables
from cslab.wavefunction import WaveFunctionSpec, make_wavefunction

GENERATOR_ID = "numba-mt19937/seedsequence(seed,chain)"

# Nearest-neighbor correlators from the reference study, one row per lattice:
# (N1, N2) -> ((phi0_x, err), (phi0_y, err), (phi1_x, err), (phi1_y, err)).
PAPER_TABLE1: dict[tuple[int, int], tuple[tuple[float, float], ...]] = {
    (4, 2): ((-0.173, 0.002), (-0.946, 0.002), (-0.455, 0.002), (0.273, 0.005)),
    (4, 4): ((-0.247, 0.002), (-0.246, 0.003), (-0.230, 0.002), (-0.376, 0.003)),
    (4, 6): ((-0.216, 0.002), (-0.312, 0.002), (-0.217, 0.002), (-0.301, 0.003)),
    (4, 8): ((-0.210, 0.002), (-0.306, 0.003), (-0.210, 0.002), (-0.307, 0.003)),
    (6, 2): ((-0.176, 0.002), (-0.944, 0.002), (-0.467, 0.002), (0.322, 0.005)),
    (6, 4): ((-0.311, 0.002), (-0.216, 0.003), (-0.279, 0.002), (-0.376, 0.003)),
    (6, 6): ((-0.298, 0.002), (-0.300, 0.003), (-0.302, 0.002), (-0.281, 0.003)),
    (6, 8): ((-0.303, 0.002), (-0.289, 0.003), (-0.302, 0.002), (-0.290, 0.003)),
    (8, 2): ((-0.175, 0.002), (-0.944, 0.002), (-0.464, 0.002), (0.335, 0.005)),
    (8, 4): ((-0.306, 0.002), (-0.210, 0.003), (-0.275, 0.002), (-0.382, 0.003)),
    (8, 6): ((-0.290, 0.002), (-0.303, 0.003), (-0.292, 0.002), (-0.281, 0.003)),
    (8, 8): ((-0.291, 0.002), (-0.291, 0.002), (-0.290, 0.002), (-0.293, 0.003)),
    (4, 3): ((-0.230, 0.002), (-0.241, 0.003), (-0.301, 0.002), (-0.241, 0.003)),
    (4, 5): ((-0.229, 0.002), (-0.301, 0.003), (-0.221, 0.002), (-0.301, 0.003)),
    (4, 7): ((-0.213, 0.002), (-0.305, 0.003), (-0.213, 0.002), (-0.305, 0.003)),
    (4, 9): ((-0.209, 0.002), (-0.306, 0.003), (-0.209, 0.002), (-0.306, 0.003)),
    (6, 3): ((-0.334, 0.002), (-0.239, 0.003), (-0.257, 0.002), (-0.239, 0.003)),
    (6, 5): ((-0.280, 0.002), (-0.290, 0.003), (-0.292, 0.002), (-0.290, 0.003)),
    (6, 7): ((-0.283, 0.002), (-0.294, 0.003), (-0.281, 0.002), (-0.294, 0.003)),
    (6, 9): ((-0.281, 0.002), (-0.293, 0.003), (-0.281, 0.002), (-0.293, 0.003)),
    (8, 3): ((-0.258, 0.002), (-0.239, 0.003), (-0.336, 0.002), (-0.239, 0.003)),
    (8, 5): ((-0.298, 0.002), (-0.290, 0.003), (-0.293, 0.002), (-0.290, 0.003)),
    (8, 7): ((-0.291, 0.002), (-0.290, 0.003), (-0.292, 0.002), (-0.290, 0.003)),
    (8, 9): ((-0.290, 0.002), (-0.291, 0.003), (-0.290, 0.002), (-0.291, 0.003)),
}

TABLE1_LATTICES = list(PAPER_TABLE1)


class NonDiagonalObservableError(ValueError):
    """The sampler only estimates observables diagonal in the sigma^z basis."""


class StuckChainError(RuntimeError):
    """Acceptance rate collapsed during warmup."""


@dataclass(frozen=True)
class VmcSchedule:
    n_chains: int = 4
    sweeps_warmup: int = 2000
    sweeps_measure: int = 20000
    block_size: int = 100
    seed: int = 20240613

    def __post_init__(self):
        if self.n_chains < 2:
            raise ValueError("need at least 2 chains for the consistency check")
        if self.sweeps_measure % self.block_size != 0:
            raise ValueError("sweeps_measure must be a multiple of block_size")

    @property
    def n_blocks_per_chain(self) -> int:
        return self.sweeps_measure // self.block_size


@dataclass(frozen=True)
class VmcEstimate:
    mean: complex
    stderr: float  # standard error of the real part, from block means
    stderr_im: float
    stderr_doubled: float  # same, after pairwise block merging (sanity check)
    n_blocks: int
    acceptance: float


def _parse_observables(spec: WaveFunctionSpec, observables):
    zz_pairs = []
    want_ulsm = False
    keys = []
    for obs in observables:
        if obs[0] == "zz":
            i = obs[1] if isinstance(obs[1], int) else spec.lattice.index(obs[1])
            j = obs[2] if isinstance(obs[2], int) else spec.lattice.index(obs[2])
            if i == j:
                raise ValueError("zz observable needs distinct sites")
            zz_pairs.append((i, j))
            keys.append(("zz", i, j))
        elif obs[0] == "ulsm":
            want_ulsm = True
            keys.append(("ulsm",))
        else:
            raise NonDiagonalObservableError(
                f"observable {obs!r} is not diagonal in the sigma^z basis"
            )
    return zz_pairs, want_ulsm, keys


@njit(cache=True)
def _run_chain(
    chain_seed,
    M,
    N,
    N1,
    N2,
    n1_site,
    n2_site,
    pair_logmag,
    com_logmag,
    s1_off,
    s2_off,
    gauss_site,
    sweeps_warmup,
    sweeps_measure,
    block_size,
    zz_i,
    zz_j,
    want_ulsm,
):
    np.random.seed(chain_seed)
    n_pairs = zz_i.shape[0]
    n_obs = n_pairs + (1 if want_ulsm else 0)
    n_blocks = sweeps_measure // block_size
    blocks = np.zeros((n_blocks, n_obs), dtype=np.complex128)

    occ = np.zeros(M, dtype=np.int8)
    ups = np.empty(N, dtype=np.int64)
    downs = np.empty(M - N, dtype=np.int64)

    # Draw starting configurations until the amplitude is nonzero.
    while True:
        perm = np.random.permutation(M)
        S1 = 0
        S2 = 0
        for k in range(M):
            occ[k] = 0
        for k in range(N):
            ups[k] = perm[k]
            occ[perm[k]] = 1
            S1 += n1_site[perm[k]]
            S2 += n2_site[perm[k]]
        for k in range(M - N):
            downs[k] = perm[N + k]
        if com_logmag[S1 - s1_off, S2 - s2_off] > -1e299:
            break

    acc_warm = 0
    acc_meas = 0
    total_sweeps = sweeps_warmup + sweeps_measure
    for sweep in range(total_sweeps):
        for _ in range(M):
            u = np.random.randint(0, N)
            k = np.random.randint(0, M - N)
            a = ups[u]
            d = downs[k]
            delta = gauss_site[d] - gauss_site[a]
            n1a = n1_site[a]
            n2a = n2_site[a]
            n1d = n1_site[d]
            n2d = n2_site[d]
            for i in range(N):
                if i == u:
                    continue
                b = ups[i]
                n1b = n1_site[b]
                n2b = n2_site[b]
                delta += (
                    pair_logmag[n1d - n1b + N1 - 1, n2d - n2b + N2 - 1]
                    - pair_logmag[n1a - n1b + N1 - 1, n2a - n2b + N2 - 1]
                )
            S1n = S1 + n1_site[d] - n1_site[a]
            S2n = S2 + n2_site[d] - n2_site[a]
            delta += (
                com_logmag[S1n - s1_off, S2n - s2_off]
                - com_logmag[S1 - s1_off, S2 - s2_off]
            )
            accept = delta >= 0.0 or np.random.random() < math.exp(2.0 * delta)
            if accept:
                ups[u] = d
                downs[k] = a
                occ[a] = 0
                occ[d] = 1
                S1 = S1n
                S2 = S2n
                if sweep < sweeps_warmup:
                    acc_warm += 1
                else:
                    acc_meas += 1
        if sweep >= sweeps_warmup:
            m = sweep - sweeps_warmup
            blk = m // block_size
            for p in range(n_pairs):
                s = (2 * occ[zz_i[p]] - 1) * (2 * occ[zz_j[p]] - 1)
                blocks[blk, p] += s
            if want_ulsm:
                ang = 2.0 * math.pi * S1 / N1
                blocks[blk, n_pairs] += complex(math.cos(ang), math.sin(ang))
    blocks /= block_size
    return (
        blocks,
        acc_warm / (sweeps_warmup * M),
        acc_meas / (sweeps_measure * M),
    )


def _chain_seed(seed: int, chain: int) -> int:
    return int(np.random.SeedSequence((seed, chain)).generate_state(1)[0])


def run_vmc(spec: WaveFunctionSpec, schedule: VmcSchedule, observables) -> dict:
    """Estimate diagonal observables of |Phi_n|^2; returns key -> VmcEstimate."""
    zz_pairs, want_ulsm, keys = _parse_observables(spec, observables)
    lat = spec.lattice
    tables = AmplitudeTables(spec)
    com = tables.com_logmag.copy()
    com[np.isneginf(com)] = -1e300  # keeps in-kernel arithmetic NaN-free

    zz_i = np.array([p[0] for p in zz_pairs], dtype=np.int64)
    zz_j = np.array([p[1] for p in zz_pairs], dtype=np.int64)

    all_blocks = []
    acceptances = []
    for chain in range(schedule.n_chains):
        blocks, acc_warm, acc_meas = _run_chain(
            _chain_seed(schedule.seed, chain),
            lat.n_sites,
            lat.n_bosons,
            lat.N1,
            lat.N2,
            tables.n1_site,
            tables.n2_site,
            tables.pair_logmag,
            com,
            tables.s1_offset,
            tables.s2_offset,
            tables.gauss_site,
            schedule.sweeps_warmup,
            schedule.sweeps_measure,
            schedule.block_size,
            zz_i,
            zz_j,
            want_ulsm,
        )
        if acc_warm < 0.01:
            raise StuckChainError(
                f"chain {chain} acceptance {acc_warm:.3%} during warmup"
            )
        all_blocks.append(blocks)
        acceptances.append(acc_meas)
    blocks = np.concatenate(all_blocks, axis=0)  # (total blocks, n_obs)
    acceptance = float(np.mean(acceptances))

    results = {}
    col_zz = 0
    for key in keys:
        if key[0] == "zz":
            col = col_zz
            col_zz += 1
        else:
            col = len(zz_pairs)
        series = blocks[:, col]
        if key[0] == "ulsm":
            series = series * ((-1j) ** lat.N2)
        results[key] = _estimate_from_blocks(series, acceptance)
    return results


def _estimate_from_blocks(series: np.ndarray, acceptance: float) -> VmcEstimate:
    n = series.shape[0]
    mean = complex(series.mean())
    se_re = float(series.real.std(ddof=1) / math.sqrt(n))
    se_im = float(series.imag.std(ddof=1) / math.sqrt(n))
    half = (n // 2) * 2
    doubled = 0.5 * (series[0:half:2] + series[1:half:2])
    se2 = float(doubled.real.std(ddof=1) / math.sqrt(doubled.shape[0]))
    return VmcEstimate(mean, se_re, se_im, se2, n, acceptance)


def ulsm_scan(N2: int, N1_list, n: int, schedule: VmcSchedule):
    """Re<U_LSM> vs 1/N1 at fixed N2 for one sector; list of result rows."""
    rows = []
    for N1 in N1_list:
        if N1 % 2 != 0:
            raise ValueError(f"N1={N1} must be even")
        spec = make_wavefunction(N1, N2, n)
        est = run_vmc(spec, schedule, [("ulsm",)])[("ulsm",)]
        rows.append(
            {
                "N1": N1,
                "N2": N2,
                "sector": n,
                "inv_N1": 1.0 / N1,
                "re": est.mean.real,
                "im": est.mean.imag,
                "stderr": est.stderr,
                "stderr_im": est.stderr_im,
                "n_blocks": est.n_blocks,
                "acceptance": est.acceptance,
            }
        )
    return rows


def ulsm_limit(N2: int, n: int) -> float:
    """Limiting slow-twist eigenvalue (-1)^n (-1)^{(N2+2)/2} or (-1)^n (-1)^{(N2+1)/2}."""
    if N2 % 2 == 0:
        return (-1.0) ** n * (-1.0) ** ((N2 + 2) // 2)
    return (-1.0) ** n * (-1.0) ** ((N2 + 1) // 2)


def origin_bond_sites(lattice) -> tuple[int, int, int]:
    """Site indices (origin, x-neighbor, y-neighbor) for the r0 = (0, 1) convention."""
    i0 = lattice.index(Site(0, 1))
    ix = lattice.index(Site(1, 1))
    iy = lattice.index(Site(0, 2))
    return i0, ix, iy


def table1_report(schedule: VmcSchedule, lattices=None) -> list[dict]:
    """Replica of the nearest-neighbor correlator table with pulls vs paper values."""
    rows = []
    for N1, N2 in lattices if lattices is not None else TABLE1_LATTICES:
        paper = PAPER_TABLE1.get((N1, N2))
        for sector in (0, 1):
            spec = make_wavefunction(N1, N2, sector)
            i0, ix, iy = origin_bond_sites(spec.lattice)
            ests = run_vmc(
                spec, schedule, [("zz", i0, ix), ("zz", i0, iy)]
            )
            for bond, (key, col) in zip(
                ("x", "y"),
                ((("zz", i0, ix), 2 * sector), (("zz", i0, iy), 2 * sector + 1)),
            ):
                est = ests[key]
                row = {
                    "lattice": f"{N1}x{N2}",
                    "sector": sector,
                    "bond": bond,
                    "mean": est.mean.real,
                    "stderr": est.stderr,
                    "n_blocks": est.n_blocks,
                    "acceptance": est.acceptance,
                    "seed": schedule.seed,
                }
                if paper is not None:
                    ref, ref_err = paper[col]
                    row["paper"] = ref
                    row["paper_err"] = ref_err
                    row["pull"] = abs(est.mean.real - ref) / math.sqrt(
                        est.stderr**2 + ref_err**2
                    )
                rows.append(row)
    return rows
