"""Precomputed log-amplitude tables for fast configuration evaluation.

Every theta factor in Phi_n depends only on integer label differences, so the
whole wave function reduces to table lookups:

  - pair factors theta1(pi (z_i - z_j)/L1 | tau)^2 depend on (dn1, dn2);
  - the center-of-mass factor depends on (S1, S2) = (sum n1, sum n2);
  - the Gaussian depends on sum n2^2; the sublattice sign on S1 + S2.

Tables carry log-magnitude and phase separately; exact zeros of the
center-of-mass factor are stored as log-magnitude -inf (exp gives 0 without
NaNs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cslab.theta import log_theta1_sq
from cslab.wavefunction import WaveFunctionSpec


@dataclass
class AmplitudeTables:
    spec: WaveFunctionSpec
    pair_logmag: np.ndarray = field(init=False)  # (2*N1-1, 2*N2-1)
    pair_phase: np.ndarray = field(init=False)
    com_logmag: np.ndarray = field(init=False)  # (S1 span, S2 span)
    com_phase: np.ndarray = field(init=False)
    gauss_site: np.ndarray = field(init=False)  # (M,)
    n1_site: np.ndarray = field(init=False)
    n2_site: np.ndarray = field(init=False)
    s1_offset: int = field(init=False)
    s2_offset: int = field(init=False)

    def __post_init__(self):
        lat = self.spec.lattice
        N1, N2, N = lat.N1, lat.N2, lat.n_bosons
        tau = lat.tau

        self.pair_logmag = np.empty((2 * N1 - 1, 2 * N2 - 1))
        self.pair_phase = np.empty_like(self.pair_logmag)
        for dn1 in range(-N1 + 1, N1):
            for dn2 in range(-N2 + 1, N2):
                if dn1 == 0 and dn2 == 0:
                    self.pair_logmag[dn1 + N1 - 1, dn2 + N2 - 1] = np.nan
                    self.pair_phase[dn1 + N1 - 1, dn2 + N2 - 1] = np.nan
                    continue
                la = log_theta1_sq(math.pi * complex(dn1, dn2) / N1, tau)
                self.pair_logmag[dn1 + N1 - 1, dn2 + N2 - 1] = la.log_mag
                self.pair_phase[dn1 + N1 - 1, dn2 + N2 - 1] = la.phase

        n1min = -N1 // 2 + 1
        self.s1_offset = N * n1min
        self.s2_offset = N * 1
        s1_span = N * (N1 - 1) + 1
        s2_span = N * (N2 - 1) + 1
        self.com_logmag = np.empty((s1_span, s2_span))
        self.com_phase = np.empty_like(self.com_logmag)
        # w = pi (Z - W_n)/L1 with Z = b (S1 + i S2); the real part is a ratio
        # of integers so exact zeros of the theta factor land exactly on the
        # snap tolerance of log_theta1.
        if N2 % 2 == 0:
            num_offset = self.spec.n * N1 * 2  # W/L1 = n/2, in quarters
        else:
            num_offset = (2 * self.spec.n + 1) * N1  # W/L1 = (2n+1)/4
        for a in range(s1_span):
            S1 = a + self.s1_offset
            re = math.pi * (4 * S1 - num_offset) / (4 * N1)
            for c in range(s2_span):
                S2 = c + self.s2_offset
                la = log_theta1_sq(complex(re, math.pi * S2 / N1), tau)
                self.com_logmag[a, c] = la.log_mag
                self.com_phase[a, c] = 0.0 if la.is_zero else la.phase

        self.n1_site = lat.n1_of_index().astype(np.int64)
        self.n2_site = lat.n2_of_index().astype(np.int64)
        self.gauss_site = -math.pi * self.n2_site.astype(float) ** 2

    def config_logs(self, sites: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(log-magnitude, phase) of Phi_n for an array of configurations.

        `sites` has shape (D, N) with sorted up-site indices per row.
        """
        lat = self.spec.lattice
        N1, N2 = lat.N1, lat.N2
        D, N = sites.shape
        n1 = self.n1_site[sites]  # (D, N)
        n2 = self.n2_site[sites]
        S1 = n1.sum(axis=1)
        S2 = n2.sum(axis=1)

        logmag = np.zeros(D)
        phase = np.zeros(D)
        plm = self.pair_logmag
        pph = self.pair_phase
        for i in range(N):
            for j in range(i + 1, N):
                a = n1[:, i] - n1[:, j] + (N1 - 1)
                c = n2[:, i] - n2[:, j] + (N2 - 1)
                logmag += plm[a, c]
                phase += pph[a, c]

        logmag += self.com_logmag[S1 - self.s1_offset, S2 - self.s2_offset]
        phase += self.com_phase[S1 - self.s1_offset, S2 - self.s2_offset]
        logmag += self.gauss_site[sites].sum(axis=1)
        phase += math.pi * (S1 + S2)
        return logmag, phase
