"""Torus Laughlin wave functions for the two chiral spin liquid sectors.

The boson wave function in sector n is

    Psi_n({r_i}) = F_n(Z) * prod_{i<j} theta1(pi (z_i - z_j)/L1 | tau)^2
                   * prod_i exp(-y_i^2 / 2),

with z = x + i y, Z = sum_i z_i, tau = i L2/L1 and center-of-mass factor
F_n(Z) = theta1(pi (Z - W_n)/L1 | tau)^2.  The spin wave function Phi_n undoes
the sublattice rotation, which at lattice points reduces to the sign
(-1)^{n1 + n2} per up spin.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath

from cslab.lattice import B_SPACING, LatticeSpec, Site
from cslab.theta import LogAmplitude, log_theta1_sq


@dataclass(frozen=True)
class SpinConfiguration:
    """Half-filled set of up-spin site indices in canonical (sorted) order."""

    up_sites: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.up_sites)) != len(self.up_sites):
            raise ValueError("repeated up-spin site (hard-core constraint)")
        if tuple(sorted(self.up_sites)) != self.up_sites:
            object.__setattr__(self, "up_sites", tuple(sorted(self.up_sites)))

    def validate(self, lattice: LatticeSpec) -> None:
        if len(self.up_sites) != lattice.n_bosons:
            raise ValueError(
                f"configuration has {len(self.up_sites)} up spins, "
                f"expected {lattice.n_bosons} (Sz = 0 sector)"
            )
        if self.up_sites and not (0 <= self.up_sites[0] and self.up_sites[-1] < lattice.n_sites):
            raise ValueError("site index out of range")


@dataclass(frozen=True)
class WaveFunctionSpec:
    """Lattice plus sector index n in {0, 1} and the derived flux data."""

    lattice: LatticeSpec
    n: int

    def __post_init__(self):
        if self.n not in (0, 1):
            raise ValueError(f"sector must be 0 or 1, got {self.n}")

    @property
    def phi1(self) -> float:
        return 0.0

    @property
    def phi2(self) -> float:
        return 0.0 if self.lattice.N2 % 2 == 0 else math.pi

    @property
    def W(self) -> float:
        return com_offset(self.lattice.N2, self.n, self.lattice.L1)


def make_wavefunction(N1: int, N2: int, n: int) -> WaveFunctionSpec:
    from cslab.lattice import build_lattice

    return WaveFunctionSpec(build_lattice(N1, N2), n)


def com_offset(N2: int, n: int, L1: float) -> float:
    """Center-of-mass offset W_n: n*L1/2 for even N2, (2n+1)*L1/4 for odd N2."""
    if n not in (0, 1):
        raise ValueError(f"sector must be 0 or 1, got {n}")
    if N2 % 2 == 0:
        return n * L1 / 2.0
    return (2 * n + 1) * L1 / 4.0


def log_psi_positions(spec: WaveFunctionSpec, zs: Sequence[complex]) -> LogAmplitude:
    """Boson wave function at arbitrary complex positions (internal use).

    Continuum arguments are only needed by the boundary-condition checks; all
    physical evaluations happen at lattice points via log_psi/log_phi.
    """
    lat = spec.lattice
    tau = lat.tau
    scale = math.pi / lat.L1
    Z = sum(zs)
    total = log_theta1_sq(scale * (Z - spec.W), tau)
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            total = total * log_theta1_sq(scale * (zs[i] - zs[j]), tau)
    gauss = -0.5 * sum(z.imag * z.imag for z in zs)
    return total * LogAmplitude(gauss, 0.0)


def log_psi(spec: WaveFunctionSpec, config: SpinConfiguration) -> LogAmplitude:
    """Boson wave function Psi_n on a half-filled lattice configuration."""
    config.validate(spec.lattice)
    zs = [spec.lattice.site(i).z for i in config.up_sites]
    return log_psi_positions(spec, zs)


def log_phi(spec: WaveFunctionSpec, config: SpinConfiguration) -> LogAmplitude:
    """Spin wave function Phi_n: sublattice sign (-1)^{n1+n2} per up spin times Psi_n."""
    config.validate(spec.lattice)
    parity = 0
    for i in config.up_sites:
        s = spec.lattice.site(i)
        parity += s.n1 + s.n2
    sign = LogAmplitude(0.0, math.pi) if parity % 2 else LogAmplitude(0.0, 0.0)
    return sign * log_psi(spec, config)


def boundary_residuals(spec: WaveFunctionSpec, zs: Sequence[complex], k: int = 0) -> tuple[float, float]:
    """Deviation from the torus boundary conditions when particle k wraps.

    Wrapping in x is an exact symmetry: Psi(z_k + L1) = e^{i phi1} Psi.
    Wrapping in y picks up the magnetic-translation gauge factor:
    Psi(z_k + i L2) = e^{i phi2} e^{-i L2 x_k} Psi (the magnitude factors
    from the theta shifts and the Gaussian cancel exactly because b^2 = 2 pi).
    Returns (x residual, y residual).
    """
    lat = spec.lattice
    base = log_psi_positions(spec, zs)
    zx = list(zs)
    zx[k] = zx[k] + lat.L1
    rx = (log_psi_positions(spec, zx) / base).to_complex()
    res_x = abs(rx - cmath.exp(1j * spec.phi1))
    zy = list(zs)
    zy[k] = zy[k] + 1j * lat.L2
    ry = (log_psi_positions(spec, zy) / base).to_complex()
    res_y = abs(ry * cmath.exp(1j * lat.L2 * zs[k].real) - cmath.exp(1j * spec.phi2))
    return res_x, res_y


def ulsm_config_phase(lattice: LatticeSpec, config: SpinConfiguration) -> complex:
    """Eigenvalue of the diagonal slow-twist operator on one configuration.

    Equals (-i)^{N2} * exp(i (2 pi / L1) X) with X the summed x coordinate of
    the up spins, which coincides with exp(i (pi/L1) sum_r x sigma^z_r).
    """
    config.validate(lattice)
    X = sum(lattice.site(i).x for i in config.up_sites)
    return (-1j) ** lattice.N2 * cmath.exp(1j * 2.0 * math.pi * X / lattice.L1)


def lattice_sign_identity_residual(site: Site) -> float:
    """Residual of e^{ib(x+y)/2} e^{-y^2/2} = -G(r) e^{z^2/4} e^{-|z|^2/4} in log space."""
    n1, n2 = site.n1, site.n2
    x, y = site.x, site.y
    z = complex(x, y)
    lhs = complex(-y * y / 2.0, B_SPACING * (x + y) / 2.0)
    g = (-1.0) ** (n1 * n2 + n1 + n2 + 1)
    rhs = cmath.log(-g + 0j) + z * z / 4.0 - (abs(z) ** 2) / 4.0
    diff = lhs - rhs
    # Compare modulo 2*pi*i.
    im = math.remainder(diff.imag, 2.0 * math.pi)
    return math.hypot(diff.real, im)


def sum_rule_residual(f: Callable[[complex], complex], R: float, degree: int = 0) -> float:
    """|sum_{|r|<R} G(r) f(z) e^{-|z|^2/4}| over the infinite-plane lattice.

    G(r) = (-1)^{n1 n2 + n1 + n2 + 1}.  The symmetric-gauge weight |z|^2/4 is
    the one consistent with the lattice identity
    e^{ib(x+y)/2} e^{-y^2/2} = -G(r) e^{z^2/4} e^{-|z|^2/4} (whose modulus is
    e^{-y^2/2}); with it the truncated sum vanishes for any polynomial f.
    Evaluated in arbitrary precision since the exact sum drops far below
    double-precision rounding noise for the radii of interest.  `degree`
    bounds the polynomial degree of f (<= 4) so the truncation-error picture
    stays simple.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if degree > 4:
        raise ValueError("polynomial degree capped at 4")
    n_max = int(math.ceil(R / B_SPACING)) + 1
    # Working precision must cover e^{-R^2/4} with room to spare.
    dps = int(R * R / 4.0 / math.log(10.0)) + 30
    with mpmath.workdps(dps):
        b = mpmath.sqrt(2 * mpmath.pi)
        total = mpmath.mpc(0)
        for n1 in range(-n_max, n_max + 1):
            for n2 in range(-n_max, n_max + 1):
                x = n1 * b
                y = n2 * b
                if x * x + y * y >= R * R:
                    continue
                g = (-1) ** (n1 * n2 + n1 + n2 + 1)
                z = mpmath.mpc(x, y)
                total += g * f(z) * mpmath.e ** (-(x * x + y * y) / 4)
        return float(mpmath.fabs(total))
