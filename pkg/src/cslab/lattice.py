"""Periodic N1 x N2 square lattice geometry in magnetic-length units.

The lattice spacing is b = sqrt(2*pi) so that one flux quantum threads each
plaquette.  Sites are labeled (n1, n2) with n1 = -N1/2+1, ..., N1/2 and
n2 = 1, ..., N2.  This labeling fixes the "seam": the x discontinuity between
the column n1 = N1/2 and the column n1 = -N1/2+1 induced by the periodic
boundary conditions.  Site indices are row-major in (n2, n1) so that
configuration bitmasks are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

B_SPACING = math.sqrt(2.0 * math.pi)


class LatticeError(ValueError):
    """Invalid lattice geometry."""


class AmbiguousDisplacementError(ValueError):
    """More than one periodic image of a bond satisfies the length bound."""


@dataclass(frozen=True)
class Site:
    n1: int
    n2: int

    @property
    def x(self) -> float:
        return self.n1 * B_SPACING

    @property
    def y(self) -> float:
        return self.n2 * B_SPACING

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class LatticeSpec:
    N1: int
    N2: int

    @property
    def b(self) -> float:
        return B_SPACING

    @property
    def L1(self) -> float:
        return self.N1 * B_SPACING

    @property
    def L2(self) -> float:
        return self.N2 * B_SPACING

    @property
    def tau(self) -> complex:
        return complex(0.0, self.N2 / self.N1)

    @property
    def n_sites(self) -> int:
        return self.N1 * self.N2

    @property
    def n_bosons(self) -> int:
        return self.N1 * self.N2 // 2

    def site(self, index: int) -> Site:
        """Site for a row-major index in [0, N1*N2)."""
        if not 0 <= index < self.n_sites:
            raise IndexError(f"site index {index} out of range")
        n1 = index % self.N1 - self.N1 // 2 + 1
        n2 = index // self.N1 + 1
        return Site(n1, n2)

    def index(self, site: Site) -> int:
        """Row-major index of a site given by canonical labels."""
        if not (-self.N1 // 2 + 1 <= site.n1 <= self.N1 // 2):
            raise IndexError(f"n1={site.n1} outside canonical range")
        if not (1 <= site.n2 <= self.N2):
            raise IndexError(f"n2={site.n2} outside canonical range")
        return (site.n2 - 1) * self.N1 + (site.n1 + self.N1 // 2 - 1)

    def sites(self) -> list[Site]:
        return [self.site(i) for i in range(self.n_sites)]

    def n1_of_index(self) -> np.ndarray:
        """n1 label for every site index."""
        idx = np.arange(self.n_sites)
        return idx % self.N1 - self.N1 // 2 + 1

    def n2_of_index(self) -> np.ndarray:
        """n2 label for every site index."""
        return np.arange(self.n_sites) // self.N1 + 1


def build_lattice(N1: int, N2: int) -> LatticeSpec:
    """Validated lattice constructor; N1 must be even and both sides >= 2."""
    if N1 % 2 != 0:
        raise LatticeError(f"N1={N1} must be even")
    if N1 < 2 or N2 < 2:
        raise LatticeError(f"lattice {N1}x{N2} too small; need N1, N2 >= 2")
    return LatticeSpec(N1, N2)


def translate_index(spec: LatticeSpec, index: int, direction: str) -> int:
    """Shift one site by one lattice vector with periodic wraparound."""
    s = spec.site(index)
    if direction == "x":
        n1 = s.n1 + 1
        if n1 > spec.N1 // 2:
            n1 = -spec.N1 // 2 + 1
        return spec.index(Site(n1, s.n2))
    if direction == "y":
        n2 = s.n2 + 1
        if n2 > spec.N2:
            n2 = 1
        return spec.index(Site(s.n1, n2))
    raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def translation_permutation(spec: LatticeSpec, direction: str) -> np.ndarray:
    """Permutation array p with p[i] = index of site i shifted by one vector."""
    return np.array(
        [translate_index(spec, i, direction) for i in range(spec.n_sites)],
        dtype=np.int64,
    )


def translate(spec: LatticeSpec, config, direction: str):
    """Translate every up-spin site of a configuration by one lattice vector."""
    from cslab.wavefunction import SpinConfiguration

    perm = translation_permutation(spec, direction)
    return SpinConfiguration(tuple(sorted(int(perm[i]) for i in config.up_sites)))


def bond_displacement(
    spec: LatticeSpec,
    a: Site,
    b: Site,
    max_dx: float,
    max_dy: float | None = None,
) -> tuple[float, float]:
    """Unique signed displacement b - a among periodic images with |dx| <= max_dx.

    The resolved displacement decides unambiguously whether a bond wraps the
    seam.  Raises AmbiguousDisplacementError when two images tie (which happens
    whenever 2*max_dx >= L1, and analogously in y when a y bound is given).
    """
    if a == b:
        raise ValueError("bond endpoints must differ")
    dn1 = _resolve_axis(b.n1 - a.n1, spec.N1, max_dx / B_SPACING, "x")
    if max_dy is None:
        dn2 = _minimal_image(b.n2 - a.n2, spec.N2)
    else:
        dn2 = _resolve_axis(b.n2 - a.n2, spec.N2, max_dy / B_SPACING, "y")
    return dn1 * B_SPACING, dn2 * B_SPACING


def _minimal_image(d: int, period: int) -> int:
    d %= period
    if 2 * d > period:
        d -= period
    return d


def _resolve_axis(d: int, period: int, bound: float, axis: str) -> int:
    c1 = d % period
    c2 = c1 - period
    if abs(c1) == abs(c2):
        # Exactly half a period: both wrappings are equally short, which can
        # only be admissible when 2*bound >= period.
        if abs(c1) <= bound + 1e-9:
            raise AmbiguousDisplacementError(
                f"two periodic images satisfy the {axis} bound for displacement {d}"
            )
        raise ValueError(f"no periodic image within the {axis} bound")
    best = c1 if abs(c1) < abs(c2) else c2
    if abs(best) > bound + 1e-9:
        raise ValueError(f"no periodic image within the {axis} bound")
    return best
