"""Chiral spin liquid laboratory: exact enumeration, Monte Carlo, and code analysis."""

from cslab.lattice import LatticeSpec, Site, build_lattice, translate, bond_displacement
from cslab.theta import LogAmplitude, log_theta1, log_theta1_sq
from cslab.wavefunction import (
    SpinConfiguration,
    WaveFunctionSpec,
    com_offset,
    make_wavefunction,
    log_psi,
    log_phi,
    ulsm_config_phase,
    sum_rule_residual,
)

__all__ = [
    "LatticeSpec",
    "Site",
    "build_lattice",
    "translate",
    "bond_displacement",
    "LogAmplitude",
    "log_theta1",
    "log_theta1_sq",
    "SpinConfiguration",
    "WaveFunctionSpec",
    "com_offset",
    "make_wavefunction",
    "log_psi",
    "log_phi",
    "ulsm_config_phase",
    "sum_rule_residual",
]
