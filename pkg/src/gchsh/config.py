"""Centralized numerical tolerances.

Every module pulls its defaults from TOLS so a tolerance is defined exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12        # max |M - M^dag| entry
    trace: float = 1e-10            # |tr(rho) - 1|
    psd: float = 1e-10              # eigenvalues of a density matrix may dip to -psd
    unit_norm: float = 1e-12        # pure-state normalization
    eig_reconstruction: float = 1e-10
    kraus_completeness: float = 1e-12
    fidelity_clamp: float = 1e-12
    feasibility: float = 1e-10      # threshold <= lambda_max + feasibility
    sdp_boundary: float = 1e-9      # |threshold - lambda_max| below which the SDP is a boundary case
    sdp_constraint: float = 1e-8    # witness must satisfy the score constraint this tightly
    sdp_gap: float = 1e-7           # certified duality gap
    golden_section: float = 1e-10   # dual bracket width at termination
    eigenspace_cluster: float = 1e-8  # eigenvalues within this of the bottom form the witness space
    angle_param_dominance: float = 1e-12
    region: float = 1e-12           # slack on the normalized-correlator region boundary
    theta_match: float = 1e-9       # matching a scan theta against a stored curve


TOLS = Tolerances()
