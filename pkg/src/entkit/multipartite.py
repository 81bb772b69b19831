"""Per-cut entanglement reports for N-party ensembles.

A single ensemble yields one mixed state but 2^(N-1) - 1 inequivalent cuts;
each cut gets its own PPT threshold and witness-parameter estimate.  The
minimum of the per-cut estimates, when positive, turns the M-factor witness
into a detector that no biseparable state can trigger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import PptThreshold, is_ppt, p_gamma_exact
from .cuts import Bipartition, enumerate_cuts
from .states import EnsembleSpec, MixedState, build_rho_p, schmidt
from .witnesses import EpsilonEstimate, SeesawConfig, epsilon_estimate_cut


@dataclass
class CutReport:
    """Entanglement diagnostics of one bipartite cut of the ensemble."""

    cut: Bipartition
    per_factor_schmidt: tuple[np.ndarray, ...]
    p_gamma: PptThreshold
    epsilon: EpsilonEstimate
    ppt_at_p: bool


def cut_report(
    spec: EnsembleSpec,
    cut: Bipartition,
    config: SeesawConfig | None = None,
    rho: MixedState | None = None,
) -> CutReport:
    """Schmidt data, PPT threshold, eps estimate and PPT flag for one cut."""
    if rho is None:
        rho = build_rho_p(spec)
    per_factor = tuple(schmidt(f, cut).coefficients for f in spec.factors)
    threshold = p_gamma_exact(spec, cut)
    eps = epsilon_estimate_cut(spec.factors, cut, config)
    return CutReport(
        cut=cut,
        per_factor_schmidt=per_factor,
        p_gamma=threshold,
        epsilon=eps,
        ppt_at_p=is_ppt(rho, cut),
    )


def multipartite_report(
    spec: EnsembleSpec, config: SeesawConfig | None = None
) -> tuple[list[CutReport], float]:
    """All canonical cut reports plus the minimum per-cut eps estimate."""
    if spec.n_parties < 3:
        raise ValueError("multipartite reports need at least 3 parties")
    rho = build_rho_p(spec)
    reports = [cut_report(spec, cut, config, rho) for cut in enumerate_cuts(spec.n_parties)]
    eps_tilde = min(r.epsilon.upper_bound for r in reports)
    return reports, eps_tilde


def epsilon_tilde(spec: EnsembleSpec, config: SeesawConfig | None = None) -> float:
    """Minimum over all cuts of the witness-parameter estimate.

    When positive, the single M-factor witness with this parameter detects the
    ensemble's entanglement across every cut at once, certifying genuine
    N-party entanglement for every p > 0.
    """
    _, eps = multipartite_report(spec, config)
    return eps


@dataclass
class PptProfile:
    """Largest p that is PPT on all requested cuts, plus per-cut detail."""

    p_max: float
    thresholds: dict[Bipartition, PptThreshold]
    npt_cuts: tuple[Bipartition, ...]


def design_ppt_profile(factors, requested_ppt_cuts) -> PptProfile:
    """Find the largest p keeping the family PPT on every requested cut.

    Cuts where some (but not all) factors are cut-separable admit no PPT
    window at p > 0; they are listed and force p_max = 0.
    """
    factors = tuple(factors)
    spec0 = EnsembleSpec(factors, 0.0)
    thresholds: dict[Bipartition, PptThreshold] = {}
    npt = []
    p_max = 1.0
    for cut in requested_ppt_cuts:
        th = p_gamma_exact(spec0, cut)
        thresholds[cut] = th
        p_max = min(p_max, th.p_gamma)
        if th.p_gamma == 0.0:
            npt.append(cut)
    return PptProfile(p_max=p_max, thresholds=thresholds, npt_cuts=tuple(npt))
