"""Command-line front end: JSON state specs in, JSON/CSV analysis out.

Subcommands: ``analyze`` (per-cut criteria report), ``sweep`` (CSV grids for
threshold and realignment curves), ``witness`` (parameter search + detection
fit), ``multipartite`` (per-cut table, minimum witness parameter, PPT-profile
design).  Exit codes: 0 ok, 2 parse error, 3 resource limit, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .criteria import (
    distillability_certificate,
    p_gamma_closed,
    p_gamma_exact,
    pt_spectrum,
    realignment_norm,
)
from .cuts import Bipartition, enumerate_cuts
from .multipartite import design_ppt_profile, multipartite_report
from .states import (
    EnsembleSpec,
    PureFactorState,
    build_named,
    build_rho_p,
    pure_state,
    schmidt,
    schmidt_state,
)
from .tensor import DEFAULT_DIM_CAP, DimensionCapExceeded
from .witnesses import (
    SeesawConfig,
    build_W_eps,
    build_W_gen,
    build_W_tilde,
    epsilon_estimate,
    epsilon_estimate_cut,
    expectation,
    sample_product_expectations,
)

CLASS_SEPARABLE = "separable for all p"
CLASS_NPT_ALWAYS = "NPT entangled for all p>0"
CLASS_PPT_ENTANGLED = "PPT entangled"
CLASS_NPT_DISTILLABLE = "NPT entangled, distillable"
CLASS_UNDECIDED = "PPT — entanglement undecided by this toolkit"
CLASS_P_ZERO = "separable (p=0)"


class SpecParseError(ValueError):
    """Raised when a state-spec document cannot be interpreted."""


def _round(x: float) -> float:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return float(f"{x:.12g}")


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.12g}"


def _parse_factor(entry, index: int) -> PureFactorState:
    if not isinstance(entry, dict):
        raise SpecParseError(f"factor {index}: expected an object, got {type(entry).__name__}")
    try:
        if "named" in entry:
            kind = entry["named"]
            params = {k: v for k, v in entry.items() if k != "named"}
            return build_named(kind, **params)
        if "schmidt" in entry:
            coeffs = np.asarray(entry["schmidt"], dtype=float)
            norm = np.linalg.norm(coeffs)
            if abs(norm - 1.0) > 1e-6:
                print(
                    f"warning: factor {index}: schmidt coefficients renormalized "
                    f"(correction {abs(norm - 1.0):.3e})",
                    file=sys.stderr,
                )
            return schmidt_state(coeffs)
        if "party_dims" in entry and "amplitudes" in entry:
            dims = [int(d) for d in entry["party_dims"]]
            pairs = np.asarray(entry["amplitudes"], dtype=float)
            if pairs.ndim != 2 or pairs.shape[1] != 2:
                raise SpecParseError(f"factor {index}: amplitudes must be [re, im] pairs")
            amps = pairs[:, 0] + 1j * pairs[:, 1]
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > 1e-6:
                print(
                    f"warning: factor {index}: amplitudes renormalized (correction {abs(norm - 1.0):.3e})",
                    file=sys.stderr,
                )
            return pure_state(dims, amps, normalize=True)
    except SpecParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"factor {index}: {exc}") from exc
    raise SpecParseError(
        f"factor {index}: need one of 'named', 'schmidt', or 'party_dims'+'amplitudes'"
    )


def load_spec(path: str) -> EnsembleSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "factors" not in doc or "p" not in doc:
        raise SpecParseError("spec document needs 'factors' and 'p' fields")
    factors = [_parse_factor(e, i) for i, e in enumerate(doc["factors"])]
    try:
        return EnsembleSpec(tuple(factors), float(doc["p"]))
    except (TypeError, ValueError) as exc:
        raise SpecParseError(str(exc)) from exc


def _load_spec_for(args) -> EnsembleSpec:
    spec = load_spec(args.spec)
    if getattr(args, "p", None) is not None:
        try:
            spec = spec.with_p(args.p)
        except ValueError as exc:
            raise SpecParseError(str(exc)) from exc
    return spec


def _classification(spec: EnsembleSpec, cut: Bipartition, ppt: bool) -> str:
    ranks = [schmidt(f, cut).rank for f in spec.factors]
    if all(r == 1 for r in ranks):
        return CLASS_SEPARABLE
    if any(r == 1 for r in ranks):
        return CLASS_NPT_ALWAYS
    if spec.n_factors == 1:
        return "PPT — separable (single-factor family)" if ppt else CLASS_NPT_DISTILLABLE
    if spec.n_factors == 2:
        mus = [schmidt(f, cut).coefficients for f in spec.factors]
        n = max(m.size for m in mus)
        pads = [np.pad(m, (0, n - m.size)) for m in mus]
        if np.abs(pads[0] - pads[1]).max() <= 1e-9:
            return CLASS_NPT_DISTILLABLE if not ppt else CLASS_UNDECIDED
    if spec.p == 0.0:
        return CLASS_P_ZERO
    return CLASS_PPT_ENTANGLED if ppt else CLASS_NPT_DISTILLABLE


def _nontrivial_witness(spec: EnsembleSpec, cut: Bipartition) -> bool:
    ranks = [schmidt(f, cut).rank for f in spec.factors]
    if spec.n_factors == 1:
        return False
    if spec.n_factors >= 3:
        return any(r > 1 for r in ranks)
    mus = [schmidt(f, cut).coefficients for f in spec.factors]
    n = max(m.size for m in mus)
    pads = [np.pad(m, (0, n - m.size)) for m in mus]
    return bool(np.abs(pads[0] - pads[1]).max() > 1e-9)


def _cut_entry(spec, rho, cut, config):
    rep = pt_spectrum(rho, cut)
    min_eig = float(rep.eigenvalues[0])
    ppt = min_eig >= -1e-10
    threshold = p_gamma_exact(spec, cut)
    rnorm = realignment_norm(rho, cut)
    cert = distillability_certificate(rho, cut)
    nontrivial = _nontrivial_witness(spec, cut)
    if spec.n_factors >= 2:
        eps = epsilon_estimate_cut(spec.factors, cut, config)
        eps_entry = {
            "upper_bound": _round(eps.upper_bound),
            "restarts_used": eps.restarts_used,
            "converged": eps.converged,
            "note": eps.note,
        }
        witness_expectation = _round(-spec.p * eps.upper_bound)
    else:
        eps_entry = None
        witness_expectation = 0.0
    entry = {
        "cut": cut.label,
        "per_factor_schmidt": [[_round(c) for c in schmidt(f, cut).coefficients] for f in spec.factors],
        "ppt": ppt,
        "min_pt_eigenvalue": _round(min_eig),
        "p_gamma": _round(threshold.p_gamma),
        "p_gamma_method": threshold.method,
        "p_gamma_reason": threshold.reason,
        "realignment_norm": _round(rnorm),
        "realignment_detects": bool(rnorm > 1.0 + 1e-10),
        "distillability_certificate": (
            None
            if cert is None
            else {
                "value": _round(cert.value),
                "schmidt_rank_across_cut": cert.schmidt_rank_across_cut,
            }
        ),
        "nontrivial_witness": nontrivial,
        "epsilon": eps_entry,
        "witness_expectation": witness_expectation,
        "classification": _classification(spec, cut, ppt),
    }
    return entry


def cmd_analyze(args) -> int:
    spec = _load_spec_for(args)
    if spec.dim > args.max_dim:
        raise DimensionCapExceeded(spec.dim, args.max_dim)
    rho = build_rho_p(spec, dim_cap=args.max_dim)
    config = SeesawConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
    if args.cut:
        cuts = [Bipartition.parse(args.cut, spec.n_parties)]
    else:
        cuts = enumerate_cuts(spec.n_parties)
    report = {
        "command": "analyze",
        "p": _round(spec.p),
        "n_parties": spec.n_parties,
        "n_factors": spec.n_factors,
        "composite_dim": spec.dim,
        "factors": [
            {"index": i, "party_dims": list(f.party_dims), "dim": f.dim}
            for i, f in enumerate(spec.factors)
        ],
        "cuts": [_cut_entry(spec, rho, cut, config) for cut in cuts],
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_HEADER = {
    "fig2": "mu1_1,mu1_2,p_gamma,realignment_norm,min_pt_eigenvalue,witness_expectation",
    "fig3": "mu1,p_gamma,realignment_norm,min_pt_eigenvalue,witness_expectation",
    "realignment_M": "M,p_gamma,realignment_norm,min_pt_eigenvalue,witness_expectation",
    "custom": "p,p_gamma,realignment_norm,min_pt_eigenvalue,witness_expectation",
}


def _two_qubit(mu1: float) -> PureFactorState:
    return schmidt_state((mu1, float(np.sqrt(max(1.0 - mu1 * mu1, 0.0)))))


def _fig2_row(point, config):
    mu_a, mu_b = point
    psi1, psi2 = _two_qubit(mu_a), _two_qubit(mu_b)
    p_gamma = p_gamma_closed(psi1, psi2).p_gamma
    spec = EnsembleSpec((psi1, psi2), p_gamma)
    rho = build_rho_p(spec)
    rnorm = realignment_norm(rho)
    min_eig = float(pt_spectrum(rho).eigenvalues[0])
    eps = epsilon_estimate_cut(spec.factors, Bipartition((0,), (1,)), config)
    return (mu_a, mu_b, p_gamma, rnorm, min_eig, -p_gamma * eps.upper_bound)


def _fig3_row(mu, config):
    psi = _two_qubit(mu)
    p_gamma = p_gamma_closed(psi, psi).p_gamma
    spec = EnsembleSpec((psi, psi), p_gamma)
    rho = build_rho_p(spec)
    rnorm = realignment_norm(rho)
    min_eig = float(pt_spectrum(rho).eigenvalues[0])
    eps = epsilon_estimate_cut(spec.factors, Bipartition((0,), (1,)), config)
    return (mu, p_gamma, rnorm, min_eig, -p_gamma * eps.upper_bound)


def _realignment_m_row(m, config):
    from .states import max_ent

    factors = tuple(max_ent(2) for _ in range(m))
    spec0 = EnsembleSpec(factors, 0.0)
    p_gamma = p_gamma_exact(spec0).p_gamma
    spec = spec0.with_p(p_gamma)
    rho = build_rho_p(spec)
    rnorm = realignment_norm(rho)
    min_eig = float(pt_spectrum(rho).eigenvalues[0])
    if m >= 2:
        eps = epsilon_estimate_cut(factors, Bipartition((0,), (1,)), config)
        wexp = -p_gamma * eps.upper_bound
    else:
        wexp = 0.0
    return (m, p_gamma, rnorm, min_eig, wexp)


def _custom_row(p, spec, cut, eps_ub, p_gamma):
    rho = build_rho_p(spec.with_p(p))
    rnorm = realignment_norm(rho, cut)
    min_eig = float(pt_spectrum(rho, cut).eigenvalues[0])
    return (p, p_gamma, rnorm, min_eig, -p * eps_ub)


def cmd_sweep(args) -> int:
    config = SeesawConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
    lo = 1.0 / np.sqrt(2.0)
    if args.kind == "fig2":
        mus = np.linspace(lo, 1.0, args.grid, endpoint=False)
        points = [(a, b) for a in mus for b in mus]
        rows = _parallel_map(lambda pt: _fig2_row(pt, config), points, args.jobs)
    elif args.kind == "fig3":
        mus = np.linspace(lo, 1.0, args.grid, endpoint=False)
        rows = _parallel_map(lambda mu: _fig3_row(mu, config), list(mus), args.jobs)
    elif args.kind == "realignment_M":
        rows = [_realignment_m_row(m, config) for m in range(1, args.m_max + 1)]
    elif args.kind == "custom":
        if not args.spec:
            raise SpecParseError("--spec is required for a custom sweep")
        spec = load_spec(args.spec)
        cut = (
            Bipartition.parse(args.cut, spec.n_parties)
            if args.cut
            else enumerate_cuts(spec.n_parties)[0]
        )
        p_gamma = p_gamma_exact(spec, cut).p_gamma
        if spec.n_factors >= 2:
            eps_ub = epsilon_estimate_cut(spec.factors, cut, config).upper_bound
        else:
            eps_ub = 0.0
        ps = np.linspace(0.0, 1.0, args.grid)
        rows = _parallel_map(lambda p: _custom_row(p, spec, cut, eps_ub, p_gamma), list(ps), args.jobs)
    else:
        raise SpecParseError(f"unknown sweep kind {args.kind!r}")

    lines = [SWEEP_HEADER[args.kind]]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    text = "\n".join(lines) + "\n"
    try:
        with open(args.out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 3
    return 0


def _parallel_map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# witness fit
# ---------------------------------------------------------------------------


def _rank_split_grouping(ranks):
    """Two-block split of factor indices whose Schmidt-rank products differ."""
    m = len(ranks)
    for mask in range(1, 2 ** (m - 1)):
        block_a = [i for i in range(m) if mask & (1 << i)]
        block_b = [i for i in range(m) if i not in block_a]
        prod_a = int(np.prod([ranks[i] for i in block_a]))
        prod_b = int(np.prod([ranks[i] for i in block_b]))
        if block_a and block_b and prod_a != prod_b:
            return block_a, block_b, prod_a, prod_b
    return None


def _serialize_matrix(mat) -> dict:
    arr = np.asarray(mat, dtype=np.complex128)
    return {
        "shape": list(arr.shape),
        "entries": [[_round(v.real), _round(v.imag)] for v in arr.reshape(-1)],
    }


def cmd_witness(args) -> int:
    spec = _load_spec_for(args)
    if spec.dim > args.max_dim:
        raise DimensionCapExceeded(spec.dim, args.max_dim)
    if spec.n_factors < 2:
        raise SpecParseError("the witness command needs at least 2 factor states")
    config = SeesawConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
    cut = (
        Bipartition.parse(args.cut, spec.n_parties)
        if args.cut
        else enumerate_cuts(spec.n_parties)[0]
    )
    kind = args.kind
    if kind == "auto":
        kind = "W_eps" if spec.n_factors == 2 else "W_gen"

    if kind == "W_tilde":
        if spec.n_factors != 2:
            raise SpecParseError("W_tilde needs exactly 2 factor states")
        eps = epsilon_estimate(spec.factors[0], spec.factors[1], kind="W_tilde", config=config)
    else:
        eps = epsilon_estimate_cut(spec.factors, cut, config)

    eps_used = 0.9 * eps.upper_bound
    if kind == "W_eps":
        w = build_W_eps(spec.factors[0], spec.factors[1], eps_used)
    elif kind == "W_tilde":
        w = build_W_tilde(spec.factors[0], spec.factors[1], eps_used)
    else:
        w = build_W_gen(spec.factors, eps_used)
    rho = build_rho_p(spec, dim_cap=args.max_dim)
    expec = expectation(w, rho)
    vals = sample_product_expectations(w, args.samples, args.seed, cut)

    grouping = None
    if spec.n_factors >= 3:
        ranks = [schmidt(f, cut).rank for f in spec.factors]
        split = _rank_split_grouping(ranks)
        if split is not None:
            block_a, block_b, prod_a, prod_b = split
            grouping = {
                "block_a": block_a,
                "block_b": block_b,
                "rank_products": [prod_a, prod_b],
            }

    report = {
        "command": "witness",
        "kind": kind,
        "cut": cut.label,
        "p": _round(spec.p),
        "epsilon_upper_bound": _round(eps.upper_bound),
        "restarts_used": eps.restarts_used,
        "converged": eps.converged,
        "note": eps.note,
        "safety_factor": 0.9,
        "epsilon_used": _round(eps_used),
        "expectation_on_rho_p": _round(expec),
        "product_positivity": {
            "samples": int(args.samples),
            "min_expectation": _round(float(vals.min())),
            "negative_count": int((vals < -1e-9).sum()),
        },
        "grouping": grouping,
        "certificate": (
            None
            if eps.certificate is None
            else {
                "alpha": _serialize_matrix(eps.certificate[0]),
                "beta": _serialize_matrix(eps.certificate[1]),
            }
        ),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------------------
# multipartite report
# ---------------------------------------------------------------------------


def cmd_multipartite(args) -> int:
    spec = _load_spec_for(args)
    if spec.n_parties < 3:
        raise SpecParseError("the multipartite command needs at least 3 parties")
    if spec.dim > args.max_dim:
        raise DimensionCapExceeded(spec.dim, args.max_dim)
    config = SeesawConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
    reports, eps_tilde = multipartite_report(spec, config)
    profile = design_ppt_profile(spec.factors, [r.cut for r in reports])

    all_product = all(
        all(schmidt(f, r.cut).rank == 1 for f in spec.factors) for r in reports
    )
    npt_cuts = [r.cut.label for r in reports if r.p_gamma.p_gamma == 0.0]
    ppt_all = all(r.ppt_at_p for r in reports)
    if all_product:
        summary = "separable; nothing to certify"
    elif npt_cuts:
        summary = "NPT for all p>0 on cuts: " + ", ".join(npt_cuts)
    elif eps_tilde > 0 and ppt_all:
        summary = "PPT all cuts; genuine multipartite entanglement certified"
    elif eps_tilde > 0:
        summary = "genuine multipartite entanglement certified; NPT at p on some cuts"
    else:
        summary = "undecided by the cut witnesses"

    report = {
        "command": "multipartite",
        "p": _round(spec.p),
        "n_parties": spec.n_parties,
        "epsilon_tilde": _round(eps_tilde),
        "ppt_on_all_cuts": ppt_all,
        "witness_expectation_at_tilde": _round(-spec.p * eps_tilde),
        "design": {
            "p_max": _round(profile.p_max),
            "npt_cuts": [c.label for c in profile.npt_cuts],
        },
        "cuts": [
            {
                "cut": r.cut.label,
                "per_factor_schmidt": [[_round(c) for c in mu] for mu in r.per_factor_schmidt],
                "p_gamma": _round(r.p_gamma.p_gamma),
                "p_gamma_reason": r.p_gamma.reason,
                "ppt_at_p": r.ppt_at_p,
                "epsilon_upper_bound": _round(r.epsilon.upper_bound),
                "epsilon_note": r.epsilon.note,
            }
            for r in reports
        ],
        "summary": summary,
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec_required=True):
        if spec_required:
            p.add_argument("spec", help="JSON state-spec file")
        p.add_argument("--cut", default=None, help="bipartition like '0|12' (default: all cuts)")
        p.add_argument("--p", type=float, default=None, help="override the spec file's mixing parameter")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=200)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-dim", type=int, default=DEFAULT_DIM_CAP)

    p_an = sub.add_parser("analyze", help="per-cut criteria report (JSON to stdout)")
    common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_sw = sub.add_parser("sweep", help="CSV parameter sweeps")
    p_sw.add_argument("--kind", required=True, choices=["fig2", "fig3", "realignment_M", "custom"])
    p_sw.add_argument("--out", required=True, help="output CSV path")
    p_sw.add_argument("--grid", type=int, default=21, help="points per axis")
    p_sw.add_argument("--m-max", type=int, default=5, help="largest factor count for realignment_M")
    p_sw.add_argument("--spec", default=None, help="JSON state-spec file (custom sweep)")
    p_sw.add_argument("--cut", default=None)
    p_sw.add_argument("--seed", type=int, default=0)
    p_sw.add_argument("--restarts", type=int, default=24)
    p_sw.add_argument("--tol", type=float, default=1e-12)
    p_sw.add_argument("--jobs", type=int, default=1)
    p_sw.add_argument("--max-dim", type=int, default=DEFAULT_DIM_CAP)
    p_sw.set_defaults(func=cmd_sweep)

    p_wi = sub.add_parser("witness", help="witness parameter search and detection fit")
    common(p_wi)
    p_wi.add_argument("--kind", default="auto", choices=["auto", "W_eps", "W_tilde", "W_gen"])
    p_wi.add_argument("--samples", type=int, default=2000, help="product vectors for positivity diagnostics")
    p_wi.set_defaults(func=cmd_witness)

    p_mu = sub.add_parser("multipartite", help="per-cut table and minimum witness parameter")
    common(p_mu)
    p_mu.set_defaults(func=cmd_multipartite)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
