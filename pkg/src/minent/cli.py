"""Command-line front end.

Subcommands run the library's check suites with a validated
configuration, print one line per check, and write a canonical report
document whose bytes depend only on the configuration and seed.

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration
error, 3 a solver or estimator failed to converge.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .reports import ReportDocument, write_csv

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_CONFIG = 2
EXIT_NOCONV = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="minent",
        description="numerical checks for minimal-entropy product geometry",
    )
    p.add_argument("--config", metavar="PATH", help="INI configuration file")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument(
        "--out",
        metavar="DIR",
        help="output directory (default: $MINENT_OUT if set, else none)",
    )
    p.add_argument(
        "--json", action="store_true", help="print the report JSON to stdout"
    )
    p.add_argument(
        "--csv", action="store_true", help="write sweep tables as CSV"
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("entropy", help="closed-form profile table")

    g = sub.add_parser("growth", help="numeric ball-volume growth")
    g.add_argument("--rho-max", type=float, help="override the upper radius")

    b = sub.add_parser("barycenter", help="solve and check a random configuration")
    b.add_argument("--quad-count", type=int, help="boundary quadrature size")
    b.add_argument("--tol", type=float, help="solver gradient tolerance")

    sub.add_parser("bcg", help="determinant inequality campaign")
    sub.add_parser("natural-map", help="sphere-map energy campaign")

    s = sub.add_parser("shortcut", help="shortcut-metric lab")
    s.add_argument("--eta", type=float, action="append", help="add an eta value")
    s.add_argument("--rho-max", type=float, help="override the sweep upper radius")

    sub.add_parser("ghnet", help="net-graph approximation toolkit")
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "quad_count", None) is not None:
        cfg.quad_count = args.quad_count
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "rho_max", None) is not None:
        if args.subcommand == "growth":
            cfg.rho_hi = args.rho_max
        else:
            cfg.sc_rho_hi = args.rho_max
    if getattr(args, "eta", None):
        cfg.etas = tuple(args.eta)
    if args.out is not None:
        cfg.out_dir = args.out
    elif cfg.out_dir is None:
        cfg.out_dir = os.environ.get("MINENT_OUT") or None
    if args.csv:
        cfg.write_csv = True
    return cfg.validate()


# -- subcommand bodies -----------------------------------------------------


def _run_entropy(cfg: RunConfig, doc: ReportDocument) -> int:
    from .products import min_entropy_profile

    prof = min_entropy_profile(cfg.dims, cfg.entropies)
    rep = prof.consistency_report()
    print(
        f"dims={list(cfg.dims)} entropies={list(cfg.entropies)} -> "
        f"h_min={prof.h_min:.6f} alpha=({', '.join(f'{a:.6f}' for a in prof.alpha)}) "
        f"gm_factor={prof.gm_factor:.6f}"
    )
    ok = rep["entropy_identity_error"] <= 1e-9 and rep["volume_normalization_error"] <= 1e-9
    doc.add(
        "profile-table",
        "profile-closed-form",
        {"dims": cfg.dims, "entropies": cfg.entropies},
        {
            "h_min": prof.h_min,
            "alpha": prof.alpha,
            "gm_factor": prof.gm_factor,
        },
        True,
    )
    doc.add(
        "profile-identities",
        "profile-identity",
        {},
        rep,
        ok,
        tolerance=1e-9,
    )
    _say("profile-identities", ok)
    return EXIT_OK if ok else EXIT_CHECK


def _run_growth(cfg: RunConfig, doc: ReportDocument, csv_dir) -> int:
    from .products import entropy_growth_numeric

    t0 = time.time()
    est = entropy_growth_numeric(
        cfg.dims,
        cfg.rho_lo,
        cfg.rho_hi,
        grid_step=cfg.grid_step,
        seed=cfg.seed,
    )
    doc.time("growth", time.time() - t0)
    target = math.sqrt(sum((d - 1) ** 2 for d in cfg.dims))
    band = cfg.slope_band
    if est.mc_slope_std is not None:
        band = band + 3.0 * est.mc_slope_std
    ok = abs(est.slope - target) <= band
    print(
        f"slope={est.slope:.5f} target={target:.5f} band={band:.4f} "
        f"rms={est.residual_rms:.4f} method={est.method}"
    )
    doc.add(
        "growth-slope",
        "growth-slope",
        {
            "dims": cfg.dims,
            "rho": [cfg.rho_lo, cfg.rho_hi],
            "grid_step": cfg.grid_step,
        },
        {
            "slope": est.slope,
            "target": target,
            "residual_rms": est.residual_rms,
            "mc_slope_std": est.mc_slope_std,
            "method": est.method,
        },
        ok,
        tolerance=band,
    )
    _say("growth-slope", ok)
    if csv_dir:
        write_csv(
            os.path.join(csv_dir, "growth.csv"),
            ["rho", "log_volume"],
            [[float(r), float(v)] for r, v in zip(est.rho, est.log_volume)],
        )
    if est.mc_slope_std is not None and est.mc_slope_std > 0.2:
        return EXIT_NOCONV
    return EXIT_OK if ok else EXIT_CHECK


def _quads_for(cfg: RunConfig, dims):
    from .hyperbolic import boundary_quadrature

    quads = []
    for m in dims:
        if cfg.quad_scheme == "deterministic-sphere" and m > 3:
            quads.append(
                boundary_quadrature(m, cfg.quad_count, "monte-carlo", seed=cfg.seed)
            )
        else:
            quads.append(
                boundary_quadrature(
                    m,
                    cfg.quad_count,
                    cfg.quad_scheme,
                    seed=cfg.seed if cfg.quad_scheme == "monte-carlo" else None,
                )
            )
    return quads


def _run_barycenter(cfg: RunConfig, doc: ReportDocument) -> int:
    from .barycenter import (
        BarycenterProblem,
        NearSingularError,
        jacobian_bound_report,
        random_configuration,
    )
    from .products import min_entropy_profile

    prof = min_entropy_profile(cfg.dims, cfg.entropies)
    rng = np.random.default_rng(cfg.seed)
    config = random_configuration(rng, prof, cfg.n_atoms, spread=cfg.spread)
    quads = _quads_for(cfg, prof.dims)
    problem = BarycenterProblem(config, quads)
    t0 = time.time()
    sol = problem.solve(tol=cfg.tol, max_iter=cfg.max_iter)
    doc.time("solve", time.time() - t0)
    print(
        f"atoms={cfg.n_atoms} converged={sol.converged} "
        f"iterations={sol.iterations} grad={sol.gradient_norm:.3e}"
    )
    doc.add(
        "solve",
        "barycenter-fixed-point",
        {"n_atoms": cfg.n_atoms, "seed": cfg.seed, "tol": cfg.tol},
        {
            "converged": sol.converged,
            "iterations": sol.iterations,
            "gradient_norm": sol.gradient_norm,
        },
        sol.converged,
        tolerance=cfg.tol,
    )
    if not sol.converged:
        _say("solve", False)
        return EXIT_NOCONV
    pair = problem.forms(sol.point)
    tr_err = abs(pair.trace_h() - 1.0)
    comp_err = max(
        float(np.abs(k - (np.eye(k.shape[0]) - h)).max())
        for k, h in zip(pair.factor_k, pair.factor_h)
    )
    ok_tr = tr_err <= 1e-10
    ok_comp = comp_err <= 1e-10
    doc.add(
        "trace",
        "barycenter-trace",
        {},
        {"trace_error": tr_err},
        ok_tr,
        tolerance=1e-10,
    )
    doc.add(
        "complement",
        "barycenter-complement",
        {},
        {"max_entry_error": comp_err},
        ok_comp,
        tolerance=1e-10,
    )
    _say("trace", ok_tr)
    _say("complement", ok_comp)
    try:
        rep = jacobian_bound_report(config, quads, solution=sol)
        ok_j = rep.holds
        doc.add(
            "jacobian",
            "jacobian-bound",
            {},
            {
                "estimate": rep.estimate,
                "bound": rep.bound,
                "h_eigen_max": rep.h_eigen_max,
            },
            ok_j,
        )
        _say("jacobian", ok_j)
    except NearSingularError as e:
        doc.add("jacobian", "jacobian-bound", {}, {"rejected": str(e)}, False)
        _say("jacobian", False)
        ok_j = False
    ok = ok_tr and ok_comp and ok_j
    return EXIT_OK if ok else EXIT_CHECK


def _run_bcg(cfg: RunConfig, doc: ReportDocument) -> int:
    from .barycenter import bcg_campaign, bcg_inequality_check

    all_ok = True
    for n in (3, 4, 5):
        camp = bcg_campaign(n, cfg.bcg_count, seed=cfg.seed)
        eq = bcg_inequality_check(np.eye(n) / n, n, n - 1)
        ok = camp["violations"] == 0 and eq.equality_gap <= 1e-9
        all_ok = all_ok and ok
        print(
            f"n={n}: violations={camp['violations']}/{camp['count']} "
            f"max_ratio={camp['max_ratio']:.6f} bound={camp['bound']:.6f} "
            f"equality_gap={eq.equality_gap:.2e}"
        )
        doc.add(
            f"campaign-n{n}",
            "bcg-determinant",
            {"count": cfg.bcg_count, "seed": cfg.seed},
            {
                "violations": camp["violations"],
                "max_ratio": camp["max_ratio"],
                "bound": camp["bound"],
                "equality_gap": eq.equality_gap,
            },
            ok,
            tolerance=1e-9,
        )
        _say(f"campaign-n{n}", ok)
    return EXIT_OK if all_ok else EXIT_CHECK


def _run_natural_map(cfg: RunConfig, doc: ReportDocument) -> int:
    from .barycenter import natural_map_energy
    from .hyperbolic import random_point
    from .products import ProductPoint, min_entropy_profile

    prof = min_entropy_profile(cfg.dims, cfg.entropies)
    c = 1.1 * prof.h_min
    rng = np.random.default_rng(cfg.seed)
    pts = [
        ProductPoint(tuple(random_point(rng, m, cfg.spread) for m in prof.dims))
        for _ in range(max(4, cfg.n_atoms * 2))
    ]
    worst = 0.0
    for _ in range(cfg.draws):
        x = ProductPoint(tuple(random_point(rng, m, 1.0) for m in prof.dims))
        res = natural_map_energy(pts, c, x, prof)
        worst = max(worst, res.energy / res.bound)
    ok = worst <= 1.05
    print(f"draws={cfg.draws} c={c:.5f} worst energy/bound={worst:.5f}")
    doc.add(
        "energy",
        "natural-map-energy",
        {"draws": cfg.draws, "c": c, "seed": cfg.seed},
        {"worst_ratio": worst},
        ok,
        tolerance=1.05,
    )
    _say("energy", ok)
    return EXIT_OK if ok else EXIT_CHECK


def _run_shortcut(cfg: RunConfig, doc: ReportDocument, csv_dir) -> int:
    from .shortcut import (
        ShortcutModel,
        branching_geodesic_demo,
        d_eta_reduced,
        eta_entropy_estimate,
        metric_slack,
        r_c_verify,
        shorter_path_witness,
        turning_angle_threshold,
    )

    ok_all = True
    etas = sorted(set(cfg.etas))
    # corner threshold table and witness sanity on a small grid
    rows = []
    witness_ok = True
    for eta in etas:
        theta0 = turning_angle_threshold(eta) if eta < 1 else 0.0
        rows.append([eta, theta0])
        for alpha in (0.2, 0.4, 0.8, 1.2):
            w = shorter_path_witness(eta, alpha)
            want = math.cos(alpha) < eta
            if (w is not None) != want or (w is not None and w.savings <= 0):
                witness_ok = False
    doc.add(
        "witness",
        "shortcut-turning",
        {"etas": etas},
        {"thresholds": {str(e): r for e, r in rows}},
        witness_ok,
    )
    _say("witness", witness_ok)
    ok_all &= witness_ok

    # metric spot checks on the off-diagonal segment model
    base = ShortcutModel(
        eta=min(etas),
        spacing=cfg.sc_spacing,
        extent=min(cfg.sc_extent, 12.0),
    )
    slack = metric_slack(base)
    d_plain = d_eta_reduced(
        ShortcutModel(eta=1.0, spacing=cfg.sc_spacing, extent=base.extent),
        (0.5, 0.5),
        (5.5, 4.0),
    )
    euclid = math.dist((0.5, 0.5), (5.5, 4.0))
    spot_ok = d_plain <= euclid * (1 + slack) + 1e-12 and d_plain >= euclid - 1e-12
    if min(etas) < 1.0:
        a, b = (2.5, 1.0), (5.5, 1.0)
        d_cheap = d_eta_reduced(base, a, b)
        margin = math.dist(a, b) - d_cheap
        want = (1 - math.sqrt(base.eta)) * 3.0 * (1 - slack)
        spot_ok = spot_ok and margin >= want
    doc.add(
        "metric-spot",
        "shortcut-metric",
        {"slack": slack},
        {"plain_ratio": d_plain / euclid},
        spot_ok,
        tolerance=slack,
    )
    _say("metric-spot", spot_ok)
    ok_all &= spot_ok

    # diagonal wedge
    eta_rc = max([e for e in etas if e < 1.0], default=1.0)
    rc_model = ShortcutModel(
        eta=eta_rc, spacing=cfg.sc_spacing, extent=min(cfg.sc_extent, 12.0)
    )
    rc = r_c_verify(rc_model, cfg.region_c)
    rc_assert = eta_rc >= 0.95 or eta_rc == 1.0
    rc_ok = rc.equal_within_slack if rc_assert else True
    doc.add(
        "region",
        "shortcut-region",
        {"eta": eta_rc, "c": cfg.region_c, "advisory": not rc_assert},
        {
            "equal_within_slack": rc.equal_within_slack,
            "c_max": rc.c_max,
            "violations": len(rc.violations),
        },
        rc_ok,
    )
    _say("region", rc_ok)
    ok_all &= rc_ok

    # growth sweep on the diagonal model
    seg_hi = min(cfg.sc_extent - 2.0, cfg.sc_rho_hi + 2.0)
    sweep_rows = []
    slopes = {}
    for eta in etas:
        model = ShortcutModel(
            eta=eta,
            spacing=cfg.sc_spacing,
            extent=cfg.sc_extent,
            segment=(1.0, seg_hi, 0.0),
            orientation="diagonal",
        )
        est = eta_entropy_estimate(model, cfg.sc_rho_lo, cfg.sc_rho_hi)
        slopes[eta] = est.slope
        sweep_rows.append([eta, est.slope, est.residual_rms])
        print(f"eta={eta}: slope={est.slope:.5f} rms={est.residual_rms:.4f}")
    dec = sorted(etas, reverse=True)
    mono_ok = all(
        slopes[dec[i + 1]] >= slopes[dec[i]] - 1e-9 for i in range(len(dec) - 1)
    )
    target = 2.0 * math.sqrt(2.0)
    band_ok = True
    if 1.0 in slopes:
        band_ok = abs(slopes[1.0] - target) <= 0.08
    doc.add(
        "growth-sweep",
        "shortcut-growth",
        {"etas": etas, "rho": [cfg.sc_rho_lo, cfg.sc_rho_hi]},
        {"slopes": {str(e): s for e, s in slopes.items()}, "monotone": mono_ok},
        mono_ok and band_ok,
    )
    _say("growth-sweep", mono_ok and band_ok)
    ok_all &= mono_ok and band_ok
    if csv_dir:
        write_csv(
            os.path.join(csv_dir, "shortcut_sweep.csv"),
            ["eta", "slope", "slope_rms"],
            sweep_rows,
        )

    # branching demo at the deepest shortcut
    eta_br = min(etas)
    if eta_br <= 0.9:
        br_model = ShortcutModel(
            eta=eta_br, spacing=cfg.sc_spacing, extent=min(cfg.sc_extent, 12.0)
        )
        demo = branching_geodesic_demo(br_model, (2.2, 0.9), (5.8, 0.85))
        br_ok = (
            demo.used
            and demo.length_difference <= 1e-9
            and demo.shared_length > 0
        )
        doc.add(
            "branching",
            "shortcut-branching",
            {"eta": eta_br},
            {
                "used": demo.used,
                "length_difference": demo.length_difference,
                "shared_length": demo.shared_length,
            },
            br_ok,
            tolerance=1e-9,
        )
        _say("branching", br_ok)
        ok_all &= br_ok
    return EXIT_OK if ok_all else EXIT_CHECK


def _run_ghnet(cfg: RunConfig, doc: ReportDocument) -> int:
    from .ghkit import (
        FiniteMetricSpace,
        approximation_check,
        build_net_graph,
        circle_space,
        gh_bounds,
        greedy_net,
        measure_compare,
        torus_grid_space,
    )

    ok_all = True
    for name, target in (
        ("circle", circle_space(cfg.gh_circle)),
        ("torus", torus_grid_space(cfg.gh_torus, cfg.gh_torus)),
    ):
        eps = cfg.gh_eps
        net = greedy_net(target, eps / 4)
        delta = 0.8 * min(eps / 4, eps * eps / (6 * target.diameter))
        graph = build_net_graph(net, net, target, eps, delta, len(net))
        rep = approximation_check(graph, net, target, eps)
        ok = rep.passed
        ok_all &= ok
        print(
            f"{name}: net={len(net)} edges={len(graph.edges)} "
            f"deviation={rep.max_deviation:.5f} (eps={eps})"
        )
        doc.add(
            f"approx-{name}",
            "net-approximation",
            {"eps": eps, "net_size": len(net)},
            {
                "max_deviation": rep.max_deviation,
                "step1": rep.step1_max,
                "step2": rep.step2_max,
            },
            ok,
            tolerance=eps,
        )
        _say(f"approx-{name}", ok)

    two_a = FiniteMetricSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))
    two_b = FiniteMetricSpace(np.array([[0.0, 3.0], [3.0, 0.0]]))
    gb = gh_bounds(two_a, two_b)
    gh_ok = abs(gb.lower - 1.0) <= 1e-12 and abs(gb.upper - 1.0) <= 1e-12
    doc.add(
        "gh-two-point",
        "gh-bounds",
        {},
        {"lower": gb.lower, "upper": gb.upper},
        gh_ok,
        tolerance=1e-12,
    )
    _say("gh-two-point", gh_ok)
    ok_all &= gh_ok

    s = 1.0
    eq = FiniteMetricSpace(s * (np.ones((3, 3)) - np.eye(3)), np.full(3, 1 / 3))
    pt = FiniteMetricSpace(eq.dist, np.array([1.0, 0.0, 0.0]))
    disc = measure_compare(eq, pt)
    mc_ok = abs(disc - 2.0 * s / 3.0) <= 1e-9
    doc.add(
        "measure-equilateral",
        "measure-discrepancy",
        {"side": s},
        {"discrepancy": disc, "expected": 2.0 * s / 3.0},
        mc_ok,
        tolerance=1e-9,
    )
    _say("measure-equilateral", mc_ok)
    ok_all &= mc_ok
    return EXIT_OK if ok_all else EXIT_CHECK


# -- driver ----------------------------------------------------------------


def _say(name: str, ok: bool):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    doc = ReportDocument(subcommand=args.subcommand, config=cfg.to_dict())
    doc.add("config", "config-echo", {}, cfg.to_dict(), True)
    out_dir = cfg.out_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    csv_dir = out_dir if (out_dir and cfg.write_csv) else None

    t0 = time.time()
    try:
        if args.subcommand == "entropy":
            code = _run_entropy(cfg, doc)
        elif args.subcommand == "growth":
            code = _run_growth(cfg, doc, csv_dir)
        elif args.subcommand == "barycenter":
            code = _run_barycenter(cfg, doc)
        elif args.subcommand == "bcg":
            code = _run_bcg(cfg, doc)
        elif args.subcommand == "natural-map":
            code = _run_natural_map(cfg, doc)
        elif args.subcommand == "shortcut":
            code = _run_shortcut(cfg, doc, csv_dir)
        elif args.subcommand == "ghnet":
            code = _run_ghnet(cfg, doc)
        else:
            print(f"unknown subcommand {args.subcommand}", file=sys.stderr)
            return EXIT_CONFIG
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    doc.time("total", time.time() - t0)

    if args.json:
        sys.stdout.write(doc.to_json())
    if out_dir:
        path = os.path.join(out_dir, f"{args.subcommand}_report.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(doc.to_json())
        print(f"report written to {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
