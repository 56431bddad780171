"""Batch front door: subcommands wiring run configurations to the modules.

Every run validates its configuration, writes a manifest echoing the
resolved settings next to its outputs, and emits JSON summaries plus CSV
tables.  Exit codes: 0 success, 2 invalid input or configuration, 3
unsupported regime, 4 inconclusive where the run demanded a hard verdict.
"""

import argparse
import json
import os
import sys

import numpy as np

from .capacity import annulus_series, bessel_capacity, cap_m, series_to_csv
from .errors import ConfigurationError, InconclusiveError, InputError, UnsupportedRegimeError
from .fundsol import compute_profile, sign_summary
from .grids import Grid, Mask, mask_from_csv, region_from_dict
from .operators import (check_ellipticity, eval_symbol, load_operator, preset_operator,
                        unit_directions)
from .positivity import channel_positivity, grid_positivity
from .potential import (capacitary_potential, gradient_decay_check, lower_bound_check,
                        range_check)
from .regularity import CuspProfile, cusp_criterion, decay_check, dirichlet_solve, \
    regularity_probe, wiener_classify, bump, _dilate_times
from .reporting import write_csv, write_json, write_manifest, load_manifest_config


def _resolve_operator(cfg):
    if cfg.get("operator_file"):
        return load_operator(cfg["operator_file"])
    preset = cfg.get("preset", "laplacian")
    return preset_operator(preset, cfg.get("n"), cfg.get("m"))


def _parse_domain(spec):
    """Compact domain strings: cone:45, cusp:power:2, cusp:exponential:1,
    ball:0.5, ray; JSON dicts pass through region_from_dict."""
    if isinstance(spec, dict):
        return region_from_dict(spec)
    parts = str(spec).split(":")
    kind = parts[0]
    if kind == "cone":
        return region_from_dict({"kind": "cone", "half_angle_deg": float(parts[1])})
    if kind == "cusp":
        return region_from_dict({"kind": "cusp", "cusp_kind": parts[1],
                                 "param": float(parts[2])})
    if kind == "ball":
        return region_from_dict({"kind": "ball", "radius": float(parts[1])})
    if kind == "ray":
        return region_from_dict({"kind": "ray", "axis": int(parts[1]) if len(parts) > 1 else 0})
    raise ConfigurationError(f"cannot parse domain spec {spec!r}")


def _outdir(cfg):
    out = cfg.get("out", "polycap_out")
    os.makedirs(out, exist_ok=True)
    return out


# -- subcommand handlers -------------------------------------------------------


def _run_symbol_check(cfg):
    op = _resolve_operator(cfg)
    samples = int(cfg.get("samples", 1024))
    ok, worst, direction = check_ellipticity(op, samples)
    out = _outdir(cfg)
    dirs = unit_directions(op.n, min(samples, 512))
    vals = op.symbol(dirs)
    write_csv(os.path.join(out, "symbol_samples.csv"),
              [f"d{i+1}" for i in range(op.n)] + ["P"],
              [list(d) + [v] for d, v in zip(dirs, vals)])
    write_json(os.path.join(out, "summary.json"), {
        "operator": op.name, "n": op.n, "m": op.m, "elliptic": ok,
        "min_symbol_on_sphere": worst, "worst_direction": list(direction),
        "samples": samples,
    })
    return 0


def _run_fundsol(cfg):
    op = _resolve_operator(cfg)
    profile = compute_profile(op, resolution=cfg.get("resolution"),
                              extrapolation_levels=int(cfg.get("levels", 2)),
                              backend=cfg.get("backend", "auto"),
                              direction_count=cfg.get("directions"))
    out = _outdir(cfg)
    profile.to_csv(os.path.join(out, "profile.csv"))
    write_json(os.path.join(out, "summary.json"), {
        "operator": op.name, "n": op.n, "m": op.m,
        "homogeneity_degree": profile.homogeneity_degree,
        "method": profile.method, "sign_summary": sign_summary(profile),
    })
    return 0


def _run_capacity(cfg):
    op = _resolve_operator(cfg)
    m = op.m
    h = float(cfg.get("h", 0.1))
    extent = int(cfg.get("extent", round(float(cfg.get("box", 4.0)) / h)))
    grid = Grid(op.n, h, extent)
    if cfg.get("mask_csv"):
        target = mask_from_csv(grid, cfg["mask_csv"])
    elif cfg.get("ball") is not None:
        target = _parse_domain(f"ball:{cfg['ball']}")
    elif cfg.get("domain"):
        target = _parse_domain(cfg["domain"])
    else:
        raise ConfigurationError("capacity needs --ball, --domain, or --mask-csv")
    kind = cfg.get("kind", "homogeneous")
    if kind == "homogeneous":
        value = cap_m(target, m, grid, box_levels=int(cfg.get("box_levels", 1)))
    elif kind == "inhomogeneous":
        value = bessel_capacity(target, m, grid)
    else:
        raise ConfigurationError(f"unknown capacity kind {kind!r}")
    out = _outdir(cfg)
    write_json(os.path.join(out, "summary.json"), {
        "operator": op.name, "n": op.n, "m": m, "kind": value.kind,
        "value": value.value, "grid_h": value.grid_h, "grid_extent": value.grid_extent,
        "refinement_estimate": value.refinement_estimate,
        "raw_values": {k: v for k, v in value.raw_values.items() if k != "field"},
    })
    return 0


def _run_potential(cfg):
    op = _resolve_operator(cfg)
    h = float(cfg.get("h", 0.1))
    extent = int(cfg.get("extent", round(float(cfg.get("box", 4.0)) / h)))
    grid = Grid(op.n, h, extent)
    if cfg.get("mask_csv"):
        target = mask_from_csv(grid, cfg["mask_csv"])
    else:
        target = _parse_domain(f"ball:{cfg.get('ball', 1.0)}")
    report = capacitary_potential(op, target, grid)
    out = _outdir(cfg)
    summary = report.summary()
    summary["range_check"] = range_check(report)
    if cfg.get("checks", "range") and "decay" in str(cfg.get("checks", "")):
        summary["gradient_decay"] = gradient_decay_check(report)
    if "lower" in str(cfg.get("checks", "")):
        summary["lower_bound"] = lower_bound_check(report, float(cfg.get("enclosing", 1.0)))
    write_json(os.path.join(out, "summary.json"), summary)
    coords = grid.coords().reshape(-1, grid.n)
    write_csv(os.path.join(out, "potential.csv"),
              [f"x{i+1}" for i in range(grid.n)] + ["u"],
              [list(c) + [v] for c, v in zip(coords, report.u.ravel())])
    return 0


def _run_positivity(cfg):
    m = int(cfg["m"])
    n = int(cfg["n"])
    out = _outdir(cfg)
    if cfg.get("grid_check"):
        op = preset_operator("polyharmonic", n, m)
        profile = compute_profile(op)
        h = float(cfg.get("h", 0.25))
        extent = int(cfg.get("extent", 8))
        verdict = grid_positivity(op, Grid(n, h, extent), profile)
    else:
        channels = cfg.get("channels")
        kwargs = {}
        if channels:
            kwargs["channels"] = range(int(channels) + 1)
        if cfg.get("window"):
            kwargs["t_window"] = float(cfg["window"])
        if cfg.get("dt"):
            kwargs["dt"] = float(cfg["dt"])
        kwargs["jobs"] = int(cfg.get("jobs", 1))
        verdict = channel_positivity(m, n, **kwargs)
    if verdict.witness is not None and "values" in verdict.witness:
        vals = verdict.witness["values"]
        write_csv(os.path.join(out, "witness.csv"), ["index", "value"],
                  list(enumerate(np.asarray(vals).ravel())))
    write_json(os.path.join(out, "summary.json"), verdict.as_dict())
    if cfg.get("require_verdict") and verdict.status not in ("positive_at_resolution",
                                                             "violated"):
        raise InconclusiveError("positivity did not reach a verdict")
    return 0


def _run_wiener(cfg):
    m = int(cfg["m"])
    n = int(cfg["n"])
    domain = _parse_domain(cfg["domain"])
    series = annulus_series(domain, m, n,
                            j_range=(int(cfg.get("j_min", 0)), int(cfg.get("j_max", 8))),
                            backend=cfg.get("backend", "auto"),
                            nodes_per_rho=int(cfg.get("nodes_per_rho", 12)),
                            jobs=int(cfg.get("jobs", 1)))
    verdict = wiener_classify(series, require_verdict=bool(cfg.get("require_verdict")))
    out = _outdir(cfg)
    series_to_csv(series, os.path.join(out, "series.csv"))
    write_json(os.path.join(out, "summary.json"), verdict.as_dict())
    return 0


def _run_cusp(cfg):
    kind = cfg.get("kind", "power")
    param = float(cfg.get("p", cfg.get("a", 2.0)))
    profile = CuspProfile(kind, param)
    result = cusp_criterion(profile, int(cfg["m"]), int(cfg["n"]))
    out = _outdir(cfg)
    write_json(os.path.join(out, "summary.json"), {
        "kind": kind, "param": param, "m": int(cfg["m"]), "n": int(cfg["n"]), **result,
    })
    return 0


def _run_dirichlet(cfg):
    op = _resolve_operator(cfg)
    h = float(cfg.get("h", 0.1))
    extent = int(cfg.get("extent", round(1.0 / h)))
    grid = Grid(op.n, h, extent)
    if cfg.get("domain"):
        comp = _parse_domain(cfg["domain"]).mask(grid)
        omega = Mask(grid, ~comp.where)
    else:
        interior = np.zeros(grid.shape, dtype=bool)
        interior[tuple(slice(1, -1) for _ in range(grid.n))] = True
        omega = Mask(grid, interior)
    center = np.zeros(grid.n)
    center[0] = float(cfg.get("source_offset", 0.4)) * grid.box_radius
    f = bump(grid, center, float(cfg.get("source_radius", 0.15)) * grid.box_radius)
    f[_dilate_times(~omega.where, 2 * op.m)] = 0.0
    u, info = dirichlet_solve(op, omega, f)
    out = _outdir(cfg)
    coords = grid.coords().reshape(-1, grid.n)
    write_csv(os.path.join(out, "solution.csv"),
              [f"x{i+1}" for i in range(grid.n)] + ["u"],
              [list(c) + [v] for c, v in zip(coords, u.ravel())])
    write_json(os.path.join(out, "summary.json"), {
        "operator": op.name, "n": grid.n, "m": op.m, "iterations": info["iterations"],
        "residual": info["residual"], "u_max": float(np.abs(u).max()),
    })
    return 0


def _run_decay(cfg):
    op = _resolve_operator(cfg)
    domain = _parse_domain(cfg["domain"])
    report = decay_check(op, domain, op.n, R=float(cfg.get("R", 0.25)),
                         grid_h=1.0 / float(cfg.get("inv_h", 24)))
    out = _outdir(cfg)
    write_json(os.path.join(out, "summary.json"), report.as_dict())
    write_csv(os.path.join(out, "decay.csv"),
              ["rho", "sup_sq", "weighted_energy", "cap_integral"],
              list(zip(report.radii, report.sup_sq, report.weighted_energy,
                       report.cap_integral)))
    if cfg.get("require_verdict") and report.inconclusive:
        raise InconclusiveError("decay fit is degenerate")
    return 0


_HANDLERS = {
    "symbol-check": _run_symbol_check,
    "fundsol": _run_fundsol,
    "capacity": _run_capacity,
    "potential": _run_potential,
    "positivity": _run_positivity,
    "wiener": _run_wiener,
    "cusp": _run_cusp,
    "dirichlet": _run_dirichlet,
    "decay": _run_decay,
}


def _build_parser():
    p = argparse.ArgumentParser(prog="polycap",
                                description="higher-order capacity and regularity runs")
    p.add_argument("--config", help="JSON run configuration (or a manifest.json)")
    sub = p.add_subparsers(dest="subcommand")
    for name in _HANDLERS:
        sp = sub.add_parser(name)
        sp.add_argument("--preset")
        sp.add_argument("--operator-file", dest="operator_file")
        sp.add_argument("--polyharmonic", action="store_true",
                        help="shorthand for --preset polyharmonic")
        sp.add_argument("--n", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--h", type=float)
        sp.add_argument("--extent", type=int)
        sp.add_argument("--box", type=float)
        sp.add_argument("--ball", type=float)
        sp.add_argument("--mask-csv", dest="mask_csv")
        sp.add_argument("--domain")
        sp.add_argument("--kind")
        sp.add_argument("--p", type=float)
        sp.add_argument("--a", type=float)
        sp.add_argument("--box-levels", dest="box_levels", type=int)
        sp.add_argument("--backend")
        sp.add_argument("--resolution", type=int)
        sp.add_argument("--levels", type=int)
        sp.add_argument("--directions", type=int)
        sp.add_argument("--channels", type=int)
        sp.add_argument("--window", type=float)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--grid-check", dest="grid_check", action="store_true")
        sp.add_argument("--j-min", dest="j_min", type=int)
        sp.add_argument("--j-max", dest="j_max", type=int)
        sp.add_argument("--nodes-per-rho", dest="nodes_per_rho", type=int)
        sp.add_argument("--R", type=float)
        sp.add_argument("--inv-h", dest="inv_h", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--checks")
        sp.add_argument("--enclosing", type=float)
        sp.add_argument("--require-verdict", dest="require_verdict", action="store_true")
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
    return p


def run(config):
    """Execute one resolved run configuration; returns the exit code."""
    sub = config.get("subcommand")
    if sub not in _HANDLERS:
        raise ConfigurationError(f"unknown subcommand {sub!r}")
    outdir = _outdir(config)
    write_manifest(outdir, config)
    return _HANDLERS[sub](config)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = {}
    if args.config:
        cfg.update(load_manifest_config(args.config))
    cli_items = {k: v for k, v in vars(args).items()
                 if k not in ("config",) and v not in (None, False)}
    if cli_items.pop("polyharmonic", None):
        cli_items["preset"] = "polyharmonic"
    cfg.update(cli_items)
    if not cfg.get("subcommand"):
        parser.print_help()
        return 2
    try:
        return run(cfg)
    except (InputError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedRegimeError as exc:
        print(f"unsupported regime: {exc}", file=sys.stderr)
        return 3
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
