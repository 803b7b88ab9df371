"""Command-line orchestration: simulate, estimate, diagnose, demo.

Configuration is a flat key=value file with dotted keys; every output file
carries comment-line metadata (config hash, seed, version).  Exit codes:
0 success, 2 assumption violations, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .deconv import RegularizationConfig, pilot_zeta_bar, run_pipeline
from .diagnostics import classify, illposed_demo
from .estimate import (
    bin_conditional_means,
    default_bin_count,
    moments_to_spectra,
    read_sample_csv,
    write_sample_csv,
)
from .exceptions import AssumptionViolation, ConfigError, EivError
from .numerics import GridSpectrum, RealGrid
from .semiparam import (
    Schedule,
    build_model,
    empirical_spectra,
    eq_vector,
    gmm_solve,
    oracle_spectra,
    rank_check,
)
from .simulate import (
    default_dgp,
    default_error_distribution,
    default_step_g,
    draw,
    gauss3_dgp,
    oracle_moments,
)

log = logging.getLogger("eiv")


# ---------------------------------------------------------------------------
# config plumbing


def parse_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def config_hash(cfg: dict[str, str]) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _get(cfg, key, cast, default):
    if key not in cfg:
        return default
    try:
        if cast is bool:
            return cfg[key].lower() in ("1", "true", "yes", "on")
        return cast(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key}={cfg[key]!r}: {exc}") from exc


def _get_floats(cfg, key, default):
    if key not in cfg:
        return default
    try:
        return tuple(float(v) for v in cfg[key].split(","))
    except ValueError as exc:
        raise ConfigError(f"config key {key}={cfg[key]!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# output helpers


def _meta(cfg: dict[str, str], seed: int) -> dict[str, str]:
    return {
        "config_hash": config_hash(cfg),
        "seed": str(seed),
        "version": __version__,
    }


def write_csv(path: Path, header: list[str], rows, meta: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_json(path: Path, payload: dict, meta: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"_meta": meta, **payload}, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# shared builders


def _dgp_from_config(cfg, seed: int):
    preset = cfg.get("dgp.preset", "default")
    if preset == "default":
        dgp = default_dgp(seed)
    elif preset == "gauss3":
        theta = _get_floats(cfg, "dgp.theta", (1.0, 0.5, 2.0))
        dgp = gauss3_dgp(theta, seed=seed, z_half=_get(cfg, "dgp.z_half", float, 4.0))
    else:
        raise ConfigError(f"config key dgp.preset={preset!r}: unknown preset")
    return dgp


def _freq_grid(cfg) -> RealGrid:
    half = _get(cfg, "deconv.grid_half", float, 10.0)
    step = _get(cfg, "deconv.grid_step", float, 0.01)
    n = 2 * int(round(half / step)) + 1
    return RealGrid.symmetric(half, n)


_PHI_PRESETS = {
    "three_atom": lambda z: 0.5 + 0.5 * np.cos(0.3 * z),
    "gauss": lambda z: np.exp(-z * z),
    "rational": lambda z: 1.0 / (1.0 + z * z),
    "halfcos": lambda z: np.cos(0.3 * z),
}


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg, out: Path, seed: int, jobs: int) -> int:
    n = _get(cfg, "simulate.n", int, 10_000)
    dgp = _dgp_from_config(cfg, seed)
    sample = draw(dgp, n)
    meta = _meta(cfg, seed)
    write_sample_csv(out / "sample.csv", sample, meta)
    write_json(
        out / "sample_meta.json",
        {"n": n, "preset": cfg.get("dgp.preset", "default")},
        meta,
    )
    log.info("wrote %d observations to %s", n, out / "sample.csv")
    return 0


def cmd_estimate_nonparam(cfg, out: Path, seed: int, jobs: int) -> int:
    grid = _freq_grid(cfg)
    meta = _meta(cfg, seed)
    if _get(cfg, "input.oracle", bool, False):
        g = default_step_g()
        w_y, w_xy = oracle_moments(g, default_error_distribution())
    else:
        sample_path = cfg.get("input.sample")
        if not sample_path:
            raise ConfigError("config key input.sample: required unless input.oracle=true")
        sample = read_sample_csv(sample_path)
        n_bins = _get(cfg, "bins.n", int, default_bin_count(sample.n))
        binned = bin_conditional_means(
            sample, n_bins, _get(cfg, "bins.min_per_bin", int, 20)
        )
        w_y, w_xy = binned.w_y, binned.w_xy_step

    eps_y, eps_xy, deps_y = moments_to_spectra(w_y, w_xy, grid)
    trim = _get(cfg, "deconv.trim_rel", float, 1e-6) * float(
        np.max(np.abs(eps_y.values))
    )
    zeta_bar = _get(cfg, "deconv.zeta_bar", float, 0.0)
    if zeta_bar <= 0.0:
        zeta_bar = pilot_zeta_bar(eps_y, eps_xy, deps_y, trim)
        log.info("pilot band edge: zeta_bar=%.3f", zeta_bar)
    rc = RegularizationConfig(zeta_bar=zeta_bar, trim_threshold=trim, grid=grid)

    t_half = _get(cfg, "target.half", float, 3.0)
    t_n = _get(cfg, "target.n", int, 601)
    target = RealGrid.symmetric(t_half, t_n if t_n % 2 else t_n + 1)
    result = run_pipeline(w_y, w_xy, rc, target)

    band = np.abs(grid.points) <= zeta_bar
    write_csv(
        out / "phi.csv",
        ["zeta", "re", "im"],
        zip(
            grid.points[band],
            np.real(result.phi.values[band]),
            np.imag(result.phi.values[band]),
        ),
        meta,
    )
    write_csv(out / "g.csv", ["x", "g"], zip(target.points, result.g_values), meta)
    d = result.diagnostics
    write_json(
        out / "diagnostics.json",
        {
            "min_abs_eps_y": d.min_abs_eps_y,
            "trimmed_fraction": d.trimmed_fraction,
            "imag_residual": d.imag_residual,
            "zeta_bar": d.zeta_bar,
        },
        meta,
    )
    return 0


def cmd_estimate_semiparam(cfg, out: Path, seed: int, jobs: int) -> int:
    name = cfg.get("model.name", "gauss3")
    model = build_model(name, zeta_bar=_get(cfg, "model.zeta_bar", float, None))
    theta_init = _get_floats(cfg, "model.theta_init", model.theta_ref)
    meta = _meta(cfg, seed)

    if _get(cfg, "input.oracle", bool, False):
        theta_star = _get_floats(cfg, "input.theta_star", model.theta_ref)
        sched = Schedule.default_oracle()
        half = model.zeta_bar + 1.0
        grid = RealGrid.symmetric(half, 2 * int(round(half / sched.grid_step)) + 1)
        data = oracle_spectra(model, theta_star, default_error_distribution(), grid)
    else:
        sample_path = cfg.get("input.sample")
        if not sample_path:
            raise ConfigError("config key input.sample: required unless input.oracle=true")
        sample = read_sample_csv(sample_path)
        sched = Schedule.default_sampled()
        half = model.zeta_bar + 1.0
        grid = RealGrid.symmetric(half, 2 * int(round(half / sched.grid_step)) + 1)
        data = empirical_spectra(sample, grid)

    result = gmm_solve(model, data, theta_init, sched)
    rank = rank_check(model, result.theta, data, sched)
    write_json(
        out / "theta.json",
        {
            "model": name,
            "theta": list(result.theta),
            "eq_norm": result.eq_norm,
            "converged": result.converged,
            "message": result.message,
            "rank": rank.rank,
            "singular_values": list(rank.singular_values),
        },
        meta,
    )
    write_csv(
        out / "eq_trace.csv",
        ["iteration", "eq_norm"] + [f"theta{i+1}" for i in range(model.theta_dim)],
        [(i, nrm, *th) for i, nrm, th in result.trace],
        meta,
    )
    return 0


def cmd_diagnose(cfg, out: Path, seed: int, jobs: int) -> int:
    preset = cfg.get("phi.preset", "three_atom")
    if preset not in _PHI_PRESETS:
        raise ConfigError(f"config key phi.preset={preset!r}: unknown preset")
    half = _get(cfg, "band.half", float, 8.0)
    n = _get(cfg, "band.n", int, 1601)
    band = RealGrid.symmetric(half, n if n % 2 else n + 1)
    phi = GridSpectrum(band, _PHI_PRESETS[preset](band.points).astype(complex))
    zeta_bar = _get(cfg, "phi.zeta_bar", float, math.inf)
    report = classify(phi, zeta_bar, band)
    meta = _meta(cfg, seed)
    write_json(
        out / "case_report.json",
        {
            "case1_bounded_support": report.case1_bounded_support,
            "case2_inverse_poly_bounded": report.case2_inverse_poly_bounded,
            "case2_witness": list(report.case2_witness) if report.case2_witness else None,
            "case3_om_proxy": report.case3_om_proxy,
            "verdict": report.verdict,
        },
        meta,
    )

    n_values = [int(v) for v in _get_floats(cfg, "illposed.n_values", (2, 3, 4, 5))]
    target = RealGrid.symmetric(3.0, 301)
    rows = illposed_demo(n_values, target)
    write_csv(
        out / "illposed.csv",
        ["n", "I_n", "lower_bound", "sup_amplified", "pairing"],
        [
            (r.n, r.amplified_integral, r.lower_bound, r.sup_amplified, r.weak_pairing)
            for r in rows
        ],
        meta,
    )
    return 0


def _consistency_run(args):
    seed, n, zeta_bar, trim_rel = args
    from .deconv import RegularizationConfig as RC
    from .estimate import bin_conditional_means as bcm
    from .estimate import default_bin_count as dbc
    from .simulate import default_dgp as ddgp
    from .simulate import draw as ddraw

    sample = ddraw(ddgp(seed), n)
    binned = bcm(sample, dbc(n))
    grid = RealGrid.symmetric(10.0, 2001)
    eps_y, _, _ = moments_to_spectra(binned.w_y, binned.w_xy_step, grid)
    trim = trim_rel * float(np.max(np.abs(eps_y.values)))
    rc = RC(zeta_bar=zeta_bar, trim_threshold=trim, grid=grid)
    target = RealGrid.symmetric(3.0, 601)
    result = run_pipeline(binned.w_y, binned.w_xy_step, rc, target)
    g_true = default_step_g()(target.points)
    err = np.trapezoid(np.abs(result.g_values - g_true), target.points)
    return seed, n, float(err)


def cmd_demo(cfg, out: Path, seed: int, jobs: int) -> int:
    meta = _meta(cfg, seed)
    report: dict = {}

    # characteristic-function recovery from exact moment carriers
    g = default_step_g()
    F = default_error_distribution()
    w_y, w_xy = oracle_moments(g, F)
    grid = RealGrid.symmetric(10.0, 2001)
    eps_y, _, _ = moments_to_spectra(w_y, w_xy, grid)
    trim = 1e-8 * float(np.max(np.abs(eps_y.values)))
    rc = RegularizationConfig(zeta_bar=8.0, trim_threshold=trim, grid=grid)
    target = RealGrid.symmetric(3.0, 601)
    result = run_pipeline(w_y, w_xy, rc, target)
    band = np.abs(grid.points) <= 8.0
    phi_true = 0.5 + 0.5 * np.cos(0.3 * grid.points[band])
    report["phi_sup_error"] = float(
        np.max(np.abs(result.phi.values[band] - phi_true))
    )
    write_csv(
        out / "demo_phi.csv",
        ["zeta", "re", "im"],
        zip(
            grid.points[band],
            np.real(result.phi.values[band]),
            np.imag(result.phi.values[band]),
        ),
        meta,
    )

    # truncation-bias sweep
    sweep = []
    g_true = g(target.points)
    for zb in (2.0, 4.0, 8.0):
        rcz = RegularizationConfig(zeta_bar=zb, trim_threshold=trim, grid=grid)
        res = run_pipeline(w_y, w_xy, rcz, target)
        sweep.append(
            (zb, float(np.trapezoid(np.abs(res.g_values - g_true), target.points)))
        )
    report["l1_by_zeta_bar"] = sweep
    write_csv(out / "demo_l1_sweep.csv", ["zeta_bar", "l1_error"], sweep, meta)

    # consistency mini-study across seeds (worker pool honors --jobs)
    seeds = list(range(seed, seed + _get(cfg, "demo.n_seeds", int, 6)))
    tasks = [(s, n, 8.0, 0.02) for s in seeds for n in (2000, 50000)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_consistency_run, tasks))
    else:
        rows = [_consistency_run(t) for t in tasks]
    write_csv(out / "demo_consistency.csv", ["seed", "n", "l1_error"], rows, meta)
    med = {
        n: float(np.median([e for _, nn, e in rows if nn == n])) for n in (2000, 50000)
    }
    report["consistency_median_l1"] = med

    # moment nullity and rank at the truth on exact spectra
    model = build_model("gauss3")
    sched = Schedule.default_oracle()
    half = model.zeta_bar + 1.0
    sgrid = RealGrid.symmetric(half, 2 * int(round(half / sched.grid_step)) + 1)
    data = oracle_spectra(model, model.theta_ref, F, sgrid)
    eq = eq_vector(model, model.theta_ref, data, sched)
    rank = rank_check(model, model.theta_ref, data, sched)
    report["eq_sup_at_truth"] = float(np.max(np.abs(eq.values)))
    report["rank"] = rank.rank
    report["singular_values"] = list(rank.singular_values)

    write_json(out / "demo_report.json", report, meta)
    log.info("demo report: %s", json.dumps(report))
    return 0


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate-nonparam": cmd_estimate_nonparam,
    "estimate-semiparam": cmd_estimate_semiparam,
    "diagnose": cmd_diagnose,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="eiv",
        description="errors-in-variables estimation and diagnostics toolkit",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="overrides config seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker pool size")
    args = parser.parse_args(argv)

    level = os.environ.get("EIV_LOG", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
            level, logging.ERROR
        ),
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        cfg = parse_config(args.config)
        seed = args.seed if args.seed is not None else _get(cfg, "seed", int, 0)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, seed, max(1, args.jobs))
    except AssumptionViolation as exc:
        log.error("assumption violation: %s", exc)
        print(f"eiv: assumption violation: {exc}", file=sys.stderr)
        return 2
    except EivError as exc:
        log.error("%s", exc)
        print(f"eiv: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("unexpected failure")
        print(f"eiv: unexpected failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
