"""Command-line surface.

Commands: info, estimate, simulate, gamma2, resistance, gff-sample,
verify {foster, commute, starmesh, rayknight, sketch, escape, isometry},
asymptotics.  Graphs come from ``--gen family:params`` or ``--input
file`` (edge-list text or JSON).  Every command honors ``--seed``; when
omitted, the ``COVERTIME_SEED`` environment variable applies, then a
fixed default, so default runs are reproducible byte for byte.

Exit codes: 0 success, 1 a verification check failed, 2 parse error,
3 validation error (disconnected input and the like), 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from ._seeds import DEFAULT_SEED, derive_rng
from .errors import (
    CoverTimeError,
    InputFormatError,
    NumericalError,
    ValidationError,
)
from .estimators import ReportConfig, asymptotic_check, full_report
from .gamma2 import extract_certificate, gamma2_approx, gamma2_of_network, read_metric_csv
from .gff import GFFSampler, affine_hull_distance, build_sketch, estimate_sup
from .network import Network, generate, load
from .resistance import (
    build_oracle,
    escape_probability,
    foster_residual,
    hitting_times,
    r_eff_set,
)
from .walk import (
    BlanketStrong,
    BlanketWeak,
    Cover,
    CoverAndReturn,
    InverseLocal,
    escape_frequency,
    estimate_blanket_time,
    estimate_cover_time,
    rayknight_check,
    run_until,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("COVERTIME_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InputFormatError(f"bad COVERTIME_SEED {env!r}") from exc
    return DEFAULT_SEED


def _load_network(args) -> Network:
    if getattr(args, "gen", None):
        return generate(args.gen)
    if getattr(args, "input", None):
        return load(args.input)
    raise InputFormatError("provide a graph with --gen or --input")


def _sig6(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _flatten(obj, prefix=""):
    rows = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            rows.extend(_flatten(obj[k], f"{prefix}{k}." if prefix else f"{k}."))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        rows.append((prefix[:-1], obj))
    return rows


def _emit(obj, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        json.dump(obj, out, sort_keys=True)
        out.write("\n")
    elif fmt == "csv":
        for key, val in _flatten(obj):
            out.write(f"{key},{val}\n")
    else:
        for key, val in _flatten(obj):
            out.write(f"{key} = {_sig6(val)}\n")


def _matrix_out(mat: np.ndarray, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        json.dump([[float(x) for x in row] for row in mat], out, sort_keys=True)
        out.write("\n")
    else:
        sep = "," if fmt == "csv" else " "
        for row in mat:
            cells = (repr(float(x)) if fmt == "csv" else _sig6(float(x)) for x in row)
            out.write(sep.join(cells) + "\n")


# ---------------------------------------------------------------------------
# Commands


def _cmd_info(args) -> int:
    net = _load_network(args)
    info = net.summary()
    if net.labels is not None:
        info["labels"] = list(net.labels)
    _emit(info, args.format)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    net = _load_network(args)
    config = ReportConfig(
        seed=_resolve_seed(args),
        sup_samples=args.sup_samples,
        cover_reps=args.reps,
        start=args.start,
        include_simulation=not args.no_simulation,
        include_gamma2=not args.no_gamma2,
        include_pseudoroot=not args.no_pseudoroot,
        include_sketch=not args.no_sketch,
        include_blanket=args.blanket,
        blanket_delta=args.delta,
        tight_constant=args.tight_c,
        timings=args.timings,
    )
    report = full_report(net, config)
    _emit(report.to_dict(), args.format)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    net = _load_network(args)
    seed = _resolve_seed(args)
    rule_name = args.rule
    if args.reps > 1:
        if rule_name in ("cover", "cover-return"):
            est = estimate_cover_time(net, args.start, args.reps, seed)
            _emit({
                "rule": rule_name,
                "reps": est.reps,
                "mean_cover": est.mean_cover,
                "stderr_cover": est.se_cover,
                "mean_cover_return": est.mean_cover_return,
                "stderr_cover_return": est.se_cover_return,
                "sandwich_ok": est.sandwich_ok(),
            }, args.format)
        elif rule_name in ("blanket-weak", "blanket-strong"):
            est = estimate_blanket_time(net, args.start, args.delta, args.reps, seed)
            _emit({
                "rule": rule_name,
                "delta": est.delta,
                "reps": est.reps,
                "mean_weak": est.mean_weak,
                "stderr_weak": est.se_weak,
                "mean_strong": est.mean_strong,
                "stderr_strong": est.se_strong,
                "mean_cover": est.mean_cover,
                "weak_after_cover": est.weak_after_cover,
                "strong_after_weak": est.strong_after_weak,
            }, args.format)
        else:
            from .walk import sample_inverse_local_times
            tau, steps, L = sample_inverse_local_times(
                net, args.start, args.t, args.reps, seed)
            _emit({
                "rule": rule_name,
                "t": args.t,
                "reps": args.reps,
                "mean_tau": float(tau.mean()),
                "stderr_tau": float(tau.std(ddof=1) / math.sqrt(args.reps)),
                "expected_tau": net.total_conductance * args.t,
                "mean_local_times": [float(x) for x in L.mean(axis=0)],
            }, args.format)
        return EXIT_OK

    rules = {
        "cover": Cover(),
        "cover-return": CoverAndReturn(),
        "blanket-weak": BlanketWeak(args.delta),
        "blanket-strong": BlanketStrong(args.delta),
        "inverse-local": InverseLocal(args.t),
    }
    rule = rules[rule_name]
    if args.trace:
        from .walk import trace_until
        report, vertices, holdings = trace_until(net, args.start, rule, seed)
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("jump_index,vertex,holding_time\n")
            for i, (v, h) in enumerate(zip(vertices, holdings)):
                fh.write(f"{i},{v},{h!r}\n")
    else:
        report = run_until(net, args.start, rule, seed)
    _emit({
        "rule": report.kind,
        "stop_steps": report.stop_steps,
        "stop_time": report.stop_time,
        "current_vertex": report.current_vertex,
        "local_times": [float(x) for x in report.local_L],
        "visit_counts": [int(x) for x in report.local_N],
    }, args.format)
    return EXIT_OK


def _cmd_gamma2(args) -> int:
    if args.metric:
        with open(args.metric, "r", encoding="utf-8") as fh:
            metric = read_metric_csv(fh.read())
        value, maps = gamma2_approx(metric, r=args.r)
    else:
        net = _load_network(args)
        value, maps = gamma2_of_network(net, r=args.r)
    payload = {"gamma2_estimate": value, "r": args.r, "scales": maps.active_scales}
    if args.certificate:
        cert = extract_certificate(maps)
        with open(args.certificate, "w", encoding="utf-8") as fh:
            json.dump(cert.to_json_dict(), fh, sort_keys=True)
            fh.write("\n")
        payload["certificate_value"] = cert.value
        payload["certificate_nodes"] = cert.size
        payload["certificate_path"] = args.certificate
    _emit(payload, args.format)
    return EXIT_OK


def _cmd_resistance(args) -> int:
    net = _load_network(args)
    oracle = build_oracle(net)
    if args.pair:
        u, v = (int(x) for x in args.pair.split(","))
        _emit({
            "u": u,
            "v": v,
            "r_eff": oracle.r_eff(u, v),
            "commute": oracle.commute(u, v),
        }, args.format)
        return EXIT_OK
    if args.matrix:
        _matrix_out(oracle.r_eff_matrix(), args.format)
        return EXIT_OK
    table = hitting_times(net)
    _emit({
        "n": net.n,
        "total_conductance": net.total_conductance,
        "foster_residual": foster_residual(net),
        "t_hit": table.t_hit,
        "resistance_diameter": table.resistance_diameter,
        "ground": oracle.v0,
    }, args.format)
    return EXIT_OK


def _cmd_gff_sample(args) -> int:
    net = _load_network(args)
    seed = _resolve_seed(args)
    mode = "pseudoroot" if args.mode == "pseudoroot" else "pinned_green"
    sampler = GFFSampler(net, mode=mode)
    if args.sup:
        est = estimate_sup(sampler, args.samples, derive_rng(seed, 31))
        _emit({
            "esup": est.mean,
            "stderr": est.stderr,
            "samples": est.samples,
            "sigma": est.sigma,
        }, args.format)
        return EXIT_OK
    draws = sampler.sample_many(args.samples, derive_rng(seed, 31))
    _matrix_out(draws, args.format)
    return EXIT_OK


def _cmd_asymptotics(args) -> int:
    sizes: list = []
    for token in args.sizes.split(","):
        token = token.strip()
        if "x" in token:
            b, h = token.split("x")
            sizes.append((int(b), int(h)))
        else:
            sizes.append(int(token))
    rows = asymptotic_check(args.family, sizes, seed=_resolve_seed(args),
                            sup_samples=args.sup_samples, cover_reps=args.reps)
    _emit({"family": args.family, "rows": rows}, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites


def _check_rows(args, net: Network, seed: int):
    name = args.check
    rng = derive_rng(seed, 41)
    if name == "foster":
        resid = abs(foster_residual(net))
        yield ("foster", resid, 1e-8 * net.n, resid <= 1e-8 * net.n)
    elif name == "commute":
        oracle = build_oracle(net)
        table = hitting_times(net)
        kappa = net.total_conductance * oracle.r_eff_matrix()
        sym = table.H + table.H.T
        denom = np.where(kappa > 0, kappa, 1.0)
        rel = float(np.max(np.abs(sym - kappa) / denom))
        yield ("commute", rel, 1e-8, rel <= 1e-8)
    elif name == "starmesh":
        from .network import star_mesh_reduce
        victim = int(rng.integers(net.n))
        reduced = star_mesh_reduce(net, victim)
        big = build_oracle(net).r_eff_matrix()
        small = build_oracle(reduced).r_eff_matrix()
        keep = [x for x in range(net.n) if x != victim]
        ref = big[np.ix_(keep, keep)]
        denom = np.where(ref > 0, ref, 1.0)
        rel = float(np.max(np.abs(small - ref) / denom))
        yield ("starmesh", rel, 1e-8, rel <= 1e-8)
    elif name == "rayknight":
        rep = rayknight_check(net, 0, args.t, args.reps, seed)
        zm = rep.max_abs_z_mean()
        z2 = rep.max_abs_z_m2()
        yield ("rayknight.mean", zm, 3.0, zm <= 3.0)
        yield ("rayknight.second_moment", z2, 4.0, z2 <= 4.0)
    elif name == "sketch":
        sketch = build_sketch(net, derive_rng(seed, 42))
        yield ("sketch.low", sketch.worst_low, 1.0, sketch.worst_low >= 1.0)
        yield ("sketch.high", sketch.worst_high, 2.0, sketch.worst_high <= 2.0)
    elif name == "escape":
        v = 0
        u = net.n - 1
        p_exact = escape_probability(net, v, u)
        p_hat, se = escape_frequency(net, v, u, args.reps, seed)
        z = abs(p_hat - p_exact) / max(se, 1e-12)
        yield ("escape", z, 3.0, z <= 3.0)
    elif name == "isometry":
        oracle = build_oracle(net)
        worst = 0.0
        for _ in range(20):
            w = int(rng.integers(net.n))
            size = int(rng.integers(1, max(2, net.n // 2)))
            pool = [x for x in range(net.n) if x != w]
            S = list(rng.choice(pool, size=min(size, len(pool)), replace=False))
            lhs = affine_hull_distance(oracle, w, S)
            rhs = math.sqrt(r_eff_set(net, w, S))
            worst = max(worst, abs(lhs - rhs) / max(rhs, 1e-12))
        yield ("isometry", worst, 1e-6, worst <= 1e-6)
    else:
        raise InputFormatError(f"unknown check {name!r}")


def _cmd_verify(args) -> int:
    net = _load_network(args)
    seed = _resolve_seed(args)
    rows = list(_check_rows(args, net, seed))
    payload = [
        {"check": c, "statistic": s, "threshold": t, "pass": bool(ok)}
        for c, s, t, ok in rows
    ]
    if args.format == "json":
        _emit(payload, "json")
    else:
        for row in payload:
            mark = "pass" if row["pass"] else "FAIL"
            print(f"{row['check']:28s} stat={_sig6(row['statistic']):>12s} "
                  f"thr={_sig6(row['threshold']):>10s}  {mark}")
    return EXIT_OK if all(r["pass"] for r in payload) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------


def _add_graph_args(p):
    p.add_argument("--gen", help="graph family, e.g. complete:16 or er:20,0.3,1")
    p.add_argument("--input", help="edge-list or JSON network file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="covertime",
        description="Cover-time and blanket-time estimation for weighted graphs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="network summary")
    _add_graph_args(p)
    p.set_defaults(fn=_cmd_info)

    p = sub.add_parser("estimate", help="full cover-time report")
    _add_graph_args(p)
    p.add_argument("--sup-samples", type=int, default=2000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--no-simulation", action="store_true")
    p.add_argument("--no-gamma2", action="store_true")
    p.add_argument("--no-pseudoroot", action="store_true")
    p.add_argument("--no-sketch", action="store_true")
    p.add_argument("--blanket", action="store_true")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--tight-c", type=float, default=1.0)
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte determinism)")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("simulate", help="random-walk stopping times")
    _add_graph_args(p)
    p.add_argument("--rule", default="cover", choices=(
        "cover", "cover-return", "blanket-weak", "blanket-strong", "inverse-local"))
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--trace", help="write the single-run trajectory CSV here")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("gamma2", help="deterministic gamma2 approximation")
    _add_graph_args(p)
    p.add_argument("--metric", help="dense distance table CSV")
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--certificate", help="write the certificate tree JSON here")
    p.set_defaults(fn=_cmd_gamma2)

    p = sub.add_parser("resistance", help="effective resistances and hitting times")
    _add_graph_args(p)
    p.add_argument("--pair", help="u,v for a single pair")
    p.add_argument("--matrix", action="store_true", help="dump the R_eff matrix")
    p.set_defaults(fn=_cmd_resistance)

    p = sub.add_parser("gff-sample", help="draw Gaussian free field samples")
    _add_graph_args(p)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--mode", choices=("pinned", "pseudoroot"), default="pinned")
    p.add_argument("--sup", action="store_true", help="estimate E sup instead")
    p.set_defaults(fn=_cmd_gff_sample)

    p = sub.add_parser("verify", help="numerical identity checks")
    p.add_argument("check", choices=(
        "foster", "commute", "starmesh", "rayknight", "sketch", "escape",
        "isometry"))
    _add_graph_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=50000)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("asymptotics", help="finite-size scaling table")
    p.add_argument("--family", choices=("complete", "bary_tree"), default="complete")
    p.add_argument("--sizes", default="64,128,256",
                   help="comma separated; bary trees as bxh, e.g. 2x5")
    p.add_argument("--sup-samples", type=int, default=4000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(fn=_cmd_asymptotics)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CoverTimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
