"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 domain or capacity precondition,
3 internal failure (contract violations, I/O trouble, failed verification).
Seed precedence: --seed flag, then the config file, then POSTSEL_SEED,
then the built-in default.  Timing lines go to stderr so stdout stays
machine-readable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import acceptance, boolfn, compiler, majority, newman, rdeg
from .constructions import or_postselect_demo, OrDemoAlgorithm
from .errors import CapacityError, DomainError, PostselError
from .experiments import (elimination_trial, majority_weight_trial,
                          render_report, write_text)
from .seeding import derive_stream


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this surface reserves 2 for
    # domain errors, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DomainError(f"cannot read config file {path}: {e}") from e
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ("seed", "threads"):
            print(f"[postsel] ignoring unknown config key {key!r}",
                  file=sys.stderr)
            continue
        cfg[key] = value
    return cfg


def _resolve_int(flag_value, cfg: dict, key: str, env: str | None, default: int) -> int:
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return int(cfg[key])
    if env is not None and os.environ.get(env):
        return int(os.environ[env])
    return default


def _parse_bits(text: str):
    if not text or set(text) - {"0", "1"}:
        raise DomainError(f"bit string must be nonempty over 0/1, got {text!r}")
    return [int(c) for c in text]


def _parse_real(text: str) -> float:
    # accepts "0.2" or "1/5"
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"cannot parse number {text!r}") from e


def _parse_int_list(text: str):
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise DomainError(f"cannot parse integer list {text!r}") from e


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        write_text(out, text)
        print(f"[postsel] wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit_report(text: str, out: str | None):
    if out:
        write_text(out, text)
        print(f"[postsel] wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _cmd_maj_run(args, seed: int, threads: int) -> int:
    bits = _parse_bits(args.bits)
    eps = _parse_real(args.eps)
    rng = derive_stream(seed, f"cli:maj-run:{args.bits}:{args.eps}", 0)
    outputs = []
    queries = []
    transcript = None
    for _ in range(args.runs):
        run = majority.majority_sample(bits, eps, rng, record=args.record)
        outputs.append(run.output)
        queries.append(run.queries)
        if args.record and transcript is None:
            transcript = [t.to_json_dict() for t in run.transcripts]
    result = {
        "bits": args.bits,
        "eps": eps,
        "runs": args.runs,
        "ones": sum(outputs),
        "majority_value": 1 if 2 * sum(bits) >= len(bits) else 0,
        "max_queries": max(queries),
        "mean_queries": math.fsum(queries) / len(queries),
    }
    if args.runs == 1:
        result["output"] = outputs[0]
    if transcript is not None:
        result["first_run_transcripts"] = transcript
    _emit(result, args.out)
    return 0


def _cmd_maj_curve(args, seed: int, threads: int) -> int:
    eps = _parse_real(args.eps)
    weights = _parse_int_list(args.weights)
    rows = [majority_weight_trial(args.n, w, eps, args.runs, seed, threads)
            for w in weights]
    text = render_report(
        "maj-curve",
        {"n": args.n, "eps": eps, "runs": args.runs, "master_seed": seed},
        {"worst_empirical_error": max(r["empirical_error"] for r in rows),
         "max_queries": max(r["max_queries"] for r in rows)},
        rows,
    )
    _emit_report(text, args.out)
    return 0


def _cmd_or_demo(args, seed: int, threads: int) -> int:
    bits = _parse_bits(args.bits)
    eps0 = _parse_real(args.eps0)
    rng = derive_stream(seed, f"cli:or-demo:{args.bits}:{args.eps0}", 0)
    res = or_postselect_demo(bits, eps0, mode=args.mode, rng=rng)
    _emit({
        "bits": args.bits,
        "eps0": eps0,
        "mode": args.mode,
        "success_prob": res.success_prob,
        "conditional_error": res.conditional_error,
        "output": res.output,
    }, args.out)
    return 0


def _cmd_extract(args, seed: int, threads: int) -> int:
    eps0 = _parse_real(args.eps0)
    alg = OrDemoAlgorithm(args.n, eps0)
    P, Q = boolfn.extract_pq(alg)
    _emit({
        "n": args.n,
        "eps0": eps0,
        "queries": alg.query_count,
        "p": json.loads(boolfn.poly_to_json(P)),
        "q": json.loads(boolfn.poly_to_json(Q)),
        "degrees": [P.degree(), Q.degree()],
    }, args.out)
    return 0


def _cmd_compile(args, seed: int, threads: int) -> int:
    try:
        with open(args.spectra, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"cannot read spectra file {args.spectra}: {e}") from e
    if "q_hat" not in payload or "r_hat" not in payload:
        raise DomainError("spectra file needs q_hat and r_hat objects")
    q_hat = boolfn.spectrum_from_json(json.dumps(payload["q_hat"]))
    r_hat = boolfn.spectrum_from_json(json.dumps(payload["r_hat"]))
    eps = _parse_real(args.eps) if args.eps is not None else None
    alg = compiler.compile_from_spectra(
        q_hat, r_hat, degree=payload.get("degree"), eps=eps)
    result = json.loads(alg.to_json())
    if args.bits is not None:
        bits = _parse_bits(args.bits)
        row = compiler.run_compiled(alg, bits)
        result["run"] = {
            "bits": args.bits,
            "ratio": row.ratio,
            "success_prob": row.success_prob,
            "conditional_error": row.conditional_error,
            "output": row.output,
            "queries": row.queries,
        }
    _emit(result, args.out)
    return 0


def _cmd_roundtrip(args, seed: int, threads: int) -> int:
    f = boolfn.TruthTable.from_string(args.table)
    with open(args.p, encoding="utf-8") as fh:
        P = boolfn.poly_from_json(fh.read())
    with open(args.q, encoding="utf-8") as fh:
        Q = boolfn.poly_from_json(fh.read())
    eps = _parse_real(args.eps)
    summary = compiler.roundtrip(f, P, Q, eps)
    _emit(summary, args.out)
    return 0


def _cmd_newman(args, seed: int, threads: int) -> int:
    degrees = _parse_int_list(args.degrees)
    if args.csv and len(degrees) != 1:
        raise DomainError("--csv needs exactly one degree")
    grid = np.linspace(-1.0, 1.0, args.grid)
    rows = []
    errors = []
    for d in degrees:
        nodes = newman.newman_nodes(d)
        xs = np.concatenate([grid, nodes, -nodes])
        vals = newman.newman_abs(d, xs)
        E = float(np.max(np.abs(vals - np.abs(xs))))
        errors.append((d, E))
        rows.append({"degree": d, "max_error": E,
                     "bound": math.exp(-0.5 * math.sqrt(d))})
    metrics = {"errors": rows}
    if len(degrees) >= 3:
        slope, intercept = newman.fit_decay(errors)
        metrics["slope"] = slope
        metrics["intercept"] = intercept
    if args.csv:
        d = degrees[0]
        report = newman.error_grid(
            lambda x: newman.newman_abs(d, x), abs,
            [(-1.0, 1.0, "grid")], args.grid,
            [(float(x), "node") for x in newman.newman_nodes(d)],
        )
        write_text(args.csv, report.to_csv())
        print(f"[postsel] wrote {args.csv}", file=sys.stderr)
    _emit(metrics, args.out)
    return 0


def _cmd_sign(args, seed: int, threads: int) -> int:
    eps = _parse_real(args.eps)
    sa = newman.quantum_sign(eps)
    zs = np.linspace(-1.0, 1.0, args.points)
    rows = []
    for z in zs:
        z = float(z)
        tag = sa.domain_tag(z)
        if tag == "assertable":
            v = sa(z)
            ref = 1.0 if z >= 0 else -1.0
            rows.append(newman.GridRow(z, v, ref, abs(v - ref), tag))
        else:
            rows.append(newman.GridRow(z, float("nan"), float("nan"),
                                       float("nan"), tag))
    report = newman.GridReport(rows)
    if args.csv:
        write_text(args.csv, report.to_csv())
        print(f"[postsel] wrote {args.csv}", file=sys.stderr)
    worst, at = report.max_error("assertable")
    _emit({
        "eps": eps,
        "N": sa.N,
        "points": args.points,
        "max_assertable_error": worst,
        "argmax": at,
    }, args.out)
    return 0


def _cmd_rdeg(args, seed: int, threads: int) -> int:
    f = boolfn.TruthTable.from_string(args.table)
    if args.scan:
        found, results = rdeg.scan_degree(f, args.eps, args.d,
                                          symmetric=args.symmetric)
        payload = {
            "table": args.table,
            "eps": args.eps,
            "min_feasible_degree": found,
            "scanned": [
                {"d": d, "feasible": r.feasible, "mode": r.mode,
                 "conclusive": r.conclusive}
                for d, r in enumerate(results)
            ],
        }
        last = results[-1] if results else None
        if found is not None and last is not None and last.witness is not None:
            payload["witness"] = json.loads(last.witness.to_json())
        _emit(payload, args.out)
        return 0
    res = rdeg.rdeg_feasible(f, args.d, args.eps, symmetric=args.symmetric)
    payload = {
        "table": args.table,
        "eps": args.eps,
        "d": args.d,
        "feasible": res.feasible,
        "mode": res.mode,
        "conclusive": res.conclusive,
        "detail": res.detail,
    }
    if res.witness is not None:
        ok, problems = rdeg.verify_witness(f, res.witness)
        payload["witness"] = json.loads(res.witness.to_json())
        payload["witness_verified"] = ok
        if problems:
            payload["witness_problems"] = problems
    _emit(payload, args.out)
    return 0


def _cmd_report(args, seed: int, threads: int) -> int:
    params = majority.MajorityParams(args.N, args.t)
    row = elimination_trial(args.kind, params, args.z, args.runs, seed, threads)
    text = render_report(
        "elimination",
        {"kind": args.kind, "N": args.N, "t": args.t, "z": args.z,
         "runs": args.runs, "master_seed": seed},
        row,
    )
    _emit_report(text, args.out)
    return 0


def _cmd_verify(args, seed: int, threads: int) -> int:
    criteria = _parse_int_list(args.criteria) if args.criteria else list(range(1, 11))
    all_ok = True
    for k in criteria:
        t0 = time.perf_counter()
        result = acceptance.run_criterion(k, master_seed=seed, threads=threads)
        dt = time.perf_counter() - t0
        status = "PASS" if result["passed"] else "FAIL"
        print(f"criterion {k}: {status}")
        if not result["passed"]:
            all_ok = False
            for c in result["metrics"]["checks"]:
                if not c["ok"]:
                    print(f"  {c['name']}: {c['detail']}")
        print(f"[postsel] criterion {k} took {dt:.2f}s", file=sys.stderr)
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, f"criterion-{k}.json")
            write_text(path, acceptance.report_text(result))
    return 0 if all_ok else 3


def build_parser() -> _Parser:
    parser = _Parser(prog="postsel",
                     description="postselected query algorithms toolkit")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--threads", type=int, help="worker threads")
    # SUPPRESS keeps a subcommand-position flag from clobbering one given
    # before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    parents = {"parents": [common]}
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maj-run", **parents, help="run the majority algorithm on a bit string")
    p.add_argument("--bits", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--record", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_maj_run)

    p = sub.add_parser("maj-curve", **parents, help="empirical error across weights")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--weights", required=True, help="comma separated")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_maj_curve)

    p = sub.add_parser("or-demo", **parents, help="one-query OR with postselection")
    p.add_argument("--bits", required=True)
    p.add_argument("--eps0", required=True)
    p.add_argument("--mode", choices=("exact", "sample"), default="exact")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_or_demo)

    p = sub.add_parser("extract", **parents, help="acceptance polynomials of the OR demo")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps0", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("compile", **parents, help="compile spectra into an algorithm")
    p.add_argument("--spectra", required=True, help="JSON with q_hat and r_hat")
    p.add_argument("--eps")
    p.add_argument("--bits", help="also simulate this input")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compile)

    p = sub.add_parser("roundtrip", **parents, help="compile, simulate, extract, compare")
    p.add_argument("--table", required=True)
    p.add_argument("--p", required=True, help="polynomial JSON file")
    p.add_argument("--q", required=True, help="polynomial JSON file")
    p.add_argument("--eps", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_roundtrip)

    p = sub.add_parser("newman", **parents, help="rational absolute-value error sweep")
    p.add_argument("--degrees", default="16,36,64,100")
    p.add_argument("--grid", type=int, default=10000)
    p.add_argument("--csv", help="grid CSV (single degree only)")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_newman)

    p = sub.add_parser("sign", **parents, help="majority-backed sign approximant grid")
    p.add_argument("--eps", required=True)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sign)

    p = sub.add_parser("rdeg", **parents, help="exact rational-degree feasibility")
    p.add_argument("--table", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", required=True, help="exact rational, e.g. 1/10")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--scan", action="store_true",
                   help="scan degrees 0..d for the first feasible")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_rdeg)

    p = sub.add_parser("report", **parents, help="canonical elimination trial report")
    p.add_argument("--kind", choices=("A", "B"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("verify", **parents, help="run acceptance criteria")
    p.add_argument("--criteria", help="comma separated, default all")
    p.add_argument("--out-dir", help="write one report JSON per criterion")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args.config) if args.config else {}
        seed = _resolve_int(args.seed, cfg, "seed", "POSTSEL_SEED",
                            acceptance.DEFAULT_SEED)
        threads = _resolve_int(args.threads, cfg, "threads", None, 1)
        t0 = time.perf_counter()
        code = args.fn(args, seed, threads)
        print(f"[postsel] {args.command} finished in "
              f"{time.perf_counter() - t0:.2f}s", file=sys.stderr)
        return code
    except (DomainError, CapacityError) as e:
        print(f"postsel: {e}", file=sys.stderr)
        return 2
    except (PostselError, AssertionError, OSError) as e:
        print(f"postsel: internal: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
