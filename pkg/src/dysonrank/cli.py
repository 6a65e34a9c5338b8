"""Command-line interface: exact expansions, identity verification, audits and numeric checks.

Output is JSON by default (an envelope with a schema tag) or CSV with --format csv.
Exit codes: 0 success or verified, 1 identity or law failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from typing import Any, Optional, Sequence

from . import __version__
from . import identities as ids
from . import modular as md
from .qfunctions import RANK_ORACLE_BOUND, SERIES_NAMES, EtaQuotientSpec, named_series, rank_oracle, rank_table_from_series
from .series import QExp, SeriesError, dissect

SCHEMA = "dysonrank/1"

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class UsageError(Exception):
    pass


# output helpers


def _envelope(verb: str, result: Any, **extra) -> dict:
    out = {"schema": SCHEMA, "verb": verb}
    out.update(extra)
    out["result"] = result
    return out


def _emit(payload: dict, rows: Optional[list[dict]], fmt: str, out) -> None:
    if fmt == "csv":
        if rows is None:
            raise UsageError(f"verb {payload['verb']} has no CSV form")
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(payload, indent=2, default=str))
        out.write("\n")


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if p < 5 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise argparse.ArgumentTypeError(f"{p} is not a prime >= 5")
    return p


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _point(text: str) -> complex:
    try:
        z = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}")
    if z.imag <= 0:
        raise argparse.ArgumentTypeError("point must lie in the upper half-plane")
    return z


# verbs


def cmd_rank_table(args) -> tuple[dict, list[dict], int]:
    t = args.mod
    if args.method == "series":
        try:
            _prime(str(t))
        except argparse.ArgumentTypeError as e:
            raise UsageError(f"--method series needs a prime modulus: {e}")
        table = rank_table_from_series(t, args.n + 1)
        counts = {n: table[n] for n in range(args.n + 1)}
    else:
        if args.n > RANK_ORACLE_BOUND:
            raise UsageError(f"--n must be at most {RANK_ORACLE_BOUND} for the combinatorial methods")
        tab = rank_oracle(args.n, args.method)
        counts = {n: [tab.residue_count(r, t, n) for r in range(t)] for n in range(args.n + 1)}
    rows = [{"n": n, **{f"r{r}": c[r] for r in range(t)}} for n, c in counts.items()]
    result = {"mod": t, "n_max": args.n, "method": args.method, "rows": {str(n): c for n, c in counts.items()}}
    return _envelope("rank-table", result), rows, 0


def _series_rows(f: QExp) -> list[dict]:
    return [{"exponent": str(e), "coeff": json.dumps(c.to_json())} for e, c in f.items()]


def cmd_qexpand(args) -> tuple[dict, list[dict], int]:
    f = named_series(args.name, args.prec)
    return _envelope("qexpand", f.to_json(), name=args.name, prec=args.prec), _series_rows(f), 0


def cmd_dissect(args) -> tuple[dict, list[dict], int]:
    f = named_series(args.name, args.prec)
    residues = [args.residue % args.mod] if args.residue is not None else list(range(args.mod))
    parts = {str(r): dissect(f, args.mod, r) for r in residues}
    rows = [{"residue": r, **row} for r, g in parts.items() for row in _series_rows(g)]
    result = {r: g.to_json() for r, g in parts.items()}
    return _envelope("dissect", result, name=args.name, mod=args.mod), rows, 0


def cmd_verify(args) -> tuple[dict, list[dict], int]:
    if args.identity not in ids.VERIFIERS:
        raise UsageError(f"unknown identity {args.identity!r}; known: {', '.join(ids.VERIFIERS)}")
    fn = ids.VERIFIERS[args.identity]
    rep = fn(args.prec) if args.prec is not None else fn()
    row = {k: v for k, v in rep.to_json().items() if not isinstance(v, dict)}
    return _envelope("verify", rep.to_json()), [row], 0 if rep.ok else 1


def cmd_check_transform(args) -> tuple[dict, list[dict], int]:
    from . import numeric as nm

    if args.all:
        jobs = nm.transform_matrix()
    else:
        if not args.law:
            raise UsageError("give a law name or --all")
        if args.law not in nm.LAWS:
            raise UsageError(f"unknown law {args.law!r}; known: {', '.join(nm.LAWS)}")
        points = args.point or list(nm.POINTS[:3])
        jobs = [(args.law, args.params, z) for z in points]
    reports = nm.run_matrix(jobs, args.tol)
    data = [r.to_json() for r in reports]
    rows = [
        {
            "law": d["law"],
            "params": " ".join(map(str, d["params"])),
            "re_z": d["point"][0],
            "im_z": d["point"][1],
            "branch": d["branch"],
            "residual": d["residual"],
            "tol": d["tol"],
            "pass": d["pass"],
            "seconds": round(d["seconds"], 3),
        }
        for d in data
    ]
    ok = all(r.passed for r in reports)
    return _envelope("check-transform", data, passed=ok), rows, 0 if ok else 1


def _parse_eta(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for item in text.split(","):
        try:
            m, r = item.split(":")
            out.append((int(m), int(r)))
        except ValueError:
            raise UsageError(f"eta factors are m:r pairs separated by commas, got {item!r}")
    return tuple(out)


def cmd_cusp_orders(args) -> tuple[dict, list[dict], int]:
    if args.eta:
        if args.p is None:
            raise UsageError("--eta needs --p")
        try:
            spec = EtaQuotientSpec(eta=_parse_eta(args.eta))
        except ValueError as e:
            raise UsageError(str(e))
        table = {str(c): [md.ord_spec(spec, c)] for c in md.cusps_gamma1(args.p)}
        p, labels = args.p, ["ord"]
    else:
        table = md.j11_order_table()
        p, labels = 11, [f"j11_{k}" for k in range(1, 6)]
    widths = {str(c): md.fan_width(p, c) for c in md.cusps_gamma1(p)}
    result = {
        "p": p,
        "columns": labels,
        "cusps": {c: {"width": widths[c], "ord": [str(x) for x in v]} for c, v in table.items()},
    }
    rows = [{"cusp": c, "width": widths[c], **{lab: str(x) for lab, x in zip(labels, v)}} for c, v in table.items()]
    return _envelope("cusp-orders", result), rows, 0


def _audit(args) -> md.AuditReport:
    if args.identity == "rank-11":
        return md.rank11_audit()
    if args.identity == "rank-13":
        return md.rank13_audit()
    if args.identity is not None:
        raise UsageError("--identity must be rank-11 or rank-13")
    if args.p not in (5, 7):
        raise UsageError("--p must be 5 or 7 (or use --identity)")
    return md.dyson_audit(args.p)


def cmd_audit_valence(args) -> tuple[dict, list[dict], int]:
    rep = _audit(args)
    data = rep.to_json()
    return _envelope("audit-valence", data), data["rows"], 0


def _multiplier_checks(seed: int, pairs: int = 200, level_samples: int = 50) -> dict:
    rng = random.Random(seed)
    out = {}
    for p in (5, 7, 11, 13):
        bad_cocycle = 0
        for _ in range(pairs):
            A, B = md.random_gamma0(p, rng), md.random_gamma0(p, rng)
            ell = rng.randint(1, p - 1)
            bad_cocycle += not md.mu_cocycle_holds(A, B, ell, p)
        bad_trivial = 0
        for _ in range(level_samples):
            A = md.random_gamma0_p2_gamma1(p, rng)
            ell = rng.randint(1, p - 1)
            bad_trivial += md.mu_multiplier(A, ell, p)[0] != md.UnitAngle(0)
        out[str(p)] = {
            "generators": [g.to_json() for g in md.rademacher_generators(p)],
            "cocycle_pairs": pairs,
            "cocycle_failures": bad_cocycle,
            "trivial_samples": level_samples,
            "trivial_failures": bad_trivial,
        }
    return out


def cmd_report(args) -> tuple[dict, list[dict], int]:
    started = time.perf_counter()
    verifications = []
    for name, fn in ids.VERIFIERS.items():
        verifications.append(fn().to_json())
    audits = {
        "dyson-5": md.dyson_audit(5).to_json(),
        "dyson-7": md.dyson_audit(7).to_json(),
        "rank-11": md.rank11_audit().to_json(),
        "rank-13": md.rank13_audit().to_json(),
    }
    mult = _multiplier_checks(args.seed)
    ok = all(v["status"] == "verified" for v in verifications)
    ok = ok and all(m["cocycle_failures"] == 0 and m["trivial_failures"] == 0 for m in mult.values())
    result = {"verifications": verifications, "audits": audits, "multipliers": mult}
    if args.numeric:
        from . import numeric as nm

        reports = nm.run_matrix()
        result["numeric"] = [r.to_json() for r in reports]
        ok = ok and all(r.passed for r in reports)
    result["seconds"] = round(time.perf_counter() - started, 2)
    rows = [{"item": v["name"], "status": v["status"]} for v in verifications]
    rows += [{"item": f"audit {k}", "status": "vanishing" if a["forces_vanishing"] else "bound"} for k, a in audits.items()]
    return _envelope("report", result, seed=args.seed, passed=ok), rows, 0 if ok else 1


# parser


def build_parser() -> argparse.ArgumentParser:
    def shared(default):
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--format", choices=["json", "csv"], default=default, help="output format (default json)")
        p.add_argument("--config", default=default, help="TOML file with default option values")
        return p

    # options may come before or after the verb; the copy on each verb must not reset them
    ap = argparse.ArgumentParser(prog="dysonrank", description=__doc__.splitlines()[0], parents=[shared(None)])
    common = shared(argparse.SUPPRESS)
    ap.add_argument("--version", action="version", version=f"dysonrank {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("rank-table", parents=[common], help="counts N(r, t, n) of partitions by rank residue")
    p.add_argument("--n", type=int, required=True, help="largest n")
    p.add_argument("--mod", type=_positive, required=True, help="modulus t")
    p.add_argument("--method", choices=["box", "enumerate", "series"], default="box")
    p.set_defaults(func=cmd_rank_table)

    p = sub.add_parser("qexpand", parents=[common], help="exact q-expansion of a named series")
    p.add_argument("name", help="series key, e.g. 'Phi 5 2'; known: " + "; ".join(SERIES_NAMES))
    p.add_argument("--prec", type=_positive, default=20)
    p.set_defaults(func=cmd_qexpand)

    p = sub.add_parser("dissect", parents=[common], help="terms of a named series in a residue class")
    p.add_argument("name")
    p.add_argument("--prec", type=_positive, default=50)
    p.add_argument("--mod", type=_positive, required=True)
    p.add_argument("--residue", type=int)
    p.set_defaults(func=cmd_dissect)

    p = sub.add_parser("verify", parents=[common], help="verify an identity to a q-power")
    p.add_argument("identity", help="one of: " + ", ".join(ids.VERIFIERS))
    p.add_argument("--prec", type=_positive)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check-transform", parents=[common], help="numeric residuals of transformation laws")
    p.add_argument("law", nargs="?")
    p.add_argument("--params", type=_int_list, default=())
    p.add_argument("--point", type=_point, action="append", help="repeatable; e.g. 0.25+1j")
    p.add_argument("--all", action="store_true", help="run the full law/parameter/point matrix")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_check_transform)

    p = sub.add_parser("cusp-orders", parents=[common], help="orders of eta quotients at the cusps of Gamma_1(p)")
    p.add_argument("--eta", help="eta quotient as m:r pairs, e.g. '1:-1,11:1'; default the j_{11,k} table")
    p.add_argument("--p", type=_prime)
    p.set_defaults(func=cmd_cusp_orders)

    p = sub.add_parser("audit-valence", parents=[common], help="valence-formula audit")
    p.add_argument("--p", type=_prime)
    p.add_argument("--identity", choices=["rank-11", "rank-13"])
    p.set_defaults(func=cmd_audit_valence)

    p = sub.add_parser("report", parents=[common], help="all verifications, audits and multiplier checks")
    p.add_argument("--numeric", action="store_true", help="include the numeric transformation matrix")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, "rb") as fh:
            cfg = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise UsageError(f"cannot read config: {e}")
    # top-level keys apply to every verb, a [verb] table to that verb; explicit flags win
    defaults = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    defaults.update(cfg.get(args.verb, {}))
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for k, v in defaults.items():
        k = k.replace("-", "_")
        if not hasattr(args, k):
            raise UsageError(f"config key {k!r} is not an option of {args.verb}")
        if k not in given:
            setattr(args, k, v)
    return args


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        payload, rows, code = args.func(args)
        _emit(payload, rows, args.format or "json", out)
        return code
    except SystemExit as e:
        # argparse exits 2 on bad usage and 0 on --help/--version
        return int(e.code or 0)
    except (UsageError, KeyError, ValueError, SeriesError, ArithmeticError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
        print(f"dysonrank: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
