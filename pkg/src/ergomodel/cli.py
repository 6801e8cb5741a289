"""Command-line front end.

Every command prints one JSON document (or TSV with ``--format tsv``) on
stdout and diagnostics on stderr. Exit codes: 0 success or PASS, 1 FAIL
verdict or structural failure, 2 input error, 3 resource or horizon limit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import combinations

from . import __version__
from .clopen import Clopen, ClopenAlgebra, parse_union
from .errors import ErgomodelError, InputError
from .measures import (INFINITE, birkhoff_certificate, clopen_measure, measure_for,
                       product_invariance_defects, product_vs_diagonal)
from .partitions import (letter_partition, reference_distribution, render_name,
                         scan_windows, two_set_partition, uniformity_check)
from .towers import kr_tower, return_words
from .words import DEFAULT, DEFAULT_HORIZON, LanguageOracle, Substitution, iterate_length


def fraction_arg(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational P/Q, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative rational")
    return value


def fmt(x):
    if x is INFINITE:
        return "inf"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return x


def parallel_map(fn, items, jobs):
    """Order-preserving map; the result does not depend on ``jobs``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def load_substitution(path):
    if path is None or path == "default":
        return DEFAULT
    try:
        with open(path) as fh:
            return Substitution.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read substitution file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"substitution file is not valid JSON: {exc}") from None


def oracle_for(args):
    return LanguageOracle(load_substitution(args.sub), horizon=args.horizon or DEFAULT_HORIZON)


# ------------------------------------------------------------------ commands


def cmd_subst_show(args):
    sub = load_substitution(args.sub)
    depth = args.n if args.n is not None else 6
    out = sub.to_json_obj()
    out["lengths"] = [iterate_length(sub, sub.seed, k) for k in range(depth + 1)]
    return out, 0


def cmd_lang_enum(args):
    if args.len is None:
        raise InputError("--len is required")
    lang = oracle_for(args)
    words = sorted(lang.factors(args.len))
    return {"length": args.len, "count": len(words), "words": words}, 0


def cmd_return_words(args):
    lang = oracle_for(args)
    rw = return_words(lang, args.n if args.n is not None else 1)
    return {"n": rw.n, "words": list(rw.words)}, 0


def cmd_kr_tower(args):
    lang = oracle_for(args)
    K = parse_union(args.cyl or "2", lang)
    tower, profile = kr_tower(lang, args.n if args.n is not None else 1, K)
    out = tower.to_json_obj(K)
    out["profile"] = {"h": profile.h, "h_K": profile.h_K, "H_K": profile.H_K}
    return out, 0


def cmd_measure(args):
    if not args.cyl:
        raise InputError("--cyl is required")
    lang = oracle_for(args)
    m = measure_for(lang)
    texts = args.cyl.split(",")

    def one(text):
        return fmt(clopen_measure(m, parse_union(text, lang)))

    values = parallel_map(one, texts, args.jobs)
    if len(texts) == 1:
        return values[0], 0
    return {t: v for t, v in zip(texts, values)}, 0


def compact_sets(lang, depth):
    """Every nonempty union of allowed words of length ``depth`` avoiding the fixed point."""
    words = sorted(w for w in lang.factors(depth) if set(w) != {"1"})
    out = []
    for r in range(1, len(words) + 1):
        for combo in combinations(words, r):
            out.append(Clopen(0, depth - 1, frozenset(combo)))
    return out


def _birkhoff_json(rep):
    return {
        "K": rep.K.describe(), "A": rep.A.describe(), "horizon": rep.horizon,
        "eps": fmt(rep.eps), "c": fmt(rep.c), "mu_ratio": fmt(rep.c_measure),
        "m": rep.m, "hits": rep.hits, "max_deviation": fmt(rep.max_deviation),
        "tail_bound": fmt(rep.tail_bound), "verdict": rep.verdict,
    }


def cmd_certify_ue(args):
    lang = oracle_for(args)
    m = measure_for(lang)
    K = parse_union(args.K or "2", lang)
    eps = args.eps if args.eps is not None else Fraction(1, 16)
    depth = args.depth if args.depth is not None else 14
    if args.cyl:
        sets = [parse_union(t, lang) for t in args.cyl.split(",")]
    else:
        sets = compact_sets(lang, 3)
    reports = parallel_map(lambda A: birkhoff_certificate(m, K, A, eps, depth), sets, args.jobs)
    verdict = "PASS" if all(r.verdict == "PASS" for r in reports) else "FAIL"
    out = {"verdict": verdict, "certificates": [_birkhoff_json(r) for r in reports]}
    return out, 0 if verdict == "PASS" else 1


def cmd_uniformity(args):
    lang = oracle_for(args)
    m = measure_for(lang)
    alpha = two_set_partition(lang, parse_union(args.cyl, lang)) if args.cyl else letter_partition(lang)
    k = args.k if args.k is not None else 1
    eps = args.eps if args.eps is not None else Fraction(1, 4)
    depth = args.depth if args.depth is not None else 10
    ref = reference_distribution(alpha, k, m)
    host = "1" * (alpha.width + 2) + lang.host(depth) + "1" * (alpha.width + 2)
    code = alpha.code(host)
    if args.limit:
        code = code[:args.limit]
    scan = scan_windows(code, k, ref, alpha.infinite)
    found = scan.smallest_passing(eps)
    H = args.H if args.H is not None else found
    out = {"k": k, "eps": fmt(eps), "positions": len(code), "smallest_H": found}
    if H is None:
        out["verdict"] = "FAIL"
        worst, count = scan.worst_at_or_above(max(scan.worst))
        out["worst"] = {"deviation": fmt(worst), "k_points": count}
        return out, 1
    worst, count = scan.worst_at_or_above(H)
    verdict = "PASS" if worst < eps else "FAIL"
    out.update({"H": H, "verdict": verdict,
                "worst": {"deviation": fmt(worst), "k_points": count}})
    if count is not None and worst > 0:
        start, length, block = scan.witness[count]
        out["worst"].update({"start": start, "length": length, "block": render_name(block)})
    return out, 0 if verdict == "PASS" else 1


def cmd_build_model(args):
    from .builder import BuildConfig, LedgerFailure, run_stages, triangle_check
    obj = {}
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from None
    if args.sub:
        obj["source"] = load_substitution(args.sub).to_json_obj()
    if args.stages is not None:
        obj["stages"] = args.stages
    config = BuildConfig.from_json_obj(obj)
    try:
        state = run_stages(config)
    except LedgerFailure as exc:
        state = exc.state
        print(f"ergomodel: {exc}", file=sys.stderr)
    else:
        state.ledger.append(triangle_check(state))
    out = state.to_json_obj()
    out["verdict"] = "PASS" if state.passed else "FAIL"
    return out, 0 if state.passed else 1


def cmd_product_demo(args):
    lang = oracle_for(args)
    m = measure_for(lang)
    pairs = [("212", "212"), ("212", "211")]
    rows = []
    for a, b in pairs:
        prod, diag = product_vs_diagonal(m, parse_union(a, lang), parse_union(b, lang))
        rows.append({"A": a, "B": b, "product": fmt(prod), "diagonal": fmt(diag)})
    defects = product_invariance_defects(m, 3)
    ratios = {Fraction(r["diagonal"]) / Fraction(r["product"]) for r in rows}
    verdict = "PASS" if not defects and len(ratios) > 1 else "FAIL"
    out = {"rectangles": rows, "invariance_defects": len(defects), "verdict": verdict}
    return out, 0 if verdict == "PASS" else 1


COMMANDS = {
    "subst-show": cmd_subst_show,
    "lang-enum": cmd_lang_enum,
    "return-words": cmd_return_words,
    "kr-tower": cmd_kr_tower,
    "measure": cmd_measure,
    "certify-ue": cmd_certify_ue,
    "uniformity": cmd_uniformity,
    "build-model": cmd_build_model,
    "product-demo": cmd_product_demo,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ergomodel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ergomodel {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--sub", help="substitution JSON file (default: 1->11, 2->212)")
    parser.add_argument("--n", type=int)
    parser.add_argument("--len", type=int)
    parser.add_argument("--cyl", help="cylinder(s): 212, 1.21, unions with |, lists with ,")
    parser.add_argument("--K", help="finite support cylinder for certify-ue (default 2)")
    parser.add_argument("--k", type=int)
    parser.add_argument("--eps", type=fraction_arg)
    parser.add_argument("--H", type=int)
    parser.add_argument("--stages", type=int)
    parser.add_argument("--horizon", type=int, help="longest factor length enumerated")
    parser.add_argument("--depth", type=int, help="substitution depth of the scanned host")
    parser.add_argument("--limit", type=int, help="scan at most this many coded positions")
    parser.add_argument("--config")
    parser.add_argument("--format", choices=("json", "tsv"), default="json")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--report")
    return parser


def config_hash(args) -> str:
    keys = ("command", "sub", "n", "len", "cyl", "K", "k", "eps", "H", "stages", "horizon",
            "depth", "limit", "config")
    payload = {k: fmt(getattr(args, k)) for k in keys}
    for key in ("sub", "config"):
        path = payload[key]
        if path and path != "default":
            try:
                with open(path, "rb") as fh:
                    payload[key] = hashlib.sha256(fh.read()).hexdigest()
            except OSError:
                pass
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def to_tsv(obj) -> str:
    lines = []

    def scalar(v):
        return json.dumps(v) if isinstance(v, (dict, list)) else str(v)

    def walk(prefix, v):
        if isinstance(v, dict):
            for key, sub in v.items():
                walk(f"{prefix}.{key}" if prefix else str(key), sub)
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            header = list(v[0])
            lines.append("\t".join([prefix] + header))
            for x in v:
                lines.append("\t".join([prefix] + [scalar(x.get(h)) for h in header]))
        elif isinstance(v, list):
            lines.append("\t".join([prefix] + [scalar(x) for x in v]))
        else:
            lines.append(f"{prefix}\t{scalar(v)}" if prefix else scalar(v))

    walk("", obj)
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        result, code = COMMANDS[args.command](args)
    except ErgomodelError as exc:
        print(f"ergomodel: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.format == "tsv":
        sys.stdout.write(to_tsv(result))
    else:
        sys.stdout.write(json.dumps(result, sort_keys=False) + "\n")
    if args.report:
        report = {"tool": "ergomodel", "version": __version__, "command": args.command,
                  "config_hash": config_hash(args), "exit_code": code, "result": result}
        try:
            with open(args.report, "w") as fh:
                json.dump(report, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            print(f"ergomodel: cannot write report: {exc}", file=sys.stderr)
            return 2
    return code


if __name__ == "__main__":
    raise SystemExit(main())
