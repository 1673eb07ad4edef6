"""Command-line harness: region queries, sweeps, norms, self-test and plots.

Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.
Configuration files are flat ``key = value`` text; command-line flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# configuration -------------------------------------------------------------------

def parse_config(text: str, allowed: Sequence[str], source: str = "config") -> dict:
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{no}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise UsageError(f"{source}:{no}: unknown key {key!r}")
        out[key] = val
    return out


def _data_path(name: str):
    return resources.files("multilin").joinpath("data", name)


def load_config(path: str | None, allowed: Sequence[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    else:
        res = _data_path(p.name)
        if not res.is_file():
            raise UsageError(f"cannot read config {path}")
        text = res.read_text()
    return parse_config(text, allowed, str(path))


def merged(args: argparse.Namespace, keys: Sequence[str], defaults: dict) -> dict:
    cfg = dict(defaults)
    cfg.update(load_config(getattr(args, "config", None), keys))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def parse_number(text: str):
    """Rational literal (``3/2``, ``0.6``, ``2``) as a Fraction, ``inf`` as float infinity."""
    t = str(text).strip()
    if t.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_list(text: str, conv=float) -> list:
    try:
        return [conv(v) for v in str(text).split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed list: {text!r}") from None


def _float(text) -> float:
    return float(parse_number(text))


def _int(text) -> int:
    try:
        return int(str(text))
    except ValueError:
        raise UsageError(f"not an integer: {text!r}") from None


# CSV ---------------------------------------------------------------------------------

def write_csv(header: Sequence[str], rows: Sequence[Sequence], meta: dict, summary: dict | None,
              out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    if summary is not None:
        buf.write("#summary " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n")
    buf.write(f"#version {meta.get('version', __version__)}\n")
    buf.write(f"#seed {meta.get('seed', 0)}\n")
    buf.write(f"#grid {meta.get('grid', 'NA')}\n")
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def read_csv(path: str) -> tuple[list[str], list[dict]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise UsageError(f"{path}: empty CSV")
    reader = csv.DictReader(lines)
    rows = list(reader)
    return list(reader.fieldnames or []), rows


def _fmt(v) -> str:
    return repr(float(v))


# check-region ------------------------------------------------------------------------

def cmd_check_region(args) -> int:
    from .region import IndexTuple, check_sufficiency

    keys = ("m", "n", "r", "p", "s")
    cfg = merged(args, keys, {})
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise UsageError(f"missing {', '.join(missing)}")
    try:
        idx = IndexTuple(_int(cfg["m"]), _int(cfg["n"]), parse_number(cfg["r"]),
                         tuple(parse_list(cfg["p"], parse_number)), tuple(parse_list(cfg["s"], parse_number)))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    rec = check_sufficiency(idx).record()
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


# sweeps ---------------------------------------------------------------------------------

CE1_KEYS = ("n", "m", "r", "delta", "s", "p", "N_list", "eps_list", "P", "L", "seed", "output_dir", "out")
CE2_KEYS = ("n", "m", "l", "r", "s", "p", "tau", "tau_tail", "spacing", "L_list", "seed", "output_dir", "out")


def _out_path(cfg: dict, default_name: str) -> str | None:
    if cfg.get("out"):
        return cfg["out"]
    if cfg.get("output_dir"):
        return str(Path(cfg["output_dir"]) / default_name)
    return None


def _strictly_increasing(vals: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(vals, vals[1:]))


def cmd_ce1_sweep(args) -> int:
    from .sharpness import CE1Params, ExperimentRecord, ce1_sweep

    cfg = merged(args, CE1_KEYS, {"seed": "0"})
    d = CE1Params()
    try:
        prm = CE1Params(n=_int(cfg.get("n", d.n)), m=_int(cfg.get("m", d.m)),
                        r=_float(cfg.get("r", d.r)), delta=_float(cfg.get("delta", d.delta)),
                        s=tuple(parse_list(cfg["s"], _float)) if "s" in cfg else d.s,
                        p=tuple(parse_list(cfg["p"], _float)) if "p" in cfg else d.p,
                        points=_int(cfg.get("P", d.points)), length=_float(cfg.get("L", d.length)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    N_list = parse_list(cfg.get("N_list", "16,32,64,128,256"), _int)
    eps_list = parse_list(cfg.get("eps_list", "0.00390625,0.0078125"), _float)
    try:
        recs, masses = ce1_sweep(prm, sorted(N_list), sorted(eps_list), timing=args.timing)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [r.to_row() for r in recs]
    Ls = {r.N_or_L: r.L_functional for r in recs}
    Ns = sorted(masses)
    mono_I = _strictly_increasing([masses[N] for N in Ns])
    mono_R = all(_strictly_increasing([r.ratio for r in recs if r.eps == e]) for e in eps_list)
    e0 = min(eps_list)
    Rs = {r.N_or_L: r.ratio for r in recs if r.eps == e0}
    summary = {
        "I": ";".join(f"{N}:{_fmt(masses[N])}" for N in Ns),
        "I_increasing": mono_I,
        "R_increasing": mono_R,
        "R_growth": _fmt(Rs[Ns[-1]] / Rs[Ns[0]]),
        "L_spread": _fmt((max(Ls.values()) - min(Ls.values())) / max(Ls.values())),
    }
    ok = mono_I and mono_R
    if 64 in Ls and 256 in Ls:
        plateau = abs(Ls[256] - Ls[64]) / Ls[64]
        summary["L_plateau_64_256"] = _fmt(plateau)
        ok = ok and plateau < 0.10
    summary["status"] = "pass" if ok else "fail"
    meta = {"seed": cfg["seed"], "grid": f"P={prm.points} L={prm.length!r}"}
    write_csv(ExperimentRecord.COLUMNS, rows, meta, summary, _out_path(cfg, "ce1_sweep.csv"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ce2_sweep(args) -> int:
    from .sharpness import CE2Params, ExperimentRecord, ce2_sweep

    cfg = merged(args, CE2_KEYS, {"seed": "0"})
    d = CE2Params()
    try:
        prm = CE2Params(n=_int(cfg.get("n", d.n)), m=_int(cfg.get("m", d.m)), l=_int(cfg.get("l", d.l)),
                        r=_float(cfg.get("r", d.r)),
                        s=tuple(parse_list(cfg["s"], _float)) if "s" in cfg else d.s,
                        p=tuple(parse_list(cfg["p"], _float)) if "p" in cfg else d.p,
                        tau=_float(cfg.get("tau", d.tau)),
                        tau_tail=tuple(parse_list(cfg["tau_tail"], _float)) if "tau_tail" in cfg else d.tau_tail,
                        spacing=_float(cfg.get("spacing", d.spacing)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    L_list = parse_list(cfg.get("L_list", "12800,25600,51200"), _float)
    try:
        recs = ce2_sweep(prm, sorted(L_list), timing=args.timing)
    except (ValueError, NotImplementedError) as exc:
        raise UsageError(str(exc)) from None
    rows = [r.to_row() for r in recs]

    def spread(vals):
        return (max(vals) - min(vals)) / max(vals)

    Lf = [r.L_functional for r in recs]
    hardy_spread = max(spread([r.hardy_norms[k] for r in recs]) for k in range(prm.m))
    mono = _strictly_increasing([r.ratio for r in recs])
    ok = mono and spread(Lf) < 0.05 and hardy_spread < 0.05
    summary = {
        "L_spread": _fmt(spread(Lf)),
        "hardy_spread": _fmt(hardy_spread),
        "ratio_increasing": mono,
        "ratio_growth": _fmt(recs[-1].ratio / recs[0].ratio),
        "mu_offset": _fmt(recs[0].extra["mu_offset"]),
        "status": "pass" if ok else "fail",
    }
    meta = {"seed": cfg["seed"], "grid": f"spacing={prm.spacing!r} L={';'.join(_fmt(v) for v in sorted(L_list))}"}
    write_csv(ExperimentRecord.COLUMNS, rows, meta, summary, _out_path(cfg, "ce2_sweep.csv"))
    return EXIT_OK if ok else EXIT_FAIL


# norms -----------------------------------------------------------------------------

NORM_KINDS = ("lp", "sobolev", "standard_sobolev", "hormander", "hardy", "square", "bmo")


def cmd_norms(args) -> int:
    from .grid import Symbol, lp_norm, read_field
    from .norms import (NormReport, bmo_seminorm, hardy_norm, hormander_functional, product_sobolev_norm,
                        square_function_norm, standard_sobolev_norm)

    try:
        obj = read_field(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kind = args.kind
    r = _float(args.r)
    s = parse_list(args.s, _float) if args.s else []
    try:
        if kind == "hormander":
            if not isinstance(obj, Symbol):
                raise UsageError("hormander needs a serialized symbol")
            rep = hormander_functional(obj, r, s or [0.0] * obj.m)
        else:
            if isinstance(obj, Symbol) and kind not in ("sobolev", "standard_sobolev", "lp"):
                raise UsageError(f"{kind} needs a serialized field")
            g = obj.grid if not isinstance(obj, Symbol) else obj.product_grid
            if kind == "lp":
                if isinstance(obj, Symbol):
                    raise UsageError("lp needs a serialized field")
                val = lp_norm(obj, r)
            elif kind == "sobolev":
                val = product_sobolev_norm(obj, r, s)
            elif kind == "standard_sobolev":
                val = standard_sobolev_norm(obj, r, s[0] if s else 0.0)
            elif kind == "hardy":
                rep = hardy_norm(obj, r)
                val = None
            elif kind == "square":
                val = square_function_norm(obj, r)
            else:
                val = bmo_seminorm(obj)
            if kind != "hardy":
                rep = NormReport(float(val), ("NA", "NA"), "NA", g.summary())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_csv(("norm_id", "value", "j_min", "j_max", "argmax_j", "P", "L"), [rep.to_row(kind)],
              {"seed": 0, "grid": f"P={rep.resolution['P']} L={rep.resolution['L']!r}"}, None, args.out)
    return EXIT_OK


# plot ----------------------------------------------------------------------------------

def emit_plot(csv_path: str, x_col: str, y_col: str, svg_path: str | None, log: str = "") -> str:
    """Render ``y_col`` against ``x_col`` as SVG polylines, one per series.

    A series is a distinct ``construction`` (plus ``eps`` when present). The
    output is a deterministic function of the input file.
    """
    header, rows = read_csv(csv_path)
    for col in (x_col, y_col):
        if col not in header:
            raise UsageError(f"{csv_path}: no column {col!r}")
    if len(rows) < 2:
        raise UsageError(f"{csv_path}: need at least 2 rows")
    series: dict[str, list[tuple[float, float]]] = {}
    for no, row in enumerate(rows, start=1):
        try:
            x, y = float(row[x_col]), float(row[y_col])
        except ValueError:
            raise UsageError(f"{csv_path}: row {no} has a non-numeric value") from None
        if ("x" in log and x <= 0) or ("y" in log and y <= 0):
            raise UsageError(f"{csv_path}: row {no} has a nonpositive value on a log axis")
        key = row.get("construction", "series")
        if "eps" in row and row["eps"] not in ("", "0.0"):
            key += f" eps={row['eps']}"
        series.setdefault(key, []).append((x, y))

    def tx(v, axis):
        return math.log10(v) if axis in log else v

    pts = [(tx(x, "x"), tx(y, "y")) for s in series.values() for x, y in s]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    W, H, pad = 640, 400, 60

    def sx(v):
        return pad + (tx(v, "x") - x0) / (x1 - x0) * (W - 2 * pad)

    def sy(v):
        return H - pad - (tx(v, "y") - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W // 2}" y="{H - 15}" text-anchor="middle" font-size="13">{x_col}{" (log10)" if "x" in log else ""}</text>',
        f'<text x="15" y="{H // 2}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {H // 2})">'
        f'{y_col}{" (log10)" if "y" in log else ""}</text>',
    ]
    for k, (lo, hi, pos) in enumerate(((x0, x1, "x"), (y0, y1, "y"))):
        for i in range(5):
            v = lo + (hi - lo) * i / 4
            if pos == "x":
                px = pad + (W - 2 * pad) * i / 4
                out.append(f'<text x="{px:.2f}" y="{H - pad + 18}" text-anchor="middle" font-size="11">{v:.4g}</text>')
            else:
                py = H - pad - (H - 2 * pad) * i / 4
                out.append(f'<text x="{pad - 6}" y="{py:.2f}" text-anchor="end" font-size="11">{v:.4g}</text>')
    for i, (name, pts_) in enumerate(sorted(series.items())):
        pts_ = sorted(pts_)
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts_)
        c = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="2" points="{coords}"/>')
        out.append(f'<text x="{W - pad}" y="{pad + 16 * i}" text-anchor="end" font-size="11" fill="{c}">{name}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if svg_path:
        Path(svg_path).write_text(text)
    return text


def cmd_plot(args) -> int:
    text = emit_plot(args.csv, args.x, args.y, args.out, args.log or "")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# selftest --------------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    t0 = time.perf_counter()
    results = run_selftest(seed=_int(args.seed), quick=args.quick)
    rows = [[name, _fmt(value), _fmt(lo), _fmt(hi), "pass" if ok else "fail"]
            for name, value, lo, hi, ok in results]
    failed = [r[0] for r in rows if r[-1] == "fail"]
    summary = {"checks": len(rows), "failed": len(failed), "status": "pass" if not failed else "fail"}
    if args.timing:
        summary["wall_ms"] = f"{(time.perf_counter() - t0) * 1e3:.0f}"
    write_csv(("check", "value", "lower", "upper", "status"), rows, {"seed": args.seed, "grid": "per-check"},
              summary, args.out)
    for name in failed:
        print(f"selftest: {name} failed", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


# entry point --------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="multilin", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("check-region", help="classify an index tuple")
    p.add_argument("--config")
    for k in ("m", "n", "r", "p", "s"):
        p.add_argument(f"--{k}")
    p.set_defaults(func=cmd_check_region)

    p = sub.add_parser("ce1-sweep", help="critical-smoothness sweep over (N, eps)")
    p.add_argument("--config")
    for k in CE1_KEYS:
        p.add_argument(f"--{k.replace('_', '-')}", dest=k)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-determinism)")
    p.set_defaults(func=cmd_ce1_sweep)

    p = sub.add_parser("ce2-sweep", help="critical-integrability sweep over box lengths")
    p.add_argument("--config")
    for k in CE2_KEYS:
        p.add_argument(f"--{k.replace('_', '-')}", dest=k)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_ce2_sweep)

    p = sub.add_parser("norms", help="norm of a serialized field or symbol")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", required=True, choices=NORM_KINDS)
    p.add_argument("--r", default="2", help="exponent r or p")
    p.add_argument("--s", default="", help="comma-separated smoothness orders")
    p.add_argument("--out")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--seed", default="0")
    p.add_argument("--out")
    p.add_argument("--quick", action="store_true", help="skip the large-grid sweep checks")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", default="N_or_L")
    p.add_argument("--y", default="ratio")
    p.add_argument("--out")
    p.add_argument("--log", choices=("x", "y", "xy"))
    p.set_defaults(func=cmd_plot)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        return args.func(args)
    except UsageError as exc:
        print(f"multilin: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
