"""Command-line front end.

Verbs: derive, gauge, check, simulate, picard, norms, resonance, export.
Every run echoes its fully resolved configuration as a JSON line and writes
its artifacts under --out (default ./out).  Exit status: 0 on success, 1 on
verification failure, 2 on usage errors.  Identical argv (and seed) produce
byte-identical artifacts.

A JSON config file (--config) may supply any long-option value under its
option name with dashes replaced by underscores; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .algebra import GaussianRational, serialize_poly
from .analysis import (
    FitDegenerate,
    NormSpec,
    gauge_lipschitz_probe,
    growth_exponent_fit,
    resonance_ratio_stats,
)
from .gauge import derive_gauged, is_gauged_form
from .hierarchy import (
    build_hierarchy_equation,
    check_Y_properties,
    verify_bad_cubics,
)
from .reference import (
    REFERENCE_GAUGED_RANGE,
    REFERENCE_HIERARCHY_RANGE,
    compare_gauged_equation,
    compare_hierarchy_equation,
)
from .spectral import (
    Grid,
    SimConfig,
    compile_evaluator,
    gaussian_bump,
    plane_wave_nonlinearity,
    plane_wave_reference,
    read_snapshot,
    simulate,
    write_snapshot,
)

_RATIONAL = r"\d+(?:/\d+)?"
_REAL_RE = re.compile(rf"^(?P<re>[+-]?{_RATIONAL})$")
_IMAG_RE = re.compile(rf"^(?P<im>[+-]?(?:{_RATIONAL})?)i$")
_BOTH_RE = re.compile(rf"^(?P<re>[+-]?{_RATIONAL})(?P<im>[+-](?:{_RATIONAL})?)i$")


def _imag_fraction(body: str) -> Fraction:
    if body in ("", "+"):
        return Fraction(1)
    if body == "-":
        return Fraction(-1)
    return Fraction(body)


def parse_gaussian_rational(text: str) -> GaussianRational:
    """Parse 'a/b+c/d i' style exact complex values (also '2', 'i', '-1/2i')."""
    s = text.replace(" ", "")
    if m := _REAL_RE.match(s):
        return GaussianRational(Fraction(m.group("re")), Fraction(0))
    if m := _IMAG_RE.match(s):
        return GaussianRational(Fraction(0), _imag_fraction(m.group("im")))
    if m := _BOTH_RE.match(s):
        return GaussianRational(Fraction(m.group("re")), _imag_fraction(m.group("im")))
    raise argparse.ArgumentTypeError(f"cannot parse Gaussian rational {text!r}")


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _monitor_list(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(-1 if tok == "mass" else int(tok))
    return tuple(out)


def _echo(config: dict):
    print(json.dumps({"config": config}, sort_keys=True))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _apply_config(args: argparse.Namespace, defaults: dict):
    """Fill None-valued options from --config, then from defaults."""
    file_values = {}
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text())
        unknown = set(file_values) - set(defaults) - {"out"}
        if unknown:
            print(f"unknown config keys: {sorted(unknown)}", file=sys.stderr)
            raise SystemExit(2)
    for key, fallback in defaults.items():
        if getattr(args, key, None) is None:
            value = file_values.get(key, fallback)
            setattr(args, key, value)
    return args


# ---------------------------------------------------------------------------
# derive / gauge / export
# ---------------------------------------------------------------------------

def _equation_artifacts(prefix: str, eq, fmt: str, out: Path) -> Path:
    if fmt == "latex":
        path = out / f"{prefix}.tex"
        path.write_text(eq.latex() + "\n")
    elif fmt == "json":
        path = out / f"{prefix}.json"
        _write_json(path, eq.to_json())
    else:
        path = out / f"{prefix}.txt"
        path.write_text(serialize_poly(eq.nonlinearity) + "\n")
    return path


def cmd_derive(args) -> int:
    _apply_config(args, {"alpha": None, "format": "text", "out": "out"})
    alpha = (
        parse_gaussian_rational(args.alpha)
        if args.alpha is not None
        else GaussianRational.of(2 ** args.n)
    )
    _echo({
        "verb": "derive", "n": args.n,
        "alpha": args.alpha if args.alpha is not None else f"2^{args.n}",
        "format": args.format, "out": str(args.out),
    })
    eq = build_hierarchy_equation(args.n, alpha)
    path = _equation_artifacts(f"derive_n{args.n}", eq, args.format, _outdir(args))
    print(f"wrote {path}")
    print(eq.latex() if args.format == "latex" else serialize_poly(eq.nonlinearity))
    return 0


def cmd_gauge(args) -> int:
    _apply_config(args, {"format": "json", "out": "out"})
    _echo({"verb": "gauge", "j": args.j, "format": args.format, "out": str(args.out)})
    gd = derive_gauged(build_hierarchy_equation(2 * args.j - 1, 2 ** (2 * args.j - 1)))
    out = _outdir(args)
    if args.format == "json":
        path = out / f"gauge_j{args.j}.json"
        _write_json(path, gd.to_json())
    else:
        path = _equation_artifacts(f"gauge_j{args.j}", gd.gauged, args.format, out)
    print(f"wrote {path}")
    print(f"residual_bad_cubics: {gd.residual_bad_cubics}")
    return 0


def cmd_export(args) -> int:
    _apply_config(args, {"n_max": 5, "j_max": 3, "format": "text", "out": "out"})
    _echo({
        "verb": "export", "n_max": args.n_max, "j_max": args.j_max,
        "format": args.format, "out": str(args.out),
    })
    out = _outdir(args)
    paths = []
    for n in range(0, args.n_max + 1):
        eq = build_hierarchy_equation(n, 2 ** n)
        paths.append(_equation_artifacts(f"hierarchy_n{n}", eq, args.format, out))
    for j in range(1, args.j_max + 1):
        gd = derive_gauged(build_hierarchy_equation(2 * j - 1, 2 ** (2 * j - 1)))
        paths.append(_equation_artifacts(f"gauged_j{j}", gd.gauged, args.format, out))
    for p in paths:
        print(f"wrote {p}")
    return 0


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    _apply_config(args, {"n_max": None, "j_max": 5, "out": "out"})
    suites = [s for s in ("structure", "cubics", "goldens", "cancellation", "probe")
              if getattr(args, s)]
    if args.all or not suites:
        suites = ["structure", "cubics", "goldens", "cancellation", "probe"]
    _echo({
        "verb": "check", "suites": suites, "n_max": args.n_max,
        "j_max": args.j_max, "out": str(args.out),
    })
    results = []

    def report(name: str, ok: bool, detail: str = ""):
        results.append({"check": name, "pass": bool(ok), "detail": detail})
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))

    if "structure" in suites:
        n_max = args.n_max or 12
        for n in range(1, n_max + 1):
            try:
                rep = check_Y_properties(n)
                report(
                    f"Y structure items 1-4, n={n}", rep.items_1_to_4_pass,
                    f"single-factor exponent matches -(n+1): {rep.matches_minus_n_plus_1_exponent}, "
                    f"matches -n: {rep.matches_minus_n_exponent}",
                )
            except Exception as exc:  # PropertyViolation carries the item
                report(f"Y structure items 1-4, n={n}", False, str(exc))
    if "cubics" in suites:
        n_max = args.n_max or 9
        for n in range(1, n_max + 1):
            chk = verify_bad_cubics(n)
            report(f"bad-cubic closed form, n={n}", chk.matches)
    if "goldens" in suites:
        for n in REFERENCE_HIERARCHY_RANGE:
            diff = compare_hierarchy_equation(n)
            report(f"reference table, hierarchy n={n}", diff.matches,
                   "; ".join(f"{k}: {v}" for k, v in diff.differences.items()))
        for j in REFERENCE_GAUGED_RANGE:
            diff = compare_gauged_equation(j)
            report(f"reference table, gauged j={j}", diff.matches, "; ".join(diff.notes))
    if "cancellation" in suites:
        for j in range(1, args.j_max + 1):
            gd = derive_gauged(build_hierarchy_equation(2 * j - 1, 2 ** (2 * j - 1)))
            report(f"bad-cubic cancellation, j={j}",
                   is_gauged_form(gd.gauged) and not gd.residual_bad_cubics)
    if "probe" in suites:
        base = gauge_lipschitz_probe(0.6, 4, 0.1, trials=60, seed=0)
        doubled = gauge_lipschitz_probe(0.6, 4, 0.2, trials=60, seed=0)
        ok = np.isfinite(base.max_ratio) and np.isfinite(doubled.max_ratio) \
            and doubled.max_ratio <= 20 * base.max_ratio
        report("gauge continuity probe (s,p)=(0.6,4)", ok,
               f"max ratio {base.max_ratio:.4f} at radius 0.1, {doubled.max_ratio:.4f} at 0.2")

    all_pass = all(r["pass"] for r in results)
    _write_json(_outdir(args) / "check_report.json",
                {"results": results, "all_pass": all_pass})
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    _apply_config(args, {
        "equation": "hierarchy", "grid": 256, "length": None, "dt": 1e-3,
        "t_end": 0.1, "integrator": "IFRK4", "monitors": "mass",
        "monitor_stride": 10, "dealias": "pad", "amplitude": 0.25,
        "width": 3.0, "carrier": 0, "pw_n": 4, "pw_s": 1.0, "pw_a": "1+0j",
        "out": "out",
    })
    monitors = _monitor_list(args.monitors) if isinstance(args.monitors, str) else tuple(args.monitors)
    if -1 not in monitors:
        monitors = (-1,) + monitors
    length = args.length if args.length is not None else (
        2 * np.pi if args.equation == "planewave" else 32 * np.pi
    )
    config = {
        "verb": "simulate", "j": args.j, "equation": args.equation,
        "grid": args.grid, "length": length, "dt": args.dt, "t_end": args.t_end,
        "integrator": args.integrator, "monitors": list(monitors),
        "monitor_stride": args.monitor_stride, "dealias": args.dealias,
        "amplitude": args.amplitude, "width": args.width, "carrier": args.carrier,
        "pw_n": args.pw_n, "pw_s": args.pw_s, "pw_a": args.pw_a, "out": str(args.out),
    }
    _echo(config)
    grid = Grid(args.grid, length)
    reference = None
    if args.equation == "planewave":
        a = complex(args.pw_a)
        nl = compile_evaluator(plane_wave_nonlinearity(args.j), args.dealias)
        u0 = plane_wave_reference(args.j, args.pw_n, a, args.pw_s, 0.0, grid)
        reference = lambda t: plane_wave_reference(args.j, args.pw_n, a, args.pw_s, t, grid)
    else:
        u0 = gaussian_bump(grid, args.amplitude, args.width, carrier=args.carrier)
        if args.equation == "linear":
            nl = None
        else:
            eq = build_hierarchy_equation(2 * args.j - 1, 2 ** (2 * args.j - 1))
            if args.equation == "gauged":
                eq = derive_gauged(eq).gauged
            nl = compile_evaluator(eq.nonlinearity, args.dealias)
    cfg = SimConfig(
        j=args.j, dt=args.dt, t_end=args.t_end, dealias=args.dealias,
        integrator=args.integrator, monitors=monitors,
        monitor_stride=args.monitor_stride,
    )
    res = simulate(cfg, u0, nl, reference=reference)
    out = _outdir(args)

    csv_path = out / "timeseries.csv"
    headers = ["time", "mass"] + [
        f"{part}_I{n}" for n in monitors if n != -1 for part in ("re", "im")
    ]
    if res.l2_errors is not None:
        headers.append("l2_error")
    rows = []
    for i, t in enumerate(res.times):
        row = [repr(float(t)), repr(float(res.monitors[-1][i].real))]
        for n in monitors:
            if n == -1:
                continue
            row.append(repr(float(res.monitors[n][i].real)))
            row.append(repr(float(res.monitors[n][i].imag)))
        if res.l2_errors is not None:
            row.append(repr(float(res.l2_errors[i])))
        rows.append(",".join(row))
    csv_path.write_text(",".join(headers) + "\n" + "\n".join(rows) + "\n")

    snap_path = out / "final.bin"
    write_snapshot(snap_path, res.field, args.j)

    drift = {
        str(n): repr(float(np.max(np.abs(series - series[0]))))
        for n, series in res.monitors.items()
    }
    _write_json(out / "report.json", {
        "config": config,
        "steps": res.steps,
        "linear_phase_per_step": repr(cfg.linear_phase_per_step(grid)),
        "monitor_drift_abs": drift,
        "final_l2_error": None if res.l2_errors is None else repr(float(res.l2_errors[-1])),
    })
    print(f"wrote {csv_path}")
    print(f"wrote {snap_path}")
    return 0


# ---------------------------------------------------------------------------
# picard / norms / resonance
# ---------------------------------------------------------------------------

def cmd_picard(args) -> int:
    _apply_config(args, {"s": 0.5, "r": 2.0, "n_list": "16,32,64,128,256", "out": "out"})
    n_list = _int_list(args.n_list) if isinstance(args.n_list, str) else list(args.n_list)
    _echo({
        "verb": "picard", "j": args.j, "s": args.s, "r": args.r,
        "N_list": n_list, "out": str(args.out),
    })
    try:
        fit = growth_exponent_fit(args.j, args.s, args.r, n_list)
    except FitDegenerate as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return 1
    out = _outdir(args)
    _write_json(out / "picard_fit.json", fit.to_json())
    csv = "N,norm\n" + "\n".join(
        f"{int(N)},{repr(v)}" for N, v in zip(fit.N_values, fit.norms)
    )
    (out / "picard_norms.csv").write_text(csv + "\n")
    print(f"fitted slope {fit.slope!r} (predicted {fit.predicted!r})")
    print(f"wrote {out / 'picard_fit.json'}")
    return 0


def cmd_norms(args) -> int:
    _apply_config(args, {"s": 0.0, "r": None, "p": None, "out": "out"})
    _echo({
        "verb": "norms", "input": args.input, "s": args.s, "r": args.r,
        "p": args.p, "out": str(args.out),
    })
    f, j = read_snapshot(args.input)
    values = {"l2": repr(f.l2_norm()), "j": j, "time": repr(f.time)}
    if args.r is not None:
        values[f"fourier_lebesgue(s={args.s},r={args.r})"] = repr(
            NormSpec("fourier_lebesgue", args.s, args.r)(f)
        )
    if args.p is not None:
        values[f"modulation(s={args.s},p={args.p})"] = repr(
            NormSpec("modulation", args.s, args.p)(f)
        )
    _write_json(_outdir(args) / "norms.json", values)
    for k, v in sorted(values.items()):
        print(f"{k}: {v}")
    return 0


def cmd_resonance(args) -> int:
    _apply_config(args, {"count": 10 ** 6, "seed": 0, "out": "out"})
    _echo({
        "verb": "resonance", "j": args.j, "count": args.count,
        "seed": args.seed, "out": str(args.out),
    })
    stats = resonance_ratio_stats(args.j, args.count, args.seed)
    _write_json(_outdir(args) / "resonance.json", stats.to_json())
    print(f"kept {stats.count_kept} triples; min ratio {stats.min_ratio!r}; "
          f"median {stats.median_ratio!r}")
    return 0 if stats.min_ratio > 0 else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnls-hierarchy",
        description="Derive, gauge, verify and simulate dNLS hierarchy equations.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="artifact directory (default ./out)")
        p.add_argument("--config", default=None, help="JSON file supplying option values")

    p = sub.add_parser("derive", help="derive one hierarchy equation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", default=None, help="Gaussian rational 'a/b+c/d i' (default 2^n)")
    p.add_argument("--format", choices=("latex", "json", "text"), default=None)
    common(p)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("gauge", help="derive the gauged equation for dispersion order 2j")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--format", choices=("latex", "json", "text"), default=None)
    common(p)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("check", help="run verification suites")
    p.add_argument("--all", action="store_true")
    p.add_argument("--structure", action="store_true")
    p.add_argument("--cubics", action="store_true")
    p.add_argument("--goldens", action="store_true")
    p.add_argument("--cancellation", action="store_true")
    p.add_argument("--probe", action="store_true")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--j-max", dest="j_max", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="integrate an equation on a periodic grid")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--equation", choices=("hierarchy", "gauged", "linear", "planewave"),
                   default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--length", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--integrator", choices=("IFRK4", "ETDRK4"), default=None)
    p.add_argument("--monitors", default=None,
                   help="comma list of functional indices; 'mass' means the L2 mass")
    p.add_argument("--monitor-stride", dest="monitor_stride", type=int, default=None)
    p.add_argument("--dealias", choices=("pad", "truncate"), default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--width", type=float, default=None)
    p.add_argument("--carrier", type=int, default=None)
    p.add_argument("--pw-N", dest="pw_n", type=int, default=None)
    p.add_argument("--pw-s", dest="pw_s", type=float, default=None)
    p.add_argument("--pw-a", dest="pw_a", default=None)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("picard", help="third-Picard-iterate growth experiment")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--N-list", dest="n_list", default=None)
    common(p)
    p.set_defaults(func=cmd_picard)

    p = sub.add_parser("norms", help="norms of a stored snapshot")
    p.add_argument("--input", required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("resonance", help="sample the resonance comparison")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("export", help="export derived equations as artifacts")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--j-max", dest="j_max", type=int, default=None)
    p.add_argument("--format", choices=("latex", "json", "text"), default=None)
    common(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
