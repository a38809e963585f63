"""Command-line driver: check batteries per model, deterministic report files.

Every subcommand resolves a model (``--preset`` tag or ``--model`` config
file), runs its checks over the level range ``--m A..B``, prints one
verdict line per check, and writes a JSON report (or CSV table) when
``--out`` is given.  Exit status: 0 when every verdict is PASS, 1 when a
check fails, 2 on configuration or parse errors.
"""

import argparse
import json
import sys

from . import balance, bundles, cowen_douglas, quotient, reports, shifts
from . import space, stability, symbols, szego
from .errors import (
    CertificateFailed,
    ContainmentViolation,
    NearSingularA,
    NoSpectralGap,
    NonHomogeneousGenerator,
    PolynomialParseError,
)

DEFAULT_SEED = 20240601

# named tolerance defaults, overridable via --tol name=value
TOL_DEFAULTS = {
    "kernel": 1e-10,
    "orbit": 1e-9,
    "row": 1e-10,
    "trace": 1e-8,
    "calculus": 1e-10,
    "coinvariance": 1e-9,
    "balance": 1e-9,
    "ve": 1e-8,
    "commutator": 1e-9,
    "tmap": 1e-8,
}


class ConfigError(Exception):
    pass


def _mrange(text):
    """Parse 'A..B' (or a single 'A') into an inclusive level range."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected a level range 'A..B', got %r" % text
        )
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError("empty level range %r" % text)
    return lo, hi


def _tol_pair(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError("expected --tol name=value, got %r" % text)
    try:
        val = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("tolerance %r is not a number" % value)
    if val <= 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return name, val


def _load_config(path):
    try:
        return reports.load_config(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            "%s: parse error at line %d, column %d: %s"
            % (path, exc.lineno, exc.colno, exc.msg)
        )
    except OSError as exc:
        raise ConfigError(str(exc))


def _resolve_model(args):
    if getattr(args, "model", None):
        cfg = _load_config(args.model)
        try:
            return space.model_from_config(cfg)
        except (PolynomialParseError, NonHomogeneousGenerator, ValueError, KeyError) as exc:
            raise ConfigError("%s: %s" % (args.model, exc))
    try:
        return space.from_preset(args.preset)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _resolve_bundle(model, text):
    try:
        return bundles.parse_bundle(model, text)
    except (PolynomialParseError, ValueError) as exc:
        raise ConfigError("bundle %r: %s" % (text, exc))


def _resolve_quotient(model, path):
    cfg = _load_config(path)
    try:
        if cfg.get("kind") in ("line", "direct_sum", "tangent_twist"):
            return bundles.bundle_from_config(model, cfg).quotient_realization()
        return quotient.quotient_from_config(model, cfg)
    except (PolynomialParseError, NonHomogeneousGenerator, ValueError, KeyError) as exc:
        raise ConfigError("%s: %s" % (path, exc))


def _resolve_side(model, text):
    """A guo/gieseker operand: a config file path or a bundle literal."""
    import os

    if os.path.exists(text):
        cfg = _load_config(text)
        try:
            if cfg.get("kind") in ("line", "direct_sum", "tangent_twist"):
                return bundles.bundle_from_config(model, cfg)
            return quotient.quotient_from_config(model, cfg)
        except (PolynomialParseError, NonHomogeneousGenerator, ValueError, KeyError) as exc:
            raise ConfigError("%s: %s" % (text, exc))
    return _resolve_bundle(model, text)


def _szego_quotient(spec):
    """The metric-carrying realization needed by the A_E/V_E operators."""
    q = spec.quotient_realization()
    if q.metric is None:
        q = quotient.from_toeplitz_range(spec.metric_symbol())
    return q


def _composite(check, sections, meta):
    failing = [s["check"] for s in sections if s["verdict"] != "PASS"]
    return {
        "check": check,
        "perLevel": [],
        "verdict": "PASS" if not failing else "FAIL",
        "fit": {"sections": len(sections), "failing": failing},
        "meta": meta,
        "sections": sections,
    }


def _meta(args, model, **extra):
    meta = {
        "model": model.config(),
        "mRange": list(args.m),
        "seed": args.seed,
        "tol": dict(args.tol),
    }
    meta.update(extra)
    return meta


def _emit(args, doc):
    """Print verdict lines, write the report file, return the exit code."""
    secs = doc.get("sections") or [doc]
    for s in secs:
        extra = ""
        if s["check"] == "q_isometry" and "q" in s.get("fit", {}):
            extra = " (q=%d)" % s["fit"]["q"]
        print("%s: %s%s" % (s["check"], s["verdict"], extra))
    if doc.get("sections"):
        print("%s: %s" % (doc["check"], doc["verdict"]))
    text = reports.dumps(doc) + "\n"
    if args.out:
        if args.format == "csv" or (args.format is None and args.out.endswith(".csv")):
            rows, columns = _csv_rows(doc)
            reports.write_csv(rows, columns, args.out)
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    elif not sys.stdout.isatty():
        sys.stdout.write(text)
    return 0 if doc["verdict"] == "PASS" else 1


def _csv_rows(doc):
    rows = []
    if doc.get("sections"):
        for s in doc["sections"]:
            for row in s["perLevel"]:
                out = {"check": s["check"]}
                out.update(row)
                rows.append(out)
    else:
        rows = doc["perLevel"]
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    rows = [{c: row.get(c, "") for c in columns} for row in rows]
    return rows, columns


# -- subcommands ------------------------------------------------------------


def _cmd_space(args):
    model = _resolve_model(args)
    lo, hi = args.m
    tol = args.tol.get("kernel", TOL_DEFAULTS["kernel"])
    pts = model.sample_boundary(args.samples or 50, seed=args.seed)
    import numpy as np

    rows = []
    worst = 0.0
    for m in range(lo, hi + 1):
        vals = model.basis_values(m, pts)
        res = float(np.abs((np.abs(vals) ** 2).sum(axis=1) - 1.0).max())
        worst = max(worst, res)
        rows.append({
            "m": m,
            "dim": model.dim_at(m),
            "ambientDim": model.level(m).amb_dim,
            "kernelResidual": res,
        })
    doc = {
        "check": "space",
        "perLevel": rows,
        "verdict": "PASS" if worst < tol else "FAIL",
        "fit": {"n": model.n, "dim": model.dim, "maxResidual": worst, "tol": tol},
        "meta": _meta(args, model, points=len(pts)),
    }
    return _emit(args, doc)


def _cmd_shifts(args):
    model = _resolve_model(args)
    lo, hi = args.m
    sections = []
    checks = args.check or ["orbit"]
    for check in checks:
        if check == "orbit":
            tol = args.tol.get("orbit", TOL_DEFAULTS["orbit"])
            sections.append(shifts.orbit_certificate(model, hi, tol).to_dict())
        elif check == "q-isometry":
            tol = args.tol.get("orbit", TOL_DEFAULTS["orbit"])
            sections.append(shifts.q_isometry_scan(model, hi, tol=tol).to_dict())
        elif check == "row-identity":
            tol = args.tol.get("row", TOL_DEFAULTS["row"])
            rows = [
                {"m": m, "residual": float(shifts.row_identity_residual(model, m))}
                for m in range(max(lo, 1), hi + 1)
            ]
            worst = max(r["residual"] for r in rows)
            sections.append({
                "check": "row_identity",
                "perLevel": rows,
                "verdict": "PASS" if worst < tol else "FAIL",
                "fit": {"maxResidual": worst, "tol": tol},
                "meta": {"model": model.config()},
            })
        else:  # trace
            tol = args.tol.get("trace", TOL_DEFAULTS["trace"])
            import numpy as np

            q = shifts.q_isometry_scan(model, hi).fit["q"]
            rows = []
            worst = 0.0
            for m in range(lo, hi + 1):
                for p in range(1, q + 2):
                    got = float(np.trace(shifts.defect_operator(model, p, m)).real)
                    want = shifts.defect_trace_expected(model, p, m)
                    err = abs(got - want)
                    worst = max(worst, err)
                    rows.append({"m": m, "p": p, "trace": got,
                                 "expected": float(want), "error": err})
            sections.append({
                "check": "defect_trace",
                "perLevel": rows,
                "verdict": "PASS" if worst < tol else "FAIL",
                "fit": {"maxError": worst, "tol": tol, "q": q},
                "meta": {"model": model.config()},
            })
    if len(sections) == 1:
        doc = dict(sections[0])
        doc["meta"] = dict(doc["meta"], **_meta(args, model))
        return _emit(args, doc)
    return _emit(args, _composite("shifts", sections, _meta(args, model)))


def _cmd_toeplitz(args):
    model = _resolve_model(args)
    _, hi = args.m
    tol = args.tol.get("calculus", TOL_DEFAULTS["calculus"])
    rep = symbols.calculus_report(
        model, hi, pairs=args.samples or 50, seed=args.seed, tol=tol
    )
    doc = rep.to_dict()
    doc["meta"] = dict(doc["meta"], **_meta(args, model))
    return _emit(args, doc)


def _cmd_quotient(args):
    model = _resolve_model(args)
    lo, hi = args.m
    if args.quotient:
        q = _resolve_quotient(model, args.quotient)
    else:
        q = quotient.trivial_quotient(model)
    tol = args.tol.get("coinvariance", TOL_DEFAULTS["coinvariance"])
    sections = [
        quotient.coinvariance_certificate(q, hi, tol=tol).to_dict(),
        quotient.essential_normality_report(q, hi).to_dict(),
        quotient.arveson_rank(q, hi).to_dict(),
    ]
    return _emit(args, _composite("quotient", sections, _meta(args, model)))


def _cmd_balance(args):
    model = _resolve_model(args)
    lo, hi = args.m
    spec = _resolve_bundle(model, args.bundle)
    q = spec.quotient_realization()
    tol = args.tol.get("balance", TOL_DEFAULTS["balance"])
    ctol = args.tol.get("coinvariance", TOL_DEFAULTS["coinvariance"])
    sections = [
        balance.balance_report(spec, hi, tol=tol).to_dict(),
        quotient.coinvariance_certificate(q, hi, tol=ctol).to_dict(),
    ]
    for check in args.check or []:
        if check == "tmap":
            ttol = args.tol.get("tmap", TOL_DEFAULTS["tmap"])
            for m in range(lo, hi + 1):
                run = balance.tmap_iterate(
                    q, m, samples=args.samples or 4000, seed=args.seed, tol=ttol
                )
                sections.append(run.report.to_dict())
        elif check == "ym":
            sections.append(
                balance.ym_limit_probe(
                    spec, (lo, hi), count=args.samples or 12, seed=args.seed
                ).to_dict()
            )
    meta = _meta(args, model, bundle=spec.config(), samples=args.samples)
    return _emit(args, _composite("balance", sections, meta))


def _cmd_cd_scan(args):
    model = _resolve_model(args)
    lo, hi = args.m
    if args.quotient:
        q = _resolve_quotient(model, args.quotient)
    else:
        q = _resolve_bundle(model, args.bundle).quotient_realization()
    pts = q.model.sample_boundary(args.grid, seed=args.seed)
    sections = [
        cowen_douglas.spectral_scan(q, m, pts).to_dict() for m in range(lo, hi + 1)
    ]
    meta = _meta(args, model, quotient=q.config(), grid=args.grid)
    return _emit(args, _composite("cd_scan", sections, meta))


def _cmd_stability(args):
    model = _resolve_model(args)
    lo, hi = args.m
    e = _resolve_side(model, args.e)
    f = _resolve_side(model, args.f)
    sections = [stability.guo_check(e, f, (lo, hi)).to_dict()]
    try:
        sections.append(stability.gieseker_table(e, f, (lo, hi)).to_dict())
    except ValueError:
        pass  # rank-0 side: chi growth drops degree, no reduced polynomial
    return _emit(args, _composite("stability", sections, _meta(args, model)))


def _cmd_szego(args):
    model = _resolve_model(args)
    lo, hi = args.m
    spec = _resolve_bundle(model, args.bundle)
    q = _szego_quotient(spec)
    pts = model.sample_boundary(args.points, seed=args.seed)
    vtol = args.tol.get("ve", TOL_DEFAULTS["ve"])
    ctol = args.tol.get("commutator", TOL_DEFAULTS["commutator"])
    ve = szego.ve_isometry_check(q, hi).to_dict()
    ve["verdict"] = "PASS" if ve["fit"]["maxResidual"] < vtol else "FAIL"
    ve["fit"]["tol"] = vtol
    sections = [
        ve,
        szego.hidden_szego(q, range(max(lo, 1), hi + 1), pts).to_dict(),
        szego.unitality_probe(q, range(max(lo, 1), hi + 1), pts).to_dict(),
        _commutator_section(q, max(lo, 1), hi, ctol),
    ]
    meta = _meta(args, model, bundle=spec.config(), points=args.points)
    return _emit(args, _composite("szego", sections, meta))


def _commutator_section(q, lo, hi, tol):
    rows = []
    worst = 0.0
    for m in range(lo, hi + 1):
        val = szego.commutator_trace(q, m)
        want = q.dim(m + 1) / q.dim(m) - 1.0
        err = abs(val - want)
        worst = max(worst, err)
        rows.append({"m": m, "value": val, "expected": want, "error": err})
    return {
        "check": "commutator_trace",
        "perLevel": rows,
        "verdict": "PASS" if worst < tol else "FAIL",
        "fit": {"maxError": worst, "tol": tol},
        "meta": {"quotient": q.config()},
    }


def _cmd_suite(args):
    import numpy as np

    model = _resolve_model(args)
    lo, hi = args.m
    tol = args.tol
    spec = _resolve_bundle(model, "line:1")
    q1 = spec.quotient_realization()
    sections = []

    pts = model.sample_boundary(args.samples or 50, seed=args.seed)
    rows = []
    worst = 0.0
    for m in range(lo, hi + 1):
        vals = model.basis_values(m, pts)
        res = float(np.abs((np.abs(vals) ** 2).sum(axis=1) - 1.0).max())
        worst = max(worst, res)
        rows.append({"m": m, "dim": model.dim_at(m), "kernelResidual": res})
    sections.append({
        "check": "space",
        "perLevel": rows,
        "verdict": "PASS" if worst < tol.get("kernel", TOL_DEFAULTS["kernel"]) else "FAIL",
        "fit": {"maxResidual": worst},
        "meta": {"model": model.config()},
    })

    sections.append(
        shifts.orbit_certificate(model, hi, tol.get("orbit", TOL_DEFAULTS["orbit"])).to_dict()
    )
    sections.append(shifts.q_isometry_scan(model, hi).to_dict())
    sections.append(
        symbols.calculus_report(
            model, hi, seed=args.seed, tol=tol.get("calculus", TOL_DEFAULTS["calculus"])
        ).to_dict()
    )
    sections.append(
        quotient.coinvariance_certificate(
            q1, hi, tol=tol.get("coinvariance", TOL_DEFAULTS["coinvariance"])
        ).to_dict()
    )
    sections.append(
        balance.balance_report(spec, hi, tol=tol.get("balance", TOL_DEFAULTS["balance"])).to_dict()
    )
    sections.append(szego.ve_isometry_check(_szego_quotient(spec), hi).to_dict())
    sections.append(
        _commutator_section(q1, max(lo, 1), hi, tol.get("commutator", TOL_DEFAULTS["commutator"]))
    )
    sections.append(
        cowen_douglas.spectral_scan(
            q1, max(lo, 2), model.sample_boundary(16, seed=args.seed)
        ).to_dict()
    )

    point = quotient.from_submodule_generators(model, 1, [["z2"]])
    sections.append(
        stability.guo_check(quotient.trivial_quotient(model), point, (max(lo, 2), hi)).to_dict()
    )
    # the exact polynomial fit needs dim+1 values plus the held-out pair
    glo = max(lo, 2)
    ghi = max(hi, glo + model.dim + bundles.HELD_OUT)
    sections.append(
        stability.gieseker_table(spec, bundles.line(model, 0), (glo, ghi)).to_dict()
    )

    return _emit(args, _composite("suite", sections, _meta(args, model)))


def _cmd_validate(args):
    ok, errors = reports.validate_report_file(args.file)
    if ok:
        print("valid: %s" % args.file)
        return 0
    for err in errors:
        print(err)
    return 1


# -- parser -----------------------------------------------------------------


def _add_common(sub, m_default="0..8"):
    sub.add_argument("--preset", default="cp1",
                     help="model tag: cp1 cp2 cp3 segre11 veronese_conic")
    sub.add_argument("--model", help="model config file (JSON, // comments ok)")
    sub.add_argument("--m", type=_mrange, default=_mrange(m_default),
                     metavar="A..B", help="inclusive level range")
    sub.add_argument("--tol", type=_tol_pair, action="append", default=[],
                     metavar="NAME=VALUE", help="override a named tolerance")
    sub.add_argument("--samples", type=int, help="sample/pair count where used")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", help="report file path")
    sub.add_argument("--format", choices=["json", "csv"],
                     help="output format (default: by --out suffix, else json)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gfock",
        description="Graded Fock level checks: shifts, symbols, quotients, "
        "balance, fibers, stability, asymptotics.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("space", help="level dimensions and kernel sum rule")
    _add_common(sp)
    sp.set_defaults(func=_cmd_space)

    sh = subs.add_parser("shifts", help="orbit certificate, q-isometry, traces")
    _add_common(sh)
    sh.add_argument("--check", action="append",
                    choices=["orbit", "q-isometry", "row-identity", "trace"])
    sh.set_defaults(func=_cmd_shifts)

    tp = subs.add_parser("toeplitz", help="compression calculus healthcheck")
    _add_common(tp)
    tp.set_defaults(func=_cmd_toeplitz)

    qt = subs.add_parser("quotient", help="coinvariance and essential normality")
    _add_common(qt)
    qt.add_argument("--quotient", help="quotient config file")
    qt.set_defaults(func=_cmd_quotient)

    bl = subs.add_parser("balance", help="balance defects and T-map iteration")
    _add_common(bl, m_default="0..8")
    bl.add_argument("--bundle", default="line:1",
                    help="bundle literal, e.g. line:2, tangent_twist, line:0+line:1")
    bl.add_argument("--check", action="append", choices=["tmap", "ym"])
    bl.set_defaults(func=_cmd_balance)

    cd = subs.add_parser("cd-scan", help="spectral fiber rank scan over a grid")
    _add_common(cd, m_default="2..4")
    cd.add_argument("--quotient", help="quotient config file")
    cd.add_argument("--bundle", default="line:1")
    cd.add_argument("--grid", type=int, default=100, help="number of sample points")
    cd.set_defaults(func=_cmd_cd_scan)

    st = subs.add_parser("stability", help="Guo containment and reduced-growth order")
    _add_common(st, m_default="2..10")
    st.add_argument("--e", required=True, help="ambient side: config file or bundle literal")
    st.add_argument("--f", required=True, help="contained side: config file or bundle literal")
    st.set_defaults(func=_cmd_stability)

    sz = subs.add_parser("szego", help="V_E isometry and first-order asymptotics")
    _add_common(sz, m_default="2..10")
    sz.add_argument("--bundle", default="line:1")
    sz.add_argument("--points", type=int, default=20)
    sz.set_defaults(func=_cmd_szego)

    su = subs.add_parser("suite", help="the full check battery on one model")
    _add_common(su, m_default="1..8")
    su.set_defaults(func=_cmd_suite)

    va = subs.add_parser("validate", help="validate a report file against the schema")
    va.add_argument("file")
    va.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None):
    """Entry point; returns the process exit code.

    Parameters
    ----------
    argv : list of str, optional
        Arguments without the program name; defaults to ``sys.argv[1:]``.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "tol"):
        args.tol = dict(args.tol)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except (PolynomialParseError, NonHomogeneousGenerator) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return 2
    except (CertificateFailed, ContainmentViolation, NearSingularA, NoSpectralGap) as exc:
        print("check aborted: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
