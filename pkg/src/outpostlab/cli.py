"""Command line front end.

Every command writes into --out: a deterministic manifest.json with the fully
resolved configuration (no timestamps, sorted keys) plus the data files listed
in the command help.  Files are written atomically (temp file then rename) so
partial runs never leave a readable but truncated artifact.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, sampler, verify
from .errors import OutpostLabError
from .opoly import build_spectral
from .potential import (
    MODEL_KINDS,
    PotentialModel,
    build_model_from_config,
    parse_model_file,
)
from .szego import SignConvention, SzegoContext


# -- atomic artifact writers --------------------------------------------------------


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_csv(path: str, header: list[str], rows) -> None:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue())


def _manifest(args: argparse.Namespace, model_cfg: dict | None) -> dict:
    drop = {"out", "func", "command", "model"}
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in drop and v is not None
    }
    return {
        "command": args.command,
        "config": resolved,
        "model": model_cfg,
        "version": __version__,
    }


# -- model resolution ----------------------------------------------------------------


def _model_config(args: argparse.Namespace) -> dict:
    if args.model:
        return parse_model_file(args.model)
    if not args.kind:
        raise OutpostLabError("need --model FILE or --kind KIND")
    cfg = {"kind": args.kind}
    for key in ("r1", "r2", "t0"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "alpha", None) is not None:
        cfg["alpha_re"] = args.alpha
    if getattr(args, "gap_fill", None):
        cfg["gap_fill"] = args.gap_fill
    return cfg


def _resolve(args: argparse.Namespace) -> tuple[PotentialModel, dict]:
    cfg = _model_config(args)
    return build_model_from_config(cfg), cfg


def _sign(args: argparse.Namespace, model: PotentialModel) -> SignConvention:
    choice = getattr(args, "sign", "minus_c") or "minus_c"
    if choice == "auto":
        verdict, _ = verify.resolve_sign_convention(model)
        return verdict
    return SignConvention(choice)


# -- subcommands ------------------------------------------------------------------------


def cmd_model(args) -> int:
    model, cfg = _resolve(args)
    out = args.out
    summary = {
        "kind": model.kind,
        "params": {k: v for k, v in cfg.items() if k != "kind"},
        "capacity": model.cap,
        "area": model.area,
        "rho2": model.geom.rho2 if model.has_outpost else None,
        "gap_band": [model.geom.gap_lo, model.geom.gap_hi] if model.has_outpost else None,
        "cutoff": model.geom.cap_out,
        "c": model.c if model.has_outpost else None,
        "curve_laplacians": {
            "curve1": model.laplacian_curve(1),
            "curve2": model.laplacian_curve(2) if model.has_outpost else None,
        },
    }
    if model.has_outpost:
        ctx = SzegoContext.from_model(model, sign=_sign(args, model))
        summary.update(theta=ctx.theta, q=ctx.q, mu=ctx.mu)
    write_json(os.path.join(out, "model_summary.json"), summary)
    for curve in (1, 2) if model.has_outpost else (1,):
        pts = model.curve_points(curve, args.points)
        write_csv(
            os.path.join(out, f"boundary_curve{curve}.csv"),
            ["re", "im"],
            [(float(z.real), float(z.imag)) for z in pts],
        )
    write_json(os.path.join(out, "manifest.json"), _manifest(args, cfg))
    print(f"model written to {out}")
    return 0


def cmd_kernel(args) -> int:
    model, cfg = _resolve(args)
    if not model.is_radial():
        raise OutpostLabError("kernel profiles need a rotation-invariant model")
    sp = build_spectral(model, args.n)
    rows = []
    for a, b in model.radial_support_cells():
        rs = np.linspace(a, b, max(8, args.points // len(model.radial_support_cells())))
        ks = sp.kernel_diag(rs)
        for r, k in zip(rs, ks):
            v = float(k)
            rows.append(
                (
                    float(r), 0.0, float(r), 0.0, v, 0.0,
                    math.log10(abs(v)) if v != 0 else float("-inf"),
                )
            )
    write_csv(
        os.path.join(args.out, "kernel_diag.csv"),
        ["re_z", "im_z", "re_w", "im_w", "re_K", "im_K", "log10_abs_K"],
        rows,
    )
    write_json(os.path.join(args.out, "manifest.json"), _manifest(args, cfg))
    print(f"kernel diagonal ({args.n} modes) written to {args.out}")
    return 0


def cmd_sample(args) -> int:
    model, cfg = _resolve(args)
    out = args.out
    n = args.n
    counts = None
    if args.method == "dpp":
        sp = build_spectral(model, n)
        pts = sampler.sample_dpp_many(sp, seed=args.seed, num_samples=args.num)
    elif args.method == "mcmc":
        pts = sampler.sample_mcmc(model, n, seed=args.seed, num_samples=args.num)
    else:  # kostlan: modulus law only, counts without positions
        if not model.is_radial():
            raise OutpostLabError("kostlan counts need a rotation-invariant model")
        sp = build_spectral(model, n)
        counts = sampler.sample_counts(sp.occupancies(), seed=args.seed, num_samples=args.num)
        pts = None
    if pts is not None:
        rows = [
            (i, j, float(z.real), float(z.imag))
            for i, row in enumerate(pts)
            for j, z in enumerate(row)
        ]
        write_csv(
            os.path.join(out, "samples.csv"),
            ["sample_id", "point_id", "re", "im"],
            rows,
        )
        if model.has_outpost:
            counts = np.array([sampler.outpost_count(model, row) for row in pts])
    if counts is not None:
        hist = np.bincount(counts, minlength=8)
        write_csv(
            os.path.join(out, "counts.csv"),
            ["k", "count"],
            list(enumerate(int(c) for c in hist)),
        )
        stats = {"mean": float(np.mean(counts)), "var": float(np.var(counts)),
                 "num_samples": args.num}
        if model.has_outpost and model.is_radial():
            # exact reference moments come from the 1-D moment split
            sp = build_spectral(model, n)
            em, ev = sampler.count_moments(sp.occupancies())
            stats.update(exact_mean=em, exact_var=ev)
        write_json(os.path.join(out, "counts_summary.json"), stats)
    write_json(os.path.join(out, "manifest.json"), _manifest(args, cfg))
    print(f"{args.num} samples ({args.method}, n={n}) written to {out}")
    return 0


def cmd_berezin(args) -> int:
    model, cfg = _resolve(args)
    if not model.has_outpost:
        raise OutpostLabError("berezin masses need an outpost")
    if args.a_min is None:
        args.a_min = 1.2 * model.geom.rho2
    ctx = SzegoContext.from_model(model, sign=_sign(args, model))
    sp = build_spectral(model, args.n) if args.n else None
    rows = []
    for a in np.linspace(args.a_min, args.a_max, args.points):
        z = complex(model.frame.psi(a))
        m1, m2 = ctx.berezin_masses(z)
        row = [float(a), m1, m2]
        if sp is not None:
            row.append(verify.berezin_mass2_finite(sp, z))
        rows.append(tuple(row))
    header = ["a", "mass1_limit", "mass2_limit"] + (["mass2_finite"] if sp else [])
    write_csv(os.path.join(args.out, "berezin_mass.csv"), header, rows)
    write_json(os.path.join(args.out, "manifest.json"), _manifest(args, cfg))
    print(f"berezin masses on {args.points} points written to {args.out}")
    return 0


def cmd_heine(args) -> int:
    model, cfg = _resolve(args)
    if not model.has_outpost:
        raise OutpostLabError("the counting law needs an outpost")
    ctx = SzegoContext.from_model(model, sign=_sign(args, model))
    limit = ctx.pmf()
    finite = None
    if args.n:
        sp = build_spectral(model, args.n)
        finite = verify.poisson_binomial(sp.occupancies())
    kmax = len(limit) if finite is None else max(len(limit), len(finite))
    rows = []
    for k in range(kmax):
        row = [k, float(limit[k]) if k < len(limit) else 0.0]
        if finite is not None:
            row.append(float(finite[k]) if k < len(finite) else 0.0)
        rows.append(tuple(row))
    header = ["k", "p_limit"] + (["p_finite"] if finite is not None else [])
    write_csv(os.path.join(args.out, "heine_pmf.csv"), header, rows)
    write_json(os.path.join(args.out, "manifest.json"), _manifest(args, cfg))
    print(f"counting law written to {args.out}")
    return 0


_CHECKS = {
    "ginibre_control": lambda model, args: verify.check_ginibre_control(),
    "trace": lambda model, args: verify.check_trace(
        model, args.n or 32, tol=args.tol or 1e-8
    ),
    "szego": lambda model, args: verify.check_szego_convergence(model),
    "density": lambda model, args: verify.check_outpost_density(model),
    "heine": lambda model, args: verify.check_heine(model),
    "berezin": lambda model, args: verify.check_berezin(model, n=args.n or 64),
    "far_field": lambda model, args: verify.check_far_field(model, n=args.n or 64),
    "approximants": lambda model, args: verify.check_mode_approximants(model),
    "sampler": lambda model, args: verify.check_sampler(model, seed=args.seed),
}


def cmd_verify(args) -> int:
    model, cfg = _resolve(args)
    names = list(_CHECKS) if args.check == "all" else [args.check]
    if args.sign == "auto":
        verdict, rep = verify.resolve_sign_convention(model)
        write_json(os.path.join(args.out, "report_sign_convention.json"), rep.to_dict())
        print(f"sign_convention: {verdict.value}")
    failed = []
    for name in names:
        if name in ("szego", "density", "heine", "far_field", "approximants",
                    "sampler", "berezin") and not model.has_outpost:
            continue
        rep = _CHECKS[name](model, args)
        write_json(
            os.path.join(args.out, f"report_{rep.theorem}.json"), rep.to_dict()
        )
        if rep.theorem == "outpost_density":
            s, x, y = verify.density_profile(model, args.ns_last or 128)
            write_csv(
                os.path.join(args.out, "profile.csv"),
                ["offset", "n_excess_potential", "log_kernel_ratio"],
                list(zip(map(float, s), map(float, x), map(float, y))),
            )
        status = "pass" if rep.passed else "FAIL"
        print(f"{rep.theorem}: {status}  deviations {['%.3g' % d for d in rep.deviations]}")
        if not rep.passed:
            failed.append(rep.theorem)
    write_json(os.path.join(args.out, "manifest.json"), _manifest(args, cfg))
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# -- parser ---------------------------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="model description file (key=value lines)")
    p.add_argument("--kind", choices=sorted(MODEL_KINDS), help="inline model kind")
    p.add_argument("--r1", type=float, help="droplet scale parameter")
    p.add_argument("--r2", type=float, help="outpost curve location")
    p.add_argument("--t0", type=float, help="outpost curve laplacian")
    p.add_argument("--alpha", type=float, help="asymmetry parameter")
    p.add_argument("--gap-fill", choices=["infinite", "smooth"], dest="gap_fill")
    p.add_argument("--sign", choices=["minus_c", "plus_c", "auto"], default="minus_c")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="outpostlab",
        description="planar ensembles whose coincidence set carries a Jordan-curve outpost",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="geometry, constants, and boundary curves")
    _add_model_flags(p)
    p.add_argument("--points", type=int, default=512, help="boundary samples per curve")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("kernel", help="kernel diagonal profile over the support")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--points", type=int, default=400)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("sample", help="draw point configurations or counts")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--num", type=int, default=100, help="number of samples")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--method", choices=["dpp", "kostlan", "mcmc"], default="dpp")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("berezin", help="boundary measure masses from exterior points")
    _add_model_flags(p)
    p.add_argument("--n", type=int, help="also tabulate the finite-n mass")
    p.add_argument("--a-min", type=float, default=None, dest="a_min")
    p.add_argument("--a-max", type=float, default=4.0, dest="a_max")
    p.add_argument("--points", type=int, default=40)
    p.set_defaults(func=cmd_berezin)

    p = sub.add_parser("heine", help="limiting and finite-n outpost count laws")
    _add_model_flags(p)
    p.add_argument("--n", type=int, help="also tabulate the finite-n law")
    p.set_defaults(func=cmd_heine)

    p = sub.add_parser("verify", help="run numerical checks and write reports")
    _add_model_flags(p)
    p.add_argument("--check", choices=["all", *_CHECKS], default="all")
    p.add_argument("--n", type=int, help="override n where a check takes one")
    p.add_argument("--ns-last", type=int, dest="ns_last",
                   help="n used for the written density profile")
    p.add_argument("--seed", type=int, default=2026)
    p.add_argument("--tol", type=float, help="override the primary tolerance")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutpostLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
