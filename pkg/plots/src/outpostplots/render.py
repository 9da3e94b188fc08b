"""Renderers for the five figure kinds.

Each renderer reads only the columns it declares from the outpostlab CSV
files and draws them; reference curves mandated by the figure kind (the
exp(-t^2) profile prediction) are drawn from the plotted columns alone.
Complex-plane figures keep equal aspect so geometry is not distorted.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .figspec import FigureSpec, SchemaMismatch, load_table

# identical input must give identical SVG bytes
matplotlib.rcParams["svg.hashsalt"] = "outpostplots"

FORMATS = ("svg", "png")


# -- spec access -------------------------------------------------------------------


def _input_path(spec: FigureSpec, name: str) -> str:
    try:
        value = spec.inputs[name]
    except KeyError:
        raise SchemaMismatch(
            f"{spec.kind} needs input {name!r}; got {sorted(spec.inputs)}"
        ) from None
    if not isinstance(value, str):
        raise SchemaMismatch(f"{spec.kind} input {name!r} must be a single path")
    return value


def _input_list(spec: FigureSpec, name: str) -> list[str]:
    try:
        value = spec.inputs[name]
    except KeyError:
        raise SchemaMismatch(
            f"{spec.kind} needs input {name!r}; got {sorted(spec.inputs)}"
        ) from None
    if isinstance(value, str):
        return [value]
    return list(value)


def _new_axes(spec: FigureSpec, default_size=(6.0, 4.5)):
    size = spec.style.get("figsize", default_size)
    fig = Figure(figsize=(float(size[0]), float(size[1])))
    ax = fig.add_subplot()
    if spec.style.get("title"):
        ax.set_title(str(spec.style["title"]))
    return fig, ax


def _plane_axes(spec: FigureSpec):
    fig, ax = _new_axes(spec, default_size=(6.0, 6.0))
    ax.set_aspect("equal", adjustable="datalim")
    ax.margins(0.05)
    ax.set_xlabel(spec.style.get("xlabel", "Re z"))
    ax.set_ylabel(spec.style.get("ylabel", "Im z"))
    return fig, ax


def _closed(values: np.ndarray) -> np.ndarray:
    # boundary tables hold one period; repeat the first point to close the loop
    return np.append(values, values[:1])


# -- figure kinds ------------------------------------------------------------------


def ensemble_scatter(spec: FigureSpec) -> Figure:
    pts = load_table(
        _input_path(spec, "samples"), ("sample_id", "point_id", "re", "im")
    )
    which = spec.style.get("sample_id", "all")
    if which != "all":
        pts = pts[pts["sample_id"] == int(which)]
        if pts.empty:
            raise SchemaMismatch(f"sample_id {which} not present in the samples table")
    fig, ax = _plane_axes(spec)
    ax.scatter(
        pts["re"],
        pts["im"],
        s=float(spec.style.get("marker_size", 9.0)),
        c="k",
        alpha=float(spec.style.get("alpha", 0.55)),
        linewidths=0,
        zorder=3,
    )
    for name, ls, color in (("curve1", "-", "C0"), ("curve2", "--", "C3")):
        curve = load_table(_input_path(spec, name), ("re", "im"))
        ax.plot(
            _closed(curve["re"].to_numpy()),
            _closed(curve["im"].to_numpy()),
            ls,
            color=color,
            lw=1.4,
            label={"curve1": "droplet boundary", "curve2": "outpost curve"}[name],
        )
    ax.legend(loc="upper right", fontsize="small")
    return fig


def droplet_family(spec: FigureSpec) -> Figure:
    paths = _input_list(spec, "curves")
    labels = spec.style.get("labels")
    if labels is not None and len(labels) != len(paths):
        raise SchemaMismatch(
            f"{len(labels)} labels for {len(paths)} curves; counts must match"
        )
    fig, ax = _plane_axes(spec)
    cmap = matplotlib.colormaps[spec.style.get("colormap", "viridis")]
    denom = max(len(paths) - 1, 1)
    for i, path in enumerate(paths):
        curve = load_table(path, ("re", "im"))
        ax.plot(
            _closed(curve["re"].to_numpy()),
            _closed(curve["im"].to_numpy()),
            color=cmap(i / denom),
            lw=1.3,
            label=None if labels is None else str(labels[i]),
        )
    if "outpost" in spec.inputs:
        curve = load_table(_input_path(spec, "outpost"), ("re", "im"))
        ax.plot(
            _closed(curve["re"].to_numpy()),
            _closed(curve["im"].to_numpy()),
            "--",
            color="k",
            lw=1.2,
            label="outpost curve",
        )
    if labels is not None or "outpost" in spec.inputs:
        ax.legend(loc="upper right", fontsize="x-small")
    return fig


def berezin_mass_curve(spec: FigureSpec) -> Figure:
    df = load_table(_input_path(spec, "masses"), ("a", "mass2_limit"))
    fig, ax = _new_axes(spec)
    ax.plot(df["a"], df["mass2_limit"], "-", color="C0", lw=1.6, label="limit mass")
    if "mass2_finite" in df.columns:
        ax.plot(
            df["a"],
            df["mass2_finite"],
            "o",
            color="C1",
            ms=3.5,
            label="finite n",
        )
    if spec.style.get("show_mass1"):
        df1 = load_table(_input_path(spec, "masses"), ("a", "mass1_limit"))
        ax.plot(df1["a"], df1["mass1_limit"], ":", color="C2", lw=1.4, label="droplet mass")
    if "asymptote" in spec.style:
        ax.axhline(
            float(spec.style["asymptote"]), ls=":", color="0.4", lw=1.0,
            label="asymptote",
        )
    ax.set_xlabel(spec.style.get("xlabel", "a"))
    ax.set_ylabel(spec.style.get("ylabel", "outpost mass"))
    ax.margins(x=0.02)
    ax.legend(loc="lower right", fontsize="small")
    return fig


def density_profile(spec: FigureSpec) -> Figure:
    df = load_table(
        _input_path(spec, "profile"),
        ("offset", "n_excess_potential", "log_kernel_ratio"),
    )
    t = np.sign(df["offset"].to_numpy()) * np.sqrt(df["n_excess_potential"].to_numpy())
    ratio = np.exp(df["log_kernel_ratio"].to_numpy())
    fig, ax = _new_axes(spec)
    order = np.argsort(t)
    ax.plot(t[order], ratio[order], "o", color="C0", ms=4.5, label="measured")
    tt = np.linspace(float(t.min()), float(t.max()), 256)
    ax.plot(tt, np.exp(-tt * tt), "--", color="k", lw=1.2, label=r"$e^{-t^2}$")
    ax.set_xlabel(spec.style.get("xlabel", "t"))
    ax.set_ylabel(spec.style.get("ylabel", "intensity / peak"))
    ax.legend(loc="upper right", fontsize="small")
    return fig


def heine_histogram(spec: FigureSpec) -> Figure:
    pmf = load_table(_input_path(spec, "pmf"), ("k", "p_limit"))
    counts = load_table(_input_path(spec, "counts"), ("k", "count"))
    total = counts["count"].sum()
    if total <= 0:
        raise SchemaMismatch("counts table holds no samples")
    freq = counts["count"].to_numpy() / float(total)
    # show every k that carries visible mass in any series
    series = [pmf["p_limit"].to_numpy(), freq]
    if "p_finite" in pmf.columns:
        series.append(pmf["p_finite"].to_numpy())
    last = max(int(np.max(np.nonzero(s > 1e-4)[0], initial=0)) for s in series)
    m = last + 2  # one trailing near-zero slot for visual closure
    fig, ax = _new_axes(spec)
    ax.bar(
        counts["k"][:m],
        freq[:m],
        width=0.8,
        color="C0",
        alpha=0.35,
        label="sampled frequency",
    )
    km = pmf["k"][:m].to_numpy()
    stem = ax.stem(
        km - 0.08, pmf["p_limit"][:m], linefmt="C3-", markerfmt="C3o",
        basefmt=" ", label="limit law",
    )
    stem.markerline.set_markersize(5)
    if "p_finite" in pmf.columns:
        stem = ax.stem(
            km + 0.08, pmf["p_finite"][:m], linefmt="C2-", markerfmt="C2s",
            basefmt=" ", label="finite n law",
        )
        stem.markerline.set_markersize(4)
    ax.set_xticks(range(m))
    ax.set_xlabel(spec.style.get("xlabel", "outpost count k"))
    ax.set_ylabel(spec.style.get("ylabel", "probability"))
    ax.legend(loc="upper right", fontsize="small")
    return fig


RENDERERS = {
    "ensemble_scatter": ensemble_scatter,
    "droplet_family": droplet_family,
    "berezin_mass_curve": berezin_mass_curve,
    "density_profile": density_profile,
    "heine_histogram": heine_histogram,
}


# -- output ------------------------------------------------------------------------


def _resolve_output(out: str, fmt: str | None) -> tuple[str, str]:
    root, ext = os.path.splitext(out)
    ext = ext.lower().lstrip(".")
    if fmt is None:
        fmt = ext if ext in FORMATS else "svg"
    if fmt not in FORMATS:
        raise SchemaMismatch(f"unsupported format {fmt!r}; choose from {FORMATS}")
    if ext != fmt:  # the requested format wins; keep the stem
        out = f"{root if ext in FORMATS else out}.{fmt}"
    return out, fmt


def render(
    spec: FigureSpec, out: str | None = None, fmt: str | None = None, dpi: int = 150
) -> str:
    if spec.kind not in RENDERERS:
        raise SchemaMismatch(f"unknown figure kind {spec.kind!r}")
    out = out or spec.out
    if out is None:
        raise SchemaMismatch("no output path: pass one or set 'out' in the spec")
    out, fmt = _resolve_output(out, fmt)
    fig = RENDERERS[spec.kind](spec)
    parent = os.path.dirname(os.path.abspath(out))
    os.makedirs(parent, exist_ok=True)
    if fmt == "svg":
        # a fixed hashsalt plus no date stamp keeps the bytes reproducible
        fig.savefig(out, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out, format="png", dpi=int(dpi))
    return out
