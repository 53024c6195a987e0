"""Figure rendering for the report path.

Every function writes a PNG next to the delimited output and returns the
path.  Rendering is headless (Agg); figures are deliberately plain so they
stay readable in bulk experiment directories.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_FIGSIZE = (6.4, 4.2)


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plabel(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def save_signal_plot(data: np.ndarray, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if data.ndim == 2:
        im = ax.imshow(data, cmap="viridis")
        fig.colorbar(im, ax=ax, shrink=0.85)
    else:
        ax.plot(data, lw=0.4, color="#1f3b73")
        ax.set_xlabel("sample")
    ax.set_title(title)
    return _finish(fig, path)


def save_structure_plot(table, path, q_show=(-5, -2, 0, 2, 5)) -> Path:
    """log2 S(j, q) against octave for a handful of q values."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for q in q_show:
        iq = int(np.argmin(np.abs(table.q_grid - q)))
        ax.plot(table.js, table.log2_values[:, iq], "o-", ms=3,
                label=f"q = {table.q_grid[iq]:g}")
    ax.set_xlabel("octave j")
    ax.set_ylabel(r"$\log_2 S(j, q)$")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_cumulant_plot(ctable, path) -> Path:
    """Per-octave log-cumulants with their scaling trends."""
    m_max = ctable.m_max
    fig, axes = plt.subplots(1, m_max, figsize=(3.0 * m_max, 3.0),
                             squeeze=False)
    for m in range(1, m_max + 1):
        ax = axes[0][m - 1]
        ax.plot(ctable.js, ctable.values[:, m - 1], "s-", ms=3,
                color="#8c2d04")
        ax.set_xlabel("octave j")
        ax.set_title(f"$C_{m}(j)$")
        ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_spectrum_plot(spectra: dict, path, theory=None, bounds=None,
                       title: str = "") -> Path:
    """Overlay parametric spectra; optionally a theoretical curve and the
    negative-regularity bound lines d + h*p."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    dim = 1
    for label, spec in spectra.items():
        ax.plot(spec.h, spec.L, "o-", ms=2.5, lw=1, label=label)
        dim = spec.dim
    if theory is not None:
        h, D = theory
        ok = np.isfinite(D)
        ax.plot(np.asarray(h)[ok], np.asarray(D)[ok], "k-", lw=2,
                alpha=0.6, label="theory")
    if bounds:
        h = np.linspace(-dim / max(bounds), 0.0, 32)
        for p in bounds:
            if math.isfinite(p):
                ax.plot(h, dim + h * p, "--", lw=0.8, color="gray")
    ax.set_xlabel("h")
    ax.set_ylabel("L(h)")
    ax.set_ylim(-0.1, dim + 0.25)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_eta_plot(curve, p0, path) -> Path:
    """Wavelet scaling function on its p grid with the p0 crossing."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.semilogx(curve.p_grid, curve.eta, "o-", ms=3, color="#1f3b73")
    ax.axhline(0.0, color="k", lw=0.6)
    if p0 is not None and math.isfinite(p0):
        ax.axvline(p0, color="#8c2d04", ls="--", lw=1,
                   label=f"$p_0 \\approx {p0:.2f}$")
        ax.legend(fontsize=8)
    ax.set_xlabel("p")
    ax.set_ylabel(r"$\hat\eta(p)$")
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def save_rmse_plot(rows: list[dict], path, target: str = "c2") -> Path:
    """rmse of one target against p (MFDFA drawn as a flat reference)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ps, vals = [], []
    mfdfa_val = None
    for row in rows:
        if row["estimator"] == "mfdfa":
            mfdfa_val = row["rmse"]
            continue
        ps.append(row["p"])
        vals.append(row["rmse"])
    order = np.argsort([p if math.isfinite(p) else 1e9 for p in ps])
    ps = [ps[i] for i in order]
    vals = [vals[i] for i in order]
    xs = np.arange(len(ps))
    ax.semilogy(xs, vals, "s-", color="#8c2d04", label="p-leaders")
    ax.set_xticks(xs, [plabel(p) for p in ps])
    if mfdfa_val is not None:
        ax.axhline(mfdfa_val, color="#1f3b73", ls=":", label="MFDFA")
    ax.set_xlabel("p")
    ax.set_ylabel(f"rmse({target})")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def render_bundle(bundle, outdir: str | Path, prefix: str = "analysis",
                  theory=None) -> list[Path]:
    """Render the standard figure set for one analysis bundle."""
    outdir = Path(outdir)
    written = []
    if bundle.eta_curve is not None:
        written.append(save_eta_plot(bundle.eta_curve, bundle.p0,
                                     outdir / f"{prefix}_eta.png"))
    spectra = {f"p = {plabel(p)}": r.spectrum
               for p, r in bundle.results.items()}
    if bundle.mfdfa is not None:
        spectra["MFDFA"] = bundle.mfdfa[1]
    finite_ps = [p for p in bundle.results if math.isfinite(p)]
    written.append(save_spectrum_plot(
        spectra, outdir / f"{prefix}_spectrum.png", theory=theory,
        bounds=finite_ps or None))
    for p, r in bundle.results.items():
        tag = plabel(p).replace(".", "_")
        written.append(save_structure_plot(
            r.structure, outdir / f"{prefix}_structure_p{tag}.png"))
        written.append(save_cumulant_plot(
            r.cumulant_table, outdir / f"{prefix}_cumulants_p{tag}.png"))
    return written
