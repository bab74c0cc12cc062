"""Render sweep CSV tables as the six reference figures.

Usage:
    gp-figures --figure 1 --in fig1.csv --out fig1.png

Rendering is a pure function of the CSV bytes and the recipe: fixed
figure geometry, fonts, and color maps, Agg backend, no timestamps.
Masked (nodal-sentinel) heatmap cells render as blank.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import FigureRecipe, HeatPanel, LinePanel, SchemaError, load_table, recipe

STYLE = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
}

PHI_LABEL = r"$\Phi_g/\pi$"
THETA_LABEL = r"$\theta$ [rad]"
W_LABEL = r"$W/\omega_0$"


def _axis_label(column: str) -> str:
    return THETA_LABEL if column == "theta" else W_LABEL


def _render_heat(rec: FigureRecipe, df, fig):
    axes = fig.subplots(1, len(rec.panels))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("white")
    for ax, panel in zip(np.atleast_1d(axes), rec.panels):
        thetas, ws, grid = panel.pivot(df)
        mesh = ax.pcolormesh(ws, thetas, grid, cmap=cmap, shading="nearest")
        ax.set_title(panel.title)
        ax.set_xlabel(W_LABEL)
        ax.set_ylabel(THETA_LABEL)
        fig.colorbar(mesh, ax=ax, label=PHI_LABEL)


def _overlap_arg_over_pi(sel) -> np.ndarray:
    return np.arctan2(sel["overlap_im"], sel["overlap_re"]) / np.pi


def _render_line(rec: FigureRecipe, df, fig):
    axes = np.atleast_1d(fig.subplots(1, len(rec.panels)) if len(rec.panels) <= 2
                         else fig.subplots(2, 2)).ravel()
    for ax, panel in zip(axes, rec.panels):
        sel = panel.select(df)
        x = sel[panel.x_column]
        if "overlap_abs" in panel.series:
            ax.plot(x, sel["phi_over_pi"], "rs-", label=PHI_LABEL)
            ax.plot(x, sel["overlap_abs"], "b^-", label=r"$|\langle\psi(0)|\psi(T)\rangle|$")
        else:
            ax.plot(x, sel["phi_over_pi"], "rs", label=PHI_LABEL)
            ax.plot(x, _overlap_arg_over_pi(sel), "bx",
                    label=r"$\arg\langle\psi(0)|\psi(T)\rangle/\pi$")
        ax.set_title(panel.title)
        ax.set_xlabel(_axis_label(panel.x_column))
        ax.legend(loc="best")


def _render_compare(rec: FigureRecipe, df, fig):
    axes = np.atleast_1d(fig.subplots(2, 2)).ravel()
    for ax, panel in zip(axes, rec.panels):
        base = panel.select(df)
        heom = base[base["method"] == "heom"]
        rwa = base[base["method"] == "rwa-closed"]
        if heom.empty or rwa.empty:
            raise SchemaError(f"panel {panel.title!r} needs both heom and rwa-closed rows")
        ax.plot(heom[panel.x_column], heom["phi_over_pi"], "b-", label="exact (hierarchy)")
        ax.plot(rwa[panel.x_column], rwa["phi_over_pi"], "rs", label="RWA closed form")
        ax.set_title(panel.title)
        ax.set_xlabel(_axis_label(panel.x_column))
        ax.set_ylabel(PHI_LABEL)
        ax.legend(loc="best")


def render(figure: int, csv_path: str | Path, out_path: str | Path) -> Path:
    """Render one figure from its CSV; returns the written path.

    Raises :class:`SchemaError` before anything is written when the
    input does not validate.
    """
    rec = recipe(figure)
    df = load_table(csv_path)  # validates schema first: no file on error
    out_path = Path(out_path)
    with plt.rc_context(STYLE):
        size = (8.0, 3.2) if rec.kind == "heat" else (7.0, 5.6)
        if rec.kind == "line" and len(rec.panels) == 1:
            size = (4.2, 3.2)
        fig = plt.figure(figsize=size)
        if rec.kind == "heat":
            _render_heat(rec, df, fig)
        elif rec.kind == "compare":
            _render_compare(rec, df, fig)
        else:
            _render_line(rec, df, fig)
        fig.tight_layout()
        fig.savefig(out_path, metadata={"Software": None})
        plt.close(fig)
    return out_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gp-figures", description=__doc__)
    parser.add_argument("--figure", type=int, required=True, choices=range(1, 7))
    parser.add_argument("--in", dest="csv_in", required=True, help="sweep CSV path")
    parser.add_argument("--out", dest="out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        written = render(args.figure, args.csv_in, args.out)
    except (SchemaError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
