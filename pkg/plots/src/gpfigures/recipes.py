"""Figure recipes over the sweep CSV schema.

Each recipe knows which rows belong to which panel and how to shape them
(heatmap pivot or line series).  Input tables must match the producer's
schema exactly; a missing column is a hard error naming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

CSV_COLUMNS = [
    "theta", "W", "lambda", "method", "phi_over_pi",
    "overlap_re", "overlap_im", "overlap_abs",
    "nodal", "degenerate", "converged",
]

SENTINELS = ("undefined", "error")


class SchemaError(ValueError):
    """Input table does not match the sweep CSV schema."""


def load_table(path: str | Path) -> pd.DataFrame:
    """Read a sweep CSV; sentinel phases become NaN with a mask column."""
    path = Path(path)
    df = pd.read_csv(path, comment="#", dtype={"phi_over_pi": str})
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")
    if df.empty:
        raise SchemaError(f"{path}: no data rows")
    df["masked"] = df["phi_over_pi"].isin(SENTINELS)
    df["phi_over_pi"] = pd.to_numeric(df["phi_over_pi"], errors="coerce")
    for col in ("nodal", "degenerate", "converged"):
        if df[col].dtype == object:
            df[col] = df[col] == "true"
    return df


@dataclass(frozen=True)
class HeatPanel:
    """One theta x W heatmap at a fixed bath width."""

    title: str
    width: float
    method: str

    def pivot(self, df: pd.DataFrame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sel = df[(df["lambda"] == self.width) & (df["method"] == self.method)]
        if sel.empty:
            raise SchemaError(f"no rows for method={self.method}, lambda={self.width}")
        grid = sel.pivot_table(index="theta", columns="W", values="phi_over_pi", dropna=False)
        thetas = grid.index.to_numpy()
        ws = grid.columns.to_numpy()
        return thetas, ws, np.ma.masked_invalid(grid.to_numpy())


@dataclass(frozen=True)
class LinePanel:
    """Phase (and companions) against theta or W at fixed other parameters."""

    title: str
    x_column: str                 # "theta" or "W"
    fixed: dict = field(default_factory=dict)
    series: tuple[str, ...] = ("phi_over_pi",)
    method: str | None = None

    def select(self, df: pd.DataFrame) -> pd.DataFrame:
        sel = df
        if self.method is not None:
            sel = sel[sel["method"] == self.method]
        for col, val in self.fixed.items():
            sel = sel[np.isclose(sel[col], val)]
        if sel.empty:
            raise SchemaError(f"no rows for panel {self.title!r} (fixed={self.fixed})")
        return sel.sort_values(self.x_column)


@dataclass(frozen=True)
class FigureRecipe:
    figure: int
    panels: tuple
    kind: str                     # "heat" | "line" | "compare"


def recipe(figure: int) -> FigureRecipe:
    if figure == 1:
        return FigureRecipe(1, (
            HeatPanel("(a) lambda = 5 (Markovian)", 5.0, "rwa-closed"),
            HeatPanel("(b) lambda = 0.05 (non-Markovian)", 0.05, "rwa-closed"),
        ), "heat")
    if figure == 4:
        return FigureRecipe(4, (
            HeatPanel("(a) lambda = 5 (Markovian)", 5.0, "heom"),
            HeatPanel("(b) lambda = 0.05 (non-Markovian)", 0.05, "heom"),
        ), "heat")
    if figure == 2:
        return FigureRecipe(2, (
            LinePanel("(a) W = 0.1", "theta", {"W": 0.1}),
            LinePanel("(b) W = 0.5", "theta", {"W": 0.5}),
            LinePanel("(c) theta = pi/3", "W", {"theta": math.pi / 3}),
            LinePanel("(d) theta = pi/10", "W", {"theta": math.pi / 10}),
        ), "line")
    if figure == 3:
        return FigureRecipe(3, (
            LinePanel("theta = pi/4 (single-mode limit)", "W", {"theta": math.pi / 4}),
        ), "line")
    if figure == 5:
        return FigureRecipe(5, (
            LinePanel(
                "W = 0.5, lambda = 0.05", "theta",
                {"W": 0.5}, series=("phi_over_pi", "overlap_abs"),
            ),
        ), "line")
    if figure == 6:
        panels = []
        for tag, lam, w in (
            ("(a) lambda=5, W=0.05", 5.0, 0.05),
            ("(b) lambda=5, W=0.5", 5.0, 0.5),
            ("(c) lambda=0.05, W=0.05", 0.05, 0.05),
            ("(d) lambda=0.05, W=0.5", 0.05, 0.5),
        ):
            panels.append(LinePanel(tag, "theta", {"lambda": lam, "W": w}))
        return FigureRecipe(6, tuple(panels), "compare")
    raise ValueError(f"figure id must be 1..6, got {figure}")
