"""Time-sampled density-matrix trajectories.

A trajectory is a uniform time grid on [0, T] (endpoints included) with
one 2x2 density matrix per sample, tagged with the dynamical picture and
the producing channel.  The uniform grid is required by the phase
extractor's discretization-error model.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import eigh2_batch

__all__ = ["Trajectory", "write_trajectory_csv", "read_trajectory_csv"]

_CSV_FIELDS = ["t", "re_ee", "im_ee", "re_eg", "im_eg", "re_ge", "im_ge", "re_gg", "im_gg"]


@dataclass
class Trajectory:
    """Ordered (time, density matrix) samples over one evolution window."""

    times: np.ndarray            # (S+1,), ascending, uniform, starts at 0
    states: np.ndarray           # (S+1, 2, 2) complex, basis {|1>, |0>}
    picture: str = "schrodinger"
    source: str = "external"     # rwa | jc | heom | external
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.times.ndim != 1 or self.states.shape != (self.times.size, 2, 2):
            raise ValueError(
                f"shape mismatch: times {self.times.shape}, states {self.states.shape}"
            )
        if self.times.size < 2:
            raise ValueError("a trajectory needs at least two samples")
        steps = np.diff(self.times)
        if np.any(steps <= 0.0):
            raise ValueError("times must be strictly ascending")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("time grid must be uniform")

    @property
    def n_intervals(self) -> int:
        return self.times.size - 1

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def subsample(self, stride: int) -> "Trajectory":
        """Every ``stride``-th sample (endpoints preserved)."""
        if self.n_intervals % stride != 0:
            raise ValueError(f"stride {stride} does not divide {self.n_intervals} intervals")
        return Trajectory(
            self.times[::stride], self.states[::stride], self.picture, self.source, self.meta
        )

    def physicality(self) -> dict:
        """Worst-case density-matrix deviations over all samples."""
        herm = np.max(np.abs(self.states - self.states.conj().transpose(0, 2, 1)))
        trace = np.max(np.abs(self.states[:, 0, 0] + self.states[:, 1, 1] - 1.0))
        sym = 0.5 * (self.states + self.states.conj().transpose(0, 2, 1))
        eps, _, _ = eigh2_batch(sym)
        return {
            "max_herm_dev": float(herm),
            "max_trace_dev": float(trace),
            "min_eig": float(np.min(eps[:, 1])),
        }


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Write a trajectory as CSV; matrix entries split into re/im columns.

    The first line is a comment tagging the picture, source and units so
    the file is self-describing.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# picture={traj.picture} source={traj.source} units=omega0=1 basis=|1>,|0>\n")
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for t, rho in zip(traj.times, traj.states):
            row = [repr(float(t))]
            for entry in (rho[0, 0], rho[0, 1], rho[1, 0], rho[1, 1]):
                row.append(repr(float(entry.real)))
                row.append(repr(float(entry.imag)))
            writer.writerow(row)


def read_trajectory_csv(path: str | Path) -> Trajectory:
    path = Path(path)
    picture, source = "schrodinger", "external"
    times: list[float] = []
    mats: list[np.ndarray] = []
    with path.open(newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            for tok in first[1:].split():
                if tok.startswith("picture="):
                    picture = tok.split("=", 1)[1]
                elif tok.startswith("source="):
                    source = tok.split("=", 1)[1]
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        for row in reader:
            times.append(float(row["t"]))
            mats.append(
                np.array(
                    [
                        [
                            float(row["re_ee"]) + 1j * float(row["im_ee"]),
                            float(row["re_eg"]) + 1j * float(row["im_eg"]),
                        ],
                        [
                            float(row["re_ge"]) + 1j * float(row["im_ge"]),
                            float(row["re_gg"]) + 1j * float(row["im_gg"]),
                        ],
                    ]
                )
            )
    return Trajectory(np.array(times), np.array(mats), picture=picture, source=source)
