"""Synthetic benchmark datasets and CSV input/output.

Randomness comes from numpy's ``Generator`` over the PCG64 bit generator
(O'Neill's permuted congruential generator, 128-bit state), seeded
explicitly, so every dataset is a pure function of its parameters and seed.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, ParameterError

__all__ = [
    "LabeledDataset",
    "rng",
    "two_half_moons",
    "unbalanced_gaussian",
    "scale_unit",
    "load_csv",
    "write_csv",
    "UGAUSS_SIZES",
    "UGAUSS_MEANS",
    "UGAUSS_SDS",
]

# Default unbalanced mixture: 8 components in the plane, 6500 points in total.
UGAUSS_SIZES = (2000, 1500, 1000, 800, 500, 400, 200, 100)
UGAUSS_MEANS = (
    (0.0, 0.0),
    (10.0, 0.0),
    (20.0, 0.0),
    (0.0, 10.0),
    (10.0, 10.0),
    (20.0, 10.0),
    (5.0, 20.0),
    (15.0, 20.0),
)
UGAUSS_SDS = (1.0, 1.0, 0.9, 0.8, 0.8, 0.7, 0.6, 0.5)


@dataclass
class LabeledDataset:
    data: np.ndarray  # d x n
    labels: np.ndarray | None = None
    name: str = ""
    params: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != self.data.shape[1]:
            raise ParameterError("label count must equal the number of observations")

    def manifest(self) -> dict:
        d, n = self.data.shape
        return {"name": self.name, "params": self.params, "n": n, "d": d}


def rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def two_half_moons(n: int = 1000, noise_sd: float = 0.1, seed: int = 0) -> LabeledDataset:
    """Two interlocking half circles of radius 1 in the plane.

    The upper arc is centred at the origin; the lower arc is its mirror image
    centred at ``(1, 0.5)``. The first ``ceil(n/2)`` points (label 0) lie on
    the upper arc.
    """
    if n < 2:
        raise ParameterError("need at least two points")
    n_up = (n + 1) // 2
    n_low = n - n_up
    t_up = np.linspace(0.0, np.pi, n_up)
    t_low = np.linspace(0.0, np.pi, n_low)
    up = np.vstack([np.cos(t_up), np.sin(t_up)])
    low = np.vstack([1.0 - np.cos(t_low), 0.5 - np.sin(t_low)])
    data = np.hstack([up, low])
    if noise_sd > 0:
        data = data + rng(seed).normal(scale=noise_sd, size=data.shape)
    labels = np.concatenate([np.zeros(n_up, dtype=int), np.ones(n_low, dtype=int)])
    return LabeledDataset(
        data, labels, "halfmoon", {"n": n, "noise_sd": noise_sd, "seed": seed}
    )


def scale_unit(A, report=None) -> np.ndarray:
    """Affine min-max scaling of every coordinate (row) into ``[0, 1]``.

    Constant coordinates are set to 0.5; a note is appended to ``report``
    when one is given.
    """
    A = np.asarray(A, dtype=np.float64)
    lo = A.min(axis=1, keepdims=True)
    hi = A.max(axis=1, keepdims=True)
    span = hi - lo
    out = np.empty_like(A)
    for r in range(A.shape[0]):
        if span[r, 0] > 0:
            out[r] = (A[r] - lo[r, 0]) / span[r, 0]
            # guard the endpoints against rounding
            out[r, A[r] == lo[r, 0]] = 0.0
            out[r, A[r] == hi[r, 0]] = 1.0
        else:
            out[r] = 0.5
            msg = f"coordinate {r} is constant; set to 0.5"
            if report is not None:
                report.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return out


def unbalanced_gaussian(
    seed: int = 0, sizes=UGAUSS_SIZES, means=UGAUSS_MEANS, sds=UGAUSS_SDS, scale: bool = True
) -> LabeledDataset:
    """Isotropic Gaussian mixture with very unequal component sizes, scaled to the unit box."""
    sizes = [int(s) for s in sizes]
    means = np.asarray(means, dtype=np.float64)
    sds = np.asarray(sds, dtype=np.float64).reshape(-1)
    if not (len(sizes) == means.shape[0] == sds.shape[0]):
        raise ParameterError("sizes, means and sds must describe the same components")
    if any(s < 1 for s in sizes):
        raise ParameterError("every component needs at least one point")
    g = rng(seed)
    blocks, labels = [], []
    for c, (m, mu, sd) in enumerate(zip(sizes, means, sds)):
        blocks.append(mu[:, None] + sd * g.standard_normal((means.shape[1], m)))
        labels.append(np.full(m, c, dtype=int))
    data = np.hstack(blocks)
    notes: list = []
    if scale:
        data = scale_unit(data, report=notes)
    params = {
        "seed": seed,
        "sizes": sizes,
        "means": means.tolist(),
        "sds": sds.tolist(),
        "scale": scale,
    }
    return LabeledDataset(data, np.concatenate(labels), "ugauss", params, notes)


def load_csv(path, observations_in_rows: bool = True, header: bool = False) -> np.ndarray:
    """Read a numeric CSV file into a ``d x n`` data matrix.

    With ``observations_in_rows`` each row is one observation (the usual
    layout); otherwise each column is. ``header`` skips the first row.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                vals = [float(c) for c in rec]
            except ValueError as exc:
                raise DataFormatError(f"non-numeric cell ({exc})", line=lineno) from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataFormatError(f"expected {width} fields, found {len(vals)}", line=lineno)
            rows.append(vals)
    if not rows:
        raise DataFormatError("no data rows")
    M = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise DataFormatError("non-finite value in data")
    return M.T.copy() if observations_in_rows else M


def write_csv(path, M, header=None) -> None:
    """Write rows of ``M`` as CSV atomically; floats keep full precision via ``repr``."""
    M = np.atleast_2d(np.asarray(M))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in M:
        w.writerow([repr(float(v)) if M.dtype.kind == "f" else str(v) for v in row])
    atomic_write(path, buf.getvalue())


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
