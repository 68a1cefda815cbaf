"""Flat binary and CSV serialization of spectral fields."""
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from pkg.spectral.field import SpectralField
from pkg.spectral.grid import Grid

logger = logging.getLogger(__name__)

HEADER = np.dtype([("d", "<i8"), ("n", "<i8"), ("L", "<f8"), ("real", "<i8")])


def write_binary(u: SpectralField, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([(u.grid.d, u.grid.n, u.grid.L, int(u.real))], dtype=HEADER)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(u.coeffs, dtype="<c16").tobytes())


def read_binary(path):
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    grid = Grid(int(header["d"]), int(header["n"]), float(header["L"]))
    coeffs = np.frombuffer(raw[HEADER.itemsize:], dtype="<c16")
    if coeffs.size != grid.size:
        raise ValueError(f"{path}: payload holds {coeffs.size} coefficients, header expects {grid.size}")
    return SpectralField(grid, coeffs.reshape(grid.shape), real=bool(header["real"]))


def to_frame(u: SpectralField):
    idx = u.grid.indices.reshape(u.grid.d, -1)
    columns = {f"k{a}": idx[a] for a in range(u.grid.d)}
    c = u.coeffs.reshape(-1)
    columns["real"] = c.real
    columns["imag"] = c.imag
    return pd.DataFrame(columns)


def write_csv(u: SpectralField, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    to_frame(u).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
