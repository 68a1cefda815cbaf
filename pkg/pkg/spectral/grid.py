from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with n points per axis and period L per axis."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"period must be positive, got {self.L}")

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self):
        return self.n ** self.d

    @property
    def cell_volume(self):
        return (self.L / self.n) ** self.d

    @property
    def measure(self):
        return self.L ** self.d

    @property
    def nyquist(self):
        return self.n // 2

    @cached_property
    def indices(self):
        # integer mode numbers per axis, shape (d, *shape); Nyquist stored as -n/2
        k1 = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        return np.stack(np.meshgrid(*([k1] * self.d), indexing="ij"))

    @cached_property
    def wavenumbers(self):
        return self.indices * (2.0 * np.pi / self.L)

    @cached_property
    def wavenumber_norm(self):
        return np.sqrt(np.sum(self.wavenumbers ** 2, axis=0))

    @cached_property
    def nyquist_mask(self):
        return np.any(np.abs(self.indices) == self.nyquist, axis=0)

    @cached_property
    def points(self):
        x1 = np.arange(self.n) * (self.L / self.n)
        return np.stack(np.meshgrid(*([x1] * self.d), indexing="ij"))

    def with_points(self, n):
        return Grid(self.d, n, self.L)

    def with_period(self, L):
        return Grid(self.d, self.n, L)
