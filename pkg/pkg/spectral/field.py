import logging
from dataclasses import dataclass
from numbers import Number
from typing import Callable, Optional

import numpy as np
from scipy import fft as sfft

from pkg.spectral.grid import Grid
from pkg.utils.errors import SingularSymbolError

logger = logging.getLogger(__name__)


def _forward(values):
    return sfft.fftn(values) / values.size


def _backward(coeffs):
    return sfft.ifftn(coeffs * coeffs.size)


def _frozen(array):
    array.flags.writeable = False
    return array


class SpectralField:
    """A periodic field u(x) = sum_k c(k) exp(i k.x) on a Grid.

    Either representation (coefficients or point values) may be supplied; the
    other one is computed on first access and cached. Instances are treated as
    immutable: the stored arrays are flagged read-only. Linear operations act on
    the coefficients and products on the point values, whichever is cached.
    """

    __slots__ = ("grid", "real", "_coeffs", "_values")

    def __init__(self, grid: Grid, coeffs=None, real: bool = False, values=None):
        if coeffs is None and values is None:
            raise ValueError("either coefficients or values are required")
        self.grid = grid
        self.real = bool(real)
        self._coeffs = None
        self._values = None
        if coeffs is not None:
            coeffs = np.array(coeffs, dtype=complex)
            if coeffs.shape != grid.shape:
                raise ValueError(f"coefficient array shape {coeffs.shape} does not match grid {grid.shape}")
            self._coeffs = _frozen(coeffs)
        if values is not None:
            values = np.array(values, dtype=float if self.real else complex)
            if values.shape != grid.shape:
                raise ValueError(f"value array shape {values.shape} does not match grid {grid.shape}")
            self._values = _frozen(values)

    # construction -------------------------------------------------------

    @classmethod
    def from_values(cls, grid, values, real=None):
        values = np.asarray(values)
        if real is None:
            real = not np.iscomplexobj(values)
        if real and np.iscomplexobj(values):
            values = values.real
        return cls(grid, real=real, values=values)

    @classmethod
    def zeros(cls, grid, real=True):
        return cls(grid, coeffs=np.zeros(grid.shape, dtype=complex), real=real)

    @classmethod
    def constant(cls, grid, value):
        c = np.zeros(grid.shape, dtype=complex)
        c[(0,) * grid.d] = value
        return cls(grid, coeffs=c, real=np.isreal(value))

    @classmethod
    def plane_wave(cls, grid, index, amplitude=1.0):
        """amplitude * exp(i k.x) for the lattice mode with integer index."""
        c = np.zeros(grid.shape, dtype=complex)
        c[tuple(int(i) % grid.n for i in np.atleast_1d(index))] = amplitude
        return cls(grid, coeffs=c, real=False)

    # representations ----------------------------------------------------

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = _frozen(_forward(self._values))
        return self._coeffs

    @property
    def values(self):
        if self._values is None:
            v = _backward(self._coeffs)
            self._values = _frozen(v.real.copy() if self.real else v)
        return self._values

    # arithmetic ---------------------------------------------------------

    def _check(self, other):
        if other.grid != self.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            real = self.real and other.real
            return SpectralField(self.grid, self.coeffs + other.coeffs, real)
        if isinstance(other, Number):
            real = self.real and np.isreal(other)
            c = self.coeffs.copy()
            c[(0,) * self.grid.d] += other
            return SpectralField(self.grid, c, real)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs, self.real)

    def __sub__(self, other):
        if isinstance(other, (SpectralField, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField.from_values(self.grid, self.values * other.values, self.real and other.real)
        if isinstance(other, Number):
            real = self.real and np.isreal(other)
            return SpectralField(self.grid, self.coeffs * other, real)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1.0 / other)
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField.from_values(self.grid, self.values / other.values, self.real and other.real)
        return NotImplemented

    def conj(self):
        if self.real:
            return self
        return SpectralField.from_values(self.grid, np.conj(self.values), False)

    def map(self, func: Callable[[np.ndarray], np.ndarray], real: Optional[bool] = None):
        """Apply a pointwise function in physical space."""
        return SpectralField.from_values(self.grid, func(self.values), self.real if real is None else real)

    def real_part(self):
        return SpectralField.from_values(self.grid, np.real(self.values), True)

    def as_complex(self):
        if not self.real:
            return self
        return SpectralField(self.grid, self.coeffs, False)

    # differentiation ----------------------------------------------------

    def derivative(self, axis):
        c = 1j * self.grid.wavenumbers[axis] * self.coeffs
        c[self.grid.nyquist_mask] = 0.0
        return SpectralField(self.grid, c, self.real)

    def grad(self):
        return tuple(self.derivative(a) for a in range(self.grid.d))

    def laplacian(self):
        return SpectralField(self.grid, -(self.grid.wavenumber_norm ** 2) * self.coeffs, self.real)

    def with_symbol(self, symbol, real=None):
        return SpectralField(self.grid, symbol * self.coeffs, self.real if real is None else real)

    # measurements -------------------------------------------------------

    def norm(self):
        return sobolev_norm(self, 0.0)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def mean(self):
        return self.coeffs[(0,) * self.grid.d]

    def is_hermitian(self, rtol=1e-13):
        c = self.coeffs
        flipped = np.conj(c[tuple(np.s_[::-1] for _ in range(self.grid.d))])
        flipped = np.roll(flipped, shift=(1,) * self.grid.d, axis=tuple(range(self.grid.d)))
        scale = max(np.max(np.abs(c)), 1e-300)
        return bool(np.max(np.abs(c - flipped)) <= rtol * scale)

    def __repr__(self):
        kind = "real" if self.real else "complex"
        return f"SpectralField({kind}, d={self.grid.d}, n={self.grid.n}, L={self.grid.L:.6g})"


def div(vector):
    out = vector[0].derivative(0)
    for axis in range(1, len(vector)):
        out = out + vector[axis].derivative(axis)
    return out


def dot(u, v):
    out = u[0] * v[0]
    for a in range(1, len(u)):
        out = out + u[a] * v[a]
    return out


def directional(vector, u):
    """(vector . grad) u for a constant vector."""
    c = 1j * np.tensordot(np.asarray(vector, dtype=float), u.grid.wavenumbers, axes=(0, 0)) * u.coeffs
    c[u.grid.nyquist_mask] = 0.0
    return SpectralField(u.grid, c, u.real)


def quadratic_form(matrix, u):
    """grad . (M grad u) for a constant symmetric matrix M."""
    k = u.grid.wavenumbers
    symbol = -np.einsum("a...,ab,b...->...", k, np.asarray(matrix, dtype=float), k)
    return SpectralField(u.grid, symbol * u.coeffs, u.real)


def inner(u, v):
    """L2 inner product int conj(u) v over the period cell."""
    u._check(v)
    return u.grid.measure * np.vdot(u.coeffs, v.coeffs)


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier f(D) with a symbol evaluated on the wavenumber lattice.

    parity is "even" for real even symbols, "odd" for imaginary odd symbols
    (both keep real fields real) and "none" otherwise.
    """

    symbol: Callable[[np.ndarray], np.ndarray]
    parity: str = "even"
    name: str = "multiplier"

    def __post_init__(self):
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity tag '{self.parity}'")


def apply_multiplier(f: Multiplier, u: SpectralField):
    k = u.grid.wavenumbers
    sym = np.asarray(f.symbol(k))
    finite = np.isfinite(sym)
    if sym.ndim > u.grid.d:
        finite = np.all(finite, axis=tuple(range(sym.ndim - u.grid.d)))
    if not finite.all():
        bad = tuple(np.argwhere(~finite)[0])
        raise SingularSymbolError(f.name, k[(slice(None),) + bad])
    real = u.real and f.parity in ("even", "odd")
    if sym.ndim == u.grid.d:
        c = sym * u.coeffs
        if f.parity == "odd":
            c[u.grid.nyquist_mask] = 0.0
        return SpectralField(u.grid, c, real)
    out = []
    for component in sym:
        c = component * u.coeffs
        if f.parity == "odd":
            c[u.grid.nyquist_mask] = 0.0
        out.append(SpectralField(u.grid, c, real))
    return tuple(out)


def sobolev_norm(u: SpectralField, s: float):
    weight = (1.0 + u.grid.wavenumber_norm ** 2) ** s
    return float(np.sqrt(u.grid.measure * np.sum(weight * np.abs(u.coeffs) ** 2)))


def dealias_mask(grid: Grid, fraction: float = 2.0 / 3.0):
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"dealias fraction must lie in (0, 1], got {fraction}")
    return np.any(np.abs(grid.indices) > fraction * grid.nyquist, axis=0)


def dealias(u: SpectralField, fraction: float = 2.0 / 3.0):
    mask = dealias_mask(u.grid, fraction)
    if not mask.any():
        return u
    c = u.coeffs.copy()
    c[mask] = 0.0
    return SpectralField(u.grid, c, u.real)


def resample(u: SpectralField, n: int):
    """Spectral interpolation of u onto n points per axis over the same period.

    The coarse Nyquist coefficient is dropped when refining so real fields stay real.
    """
    target = u.grid.with_points(n)
    if n == u.grid.n:
        return u
    c = np.zeros(target.shape, dtype=complex)
    src = u.coeffs
    m = min(n, u.grid.n) // 2
    kept = np.r_[0:m, -m + 1:0] if m > 1 else np.r_[0:1]
    sel = np.ix_(*([kept % u.grid.n] * u.grid.d))
    dst = np.ix_(*([kept % n] * u.grid.d))
    c[dst] = src[sel]
    return SpectralField(target, c, u.real)
