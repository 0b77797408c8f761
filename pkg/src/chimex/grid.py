"""Periodic torus grids, Fourier transforms, projection and norms.

Fields live on the unit torus [-1/2, 1/2)^d sampled at x_j = j/M - 1/2.
Internally the spectrum is kept in the real-FFT layout, normalised so that
``hat = rfftn(values) / M**d``. With the half-cell offset of the grid this
differs from the continuous coefficients f^(k) = int f e^{-2 pi i k.x} by the
sign (-1)^{k_1+...+k_d}; ``Field.coeffs`` applies it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

CHECKPOINT_MAGIC = "CHIMEX1"


@dataclass(frozen=True)
class SpectralGrid:
    """Tensor grid with M points per axis carrying the Fourier sector |k|_inf <= N."""

    d: int
    N: int
    M: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.N < 2:
            raise ValueError(f"mode cutoff N must be >= 2, got {self.N}")
        if self.M < 4 * self.N + 1:
            raise ValueError(
                f"M={self.M} < 4N+1={4 * self.N + 1}: the quartic energy density "
                "and cubic nonlinearity would alias"
            )

    @property
    def shape(self):
        return (self.M,) * self.d

    @property
    def size(self):
        return self.M**self.d

    @property
    def spectral_shape(self):
        return (self.M,) * (self.d - 1) + (self.M // 2 + 1,)

    @cached_property
    def wavenumbers(self):
        """Integer frequencies of the full complex FFT along one axis, per axis."""
        k = np.rint(np.fft.fftfreq(self.M, 1.0 / self.M)).astype(np.int64)
        return (k,) * self.d

    @cached_property
    def _rk(self):
        """Broadcastable integer wavenumber arrays in the real-FFT layout."""
        full = self.wavenumbers[0]
        half = np.arange(self.M // 2 + 1, dtype=np.int64)
        axes = [full] * (self.d - 1) + [half]
        out = []
        for i, k in enumerate(axes):
            shp = [1] * self.d
            shp[i] = k.size
            out.append(k.reshape(shp))
        return tuple(out)

    @cached_property
    def k2(self):
        """|k|^2 on the real-FFT layout (integers stored as float)."""
        return sum(k.astype(np.float64) ** 2 for k in self._rk) * np.ones(self.spectral_shape)

    @cached_property
    def kinf(self):
        """|k|_inf on the real-FFT layout."""
        out = np.zeros(self.spectral_shape, dtype=np.int64)
        for k in self._rk:
            out = np.maximum(out, np.abs(k))
        return out

    @cached_property
    def lap_symbol(self):
        """(2 pi |k|)^2, the symbol of -Laplacian."""
        return (2.0 * np.pi) ** 2 * self.k2

    @cached_property
    def weights(self):
        """Multiplicity of each real-FFT slot in the full spectrum (1 or 2)."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        if self.M % 2 == 0:
            w[..., -1] = 1.0
        return w

    def mask(self, N=None):
        """Boolean sector |k|_inf <= N on the real-FFT layout."""
        return self.kinf <= (self.N if N is None else N)

    @cached_property
    def points(self):
        """1D array of grid coordinates x_j = j/M - 1/2."""
        return np.arange(self.M) / self.M - 0.5

    def mesh(self):
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return np.meshgrid(*([self.points] * self.d), indexing="ij")

    def forward(self, values):
        return sfft.rfftn(values, s=self.shape) / self.size

    def backward(self, hat):
        return sfft.irfftn(hat * self.size, s=self.shape)

    def band_index(self, N):
        """Positions of |k_i| <= N along a full-FFT axis."""
        return np.r_[0 : N + 1, self.M - N : self.M]

    def _band_slots(self, N):
        idx = self.band_index(N)
        return np.ix_(*([idx] * (self.d - 1) + [np.arange(N + 1)]))

    def forward_band(self, values, N):
        """forward() restricted to |k|_inf <= N; other slots are zero.

        Axes are transformed one at a time and truncated to the band
        before the next, which skips most of the work when 2N + 1 << M.
        """
        idx = self.band_index(N)
        h = sfft.rfft(values, axis=-1, norm="forward")[..., : N + 1]
        for ax in range(self.d - 2, -1, -1):
            h = np.take(sfft.fft(h, axis=ax, norm="forward"), idx, axis=ax)
        out = np.zeros(self.spectral_shape, dtype=np.complex128)
        out[self._band_slots(N)] = h
        return out

    def backward_band(self, hat, N):
        """backward() for a spectrum supported in |k|_inf <= N."""
        idx = self.band_index(N)
        h = hat[self._band_slots(N)]
        for ax in range(self.d - 1):
            shp = list(h.shape)
            shp[ax] = self.M
            full = np.zeros(shp, dtype=np.complex128)
            sl = [slice(None)] * self.d
            sl[ax] = idx
            full[tuple(sl)] = h
            h = sfft.ifft(full, axis=ax, norm="forward")
        return sfft.irfft(h, n=self.M, axis=-1, norm="forward")


def make_grid(d, N, M=None):
    """Build a grid; M defaults to the smallest alias-free size 4N + 1."""
    return SpectralGrid(int(d), int(N), int(4 * N + 1 if M is None else M))


class Field:
    """Real scalar field with lazily synchronised physical and spectral data.

    Treat instances as immutable: operations return new fields and the
    arrays handed out are read-only views.
    """

    __slots__ = ("grid", "_values", "_hat")

    def __init__(self, grid, values=None, hat=None):
        if values is None and hat is None:
            raise ValueError("need values or hat")
        self.grid = grid
        self._values = None
        self._hat = None
        if values is not None:
            v = np.ascontiguousarray(values, dtype=np.float64)
            if v.shape != grid.shape:
                raise ValueError(f"values shape {v.shape} does not match grid {grid.shape}")
            v.flags.writeable = False
            self._values = v
        if hat is not None:
            h = np.ascontiguousarray(hat, dtype=np.complex128)
            if h.shape != grid.spectral_shape:
                raise ValueError(f"hat shape {h.shape} does not match {grid.spectral_shape}")
            h.flags.writeable = False
            self._hat = h

    @classmethod
    def zeros(cls, grid):
        return cls(grid, values=np.zeros(grid.shape), hat=np.zeros(grid.spectral_shape, complex))

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(*coords)`` on the grid."""
        return cls(grid, values=np.broadcast_to(func(*grid.mesh()), grid.shape))

    @property
    def values(self):
        if self._values is None:
            v = self.grid.backward(self._hat)
            v.flags.writeable = False
            self._values = v
        return self._values

    @property
    def hat(self):
        """Spectrum in real-FFT layout, rfftn(values)/M^d."""
        if self._hat is None:
            h = self.grid.forward(self._values)
            h.flags.writeable = False
            self._hat = h
        return self._hat

    @property
    def coeffs(self):
        """Full complex Fourier coefficients f^(k) = int f e^{-2 pi i k.x} (fftn layout)."""
        g = self.grid
        c = sfft.fftn(self.values) / g.size
        ksum = sum(np.ix_(*g.wavenumbers))
        return c * np.where(ksum % 2 == 0, 1.0, -1.0)

    def __neg__(self):
        return Field(
            self.grid,
            values=None if self._values is None else -self._values,
            hat=None if self._hat is None else -self._hat,
        )

    def __add__(self, other):
        return Field(self.grid, values=self.values + other.values)

    def __sub__(self, other):
        return Field(self.grid, values=self.values - other.values)

    def __mul__(self, c):
        return Field(self.grid, values=c * self.values)

    __rmul__ = __mul__

    def __repr__(self):
        g = self.grid
        return f"Field(d={g.d}, N={g.N}, M={g.M})"


def project_N(f, N=None):
    """Fourier truncation to |k|_inf <= N (default: the grid cutoff)."""
    return Field(f.grid, hat=np.where(f.grid.mask(N), f.hat, 0.0))


def norm_Lp(f, p):
    """Grid quadrature (M^-d sum |f|^p)^(1/p); p = inf gives the grid max."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max())
    if p == 2:
        return float(np.sqrt(np.mean(v * v)))
    return float(np.mean(v**p) ** (1.0 / p))


def norm_Hdot(f, s):
    """(sum_{k != 0} (2 pi |k|)^{2s} |f^(k)|^2)^(1/2)."""
    g = f.grid
    a2 = np.abs(f.hat) ** 2 * g.weights
    a2 = a2.copy()
    a2.flat[0] = 0.0
    if s != 0:
        with np.errstate(divide="ignore"):
            sym = np.where(g.k2 > 0, g.lap_symbol ** float(s), 0.0)
        a2 *= sym
    return float(np.sqrt(a2.sum()))


def inner(f, g):
    """Grid inner product M^-d sum f g."""
    return float(np.mean(f.values * g.values))


def mean(f):
    return float(f.hat.flat[0].real)


def subtract_mean(f):
    h = f.hat.copy()
    h.flat[0] = 0.0
    return Field(f.grid, hat=h)


def resample(f, M_new):
    """Values of the trigonometric interpolant of ``f`` on an M_new grid.

    Modes with |k_i| < M/2 are carried over; an even-M Nyquist mode is
    dropped, which is harmless for fields in X_N.
    """
    g = f.grid
    if M_new < g.M:
        raise ValueError("resample only refines")
    Kc = (g.M - 1) // 2
    src_idx = np.r_[0 : Kc + 1, g.M - Kc : g.M]
    dst_idx = np.r_[0 : Kc + 1, M_new - Kc : M_new]
    out = np.zeros((M_new,) * (g.d - 1) + (M_new // 2 + 1,), dtype=np.complex128)
    lead_src = np.ix_(*([src_idx] * (g.d - 1) + [np.arange(Kc + 1)]))
    lead_dst = np.ix_(*([dst_idx] * (g.d - 1) + [np.arange(Kc + 1)]))
    out[lead_dst] = f.hat[lead_src]
    return sfft.irfftn(out * M_new**g.d, s=(M_new,) * g.d)


def sup_norm(f, oversample=2):
    """max |f| on an ``oversample``-times finer grid."""
    if oversample <= 1:
        return norm_Lp(f, np.inf)
    return float(np.abs(resample(f, oversample * f.grid.M)).max())


def write_field(path, f):
    """Write ``CHIMEX1 d N M`` then M^d little-endian float64 values (C order)."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(f"{CHECKPOINT_MAGIC} {g.d} {g.N} {g.M}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path):
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 4 or parts[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a {CHECKPOINT_MAGIC} checkpoint")
    d, N, M = (int(x) for x in parts[1:])
    grid = make_grid(d, N, M)
    vals = np.frombuffer(data[nl + 1 :], dtype="<f8")
    if vals.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {vals.size}")
    return Field(grid, values=vals.reshape(grid.shape).astype(np.float64))
