"""Spectral fields on the cylinder and the linear operations acting on them.

Coefficient arrays are stored as ``(component, vertical index, ky, kx)`` with
the horizontal axes in numpy FFT order and normalized so that a coefficient
equals the Fourier amplitude (``fft2 / (nx * ny)``).  The same axis order is
used for physical samples, ``(component, z, y, x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.fft

from .errors import ConfigurationError, ShapeError
from .grid import GridSpec

BASES = ("cos", "sin", "node")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Velocity-like field with ``ncomp`` components.

    ``basis`` is ``"cos"`` or ``"sin"`` (Neumann-Neumann grids) or ``"node"``
    (Dirichlet-Neumann grids).  ``linear`` optionally holds the horizontal
    coefficients of an extra ``(z + h)`` profile; only vertical velocities
    built from unconstrained input carry one.
    """

    grid: GridSpec
    coeffs: np.ndarray
    basis: str = "cos"
    linear: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        g = self.grid
        if c.ndim != 4 or c.shape[1:] != (g.nz, g.ny, g.nx):
            raise ShapeError(f"coefficients of shape {c.shape} do not match grid {(g.nz, g.ny, g.nx)}")
        if self.basis not in BASES:
            raise ConfigurationError(f"unknown basis {self.basis!r}")
        if (self.basis == "node") == g.is_nn:
            raise ConfigurationError(f"basis {self.basis!r} is not available on a {g.bc.value} grid")
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp: int = 2, basis: Optional[str] = None) -> "SpectralField":
        return cls(grid, np.zeros((ncomp, grid.nz, grid.ny, grid.nx), complex), basis or grid.basis)

    def with_coeffs(self, coeffs) -> "SpectralField":
        return replace(self, coeffs=coeffs, linear=None)

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid or other.basis != self.basis or other.ncomp != self.ncomp:
            raise ShapeError("fields live on different grids or bases")
        return None

    def _lin(self, other, op):
        if self.linear is None and other.linear is None:
            return None
        a = self.linear if self.linear is not None else 0.0
        b = other.linear if other.linear is not None else 0.0
        return op(a, b)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return replace(self, coeffs=self.coeffs + other.coeffs, linear=self._lin(other, np.add))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return replace(self, coeffs=self.coeffs - other.coeffs, linear=self._lin(other, np.subtract))

    def __mul__(self, scalar):
        lin = None if self.linear is None else self.linear * scalar
        return replace(self, coeffs=self.coeffs * scalar, linear=lin)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1.0

    def copy(self) -> "SpectralField":
        lin = None if self.linear is None else self.linear.copy()
        return replace(self, coeffs=self.coeffs.copy(), linear=lin)

    def inner(self, other: "SpectralField") -> float:
        """L2 inner product over the cylinder (real part)."""
        self._check(other)
        w = vertical_weights(self.grid, self.basis)
        return float(np.real(np.einsum("m,cmyx->", w, np.conj(self.coeffs) * other.coeffs)))

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


class ScalarField(SpectralField):
    """One-component field, e.g. the vertical velocity."""


@dataclass(frozen=True, eq=False)
class SurfaceField:
    """z-independent data on the horizontal square, ``(component, ky, kx)``."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[1:] != (self.grid.ny, self.grid.nx):
            raise ShapeError(f"surface coefficients of shape {c.shape} do not match grid")
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp: int = 2) -> "SurfaceField":
        return cls(grid, np.zeros((ncomp, grid.ny, grid.nx), complex))

    @classmethod
    def from_physical(cls, samples, grid: GridSpec) -> "SurfaceField":
        s = np.asarray(samples, dtype=float)
        if s.ndim == 2:
            s = s[None]
        if s.shape[1:] != (grid.ny, grid.nx):
            raise ShapeError(f"surface samples of shape {s.shape} do not match grid")
        return cls(grid, np.fft.fft2(s, axes=(-2, -1)) / (grid.nx * grid.ny))

    def to_physical(self) -> np.ndarray:
        g = self.grid
        return np.real(np.fft.ifft2(self.coeffs, axes=(-2, -1)) * (g.nx * g.ny))

    def __add__(self, other):
        return SurfaceField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SurfaceField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SurfaceField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        """L2 norm over the unit square."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


# Home of the surface stress data g.
BoundaryField = SurfaceField


def vertical_weights(grid: GridSpec, basis: str) -> np.ndarray:
    if basis == "node":
        return np.full(grid.nz, grid.dz)
    w = np.full(grid.nz, grid.h / 2)
    if basis == "cos":
        w[0] = grid.h
    else:
        w[0] = 0.0
    return w


@lru_cache(maxsize=64)
def sine_matrix(nz: int, npts: int) -> np.ndarray:
    """``S[j, m] = sin(m pi (j + 1/2) / npts)`` on ``npts`` cell centres."""
    j = np.arange(npts)[:, None] + 0.5
    return np.sin(np.arange(nz)[None, :] * np.pi * j / npts)


@lru_cache(maxsize=64)
def cosine_matrix(nz: int, npts: int) -> np.ndarray:
    j = np.arange(npts)[:, None] + 0.5
    return np.cos(np.arange(nz)[None, :] * np.pi * j / npts)


# --------------------------------------------------------------------------
# transforms


def _vertical_to_samples(coeffs: np.ndarray, basis: str, nz: int) -> np.ndarray:
    if basis == "node":
        return coeffs
    if basis == "cos":
        y = coeffs * nz
        y[:, 0] *= 2.0
        return scipy.fft.idct(y, type=2, axis=1)
    return np.einsum("jm,cmyx->cjyx", sine_matrix(nz, nz), coeffs)


def _vertical_from_samples(samples: np.ndarray, basis: str, nz: int) -> np.ndarray:
    if basis == "node":
        return samples
    if basis == "cos":
        y = scipy.fft.dct(samples, type=2, axis=1) / nz
        y[:, 0] *= 0.5
        return y
    # the sine slot m = nz is not representable and is dropped
    s = sine_matrix(nz, nz)
    c = np.einsum("jm,cjyx->cmyx", s, samples) * (2.0 / nz)
    c[:, 0] = 0.0
    return c


def forward_transform(samples, grid: GridSpec, basis: Optional[str] = None) -> SpectralField:
    """Physical samples ``(component, z, y, x)`` to a spectral field."""
    s = np.asarray(samples)
    if s.ndim == 3:
        s = s[None]
    if s.ndim != 4 or s.shape[1:] != (grid.nz, grid.ny, grid.nx):
        raise ShapeError(f"samples of shape {np.shape(samples)} do not match grid {(grid.nz, grid.ny, grid.nx)}")
    basis = basis or grid.basis
    hat = np.fft.fft2(s, axes=(-2, -1)) / (grid.nx * grid.ny)
    cls = ScalarField if s.shape[0] == 1 else SpectralField
    return cls(grid, _vertical_from_samples(hat, basis, grid.nz), basis)


def inverse_transform(field: SpectralField, real: bool = True) -> np.ndarray:
    """Spectral field to physical samples at the cell-centre nodes."""
    g = field.grid
    vert = _vertical_to_samples(field.coeffs.copy(), field.basis, g.nz)
    if field.linear is not None:
        vert = vert + (g.z + g.h)[None, :, None, None] * field.linear[:, None] if field.linear.ndim == 3 \
            else vert + (g.z + g.h)[None, :, None, None] * field.linear[None, None]
    out = np.fft.ifft2(vert, axes=(-2, -1)) * (g.nx * g.ny)
    return np.real(out) if real else out


def enforce_hermitian(field: SpectralField) -> SpectralField:
    """Drop the anti-Hermitian part so the field is exactly real."""
    c = np.fft.fft2(np.real(np.fft.ifft2(field.coeffs, axes=(-2, -1))), axes=(-2, -1))
    return field.with_coeffs(c)


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max |c(-k) - conj(c(k))| over the horizontal axes."""
    flipped = np.roll(np.flip(coeffs, axis=(-2, -1)), shift=(1, 1), axis=(-2, -1))
    return float(np.max(np.abs(flipped - np.conj(coeffs)), initial=0.0))


def l2_norm_physical(field: SpectralField) -> float:
    """L2 norm by midpoint quadrature of the physical samples."""
    g = field.grid
    u = inverse_transform(field)
    return float(np.sqrt(np.sum(u**2) * g.dz / (g.nx * g.ny)))


# --------------------------------------------------------------------------
# vertical structure


def vertical_average(v: SpectralField) -> SurfaceField:
    """Vertical mean ``(1/h) int v dz`` as a surface field."""
    g = v.grid
    if v.basis == "cos":
        mean = v.coeffs[:, 0]
    elif v.basis == "node":
        mean = v.coeffs.mean(axis=1)
    else:
        m = np.arange(g.nz)
        factor = np.zeros(g.nz)
        factor[1:] = (1 - np.cos(m[1:] * np.pi)) / (m[1:] * np.pi)
        mean = np.einsum("m,cmyx->cyx", factor, v.coeffs)
    if v.linear is not None:
        mean = mean + 0.5 * g.h * v.linear
    return SurfaceField(g, mean)


def surface_divergence(s: SurfaceField) -> np.ndarray:
    g = s.grid
    return 1j * (g.kx_d * s.coeffs[0] + g.ky_d * s.coeffs[1])


def divergence_coeffs(v: SpectralField) -> np.ndarray:
    g = v.grid
    return 1j * (g.kx_d * v.coeffs[0] + g.ky_d * v.coeffs[1])


def vertical_velocity(v: SpectralField) -> ScalarField:
    """``w(v)(z) = -int_{-h}^z div_H v``.

    Neumann-Neumann: a sine series plus, when the barotropic divergence does
    not vanish, a linear profile.  Dirichlet-Neumann: face values are exact
    partial sums of the midpoint rule; nodes carry the average of the two
    neighbouring faces.
    """
    g = v.grid
    div = divergence_coeffs(v)
    if v.basis == "cos":
        c = np.zeros((1, g.nz, g.ny, g.nx), complex)
        c[0, 1:] = -div[1:] / g.mu[1:, None, None]
        lead = div[0]
        linear = None if not np.any(lead) else -lead[None]
        return ScalarField(g, c, "sin", linear)
    if v.basis == "node":
        faces = vertical_velocity_faces(v)
        return ScalarField(g, 0.5 * (faces[:-1] + faces[1:])[None], "node")
    raise ConfigurationError("vertical velocity needs a cosine or nodal field")


def vertical_velocity_faces(v: SpectralField) -> np.ndarray:
    """Dirichlet-Neumann only: ``w`` at the nz + 1 cell faces (bottom first)."""
    g = v.grid
    div = divergence_coeffs(v)
    faces = np.zeros((g.nz + 1, g.ny, g.nx), complex)
    faces[1:] = -g.dz * np.cumsum(div, axis=0)
    return faces


def vertical_velocity_boundary(v: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal coefficients of ``w`` at the bottom and the surface."""
    g = v.grid
    div = divergence_coeffs(v)
    bottom = np.zeros((g.ny, g.nx), complex)
    if v.basis == "cos":
        top = -g.h * div[0]
    else:
        top = -g.dz * div.sum(axis=0)
    return bottom, top


# --------------------------------------------------------------------------
# projection


def _mean_correction(mean: np.ndarray, grid: GridSpec) -> np.ndarray:
    kx, ky, k2 = grid.kx_d, grid.ky_d, grid.k2_d
    safe = np.where(k2 > 0, k2, 1.0)
    kdotm = (kx * mean[0] + ky * mean[1]) / safe
    kdotm = np.where(k2 > 0, kdotm, 0.0)
    return np.stack([kx * kdotm, ky * kdotm])


def helmholtz_project(f: SpectralField) -> SpectralField:
    """Hydrostatic Helmholtz projection.

    Removes, per horizontal mode, the part of the vertical mean parallel to
    ``k``; the horizontal mean (k = 0) is left alone.
    """
    if f.ncomp != 2:
        raise ShapeError("projection acts on two-component fields")
    g = f.grid
    c = f.coeffs.copy()
    if f.basis == "cos":
        c[:, 0] -= _mean_correction(c[:, 0], g)
    elif f.basis == "node":
        c -= _mean_correction(c.mean(axis=1), g)[:, None]
    else:
        raise ConfigurationError("projection is defined on cosine or nodal fields")
    return f.with_coeffs(c)


def complementary_project(f: SpectralField) -> SurfaceField:
    """``(1 - P) f`` as the z-independent gradient part it is."""
    g = f.grid
    mean = vertical_average(f).coeffs
    return SurfaceField(g, _mean_correction(mean, g))


def constraint_defect(v: SpectralField) -> float:
    """max_k |k . vbar(k)|, unscaled."""
    return float(np.max(np.abs(surface_divergence(vertical_average(v))), initial=0.0))


# --------------------------------------------------------------------------
# derivatives


@lru_cache(maxsize=64)
def dn_second_difference(nz: int, dz: float) -> np.ndarray:
    """Homogeneous second difference on cell centres.

    Ghost values: ``v_{-1} = -v_0`` (zero at the bottom face) and
    ``v_nz = v_{nz-1}`` (zero flux at the surface).
    """
    d = (np.diag(np.full(nz, -2.0)) + np.diag(np.ones(nz - 1), 1) + np.diag(np.ones(nz - 1), -1))
    d[0, 0] = -3.0
    d[-1, -1] = -1.0
    return d / dz**2


@lru_cache(maxsize=64)
def dn_first_difference(nz: int, dz: float) -> np.ndarray:
    d = np.diag(np.ones(nz - 1), 1) - np.diag(np.ones(nz - 1), -1)
    d[0, 0] = 1.0
    d[-1, -1] = 1.0
    return d / (2 * dz)


def ddx(f: SpectralField) -> SpectralField:
    return f.with_coeffs(1j * f.grid.kx_d * f.coeffs)


def ddy(f: SpectralField) -> SpectralField:
    return f.with_coeffs(1j * f.grid.ky_d * f.coeffs)


def ddz(f: SpectralField) -> SpectralField:
    g = f.grid
    if f.basis == "cos":
        return replace(f, coeffs=-g.mu[None, :, None, None] * f.coeffs, basis="sin", linear=None)
    if f.basis == "sin":
        c = g.mu[None, :, None, None] * f.coeffs
        if f.linear is not None:
            c[:, 0] += f.linear
        return replace(f, coeffs=c, basis="cos", linear=None)
    return f.with_coeffs(np.einsum("ij,cjyx->ciyx", dn_first_difference(g.nz, g.dz), f.coeffs))


def laplacian_h(f: SpectralField) -> SpectralField:
    return f.with_coeffs(-f.grid.k2 * f.coeffs)


def laplacian(f: SpectralField) -> SpectralField:
    """Full Laplacian with the homogeneous boundary conditions of the grid."""
    g = f.grid
    if f.basis == "cos":
        return f.with_coeffs(-(g.k2[None, None] + g.mu[None, :, None, None] ** 2) * f.coeffs)
    if f.basis == "node":
        d2 = dn_second_difference(g.nz, g.dz)
        return f.with_coeffs(-g.k2 * f.coeffs + np.einsum("ij,cjyx->ciyx", d2, f.coeffs))
    raise ConfigurationError("Laplacian is defined on cosine or nodal fields")


def div_h(f: SpectralField) -> ScalarField:
    if f.ncomp != 2:
        raise ShapeError("div_H needs two components")
    return ScalarField(f.grid, divergence_coeffs(f)[None], f.basis)


def grad_h(f: SpectralField) -> SpectralField:
    if f.ncomp != 1:
        raise ShapeError("grad_H needs a scalar field")
    g = f.grid
    return SpectralField(g, np.concatenate([1j * g.kx_d * f.coeffs, 1j * g.ky_d * f.coeffs]), f.basis)


def diff_ops(field: SpectralField, which: str) -> SpectralField:
    ops = {
        "dx": ddx, "dy": ddy, "dz": ddz, "lap_h": laplacian_h,
        "div_h": div_h, "grad_h": grad_h, "lap": laplacian,
    }
    try:
        return ops[which](field)
    except KeyError:
        raise ConfigurationError(f"unknown operator {which!r}") from None


def surface_gradient(p: SurfaceField) -> SurfaceField:
    g = p.grid
    return SurfaceField(g, np.stack([1j * g.kx_d * p.coeffs[0], 1j * g.ky_d * p.coeffs[0]]))


def extend_surface(s: SurfaceField, basis: Optional[str] = None) -> SpectralField:
    """A z-independent field with the given surface values."""
    g = s.grid
    basis = basis or g.basis
    c = np.zeros((s.ncomp, g.nz, g.ny, g.nx), complex)
    if basis == "cos":
        c[:, 0] = s.coeffs
    else:
        c[:] = s.coeffs[:, None]
    cls = ScalarField if s.ncomp == 1 else SpectralField
    return cls(g, c, basis)


# --------------------------------------------------------------------------
# random fields


def band_mask(grid: GridSpec, kmax: Optional[int] = None) -> np.ndarray:
    """Horizontal modes with ``|ix|, |iy| <= kmax`` and no Nyquist index."""
    ix = np.abs(np.fft.fftfreq(grid.nx, 1.0 / grid.nx))[None, :]
    iy = np.abs(np.fft.fftfreq(grid.ny, 1.0 / grid.ny))[:, None]
    kmax_x = grid.nx // 2 - 1 if kmax is None else min(kmax, grid.nx // 2 - 1)
    kmax_y = grid.ny // 2 - 1 if kmax is None else min(kmax, grid.ny // 2 - 1)
    return (ix <= kmax_x) & (iy <= kmax_y)


def random_field(grid: GridSpec, rng: np.random.Generator, *, constrained: bool = True,
                 kmax: Optional[int] = None, mmax: Optional[int] = None, ncomp: int = 2,
                 decay: float = 0.0) -> SpectralField:
    """Random real band-limited field.

    ``decay`` damps coefficients by ``(1 + |k|^2 + mu^2)^(-decay/2)``.  On
    Dirichlet-Neumann grids with ``mmax`` set, profiles combine
    ``sin((m + 1/2) pi (z + h) / h)`` for ``m <= mmax``; without it nodal
    values are independent.
    """
    shape = (ncomp, grid.nz, grid.ny, grid.nx)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c *= band_mask(grid, kmax)[None, None]
    if grid.is_nn:
        if mmax is not None:
            c[:, mmax + 1:] = 0.0
        lam = grid.k2[None, None] + grid.mu[None, :, None, None] ** 2
    elif mmax is not None:
        nm = min(mmax + 1, grid.nz)
        rates = (np.arange(nm) + 0.5) * np.pi / grid.h
        prof = np.sin(np.outer(grid.z + grid.h, rates))  # (nz, nm)
        damp = (1.0 + grid.k2[None, None] + rates[None, :, None, None] ** 2) ** (-decay / 2)
        c = np.einsum("jm,cmyx->cjyx", prof, c[:, :nm] * damp)
        decay = 0.0
        lam = None
    else:
        lam = grid.k2[None, None] + 0.0 * grid.z[None, :, None, None]
    if decay:
        c *= (1.0 + lam) ** (-decay / 2)
    field = enforce_hermitian(SpectralField(grid, c, grid.basis))
    if ncomp == 1:
        field = ScalarField(grid, field.coeffs, grid.basis)
    if constrained and ncomp == 2:
        field = helmholtz_project(field)
    return field
