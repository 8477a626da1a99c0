"""Hydrostatic Neumann map: surface stress ``g`` to interior forcing.

Taken literally, ``V`` with ``-Delta V + grad_H P_s = 0`` and ``d_z V = g``
makes ``-P Delta V = -P grad_H P_s = 0``.  The map is therefore evaluated at a
resolvent shift ``alpha``: ``(V, P_s)`` solves

    alpha V - Delta V + grad_H P_s = 0,   div_H Vbar = 0,   d_z V = g on top,

with the regime's bottom condition, and ``Lambda g = -P Delta V = -alpha V``.
``alpha = 0`` recovers the literal (vanishing) map.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.integrate

from . import fields as F
from .errors import ConfigurationError, DomainError, MeanCompatibilityError, ShapeError
from .grid import GridSpec
from .stokes import StokesOperatorHandle, apply_A, stokes_solve

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 1.0


def _as_boundary(g, grid: GridSpec) -> F.SurfaceField:
    if isinstance(g, F.SurfaceField):
        if g.grid.nx != grid.nx or g.grid.ny != grid.ny:
            raise ShapeError("boundary data does not match the grid")
        s = g
    else:
        s = F.SurfaceField(grid, g)
    if s.ncomp != 2:
        raise ShapeError("boundary stress needs two components")
    if not np.all(np.isfinite(s.coeffs)):
        raise DomainError("boundary data is not finite")
    return F.SurfaceField(grid, s.coeffs)


def check_mean(g: F.SurfaceField, strict_mean: bool = True) -> F.SurfaceField:
    """Neumann-Neumann compatibility: the horizontal mean of ``g`` must vanish."""
    if not g.grid.is_nn:
        return g
    mean = g.coeffs[:, 0, 0]
    scale = max(float(np.max(np.abs(g.coeffs), initial=0.0)), 1e-300)
    if np.max(np.abs(mean)) <= 1e-12 * scale:
        return g
    if strict_mean:
        raise MeanCompatibilityError("surface stress must have zero horizontal mean on Neumann-Neumann grids")
    msg = "subtracting nonzero horizontal mean from surface stress"
    log.warning(msg)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)
    c = g.coeffs.copy()
    c[:, 0, 0] = 0.0
    return F.SurfaceField(g.grid, c)


# ---------------------------------------------------------------- lifts


@dataclass(frozen=True, eq=False)
class LiftProfile:
    """``U`` with ``(kappa^2 - Delta) U = 0`` per mode, ``d_z U = g`` on top.

    ``kappa^2 = shift + |k|^2``.  The bottom condition is ``d_z U = 0``
    (Neumann-Neumann) or ``U = 0`` (Dirichlet-Neumann).
    """

    grid: GridSpec
    ghat: np.ndarray  # (2, ny, nx)
    shift: float = 0.0

    @property
    def kappa(self) -> np.ndarray:
        return np.sqrt(self.shift + self.grid.k2)

    def _kernel(self, z, deriv: int = 0) -> np.ndarray:
        """Per-mode kernel ``K(z)`` with ``U = K(z) g_hat``; shape (nz', ny, nx)."""
        g = self.grid
        s = (np.asarray(z, dtype=float) + g.h)[:, None, None]
        k = self.kappa[None]
        pos = k > 0
        ks = np.where(pos, k, 1.0)
        # ratios written with decaying exponentials to avoid overflow
        e_top = np.exp(-ks * (g.h - s))
        e_mir = np.exp(-ks * (g.h + s))
        e_2h = np.exp(-2 * ks * g.h)
        if g.is_nn:
            if deriv == 0:
                val = (e_top + e_mir) / (ks * (1 - e_2h))
            else:
                val = (e_top - e_mir) / (1 - e_2h)
            return np.where(pos, val, 0.0)
        if deriv == 0:
            val = (e_top - e_mir) / (ks * (1 + e_2h))
            zero = s + 0.0 * k
        else:
            val = (e_top + e_mir) / (1 + e_2h)
            zero = np.ones_like(s) + 0.0 * k
        return np.where(pos, val, zero)

    def values(self, z) -> np.ndarray:
        """Coefficients ``(2, len(z), ny, nx)`` at heights ``z``."""
        return self._kernel(z)[None] * self.ghat[:, None]

    def dz_values(self, z) -> np.ndarray:
        return self._kernel(z, 1)[None] * self.ghat[:, None]

    def mean(self) -> np.ndarray:
        """Exact vertical mean ``(2, ny, nx)``."""
        g = self.grid
        k2 = self.shift + g.k2
        pos = k2 > 0
        if g.is_nn:
            factor = np.where(pos, 1.0 / (g.h * np.where(pos, k2, 1.0)), 0.0)
        else:
            k = np.sqrt(k2)
            ks = np.where(pos, k, 1.0)
            e = np.exp(-2 * ks * g.h)
            cosh_term = (1 - 2 * np.exp(-ks * g.h) + e) / (1 + e)  # 1 - sech(kh)
            factor = np.where(pos, cosh_term / (g.h * np.where(pos, k2, 1.0)), g.h / 2)
        return factor * self.ghat

    def cosine_coefficients(self) -> np.ndarray:
        """Exact cosine coefficients (Neumann-Neumann only)."""
        g = self.grid
        if not g.is_nn:
            raise ConfigurationError("cosine coefficients only exist on Neumann-Neumann grids")
        k2 = self.shift + g.k2[None] + (g.mu**2)[:, None, None]
        sign = (-1.0) ** np.arange(g.nz)
        w = 2.0 / g.h * np.ones(g.nz)
        w[0] = 1.0 / g.h
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(k2 > 0, (w * sign)[:, None, None] / np.where(k2 > 0, k2, 1.0), 0.0)
        return ratio[None] * self.ghat[:, None]

    def to_field(self) -> F.SpectralField:
        g = self.grid
        if g.is_nn:
            return F.SpectralField(g, self.cosine_coefficients(), "cos")
        return F.SpectralField(g, self.values(g.z), "node")


def laplace_lift(g, grid: GridSpec, strict_mean: bool = True) -> LiftProfile:
    """Harmonic lift of the surface stress (cosh / sinh kernels)."""
    gs = check_mean(_as_boundary(g, grid), strict_mean)
    return LiftProfile(grid, gs.coeffs, 0.0)


def resolvent_lift(g, grid: GridSpec, alpha: float, strict_mean: bool = True) -> LiftProfile:
    gs = check_mean(_as_boundary(g, grid), strict_mean)
    return LiftProfile(grid, gs.coeffs, float(alpha))


# ---------------------------------------------------------------- direct path


def surface_forcing(g: F.SurfaceField, grid: GridSpec) -> F.SpectralField:
    """Interior functional equivalent to the inhomogeneous surface condition."""
    c = np.zeros((2, grid.nz, grid.ny, grid.nx), complex)
    if grid.is_nn:
        w = np.full(grid.nz, 2.0 / grid.h)
        w[0] = 1.0 / grid.h
        c[:] = (w * (-1.0) ** np.arange(grid.nz))[None, :, None, None] * g.coeffs[:, None]
    else:
        c[:, -1] = g.coeffs / grid.dz
    return F.SpectralField(grid, c, grid.basis)


def neumann_solution(g, handle: StokesOperatorHandle, alpha: float = DEFAULT_ALPHA,
                     strict_mean: bool = True):
    """``(V, P_s)`` of the shifted stationary problem with surface stress ``g``."""
    grid = handle.grid
    gs = check_mean(_as_boundary(g, grid), strict_mean)
    return stokes_solve(handle, surface_forcing(gs, grid), alpha)


def neumann_map(g, handle: StokesOperatorHandle, alpha: float = DEFAULT_ALPHA,
                strict_mean: bool = True) -> F.SpectralField:
    """``Lambda g = -P Delta V`` by a direct per-mode saddle solve."""
    grid = handle.grid
    gs = check_mean(_as_boundary(g, grid), strict_mean)
    b = surface_forcing(gs, grid)
    v, _ = stokes_solve(handle, b, alpha)
    return apply_A(handle, v, check=False) - F.helmholtz_project(b)


def neumann_profile(g, grid: GridSpec, z, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Continuum ``V`` of the shifted problem at heights ``z``; ``(2, len(z), ny, nx)``.

    Neumann-Neumann: ``U - (I - P) Ubar`` with the cosh lift at
    ``kappa^2 = alpha + |k|^2``.  Dirichlet-Neumann: the sinh lift plus
    ``c psi(z) k_hat``, where ``(kappa^2 - d_zz) psi = 1``, ``psi(-h) = 0``,
    ``psi'(0) = 0`` and ``c`` cancels the parallel barotropic part.
    """
    gs = _as_boundary(g, grid)
    lift = LiftProfile(grid, gs.coeffs, float(alpha))
    u = lift.values(z)
    ubar = lift.mean()
    kx, ky, k2 = grid.kx_d, grid.ky_d, grid.k2_d
    safe = np.where(k2 > 0, k2, 1.0)
    par = np.where(k2 > 0, (kx * ubar[0] + ky * ubar[1]) / safe, 0.0)
    khat_par = np.stack([kx * par, ky * par])  # k (k . ubar) / |k|^2
    if grid.is_nn:
        return u - khat_par[:, None]
    kap2 = alpha + grid.k2
    kap = np.sqrt(kap2)
    s = (np.asarray(z, dtype=float) + grid.h)[:, None, None]
    e = np.exp(-2 * kap * grid.h)
    ratio = (np.exp(-kap * s) + np.exp(-kap * (2 * grid.h - s))) / (1 + e)  # cosh(k(h-s))/cosh(kh)
    psi = (1 - ratio) / kap2
    psibar = (1 - np.tanh(kap * grid.h) / (kap * grid.h)) / kap2
    return u - khat_par[:, None] * (psi / psibar)[None]


def neumann_map_profile(g, grid: GridSpec, z, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    return -alpha * neumann_profile(g, grid, z, alpha)


# ---------------------------------------------------------------- constructive path


@dataclass(frozen=True)
class CutoffPair:
    """Bump ``phi`` with unit mean and ``chi`` with ``chi(-h) = 1``, ``chi'(0) = 0``, zero integral.

    Integrals use the grid's midpoint rule so that the invariants are exact
    for the discrete construction.
    """

    grid: GridSpec
    phi_scale: float
    chi_b: float
    chi_c: float

    @staticmethod
    def _bump(z, h):
        t = 2 * np.asarray(z, dtype=float) / h + 1
        inside = np.abs(t) < 1
        out = np.zeros_like(t)
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out

    @classmethod
    def build(cls, grid: GridSpec) -> "CutoffPair":
        h, dz, s = grid.h, grid.dz, grid.z + grid.h
        total = cls._bump(grid.z, h).sum() * dz
        if total <= 0:
            raise ConfigurationError("vertical grid too coarse for the cutoff bump")
        # chi = 1 + b s^2 + c s^3 with 2 b h + 3 c h^2 = 0 and sum(chi) dz = 0
        mat = np.array([[2 * h, 3 * h**2], [np.sum(s**2), np.sum(s**3)]])
        rhs = np.array([0.0, -grid.nz])
        b, c = np.linalg.solve(mat, rhs)
        return cls(grid, h / total, float(b), float(c))

    def phi(self, z) -> np.ndarray:
        return self.phi_scale * self._bump(z, self.grid.h)

    def chi(self, z) -> np.ndarray:
        s = np.asarray(z, dtype=float) + self.grid.h
        return 1.0 + self.chi_b * s**2 + self.chi_c * s**3

    def dchi(self, z) -> np.ndarray:
        s = np.asarray(z, dtype=float) + self.grid.h
        return 2 * self.chi_b * s + 3 * self.chi_c * s**2

    def defects(self) -> dict:
        g = self.grid
        return {
            "phi_mean": abs(self.phi(g.z).sum() * g.dz / g.h - 1.0),
            "chi_integral": abs(self.chi(g.z).sum() * g.dz) / g.h,
            "chi_bottom": abs(self.chi(np.array([-g.h]))[0] - 1.0),
            "chi_top_slope": abs(self.dchi(np.array([0.0]))[0]) * g.h,
        }

    def check(self, tol: float = 1e-12):
        bad = {k: v for k, v in self.defects().items() if v > tol}
        if bad:
            raise ConfigurationError(f"cutoff invariants violated: {bad}")


@dataclass(frozen=True, eq=False)
class ConstructiveResult:
    lam: F.SpectralField
    v: F.SpectralField
    v_delta: F.SpectralField
    lift: LiftProfile
    corrected_mean_defect: float  # max |k . mean(U')| ; 0 for Neumann-Neumann
    top_slope_defect: float
    bottom_defect: float


def _discrete_laplacian_with_stress(u: F.SpectralField, g: F.SurfaceField) -> F.SpectralField:
    grid = u.grid
    c = F.laplacian(u).coeffs
    c[:, -1] += g.coeffs / grid.dz
    return u.with_coeffs(c)


def neumann_map_constructive(g, handle: StokesOperatorHandle, cutoffs: Optional[CutoffPair] = None,
                             alpha: float = DEFAULT_ALPHA, strict_mean: bool = True) -> ConstructiveResult:
    """Lambda by a lift with a barotropic correction followed by a homogeneous solve."""
    grid = handle.grid
    gs = check_mean(_as_boundary(g, grid), strict_mean)
    lift = LiftProfile(grid, gs.coeffs, 0.0)
    if grid.is_nn:
        u = lift.to_field()
        ubar = F.SurfaceField(grid, u.coeffs[:, 0])
        u_tilde = u - F.extend_surface(ubar)
        lap_ubar = F.laplacian_h(F.extend_surface(ubar))
        v_delta, _ = stokes_solve(handle, -alpha * u_tilde - lap_ubar, alpha)
        v = v_delta + u_tilde
        lam = apply_A(handle, v_delta, check=False) + F.helmholtz_project(lap_ubar)
        # cosine series have zero slope at both ends; the slope comes from the lift
        top = np.max(np.abs(lift.dz_values(np.array([0.0]))[:, 0] - gs.coeffs), initial=0.0)
        bottom = np.max(np.abs(lift.dz_values(np.array([-grid.h]))), initial=0.0)
        return ConstructiveResult(lam, v, v_delta, lift, 0.0, float(top), float(bottom))

    cutoffs = cutoffs or CutoffPair.build(grid)
    if cutoffs.grid != grid:
        raise ConfigurationError("cutoffs were built for another grid")
    cutoffs.check()
    u = lift.to_field()
    gradient_part = F.complementary_project(u)  # (1 - P) Ubar
    phi = cutoffs.phi(grid.z)
    u1 = u.with_coeffs(phi[None, :, None, None] * gradient_part.coeffs[:, None])
    trace = F.helmholtz_project(F.laplacian(u1)).coeffs[:, 0]
    chi = cutoffs.chi(grid.z)
    u2, _ = stokes_solve(handle, u.with_coeffs(chi[None, :, None, None] * trace[:, None]), 0.0)
    u_prime = u - u1 + u2
    defect = F.constraint_defect(u_prime)
    rhs = -(alpha * u_prime - _discrete_laplacian_with_stress(u_prime, gs))
    v_delta, _ = stokes_solve(handle, rhs, alpha)
    v = v_delta + u_prime
    lam = F.helmholtz_project(-_discrete_laplacian_with_stress(v, gs))
    ghost_top = v.coeffs[:, -1] + grid.dz * gs.coeffs
    top = np.max(np.abs((ghost_top - v.coeffs[:, -1]) / grid.dz - gs.coeffs), initial=0.0)
    return ConstructiveResult(lam, v, v_delta, lift, float(defect), float(top), 0.0)


# ---------------------------------------------------------------- kernel identities


@dataclass(frozen=True)
class KernelIdentityRow:
    h: float
    k: float
    kind: str  # "cosh" (Neumann-Neumann) or "sinh" (Dirichlet-Neumann)
    normalized: bool
    quadrature: float
    closed_form: float

    @property
    def rel_error(self) -> float:
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def kernel_identities(h: float, ks) -> list[KernelIdentityRow]:
    """Quadrature of ``int cosh^2`` / ``int sinh^2`` of ``(z + h)|k|`` over the depth.

    Closed forms are ``(sinh(2h|k|) +/- 2h|k|) / (4|k|)``; the normalized rows
    divide by ``sinh^2(h|k|)`` resp. ``cosh^2(h|k|)`` as in the lift kernels.
    """
    if h <= 0:
        raise DomainError("depth must be positive")
    rows = []
    for k in np.atleast_1d(np.asarray(ks, dtype=float)):
        if not k > 0:
            raise DomainError(f"|k| must be positive (got {k})")
        for kind, fn, sign, norm_fn in (("cosh", np.cosh, 1.0, np.sinh), ("sinh", np.sinh, -1.0, np.cosh)):
            closed = (np.sinh(2 * h * k) + sign * 2 * h * k) / (4 * k)
            pts = np.linspace(-h, 0, 9)[1:-1]
            quad, _ = scipy.integrate.quad(lambda z: fn((z + h) * k) ** 2, -h, 0.0,
                                           epsabs=0.0, epsrel=1e-13, limit=200, points=pts)
            rows.append(KernelIdentityRow(h, float(k), kind, False, quad, closed))
            scale = norm_fn(h * k) ** 2
            quad_n, _ = scipy.integrate.quad(lambda z: fn((z + h) * k) ** 2 / scale, -h, 0.0,
                                             epsabs=0.0, epsrel=1e-13, limit=200, points=pts)
            rows.append(KernelIdentityRow(h, float(k), kind, True, quad_n, closed / scale))
    return rows


def norm_probe(grid: GridSpec, handle: StokesOperatorHandle, rng: np.random.Generator, decay: float,
               alpha: float = DEFAULT_ALPHA) -> float:
    """H1-type size of ``Lambda g`` for random ``g`` with spectral decay ``|k|^-decay``."""
    shape = (2, grid.ny, grid.nx)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * F.band_mask(grid)[None]
    c *= (1.0 + grid.k2) ** (-decay / 2)
    c[:, 0, 0] = 0.0
    c = np.fft.fft2(np.real(np.fft.ifft2(c, axes=(-2, -1))), axes=(-2, -1))
    lam = neumann_map(F.SurfaceField(grid, c), handle, alpha)
    return float(np.sqrt(max(lam.inner(lam) + lam.inner(apply_A(handle, lam, check=False)), 0.0)))
