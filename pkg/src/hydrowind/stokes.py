"""Hydrostatic Stokes operator ``A = -P Delta``, its semigroup and resolvent.

Per horizontal mode the velocity is rotated into the frame
``(k_hat . v, k_hat_perp . v)``.  The projection only touches the vertical
mean of the parallel component, so ``A`` splits into two symmetric vertical
blocks:

* perpendicular: ``M = |k|^2 - d_zz``
* parallel: ``M`` compressed onto vertically mean-free profiles.

Both blocks are diagonalised once (cosines in the Neumann-Neumann case, a
symmetric eigendecomposition of the second-difference matrix otherwise), so
the semigroup and resolvent are exact in the discrete sense.  Slot
``(parallel, 0)`` holds the barotropic gradient direction, which is not in the
range of the projection; it is flagged as inadmissible wherever the
derivative wavenumber is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from . import fields as F
from .errors import DomainError, NumericalSetupError, PreconditionError, ShapeError
from .grid import GridSpec

CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StokesOperatorHandle:
    grid: GridSpec
    # vertical eigenvectors (columns) for the free and mean-free blocks; DN only
    q_free: np.ndarray = field(repr=False, default=None)
    d_free: np.ndarray = field(repr=False, default=None)
    q_meanfree: np.ndarray = field(repr=False, default=None)
    d_meanfree: np.ndarray = field(repr=False, default=None)

    @property
    def bc(self):
        return self.grid.bc

    @cached_property
    def khat(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        kn = np.sqrt(g.k2_d)
        safe = np.where(kn > 0, kn, 1.0)
        return np.where(kn > 0, g.kx_d / safe, 1.0), np.where(kn > 0, g.ky_d / safe, 0.0)

    @cached_property
    def projected_modes(self) -> np.ndarray:
        """Modes where the projection is active (nonzero derivative wavenumber)."""
        return self.grid.k2_d > 0

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """``lambda[r, j, ky, kx]`` for r = 0 (parallel), 1 (perpendicular)."""
        g = self.grid
        if g.is_nn:
            lam = g.k2[None] + (g.mu**2)[:, None, None]
            return np.stack([lam, lam])
        perp = g.k2[None] + self.d_free[:, None, None]
        par = np.where(self.projected_modes[None], g.k2[None] + self.d_meanfree[:, None, None], perp)
        par = np.where(self.admissible[0], par, 0.0)
        return np.stack([par, perp])

    @cached_property
    def admissible(self) -> np.ndarray:
        g = self.grid
        mask = np.ones((2, g.nz, g.ny, g.nx), dtype=bool)
        mask[0, 0] = ~self.projected_modes
        return mask

    @cached_property
    def modal_weights(self) -> np.ndarray:
        """Squared-modal-coefficient weights giving the L2 norm."""
        return self.grid.vertical_weights

    # ------------------------------------------------------------------ modal

    def to_modal(self, v: F.SpectralField) -> np.ndarray:
        if v.grid != self.grid or v.ncomp != 2 or v.basis != self.grid.basis:
            raise ShapeError("field does not match the operator grid")
        ex, ey = self.khat
        c = v.coeffs
        par = ex * c[0] + ey * c[1]
        perp = -ey * c[0] + ex * c[1]
        if self.grid.is_nn:
            return np.stack([par, perp])
        qf, qm = self.q_free, self.q_meanfree
        perp_m = np.einsum("jm,jyx->myx", qf, perp)
        par_m = np.where(self.projected_modes, np.einsum("jm,jyx->myx", qm, par),
                         np.einsum("jm,jyx->myx", qf, par))
        return np.stack([par_m, perp_m])

    def from_modal(self, x: np.ndarray) -> F.SpectralField:
        g = self.grid
        par, perp = x[0], x[1]
        if not g.is_nn:
            perp = np.einsum("jm,myx->jyx", self.q_free, perp)
            par = np.where(self.projected_modes, np.einsum("jm,myx->jyx", self.q_meanfree, par),
                           np.einsum("jm,myx->jyx", self.q_free, par))
        ex, ey = self.khat
        c = np.stack([ex * par - ey * perp, ey * par + ex * perp])
        return F.SpectralField(g, c, g.basis)

    def spectrum_rows(self):
        """(kx index, ky index, branch, j, lambda) for admissible entries."""
        g = self.grid
        ix = np.fft.fftfreq(g.nx, 1.0 / g.nx).astype(int)
        iy = np.fft.fftfreq(g.ny, 1.0 / g.ny).astype(int)
        lam = self.eigenvalues
        adm = self.admissible
        for r in range(2):
            for j in range(g.nz):
                for a in range(g.ny):
                    for b in range(g.nx):
                        if adm[r, j, a, b]:
                            yield ix[b], iy[a], r, j, float(lam[r, j, a, b])


def _mean_free_eigensystem(d2: np.ndarray):
    nz = d2.shape[0]
    pi1 = np.eye(nz) - np.full((nz, nz), 1.0 / nz)
    d, q = scipy.linalg.eigh(pi1 @ (-d2) @ pi1)
    ones = np.full(nz, 1.0 / np.sqrt(nz))
    k = int(np.argmax(np.abs(ones @ q)))
    if abs(abs(ones @ q[:, k]) - 1.0) > 1e-8:
        raise NumericalSetupError("could not isolate the barotropic direction")
    order = [k] + [i for i in range(nz) if i != k]
    q = q[:, order]
    d = d[order]
    d[0] = 0.0
    q[:, 0] = ones
    return d, q


def build_operator(grid: GridSpec) -> StokesOperatorHandle:
    """Precompute the spectral data of ``A`` on ``grid``."""
    if grid.is_nn:
        return StokesOperatorHandle(grid)
    d2 = F.dn_second_difference(grid.nz, grid.dz)
    d_free, q_free = scipy.linalg.eigh(-d2)
    d_mf, q_mf = _mean_free_eigensystem(d2)
    if np.min(d_free) <= 0:
        raise NumericalSetupError("vertical operator is not positive definite")
    probe = np.random.default_rng(0).standard_normal(grid.nz)
    rebuilt = q_free @ (d_free * (q_free.T @ probe))
    if np.linalg.norm(rebuilt + d2 @ probe) > 1e-10 * np.linalg.norm(d2 @ probe):
        raise NumericalSetupError("eigendecomposition failed its residual check")
    return StokesOperatorHandle(grid, q_free, d_free, q_mf, d_mf)


def _check_constraint(v: F.SpectralField):
    scale = max(float(np.max(np.abs(v.coeffs), initial=0.0)) * 2 * np.pi * max(v.grid.nx, v.grid.ny), 1e-300)
    if F.constraint_defect(v) > CONSTRAINT_TOL * scale:
        raise PreconditionError("field violates the barotropic divergence constraint")


def apply_A(handle: StokesOperatorHandle, v: F.SpectralField, check: bool = True) -> F.SpectralField:
    """``-P Delta v``."""
    if check:
        _check_constraint(v)
    return F.helmholtz_project(-F.laplacian(v))


def apply_power(handle: StokesOperatorHandle, v: F.SpectralField, theta: float,
                shift: float = 0.0) -> F.SpectralField:
    """``(shift + A)^theta v`` on the admissible part; gradient part dropped."""
    x = handle.to_modal(v)
    lam = handle.eigenvalues + shift
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(handle.admissible & (lam > 0), np.abs(lam) ** theta, 0.0)
    if theta == 0:
        factor = handle.admissible.astype(float)
    return handle.from_modal(x * factor)


def semigroup_step(handle: StokesOperatorHandle, v: F.SpectralField, t: float) -> F.SpectralField:
    """``exp(-tA) v``.  The non-admissible gradient part passes through unchanged."""
    if not np.isfinite(t) or t < 0:
        raise DomainError(f"semigroup time must be >= 0 (got {t})")
    x = handle.to_modal(v)
    factor = np.where(handle.admissible, np.exp(-handle.eigenvalues * t), 1.0)
    return handle.from_modal(x * factor)


def stokes_solve(handle: StokesOperatorHandle, b: F.SpectralField, alpha: float):
    """Solve ``alpha V - Delta V + grad_H P_s = b`` with ``div_H Vbar = 0``.

    Returns ``(V, P_s)`` with ``P_s`` a one-component, mean-free surface
    field.  ``alpha = 0`` is accepted unless ``b`` excites the constant
    mode of a Neumann-Neumann grid.
    """
    g = handle.grid
    if not np.isfinite(alpha) or alpha < 0:
        raise DomainError(f"alpha must be >= 0 (got {alpha})")
    x = handle.to_modal(b)
    singular = handle.admissible & (alpha + handle.eigenvalues == 0)
    if np.any(singular):
        scale = max(float(np.max(np.abs(x), initial=0.0)), 1e-300)
        if np.max(np.abs(x[singular])) > 1e-14 * scale:
            raise NumericalSetupError("alpha = 0 with a nonzero constant mode is singular")
    denom = np.where(handle.admissible & ~singular, alpha + handle.eigenvalues, 1.0)
    x = np.where(handle.admissible, x / denom, 0.0)
    v = handle.from_modal(x)
    # the momentum residual is a z-independent horizontal gradient
    r = b - alpha * v + F.laplacian(v)
    mean = F.vertical_average(r).coeffs
    k2 = np.where(g.k2_d > 0, g.k2_d, 1.0)
    p = np.where(g.k2_d > 0, -1j * (g.kx_d * mean[0] + g.ky_d * mean[1]) / k2, 0.0)
    return v, F.SurfaceField(g, p[None])


def momentum_residual(b: F.SpectralField, v: F.SpectralField, p: F.SurfaceField, alpha: float) -> float:
    """Relative L2 residual of ``alpha V - Delta V + grad P - b``."""
    grad = F.extend_surface(F.surface_gradient(p), v.basis)
    r = alpha * v - F.laplacian(v) + grad - b
    return r.norm() / max(b.norm(), 1e-300)
