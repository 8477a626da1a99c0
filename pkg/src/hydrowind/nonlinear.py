"""Projected convection ``F(v, v') = P(v . grad_H v' + w(v) d_z v')``.

Products are formed on a horizontally 3/2-padded grid.  In the cosine basis
the vertical products are taken on ``2 nz`` midpoints and projected back
onto the retained cosines, which integrates every triple product of retained
modes exactly.  Nodal (Dirichlet-Neumann) fields use pointwise products and
the centred difference for ``d_z``.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from . import fields as F
from .errors import ShapeError

log = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _pad_slots(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Source and destination indices of the non-Nyquist modes when padding n -> m."""
    f = np.fft.fftfreq(n, 1.0 / n).astype(int)
    keep = np.flatnonzero(np.abs(f) < n // 2)
    return keep, f[keep] % m


def padded_size(n: int) -> int:
    m = (3 * n + 1) // 2
    return m + (m % 2)


def to_padded_physical(c: np.ndarray, ny: int, nx: int) -> np.ndarray:
    py, px = padded_size(ny), padded_size(nx)
    sy, dy = _pad_slots(ny, py)
    sx, dx = _pad_slots(nx, px)
    out = np.zeros(c.shape[:-2] + (py, px), complex)
    out[..., dy[:, None], dx[None, :]] = c[..., sy[:, None], sx[None, :]]
    return np.real(np.fft.ifft2(out, axes=(-2, -1))) * (py * px)


def from_padded_physical(u: np.ndarray, ny: int, nx: int) -> np.ndarray:
    py, px = u.shape[-2:]
    hat = np.fft.fft2(u, axes=(-2, -1)) / (py * px)
    sy, dy = _pad_slots(ny, py)
    sx, dx = _pad_slots(nx, px)
    out = np.zeros(u.shape[:-2] + (ny, nx), complex)
    out[..., sy[:, None], sx[None, :]] = hat[..., dy[:, None], dx[None, :]]
    return out


def _check(v: F.SpectralField, vp: F.SpectralField):
    if v.grid != vp.grid or v.basis != vp.basis:
        raise ShapeError("advect needs both fields on the same grid and basis")
    if v.ncomp != 2:
        raise ShapeError("the advecting field needs two components")
    defect = F.constraint_defect(v)
    scale = max(float(np.max(np.abs(v.coeffs), initial=0.0)), 1e-300) * 2 * np.pi * v.grid.nx
    if defect > 1e-10 * scale:
        log.warning("advecting field violates the barotropic constraint (defect %.3e)", defect)


def convection(v: F.SpectralField, vp: F.SpectralField) -> F.SpectralField:
    """Unprojected ``v . grad_H v' + w(v) d_z v'`` (dealiased Galerkin)."""
    _check(v, vp)
    g = v.grid
    if v.basis == "cos":
        nq = 2 * g.nz
        cq = F.cosine_matrix(g.nz, nq)
        sq = F.sine_matrix(g.nz, nq)

        def phys(c, mat):
            return to_padded_physical(np.einsum("jm,cmyx->cjyx", mat, c), g.ny, g.nx)

        u = phys(v.coeffs, cq)
        ux = phys(F.ddx(vp).coeffs, cq)
        uy = phys(F.ddy(vp).coeffs, cq)
        uz = phys(F.ddz(vp).coeffs, sq)
        w = F.vertical_velocity(v)
        wq = phys(w.coeffs, sq)[0]
        if w.linear is not None:
            s = (np.arange(nq) + 0.5) * g.h / nq
            wq = wq + s[:, None, None] * to_padded_physical(w.linear[0], g.ny, g.nx)[None]
        prod = u[0][None] * ux + u[1][None] * uy + wq[None] * uz
        hat = from_padded_physical(prod, g.ny, g.nx)
        weights = g.vertical_weights
        c = np.einsum("jm,cjyx->cmyx", cq, hat) * (g.h / nq) / weights[None, :, None, None]
        return vp.with_coeffs(c)

    u = to_padded_physical(v.coeffs, g.ny, g.nx)
    ux = to_padded_physical(F.ddx(vp).coeffs, g.ny, g.nx)
    uy = to_padded_physical(F.ddy(vp).coeffs, g.ny, g.nx)
    uz = to_padded_physical(F.ddz(vp).coeffs, g.ny, g.nx)
    wq = to_padded_physical(F.vertical_velocity(v).coeffs, g.ny, g.nx)[0]
    prod = u[0][None] * ux + u[1][None] * uy + wq[None] * uz
    return vp.with_coeffs(from_padded_physical(prod, g.ny, g.nx))


def advect(v: F.SpectralField, vp: F.SpectralField) -> F.SpectralField:
    """``F(v, v')``: the projected convection term, real and constrained."""
    return F.helmholtz_project(F.enforce_hermitian(convection(v, vp)))


def bilinear_expand_check(v: F.SpectralField, z: F.SpectralField) -> float:
    """Relative residual of ``F(v+Z, v+Z) - [F(v,v) + F(v,Z) + F(Z,v) + F(Z,Z)]``.

    Normalized by ``||F(v+Z, v+Z)||``, or by the largest summand when that
    vanishes (the ``Z = -v`` cancellation case).
    """
    full = advect(v + z, v + z)
    parts = [advect(v, v), advect(v, z), advect(z, v), advect(z, z)]
    resid = full - parts[0] - parts[1] - parts[2] - parts[3]
    scale = full.norm()
    if scale == 0.0:
        scale = max(p.norm() for p in parts)
    if scale == 0.0:
        return 0.0
    return resid.norm() / scale


def energy_residual(v: F.SpectralField) -> float:
    """``|<F(v, v), v>| / (||F(v, v)|| ||v||)``."""
    f = advect(v, v)
    den = f.norm() * v.norm()
    return abs(f.inner(v)) / den if den > 0 else 0.0


def anisotropic_estimate_monitor(v: F.SpectralField, vp: F.SpectralField):
    """``(||F(v,v')|| / (||v||_H1 ||v'||_H3/2), ||F(v,v')|| / (||v||_H3/2 ||v'||_H1))``.

    ``None`` stands for a zero denominator.
    """
    from .diagnostics import sobolev_norm

    num = advect(v, vp).norm()
    out = []
    for s1, s2 in ((1.0, 1.5), (1.5, 1.0)):
        den = sobolev_norm(v, s1) * sobolev_norm(vp, s2)
        out.append(num / den if den > 0 else None)
    return tuple(out)
