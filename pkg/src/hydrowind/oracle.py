"""Slow references that share no kernels with the fast path.

The main piece is a staggered finite-difference solver for the shifted
stationary problem with surface stress.  Definition-level transforms and a
dense convection term back the spectral kernels up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeanCompatibilityError, NumericalSetupError, ShapeError, SizeGuardError
from . import fields as F
from .grid import BCCase

MAX_POINTS = 48


@dataclass(frozen=True)
class DenseGrid:
    """``n`` cells per axis on ``(0,1)^2 x (-h, 0)``.

    Velocities sit on x- and y-faces (MAC layout) and on the ``n + 1``
    vertical vertices ``z_l = -h + l h / n``; pressure sits on cell centres.
    """

    n: int
    h: float = 1.0
    bc: BCCase = BCCase.NEUMANN_NEUMANN

    def __post_init__(self):
        object.__setattr__(self, "bc", BCCase.parse(self.bc))
        if self.n > MAX_POINTS:
            raise SizeGuardError(f"dense grids are limited to {MAX_POINTS} points per axis")
        if self.n < 4:
            raise ShapeError("dense grids need at least 4 points per axis")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def dz(self) -> float:
        return self.h / self.n

    @property
    def z(self) -> np.ndarray:
        return -self.h + np.arange(self.n + 1) * self.dz

    @property
    def trapezoid(self) -> np.ndarray:
        w = np.full(self.n + 1, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w

    def positions(self, comp: int):
        """(x, y) meshes of shape (n, n) indexed [j, i] for a velocity component."""
        c = np.arange(self.n) * self.dx
        x = c + (0.5 * self.dx if comp == 0 else 0.0)
        y = c + (0.5 * self.dx if comp == 1 else 0.0)
        return np.meshgrid(x, y, indexing="xy")


@dataclass(frozen=True)
class OracleSolution:
    grid: DenseGrid
    v: np.ndarray  # (2, n+1, n, n): component, z, y, x
    p: np.ndarray  # (n, n)
    lam: np.ndarray  # -P_h Delta_h V, same layout as v
    residual: float


def _periodic_shift(n, idx, s):
    return (idx + s) % n


class _Indexer:
    def __init__(self, n):
        self.n = n
        self.nv = n * n * (n + 1)

    def vel(self, c, l, j, i):
        return c * self.nv + (l * self.n + j) * self.n + i

    def p(self, j, i):
        return 2 * self.nv + j * self.n + i

    @property
    def size(self):
        return 2 * self.nv + self.n * self.n


def _assemble(grid: DenseGrid, alpha: float):
    n, dx, dz = grid.n, grid.dx, grid.dz
    ix = _Indexer(n)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.ravel(r))
        cols.append(np.ravel(c))
        vals.append(np.ravel(np.broadcast_to(v, np.shape(r))))

    L, J, I = np.meshgrid(np.arange(n + 1), np.arange(n), np.arange(n), indexing="ij")
    dn = grid.bc is BCCase.DIRICHLET_NEUMANN
    for c in (0, 1):
        r = ix.vel(c, L, J, I)
        interior = ~(dn & (L == 0))
        ri = r[interior]
        Li, Ji, Ii = L[interior], J[interior], I[interior]
        add(ri, ri, alpha + 4.0 / dx**2 + 2.0 / dz**2)
        for sj, si in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            add(ri, ix.vel(c, Li, _periodic_shift(n, Ji, sj), _periodic_shift(n, Ii, si)), -1.0 / dx**2)
        # vertical: ghost values reflect through the Neumann ends
        up = np.where(Li == n, Li - 1, Li + 1)
        down = np.where(Li == 0, 1, Li - 1)
        add(ri, ix.vel(c, up, Ji, Ii), -1.0 / dz**2)
        add(ri, ix.vel(c, down, Ji, Ii), -1.0 / dz**2)
        # pressure gradient at the face
        if c == 0:
            add(ri, ix.p(Ji, _periodic_shift(n, Ii, 1)), 1.0 / dx)
            add(ri, ix.p(Ji, Ii), -1.0 / dx)
        else:
            add(ri, ix.p(_periodic_shift(n, Ji, 1), Ii), 1.0 / dx)
            add(ri, ix.p(Ji, Ii), -1.0 / dx)
        if dn:
            rb = r[L == 0]
            add(rb, rb, 1.0)
    # constraint rows: discrete divergence of the trapezoid mean at cell centres
    w = grid.trapezoid / grid.h
    Jc, Ic = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for l in range(n + 1):
        rc = ix.p(Jc, Ic)
        add(rc, ix.vel(0, l, Jc, Ic), w[l] / dx)
        add(rc, ix.vel(0, l, Jc, _periodic_shift(n, Ic, -1)), -w[l] / dx)
        add(rc, ix.vel(1, l, Jc, Ic), w[l] / dx)
        add(rc, ix.vel(1, l, _periodic_shift(n, Jc, -1), Ic), -w[l] / dx)
    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(ix.size, ix.size)).tocsr()
    # the divergence rows sum to zero; trade one for a pressure pin (mean fixed afterwards)
    pin = ix.p(0, 0)
    mat = mat.tolil()
    mat.rows[pin] = [pin]
    mat.data[pin] = [1.0]
    return mat.tocsc(), ix


def _rhs(grid: DenseGrid, ix: _Indexer, g: Callable, forcing: Optional[Callable]):
    n, dz = grid.n, grid.dz
    b = np.zeros(ix.size)
    dn = grid.bc is BCCase.DIRICHLET_NEUMANN
    for c in (0, 1):
        x, y = grid.positions(c)
        gc = g(x, y)[c]
        # ghost at the surface: V_{n+1} = V_{n-1} + 2 dz g
        b[ix.vel(c, n, np.arange(n)[:, None], np.arange(n)[None, :])] += 2.0 * gc / dz
        if forcing is not None:
            for l, zl in enumerate(grid.z):
                if dn and l == 0:
                    continue
                b[ix.vel(c, l, np.arange(n)[:, None], np.arange(n)[None, :])] += forcing(x, y, zl)[c]
    return b


def _laplacian_with_stress(grid: DenseGrid, v: np.ndarray, g: Callable) -> np.ndarray:
    """``Delta_h V`` with the surface ghost carrying ``g``; (2, n+1, n, n)."""
    n, dx, dz = grid.n, grid.dx, grid.dz
    out = np.zeros_like(v)
    for c in (0, 1):
        u = v[c]
        lap_h = (np.roll(u, 1, 2) + np.roll(u, -1, 2) + np.roll(u, 1, 1) + np.roll(u, -1, 1) - 4 * u) / dx**2
        x, y = grid.positions(c)
        ghost_top = u[n - 1] + 2 * dz * g(x, y)[c]
        ext = np.concatenate([u[1:2], u, ghost_top[None]], axis=0)  # bottom ghost reflects (Neumann)
        lap_z = (ext[2:] - 2 * ext[1:-1] + ext[:-2]) / dz**2
        out[c] = lap_h + lap_z
        if grid.bc is BCCase.DIRICHLET_NEUMANN:
            out[c, 0] = 2 * out[c, 1] - out[c, 2]
    return out


def discrete_projection(grid: DenseGrid, f: np.ndarray) -> np.ndarray:
    """MAC Helmholtz projection of the trapezoid mean via a 5-point Poisson solve."""
    n, dx = grid.n, grid.dx
    w = grid.trapezoid / grid.h
    m = np.einsum("l,clji->cji", w, f)
    div = (m[0] - np.roll(m[0], 1, 1)) / dx + (m[1] - np.roll(m[1], 1, 0)) / dx
    e = sp.identity(n, format="csr")
    d = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    d[0, n - 1] = 1.0
    d[n - 1, 0] = 1.0
    d = d.tocsr() / dx**2
    lap = (sp.kron(e, d) + sp.kron(d, e)).tolil()
    rhs = div.ravel().copy()
    lap.rows[0] = list(range(n * n))
    lap.data[0] = [1.0] * (n * n)
    rhs[0] = 0.0
    phi = spla.spsolve(lap.tocsc(), rhs).reshape(n, n)
    gx = (np.roll(phi, -1, 1) - phi) / dx
    gy = (np.roll(phi, -1, 0) - phi) / dx
    return f - np.stack([gx, gy])[:, None]


class FDStationarySolver:
    """The staggered saddle system for one grid and shift.

    The assembled sparse matrix is the definition and checks every solve.
    Its horizontal stencils are circulant, so an index-space DFT splits it
    exactly into one dense vertical-plus-pressure system per horizontal index.
    A sparse LU of the full 3D system costs minutes at n = 32.
    """

    def __init__(self, grid: DenseGrid, alpha: float = 1.0):
        if alpha < 0:
            raise NumericalSetupError("alpha must be >= 0")
        if alpha == 0 and grid.bc is BCCase.NEUMANN_NEUMANN:
            raise NumericalSetupError("alpha = 0 leaves the Neumann-Neumann system singular")
        self.grid = grid
        self.alpha = float(alpha)
        self.mat, self.ix = _assemble(grid, self.alpha)
        self.blocks = self._mode_blocks()

    def _mode_blocks(self) -> np.ndarray:
        grid, n = self.grid, self.grid.n
        dx, dz, nn = grid.dx, grid.dz, n + 1
        a = np.fft.fftfreq(n, 1.0 / n)
        sx = np.exp(2j * np.pi * a / n)[None, :]  # shift symbol along x (last axis)
        sy = np.exp(2j * np.pi * a / n)[:, None]
        lap_h = ((sx + 1 / sx - 2) + (sy + 1 / sy - 2)) / dx**2
        vert = np.diag(np.full(nn, 2.0)) - np.diag(np.ones(n), 1) - np.diag(np.ones(n), -1)
        vert[0, 1] = vert[n, n - 1] = -2.0
        vert /= dz**2
        k = np.zeros((n, n, 2 * nn + 1, 2 * nn + 1), complex)
        w = grid.trapezoid / grid.h
        gx = (np.broadcast_to(sx, (n, n)) - 1) / dx
        gy = (np.broadcast_to(sy, (n, n)) - 1) / dx
        for c, gc in ((0, gx), (1, gy)):
            sl = slice(c * nn, (c + 1) * nn)
            k[:, :, sl, sl] = vert[None, None] + (self.alpha - lap_h)[:, :, None, None] * np.eye(nn)
            k[:, :, sl, 2 * nn] = gc[:, :, None]
            k[:, :, 2 * nn, sl] = w[None, None, :] * (1 - np.conj(gc * dx + 1))[:, :, None] / dx
            if grid.bc is BCCase.DIRICHLET_NEUMANN:
                row = c * nn
                k[:, :, row, :] = 0.0
                k[:, :, row, row] = 1.0
        # the mean mode of the pressure is fixed to zero
        k[0, 0, 2 * nn, :] = 0.0
        k[0, 0, 2 * nn, 2 * nn] = 1.0
        return k

    def solve(self, g: Callable, forcing: Optional[Callable] = None) -> OracleSolution:
        grid, ix, n = self.grid, self.ix, self.grid.n
        nn = n + 1
        if grid.bc is BCCase.NEUMANN_NEUMANN:
            for c in (0, 1):
                x, y = grid.positions(c)
                vals = g(x, y)[c]
                if abs(vals.mean()) > 1e-12 * max(np.abs(vals).max(), 1e-300):
                    raise MeanCompatibilityError(
                        "surface stress has nonzero horizontal mean; the Neumann-Neumann problem needs mean zero")
        b = _rhs(grid, ix, g, forcing)
        bv = np.fft.fft2(b[: 2 * ix.nv].reshape(2 * nn, n, n), axes=(-2, -1))
        rhs = np.zeros((n, n, 2 * nn + 1), complex)
        rhs[:, :, : 2 * nn] = np.moveaxis(bv, 0, -1)
        try:
            sol_hat = np.linalg.solve(self.blocks, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NumericalSetupError(f"saddle system is singular: {exc}") from exc
        v = np.real(np.fft.ifft2(np.moveaxis(sol_hat[:, :, : 2 * nn], -1, 0), axes=(-2, -1)))
        p = np.real(np.fft.ifft2(sol_hat[:, :, 2 * nn]))
        sol = np.concatenate([v.ravel(), p.ravel()])
        resid_vec = self.mat @ sol - b
        resid_vec[ix.p(0, 0)] = 0.0  # pin row; the mean is fixed instead
        resid = np.linalg.norm(resid_vec) / max(np.linalg.norm(b), 1e-300)
        if resid > 1e-9:
            raise NumericalSetupError(f"saddle solve residual {resid:.3e} too large")
        v = v.reshape(2, nn, n, n)
        lam = -discrete_projection(grid, _laplacian_with_stress(grid, v, g))
        return OracleSolution(grid, v, p, lam, float(resid))


def fd_stationary_solve(g: Callable, grid: DenseGrid, alpha: float = 1.0,
                        forcing: Optional[Callable] = None) -> OracleSolution:
    """``alpha V - Delta_h V + grad_h P = forcing``, ``d_z V = g`` at the surface."""
    return FDStationarySolver(grid, alpha).solve(g, forcing)


def mode_amplitude(grid: DenseGrid, field: np.ndarray, comp: int, kx: int, ky: int) -> np.ndarray:
    """Complex amplitude of ``exp(2 pi i (kx x + ky y))`` per level, honouring the stagger."""
    x, y = grid.positions(comp)
    phase = np.exp(-2j * np.pi * (kx * x + ky * y))
    return np.einsum("lji,ji->l", field, phase) / grid.n**2


# ---------------------------------------------------------------- transforms


def _guard(*sizes):
    if max(sizes) > MAX_POINTS:
        raise SizeGuardError(f"dense oracle limited to {MAX_POINTS} points per axis")


def direct_dft(samples: np.ndarray) -> np.ndarray:
    """Definition-level DFT over the last two axes, normalized by ``1 / (nx ny)``."""
    s = np.asarray(samples)
    ny, nx = s.shape[-2:]
    _guard(ny, nx)
    ex = np.exp(-2j * np.pi * np.outer(np.arange(nx), np.arange(nx)) / nx)
    ey = np.exp(-2j * np.pi * np.outer(np.arange(ny), np.arange(ny)) / ny)
    return np.einsum("ky,...yx,qx->...kq", ey, s, ex) / (nx * ny)


def _trig_eval(n: int, pts: np.ndarray, deriv: bool = False):
    """Matrix evaluating a band-limited periodic interpolant of ``n`` samples at ``pts``.

    The Nyquist mode is dropped, matching the band limit of the fast path.
    """
    xs = np.arange(n) / n
    ks = np.arange(-(n // 2) + 1, n // 2)
    analysis = np.exp(-2j * np.pi * np.outer(ks, xs)) / n
    synth = np.exp(2j * np.pi * np.outer(pts, ks))
    if deriv:
        synth = synth * (2j * np.pi * ks)[None, :]
    return synth @ analysis


def dense_nonlinearity(v: np.ndarray, vp: np.ndarray, h: float, bc="NN") -> np.ndarray:
    """``P(v . grad_H v' + w(v) d_z v')`` from physical samples ``(2, nz, ny, nx)``.

    Works pointwise on a 3/2-refined horizontal grid with explicit trigonometric
    interpolation; vertically with explicit cosine sums (Neumann-Neumann) or
    the ghost-point centred difference (Dirichlet-Neumann).  The projection is
    written out mode by mode.  Returns samples on the input grid.
    """
    bc = BCCase.parse(bc)
    v = np.asarray(v, dtype=float)
    vp = np.asarray(vp, dtype=float)
    if v.shape != vp.shape or v.ndim != 4 or v.shape[0] != 2:
        raise ShapeError("expected two matching (2, nz, ny, nx) sample arrays")
    _, nz, ny, nx = v.shape
    _guard(nz, ny, nx)
    mx, my = 3 * nx // 2, 3 * ny // 2
    px, py = np.arange(mx) / mx, np.arange(my) / my
    ex, dex = _trig_eval(nx, px), _trig_eval(nx, px, True)
    ey, dey = _trig_eval(ny, py), _trig_eval(ny, py, True)

    def horiz(a, dxo=False, dyo=False):
        return np.real(np.einsum("Yy,...yx,Xx->...YX", dey if dyo else ey, a, dex if dxo else ex))

    dzc = h / nz
    zc = (np.arange(nz) + 0.5) * dzc  # s = z + h at cell centres
    if bc is BCCase.NEUMANN_NEUMANN:
        mq = 2 * nz
        sq = (np.arange(mq) + 0.5) * h / mq
        m = np.arange(nz)
        mu = m * np.pi / h
        w = np.full(nz, h / 2)
        w[0] = h
        ana = (np.cos(np.outer(mu, zc)) * dzc) / w[:, None]  # samples -> cosine coefficients
        cq = np.cos(np.outer(sq, mu))
        sqm = np.sin(np.outer(sq, mu))
        val = cq @ ana  # value at quadrature heights
        dz_op = -(sqm * mu[None, :]) @ ana
        # w(v)(s) = -int_0^s div: integrate each cosine exactly
        integ = np.where(m[None, :] == 0, sq[:, None], sqm / np.where(mu > 0, mu, 1.0)[None, :]) @ ana
        back = (np.cos(np.outer(zc, mu))) @ ((cq.T * (h / mq)) / w[:, None])
    else:
        mq = nz
        val = np.eye(nz)
        d = np.zeros((nz, nz))
        for j in range(nz):
            below = -1.0 if j == 0 else 0.0
            if j > 0:
                d[j, j - 1] -= 1.0
            else:
                d[j, j] -= below
            if j < nz - 1:
                d[j, j + 1] += 1.0
            else:
                d[j, j] += 1.0
        dz_op = d / (2 * dzc)
        # faces by cumulative midpoint sums, centres by averaging neighbours
        lower = np.tril(np.ones((nz, nz))) * dzc
        face_up = lower
        face_down = np.vstack([np.zeros((1, nz)), lower[:-1]])
        integ = 0.5 * (face_up + face_down)
        back = np.eye(nz)

    def vert(op, a):
        return np.einsum("qj,...jyx->...qyx", op, a)

    u = horiz(vert(val, v))
    dvx = horiz(vert(val, vp), dxo=True)
    dvy = horiz(vert(val, vp), dyo=True)
    dvz = horiz(vert(dz_op, vp))
    div = horiz(vert(integ, v[0:1]), dxo=True)[0] + horiz(vert(integ, v[1:2]), dyo=True)[0]
    wq = -div
    prod = u[0][None] * dvx + u[1][None] * dvy + wq[None] * dvz
    # back to the input grid: vertical projection, then band-limited horizontal restriction
    prod = vert(back, prod)
    kx = np.arange(-(nx // 2) + 1, nx // 2)
    ky = np.arange(-(ny // 2) + 1, ny // 2)
    ax = np.exp(-2j * np.pi * np.outer(kx, px)) / mx
    ay = np.exp(-2j * np.pi * np.outer(ky, py)) / my
    coef = np.einsum("kY,...YX,qX->...kq", ay, prod, ax)  # (2, nz, ky, kx)
    # projection: remove the k-parallel part of the vertical mean
    mean = coef.mean(axis=1)  # midpoint mean is exact on retained cosines
    KX, KY = np.meshgrid(2 * np.pi * kx, 2 * np.pi * ky, indexing="xy")
    k2 = KX**2 + KY**2
    par = np.where(k2 > 0, (KX * mean[0] + KY * mean[1]) / np.where(k2 > 0, k2, 1.0), 0.0)
    coef = coef - np.stack([KX * par, KY * par])[:, None]
    sx = np.exp(2j * np.pi * np.outer(np.arange(nx) / nx, kx))
    sy = np.exp(2j * np.pi * np.outer(np.arange(ny) / ny, ky))
    return np.real(np.einsum("yk,...kq,xq->...yx", sy, coef, sx))


# ------------------------------------------------------- Neumann map check

DEFAULT_MODES = ((1, 0, 0), (1, 0, 1), (0, 1, 0), (1, 1, 0), (1, -1, 1), (2, 1, 1))


@dataclass(frozen=True)
class NeumannComparison:
    bc: str
    n: int
    mode: tuple
    error: float  # relative L2 distance on the retained vertical space
    nodal_error: float  # relative discrete L2 distance at the oracle's vertices
    oracle_residual: float


def _stress(kx, ky, comp):
    def g(x, y):
        val = np.cos(2 * np.pi * (kx * x + ky * y))
        out = [np.zeros_like(val), np.zeros_like(val)]
        out[comp] = val
        return out

    return g


def _linear_cosine_projection(profile: np.ndarray, dense: DenseGrid, nz: int) -> np.ndarray:
    """Cosine coefficients of the piecewise-linear interpolant of vertex values."""
    s = dense.z + dense.h
    mu = np.arange(nz) * np.pi / dense.h
    x = mu * dense.dz
    with np.errstate(invalid="ignore", divide="ignore"):
        sigma = np.where(x > 0, 2 * (1 - np.cos(x)) / np.where(x > 0, x, 1.0) ** 2, 1.0)
    w = np.full(nz, dense.h / 2)
    w[0] = dense.h
    quad = np.cos(np.outer(mu, s)) * dense.trapezoid[None, :]
    return (sigma / w) * (quad @ profile)


def neumann_comparison(bc, n: int, mode=(1, 0, 0), h: float = 0.5, alpha: float = 1.0,
                       solver: Optional[FDStationarySolver] = None) -> NeumannComparison:
    """Spectral ``Lambda g`` against the staggered finite-difference oracle for ``g = cos(k.x) e_c``."""
    from .grid import GridSpec
    from .neumann import neumann_map
    from .stokes import build_operator

    bc = BCCase.parse(bc)
    kx, ky, comp = mode
    dense = DenseGrid(n, h, bc)
    solver = solver or FDStationarySolver(dense, alpha)
    sol = solver.solve(_stress(kx, ky, comp))

    grid = GridSpec(n, n, n, h=h, bc=bc)
    samples = np.zeros((2, n, n))
    samples[comp] = np.cos(2 * np.pi * (kx * grid.x[None, :] + ky * grid.y[:, None]))
    lam = neumann_map(F.SurfaceField.from_physical(samples, grid), build_operator(grid), alpha)

    num = den = num_nodal = den_nodal = 0.0
    s_nodes = dense.z + h
    for sign in (1, -1):
        iy, ix = (sign * ky) % n, (sign * kx) % n
        for c in (0, 1):
            prof = mode_amplitude(dense, sol.lam[c], c, sign * kx, sign * ky)
            spec = lam.coeffs[c, :, iy, ix]
            if bc is BCCase.NEUMANN_NEUMANN:
                w = grid.vertical_weights
                ref = _linear_cosine_projection(prof, dense, n)
                num += np.sum(w * np.abs(spec - ref) ** 2)
                den += np.sum(w * np.abs(spec) ** 2)
                at_nodes = np.cos(np.outer(s_nodes, grid.mu)) @ spec
            else:
                ref = 0.5 * (prof[:-1] + prof[1:])
                num += grid.dz * np.sum(np.abs(spec - ref) ** 2)
                den += grid.dz * np.sum(np.abs(spec) ** 2)
                ext = np.concatenate([[-spec[0]], spec, [spec[-1]]])
                at_nodes = 0.5 * (ext[:-1] + ext[1:])
            num_nodal += np.sum(dense.trapezoid * np.abs(at_nodes - prof) ** 2)
            den_nodal += np.sum(dense.trapezoid * np.abs(prof) ** 2)
    return NeumannComparison(bc.value, n, tuple(mode), float(np.sqrt(num / den)),
                             float(np.sqrt(num_nodal / den_nodal)), sol.residual)


def fitted_order(ns, errors) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(n)``."""
    return float(-np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])


def neumann_convergence(bc, ns=(8, 16, 32), modes=DEFAULT_MODES, h: float = 0.5, alpha: float = 1.0):
    """Rows for every (n, mode) plus the fitted order per mode."""
    rows = []
    for n in ns:
        solver = FDStationarySolver(DenseGrid(n, h, BCCase.parse(bc)), alpha)
        rows.extend(neumann_comparison(bc, n, m, h, alpha, solver) for m in modes)
    orders = {m: fitted_order(ns, [r.error for r in rows if r.mode == tuple(m)]) for m in modes}
    return rows, orders
