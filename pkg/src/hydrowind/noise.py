"""Truncated Wiener processes and the two stochastic convolutions.

Both convolutions share one mechanism.  A bank holds real shape fields
``f_n`` (already in the range of the projection) driven by independent
Brownian motions ``beta_n``:

    Z(t) = exp(-tA) Z0 + sum_n int_0^t a_n(s) exp(-(t-s)A) f_n dbeta_n(s).

In the eigenbasis of ``A`` every modal slot is an Ornstein-Uhlenbeck
coordinate.  Slots fed by the same ``beta_n`` but with different eigenvalues
are correlated; each step draws the exact joint Gaussian increment with
covariance ``(1 - exp(-(l_i + l_j) dt)) / (l_i + l_j)``.  ``a_n`` is frozen
over a step.

* interior forcing: ``f_n = sigma_n e_n`` with real eigenfunctions ``e_n``,
  ``a_n = 1``;
* boundary forcing: ``f_n = Lambda(b g_n)``, ``a_n(t) = a(t)`` for the
  separable surface multiplier ``h_b = a(t) b(x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import fields as F
from .errors import ConfigurationError, DomainError, ShapeError
from .grid import GridSpec
from .neumann import DEFAULT_ALPHA, neumann_map
from .stokes import StokesOperatorHandle, semigroup_step


@dataclass(frozen=True)
class InteriorMode:
    """Real eigenfunction of ``A``: horizontal mode, branch, eigen index, phase."""

    ix: int
    iy: int
    branch: int  # 0 parallel to k, 1 perpendicular
    j: int
    phase: str = "cos"


@dataclass(frozen=True)
class BoundaryMode:
    """Surface stress ``trig(2 pi (ix x + iy y)) e_comp``."""

    ix: int
    iy: int
    comp: int
    phase: str = "cos"


@dataclass(frozen=True)
class NoiseSpec:
    n_f: int = 0
    n_b: int = 0
    alpha_f: float = 1.5
    c_f: float = 0.1
    alpha_b: float = 1.5
    c_b: float = 0.1
    interior_modes: Optional[tuple] = None
    boundary_modes: Optional[tuple] = None
    # h_b(t, x, y) = a(t) b(x, y); a is piecewise constant given as (t_start, value)
    hb_schedule: tuple = ((0.0, 1.0),)
    # b = 1 + eps cos(2 pi (ix x + iy y))
    hb_modulation: Optional[tuple] = None
    seed: int = 0
    neumann_alpha: float = DEFAULT_ALPHA
    strict_mean: bool = True

    def __post_init__(self):
        problems = []
        if self.n_f < 0 or self.n_b < 0:
            problems.append("mode counts must be >= 0")
        for name in ("alpha_f", "c_f", "alpha_b", "c_b", "neumann_alpha"):
            if not np.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if self.c_f < 0 or self.c_b < 0:
            problems.append("amplitudes must be >= 0")
        if self.neumann_alpha <= 0:
            problems.append("neumann_alpha must be positive")
        times = [t for t, _ in self.hb_schedule]
        if not times or times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
            problems.append("hb_schedule must start at t = 0 with increasing times")
        if not (0 <= self.seed < 2**64):
            problems.append("seed must fit in 64 bits")
        if problems:
            raise ConfigurationError("; ".join(problems))

    def sigma_f(self, n: int) -> float:
        return self.c_f * n ** (-self.alpha_f)

    def sigma_b(self, n: int) -> float:
        return self.c_b * n ** (-self.alpha_b)

    def hb_time_factor(self, t: float) -> float:
        value = self.hb_schedule[0][1]
        for start, v in self.hb_schedule:
            if t + 1e-12 >= start:
                value = v
        return float(value)


# ---------------------------------------------------------------- shapes


def _signed_index(i: int, n: int) -> int:
    return i % n


def interior_eigenfunction(handle: StokesOperatorHandle, mode: InteriorMode) -> F.SpectralField:
    """Unit-norm real eigenfunction."""
    g = handle.grid
    a, b = _signed_index(mode.iy, g.ny), _signed_index(mode.ix, g.nx)
    if not (0 <= mode.j < g.nz) or mode.branch not in (0, 1):
        raise ConfigurationError(f"interior mode {mode} out of range")
    if g.nyquist_mask[a, b]:
        raise ConfigurationError(f"interior mode {mode} sits on a Nyquist index")
    if not handle.admissible[mode.branch, mode.j, a, b]:
        raise ConfigurationError(f"interior mode {mode} is not in the constrained space")
    x = np.zeros((2, g.nz, g.ny, g.nx), complex)
    x[mode.branch, mode.j, a, b] = 1.0 if mode.phase == "cos" else 1j
    f = F.enforce_hermitian(handle.from_modal(x))
    nrm = f.norm()
    if nrm < 1e-12:
        raise ConfigurationError(f"interior mode {mode} has no real {mode.phase} part")
    return f / nrm


def default_interior_modes(handle: StokesOperatorHandle, count: int) -> list[InteriorMode]:
    """Lowest admissible eigenpairs (constants and Nyquist excluded)."""
    g = handle.grid
    ix = np.fft.fftfreq(g.nx, 1.0 / g.nx).astype(int)
    iy = np.fft.fftfreq(g.ny, 1.0 / g.ny).astype(int)
    cands = []
    for a in range(g.ny):
        for b in range(g.nx):
            if g.nyquist_mask[a, b]:
                continue
            # one representative per conjugate pair
            if (iy[a], ix[b]) < (0, 0) or (iy[a] == 0 and ix[b] < 0):
                continue
            for r in (0, 1):
                for j in range(g.nz):
                    lam = handle.eigenvalues[r, j, a, b]
                    if not handle.admissible[r, j, a, b] or lam <= 0:
                        continue
                    phases = ("cos",) if (ix[b], iy[a]) == (0, 0) else ("cos", "sin")
                    for p in phases:
                        cands.append((round(lam, 9), abs(ix[b]) + abs(iy[a]), ix[b], iy[a], r, j, p))
    cands.sort()
    if count > len(cands):
        raise ConfigurationError(f"only {len(cands)} interior modes are available")
    return [InteriorMode(c[2], c[3], c[4], c[5], c[6]) for c in cands[:count]]


def boundary_shape(grid: GridSpec, mode: BoundaryMode) -> F.SurfaceField:
    if mode.comp not in (0, 1):
        raise ConfigurationError(f"boundary mode {mode} has invalid component")
    arg = 2 * np.pi * (mode.ix * grid.x[None, :] + mode.iy * grid.y[:, None])
    vals = np.zeros((2, grid.ny, grid.nx))
    vals[mode.comp] = np.cos(arg) if mode.phase == "cos" else np.sin(arg)
    return F.SurfaceField.from_physical(vals, grid)


def default_boundary_modes(grid: GridSpec, count: int) -> list[BoundaryMode]:
    cands = []
    for iy in range(-(grid.ny // 2) + 1, grid.ny // 2):
        for ix in range(-(grid.nx // 2) + 1, grid.nx // 2):
            if iy < 0 or (iy == 0 and ix < 0):
                continue
            if (ix, iy) == (0, 0):
                if grid.is_nn:
                    continue
                phases = ("cos",)
            else:
                phases = ("cos", "sin")
            for comp in (0, 1):
                for p in phases:
                    cands.append((ix * ix + iy * iy, abs(ix) + abs(iy), ix, iy, comp, p))
    cands.sort()
    if count > len(cands):
        raise ConfigurationError(f"only {len(cands)} boundary modes are available")
    return [BoundaryMode(c[2], c[3], c[4], c[5]) for c in cands[:count]]


def surface_multiplier(grid: GridSpec, spec: NoiseSpec) -> np.ndarray:
    """``b(x, y)`` on the physical grid."""
    if spec.hb_modulation is None:
        return np.ones((grid.ny, grid.nx))
    ix, iy, eps = spec.hb_modulation
    return 1.0 + eps * np.cos(2 * np.pi * (ix * grid.x[None, :] + iy * grid.y[:, None]))


# ---------------------------------------------------------------- banks


def _ou_cov(lams: np.ndarray, dt: float) -> np.ndarray:
    s = lams[:, None] + lams[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(s > 0, -np.expm1(-s * dt) / np.where(s > 0, s, 1.0), dt)
    return c


def _sqrt_psd(c: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(c)
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(eq=False)
class ShapeBank:
    """Shapes stored on the union of their modal supports."""

    lam: np.ndarray  # eigenvalue per support slot
    support: np.ndarray  # flat indices into the modal array
    locs: list  # per shape: positions in support
    coefs: list  # per shape: modal coefficients on those positions
    uniq: list  # per shape: distinct eigenvalues
    which: list  # per shape: index into uniq for each position
    _sqrt_cache: dict = field(default_factory=dict)

    @classmethod
    def from_shapes(cls, handle: StokesOperatorHandle, shapes: Sequence[F.SpectralField]) -> "ShapeBank":
        modal = [np.where(handle.admissible, handle.to_modal(s), 0.0) for s in shapes]
        lam_full = handle.eigenvalues.ravel()
        if not modal:
            return cls(np.zeros(0), np.zeros(0, int), [], [], [], [])
        flat = [m.ravel() for m in modal]
        keep = []
        for f in flat:
            scale = max(float(np.max(np.abs(f))), 1e-300)
            keep.append(np.abs(f) > 1e-13 * scale)
        support = np.flatnonzero(np.logical_or.reduce(keep))
        pos_of = {int(s): i for i, s in enumerate(support)}
        locs, coefs, uniq, which = [], [], [], []
        for f, k in zip(flat, keep):
            idx = np.flatnonzero(k)
            locs.append(np.array([pos_of[int(i)] for i in idx], dtype=int))
            coefs.append(f[idx])
            lam_vals = lam_full[idx]
            rounded = np.round(lam_vals, 10)
            u, inv = np.unique(rounded, return_inverse=True)
            # keep an actual eigenvalue as the representative
            rep = np.array([lam_vals[inv == q][0] for q in range(len(u))])
            uniq.append(rep)
            which.append(inv)
        return cls(lam_full[support], support, locs, coefs, uniq, which)

    @property
    def n_shapes(self) -> int:
        return len(self.locs)

    @property
    def n_draws(self) -> int:
        return int(sum(len(u) for u in self.uniq))

    def sqrt_covs(self, dt: float) -> list:
        key = float(dt)
        if key not in self._sqrt_cache:
            self._sqrt_cache[key] = [_sqrt_psd(_ou_cov(u, dt)) for u in self.uniq]
        return self._sqrt_cache[key]

    def step(self, x: np.ndarray, dt: float, factors: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """Advance ``x`` (paths, support) by ``dt`` given ``normals`` (paths, n_draws)."""
        out = x * np.exp(-self.lam * dt)
        start = 0
        for n, lmat in enumerate(self.sqrt_covs(dt)):
            k = lmat.shape[0]
            incr = normals[:, start:start + k] @ lmat.T  # (paths, distinct eigenvalues)
            start += k
            if factors[n] == 0.0:
                continue
            np.add.at(out, (slice(None), self.locs[n]),
                      factors[n] * self.coefs[n][None, :] * incr[:, self.which[n]])
        return out

    def predicted_variance(self, factor_history: np.ndarray, dt: float) -> np.ndarray:
        """E|x_slot|^2 after the steps whose per-shape factors are given (steps, shapes)."""
        var = np.zeros(len(self.support))
        decay2 = np.exp(-2 * self.lam * dt)
        for step_factors in factor_history:
            var *= decay2
            for n in range(self.n_shapes):
                u = self.uniq[n][self.which[n]]
                one = np.where(u > 0, -np.expm1(-2 * u * dt) / np.where(u > 0, 2 * u, 1.0), dt)
                np.add.at(var, self.locs[n], step_factors[n] ** 2 * np.abs(self.coefs[n]) ** 2 * one)
        return var

    def scatter(self, handle: StokesOperatorHandle, x: np.ndarray) -> np.ndarray:
        g = handle.grid
        full = np.zeros(2 * g.nz * g.ny * g.nx, complex)
        full[self.support] = x
        return full.reshape(2, g.nz, g.ny, g.nx)


def build_banks(spec: NoiseSpec, handle: StokesOperatorHandle):
    g = handle.grid
    modes_f = list(spec.interior_modes) if spec.interior_modes is not None \
        else default_interior_modes(handle, spec.n_f)
    if len(modes_f) != spec.n_f:
        raise ConfigurationError("interior mode list length differs from n_f")
    shapes_f = [spec.sigma_f(n + 1) * interior_eigenfunction(handle, m) for n, m in enumerate(modes_f)]

    modes_b = list(spec.boundary_modes) if spec.boundary_modes is not None \
        else default_boundary_modes(g, spec.n_b)
    if len(modes_b) != spec.n_b:
        raise ConfigurationError("boundary mode list length differs from n_b")
    mult = surface_multiplier(g, spec)
    shapes_b = []
    for n, m in enumerate(modes_b):
        gs = boundary_shape(g, m)
        data = F.SurfaceField.from_physical(mult[None] * gs.to_physical(), g)
        if g.is_nn and np.max(np.abs(data.coeffs[:, 0, 0])) > 1e-12 * max(np.max(np.abs(data.coeffs)), 1e-300):
            if spec.strict_mean:
                raise ConfigurationError(f"boundary shape {m} times the surface multiplier has nonzero mean")
        lam = neumann_map(data, handle, spec.neumann_alpha, strict_mean=spec.strict_mean)
        shapes_b.append(spec.sigma_b(n + 1) * lam)
    return (ShapeBank.from_shapes(handle, shapes_f), modes_f,
            ShapeBank.from_shapes(handle, shapes_b), modes_b)


def path_generator(seed: int, path_id: int) -> np.random.Generator:
    """Independent counter-based stream for one path."""
    return np.random.Generator(np.random.Philox(key=(int(path_id) << 64) | int(seed)))


# ---------------------------------------------------------------- state


@dataclass(eq=False)
class WienerState:
    spec: NoiseSpec
    handle: StokesOperatorHandle
    bank_f: ShapeBank
    bank_b: ShapeBank
    modes_f: list
    modes_b: list
    z0: Optional[F.SpectralField]
    path_ids: np.ndarray
    rngs: list
    x_f: np.ndarray  # (paths, support_f)
    x_b: np.ndarray  # (paths, support_b)
    t: float = 0.0
    steps: int = 0

    @property
    def n_paths(self) -> int:
        return len(self.path_ids)

    def z0_part(self) -> Optional[F.SpectralField]:
        if self.z0 is None:
            return None
        return semigroup_step(self.handle, self.z0, self.t)

    def z_f(self, path: int = 0) -> F.SpectralField:
        f = self.handle.from_modal(self.bank_f.scatter(self.handle, self.x_f[path]))
        base = self.z0_part()
        return f if base is None else f + base

    def z_b(self, path: int = 0) -> F.SpectralField:
        return self.handle.from_modal(self.bank_b.scatter(self.handle, self.x_b[path]))

    def modal_f(self) -> np.ndarray:
        return self.x_f

    def modal_b(self) -> np.ndarray:
        return self.x_b


def init_noise(spec: NoiseSpec, handle: StokesOperatorHandle, z0: Optional[F.SpectralField] = None,
               path_ids: Sequence[int] = (0,)) -> WienerState:
    """Noise state at ``t = 0`` with ``Z_f(0) = Z0`` and ``Z_b(0) = 0``."""
    if z0 is not None:
        if z0.grid != handle.grid or z0.ncomp != 2:
            raise ShapeError("Z0 does not match the grid")
        if F.constraint_defect(z0) > 1e-10 * max(z0.norm(), 1e-300) * 2 * np.pi * handle.grid.nx:
            raise ConfigurationError("Z0 violates the barotropic divergence constraint")
    bank_f, modes_f, bank_b, modes_b = build_banks(spec, handle)
    ids = np.asarray(path_ids, dtype=np.int64)
    rngs = [path_generator(spec.seed, int(p)) for p in ids]
    return WienerState(spec, handle, bank_f, bank_b, modes_f, modes_b, z0, ids, rngs,
                       np.zeros((len(ids), len(bank_f.support)), complex),
                       np.zeros((len(ids), len(bank_b.support)), complex))


def step_noise(state: WienerState, dt: float):
    """Advance all paths by ``dt``; returns ``(state, Z_f, Z_b)`` of path 0."""
    step_noise_modal(state, dt)
    return state, state.z_f(0), state.z_b(0)


@dataclass(frozen=True)
class CovarianceReport:
    times: np.ndarray
    lam_f: np.ndarray
    lam_b: np.ndarray
    var_f: np.ndarray  # (times, support_f)
    var_b: np.ndarray
    support_f: np.ndarray
    support_b: np.ndarray

    def total_f(self) -> np.ndarray:
        return self.var_f.sum(axis=1)


def noise_covariance_report(spec: NoiseSpec, handle: StokesOperatorHandle, times, dt: float,
                            banks=None) -> CovarianceReport:
    """Predicted per-slot ``E|x|^2`` of the modal coefficients at ``times``.

    Times must be multiples of ``dt``; the boundary factor follows the
    step-frozen schedule, so the table is exact for the discrete recursion.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError("times must be >= 0")
    bank_f, _, bank_b, _ = banks if banks is not None else build_banks(spec, handle)
    steps = np.rint(times / dt).astype(int)
    if np.any(np.abs(steps * dt - times) > 1e-9 * max(1.0, times.max(initial=0.0))):
        raise DomainError("report times must be multiples of dt")
    var_f, var_b = [], []
    for s in steps:
        ff = np.ones((s, bank_f.n_shapes))
        fb = np.array([[spec.hb_time_factor(i * dt)] * bank_b.n_shapes for i in range(s)]).reshape(s, -1)
        var_f.append(bank_f.predicted_variance(ff, dt))
        var_b.append(bank_b.predicted_variance(fb, dt))
    return CovarianceReport(times, bank_f.lam, bank_b.lam, np.array(var_f).reshape(len(times), -1),
                            np.array(var_b).reshape(len(times), -1), bank_f.support, bank_b.support)


def ito_variance(sigma2: np.ndarray, lam: np.ndarray, t: float) -> float:
    """``sum sigma_n^2 (1 - exp(-2 lam_n t)) / (2 lam_n)``."""
    lam = np.asarray(lam, dtype=float)
    per = np.where(lam > 0, -np.expm1(-2 * lam * t) / np.where(lam > 0, 2 * lam, 1.0), t)
    return float(np.sum(np.asarray(sigma2) * per))


def sample_ensemble(spec: NoiseSpec, handle: StokesOperatorHandle, dt: float, n_steps: int,
                    paths: int, record_every: int = 1, chunk: int = 2000, path_offset: int = 0):
    """Noise-only ensemble; returns recorded times and modal samples.

    Output arrays are ``(records, paths, support)`` for the interior and
    boundary banks.  Paths are processed in chunks; each path draws from its
    own stream, so results do not depend on ``chunk``.
    """
    rec_f, rec_b = [], []
    times = []
    banks = build_banks(spec, handle)
    for start in range(0, paths, chunk):
        ids = np.arange(start, min(paths, start + chunk)) + path_offset
        st = _state_from_banks(spec, handle, banks, ids)
        cf, cb = [], []
        for s in range(1, n_steps + 1):
            step_noise_modal(st, dt)
            if s % record_every == 0:
                cf.append(st.x_f.copy())
                cb.append(st.x_b.copy())
                if start == 0:
                    times.append(st.t)
        rec_f.append(np.array(cf))
        rec_b.append(np.array(cb))
    return np.array(times), np.concatenate(rec_f, axis=1), np.concatenate(rec_b, axis=1), banks


def _state_from_banks(spec, handle, banks, ids) -> WienerState:
    bank_f, modes_f, bank_b, modes_b = banks
    rngs = [path_generator(spec.seed, int(p)) for p in ids]
    return WienerState(spec, handle, bank_f, bank_b, modes_f, modes_b, None, np.asarray(ids), rngs,
                       np.zeros((len(ids), len(bank_f.support)), complex),
                       np.zeros((len(ids), len(bank_b.support)), complex))


def step_noise_modal(state: WienerState, dt: float) -> WienerState:
    """Like :func:`step_noise` without building fields."""
    if not np.isfinite(dt) or dt <= 0:
        raise DomainError(f"dt must be positive (got {dt})")
    nf, nb = state.bank_f.n_draws, state.bank_b.n_draws
    normals = np.stack([r.standard_normal(nf + nb) for r in state.rngs]) if state.rngs \
        else np.zeros((0, nf + nb))
    a = state.spec.hb_time_factor(state.t)
    state.x_f = state.bank_f.step(state.x_f, dt, np.ones(state.bank_f.n_shapes), normals[:, :nf])
    state.x_b = state.bank_b.step(state.x_b, dt, np.full(state.bank_b.n_shapes, a), normals[:, nf:])
    state.t += dt
    state.steps += 1
    return state
