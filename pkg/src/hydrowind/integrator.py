"""Pathwise integration of ``d_t v + A v = F(v + Z, v + Z) + f``.

The full velocity is ``V = v + Z_f + Z_b``.  ``Z`` is exact per mode
(noise module); the remainder is advanced by IMEX Euler or by Crank-Nicolson
for ``A`` with second-order Adams-Bashforth for ``F`` (Euler start).
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fields as F
from .diagnostics import sobolev_norm
from .errors import ConfigurationError, DomainError, HydrowindError, StepError
from .grid import GridSpec
from .noise import (InteriorMode, NoiseSpec, init_noise, interior_eigenfunction,
                    noise_covariance_report, sample_ensemble, step_noise_modal)
from .nonlinear import advect, convection
from .stokes import StokesOperatorHandle, apply_A, build_operator, stokes_solve

log = logging.getLogger(__name__)

SCHEMES = ("imex-euler", "imex-cn")
COLUMNS = ("t", "L2", "H1", "divres", "bndres", "energy", "Fv_residual", "L2_v", "H1_v", "Ps_L2")


@dataclass(frozen=True)
class InitialData:
    """Named initial fields: ``zero``, ``eigen`` or ``random``.

    ``eigen`` takes ``ix, iy, branch, j, amp`` (and ``phase``); ``random``
    takes ``amp`` (the H1 norm of the result), ``kmax`` and ``seed``.
    """

    kind: str = "zero"
    params: tuple = ()

    def param(self, name, default=None):
        return dict(self.params).get(name, default)

    def build(self, handle: StokesOperatorHandle) -> F.SpectralField:
        g = handle.grid
        if self.kind == "zero":
            return F.SpectralField.zeros(g)
        if self.kind == "eigen":
            mode = InteriorMode(int(self.param("ix", 1)), int(self.param("iy", 0)), int(self.param("branch", 1)),
                                int(self.param("j", 1)), str(self.param("phase", "cos")))
            return float(self.param("amp", 1.0)) * interior_eigenfunction(handle, mode)
        if self.kind == "random":
            rng = np.random.default_rng(int(self.param("seed", 0)))
            v = F.random_field(g, rng, kmax=int(self.param("kmax", 3)), mmax=int(self.param("mmax", 3)),
                               decay=2.0)
            nrm = sobolev_norm(v, 1)
            return v * (float(self.param("amp", 1.0)) / nrm) if nrm > 0 else v
        raise ConfigurationError(f"unknown initial data kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    grid: GridSpec
    T: float
    dt: float
    noise: NoiseSpec = NoiseSpec()
    v0: object = InitialData()  # InitialData or SpectralField; the full velocity V0
    z0: object = None  # None, InitialData or SpectralField; initial Z_f
    scheme: str = "imex-cn"
    output_every: int = 1
    paths: int = 1
    mu: float = 1.0
    q: float = 2.0
    blowup_guard: float = 1e6
    nonlinear: bool = True
    record_fields: bool = False
    source: Optional[Callable[[float], F.SpectralField]] = None
    provenance: tuple = ()

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.T) and np.isfinite(self.dt) and 0 < self.dt < self.T * (1 + 1e-12)):
            problems.append(f"need 0 < dt <= T (got dt={self.dt}, T={self.T})")
        if self.scheme not in SCHEMES:
            problems.append(f"scheme must be one of {SCHEMES}")
        if self.output_every < 1:
            problems.append("output_every must be >= 1")
        if self.paths < 1:
            problems.append("paths must be >= 1")
        if not (1.0 / self.q < self.mu <= 1.0):
            problems.append("mu must lie in (1/q, 1]")
        if not self.blowup_guard > 0:
            problems.append("blowup_guard must be positive")
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(eq=False)
class TrajectoryRecord:
    path_id: int
    seed: int
    columns: dict = field(default_factory=lambda: {c: [] for c in COLUMNS})
    snapshots: list = field(default_factory=list)  # (t, V)
    pressures: list = field(default_factory=list)  # (t, P_s)
    status: str = "ok"
    message: str = ""
    final_v: Optional[F.SpectralField] = None
    final_z: Optional[F.SpectralField] = None

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.columns["t"])

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    def append(self, row: dict):
        for c in COLUMNS:
            self.columns[c].append(float(row[c]))


# ---------------------------------------------------------------- stepping


@dataclass(frozen=True, eq=False)
class StepResult:
    v: F.SpectralField
    f: F.SpectralField  # F(v_n + Z_n, v_n + Z_n) used in the step


def imex_step(handle: StokesOperatorHandle, v: F.SpectralField, z: Optional[F.SpectralField], dt: float,
              scheme: str = "imex-euler", f_prev: Optional[F.SpectralField] = None, nonlinear: bool = True,
              source: Optional[Callable[[float], F.SpectralField]] = None, t: float = 0.0) -> StepResult:
    """One step from ``t`` to ``t + dt``.

    Euler: ``(I + dt A) v' = v + dt (F_n + f(t + dt))``.
    CN/AB2: ``(2/dt + A) v' = (2/dt - A) v + 3 F_n - F_{n-1} + 2 f(t + dt/2)``;
    without ``f_prev`` the Euler step is taken.
    """
    if not np.isfinite(dt) or dt <= 0:
        raise DomainError(f"dt must be positive (got {dt})")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    u = v if z is None else v + z
    f_now = advect(u, u) if nonlinear else F.SpectralField.zeros(v.grid, basis=v.basis)
    if scheme == "imex-cn" and f_prev is not None:
        alpha = 2.0 / dt
        b = alpha * v - apply_A(handle, v, check=False) + 3.0 * f_now - f_prev
        if source is not None:
            b = b + 2.0 * source(t + 0.5 * dt)
    else:
        alpha = 1.0 / dt
        b = alpha * v + f_now
        if source is not None:
            b = b + source(t + dt)
    v_next, _ = stokes_solve(handle, b, alpha)
    if not v_next.is_finite():
        raise StepError(f"non-finite state after step at t={t + dt:.6g}")
    return StepResult(v_next, f_now)


def reconstruct_pressure(v: F.SpectralField, z: Optional[F.SpectralField] = None,
                         nonlinear: bool = True) -> F.SurfaceField:
    """Surface pressure from ``grad_H P_s = (1 - P) Delta v + (1 - P) N(v + Z)``.

    ``N`` is the unprojected convection; the sign follows the remainder
    equation ``d_t v + A v = P N``.  The horizontal mean is zero.
    """
    g = v.grid
    r = F.laplacian(v)
    if nonlinear:
        u = v if z is None else v + z
        r = r + F.enforce_hermitian(convection(u, u))
    mean = F.vertical_average(r).coeffs
    k2 = np.where(g.k2_d > 0, g.k2_d, 1.0)
    p = np.where(g.k2_d > 0, -1j * (g.kx_d * mean[0] + g.ky_d * mean[1]) / k2, 0.0)
    p[0, 0] = 0.0
    return F.SurfaceField(g, p[None])


# ---------------------------------------------------------------- paths


def _field_or_build(obj, handle: StokesOperatorHandle) -> Optional[F.SpectralField]:
    if obj is None:
        return None
    if isinstance(obj, F.SpectralField):
        if obj.grid != handle.grid:
            raise ConfigurationError("initial field was stored on another grid")
        return obj
    if isinstance(obj, InitialData):
        return obj.build(handle)
    raise ConfigurationError(f"cannot interpret initial data {obj!r}")


def _record_row(t, v, z, handle, nonlinear, rec: TrajectoryRecord, record_fields: bool):
    V = v if z is None else v + z
    nv = V.norm()
    scale = max(nv, 1e-300)
    _, top = F.vertical_velocity_boundary(V)
    fv = 0.0
    if nonlinear and v.norm() > 0:
        f = advect(v, v)
        den = f.norm() * v.norm()
        fv = abs(f.inner(v)) / den if den > 0 else 0.0
    ps = reconstruct_pressure(v, z, nonlinear)
    rec.append({
        "t": t, "L2": nv, "H1": sobolev_norm(V, 1), "divres": F.constraint_defect(V) / scale,
        "bndres": float(np.max(np.abs(top), initial=0.0)) / scale, "energy": 0.5 * v.norm() ** 2,
        "Fv_residual": fv, "L2_v": v.norm(), "H1_v": sobolev_norm(v, 1), "Ps_L2": ps.norm(),
    })
    if record_fields:
        rec.snapshots.append((t, V))
        rec.pressures.append((t, ps))


def run_path(config: SimulationConfig, path_id: int = 0, handle: Optional[StokesOperatorHandle] = None,
             noise_state=None) -> TrajectoryRecord:
    """Integrate one path; failures are recorded, never raised past the record."""
    handle = handle or build_operator(config.grid)
    rec = TrajectoryRecord(path_id, config.noise.seed)
    V0 = _field_or_build(config.v0, handle)
    z0 = _field_or_build(config.z0, handle)
    state = noise_state or init_noise(config.noise, handle, z0, path_ids=(path_id,))
    has_noise = config.noise.n_f > 0 or config.noise.n_b > 0 or z0 is not None

    def current_z():
        return state.z_f(0) + state.z_b(0) if has_noise else None

    v = V0 if z0 is None else V0 - z0
    v = F.helmholtz_project(v)
    z = current_z()
    f_prev = None
    t = 0.0
    dt = config.dt
    try:
        _record_row(t, v, z, handle, config.nonlinear, rec, config.record_fields)
        for n in range(1, config.n_steps + 1):
            res = imex_step(handle, v, z, dt, config.scheme, f_prev, config.nonlinear, config.source, t)
            v, f_prev = res.v, res.f
            step_noise_modal(state, dt)
            t = n * dt
            z = current_z()
            h1 = sobolev_norm(v, 1)
            if not np.isfinite(h1):
                raise StepError(f"non-finite H1 norm at t={t:.6g}")
            if h1 > config.blowup_guard:
                rec.status = "diverged"
                rec.message = f"H1 norm {h1:.3e} exceeded guard at t={t:.6g}"
                log.warning(rec.message)
                _record_row(t, v, z, handle, config.nonlinear, rec, config.record_fields)
                break
            if n % config.output_every == 0 or n == config.n_steps:
                _record_row(t, v, z, handle, config.nonlinear, rec, config.record_fields)
    except HydrowindError as exc:
        rec.status = "failed"
        rec.message = f"{exc.category}: {exc}"
        log.error(rec.message)
    rec.final_v = v
    rec.final_z = z
    return rec


def worker_count() -> int:
    env = os.environ.get("HYDROWIND_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            raise ConfigurationError("HYDROWIND_THREADS must be an integer") from None
    return cap


@dataclass(eq=False)
class EnsembleRecord:
    times: np.ndarray
    mean: dict  # column -> per-time mean
    var: dict  # column -> per-time variance
    paths: int
    failures: list  # (path id, status, message)
    ito: object = None  # diagnostics.ItoReport for the interior and boundary banks
    ito_boundary: object = None
    records: list = field(default_factory=list)


def _aggregate(records) -> tuple:
    ok = [r for r in records if r.status == "ok"]
    if not ok:
        return np.zeros(0), {}, {}
    n = min(len(r.times) for r in ok)
    times = ok[0].times[:n]
    mean, var = {}, {}
    for c in COLUMNS[1:]:
        data = np.array([r.series(c)[:n] for r in ok])
        mean[c] = data.mean(axis=0)
        var[c] = data.var(axis=0, ddof=1) if len(ok) > 1 else np.zeros(n)
    return times, mean, var


def run_ensemble(config: SimulationConfig, noise_only: bool = False, keep_records: bool = False) -> EnsembleRecord:
    """Run ``config.paths`` paths and aggregate statistics.

    With ``noise_only`` the remainder is not integrated; the modal noise
    coefficients of all paths are sampled in batches and compared with the
    predicted variance table.
    """
    from .diagnostics import ito_report

    handle = build_operator(config.grid)
    if noise_only:
        every = config.output_every
        times, xf, xb, banks = sample_ensemble(config.noise, handle, config.dt, config.n_steps,
                                               config.paths, record_every=every)
        rep = noise_covariance_report(config.noise, handle, times, config.dt, banks)
        w = np.sqrt(handle.modal_weights)
        wf = w[np.unravel_index(banks[0].support, handle.eigenvalues.shape)[1]]
        wb = w[np.unravel_index(banks[2].support, handle.eigenvalues.shape)[1]]
        l2 = np.sqrt(np.sum(np.abs(xf * wf) ** 2, axis=2) + np.sum(np.abs(xb * wb) ** 2, axis=2))
        mean = {"L2": l2.mean(axis=1)}
        var = {"L2": l2.var(axis=1, ddof=1) if config.paths > 1 else np.zeros(len(times))}
        return EnsembleRecord(times, mean, var, config.paths, [],
                              ito_report(times, xf, rep.var_f), ito_report(times, xb, rep.var_b))

    def one(pid):
        return run_path(config, pid, handle)

    workers = min(worker_count(), config.paths)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, range(config.paths)))
    else:
        records = [one(p) for p in range(config.paths)]
    failures = [(r.path_id, r.status, r.message) for r in records if r.status != "ok"]
    times, mean, var = _aggregate(records)
    return EnsembleRecord(times, mean, var, config.paths, failures, records=records if keep_records else [])


def manufactured_source(handle: StokesOperatorHandle, phi: F.SpectralField, rate: float):
    """Source making ``v*(t) = exp(-rate t) phi`` an exact solution of the linear problem."""
    a_phi = apply_A(handle, phi)

    def source(t: float) -> F.SpectralField:
        return np.exp(-rate * t) * (a_phi - rate * phi)

    return source
