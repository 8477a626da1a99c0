"""Norms, time-regularity probes and Monte Carlo comparisons."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.integrate

from . import fields as F
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class NormRequest:
    s: float = 0.0
    mu: float = 1.0
    q: float = 2.0
    theta: float = 0.0

    def __post_init__(self):
        problems = []
        if self.s < 0:
            problems.append("s must be >= 0")
        if not 1 <= self.q < np.inf:
            problems.append("q must lie in [1, inf)")
        if not (1.0 / self.q < self.mu <= 1.0):
            problems.append("mu must lie in (1/q, 1]")
        if not 0 <= self.theta < 1:
            problems.append("theta must lie in [0, 1)")
        if problems:
            raise ConfigurationError("; ".join(problems))


def sobolev_norm(field: F.SpectralField, s: float) -> float:
    """``(sum (1 + lambda)^s |c|^2)^(1/2)`` for the Laplacian with the grid's conditions.

    Cosine fields accept any ``s >= 0``.  Nodal fields use the quadratic
    forms of ``I + M`` with ``M = |k|^2 - d_zz`` and support ``s`` in {0, 1, 2}.
    """
    if s < 0:
        raise ConfigurationError("s must be >= 0")
    g = field.grid
    if field.basis == "cos":
        lam = g.k2[None, None] + (g.mu**2)[None, :, None, None]
        w = g.vertical_weights[None, :, None, None]
        return float(np.sqrt(np.sum((1.0 + lam) ** s * w * np.abs(field.coeffs) ** 2)))
    if field.basis != "node":
        raise ConfigurationError(f"Sobolev norms are not available for basis {field.basis!r}")
    if s == 0:
        return field.norm()
    one_plus_m = field - F.laplacian(field)
    if s == 1:
        return float(np.sqrt(max(field.inner(one_plus_m), 0.0)))
    if s == 2:
        return one_plus_m.norm()
    raise ConfigurationError("nodal fields support s in {0, 1, 2} only")


def weighted_time_norm(times, values, mu: float = 1.0, q: float = 2.0) -> float:
    """``|| t^(1 - mu) u ||_{L^q(0, T)}`` by the trapezoidal rule."""
    t = np.asarray(times, dtype=float)
    u = np.abs(np.asarray(values, dtype=float))
    if t.size == 0 or u.size == 0:
        raise DomainError("empty series")
    if t.shape != u.shape:
        raise DomainError("times and values differ in length")
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise DomainError("times must be nonnegative and increasing")
    NormRequest(mu=mu, q=q)
    weight = t ** (1.0 - mu) if mu != 1.0 else np.ones_like(t)
    if t.size == 1:
        return 0.0
    return float(scipy.integrate.trapezoid((weight * u) ** q, t) ** (1.0 / q))


def graph_norm_coordinates(fields: Sequence[F.SpectralField], s: float) -> np.ndarray:
    """Flattened coordinates whose Euclidean distance is the ``s`` Sobolev distance."""
    out = []
    for f in fields:
        g = f.grid
        if f.basis == "cos":
            lam = g.k2[None, None] + (g.mu**2)[None, :, None, None]
            scale = np.sqrt((1.0 + lam) ** s * g.vertical_weights[None, :, None, None])
            out.append((scale * f.coeffs).ravel())
        elif s == 0:
            out.append((np.sqrt(g.dz) * f.coeffs).ravel())
        else:
            raise ConfigurationError("graph-norm coordinates for nodal fields need s = 0")
    return np.array(out)


def time_regularity_probe(series, theta: float, dt: float, s: float = 0.0) -> float:
    """Discrete Slobodeckij quotient ``sum_{i != j} |u_i - u_j|^2 / |t_i - t_j|^(1 + 2 theta) dt^2``.

    ``series`` is either a sequence of fields (measured in the ``s`` norm) or
    an array ``(samples, ...)`` of already-weighted coordinates.
    """
    if not 0 <= theta < 1:
        raise DomainError("theta must lie in [0, 1)")
    if len(series) < 3:
        raise DomainError("need at least three samples")
    if isinstance(series[0], F.SpectralField):
        x = graph_norm_coordinates(series, s)
    else:
        x = np.asarray(series).reshape(len(series), -1)
    n = x.shape[0]
    gram = np.real(x @ np.conj(x).T)
    sq = np.diag(gram)
    dist2 = np.maximum(sq[:, None] + sq[None, :] - 2 * gram, 0.0)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :]) * dt
    off = gap > 0
    return float(np.sum(dist2[off] / gap[off] ** (1 + 2 * theta)) * dt * dt)


@dataclass(frozen=True)
class ItoReport:
    times: np.ndarray
    mc_variance: np.ndarray  # (times, slots)
    predicted: np.ndarray
    z_variance: np.ndarray
    z_mean: np.ndarray  # (times, slots, 2): real and imaginary parts
    paths: int

    @property
    def fraction_within(self) -> float:
        return float(np.mean(np.abs(self.z_variance) <= 3.0)) if self.z_variance.size else 1.0

    @property
    def mean_fraction_within(self) -> float:
        return float(np.mean(np.abs(self.z_mean) <= 3.0)) if self.z_mean.size else 1.0

    @property
    def passed(self) -> bool:
        return self.fraction_within >= 0.99 and self.mean_fraction_within >= 0.99

    def rows(self):
        for i, t in enumerate(self.times):
            for j in range(self.predicted.shape[1]):
                yield t, j, self.mc_variance[i, j], self.predicted[i, j], self.z_variance[i, j]


def _z(diff, se):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(np.abs(diff) > 0, np.inf, 0.0))


def ito_report(times, samples: np.ndarray, predicted: np.ndarray) -> ItoReport:
    """Compare Monte Carlo ``E|x|^2`` with predictions; ``samples`` is (times, paths, slots)."""
    samples = np.asarray(samples)
    m = samples.shape[1]
    if m < 100:
        warnings.warn(f"only {m} paths; z-scores are unreliable", RuntimeWarning, stacklevel=2)
    m2 = np.abs(samples) ** 2
    est = m2.mean(axis=1)
    se = m2.std(axis=1, ddof=1) / np.sqrt(m) if m > 1 else np.zeros_like(est)
    zv = _z(est - predicted, se)
    parts = np.stack([samples.real, samples.imag], axis=-1)
    # slots whose coefficient is real by symmetry have an identically zero part
    mean = parts.mean(axis=1)
    se_mean = parts.std(axis=1, ddof=1) / np.sqrt(m) if m > 1 else np.zeros_like(mean)
    zm = _z(mean, se_mean)
    zm = np.where((se_mean == 0) & (np.abs(mean) < 1e-300), 0.0, zm)
    return ItoReport(np.asarray(times), est, predicted, zv, zm, m)
