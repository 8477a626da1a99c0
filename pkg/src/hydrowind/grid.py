"""Discretization of the cylinder ``(0,1)^2 x (-h, 0)``."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


class BCCase(str, enum.Enum):
    """Bottom boundary regime.  The surface is always a Neumann boundary."""

    NEUMANN_NEUMANN = "NN"
    DIRICHLET_NEUMANN = "DN"

    @classmethod
    def parse(cls, value) -> "BCCase":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("-", "_")
        aliases = {
            "NN": cls.NEUMANN_NEUMANN,
            "NEUMANN_NEUMANN": cls.NEUMANN_NEUMANN,
            "NEUMANNNEUMANN": cls.NEUMANN_NEUMANN,
            "DN": cls.DIRICHLET_NEUMANN,
            "DIRICHLET_NEUMANN": cls.DIRICHLET_NEUMANN,
            "DIRICHLETNEUMANN": cls.DIRICHLET_NEUMANN,
        }
        try:
            return aliases[text]
        except KeyError:
            raise ConfigurationError(f"unknown boundary case {value!r}") from None

    @property
    def tag(self) -> int:
        return 0 if self is BCCase.NEUMANN_NEUMANN else 1

    @classmethod
    def from_tag(cls, tag: int) -> "BCCase":
        if tag == 0:
            return cls.NEUMANN_NEUMANN
        if tag == 1:
            return cls.DIRICHLET_NEUMANN
        raise ConfigurationError(f"unknown boundary tag {tag}")


@dataclass(frozen=True, eq=True)
class GridSpec:
    """Horizontal Fourier modes times a vertical representation.

    The horizontal domain is the unit square, so wavenumbers are ``2*pi*n``.
    Vertically both regimes sample the cell centres
    ``z_j = -h + (j + 1/2) h / nz``.  In the Neumann-Neumann case the
    coefficients are cosine amplitudes ``cos(m pi (z + h) / h)``; in the
    Dirichlet-Neumann case they are the nodal values themselves.
    """

    nx: int
    ny: int
    nz: int
    h: float = 1.0
    bc: BCCase = BCCase.NEUMANN_NEUMANN

    def __post_init__(self):
        object.__setattr__(self, "bc", BCCase.parse(self.bc))
        object.__setattr__(self, "h", float(self.h))
        problems = []
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                problems.append(f"{name} must be an even integer >= 4 (got {n})")
        if int(self.nz) != self.nz or self.nz < 3:
            problems.append(f"nz must be an integer >= 3 (got {self.nz})")
        if not np.isfinite(self.h) or self.h <= 0:
            problems.append(f"h must be positive (got {self.h})")
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def is_nn(self) -> bool:
        return self.bc is BCCase.NEUMANN_NEUMANN

    @property
    def basis(self) -> str:
        return "cos" if self.is_nn else "node"

    @property
    def dz(self) -> float:
        return self.h / self.nz

    @cached_property
    def z(self) -> np.ndarray:
        return -self.h + (np.arange(self.nz) + 0.5) * self.dz

    @cached_property
    def mu(self) -> np.ndarray:
        """Vertical wavenumbers ``m pi / h`` of the cosine basis."""
        return np.arange(self.nz) * np.pi / self.h

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) / self.nx

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) / self.ny

    @cached_property
    def kx(self) -> np.ndarray:
        """Full wavenumbers broadcastable to ``(ny, nx)``."""
        return self.kx_1d[None, :] + 0.0 * self.ky_1d[:, None]

    @cached_property
    def ky_1d(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.ny, 1.0 / self.ny)

    @cached_property
    def kx_1d(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.nx, 1.0 / self.nx)

    @cached_property
    def ky(self) -> np.ndarray:
        return self.ky_1d[:, None] + 0.0 * self.kx_1d[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        """``|k|^2`` on the ``(ny, nx)`` mode grid, Nyquist included."""
        return self.kx**2 + self.ky**2

    @cached_property
    def kx_d(self) -> np.ndarray:
        """First-derivative wavenumber in x; zero on the Nyquist column."""
        k = self.kx.copy()
        k[:, self.nx // 2] = 0.0
        return k

    @cached_property
    def ky_d(self) -> np.ndarray:
        k = self.ky.copy()
        k[self.ny // 2, :] = 0.0
        return k

    @cached_property
    def k2_d(self) -> np.ndarray:
        return self.kx_d**2 + self.ky_d**2

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes carrying a Nyquist index in x or y."""
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[:, self.nx // 2] = True
        m[self.ny // 2, :] = True
        return m

    @cached_property
    def vertical_weights(self) -> np.ndarray:
        """Weights turning squared coefficients into ``int dz``."""
        if self.is_nn:
            w = np.full(self.nz, self.h / 2)
            w[0] = self.h
            return w
        return np.full(self.nz, self.dz)

    def with_nz(self, nz: int) -> "GridSpec":
        return GridSpec(self.nx, self.ny, nz, self.h, self.bc)

    def with_horizontal(self, nx: int, ny: int) -> "GridSpec":
        return GridSpec(nx, ny, self.nz, self.h, self.bc)
