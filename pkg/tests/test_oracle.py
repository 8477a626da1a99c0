import numpy as np
import pytest

from hydrowind.errors import MeanCompatibilityError, NumericalSetupError, SizeGuardError
from hydrowind.oracle import (DenseGrid, FDStationarySolver, dense_nonlinearity, direct_dft, fd_stationary_solve,
                              fitted_order, neumann_comparison)

TWO_PI = 2 * np.pi


def manufactured(bc, alpha, h):
    """V1 = cos(2 pi y) phi(s), V2 = sin(2 pi x) phi(s), P = sin(2 pi x) cos(2 pi y), s = z + h."""
    if bc == "NN":
        phi, dphi, d2phi = (lambda s: s**2), (lambda s: 2 * s), (lambda s: 2.0 + 0 * s)
    else:
        phi, dphi, d2phi = (lambda s: s + s**2), (lambda s: 1 + 2 * s), (lambda s: 2.0 + 0 * s)

    def exact(x, y, z):
        s = z + h
        return np.cos(TWO_PI * y) * phi(s), np.sin(TWO_PI * x) * phi(s)

    def forcing(x, y, z):
        s = z + h
        f1 = np.cos(TWO_PI * y) * ((alpha + TWO_PI**2) * phi(s) - d2phi(s))
        f2 = np.sin(TWO_PI * x) * ((alpha + TWO_PI**2) * phi(s) - d2phi(s))
        f1 = f1 + TWO_PI * np.cos(TWO_PI * x) * np.cos(TWO_PI * y)
        f2 = f2 - TWO_PI * np.sin(TWO_PI * x) * np.sin(TWO_PI * y)
        return f1, f2

    def g(x, y):
        return np.cos(TWO_PI * y) * dphi(h), np.sin(TWO_PI * x) * dphi(h)

    return exact, forcing, g


@pytest.mark.parametrize("bc", ["NN", "DN"])
def test_manufactured_second_order(bc):
    h, alpha = 0.5, 1.0
    exact, forcing, g = manufactured(bc, alpha, h)
    errs = []
    for n in (8, 16, 32):
        dense = DenseGrid(n, h, bc)
        sol = fd_stationary_solve(g, dense, alpha, forcing)
        assert sol.residual < 1e-12
        err = 0.0
        for c in (0, 1):
            x, y = dense.positions(c)
            ref = np.stack([exact(x, y, z)[c] for z in dense.z])
            err = max(err, np.max(np.abs(sol.v[c] - ref)))
        errs.append(err)
    assert fitted_order((8, 16, 32), errs) > 1.9


def test_size_guard_and_checks():
    with pytest.raises(SizeGuardError):
        DenseGrid(64)
    with pytest.raises(SizeGuardError):
        direct_dft(np.zeros((64, 64)))
    with pytest.raises(NumericalSetupError):
        FDStationarySolver(DenseGrid(8, 1.0, "NN"), alpha=0.0)
    solver = FDStationarySolver(DenseGrid(8, 1.0, "NN"))
    with pytest.raises(MeanCompatibilityError):
        solver.solve(lambda x, y: (np.ones_like(x), np.zeros_like(x)))


def test_dn_unshifted_is_solvable():
    sol = fd_stationary_solve(lambda x, y: (np.cos(TWO_PI * y), 0 * x), DenseGrid(8, 1.0, "DN"), alpha=0.0)
    assert sol.residual < 1e-12
    assert np.max(np.abs(sol.v)) > 0


def test_direct_dft_matches_definition(rng):
    x = rng.standard_normal((2, 6, 10))
    assert np.allclose(direct_dft(x), np.fft.fft2(x) / 60, atol=1e-15)


def test_comparison_row():
    row = neumann_comparison("DN", 8, (1, 0, 1), h=0.5)
    assert row.bc == "DN" and row.error < 0.1 and row.oracle_residual < 1e-12


def test_dense_nonlinearity_rejects_bad_shapes():
    with pytest.raises(Exception):
        dense_nonlinearity(np.zeros((2, 4, 8, 8)), np.zeros((2, 4, 8, 6)), 1.0)
