import numpy as np
import pytest

from hydrowind import fields as F
from hydrowind import stokes as S
from hydrowind.grid import GridSpec

REGIMES = ("NN", "DN")


@pytest.fixture(params=REGIMES)
def setup(request):
    g = GridSpec(12, 12, 10, 0.7, request.param)
    return g, S.build_operator(g)


def test_modal_round_trip_and_spectrum(setup, rng):
    g, h = setup
    v = F.random_field(g, rng)
    x = h.to_modal(v)
    assert (h.from_modal(x) - v).norm() < 1e-13 * v.norm()
    av = S.apply_A(h, v)
    assert (h.from_modal(x * h.eigenvalues) - av).norm() < 1e-10 * av.norm()
    assert av.inner(v) >= 0
    assert np.all(h.eigenvalues[h.admissible] >= -1e-10)


def test_semigroup_property(setup, rng):
    g, h = setup
    v = F.random_field(g, rng)
    a = S.semigroup_step(h, S.semigroup_step(h, v, 0.03), 0.04)
    b = S.semigroup_step(h, v, 0.07)
    assert (a - b).norm() < 1e-13 * b.norm()
    assert S.semigroup_step(h, v, 0.07).norm() <= v.norm() * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 10.0])
def test_stokes_solve_residual(setup, rng, alpha):
    g, h = setup
    b = F.random_field(g, rng, constrained=False)
    v, p = S.stokes_solve(h, b, alpha)
    assert S.momentum_residual(b, v, p, alpha) < 1e-12
    assert F.constraint_defect(v) < 1e-12 * v.norm() * g.nx


def test_apply_power_composes(setup, rng):
    g, h = setup
    v = F.random_field(g, rng, kmax=3)
    half = S.apply_power(h, S.apply_power(h, v, 0.5, shift=1.0), 0.5, shift=1.0)
    full = S.apply_power(h, v, 1.0, shift=1.0)
    assert (half - full).norm() < 1e-11 * full.norm()


def test_dn_lowest_eigenvalue_converges():
    target = (np.pi / 2) ** 2
    errs = []
    for nz in (8, 16, 32):
        h = S.build_operator(GridSpec(4, 4, nz, 1.0, "DN"))
        errs.append(abs(h.d_free[0] - target))
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 1.9


def test_spectrum_rows_are_sorted_by_mode(setup):
    g, h = setup
    rows = list(h.spectrum_rows())
    assert len(rows) > 0
    assert all(lam >= -1e-10 for *_, lam in rows)
