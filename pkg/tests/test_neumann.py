import warnings

import numpy as np
import pytest

from hydrowind import fields as F
from hydrowind import neumann as N
from hydrowind import stokes as S
from hydrowind.errors import MeanCompatibilityError
from hydrowind.grid import GridSpec

REGIMES = ("NN", "DN")


def surface_data(g, rng, kmax=3, mean=0.0):
    c = rng.standard_normal((2, g.ny, g.nx)) + 1j * rng.standard_normal((2, g.ny, g.nx))
    c *= F.band_mask(g, kmax)[None]
    c = np.fft.fft2(np.real(np.fft.ifft2(c, axes=(-2, -1))), axes=(-2, -1))
    c[:, 0, 0] = mean
    return F.SurfaceField(g, c)


@pytest.mark.parametrize("bc", REGIMES)
def test_map_equals_minus_alpha_solution(bc, rng):
    g = GridSpec(12, 12, 24, 0.8, bc)
    h = S.build_operator(g)
    gs = surface_data(g, rng)
    for alpha in (0.5, 2.0):
        lam = N.neumann_map(gs, h, alpha)
        v, _ = N.neumann_solution(gs, h, alpha)
        assert (lam + alpha * v).norm() < 1e-11 * lam.norm()
        assert F.constraint_defect(lam) < 1e-11 * lam.norm() * g.nx


@pytest.mark.parametrize("bc", REGIMES)
def test_constructive_route_agrees(bc, rng):
    g = GridSpec(8, 8, 32, 1.0, bc)
    h = S.build_operator(g)
    gs = surface_data(g, rng)
    res = N.neumann_map_constructive(gs, h)
    direct = N.neumann_map(gs, h)
    assert (res.lam - direct).norm() < 1e-8 * direct.norm()
    assert res.corrected_mean_defect < 1e-10
    assert res.top_slope_defect < 1e-10


def test_literal_unshifted_map_vanishes(rng):
    g = GridSpec(8, 8, 16, 1.0, "DN")
    h = S.build_operator(g)
    gs = surface_data(g, rng)
    assert N.neumann_map(gs, h, alpha=0.0).norm() < 1e-10 * N.neumann_map(gs, h).norm()


def test_mean_compatibility():
    g = GridSpec(8, 8, 8, 1.0, "NN")
    h = S.build_operator(g)
    gs = surface_data(g, np.random.default_rng(0), mean=0.3)
    with pytest.raises(MeanCompatibilityError):
        N.neumann_map(gs, h)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam = N.neumann_map(gs, h, strict_mean=False)
    assert caught and lam.is_finite()


def test_dn_accepts_nonzero_mean():
    g = GridSpec(8, 8, 16, 1.0, "DN")
    h = S.build_operator(g)
    gs = surface_data(g, np.random.default_rng(1), mean=0.3)
    assert N.neumann_map(gs, h).is_finite()


@pytest.mark.parametrize("bc", REGIMES)
def test_discrete_solution_tracks_exact_profile(bc, rng):
    errs = []
    for nz in (16, 32, 64):
        g = GridSpec(8, 8, nz, 1.0, bc)
        h = S.build_operator(g)
        gs = surface_data(g, np.random.default_rng(9), kmax=2)
        v, _ = N.neumann_solution(gs, h)
        exact = N.neumann_profile(gs, g, g.z)
        if bc == "NN":
            num = F.inverse_transform(v, real=False)
            exact = np.fft.ifft2(exact, axes=(-2, -1)) * g.nx * g.ny
        else:
            num = v.coeffs
        errs.append(np.max(np.abs(num - exact)) / np.max(np.abs(exact)))
    # pointwise: the truncated cosine series of a profile with surface slope converges like 1/nz
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[2] > (3.5 if bc == "NN" else 12.0)


def test_cutoffs():
    g = GridSpec(8, 8, 32, 1.0, "DN")
    cp = N.CutoffPair.build(g)
    cp.check()
    assert all(abs(v) < 1e-12 for v in cp.defects().values())


@pytest.mark.parametrize("h", [0.5, 1.0, 2.0])
def test_kernel_identities(h):
    rows = N.kernel_identities(h, [2 * np.pi, 4 * np.pi])
    assert rows and max(r.rel_error for r in rows) < 1e-10


def test_lift_profile_satisfies_boundary_conditions(rng):
    for bc in REGIMES:
        g = GridSpec(8, 8, 16, 1.0, bc)
        gs = surface_data(g, rng)
        lift = N.resolvent_lift(gs, g, 1.0)
        top = lift.dz_values(np.array([0.0]))[:, 0]
        assert np.allclose(top, gs.coeffs, atol=1e-10)
