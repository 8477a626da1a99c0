import numpy as np
import pytest

from hydrowind import fields as F
from hydrowind import integrator as I
from hydrowind import noise as N
from hydrowind import stokes as S
from hydrowind.errors import ConfigurationError
from hydrowind.grid import GridSpec


@pytest.mark.parametrize("scheme,order", [("imex-euler", 1), ("imex-cn", 2)])
def test_eigenmode_energy_decay(scheme, order):
    g = GridSpec(8, 8, 6, 1.0, "DN")
    h = S.build_operator(g)
    v0 = I.InitialData("eigen", (("ix", 1), ("iy", 0), ("branch", 1), ("j", 0), ("amp", 1.0)))
    lam = h.eigenvalues[1, 0, 0, 1]
    errs = []
    for dt in (0.001, 0.0005):  # lambda dt <= 0.04; the Euler start-up step is preasymptotic above
        rec = I.run_path(I.SimulationConfig(g, 0.05, dt, v0=v0, scheme=scheme, nonlinear=False), handle=h)
        t = rec.times
        exact = rec.series("energy")[0] * np.exp(-2 * lam * t)
        errs.append(np.max(np.abs(rec.series("energy") - exact)))
    assert np.log2(errs[0] / errs[1]) > order - 0.15


def test_config_validation():
    g = GridSpec(8, 8, 4)
    with pytest.raises(ConfigurationError):
        I.SimulationConfig(g, 0.1, 0.2)
    with pytest.raises(ConfigurationError):
        I.SimulationConfig(g, 0.1, 0.01, scheme="rk4")
    with pytest.raises(ConfigurationError):
        I.SimulationConfig(g, 0.1, 0.01, mu=0.2, q=2.0)
    with pytest.raises(ConfigurationError):
        I.InitialData("bogus").build(S.build_operator(g))


def test_blowup_guard_records_status():
    g = GridSpec(8, 8, 4, 1.0, "NN")
    cfg = I.SimulationConfig(g, 0.1, 0.01, v0=I.InitialData("random", (("amp", 10.0),)), blowup_guard=1.0)
    rec = I.run_path(cfg)
    assert rec.status == "diverged" and "guard" in rec.message


def test_noisy_run_is_reproducible_and_constrained():
    g = GridSpec(8, 8, 6, 1.0, "NN")
    cfg = I.SimulationConfig(g, 0.05, 0.01, noise=N.NoiseSpec(n_f=4, n_b=2, seed=3),
                             v0=I.InitialData("random", (("amp", 2.0),)))
    a, b = I.run_path(cfg), I.run_path(cfg)
    assert np.array_equal(a.series("H1"), b.series("H1"))
    assert a.status == "ok"
    assert np.max(a.series("divres")) < 1e-12
    assert np.max(a.series("bndres")) < 1e-12


def test_pressure_is_mean_free(rng):
    g = GridSpec(8, 8, 6, 1.0, "DN")
    v = F.random_field(g, rng, kmax=3)
    p = I.reconstruct_pressure(v, None, nonlinear=True)
    assert p.coeffs[0, 0, 0] == 0


def test_ensemble_and_failures(monkeypatch):
    monkeypatch.setenv("HYDROWIND_THREADS", "2")
    assert I.worker_count() <= 2
    g = GridSpec(8, 8, 4, 1.0, "NN")
    cfg = I.SimulationConfig(g, 0.03, 0.01, noise=N.NoiseSpec(n_f=3, seed=1), paths=3)
    ens = I.run_ensemble(cfg, keep_records=True)
    assert ens.paths == 3 and not ens.failures and len(ens.records) == 3
    assert np.all(ens.var["L2"] >= 0)
    monkeypatch.setenv("HYDROWIND_THREADS", "x")
    with pytest.raises(ConfigurationError):
        I.worker_count()


def test_manufactured_source_is_exact_for_cn():
    g = GridSpec(8, 8, 6, 1.0, "NN")
    h = S.build_operator(g)
    phi = N.interior_eigenfunction(h, N.InteriorMode(1, 1, 1, 1))
    src = I.manufactured_source(h, phi, 0.5)
    rec = I.run_path(I.SimulationConfig(g, 0.1, 0.01, v0=phi, nonlinear=False, source=src), handle=h)
    assert (rec.final_v - np.exp(-0.05) * phi).norm() < 1e-3 * phi.norm()
