import numpy as np
import pytest

from hydrowind import io as hio
from hydrowind import stokes as S
from hydrowind.cli import main
from hydrowind.diagnostics import weighted_time_norm
from hydrowind.grid import GridSpec

EIGEN_CONFIG = """
[grid]
nx = 8
ny = 8
nz = 6
bc = DN
[time]
T = 0.05
dt = 0.0005
nonlinear = false
[initial]
kind = eigen
ix = 1
iy = 0
branch = 1
j = 0
amp = 1.0
[output]
output_every = 10
"""


@pytest.fixture
def eigen_config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(EIGEN_CONFIG)
    return p


def test_simulate_eigenmode_energy(tmp_path, eigen_config):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(eigen_config), "--out", str(out), "--quiet"]) == 0
    prov, cols = hio.read_trajectory(out / "trajectory_0000.csv")
    assert {"config_hash", "seed", "version", "command"} <= set(prov)
    lam = S.build_operator(GridSpec(8, 8, 6, 1.0, "DN")).eigenvalues[1, 0, 0, 1]
    exact = cols["energy"][0] * np.exp(-2 * lam * cols["t"])
    assert np.max(np.abs(cols["energy"] - exact)) < 1e-3 * cols["energy"][0]
    assert (out / "config.ini").exists()


def test_norms_match_in_process(tmp_path, eigen_config):
    out = tmp_path / "out"
    main(["simulate", "--config", str(eigen_config), "--out", str(out), "--quiet"])
    traj = out / "trajectory_0000.csv"
    assert main(["norms", str(traj), "--mu", "0.8", "--q", "2", "--out", str(out), "--quiet"]) == 0
    _, cols = hio.read_trajectory(traj)
    _, _, rows = hio.read_csv(out / "norms.csv")
    got = {r[1]: r[4] for r in rows}
    assert got["H1"] == weighted_time_norm(cols["t"], cols["H1"], 0.8, 2.0)


def test_spectrum_and_ensemble(tmp_path, eigen_config):
    out = tmp_path / "o"
    assert main(["spectrum", "--config", str(eigen_config), "--out", str(out), "--quiet"]) == 0
    _, cols, rows = hio.read_csv(out / "spectrum.csv")
    assert cols == ["k_x", "k_y", "branch", "m", "lambda"] and rows
    cfg = tmp_path / "noise.ini"
    cfg.write_text("[grid]\nnx = 8\nny = 8\nnz = 4\n[time]\nT = 0.1\ndt = 0.02\n[noise]\nn_f = 3\nn_b = 2\n")
    assert main(["ensemble", "--noise-only", "--config", str(cfg), "--paths", "200", "--out", str(out),
                 "--quiet"]) == 0
    assert (out / "ito_interior.csv").exists() and (out / "ensemble.csv").exists()


def test_neumann_verify_small(tmp_path):
    out = tmp_path / "nv"
    assert main(["neumann-verify", "--regime", "DN", "--sizes", "8,16", "--out", str(out), "--quiet"]) == 0
    _, cols, rows = hio.read_csv(out / "neumann_verify.csv")
    assert "observed_order" in cols and all(r[5] > 1.8 for r in rows)


def test_convergence_command(tmp_path, eigen_config):
    out = tmp_path / "cv"
    assert main(["convergence", "--config", str(eigen_config), "--levels", "3", "--out", str(out), "--quiet"]) == 0
    _, _, rows = hio.read_csv(out / "convergence.csv")
    assert len(rows) == 3


def test_error_exit_codes(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 3
    assert "[io]" in capsys.readouterr().err
    bad = tmp_path / "bad.ini"
    bad.write_text("[time]\nmu = 0.1\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "mu must exceed 1/q" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_diverged_run_exits_numerical(tmp_path, capsys):
    cfg = tmp_path / "blow.ini"
    cfg.write_text("[grid]\nnx = 8\nny = 8\nnz = 4\n[time]\nT = 0.02\ndt = 0.01\nblowup_guard = 0.5\n"
                   "[initial]\nkind = random\namp = 10\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 4
    assert "[step]" in capsys.readouterr().err
