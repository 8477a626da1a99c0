import numpy as np
import pytest

from hydrowind import fields as F
from hydrowind import io as hio
from hydrowind.config import RunConfig, config_hash, parse_config, serialize_config
from hydrowind.errors import ArtifactError, ConfigurationError
from hydrowind.grid import GridSpec


@pytest.mark.parametrize("bc", ["NN", "DN"])
def test_snapshot_round_trip(tmp_path, rng, bc):
    g = GridSpec(8, 6, 5, 0.7, bc)
    v = F.random_field(g, rng)
    path = tmp_path / "v.hwnd"
    hio.write_snapshot(path, v)
    back = hio.read_snapshot(path)
    assert back.grid == g
    assert np.max(np.abs(back.coeffs - v.coeffs)) < 1e-14
    # byte-exact at the file level
    grid, samples, surface = hio.read_snapshot_raw(path)
    hio.write_snapshot_raw(tmp_path / "w.hwnd", grid, samples, surface)
    assert (tmp_path / "w.hwnd").read_bytes() == path.read_bytes()


def test_snapshot_header_layout(tmp_path):
    g = GridSpec(4, 4, 3, 2.0, "DN")
    path = tmp_path / "z.hwnd"
    hio.write_snapshot(path, F.SpectralField.zeros(g, basis="node"))
    blob = path.read_bytes()
    assert blob[:5] == b"HWND1"
    assert len(blob) == hio.HEADER.size + 8 * 2 * 3 * 4 * 4
    assert hio.HEADER.unpack_from(blob)[1:] == (4, 4, 3, 1, 2.0, 2)


def test_surface_snapshot(tmp_path, rng):
    g = GridSpec(8, 8, 4)
    s = F.SurfaceField.from_physical(rng.standard_normal((1, 8, 8)), g)
    hio.write_snapshot(tmp_path / "p.hwnd", s)
    back = hio.read_snapshot(tmp_path / "p.hwnd")
    assert isinstance(back, F.SurfaceField)
    assert np.allclose(back.coeffs, s.coeffs, atol=1e-15)


def test_corrupt_snapshot(tmp_path):
    (tmp_path / "bad.hwnd").write_bytes(b"NOPE!" + bytes(40))
    with pytest.raises(ArtifactError):
        hio.read_snapshot(tmp_path / "bad.hwnd")
    with pytest.raises(ArtifactError):
        hio.read_snapshot(tmp_path / "missing.hwnd")


def test_csv_provenance(tmp_path):
    hio.write_csv(tmp_path / "a.csv", ("x", "y"), [(1.0, 0.1), (2.0, 1 / 3)], {"seed": 4, "config_hash": "abc"})
    prov, cols, rows = hio.read_csv(tmp_path / "a.csv")
    assert prov == {"seed": "4", "config_hash": "abc"}
    assert cols == ["x", "y"] and rows[1][1] == 1 / 3


def test_config_defaults_and_round_trip():
    cfg = parse_config("")
    assert cfg == RunConfig()
    text = """
[grid]
nx = 8
ny = 8
nz = 6
bc = DN
[time]
T = 0.3
dt = 0.01
mu = 0.75
[noise]
n_f = 2
n_b = 1
hb_schedule = 0:1, 0.1:2.5
hb_modulation = 1, 0, 0.25
interior_modes = 1 0 1 0; 0 1 0 1 sin
[initial]
kind = random
amp = 2.5
seed = 3
[output]
paths = 4
"""
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)
    assert cfg.to_simulation(seed=9).noise.seed == 9


def test_config_reports_every_problem():
    bad = "[time]\nmu = 0.1\nq = 2\ndt = abc\nextra = 1\n[grid]\nnx = 5\n[weird]\n[meta]\nschema_version = 7\n"
    with pytest.raises(ConfigurationError) as exc:
        parse_config(bad)
    msg = str(exc.value)
    for part in ("mu must exceed 1/q", "time.dt", "unknown key time.extra", "nx must", "unknown section [weird]",
                 "schema_version"):
        assert part in msg


@pytest.mark.parametrize("text", ["not an ini", "[grid\nnx=8", "[noise]\nhb_schedule = x\n",
                                  "[initial]\nkind = eigen\ncolour = red\n", "[output]\npaths = 0\n"])
def test_malformed_configs_raise_structured_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)
