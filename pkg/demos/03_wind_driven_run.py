"""
A wind-driven run
=================

Integrate the full nonlinear equations with interior and surface noise,
write the trajectory with its provenance header, and reload it.
"""

import sys
import tempfile
from pathlib import Path

from hydrowind import io as hio
from hydrowind.config import config_hash, parse_config
from hydrowind.diagnostics import weighted_time_norm
from hydrowind.integrator import run_path

CONFIG = """
[grid]
nx = 16
ny = 16
nz = 8
h = 1.0
bc = DN

[time]
T = 0.5
dt = 0.005
scheme = imex-cn

[noise]
n_f = 8
n_b = 4
c_f = 0.5
c_b = 1.0
seed = 2024
hb_schedule = 0:1, 0.25:2
hb_modulation = 1, 0, 0.3

[initial]
kind = random
amp = 3.0

[output]
output_every = 10
"""

cfg = parse_config(CONFIG)
rec = run_path(cfg.to_simulation())
print(f"status {rec.status}, {len(rec.times)} rows")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
path = out / "wind_run.csv"
hio.write_trajectory(path, rec, {"config_hash": config_hash(cfg), "seed": cfg.noise.seed})
prov, cols = hio.read_trajectory(path)
print("provenance:", prov)

# The remainder stays in the constrained space throughout.
print(f"max divergence residual {cols['divres'].max():.1e}")
print(f"||H1||_L2(0,T) with mu = 0.75: {weighted_time_norm(cols['t'], cols['H1'], 0.75, 2.0):.4f}")
