"""INI run configuration: parse, validate, serialize.

Sections and keys (all optional except where a section is absent entirely,
in which case its defaults apply)::

    [meta]     schema_version
    [grid]     nx ny nz h bc
    [time]     T dt scheme mu q nonlinear blowup_guard
    [noise]    n_f n_b alpha_f c_f alpha_b c_b seed neumann_alpha strict_mean
               hb_schedule      "t:value, t:value, ..."
               hb_modulation    "ix, iy, eps" or empty
               interior_modes   "ix iy branch j phase; ..." or empty
               boundary_modes   "ix iy comp phase; ..." or empty
    [initial]  kind (zero | eigen | random) plus its parameters
    [output]   output_every paths record_fields
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, replace

from .errors import ConfigurationError, HydrowindError
from .grid import BCCase, GridSpec
from .integrator import SCHEMES, InitialData, SimulationConfig
from .noise import BoundaryMode, InteriorMode, NoiseSpec

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec = GridSpec(16, 16, 8)
    T: float = 0.1
    dt: float = 0.01
    scheme: str = "imex-cn"
    mu: float = 1.0
    q: float = 2.0
    nonlinear: bool = True
    blowup_guard: float = 1e6
    noise: NoiseSpec = NoiseSpec()
    initial: InitialData = InitialData()
    output_every: int = 1
    paths: int = 1
    record_fields: bool = False
    schema_version: str = SCHEMA_VERSION

    def to_simulation(self, seed=None, paths=None) -> SimulationConfig:
        noise = self.noise if seed is None else replace(self.noise, seed=int(seed))
        return SimulationConfig(
            grid=self.grid, T=self.T, dt=self.dt, noise=noise, v0=self.initial, scheme=self.scheme,
            output_every=self.output_every, paths=int(paths or self.paths), mu=self.mu, q=self.q,
            blowup_guard=self.blowup_guard, nonlinear=self.nonlinear, record_fields=self.record_fields,
            provenance=(("config_hash", config_hash(self)),),
        )


_INITIAL_KEYS = {
    "zero": {},
    "eigen": {"ix": int, "iy": int, "branch": int, "j": int, "amp": float, "phase": str},
    "random": {"amp": float, "kmax": int, "mmax": int, "seed": int},
}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _schedule(text: str) -> tuple:
    out = []
    for part in text.split(","):
        t, _, v = part.partition(":")
        out.append((float(t), float(v)))
    return tuple(out)


def _modulation(text: str):
    if not text.strip():
        return None
    ix, iy, eps = (p.strip() for p in text.split(","))
    return (int(ix), int(iy), float(eps))


def _interior(text: str):
    if not text.strip():
        return None
    modes = []
    for chunk in text.split(";"):
        ix, iy, branch, j, *phase = chunk.split()
        modes.append(InteriorMode(int(ix), int(iy), int(branch), int(j), *(phase or ["cos"])))
    return tuple(modes)


def _boundary(text: str):
    if not text.strip():
        return None
    modes = []
    for chunk in text.split(";"):
        ix, iy, comp, *phase = chunk.split()
        modes.append(BoundaryMode(int(ix), int(iy), int(comp), *(phase or ["cos"])))
    return tuple(modes)


_SCHEMA = {
    "meta": {"schema_version": str},
    "grid": {"nx": int, "ny": int, "nz": int, "h": float, "bc": str},
    "time": {"T": float, "dt": float, "scheme": str, "mu": float, "q": float, "nonlinear": _bool,
             "blowup_guard": float},
    "noise": {"n_f": int, "n_b": int, "alpha_f": float, "c_f": float, "alpha_b": float, "c_b": float,
              "seed": int, "neumann_alpha": float, "strict_mean": _bool, "hb_schedule": _schedule,
              "hb_modulation": _modulation, "interior_modes": _interior, "boundary_modes": _boundary},
    "output": {"output_every": int, "paths": int, "record_fields": _bool},
}


def parse_config(text: str) -> RunConfig:
    """Validate ``text``; every problem found is listed in one ``ConfigurationError``."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    errors = []
    values = {}
    for section in parser.sections():
        if section == "initial":
            continue
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            conv = _SCHEMA[section].get(key)
            if conv is None:
                errors.append(f"unknown key {section}.{key}")
                continue
            try:
                values[(section, key)] = conv(raw)
            except (ValueError, TypeError) as exc:
                errors.append(f"{section}.{key}: cannot parse {raw!r} ({exc})")

    version = values.get(("meta", "schema_version"), SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION!r})")

    initial = InitialData()
    if parser.has_section("initial"):
        items = dict(parser.items("initial"))
        kind = items.pop("kind", "zero")
        allowed = _INITIAL_KEYS.get(kind)
        if allowed is None:
            errors.append(f"initial.kind must be one of {sorted(_INITIAL_KEYS)} (got {kind!r})")
        else:
            params = []
            for key, raw in items.items():
                if key not in allowed:
                    errors.append(f"unknown key initial.{key} for kind {kind!r}")
                    continue
                try:
                    params.append((key, allowed[key](raw)))
                except ValueError as exc:
                    errors.append(f"initial.{key}: cannot parse {raw!r} ({exc})")
            initial = InitialData(kind, tuple(sorted(params)))

    def get(section, key, default):
        return values.get((section, key), default)

    d = RunConfig()
    mu, q = get("time", "mu", d.mu), get("time", "q", d.q)
    if q < 1:
        errors.append("q must be >= 1")
    elif mu <= 1.0 / q:
        errors.append(f"mu must exceed 1/q (got mu={mu}, q={q})")
    if mu > 1:
        errors.append(f"mu must not exceed 1 (got {mu})")
    scheme = get("time", "scheme", d.scheme)
    if scheme not in SCHEMES:
        errors.append(f"time.scheme must be one of {SCHEMES} (got {scheme!r})")
    T, dt = get("time", "T", d.T), get("time", "dt", d.dt)
    if not (0 < dt <= T):
        errors.append(f"need 0 < dt <= T (got dt={dt}, T={T})")
    for key in ("output_every", "paths"):
        if get("output", key, 1) < 1:
            errors.append(f"output.{key} must be >= 1")

    grid = d.grid
    try:
        bc = BCCase.parse(get("grid", "bc", "NN"))
        grid = GridSpec(get("grid", "nx", d.grid.nx), get("grid", "ny", d.grid.ny),
                        get("grid", "nz", d.grid.nz), get("grid", "h", d.grid.h), bc)
    except HydrowindError as exc:
        errors.append(f"grid: {exc}")
    noise = d.noise
    try:
        kw = {k: v for (s, k), v in values.items() if s == "noise"}
        noise = NoiseSpec(**kw)
    except HydrowindError as exc:
        errors.append(f"noise: {exc}")

    if errors:
        raise ConfigurationError("invalid config:\n  " + "\n  ".join(errors))
    return RunConfig(
        grid=grid, T=T, dt=dt, scheme=scheme, mu=mu, q=q,
        nonlinear=get("time", "nonlinear", d.nonlinear), blowup_guard=get("time", "blowup_guard", d.blowup_guard),
        noise=noise, initial=initial, output_every=get("output", "output_every", d.output_every),
        paths=get("output", "paths", d.paths), record_fields=get("output", "record_fields", d.record_fields),
        schema_version=version,
    )


def load_config(path) -> RunConfig:
    from .errors import ArtifactError

    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ArtifactError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _fmt_modes(modes, fields_):
    if modes is None:
        return ""
    return "; ".join(" ".join(str(getattr(m, f)) for f in fields_) for m in modes)


def serialize_config(cfg: RunConfig) -> str:
    n = cfg.noise
    mod = "" if n.hb_modulation is None else ", ".join(repr(x) for x in n.hb_modulation)
    sections = {
        "meta": {"schema_version": cfg.schema_version},
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny, "nz": cfg.grid.nz, "h": repr(cfg.grid.h),
                 "bc": "NN" if cfg.grid.bc is BCCase.NEUMANN_NEUMANN else "DN"},
        "time": {"T": repr(cfg.T), "dt": repr(cfg.dt), "scheme": cfg.scheme, "mu": repr(cfg.mu), "q": repr(cfg.q),
                 "nonlinear": cfg.nonlinear, "blowup_guard": repr(cfg.blowup_guard)},
        "noise": {"n_f": n.n_f, "n_b": n.n_b, "alpha_f": repr(n.alpha_f), "c_f": repr(n.c_f),
                  "alpha_b": repr(n.alpha_b), "c_b": repr(n.c_b), "seed": n.seed,
                  "neumann_alpha": repr(n.neumann_alpha), "strict_mean": n.strict_mean,
                  "hb_schedule": ", ".join(f"{t!r}:{v!r}" for t, v in n.hb_schedule),
                  "hb_modulation": mod,
                  "interior_modes": _fmt_modes(n.interior_modes, ("ix", "iy", "branch", "j", "phase")),
                  "boundary_modes": _fmt_modes(n.boundary_modes, ("ix", "iy", "comp", "phase"))},
        "initial": {"kind": cfg.initial.kind, **{k: (repr(v) if isinstance(v, float) else v)
                                                 for k, v in cfg.initial.params}},
        "output": {"output_every": cfg.output_every, "paths": cfg.paths, "record_fields": cfg.record_fields},
    }
    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in body.items())
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]
