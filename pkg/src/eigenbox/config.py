"""Experiment configuration for the benchmark runs."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import potentials
from .assembly import canonical_method
from .mesh import Mesh, build_lshape_mesh, build_square_mesh

DOMAINS = ("square8", "lshape8", "unitsquare")
POTENTIALS = ("zero", "harmonic", "lattice", "anderson")
MODES = ("uniform", "adaptive")


def initial_mesh(domain: str) -> Mesh:
    if domain == "square8":
        return build_square_mesh(8.0, 2)
    if domain == "lshape8":
        return build_lshape_mesh(8.0, 2)
    if domain == "unitsquare":
        return build_square_mesh(0.5, 8, center=(0.5, 0.5))
    raise ValueError(f"unknown domain {domain!r}; choose from {', '.join(DOMAINS)}")


def make_potential(name: str, seed: int = 0) -> potentials.Potential:
    if name == "zero":
        return potentials.zero()
    if name == "harmonic":
        return potentials.harmonic()
    if name == "lattice":
        return potentials.lattice()
    if name == "anderson":
        return potentials.make_anderson(seed)
    raise ValueError(f"unknown potential {name!r}; choose from {', '.join(POTENTIALS)}")


@dataclass
class ExperimentConfig:
    domain: str = "unitsquare"
    potential: str = "zero"
    seed: int = 0
    methods: tuple = ("CR", "eCR", "mCR", "RT", "sCR", "S1")
    k: int = 1
    mode: str = "uniform"
    theta: float = 0.5
    levels: int = 4
    max_dofs: int | None = None
    estimator: str = "sCR"
    boundary_jumps: bool = True
    all_k: bool = False
    gub: bool = True
    timing: bool = False
    out: str | None = None
    dump_mesh: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.methods, str):
            self.methods = tuple(m for m in self.methods.split(",") if m)
        self.methods = tuple(canonical_method(m) for m in self.methods)
        self.estimator = canonical_method(self.estimator)
        self.validate()

    def validate(self) -> None:
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}; choose from {', '.join(DOMAINS)}")
        if self.potential not in POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}; choose from {', '.join(POTENTIALS)}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must lie in (0, 1]")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.max_dofs is not None and self.max_dofs < 1:
            raise ValueError("max-dofs must be positive")

    def mesh(self) -> Mesh:
        return initial_mesh(self.domain)

    def make_potential(self) -> potentials.Potential:
        return make_potential(self.potential, self.seed)

    def updated(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_value(key: str, raw: str):
    t = str(_TYPES.get(key, "str"))
    raw = raw.strip()
    if t.startswith("int"):
        return None if raw.lower() in ("", "none") else int(raw)
    if t.startswith("float"):
        return float(raw)
    if t.startswith("bool"):
        return raw.lower() in ("1", "true", "yes", "on")
    if t.startswith("str |") and raw.lower() in ("", "none"):
        return None
    return raw


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use underscores or dashes."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES or key == "extra":
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
        out[key] = parse_value(key, val)
    return out
