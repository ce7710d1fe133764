"""Run configuration: strict JSON schema with command-line overrides."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import catalog
from .errors import ConfigError

SYSTEMS = {
    "boson": "boson",
    "fermion": "fermion",
    "scalar_frw": "scalar_frw",
    "scalarfrw": "scalar_frw",
    "constrained_phi": "constrained_phi",
    "constrainedphi": "constrained_phi",
}
SPACES = {"theta": "ThetaInit", "sigma": "SigmaInit", "squeeze": "SqueezeRDelta", "fermion": "FermionInit"}


@dataclass
class RunConfig:
    system: str = "boson"
    profile: str | None = None
    scale_factor: str | None = None
    k: float = 1.0
    H: float | None = None
    m: float | None = None
    gamma: float | None = None
    t0: float | None = None
    t1: float | None = None
    anchor: float | None = None
    tol: float = 1e-10
    n_samples: int = 2000
    method: str = "DOP853"
    r: float = 0.0
    delta: float = 0.0
    theta0: float | None = None
    theta_dot0: float | None = None
    window: list | None = None
    tail: list | None = None
    side: str | None = None
    space: str | None = None
    functional: str = "slope"
    restarts: int = 8
    max_evals: int = 4000
    frw_sign: str = "plus"
    out: str | None = None
    csv: str | None = None

    # ------------------------------------------------------------------
    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = sorted(set(d) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "RunConfig":
        data = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    # ------------------------------------------------------------------
    def validate(self):
        sysname = SYSTEMS.get(str(self.system).lower().replace("-", "_"))
        if sysname is None:
            raise ConfigError(f"unknown system {self.system!r}; choose from boson, fermion, scalar_frw, constrained_phi")
        self.system = sysname
        for name in ("k", "H", "m", "gamma", "t0", "t1", "anchor", "tol", "r", "delta", "theta0", "theta_dot0"):
            v = getattr(self, name)
            if v is not None:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"{name} must be a finite number")
                setattr(self, name, float(v))
        for name in ("n_samples", "restarts", "max_evals"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.n_samples < 64:
            raise ConfigError("n_samples must be at least 64")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.r < 0:
            raise ConfigError("r must be non-negative")
        if self.frw_sign not in ("plus", "minus"):
            raise ConfigError("frw_sign must be 'plus' or 'minus'")
        if self.functional not in ("slope", "detrended"):
            raise ConfigError("functional must be 'slope' or 'detrended'")
        if self.side is not None and self.side not in ("in", "out", "central"):
            raise ConfigError("side must be in, out or central")

        if self.system == "boson":
            if self.profile is None:
                raise ConfigError("boson runs need a profile")
            if self.profile not in catalog.PROFILES:
                raise ConfigError(f"unknown profile {self.profile!r}; choose from {', '.join(catalog.PROFILES)}")
            name = self.profile
        else:
            default_sf = "sinh_gamma" if self.system == "constrained_phi" else "step_ramp36"
            self.scale_factor = self.scale_factor or default_sf
            if self.scale_factor not in catalog.SCALE_FACTORS:
                raise ConfigError(f"unknown scale factor {self.scale_factor!r}")
            if self.m is None:
                self.m = 1.0 / 16.0
            name = self.scale_factor

        span = catalog.working_span(name)
        self.t0 = span[0] if self.t0 is None else self.t0
        self.t1 = span[1] if self.t1 is None else self.t1
        if not self.t1 > self.t0:
            raise ConfigError(f"empty span [{self.t0}, {self.t1}]")
        self._check_domain(name)
        if self.anchor is not None and not self.t0 <= self.anchor <= self.t1:
            raise ConfigError("anchor must lie inside the span")

        if self.window is not None:
            if not isinstance(self.window, (list, tuple)) or len(self.window) != 2:
                raise ConfigError("window needs two numbers")
            a, b = map(float, self.window)
            if not b > a:
                raise ConfigError("window needs t2 > t1")
            self.window = [a, b]
        if self.tail is not None:
            if not isinstance(self.tail, (list, tuple)) or len(self.tail) < 2:
                raise ConfigError("tail needs t0 followed by increasing T values")
            tl = [float(v) for v in self.tail]
            if any(b <= a for a, b in zip(tl, tl[1:])):
                raise ConfigError("tail values must be strictly increasing")
            self.tail = tl
        if self.space is not None:
            if self.space not in SPACES:
                raise ConfigError(f"space must be one of {', '.join(SPACES)}")
            if (self.space == "fermion") != (self.system == "fermion"):
                raise ConfigError("the fermion space is used with, and only with, the fermion system")
        if self.system == "fermion" and self.r != 0:
            raise ConfigError("squeezing (r) is not defined for fermion runs")
        return self

    def _check_domain(self, name):
        lo, hi = (self.make_profile() if self.system == "boson" else self.make_scale_factor()).domain
        bad = [t for t in (self.t0, self.t1) if not lo < t < hi]
        if self.window is not None:
            bad += [t for t in self.window if not lo < float(t) < hi]
        if bad:
            raise ConfigError(f"time {bad[0]} outside the domain ({lo}, {hi}) of {name}")

    # ------------------------------------------------------------------
    def make_profile(self):
        return catalog.make_profile(self.profile, k=self.k, H=self.H)

    def make_scale_factor(self):
        return catalog.make_scale_factor(self.scale_factor, gamma=self.gamma)

    def search_space(self):
        if self.space is not None:
            return SPACES[self.space]
        if self.system == "fermion":
            return "FermionInit"
        return "SqueezeRDelta" if self.tail is not None else "ThetaInit"

    @property
    def system_name(self):
        return self.profile if self.system == "boson" else self.scale_factor
