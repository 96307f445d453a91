"""Run configuration: INI text with one section per module."""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import Su11Error
from .profiles import KINDS, FrequencyProfile


class ConfigError(Su11Error, ValueError):
    """A configuration value violates a precondition."""


# field name -> (section, key, type)
_LAYOUT = {
    "profile_kind": ("profile", "kind", str),
    "profile_omega0": ("profile", "omega0", float),
    "profile_alpha": ("profile", "alpha", float),
    "profile_path": ("profile", "path", str),
    "c": ("model", "c", float),
    "branch": ("model", "branch", str),
    "omega_rep": ("model", "omega_rep", float),
    "truncation": ("model", "truncation", int),
    "q_max": ("grid", "q_max", float),
    "n_points": ("grid", "n_points", int),
    "t0": ("span", "t0", float),
    "t1": ("span", "t1", float),
    "samples": ("span", "samples", int),
    "levels": ("evolve", "levels", int),
    "dt": ("evolve", "dt", float),
    "z_abs": ("coherent", "z_abs", float),
    "z_phase": ("coherent", "z_phase", float),
    "tol_ode": ("tolerances", "ode", float),
    "tol_operator": ("tolerances", "operator", float),
    "tol_population": ("tolerances", "population", float),
    "out_dir": ("output", "directory", str),
}


@dataclass(frozen=True)
class RunConfig:
    profile_kind: str = "constant"
    profile_omega0: float = 1.0
    profile_alpha: float = 0.0
    profile_path: str = ""
    c: float = 0.0
    branch: str = "auto"
    omega_rep: float = 0.0  # 0 means sqrt(omega^2(t0))
    truncation: int = 64
    q_max: float = 12.0
    n_points: int = 40000
    t0: float = 0.0
    t1: float = 1.0
    samples: int = 101
    levels: int = 8
    dt: float = 5e-4
    z_abs: float = 0.4
    z_phase: float = 0.0
    tol_ode: float = 1e-10
    tol_operator: float = 1e-6
    tol_population: float = 1e-4
    out_dir: str = "out"

    # -- text form -------------------------------------------------------

    def to_ini(self):
        parser = configparser.ConfigParser(interpolation=None)
        for name, (section, key, typ) in _LAYOUT.items():
            if not parser.has_section(section):
                parser.add_section(section)
            value = getattr(self, name)
            parser.set(section, key, repr(value) if typ is float else str(value))
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in parser.items(section))
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text):
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable configuration: {exc}") from exc
        known = {(s, k) for s, k, _ in _LAYOUT.values()}
        for section in parser.sections():
            for key in parser[section]:
                if (section, key) not in known:
                    raise ConfigError(f"unknown key [{section}] {key}")
        values = {}
        for name, (section, key, typ) in _LAYOUT.items():
            if parser.has_option(section, key):
                raw = parser.get(section, key).strip()
                try:
                    values[name] = typ(raw)
                except ValueError:
                    raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {typ.__name__}") from None
        return cls(**values)

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
        return cls.from_ini(text)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        d = self.to_dict()
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown fields {sorted(unknown)}")
        d.update(changes)
        return RunConfig(**d)

    # -- derived objects ---------------------------------------------------

    def profile(self):
        if self.profile_kind == "constant":
            return FrequencyProfile.constant(self.profile_omega0)
        if self.profile_kind == "power_law":
            return FrequencyProfile.power_law(self.profile_omega0, self.profile_alpha)
        return FrequencyProfile.from_csv(self.profile_path)

    def rep_omega(self, profile=None):
        if self.omega_rep > 0:
            return self.omega_rep
        profile = profile or self.profile()
        return float(np.sqrt(profile.omega_sq(self.t0)))

    def bargmann_index(self):
        from .states import bargmann_indices

        k_minus, k_plus = bargmann_indices(self.c)
        if self.branch == "minus":
            if k_minus is None:
                raise ConfigError(f"branch = minus needs k_minus > 0, which requires c < 3/8 (c = {self.c})")
            return k_minus
        return k_plus

    # -- validation ----------------------------------------------------------

    def validate(self):
        """Raise ConfigError naming the first violated precondition."""
        def need(cond, message):
            if not cond:
                raise ConfigError(message)

        need(self.c > -0.125, f"c = {self.c} violates c > -1/8")
        need(self.branch in ("plus", "minus", "auto"), "branch must be plus, minus or auto")
        need(self.profile_kind in KINDS, f"profile kind must be one of {KINDS}")
        if self.profile_kind in ("constant", "power_law"):
            need(self.profile_omega0 > 0, "profile omega0 must be > 0")
        if self.profile_kind == "power_law":
            need(self.t0 > 0, "power_law profile needs t0 > 0")
            need(self.profile_alpha > -2, "power_law alpha must be > -2")
        if self.profile_kind == "sampled":
            need(bool(self.profile_path), "sampled profile needs [profile] path")
            need(Path(self.profile_path).is_file(), f"profile table {self.profile_path} not found")
        need(self.truncation >= 2, "truncation N must be >= 2")
        need(self.q_max > 0, "grid q_max must be > 0")
        need(self.n_points >= 64, "grid n_points must be >= 64")
        need(self.t1 >= self.t0, "span needs t1 >= t0")
        need(self.samples >= 2, "span samples must be >= 2")
        need(self.levels >= 1, "evolve levels must be >= 1")
        need(self.dt > 0, "evolve dt must be > 0")
        need(self.z_abs >= 0, "coherent z_abs must be >= 0")
        need(1e-13 <= self.tol_ode <= 1e-4, "tolerances ode must lie in [1e-13, 1e-4]")
        need(self.tol_operator > 0 and self.tol_population > 0, "tolerances must be positive")
        need(self.omega_rep >= 0, "omega_rep must be >= 0 (0 selects sqrt(omega^2(t0)))")
        try:
            profile = self.profile()
            profile.check_span(self.t0, self.t1)
        except Su11Error as exc:
            raise ConfigError(str(exc)) from None
        need(self.rep_omega(profile) > 0, "omega^2(t0) must be positive to fix the representation scale")
        self.bargmann_index()
        return self
