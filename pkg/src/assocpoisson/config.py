"""Experiment configuration: a YAML mapping validated into an ExperimentConfig.

Grammar (keys not listed are rejected)::

    experiment: sigma-sweep | charfn | count-fit | fkg-check
    spec:                       # FieldSpec record
      kind: pattern | or
      d: 1
      n: 100
      lambda: 1.0
      G: [[0], [1]]             # pattern only, list of d-tuples
    f:                          # charfn only
      breaks: [[0, 0.25, 0.75, 1]]
      amplitude: 1.0
    t_values: [0.5, 1.0]        # charfn
    n_values: [10, 20, 40]      # sigma-sweep, charfn (defaults to [spec.n])
    box: {lo: [0], hi: [1]}     # count-fit
    sites: [[0], [1], [2]]      # fkg-check
    pairs: 20                   # fkg-check, random monotone pairs
    reference: {lambda: 1.0, mass: 1}   # charfn limit reference (optional)
    replicates: 10000
    master_seed: 0
    out_dir: results
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import InvalidSpecError
from .field import FieldSpec
from .measure import BoxRegion, TestFunction
from .rng import check_seed

EXPERIMENTS = ("sigma-sweep", "charfn", "count-fit", "fkg-check")
KEYS = {
    "experiment", "spec", "f", "t_values", "n_values", "box", "sites", "pairs",
    "reference", "replicates", "master_seed", "out_dir",
}


class ConfigError(InvalidSpecError):
    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


@dataclass
class ExperimentConfig:
    experiment: str
    spec: FieldSpec
    replicates: int = 1000
    master_seed: int = 0
    out_dir: str = "results"
    f: Optional[TestFunction] = None
    t_values: Optional[list] = None
    n_values: Optional[list] = None
    box: Optional[BoxRegion] = None
    sites: Optional[list] = None
    pairs: int = 10
    reference: dict = field(default_factory=dict)

    def to_record(self):
        """Canonical record of every behaviour-relevant field."""
        rec = {
            "experiment": self.experiment,
            "spec": self.spec.to_record(),
            "replicates": self.replicates,
            "master_seed": self.master_seed,
        }
        if self.f is not None:
            rec["f"] = self.f.to_record()
        if self.t_values is not None:
            rec["t_values"] = list(self.t_values)
        if self.n_values is not None:
            rec["n_values"] = list(self.n_values)
        if self.box is not None:
            rec["box"] = self.box.to_record()
        if self.sites is not None:
            rec["sites"] = [list(s) for s in self.sites]
            rec["pairs"] = self.pairs
        if self.reference:
            rec["reference"] = dict(self.reference)
        return rec

    def digest(self):
        blob = json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _require(raw, key, experiment):
    if raw.get(key) is None:
        raise ConfigError(f"experiment {experiment!r} requires {key!r}", key)
    return raw[key]


def _positive_int(value, key):
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}", key) from None
    if out != value or out < 1:
        raise ConfigError(f"{key} must be a positive integer, got {value!r}", key)
    return out


def parse_config(raw, overrides=None):
    """Validate a mapping (parsed YAML) plus CLI overrides into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    unknown = set(raw) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}", sorted(unknown)[0])
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}", "experiment")

    def build(key, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (InvalidSpecError, TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid {key}: {exc}", key) from exc

    spec = build("spec", lambda: FieldSpec.from_record(_require(raw, "spec", experiment)))
    cfg = ExperimentConfig(
        experiment=experiment,
        spec=spec,
        replicates=_positive_int(raw.get("replicates", 1000), "replicates"),
        master_seed=build("master_seed", lambda: check_seed(raw.get("master_seed", 0))),
        out_dir=str(raw.get("out_dir", "results")),
    )
    if raw.get("n_values") is not None:
        cfg.n_values = [_positive_int(n, "n_values") for n in raw["n_values"]]
        for n in cfg.n_values:
            build("n_values", lambda: spec.with_n(n))
    if experiment == "charfn":
        cfg.f = build("f", lambda: TestFunction.from_record(_require(raw, "f", experiment)))
        cfg.t_values = build("t_values", lambda: [float(t) for t in _require(raw, "t_values", experiment)])
        if cfg.f.d != spec.d:
            raise ConfigError("test function dimension differs from the field dimension", "f")
        if cfg.replicates < 2:
            raise ConfigError("charfn needs at least 2 replicates", "replicates")
        ref = raw.get("reference") or {}
        if set(ref) - {"lambda", "mass"}:
            raise ConfigError("reference accepts only 'lambda' and 'mass'", "reference")
        cfg.reference = build("reference", lambda: {
            "lambda": float(ref.get("lambda", spec.lam)), "mass": int(ref.get("mass", 1)),
        })
        if cfg.reference["mass"] not in (1, 2):
            raise ConfigError("reference mass must be 1 or 2", "reference")
    elif experiment == "count-fit":
        box = _require(raw, "box", experiment)
        cfg.box = build("box", lambda: BoxRegion(box["lo"], box["hi"]))
        if cfg.box.d != spec.d:
            raise ConfigError("box dimension differs from the field dimension", "box")
    elif experiment == "fkg-check":
        cfg.sites = build("sites", lambda: [
            tuple(int(c) for c in (s if isinstance(s, (list, tuple)) else [s]))
            for s in _require(raw, "sites", experiment)
        ])
        if not cfg.sites or any(len(s) != spec.d for s in cfg.sites):
            raise ConfigError("sites must be a nonempty list of d-tuples", "sites")
        cfg.pairs = _positive_int(raw.get("pairs", 10), "pairs")
        if cfg.replicates < 100:
            raise ConfigError("fkg-check needs at least 100 replicates", "replicates")
    return cfg


def load_config(path, overrides=None):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", "config") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}", "config") from exc
    return parse_config(raw, overrides)
