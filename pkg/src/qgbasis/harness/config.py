"""Experiment configuration: YAML documents, defaults and CLI overrides.

Precedence is flag > config file > built-in default.  A config file holds
common keys (``seed``, ``threads``, ``out``, ``csv``, ``svg``) at the top level
and per-experiment parameters in a section named after the experiment::

    seed: 7
    babenko:
      alpha: 0.25
      maxfreq: 64
"""
import copy
from dataclasses import dataclass, field
import math
from pathlib import Path

import yaml

from ..errors import ValidationError


def dyadic(lo, hi):
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


DEFAULTS = {
    "dirichlet": {
        "gammas": [-0.9, -0.5, 0.0, 0.5, 0.9],
        "Ns": dyadic(8, 1024),
    },
    "babenko": {
        "alpha": 0.25,
        "maxfreq": 64,
        "Ns": [8, 16, 32, 64],
        "samples": 2000,
        "sign_trials": 512,
        "exact_budget": 50_000,
    },
    "pair": {
        "alphas": [0.3, 0.6, 0.9],
        "Ns": dyadic(8, 512),
    },
    "th2": {
        "alpha": 0.9,
        "kmax": 9,
        "qg_trials": 2000,
        "democracy_trials": 50,
        "exact_budget": 50_000,
    },
    "seqspace": {
        "Nmax": 256,
        "kmax": 9,
    },
    "bounds": {
        "K_min": 1.0,
        "K_max": 100.0,
        "K_points": 60,
        "ps": [1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0],
        "kappas": [1.0, 1.5, 2.0, 5.0, 10.0, 100.0],
    },
    "olevskii-build": {
        "inner": "pair",
        "alpha": 0.9,
        "kmax": 5,
        "bonek_trials": 50,
    },
    "kn": {
        "gram": None,
        "Ns": [1, 2, 3, 4],
        "budget": 200_000,
        "mode": "auto",
    },
    "selftest": {},
}

COMMON_DEFAULTS = {"seed": 0, "threads": 1, "out": "out", "csv": True, "svg": False}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int
    threads: int = 1
    out: str = "out"
    csv: bool = True
    svg: bool = False
    source: str | None = None
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]


def _need(cond, msg):
    if not cond:
        raise ValidationError(msg)


def validate(cfg):
    p = cfg.params
    name = cfg.experiment
    _need(isinstance(cfg.seed, int) and 0 <= cfg.seed < 2 ** 64, "seed must be an unsigned 64-bit integer")
    _need(isinstance(cfg.threads, int) and cfg.threads >= 1, "threads must be >= 1")
    if name == "dirichlet":
        _need(all(-1 < g < 1 for g in p["gammas"]), "gammas must lie in (-1, 1)")
        _need(all(int(n) >= 0 for n in p["Ns"]), "Ns must be nonnegative")
    elif name == "babenko":
        _need(abs(p["alpha"]) < 0.5, "babenko needs |alpha| < 1/2")
        _need(p["maxfreq"] >= 1, "maxfreq must be >= 1")
        _need(all(1 <= n <= p["maxfreq"] for n in p["Ns"]), "Ns must lie in [1, maxfreq]")
        _need(p["samples"] >= 1 and p["sign_trials"] >= 1, "sample counts must be positive")
    elif name == "pair":
        _need(all(0 <= a < 1 for a in p["alphas"]), "pair alphas must lie in [0, 1)")
        _need(all(n >= 1 for n in p["Ns"]), "Ns must be positive")
    elif name == "th2":
        _need(0 <= p["alpha"] < 1, "th2 needs 0 <= alpha < 1")
        _need(1 <= p["kmax"] <= 10, "th2 needs 1 <= kmax <= 10")
        _need(p["qg_trials"] >= 1, "qg_trials must be positive")
    elif name == "seqspace":
        _need(2 <= p["kmax"] <= 9, "seqspace needs 2 <= kmax <= 9")
        _need(p["Nmax"] >= 1, "Nmax must be positive")
    elif name == "bounds":
        _need(1 <= p["K_min"] <= p["K_max"], "need 1 <= K_min <= K_max")
        _need(all(1 < q < math.inf for q in p["ps"]), "ps must lie in (1, inf)")
        _need(all(k >= 1 for k in p["kappas"]), "kappas must be >= 1")
    elif name == "olevskii-build":
        _need(p["inner"] in ("onb", "babenko", "pair", "seqspace"), "unknown inner basis")
        _need(1 <= p["kmax"] <= 10, "olevskii-build needs 1 <= kmax <= 10")
    elif name == "kn":
        _need(p["gram"] is not None, "kn needs a Gram matrix file (--gram)")
        _need(p["mode"] in ("auto", "exact", "lower"), "mode must be auto, exact or lower")
    return cfg


def load_document(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config document must be a mapping")
    return doc


def build_config(experiment, path=None, overrides=None, param_overrides=None):
    """Merge defaults, a config document and explicit overrides."""
    if experiment not in DEFAULTS:
        raise ValidationError(f"unknown experiment {experiment!r}")
    doc = load_document(path)
    params = copy.deepcopy(DEFAULTS[experiment])
    section = doc.get(experiment, {}) or {}
    if not isinstance(section, dict):
        raise ValidationError(f"section {experiment!r} must be a mapping")
    for k, v in section.items():
        if k not in params:
            raise ValidationError(f"unknown parameter {k!r} for {experiment}")
        params[k] = v
    for k, v in (param_overrides or {}).items():
        if v is not None:
            params[k] = v
    common = dict(COMMON_DEFAULTS)
    for k in COMMON_DEFAULTS:
        if k in doc:
            common[k] = doc[k]
    for k, v in (overrides or {}).items():
        if v is not None:
            common[k] = v
    cfg = ExperimentConfig(experiment=experiment, params=params, seed=int(common["seed"]),
                           threads=int(common["threads"]), out=str(common["out"]),
                           csv=bool(common["csv"]), svg=bool(common["svg"]),
                           source=str(path) if path else None)
    return validate(cfg)
