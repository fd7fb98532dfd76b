"""Bundled scenario presets and reference coupling data.

Presets live as commented JSON files under ``eitcool/data/``; they encode
the parameter sets used by the acceptance suite and make every pipeline
runnable with a single ``--preset`` flag.
"""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .core import LambdaParams
from .errors import ConfigError

# Relative line strengths of the sigma+ probe / sigma- coupling Lambda chains
# on the D2 F=2 -> F'=3 manifold, labeled by the magnetic numbers
# (g, e, g').  External reference data from standard coupling tables -- not
# computed here.  Chain strengths are normalized to the F=2 -> F'=3 reduced
# element (sum over all sigma+ lines is 1).
D2_SIGMA_CHAINS = (
    {"levels": (-2, -1, 0), "probe_strength": 2 / 30, "coupling_strength": 12 / 30},
    {"levels": (-1, 0, +1), "probe_strength": 6 / 30, "coupling_strength": 6 / 30},
    {"levels": (0, +1, +2), "probe_strength": 12 / 30, "coupling_strength": 2 / 30},
)


def multi_lambda_components(base: LambdaParams, chains=D2_SIGMA_CHAINS):
    """Scale a base parameter set onto each Lambda chain.

    The first chain is the one the nominal Rabi frequencies refer to; the
    others are rescaled by the square root of their relative strengths.
    Weights follow the probe strengths (population assumed spread in
    proportion to how strongly each ground state is probed).
    """
    ref = chains[0]
    components = []
    for chain in chains:
        params = base.replace(
            omega_p=base.omega_p * np.sqrt(chain["probe_strength"] / ref["probe_strength"]),
            omega_c=base.omega_c * np.sqrt(chain["coupling_strength"] / ref["coupling_strength"]))
        components.append((chain["probe_strength"], params))
    return components


def strip_comment_lines(text: str) -> str:
    """Drop full-line ``#`` comments so commented JSON parses cleanly."""
    return "\n".join(line for line in text.splitlines()
                     if not line.lstrip().startswith("#"))


def parse_config_text(text: str) -> dict:
    return json.loads(strip_comment_lines(text))


def available_presets() -> dict:
    """Mapping preset name -> one-line description."""
    out = {}
    for entry in sorted((resources.files("eitcool") / "data").iterdir(),
                        key=lambda e: e.name):
        if entry.name.endswith(".json"):
            cfg = parse_config_text(entry.read_text())
            out[entry.name[:-5]] = cfg.get("description", "")
    return out


def load_preset(name: str) -> dict:
    path = resources.files("eitcool") / "data" / f"{name}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        known = ", ".join(sorted(available_presets()))
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from None
    return parse_config_text(text)
