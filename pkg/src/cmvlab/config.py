"""Run configuration: JSON schema, validation, defaults."""

import json
from dataclasses import dataclass, field

from .ensembles import EnsembleSpec, FAMILIES, INCREMENT_LAWS, RADIAL_LAWS
from .spectral import QuadratureSpec

COMMANDS = ("verify", "moments", "dynamics", "aizenman", "decay", "run")

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid run configuration; message carries the offending key path."""


def _require(cond, path, message):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _get_typed(d, key, types, path, default=None):
    if key not in d or d[key] is None:
        return default
    value = d[key]
    _require(isinstance(value, types) and not isinstance(value, bool),
             f"{path}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _reject_unknown(d, allowed, path):
    for key in d:
        _require(key in allowed, f"{path}.{key}", "unknown key")


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    n_dim: int
    p: float
    n_samples: int
    n_window: int
    beta: complex
    ensemble: EnsembleSpec
    pairs: tuple
    quadrature: QuadratureSpec
    lambda_grid: int
    dims: tuple
    input_csv: str | None
    out: str
    figures: bool = True


_TOP_KEYS = {
    "command", "seed", "n_dim", "p", "n_samples", "n_window", "beta",
    "ensemble", "pairs", "quadrature", "lambda_grid", "dims", "input_csv",
    "out", "figures",
}

_ENSEMBLE_KEYS = {
    "family", "radial_law", "radial_param", "increment_law", "increment_sigma",
}

_QUAD_KEYS = {
    "panels_per_gap", "gauss_nodes", "grading", "rel_tol", "max_doublings",
}


def parse_config(text, command=None):
    """Parse and validate a JSON run configuration.

    `command` (from the CLI) overrides the config's own command field.
    Defaults: N = 100, p = 0.5, n_samples = 200, n_window = 4 N, beta = 1,
    ensemble = iid_rotinv with uniform radius 0.9.
    """
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), "$", "top level must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "$")

    cmd = command or raw.get("command")
    _require(cmd is not None, "$.command", "missing command")
    _require(cmd in COMMANDS, "$.command", f"must be one of {COMMANDS}")

    seed = _get_typed(raw, "seed", int, "$", default=0)
    n_dim = _get_typed(raw, "n_dim", int, "$", default=100)
    _require(n_dim >= 2, "$.n_dim", "must be at least 2")
    p = float(_get_typed(raw, "p", (int, float), "$", default=0.5))
    _require(0.0 < p < 1.0, "$.p", "p must lie in (0,1)")
    n_samples = _get_typed(raw, "n_samples", int, "$", default=200)
    _require(n_samples >= 1, "$.n_samples", "must be positive")
    n_window = _get_typed(raw, "n_window", int, "$", default=4 * n_dim)
    _require(n_window >= 1, "$.n_window", "must be positive")
    beta_raw = raw.get("beta", 1.0)
    if isinstance(beta_raw, list):
        _require(len(beta_raw) == 2
                 and all(isinstance(x, (int, float)) for x in beta_raw),
                 "$.beta", "list form must be [real, imag]")
        beta = complex(beta_raw[0], beta_raw[1])
    else:
        _require(isinstance(beta_raw, (int, float))
                 and not isinstance(beta_raw, bool),
                 "$.beta", "must be a number or [real, imag]")
        beta = complex(beta_raw)
    _require(abs(abs(beta) - 1.0) <= 1e-12, "$.beta", "must be unimodular")
    lambda_grid = _get_typed(raw, "lambda_grid", int, "$", default=64)
    _require(lambda_grid >= 2, "$.lambda_grid", "must be at least 2")
    out = _get_typed(raw, "out", str, "$", default="out")
    input_csv = _get_typed(raw, "input_csv", str, "$", default=None)
    figures = raw.get("figures", True)
    _require(isinstance(figures, bool), "$.figures", "must be a boolean")

    ens_raw = raw.get("ensemble", {})
    _require(isinstance(ens_raw, dict), "$.ensemble", "must be an object")
    _reject_unknown(ens_raw, _ENSEMBLE_KEYS, "$.ensemble")
    family = ens_raw.get("family", "iid_rotinv")
    _require(family in FAMILIES, "$.ensemble.family",
             f"must be one of {FAMILIES}")
    radial_law = ens_raw.get("radial_law", "uniform_radius")
    _require(radial_law in RADIAL_LAWS, "$.ensemble.radial_law",
             f"must be one of {RADIAL_LAWS}")
    radial_param = float(_get_typed(ens_raw, "radial_param", (int, float),
                                    "$.ensemble", default=0.9))
    increment_law = ens_raw.get("increment_law", "uniform")
    _require(increment_law in INCREMENT_LAWS, "$.ensemble.increment_law",
             f"must be one of {INCREMENT_LAWS}")
    increment_sigma = float(_get_typed(ens_raw, "increment_sigma",
                                       (int, float), "$.ensemble", default=1.0))
    try:
        ensemble = EnsembleSpec(
            family=family, radial_law=radial_law, radial_param=radial_param,
            n_dim=n_dim, master_seed=seed, increment_law=increment_law,
            increment_sigma=increment_sigma,
        )
    except ValueError as exc:
        raise ConfigError(f"$.ensemble: {exc}") from exc

    quad_raw = raw.get("quadrature", {})
    _require(isinstance(quad_raw, dict), "$.quadrature", "must be an object")
    _reject_unknown(quad_raw, _QUAD_KEYS, "$.quadrature")
    try:
        quadrature = QuadratureSpec(
            panels_per_gap=quad_raw.get("panels_per_gap", 4),
            gauss_nodes=quad_raw.get("gauss_nodes", 16),
            grading=float(quad_raw.get("grading", 3.0)),
            rel_tol=float(quad_raw.get("rel_tol", 1e-6)),
            max_doublings=quad_raw.get("max_doublings", 7),
        )
    except ValueError as exc:
        raise ConfigError(f"$.quadrature: {exc}") from exc

    pairs_raw = raw.get("pairs")
    if pairs_raw is None:
        base = min(40, n_dim // 2)
        pairs = tuple((base, base + d) for d in range(2, 17)
                      if base + d < n_dim)
    else:
        _require(isinstance(pairs_raw, list) and pairs_raw,
                 "$.pairs", "must be a non-empty list of [k, l] pairs")
        pairs = []
        for idx, pr in enumerate(pairs_raw):
            _require(isinstance(pr, list) and len(pr) == 2
                     and all(isinstance(x, int) for x in pr),
                     f"$.pairs[{idx}]", "must be a pair of integers")
            _require(0 <= pr[0] < n_dim and 0 <= pr[1] < n_dim,
                     f"$.pairs[{idx}]", f"indices must lie in 0..{n_dim - 1}")
            pairs.append(tuple(pr))
        pairs = tuple(pairs)

    dims_raw = raw.get("dims", [4, 6, 8])
    _require(isinstance(dims_raw, list) and dims_raw
             and all(isinstance(x, int) and x >= 2 for x in dims_raw),
             "$.dims", "must be a list of integers >= 2")

    return RunConfig(
        command=cmd, seed=seed, n_dim=n_dim, p=p, n_samples=n_samples,
        n_window=n_window, beta=beta, ensemble=ensemble, pairs=pairs,
        quadrature=quadrature, lambda_grid=lambda_grid,
        dims=tuple(dims_raw), input_csv=input_csv, out=out, figures=figures,
    )


def emit_config(config):
    """Canonical JSON-serializable echo of a parsed configuration."""
    return {
        "command": config.command,
        "seed": config.seed,
        "n_dim": config.n_dim,
        "p": config.p,
        "n_samples": config.n_samples,
        "n_window": config.n_window,
        "beta": [config.beta.real, config.beta.imag],
        "ensemble": {
            "family": config.ensemble.family,
            "radial_law": config.ensemble.radial_law,
            "radial_param": config.ensemble.radial_param,
            "increment_law": config.ensemble.increment_law,
            "increment_sigma": config.ensemble.increment_sigma,
        },
        "pairs": [list(pr) for pr in config.pairs],
        "quadrature": {
            "panels_per_gap": config.quadrature.panels_per_gap,
            "gauss_nodes": config.quadrature.gauss_nodes,
            "grading": config.quadrature.grading,
            "rel_tol": config.quadrature.rel_tol,
            "max_doublings": config.quadrature.max_doublings,
        },
        "lambda_grid": config.lambda_grid,
        "dims": list(config.dims),
        # the output directory is a location, not part of the run
        # definition, so it is excluded from the deterministic echo
        "input_csv": config.input_csv,
        "figures": config.figures,
    }
