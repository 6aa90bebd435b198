"""Run configuration: one YAML document per experiment, strictly validated.

A config has four top-level keys::

    kind:       simulate | scan-tau | portrait | bands | farey | husimi | beta-scan
    seed:       integer fed to the counter-based generator
    system:     physical parameters (omitted for kind: farey)
    experiment: kind-specific settings

Validation fills every default, rejects unknown keys anywhere, and is
idempotent, so the fully resolved config echoed into output headers can
be rerun verbatim to reproduce the outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..params import SystemParams, build_params

KINDS = (
    "simulate",
    "scan-tau",
    "portrait",
    "bands",
    "farey",
    "husimi",
    "beta-scan",
)

GAUGES = ("falling", "lab")
INITIAL_TYPES = ("plane-wave", "packet", "ensemble")
PORTRAIT_SOURCES = ("bands", "closed-form")


def _fail(path: str, msg: str):
    raise ConfigError(f"config {path}: {msg}")


def _block(path: str, value) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(path: str, block: dict, known, required):
    unknown = sorted(set(block) - set(known))
    if unknown:
        _fail(path, f"unknown keys {unknown}")
    missing = sorted(set(required) - set(block))
    if missing:
        _fail(path, f"missing required keys {missing}")


def _int(path: str, v, lo=None, hi=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        _fail(path, f"must be <= {hi}, got {v}")
    return v


def _float(path: str, v, lo=None, positive=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    x = float(v)
    if positive and x <= 0.0:
        _fail(path, f"must be positive, got {x}")
    if lo is not None and x < lo:
        _fail(path, f"must be >= {lo}, got {x}")
    return x


def _enum(path: str, v, options) -> str:
    if v not in options:
        _fail(path, f"expected one of {list(options)}, got {v!r}")
    return v


def _grid(path: str, v, min_count=1) -> dict:
    g = _block(path, v)
    _check_keys(path, g, ("start", "stop", "count"), ("start", "stop", "count"))
    return {
        "start": _float(f"{path}.start", g["start"]),
        "stop": _float(f"{path}.stop", g["stop"]),
        "count": _int(f"{path}.count", g["count"], lo=min_count),
    }


def _int_list(path: str, v, lo=None) -> list:
    if not isinstance(v, list) or not v:
        _fail(path, "expected a non-empty list of integers")
    return [_int(f"{path}[{i}]", x, lo=lo) for i, x in enumerate(v)]


def _float_list(path: str, v) -> list:
    if not isinstance(v, list) or not v:
        _fail(path, "expected a non-empty list of numbers")
    return [_float(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _pair_list(path: str, v, width: int) -> list:
    if not isinstance(v, list):
        _fail(path, f"expected a list of {width}-integer lists")
    out = []
    for i, item in enumerate(v):
        if not isinstance(item, list) or len(item) != width:
            _fail(f"{path}[{i}]", f"expected {width} integers")
        out.append([_int(f"{path}[{i}][{j}]", x) for j, x in enumerate(item)])
    return out


def _validate_initial(path: str, v, allowed_types=INITIAL_TYPES) -> dict:
    blk = _block(path, v)
    if "type" not in blk:
        _fail(path, "missing required keys ['type']")
    typ = _enum(f"{path}.type", blk["type"], allowed_types)
    out = {"type": typ}
    if typ == "plane-wave":
        _check_keys(path, blk, ("type", "n0"), ("type",))
        out["n0"] = _int(f"{path}.n0", blk.get("n0", 0))
    elif typ == "packet":
        _check_keys(
            path,
            blk,
            ("type", "band", "n0", "theta_center", "sigma_theta", "grid_size"),
            ("type", "band", "theta_center"),
        )
        out["band"] = _int(f"{path}.band", blk["band"], lo=0)
        out["n0"] = _int(f"{path}.n0", blk.get("n0", 0))
        out["theta_center"] = _float(f"{path}.theta_center", blk["theta_center"])
        if "sigma_theta" in blk:
            out["sigma_theta"] = _float(
                f"{path}.sigma_theta", blk["sigma_theta"], positive=True
            )
        out["grid_size"] = _int(f"{path}.grid_size", blk.get("grid_size", 1024), lo=256)
    else:  # ensemble
        _check_keys(
            path,
            blk,
            ("type", "members", "fwhm", "mean", "pin_beta"),
            ("type", "members", "fwhm"),
        )
        out["members"] = _int(f"{path}.members", blk["members"], lo=1)
        out["fwhm"] = _float(f"{path}.fwhm", blk["fwhm"], lo=0.0)
        out["mean"] = _float(f"{path}.mean", blk.get("mean", 0.0))
        pin = blk.get("pin_beta", False)
        if not isinstance(pin, bool):
            _fail(f"{path}.pin_beta", f"expected true/false, got {pin!r}")
        out["pin_beta"] = pin
    return out


def _validate_system(kind: str, raw) -> dict:
    path = "system"
    blk = _block(path, raw)
    known = ("kick_strength", "tau_over_2pi", "gravity", "p", "q", "nu", "beta")
    required = ["gravity", "p", "q"]
    if kind != "scan-tau":
        required.append("tau_over_2pi")
    if kind != "bands":
        required.append("kick_strength")
    _check_keys(path, blk, known, required)
    if kind == "scan-tau" and "tau_over_2pi" in blk:
        _fail(
            f"{path}.tau_over_2pi",
            "set by experiment.tau_grid for kind scan-tau; remove it",
        )
    if kind == "bands" and "kick_strength" in blk:
        _fail(
            f"{path}.kick_strength",
            "set by experiment.kick_strengths for kind bands; remove it",
        )
    if kind == "beta-scan" and "beta" in blk:
        _fail(
            f"{path}.beta",
            "set by experiment.beta_grid for kind beta-scan; remove it",
        )
    out = {
        "gravity": _float(f"{path}.gravity", blk["gravity"], lo=0.0),
        "p": _int(f"{path}.p", blk["p"], lo=1),
        "q": _int(f"{path}.q", blk["q"], lo=1),
        "nu": _int(f"{path}.nu", blk.get("nu", 0), lo=0),
    }
    if kind != "bands":
        out["kick_strength"] = _float(
            f"{path}.kick_strength", blk["kick_strength"], lo=0.0
        )
    if kind != "scan-tau":
        out["tau_over_2pi"] = _float(
            f"{path}.tau_over_2pi", blk["tau_over_2pi"], positive=True
        )
    if kind != "beta-scan" and "beta" in blk:
        out["beta"] = _float(f"{path}.beta", blk["beta"])
    return out


def _validate_experiment(kind: str, raw) -> dict:
    path = "experiment"
    blk = _block(path, raw)
    out: dict = {}
    if kind == "simulate":
        _check_keys(
            path,
            blk,
            ("kicks", "snapshots", "initial", "bin_width", "p_range", "gauge", "span"),
            ("kicks", "initial"),
        )
        out["kicks"] = _int(f"{path}.kicks", blk["kicks"], lo=0)
        out["snapshots"] = sorted(
            set(_int_list(f"{path}.snapshots", blk.get("snapshots", [out["kicks"]]), lo=0))
        )
        out["initial"] = _validate_initial(f"{path}.initial", blk["initial"])
        out["bin_width"] = _float(f"{path}.bin_width", blk.get("bin_width", 0.25), positive=True)
        if "p_range" in blk:
            pr = _float_list(f"{path}.p_range", blk["p_range"])
            if len(pr) != 2 or pr[0] >= pr[1]:
                _fail(f"{path}.p_range", "expected [low, high] with low < high")
            out["p_range"] = pr
        out["gauge"] = _enum(f"{path}.gauge", blk.get("gauge", "falling"), GAUGES)
        out["span"] = _int(f"{path}.span", blk.get("span", 1024), lo=16)
    elif kind == "scan-tau":
        _check_keys(
            path,
            blk,
            ("tau_grid", "kicks", "initial", "bin_width", "p_range", "gauge", "modes", "span"),
            ("tau_grid", "kicks", "initial", "p_range"),
        )
        out["tau_grid"] = _grid(f"{path}.tau_grid", blk["tau_grid"])
        out["kicks"] = _int(f"{path}.kicks", blk["kicks"], lo=0)
        out["initial"] = _validate_initial(f"{path}.initial", blk["initial"])
        out["bin_width"] = _float(f"{path}.bin_width", blk.get("bin_width", 0.25), positive=True)
        pr = _float_list(f"{path}.p_range", blk["p_range"])
        if len(pr) != 2 or pr[0] >= pr[1]:
            _fail(f"{path}.p_range", "expected [low, high] with low < high")
        out["p_range"] = pr
        out["gauge"] = _enum(f"{path}.gauge", blk.get("gauge", "falling"), GAUGES)
        out["modes"] = _pair_list(f"{path}.modes", blk.get("modes", []), 3)
        out["span"] = _int(f"{path}.span", blk.get("span", 1024), lo=16)
    elif kind == "portrait":
        _check_keys(
            path,
            blk,
            ("band", "source", "grid_size", "seed_grid", "iters", "orbits"),
            ("band",),
        )
        out["band"] = _int(f"{path}.band", blk["band"], lo=0)
        out["source"] = _enum(f"{path}.source", blk.get("source", "bands"), PORTRAIT_SOURCES)
        out["grid_size"] = _int(f"{path}.grid_size", blk.get("grid_size", 1024), lo=256)
        out["seed_grid"] = _int(f"{path}.seed_grid", blk.get("seed_grid", 24), lo=1)
        out["iters"] = _int(f"{path}.iters", blk.get("iters", 400), lo=1)
        out["orbits"] = _pair_list(f"{path}.orbits", blk.get("orbits", []), 2)
    elif kind == "bands":
        _check_keys(path, blk, ("kick_strengths", "grid_size"), ("kick_strengths",))
        out["kick_strengths"] = _float_list(f"{path}.kick_strengths", blk["kick_strengths"])
        out["grid_size"] = _int(f"{path}.grid_size", blk.get("grid_size", 1024), lo=256)
    elif kind == "farey":
        _check_keys(
            path,
            blk,
            ("gravity", "resonances", "max_terms", "convergent_count"),
            ("gravity", "resonances"),
        )
        out["gravity"] = _float(f"{path}.gravity", blk["gravity"], lo=0.0)
        out["resonances"] = _pair_list(f"{path}.resonances", blk["resonances"], 2)
        out["max_terms"] = _int(f"{path}.max_terms", blk.get("max_terms", 8), lo=1)
        out["convergent_count"] = _int(
            f"{path}.convergent_count", blk.get("convergent_count", 4), lo=1
        )
    elif kind == "husimi":
        _check_keys(
            path,
            blk,
            (
                "kicks",
                "snapshots",
                "initial",
                "theta_bins",
                "action_bins",
                "action_half_width",
                "action_center",
                "span",
            ),
            ("kicks", "initial"),
        )
        out["kicks"] = _int(f"{path}.kicks", blk["kicks"], lo=0)
        out["snapshots"] = sorted(
            set(_int_list(f"{path}.snapshots", blk.get("snapshots", [out["kicks"]]), lo=0))
        )
        out["initial"] = _validate_initial(
            f"{path}.initial", blk["initial"], ("plane-wave", "packet")
        )
        out["theta_bins"] = _int(f"{path}.theta_bins", blk.get("theta_bins", 128), lo=8)
        out["action_bins"] = _int(f"{path}.action_bins", blk.get("action_bins", 121), lo=8)
        out["action_half_width"] = _float(
            f"{path}.action_half_width", blk.get("action_half_width", 1.5), positive=True
        )
        center = blk.get("action_center", "mean")
        if center != "mean":
            center = _float(f"{path}.action_center", center)
        out["action_center"] = center
        out["span"] = _int(f"{path}.span", blk.get("span", 1024), lo=16)
    elif kind == "beta-scan":
        _check_keys(
            path,
            blk,
            (
                "beta_grid",
                "kicks",
                "n0",
                "mode",
                "box_width",
                "grid_size",
                "predictions_n_max",
                "span",
            ),
            (),
        )
        out["beta_grid"] = _grid(
            f"{path}.beta_grid", blk.get("beta_grid", {"start": 0.0, "stop": 1.0, "count": 64})
        )
        out["kicks"] = _int(f"{path}.kicks", blk.get("kicks", 100), lo=1)
        out["n0"] = _int(f"{path}.n0", blk.get("n0", 0))
        mode = blk.get("mode", [1, 1])
        if not isinstance(mode, list) or len(mode) != 2:
            _fail(f"{path}.mode", "expected [r, s]")
        out["mode"] = [_int(f"{path}.mode[0]", mode[0]), _int(f"{path}.mode[1]", mode[1], lo=1)]
        out["box_width"] = _float(f"{path}.box_width", blk.get("box_width", 6.0), positive=True)
        out["grid_size"] = _int(f"{path}.grid_size", blk.get("grid_size", 1024), lo=256)
        out["predictions_n_max"] = _int(
            f"{path}.predictions_n_max", blk.get("predictions_n_max", 4), lo=0
        )
        out["span"] = _int(f"{path}.span", blk.get("span", 1024), lo=16)
    else:  # pragma: no cover - kinds checked upstream
        _fail("kind", f"unhandled kind {kind!r}")
    return out


@dataclass
class RunConfig:
    """A validated experiment description."""

    kind: str
    seed: int
    system: dict | None
    experiment: dict

    def as_dict(self) -> dict:
        doc = {"kind": self.kind, "seed": self.seed, "experiment": self.experiment}
        if self.system is not None:
            doc["system"] = self.system
        return doc

    def system_params(
        self,
        tau_over_2pi: float | None = None,
        beta: float | None = None,
        kick_strength: float | None = None,
    ) -> SystemParams:
        """SystemParams from the system block, with optional overrides."""
        if self.system is None:
            raise ConfigError(f"kind {self.kind} carries no system block")
        sys = self.system
        tau = tau_over_2pi if tau_over_2pi is not None else sys.get("tau_over_2pi")
        if tau is None:
            raise ConfigError("tau_over_2pi neither configured nor supplied")
        k = kick_strength if kick_strength is not None else sys.get("kick_strength")
        if k is None:
            raise ConfigError("kick_strength neither configured nor supplied")
        b = beta if beta is not None else sys.get("beta")
        return build_params(
            k=k,
            tau_over_2pi=tau,
            g=sys["gravity"],
            p=sys["p"],
            q=sys["q"],
            nu=sys["nu"],
            beta=b,
        )


def validate_config(doc) -> RunConfig:
    """Validate a parsed YAML document into a RunConfig (fills defaults)."""
    blk = _block("top-level", doc)
    _check_keys("top-level", blk, ("kind", "seed", "system", "experiment"), ("kind", "seed", "experiment"))
    kind = _enum("kind", blk["kind"], KINDS)
    seed = _int("seed", blk["seed"], lo=0)
    if kind == "farey":
        if "system" in blk:
            _fail("system", "kind farey takes no system block (p/q come from experiment.resonances)")
        system = None
    else:
        if "system" not in blk:
            _fail("top-level", "missing required keys ['system']")
        system = _validate_system(kind, blk["system"])
    experiment = _validate_experiment(kind, blk["experiment"])
    return RunConfig(kind=kind, seed=seed, system=system, experiment=experiment)


def load_config(path: Path) -> RunConfig:
    """Read and validate a YAML config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return validate_config(doc)
