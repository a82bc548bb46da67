"""Instance configuration files: schema validation and object construction.

A config is a single YAML document with a ``graph`` section, either an
``ensemble`` section (per-node poles and disturbances) or a ``microgrid``
section (local feedback gains and nominal injections), a ``gains`` section,
and an optional ``sim`` section. Unknown keys are rejected so typos fail
loudly instead of silently using defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError, PidnetError
from .netmodel import ClosedLoopSystem, Gains, Instance, NodeEnsemble
from .sim import MicrogridScenario, SimConfig, build_microgrid, default_x0
from .spectral import Graph


def _require_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(section: dict, allowed: set[str], path: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})")


def _number(section: dict, key: str, path: str, required: bool = True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}: missing required value")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def _vector(section: dict, key: str, path: str, n: int) -> np.ndarray:
    if key not in section:
        raise ConfigError(f"{path}.{key}: missing required list")
    val = section[key]
    if not isinstance(val, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
    ):
        raise ConfigError(f"{path}.{key}: expected a list of numbers")
    if len(val) != n:
        raise ConfigError(f"{path}.{key}: expected {n} entries, got {len(val)}")
    return np.asarray(val, dtype=float)


def _parse_graph(section: dict) -> Graph:
    _check_keys(section, {"nodes", "edges"}, "graph")
    if "nodes" not in section or not isinstance(section["nodes"], int) or isinstance(section["nodes"], bool):
        raise ConfigError("graph.nodes: expected a positive integer")
    edges_raw = section.get("edges")
    if not isinstance(edges_raw, list):
        raise ConfigError("graph.edges: expected a list of {i, j, w} mappings")
    edges = []
    for idx, item in enumerate(edges_raw):
        entry = _require_mapping(item, f"graph.edges[{idx}]")
        _check_keys(entry, {"i", "j", "w"}, f"graph.edges[{idx}]")
        for key in ("i", "j"):
            if key not in entry or not isinstance(entry[key], int) or isinstance(entry[key], bool):
                raise ConfigError(f"graph.edges[{idx}].{key}: expected a 0-based node index")
        w = _number(entry, "w", f"graph.edges[{idx}]")
        edges.append((entry["i"], entry["j"], w))
    try:
        return Graph(node_count=section["nodes"], edges=tuple(edges))
    except PidnetError as exc:
        raise ConfigError(f"graph: {exc}") from exc


@dataclass(frozen=True)
class InstanceConfig:
    """Validated configuration: graph, agent data, gains, sim settings."""

    graph: Graph
    rho: np.ndarray
    delta: np.ndarray
    gains: Gains
    microgrid: bool
    dt: float | None
    t_end: float
    x0: np.ndarray | None
    x0_scale: float
    record_stride: int

    def instance(self) -> Instance:
        return Instance.from_graph(self.graph, self.rho, self.delta)

    def system(self) -> ClosedLoopSystem:
        if self.microgrid:
            scenario = MicrogridScenario(
                graph=self.graph,
                local_gains=self.rho,
                injections=self.delta,
                gains=self.gains,
            )
            return build_microgrid(scenario)
        from .netmodel import assemble_instance

        return assemble_instance(self.instance(), self.gains)

    def sim_config(self) -> SimConfig:
        x0 = self.x0 if self.x0 is not None else default_x0(self.graph.node_count, self.x0_scale)
        return SimConfig(
            t_end=self.t_end, dt=self.dt, x0=x0, record_stride=self.record_stride
        )


def parse_config(text: str) -> InstanceConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    doc = _require_mapping(doc, "config")
    _check_keys(doc, {"graph", "ensemble", "microgrid", "gains", "sim"}, "config")

    graph = _parse_graph(_require_mapping(doc.get("graph"), "graph"))
    n = graph.node_count

    has_ensemble = "ensemble" in doc
    has_microgrid = "microgrid" in doc
    if has_ensemble == has_microgrid:
        raise ConfigError("config: exactly one of 'ensemble' or 'microgrid' is required")
    if has_ensemble:
        section = _require_mapping(doc["ensemble"], "ensemble")
        _check_keys(section, {"rho", "delta"}, "ensemble")
        rho = _vector(section, "rho", "ensemble", n)
        delta = _vector(section, "delta", "ensemble", n)
    else:
        section = _require_mapping(doc["microgrid"], "microgrid")
        _check_keys(section, {"k", "p_star"}, "microgrid")
        rho = _vector(section, "k", "microgrid", n)
        delta = _vector(section, "p_star", "microgrid", n)

    gains_raw = _require_mapping(doc.get("gains"), "gains")
    _check_keys(gains_raw, {"alpha", "beta", "gamma"}, "gains")
    try:
        gains = Gains(
            alpha=_number(gains_raw, "alpha", "gains"),
            beta=_number(gains_raw, "beta", "gains", required=False, default=0.0),
            gamma=_number(gains_raw, "gamma", "gains", required=False, default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"gains: {exc}") from exc

    sim_raw = doc.get("sim", {})
    sim_raw = _require_mapping(sim_raw, "sim") if sim_raw else {}
    _check_keys(sim_raw, {"dt", "t_end", "x0", "x0_scale", "record_stride"}, "sim")
    dt = _number(sim_raw, "dt", "sim", required=False)
    t_end = _number(sim_raw, "t_end", "sim", required=False, default=30.0)
    x0 = _vector(sim_raw, "x0", "sim", n) if "x0" in sim_raw else None
    x0_scale = _number(sim_raw, "x0_scale", "sim", required=False, default=1.0)
    stride = sim_raw.get("record_stride", 1)
    if not isinstance(stride, int) or isinstance(stride, bool) or stride < 1:
        raise ConfigError("sim.record_stride: expected a positive integer")
    if dt is not None and dt <= 0:
        raise ConfigError("sim.dt: must be positive")
    if t_end <= 0:
        raise ConfigError("sim.t_end: must be positive")

    try:
        NodeEnsemble(rho=rho, delta=delta)  # dimension cross-check
    except PidnetError as exc:
        raise ConfigError(str(exc)) from exc

    return InstanceConfig(
        graph=graph,
        rho=rho,
        delta=delta,
        gains=gains,
        microgrid=has_microgrid,
        dt=dt,
        t_end=t_end,
        x0=x0,
        x0_scale=x0_scale,
        record_stride=stride,
    )


def load_config(path) -> InstanceConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)
