"""Scenario files: INI sections with JSON-encoded list values.

Example::

    [graph]
    n_agents = 3
    edges = [[1, 2], [2, 3]]

    [potential]
    kind = piecewise_nl

    [controller]
    R = 2.0
    R_tilde = max
    delta = auto

    [disturbance]
    kind = adversarial

    [sim]
    t_end = 10
    positions = [[0, 0], [0.5, 0], [1.0, 0]]

Agents are numbered from 1 in files. ``ROBCONN_SEED`` overrides ``sim.seed``.
"""
from __future__ import annotations

import configparser
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .controllers import ControllerParams, DomainParams, PowerShape, builtin_potential, compute_K, delta_bound, \
    max_R_tilde
from .errors import ConfigInvalid
from .graph import AgentNetwork, complete_graph, from_edges, path_graph, ring_graph, star_graph
from .potentials import Potential, TablePotential
from .simulator import DisturbanceSpec, SimConfig, ich_initial_state

SEED_ENV = "ROBCONN_SEED"
REQUIRED = object()
TOPOLOGIES = {"complete": complete_graph, "path": path_graph, "ring": ring_graph, "star": star_graph}


def _num_or(word):
    def parse(text):
        text = text.strip()
        return word if text.lower() == word else float(text)
    parse.__name__ = f"float_or_{word}"
    return parse


def _choice(*options):
    def parse(text):
        text = text.strip().lower()
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return parse


def _int(text):
    return int(text.strip())


def _json(text):
    return json.loads(text)


def _str(text):
    return text.strip()


def _direction(text):
    text = text.strip()
    return "random" if text.lower() == "random" else [float(v) for v in json.loads(text)]


# section -> key -> (parser, default)
SCHEMA = {
    "graph": {"n_agents": (_int, None), "edges": (_json, None), "topology": (_choice(*TOPOLOGIES), None)},
    "potential": {"kind": (_choice("linear", "piecewise_nl", "custom"), REQUIRED), "table": (_str, None)},
    "controller": {"R": (float, REQUIRED), "R_tilde": (_num_or("max"), "max"), "delta": (_num_or("auto"), "auto"),
                   "delta_scale": (float, 1.0)},
    "domain": {"radius": (float, REQUIRED), "epsilon": (float, REQUIRED), "c": (float, 2.0),
               "h": (_choice("identity", "power"), "identity"), "h_exponent": (float, 1.0)},
    "disturbance": {"kind": (_choice("zero", "constant", "sinusoid", "random", "adversarial"), "zero"),
                    "magnitude": (_num_or("delta"), "delta"), "frequency": (float, 1.0), "hold": (float, 0.1),
                    "direction": (_direction, "random")},
    "sim": {"t_end": (float, REQUIRED), "dt": (_num_or("auto"), "auto"), "seed": (_int, 0),
            "output": (_str, "trace.csv"), "initial": (_choice("positions", "random"), "positions"),
            "positions": (_json, None), "dim": (_int, None), "fill": (float, 1.0)},
}
OPTIONAL_SECTIONS = {"domain"}


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return json.dumps(value)
    return str(value)


@dataclass
class Scenario:
    values: dict  # section -> key -> parsed value, defaults filled
    base_dir: Path

    @property
    def seed(self) -> int:
        return int(self.values["sim"]["seed"])

    @property
    def output(self) -> Path:
        return Path(self.values["sim"]["output"])

    def network(self) -> AgentNetwork:
        g = self.values["graph"]
        if g["topology"] is not None:
            if g["n_agents"] is None:
                raise ConfigInvalid("[graph] topology needs n_agents")
            return TOPOLOGIES[g["topology"]](g["n_agents"])
        pairs = g["edges"]
        n_agents = g["n_agents"] if g["n_agents"] is not None else max(max(p) for p in pairs)
        try:
            return from_edges(n_agents, [(int(a) - 1, int(b) - 1) for a, b in pairs])
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"[graph] edges: {exc}") from exc

    def domain(self) -> DomainParams | None:
        d = self.values.get("domain")
        if d is None:
            return None
        h = PowerShape(1.0 if d["h"] == "identity" else d["h_exponent"])
        return DomainParams(d["radius"], d["epsilon"], d["c"], h)

    def build(self) -> SimConfig:
        """Objects for the scenario. Raises ``DisconnectedError`` for a
        disconnected graph and ``ConfigInvalid``/``ValueError`` for bad values;
        does not enforce the initial-state hypotheses (see ``SimConfig.validate``)."""
        v = self.values
        net = self.network()
        case = v["potential"]["kind"]
        R = v["controller"]["R"]
        table: Potential | None = None
        if case == "custom":
            path = Path(v["potential"]["table"])
            table = TablePotential.from_csv(path if path.is_absolute() else self.base_dir / path)
        K = compute_K(net)
        Rt = v["controller"]["R_tilde"]
        Rt = max_R_tilde(case, R, net.n_edges, table) if Rt == "max" else Rt
        pot = table if table is not None else builtin_potential(case, R, Rt)
        delta = v["controller"]["delta"]
        delta = delta_bound(case, Rt, K, pot) if delta == "auto" else delta
        delta *= v["controller"]["delta_scale"]
        params = ControllerParams(R=R, R_tilde=Rt, K=K, delta=delta, case=case)
        dom = self.domain()

        d = v["disturbance"]
        disturbance = DisturbanceSpec(
            kind=d["kind"], magnitude=None if d["magnitude"] == "delta" else d["magnitude"], seed=self.seed,
            frequency=d["frequency"], hold=d["hold"],
            direction=None if d["direction"] == "random" else tuple(d["direction"]))

        s = v["sim"]
        if s["initial"] == "random":
            if s["dim"] is None:
                raise ConfigInvalid("[sim] initial = random needs dim")
            rng = np.random.default_rng([self.seed, 1])
            x0 = ich_initial_state(net, s["dim"], Rt, rng, fill=s["fill"], domain=dom)
        else:
            if s["positions"] is None:
                raise ConfigInvalid("[sim] needs positions (or initial = random)")
            x0 = np.asarray(s["positions"], dtype=float)
            if x0.ndim != 2 or x0.shape[0] != net.n_agents:
                raise ConfigInvalid(f"[sim] positions must be a list of {net.n_agents} coordinate lists")
        dt = None if s["dt"] == "auto" else s["dt"]
        return SimConfig(net=net, pot=pot, params=params, x0=x0, disturbance=disturbance,
                         t_end=s["t_end"], dt=dt, domain=dom)

    def dump(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for section, keys in SCHEMA.items():
            if section not in self.values:
                continue
            cp[section] = {k: _format(self.values[section][k]) for k in keys
                           if self.values[section][k] is not None}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def parse_scenario(text: str, base_dir: Path | str = ".") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigInvalid(f"cannot parse scenario: {exc}") from exc
    unknown = set(cp.sections()) - set(SCHEMA)
    if unknown:
        raise ConfigInvalid(f"unknown section(s): {sorted(unknown)}")
    values = {}
    for section, keys in SCHEMA.items():
        if section not in cp:
            if section in OPTIONAL_SECTIONS:
                continue
            raise ConfigInvalid(f"missing section [{section}]")
        raw = cp[section]
        extra = set(raw) - set(keys)
        if extra:
            raise ConfigInvalid(f"[{section}] unknown key(s): {sorted(extra)}")
        parsed = {}
        for key, (parser, default) in keys.items():
            if key in raw:
                try:
                    parsed[key] = parser(raw[key])
                except (ValueError, TypeError) as exc:
                    raise ConfigInvalid(f"[{section}] {key}: {exc}") from exc
            elif default is REQUIRED:
                raise ConfigInvalid(f"[{section}] missing required key {key!r}")
            else:
                parsed[key] = default
        values[section] = parsed
    g = values["graph"]
    if (g["edges"] is None) == (g["topology"] is None):
        raise ConfigInvalid("[graph] give exactly one of edges or topology")
    if values["potential"]["kind"] == "custom" and not values["potential"]["table"]:
        raise ConfigInvalid("[potential] kind = custom needs table = <csv path>")
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["sim"]["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigInvalid(f"{SEED_ENV} must be an integer") from exc
    return Scenario(values, Path(base_dir))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text, path.parent)
