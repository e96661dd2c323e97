"""JSON scenario files: schema, validation and construction of :class:`Scenario`.

A file is validated in full before anything is built; unknown keys are
rejected. Agents, vertices and vector components are indexed from 0.
"""
import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import graphs as gr
from . import maps as mp
from .engine import DEFAULT_EPS, DEFAULT_HORIZON, Scenario
from .scenarios import random_linear_system


class ScenarioError(ValueError):
    """Malformed scenario file; the message names the offending line or field."""


@dataclass
class ScenarioFile:
    scenario: Scenario
    verify: list = field(default_factory=list)
    seed: int = 42


_NUM = {"type": ["number", "integer"]}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_INT = {"type": "integer"}
_POS = {"type": "number", "exclusiveMinimum": 0}


def _tagged(defs):
    """Schema for ``{"kind": ..., **fields}`` objects, one field set per kind."""
    branches = []
    for kind, (props, required) in defs.items():
        branches.append({
            "if": {"properties": {"kind": {"const": kind}}, "required": ["kind"]},
            "then": {
                "properties": {"kind": {"const": kind}, **props},
                "required": ["kind", *required],
                "additionalProperties": False,
            },
        })
    return {
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"enum": sorted(defs)}},
        "allOf": branches,
    }


_SET = _tagged({
    "halfspace": ({"a": _VEC, "c": _NUM}, ["a", "c"]),
    "ball": ({"center": _VEC, "radius": _NUM}, ["center", "radius"]),
    "box": ({"lo": _VEC, "hi": _VEC}, ["lo", "hi"]),
    "affine": ({"A": _MAT, "b": _VEC}, ["A", "b"]),
    "intersection": ({"sets": {"type": "array", "items": {"$ref": "#/$defs/set"}, "minItems": 1},
                      "witness": _VEC}, ["sets"]),
})

_OBJECTIVE = _tagged({
    "indicator": ({"set": {"$ref": "#/$defs/set"}}, ["set"]),
    "quadratic": ({"Q": _MAT, "c": _VEC}, ["Q"]),
    "l1": ({"weight": _POS, "dim": {"type": "integer", "minimum": 1}}, ["weight", "dim"]),
})

_OPERATOR = _tagged({
    "reflection": ({"set": {"$ref": "#/$defs/set"}}, ["set"]),
    "linear": ({"matrix": _MAT}, ["matrix"]),
})

_MAP = _tagged({
    "affine": ({"A": _MAT, "b": _VEC}, ["A", "b"]),
    "projector": ({"set": {"$ref": "#/$defs/set"}}, ["set"]),
    "gradient": ({"Q": _MAT, "c": _VEC, "alpha": _POS, "lambda": _POS}, ["Q"]),
    "proximal": ({"f": _OBJECTIVE, "step": _POS}, ["f"]),
    "averaged": ({"operator": _OPERATOR, "alpha": _POS}, ["operator", "alpha"]),
    "linear": ({"P": _MAT}, ["P"]),
    "composite": ({"maps": {"type": "array", "items": {"$ref": "#/$defs/map"}, "minItems": 1},
                   "witness": _VEC}, ["maps", "witness"]),
})

_GRAPH = {
    "oneOf": [
        {"enum": ["complete", "cycle", "self"]},
        {
            "type": "object",
            "properties": {"arcs": {"type": "array",
                                    "items": {"type": "array", "items": _INT,
                                              "minItems": 2, "maxItems": 2}}},
            "required": ["arcs"],
            "additionalProperties": False,
        },
    ]
}
_GRAPHS = {"type": "array", "items": {"$ref": "#/$defs/graph"}, "minItems": 1}

_SCHEDULE = _tagged({
    "constant": ({"graph": {"$ref": "#/$defs/graph"}}, ["graph"]),
    "periodic": ({"graphs": _GRAPHS}, ["graphs"]),
    "list": ({"graphs": _GRAPHS}, ["graphs"]),
    "random": ({"graphs": _GRAPHS, "seed": _INT}, ["graphs"]),
})

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"set": _SET, "map": _MAP, "graph": _GRAPH},
    "type": "object",
    "required": ["agents", "graph_schedule"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "agents": {
            "oneOf": [
                {"type": "array", "items": {"$ref": "#/$defs/map"}, "minItems": 1},
                {
                    "type": "object",
                    "properties": {
                        "generator": {"const": "random_linear_system"},
                        "n": {"type": "integer", "minimum": 1},
                        "rows_per_agent": {"type": "array", "minItems": 1,
                                           "items": {"type": "integer", "minimum": 1}},
                        "seed": _INT,
                    },
                    "required": ["generator"],
                    "additionalProperties": False,
                },
            ]
        },
        "graph_schedule": _SCHEDULE,
        "weights": {
            "type": "array",
            "items": {"type": "array", "prefixItems": [_INT, _INT, {"type": ["number", "string"]}],
                      "minItems": 3, "maxItems": 3},
        },
        "norm": {"type": "object", "properties": {"p": {"type": "number", "exclusiveMinimum": 1}},
                 "additionalProperties": False},
        "init": {
            "type": "object",
            "properties": {
                "x0": _MAT,
                "random": {"type": "object",
                           "properties": {"seed": _INT, "scale": _POS},
                           "additionalProperties": False},
            },
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
        },
        "run": {
            "type": "object",
            "properties": {"T": {"type": "integer", "minimum": 1},
                           "eps_consensus": _POS, "eps_residual": _POS, "seed": _INT},
            "additionalProperties": False,
        },
        "verify": {"type": "array", "items": {"type": "string"}},
        "witness": _VEC,
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _field(path):
    return "/".join(str(p) for p in path) or "<root>"


def parse_json(text, source="<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def validate(doc, source="<scenario>"):
    """Raise :class:`ScenarioError` listing every schema violation by field path."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        lines = []
        for err in errors:
            best = jsonschema.exceptions.best_match([err])
            lines.append(f"{source}: field {_field(best.absolute_path)}: {best.message}")
        raise ScenarioError("\n".join(lines))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_set(d):
    kind = d["kind"]
    if kind == "halfspace":
        return mp.Halfspace(d["a"], d["c"])
    if kind == "ball":
        return mp.Ball(d["center"], d["radius"])
    if kind == "box":
        return mp.Box(d["lo"], d["hi"])
    if kind == "affine":
        return mp.AffineSubspace(d["A"], d["b"])
    return mp.Intersection([build_set(s) for s in d["sets"]], witness=d.get("witness"))


def build_map(d):
    kind = d["kind"]
    if kind == "affine":
        return mp.AffineLinearSolve(d["A"], d["b"])
    if kind == "projector":
        return mp.Projector(build_set(d["set"]))
    if kind == "gradient":
        return mp.GradientDescent(d["Q"], d.get("c"), d.get("alpha"), d.get("lambda"))
    if kind == "proximal":
        f = d["f"]
        if f["kind"] == "indicator":
            obj = mp.Indicator(build_set(f["set"]))
        elif f["kind"] == "quadratic":
            obj = mp.Quadratic(f["Q"], f.get("c"))
        else:
            obj = mp.WeightedL1(f["weight"], f["dim"])
        return mp.Proximal(obj, d.get("step", 1.0))
    if kind == "averaged":
        op = d["operator"]
        N = mp.Reflection(build_set(op["set"])) if op["kind"] == "reflection" \
            else mp.LinearOperator(op["matrix"])
        return mp.Averaged(N, d["alpha"])
    if kind == "linear":
        return mp.LinearMap(d["P"])
    return mp.compose([build_map(s) for s in d["maps"]], d["witness"])


def build_graph(g, m):
    if g == "complete":
        return gr.DirectedGraph.complete(m)
    if g == "cycle":
        return gr.DirectedGraph.cycle(m)
    if g == "self":
        return gr.DirectedGraph.self_arcs_only(m)
    return gr.DirectedGraph.from_arcs(m, [tuple(a) for a in g["arcs"]])


def build_schedule(d, m, seed=42):
    kind = d["kind"]
    if kind == "constant":
        return gr.Constant(build_graph(d["graph"], m))
    graphs = [build_graph(g, m) for g in d["graphs"]]
    if kind == "periodic":
        return gr.PeriodicList(graphs)
    if kind == "list":
        return gr.FiniteList(graphs)
    return gr.SeededRandom(graphs, seed=d.get("seed", seed))


def _agents(doc):
    agents = doc["agents"]
    if isinstance(agents, list):
        return [build_map(a) for a in agents], None
    kw = {k: v for k, v in agents.items() if k != "generator"}
    if "rows_per_agent" in kw:
        kw["rows_per_agent"] = tuple(kw["rows_per_agent"])
    maps, _, _, x_true = random_linear_system(**kw)
    return maps, x_true


def scenario_from_dict(doc, source="<scenario>"):
    """Validate ``doc`` and build a :class:`ScenarioFile`; raise :class:`ScenarioError` on any problem."""
    validate(doc, source)
    try:
        run_opts = doc.get("run", {})
        seed = run_opts.get("seed", 42)
        maps, generated_witness = _agents(doc)
        m = len(maps)
        n = maps[0].dim
        schedule = build_schedule(doc["graph_schedule"], m, seed)
        init = doc.get("init", {"random": {}})
        if "x0" in init:
            x0 = np.array(init["x0"], dtype=float)
        else:
            r = init["random"]
            rng = np.random.default_rng(r.get("seed", seed + 1))
            x0 = r.get("scale", 10.0) * rng.standard_normal((m, n))
        weights = None
        if "weights" in doc:
            weights = {}
            for i, j, w in doc["weights"]:
                if (i, j) in weights:
                    raise ScenarioError(f"{source}: field weights: duplicate entry ({i}, {j})")
                weights[(i, j)] = w
        witness = doc.get("witness", generated_witness)
        sc = Scenario(
            maps=maps, schedule=schedule, x0=x0,
            horizon=run_opts.get("T", DEFAULT_HORIZON),
            eps_consensus=run_opts.get("eps_consensus", DEFAULT_EPS),
            eps_residual=run_opts.get("eps_residual", DEFAULT_EPS),
            p=doc.get("norm", {}).get("p", 2.0),
            weights=weights, witness=witness, name=doc.get("name", "scenario"),
        )
        if weights is not None:
            # every graph of the schedule must accept the weights
            from .matrices import stochastic_from_weights
            pool = getattr(schedule, "pool", None) or [schedule.graph(1)]
            for G in pool:
                stochastic_from_weights(G, weights)
    except ScenarioError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    return ScenarioFile(sc, list(doc.get("verify", [])), seed)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return scenario_from_dict(parse_json(text, str(path)), str(path))
