"""JSON persistence for machines and move sequences, plus DOT export."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema

from .colors import Mat, Perm, PowerProduct, Vec
from .machine import Agent, Component, Machine, MachineError
from .quandle import OpLabel, QuandleError, quandle_from_descriptor

SCHEMA_VERSION = "tanglekit/1"
OP_FAMILIES = ["linear", "loglinear", "conjugation", "table"]
FORWARD, BACKWARD = "v→w", "w→v"

_OP_SCHEMA = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": OP_FAMILIES},
        "s": {"type": ["string", "number"]},
        "table": {"type": "string"},
        "inverse": {"type": "boolean"},
    },
    "additionalProperties": False,
}

MACHINE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "quandle", "registers", "components", "agents"],
    "properties": {
        "schema": {"type": "string"},
        "quandle": {
            "type": "object",
            "required": ["family"],
            "properties": {"family": {"enum": OP_FAMILIES}},
        },
        "registers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {"id": {"type": "string"}, "color": {}},
                "additionalProperties": False,
            },
        },
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "registers"],
                "properties": {
                    "kind": {"enum": ["path", "cycle"]},
                    "registers": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                },
                "additionalProperties": False,
            },
        },
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["register", "op", "patients"],
                "properties": {
                    "register": {"type": "string"},
                    "op": _OP_SCHEMA,
                    "patients": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["edge", "direction"],
                            "properties": {
                                "edge": {"type": "array", "items": {"type": "string"},
                                         "minItems": 2, "maxItems": 2},
                                "direction": {"enum": [FORWARD, BACKWARD]},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "moves": {"type": "array", "items": {"type": "object", "required": ["kind", "register"]}},
    },
}


class DocumentError(ValueError):
    """Malformed machine document; ``pointer`` locates the offending value."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.detail = message


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


# -- colours -------------------------------------------------------------

def encode_color(c):
    if isinstance(c, bool):
        raise TypeError("bool is not a colour")
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, (int, float)):
        return c
    if isinstance(c, complex):
        return {"re": encode_color(c.real), "im": encode_color(c.imag)}
    if isinstance(c, Vec):
        return [encode_color(a) for a in c.items]
    if isinstance(c, Mat):
        return [[encode_color(a) for a in r] for r in c.rows]
    if isinstance(c, Perm):
        return {"perm": list(c.images)}
    if isinstance(c, PowerProduct):
        return {"pp": [[p, str(e)] for p, e in c.exponents]}
    if type(c).__module__.startswith("sympy"):
        return {"sym": str(c)}
    raise TypeError(f"cannot encode colour of type {type(c).__name__}")


def decode_color(x):
    if isinstance(x, bool):
        raise ValueError("bool is not a colour")
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, list):
        if x and all(isinstance(r, list) for r in x):
            return Mat([[decode_color(a) for a in r] for r in x])
        return Vec(decode_color(a) for a in x)
    if isinstance(x, dict):
        if "re" in x:
            return complex(float(decode_color(x["re"])), float(decode_color(x["im"])))
        if "perm" in x:
            return Perm(x["perm"])
        if "pp" in x:
            return PowerProduct({int(p): Fraction(e) for p, e in x["pp"]})
        if "sym" in x:
            import sympy

            return sympy.sympify(x["sym"])
    raise ValueError(f"unrecognized colour encoding {x!r}")


# -- operation labels ----------------------------------------------------

def op_from_json(d: dict) -> OpLabel:
    fam = d.get("family")
    if fam not in OP_FAMILIES:
        raise QuandleError(f"unknown op family {fam!r}")
    inverse = bool(d.get("inverse", False))
    if fam in ("linear", "loglinear"):
        s = d.get("s")
        if s is None:
            raise QuandleError(f"{fam} op needs a parameter 's'")
        return OpLabel(fam, Fraction(s) if isinstance(s, (str, int)) else float(s), inverse)
    if fam == "table":
        return OpLabel(fam, d.get("table"), inverse)
    return OpLabel(fam, None, inverse)


# -- documents -------------------------------------------------------------

@dataclass
class MachineDocument:
    machine: Machine
    moves: list = field(default_factory=list)
    schema: str = SCHEMA_VERSION


def to_json(m: Machine, moves=None) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "quandle": m.quandle.descriptor(),
        "registers": [],
        "components": [{"kind": c.kind, "registers": list(c.registers)} for c in m.components],
        "agents": [],
    }
    for r in m.registers:
        entry = {"id": r}
        if r in m.colors:
            entry["color"] = encode_color(m.colors[r])
        doc["registers"].append(entry)
    for u in m.registers:
        if u not in m.agents:
            continue
        ag = m.agents[u]
        doc["agents"].append({
            "register": u,
            "op": ag.op.to_json(),
            "patients": [{"edge": [t, m.next(t)], "direction": FORWARD if f == 1 else BACKWARD}
                         for t, f in ag.patients],
        })
    if moves:
        doc["moves"] = [s.to_json() for s in moves]
    return doc


def from_json(doc: dict) -> MachineDocument:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    version = doc.get("schema")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}", "/schema")
    errors = sorted(jsonschema.Draft202012Validator(MACHINE_SCHEMA).iter_errors(doc),
                    key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        msg = err.message
        path = list(err.absolute_path)
        if path and path[-1] == "family":
            msg = f"unknown op family {err.instance!r}" if path[0] == "agents" else f"unknown quandle family {err.instance!r}"
        raise DocumentError(msg, _pointer(path))
    try:
        q = quandle_from_descriptor(doc["quandle"])
    except (QuandleError, KeyError, TypeError, ValueError) as exc:
        raise DocumentError(str(exc), "/quandle") from None
    comps = [Component(c["kind"], c["registers"]) for c in doc["components"]]
    nexts = {}
    for c in comps:
        regs = c.registers
        for i, r in enumerate(regs):
            if i + 1 < len(regs):
                nexts[r] = regs[i + 1]
            elif c.kind == "cycle":
                nexts[r] = regs[0]
    agents = {}
    for ai, a in enumerate(doc["agents"]):
        base = f"/agents/{ai}"
        try:
            op = op_from_json(a["op"])
            q.check_op(op)
        except (QuandleError, ValueError) as exc:
            raise DocumentError(str(exc), base + "/op") from None
        pts = []
        for pi, p in enumerate(a["patients"]):
            v, w = p["edge"]
            if nexts.get(v) != w:
                raise DocumentError(f"{v!r} -> {w!r} is not an edge", f"{base}/patients/{pi}/edge")
            pts.append((v, 1 if p["direction"] == FORWARD else -1))
        if a["register"] in agents:
            raise DocumentError(f"agent {a['register']!r} listed twice", base + "/register")
        agents[a["register"]] = Agent(op, pts)
    colors = {}
    for ri, r in enumerate(doc["registers"]):
        if "color" in r:
            try:
                colors[r["id"]] = q.coerce(decode_color(r["color"]))
            except (ValueError, TypeError, QuandleError, ArithmeticError) as exc:
                raise DocumentError(str(exc), f"/registers/{ri}/color") from None
    declared = [r["id"] for r in doc["registers"]]
    listed = [r for c in comps for r in c.registers]
    if sorted(declared) != sorted(listed):
        raise DocumentError("registers must list exactly the registers of the components", "/registers")
    try:
        m = Machine(q, comps, agents, colors)
    except (MachineError, QuandleError) as exc:
        raise DocumentError(str(exc)) from None
    moves = []
    if "moves" in doc:
        from .moves import site_from_json

        for mi, d in enumerate(doc["moves"]):
            try:
                moves.append(site_from_json(d))
            except (ValueError, KeyError, QuandleError) as exc:
                raise DocumentError(str(exc), f"/moves/{mi}") from None
    return MachineDocument(m, moves)


def dumps(m: Machine, moves=None) -> str:
    return json.dumps(to_json(m, moves), indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Machine:
    return load_document_text(text).machine


def load_document_text(text: str) -> MachineDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return from_json(doc)


def load_document(path) -> MachineDocument:
    return load_document_text(Path(path).read_text(encoding="utf-8"))


def load(path) -> Machine:
    return load_document(path).machine


def save(m: Machine, path, moves=None) -> None:
    Path(path).write_text(dumps(m, moves), encoding="utf-8")


def load_moves(path) -> list:
    """A move list, either a bare JSON array or a document's ``moves`` attachment."""
    from .moves import site_from_json

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("moves", [])
    if not isinstance(data, list):
        raise DocumentError("expected a list of moves")
    out = []
    for i, d in enumerate(data):
        try:
            out.append(site_from_json(d))
        except (ValueError, KeyError, TypeError, QuandleError) as exc:
            raise DocumentError(str(exc), f"/{i}") from None
    return out


# -- DOT -------------------------------------------------------------------

def _label_color(c) -> str:
    e = encode_color(c)
    return e if isinstance(e, str) else json.dumps(e, separators=(",", ":"))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(m: Machine) -> str:
    """Graphviz text: solid process edges, dashed bold links from agents to their patients."""
    lines = ["digraph machine {", "  rankdir=LR;", "  node [shape=ellipse];"]
    for r in m.registers:
        parts = [r]
        if r in m.colors:
            parts.append(_label_color(m.colors[r]))
        if r in m.agents:
            parts.append(str(m.agents[r].op))
        attrs = f"label={_quote(chr(10).join(parts))}"
        if r in m.agents:
            attrs += ", penwidth=2"
        lines.append(f"  {_quote(r)} [{attrs}];")
    for t, h in m.edges():
        lines.append(f"  {_quote(t)} -> {_quote(h)} [style=solid];")
    for u in m.registers:
        if u not in m.agents:
            continue
        for t, f in m.agents[u].patients:
            lab = f"{t}->{m.next(t)}" + ("" if f == 1 else " (inv)")
            lines.append(f"  {_quote(u)} -> {_quote(t)} [style=\"dashed,bold\", arrowhead=dot, "
                         f"label={_quote(lab)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
