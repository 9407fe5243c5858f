"""Line-oriented text format for automata, properties, and orders.

One declaration per line; '#' starts a comment.  See docs/model-format.md
for the grammar.  A minimal document:

    pam 1
    state 0 init features d=[0,2) v=1.5
    state 1 labels collided
    trans 0 go@reach -> {1: 0.25, 0: 0.75}
    property bad=collided horizon=8
    order byd larger-safer key=d

Parsing and serialization round-trip exactly: serializing a parsed document
normalizes whitespace and number rendering (17 significant digits) while
preserving declaration order, so a second pass is byte-stable.  The JSON
form mirrors the same schema value for value.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Hashable, Mapping

from .mos import PartialOrder, extensional_order, product_order, toward_middle_order
from .pa import (PA, ActionLabel, INTERNAL, ModelError, PERCEPTION, REACHABILITY,
                 Distribution, unreachable_states, validate)
from .pmc import SafetyProperty

log = logging.getLogger(__name__)

FORMAT_NAME = "pam"
FORMAT_VERSION = 1
FILE_EXTENSION = ".pam"
MASS_TEXT_TOL = 1e-9

_ORIGIN_SUFFIX = {PERCEPTION: "per", REACHABILITY: "reach", INTERNAL: "int"}
_SUFFIX_ORIGIN = {v: k for k, v in _ORIGIN_SUFFIX.items()}


class ParseError(ModelError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


@dataclass(frozen=True)
class StateDecl:
    sid: int
    init: bool = False
    labels: tuple[str, ...] = ()
    features: tuple[tuple[str, Hashable], ...] | None = None


@dataclass(frozen=True)
class TransDecl:
    source: int
    action: str
    origin: str
    dests: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PropertyDecl:
    bad_label: str
    horizon: int | None = None


@dataclass(frozen=True)
class OrderDecl:
    name: str
    kind: str
    params: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ModelDocument:
    version: int
    states: tuple[StateDecl, ...]
    transitions: tuple[TransDecl, ...]
    property: PropertyDecl | None = None
    orders: tuple[OrderDecl, ...] = ()


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_INTERVAL_RE = re.compile(rf"^\[({_NUM}),({_NUM})\)$")
_DEST_RE = re.compile(rf"\s*(\d+)\s*:\s*({_NUM})\s*")


def _fmt_num(x: float) -> str:
    return f"{x:.17g}"


def _parse_feature_value(text: str) -> Hashable:
    m = _INTERVAL_RE.match(text)
    if m:
        return (float(m.group(1)), float(m.group(2)))
    try:
        return float(text)
    except ValueError:
        return text


def _fmt_feature_value(value: Hashable) -> str:
    if isinstance(value, tuple) and len(value) == 2:
        return f"[{_fmt_num(value[0])},{_fmt_num(value[1])})"
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return _fmt_num(float(value))
    return str(value)


def parse(text: str) -> ModelDocument:
    """Parse a document, reporting the first error with line and column."""
    states: list[StateDecl] = []
    transitions: list[TransDecl] = []
    prop: PropertyDecl | None = None
    orders: list[OrderDecl] = []
    version: int | None = None
    seen_ids: set[int] = set()

    lines = text.splitlines()
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1

        def fail(message: str, at: int = col):
            raise ParseError(ln, at, message)

        tokens = line.split()
        head = tokens[0]

        if version is None:
            if head != FORMAT_NAME or len(tokens) != 2 or not tokens[1].isdigit():
                fail(f"expected header '{FORMAT_NAME} <version>'")
            version = int(tokens[1])
            if version != FORMAT_VERSION:
                fail(f"unsupported format version {version}")
            continue

        if head == "state":
            if len(tokens) < 2 or not tokens[1].isdigit():
                fail("state declaration needs a numeric id")
            sid = int(tokens[1])
            if sid in seen_ids:
                fail(f"state {sid} declared twice")
            seen_ids.add(sid)
            init = False
            labels: tuple[str, ...] = ()
            feats: list[tuple[str, Hashable]] | None = None
            i = 2
            while i < len(tokens):
                if tokens[i] == "init":
                    init = True
                    i += 1
                elif tokens[i] == "labels":
                    if i + 1 >= len(tokens):
                        fail("'labels' needs a comma-separated list")
                    labels = tuple(x for x in tokens[i + 1].split(",") if x)
                    i += 2
                elif tokens[i] == "features":
                    feats = []
                    i += 1
                    while i < len(tokens):
                        if "=" not in tokens[i]:
                            fail(f"feature '{tokens[i]}' is not name=value",
                                 line.find(tokens[i]) + 1)
                        name, value = tokens[i].split("=", 1)
                        feats.append((name, _parse_feature_value(value)))
                        i += 1
                else:
                    fail(f"unexpected token '{tokens[i]}'", line.find(tokens[i]) + 1)
            states.append(StateDecl(sid, init, labels,
                                    tuple(feats) if feats is not None else None))

        elif head == "trans":
            m = re.match(r"\s*trans\s+(\d+)\s+(\S+)\s*->\s*\{(.*)\}\s*$", line)
            if not m:
                fail("transition must be 'trans <state> <action> -> {dest: prob, ...}'")
            source = int(m.group(1))
            action = m.group(2)
            origin = INTERNAL
            if "@" in action:
                action, suffix = action.rsplit("@", 1)
                if suffix not in _SUFFIX_ORIGIN:
                    fail(f"unknown action origin '@{suffix}'", line.find("@") + 1)
                origin = _SUFFIX_ORIGIN[suffix]
            body = m.group(3)
            dests: list[tuple[int, float]] = []
            for part in body.split(","):
                dm = _DEST_RE.fullmatch(part)
                if not dm:
                    fail(f"bad destination entry '{part.strip()}'", line.find("{") + 1)
                dests.append((int(dm.group(1)), float(dm.group(2))))
            if not dests:
                fail("transition needs at least one destination", line.find("{") + 1)
            mass = sum(p for _, p in dests)
            if abs(mass - 1.0) > MASS_TEXT_TOL:
                fail(f"distribution mass {mass!r} != 1", line.find("{") + 1)
            transitions.append(TransDecl(source, action, origin, tuple(dests)))

        elif head == "property":
            if prop is not None:
                fail("only one property block is allowed")
            bad = None
            horizon = None
            for tok in tokens[1:]:
                if tok.startswith("bad="):
                    bad = tok[4:]
                elif tok.startswith("horizon="):
                    if not tok[8:].isdigit():
                        fail("horizon must be a non-negative integer",
                             line.find(tok) + 1)
                    horizon = int(tok[8:])
                else:
                    fail(f"unexpected token '{tok}'", line.find(tok) + 1)
            if not bad:
                fail("property needs bad=<label>")
            prop = PropertyDecl(bad, horizon)

        elif head == "order":
            if len(tokens) < 3:
                fail("order declaration needs a name and a kind")
            # key=value parameters vs bare specs (e.g. pair entries "1>=2")
            params = tuple(
                tuple(t.split("=", 1)) if "=" in t and ">=" not in t else ("", t)
                for t in tokens[3:])
            orders.append(OrderDecl(tokens[1], tokens[2], params))

        else:
            fail(f"unknown declaration '{head}'")

    if version is None:
        raise ParseError(1, 1, "empty document")

    by_id = {s.sid for s in states}
    for t in transitions:
        if t.source not in by_id:
            raise ParseError(1, 1, f"transition from undeclared state {t.source}")
        for d, _ in t.dests:
            if d not in by_id:
                raise ParseError(1, 1, f"transition to undeclared state {d}")
    seen_sa = set()
    for t in transitions:
        key = (t.source, t.action, t.origin)
        if key in seen_sa:
            raise ParseError(1, 1, f"duplicate transition ({t.source}, {t.action})")
        seen_sa.add(key)

    inits = [s.sid for s in states if s.init]
    if len(inits) != 1:
        raise ParseError(1, 1, f"exactly one state must be marked init (found {len(inits)})")

    return ModelDocument(version, tuple(sorted(states, key=lambda s: s.sid)),
                         tuple(transitions), prop, tuple(orders))


def serialize(doc: ModelDocument) -> str:
    """Canonical text rendering: declaration order kept, numbers normalized."""
    out = [f"{FORMAT_NAME} {doc.version}"]
    for s in doc.states:
        parts = [f"state {s.sid}"]
        if s.init:
            parts.append("init")
        if s.labels:
            parts.append("labels " + ",".join(sorted(s.labels)))
        if s.features is not None:
            parts.append("features " + " ".join(
                f"{k}={_fmt_feature_value(v)}" for k, v in s.features))
        out.append(" ".join(parts))
    for t in doc.transitions:
        suffix = "" if t.origin == INTERNAL else "@" + _ORIGIN_SUFFIX[t.origin]
        dests = ", ".join(f"{d}: {_fmt_num(p)}" for d, p in t.dests)
        out.append(f"trans {t.source} {t.action}{suffix} -> {{{dests}}}")
    if doc.property is not None:
        line = f"property bad={doc.property.bad_label}"
        if doc.property.horizon is not None:
            line += f" horizon={doc.property.horizon}"
        out.append(line)
    for o in doc.orders:
        params = " ".join(v if not k else f"{k}={v}" for k, v in o.params)
        out.append(f"order {o.name} {o.kind}" + (f" {params}" if params else ""))
    return "\n".join(out) + "\n"


def _lower_order(decl: OrderDecl) -> PartialOrder:
    params = dict(decl.params)
    if decl.kind == "larger-safer":
        return product_order(decl.name, [(params["key"], "larger")])
    if decl.kind == "smaller-safer":
        return product_order(decl.name, [(params["key"], "smaller")])
    if decl.kind == "toward-middle":
        return toward_middle_order(decl.name, params["key"], float(params["middle"]))
    if decl.kind == "product":
        comps = []
        for _, spec in decl.params:
            bits = spec.split(":")
            if len(bits) == 2:
                comps.append((bits[0], bits[1]))
            elif len(bits) == 3 and bits[1] == "middle":
                comps.append((bits[0], ("middle", float(bits[2]))))
            else:
                raise ModelError(f"order {decl.name}: bad component '{spec}'")
        return product_order(decl.name, comps)
    if decl.kind == "pairs":
        pairs = []
        for _, spec in decl.params:
            if ">=" not in spec:
                raise ModelError(f"order {decl.name}: bad pair '{spec}'")
            a, b = spec.split(">=", 1)
            pairs.append((int(a), int(b)))
        return extensional_order(decl.name, pairs, key="_id")
    raise ModelError(f"unknown order kind '{decl.kind}'")


def lower(doc: ModelDocument) -> tuple[PA, SafetyProperty | None, dict[str, PartialOrder]]:
    """Build the automaton (validated), the property, and the named orders.

    State ids must be dense.  Every state gets a private "_id" feature so
    extensional (pairs) orders apply regardless of declared features.
    """
    n = len(doc.states)
    ids = [s.sid for s in doc.states]
    if ids != list(range(n)):
        raise ModelError("state ids must be dense 0..n-1")

    features = []
    labels = []
    init = 0
    for s in doc.states:
        labels.append(frozenset(s.labels))
        feats = dict(s.features) if s.features is not None else {}
        feats["_id"] = s.sid
        features.append(feats)
        if s.init:
            init = s.sid

    transitions = []
    for t in doc.transitions:
        transitions.append((t.source, ActionLabel(t.action, t.origin),
                            Distribution.of(t.dests)))

    pa = PA.build(n_states=n, initial=init, transitions=transitions,
                  labels=labels, features=features,
                  state_names=[f"s{i}" for i in range(n)])
    problems = validate(pa)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))
    orphans = unreachable_states(pa)
    if orphans:
        log.warning("model declares %d unreachable state(s): %s",
                    len(orphans), ", ".join(map(str, orphans[:8])))

    prop = None
    if doc.property is not None:
        prop = SafetyProperty(doc.property.bad_label, doc.property.horizon)
    orders = {o.name: _lower_order(o) for o in doc.orders}
    return pa, prop, orders


def to_json_obj(doc: ModelDocument) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": doc.version,
        "states": [
            {"id": s.sid, "init": s.init, "labels": list(s.labels),
             "features": None if s.features is None else
             [[k, list(v) if isinstance(v, tuple) else v] for k, v in s.features]}
            for s in doc.states],
        "transitions": [
            {"source": t.source, "action": t.action, "origin": t.origin,
             "dests": [[d, p] for d, p in t.dests]}
            for t in doc.transitions],
        "property": None if doc.property is None else
        {"bad": doc.property.bad_label, "horizon": doc.property.horizon},
        "orders": [{"name": o.name, "kind": o.kind,
                    "params": [[k, v] for k, v in o.params]} for o in doc.orders],
    }


def from_json_obj(obj: Mapping) -> ModelDocument:
    if obj.get("format") != FORMAT_NAME:
        raise ModelError("not a model document")
    states = tuple(
        StateDecl(s["id"], s.get("init", False), tuple(s.get("labels", ())),
                  None if s.get("features") is None else
                  tuple((k, tuple(v) if isinstance(v, list) else v)
                        for k, v in s["features"]))
        for s in obj["states"])
    transitions = tuple(
        TransDecl(t["source"], t["action"], t["origin"],
                  tuple((int(d), float(p)) for d, p in t["dests"]))
        for t in obj["transitions"])
    prop = None
    if obj.get("property"):
        prop = PropertyDecl(obj["property"]["bad"], obj["property"].get("horizon"))
    orders = tuple(OrderDecl(o["name"], o["kind"],
                             tuple((k, v) for k, v in o.get("params", ())))
                   for o in obj.get("orders", ()))
    return ModelDocument(obj["version"], states, transitions, prop, orders)


def document_from_pa(pa: PA, prop: SafetyProperty | None = None,
                     orders: tuple[OrderDecl, ...] = ()) -> ModelDocument:
    """Export an automaton (features stringified where not numeric)."""
    states = []
    for s in pa.states:
        feats = pa.features[s]
        decl_feats = None
        if feats is not None:
            decl_feats = tuple(
                (k, v if isinstance(v, (int, float, tuple)) and not isinstance(v, bool)
                 else str(v))
                for k, v in sorted(feats.items()))
        states.append(StateDecl(s, s == pa.initial, tuple(sorted(pa.labels[s])),
                                decl_feats))
    transitions = tuple(
        TransDecl(src, a.name, a.origin, tuple(d.support))
        for src, a, d in pa.transitions)
    prop_decl = None
    if prop is not None:
        prop_decl = PropertyDecl(prop.bad_label, prop.horizon)
    return ModelDocument(FORMAT_VERSION, tuple(states), transitions, prop_decl, orders)
