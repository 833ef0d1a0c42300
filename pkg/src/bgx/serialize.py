"""The on-disk module format: a small JSON document.

    {
      "name": "G(2)",
      "algebra": "A",                       # A | E<h> | A1
      "degrees": {"min": 1, "max": 2},
      "dims": {"1": 1, "2": 1},
      "basis": {"1": ["Sq(1)"], "2": ["Sq()"]},
      "actions": {"Sq1": {"2": [[1]]}}      # rows = source basis at the
    }                                       # degree, cols = target basis

Action keys are "Sq<i>" for modules over all of A and over A(1), and
"Q<j>" (the Milnor primitives) for modules over E(h).  Zero matrices are
omitted; canonical output is sorted, two-space indented JSON with a
trailing newline, so canonicalization is byte-stable.
"""

from __future__ import annotations

import json

from .errors import SchemaViolation
from .f2 import BitMatrix
from .amodule import AModule, make_module, validate_module
from .steenrod import AlgebraSpec, milnor_degree

__all__ = [
    "module_to_doc",
    "doc_to_module",
    "dumps_canonical",
    "loads_module",
    "dump_module",
]


def module_to_doc(m: AModule) -> dict:
    doc = {
        "name": m.name,
        "algebra": m.algebra.name,
        "degrees": {"min": m.dmin, "max": m.dmax},
        "dims": {str(d): m.dim(d) for d in sorted(m.labels)},
        "basis": {str(d): list(m.labels[d]) for d in sorted(m.labels)},
        "actions": {},
    }
    if m.truncation is not None:
        doc["truncation"] = m.truncation
    for (g, d), mat in sorted(m.action.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        key = m.algebra.gen_key(g)
        doc["actions"].setdefault(key, {})[str(d)] = mat.to_lists()
    return doc


def _expect(cond, pointer, msg):
    if not cond:
        raise SchemaViolation("%s: %s" % (pointer, msg))


def _normalize_label(label: str) -> str:
    """Milnor-profile labels are canonicalized (trailing zeros dropped)."""
    if label.startswith("Sq(") and label.endswith(")"):
        from .steenrod import milnor_str, parse_milnor

        try:
            return milnor_str(parse_milnor(label))
        except SchemaViolation:
            return label
    return label


def doc_to_module(doc: dict, validate: bool = True) -> AModule:
    _expect(isinstance(doc, dict), "/", "document must be an object")
    for field in ("name", "algebra", "degrees", "dims", "basis", "actions"):
        _expect(field in doc, "/" + field, "missing field")
    algebra = AlgebraSpec.from_name(doc["algebra"])
    basis = {}
    for key, names in doc["basis"].items():
        _expect(key.lstrip("-").isdigit(), "/basis/" + key, "degree must be an integer")
        _expect(isinstance(names, list), "/basis/" + key, "label list expected")
        basis[int(key)] = [_normalize_label(str(s)) for s in names]
    for key, cnt in doc["dims"].items():
        d = int(key)
        _expect(
            len(basis.get(d, [])) == cnt,
            "/dims/" + key,
            "dims disagree with basis",
        )
    action = {}
    for gkey, per_degree in doc["actions"].items():
        g = algebra.parse_gen_key(gkey)
        gd = milnor_degree(g)
        for dkey, rows in per_degree.items():
            d = int(dkey)
            src = len(basis.get(d, []))
            tgt = len(basis.get(d - gd, []))
            _expect(
                isinstance(rows, list) and len(rows) == src,
                "/actions/%s/%s" % (gkey, dkey),
                "need %d rows" % src,
            )
            for i, row in enumerate(rows):
                _expect(
                    isinstance(row, list) and len(row) == tgt,
                    "/actions/%s/%s/%d" % (gkey, dkey, i),
                    "need %d columns" % tgt,
                )
                _expect(
                    all(v in (0, 1) for v in row),
                    "/actions/%s/%s/%d" % (gkey, dkey, i),
                    "entries must be bits",
                )
            action[(g, d)] = BitMatrix.from_lists(rows) if src else BitMatrix.zero(0, tgt)
    m = make_module(
        algebra,
        basis,
        action,
        str(doc["name"]),
        doc.get("truncation"),
    )
    if validate:
        bad = validate_module(m)
        if bad:
            raise SchemaViolation("module axioms fail: %s" % bad)
    return m


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads_module(text: str, validate: bool = True) -> AModule:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("not valid JSON: %s" % exc)
    return doc_to_module(doc, validate)


def dump_module(m: AModule) -> str:
    return dumps_canonical(module_to_doc(m))
