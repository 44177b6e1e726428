"""JSON documents for spaces, functions, operators and reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidSpec
from .operator import MatrixOperator, Symbol, WeightedComposition
from .space import Space


def _plain(obj):
    """Convert numpy scalars/arrays (and non-finite floats) into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(doc):
    return json.dumps(_plain(doc), indent=2, ensure_ascii=False) + "\n"


def write_json(doc, path=None):
    text = dumps(doc)
    if path is None:
        import sys

        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_space(doc_or_path):
    doc = read_json(doc_or_path) if isinstance(doc_or_path, (str, Path)) else doc_or_path
    return Space.from_dict(doc)


def operator_to_dict(T, *, embed_spaces=True):
    doc = {"domain_id": T.domain.name, "codomain_id": T.codomain.name, "backing": T.backing}
    if isinstance(T, WeightedComposition):
        doc["symbol"] = T.symbol.to_dict()
    else:
        doc["matrix"] = T.to_matrix().tolist()
    if embed_spaces:
        doc["spaces"] = {T.domain.name: T.domain.to_dict(), T.codomain.name: T.codomain.to_dict()}
    return doc


def operator_from_dict(doc, spaces=None):
    """Rebuild an operator; spaces come from ``spaces`` or the embedded map."""
    table = {}
    for sid, sdoc in (doc.get("spaces") or {}).items():
        table[sid] = Space.from_dict(sdoc)
    for s in spaces or ():
        table[s.name] = s
    try:
        X, Y = table[doc["domain_id"]], table[doc["codomain_id"]]
    except KeyError as e:
        raise InvalidSpec(f"space {e.args[0]!r} not available") from None
    backing = doc.get("backing")
    if backing == "wc":
        return WeightedComposition(X, Y, Symbol.from_dict(doc["symbol"]))
    if backing == "matrix":
        return MatrixOperator(X, Y, np.array(doc["matrix"], dtype=float))
    raise InvalidSpec(f"unknown backing {backing!r}")


def load_operator(path):
    return operator_from_dict(read_json(path))
