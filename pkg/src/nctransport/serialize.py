"""JSON formats for polynomials, tensors, and reports.

Reports are emitted with a fixed key order (insertion order of the dicts
built by the callers) and floats printed with 17 significant digits, so an
identical configuration produces a byte-identical report.  Complex numbers
are {"re": ..., "im": ...} objects.
"""

from __future__ import annotations

import json
from typing import Any

from .ncpoly import NCPoly
from .tensor import TensorPoly


def poly_to_terms(P: NCPoly) -> list[dict]:
    """Polynomial file format: [{"indices": [...], "re": ..., "im": ...}]."""
    terms = []
    for w in sorted(P.coeffs, key=lambda w: (len(w), w)):
        c = P.coeffs[w]
        terms.append({"indices": list(w), "re": c.real, "im": c.imag})
    return terms


def poly_from_terms(num_vars: int, terms, cap: int) -> NCPoly:
    coeffs = {}
    for t in terms:
        w = tuple(int(i) for i in t["indices"])
        for j in w:
            if not 1 <= j <= num_vars:
                raise ValueError(f"index {j} outside 1..{num_vars}")
        coeffs[w] = coeffs.get(w, 0.0) + complex(
            float(t.get("re", 0.0)), float(t.get("im", 0.0))
        )
    return NCPoly(num_vars, coeffs, cap)


def tensor_to_terms(T: TensorPoly) -> list[dict]:
    """Tensor file format: [{"left": [...], "right": [...], "re":, "im":}]."""
    terms = []
    for a, b in sorted(T.coeffs, key=lambda p: (len(p[0]) + len(p[1]), p)):
        c = T.coeffs[(a, b)]
        terms.append({"left": list(a), "right": list(b), "re": c.real, "im": c.imag})
    return terms


def tensor_from_terms(num_vars: int, terms, cap: int) -> TensorPoly:
    coeffs = {}
    for t in terms:
        a = tuple(int(i) for i in t["left"])
        b = tuple(int(i) for i in t["right"])
        coeffs[(a, b)] = coeffs.get((a, b), 0.0) + complex(
            float(t.get("re", 0.0)), float(t.get("im", 0.0))
        )
    return TensorPoly(num_vars, coeffs, cap)


def _fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x in (float("inf"), float("-inf")):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def dumps_report(obj: Any, indent: int = 0) -> str:
    """Serialize with deterministic float formatting and key order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {dumps_report(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, complex):
        return dumps_report({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps_report(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    return json.dumps(obj)


def sanitize(obj: Any) -> Any:
    """Recursively convert numpy scalars and complexes to plain types."""
    import numpy as np

    if isinstance(obj, dict):
        return {k: sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.complexfloating,)):
        return complex(obj)
    return obj
