"""Decomposition and trace files, and atomic writes.

Surface files live in :mod:`pantsdecomp.surface`.  Every float written by
this package carries 9 significant digits.
"""
from __future__ import annotations

import json
import math
import os
import tempfile

from .algorithm import PantsDecomposition, StepRecord
from .surface import SurfaceError


class FormatError(SurfaceError):
    """A decomposition file could not be read."""


def sig9(x: float) -> float:
    return float(f"{x:.9g}")


def _round(obj):
    if isinstance(obj, float):
        return sig9(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, allow_nan=False) + "\n"


def atomic_write(path, text: str):
    """Write ``text`` next to ``path`` and rename it into place on success."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- decompositions


def decomposition_to_json(pd: PantsDecomposition) -> str:
    doc = {
        "genus": pd.genus,
        "curves": [{"word": [int(x) for x in c.word], "length": float(c.length)} for c in pd.curves],
        "pants": [[int(i) for i in p] for p in pd.pants],
        "certificate": {
            "bers_bound": float(pd.bers_bound),
            "max_length": float(pd.max_length),
            "conditional": bool(pd.conditional),
        },
    }
    return dumps(doc)


class DecompositionFile:
    """Parsed decomposition file; lengths and certificate are advisory."""

    def __init__(self, genus, words, lengths, pants, conditional):
        self.genus = genus
        self.words = words
        self.lengths = lengths
        self.pants = pants
        self.conditional = conditional


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} in decomposition file")


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{what} must be an integer, got {x!r}")
    return x


def parse_decomposition(text: str) -> DecompositionFile:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"decomposition file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("decomposition file must hold an object")
    genus = _int(doc.get("genus"), "genus")
    curves = doc.get("curves", [])
    if not isinstance(curves, list):
        raise FormatError("curves must be a list")
    words, lengths = [], []
    for c in curves:
        if not isinstance(c, dict) or "word" not in c:
            raise FormatError("each curve needs a word")
        w = tuple(_int(x, "word letter") for x in c["word"])
        if not w or any(x == 0 for x in w):
            raise FormatError(f"bad curve word {list(w)}")
        words.append(w)
        L = c.get("length")
        if L is not None and not (isinstance(L, (int, float)) and math.isfinite(L)):
            raise FormatError("curve length must be a finite number")
        lengths.append(None if L is None else float(L))
    pants = []
    for p in doc.get("pants", []):
        if not isinstance(p, list) or len(p) != 3:
            raise FormatError("each pants lists 3 curve indices")
        idx = [_int(i, "pants index") for i in p]
        if any(not 0 <= i < len(words) for i in idx):
            raise FormatError(f"pants {idx} refers to a missing curve")
        pants.append(idx)
    cert = doc.get("certificate", {})
    conditional = bool(cert.get("conditional", False)) if isinstance(cert, dict) else False
    return DecompositionFile(genus, words, lengths, pants, conditional)


# ---------------------------------------------------------------- traces


def trace_to_json(trace: list[StepRecord]) -> str:
    return dumps([r.to_json() for r in trace])
