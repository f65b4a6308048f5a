"""The ``kms-lab/1`` JSON instance format, word files, and the report writer.

Instance document::

    {
      "format": "kms-lab/1",
      "algebra": {"block_dims": [1, 2]},
      "module": {"mult": [[1, 0], [1, 1]]},          # row w (right block), column v
      "generator": {"slots": {"(0,0)": [[[1.0, 0.0]]], ...}},   # entries as [re, im]
      "coeff_dynamics": {"H": [[[[0, 0]]], ...]},     # optional, one matrix per block
      "beta": 0.7,                                     # optional
      "trace": {"t": [0.5, 0.25]}                      # optional
    }

Word files are JSON arrays of ``{"left": [...], "right": [...], "coef": c}``
where each entry is a vector literal: a term ``[w, v, copy, inner]`` or
``[w, v, copy, inner, col]``, a dict ``{"w", "v", "copy", "inner", "col",
"coef"}``, or a list of such terms (summed).  A word stands for
``T_{left[0]} ... T_{left[-1]} T*_{right[-1]} ... T*_{right[0]}``.
"""

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .algebra import BlockAlgebra, CoeffDynamics, TraceVector
from .correspondence import Correspondence
from .toeplitz import MonomialWord, ToeplitzElement
from .transfer import Generator

FORMAT = "kms-lab/1"
HERMITIAN_TOL = 1e-10


class InputError(ValueError):
    """Malformed or invalid input; the message names the offending key."""


@dataclass(frozen=True, eq=False)
class Instance:
    X: Correspondence
    D: Generator
    H: CoeffDynamics = None
    beta: float = None
    trace: TraceVector = None
    name: str = None

    @property
    def algebra(self):
        return self.X.algebra


def _complex_matrix(data, key, n=None):
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError("%s: expected a matrix of [re, im] pairs" % key)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError("%s: expected a square matrix of [re, im] pairs, got shape %s" % (key, arr.shape))
    if n is not None and arr.shape[0] != n:
        raise InputError("%s: expected size %d, got %d" % (key, n, arr.shape[0]))
    m = arr[..., 0] + 1j * arr[..., 1]
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
        raise InputError("%s: matrix is not Hermitian" % key)
    return m


def _encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


_SLOT = re.compile(r"^\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def _get(doc, path):
    cur = doc
    for p in path.split("."):
        if not isinstance(cur, dict) or p not in cur:
            raise InputError("missing key '%s'" % path)
        cur = cur[p]
    return cur


def instance_from_dict(doc):
    if not isinstance(doc, dict):
        raise InputError("instance must be a JSON object")
    fmt = doc.get("format")
    if fmt != FORMAT:
        raise InputError("format: expected '%s', got %r" % (FORMAT, fmt))
    dims = _get(doc, "algebra.block_dims")
    try:
        A = BlockAlgebra(tuple(int(d) for d in dims))
    except (TypeError, ValueError) as exc:
        raise InputError("algebra.block_dims: %s" % exc)
    V = A.num_blocks
    mult = _get(doc, "module.mult")
    try:
        X = Correspondence(A, mult)
    except (TypeError, ValueError) as exc:
        raise InputError("module.mult: %s" % exc)
    raw = _get(doc, "generator.slots")
    if not isinstance(raw, dict):
        raise InputError("generator.slots: expected an object keyed by \"(w,v)\"")
    slots = {}
    for key, val in raw.items():
        m = _SLOT.match(key)
        if not m:
            raise InputError("generator.slots: bad slot key %r (expected \"(w,v)\")" % key)
        w, v = int(m.group(1)), int(m.group(2))
        if not (w < V and v < V) or X.mult[w, v] == 0:
            raise InputError("generator.slots.%s: slot has zero multiplicity" % key)
        slots[(w, v)] = _complex_matrix(val, "generator.slots.%s" % key, X.mult[w, v])
    missing = [s for s in X.slots() if s not in slots]
    if missing:
        raise InputError("generator.slots: missing slot(s) %s" % ", ".join("(%d,%d)" % s for s in missing))
    D = Generator(X, slots)
    H = None
    if doc.get("coeff_dynamics") is not None:
        hs = _get(doc, "coeff_dynamics.H")
        if not isinstance(hs, list) or len(hs) != V:
            raise InputError("coeff_dynamics.H: expected %d matrices" % V)
        H = CoeffDynamics(A, tuple(_complex_matrix(h, "coeff_dynamics.H[%d]" % i, A.block_dims[i])
                                   for i, h in enumerate(hs)))
    beta = doc.get("beta")
    if beta is not None:
        if not isinstance(beta, (int, float)) or isinstance(beta, bool) or not math.isfinite(beta):
            raise InputError("beta: expected a finite number")
        beta = float(beta)
    trace = None
    if doc.get("trace") is not None:
        t = _get(doc, "trace.t")
        try:
            trace = TraceVector(A, t)
        except (TypeError, ValueError) as exc:
            raise InputError("trace.t: %s" % exc)
    return Instance(X, D, H, beta, trace, doc.get("name"))


def instance_to_dict(inst):
    X, D = inst.X, inst.D
    doc = {"format": FORMAT}
    if inst.name is not None:
        doc["name"] = inst.name
    doc["algebra"] = {"block_dims": list(X.algebra.block_dims)}
    doc["module"] = {"mult": X.mult.tolist()}
    doc["generator"] = {"slots": {"(%d,%d)" % s: _encode_matrix(D.slots[s]) for s in X.slots()}}
    if inst.H is not None:
        doc["coeff_dynamics"] = {"H": [_encode_matrix(h) for h in inst.H.H]}
    if inst.beta is not None:
        doc["beta"] = inst.beta
    if inst.trace is not None:
        doc["trace"] = {"t": [float(x) for x in inst.trace.t]}
    return doc


def load_instance(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc.strerror))
    return parse_instance(text)


def parse_instance(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("invalid JSON at line %d column %d: %s" % (exc.lineno, exc.colno, exc.msg))
    return instance_from_dict(doc)


def save_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(dumps(instance_to_dict(inst), indent=2))
        fh.write("\n")


# --- words -----------------------------------------------------------------

def _coef(val, key):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, list) and len(val) == 2:
        return complex(float(val[0]), float(val[1]))
    raise InputError("%s: coefficient must be a number or [re, im]" % key)


def _term(X, term, key):
    if isinstance(term, dict):
        try:
            idx = [term["w"], term["v"], term["copy"], term["inner"], term.get("col", 0)]
        except KeyError as exc:
            raise InputError("%s: missing index %s" % (key, exc))
        c = _coef(term.get("coef", 1.0), key)
    elif isinstance(term, list) and len(term) in (4, 5) and all(isinstance(i, int) for i in term):
        idx = list(term) + ([0] if len(term) == 4 else [])
        c = 1.0
    else:
        raise InputError("%s: expected [w, v, copy, inner(, col)] or an index object" % key)
    w, v, copy, inner, col = (int(i) for i in idx)
    V = X.num_blocks
    if not (0 <= w < V and 0 <= v < V):
        raise InputError("%s: block index out of range" % key)
    if not 0 <= col < X.algebra.block_dims[w]:
        raise InputError("%s: column %d out of range for block %d" % (key, col, w))
    try:
        return c * X.basis_vector(w, v, copy, inner, col)
    except IndexError as exc:
        raise InputError("%s: %s" % (key, exc))


def vector_literal(X, lit, key="vector"):
    if isinstance(lit, dict) or (isinstance(lit, list) and lit and isinstance(lit[0], int)):
        return _term(X, lit, key)
    if isinstance(lit, list) and lit:
        out = None
        for i, t in enumerate(lit):
            v = _term(X, t, "%s[%d]" % (key, i))
            out = v if out is None else out + v
        return out
    raise InputError("%s: empty or malformed vector literal" % key)


def words_from_list(X, doc):
    if not isinstance(doc, list):
        raise InputError("word file must be a JSON array")
    out = []
    for i, item in enumerate(doc):
        key = "words[%d]" % i
        if not isinstance(item, dict):
            raise InputError("%s: expected an object with 'left' and 'right'" % key)
        left = [vector_literal(X, v, "%s.left[%d]" % (key, j)) for j, v in enumerate(item.get("left", []))]
        right = [vector_literal(X, v, "%s.right[%d]" % (key, j)) for j, v in enumerate(item.get("right", []))]
        c = _coef(item.get("coef", 1.0), key + ".coef")
        word = MonomialWord(tuple(left), tuple(right))
        out.append((word, ToeplitzElement.from_word(X, word, c)))
    return out


def load_words(X, path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc.strerror))
    except json.JSONDecodeError as exc:
        raise InputError("invalid JSON at line %d column %d: %s" % (exc.lineno, exc.colno, exc.msg))
    return words_from_list(X, doc)


# --- writer ----------------------------------------------------------------

def _float(x):
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return "%.17g" % x


def _normalize(obj):
    if isinstance(obj, np.ndarray):
        return _normalize(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    return obj


def _write(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl if indent else ", "
    if isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
        else:
            out.append("[" + nl)
            for i, v in enumerate(obj):
                out.append(pad)
                _write(v, indent, level + 1, out)
                if i < len(obj) - 1:
                    out.append(sep if indent else ", ")
            out.append(nl + end + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _write(v, indent, level + 1, out)
            if i < len(items) - 1:
                out.append(sep if indent else ", ")
        out.append(nl + end + "}")
    else:
        raise TypeError("cannot serialize %r" % type(obj))


def _scalar(v):
    out = []
    _write(v, 0, 0, out)
    return "".join(out)


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits."""
    out = []
    _write(_normalize(obj), indent, 0, out)
    return "".join(out)
