"""Versioned line-oriented text format for trained models.

Layout (one record per line, whitespace separated)::

    svmedge-model 1
    kernel rbf3
    sigma 0.6
    c 10.0
    bias -0.0123
    centroid 0.01 -0.02 0.0      (centroid kernel only)
    meta {"seed": 0, ...}        (optional, JSON)
    support_vectors 68
    <alpha> <label> <c1> <c2> <c3>
    ...

Floats are written with ``repr`` so they parse back to the identical double.
"""
from __future__ import annotations

import json
import math

import numpy as np

from ..kernels import KernelSpec
from ..svmcore import SvmModel

MAGIC = "svmedge-model"
VERSION = 1
# run-dependent entries never written, so files are reproducible byte for byte
VOLATILE_META = ("trained_at", "train_seconds")


class ModelFormatError(ValueError):
    """Unparseable model file; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelVersionError(ModelFormatError):
    pass


class FieldCountError(ModelFormatError):
    pass


class NonFiniteValueError(ModelFormatError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps_model(model: SvmModel) -> str:
    k = model.kernel
    lines = [f"{MAGIC} {VERSION}", f"kernel {k.kind}", f"sigma {_fmt(k.sigma)}",
             f"c {_fmt(model.c_param)}", f"bias {_fmt(model.bias)}"]
    if k.centroid is not None:
        lines.append("centroid " + " ".join(_fmt(v) for v in k.centroid))
    meta = {key: val for key, val in model.training_meta.items() if key not in VOLATILE_META}
    if meta:
        lines.append("meta " + json.dumps(meta, sort_keys=True, default=str))
    lines.append(f"support_vectors {model.n_support}")
    for a, y, v in zip(model.alphas, model.sv_labels, model.support_vectors):
        lines.append(" ".join([_fmt(a), str(int(y))] + [_fmt(c) for c in v]))
    return "\n".join(lines) + "\n"


def save_model(model: SvmModel, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_model(model))


def _floats(fields, lineno):
    try:
        vals = [float(f) for f in fields]
    except ValueError:
        raise ModelFormatError(f"not a number in {' '.join(fields)!r}", lineno) from None
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteValueError("non-finite value", lineno)
    return vals


def loads_model(text: str) -> SvmModel:
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC:
        raise ModelFormatError("missing model header", 1)
    if head[1] != str(VERSION):
        raise ModelVersionError(f"unsupported format version {head[1]!r} (expected {VERSION})", 1)

    header = {}
    pos = 1
    while pos < len(lines):
        lineno = pos + 1
        key, _, rest = lines[pos].partition(" ")
        pos += 1
        if key == "meta":
            try:
                header["meta"] = json.loads(rest)
            except json.JSONDecodeError as exc:
                raise ModelFormatError(f"bad meta JSON: {exc.msg}", lineno) from None
            continue
        fields = rest.split()
        if key == "kernel":
            if len(fields) != 1:
                raise FieldCountError("kernel line needs 1 field", lineno)
            header["kernel"] = fields[0]
        elif key in ("sigma", "c", "bias"):
            if len(fields) != 1:
                raise FieldCountError(f"{key} line needs 1 field", lineno)
            header[key] = _floats(fields, lineno)[0]
        elif key == "centroid":
            if len(fields) != 3:
                raise FieldCountError("centroid line needs 3 fields", lineno)
            header["centroid"] = tuple(_floats(fields, lineno))
        elif key == "support_vectors":
            if len(fields) != 1 or not fields[0].isdigit():
                raise FieldCountError("support_vectors line needs a count", lineno)
            header["n"] = int(fields[0])
            break
        else:
            raise ModelFormatError(f"unknown header key {key!r}", lineno)
    missing = [k for k in ("kernel", "sigma", "c", "bias", "n") if k not in header]
    if missing:
        raise ModelFormatError(f"missing header fields: {', '.join(missing)}", pos)

    n = header["n"]
    rows = []
    for lineno in range(pos + 1, pos + n + 1):
        if lineno > len(lines):
            raise FieldCountError(f"expected {n} support vectors, file ends early", lineno)
        fields = lines[lineno - 1].split()
        if len(fields) != 5:
            raise FieldCountError(f"support vector line needs 5 fields, got {len(fields)}", lineno)
        vals = _floats(fields, lineno)
        if vals[1] not in (1.0, -1.0):
            raise ModelFormatError(f"label must be +1 or -1, got {fields[1]}", lineno)
        if vals[0] <= 0:
            raise ModelFormatError(f"alpha must be positive, got {fields[0]}", lineno)
        rows.append(vals)
    if any(line.strip() for line in lines[pos + n:]):
        raise FieldCountError("trailing data after support vectors", pos + n + 1)

    try:
        kernel = KernelSpec(header["kernel"], header["sigma"], header.get("centroid"))
        arr = np.array(rows, dtype=np.float64).reshape(-1, 5)
        return SvmModel(support_vectors=arr[:, 2:], alphas=arr[:, 0],
                        sv_labels=arr[:, 1].astype(np.int64), bias=header["bias"],
                        kernel=kernel, c_param=header["c"],
                        training_meta=header.get("meta", {}))
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def load_model(path) -> SvmModel:
    with open(path, encoding="ascii") as fh:
        return loads_model(fh.read())
