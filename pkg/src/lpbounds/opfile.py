"""Line-oriented text format for operator sets and states.

::

    # comment
    dim 2 count 2 kind pvm
    op 1
    1+0j 0+0j
    0+0j 0+0j
    op 2
    ...

Entries are ``re+imj`` with 17 significant digits, so a write/read round trip
is exact for float64.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .measure import DensityOperator, Povm, validate_povm

__all__ = ["OperatorFile", "format_entry", "dumps", "loads", "read", "write", "load_povm", "load_state"]

KINDS = ("povm", "pvm", "state")


@dataclass
class OperatorFile:
    dim: int
    kind: str
    operators: np.ndarray


def format_entry(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


def dumps(kind, operators):
    ops = np.asarray(operators, dtype=np.complex128)
    if ops.ndim == 2:
        ops = ops[None]
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    m, n, _ = ops.shape
    lines = [f"dim {n} count {m} kind {kind}"]
    for k in range(m):
        lines.append(f"op {k + 1}")
        for row in ops[k]:
            lines.append(" ".join(format_entry(z) for z in row))
    return "\n".join(lines) + "\n"


def _parse_header(tokens, lineno):
    if len(tokens) != 6 or tokens[0::2] != ["dim", "count", "kind"]:
        raise ParseError("header must read 'dim N count M kind povm|pvm|state'", lineno, "header")
    try:
        dim, count = int(tokens[1]), int(tokens[3])
    except ValueError:
        raise ParseError("dim and count must be integers", lineno, "header") from None
    if dim < 1 or count < 1:
        raise ParseError("dim and count must be positive", lineno, "header")
    kind = tokens[5]
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}", lineno, "kind")
    return dim, count, kind


def _parse_entry(tok, lineno, col):
    try:
        z = complex(tok)
    except ValueError:
        raise ParseError(f"cannot parse complex entry {tok!r}", lineno, f"col {col}") from None
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ParseError(f"non-finite entry {tok!r}", lineno, f"col {col}")
    return z


def loads(text):
    lines = [
        (i + 1, ln.split("#", 1)[0].split())
        for i, ln in enumerate(text.splitlines())
    ]
    lines = [(i, t) for i, t in lines if t]
    if not lines:
        raise ParseError("empty file")
    lineno, tokens = lines[0]
    dim, count, kind = _parse_header(tokens, lineno)
    ops = np.empty((count, dim, dim), dtype=np.complex128)
    pos = 1
    for k in range(count):
        if pos >= len(lines):
            raise ParseError(f"expected 'op {k + 1}', got end of file", lines[-1][0], "op")
        lineno, tokens = lines[pos]
        if tokens != ["op", str(k + 1)]:
            raise ParseError(f"expected 'op {k + 1}', got {' '.join(tokens)!r}", lineno, "op")
        pos += 1
        for r in range(dim):
            if pos >= len(lines):
                raise ParseError(f"operator {k + 1} is missing row {r + 1}", lines[-1][0], "row")
            lineno, tokens = lines[pos]
            if len(tokens) != dim:
                raise ParseError(
                    f"row {r + 1} of operator {k + 1} has {len(tokens)} entries, expected {dim}",
                    lineno,
                    "row",
                )
            ops[k, r] = [_parse_entry(t, lineno, c + 1) for c, t in enumerate(tokens)]
            pos += 1
    if pos != len(lines):
        raise ParseError("trailing content after last operator", lines[pos][0])
    return OperatorFile(dim, kind, ops)


def write(path, kind, operators):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(kind, operators))


def read(path):
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())


def load_povm(path):
    """Read and validate a POVM/PVM file; raises :class:`ValidationError` with the deviations."""
    of = read(path)
    if of.kind == "state":
        raise ValidationError(f"{path}: expected a povm or pvm file, got kind 'state'")
    try:
        rep = validate_povm(of.operators)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if not rep.passed:
        raise ValidationError(f"{path}: invalid POVM: {rep.summary()}", rep)
    return Povm(of.operators, check=False)


def load_state(path):
    of = read(path)
    if of.kind != "state" or of.operators.shape[0] != 1:
        raise ValidationError(f"{path}: expected a single state operator")
    try:
        return DensityOperator(of.operators[0])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
