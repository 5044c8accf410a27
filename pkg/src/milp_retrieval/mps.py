"""Free-format MPS reader and canonical writer.

Reader accepts NAME, OBJSENSE, ROWS, COLUMNS, RHS, RANGES, BOUNDS and ENDATA
sections, ``*`` comment lines and MARKER INTORG/INTEND integrality toggles.
Ranged rows are expanded into a pair of one-sided rows: the original row keeps
its name and one side, a new row ``<name>_rng`` appended after all file rows
carries the other side.  Free rows other than the objective are dropped with
a warning.

The writer emits a deterministic single-space-separated layout with every
number printed to 17 significant digits, so ``parse(write(I))`` reproduces
``I`` exactly and ``write . parse . write`` is byte-idempotent.
"""

from __future__ import annotations

import logging
import math
from typing import IO

import numpy as np
from scipy import sparse

from .errors import EmptyProblem, MalformedSection, UnknownRowOrColumn
from .milp import INF, MilpInstance, ObjSense, RowSense, VarType

log = logging.getLogger(__name__)

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_SENSE_CODE = {"L": RowSense.LE, "G": RowSense.GE, "E": RowSense.EQ}
_VALUE_BOUNDS = {"UP", "LO", "FX", "LI", "UI"}
_FLAG_BOUNDS = {"FR", "MI", "PL", "BV"}


def _num(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MalformedSection(f"line {lineno}: expected a number, got {tok!r}") from None
    if math.isnan(v):
        raise MalformedSection(f"line {lineno}: NaN value")
    return v


def parse_mps(source: bytes | str | IO) -> MilpInstance:
    """Parse free-format MPS text (bytes, str, or a readable stream)."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    lines = source.splitlines()

    name = "milp"
    sense = ObjSense.MINIMIZE
    obj_row: str | None = None
    row_index: dict[str, int] = {}
    row_names: list[str] = []
    row_senses: list[int] = []
    free_rows: set[str] = set()
    col_index: dict[str, int] = {}
    col_names: list[str] = []
    col_integer: list[bool] = []
    obj: dict[int, float] = {}
    entries: dict[tuple[int, int], float] = {}
    rhs: dict[int, float] = {}
    ranges: dict[int, float] = {}
    lower: dict[int, float] = {}
    upper: dict[int, float] = {}
    binary: set[int] = set()
    lower_set: set[int] = set()

    section: str | None = None
    in_int = False
    ended = False

    def row_of(tok: str, lineno: int) -> int | None:
        """Constraint index, or None for the objective / ignored free rows."""
        if tok == obj_row or tok in free_rows:
            return None
        if tok not in row_index:
            raise UnknownRowOrColumn(f"line {lineno}: unknown row {tok!r}")
        return row_index[tok]

    def col_of(tok: str, lineno: int) -> int:
        if tok not in col_index:
            raise UnknownRowOrColumn(f"line {lineno}: unknown column {tok!r}")
        return col_index[tok]

    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        tokens = raw.split()
        if ended:
            raise MalformedSection(f"line {lineno}: content after ENDATA")
        if not raw[0].isspace():
            head = tokens[0].upper()
            if head not in _SECTIONS:
                raise MalformedSection(f"line {lineno}: unknown section {tokens[0]!r}")
            section = head
            if head == "NAME":
                if len(tokens) > 2:
                    raise MalformedSection(f"line {lineno}: bad NAME line")
                name = tokens[1] if len(tokens) == 2 else name
            elif head == "OBJSENSE":
                if len(tokens) == 2:
                    sense = _parse_objsense(tokens[1], lineno)
                elif len(tokens) > 2:
                    raise MalformedSection(f"line {lineno}: bad OBJSENSE line")
            elif head == "ENDATA":
                ended = True
            elif len(tokens) != 1:
                raise MalformedSection(f"line {lineno}: unexpected tokens after {head}")
            continue

        if section is None or section in ("NAME", "ENDATA"):
            raise MalformedSection(f"line {lineno}: data line outside a section")
        if section == "OBJSENSE":
            if len(tokens) != 1:
                raise MalformedSection(f"line {lineno}: bad OBJSENSE entry")
            sense = _parse_objsense(tokens[0], lineno)
        elif section == "ROWS":
            if len(tokens) != 2:
                raise MalformedSection(f"line {lineno}: ROWS entry needs 2 fields")
            kind, rname = tokens[0].upper(), tokens[1]
            if rname in row_index or rname == obj_row or rname in free_rows:
                raise MalformedSection(f"line {lineno}: duplicate row {rname!r}")
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                else:
                    log.warning("ignoring extra free row %s", rname)
                    free_rows.add(rname)
            elif kind in _SENSE_CODE:
                row_index[rname] = len(row_names)
                row_names.append(rname)
                row_senses.append(_SENSE_CODE[kind])
            else:
                raise MalformedSection(f"line {lineno}: unknown row type {kind!r}")
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'\"").upper() == "MARKER":
                tag = tokens[2].strip("'\"").upper()
                if tag == "INTORG":
                    in_int = True
                elif tag == "INTEND":
                    in_int = False
                else:
                    raise MalformedSection(f"line {lineno}: unknown marker {tag!r}")
                continue
            if len(tokens) not in (3, 5):
                raise MalformedSection(f"line {lineno}: COLUMNS entry needs 3 or 5 fields")
            cname = tokens[0]
            if cname not in col_index:
                col_index[cname] = len(col_names)
                col_names.append(cname)
                col_integer.append(in_int)
            j = col_index[cname]
            for k in range(1, len(tokens), 2):
                value = _num(tokens[k + 1], lineno)
                i = row_of(tokens[k], lineno)
                if i is None:
                    if tokens[k] == obj_row:
                        if j in obj:
                            raise MalformedSection(f"line {lineno}: duplicate objective entry")
                        obj[j] = value
                    continue
                if (i, j) in entries:
                    raise MalformedSection(f"line {lineno}: duplicate entry ({tokens[k]}, {cname})")
                entries[(i, j)] = value
        elif section in ("RHS", "RANGES"):
            target = rhs if section == "RHS" else ranges
            if len(tokens) in (2, 4):
                pairs = tokens
            elif len(tokens) in (3, 5):
                pairs = tokens[1:]
            else:
                raise MalformedSection(f"line {lineno}: {section} entry has {len(tokens)} fields")
            for k in range(0, len(pairs), 2):
                value = _num(pairs[k + 1], lineno)
                i = row_of(pairs[k], lineno)
                if i is None:
                    if section == "RHS" and pairs[k] == obj_row and value != 0.0:
                        log.warning("ignoring objective constant %r", value)
                    continue
                target[i] = value
        elif section == "BOUNDS":
            kind = tokens[0].upper()
            rest = tokens[1:]
            if kind in _VALUE_BOUNDS:
                if len(rest) == 3:
                    rest = rest[1:]
                if len(rest) != 2:
                    raise MalformedSection(f"line {lineno}: bad {kind} bound")
                j = col_of(rest[0], lineno)
                value = _num(rest[1], lineno)
            elif kind in _FLAG_BOUNDS:
                # FR/MI/PL/BV: [set-name] column [ignored value]
                if len(rest) == 1:
                    cname = rest[0]
                elif len(rest) == 2:
                    cname = rest[1] if rest[1] in col_index else rest[0]
                elif len(rest) == 3:
                    cname = rest[1]
                else:
                    raise MalformedSection(f"line {lineno}: bad {kind} bound")
                j = col_of(cname, lineno)
                value = 0.0
            else:
                raise MalformedSection(f"line {lineno}: unknown bound type {kind!r}")
            if kind in ("UP", "UI"):
                if value < 0 and j not in lower_set:
                    log.warning("negative upper bound on %s with default lower: lower set to -inf", col_names[j])
                    lower[j] = -INF
                upper[j] = value
            elif kind in ("LO", "LI"):
                lower[j] = value
                lower_set.add(j)
            elif kind == "FX":
                lower[j] = upper[j] = value
                lower_set.add(j)
            elif kind == "FR":
                lower[j], upper[j] = -INF, INF
                lower_set.add(j)
            elif kind == "MI":
                lower[j] = -INF
                lower_set.add(j)
            elif kind == "PL":
                upper[j] = INF
            elif kind == "BV":
                binary.add(j)
            if kind in ("LI", "UI"):
                col_integer[j] = True
        else:  # pragma: no cover - every section handled above
            raise MalformedSection(f"line {lineno}: unhandled section {section}")

    if not ended:
        raise MalformedSection("missing ENDATA")
    if not col_names:
        raise EmptyProblem("no columns")
    if not row_names:
        raise EmptyProblem("no constraint rows")

    n = len(col_names)
    senses = list(row_senses)
    names = list(row_names)
    b = [rhs.get(i, 0.0) for i in range(len(row_names))]
    rows = [[] for _ in row_names]
    for (i, j), v in entries.items():
        rows[i].append((j, v))

    for i in sorted(ranges):
        r = ranges[i]
        if r == 0.0 and senses[i] != RowSense.EQ:
            continue
        base = b[i]
        if senses[i] == RowSense.LE:
            other_sense, other_rhs = RowSense.GE, base - abs(r)
        elif senses[i] == RowSense.GE:
            other_sense, other_rhs = RowSense.LE, base + abs(r)
        else:
            if r >= 0:
                senses[i] = RowSense.GE
                other_sense, other_rhs = RowSense.LE, base + r
            else:
                senses[i] = RowSense.LE
                other_sense, other_rhs = RowSense.GE, base + r
        names.append(f"{names[i]}_rng")
        senses.append(other_sense)
        b.append(other_rhs)
        rows.append(list(rows[i]))

    keep = [i for i, r in enumerate(rows) if any(v != 0.0 for _, v in r)]
    if len(keep) != len(rows):
        kept = set(keep)
        for i in range(len(rows)):
            if i not in kept:
                log.warning("dropping empty row %s", names[i])
        if not keep:
            raise EmptyProblem("every constraint row is empty")

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for i in keep:
        for j, v in sorted(rows[i]):
            if v != 0.0:
                indices.append(j)
                data.append(v)
        indptr.append(len(indices))
    A = sparse.csr_matrix((data, indices, indptr), shape=(len(keep), n))

    vtypes = np.full(n, VarType.CONTINUOUS, dtype=np.int8)
    lo = np.zeros(n)
    up = np.full(n, INF)
    for j in range(n):
        if j in binary:
            vtypes[j] = VarType.BINARY
            lo[j], up[j] = 0.0, 1.0
            continue
        if col_integer[j]:
            vtypes[j] = VarType.INTEGER
        lo[j] = lower.get(j, 0.0)
        up[j] = upper.get(j, INF)
    c = np.array([obj.get(j, 0.0) for j in range(n)])

    return MilpInstance.build(
        c,
        A,
        [senses[i] for i in keep],
        [b[i] for i in keep],
        lo,
        up,
        vtypes,
        name=name,
        sense=sense,
        row_names=[names[i] for i in keep],
        col_names=col_names,
    )


def _parse_objsense(tok: str, lineno: int) -> ObjSense:
    t = tok.upper()
    if t in ("MAX", "MAXIMIZE"):
        return ObjSense.MAXIMIZE
    if t in ("MIN", "MINIMIZE"):
        return ObjSense.MINIMIZE
    raise MalformedSection(f"line {lineno}: unknown objective sense {tok!r}")


def fmt(v: float) -> str:
    """Shortest text that round-trips at 17 significant digits."""
    s = format(float(v), ".17g")
    return "0" if s == "-0" else s


def write_mps(inst: MilpInstance) -> bytes:
    """Canonical free-format MPS text for ``inst`` (UTF-8 bytes)."""
    rn = inst.row_names_or_default()
    cn = inst.col_names_or_default()
    obj_name = "OBJ"
    taken = set(rn)
    while obj_name in taken:
        obj_name += "_"
    out = [f"NAME {inst.name}"]
    if inst.sense == ObjSense.MAXIMIZE:
        out += ["OBJSENSE", " MAX"]
    out += ["ROWS", f" N {obj_name}"]
    letter = {RowSense.LE: "L", RowSense.GE: "G", RowSense.EQ: "E"}
    out += [f" {letter[RowSense(int(s))]} {rn[i]}" for i, s in enumerate(inst.senses)]

    out.append("COLUMNS")
    csc = inst.A.tocsc()
    csc.sort_indices()
    integral = inst.vtypes != VarType.CONTINUOUS
    writes_int = integral & (inst.vtypes != VarType.IMPLINT)
    marker = 0
    open_marker = False
    for j in range(inst.n_vars):
        if writes_int[j] and not open_marker:
            out.append(f" M{marker} 'MARKER' 'INTORG'")
            open_marker = True
        elif not writes_int[j] and open_marker:
            out.append(f" M{marker} 'MARKER' 'INTEND'")
            open_marker = False
            marker += 1
        start, end = csc.indptr[j], csc.indptr[j + 1]
        if inst.c[j] != 0.0 or start == end:
            out.append(f" {cn[j]} {obj_name} {fmt(inst.c[j])}")
        for k in range(start, end):
            out.append(f" {cn[j]} {rn[csc.indices[k]]} {fmt(csc.data[k])}")
    if open_marker:
        out.append(f" M{marker} 'MARKER' 'INTEND'")

    rhs_lines = [f" RHS {rn[i]} {fmt(v)}" for i, v in enumerate(inst.b) if v != 0.0]
    if rhs_lines:
        out.append("RHS")
        out += rhs_lines

    bounds: list[str] = []
    for j in range(inst.n_vars):
        lo, up, name = inst.lower[j], inst.upper[j], cn[j]
        if inst.vtypes[j] == VarType.BINARY:
            bounds.append(f" BV BND {name}")
        elif lo == -INF and up == INF:
            bounds.append(f" FR BND {name}")
        elif lo == up:
            bounds.append(f" FX BND {name} {fmt(lo)}")
        else:
            if lo == -INF:
                bounds.append(f" MI BND {name}")
            elif lo != 0.0:
                bounds.append(f" LO BND {name} {fmt(lo)}")
            if up != INF:
                bounds.append(f" UP BND {name} {fmt(up)}")
    if bounds:
        out.append("BOUNDS")
        out += bounds
    out.append("ENDATA")
    return ("\n".join(out) + "\n").encode("utf-8")


def read_mps_file(path) -> MilpInstance:
    with open(path, "rb") as fh:
        return parse_mps(fh.read())


def write_mps_file(inst: MilpInstance, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_mps(inst))
