"""MILP instance data model and structural statistics.

An instance is ``min/max c^T x  s.t.  A_i x (<=|>=|=) b_i,  l <= x <= u`` with
an integrality tag per variable.  ``A`` is kept as a canonical CSR matrix:
column indices strictly increasing within each row, no stored zeros and no
empty rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import InvalidInstance

INF = float("inf")


class ObjSense(enum.IntEnum):
    MINIMIZE = 1
    MAXIMIZE = -1


class RowSense(enum.IntEnum):
    LE = 0
    GE = 1
    EQ = 2


class VarType(enum.IntEnum):
    BINARY = 0
    INTEGER = 1
    IMPLINT = 2
    CONTINUOUS = 3


INTEGRAL_TYPES = (VarType.BINARY, VarType.INTEGER, VarType.IMPLINT)


@dataclass(frozen=True, eq=False)
class MilpInstance:
    name: str
    sense: ObjSense
    c: np.ndarray
    A: sparse.csr_matrix
    senses: np.ndarray  # int8 codes of RowSense
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    vtypes: np.ndarray  # int8 codes of VarType
    row_names: tuple[str, ...] | None = None
    col_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        for arr in (self.c, self.b, self.lower, self.upper, self.senses, self.vtypes):
            arr.flags.writeable = False
        for arr in (self.A.data, self.A.indices, self.A.indptr):
            arr.flags.writeable = False
        _validate(self)

    @classmethod
    def build(
        cls,
        c: Sequence[float] | np.ndarray,
        A,
        senses: Sequence[int] | np.ndarray,
        b: Sequence[float] | np.ndarray,
        lower: Sequence[float] | np.ndarray | None = None,
        upper: Sequence[float] | np.ndarray | None = None,
        vtypes: Sequence[int] | np.ndarray | None = None,
        *,
        name: str = "milp",
        sense: ObjSense = ObjSense.MINIMIZE,
        row_names: Sequence[str] | None = None,
        col_names: Sequence[str] | None = None,
    ) -> "MilpInstance":
        """Canonicalize raw arrays into an instance.

        ``A`` may be dense or any scipy sparse format.  Duplicates are summed
        and explicit zeros dropped.  Missing bounds default to ``[0, inf)``,
        or ``[0, 1]`` for binaries; missing types default to continuous.
        """
        c = np.asarray(c, dtype=np.float64).copy()
        n = c.shape[0]
        mat = sparse.csr_matrix(A, dtype=np.float64)
        if mat.shape[1] != n:
            raise InvalidInstance(f"A has {mat.shape[1]} columns, c has {n} entries")
        mat.sum_duplicates()
        mat.eliminate_zeros()
        mat.sort_indices()
        mat = sparse.csr_matrix(
            (mat.data.copy(), mat.indices.astype(np.int64), mat.indptr.astype(np.int64)),
            shape=mat.shape,
        )
        vt = (
            np.full(n, VarType.CONTINUOUS, dtype=np.int8)
            if vtypes is None
            else np.asarray(vtypes, dtype=np.int8).copy()
        )
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=np.float64).copy()
        if upper is None:
            up = np.where(vt == VarType.BINARY, 1.0, INF)
        else:
            up = np.asarray(upper, dtype=np.float64).copy()
        return cls(
            name=name,
            sense=ObjSense(sense),
            c=c,
            A=mat,
            senses=np.asarray(senses, dtype=np.int8).copy(),
            b=np.asarray(b, dtype=np.float64).copy(),
            lower=lo,
            upper=up,
            vtypes=vt,
            row_names=None if row_names is None else tuple(row_names),
            col_names=None if col_names is None else tuple(col_names),
        )

    @property
    def n_vars(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_cons(self) -> int:
        return int(self.A.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.A.nnz)

    def row_name(self, i: int) -> str:
        return self.row_names[i] if self.row_names is not None else f"c{i}"

    def col_name(self, j: int) -> str:
        return self.col_names[j] if self.col_names is not None else f"x{j}"

    def integral_mask(self) -> np.ndarray:
        return self.vtypes != VarType.CONTINUOUS

    def equals(self, other: "MilpInstance") -> bool:
        """Structural and numerical equality (names included)."""
        if not isinstance(other, MilpInstance):
            return False
        if (self.name, self.sense, self.A.shape) != (other.name, other.sense, other.A.shape):
            return False
        if self.row_names_or_default() != other.row_names_or_default():
            return False
        if self.col_names_or_default() != other.col_names_or_default():
            return False
        arrays = ("c", "b", "lower", "upper", "senses", "vtypes")
        if not all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays):
            return False
        return (
            np.array_equal(self.A.indptr, other.A.indptr)
            and np.array_equal(self.A.indices, other.A.indices)
            and np.array_equal(self.A.data, other.A.data)
        )

    def row_names_or_default(self) -> tuple[str, ...]:
        return self.row_names or tuple(f"c{i}" for i in range(self.n_cons))

    def col_names_or_default(self) -> tuple[str, ...]:
        return self.col_names or tuple(f"x{j}" for j in range(self.n_vars))

    def permuted(self, row_perm: np.ndarray, col_perm: np.ndarray) -> "MilpInstance":
        """Instance with rows/columns reordered so new row i is old ``row_perm[i]``."""
        row_perm = np.asarray(row_perm)
        col_perm = np.asarray(col_perm)
        rn = self.row_names_or_default()
        cn = self.col_names_or_default()
        return MilpInstance.build(
            self.c[col_perm],
            self.A[row_perm][:, col_perm],
            self.senses[row_perm],
            self.b[row_perm],
            self.lower[col_perm],
            self.upper[col_perm],
            self.vtypes[col_perm],
            name=self.name,
            sense=self.sense,
            row_names=[rn[i] for i in row_perm],
            col_names=[cn[j] for j in col_perm],
        )


def _validate(inst: MilpInstance) -> None:
    n = inst.c.shape[0]
    m = inst.A.shape[0]
    if n < 1:
        raise InvalidInstance("instance has no variables")
    if m < 1:
        raise InvalidInstance("instance has no constraints")
    if inst.A.shape[1] != n:
        raise InvalidInstance("A column count differs from len(c)")
    for label, arr, size in (
        ("b", inst.b, m),
        ("senses", inst.senses, m),
        ("lower", inst.lower, n),
        ("upper", inst.upper, n),
        ("vtypes", inst.vtypes, n),
    ):
        if arr.shape != (size,):
            raise InvalidInstance(f"{label} has shape {arr.shape}, expected ({size},)")
    if inst.row_names is not None and len(inst.row_names) != m:
        raise InvalidInstance("row_names length differs from row count")
    if inst.col_names is not None and len(inst.col_names) != n:
        raise InvalidInstance("col_names length differs from column count")
    if not np.all(np.isfinite(inst.c)) or not np.all(np.isfinite(inst.b)):
        raise InvalidInstance("objective and rhs must be finite")
    A = inst.A
    if not np.all(np.isfinite(A.data)):
        raise InvalidInstance("constraint coefficients must be finite")
    if np.any(A.data == 0.0):
        raise InvalidInstance("explicit zero stored in A")
    row_nnz = np.diff(A.indptr)
    if np.any(row_nnz < 1):
        raise InvalidInstance(f"row {int(np.argmin(row_nnz))} has no nonzeros")
    if A.nnz:
        d = np.diff(A.indices)
        # within-row increments must be positive; row boundaries are exempt
        starts = np.zeros(A.nnz, dtype=bool)
        starts[A.indptr[:-1][row_nnz > 0]] = True
        if np.any(d[~starts[1:]] <= 0):
            raise InvalidInstance("column indices not strictly increasing within a row")
    if not set(np.unique(inst.senses)).issubset({0, 1, 2}):
        raise InvalidInstance("unknown row sense code")
    if not set(np.unique(inst.vtypes)).issubset({0, 1, 2, 3}):
        raise InvalidInstance("unknown variable type code")
    if np.any(np.isnan(inst.lower)) or np.any(np.isnan(inst.upper)):
        raise InvalidInstance("NaN bound")
    if np.any(inst.lower == INF) or np.any(inst.upper == -INF):
        raise InvalidInstance("lower bound +inf or upper bound -inf")
    if np.any(inst.lower > inst.upper):
        j = int(np.argmax(inst.lower > inst.upper))
        raise InvalidInstance(f"variable {j}: lower {inst.lower[j]} > upper {inst.upper[j]}")
    binary = inst.vtypes == VarType.BINARY
    if np.any(inst.lower[binary] != 0.0) or np.any(inst.upper[binary] != 1.0):
        raise InvalidInstance("binary variables must have bounds [0, 1]")


@dataclass(frozen=True)
class StructStats:
    n_vars: float
    n_cons: float
    nnz_density: float
    frac_integer_vars: float
    frac_binary_vars: float
    mean_var_degree: float
    mean_cons_degree: float
    mean_abs_coef: float
    std_abs_coef: float
    mean_rhs: float
    mean_obj_coef: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in self.field_names()], dtype=np.float64)


def instance_stats(inst: MilpInstance) -> StructStats:
    """The 11 structural descriptors used by the JS-divergence baseline.

    Integer fraction counts every integral type (binary included).
    """
    n, m, nnz = inst.n_vars, inst.n_cons, inst.nnz
    absval = np.abs(inst.A.data)
    return StructStats(
        n_vars=float(n),
        n_cons=float(m),
        nnz_density=nnz / (m * n),
        frac_integer_vars=float(np.count_nonzero(inst.integral_mask())) / n,
        frac_binary_vars=float(np.count_nonzero(inst.vtypes == VarType.BINARY)) / n,
        mean_var_degree=nnz / n,
        mean_cons_degree=nnz / m,
        mean_abs_coef=float(absval.mean()),
        std_abs_coef=float(absval.std()),
        mean_rhs=float(inst.b.mean()),
        mean_obj_coef=float(inst.c.mean()),
    )
