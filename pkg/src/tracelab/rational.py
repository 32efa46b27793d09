"""Exact rational linear algebra.

Vectors are tuples of :class:`fractions.Fraction`, matrices are tuples of row
tuples.  Nothing in this module ever touches a float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Optional, Sequence

Rational = Fraction
RatVector = tuple  # tuple[Fraction, ...]
RatMatrix = tuple  # tuple[tuple[Fraction, ...], ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionError(ValueError):
    pass


def vec(values: Iterable[Any]) -> RatVector:
    return tuple(Fraction(v) for v in values)


def zeros(n: int) -> RatVector:
    return (ZERO,) * n


def ones(n: int) -> RatVector:
    return (ONE,) * n


def unit(n: int, i: int) -> RatVector:
    return tuple(ONE if j == i else ZERO for j in range(n))


def matrix(rows: Iterable[Iterable[Any]]) -> RatMatrix:
    out = tuple(vec(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise DimensionError("ragged matrix")
    return out


def shape(a: RatMatrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def _check(n: int, m: int, what: str = "dimension mismatch") -> None:
    if n != m:
        raise DimensionError(f"{what}: {n} != {m}")


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    _check(len(u), len(v))
    return sum((x * y for x, y in zip(u, v) if x and y), ZERO)


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> RatVector:
    _check(len(u), len(v))
    return tuple(x + y for x, y in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> RatVector:
    _check(len(u), len(v))
    return tuple(x - y for x, y in zip(u, v))


def scale(c: Fraction, u: Sequence[Fraction]) -> RatVector:
    return tuple(c * x for x in u)


def is_zero(u: Sequence[Fraction]) -> bool:
    return not any(u)


def transpose(a: RatMatrix) -> RatMatrix:
    return tuple(zip(*a)) if a else ()


def identity(n: int) -> RatMatrix:
    return tuple(unit(n, i) for i in range(n))


def mat_vec(a: RatMatrix, u: Sequence[Fraction]) -> RatVector:
    """``a @ u`` for a column vector ``u``."""
    if a:
        _check(len(a[0]), len(u))
    return tuple(dot(row, u) for row in a)


def vec_mat(u: Sequence[Fraction], a: RatMatrix) -> RatVector:
    """``u @ a`` for a row vector ``u``."""
    _check(len(u), len(a))
    if not a:
        return ()
    out = [ZERO] * len(a[0])
    for x, row in zip(u, a):
        if x:
            for j, y in enumerate(row):
                if y:
                    out[j] += x * y
    return tuple(out)


def mat_mul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a:
        _check(len(a[0]), len(b))
    return tuple(vec_mat(row, b) for row in a)


def mat_add(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    _check(len(a), len(b))
    return tuple(add(r, s) for r, s in zip(a, b))


def mat_scale(c: Fraction, a: RatMatrix) -> RatMatrix:
    return tuple(scale(c, r) for r in a)


def hstack(*mats: RatMatrix) -> RatMatrix:
    rows = {len(m) for m in mats}
    if len(rows) != 1:
        raise DimensionError("hstack needs equal row counts")
    return tuple(sum((tuple(m[i]) for m in mats), ()) for i in range(rows.pop()))


def columns_to_matrix(cols: Sequence[Sequence[Fraction]], n_rows: int) -> RatMatrix:
    """Matrix whose columns are ``cols`` (each of length ``n_rows``)."""
    for c in cols:
        _check(len(c), n_rows)
    return tuple(tuple(c[i] for c in cols) for i in range(n_rows))


@dataclass
class Basis:
    """A spanning set kept in reduced row-echelon form.

    ``rows`` hold the echelon vectors ordered by pivot column; ``generators``
    keep the vectors exactly as inserted (only the independent ones), each
    with its provenance tag, so witnesses can be read back off the basis.
    """

    dim: int
    rows: list = field(default_factory=list)
    pivots: list = field(default_factory=list)
    generators: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def copy(self) -> "Basis":
        return Basis(self.dim, list(self.rows), list(self.pivots),
                     list(self.generators), list(self.tags))

    def reduce(self, v: Sequence[Fraction]) -> list:
        _check(len(v), self.dim)
        r = list(v)
        for p, row in zip(self.pivots, self.rows):
            c = r[p]
            if c:
                for j in range(p, self.dim):
                    if row[j]:
                        r[j] -= c * row[j]
        return r

    def contains(self, v: Sequence[Fraction]) -> bool:
        return not any(self.reduce(v))

    def insert(self, v: Sequence[Fraction], tag: Hashable = None) -> bool:
        """Add ``v`` in place; returns whether the span grew."""
        r = self.reduce(v)
        p = next((j for j, x in enumerate(r) if x), None)
        if p is None:
            return False
        inv = 1 / r[p]
        r = [x * inv for x in r]
        for k, row in enumerate(self.rows):
            c = row[p]
            if c:
                self.rows[k] = tuple(x - c * y for x, y in zip(row, r))
        pos = 0
        while pos < len(self.pivots) and self.pivots[pos] < p:
            pos += 1
        self.rows.insert(pos, tuple(r))
        self.pivots.insert(pos, p)
        self.generators.append(tuple(Fraction(x) for x in v))
        self.tags.append(tag)
        return True

    def key(self) -> tuple:
        """Canonical hashable form of the spanned space."""
        return tuple(self.rows)

    def spans(self, other: "Basis") -> bool:
        return all(self.contains(g) for g in other.rows)


def basis_insert(basis: Basis, v: Sequence[Fraction], tag: Hashable = None) -> tuple[Basis, bool]:
    """Pure variant of :meth:`Basis.insert`."""
    b = basis.copy()
    changed = b.insert(v, tag)
    return (b if changed else basis), changed


def in_span(basis: Basis, v: Sequence[Fraction]) -> bool:
    return basis.contains(v)


def span_of(vectors: Iterable[Sequence[Fraction]], dim: int) -> Basis:
    b = Basis(dim)
    for v in vectors:
        b.insert(v)
    return b


def rank(a: RatMatrix) -> int:
    if not a:
        return 0
    return span_of(a, len(a[0])).rank


def solve(a: RatMatrix, b: Sequence[Fraction]) -> Optional[RatVector]:
    """One exact solution of ``a @ x = b`` (free variables set to 0), or None."""
    m, n = shape(a)
    _check(m, len(b))
    aug = [list(a[i]) + [Fraction(b[i])] for i in range(m)]
    piv_cols = []
    row = 0
    for col in range(n):
        sel = next((i for i in range(row, m) if aug[i][col]), None)
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for i in range(m):
            if i != row and aug[i][col]:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[row])]
        piv_cols.append(col)
        row += 1
        if row == m:
            break
    if any(aug[i][n] for i in range(row, m)):
        return None
    x = [ZERO] * n
    for i, col in enumerate(piv_cols):
        x[col] = aug[i][n]
    return tuple(x)


# --------------------------------------------------------------------------
# Linear feasibility

RELATIONS = ("<=", "<", "=", ">=", ">")


@dataclass(frozen=True)
class Constraint:
    coeffs: RatVector
    rel: str
    bound: Fraction

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", vec(self.coeffs))
        object.__setattr__(self, "bound", Fraction(self.bound))

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = dot(self.coeffs, x)
        return {
            "<=": lhs <= self.bound,
            "<": lhs < self.bound,
            "=": lhs == self.bound,
            ">=": lhs >= self.bound,
            ">": lhs > self.bound,
        }[self.rel]


@dataclass
class LinearConstraintSystem:
    dim: int
    constraints: list = field(default_factory=list)

    def add(self, coeffs: Sequence[Any], rel: str, bound: Any) -> None:
        c = Constraint(vec(coeffs), rel, Fraction(bound))
        _check(len(c.coeffs), self.dim)
        self.constraints.append(c)

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        _check(len(x), self.dim)
        return all(c.holds(x) for c in self.constraints)


def _phase_one(rows: list, rhs: list, n: int) -> Optional[list]:
    """Find x >= 0 with rows @ x = rhs (rhs already >= 0), or None.

    Phase-1 simplex over an artificial basis, Bland's rule throughout.
    """
    m = len(rows)
    width = n + m
    t = [list(rows[i]) + [ONE if k == i else ZERO for k in range(m)] + [rhs[i]]
         for i in range(m)]
    obj = [ZERO] * (width + 1)
    for j in range(n):
        obj[j] = -sum((t[i][j] for i in range(m)), ZERO)
    obj[width] = -sum(rhs, ZERO)
    basis = [n + i for i in range(m)]

    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = t[i][enter]
            if a > 0:
                ratio = t[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded direction; cannot happen in phase 1
            break
        inv = 1 / t[leave][enter]
        t[leave] = [x * inv for x in t[leave]]
        for i in range(m):
            c = t[i][enter]
            if i != leave and c:
                t[i] = [x - c * y for x, y in zip(t[i], t[leave])]
        c = obj[enter]
        obj = [x - c * y for x, y in zip(obj, t[leave])]
        basis[leave] = enter

    if obj[width] != 0:
        return None
    x = [ZERO] * width
    for i, j in enumerate(basis):
        x[j] = t[i][width]
    return x[:n]


def lp_feasible(system: LinearConstraintSystem) -> Optional[RatVector]:
    """A rational point satisfying every constraint, or None if infeasible.

    Strict inequalities are handled by homogenising: the system in ``x`` is
    feasible iff the cone ``{(y, s) : s > 0, ...}`` is nonempty, and a cone
    with a strictly feasible point also has one with margin 1.
    """
    n = system.dim
    cons = system.constraints
    if not cons:
        return zeros(n)
    strict = any(c.rel in ("<", ">") for c in cons)

    # normalise everything to  a.y  rel  0/b  with rel in {<=, =}
    eqs = []  # (coeffs, rel, bound) with rel "<=" or "="
    for c in cons:
        a, b = list(c.coeffs), c.bound
        rel = c.rel
        if rel in (">=", ">"):
            a, b = [-x for x in a], -b
            rel = "<=" if rel == ">=" else "<"
        if strict:
            # variables (y, s); a.y - b s  rel  0 ; strict gets margin 1
            row = a + [-b]
            if rel == "<":
                eqs.append((row, "<=", -ONE))
            else:
                eqs.append((row, rel, ZERO))
        else:
            eqs.append((a, rel, b))
    nv = n + 1 if strict else n
    if strict:
        eqs.append(([ZERO] * n + [-ONE], "<=", -ONE))  # s >= 1

    # free variables split into positive and negative parts, then slacks
    n_slack = sum(1 for _, rel, _ in eqs if rel == "<=")
    total = 2 * nv + n_slack
    rows, rhs = [], []
    k = 0
    for a, rel, b in eqs:
        row = list(a) + [-x for x in a] + [ZERO] * n_slack
        if rel == "<=":
            row[2 * nv + k] = ONE
            k += 1
        if b < 0:
            row = [-x for x in row]
            b = -b
        rows.append(row)
        rhs.append(b)
    sol = _phase_one(rows, rhs, total)
    if sol is None:
        return None
    y = [sol[i] - sol[nv + i] for i in range(nv)]
    if strict:
        s = y[n]
        x = tuple(v / s for v in y[:n])
    else:
        x = tuple(y)
    if not system.satisfied_by(x):
        raise AssertionError("simplex returned a point violating the system")
    return x
