"""Exact coefficient arithmetic and sparse graded linear algebra.

Everything here works over a prime field F_p (p < 2**31) or over the
rationals.  Field elements are stored as plain Python values in canonical
form: an ``int`` in ``[0, p)`` for F_p and a ``fractions.Fraction`` for Q.
Vectors are sparse ``{basis index: value}`` dictionaries that never hold
zeros.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

_SCALAR_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+)\s*)?$")

PRIME_LIMIT = 2**31


class BasisMismatchError(ValueError):
    """Operands live on different bases or fields."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Coefficient field: ``p == 0`` means Q, otherwise F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0:
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")
            if self.p >= PRIME_LIMIT:
                raise ValueError(f"prime {self.p} exceeds 2**31")

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(p)

    @classmethod
    def from_name(cls, name: str) -> "FieldSpec":
        """Parse ``q``, ``f2``, ``f5``, ... (case-insensitive)."""
        s = name.strip().lower()
        if s in ("q", "qq", "rationals"):
            return cls(0)
        if s.startswith("f") and s[1:].isdigit():
            return cls(int(s[1:]))
        raise ValueError(f"unknown field {name!r}; expected q or fP")

    @property
    def kind(self) -> str:
        return "rationals" if self.p == 0 else "prime"

    @property
    def name(self) -> str:
        return "q" if self.p == 0 else f"f{self.p}"

    @property
    def is_finite(self) -> bool:
        return self.p != 0

    # -- raw arithmetic on canonical values ---------------------------------

    def coerce(self, x) -> int | Fraction:
        if isinstance(x, float):
            raise TypeError("floating point values are not accepted; use int, Fraction or text")
        if self.p:
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise ZeroDivisionError(f"{x} has no image in F_{self.p}")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        return Fraction(x)

    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.p else a * b

    def neg(self, a):
        return (-a) % self.p if self.p else -a

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p) if self.p else 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    @property
    def zero(self):
        return 0 if self.p else Fraction(0)

    @property
    def one(self):
        return 1 if self.p else Fraction(1)

    def sign(self, odd: bool):
        """The scalar (-1)**odd."""
        return self.neg(self.one) if odd else self.one

    def parse(self, text: str):
        m = _SCALAR_RE.match(str(text))
        if not m:
            raise ValueError(f"malformed scalar {text!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        if self.p:
            if den % self.p == 0:
                raise ValueError(f"denominator of {text!r} vanishes in F_{self.p}")
            return num * pow(den, -1, self.p) % self.p
        return Fraction(num, den)

    def format(self, a) -> str:
        return str(a)

    def elements(self) -> range:
        if not self.p:
            raise ValueError("Q is infinite")
        return range(self.p)


@dataclass(frozen=True)
class Scalar:
    """A field element bundled with its field; supports operator arithmetic."""

    field: FieldSpec
    value: int | Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", self.field.coerce(self.value))

    def _other(self, other) -> "int | Fraction":
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise BasisMismatchError("scalars from different fields")
            return other.value
        return self.field.coerce(other)

    def __add__(self, other):
        return Scalar(self.field, self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return Scalar(self.field, self.field.sub(self._other(other), self.value))

    def __mul__(self, other):
        return Scalar(self.field, self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Scalar(self.field, self.field.div(self.value, self._other(other)))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def inverse(self) -> "Scalar":
        return Scalar(self.field, self.field.inv(self.value))

    def __bool__(self):
        return bool(self.value)

    def __str__(self):
        return self.field.format(self.value)


def scalar_parse(text: str, field: FieldSpec) -> Scalar:
    return Scalar(field, field.parse(text))


@dataclass(frozen=True)
class BasisEntry:
    id: str
    degree: int
    component: str = "0"


@dataclass(frozen=True, eq=False)
class GradedBasis:
    """Ordered basis with integer degrees and component labels.

    The order is significant: it fixes pivoting, normalization and
    serialization everywhere downstream.
    """

    entries: tuple[BasisEntry, ...]
    field: FieldSpec
    index: Mapping[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        index = {}
        for i, e in enumerate(entries):
            if e.id in index:
                raise ValueError(f"duplicate basis id {e.id!r}")
            index[e.id] = i
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "_by_degree", None)

    @classmethod
    def build(cls, items: Iterable[tuple], field: FieldSpec) -> "GradedBasis":
        return cls(tuple(BasisEntry(*it) for it in items), field)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[BasisEntry]:
        return iter(self.entries)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GradedBasis):
            return NotImplemented
        return self.field == other.field and self.entries == other.entries

    def __hash__(self):
        return hash((self.field, self.entries))

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def degree(self, i: int) -> int:
        return self.entries[i].degree

    @property
    def degree_bounds(self) -> tuple[int, int] | None:
        if not self.entries:
            return None
        ds = [e.degree for e in self.entries]
        return min(ds), max(ds)

    def indices_of_degree(self, d: int) -> list[int]:
        if self._by_degree is None:
            by = {}
            for i, e in enumerate(self.entries):
                by.setdefault(e.degree, []).append(i)
            object.__setattr__(self, "_by_degree", by)
        return self._by_degree.get(d, [])

    def degrees(self) -> list[int]:
        return sorted({e.degree for e in self.entries})

    # -- vector constructors ------------------------------------------------

    def zero(self) -> "GradedVector":
        return GradedVector(self, {})

    def unit(self, key: str | int) -> "GradedVector":
        i = key if isinstance(key, int) else self.index[key]
        return GradedVector(self, {i: self.field.one})

    def vector(self, coeffs: Mapping[str, object]) -> "GradedVector":
        """Build a vector from ``{id: value}``; values may be text, int or Fraction."""
        out = {}
        for k, v in coeffs.items():
            if k not in self.index:
                raise KeyError(f"unknown basis id {k!r}")
            val = self.field.parse(v) if isinstance(v, str) else self.field.coerce(v)
            if val:
                out[self.index[k]] = val
        return GradedVector(self, out)


MIXED = "mixed"


class GradedVector:
    """Sparse vector on a :class:`GradedBasis`.  Treated as immutable."""

    __slots__ = ("basis", "_c")

    def __init__(self, basis: GradedBasis, coeffs: Mapping[int, object]):
        self.basis = basis
        self._c = {i: v for i, v in coeffs.items() if v}

    @classmethod
    def _trusted(cls, basis, coeffs):
        v = cls.__new__(cls)
        v.basis = basis
        v._c = coeffs
        return v

    @property
    def field(self) -> FieldSpec:
        return self.basis.field

    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._c)

    def items(self) -> list[tuple[int, object]]:
        return sorted(self._c.items())

    def support(self) -> list[int]:
        return sorted(self._c)

    def __getitem__(self, i: int):
        return self._c.get(i, self.field.zero)

    def coeff(self, id_: str):
        return self[self.basis.index[id_]]

    def to_dict(self) -> dict[str, object]:
        return {self.basis.entries[i].id: v for i, v in sorted(self._c.items())}

    def to_text(self) -> dict[str, str]:
        return {k: self.field.format(v) for k, v in self.to_dict().items()}

    def __len__(self):
        return len(self._c)

    def __bool__(self):
        return bool(self._c)

    @property
    def degree(self) -> int | str | None:
        """Common degree of the support; ``None`` for zero, ``"mixed"`` otherwise."""
        ds = {self.basis.entries[i].degree for i in self._c}
        if not ds:
            return None
        if len(ds) == 1:
            return ds.pop()
        return MIXED

    def is_homogeneous(self) -> bool:
        return self.degree != MIXED

    def __eq__(self, other):
        if not isinstance(other, GradedVector):
            return NotImplemented
        return self.basis == other.basis and self._c == other._c

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for k, v in self.to_dict().items():
            parts.append(f"{self.field.format(v)}*{k}")
        return " + ".join(parts)

    def _check(self, other: "GradedVector"):
        if self.basis is not other.basis and self.basis != other.basis:
            raise BasisMismatchError("vectors live on different bases")

    def __add__(self, other: "GradedVector") -> "GradedVector":
        self._check(other)
        acc = dict(self._c)
        axpy(acc, self.field.one, other, self.field)
        return GradedVector._trusted(self.basis, acc)

    def __sub__(self, other: "GradedVector") -> "GradedVector":
        self._check(other)
        acc = dict(self._c)
        axpy(acc, self.field.neg(self.field.one), other, self.field)
        return GradedVector._trusted(self.basis, acc)

    def __neg__(self) -> "GradedVector":
        f = self.field
        return GradedVector._trusted(self.basis, {i: f.neg(v) for i, v in self._c.items()})

    def scale(self, s) -> "GradedVector":
        f = self.field
        if isinstance(s, Scalar):
            s = s.value
        s = f.coerce(s)
        if not s:
            return GradedVector._trusted(self.basis, {})
        return GradedVector._trusted(self.basis, {i: f.mul(s, v) for i, v in self._c.items()})

    def leading(self) -> tuple[int, object] | None:
        """First nonzero entry in basis order."""
        if not self._c:
            return None
        i = min(self._c)
        return i, self._c[i]

    def normalized(self) -> "GradedVector":
        """Projective representative: first nonzero coefficient set to 1."""
        lead = self.leading()
        if lead is None or lead[1] == self.field.one:
            return self
        return self.scale(self.field.inv(lead[1]))

    def key(self) -> tuple:
        return tuple(sorted(self._c.items()))

    def dense(self) -> list:
        return [self._c.get(i, self.field.zero) for i in range(len(self.basis))]


def axpy(acc: dict, s, v: GradedVector, field: FieldSpec) -> None:
    """In place ``acc += s * v``, dropping entries that cancel."""
    if not s:
        return
    p = field.p
    for i, x in v._c.items():
        y = acc.get(i)
        t = (s * x) % p if p else s * x
        if y is None:
            acc[i] = t
        else:
            y = (y + t) % p if p else y + t
            if y:
                acc[i] = y
            else:
                del acc[i]


def vector_combine(terms: Sequence[tuple[object, GradedVector]]) -> GradedVector:
    """Exact linear combination of vectors sharing a basis."""
    if not terms:
        raise ValueError("vector_combine needs at least one term to fix the basis")
    basis = terms[0][1].basis
    f = basis.field
    acc: dict = {}
    for s, v in terms:
        if v.basis is not basis and v.basis != basis:
            raise BasisMismatchError("vectors live on different bases")
        if isinstance(s, Scalar):
            if s.field != f:
                raise BasisMismatchError("scalar from a different field")
            s = s.value
        axpy(acc, f.coerce(s), v, f)
    return GradedVector._trusted(basis, acc)


class GradedMap:
    """Sparse linear map between graded bases with a fixed degree shift.

    ``columns`` maps a source index to the image of that basis vector.
    """

    __slots__ = ("source", "target", "shift", "columns")

    def __init__(self, source: GradedBasis, target: GradedBasis, shift: int,
                 columns: Mapping[int, GradedVector] | None = None, *, check: bool = True):
        if source.field != target.field:
            raise BasisMismatchError("source and target fields differ")
        self.source = source
        self.target = target
        self.shift = shift
        cols = {}
        for j, v in (columns or {}).items():
            if not v:
                continue
            if v.basis != target:
                raise BasisMismatchError("column lives on the wrong basis")
            if check:
                want = source.degree(j) + shift
                for i in v._c:
                    if target.degree(i) != want:
                        raise ValueError(
                            f"map entry {source.entries[j].id} -> {target.entries[i].id} "
                            f"breaks degree shift {shift}")
            cols[j] = v
        self.columns = cols

    @classmethod
    def zero(cls, source, target, shift=0) -> "GradedMap":
        return cls(source, target, shift, {})

    @classmethod
    def identity(cls, basis: GradedBasis) -> "GradedMap":
        return cls(basis, basis, 0, {i: basis.unit(i) for i in range(len(basis))})

    @classmethod
    def from_table(cls, source, target, shift, table: Mapping[str, Mapping[str, object]]):
        return cls(source, target, shift,
                   {source.index[k]: target.vector(v) for k, v in table.items()})

    def column(self, j: int) -> GradedVector:
        v = self.columns.get(j)
        return v if v is not None else self.target.zero()

    def __call__(self, v: GradedVector) -> GradedVector:
        return map_apply(self, v)

    def __eq__(self, other):
        if not isinstance(other, GradedMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.shift == other.shift and self.columns == other.columns)

    def is_zero(self) -> bool:
        return not self.columns

    def compose(self, first: "GradedMap") -> "GradedMap":
        """``self ∘ first``."""
        if first.target != self.source:
            raise BasisMismatchError("cannot compose: bases differ")
        cols = {j: map_apply(self, v) for j, v in first.columns.items()}
        return GradedMap(first.source, self.target, first.shift + self.shift, cols, check=False)

    def to_table(self) -> dict[str, dict[str, str]]:
        out = {}
        for j in sorted(self.columns):
            out[self.source.entries[j].id] = self.columns[j].to_text()
        return out

    def __repr__(self):
        return f"GradedMap(shift={self.shift}, {self.to_table()})"


def map_apply(m: GradedMap, v: GradedVector) -> GradedVector:
    if v.basis is not m.source and v.basis != m.source:
        raise BasisMismatchError("vector does not live on the map's source")
    f = m.target.field
    acc: dict = {}
    for j, x in v._c.items():
        col = m.columns.get(j)
        if col is not None:
            axpy(acc, x, col, f)
    return GradedVector._trusted(m.target, acc)


class Echelon:
    """Incremental reduced row echelon form with provenance tracking.

    Rows are kept fully reduced: each pivot column is zero in every other
    row, pivots are the lowest basis index of their row and are scaled to 1.
    ``combos[k]`` expresses row ``k`` in terms of the inserted generators.
    """

    def __init__(self, basis: GradedBasis):
        self.basis = basis
        self.field = basis.field
        self.rows: list[dict] = []
        self.pivots: list[int] = []
        self.combos: list[dict] = []
        self._pivot_row: dict[int, int] = {}
        self.n_inserted = 0

    def __len__(self):
        return len(self.rows)

    def reduce(self, v: GradedVector) -> tuple[dict, dict]:
        """Return ``(residual, combo)`` with ``v = residual + sum combo[g] * generator_g``."""
        f = self.field
        res = dict(v._c)
        combo: dict = {}
        for piv, k in list(self._pivot_row.items()):
            c = res.get(piv)
            if c:
                nc = f.neg(c)
                _axpy_raw(res, nc, self.rows[k], f)
                _axpy_raw(combo, c, self.combos[k], f)
        return res, combo

    def add(self, v: GradedVector) -> bool:
        """Insert a generator; returns True iff it enlarged the span."""
        if v.basis is not self.basis and v.basis != self.basis:
            raise BasisMismatchError("vector does not live on the echelon basis")
        f = self.field
        g = self.n_inserted
        self.n_inserted += 1
        res, combo = self.reduce(v)
        if not res:
            return False
        # residual = v - sum combo*gen  ->  row in terms of generators
        row_combo = {h: f.neg(c) for h, c in combo.items()}
        row_combo[g] = f.one
        piv = min(res)
        s = f.inv(res[piv])
        if s != f.one:
            res = {i: f.mul(s, x) for i, x in res.items()}
            row_combo = {h: f.mul(s, x) for h, x in row_combo.items() if f.mul(s, x)}
        for k, row in enumerate(self.rows):
            c = row.get(piv)
            if c:
                nc = f.neg(c)
                _axpy_raw(row, nc, res, f)
                _axpy_raw(self.combos[k], nc, row_combo, f)
        k = len(self.rows)
        self.rows.append(res)
        self.pivots.append(piv)
        self.combos.append(row_combo)
        self._pivot_row[piv] = k
        return True

    def contains(self, v: GradedVector) -> bool:
        res, _ = self.reduce(v)
        return not res

    def solve(self, v: GradedVector) -> dict | None:
        """Coefficients over inserted generators summing to ``v``, or None."""
        res, combo = self.reduce(v)
        return None if res else combo

    def basis_vectors(self) -> list[GradedVector]:
        """Reduced echelon basis ordered by pivot."""
        order = sorted(range(len(self.rows)), key=lambda k: self.pivots[k])
        return [GradedVector._trusted(self.basis, dict(self.rows[k])) for k in order]

    def basis_with_combos(self) -> list[tuple[GradedVector, dict]]:
        order = sorted(range(len(self.rows)), key=lambda k: self.pivots[k])
        return [(GradedVector._trusted(self.basis, dict(self.rows[k])), dict(self.combos[k]))
                for k in order]


def _axpy_raw(acc: dict, s, src: dict, f: FieldSpec) -> None:
    p = f.p
    for i, x in src.items():
        t = (s * x) % p if p else s * x
        y = acc.get(i)
        if y is None:
            if t:
                acc[i] = t
        else:
            y = (y + t) % p if p else y + t
            if y:
                acc[i] = y
            else:
                del acc[i]


def _common_basis(vectors: Sequence[GradedVector], v: GradedVector | None = None) -> GradedBasis:
    basis = v.basis if v is not None else vectors[0].basis
    for w in vectors:
        if w.basis is not basis and w.basis != basis:
            raise BasisMismatchError("vectors live on different bases")
    return basis


def image_membership(generators: Sequence[GradedVector], v: GradedVector) -> list | None:
    """Coefficients ``c`` with ``sum c_i g_i == v``, or None when ``v`` is outside the span.

    Free generators (those dependent on earlier ones) get coefficient zero,
    so earlier generators are always preferred.
    """
    basis = _common_basis(generators, v)
    ech = Echelon(basis)
    for g in generators:
        ech.add(g)
    combo = ech.solve(v)
    if combo is None:
        return None
    f = basis.field
    return [combo.get(k, f.zero) for k in range(len(generators))]


def span_closure(seed: Sequence[GradedVector], operators: Sequence[GradedMap],
                 basis: GradedBasis | None = None) -> list[GradedVector]:
    """Smallest operator-invariant subspace containing ``seed``, as an RREF basis."""
    if basis is None:
        if seed:
            basis = seed[0].basis
        elif operators:
            basis = operators[0].source
        else:
            raise ValueError("cannot infer the basis of an empty closure")
    for m in operators:
        if m.source != basis or m.target != basis:
            raise BasisMismatchError("operator is not an endomorphism of the seed basis")
    _common_basis(seed, basis.zero())
    ech = Echelon(basis)
    queue = []
    for s in seed:
        if ech.add(s):
            queue.append(s)
    while queue:
        w = queue.pop(0)
        for m in operators:
            img = map_apply(m, w)
            if img and ech.add(img):
                queue.append(img)
    return ech.basis_vectors()


def independent_subset(vectors: Sequence[GradedVector]) -> list[int]:
    """Indices of the greedy (earliest-first) maximal independent subset."""
    if not vectors:
        return []
    ech = Echelon(vectors[0].basis)
    return [k for k, v in enumerate(vectors) if ech.add(v)]


def projective_points(rows: Sequence[GradedVector]) -> Iterator[tuple[tuple, GradedVector]]:
    """Every normalized nonzero vector in the span of an RREF basis (finite fields only).

    Yields ``(coefficients, vector)``; the first nonzero coefficient is 1,
    which makes the vector normalized as well.
    """
    if not rows:
        return
    f = rows[0].field
    if not f.is_finite:
        raise ValueError("projective points are only enumerable over finite fields")
    r = len(rows)
    p = f.p
    for lead in range(r):
        tail = r - lead - 1
        for code in range(p ** tail):
            coeffs = [0] * r
            coeffs[lead] = 1
            c = code
            for k in range(r - 1, lead, -1):
                coeffs[k] = c % p
                c //= p
            vec = vector_combine([(coeffs[k], rows[k]) for k in range(r)])
            yield tuple(coeffs), vec
