"""Filtered cochain complexes, spectral invariants and shift-bound propagation.

A complex has generators with exact rational levels and a degree +1
differential that strictly lowers the level along every nonzero entry.  The
level of a chain is the largest level in its support.  Operators carry a
declared bound ``C``: every entry may raise the level by at most ``C``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import jsonschema
import numpy as np

from . import kernels
from .bvmodel import LoopModel, op_P
from .exactcore import (
    BasisEntry,
    Echelon,
    FieldSpec,
    GradedBasis,
    GradedMap,
    GradedVector,
    map_apply,
)
from .models import Certificate, SchemaError, dumps_canonical

SCHEMA_VERSION = 1


class ComplexError(ValueError):
    def __init__(self, message: str, witness: tuple | None = None):
        super().__init__(message)
        self.witness = witness


class OperatorError(ValueError):
    def __init__(self, message: str, witness: tuple | None = None):
        super().__init__(message)
        self.witness = witness


class BoundViolation(AssertionError):
    pass


def parse_level(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("levels must be exact (int, Fraction or 'p/q' text), not float")
    return Fraction(x)


def _fmt(q: Fraction | None) -> str | None:
    if q is None:
        return None
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    basis: GradedBasis
    levels: tuple[Fraction, ...]
    d: GradedMap

    @property
    def field(self) -> FieldSpec:
        return self.basis.field

    def level_of(self, gid: str) -> Fraction:
        return self.levels[self.basis.index[gid]]

    def chain(self, coeffs: Mapping[str, object]) -> GradedVector:
        return self.basis.vector(coeffs)

    def chain_level(self, x: GradedVector) -> Fraction | None:
        if not x:
            return None
        return max(self.levels[i] for i in x._c)

    def distinct_levels(self) -> list[Fraction]:
        return sorted(set(self.levels))

    def boundaries(self, degree: int) -> list[GradedVector]:
        """d of every generator of degree ``degree - 1``."""
        return [self.d.column(j) for j in self.basis.indices_of_degree(degree - 1)]

    def shift_levels(self, delta) -> "FilteredComplex":
        delta = parse_level(delta)
        return FilteredComplex(self.basis, tuple(l + delta for l in self.levels), self.d)

    def with_levels(self, levels: Sequence) -> "FilteredComplex":
        return complex_build([(e.id, e.degree, l) for e, l in zip(self.basis, levels)],
                             self.d.to_table(), self.field)


def complex_build(generators: Sequence[tuple], differential, field: FieldSpec | None = None
                  ) -> FilteredComplex:
    """Validate ``(id, degree, level)`` generators and a differential table ``{src: {tgt: c}}``."""
    field = field or FieldSpec.rationals()
    basis = GradedBasis(tuple(BasisEntry(g[0], int(g[1]), "0") for g in generators), field)
    levels = tuple(parse_level(g[2]) for g in generators)
    if isinstance(differential, GradedMap):
        d = differential
        if d.source != basis or d.target != basis or d.shift != 1:
            raise ComplexError("differential must be a degree +1 endomorphism of the generators")
    else:
        try:
            d = GradedMap.from_table(basis, basis, 1, differential)
        except (ValueError, KeyError) as exc:
            raise ComplexError(f"bad differential: {exc}") from None
    ids = basis.ids
    for j, col in sorted(d.columns.items()):
        for i in col._c:
            if not levels[i] < levels[j]:
                raise ComplexError(
                    f"differential entry {ids[j]} -> {ids[i]} does not strictly lower the level "
                    f"({_fmt(levels[j])} -> {_fmt(levels[i])})", (ids[j], ids[i]))
    for j in range(len(basis)):
        dd = map_apply(d, d.column(j))
        if dd:
            i = min(dd._c)
            raise ComplexError(f"d∘d is nonzero: d(d({ids[j]})) has {ids[i]}-coefficient "
                               f"{field.format(dd._c[i])}", (ids[j], ids[i]))
    return FilteredComplex(basis, levels, d)


def _check_cycle(cx: FilteredComplex, x: GradedVector) -> int:
    if x.basis != cx.basis:
        raise ComplexError("chain does not live on the complex")
    deg = x.degree
    if deg is None:
        raise ComplexError("the zero chain represents the zero class")
    if deg == "mixed":
        raise ComplexError("chain is not homogeneous")
    if map_apply(cx.d, x):
        raise ComplexError("chain is not a cycle")
    return deg


def spectral_invariant(cx: FilteredComplex, x: GradedVector) -> Fraction:
    """Least level ``l`` such that [x] is represented by a cycle supported on levels <= l.

    Equivalently the infimum of ``t`` with [x] in the image of the strict
    sublevel complex ``{level < t}``; always a generator level.
    """
    deg = _check_cycle(cx, x)
    ech = Echelon(cx.basis)
    for b in cx.boundaries(deg):
        ech.add(b)
    if ech.contains(x):
        raise ComplexError("chain is a boundary: the class is zero")
    gens = sorted(cx.basis.indices_of_degree(deg), key=lambda i: (cx.levels[i], i))
    k = 0
    while k < len(gens):
        lvl = cx.levels[gens[k]]
        while k < len(gens) and cx.levels[gens[k]] == lvl:
            ech.add(cx.basis.unit(gens[k]))
            k += 1
        if ech.contains(x):
            return lvl
    raise AssertionError("a cycle always lies in the span of its degree's generators")


BRUTE_MAX_GENERATORS = 12


def brute_force_c(cx: FilteredComplex, x: GradedVector) -> Fraction:
    """min over all cycles y ~ x of the top level of y, by exhaustive enumeration."""
    f = cx.field
    if f.p not in (2, 3):
        raise ValueError("brute_force_c only runs over F_2 or F_3")
    if len(cx.basis) > BRUTE_MAX_GENERATORS:
        raise ValueError(f"more than {BRUTE_MAX_GENERATORS} generators")
    deg = _check_cycle(cx, x)
    nn = len(cx.basis)
    distinct = cx.distinct_levels()
    rank = {l: r for r, l in enumerate(distinct)}
    ranks = np.array([rank[l] for l in cx.levels], np.int64)
    bnd = cx.boundaries(deg)
    bounds = np.zeros((len(bnd), nn), np.int64)
    for r, b in enumerate(bnd):
        for i, v in b._c.items():
            bounds[r, i] = v
    xv = np.array(x.dense(), np.int64)
    best = kernels.min_max_level(xv, bounds, ranks, np.int64(f.p))
    if best < 0:
        raise ComplexError("chain is a boundary: the class is zero")
    return distinct[best]


def spectral_norm(cx: FilteredComplex, e: GradedVector, mu: GradedVector) -> Fraction:
    return spectral_invariant(cx, mu) - spectral_invariant(cx, e)


def same_class(cx: FilteredComplex, x: GradedVector, y: GradedVector) -> bool:
    diff = x - y
    if not diff:
        return True
    if diff.degree == "mixed":
        return False
    ech = Echelon(cx.basis)
    for b in cx.boundaries(diff.degree):
        ech.add(b)
    return ech.contains(diff)


# -- shifted operators ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ShiftedOperator:
    complex: FilteredComplex
    map: GradedMap
    C: Fraction
    graded_sign: bool = False
    name: str = ""

    @property
    def shift(self) -> int:
        return self.map.shift


def make_operator(cx: FilteredComplex, table, C, shift: int = 0, graded_sign: bool = False,
                  name: str = "") -> ShiftedOperator:
    """Validate a chain map ``{src: {tgt: c}}`` (or a GradedMap) against its bound ``C``.

    The chain law is ``T∘d = d∘T``, or ``T∘d = (-1)^shift d∘T`` with ``graded_sign``.
    """
    C = parse_level(C)
    if C < 0:
        raise OperatorError("shift bound C must be >= 0")
    if isinstance(table, GradedMap):
        T = table
        if T.source != cx.basis or T.target != cx.basis:
            raise OperatorError("operator must be an endomorphism of the complex")
    else:
        try:
            T = GradedMap.from_table(cx.basis, cx.basis, shift, table)
        except (ValueError, KeyError) as exc:
            raise OperatorError(f"bad operator: {exc}") from None
    f = cx.field
    ids = cx.basis.ids
    for j, col in sorted(T.columns.items()):
        for i in col._c:
            if cx.levels[i] > cx.levels[j] + C:
                raise OperatorError(
                    f"{name or 'operator'} entry {ids[j]} -> {ids[i]} raises the level by "
                    f"{_fmt(cx.levels[i] - cx.levels[j])} > C = {_fmt(C)}", (ids[j], ids[i]))
    sign = f.sign(bool(T.shift & 1)) if graded_sign else f.one
    for j in range(len(cx.basis)):
        e = cx.basis.unit(j)
        lhs = map_apply(T, map_apply(cx.d, e))
        rhs = map_apply(cx.d, map_apply(T, e)).scale(sign)
        if lhs != rhs:
            raise OperatorError(f"{name or 'operator'} is not a chain map at {ids[j]}", (ids[j],))
    return ShiftedOperator(cx, T, C, graded_sign, name)


@dataclass(frozen=True)
class ShiftedImage:
    chain: GradedVector
    level_in: Fraction | None
    level_out: Fraction | None
    slack: Fraction | None


def shifted_apply(op: ShiftedOperator, x: GradedVector) -> ShiftedImage:
    """Apply ``op`` and check level(T x) <= level(x) + C; slack is None for a zero image."""
    cx = op.complex
    y = map_apply(op.map, x)
    lin, lout = cx.chain_level(x), cx.chain_level(y)
    if lout is None:
        return ShiftedImage(y, lin, None, None)
    slack = lin + op.C - lout
    if slack < 0:
        raise BoundViolation(f"{op.name or 'operator'}: level {_fmt(lout)} exceeds "
                             f"{_fmt(lin)} + {_fmt(op.C)}")
    return ShiftedImage(y, lin, lout, slack)


@dataclass(frozen=True)
class Inequality:
    label: str
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_json(self) -> dict:
        return {"label": self.label, "lhs": _fmt(self.lhs), "rhs": _fmt(self.rhs),
                "holds": self.holds, "strict": self.lhs < self.rhs}


@dataclass
class BoundReport:
    levels: list[Fraction]
    slacks: list[Fraction]
    C: list[Fraction]
    c_e: Fraction
    c_mu: Fraction
    inequalities: list[Inequality] = field(default_factory=list)

    @property
    def total_C(self) -> Fraction:
        return sum(self.C, Fraction(0))

    @property
    def gamma(self) -> Fraction:
        return self.c_mu - self.c_e

    @property
    def e_optimal(self) -> bool:
        return self.levels[0] == self.c_e

    @property
    def bound(self) -> Fraction:
        return self.total_C + (self.levels[0] - self.c_e)

    @property
    def certified(self) -> bool:
        return all(q.holds for q in self.inequalities)

    @property
    def tight(self) -> bool:
        return self.gamma == self.bound

    def to_json(self) -> dict:
        return {
            "trace_levels": [_fmt(l) for l in self.levels],
            "step_slack": [_fmt(s) for s in self.slacks],
            "C": [_fmt(c) for c in self.C],
            "sum_C": _fmt(self.total_C),
            "c_e": _fmt(self.c_e),
            "c_mu": _fmt(self.c_mu),
            "gamma": _fmt(self.gamma),
            "bound": _fmt(self.bound),
            "e_level_optimal": self.e_optimal,
            "certified": self.certified,
            "tight": self.tight,
            "inequalities": [q.to_json() for q in self.inequalities],
        }


def propagate_bound(cx: FilteredComplex, e_chain: GradedVector, ops: Sequence[ShiftedOperator],
                    mu_cls: GradedVector) -> BoundReport:
    """Push ``e_chain`` through ``ops`` and certify ``gamma <= sum C + (level(e) - c(e))``."""
    _check_cycle(cx, e_chain)
    _check_cycle(cx, mu_cls)
    x = e_chain
    levels = [cx.chain_level(x)]
    slacks = []
    ineqs = []
    for j, op in enumerate(ops, start=1):
        if op.complex is not cx:
            raise OperatorError(f"operator {j} belongs to another complex")
        img = shifted_apply(op, x)
        if img.level_out is None:
            raise ComplexError(f"trace vanishes at step {j}")
        ineqs.append(Inequality(f"level(x_{j}) <= level(x_{j - 1}) + C_{j}",
                                img.level_out, img.level_in + op.C))
        levels.append(img.level_out)
        slacks.append(img.slack)
        x = img.chain
    if not same_class(cx, x, mu_cls):
        raise ComplexError("trace does not land in the class of mu")
    c_e = spectral_invariant(cx, e_chain)
    c_mu = spectral_invariant(cx, mu_cls)
    rep = BoundReport(levels, slacks, [op.C for op in ops], c_e, c_mu)
    ineqs.append(Inequality("c(mu) <= level(x_N)", c_mu, levels[-1]))
    ineqs.append(Inequality("level(x_N) <= level(x_0) + sum C", levels[-1],
                            levels[0] + rep.total_C))
    ineqs.append(Inequality("gamma <= sum C + level(x_0) - c(e)", rep.gamma, rep.bound))
    if rep.e_optimal:
        ineqs.append(Inequality("gamma <= sum C", rep.gamma, rep.total_C))
    rep.inequalities = ineqs
    for q in ineqs:
        if not q.holds:
            raise BoundViolation(f"inequality fails: {q.label} ({_fmt(q.lhs)} > {_fmt(q.rhs)})")
    return rep


# -- scenarios ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    complex: FilteredComplex
    ops: tuple[ShiftedOperator, ...]
    e: GradedVector
    mu: GradedVector

    def run(self) -> BoundReport:
        return propagate_bound(self.complex, self.e, self.ops, self.mu)


def scenario_from_certificate(model: LoopModel, cert: Certificate, levels: Sequence,
                              name: str | None = None) -> Scenario:
    """Zero-differential complex on H_*(L) with operators P_{a_j} and their least valid C_j."""
    bb = model.base_basis
    gens = [(e.id, e.degree, l) for e, l in zip(bb, levels)]
    cx = complex_build(gens, {}, model.field)
    ops = []
    for j, a in enumerate(cert.letters, start=1):
        P = op_P(model, a)
        T = GradedMap(cx.basis, cx.basis, P.shift,
                      {c: GradedVector._trusted(cx.basis, dict(v._c))
                       for c, v in P.columns.items()})
        rise = [cx.levels[i] - cx.levels[c] for c, v in T.columns.items() for i in v._c]
        C = max([Fraction(0)] + rise)
        ops.append(make_operator(cx, T, C, name=f"P_a{j}"))
    e = GradedVector._trusted(cx.basis, dict(model.pt_class._c))
    mu = GradedVector._trusted(cx.basis, dict(model.fundamental_class._c))
    return Scenario(name or f"{model.name}-certificate", cx, tuple(ops), e, mu)


_VEC = {"type": "object", "additionalProperties": {"type": "string"}}
_TABLE = {"type": "array", "items": {
    "type": "object", "required": ["source", "image"],
    "properties": {"source": {"type": "string"}, "image": _VEC}, "additionalProperties": False}}
SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "field", "generators", "differential", "operators",
                 "e", "mu"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "field": {"type": "string", "pattern": "^(q|f[0-9]+)$"},
        "generators": {"type": "array", "minItems": 1, "items": {
            "type": "object", "required": ["id", "degree", "level"],
            "properties": {"id": {"type": "string"}, "degree": {"type": "integer"},
                           "level": {"type": "string"}},
            "additionalProperties": False}},
        "differential": _TABLE,
        "operators": {"type": "array", "items": {
            "type": "object", "required": ["name", "shift", "C", "map"],
            "properties": {"name": {"type": "string"}, "shift": {"type": "integer"},
                           "C": {"type": "string"}, "graded_sign": {"type": "boolean"},
                           "map": _TABLE},
            "additionalProperties": False}},
        "e": _VEC,
        "mu": _VEC,
    },
}


def scenario_to_json(sc: Scenario) -> dict:
    cx = sc.complex

    def table(m: GradedMap):
        return sorted(({"source": k, "image": v} for k, v in m.to_table().items()),
                      key=lambda r: r["source"])

    return {
        "schema_version": SCHEMA_VERSION,
        "name": sc.name,
        "field": cx.field.name,
        "generators": [{"id": e.id, "degree": e.degree, "level": _fmt(l)}
                       for e, l in zip(cx.basis, cx.levels)],
        "differential": table(cx.d),
        "operators": [{"name": op.name, "shift": op.shift, "C": _fmt(op.C),
                       "graded_sign": op.graded_sign, "map": table(op.map)} for op in sc.ops],
        "e": sc.e.to_text(),
        "mu": sc.mu.to_text(),
    }


def scenario_from_json(doc: dict) -> Scenario:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"scenario schema violation at {where}: {exc.message}") from None
    f = FieldSpec.from_name(doc["field"])
    gens = [(g["id"], g["degree"], g["level"]) for g in doc["generators"]]
    try:
        cx = complex_build(gens, {r["source"]: r["image"] for r in doc["differential"]}, f)
        ops = tuple(make_operator(cx, {r["source"]: r["image"] for r in o["map"]}, o["C"],
                                  o["shift"], o.get("graded_sign", False), o["name"])
                    for o in doc["operators"])
        e, mu = cx.chain(doc["e"]), cx.chain(doc["mu"])
    except KeyError as exc:
        raise ComplexError(f"unknown generator id {exc}") from None
    return Scenario(doc["name"], cx, ops, e, mu)


def scenario_write(sc: Scenario, path) -> None:
    Path(path).write_text(dumps_canonical(scenario_to_json(sc)), encoding="utf-8")


def scenario_read(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return scenario_from_json(doc)


def slack_scenario() -> Scenario:
    """Two unit-bound steps whose intermediate class has a cheaper representative."""
    cx = complex_build([("e", 0, 0), ("u", 0, 1), ("w", 0, 2), ("y", -1, 3)],
                       {"y": {"w": "1", "u": "-1"}})
    t1 = make_operator(cx, {"e": {"u": "1"}}, 1, name="T1")
    t2 = make_operator(cx, {"u": {"w": "1"}, "w": {"w": "1"}}, 1, name="T2")
    return Scenario("slack", cx, (t1, t2), cx.chain({"e": "1"}), cx.chain({"w": "1"}))


def tight_scenario() -> Scenario:
    cx = complex_build([("e", 0, 0), ("m", 0, 2)], {})
    t = make_operator(cx, {"e": {"m": "1"}}, 2, name="T")
    return Scenario("tight", cx, (t,), cx.chain({"e": "1"}), cx.chain({"m": "1"}))
