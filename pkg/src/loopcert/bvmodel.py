"""Truncated loop-homology BV models and the operators built from them.

Degrees are stored homologically.  Every Koszul sign is taken in the
shifted grading ``degree - n`` (only its parity matters), where the loop
product has degree 0 and the unit is ``iota([L])``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .exactcore import (
    FieldSpec,
    GradedBasis,
    GradedMap,
    GradedVector,
    axpy,
    map_apply,
)


class ModelError(ValueError):
    """Structurally malformed model (degrees, bases, missing classes)."""


class WindowOverflowError(ArithmeticError):
    """A computation touched a product that escapes the truncation window."""

    def __init__(self, left: str, right: str):
        super().__init__(f"product {left} * {right} lies outside the truncation window")
        self.pair = (left, right)


class NonHomogeneousError(ValueError):
    pass


class _OutOfWindow:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "OUT_OF_WINDOW"

    def __reduce__(self):
        return (_OutOfWindow, ())


OUT_OF_WINDOW = _OutOfWindow()


@dataclass(frozen=True)
class Window:
    min_degree: int
    max_degree: int
    components: tuple[str, ...]


@dataclass(frozen=True, eq=True)
class LoopModel:
    name: str
    n: int
    field: FieldSpec
    loop_basis: GradedBasis
    base_basis: GradedBasis
    # (i, j) -> product vector or OUT_OF_WINDOW; missing pairs multiply to zero
    product: Mapping[tuple[int, int], object]
    delta: GradedMap
    intersection: Mapping[tuple[int, int], GradedVector]
    ev: GradedMap
    iota: GradedMap
    pt_class: GradedVector
    fundamental_class: GradedVector
    window: Window
    orientable: bool = True
    provenance: tuple[tuple[str, str], ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        # zero table entries are the same as missing ones; drop them so equality is canonical
        object.__setattr__(self, "product", {k: v for k, v in self.product.items()
                                             if v is OUT_OF_WINDOW or v})
        object.__setattr__(self, "intersection",
                           {k: v for k, v in self.intersection.items() if v})
        _validate_structure(self)

    __hash__ = None

    def shifted_parity(self, i: int) -> int:
        return (self.loop_basis.degree(i) - self.n) & 1

    def base_parity(self, i: int) -> int:
        return (self.base_basis.degree(i) - self.n) & 1

    @property
    def unit(self) -> GradedVector:
        return map_apply(self.iota, self.fundamental_class)

    def replace(self, **changes) -> "LoopModel":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__ if f != "_cache"}
        kw.update(changes)
        return LoopModel(**kw)


def _validate_structure(m: LoopModel) -> None:
    if m.n < 1:
        raise ModelError("n must be >= 1")
    lb, bb = m.loop_basis, m.base_basis
    for b, name in ((lb, "loop_basis"), (bb, "base_basis")):
        if b.field != m.field:
            raise ModelError(f"{name} is over the wrong field")
    for e in bb:
        if not 0 <= e.degree <= m.n:
            raise ModelError(f"base class {e.id} has degree {e.degree} outside 0..{m.n}")
    for (i, j), v in m.product.items():
        if v is OUT_OF_WINDOW:
            continue
        if v.basis != lb:
            raise ModelError("product entry on the wrong basis")
        want = lb.degree(i) + lb.degree(j) - m.n
        if v and v.degree != want:
            raise ModelError(
                f"product {lb.entries[i].id}*{lb.entries[j].id} must have degree {want}")
    for (i, j), v in m.intersection.items():
        want = bb.degree(i) + bb.degree(j) - m.n
        if v.basis != bb:
            raise ModelError("intersection entry on the wrong basis")
        if v and v.degree != want:
            raise ModelError(
                f"intersection {bb.entries[i].id}.{bb.entries[j].id} must have degree {want}")
    checks = ((m.delta, lb, lb, 1, "delta"), (m.ev, lb, bb, 0, "ev"), (m.iota, bb, lb, 0, "iota"))
    for mp, src, tgt, shift, name in checks:
        if mp.source != src or mp.target != tgt:
            raise ModelError(f"{name} has the wrong source or target basis")
        if mp.shift != shift:
            raise ModelError(f"{name} must have shift {shift}")
    if m.pt_class.basis != bb or m.fundamental_class.basis != bb:
        raise ModelError("[pt] and [L] must live on the base basis")
    if m.pt_class.degree != 0:
        raise ModelError("[pt] must be a nonzero class of degree 0")
    if m.fundamental_class.degree != m.n:
        raise ModelError(f"[L] must be a nonzero class of degree {m.n}")


# -- operations --------------------------------------------------------------


def cs_product(model: LoopModel, x: GradedVector, y: GradedVector) -> GradedVector:
    """Bilinear extension of the product table."""
    lb = model.loop_basis
    if x.basis != lb or y.basis != lb:
        raise ValueError("cs_product operands must live on the loop basis")
    f = model.field
    table = model.product
    acc: dict = {}
    for i, xi in x._c.items():
        for j, yj in y._c.items():
            e = table.get((i, j))
            if e is None:
                continue
            if e is OUT_OF_WINDOW:
                raise WindowOverflowError(lb.entries[i].id, lb.entries[j].id)
            axpy(acc, f.mul(xi, yj), e, f)
    return GradedVector._trusted(lb, acc)


def intersect(model: LoopModel, u: GradedVector, v: GradedVector) -> GradedVector:
    """Intersection product on H_*(L)."""
    bb = model.base_basis
    f = model.field
    acc: dict = {}
    for i, ui in u._c.items():
        for j, vj in v._c.items():
            e = model.intersection.get((i, j))
            if e is not None:
                axpy(acc, f.mul(ui, vj), e, f)
    return GradedVector._trusted(bb, acc)


def bv_delta(model: LoopModel, x: GradedVector) -> GradedVector:
    return map_apply(model.delta, x)


def _homogeneous_degree(v: GradedVector, what: str) -> int | None:
    d = v.degree
    if d == "mixed":
        raise NonHomogeneousError(f"{what} must be homogeneous")
    return d


def string_bracket(model: LoopModel, b: GradedVector, a: GradedVector) -> GradedVector:
    """``[b, a] = (-1)^|b| (Δ(b*a) - Δ(b)*a - (-1)^|b| b*Δ(a))``, |b| shifted."""
    db = _homogeneous_degree(b, "b")
    _homogeneous_degree(a, "a")
    lb = model.loop_basis
    if db is None or not a:
        return lb.zero()
    f = model.field
    odd = (db - model.n) & 1
    acc: dict = {}
    axpy(acc, f.one, bv_delta(model, cs_product(model, b, a)), f)
    axpy(acc, f.neg(f.one), cs_product(model, bv_delta(model, b), a), f)
    axpy(acc, f.neg(f.sign(odd)), cs_product(model, b, bv_delta(model, a)), f)
    out = GradedVector._trusted(lb, acc)
    return out.scale(f.sign(odd)) if odd else out


def op_P(model: LoopModel, a: GradedVector, degree: int | None = None) -> GradedMap:
    """``P_a = ev ∘ [-, a] ∘ ι`` on H_*(L), of shift ``|a| - n + 1``.

    ``degree`` only matters when ``a`` is zero (the shift is otherwise read
    off ``a``).
    """
    da = _homogeneous_degree(a, "a")
    if da is None:
        if degree is None:
            raise NonHomogeneousError("the zero letter needs an explicit degree")
        da = degree
    bb = model.base_basis
    shift = da - model.n + 1
    cols = {}
    if a:
        for x in range(len(bb)):
            img = map_apply(model.ev, string_bracket(model, model.iota.column(x), a))
            if img:
                cols[x] = img
    return GradedMap(bb, bb, shift, cols)


def op_Q(model: LoopModel, a: GradedVector) -> GradedMap:
    """Multiplication by ``ev(a)`` in the intersection ring."""
    bb = model.base_basis
    w = map_apply(model.ev, a)
    da = _homogeneous_degree(a, "a")
    shift = (da if da is not None else model.n) - model.n
    cols = {}
    for x in range(len(bb)):
        img = intersect(model, w, bb.unit(x))
        if img:
            cols[x] = img
    return GradedMap(bb, bb, shift, cols)


def project_plus(model: LoopModel, a: GradedVector) -> GradedVector:
    """``a - ι(ev(a))``, which lies in ker(ev)."""
    return a - map_apply(model.iota, map_apply(model.ev, a))


def kernel_ev_basis(model: LoopModel, degree: int) -> list[GradedVector]:
    """Basis of ker(ev) in one degree, made of projected basis vectors."""
    key = ("ker_ev", degree)
    if key in model._cache:
        return model._cache[key]
    from .exactcore import independent_subset

    lb = model.loop_basis
    cands = [project_plus(model, lb.unit(i)) for i in lb.indices_of_degree(degree)]
    cands = [c for c in cands if c]
    out = [cands[k] for k in independent_subset(cands)]
    model._cache[key] = out
    return out


# -- axioms ----------------------------------------------------------------------


@dataclass
class AxiomResult:
    name: str
    checked: int = 0
    skipped: int = 0
    failed: int = 0
    witness: dict | None = None

    @property
    def status(self) -> str:
        if self.failed:
            return "fail"
        if self.checked == 0 and self.skipped:
            return "skipped"
        return "pass"

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "checked": self.checked,
                "skipped": self.skipped, "failed": self.failed, "witness": self.witness}


@dataclass
class AxiomReport:
    model: str
    engine: str
    results: dict[str, AxiomResult]

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results.values())

    @property
    def failures(self) -> list[AxiomResult]:
        return [r for r in self.results.values() if r.failed]

    @property
    def skipped(self) -> int:
        return sum(r.skipped for r in self.results.values())

    def to_json(self) -> dict:
        return {"model": self.model, "ok": self.ok,
                "axioms": [self.results[k].to_json() for k in AXIOMS if k in self.results]}

    def summary(self) -> str:
        lines = [f"axiom check of {self.model}: {'PASS' if self.ok else 'FAIL'}"]
        for name in AXIOMS:
            r = self.results.get(name)
            if r is None:
                continue
            line = f"  {name:22s} {r.status:7s} checked={r.checked} skipped={r.skipped}"
            if r.failed:
                line += f" failed={r.failed} witness={r.witness['elements']}"
            lines.append(line)
        return "\n".join(lines)


AXIOMS = (
    "intersection_unit",
    "ev_iota_identity",
    "delta_iota_zero",
    "delta_unit_zero",
    "unit",
    "delta_squared",
    "delta_components",
    "graded_commutativity",
    "associativity",
    "ev_algebra_map",
    "iota_algebra_map",
    "bv_leibniz",
)

# Axioms scanned by compiled kernels when the tables are integral.
KERNEL_AXIOMS = ("graded_commutativity", "associativity", "ev_algebra_map", "bv_leibniz")


# Each side function returns (lhs, rhs) for one tuple of basis indices and
# raises WindowOverflowError when the tuple touches the window edge.


def _u(model, i):
    return model.loop_basis.unit(i)


def _sides_intersection_unit(model, i):
    bb = model.base_basis
    u = bb.unit(i)
    left = intersect(model, model.fundamental_class, u)
    right = intersect(model, u, model.fundamental_class)
    # both must equal u; report the failing one
    if left != u:
        return left, u
    return right, u


def _sides_ev_iota(model, i):
    u = model.base_basis.unit(i)
    return map_apply(model.ev, map_apply(model.iota, u)), u


def _sides_delta_iota(model, i):
    v = bv_delta(model, model.iota.column(i))
    return v, model.loop_basis.zero()


def _sides_delta_unit(model):
    return bv_delta(model, model.unit), model.loop_basis.zero()


def _sides_unit(model, i):
    x = _u(model, i)
    left = cs_product(model, model.unit, x)
    right = cs_product(model, x, model.unit)
    if left != x:
        return left, x
    return right, x


def _sides_delta_squared(model, i):
    return bv_delta(model, bv_delta(model, _u(model, i))), model.loop_basis.zero()


def _sides_delta_components(model, i):
    # rotating a loop keeps its free homotopy class
    lb = model.loop_basis
    dx = bv_delta(model, _u(model, i))
    comp = lb.entries[i].component
    same = {r: v for r, v in dx._c.items() if lb.entries[r].component == comp}
    return dx, GradedVector._trusted(lb, same)


def _sides_graded_commutativity(model, i, j):
    f = model.field
    xy = cs_product(model, _u(model, i), _u(model, j))
    yx = cs_product(model, _u(model, j), _u(model, i))
    odd = model.shifted_parity(i) & model.shifted_parity(j)
    return xy, yx.scale(f.sign(odd))


def _sides_associativity(model, i, j, k):
    x, y, z = _u(model, i), _u(model, j), _u(model, k)
    return (cs_product(model, cs_product(model, x, y), z),
            cs_product(model, x, cs_product(model, y, z)))


def _sides_ev_algebra(model, i, j):
    ev = model.ev
    left = map_apply(ev, cs_product(model, _u(model, i), _u(model, j)))
    right = intersect(model, ev.column(i), ev.column(j))
    return left, right


def _sides_iota_algebra(model, i, j):
    bb = model.base_basis
    left = map_apply(model.iota, intersect(model, bb.unit(i), bb.unit(j)))
    right = cs_product(model, model.iota.column(i), model.iota.column(j))
    return left, right


def basis_bracket(model: LoopModel, a: int, b: int) -> GradedVector:
    key = ("bracket", a, b)
    cache = model._cache
    hit = cache.get(key)
    if hit is None:
        try:
            hit = string_bracket(model, _u(model, a), _u(model, b))
        except WindowOverflowError as exc:
            hit = exc
        cache[key] = hit
    if isinstance(hit, WindowOverflowError):
        raise hit
    return hit


def _sides_bv_leibniz(model, a, b, c):
    """[a, bc] against [a,b]c + (-1)^{(|a|+1)|b|} b[a,c], brackets expanded on basis."""
    f = model.field
    lb = model.loop_basis
    bc = cs_product(model, _u(model, b), _u(model, c))
    acc: dict = {}
    for r, v in bc._c.items():
        axpy(acc, v, basis_bracket(model, a, r), f)
    lhs = GradedVector._trusted(lb, acc)
    odd = ((model.shifted_parity(a) + 1) * model.shifted_parity(b)) & 1
    rhs1 = cs_product(model, basis_bracket(model, a, b), _u(model, c))
    rhs2 = cs_product(model, _u(model, b), basis_bracket(model, a, c))
    return lhs, rhs1 + rhs2.scale(f.sign(odd))


def _witness(model, name, elems, lhs, rhs) -> dict:
    ids = []
    for kind, i in elems:
        b = model.base_basis if kind == "base" else model.loop_basis
        ids.append(b.entries[i].id)
    return {"axiom": name, "elements": ids, "lhs": lhs.to_text(), "rhs": rhs.to_text()}


def _run_exact(model, name, sides: Callable, tuples, kinds, result: AxiomResult):
    for tup in tuples:
        try:
            lhs, rhs = sides(model, *tup)
        except WindowOverflowError:
            result.skipped += 1
            continue
        result.checked += 1
        if lhs != rhs:
            result.failed += 1
            if result.witness is None:
                result.witness = _witness(model, name, list(zip(kinds, tup)), lhs, rhs)


def _axiom_plan(model: LoopModel):
    m = len(model.loop_basis)
    nb = len(model.base_basis)
    L = range(m)
    B = range(nb)
    return {
        "intersection_unit": (_sides_intersection_unit, [(i,) for i in B], ("base",)),
        "ev_iota_identity": (_sides_ev_iota, [(i,) for i in B], ("base",)),
        "delta_iota_zero": (_sides_delta_iota, [(i,) for i in B], ("base",)),
        "delta_unit_zero": (_sides_delta_unit, [()], ()),
        "unit": (_sides_unit, [(i,) for i in L], ("loop",)),
        "delta_squared": (_sides_delta_squared, [(i,) for i in L], ("loop",)),
        "delta_components": (_sides_delta_components, [(i,) for i in L], ("loop",)),
        "graded_commutativity": (_sides_graded_commutativity,
                                 itertools.product(L, L), ("loop", "loop")),
        "associativity": (_sides_associativity, itertools.product(L, L, L),
                          ("loop", "loop", "loop")),
        "ev_algebra_map": (_sides_ev_algebra, itertools.product(L, L), ("loop", "loop")),
        "iota_algebra_map": (_sides_iota_algebra, itertools.product(B, B), ("base", "base")),
        "bv_leibniz": (_sides_bv_leibniz, itertools.product(L, L, L),
                       ("loop", "loop", "loop")),
    }


def axiom_check(model: LoopModel, engine: str = "auto") -> AxiomReport:
    """Check the BV/Gerstenhaber axioms on every in-window basis tuple.

    ``engine`` is ``"exact"`` (sparse Python arithmetic for every axiom),
    ``"kernel"`` (compiled scans for the quadratic and cubic axioms; needs
    integral structure constants) or ``"auto"``.  Both engines return the
    same report.
    """
    from . import kernels

    if engine == "auto":
        engine = "kernel" if kernels.tables_supported(model) else "exact"
    if engine == "kernel" and not kernels.tables_supported(model):
        raise ValueError("structure constants are not integral; use engine='exact'")
    cache_key = ("axioms", engine)
    if cache_key in model._cache:
        return model._cache[cache_key]

    plan = _axiom_plan(model)
    results = {}
    for name in AXIOMS:
        sides, tuples, kinds = plan[name]
        res = AxiomResult(name)
        if engine == "kernel" and name in KERNEL_AXIOMS:
            checked, skipped, failed, first = kernels.scan_axiom(model, name)
            res.checked, res.skipped, res.failed = checked, skipped, failed
            if failed:
                lhs, rhs = sides(model, *first)
                res.witness = _witness(model, name, list(zip(kinds, first)), lhs, rhs)
        else:
            _run_exact(model, name, sides, tuples, kinds, res)
        results[name] = res
    report = AxiomReport(model.name, engine, results)
    model._cache[cache_key] = report
    return report
