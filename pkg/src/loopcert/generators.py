"""Seeded random instances: small admissible loop models and small filtered complexes."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .bvmodel import OUT_OF_WINDOW, LoopModel
from .exactcore import Echelon, FieldSpec, GradedBasis, GradedMap, GradedVector, map_apply
from .filtered import FilteredComplex, complex_build
from .models import (
    builtin_s1,
    change_basis,
    kunneth_product,
    load_shipped,
    model_from_json,
    model_to_json,
    restrict_window,
    scale_delta,
    torus,
)

FAMILIES = ("s1", "s1k2", "s3", "t2", "s1xs3")


def over_field(model: LoopModel, field: FieldSpec, check: bool = True) -> LoopModel:
    """Same presentation read over another field (structure constants must make sense there)."""
    doc = model_to_json(model)
    doc["field"] = field.name
    return model_from_json(doc, check=check)


def family_model(family: str, field: FieldSpec) -> LoopModel:
    if family == "s1":
        return builtin_s1(1, field)
    if family == "s1k2":
        return builtin_s1(2, field)
    if family == "s3":
        return over_field(load_shipped("s3.model.json"), field)
    if family == "t2":
        return restrict_window(torus(2, 1, field), ("0,0", "1,0", "0,1"))
    if family == "s1xs3":
        s1 = restrict_window(builtin_s1(1, field), ("0", "1"))
        s3 = over_field(load_shipped("s3.model.json"), field)
        return kunneth_product(s1, s3)
    raise ValueError(f"unknown family {family!r}")


def _random_invertible_block(rng: random.Random, basis: GradedBasis, idx: list[int]):
    f = basis.field
    draw = (lambda: rng.randrange(f.p)) if f.is_finite else (lambda: f.coerce(rng.randint(-2, 2)))
    while True:
        vecs = [GradedVector(basis, {i: draw() for i in idx}) for _ in idx]
        ech = Echelon(basis)
        if all(ech.add(v) for v in vecs):
            return vecs


def random_basis_change(rng: random.Random, model: LoopModel, name: str) -> LoopModel:
    """Random invertible change of basis within blocks of interchangeable classes.

    Loop classes are mixed only when they share degree, component and the
    pattern of out-of-window products, so the new presentation has exactly
    the same window as the old one.
    """
    lb, bb = model.loop_basis, model.base_basis
    oow = [k for k, v in model.product.items() if v is OUT_OF_WINDOW]
    blocks: dict = {}
    for i, e in enumerate(lb):
        pattern = (tuple(sorted(j for a, j in oow if a == i)),
                   tuple(sorted(j for j, b in oow if b == i)))
        blocks.setdefault((e.degree, e.component, pattern), []).append(i)
    loop_vecs = []
    for key in sorted(blocks, key=lambda k: blocks[k][0]):
        loop_vecs += _random_invertible_block(rng, lb, blocks[key])
    base_vecs = []
    for d in bb.degrees():
        base_vecs += _random_invertible_block(rng, bb, bb.indices_of_degree(d))
    return change_basis(model, loop_vecs, base_vecs, name=name)


def random_admissible_model(seed: int, field: FieldSpec | None = None) -> LoopModel:
    """A small model over F_2 or F_3 fit for the brute-force oracle.

    Picks a family, rescales Δ by a random field element (0 gives the
    Δ ≡ 0 control) and applies a random block-diagonal change of basis.
    """
    rng = random.Random(seed)
    field = field or FieldSpec.prime(rng.choice((2, 3)))
    family = rng.choice(FAMILIES)
    model = family_model(family, field)
    lam = rng.randrange(field.p)
    if lam != 1:
        model = scale_delta(model, lam)
    return random_basis_change(rng, model, f"{family}-{field.name}-seed{seed}")


def random_complex(rng: random.Random, field: FieldSpec | None = None, max_gens: int = 8,
                   degrees=(0, 1, 2)) -> FilteredComplex:
    """Random complex with strictly level-lowering differential and d∘d = 0."""
    field = field or FieldSpec.prime(2)
    p = field.p
    g = rng.randint(2, max_gens)
    gens = []
    for k in range(g):
        lvl = Fraction(rng.randint(0, 8), rng.randint(1, 3))
        gens.append((f"g{k}", rng.choice(degrees), lvl))
    by_deg: dict = {}
    for gid, d, l in gens:
        by_deg.setdefault(d, []).append((gid, l))
    table: dict = {}
    lo, hi = min(degrees), max(degrees)
    # fill columns from the top degree down so d(d(x)) = 0 can be enforced
    for d in range(hi - 1, lo - 1, -1):
        tgt = by_deg.get(d + 1, [])
        for gid, l in by_deg.get(d, []):
            allowed = [t for t, lt in tgt if lt < l]
            options = []
            for coeffs in itertools.product(range(p), repeat=len(allowed)):
                col = {t: c for t, c in zip(allowed, coeffs) if c}
                if _dd_zero(col, table, p):
                    options.append(col)
            col = rng.choice(options)
            if col:
                table[gid] = {t: str(c) for t, c in col.items()}
    return complex_build(gens, table, field)


def _dd_zero(col: dict, table: dict, p: int) -> bool:
    acc: dict = {}
    for t, c in col.items():
        for u, v in table.get(t, {}).items():
            acc[u] = (acc.get(u, 0) + c * int(v)) % p
    return not any(acc.values())


def random_class(rng: random.Random, cx: FilteredComplex) -> GradedVector | None:
    """A uniformly chosen cycle with nonzero class, or None if homology vanishes."""
    f = cx.field
    cands = []
    for d in sorted(set(cx.basis.degrees())):
        idx = cx.basis.indices_of_degree(d)
        ech = Echelon(cx.basis)
        for b in cx.boundaries(d):
            ech.add(b)
        for coeffs in itertools.product(range(f.p), repeat=len(idx)):
            x = GradedVector(cx.basis, {i: c for i, c in zip(idx, coeffs) if c})
            if x and not map_apply(cx.d, x) and not ech.contains(x):
                cands.append(x)
    return rng.choice(cands) if cands else None


MUTATION_TABLES = ("product", "delta", "ev", "iota", "intersection")


def _bump(v: GradedVector, r: int, rng: random.Random, basis: GradedBasis) -> GradedVector:
    f = basis.field
    old = dict(v._c) if v is not None else {}
    if f.is_finite:
        step = rng.randrange(1, f.p)
    else:
        step = rng.choice((-2, -1, 1, 2, 3))
    new = f.add(old.get(r, f.zero), f.coerce(step))
    old[r] = new
    return GradedVector(basis, old)


def mutate_model(model: LoopModel, rng: random.Random) -> tuple[LoopModel, str]:
    """Change one coefficient of one structure table, keeping degrees consistent."""
    lb, bb, n = model.loop_basis, model.base_basis, model.n
    while True:
        table = rng.choice(MUTATION_TABLES)
        if table == "product":
            i, j = rng.randrange(len(lb)), rng.randrange(len(lb))
            cur = model.product.get((i, j))
            if cur is OUT_OF_WINDOW:
                continue
            targets = lb.indices_of_degree(lb.degree(i) + lb.degree(j) - n)
            if not targets:
                continue
            r = rng.choice(targets)
            prod = dict(model.product)
            prod[(i, j)] = _bump(cur, r, rng, lb)
            desc = f"product {lb.entries[i].id}*{lb.entries[j].id} at {lb.entries[r].id}"
            return model.replace(product=prod), desc
        if table == "intersection":
            i, j = rng.randrange(len(bb)), rng.randrange(len(bb))
            targets = bb.indices_of_degree(bb.degree(i) + bb.degree(j) - n)
            if not targets:
                continue
            r = rng.choice(targets)
            inter = dict(model.intersection)
            inter[(i, j)] = _bump(inter.get((i, j)), r, rng, bb)
            desc = f"intersection {bb.entries[i].id}.{bb.entries[j].id} at {bb.entries[r].id}"
            return model.replace(intersection=inter), desc
        mp = getattr(model, table)
        src, tgt = mp.source, mp.target
        j = rng.randrange(len(src))
        targets = tgt.indices_of_degree(src.degree(j) + mp.shift)
        if not targets:
            continue
        r = rng.choice(targets)
        cols = dict(mp.columns)
        cols[j] = _bump(cols.get(j), r, rng, tgt)
        desc = f"{table} column {src.entries[j].id} at {tgt.entries[r].id}"
        return model.replace(**{table: GradedMap(src, tgt, mp.shift, cols)}), desc
