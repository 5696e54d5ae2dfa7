"""Bounded search for point-to-fundamental-class certificates, and its checkers.

States are projectively normalized homogeneous vectors of H_*(L).  From a
state ``v`` the moves of one letter degree ``d`` form the linear image
``{P_a(v) : a in ker(ev), |a| = d}``; since ``P_a`` is linear in ``a`` it is
spanned by the images of a ker(ev) basis.  Successors are either the RREF
rows of that image (``basis``) or all its projective points over a finite
field (``points``), in which case the level sets are exactly the sets of
states reachable in k steps.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .bvmodel import (
    LoopModel,
    WindowOverflowError,
    kernel_ev_basis,
    op_P,
)
from .exactcore import (
    Echelon,
    GradedVector,
    image_membership,
    map_apply,
    projective_points,
    span_closure,
    vector_combine,
)
from .models import Certificate, model_hash

FOUND = "FOUND"
NOT_FOUND = "NOT_FOUND_WITHIN_BOUNDS"
FOUND_CLOSURE_ONLY = "FOUND_CLOSURE_ONLY"

MODES = ("closure", "word", "both")
SUCCESSORS = ("auto", "basis", "points")


class SearchError(RuntimeError):
    pass


class OracleBoundError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 4
    mode: str = "word"
    prune: bool = True
    successors: str = "auto"
    point_limit: int = 4096
    min_letter_degree: int | None = None
    max_letter_degree: int | None = None
    # not part of the result: any worker count gives the same outcome
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.successors not in SUCCESSORS:
            raise ValueError(f"successors must be one of {SUCCESSORS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_json(self) -> dict:
        d = asdict(self)
        del d["workers"]
        return d


@dataclass
class SearchOutcome:
    status: str
    config: SearchConfig
    certificate: Certificate | None = None
    depth: int = 0
    level_sizes: list[int] = field(default_factory=list)
    pruned: int = 0
    successor_policy: str = ""
    closure: dict | None = None
    levels: list[list[GradedVector]] = field(default_factory=list, repr=False)

    @property
    def states(self) -> int:
        return sum(self.level_sizes)

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "bounded": self.status == NOT_FOUND,
            "config": self.config.to_json(),
            "depth": self.depth,
            "states_explored": self.states,
            "level_sizes": list(self.level_sizes),
            "pruned_moves": self.pruned,
            "successor_policy": self.successor_policy,
            "certificate": None,
            "closure": self.closure,
        }
        if self.certificate is not None:
            c = self.certificate
            out["certificate"] = {
                "length": c.length,
                "letters": [a.to_text() for a in c.letters],
                "letter_degrees": [a.degree for a in c.letters],
                "trace": [x.to_text() for x in c.trace],
            }
        return out


# -- letters ----------------------------------------------------------------------


def letter_degrees(model: LoopModel, config: SearchConfig) -> list[int]:
    bounds = model.loop_basis.degree_bounds
    if bounds is None:
        return []
    lo = bounds[0] if config.min_letter_degree is None else config.min_letter_degree
    hi = bounds[1] if config.max_letter_degree is None else config.max_letter_degree
    return [d for d in model.loop_basis.degrees() if lo <= d <= hi]


class _Alphabet:
    """ker(ev) basis letters by degree with their P-operators."""

    def __init__(self, model: LoopModel, config: SearchConfig):
        self.model = model
        self.degrees = []
        self.letters: dict[int, list[GradedVector]] = {}
        self.ops = {}
        for d in letter_degrees(model, config):
            basis = kernel_ev_basis(model, d)
            if not basis:
                continue
            ops = []
            for a in basis:
                try:
                    ops.append(op_P(model, a))
                except WindowOverflowError as exc:
                    raise SearchError(f"letter {a!r} of degree {d}: {exc}") from exc
            self.degrees.append(d)
            self.letters[d] = basis
            self.ops[d] = ops

    def all_letters(self) -> list[GradedVector]:
        return [a for d in self.degrees for a in self.letters[d]]

    def all_ops(self):
        return [p for d in self.degrees for p in self.ops[d]]


def _letter(alpha: _Alphabet, d: int, combo: dict) -> GradedVector:
    terms = [(c, alpha.letters[d][i]) for i, c in sorted(combo.items())]
    return vector_combine(terms)


# -- closure formulation -----------------------------------------------------------


def closure_membership(model: LoopModel, config: SearchConfig | None = None) -> SearchOutcome:
    """Is [L] in the (non-unital) operator closure of [pt]?"""
    config = config or SearchConfig(mode="closure")
    alpha = _Alphabet(model, config)
    pt = model.pt_class
    seeds, seed_info = [], []
    for d in alpha.degrees:
        for a, P in zip(alpha.letters[d], alpha.ops[d]):
            img = map_apply(P, pt)
            if img:
                seeds.append(img)
                seed_info.append({"letter": a.to_text(), "image": img.to_text()})
    ops = alpha.all_ops()
    span = span_closure(seeds, ops, basis=model.base_basis) if seeds else []
    coeffs = image_membership(span, model.fundamental_class) if span else None
    member = coeffs is not None
    f = model.field
    closure = {
        "member": member,
        "dimension": len(span),
        "basis": [v.to_text() for v in span],
        "seeds": seed_info,
        "coefficients": [f.format(c) for c in coeffs] if member else None,
    }
    return SearchOutcome(FOUND_CLOSURE_ONLY if member else NOT_FOUND, config,
                         closure=closure, level_sizes=[], successor_policy="closure")


# -- word search -------------------------------------------------------------------


def _policy(model: LoopModel, config: SearchConfig) -> str:
    f = model.field
    if config.successors != "auto":
        if config.successors == "points" and not f.is_finite:
            raise ValueError("point successors need a finite field")
        return config.successors
    if f.is_finite and f.p ** len(model.base_basis) <= config.point_limit:
        return "points"
    return "basis"


@dataclass
class _Expansion:
    succ: list[tuple[GradedVector, int, GradedVector]]  # (state, letter degree, letter)
    found: tuple[int, GradedVector] | None              # (letter degree, letter)
    pruned: int


def _expand(model: LoopModel, alpha: _Alphabet, v: GradedVector, policy: str,
            prune: bool, want_found: bool) -> _Expansion:
    n = model.n
    base_degrees = set(model.base_basis.degrees())
    s = v.degree
    succ = []
    found = None
    pruned = 0
    target = model.fundamental_class
    for d in alpha.degrees:
        t = s + d - n + 1
        if prune and (t not in base_degrees):
            pruned += 1
            continue
        images = [map_apply(P, v) for P in alpha.ops[d]]
        if not any(images):
            continue
        ech = Echelon(model.base_basis)
        for w in images:
            ech.add(w)
        if want_found and found is None and t == n:
            combo = ech.solve(target)
            if combo is not None:
                found = (d, _letter(alpha, d, combo))
        rows = ech.basis_with_combos()
        if policy == "basis":
            for row, combo in rows:
                succ.append((row, d, _letter(alpha, d, combo)))
        else:
            vecs = [r for r, _ in rows]
            combos = [c for _, c in rows]
            f = model.field
            for coeffs, w in projective_points(vecs):
                total: dict = {}
                for k, ck in enumerate(coeffs):
                    if ck:
                        for i, x in combos[k].items():
                            total[i] = f.add(total.get(i, f.zero), f.mul(ck, x))
                total = {i: x for i, x in total.items() if x}
                succ.append((w, d, _letter(alpha, d, total)))
    return _Expansion(succ, found, pruned)


def _state_order(v: GradedVector):
    return (v.degree, v.key())


def _levels(model: LoopModel, config: SearchConfig, stop_on_found: bool):
    """Yield ``(depth, states, parents, found)`` level by level.

    ``parents[key] = (parent key, letter)`` for the first discovery of each
    state in canonical expansion order; ``found`` is ``(parent key, letter)``
    when [L] lies in the image of some state of the previous level.
    """
    alpha = _Alphabet(model, config)
    policy = _policy(model, config)
    start = model.pt_class.normalized()
    level = [start]
    cache: dict = {}
    pruned_total = 0
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        yield 0, level, {}, None, policy, 0
        for depth in range(1, config.max_depth + 1):
            todo = [v for v in level if v.key() not in cache]
            if pool is not None:
                results = list(pool.map(
                    lambda v: _expand(model, alpha, v, policy, config.prune, True), todo))
            else:
                results = [_expand(model, alpha, v, policy, config.prune, True) for v in todo]
            for v, r in zip(todo, results):
                cache[v.key()] = r
            nxt: dict = {}
            parents = {}
            found = None
            for v in level:
                r = cache[v.key()]
                pruned_total += r.pruned
                if found is None and r.found is not None:
                    found = (v.key(), r.found[1])
                for w, d, a in r.succ:
                    k = w.key()
                    if k not in nxt:
                        nxt[k] = w
                        parents[k] = (v.key(), a)
            level = sorted(nxt.values(), key=_state_order)
            yield depth, level, parents, found, policy, pruned_total
            if found is not None and stop_on_found:
                return
            if not level:
                return
    finally:
        if pool is not None:
            pool.shutdown()


def word_search(model: LoopModel, config: SearchConfig | None = None) -> SearchOutcome:
    """Breadth-first certificate search; FOUND outcomes carry a verified certificate."""
    config = config or SearchConfig()
    if config.mode == "closure":
        return closure_membership(model, config)
    history = []
    found = None
    policy = ""
    pruned = 0
    levels = []
    for depth, level, parents, fnd, policy, pruned in _levels(model, config, True):
        history.append(parents)
        levels.append(level)
        if fnd is not None:
            found = (depth, fnd)
            break
    sizes = [len(lv) for lv in levels]
    out = SearchOutcome(NOT_FOUND, config, depth=len(levels) - 1, level_sizes=sizes,
                        pruned=pruned, successor_policy=policy, levels=levels)
    if found is not None:
        depth, (pkey, last) = found
        letters = [last]
        key = pkey
        for k in range(depth - 1, 0, -1):
            key, a = history[k][key]
            letters.append(a)
        letters.reverse()
        out.certificate = _finish(model, letters)
        out.status = FOUND
        out.depth = depth
    if config.mode == "both":
        clo = closure_membership(model, config)
        out.closure = clo.closure
        member = clo.closure["member"]
        if out.status == FOUND and not member:
            raise SearchError("word search found a certificate outside the operator closure")
        if out.status == NOT_FOUND and member:
            out.status = FOUND_CLOSURE_ONLY
    return out


def _finish(model: LoopModel, letters: list[GradedVector]) -> Certificate:
    trace = [model.pt_class]
    x = model.pt_class
    for a in letters:
        x = map_apply(op_P(model, a), x)
        trace.append(x)
    f = model.field
    lead, top = model.fundamental_class.leading()
    lam = f.div(x[lead], top)
    if not lam or x != model.fundamental_class.scale(lam):
        raise SearchError("reconstructed trace does not end on a multiple of [L]")
    norm = f.inv(lam)
    if norm != f.one:
        letters[-1] = letters[-1].scale(norm)
        trace[-1] = trace[-1].scale(norm)
    cert = Certificate(model.name, tuple(letters), tuple(trace), norm, model_hash(model))
    res = verify_certificate(model, cert)
    if not res.valid:
        raise SearchError(f"search produced an invalid certificate: {res.reason}")
    return cert


def reachable_states(model: LoopModel, depth: int, config: SearchConfig | None = None) -> set:
    """States reachable in exactly ``depth`` steps as dense tuples (0 included for depth >= 1)."""
    if config is None:
        pol = "points" if model.field.is_finite else "basis"
        config = SearchConfig(max_depth=max(depth, 1), successors=pol)
    if config.max_depth < depth:
        raise ValueError("config.max_depth is below the requested depth")
    nb = len(model.base_basis)
    out = None
    for d, level, *_ in _levels(model, config, False):
        if d == depth:
            out = {tuple(v.dense()) for v in level}
            break
    if out is None:
        out = set()
    if depth >= 1:
        out.add((0,) * nb)
    return out


def certify(model: LoopModel, config: SearchConfig | None = None) -> SearchOutcome:
    config = config or SearchConfig()
    if config.mode == "closure":
        return closure_membership(model, config)
    return word_search(model, config)


# -- verification --------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    valid: bool
    step: int | None = None
    reason: str = ""

    def to_json(self) -> dict:
        return {"valid": self.valid, "step": self.step, "reason": self.reason}


def verify_certificate(model: LoopModel, cert: Certificate) -> Verdict:
    """Recompute the trace from [pt] with fresh P-operators and demand x_N = [L] exactly."""
    lb, bb = model.loop_basis, model.base_basis
    if not cert.letters:
        return Verdict(False, 0, "certificate has no letters")
    if len(cert.trace) != len(cert.letters) + 1:
        return Verdict(False, 0, "trace length must be the number of letters plus one")
    if cert.trace[0].basis != bb or cert.trace[0] != model.pt_class:
        return Verdict(False, 0, "trace must start at [pt]")
    x = model.pt_class
    for j, a in enumerate(cert.letters, start=1):
        if a.basis != lb:
            return Verdict(False, j, f"letter a_{j} is not on the loop basis")
        if not a:
            return Verdict(False, j, f"letter a_{j} is zero")
        if not a.is_homogeneous():
            return Verdict(False, j, f"letter a_{j} is not homogeneous")
        if map_apply(model.ev, a):
            return Verdict(False, j, f"letter a_{j} is not in ker(ev)")
        try:
            P = op_P(model, a)
        except WindowOverflowError as exc:
            return Verdict(False, j, f"letter a_{j}: {exc}")
        x = map_apply(P, x)
        if not x:
            return Verdict(False, j, f"x_{j} vanishes")
        if not 0 <= x.degree <= model.n:
            return Verdict(False, j, f"x_{j} has degree {x.degree} outside 0..{model.n}")
        rec = cert.trace[j]
        if rec.basis != bb or rec != x:
            return Verdict(False, j, f"recorded x_{j} differs from the recomputed image")
    if x != model.fundamental_class:
        return Verdict(False, len(cert.letters), "final image is not exactly [L]")
    return Verdict(True)


# -- brute-force oracle ----------------------------------------------------------------

ORACLE_MAX_BASE = 6
ORACLE_MAX_DEPTH = 4
ORACLE_MAX_LETTERS = 20000


def _all_vectors(model: LoopModel, indices: list[int]) -> Iterable[GradedVector]:
    p = model.field.p
    lb = model.loop_basis
    for coeffs in itertools.product(range(p), repeat=len(indices)):
        yield GradedVector(lb, {i: c for i, c in zip(indices, coeffs) if c})


def oracle_letter_count(model: LoopModel) -> int:
    p = model.field.p or 0
    return sum(p ** len(model.loop_basis.indices_of_degree(d))
               for d in model.loop_basis.degrees())


def brute_force_oracle(model: LoopModel, depth: int) -> set:
    """Exact set of normalized states reachable in ``depth`` steps, over every letter.

    Enumerates all homogeneous loop vectors (not only a ker(ev) basis),
    builds each P-operator from scratch and composes densely mod p.
    """
    f = model.field
    if f.p not in (2, 3):
        raise OracleBoundError("the oracle only runs over F_2 or F_3")
    nb = len(model.base_basis)
    if nb > ORACLE_MAX_BASE:
        raise OracleBoundError(f"base basis of size {nb} exceeds {ORACLE_MAX_BASE}")
    if not 0 <= depth <= ORACLE_MAX_DEPTH:
        raise OracleBoundError(f"depth must lie in 0..{ORACLE_MAX_DEPTH}")
    if oracle_letter_count(model) > ORACLE_MAX_LETTERS:
        raise OracleBoundError("too many letters to enumerate")
    start = np.array([model.pt_class.normalized().dense()], np.int64)
    if depth == 0:
        return {tuple(int(x) for x in start[0])}
    mats = []
    for d in model.loop_basis.degrees():
        for a in _all_vectors(model, model.loop_basis.indices_of_degree(d)):
            P = op_P(model, a, degree=d)
            M = np.zeros((nb, nb), np.int64)
            for c, col in P.columns.items():
                for r, v in col._c.items():
                    M[r, c] = v
            mats.append(M)
    mats = np.ascontiguousarray(np.stack(mats))
    frontier = start
    for _ in range(depth):
        nxt = kernels.apply_letters_normalized(mats, frontier, np.int64(f.p))
        frontier = np.unique(nxt, axis=0)
    return {tuple(int(x) for x in row) for row in frontier}
