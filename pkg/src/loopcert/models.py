"""Model constructors, the Künneth product, certificate lifting and file formats."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .bvmodel import (
    OUT_OF_WINDOW,
    LoopModel,
    ModelError,
    WindowOverflowError,
    Window,
    axiom_check,
    cs_product,
    intersect,
)
from .exactcore import (
    BasisEntry,
    Echelon,
    FieldSpec,
    GradedBasis,
    GradedMap,
    GradedVector,
    map_apply,
)

SCHEMA_VERSION = 1


class AxiomFailure(ModelError):
    """A model failed its axiom check; ``report`` holds the witnesses."""

    def __init__(self, report):
        fails = ", ".join(f"{r.name} at {r.witness['elements']}" for r in report.failures)
        super().__init__(f"model {report.model} fails axioms: {fails}")
        self.report = report


class CertificateError(ValueError):
    pass


def require_axioms(model: LoopModel) -> None:
    report = axiom_check(model)
    if not report.ok:
        raise AxiomFailure(report)


# -- the circle ------------------------------------------------------------------


def winding_order(K: int) -> list[int]:
    """0, 1, -1, 2, -2, ..., K, -K."""
    out = [0]
    for k in range(1, K + 1):
        out += [k, -k]
    return out


def builtin_s1(K: int, field: FieldSpec) -> LoopModel:
    """Chas-Sullivan/BV presentation of H_*(LS^1) on winding components -K..K.

    ``c_k`` (degree 0) and ``t_k`` (degree 1) span component k; the product is
    that of Λ[c] ⊗ K[t, t^-1] with ``c_k = c t^k``, ``t_k = t^k``, and the
    positivity convention is ``Δ(c_k) = k t_k``.
    """
    if K < 1:
        raise ValueError("window K must be >= 1")
    ks = winding_order(K)
    entries = [BasisEntry(f"c{k}", 0, str(k)) for k in ks]
    entries += [BasisEntry(f"t{k}", 1, str(k)) for k in ks]
    lb = GradedBasis(tuple(entries), field)
    bb = GradedBasis((BasisEntry("pt", 0, "0"), BasisEntry("S1", 1, "0")), field)
    ix = lb.index

    product = {}
    for j in ks:
        for k in ks:
            s = j + k
            pairs = [(f"t{j}", f"t{k}", f"t{s}"), (f"c{j}", f"t{k}", f"c{s}"),
                     (f"t{j}", f"c{k}", f"c{s}"), (f"c{j}", f"c{k}", None)]
            for left, right, res in pairs:
                key = (ix[left], ix[right])
                if abs(s) > K:
                    product[key] = OUT_OF_WINDOW
                elif res is not None:
                    product[key] = lb.unit(res)
    delta = GradedMap(lb, lb, 1, {ix[f"c{k}"]: lb.unit(f"t{k}").scale(k) for k in ks if k})
    ev = GradedMap(lb, bb, 0, {ix[f"c{k}"]: bb.unit("pt") for k in ks}
                   | {ix[f"t{k}"]: bb.unit("S1") for k in ks})
    iota = GradedMap(bb, lb, 0, {0: lb.unit("c0"), 1: lb.unit("t0")})
    inter = {(1, 1): bb.unit("S1"), (1, 0): bb.unit("pt"), (0, 1): bb.unit("pt")}
    return LoopModel(
        name="S1", n=1, field=field, loop_basis=lb, base_basis=bb, product=product,
        delta=delta, intersection=inter, ev=ev, iota=iota, pt_class=bb.unit("pt"),
        fundamental_class=bb.unit("S1"),
        window=Window(0, 1, tuple(str(k) for k in ks)),
        orientable=True,
        provenance=(("structure", "classical string topology of the circle: "
                     "H_*(LS^1) = Lambda[c] (x) K[t, 1/t], BV operator c t^k -> k t^k"),),
    )


# -- products --------------------------------------------------------------------


def _pair_basis(b1: GradedBasis, b2: GradedBasis) -> GradedBasis:
    entries = []
    for e1 in b1:
        for e2 in b2:
            entries.append(BasisEntry(f"{e1.id}|{e2.id}", e1.degree + e2.degree,
                                      f"{e1.component},{e2.component}"))
    return GradedBasis(tuple(entries), b1.field)


def tensor(v1: GradedVector, v2: GradedVector, basis: GradedBasis) -> GradedVector:
    """``v1 ⊗ v2`` on the pair basis (no Koszul sign: it is an element, not an operator)."""
    f = basis.field
    n2 = len(v2.basis)
    return GradedVector._trusted(basis, {i * n2 + j: f.mul(x, y)
                                         for i, x in v1._c.items() for j, y in v2._c.items()})


def _tensor_map(m1: GradedMap, m2: GradedMap, src: GradedBasis, tgt: GradedBasis) -> GradedMap:
    n2 = len(m2.source)
    cols = {}
    for i, c1 in m1.columns.items():
        for j, c2 in m2.columns.items():
            cols[i * n2 + j] = tensor(c1, c2, tgt)
    return GradedMap(src, tgt, m1.shift + m2.shift, cols)


def kunneth_product(m1: LoopModel, m2: LoopModel, check: bool = True) -> LoopModel:
    """Model for L × L' with Koszul signs in the shifted grading.

    ``(x⊗x')(y⊗y') = (-1)^{|x'||y|} xy ⊗ x'y'`` and
    ``Δ(x⊗x') = Δx ⊗ x' + (-1)^{|x|} x ⊗ Δx'``.  A pair product is in the
    window only when both factor products are.
    """
    if m1.field != m2.field:
        raise ModelError("factors are over different fields")
    if check:
        require_axioms(m1)
        require_axioms(m2)
    f = m1.field
    lb = _pair_basis(m1.loop_basis, m2.loop_basis)
    bb = _pair_basis(m1.base_basis, m2.base_basis)
    l1, l2 = len(m1.loop_basis), len(m2.loop_basis)

    product = {}
    for (x, y), e1 in m1.product.items():
        for (xp, yp), e2 in m2.product.items():
            key = (x * l2 + xp, y * l2 + yp)
            if e1 is OUT_OF_WINDOW or e2 is OUT_OF_WINDOW:
                product[key] = OUT_OF_WINDOW
                continue
            v = tensor(e1, e2, lb)
            if m2.shifted_parity(xp) & m1.shifted_parity(y):
                v = -v
            if v:
                product[key] = v

    cols = {}
    for x in range(l1):
        dx = m1.delta.column(x)
        for xp in range(l2):
            dxp = m2.delta.column(xp)
            v = tensor(dx, m2.loop_basis.unit(xp), lb)
            w = tensor(m1.loop_basis.unit(x), dxp, lb)
            v = v - w if m1.shifted_parity(x) else v + w
            if v:
                cols[x * l2 + xp] = v
    delta = GradedMap(lb, lb, 1, cols)

    b2 = len(m2.base_basis)
    inter = {}
    for (u, v), e1 in m1.intersection.items():
        for (up, vp), e2 in m2.intersection.items():
            w = tensor(e1, e2, bb)
            if m2.base_parity(up) & m1.base_parity(v):
                w = -w
            if w:
                inter[(u * b2 + up, v * b2 + vp)] = w

    w1, w2 = m1.window, m2.window
    model = LoopModel(
        name=f"{m1.name}x{m2.name}", n=m1.n + m2.n, field=f, loop_basis=lb, base_basis=bb,
        product=product, delta=delta, intersection=inter,
        ev=_tensor_map(m1.ev, m2.ev, lb, bb), iota=_tensor_map(m1.iota, m2.iota, bb, lb),
        pt_class=tensor(m1.pt_class, m2.pt_class, bb),
        fundamental_class=tensor(m1.fundamental_class, m2.fundamental_class, bb),
        window=Window(w1.min_degree + w2.min_degree, w1.max_degree + w2.max_degree,
                      tuple(f"{a},{b}" for a in w1.components for b in w2.components)),
        orientable=m1.orientable and m2.orientable,
        provenance=(("kunneth", f"{m1.name} x {m2.name}"),) + m1.provenance + m2.provenance,
    )
    if check:
        require_axioms(model)
    return model


def torus(n: int, K: int, field: FieldSpec, check: bool = True) -> LoopModel:
    model = builtin_s1(K, field)
    for _ in range(n - 1):
        model = kunneth_product(model, builtin_s1(K, field), check=check)
    return model


# -- re-presentations (used to generate test models) -----------------------------


def restrict_window(model: LoopModel, components) -> LoopModel:
    """Keep only loop classes in ``components``; escaping products become out-of-window."""
    keep = set(components)
    old = model.loop_basis
    kept = [i for i, e in enumerate(old) if e.component in keep]
    lb = GradedBasis(tuple(old.entries[i] for i in kept), model.field)
    new_of = {i: k for k, i in enumerate(kept)}

    def move(v: GradedVector, what: str) -> GradedVector:
        if any(i not in new_of for i in v._c):
            raise ModelError(f"{what} leaves the restricted window")
        return GradedVector._trusted(lb, {new_of[i]: x for i, x in v._c.items()})

    product = {}
    for (i, j), e in model.product.items():
        if i not in new_of or j not in new_of:
            continue
        if e is OUT_OF_WINDOW or any(r not in new_of for r in e._c):
            product[(new_of[i], new_of[j])] = OUT_OF_WINDOW
        else:
            product[(new_of[i], new_of[j])] = move(e, "product")
    delta = GradedMap(lb, lb, 1, {new_of[j]: move(v, "delta")
                                  for j, v in model.delta.columns.items() if j in new_of})
    bb = model.base_basis
    ev = GradedMap(lb, bb, 0, {new_of[j]: v for j, v in model.ev.columns.items() if j in new_of})
    iota = GradedMap(bb, lb, 0, {j: move(v, "iota") for j, v in model.iota.columns.items()})
    return model.replace(
        name=f"{model.name}[{'/'.join(c for c in model.window.components if c in keep)}]",
        loop_basis=lb, product=product, delta=delta, ev=ev, iota=iota,
        window=Window(model.window.min_degree, model.window.max_degree,
                      tuple(c for c in model.window.components if c in keep)),
    )


def _coords(ech: Echelon, v: GradedVector, basis: GradedBasis) -> GradedVector:
    combo = ech.solve(v)
    if combo is None:
        raise ModelError("vector outside the span of the new basis")
    return GradedVector(basis, combo)


def change_basis(model: LoopModel, loop_vectors, base_vectors, name: str | None = None) -> LoopModel:
    """Re-present a model in new bases.

    ``loop_vectors[i]`` (resp. ``base_vectors[i]``) is the i-th new basis
    vector written in the old basis; each must be homogeneous and, for loop
    classes, supported in a single component so window bookkeeping survives.
    """
    f = model.field
    old_l, old_b = model.loop_basis, model.base_basis
    lentries = []
    for k, v in enumerate(loop_vectors):
        comps = {old_l.entries[i].component for i in v._c}
        if len(comps) != 1 or not v.is_homogeneous():
            raise ModelError("new loop basis vectors must be homogeneous in one component")
        lentries.append(BasisEntry(f"f{k}", v.degree, comps.pop()))
    bentries = []
    for k, v in enumerate(base_vectors):
        if not v or not v.is_homogeneous():
            raise ModelError("new base vectors must be nonzero and homogeneous")
        bentries.append(BasisEntry(f"g{k}", v.degree, "0"))
    lb = GradedBasis(tuple(lentries), f)
    bb = GradedBasis(tuple(bentries), f)
    le, be = Echelon(old_l), Echelon(old_b)
    for v in loop_vectors:
        if not le.add(v):
            raise ModelError("loop change of basis is singular")
    for v in base_vectors:
        if not be.add(v):
            raise ModelError("base change of basis is singular")
    if len(le) != len(old_l) or len(be) != len(old_b):
        raise ModelError("change of basis does not span")

    product = {}
    for i, x in enumerate(loop_vectors):
        for j, y in enumerate(loop_vectors):
            try:
                v = cs_product(model, x, y)
            except WindowOverflowError:
                product[(i, j)] = OUT_OF_WINDOW
                continue
            if v:
                product[(i, j)] = _coords(le, v, lb)
    delta = GradedMap(lb, lb, 1, {i: _coords(le, map_apply(model.delta, x), lb)
                                  for i, x in enumerate(loop_vectors)})
    ev = GradedMap(lb, bb, 0, {i: _coords(be, map_apply(model.ev, x), bb)
                               for i, x in enumerate(loop_vectors)})
    iota = GradedMap(bb, lb, 0, {i: _coords(le, map_apply(model.iota, u), lb)
                                 for i, u in enumerate(base_vectors)})
    inter = {}
    for i, u in enumerate(base_vectors):
        for j, w in enumerate(base_vectors):
            v = intersect(model, u, w)
            if v:
                inter[(i, j)] = _coords(be, v, bb)
    return model.replace(
        name=name or f"{model.name}'", loop_basis=lb, base_basis=bb, product=product,
        delta=delta, ev=ev, iota=iota, intersection=inter,
        pt_class=_coords(be, model.pt_class, bb),
        fundamental_class=_coords(be, model.fundamental_class, bb),
    )


def scale_delta(model: LoopModel, s) -> LoopModel:
    """Same model with Δ replaced by s·Δ (still BV; s = 0 gives the Δ ≡ 0 control)."""
    cols = {j: v.scale(s) for j, v in model.delta.columns.items()}
    return model.replace(name=f"{model.name}*{s}d",
                         delta=GradedMap(model.loop_basis, model.loop_basis, 1, cols))


# -- certificates ----------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Letters a_1..a_N with trace x_0 = [pt], x_j = P_{a_j}(x_{j-1}), x_N = [L]."""

    model_name: str
    letters: tuple[GradedVector, ...]
    trace: tuple[GradedVector, ...]
    normalization: object = 1
    model_hash: str = ""

    @property
    def length(self) -> int:
        return len(self.letters)


def lift_certificate(m1: LoopModel, c1: Certificate, m2: LoopModel, c2: Certificate,
                     product_model: LoopModel | None = None) -> Certificate:
    """Product certificate b_k = a_k ⊗ ι[L'] then ι[L] ⊗ a'_k, sign-corrected at the end."""
    from .certify import verify_certificate
    from .bvmodel import op_P

    for m, c, tag in ((m1, c1, "first"), (m2, c2, "second")):
        res = verify_certificate(m, c)
        if not res.valid:
            raise CertificateError(f"{tag} certificate is invalid: {res.reason}")
    pm = product_model if product_model is not None else kunneth_product(m1, m2)
    lb = pm.loop_basis
    unit1 = map_apply(m1.iota, m1.fundamental_class)
    unit2 = map_apply(m2.iota, m2.fundamental_class)
    letters = [tensor(a, unit2, lb) for a in c1.letters]
    letters += [tensor(unit1, a, lb) for a in c2.letters]
    trace = [pm.pt_class]
    x = pm.pt_class
    for k, b in enumerate(letters):
        try:
            x = map_apply(op_P(pm, b), x)
        except WindowOverflowError as exc:
            raise CertificateError(
                f"letter b_{k + 1} leaves the window ({exc}); use a larger window") from exc
        trace.append(x)
    f = pm.field
    target = pm.fundamental_class
    lead, top = target.leading()
    lam = f.div(x[lead], top)
    if not lam or x != target.scale(lam):
        raise CertificateError("lifted trace does not end on a multiple of [L x L']")
    norm = f.inv(lam)
    if norm != f.one:
        letters[-1] = letters[-1].scale(norm)
        trace[-1] = trace[-1].scale(norm)
    cert = Certificate(pm.name, tuple(letters), tuple(trace), norm, model_hash(pm))
    res = verify_certificate(pm, cert)
    if not res.valid:
        raise CertificateError(f"lifted certificate fails verification: {res.reason}")
    return cert


# -- file formats ----------------------------------------------------------------

_VEC = {"type": "object", "additionalProperties": {"type": "string"}}
_BASIS = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["id", "degree"],
        "properties": {"id": {"type": "string"}, "degree": {"type": "integer"},
                       "component": {"type": "string"}},
        "additionalProperties": False,
    },
}
_MAP = {
    "type": "array",
    "items": {"type": "object", "required": ["source", "image"],
              "properties": {"source": {"type": "string"}, "image": _VEC},
              "additionalProperties": False},
}
MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "n", "field", "loop_basis", "base_basis", "window",
                 "product", "delta", "ev", "iota", "intersection", "pt_class",
                 "fundamental_class"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "field": {"type": "string", "pattern": "^(q|f[0-9]+)$"},
        "orientable": {"type": "boolean"},
        "loop_basis": _BASIS,
        "base_basis": _BASIS,
        "window": {"type": "object", "required": ["min_degree", "max_degree", "components"],
                   "properties": {"min_degree": {"type": "integer"},
                                  "max_degree": {"type": "integer"},
                                  "components": {"type": "array", "items": {"type": "string"}}}},
        "product": {"type": "array", "items": {
            "type": "object", "required": ["left", "right", "result"],
            "properties": {"left": {"type": "string"}, "right": {"type": "string"},
                           "result": {"oneOf": [_VEC, {"const": "out_of_window"}]}},
            "additionalProperties": False}},
        "intersection": {"type": "array", "items": {
            "type": "object", "required": ["left", "right", "result"],
            "properties": {"left": {"type": "string"}, "right": {"type": "string"},
                           "result": _VEC},
            "additionalProperties": False}},
        "delta": _MAP,
        "ev": _MAP,
        "iota": _MAP,
        "pt_class": _VEC,
        "fundamental_class": _VEC,
        "provenance": {"type": "array", "items": {
            "type": "object", "required": ["block", "source"],
            "properties": {"block": {"type": "string"}, "source": {"type": "string"}}}},
    },
}

CERT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "model", "field", "letters", "trace", "normalization"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": {"type": "string"},
        "model_hash": {"type": "string"},
        "field": {"type": "string"},
        "letters": {"type": "array", "items": {
            "type": "object", "required": ["degree", "vector"],
            "properties": {"degree": {"type": "integer"}, "vector": _VEC}}},
        "trace": {"type": "array", "items": _VEC},
        "normalization": {"type": "string"},
    },
}


class SchemaError(ValueError):
    pass


def _validate(doc, schema, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        missing = ""
        if exc.validator == "required":
            missing = " (missing field)"
        raise SchemaError(f"{what} schema violation at {where}: {exc.message}{missing}") from None


def dumps_canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def model_to_json(model: LoopModel) -> dict:
    lb, bb = model.loop_basis, model.base_basis

    def basis(b):
        return [{"id": e.id, "degree": e.degree, "component": e.component} for e in b]

    def table(t, b):
        rows = []
        for (i, j), v in t.items():
            res = "out_of_window" if v is OUT_OF_WINDOW else v.to_text()
            rows.append({"left": b.entries[i].id, "right": b.entries[j].id, "result": res})
        rows.sort(key=lambda r: (r["left"], r["right"]))
        return rows

    def gmap(mp):
        rows = [{"source": k, "image": v} for k, v in mp.to_table().items()]
        rows.sort(key=lambda r: r["source"])
        return rows

    return {
        "schema_version": SCHEMA_VERSION,
        "name": model.name,
        "n": model.n,
        "field": model.field.name,
        "orientable": model.orientable,
        "loop_basis": basis(lb),
        "base_basis": basis(bb),
        "window": {"min_degree": model.window.min_degree, "max_degree": model.window.max_degree,
                   "components": list(model.window.components)},
        "product": table(model.product, lb),
        "intersection": table(model.intersection, bb),
        "delta": gmap(model.delta),
        "ev": gmap(model.ev),
        "iota": gmap(model.iota),
        "pt_class": model.pt_class.to_text(),
        "fundamental_class": model.fundamental_class.to_text(),
        "provenance": [{"block": b, "source": s} for b, s in model.provenance],
    }


def model_dumps(model: LoopModel) -> str:
    return dumps_canonical(model_to_json(model))


def model_hash(model: LoopModel) -> str:
    h = model._cache.get("hash")
    if h is None:
        h = hashlib.sha256(model_dumps(model).encode()).hexdigest()
        model._cache["hash"] = h
    return h


def model_from_json(doc: dict, check: bool = True) -> LoopModel:
    _validate(doc, MODEL_SCHEMA, "model")
    f = FieldSpec.from_name(doc["field"])

    def basis(rows):
        return GradedBasis(tuple(BasisEntry(r["id"], r["degree"], r.get("component", "0"))
                                 for r in rows), f)

    try:
        lb = basis(doc["loop_basis"])
        bb = basis(doc["base_basis"])

        def table(rows, b, allow_oow):
            out = {}
            for r in rows:
                key = (b.index[r["left"]], b.index[r["right"]])
                if key in out:
                    raise ModelError(f"duplicate table entry {r['left']}*{r['right']}")
                if r["result"] == "out_of_window":
                    if not allow_oow:
                        raise ModelError("intersection entries cannot be out of window")
                    out[key] = OUT_OF_WINDOW
                else:
                    out[key] = b.vector(r["result"])
            return out

        def gmap(rows, src, tgt, shift):
            return GradedMap(src, tgt, shift,
                             {src.index[r["source"]]: tgt.vector(r["image"]) for r in rows})

        w = doc["window"]
        model = LoopModel(
            name=doc["name"], n=doc["n"], field=f, loop_basis=lb, base_basis=bb,
            product=table(doc["product"], lb, True),
            delta=gmap(doc["delta"], lb, lb, 1),
            intersection=table(doc["intersection"], bb, False),
            ev=gmap(doc["ev"], lb, bb, 0),
            iota=gmap(doc["iota"], bb, lb, 0),
            pt_class=bb.vector(doc["pt_class"]),
            fundamental_class=bb.vector(doc["fundamental_class"]),
            window=Window(w["min_degree"], w["max_degree"], tuple(w["components"])),
            orientable=doc.get("orientable", True),
            provenance=tuple((p["block"], p["source"]) for p in doc.get("provenance", [])),
        )
    except KeyError as exc:
        raise ModelError(f"unknown basis id {exc}") from None
    if check:
        require_axioms(model)
    return model


def model_write(model: LoopModel, path) -> None:
    Path(path).write_text(model_dumps(model), encoding="utf-8")


def model_read(path, check: bool = True) -> LoopModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return model_from_json(doc, check=check)


def cert_to_json(cert: Certificate, model: LoopModel) -> dict:
    f = model.field
    return {
        "schema_version": SCHEMA_VERSION,
        "model": cert.model_name,
        "model_hash": cert.model_hash,
        "field": f.name,
        "letters": [{"degree": a.degree, "vector": a.to_text()} for a in cert.letters],
        "trace": [x.to_text() for x in cert.trace],
        "normalization": f.format(cert.normalization),
    }


def cert_from_json(doc: dict, model: LoopModel) -> Certificate:
    _validate(doc, CERT_SCHEMA, "certificate")
    f = model.field
    if doc["field"] != f.name:
        raise CertificateError(f"certificate over {doc['field']}, model over {f.name}")
    try:
        letters = tuple(model.loop_basis.vector(r["vector"]) for r in doc["letters"])
        trace = tuple(model.base_basis.vector(x) for x in doc["trace"])
    except KeyError as exc:
        raise CertificateError(f"certificate names unknown basis id {exc}") from None
    return Certificate(doc["model"], letters, trace, f.parse(doc["normalization"]),
                       doc.get("model_hash", ""))


def cert_write(cert: Certificate, model: LoopModel, path) -> None:
    Path(path).write_text(dumps_canonical(cert_to_json(cert, model)), encoding="utf-8")


def cert_read(path, model: LoopModel) -> Certificate:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return cert_from_json(doc, model)


def shipped_model_names() -> list[str]:
    return sorted(p.name for p in resources.files("loopcert.data").iterdir()
                  if p.name.endswith(".model.json"))


def load_shipped(name: str, check: bool = True) -> LoopModel:
    """Load a data-file model shipped with the package (e.g. ``s3.model.json``)."""
    text = resources.files("loopcert.data").joinpath(name).read_text(encoding="utf-8")
    return model_from_json(json.loads(text), check=check)
