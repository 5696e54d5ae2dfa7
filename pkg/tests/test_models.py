import json
import random

import pytest

from loopcert.bvmodel import axiom_check, bv_delta, intersect, cs_product, WindowOverflowError
from loopcert.certify import certify, verify_certificate
from loopcert.exactcore import GradedVector, map_apply
from loopcert.generators import random_basis_change
from loopcert.models import (
    AxiomFailure,
    Certificate,
    CertificateError,
    SchemaError,
    builtin_s1,
    cert_from_json,
    cert_read,
    cert_to_json,
    cert_write,
    change_basis,
    kunneth_product,
    lift_certificate,
    load_shipped,
    model_dumps,
    model_from_json,
    model_hash,
    model_read,
    model_to_json,
    model_write,
    shipped_model_names,
    tensor,
)

from conftest import F2, Q


def test_builtin_s1_shape():
    m = builtin_s1(1, Q)
    assert len(m.loop_basis) == 6
    assert list(m.loop_basis.ids) == ["c0", "c1", "c-1", "t0", "t1", "t-1"]
    assert axiom_check(m).ok
    with pytest.raises(ValueError):
        builtin_s1(0, Q)


def test_builtin_s1_mod2():
    m = builtin_s1(1, F2)
    lb = m.loop_basis
    assert bv_delta(m, lb.unit("c1")) == lb.unit("t1")
    assert bv_delta(m, lb.unit("c-1")) == lb.unit("t-1")
    assert certify(m).status == "FOUND"


def test_kunneth_torus_examples(t2q, s1q):
    assert axiom_check(t2q).ok
    lb = t2q.loop_basis
    got = bv_delta(t2q, lb.unit("c1|c1"))
    assert got in (lb.unit("t1|c1") + lb.unit("c1|t1"), lb.unit("t1|c1") - lb.unit("c1|t1"))
    assert t2q.pt_class == tensor(s1q.pt_class, s1q.pt_class, t2q.base_basis)
    assert t2q.n == 2


def test_kunneth_rejects_bad_inputs(s1q):
    with pytest.raises(Exception):
        kunneth_product(s1q, builtin_s1(1, F2))
    lb = s1q.loop_basis
    prod = dict(s1q.product)
    prod[(lb.index["c1"], lb.index["t-1"])] = lb.unit("c0").scale(5)
    with pytest.raises(AxiomFailure):
        kunneth_product(s1q.replace(product=prod), s1q)


def test_kunneth_delta_matches_formula(t2q, s1q):
    rng = random.Random(3)
    lb1 = s1q.loop_basis
    for _ in range(100):
        x, xp = rng.randrange(len(lb1)), rng.randrange(len(lb1))
        X, XP = lb1.unit(x), lb1.unit(xp)
        a = tensor(bv_delta(s1q, X), XP, t2q.loop_basis)
        b = tensor(X, bv_delta(s1q, XP), t2q.loop_basis)
        want = a - b if s1q.shifted_parity(x) else a + b
        assert bv_delta(t2q, tensor(X, XP, t2q.loop_basis)) == want


def test_kunneth_associative_up_to_relabeling():
    a = builtin_s1(1, Q)
    b = builtin_s1(1, Q).replace(name="B")
    c = kunneth_product(a, a, check=False)
    left = kunneth_product(c, b, check=False)
    right = kunneth_product(a, kunneth_product(a, b, check=False), check=False)
    assert left.loop_basis.ids == right.loop_basis.ids
    for tbl in ("product", "intersection"):
        L, R = getattr(left, tbl), getattr(right, tbl)
        assert set(L) == set(R)
        for k in L:
            assert L[k] == R[k] or (L[k].to_dict() == R[k].to_dict())
    for mp in ("delta", "ev", "iota"):
        assert getattr(left, mp).to_table() == getattr(right, mp).to_table()


def test_ev_iota_commute_with_tensor(t2q, s1q):
    lb1, bb1 = s1q.loop_basis, s1q.base_basis
    for x in range(len(lb1)):
        for xp in range(len(lb1)):
            v = tensor(lb1.unit(x), lb1.unit(xp), t2q.loop_basis)
            want = tensor(map_apply(s1q.ev, lb1.unit(x)), map_apply(s1q.ev, lb1.unit(xp)),
                          t2q.base_basis)
            assert map_apply(t2q.ev, v) == want
    for u in range(len(bb1)):
        for up in range(len(bb1)):
            v = tensor(bb1.unit(u), bb1.unit(up), t2q.base_basis)
            want = tensor(map_apply(s1q.iota, bb1.unit(u)), map_apply(s1q.iota, bb1.unit(up)),
                          t2q.loop_basis)
            assert map_apply(t2q.iota, v) == want


# -- files ----------------------------------------------------------------------------


def test_round_trip(tmp_path, s1q):
    p = tmp_path / "s1.json"
    model_write(s1q, p)
    back = model_read(p)
    assert model_dumps(back) == model_dumps(s1q)
    assert model_hash(back) == model_hash(s1q)
    assert back.product == s1q.product
    model_write(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == p.read_bytes()


def test_round_trip_torus_and_spheres(t2q):
    for m in (t2q, load_shipped("s3.model.json"), load_shipped("s5.model.json")):
        assert model_dumps(model_from_json(json.loads(model_dumps(m)))) == model_dumps(m)


def test_missing_delta_names_delta(s1q):
    doc = model_to_json(s1q)
    del doc["delta"]
    with pytest.raises(SchemaError, match="delta"):
        model_from_json(doc)


def test_bad_scalar_text_is_schema_level(s1q):
    doc = model_to_json(s1q)
    doc["field"] = 1.5
    with pytest.raises(SchemaError, match="field"):
        model_from_json(doc)


def test_associativity_violation_rejected_on_load(s1q):
    doc = model_to_json(s1q)
    for row in doc["product"]:
        if row["left"] == "t1" and row["right"] == "t-1":
            row["result"] = {"t0": "2"}
    with pytest.raises(AxiomFailure) as exc:
        model_from_json(doc)
    fails = {r.name: r for r in exc.value.report.failures}
    assert "associativity" in fails
    assert len(fails["associativity"].witness["elements"]) == 3


def test_shipped_data_models_pass_and_certify():
    names = shipped_model_names()
    assert {"s3.model.json", "s5.model.json"} <= set(names)
    for name in names:
        m = load_shipped(name)
        assert axiom_check(m).ok
        out = certify(m)
        assert out.status == "FOUND" and out.certificate.length == 1
        assert verify_certificate(m, out.certificate).valid
        assert any(k == "source" or "Menichi" in str(v) for k, v in m.provenance)


def test_change_basis_preserves_axioms_and_certificate(s1q):
    for seed in range(5):
        m = random_basis_change(random.Random(seed), builtin_s1(1, F2), f"cb{seed}")
        assert axiom_check(m).ok
        assert certify(m).status == "FOUND"


def test_certificate_file_round_trip(tmp_path, s1q):
    cert = certify(s1q).certificate
    cert_write(cert, s1q, tmp_path / "c.json")
    back = cert_read(tmp_path / "c.json", s1q)
    assert back.letters == cert.letters and back.trace == cert.trace
    assert cert_from_json(cert_to_json(cert, s1q), s1q) == back


# -- lifting ----------------------------------------------------------------------------


def test_lift_torus_example(s1q, t2q):
    c = certify(s1q).certificate
    lifted = lift_certificate(s1q, c, s1q, c, t2q)
    assert lifted.length == 2
    assert verify_certificate(t2q, lifted).valid
    lb = t2q.loop_basis
    unit = map_apply(s1q.iota, s1q.fundamental_class)
    assert lifted.letters[0] == tensor(c.letters[0], unit, lb)
    assert lifted.letters[1] in (tensor(unit, c.letters[0], lb), -tensor(unit, c.letters[0], lb))
    # tensor-1: halfway the state is ±[L] ⊗ [pt]
    mid = tensor(s1q.fundamental_class, s1q.pt_class, t2q.base_basis)
    assert lifted.trace[1] in (mid, -mid)
    # tensor-2: the end is [L] ⊗ [L'] exactly
    assert lifted.trace[2] == tensor(s1q.fundamental_class, s1q.fundamental_class,
                                     t2q.base_basis)


def test_lift_rejects_corrupted_input(s1q, t2q):
    c = certify(s1q).certificate
    bad = Certificate(c.model_name, (c.letters[0].scale(2),), c.trace, c.normalization)
    with pytest.raises(CertificateError, match="first"):
        lift_certificate(s1q, bad, s1q, c, t2q)


def test_lift_output_always_verifies():
    for seed in range(3):
        rng = random.Random(seed)
        m1 = random_basis_change(rng, builtin_s1(1, Q), f"a{seed}")
        m2 = random_basis_change(rng, builtin_s1(1, Q), f"b{seed}")
        c1, c2 = certify(m1).certificate, certify(m2).certificate
        pm = kunneth_product(m1, m2)
        lifted = lift_certificate(m1, c1, m2, c2, pm)
        assert verify_certificate(pm, lifted).valid
