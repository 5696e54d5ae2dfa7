from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopcert.exactcore import (
    BasisEntry,
    BasisMismatchError,
    Echelon,
    FieldSpec,
    GradedBasis,
    GradedMap,
    GradedVector,
    Scalar,
    image_membership,
    map_apply,
    projective_points,
    scalar_parse,
    span_closure,
    vector_combine,
)

Q = FieldSpec.rationals()
F2, F5 = FieldSpec.prime(2), FieldSpec.prime(5)
BIGP = FieldSpec.prime(2_147_483_647)
FIELDS = [Q, F2, F5, BIGP]


def flat(n, field, degree=0):
    return GradedBasis(tuple(BasisEntry(f"e{i}", degree) for i in range(n)), field)


def elements(field):
    if field.is_finite:
        return st.integers(0, field.p - 1)
    return st.fractions(max_denominator=50).filter(lambda q: abs(q.numerator) < 10**6)


# -- scalars ---------------------------------------------------------------------------


def test_scalar_parse_examples():
    assert scalar_parse("7", F5).value == 2
    assert scalar_parse("-2/4", Q).value == Fraction(-1, 2)
    assert scalar_parse(" 3 / 4 ", F5).value == (3 * pow(4, -1, 5)) % 5
    with pytest.raises(ValueError):
        scalar_parse("3/0", Q)
    with pytest.raises(ValueError):
        scalar_parse("1/5", F5)
    for bad in ("", "1.5", "x", "1/2/3"):
        with pytest.raises(ValueError):
            scalar_parse(bad, Q)


def test_fieldspec_validation_and_equality():
    with pytest.raises(ValueError):
        FieldSpec.prime(4)
    with pytest.raises(ValueError):
        FieldSpec.prime(2**31 + 11)
    assert FieldSpec.prime(3) == FieldSpec.from_name("f3")
    assert FieldSpec.rationals() == FieldSpec.from_name("q")
    assert FieldSpec.prime(3) != FieldSpec.prime(5) != Q


def test_scalar_canonical_forms():
    assert Scalar(F5, -1).value == 4
    assert Scalar(Q, Fraction(2, -4)).value == Fraction(-1, 2)
    assert Scalar(F5, 6) == Scalar(F5, 1)
    assert str(Scalar(Q, Fraction(3, 6))) == "1/2"
    with pytest.raises(TypeError):
        Scalar(Q, 0.5)


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.name)
@settings(max_examples=1000, deadline=None)
@given(data=st.data())
def test_field_axioms(field, data):
    a, b, c = (Scalar(field, data.draw(elements(field))) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a + (-a) == Scalar(field, 0)
    assert a - b == a + (-b)
    if a:
        assert a * a.inverse() == Scalar(field, 1)
        assert (b / a) * a == b


def test_scalar_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        Scalar(F5, 0).inverse()


# -- vectors and maps -------------------------------------------------------------------


def test_vector_combine_examples():
    b = flat(3, Q)
    v = b.vector({"e0": 2, "e1": "-1/3"})
    assert not vector_combine([(1, v), (-1, v)])
    w = vector_combine([(1, b.unit(0)), (1, b.unit(2))])
    assert w.to_dict() == {"e0": 1, "e2": 1}
    b2 = flat(2, F2)
    u = b2.unit(1)
    assert not vector_combine([(1, u), (1, u)])


def test_vector_combine_mismatch():
    with pytest.raises(BasisMismatchError):
        vector_combine([(1, flat(2, Q).unit(0)), (1, flat(3, Q).unit(0))])
    with pytest.raises(BasisMismatchError):
        vector_combine([(Scalar(F5, 1), flat(2, Q).unit(0))])


def test_no_stored_zeros_and_degree():
    b = GradedBasis((BasisEntry("a", 0), BasisEntry("b", 1), BasisEntry("c", 1)), Q)
    v = GradedVector(b, {0: 0, 1: Fraction(1)})
    assert v.support() == [1] and v.degree == 1
    assert b.zero().degree is None
    assert (b.unit(0) + b.unit(1)).degree == "mixed"
    assert b.degree_bounds == (0, 1)


def test_map_apply_examples():
    b = flat(3, Q)
    v = b.vector({"e0": 1, "e2": 5})
    assert map_apply(GradedMap.identity(b), v) == v
    assert not map_apply(GradedMap.zero(b, b), v)
    other = flat(3, Q)
    other_named = GradedBasis(tuple(BasisEntry(f"x{i}", 0) for i in range(3)), Q)
    assert map_apply(GradedMap.identity(other), v) == v  # equal bases are interchangeable
    with pytest.raises(BasisMismatchError):
        map_apply(GradedMap.identity(other_named), v)


def test_graded_map_degree_check():
    b = GradedBasis((BasisEntry("a", 0), BasisEntry("b", 1)), Q)
    GradedMap(b, b, 1, {0: b.unit(1)})
    with pytest.raises(ValueError):
        GradedMap(b, b, 0, {0: b.unit(1)})


# -- membership and closure ---------------------------------------------------------------


def test_image_membership_examples():
    b = flat(2, Q)
    e1, e2 = b.unit(0), b.unit(1)
    assert image_membership([e1, e2], e1 + e2) == [1, 1]
    assert image_membership([e1], e2) is None
    v = b.vector({"e0": 3, "e1": 1})
    coeffs = image_membership([v, v.scale(2)], v)
    assert coeffs is not None
    assert vector_combine(list(zip(coeffs, [v, v.scale(2)]))) == v


def _dense_rank(rows, field):
    """Independent oracle: plain Gaussian elimination on dense lists."""
    f = field
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = f.inv(m[rank][c])
        m[rank] = [f.mul(inv, x) for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                s = m[r][c]
                m[r] = [f.sub(x, f.mul(s, y)) for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


@pytest.mark.parametrize("field", [Q, F2, F5], ids=lambda f: f.name)
@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_image_membership_matches_dense_oracle(field, data):
    n = data.draw(st.integers(1, 5))
    k = data.draw(st.integers(0, 5))
    b = flat(n, field)
    vals = st.integers(-2, 2)
    gens = [GradedVector(b, {i: field.coerce(data.draw(vals)) for i in range(n)}) for _ in range(k)]
    v = GradedVector(b, {i: field.coerce(data.draw(vals)) for i in range(n)})
    coeffs = image_membership(gens, v)
    dense = [g.dense() for g in gens]
    in_span = not v or (_dense_rank(dense + [v.dense()], field) == _dense_rank(dense, field)
                        if dense else False)
    assert (coeffs is not None) == in_span
    if coeffs is not None:
        assert vector_combine(list(zip(coeffs, gens)) or [(0, v)]) == v


def test_echelon_is_reduced():
    b = flat(4, Q)
    ech = Echelon(b)
    for row in ({"e0": 2, "e1": 4}, {"e1": 1, "e3": 1}, {"e0": 1, "e3": 7}, {"e2": 3}):
        ech.add(b.vector(row))
    rows = ech.basis_vectors()
    pivots = [r.leading()[0] for r in rows]
    assert pivots == sorted(pivots)
    for r, p in zip(rows, pivots):
        assert r[p] == 1
        assert all(o[p] == 0 for o in rows if o is not r)


def test_span_closure_examples():
    b = flat(3, Q)
    v = b.vector({"e1": 2, "e2": 4})
    assert span_closure([v], [GradedMap.identity(b)]) == [v.normalized()]
    shift = GradedMap(b, b, 0, {0: b.unit(1), 1: b.unit(2), 2: b.unit(0)})
    out = span_closure([b.unit(0)], [shift])
    assert len(out) == 3


@settings(max_examples=150, deadline=None)
@given(data=st.data())
def test_span_closure_is_invariant(data):
    field = F5
    n = data.draw(st.integers(1, 5))
    b = flat(n, field)
    vals = st.integers(0, 4)
    ops = []
    for _ in range(data.draw(st.integers(0, 3))):
        cols = {j: GradedVector(b, {i: data.draw(vals) for i in range(n)}) for j in range(n)}
        ops.append(GradedMap(b, b, 0, cols))
    seed = [GradedVector(b, {i: data.draw(vals) for i in range(n)})]
    out = span_closure(seed, ops, basis=b)
    for m in ops:
        for w in out:
            assert image_membership(out, map_apply(m, w)) is not None
    if seed[0]:
        assert image_membership(out, seed[0]) is not None


def test_determinism_bit_for_bit():
    b = flat(4, F5)
    gens = [b.vector({"e0": 1, "e1": 2}), b.vector({"e1": 3, "e3": 1}), b.vector({"e2": 4})]
    runs = [(image_membership(gens, b.vector({"e0": 1, "e1": 1, "e3": 3})),
             [v.key() for v in span_closure(gens, [])]) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_projective_points_count():
    b = flat(3, FieldSpec.prime(3))
    pts = list(projective_points([b.unit(0), b.unit(1)]))
    assert len(pts) == (3**2 - 1) // (3 - 1)
    assert all(v.leading()[1] == 1 for _, v in pts)
    with pytest.raises(ValueError):
        list(projective_points([flat(2, Q).unit(0)]))
