"""Exterior/Lie/Schouten/Courant calculus."""

from fractions import Fraction
import random

import pytest

from couplingdirac import DegreeError, Patch
from couplingdirac.tensorcalc import (
    CourantSection,
    DiffForm,
    Multivector,
    contract,
    courant_bracket,
    d_scalar,
    exterior_derivative,
    lie_bracket,
    lie_derivative,
    pair,
    pairing_plus,
    poisson_bracket,
    schouten,
    sharp,
    wedge,
)

QP = Patch.build("q p")
XYZ = Patch.build("x1 x2 x3")
BIG = Patch.build("x1 x2 q p")


def rnd_scalar(rng, patch, max_terms=2, max_deg=2):
    out = patch.zero()
    names = [c.name for c in patch.coords]
    for _ in range(rng.randint(1, max_terms)):
        term = patch.rational(rng.randint(-3, 3))
        for name in rng.sample(names, rng.randint(0, 2)):
            term = term * patch.coord(name) ** rng.randint(1, max_deg)
        out = out + term
    return out


def rnd_tensor(rng, patch, cls, degree, max_entries=3):
    n = len(patch)
    entries = {}
    for _ in range(rng.randint(1, max_entries)):
        idx = tuple(sorted(rng.sample(range(n), degree)))
        entries[idx] = rnd_scalar(rng, patch)
    return cls.build(patch, degree, entries)


def rnd_vf(rng, patch):
    return rnd_tensor(rng, patch, Multivector, 1)


# --- wedge -------------------------------------------------------------------

def test_wedge_examples():
    dq, dp = DiffForm.basis(QP, "q"), DiffForm.basis(QP, "p")
    assert dq.wedge(dq).is_zero()
    assert dq.wedge(dp) == DiffForm.build(QP, 2, {("q", "p"): 1})
    x1 = BIG.coord("x1")
    a = DiffForm.build(BIG, 1, {("x1",): x1})
    b = DiffForm.basis(BIG, "x2")
    assert a.wedge(b) == DiffForm.build(BIG, 2, {("x1", "x2"): x1})


def test_wedge_graded_commutativity():
    rng = random.Random(3)
    for _ in range(40):
        da = rng.choice([1, 2])
        db = rng.choice([1, 2])
        a = rnd_tensor(rng, BIG, DiffForm, da)
        b = rnd_tensor(rng, BIG, DiffForm, db)
        flipped = b.wedge(a)
        assert a.wedge(b) == (flipped if (da * db) % 2 == 0 else -flipped)
        assert wedge(a, b).degree == da + db


def test_wedge_kind_mismatch():
    with pytest.raises(TypeError):
        DiffForm.basis(QP, "q").wedge(Multivector.basis(QP, "p"))


def test_build_folds_antisymmetry():
    v = Multivector.build(QP, 2, {("p", "q"): 1})
    assert v == -Multivector.build(QP, 2, {("q", "p"): 1})
    assert Multivector.build(QP, 2, {("q", "q"): 1}).is_zero()
    assert v.coefficient("q", "p") == -1
    assert v.coefficient("p", "q") == 1


# --- exterior derivative -------------------------------------------------------

def test_exterior_derivative_examples():
    f = BIG.parse("x1*p")
    df = d_scalar(BIG, f)
    assert df == DiffForm.build(BIG, 1, {("x1",): BIG.coord("p"), ("p",): BIG.coord("x1")})
    # d(x1*x2 dx1) = -x1 dx1^dx2
    omega = DiffForm.build(BIG, 1, {("x1",): BIG.parse("x1*x2")})
    assert exterior_derivative(omega) == DiffForm.build(
        BIG, 2, {("x1", "x2"): BIG.parse("-1*x1")})


def test_d_squared_zero():
    rng = random.Random(11)
    patches = [QP, XYZ, BIG, Patch.build("x1 x2 x3 q p")]
    for _ in range(100):
        patch = rng.choice(patches)
        deg = rng.choice([0, 1, 2])
        if deg == 0:
            omega = DiffForm.from_scalar(patch, rnd_scalar(rng, patch))
        else:
            omega = rnd_tensor(rng, patch, DiffForm, deg)
        assert exterior_derivative(exterior_derivative(omega)).is_zero()


def test_d_leibniz_over_wedge():
    rng = random.Random(23)
    for _ in range(30):
        a = rnd_tensor(rng, BIG, DiffForm, 1)
        b = rnd_tensor(rng, BIG, DiffForm, 1)
        lhs = exterior_derivative(a.wedge(b))
        rhs = exterior_derivative(a).wedge(b) - a.wedge(exterior_derivative(b))
        assert lhs == rhs


# --- interior product ------------------------------------------------------------

def test_contract_examples():
    dqdp = DiffForm.build(QP, 2, {("q", "p"): 1})
    assert contract(Multivector.basis(QP, "q"), dqdp) == DiffForm.basis(QP, "p")
    assert contract(Multivector.basis(QP, "p"), dqdp) == -DiffForm.basis(QP, "q")
    assert contract(Multivector.build(QP, 2, {("q", "p"): 1}), dqdp).scalar() == 1


def test_contract_degree_error_and_nilpotence():
    rng = random.Random(5)
    with pytest.raises(DegreeError):
        contract(Multivector.basis(QP, "q"),
                 DiffForm.from_scalar(QP, QP.one()))
    for _ in range(20):
        X = rnd_vf(rng, BIG)
        om = rnd_tensor(rng, BIG, DiffForm, 2)
        assert contract(X, contract(X, om)).is_zero()


def test_contract_agrees_with_iterated():
    rng = random.Random(8)
    for _ in range(30):
        V = rnd_tensor(rng, BIG, Multivector, 2)
        om = rnd_tensor(rng, BIG, DiffForm, 2)
        # sum over decomposable pieces: i_{d_i ^ d_j} = i_{d_j} o i_{d_i}
        expected = DiffForm.zero(BIG, 0)
        for (i, j), c in V.items():
            ei = Multivector(BIG, 1, {(i,): BIG.one()})
            ej = Multivector(BIG, 1, {(j,): BIG.one()})
            expected = expected + c * contract(ej, contract(ei, om))
        assert contract(V, om) == expected


# --- Lie bracket and derivative ------------------------------------------------

def test_lie_bracket_examples():
    assert lie_bracket(Multivector.basis(QP, "q"), Multivector.basis(QP, "p")).is_zero()
    X = Multivector.basis(XYZ, "x1")
    Y = Multivector.build(XYZ, 1, {("x2",): XYZ.coord("x1")})
    assert lie_bracket(X, Y) == Multivector.basis(XYZ, "x2")
    rng = random.Random(2)
    for _ in range(20):
        Z = rnd_vf(rng, BIG)
        assert lie_bracket(Z, Z).is_zero()


def test_lie_bracket_jacobi():
    rng = random.Random(44)
    for _ in range(25):
        X, Y, Z = (rnd_vf(rng, XYZ) for _ in range(3))
        total = (lie_bracket(X, lie_bracket(Y, Z))
                 + lie_bracket(Y, lie_bracket(Z, X))
                 + lie_bracket(Z, lie_bracket(X, Y)))
        assert total.is_zero()


def test_lie_derivative_examples():
    # L_{d_q}(q dp) = dp
    omega = DiffForm.build(QP, 1, {("p",): QP.coord("q")})
    assert lie_derivative(Multivector.basis(QP, "q"), omega) == DiffForm.basis(QP, "p")
    V = Multivector.build(QP, 2, {("q", "p"): 1})
    assert lie_derivative(Multivector.basis(QP, "q"), V).is_zero()
    rng = random.Random(6)
    for _ in range(20):
        X = rnd_vf(rng, BIG)
        f = rnd_scalar(rng, BIG)
        lhs = lie_derivative(X, DiffForm.from_scalar(BIG, f)).scalar()
        assert lhs == pair(d_scalar(BIG, f), X)


def test_lie_derivative_commutes_with_d():
    rng = random.Random(61)
    for _ in range(25):
        X = rnd_vf(rng, BIG)
        om = rnd_tensor(rng, BIG, DiffForm, 1)
        assert (lie_derivative(X, exterior_derivative(om))
                == exterior_derivative(lie_derivative(X, om)))


# --- Schouten bracket --------------------------------------------------------------

def jacobiator(V, i, j, k):
    patch = V.patch
    f = [patch.coord(c.name) for c in patch.coords]
    br = lambda a, b: poisson_bracket(V, a, b)
    return (br(f[i], br(f[j], f[k])) + br(f[j], br(f[k], f[i]))
            + br(f[k], br(f[i], f[j])))


def test_schouten_examples():
    V = Multivector.build(QP, 2, {("q", "p"): 1})
    assert schouten(V, V).is_zero()
    V1 = Multivector.build(XYZ, 2, {("x1", "x2"): 1,
                                    ("x2", "x3"): XYZ.coord("x1")})
    assert schouten(V1, V1).is_zero()
    V2 = Multivector.build(XYZ, 2, {("x1", "x2"): 1,
                                    ("x2", "x3"): XYZ.coord("x2")})
    tri = schouten(V2, V2)
    assert not tri.is_zero()
    # frozen regression: full contraction with the coordinate volume form
    vol = DiffForm.build(XYZ, 3, {("x1", "x2", "x3"): 1})
    assert contract(tri, vol).scalar() == 2
    assert jacobiator(V2, 0, 1, 2) == 1


def test_schouten_degree_one_is_lie_bracket():
    rng = random.Random(17)
    for _ in range(40):
        X, Y = rnd_vf(rng, BIG), rnd_vf(rng, BIG)
        assert schouten(X, Y) == lie_bracket(X, Y)
        f = rnd_scalar(rng, BIG)
        assert schouten(X, Multivector.from_scalar(BIG, f)).scalar() == pair(
            d_scalar(BIG, f), X)


def test_schouten_graded_antisymmetry():
    rng = random.Random(29)
    for _ in range(40):
        a = rng.choice([1, 2, 3])
        b = rng.choice([1, 2, 3])
        A = rnd_tensor(rng, BIG, Multivector, a)
        B = rnd_tensor(rng, BIG, Multivector, b)
        sign = (-1) ** ((a - 1) * (b - 1))
        lhs = schouten(A, B)
        rhs = schouten(B, A)
        assert lhs == (-rhs if sign == 1 else rhs)


def test_schouten_graded_jacobi():
    rng = random.Random(41)
    for _ in range(30):
        degs = [rng.choice([1, 2]) for _ in range(3)]
        A, B, C = (rnd_tensor(rng, XYZ, Multivector, d, max_entries=2)
                   for d in degs)
        a, b, c = degs
        t1 = schouten(A, schouten(B, C))
        t2 = schouten(schouten(A, B), C)
        t3 = schouten(B, schouten(A, C))
        sign = (-1) ** ((a - 1) * (b - 1))
        total = t1 - t2 - (t3 if sign == 1 else -t3)
        assert total.is_zero()


def test_schouten_leibniz():
    rng = random.Random(83)
    for _ in range(25):
        A = rnd_tensor(rng, XYZ, Multivector, rng.choice([1, 2]), max_entries=2)
        B = rnd_tensor(rng, XYZ, Multivector, 1, max_entries=2)
        C = rnd_tensor(rng, XYZ, Multivector, 1, max_entries=2)
        # [A, B^C] = [A,B]^C + (-1)^{(a-1) b} B^[A,C]
        lhs = schouten(A, B.wedge(C))
        tail = B.wedge(schouten(A, C))
        if ((A.degree - 1) * B.degree) % 2:
            tail = -tail
        assert lhs == schouten(A, B).wedge(C) + tail


def test_jacobi_iff_coordinate_jacobiator():
    rng = random.Random(53)
    patch = Patch.build("x1 x2 x3 x4")
    for _ in range(100):
        V = rnd_tensor(rng, patch, Multivector, 2, max_entries=3)
        sch = schouten(V, V)
        brute = all(
            jacobiator(V, i, j, k).is_zero()
            for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4))
        assert sch.is_zero() == brute


# --- sharp and poisson bracket -------------------------------------------------------

def test_sharp_convention():
    V = Multivector.build(QP, 2, {("q", "p"): 1})
    dq, dp = DiffForm.basis(QP, "q"), DiffForm.basis(QP, "p")
    # <beta, sharp(V, alpha)> = V(alpha, beta)
    assert sharp(V, dq) == Multivector.basis(QP, "p")
    assert sharp(V, dp) == -Multivector.basis(QP, "q")
    assert sharp(V, DiffForm.zero(QP, 1)).is_zero()
    patch = Patch.build("q p z")
    Vz = Multivector.build(patch, 2, {("q", "p"): 1})
    assert sharp(Vz, d_scalar(patch, patch.coord("z"))).is_zero()


def test_sharp_pairing_identity():
    rng = random.Random(97)
    for _ in range(40):
        V = rnd_tensor(rng, BIG, Multivector, 2)
        alpha = rnd_tensor(rng, BIG, DiffForm, 1)
        beta = rnd_tensor(rng, BIG, DiffForm, 1)
        assert pair(beta, sharp(V, alpha)) == contract(V, alpha.wedge(beta)).scalar()


def test_poisson_bracket_values():
    V = Multivector.build(QP, 2, {("q", "p"): 1})
    q, p = QP.coord("q"), QP.coord("p")
    assert poisson_bracket(V, q, p) == 1
    assert poisson_bracket(V, q * p, q) == -q
    assert poisson_bracket(V, p, p).is_zero()


def test_hamiltonian_fields_are_a_morphism():
    rng = random.Random(71)
    V = Multivector.build(QP, 2, {("q", "p"): 1})
    for _ in range(25):
        f, g = rnd_scalar(rng, QP), rnd_scalar(rng, QP)
        Xf = sharp(V, d_scalar(QP, f))
        Xg = sharp(V, d_scalar(QP, g))
        Xfg = sharp(V, d_scalar(QP, poisson_bracket(V, f, g)))
        assert lie_bracket(Xf, Xg) == Xfg


def test_poisson_bracket_leibniz():
    rng = random.Random(59)
    for _ in range(25):
        V = rnd_tensor(rng, BIG, Multivector, 2)
        f, g, h = (rnd_scalar(rng, BIG) for _ in range(3))
        assert poisson_bracket(V, f, g * h) == (
            poisson_bracket(V, f, g) * h + g * poisson_bracket(V, f, h))
        assert poisson_bracket(V, f, g) == -poisson_bracket(V, g, f)


# --- Courant sections ------------------------------------------------------------------

def test_pairing_plus_examples():
    s1 = CourantSection(Multivector.basis(QP, "q"), DiffForm.basis(QP, "p"))
    s2 = CourantSection(Multivector.basis(QP, "p"), DiffForm.basis(QP, "q"))
    assert pairing_plus(s1, s2) == 1
    z = DiffForm.zero(QP, 1)
    sx = CourantSection(Multivector.basis(QP, "q"), z)
    sy = CourantSection(Multivector.basis(QP, "p"), z)
    assert pairing_plus(sx, sy).is_zero()
    zv = Multivector.zero(QP, 1)
    assert pairing_plus(CourantSection(zv, DiffForm.basis(QP, "q")),
                        CourantSection(zv, DiffForm.basis(QP, "p"))).is_zero()
    assert pairing_plus(s1, s2) == pairing_plus(s2, s1)


def test_courant_bracket_examples():
    zf = DiffForm.zero(QP, 1)
    zv = Multivector.zero(QP, 1)
    b = courant_bracket(CourantSection(Multivector.basis(QP, "q"), zf),
                        CourantSection(Multivector.basis(QP, "p"), zf))
    assert b.vf.is_zero() and b.form.is_zero()
    qdp = DiffForm.build(QP, 1, {("p",): QP.coord("q")})
    b = courant_bracket(CourantSection(Multivector.basis(QP, "q"), zf),
                        CourantSection(zv, qdp))
    assert b.vf.is_zero()
    assert b.form == DiffForm.basis(QP, "p")
    b = courant_bracket(CourantSection(zv, qdp), CourantSection(zv, qdp))
    assert b.vf.is_zero() and b.form.is_zero()


def test_graph_sections_of_closed_form_stay_isotropic():
    # graph sections s_X = (X, i_X w) of a closed 2-form w
    rng = random.Random(37)
    for _ in range(25):
        f = rnd_scalar(rng, BIG)
        g = rnd_scalar(rng, BIG)
        w = exterior_derivative(DiffForm.build(
            BIG, 1, {("x1",): f, ("q",): g}))
        secs = []
        for _ in range(3):
            X = rnd_vf(rng, BIG)
            secs.append(CourantSection(X, contract(X, w)))
        sX, sY, sZ = secs
        assert pairing_plus(courant_bracket(sX, sY), sZ).is_zero()
