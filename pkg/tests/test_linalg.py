import random

import pytest

from langchev import ff, linalg
from langchev.errors import InputError
from langchev.linalg import Mat, PolyFq


def lvl(p, e=1, r=1):
    t = ff.make_tower(p, e)
    t.extend(r)
    return t.level(r)


def test_rref_identity():
    L = lvl(5)
    R, pivots, rank = linalg.rref(Mat.identity(L, 3))
    assert rank == 3
    assert R == Mat.identity(L, 3)


def test_kernel_example_gf5():
    L = lvl(5)
    M = Mat.from_int_rows(L, [[1, 2], [2, 4]])
    K = linalg.kernel(M)
    assert K.nrows == 1
    assert (K @ M).is_zero()
    # span{(2, 4)}: check proportionality
    v = K.row(0)
    a, b = v.entry(0, 0), v.entry(0, 1)
    assert a * L.element(4) == b * L.element(2)
    assert a or b


def test_solve_identity_and_mismatch():
    L = lvl(7)
    v = Mat.from_int_rows(L, [[1, 2, 3]])
    assert linalg.solve(Mat.identity(L, 3), v) == v
    with pytest.raises(InputError):
        Mat.identity(L, 3) @ Mat.identity(L, 2)


def test_solve_inconsistent_returns_none():
    L = lvl(5)
    M = Mat.from_int_rows(L, [[1, 2], [2, 4]])
    v = Mat.from_int_rows(L, [[0, 1]])
    assert linalg.solve(M, v) is None


def test_det_examples():
    L = lvl(5)
    assert linalg.det(Mat.identity(L, 4)) == L.one
    assert linalg.det(Mat.diagonal(L, [2, 3])) == L.one  # 2*3 = 6 = 1 mod 5
    M = Mat.from_int_rows(L, [[1, 2, 3], [1, 2, 3], [0, 1, 1]])
    assert linalg.det(M) == L.zero


def test_inverse_roundtrip_and_singularity():
    L = lvl(7, r=2)
    rng = random.Random(5)
    seen_invertible = 0
    for _ in range(10):
        M = Mat.random(L, 4, 4, rng)
        inv = M.try_inverse()
        if inv is None:
            assert linalg.det(M) == L.zero
        else:
            seen_invertible += 1
            assert M @ inv == Mat.identity(L, 4)
            assert linalg.det(M) != L.zero
    assert seen_invertible > 0


def test_charpoly_examples():
    L5 = lvl(5)
    cp = linalg.charpoly(Mat.zeros(L5, 2, 2))
    assert cp.to_json() == PolyFq.from_coeffs(L5, [0, 0, 1]).to_json()
    cp = linalg.charpoly(Mat.diagonal(L5, [1, 2]))
    # (X-1)(X-2) = X^2 - 3X + 2 = X^2 + 2X + 2 over GF(5)
    assert [c.to_int() for c in cp.coeffs()] == [2, 2, 1]
    L7 = lvl(7)
    cp = linalg.charpoly(Mat.from_int_rows(L7, [[0, 1], [1, 0]]))
    assert [c.to_int() for c in cp.coeffs()] == [6, 0, 1]  # X^2 - 1


def test_charpoly_cayley_hamilton_random():
    rng = random.Random(11)
    for p, e, n in [(3, 1, 5), (5, 1, 8), (7, 1, 6), (3, 2, 4), (5, 2, 3)]:
        L = lvl(p, e)
        M = Mat.random(L, n, n, rng)
        cp = linalg.charpoly(M)
        assert cp.degree == n
        assert cp.leading() == L.one
        assert cp.eval_mat(M).is_zero()


def test_factor_spec_examples():
    L3 = lvl(3)
    x2m1 = PolyFq.from_coeffs(L3, [2, 0, 1])  # X^2 - 1
    facs = linalg.factor(x2m1, random.Random(0))
    assert sorted((f.degree, m) for f, m in facs) == [(1, 1), (1, 1)]
    x2p1 = PolyFq.from_coeffs(L3, [1, 0, 1])  # X^2 + 1, irreducible
    facs = linalg.factor(x2p1, random.Random(0))
    assert len(facs) == 1 and facs[0][0].degree == 2 and facs[0][1] == 1
    # X^9 - X factors into the six monic irreducibles of degree <= 2
    x9mx = PolyFq.from_coeffs(L3, [0, 2] + [0] * 7 + [1])
    facs = linalg.factor(x9mx, random.Random(0))
    assert sum(f.degree * m for f, m in facs) == 9
    assert len(facs) == 6
    prod = PolyFq.one_poly(L3)
    for f, m in facs:
        for _ in range(m):
            prod = prod * f
    assert prod == x9mx.monic()


@pytest.mark.parametrize("p,e", [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1),
                                 (5, 2), (7, 1), (7, 2)])
def test_factor_reexpansion_random(p, e):
    # 125 polynomials per field, 1000 in total, degrees up to 12, q <= 49
    L = lvl(p, e)
    rng = random.Random(97 + p + 10 * e)
    for _ in range(125):
        deg = rng.randrange(1, 13)
        coeffs = [rng.randrange(L.order) for _ in range(deg)] + [1]
        f = PolyFq.from_coeffs(
            L, [ff._int_to_coeffs(c, L.p, L.m) for c in coeffs])
        facs = linalg.factor(f, rng)
        prod = PolyFq.one_poly(L)
        for g, m in facs:
            assert g.leading() == L.one
            for _ in range(m):
                prod = prod * g
        assert prod == f


def test_matrix_order_examples():
    L3 = lvl(3)
    assert linalg.matrix_order(Mat.identity(L3, 2)) == 1
    M = Mat.from_int_rows(L3, [[0, 1], [2, 0]])
    assert linalg.matrix_order(M) == 4  # M^2 = 2I, (2I)^2 = I
    L5 = lvl(5)
    assert linalg.matrix_order(Mat.diagonal(L5, [2])) == 4


def test_matrix_order_minimality():
    rng = random.Random(23)
    L = lvl(5)
    for _ in range(10):
        M = Mat.random(L, 3, 3, rng)
        if M.try_inverse() is None:
            continue
        t = linalg.matrix_order(M)
        assert (M ** t) == Mat.identity(L, 3)
        for ell in set(_small_primes(t)):
            assert not (M ** (t // ell)) == Mat.identity(L, 3)


def _small_primes(t):
    out = []
    d = 2
    while d * d <= t:
        if t % d == 0:
            out.append(d)
            while t % d == 0:
                t //= d
        d += 1
    if t > 1:
        out.append(t)
    return out


def test_matrix_order_rejects_singular():
    L = lvl(3)
    with pytest.raises(InputError):
        linalg.matrix_order(Mat.zeros(L, 2, 2))


def test_fixed_space_examples():
    L5 = lvl(5)
    assert linalg.fixed_space(Mat.identity(L5, 3)).nrows == 3
    assert linalg.fixed_space(Mat.zeros(L5, 2, 2)).nrows == 0
    # permutation of a 2-cycle on coordinates 0,1, fixing coordinate 2
    P = Mat.from_int_rows(L5, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    F = linalg.fixed_space(P)
    assert F.nrows == 2
    for v in F.rows():
        assert v @ P == v


def test_frobenius_entrywise():
    t = ff.make_tower(3)
    t.extend(2)
    L = t.level(2)
    zeta = t.element(2, [0, 1])
    M = Mat.from_entries(L, [[zeta, L.one], [L.zero, zeta * zeta]])
    MF = M.frobenius(1)
    assert MF.entry(0, 0) == zeta.frobenius(1)
    assert MF.entry(1, 1) == (zeta * zeta).frobenius(1)
    assert MF.entry(0, 1) == L.one


def test_matmul_matches_scalar_arith():
    t = ff.make_tower(5, 2)
    L = t.level(1)
    rng = random.Random(3)
    A = Mat.random(L, 3, 4, rng)
    B = Mat.random(L, 4, 2, rng)
    C = A @ B
    for i in range(3):
        for j in range(2):
            acc = L.zero
            for k in range(4):
                acc = acc + A.entry(i, k) * B.entry(k, j)
            assert C.entry(i, j) == acc


def test_row_space_canonical():
    L = lvl(7)
    A = Mat.from_int_rows(L, [[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    B = Mat.from_int_rows(L, [[1, 3, 4], [0, 1, 1]])
    assert A.row_space() == B.row_space()


def test_poly_divmod_gcd():
    L = lvl(7)
    f = PolyFq.from_coeffs(L, [6, 0, 1])   # X^2 - 1
    g = PolyFq.from_coeffs(L, [1, 1])      # X + 1
    q, r = divmod(f, g)
    assert r.is_zero()
    assert (q * g) == f
    assert f.gcd(g) == g.monic()
