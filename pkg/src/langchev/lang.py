"""Solvers for the twisted conjugation equation a^(-F) a = c in GL, SL,
Sp, SO and split tori over finite fields, with exact verification.

The minimum field degree r of c and the order s of the norm element
c^(F^(r-1)) ... c^F c determine the level k_rs where a solution lives; the
returned element always has minimum field degree exactly rs.  Two
F-eigenspace routines are provided: a deterministic one working over the
prime field, and the randomized summation method whose accumulated matrix
is itself the GL solution (the telescoping identity a^F c = a is asserted
on every success).  SL, Sp and SO solutions are obtained from an eigenbasis
normalized by volume or by a normal basis for the invariant form.

Everything returns verified certificates; verification is exact, entrywise,
and reports the first failing relation on bad input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted, InputError
from .ff import FqElement, fixed_nonsquare, sqrt, \
    solve_diag_quadratic
from .linalg import Mat, matrix_order

__all__ = [
    "BilinearFormFq", "LangInstance", "LangCertificate",
    "min_field_degree", "norm_and_order", "f_eigenspace_det",
    "f_eigenspace_lv", "solve_gl", "solve_sl", "solve_sp", "solve_so",
    "solve_torus", "solve", "verify", "volume", "normal_basis",
    "canonical_gram", "random_instance", "random_group_element",
]

_LV_RETRY_CAP = 64


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------

def _antidiag(level, n):
    M = Mat.zeros(level, n, n)
    for i in range(n):
        M.planes[0, i, n - 1 - i] = 1
    return M


def canonical_gram(level, kind, d, variant="split"):
    """The reference Gram matrices: the antidiagonal A_d, its delta
    variants, and the symplectic block form."""
    if kind == "symplectic":
        if d % 2:
            raise InputError("symplectic forms need even dimension")
        half = d // 2
        M = Mat.zeros(level, d, d)
        A = _antidiag(level, half)
        M.planes[:, :half, half:] = A.planes
        M.planes[:, half:, :half] = (-A.planes) % level.p
        return M
    if kind != "orthogonal":
        raise InputError(f"unknown form kind {kind!r}")
    if variant == "split":
        return _antidiag(level, d)
    delta = fixed_nonsquare(level)
    M = Mat.zeros(level, d, d)
    if d % 2:
        half = (d - 1) // 2
        for i in range(half):
            M.planes[:, i, d - 1 - i] = level.one.coeffs
            M.planes[:, d - 1 - i, i] = level.one.coeffs
        M.planes[:, half, half] = delta.coeffs
    else:
        half = d // 2 - 1
        for i in range(half):
            M.planes[:, i, d - 1 - i] = level.one.coeffs
            M.planes[:, d - 1 - i, i] = level.one.coeffs
        M.planes[:, half, half] = level.one.coeffs
        M.planes[:, half + 1, half + 1] = (-delta).coeffs
    return M


def _is_canonical_gram(level, kind, M):
    d = M.nrows
    if kind == "symplectic":
        return M == canonical_gram(level, kind, d)
    return M == canonical_gram(level, kind, d, "split") \
        or M == canonical_gram(level, kind, d, "nonsplit")


@dataclass
class BilinearFormFq:
    """A nondegenerate symplectic or orthogonal form over the base level."""
    kind: str
    gram: Mat
    delta: FqElement = None

    def __post_init__(self):
        level = self.gram.level
        if level.p == 2:
            raise InputError("forms require odd characteristic")
        if self.kind not in ("symplectic", "orthogonal"):
            raise InputError(f"unknown form kind {self.kind!r}")
        Mt = self.gram.transpose()
        if self.kind == "symplectic":
            if not (self.gram + Mt).is_zero():
                raise InputError("symplectic Gram must be alternating")
            for i in range(self.gram.nrows):
                if self.gram.entry(i, i):
                    raise InputError("symplectic Gram must be alternating")
        else:
            if not self.gram == Mt:
                raise InputError("orthogonal Gram must be symmetric")
        if self.gram.try_inverse() is None:
            raise InputError("form is degenerate")
        if self.delta is None:
            self.delta = fixed_nonsquare(level)

    def pair(self, u, v):
        return (u @ self.gram @ v.transpose()).entry(0, 0)


# ---------------------------------------------------------------------------
# Instances and certificates
# ---------------------------------------------------------------------------

@dataclass
class LangInstance:
    """(group kind, c, r, s) with the invariants validated up front."""
    kind: str
    tower: object
    c: object                  # Mat for matrix groups, list for Torus
    r: int = None
    s: int = None
    form: BilinearFormFq = None
    trust_s: bool = False
    order_cap: int = 10 ** 6
    norm: Mat = field(default=None, repr=False)

    def __post_init__(self):
        kind = self.kind
        if kind not in ("GL", "SL", "Sp", "SO", "Torus"):
            raise InputError(f"unknown group kind {self.kind!r}")
        if kind == "Torus":
            if not isinstance(self.c, (list, tuple)) or not self.c:
                raise InputError("torus instance needs a component list")
            if any(not x for x in self.c):
                raise InputError("torus entries must be invertible")
            self.d = len(self.c)
            cmat = Mat.diagonal(self.c[0].level, list(self.c))
        else:
            cmat = self.c
            self.d = cmat.nrows
            if cmat.nrows != cmat.ncols:
                raise InputError("c must be square")
            if cmat.try_inverse() is None:
                raise InputError("c must be invertible")
        r_true = min_field_degree(self.tower, cmat)
        if self.r is None:
            self.r = r_true
        elif self.r != r_true:
            raise InputError(
                f"claimed r = {self.r} but the minimum field degree is "
                f"{r_true}")
        if cmat.level.r != r_true:
            # normalize the carrier to the minimal level
            from .liealg import _descend
            low = _descend(cmat, self.tower.level(self.tower.extend(r_true)))
            assert low is not None, "F^r-fixed entries must descend"
            cmat = low
            if kind == "Torus":
                self.c = [cmat.entry(i, i) for i in range(self.d)]
            else:
                self.c = cmat
        if kind in ("Sp", "SO"):
            if self.form is None:
                lvl1 = self.tower.level(1)
                self.form = BilinearFormFq(
                    "symplectic" if kind == "Sp" else "orthogonal",
                    canonical_gram(lvl1, "symplectic" if kind == "Sp"
                                   else "orthogonal", self.d))
            G = self.form.gram.embed(cmat.level.r)
            if not cmat @ G @ cmat.transpose() == G:
                raise InputError("c does not preserve the form")
        if kind in ("SL", "SO"):
            det = cmat.det()
            if det != cmat.level.one:
                # for SO this is the disconnected coset: no solution exists
                raise InputError(
                    "det(c) != 1; the twisted equation has no solution "
                    "in this group" if kind == "SO"
                    else "SL requires det(c) = 1")
        if self.s is not None and self.trust_s:
            self.norm = None  # caller vouches for s; skip the computation
        else:
            norm, s_true = norm_and_order(self.tower, cmat, self.r,
                                          cap=self.order_cap)
            self.norm = norm
            if self.s is None:
                self.s = s_true
            elif self.s != s_true:
                raise InputError(
                    f"claimed s = {self.s} but the norm order is {s_true}")
        self.rs = self.r * self.s


@dataclass
class LangCertificate:
    """A verified solution with its check record."""
    instance: LangInstance
    a: object
    level: int
    s: int
    checks: dict
    ok: bool

    def to_json(self):
        if isinstance(self.a, Mat):
            a_json = self.a.to_json()
        else:
            a_json = [x.to_json() for x in self.a]
        return {"a": a_json,
                "level": self.instance.tower.level(self.level).spec_string(),
                "s": self.s, "checks": self.checks, "ok": self.ok}


# ---------------------------------------------------------------------------
# Minimum field degree and norms
# ---------------------------------------------------------------------------

def _divisors(n):
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def min_field_degree(tower, g):
    """Least r dividing the carrier level with g^(F^r) = g."""
    t = g.level.r
    for r in _divisors(t):
        if g.frobenius(r) == g:
            return r
    raise AssertionError("F^level must fix the element")  # pragma: no cover


def norm_and_order(tower, c, r=None, cap=10 ** 6):
    """(N, s) with N = c^(F^(r-1)) ... c^F c and s its matrix order."""
    if r is None:
        r = min_field_degree(tower, c)
    N = c
    for i in range(1, r):
        N = c.frobenius(i) @ N
    assert N.frobenius(r) == N, "norm escaped its level"
    s = matrix_order(N, cap=cap)
    return N, s


# ---------------------------------------------------------------------------
# F-eigenspaces
# ---------------------------------------------------------------------------

_prime_towers = {}


def _prime_level(p):
    from .ff import make_tower
    if p not in _prime_towers:
        _prime_towers[p] = make_tower(p, 1)
    return _prime_towers[p].level(1)


def _mult_matrix(x):
    """GF(p)-matrix of multiplication by x on its level."""
    from .ff import _poly_mul_reduce
    level = x.level
    rows = [_poly_mul_reduce(tuple(int(i == j) for i in range(level.m)),
                             x.coeffs, level)
            for j in range(level.m)]
    return np.array(rows, dtype=np.int64)


def f_eigenspace_det(instance):
    """Deterministic eigenspace: fixed points of S^(+d) C over GF(p).

    Views k_rs^d as a GF(p)-space of dimension d*e*r*s and returns a
    k-basis of {v : v^F c = v} (d rows over level rs)."""
    tower = instance.tower
    rs = tower.extend(instance.rs)
    level = tower.level(rs)
    c = _cmat(instance).embed(rs)
    d = instance.d
    m = level.m
    p = level.p
    S = level.frob_q
    big = np.zeros((d * m, d * m), dtype=np.int64)
    for j in range(d):
        for j2 in range(d):
            e = c.entry(j, j2)
            if e:
                big[j * m:(j + 1) * m, j2 * m:(j2 + 1) * m] = \
                    S @ _mult_matrix(e) % p
    plevel = _prime_level(p)
    T = Mat.from_int_rows(plevel, big % p)
    from .linalg import fixed_space
    fixed = fixed_space(T)
    assert fixed.nrows == d * tower.e, "eigenspace dimension mismatch"
    vectors = []
    for i in range(fixed.nrows):
        coeffs = [int(fixed.planes[0, i, t]) for t in range(d * m)]
        row = Mat.zeros(level, 1, d)
        for j in range(d):
            row.planes[:, 0, j] = coeffs[j * m:(j + 1) * m]
        vectors.append(row)
    basis = _select_k_basis(tower, vectors, d)
    for v in basis.rows():
        assert v.frobenius(1) @ c == v
    return basis


def _relative_coords(tower, x, sub_r=1):
    """Coordinates of a level element over the sub-level basis
    (theta-powers times a base-field basis)."""
    level = x.level
    key = ("rel", sub_r)
    cache = level.__dict__.setdefault("_rel_cache", {})
    if key not in cache:
        from .ff import embed, _poly_mul_reduce
        sub = tower.level(sub_r)
        ratio = level.m // sub.m
        rows = []
        theta_pow = (1,) + (0,) * (level.m - 1)
        theta = tuple(int(i == 1) for i in range(level.m))
        for j in range(ratio):
            for a in range(sub.m):
                base_elt = embed(sub.element([int(i == a)
                                              for i in range(sub.m)]),
                                 level.r)
                rows.append(_poly_mul_reduce(base_elt.coeffs, theta_pow,
                                             level))
            theta_pow = _poly_mul_reduce(theta_pow, theta, level)
        mat = np.array(rows, dtype=np.int64)
        plevel = _prime_level(level.p)
        inv = Mat.from_int_rows(plevel, mat).inverse()
        cache[key] = inv.planes[0]
    inv = cache[key]
    sol = np.array(x.coeffs, dtype=np.int64) @ inv % level.p
    sub = tower.level(sub_r)
    ratio = level.m // sub.m
    return [sub.element(sol[j * sub.m:(j + 1) * sub.m])
            for j in range(ratio)]


def _select_k_basis(tower, vectors, want):
    """Pick a k-linearly independent subset spanning the k-span."""
    level1 = tower.level(1)
    chosen = []
    stacked = None
    for v in vectors:
        krow = []
        for j in range(v.ncols):
            krow.extend(_relative_coords(tower, v.entry(0, j)))
        cand = Mat.from_entries(level1, [krow])
        trial = cand if stacked is None else Mat.vstack([stacked, cand])
        if trial.rank() > (0 if stacked is None else stacked.nrows):
            stacked = trial.row_space()
            chosen.append(v)
        if len(chosen) == want:
            break
    assert len(chosen) == want, "could not extract a k-basis"
    return Mat.vstack(chosen)


def _cmat(instance):
    if instance.kind == "Torus":
        return Mat.diagonal(instance.c[0].level, list(instance.c))
    return instance.c


def f_eigenspace_lv(instance, rng):
    """Las Vegas eigenspace: a = sum_i x^(F^i) c^(F^(i-1)) ... c for random
    x, accepted when invertible.  Returns (basis rows of E(k), a); the rows
    of a themselves are the F-eigenvectors and a is the GL solution."""
    tower = instance.tower
    rs = tower.extend(instance.rs)
    c = _cmat(instance).embed(rs)
    d = instance.d
    level = tower.level(rs)
    for _ in range(_LV_RETRY_CAP):
        x = Mat.random(level, d, d, rng)
        a = x
        prefix = c
        xf = x
        for _ in range(1, instance.rs):
            xf = xf.frobenius(1)
            a = a + xf @ prefix
            prefix = prefix.frobenius(1) @ c
        if a.try_inverse() is None:
            continue
        assert a.frobenius(1) @ c == a, "telescoping identity failed"
        return a, a
    raise BudgetExhausted(
        f"no invertible accumulate in {_LV_RETRY_CAP} draws")


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def solve_gl(instance, rng):
    if instance.kind != "GL":
        raise InputError("solve_gl needs a GL instance")
    _, a = f_eigenspace_lv(instance, rng)
    return verify(instance, a, strict=True)


def volume(B):
    """Determinant of the matrix whose rows are the given basis."""
    return B.det()


def solve_sl(instance, rng):
    if instance.kind != "SL":
        raise InputError("solve_sl needs an SL instance")
    _, a = f_eigenspace_lv(instance, rng)
    vol = a.det()
    assert vol.frobenius(1) == vol, "volume must lie in the base field"
    scaled = a.copy()
    row0 = a.row(0) * vol.inverse()
    scaled.planes[:, 0, :] = row0.planes[:, 0, :]
    assert scaled.det() == a.level.one
    return verify(instance, scaled, strict=True)


def solve_sp(instance, rng):
    if instance.kind != "Sp":
        raise InputError("solve_sp needs an Sp instance")
    return _solve_form_group(instance, rng)


def solve_so(instance, rng):
    if instance.kind != "SO":
        raise InputError("solve_so needs an SO instance")
    return _solve_form_group(instance, rng)


def _solve_form_group(instance, rng):
    tower = instance.tower
    level1 = tower.level(1)
    form = instance.form
    d = instance.d
    # normalize the ambient form once via a normal basis of V(k)
    P_rows = normal_basis(Mat.identity(level1, d), form)
    P = Mat.vstack(P_rows)
    M0 = P @ form.gram @ P.transpose()
    assert _is_canonical_gram(level1, form.kind, M0)
    norm_form = BilinearFormFq(form.kind, M0, form.delta)
    c = instance.c
    cP = (P.embed(c.level.r) @ c @ P.embed(c.level.r).inverse())
    rs = tower.extend(instance.rs)
    Prs = P.embed(rs)
    sub = LangInstance(kind="GL", tower=tower, c=cP, r=instance.r,
                       s=instance.s, trust_s=True,
                       order_cap=instance.order_cap)
    _, a_gl = f_eigenspace_lv(sub, rng)
    # rows of a_gl form a k-basis of E(k); the restricted form is over k
    B_rows = normal_basis(a_gl, norm_form)
    B = Mat.vstack(B_rows)
    G = B @ M0.embed(rs) @ B.transpose()
    Gd = _descend_mat(G, level1)
    assert Gd is not None, "restricted Gram not over the base field"
    if form.kind == "orthogonal":
        if not Gd == M0:
            raise AssertionError(
                "normal eigenbasis Gram differs from the reference; "
                "determinant classes forbid this for SO input")
        vol = B.det()
        volsq = vol * vol
        assert volsq == B.level.one, "vol^2 != 1 in SO"
        if vol != B.level.one:
            half = (d - 1) // 2 if d % 2 else d // 2
            if M0 == canonical_gram(level1, "orthogonal", d, "split"):
                B.planes[:, [0, d - 1], :] = B.planes[:, [d - 1, 0], :]
            else:
                B.planes[:, half, :] = (-B.planes[:, half, :]) % level1.p
        assert B.det() == B.level.one
    else:
        assert Gd == M0, "symplectic Gram mismatch"
    a_norm = B
    a = Prs.inverse() @ a_norm @ Prs
    return verify(instance, a, strict=True)


def solve_torus(tower, c, r=None, s=None, rng=None, order_cap=10 ** 6):
    """Componentwise GL_1 solution for a split torus instance."""
    import random as _random
    rng = rng or _random.Random(0)
    instance = LangInstance(kind="Torus", tower=tower, c=list(c), r=r, s=s,
                            order_cap=order_cap)
    rs = tower.extend(instance.rs)
    out = []
    for ci in instance.c:
        comp = LangInstance(kind="GL", tower=tower,
                            c=Mat.diagonal(ci.level, [ci]),
                            order_cap=order_cap)
        _, a = f_eigenspace_lv(comp, rng)
        out.append(a.embed(rs).entry(0, 0))
    return verify(instance, out, strict=True)


def solve(instance, rng):
    """Dispatch on the instance kind."""
    if instance.kind == "GL":
        return solve_gl(instance, rng)
    if instance.kind == "SL":
        return solve_sl(instance, rng)
    if instance.kind == "Sp":
        return solve_sp(instance, rng)
    if instance.kind == "SO":
        return solve_so(instance, rng)
    if instance.kind == "Torus":
        return solve_torus(instance.tower, instance.c, instance.r,
                           instance.s)
    raise InputError(f"unknown kind {instance.kind!r}")


# ---------------------------------------------------------------------------
# Normal bases for forms (Witt-style recursion, odd characteristic)
# ---------------------------------------------------------------------------

def _descend_mat(M, level):
    from .liealg import _descend
    return _descend(M, level)


def _descend_el(x, level):
    out = _descend_mat(Mat.from_entries(x.level, [[x]]), level)
    if out is None:
        raise AssertionError("pairing value not in the base field")
    return out.entry(0, 0)


def normal_basis(rows, form):
    """A basis of the row space whose Gram matrix is bit-exactly one of the
    canonical matrices.  The construction is rational over the base field:
    all quadratic equations are solved in k and only k-linear combinations
    of the input rows are taken."""
    level1 = form.gram.level
    amb = rows.level
    gram = form.gram.embed(amb.r) if amb.r != 1 else form.gram

    def pair(u, v):
        val = (u @ gram @ v.transpose()).entry(0, 0)
        return _descend_el(val, level1) if amb.r != 1 else val

    def emb(x):
        from .ff import embed as _embed
        return _embed(x, amb.r) if amb.r != 1 else x

    if form.kind == "symplectic":
        return _symplectic_normal_basis(rows, pair, emb, level1)
    return _orthogonal_normal_basis(rows, pair, emb, level1, form.delta)


def _perp_in(rows, pair, emb, spans, level1):
    """Rows of the subspace orthogonal to the given vectors."""
    conds = []
    for w in spans:
        col = Mat.from_entries(level1, [[pair(rows.row(i), w)]
                                        for i in range(rows.nrows)])
        conds.append(col)
    stacked = Mat.hstack(conds)
    ker = stacked.left_kernel()
    return (ker.embed(rows.level.r) if rows.level.r != 1 else ker) @ rows


def _symplectic_normal_basis(rows, pair, emb, level1):
    d = rows.nrows
    if d == 0:
        return []
    if d % 2:
        raise InputError("odd-dimensional symplectic space")
    u = rows.row(0)
    v = None
    for i in range(1, d):
        if pair(u, rows.row(i)):
            v = rows.row(i)
            break
    if v is None:
        raise InputError("degenerate symplectic form")
    v = v * emb(pair(u, v).inverse())
    rest = _perp_in(rows, pair, emb, [u, v], level1)
    assert rest.nrows == d - 2
    inner = _symplectic_normal_basis(rest, pair, emb, level1) if d > 2 \
        else []
    half_inner = len(inner) // 2
    xs = [u] + inner[:half_inner]
    ys = inner[half_inner:] + [v]
    # Gram([x_1..x_l, y_1..y_l]) = [[0, A_l], [-A_l, 0]] with pairs
    # (x_i, y_(l+1-i)) hyperbolic
    return xs + ys


def _find_anisotropic(rows, pair):
    d = rows.nrows
    for i in range(d):
        if pair(rows.row(i), rows.row(i)):
            return rows.row(i)
    for i in range(d):
        for j in range(i + 1, d):
            cand = rows.row(i) + rows.row(j)
            if pair(cand, cand):
                return cand
    return None


def _find_isotropic(rows, pair, emb, level1, delta):
    """A nonzero isotropic vector, or None for anisotropic spaces."""
    d = rows.nrows
    for i in range(d):
        if not pair(rows.row(i), rows.row(i)) and not rows.row(i).is_zero():
            return rows.row(i)
    if d < 2:
        return None
    u = _find_anisotropic(rows, pair)
    uu = pair(u, u)
    rest = _perp_in(rows, pair, emb, [u], level1)
    v = _find_anisotropic(rest, pair)
    if v is None:
        return None
    vv = pair(v, v)
    if d == 2:
        # isotropic iff -vv/uu is a square
        root = sqrt(-vv / uu)
        if root is None:
            return None
        return u * emb(root) + v
    w_rows = _perp_in(rows, pair, emb, [u, v], level1)
    w = _find_anisotropic(w_rows, pair)
    if w is None:
        # degenerate tail cannot happen for nondegenerate forms
        raise InputError("degenerate form detected mid-recursion")
    ww = pair(w, w)
    # (u,u)a^2 + (v,v)b^2 = -(w,w), always solvable over a finite field
    sol = solve_diag_quadratic(uu, vv, -ww)
    assert sol is not None
    a, b = sol
    return u * emb(a) + v * emb(b) + w


def _orthogonal_normal_basis(rows, pair, emb, level1, delta):
    d = rows.nrows
    if d == 0:
        return []
    if d == 1:
        u = rows.row(0)
        uu = pair(u, u)
        if not uu:
            raise InputError("degenerate form detected mid-recursion")
        a = sqrt(uu)
        if a is None:
            a = sqrt(uu / delta)
            assert a is not None
        return [u * emb(a.inverse())]
    x = _find_isotropic(rows, pair, emb, level1, delta)
    if x is None:
        # anisotropic: only possible for d <= 2
        assert d == 2, "anisotropic space of dimension > 2"
        u = _find_anisotropic(rows, pair)
        uu = pair(u, u)
        rest = _perp_in(rows, pair, emb, [u], level1)
        v = rest.row(0)
        vv = pair(v, v)
        sol = solve_diag_quadratic(uu, vv, level1.one)
        assert sol is not None, "anisotropic plane does not represent 1"
        a, b = sol
        x1 = u * emb(a) + v * emb(b)
        # y0 = (v,v)b u - (u,u)a v is orthogonal to x1 with norm
        # (u,u)(v,v); anisotropy makes (u,u)(v,v)/(-delta) a square, so y0
        # rescales to norm exactly -delta
        y0 = u * emb(vv * b) - v * emb(uu * a)
        t = sqrt(uu * vv / (-delta))
        assert t is not None, "plane is not anisotropic after all"
        y1 = y0 * emb(t.inverse())
        assert pair(y1, y1) == -delta
        assert not pair(x1, y1)
        return [x1, y1]
    # split off a hyperbolic pair through x
    y = None
    for i in range(d):
        if pair(x, rows.row(i)):
            y = rows.row(i)
            break
    assert y is not None, "degenerate form detected mid-recursion"
    y = y * emb(pair(x, y).inverse())
    yy = pair(y, y)
    if yy:
        two_inv = (level1.one + level1.one).inverse()
        y = y - x * emb(yy * two_inv)
        assert not pair(y, y)
    if d == 2:
        return [x, y]
    rest = _perp_in(rows, pair, emb, [x, y], level1)
    assert rest.nrows == d - 2
    inner = _orthogonal_normal_basis(rest, pair, emb, level1, delta)
    return [x] + inner + [y]


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def verify(instance, a, strict=False):
    """Exact verification; returns a certificate (ok flag, check record)."""
    tower = instance.tower
    checks = {}
    kind = instance.kind
    if kind == "Torus":
        amat = Mat.diagonal(a[0].level, list(a))
    else:
        amat = a
    level = amat.level
    rs = instance.rs
    ok = True
    inv = amat.try_inverse()
    checks["invertible"] = inv is not None
    if inv is None:
        ok = False
    else:
        c_emb = _cmat(instance).embed(level.r) if level.r != \
            _cmat(instance).level.r else _cmat(instance)
        lhs = inv.frobenius(1) @ amat
        eq = lhs == c_emb
        checks["lang_equation"] = eq
        if not eq:
            ok = False
            for i in range(amat.nrows):
                for j in range(amat.ncols):
                    if lhs.entry(i, j) != c_emb.entry(i, j):
                        checks["first_bad_entry"] = [i, j]
                        break
                if "first_bad_entry" in checks:
                    break
        mfd = min_field_degree(tower, amat)
        checks["min_field_degree"] = {"expected": rs, "found": mfd,
                                      "ok": mfd == rs}
        if mfd != rs:
            ok = False
        if kind in ("SL", "SO"):
            checks["det_one"] = amat.det() == level.one
            ok = ok and checks["det_one"]
        if kind in ("Sp", "SO"):
            G = instance.form.gram.embed(level.r)
            checks["form_preserved"] = amat @ G @ amat.transpose() == G
            ok = ok and checks["form_preserved"]
    cert = LangCertificate(instance=instance, a=a, level=level.r,
                           s=instance.s, checks=checks, ok=ok)
    if strict and not ok:
        raise AssertionError(f"verification failed: {checks}")
    return cert


# ---------------------------------------------------------------------------
# Seeded instance generators (used by the test suites and the CLI demos)
# ---------------------------------------------------------------------------

def random_group_element(tower, kind, d, level_r, rng, form=None):
    """A random element of the group over k_(level_r): uniform invertible
    for GL, volume-normalized for SL, Cayley transforms for Sp/SO."""
    r = tower.extend(level_r)
    level = tower.level(r)
    if kind in ("GL", "SL"):
        while True:
            g = Mat.random(level, d, d, rng)
            if g.try_inverse() is not None:
                break
        if kind == "SL":
            det = g.det()
            row0 = g.row(0) * det.inverse()
            g.planes[:, 0, :] = row0.planes[:, 0, :]
        return g
    if kind in ("Sp", "SO"):
        M = form.gram.embed(r)
        Minv = M.inverse()
        while True:
            A = Mat.random(level, d, d, rng)
            if kind == "SO":
                A = A - A.transpose()          # alternating
            else:
                A = A + A.transpose()          # symmetric
            K = A @ Minv
            I = Mat.identity(level, d)
            IK = I + K
            if IK.try_inverse() is None:
                continue
            g = (I - K) @ IK.inverse()
            assert g @ M @ g.transpose() == M
            if kind == "SO":
                assert g.det() == level.one
            return g
    if kind == "Torus":
        return [level.element(rng.randrange(1, level.order))
                for _ in range(d)]
    raise InputError(f"unknown kind {kind!r}")


def random_instance(tower, kind, d, target_level, rng, form=None,
                    max_rs=None, order_cap=10 ** 6):
    """c := a0^(-F) a0 for a random group element a0 at the target level,
    which guarantees solvability with rs dividing the target level."""
    if kind in ("Sp", "SO") and form is None:
        lvl1 = tower.level(1)
        form = BilinearFormFq(
            "symplectic" if kind == "Sp" else "orthogonal",
            canonical_gram(lvl1, "symplectic" if kind == "Sp"
                           else "orthogonal", d))
    a0 = random_group_element(tower, kind, d, target_level, rng, form=form)
    if kind == "Torus":
        c = [x.frobenius(1).inverse() * x for x in a0]
        inst = LangInstance(kind=kind, tower=tower, c=c,
                            order_cap=order_cap)
    else:
        c = a0.frobenius(1).inverse() @ a0
        inst = LangInstance(kind=kind, tower=tower, c=c, form=form,
                            order_cap=order_cap)
    if max_rs is not None and inst.rs > max_rs:
        return None
    return inst
