"""Exact dense linear algebra and polynomial factorization over tower levels.

Matrices (:class:`Mat`) hold their entries as a stack of GF(p) coefficient
planes, shape (m, rows, cols) for a level of absolute degree m, so matrix
products, row reduction and entrywise Frobenius all vectorize through numpy
integer arithmetic while staying exact.  Vectors are rows throughout the
package: a vector v acts on a matrix as v @ M, kernels are left kernels
{v : v M = 0}, and solve(M, b) finds x with x M = b.

Polynomials (:class:`PolyFq`) use the same plane layout, coefficient index
ascending.  Factorization runs the standard squarefree / distinct-degree /
equal-degree pipeline with an explicit RNG handle; every returned factor is
certified irreducible before it is handed back.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExhausted, InputError
from .ff import FqElement, _int_to_coeffs

__all__ = [
    "Mat", "PolyFq", "rref", "kernel", "solve", "det", "charpoly",
    "factor", "matrix_order", "fixed_space",
]


def _reduce_planes(planes, level):
    """Fold coefficient planes of index >= m back below m, entries mod p."""
    m = level.m
    if planes.shape[0] > m:
        extra = planes[m:]
        planes = planes[:m].copy()
        # red[j] holds the expansion of zeta^(m+j)
        planes += np.einsum("j...,jk->k...", extra,
                            level.red[:extra.shape[0]])
    return planes % level.p


class Mat:
    """Dense exact matrix over one tower level."""

    __slots__ = ("level", "nrows", "ncols", "planes")

    def __init__(self, level, planes):
        self.level = level
        self.planes = planes
        self.nrows = planes.shape[1]
        self.ncols = planes.shape[2]

    # -- constructors --------------------------------------------------

    @classmethod
    def zeros(cls, level, nrows, ncols):
        return cls(level, np.zeros((level.m, nrows, ncols), dtype=np.int64))

    @classmethod
    def identity(cls, level, n):
        planes = np.zeros((level.m, n, n), dtype=np.int64)
        planes[0] = np.eye(n, dtype=np.int64)
        return cls(level, planes)

    @classmethod
    def from_entries(cls, level, rows):
        rows = list(rows)
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        planes = np.zeros((level.m, nrows, ncols), dtype=np.int64)
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise InputError("ragged matrix")
            for j, x in enumerate(row):
                e = level.element(x)
                planes[:, i, j] = e.coeffs
        return cls(level, planes)

    @classmethod
    def from_int_rows(cls, level, rows):
        arr = np.asarray(rows, dtype=np.int64) % level.p
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        planes = np.zeros((level.m,) + arr.shape, dtype=np.int64)
        planes[0] = arr
        return cls(level, planes)

    @classmethod
    def random(cls, level, nrows, ncols, rng):
        flat = [rng.randrange(level.p)
                for _ in range(level.m * nrows * ncols)]
        planes = np.array(flat, dtype=np.int64).reshape(
            (level.m, nrows, ncols))
        return cls(level, planes)

    @classmethod
    def diagonal(cls, level, entries):
        n = len(entries)
        out = cls.zeros(level, n, n)
        for i, x in enumerate(entries):
            out.planes[:, i, i] = level.element(x).coeffs
        return out

    def copy(self):
        return Mat(self.level, self.planes.copy())

    # -- ring operations -----------------------------------------------

    def _check(self, other):
        if self.level is not other.level:
            if self.level.tower is other.level.tower:
                ra, rb = self.level.r, other.level.r
                if rb % ra == 0:
                    return self.embed(rb)._check(other)
                if ra % rb == 0:
                    return self, other.embed(ra)
            raise InputError("matrices on incompatible levels")
        return self, other

    def __add__(self, other):
        a, b = self._check(other)
        return Mat(a.level, (a.planes + b.planes) % a.level.p)

    def __sub__(self, other):
        a, b = self._check(other)
        return Mat(a.level, (a.planes - b.planes) % a.level.p)

    def __neg__(self):
        return Mat(self.level, (-self.planes) % self.level.p)

    def __matmul__(self, other):
        a, b = self._check(other)
        if a.ncols != b.nrows:
            raise InputError(
                f"dimension mismatch {a.nrows}x{a.ncols} @ "
                f"{b.nrows}x{b.ncols}")
        level = a.level
        m = level.m
        out = np.zeros((2 * m - 1, a.nrows, b.ncols), dtype=np.int64)
        for i in range(m):
            ai = a.planes[i]
            if not ai.any():
                continue
            for j in range(m):
                bj = b.planes[j]
                if not bj.any():
                    continue
                out[i + j] += ai @ bj
                out[i + j] %= level.p
        return Mat(level, _reduce_planes(out, level))

    def __mul__(self, scalar):
        """Scalar multiplication by an FqElement or int (ring coercion)."""
        level = self.level
        e = level.scalar(scalar) if isinstance(scalar, (int, np.integer)) \
            else level.element(scalar)
        m = level.m
        out = np.zeros((2 * m - 1,) + self.planes.shape[1:], dtype=np.int64)
        for i, c in enumerate(e.coeffs):
            if c:
                out[i:i + m] += c * self.planes
        return Mat(level, _reduce_planes(out, level))

    __rmul__ = __mul__

    def __pow__(self, n):
        if self.nrows != self.ncols:
            raise InputError("pow needs a square matrix")
        if n < 0:
            return self.inverse() ** (-n)
        result = Mat.identity(self.level, self.nrows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def frobenius(self, i=1):
        level = self.level
        mat = level.frob_q_pow(i % level.r)
        return Mat(level,
                   np.einsum("j...,jk->k...", self.planes, mat) % level.p)

    def embed(self, r):
        """Entrywise embedding into a higher tower level."""
        level = self.level
        if r == level.r:
            return self
        dst = level.tower.level(r)
        emb = dst.embed_from[level.r]
        planes = np.einsum("j...,jk->k...", self.planes, emb) % level.p
        return Mat(dst, planes)

    def transpose(self):
        return Mat(self.level, self.planes.transpose(0, 2, 1).copy())

    # -- structure -------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        try:
            a, b = self._check(other)
        except InputError:
            return False
        return (a.nrows == b.nrows and a.ncols == b.ncols
                and np.array_equal(a.planes, b.planes))

    def is_zero(self):
        return not self.planes.any()

    def entry(self, i, j):
        return FqElement(self.level,
                         tuple(int(c) for c in self.planes[:, i, j]))

    def set_entry(self, i, j, value):
        self.planes[:, i, j] = self.level.element(value).coeffs

    def row(self, i):
        return Mat(self.level, self.planes[:, i:i + 1, :].copy())

    def rows(self):
        return [self.row(i) for i in range(self.nrows)]

    def take_rows(self, idx):
        return Mat(self.level, self.planes[:, list(idx), :].copy())

    def take_cols(self, idx):
        return Mat(self.level, self.planes[:, :, list(idx)].copy())

    @staticmethod
    def vstack(mats):
        level = mats[0].level
        return Mat(level, np.concatenate([m.planes for m in mats], axis=1))

    @staticmethod
    def hstack(mats):
        level = mats[0].level
        return Mat(level, np.concatenate([m.planes for m in mats], axis=2))

    def to_json(self):
        return [[self.entry(i, j).to_json() for j in range(self.ncols)]
                for i in range(self.nrows)]

    @classmethod
    def from_json(cls, level, data):
        return cls.from_entries(level, data)

    def __repr__(self):
        return (f"Mat({self.nrows}x{self.ncols} @ "
                f"{self.level.spec_string()})")

    # -- elimination -----------------------------------------------------

    def rref(self):
        """Reduced row echelon form; returns (R, pivot column list)."""
        R = self.copy()
        level = self.level
        m, p = level.m, level.p
        planes = R.planes
        pivots = []
        rank = 0
        for col in range(R.ncols):
            if rank == R.nrows:
                break
            nz = planes[:, rank:, col].any(axis=0).nonzero()[0]
            if nz.size == 0:
                continue
            pr = rank + int(nz[0])
            if pr != rank:
                planes[:, [rank, pr], :] = planes[:, [pr, rank], :]
            piv = FqElement(level, tuple(int(c) for c in planes[:, rank, col]))
            inv = piv.inverse()
            _scale_row(planes, rank, inv.coeffs, level)
            _eliminate_col(planes, rank, col, level)
            pivots.append(col)
            rank += 1
        return R, pivots

    def rank(self):
        return len(self.rref()[1])

    def row_space(self):
        """Canonical basis (nonzero rref rows) of the row space."""
        R, pivots = self.rref()
        return R.take_rows(range(len(pivots)))

    def left_kernel(self):
        """Rows v with v @ self = 0."""
        aug = Mat.hstack([self, Mat.identity(self.level, self.nrows)])
        R, _ = aug.rref()
        left = R.take_cols(range(self.ncols))
        idx = [i for i in range(self.nrows)
               if not left.planes[:, i, :].any()]
        return R.take_rows(idx).take_cols(
            range(self.ncols, self.ncols + self.nrows))

    def solve_left(self, rhs):
        """X with X @ self = rhs, or None when inconsistent."""
        aug = Mat.hstack([self, Mat.identity(self.level, self.nrows)])
        R, pivots = aug.rref()
        pivots = [c for c in pivots if c < self.ncols]
        rank = len(pivots)
        body = R.take_rows(range(rank)).take_cols(range(self.ncols))
        tail = R.take_rows(range(rank)).take_cols(
            range(self.ncols, self.ncols + self.nrows))
        coeff = rhs.take_cols(pivots)
        if not (coeff @ body) == rhs:
            return None
        return coeff @ tail

    def in_row_space(self, vec):
        return self.solve_left(vec) is not None

    def try_inverse(self):
        if self.nrows != self.ncols:
            raise InputError("inverse needs a square matrix")
        aug = Mat.hstack([self, Mat.identity(self.level, self.nrows)])
        R, pivots = aug.rref()
        if pivots != list(range(self.nrows)):
            return None
        return R.take_cols(range(self.nrows, 2 * self.nrows))

    def inverse(self):
        inv = self.try_inverse()
        if inv is None:
            raise InputError("matrix is singular")
        return inv

    def det(self):
        if self.nrows != self.ncols:
            raise InputError("det needs a square matrix")
        level = self.level
        work = self.copy()
        planes = work.planes
        n = self.nrows
        sign_flip = 0
        acc = level.one
        for col in range(n):
            nz = planes[:, col:, col].any(axis=0).nonzero()[0]
            if nz.size == 0:
                return level.zero
            pr = col + int(nz[0])
            if pr != col:
                planes[:, [col, pr], :] = planes[:, [pr, col], :]
                sign_flip ^= 1
            piv = FqElement(level, tuple(int(c) for c in planes[:, col, col]))
            acc = acc * piv
            inv = piv.inverse()
            _scale_row(planes, col, inv.coeffs, level)
            _eliminate_col(planes, col, col, level, below_only=True)
        if sign_flip:
            acc = -acc
        return acc

    def charpoly(self):
        """Monic characteristic polynomial via Hessenberg reduction."""
        if self.nrows != self.ncols:
            raise InputError("charpoly needs a square matrix")
        level = self.level
        n = self.nrows
        H = self.copy()
        planes = H.planes
        for j in range(n - 2):
            nz = planes[:, j + 1:, j].any(axis=0).nonzero()[0]
            if nz.size == 0:
                continue
            pr = j + 1 + int(nz[0])
            if pr != j + 1:
                planes[:, [j + 1, pr], :] = planes[:, [pr, j + 1], :]
                planes[:, :, [j + 1, pr]] = planes[:, :, [pr, j + 1]]
            piv = FqElement(level,
                            tuple(int(c) for c in planes[:, j + 1, j]))
            inv = piv.inverse()
            # factors for rows j+2.. ; rows -= f x row_{j+1}; col_{j+1} += cols @ f
            fcol = _field_scale_vec(planes[:, j + 2:, j], inv.coeffs, level)
            _row_update(planes, j + 2, fcol, planes[:, j + 1, :].copy(),
                        level)
            _col_update(planes, j + 1, j + 2, fcol, level)
        # recurrence over leading principal minors of the Hessenberg form
        one, zero = level.one, level.zero
        polys = [[one]]
        for k in range(1, n + 1):
            hk = H.entry(k - 1, k - 1)
            prev = polys[k - 1]
            cur = [zero] + prev                      # lambda * p_{k-1}
            cur = [c - hk * d for c, d in
                   zip(cur, prev + [zero])]
            run = one
            for i in range(1, k):
                run = run * H.entry(k - i, k - 1 - i)
                coeff = H.entry(k - 1 - i, k - 1) * run
                if coeff:
                    low = polys[k - 1 - i]
                    cur = [c - coeff * d for c, d in
                           zip(cur, low + [zero] * (len(cur) - len(low)))]
            polys.append(cur)
        return PolyFq.from_coeffs(level, polys[n])

    def minpoly_squarefree(self):
        """True when the minimal polynomial is squarefree, i.e. the matrix
        is diagonalizable over the algebraic closure."""
        cp = self.charpoly()
        rad = cp // cp.gcd(cp.derivative())
        return rad.eval_mat(self).is_zero()


def _scale_row(planes, i, coeffs, level):
    m = level.m
    row = planes[:, i, :]
    out = np.zeros((2 * m - 1, row.shape[1]), dtype=np.int64)
    for a, c in enumerate(coeffs):
        if c:
            out[a:a + m] += c * row
    out %= level.p
    if m > 1:
        out[:m] += np.einsum("j...,jk->k...", out[m:], level.red)
    planes[:, i, :] = out[:m] % level.p


def _field_scale_vec(colplanes, coeffs, level):
    """Multiply a plane-stacked column vector by a scalar's coefficients."""
    m = level.m
    out = np.zeros((2 * m - 1, colplanes.shape[1]), dtype=np.int64)
    for a, c in enumerate(coeffs):
        if c:
            out[a:a + m] += c * colplanes
    out %= level.p
    if m > 1:
        out[:m] += np.einsum("j...,jk->k...", out[m:], level.red)
    return out[:m] % level.p


def _row_update(planes, start, fcol, prow, level):
    """rows[start:] -= fcol (x) prow, in field arithmetic."""
    m = level.m
    if not fcol.any():
        return
    out = np.zeros((2 * m - 1, fcol.shape[1], prow.shape[1]),
                   dtype=np.int64)
    for i in range(m):
        fi = fcol[i]
        if not fi.any():
            continue
        for j in range(m):
            pj = prow[j]
            if not pj.any():
                continue
            out[i + j] += np.multiply.outer(fi, pj)
            out[i + j] %= level.p
    red = _reduce_planes(out, level)
    planes[:, start:, :] -= red
    planes[:, start:, :] %= level.p


def _col_update(planes, target, start, fcol, level):
    """col[target] += cols[start:] @ fcol, in field arithmetic."""
    m = level.m
    if not fcol.any():
        return
    cols = planes[:, :, start:]
    out = np.zeros((2 * m - 1, planes.shape[1]), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            fj = fcol[j]
            if not fj.any():
                continue
            out[i + j] += cols[i] @ fj
            out[i + j] %= level.p
    red = _reduce_planes(out, level)
    planes[:, :, target] += red
    planes[:, :, target] %= level.p


def _eliminate_col(planes, prow, col, level, below_only=False):
    """Clear column col against the (already normalized) pivot row."""
    m = level.m
    mask = planes[:, :, col].any(axis=0)
    mask[prow] = False
    if below_only:
        mask[:prow + 1] = False
    rows = np.nonzero(mask)[0]
    if rows.size == 0:
        return
    fcol = planes[:, rows, col].copy()
    pr = planes[:, prow, :].copy()
    out = np.zeros((2 * m - 1, len(rows), pr.shape[1]), dtype=np.int64)
    for i in range(m):
        fi = fcol[i]
        if not fi.any():
            continue
        for j in range(m):
            pj = pr[j]
            if not pj.any():
                continue
            out[i + j] += np.multiply.outer(fi, pj)
            out[i + j] %= level.p
    red = _reduce_planes(out, level)
    planes[:, rows, :] -= red
    planes[:, rows, :] %= level.p


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

class PolyFq:
    """Dense univariate polynomial over a tower level, coefficients
    ascending."""

    __slots__ = ("level", "planes")

    def __init__(self, level, planes):
        # normalize: strip trailing zero coefficients
        nz = np.nonzero(planes.any(axis=0))[0]
        n = int(nz[-1]) + 1 if nz.size else 0
        self.level = level
        self.planes = planes[:, :n]

    @classmethod
    def from_coeffs(cls, level, coeffs):
        planes = np.zeros((level.m, len(coeffs)), dtype=np.int64)
        for i, c in enumerate(coeffs):
            planes[:, i] = level.element(c).coeffs
        return cls(level, planes)

    @classmethod
    def x(cls, level):
        return cls.from_coeffs(level, [0, 1])

    @classmethod
    def zero(cls, level):
        return cls(level, np.zeros((level.m, 0), dtype=np.int64))

    @classmethod
    def one_poly(cls, level):
        return cls.from_coeffs(level, [1])

    @property
    def degree(self):
        return self.planes.shape[1] - 1

    def is_zero(self):
        return self.planes.shape[1] == 0

    def coeff(self, i):
        if i >= self.planes.shape[1]:
            return self.level.zero
        return FqElement(self.level, tuple(int(c) for c in self.planes[:, i]))

    def coeffs(self):
        return [self.coeff(i) for i in range(self.planes.shape[1])]

    def leading(self):
        if self.is_zero():
            return self.level.zero
        return self.coeff(self.degree)

    def __eq__(self, other):
        if not isinstance(other, PolyFq):
            return NotImplemented
        return (self.level is other.level
                and np.array_equal(self.planes, other.planes))

    def __hash__(self):
        return hash((id(self.level), self.planes.tobytes(),
                     self.planes.shape))

    def __add__(self, other):
        n = max(self.planes.shape[1], other.planes.shape[1])
        a = np.zeros((self.level.m, n), dtype=np.int64)
        a[:, :self.planes.shape[1]] = self.planes
        a[:, :other.planes.shape[1]] += other.planes
        return PolyFq(self.level, a % self.level.p)

    def __sub__(self, other):
        n = max(self.planes.shape[1], other.planes.shape[1])
        a = np.zeros((self.level.m, n), dtype=np.int64)
        a[:, :self.planes.shape[1]] = self.planes
        a[:, :other.planes.shape[1]] -= other.planes
        return PolyFq(self.level, a % self.level.p)

    def __neg__(self):
        return PolyFq(self.level, (-self.planes) % self.level.p)

    def __mul__(self, other):
        if isinstance(other, FqElement) or isinstance(other, int):
            return self.scale(self.level.element(other))
        level = self.level
        if self.is_zero() or other.is_zero():
            return PolyFq.zero(level)
        m = level.m
        n = self.planes.shape[1] + other.planes.shape[1] - 1
        out = np.zeros((2 * m - 1, n), dtype=np.int64)
        for i in range(m):
            ai = self.planes[i]
            if not ai.any():
                continue
            for j in range(m):
                bj = other.planes[j]
                if not bj.any():
                    continue
                out[i + j] += np.convolve(ai, bj)
                out[i + j] %= level.p
        return PolyFq(level, _reduce_planes(out, level))

    __rmul__ = __mul__

    def scale(self, s):
        level = self.level
        m = level.m
        out = np.zeros((2 * m - 1, self.planes.shape[1]), dtype=np.int64)
        for a, c in enumerate(s.coeffs):
            if c:
                out[a:a + m] += c * self.planes
        out %= level.p
        return PolyFq(level, _reduce_planes(out, level))

    def shift(self, k):
        """Multiply by X^k."""
        if self.is_zero():
            return self
        planes = np.zeros((self.level.m, self.planes.shape[1] + k),
                          dtype=np.int64)
        planes[:, k:] = self.planes
        return PolyFq(self.level, planes)

    def __divmod__(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        level = self.level
        if self.degree < other.degree:
            return PolyFq.zero(level), self
        m, p = level.m, level.p
        lead = other.leading()
        monic = lead == level.one
        gm = other if monic else other.scale(lead.inverse())
        g = gm.planes
        dg = gm.degree
        rem = self.planes.copy()
        n = rem.shape[1]
        qpl = np.zeros((m, n - dg), dtype=np.int64)
        for k in range(n - 1, dg - 1, -1):
            c = rem[:, k]
            if not c.any():
                continue
            qpl[:, k - dg] = c
            # rem[k-dg : k+1] -= c * g  (field product, plane convolution)
            upd = np.zeros((2 * m - 1, dg + 1), dtype=np.int64)
            for a in range(m):
                if c[a]:
                    upd[a:a + m] += c[a] * g
            if m > 1:
                upd[:m] += np.einsum("j...,jk->k...", upd[m:] % p,
                                     level.red)
            rem[:, k - dg:k + 1] = (rem[:, k - dg:k + 1] - upd[:m]) % p
        quot = PolyFq(level, qpl)
        if not monic:
            quot = quot.scale(lead.inverse())
        return quot, PolyFq(level, rem[:, :dg])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        if self.is_zero():
            return self
        lead = self.leading()
        if lead == self.level.one:
            return self
        return self.scale(lead.inverse())

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self):
        if self.degree < 1:
            return PolyFq.zero(self.level)
        n = self.planes.shape[1]
        mult = np.arange(1, n, dtype=np.int64) % self.level.p
        return PolyFq(self.level, self.planes[:, 1:] * mult % self.level.p)

    def pow_mod(self, n, modulus):
        result = PolyFq.one_poly(self.level)
        base = self % modulus
        while n:
            if n & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            n >>= 1
        return result

    def eval(self, x):
        acc = x.level.zero
        for i in range(self.planes.shape[1] - 1, -1, -1):
            acc = acc * x + self.coeff(i)
        return acc

    def eval_mat(self, M):
        level = M.level
        acc = Mat.zeros(level, M.nrows, M.ncols)
        for i in range(self.planes.shape[1] - 1, -1, -1):
            acc = acc @ M + Mat.identity(level, M.nrows) * self.coeff(i)
        return acc

    def substitute_neg(self):
        """f(-X), sign-adjusted by the caller as needed."""
        planes = self.planes.copy()
        planes[:, 1::2] = (-planes[:, 1::2]) % self.level.p
        return PolyFq(self.level, planes)

    def to_json(self):
        return [self.coeff(i).to_json()
                for i in range(self.planes.shape[1])]

    @classmethod
    def from_json(cls, level, data):
        return cls.from_coeffs(level, data)

    def __repr__(self):
        if self.is_zero():
            return "PolyFq(0)"
        terms = []
        for i in range(self.planes.shape[1]):
            c = self.coeff(i)
            if c:
                terms.append(f"({c.to_int()})X^{i}")
        return "PolyFq(" + " + ".join(terms) + ")"


# ---------------------------------------------------------------------------
# Factorization
# ---------------------------------------------------------------------------

def _pth_root_poly(f, level):
    p = level.p
    idx = np.arange(0, f.planes.shape[1], p)
    root_exp = level.order // p
    coeffs = [f.coeff(int(i)) ** root_exp for i in idx]
    return PolyFq.from_coeffs(level, coeffs)


def squarefree_decomposition(f):
    """[(g, k)] with f = lead * prod g^k, the g monic squarefree coprime."""
    level = f.level
    p = level.p
    f = f.monic()
    out = []
    e = 1
    while f.degree > 0:
        fp = f.derivative()
        if fp.is_zero():
            f = _pth_root_poly(f, level)
            e *= p
            continue
        g = f.gcd(fp)
        w = f // g
        i = 1
        while w.degree > 0:
            y = w.gcd(g)
            fac = w // y
            if fac.degree > 0:
                out.append((fac.monic(), i * e))
            w = y
            g = g // y
            i += 1
        f = g
    return out


def _frobenius_map_matrix(f):
    """Rows j = coefficients of X^(qj) mod f; applying a coefficient row
    gives the q-power map on the residue ring (coefficients are q-fixed)."""
    level = f.level
    deg = f.degree
    xq = PolyFq.x(level).pow_mod(level.order, f)
    rows = Mat.zeros(level, deg, deg)
    cur = PolyFq.one_poly(level)
    for j in range(deg):
        rows.planes[:, j, :cur.planes.shape[1]] = cur.planes
        if j + 1 < deg:
            cur = (cur * xq) % f
    return rows


def _poly_coeff_row(f, width):
    out = Mat.zeros(f.level, 1, width)
    out.planes[:, 0, :f.planes.shape[1]] = f.planes
    return out


def _distinct_degree(f, rng):
    """[(product of irreducibles of degree d, d)] for squarefree monic f.

    The q-power map on k[X]/(f) is applied through its matrix, so each
    degree step is one vectorized matrix-vector product.
    """
    level = f.level
    out = []
    x = PolyFq.x(level)
    d = 0
    rem = f
    frob = None
    h = x
    while rem.degree >= 2 * (d + 1):
        d += 1
        if frob is None:
            frob = _frobenius_map_matrix(rem)
            h = h % rem
        hrow = _poly_coeff_row(h, rem.degree) @ frob
        h = PolyFq(level, hrow.planes[:, 0, :].copy())
        g = (h - x).gcd(rem)
        if g.degree > 0:
            out.append((g, d))
            rem = rem // g
            frob = None
            h = h % rem if rem.degree else PolyFq.zero(level)
    if rem.degree > 0:
        out.append((rem, rem.degree))
    return out


def _equal_degree_split(f, d, rng):
    """Split a monic squarefree product of degree-d irreducibles."""
    level = f.level
    if f.degree == d:
        return [f]
    q = level.order
    one = PolyFq.one_poly(level)
    while True:
        coeffs = [rng.randrange(q) for _ in range(f.degree)]
        b = PolyFq.from_coeffs(level, [
            _int_to_coeffs(c, level.p, level.m) for c in coeffs])
        if b.degree < 1 and f.degree > d:
            continue
        if level.p == 2:
            acc = b % f
            tr = acc
            for _ in range(level.m * d - 1):
                acc = (acc * acc) % f
                tr = tr + acc
            g = tr.gcd(f)
        else:
            powed = b.pow_mod((q ** d - 1) // 2, f)
            g = (powed - one).gcd(f)
        if 0 < g.degree < f.degree:
            return (_equal_degree_split(g, d, rng)
                    + _equal_degree_split(f // g, d, rng))


def is_irreducible(f, rng=None):
    """Rabin-style certification over the coefficient level."""
    f = f.monic()
    n = f.degree
    if n <= 0:
        return False
    if n == 1:
        return True
    level = f.level
    q = level.order
    x = PolyFq.x(level)
    xq = x.pow_mod(q ** n, f)
    if not (xq - x).is_zero():
        return False
    from .ff import _prime_factors
    for ell in _prime_factors(n):
        h = x.pow_mod(q ** (n // ell), f)
        if (h - x).gcd(f).degree != 0:
            return False
    return True


def factor(f, rng):
    """Complete factorization into (monic irreducible, multiplicity) pairs.

    The product of the returned powers times the leading coefficient
    reproduces the input; each factor is certified irreducible before
    return.  Randomness only affects the equal-degree splitting path, never
    the set of factors, which is sorted canonically.
    """
    if f.is_zero():
        raise InputError("cannot factor the zero polynomial")
    out = []
    x = None
    for g, mult in squarefree_decomposition(f):
        for prod, d in _distinct_degree(g, rng):
            for irr in _equal_degree_split(prod, d, rng):
                irr = irr.monic()
                # distinct-degree residue certificate: X^(q^d) = X mod irr
                if irr.degree > 1:
                    if x is None:
                        x = PolyFq.x(f.level)
                    xq = x.pow_mod(f.level.order ** irr.degree, irr)
                    assert (xq - x).is_zero(), "factor failed certification"
                out.append((irr, mult))
    out.sort(key=lambda t: (t[0].degree,
                            [c.to_int() for c in t[0].coeffs()]))
    return out


# ---------------------------------------------------------------------------
# Matrix order
# ---------------------------------------------------------------------------

def _pollard_rho(n, rng, budget=200000):
    if n % 2 == 0:
        return 2
    for _ in range(24):
        x = rng.randrange(2, n - 1)
        y, c, d = x, rng.randrange(1, n - 1), 1
        count = 0
        while d == 1 and count < budget:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = _gcd_int(abs(x - y), n)
            count += 1
        if 1 < d < n:
            return d
    return None


def _gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


def _factor_int(n, rng):
    """Prime factorization dict, or None when a cofactor resists."""
    from .ff import is_prime as _is_prime
    out = {}
    for d in range(2, 100000):
        if d * d > n:
            break
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
    stack = [n] if n > 1 else []
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if _is_prime(v):
            out[v] = out.get(v, 0) + 1
            continue
        d = _pollard_rho(v, rng)
        if d is None:
            return None
        stack.extend([d, v // d])
    return out


def matrix_order(M, cap=10 ** 6, rng=None):
    """Least t >= 1 with M^t = I.

    Factors the characteristic polynomial to bound the order, then descends
    through the divisors; when the integer factorizations resist the budget,
    falls back to plain iteration up to ``cap``.
    """
    import random as _random
    rng = rng or _random.Random(0)
    n = M.nrows
    ident = Mat.identity(M.level, n)
    if M.try_inverse() is None:
        raise InputError("matrix_order needs an invertible matrix")
    q = M.level.order
    cp = M.charpoly()
    facs = factor(cp, rng)
    if any(f.degree == 0 for f, _ in facs):  # pragma: no cover
        raise AssertionError
    bound = 1
    max_mult = max(mult for _, mult in facs)
    for f, _ in facs:
        bound = bound * (q ** f.degree - 1) // _gcd_int(
            bound, q ** f.degree - 1)
    ppart = 1
    while ppart < max_mult:
        ppart *= M.level.p
    bound *= ppart
    primes = _factor_int(bound, rng)
    if primes is None:
        # honest fallback: step through powers
        acc = M
        for t in range(1, cap + 1):
            if acc == ident:
                return t
            acc = acc @ M
        raise BudgetExhausted(f"matrix order exceeds cap {cap}")
    if not (M ** bound) == ident:  # pragma: no cover
        raise AssertionError("order bound violated")
    t = bound
    for ell in primes:
        while t % ell == 0 and (M ** (t // ell)) == ident:
            t //= ell
    return t


# ---------------------------------------------------------------------------
# Spec-facing functional wrappers
# ---------------------------------------------------------------------------

def rref(M):
    R, pivots = M.rref()
    return R, pivots, len(pivots)


def kernel(M):
    return M.left_kernel()


def solve(M, v):
    return M.solve_left(v)


def det(M):
    return M.det()


def charpoly(M):
    return M.charpoly()


def fixed_space(M):
    """Basis of {v : v M = v}."""
    return (M - Mat.identity(M.level, M.nrows)).left_kernel()
