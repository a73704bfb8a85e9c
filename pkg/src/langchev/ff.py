"""Finite field towers GF(p) < GF(p^e) = k < k_r < k_rs with exact arithmetic.

A :class:`FieldTower` fixes a prime p and a base extension degree e, so the
base field is k = GF(q) with q = p^e.  Levels are indexed by their relative
degree r over k; level r is the field k_r = GF(q^r), represented absolutely
as GF(p)[X]/(f_r) for a monic irreducible f_r of degree e*r.  Defining
polynomials are chosen deterministically (first irreducible in a fixed
enumeration), and embeddings between divisor-related levels are computed once
and kept mutually coherent, so towers are reproducible across runs.

Elements (:class:`FqElement`) store their GF(p) coefficient vector
little-endian in the chosen root of the level's defining polynomial.  All
arithmetic is exact; nothing in this module (or the package) ever rounds.

The module also houses the small solvers needed by the bilinear-form
machinery: square roots, a fixed nonsquare per level, and the two-variable
diagonal quadratic equation over a level.
"""

from __future__ import annotations

import random

import numpy as np

from .errors import InputError

# Levels with at most this many elements get exp/log tables for O(1)
# scalar multiplication; larger levels fall back to polynomial arithmetic.
_TABLE_LIMIT = 1 << 16


# ---------------------------------------------------------------------------
# GF(p)[X] bootstrap helpers (coefficient lists of ints, little-endian).
# These exist below FqElement so that defining polynomials and Frobenius
# matrices can be built before any level arithmetic is available.
# ---------------------------------------------------------------------------

def _gfp_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _gfp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _gfp_trim(out)


def _gfp_mod(a, f, p):
    a = _gfp_trim(list(a))
    df = len(f) - 1
    finv = pow(f[-1], p - 2, p)
    while a and len(a) - 1 >= df:
        c = (a[-1] * finv) % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % p
        a = _gfp_trim(a)
    return a


def _gfp_powmod(a, n, f, p):
    result = [1]
    base = _gfp_mod(a, f, p)
    while n:
        if n & 1:
            result = _gfp_mod(_gfp_mul(result, base, p), f, p)
        base = _gfp_mod(_gfp_mul(base, base, p), f, p)
        n >>= 1
    return result


def _gfp_gcd(a, b, p):
    a, b = _gfp_trim(list(a)), _gfp_trim(list(b))
    while b:
        a, b = b, _gfp_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(c * inv) % p for c in a]
    return a


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _gfp_is_irreducible(f, p):
    """Rabin's test for a monic polynomial over GF(p)."""
    m = len(f) - 1
    if m <= 0:
        return False
    if m == 1:
        return True
    x = [0, 1]
    xq = _gfp_powmod(x, p ** m, f, p)
    if _gfp_trim([(a - b) % p for a, b in
                  zip(xq + [0] * len(x), x + [0] * len(xq))]) != []:
        return False
    for ell in _prime_factors(m):
        d = m // ell
        xd = _gfp_powmod(x, p ** d, f, p)
        diff = [(a - b) % p for a, b in zip(xd + [0, 0], x + [0] * len(xd))]
        if len(_gfp_gcd(diff, f, p)) - 1 != 0:
            return False
    return True


def _first_irreducible(p, m):
    """First monic irreducible of degree m over GF(p), enumerating the
    non-leading coefficient vector as a base-p counter."""
    if m == 1:
        return [0, 1]
    idx = 0
    while True:
        coeffs = []
        t = idx
        for _ in range(m):
            coeffs.append(t % p)
            t //= p
        f = coeffs + [1]
        if _gfp_is_irreducible(f, p):
            return f
        idx += 1
        if idx >= p ** m:  # pragma: no cover - cannot happen
            raise RuntimeError("no irreducible polynomial found")


def is_prime(n):
    if n < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % d == 0:
            return n == d
    # deterministic Miller-Rabin for 64-bit inputs
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Levels and elements
# ---------------------------------------------------------------------------

class Level:
    """Data for one tower level k_r = GF(p^(e*r)).

    Immutable after construction except for the embedding dictionary, which
    the owning tower fills in while new levels are created.
    """

    def __init__(self, tower, r, defpoly):
        self.tower = tower
        self.r = r
        self.p = tower.p
        self.m = tower.e * r            # absolute degree over GF(p)
        self.order = tower.p ** self.m  # field size
        self.defpoly = tuple(defpoly)
        p, m = self.p, self.m
        # reduction rows: red[j] = coeffs of zeta^(m+j) for j in 0..m-2
        red = []
        if m > 1:
            red.append([(-c) % p for c in defpoly[:m]])
            for _ in range(m - 2):
                prev = red[-1]
                cur = [0] + prev[:m - 1]
                top = prev[m - 1]
                if top:
                    cur = [(cur[i] + top * red[0][i]) % p for i in range(m)]
                red.append(cur)
        self.red = np.array(red, dtype=np.int64).reshape(max(m - 1, 0), m)
        # matrix of x -> x^p (GF(p)-linear), rows act on coefficient rows
        zp = _gfp_powmod([0, 1], p, list(defpoly), p)
        rows = [[1] + [0] * (m - 1)]
        cur = [1]
        for _ in range(m - 1):
            cur = _gfp_mod(_gfp_mul(cur, zp, p), list(defpoly), p)
            rows.append(cur + [0] * (m - len(cur)))
        self.frob_p = np.array(rows, dtype=np.int64) % p
        fq = np.eye(m, dtype=np.int64)
        for _ in range(tower.e):
            fq = fq @ self.frob_p % p
        self.frob_q = fq
        self._frob_q_pows = {0: np.eye(m, dtype=np.int64), 1: fq}
        self.embed_from = {r: np.eye(m, dtype=np.int64)}
        # exp/log tables for small levels
        self._exp = self._log = None
        if self.order <= _TABLE_LIMIT:
            self._build_tables()
        self.zero = FqElement(self, (0,) * m)
        self.one = FqElement(self, (1,) + (0,) * (m - 1))

    def _build_tables(self):
        p, m, order = self.p, self.m, self.order
        units = order - 1
        fac = _prime_factors(units) if units > 1 else []
        one = (1,) + (0,) * (m - 1)
        gen = None
        for idx in range(1, order):
            cand = _int_to_coeffs(idx, p, m)
            if all(_coeffs_pow(cand, units // ell, self) != one
                   for ell in fac):
                gen = cand
                break
        # multiplication-by-gen matrix, then step through the cyclic group
        mul_gen = np.array(
            [_poly_mul_reduce(tuple(int(i == j) for i in range(m)), gen, self)
             for j in range(m)], dtype=np.int64)
        exp = [0] * (2 * units)
        log = [0] * order
        powers_of_p = [p ** i for i in range(m)]
        cur = np.array(one, dtype=np.int64)
        for i in range(units):
            ci = int(sum(int(c) * w for c, w in zip(cur, powers_of_p)))
            exp[i] = ci
            exp[i + units] = ci
            log[ci] = i
            cur = cur @ mul_gen % p
        self._exp = exp
        self._log = log

    def frob_q_pow(self, i):
        i %= self.r
        mat = self._frob_q_pows.get(i)
        if mat is None:
            mat = self._frob_q_pows[1].copy()
            for _ in range(i - 1):
                mat = mat @ self._frob_q_pows[1] % self.p
            self._frob_q_pows[i] = mat
        return mat

    def element(self, value):
        """Coerce an int index, coefficient sequence, or FqElement.

        Integers are treated as enumeration indices (base-p digit vectors);
        for the ring map Z -> field use :meth:`scalar`.  The two agree on
        0 <= value < p, which covers reduced structure constants.
        """
        if isinstance(value, FqElement):
            if value.level is self:
                return value
            return embed(value, self.r)
        if isinstance(value, (int, np.integer)):
            return FqElement(self, _int_to_coeffs(int(value) % self.order,
                                                  self.p, self.m))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) != self.m:
            raise InputError(
                f"expected {self.m} coefficients, got {len(coeffs)}")
        return FqElement(self, coeffs)

    def scalar(self, value):
        """The ring map Z -> field: value mod p in the constant term."""
        return FqElement(self, (int(value) % self.p,) + (0,) * (self.m - 1))

    def elements(self):
        """Iterate all field elements in the fixed enumeration order."""
        for idx in range(self.order):
            yield self.element(idx)

    def spec_string(self):
        return f"{self.p}^({self.tower.e}*{self.r})"

    def __repr__(self):
        return f"Level(GF({self.p}^{self.m}), r={self.r})"


def _int_to_coeffs(idx, p, m):
    out = []
    for _ in range(m):
        out.append(idx % p)
        idx //= p
    return tuple(out)


def _coeffs_to_int(coeffs, p):
    out = 0
    for c in reversed(coeffs):
        out = out * p + c
    return out


def _poly_mul_reduce(a, b, level):
    """Multiply two coefficient tuples and reduce mod the defining poly."""
    p, m = level.p, level.m
    if m == 1:
        return ((a[0] * b[0]) % p,)
    conv = np.convolve(np.asarray(a, dtype=np.int64),
                       np.asarray(b, dtype=np.int64))
    out = conv[:m]
    if conv.shape[0] > m:
        out = out + conv[m:] @ level.red[:conv.shape[0] - m]
    return tuple(int(c) for c in out % p)


def _coeffs_pow(coeffs, n, level):
    result = (1,) + (0,) * (level.m - 1)
    base = coeffs
    while n:
        if n & 1:
            result = _poly_mul_reduce(result, base, level)
        base = _poly_mul_reduce(base, base, level)
        n >>= 1
    return result


class FqElement:
    """An element of one tower level, as a GF(p) coefficient tuple."""

    __slots__ = ("level", "coeffs")

    def __init__(self, level, coeffs):
        self.level = level
        self.coeffs = coeffs

    # -- coercion ----------------------------------------------------------

    def _match(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.level.scalar(int(other))
        if not isinstance(other, FqElement):
            return NotImplemented, NotImplemented
        if other.level is self.level:
            return self, other
        a, b = self, other
        ra, rb = a.level.r, b.level.r
        if a.level.tower is not b.level.tower:
            raise InputError("elements from different towers")
        if rb % ra == 0:
            return embed(a, rb), b
        if ra % rb == 0:
            return a, embed(b, ra)
        raise InputError(f"incompatible levels {ra} and {rb}")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        p = a.level.p
        return FqElement(a.level, tuple((x + y) % p
                                        for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        p = a.level.p
        return FqElement(a.level, tuple((x - y) % p
                                        for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        p = self.level.p
        return FqElement(self.level, tuple((-x) % p for x in self.coeffs))

    def __mul__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        level = a.level
        if level._exp is not None:
            ia, ib = _coeffs_to_int(a.coeffs, level.p), _coeffs_to_int(
                b.coeffs, level.p)
            if ia == 0 or ib == 0:
                return level.zero
            idx = level._exp[level._log[ia] + level._log[ib]]
            return FqElement(level, _int_to_coeffs(idx, level.p, level.m))
        return FqElement(level, _poly_mul_reduce(a.coeffs, b.coeffs, level))

    __rmul__ = __mul__

    def inverse(self):
        level = self.level
        if not self:
            raise ZeroDivisionError("division by zero in GF")
        if level._exp is not None:
            ia = _coeffs_to_int(self.coeffs, level.p)
            idx = level._exp[(level.order - 1 - level._log[ia])
                             % (level.order - 1)]
            return FqElement(level, _int_to_coeffs(idx, level.p, level.m))
        return FqElement(level,
                         _coeffs_pow(self.coeffs, level.order - 2, level))

    def __truediv__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse().__mul__(other)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        level = self.level
        if level._exp is not None and self:
            ia = _coeffs_to_int(self.coeffs, level.p)
            idx = level._exp[(level._log[ia] * n) % (level.order - 1)]
            return FqElement(level, _int_to_coeffs(idx, level.p, level.m))
        return FqElement(level, _coeffs_pow(self.coeffs, n, level))

    def frobenius(self, i=1):
        """x -> x^(q^i); negative i inverts (F has order r on level r)."""
        level = self.level
        mat = level.frob_q_pow(i % level.r)
        vec = np.array(self.coeffs, dtype=np.int64) @ mat % level.p
        return FqElement(level, tuple(int(c) for c in vec))

    # -- structure ---------------------------------------------------------

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.level.scalar(int(other))
        if not isinstance(other, FqElement):
            return NotImplemented
        if other.level is not self.level:
            try:
                a, b = self._match(other)
            except InputError:
                return False
            return a.coeffs == b.coeffs
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.level), self.coeffs))

    def to_int(self):
        return _coeffs_to_int(self.coeffs, self.level.p)

    def to_json(self):
        return list(self.coeffs)

    def __repr__(self):
        return f"Fq({list(self.coeffs)} @ {self.level.spec_string()})"


# ---------------------------------------------------------------------------
# The tower
# ---------------------------------------------------------------------------

class FieldTower:
    """Lazily grown tower of extensions of k = GF(p^e).

    Level construction mutates shared state and must be serialized by the
    caller; all level data and elements are immutable afterwards.
    """

    def __init__(self, p, e=1):
        p = int(p)
        e = int(e)
        if p <= 1 or not is_prime(p):
            raise InputError(f"p = {p} is not prime")
        if e < 1:
            raise InputError(f"e = {e} must be >= 1")
        self.p = p
        self.e = e
        self.q = p ** e
        self.levels = {}
        self._rng = random.Random(p * 1000003 + e)
        self.extend(1)

    # -- level management --------------------------------------------------

    def extend(self, r):
        """Ensure level k_r exists (idempotent) and return its tag r."""
        r = int(r)
        if r < 1:
            raise InputError(f"r = {r} must be >= 1")
        if r in self.levels:
            return r
        defpoly = _first_irreducible(self.p, self.e * r)
        level = Level(self, r, defpoly)
        self.levels[r] = level
        # embeddings from existing divisors, in increasing order so that
        # coherence constraints are available when each one is built
        for s in sorted(self.levels):
            if s != r and r % s == 0:
                self._build_embedding(s, r)
        # embeddings into existing multiples
        for t in sorted(self.levels):
            if t != r and t % r == 0:
                self._build_embedding(r, t)
        return r

    def level(self, r):
        if r not in self.levels:
            raise InputError(f"level {r} not constructed")
        return self.levels[r]

    def element(self, r, value):
        return self.level(r).element(value)

    def __repr__(self):
        return (f"FieldTower(GF({self.p}^{self.e}), "
                f"levels={sorted(self.levels)})")

    # -- embeddings --------------------------------------------------------

    def _build_embedding(self, s, t):
        """Build the coherent embedding k_s -> k_t (s | t, both exist)."""
        src, dst = self.levels[s], self.levels[t]
        if s in dst.embed_from:
            return
        if s == 1 and src.m == 1:
            mat = np.zeros((1, dst.m), dtype=np.int64)
            mat[0, 0] = 1
            dst.embed_from[s] = mat
            return
        roots = self._roots_in_level(src.defpoly, dst)
        if len(roots) != src.m:
            raise AssertionError("defining polynomial did not split")
        # coherence: the image of each lower generator must be preserved
        for u in sorted(self.levels):
            if u in (s, t) or s % u or self.levels[u].m < 2:
                continue
            if u not in src.embed_from or u not in dst.embed_from:
                continue
            gen_img_s = src.embed_from[u][1]
            want = dst.embed_from[u][1]
            survivors = []
            for z in roots:
                mat = self._powers_matrix(z, src.m, dst)
                got = gen_img_s @ mat % self.p
                if np.array_equal(got % self.p, want % self.p):
                    survivors.append(z)
            roots = survivors
            if not roots:  # pragma: no cover - coherence always satisfiable
                raise AssertionError("no coherent embedding root")
        z = min(roots, key=lambda c: _coeffs_to_int(c, self.p))
        dst.embed_from[s] = self._powers_matrix(z, src.m, dst)

    def _powers_matrix(self, z, ms, dst):
        rows = []
        cur = (1,) + (0,) * (dst.m - 1)
        for _ in range(ms):
            rows.append(cur)
            cur = _poly_mul_reduce(cur, z, dst)
        return np.array(rows, dtype=np.int64)

    def _roots_in_level(self, poly_gfp, level):
        """All roots, as coefficient tuples, of a GF(p) polynomial that
        splits completely in the given level."""
        one = (1,) + (0,) * (level.m - 1)
        g = [level.element(int(c) % self.p).coeffs for c in poly_gfp]
        root = self._find_one_root(list(g), level)
        # remaining roots form the orbit under x -> x^p
        roots = [root]
        cur = root
        for _ in range(len(poly_gfp) - 2):
            cur = _coeffs_pow(cur, self.p, level)
            if cur == root:
                break
            roots.append(cur)
        del one
        return roots

    # minimal scalar polynomial helpers over a level (coefficient tuples)

    @staticmethod
    def _lp_trim(f, level):
        zero = level.zero.coeffs
        while f and f[-1] == zero:
            f.pop()
        return f

    @classmethod
    def _lp_mulmod(cls, a, b, f, level):
        if not a or not b:
            return []
        out = [level.zero.coeffs] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if any(ai):
                for j, bj in enumerate(b):
                    prod = _poly_mul_reduce(ai, bj, level)
                    out[i + j] = tuple(
                        (x + y) % level.p for x, y in zip(out[i + j], prod))
        return cls._lp_mod(out, f, level)

    @classmethod
    def _lp_mod(cls, a, f, level):
        a = cls._lp_trim(list(a), level)
        df = len(f) - 1
        lead_inv = FqElement(level, f[-1]).inverse().coeffs
        while len(a) - 1 >= df and a:
            c = _poly_mul_reduce(a[-1], lead_inv, level)
            shift = len(a) - 1 - df
            for i in range(df + 1):
                sub = _poly_mul_reduce(c, f[i], level)
                a[shift + i] = tuple(
                    (x - y) % level.p for x, y in zip(a[shift + i], sub))
            a = cls._lp_trim(a, level)
        return a

    @classmethod
    def _lp_gcd(cls, a, b, level):
        a = cls._lp_trim(list(a), level)
        b = cls._lp_trim(list(b), level)
        while b:
            a, b = b, cls._lp_mod(a, b, level)
        if a:
            inv = FqElement(level, a[-1]).inverse().coeffs
            a = [_poly_mul_reduce(c, inv, level) for c in a]
        return a

    @classmethod
    def _lp_powmod(cls, a, n, f, level):
        one = (1,) + (0,) * (level.m - 1)
        result = [one]
        base = cls._lp_mod(list(a), f, level)
        while n:
            if n & 1:
                result = cls._lp_mulmod(result, base, f, level)
            base = cls._lp_mulmod(base, base, f, level)
            n >>= 1
        return result

    def _find_one_root(self, g, level):
        """One root of a monic squarefree polynomial splitting into linear
        factors over the level (Cantor-Zassenhaus style splitting)."""
        g = self._lp_trim(list(g), level)
        inv = FqElement(level, g[-1]).inverse().coeffs
        g = [_poly_mul_reduce(c, inv, level) for c in g]
        one = (1,) + (0,) * (level.m - 1)
        while len(g) - 1 > 1:
            # random affine shift, then a splitting gcd
            b = _int_to_coeffs(self._rng.randrange(level.order),
                               level.p, level.m)
            shifted = [b, one]
            if self.p == 2:
                acc = self._lp_mod(shifted, g, level)
                tr = list(acc)
                cur = acc
                for _ in range(level.m * 1 - 1):
                    cur = self._lp_mulmod(cur, cur, g, level)
                    tr = self._lp_add(tr, cur, level)
                h = self._lp_gcd(tr, g, level)
            else:
                powed = self._lp_powmod(shifted, (level.order - 1) // 2,
                                        g, level)
                powed = self._lp_add(powed, [tuple((-c) % level.p
                                                   for c in one)], level)
                h = self._lp_gcd(powed, g, level)
            if 0 < len(h) - 1 < len(g) - 1:
                other = self._lp_quot(g, h, level)
                g = h if len(h) <= len(other) else other
        # g = X - root
        root = tuple((-c) % level.p for c in g[0])
        return root

    @classmethod
    def _lp_add(cls, a, b, level):
        n = max(len(a), len(b))
        zero = level.zero.coeffs
        a = list(a) + [zero] * (n - len(a))
        b = list(b) + [zero] * (n - len(b))
        return cls._lp_trim([
            tuple((x + y) % level.p for x, y in zip(u, v))
            for u, v in zip(a, b)], level)

    @classmethod
    def _lp_quot(cls, a, f, level):
        a = cls._lp_trim(list(a), level)
        df = len(f) - 1
        lead_inv = FqElement(level, f[-1]).inverse().coeffs
        quot = [level.zero.coeffs] * max(len(a) - df, 0)
        while len(a) - 1 >= df and a:
            c = _poly_mul_reduce(a[-1], lead_inv, level)
            shift = len(a) - 1 - df
            quot[shift] = c
            for i in range(df + 1):
                sub = _poly_mul_reduce(c, f[i], level)
                a[shift + i] = tuple(
                    (x - y) % level.p for x, y in zip(a[shift + i], sub))
            a = cls._lp_trim(a, level)
        return quot


def make_tower(p, e=1):
    """Build a tower over k = GF(p^e). Errors on non-prime p."""
    return FieldTower(p, e)


def extend(x, r):
    """Polymorphic extend: on a tower, construct level r; on an element,
    alias of embed."""
    if isinstance(x, FieldTower):
        return x.extend(r)
    return embed(x, r)


def embed(x, r):
    """Embed an element into level r (its level must divide r)."""
    level = x.level
    if r == level.r:
        return x
    if r % level.r:
        raise InputError(f"cannot embed level {level.r} into level {r}")
    dst = level.tower.level(r)
    mat = dst.embed_from.get(level.r)
    if mat is None:
        raise InputError(f"embedding {level.r} -> {r} not built")
    vec = np.array(x.coeffs, dtype=np.int64) @ mat % level.p
    return FqElement(dst, tuple(int(c) for c in vec))


def arith(x, y, kind):
    """Spec-facing arithmetic dispatch with auto-embedding."""
    ops = {"add": FqElement.__add__, "sub": FqElement.__sub__,
           "mul": FqElement.__mul__, "div": FqElement.__truediv__}
    if kind not in ops:
        raise InputError(f"unknown arithmetic kind {kind!r}")
    return ops[kind](x, y)


def frobenius(x, i=1):
    """x -> x^(q^i) on any level; negative i is the inverse Frobenius."""
    return x.frobenius(i)


# ---------------------------------------------------------------------------
# Quadratic machinery (odd characteristic)
# ---------------------------------------------------------------------------

def is_square(a):
    """Euler's criterion; zero counts as a square."""
    if not a:
        return True
    level = a.level
    if level.p == 2:
        return True
    return a ** ((level.order - 1) // 2) == level.one


def sqrt(a):
    """A square root of a, or None when a is certified a nonsquare.

    Of the two roots b and -b, the one with the smaller integer encoding is
    returned, so results are stable across runs.
    """
    level = a.level
    if level.p == 2:
        raise InputError("sqrt unsupported in characteristic 2")
    if not a:
        return level.zero
    if not is_square(a):
        return None
    q = level.order
    if q % 4 == 3:
        b = a ** ((q + 1) // 4)
    else:
        b = _tonelli_shanks(a)
    nb = -b
    return b if b.to_int() <= nb.to_int() else nb


def _tonelli_shanks(a):
    level = a.level
    q = level.order
    s, t = 0, q - 1
    while t % 2 == 0:
        t //= 2
        s += 1
    z = fixed_nonsquare(level)
    m = s
    c = z ** t
    u = a ** t
    b = a ** ((t + 1) // 2)
    one = level.one
    while u != one:
        # find least i with u^(2^i) = 1
        i, u2 = 0, u
        while u2 != one:
            u2 = u2 * u2
            i += 1
        g = c
        for _ in range(m - i - 1):
            g = g * g
        m = i
        c = g * g
        u = u * c
        b = b * g
    return b


def fixed_nonsquare(level):
    """First nonsquare in the fixed enumeration order of the level."""
    if level.p == 2:
        raise InputError("no nonsquares in characteristic 2")
    for idx in range(1, level.order):
        x = level.element(idx)
        if not is_square(x):
            return x
    raise AssertionError("no nonsquare found")  # pragma: no cover


def solve_diag_quadratic(alpha, beta, gamma, nontrivial=False):
    """Solve alpha*a^2 + beta*b^2 = gamma over the common level.

    Scans a in the fixed enumeration order and takes the first b that
    completes the equation, so the result is deterministic.  With
    ``nontrivial`` the pair (0, 0) is excluded (used for isotropy searches
    with gamma = 0).  Returns None only after an exhaustive scan.
    """
    level = alpha.level
    if not alpha or not beta:
        raise InputError("solve_diag_quadratic needs alpha, beta nonzero")
    beta_inv = beta.inverse()
    for idx in range(level.order):
        a = level.element(idx)
        rhs = (gamma - alpha * a * a) * beta_inv
        b = sqrt(rhs)
        if b is not None:
            if nontrivial and not a and not b:
                continue
            assert alpha * a * a + beta * b * b == gamma
            return (a, b)
    return None
