"""Exact arithmetic in GF(p^n), the absolute trace and the additive character.

Elements are plain integer indices in [0, q).  The index packs the
coefficient vector (c_0, ..., c_{n-1}) of the element in the power basis
as sum_i c_i * p^i, so index 0 is the additive identity and index 1 the
multiplicative identity.

The modulus is the lexicographically least monic irreducible polynomial
of degree n over F_p, comparing low-degree coefficients first.  Nothing
about the math depends on this choice, but fixing it makes element
indexing reproducible across builds, which every downstream report
relies on.
"""

from __future__ import annotations

import itertools

import numpy as np

DEFAULT_SIZE_CAP = 1 << 20
# Full q x q multiplication table below this size, log/antilog above it.
MUL_TABLE_MAX_Q = 4096


class NotPrimeError(ValueError):
    pass


class DegreeOutOfRangeError(ValueError):
    pass


class FieldTooLargeError(ValueError):
    pass


class ReducibleModulusError(ValueError):
    pass


class NoProperSubfieldError(ValueError):
    pass


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def _prime_factors(m: int) -> list[int]:
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return out


# ----------------------------------------------------------------------
# Polynomial helpers over F_p.  Coefficient lists, constant term first,
# used only while bootstrapping a field; all bulk arithmetic afterwards
# goes through the precomputed tables.
# ----------------------------------------------------------------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            a[i] = 0
            off = i - dm
            for j in range(dm):
                a[off + j] = (a[off + j] - c * m[j]) % p
    return _poly_trim(a)


def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                prod[i + j] = (prod[i + j] + ca * cb) % p
    return _poly_mod(prod, m, p)


def _poly_powmod(a: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(list(a), m, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def _is_irreducible(m: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(m)/2."""
    n = len(m) - 1
    if n < 1:
        return False
    for e in range(1, n // 2 + 1):
        for tail in itertools.product(range(p), repeat=e):
            g = list(tail) + [1]
            if not _poly_mod(list(m), g, p):
                return False
    return True


def _least_irreducible(p: int, n: int) -> tuple[int, ...]:
    if n == 1:
        return (0, 1)  # the polynomial x; reduction mod x is plain mod-p arithmetic
    for tail in itertools.product(range(p), repeat=n):
        m = list(tail) + [1]
        if _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError(f"no irreducible of degree {n} over F_{p}")  # unreachable


# ----------------------------------------------------------------------
# Field
# ----------------------------------------------------------------------

class Field:
    """A fully tabulated finite field GF(p^n).

    Immutable after construction; every method is a pure read, so a
    single instance may be shared freely across threads and workers.
    """

    def __init__(self, p: int, n: int, modulus: tuple[int, ...]):
        self.p = p
        self.n = n
        self.q = p ** n
        self.modulus = tuple(int(c) % p for c in modulus)
        q = self.q

        # Base-p digit matrix: digits[a, i] = coefficient c_i of element a.
        dig = np.empty((q, n), dtype=np.int64)
        rem = np.arange(q, dtype=np.int64)
        for i in range(n):
            rem, dig[:, i] = np.divmod(rem, p)
        self._digits = dig
        self._p_pows = p ** np.arange(n, dtype=np.int64)

        self.neg_table = self._pack((p - dig) % p)

        self._build_log_tables()
        self.mul_table = None
        if q <= MUL_TABLE_MAX_Q:
            self.mul_table = self._build_mul_table()

        inv = np.zeros(q, dtype=np.int64)
        if q > 1:
            nz = np.arange(1, q)
            inv[1:] = self.exp_table[(self.q - 1 - self.log_table[nz]) % (q - 1)]
        self.inv_table = inv

        self._build_trace_and_char()
        self._validate()

        self._char_matrix = None
        self._coords_cache: dict[int, np.ndarray] = {}

    # -- construction internals ---------------------------------------

    def _pack(self, digit_rows: np.ndarray) -> np.ndarray:
        return digit_rows @ self._p_pows

    def _build_log_tables(self) -> None:
        p, n, q = self.p, self.n, self.q
        mod = list(self.modulus)

        # Least-index generator of the multiplicative group, found by the
        # factored-order test.
        factors = _prime_factors(q - 1) if q > 2 else []
        gen = 1
        for cand in range(1, q):
            poly = [int(c) for c in self._digits[cand]]
            poly = _poly_trim(poly)
            if not poly:
                continue
            if all(_poly_powmod(poly, (q - 1) // ell, mod, p) != [1] for ell in factors):
                gen = cand
                break
        self.generator = gen

        # Multiplication by the generator is F_p-linear; tabulate it once
        # as a digit-matrix product, then walk the cyclic group.
        gen_poly = _poly_trim([int(c) for c in self._digits[gen]])
        mat = np.zeros((n, n), dtype=np.int64)
        for j in range(n):
            basis = [0] * j + [1]
            img = _poly_mulmod(basis, gen_poly, mod, p)
            for i, c in enumerate(img):
                mat[i, j] = c
        mul_by_gen = self._pack((self._digits @ mat.T) % p)

        exp = np.empty(max(q - 1, 1), dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = int(mul_by_gen[x])
        self.exp_table = exp
        self.log_table = log
        if q > 1 and (x != 1 or len(np.unique(exp)) != q - 1):
            raise AssertionError("generator does not enumerate the unit group")

    def _build_mul_table(self) -> np.ndarray:
        q = self.q
        table = np.zeros((q, q), dtype=np.int64)
        if q > 1:
            nz = np.arange(1, q)
            lg = self.log_table[nz]
            table[1:, 1:] = self.exp_table[(lg[:, None] + lg[None, :]) % (q - 1)]
        return table

    def _build_trace_and_char(self) -> None:
        p, n, q = self.p, self.n, self.q
        tr = np.zeros(q, dtype=np.int64)
        cur = np.arange(q, dtype=np.int64)
        for _ in range(n):
            tr = self.add_arrays(tr, cur)
            cur = self.pow_arrays(cur, p)
        if n > 1 and np.any(self._digits[tr, 1:]):
            raise AssertionError("trace values escaped the prime subfield")
        self.trace_table = tr
        self.char_table = np.exp(2j * np.pi * np.arange(p) / p)

    def _validate(self) -> None:
        q = self.q
        if q > 1:
            nz = np.arange(1, q)
            if not np.all(self.mul_arrays(nz, self.inv_table[nz]) == 1):
                raise AssertionError("inverse table failed a*inv(a) == 1")
        # Trace is F_p-linear iff it agrees with the linear form spanned by
        # the basis traces; that plus a surjectivity scan checks every element.
        basis_traces = self.trace_table[self._p_pows]
        lin = (self._digits @ basis_traces) % self.p
        if not np.array_equal(lin, self.trace_table):
            raise AssertionError("trace table is not F_p-linear")
        if len(np.unique(self.trace_table)) != self.p:
            raise AssertionError("trace is not surjective onto F_p")

    # -- scalar operations ---------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return int(self._pack((self._digits[a] + self._digits[b]) % self.p))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, int(self.neg_table[b]))

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        if self.mul_table is not None:
            return int(self.mul_table[a, b])
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self.inv_table[a])

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp_table[(self.log_table[a] * e) % (self.q - 1)])

    def trace(self, a: int) -> int:
        return int(self.trace_table[a])

    def chi(self, a: int) -> complex:
        """Additive character exp(2*pi*i*trace(a)/p)."""
        return complex(self.char_table[self.trace_table[a]])

    # -- vectorized operations ------------------------------------------

    def add_arrays(self, a, b):
        if self.n == 1:
            return (np.asarray(a) + np.asarray(b)) % self.p
        if self.p == 2:
            return np.bitwise_xor(a, b)
        da = (self._digits[a] + self._digits[b]) % self.p
        return da @ self._p_pows

    def mul_arrays(self, a, b):
        if self.mul_table is not None:
            return self.mul_table[a, b]
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def pow_arrays(self, a, e: int):
        a = np.asarray(a)
        if e == 0:
            return np.ones_like(a)
        out = self.exp_table[(self.log_table[a] * e) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    def chi_arrays(self, a) -> np.ndarray:
        return self.char_table[self.trace_table[a]]

    # -- misc -------------------------------------------------------------

    def descriptor(self) -> dict:
        return {"p": self.p, "n": self.n, "q": self.q, "modulus": list(self.modulus)}

    def __repr__(self) -> str:
        return f"Field(p={self.p}, n={self.n}, q={self.q})"


def make_field(p: int, n: int, *, size_cap: int = DEFAULT_SIZE_CAP,
               _modulus: tuple[int, ...] | None = None) -> Field:
    """Build GF(p^n) with the canonical (lexicographically least) modulus.

    `_modulus` is a test hook: an injected modulus is still checked for
    irreducibility and rejected hard if it fails.
    """
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrimeError(f"p={p} is not prime")
    if not isinstance(n, int) or n < 1:
        raise DegreeOutOfRangeError(f"extension degree n={n} must be >= 1")
    if p ** n > size_cap:
        raise FieldTooLargeError(f"q = {p}^{n} exceeds the size cap {size_cap}")
    if _modulus is not None:
        m = [int(c) % p for c in _modulus]
        if len(m) != n + 1 or m[-1] != 1:
            raise ReducibleModulusError(f"modulus must be monic of degree {n}")
        if not _is_irreducible(m, p):
            raise ReducibleModulusError(f"modulus {m} is reducible over F_{p}")
        modulus = tuple(m)
    else:
        modulus = _least_irreducible(p, n)
    return Field(p, n, modulus)


def multiplicative_generator(field: Field) -> int:
    """Least-index element of multiplicative order q-1."""
    return field.generator


def subfield_indices(field: Field, m: int) -> np.ndarray:
    """Indices of the subfield GF(p^m), i.e. the fixed points of x -> x^(p^m)."""
    if field.n % m != 0:
        raise ValueError(f"GF({field.p}^{m}) is not a subfield of GF({field.p}^{field.n})")
    a = np.arange(field.q)
    return a[field.pow_arrays(a, field.p ** m) == a]


def sqrt_subfield_indices(field: Field) -> np.ndarray:
    """Indices of the subfield of size sqrt(q); requires even extension degree."""
    if field.n % 2 != 0:
        raise NoProperSubfieldError(
            f"GF({field.p}^{field.n}) has no subfield of size sqrt(q)")
    return subfield_indices(field, field.n // 2)
