"""Exact integer and rational primitives.

Factorization, the usual multiplicative functions, squarefree kernels,
d-parts, the Kronecker symbol, quadratic discriminants, and the canonical
decomposition ``g = sign * g0**h`` of a rational base.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

MAX_FACTOR_INPUT = 2**63
_TRIAL_BOUND = 2**20


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return [i for i in range(limit + 1) if sieve[i]]


_TRIAL_PRIMES = _small_primes(_TRIAL_BOUND)
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int) -> int:
    # returns a nontrivial factor of the odd composite n
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    f = _brent(n)
    _split(f, out)
    _split(n // f, out)


@dataclass(frozen=True)
class Factored:
    value: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def __iter__(self):
        return iter(self.factors)


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factored:
    """Complete prime factorization of ``1 <= n <= 2**63``."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    if n > MAX_FACTOR_INPUT:
        raise ValueError(f"factorize input {n} exceeds 2**63")
    out: dict[int, int] = {}
    m = n
    for p in _TRIAL_PRIMES:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
    if m > 1:
        _split(m, out)
    return Factored(n, tuple(sorted(out.items())))


def mobius(n: int) -> int:
    fs = factorize(n).factors
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n).factors:
        r = r // p * (p - 1)
    return r


def omega(n: int) -> int:
    return len(factorize(n).factors)


def nu(p: int, n: int) -> int:
    """p-adic valuation of the nonzero integer n."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def nu2(n: int) -> int:
    n = abs(n)
    return (n & -n).bit_length() - 1


def lcm(*xs: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), (abs(x) for x in xs), 1)


def squarefree_kernel(d: int) -> int:
    return math.prod(factorize(d).primes)


def kernels(d: int) -> tuple[int, int, int]:
    """Return ``(k(d), k1(d), k2(d))``.

    ``k`` is the product of the primes dividing ``d``; ``k1 = 4k`` and
    ``k2 = gcd(4, d/2) k`` when ``d`` is even, both equal ``k`` otherwise.
    """
    k = squarefree_kernel(d)
    if d % 2:
        return k, k, k
    return k, 4 * k, math.gcd(4, d // 2) * k


def d_part(t: int, d: int) -> int:
    """Largest divisor of ``t`` built from primes dividing ``d``, i.e. gcd(t, d^inf)."""
    r = 1
    for p in factorize(d).primes:
        while t % p == 0:
            t //= p
            r *= p
    return r


def odd_part(n: int) -> int:
    n = abs(n)
    return n >> nu2(n) if n else 0


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) on the full integer domain."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = nu2(n)
    if v:
        if D % 2 == 0:
            return 0
        if v % 2 and D % 8 in (3, 5):
            result = -result
        n >>= v
    # Jacobi symbol (D/n) for odd n > 0
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def squarefree_part(n: int) -> int:
    """Signed squarefree part: n = squarefree_part(n) * m**2."""
    if n == 0:
        raise ValueError("0 has no squarefree part")
    s = -1 if n < 0 else 1
    for p, e in factorize(abs(n)).factors:
        if e % 2:
            s *= p
    return s


def as_fraction(q) -> Fraction:
    if isinstance(q, str):
        return Fraction(q.strip())
    return Fraction(q)


def fundamental_discriminant(q) -> int:
    """Discriminant of the field Q(sqrt q); 1 when q is a rational square."""
    q = as_fraction(q)
    if q == 0:
        raise ValueError("Q(sqrt 0) is not a field")
    s = squarefree_part(q.numerator * q.denominator)
    if s == 1:
        return 1
    return s if s % 4 == 1 else 4 * s


def is_fundamental_discriminant(D: int) -> bool:
    return D != 0 and fundamental_discriminant(D) == D


def conductor_of_discriminant(D: int) -> int:
    """Conductor of Q(sqrt D) for a fundamental discriminant D."""
    if not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    return abs(D)


@dataclass(frozen=True)
class DecomposedBase:
    """A rational ``g = sign * g0**h`` with g0 > 0 not a perfect power.

    ``m`` is the level from the Kummer degree formula, always stored as a
    positive integer; ``m_branch`` records which definition produced it
    ("half" for D(g0)/2, "lcm" otherwise).
    """

    numerator: int
    denominator: int
    sign: int
    g0: Fraction
    h: int
    D_g0: int
    D_g: int
    m: int
    m_branch: str
    in_G: bool

    @property
    def g(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def nu2_h(self) -> int:
        return nu2(self.h)

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def n_r(self, r: int) -> int:
        """The level n_r of the Kummer degree formula (depends on r only via nu2(r))."""
        if self.sign < 0 and r % 2:
            return self.m
        return lcm(2 ** (nu2(self.h * r) + 1), self.D_g0)


@lru_cache(maxsize=4096)
def _decompose(num: int, den: int) -> DecomposedBase:
    g = Fraction(num, den)
    if g in (-1, 0, 1):
        raise ValueError(f"base g must avoid -1, 0, 1; got {g}")
    sign = -1 if g < 0 else 1
    fn = factorize(abs(g.numerator)).factors
    fd = factorize(g.denominator).factors
    h = 0
    for _, e in fn + fd:
        h = math.gcd(h, e)
    g0 = Fraction(
        math.prod(p ** (e // h) for p, e in fn),
        math.prod(p ** (e // h) for p, e in fd),
    )
    D0 = fundamental_discriminant(g0)
    v = nu2(h)
    if (v == 0 and D0 % 8 == 4) or (v == 1 and D0 % 8 == 0):
        m, branch = D0 // 2, "half"
    else:
        m, branch = lcm(2 ** (v + 2), D0), "lcm"
    return DecomposedBase(
        numerator=g.numerator,
        denominator=g.denominator,
        sign=sign,
        g0=g0,
        h=h,
        D_g0=D0,
        D_g=fundamental_discriminant(g),
        m=m,
        m_branch=branch,
        in_G=(h == 1),
    )


def decompose(g) -> DecomposedBase:
    """Canonical decomposition of a rational base (int, Fraction or "p/q" string)."""
    if isinstance(g, DecomposedBase):
        return g
    q = as_fraction(g)
    return _decompose(q.numerator, q.denominator)


# --- numpy tables over 1..N -------------------------------------------------


def prime_sieve(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    s[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if s[p]:
            s[p * p :: 2 * p] = False
    return np.flatnonzero(s).astype(np.int64)


@lru_cache(maxsize=4)
def arithmetic_tables(n: int) -> dict[str, np.ndarray]:
    """mu, phi and omega for 0..n (index 0 is padding)."""
    mu = np.ones(n + 1, dtype=np.int8)
    phi = np.arange(n + 1, dtype=np.int64)
    om = np.zeros(n + 1, dtype=np.int8)
    for p in prime_sieve(n).tolist():
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
        om[p::p] += 1
    mu[0] = 0
    for arr in (mu, phi, om):
        arr.flags.writeable = False
    return {"mu": mu, "phi": phi, "omega": om}


def nu2_array(x: np.ndarray) -> np.ndarray:
    """2-adic valuation of a positive int64 array."""
    low = x & -x
    return np.log2(low.astype(np.float64)).astype(np.int64)
