"""Kummer degrees, cyclotomic intersections and splitting coefficients.

Notation: ``K(s, k) = Q(zeta_s, g^(1/k))`` for ``k | s``.  The intersection
``Q(zeta_f) & K(n, n)`` is ``Q(zeta_(f,n))`` possibly extended by one
quadratic generator, either ``sqrt(gamma)`` or, in the exceptional case,
``zeta_2(f,n) * sqrt(gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import (
    DecomposedBase,
    decompose,
    euler_phi,
    fundamental_discriminant,
    is_fundamental_discriminant,
    kronecker,
    lcm,
    nu2,
    odd_part,
)


def epsilon(base: DecomposedBase, s: int, k: int) -> Fraction:
    """The correction factor eps(s, k) in [K(s,k):Q] = phi(s) k / (eps (k,h))."""
    r = s // k
    n_r = base.n_r(r)
    if s % n_r == 0:
        return Fraction(2)
    if base.sign < 0 and r % 2 and k % 2 == 0 and k % 2 ** (base.nu2_h + 1):
        return Fraction(1, 2)
    return Fraction(1)


@lru_cache(maxsize=1 << 18)
def kummer_degree(base: DecomposedBase, s: int, k: int) -> int:
    """Absolute degree of Q(zeta_s, g^(1/k)), ``k | s``."""
    if s < 1 or k < 1 or s % k:
        raise ValueError(f"need k | s, got s={s}, k={k}")
    deg = Fraction(euler_phi(s) * k) / (epsilon(base, s, k) * math.gcd(k, base.h))
    if deg.denominator != 1:
        raise ArithmeticError(f"non-integral degree {deg} for g={base}, s={s}, k={k}")
    return int(deg)


@dataclass(frozen=True)
class DegreeQuery:
    s: int
    k: int
    base: DecomposedBase

    def __post_init__(self):
        if self.s % self.k:
            raise ValueError(f"k={self.k} does not divide s={self.s}")

    @property
    def degree(self) -> int:
        return kummer_degree(self.base, self.s, self.k)


def gamma_selectors(D: int, f: int, n: int) -> tuple[int, int, int]:
    """``(gamma(D), gamma0(D), gamma1(D))`` relative to the pair (f, n)."""
    if not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    if nu2(f) < nu2(D):
        c = math.gcd(odd_part(f), D)
        gam = c if (c - 1) // 2 % 2 == 0 else -c
    else:
        c = math.gcd(f, D)
        b = D // c
        gam = c if (b - 1) // 2 % 2 == 0 else -c
    L = lcm(f, n)
    divides_L = L % D == 0
    gam0 = gam if (n % D and divides_L) else 1
    gam1 = gam if (nu2(f) > nu2(n) and divides_L) else 1
    return gam, gam0, gam1


def ab_case(base: DecomposedBase, n: int) -> int:
    """Which of the seven descriptions of the maximal abelian subfield of K(n,n) applies."""
    vn, vh = nu2(n), base.nu2_h
    if base.sign > 0:
        return 1 if vn <= vh else 2
    if vn >= vh + 2:
        return 3
    if vn == 1 and vh == 0:
        return 4
    if vh == 1 and vn == 2 and base.D_g0 % 8 == 0:
        return 5
    if vn <= vh:
        return 6
    return 7


def gamma_g(base: DecomposedBase, f: int, n: int) -> int:
    case = ab_case(base, n)
    if case in (1, 6):
        return 1
    if case in (2, 3):
        return gamma_selectors(base.D_g0, f, n)[1]
    if case == 4:
        return gamma_selectors(fundamental_discriminant(-base.g0), f, n)[1]
    if case == 5:
        return gamma_selectors(fundamental_discriminant(2 * base.g0), f, n)[1]
    return gamma_selectors(base.D_g0, f, n)[2]


def is_exceptional(base: DecomposedBase, f: int, n: int) -> bool:
    vf, vn = nu2(f), nu2(n)
    if not vf > vn >= 1:
        return False
    case = ab_case(base, n)
    return case == 6 or (case == 7 and lcm(f, n) % base.D_g0 == 0)


@dataclass(frozen=True)
class IntersectionDescriptor:
    """Q(zeta_f) & K(n,n) = Q(zeta_base_level)(adjoined)."""

    f: int
    n: int
    base_level: int
    adjoined: str  # "nothing" | "sqrt" | "zeta_sqrt"
    gamma: int

    @property
    def relative_degree(self) -> int:
        return 1 if self.adjoined == "nothing" else 2

    @property
    def degree(self) -> int:
        return euler_phi(self.base_level) * self.relative_degree

    def describe(self) -> str:
        c = self.base_level
        if self.adjoined == "nothing":
            return f"Q(zeta_{c})"
        if self.adjoined == "sqrt":
            return f"Q(zeta_{c}, sqrt({self.gamma}))"
        return f"Q(zeta_{c}, zeta_{2 * c}*sqrt({self.gamma}))"


def intersection_descriptor(base: DecomposedBase, f: int, n: int) -> IntersectionDescriptor:
    gam = gamma_g(base, f, n)
    c = math.gcd(f, n)
    if is_exceptional(base, f, n):
        adj = "zeta_sqrt"
    elif gam != 1:
        adj = "sqrt"
    else:
        adj = "nothing"
    return IntersectionDescriptor(f=f, n=n, base_level=c, adjoined=adj, gamma=gam)


def epsilon3(a_val: int, f: int, n: int, base: DecomposedBase) -> int:
    """Sign picked up by zeta_2(f,n) under sigma_a; +1 outside the exceptional case."""
    c = math.gcd(f, n)
    if math.gcd(a_val, f) != 1 or (a_val - 1) % c:
        raise ValueError(f"need gcd(a, f) = 1 and a = 1 mod {c}; got a={a_val}, f={f}")
    if is_exceptional(base, f, n):
        return -1 if ((a_val - 1) // c) % 2 else 1
    return 1


@dataclass(frozen=True)
class SplittingQuery:
    """Primes p = b mod f splitting completely in K(v,v)."""

    b: int
    f: int
    v: int
    coefficient: int
    density: Fraction


def splitting_query(base: DecomposedBase, b: int, f: int, v: int) -> SplittingQuery:
    base = decompose(base)
    if math.gcd(b, f) != 1:
        raise ValueError(f"gcd({b}, {f}) != 1")
    b = b % f or f
    c = math.gcd(f, v)
    if (b - 1) % c:
        return SplittingQuery(b, f, v, 0, Fraction(0))
    twice = 1 + epsilon3(b, f, v, base) * kronecker(gamma_g(base, f, v), b)
    coef = twice // 2
    return SplittingQuery(b, f, v, coef, Fraction(coef, kummer_degree(base, lcm(f, v), v)))


def splitting_coefficient(base, b: int, f: int, v: int) -> int:
    return splitting_query(base, b, f, v).coefficient


def split_class_density(base, b: int, f: int, v: int) -> Fraction:
    return splitting_query(base, b, f, v).density
