"""Dirichlet characters, the constants A_chi, and character-sum evaluations.

Characters are stored exactly: each one is a tuple of angles ``k/o`` (as
Fractions) giving its value ``exp(2 pi i k/o)`` on a fixed set of generators
of the unit group.  Complex values are produced only at the end, from a
root-of-unity routine that returns exact complex conjugates for opposite
angles, so ``A_chi`` of a conjugate character is the exact conjugate.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import decompose, euler_phi, factorize, mobius, prime_sieve
from .densities import (
    DEFAULT_V_MAX,
    DEFAULT_W_MAX,
    ROUNDOFF,
    DensityEstimate,
    kummer_degrees,
    majorant_tail,
    rho_avg_series,
)

# --- unit groups -------------------------------------------------------------


def _primitive_root_prime_power(p: int, e: int) -> int:
    q = p**e
    fac = factorize(p - 1).primes
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in fac):
            break
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g % q


@dataclass(frozen=True)
class UnitGroup:
    """(Z/qZ)^* as a product of cyclic groups with explicit generators."""

    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]

    @property
    def size(self) -> int:
        return math.prod(self.orders)


@lru_cache(maxsize=256)
def unit_group(q: int) -> UnitGroup:
    if q < 1:
        raise ValueError("modulus must be >= 1")
    gens: list[int] = []
    orders: list[int] = []
    for p, e in factorize(q).factors:
        pe = p**e
        rest = q // pe
        local: list[tuple[int, int]] = []
        if p == 2:
            if e >= 2:
                local.append((pe - 1, 2))
            if e >= 3:
                local.append((5, 2 ** (e - 2)))
        else:
            local.append((_primitive_root_prime_power(p, e), euler_phi(pe)))
        for g, o in local:
            # the element that is g mod p^e and 1 mod the rest
            x = g if rest == 1 else (g * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % q
            gens.append(x)
            orders.append(o)
    return UnitGroup(q, tuple(gens), tuple(orders))


@lru_cache(maxsize=256)
def discrete_log_table(q: int) -> dict[int, tuple[int, ...]]:
    """Map each unit mod q to its exponent vector on the generators."""
    G = unit_group(q)
    table = {}
    for ks in itertools.product(*(range(o) for o in G.orders)):
        x = 1
        for g, k in zip(G.generators, ks):
            x = x * pow(g, k, q) % q
        table[x % q] = ks
    return table


def root_of_unity(angle: Fraction) -> complex:
    """exp(2 pi i angle) with exact values at quarter turns and exact conjugate symmetry."""
    k, o = angle.numerator % angle.denominator, angle.denominator
    if 2 * k > o:
        return root_of_unity(Fraction(o - k, o)).conjugate()
    if k == 0:
        return complex(1.0, 0.0)
    if 4 * k == o:
        return complex(0.0, 1.0)
    if 2 * k == o:
        return complex(-1.0, 0.0)
    t = 2.0 * math.pi * k / o
    return complex(math.cos(t), math.sin(t))


# --- characters -------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    generator_images: tuple[Fraction, ...]

    def __post_init__(self):
        G = unit_group(self.modulus)
        if len(self.generator_images) != len(G.orders):
            raise ValueError("one image per generator required")
        for img, o in zip(self.generator_images, G.orders):
            if (img * o).denominator != 1:
                raise ValueError(f"image {img} is not an {o}-th root of unity angle")

    @property
    def order(self) -> int:
        return math.lcm(*(img.denominator for img in self.generator_images)) if self.generator_images else 1

    @property
    def is_principal(self) -> bool:
        return all(img == 0 for img in self.generator_images)

    def angle(self, n: int) -> Fraction | None:
        """The value chi(n) as an angle in [0, 1), or None when gcd(n, modulus) > 1."""
        q = self.modulus
        ks = discrete_log_table(q).get(n % q)
        if ks is None:
            return None
        s = sum((img * k for img, k in zip(self.generator_images, ks)), Fraction(0))
        return s - math.floor(s)

    def __call__(self, n: int) -> complex:
        ang = self.angle(n)
        return 0j if ang is None else root_of_unity(ang)

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple((-img) % 1 for img in self.generator_images))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            raise ValueError("characters must share a modulus")
        return DirichletCharacter(self.modulus, tuple((x + y) % 1 for x, y in
                                                      zip(self.generator_images, other.generator_images)))

    def lift(self, M: int) -> "DirichletCharacter":
        """The character mod M (a multiple of the modulus) induced by this one."""
        if M % self.modulus:
            raise ValueError(f"{self.modulus} does not divide {M}")
        G = unit_group(M)
        return DirichletCharacter(M, tuple(self.angle(g) for g in G.generators))

    def value_table(self) -> np.ndarray:
        """Complex values chi(0), ..., chi(modulus - 1)."""
        return np.array([self(n) for n in range(self.modulus)], dtype=complex)

    def label(self) -> str:
        imgs = ",".join(str(x) for x in self.generator_images)
        return f"chi_{self.modulus}[{imgs}]"


def enumerate_characters(d: int) -> list[DirichletCharacter]:
    """All phi(d) characters mod d, the principal one first."""
    G = unit_group(d)
    return [DirichletCharacter(d, tuple(Fraction(k, o) for k, o in zip(ks, G.orders)))
            for ks in itertools.product(*(range(o) for o in G.orders))]


def principal_character(d: int) -> DirichletCharacter:
    return enumerate_characters(d)[0]


def h_chi(chi: DirichletCharacter, v: int) -> complex:
    """(chi * mu)(v) = sum over t | v of chi(t) mu(v / t)."""
    total = 0j
    for t in _divisors(v):
        m = mobius(v // t)
        if m:
            total += m * chi(t)
    return total


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [x * p**k for x in divs for k in range(e + 1)]
    return sorted(divs)


# --- Euler products -------------------------------------------------------------------


@dataclass(frozen=True)
class EulerProductValue:
    value: complex
    prime_bound: int
    error_estimate: float


@lru_cache(maxsize=4)
def _primes_upto(B: int) -> np.ndarray:
    return prime_sieve(B)


def _tail_factor(B: int, c: float) -> float:
    # sum over p > B of |log factor| <= c / B; translated to a relative bound
    return math.expm1(c / B) * 1.01


@lru_cache(maxsize=1024)
def a_chi(chi: DirichletCharacter, prime_bound: int = 10**7) -> EulerProductValue:
    """Euler product of 1 + (chi(p) - 1) p / ((p^2 - chi(p)) (p - 1)) over p <= prime_bound."""
    if prime_bound < 100:
        raise ValueError("prime_bound must be >= 100")
    P = _primes_upto(prime_bound)
    table = chi.value_table()
    vals = table[P % chi.modulus]
    keep = vals != 0
    P, vals = P[keep].astype(np.float64), vals[keep]
    x, y = vals.real, vals.imag
    p2x = P * P - x
    den = (P - 1.0) * (p2x * p2x + y * y)
    re = 1.0 + P * ((x - 1.0) * p2x - y * y) / den
    im = P * y * (P * P - 1.0) / den
    log_abs = 0.5 * np.log(re * re + im * im)
    arg = np.arctan2(im, re)
    L = math.fsum(log_abs.tolist())
    T = math.fsum(arg.tolist())
    val = cmath.exp(L) * complex(math.cos(T), math.sin(T))
    return EulerProductValue(val, prime_bound, abs(val) * _tail_factor(prime_bound, 2.1) + ROUNDOFF)


@lru_cache(maxsize=8)
def artin_constant(prime_bound: int = 10**7) -> EulerProductValue:
    """Product over p <= prime_bound of 1 - 1/(p(p-1))."""
    if prime_bound < 100:
        raise ValueError("prime_bound must be >= 100")
    P = _primes_upto(prime_bound).astype(np.float64)
    val = math.exp(math.fsum(np.log1p(-1.0 / (P * (P - 1.0))).tolist()))
    return EulerProductValue(complex(val, 0.0), prime_bound, val * _tail_factor(prime_bound, 1.05) + ROUNDOFF)


# --- character form of the order series ---------------------------------------------


@lru_cache(maxsize=512)
def _weight_array(chi: DirichletCharacter, d: int, V: int) -> np.ndarray:
    """H[v] = chi(v_d) h_chi(v_1) for 0 <= v <= V, where v_d = gcd(v, d^inf), v_1 = v / v_d.

    H is multiplicative: H(p^e) = chi(p)^e when p | d, and chi(p)^(e-1) (chi(p) - 1)
    otherwise.
    """
    H = np.ones(V + 1, dtype=complex)
    H[0] = 0
    dprimes = set(factorize(d).primes)
    P = prime_sieve(V)
    values = chi.value_table()[P % chi.modulus].tolist()
    for p, c in zip(P.tolist(), values):
        if p in dprimes:
            q = p
            while q <= V:
                H[q::q] *= c
                q *= p
        else:
            H[p::p] *= c - 1
            q = p * p
            while q <= V:
                H[q::q] *= c
                q *= p
    H.flags.writeable = False
    return H


def _char_form_terms(base, a: int, d: int, V: int):
    """Yield (t1, c, alpha, chi, weight, cut) for every inner v-sum of the character form."""
    a_rep = a % d
    g_ad = math.gcd(a_rep, d)
    alphas = [al for al in _divisors(g_ad) if mobius(al)]
    for t1 in range(1, d + 1):
        if math.gcd(1 + t1 * a_rep, d) != 1:
            continue
        c = math.gcd(t1, d)
        m = d // c
        chars = enumerate_characters(m)
        for al in alphas:
            cut = V // (al * c)
            if cut < 1:
                continue
            for chi in chars:
                w = chi.conj()(t1 // c) / euler_phi(m) * mobius(al)
                yield t1, c, al, chi, w, cut


def delta0_character_form(g, a: int, d: int, v_max: int = DEFAULT_V_MAX) -> DensityEstimate:
    """The order series with unit coefficients, re-expressed as a character sum.

    The class t = t1 mod d of the index becomes a character sum over G_(d/c),
    c = gcd(t1, d), and the n-sum is split by alpha = gcd(n, d); each inner sum
    runs over v with field Q(zeta_(d c v), g^(1/(alpha c v))).  Truncating the
    inner sums at v <= v_max // (alpha c) matches the truncation n t <= v_max of
    the direct series exactly.
    """
    base = decompose(g)
    if d < 1:
        raise ValueError("modulus d must be >= 1")
    re_parts: list[float] = []
    im_parts: list[float] = []
    tail = 0.0
    seen_tail: set[tuple[int, int]] = set()
    degrees: dict[tuple[int, int], np.ndarray] = {}
    for t1, c, al, chi, w, cut in _char_form_terms(base, a, d, v_max):
        deg = degrees.get((c, al))
        if deg is None:
            v = np.arange(1, cut + 1, dtype=np.int64)
            deg = degrees[(c, al)] = kummer_degrees(base, d * c * v, al * c * v)
        H = _weight_array(chi, d, cut)[1:]
        terms = w * H / deg
        re_parts.extend(terms.real.tolist())
        im_parts.extend(terms.imag.tolist())
        if (t1, al) not in seen_tail:
            seen_tail.add((t1, al))
            tail += 2.0 * base.h / (euler_phi(d * c) * al * c) * majorant_tail(cut)
    value = complex(math.fsum(re_parts), math.fsum(im_parts))
    return DensityEstimate(value, tail + ROUNDOFF, {"v_max": v_max}, "character_form",
                           "delta0", a % d, d, str(base))


# --- character decomposition of the average index density ------------------------------


@dataclass(frozen=True)
class CharacterDecomposition:
    a: int
    d: int
    modulus: int
    characters: tuple[DirichletCharacter, ...]
    constants: tuple[complex, ...]
    coefficients: tuple[complex, ...]
    fitted: tuple[complex, ...]
    series: DensityEstimate
    residual: float

    @property
    def value(self) -> complex:
        return sum(c * A for c, A in zip(self.coefficients, self.constants))


def rho_character_coefficients(a: int, d: int) -> tuple[int, list[DirichletCharacter], list[complex]]:
    """Explicit c_chi with rho(a, d) = sum over chi mod d/(a,d) of c_chi A_chi.

    With alpha = (a, d), d1 = d / alpha and a' = a / alpha, the coefficient is
    conj(chi(a')) / (phi(d1) alpha phi(alpha)) times local factors: for p | d1 not
    dividing alpha, 1 - 1/(p(p-1)); for p dividing both, 1 - 1/p^2; for p | alpha
    prime to d1, (p^2 - 1) / ((p^2 - chi(p)) E_p) where E_p is the Euler factor
    of A_chi at p.
    """
    a %= d
    alpha = math.gcd(a, d)
    d1 = d // alpha
    a1 = (a // alpha) % d1 if d1 > 1 else 0
    pa = set(factorize(alpha).primes)
    pd1 = set(factorize(d1).primes)
    chars = enumerate_characters(d1)
    base = Fraction(1, euler_phi(d1) * alpha * euler_phi(alpha))
    for p in pd1:
        base *= (1 - Fraction(1, p * p)) if p in pa else (1 - Fraction(1, p * (p - 1)))
    coefs = []
    for chi in chars:
        c = complex(base) * chi.conj()(a1)
        for p in pa - pd1:
            x = chi(p)
            E = 1 + (x - 1) * p / ((p * p - x) * (p - 1))
            c *= (p * p - 1) / ((p * p - x) * E)
        coefs.append(c)
    return d1, chars, coefs


def rho_character_decomposition(a: int, d: int, w_max: int = DEFAULT_W_MAX,
                                prime_bound: int = 10**7) -> CharacterDecomposition:
    """Compare the rho(a, d) series with its character expansion.

    ``residual`` is |series - sum c_chi A_chi| using the explicit coefficients.
    ``fitted`` holds least-squares coefficients recovered from the whole vector
    of classes a' alpha, a' a unit mod d1, against the basis conj(chi(a')) A_chi.
    """
    d1, chars, coefs = rho_character_coefficients(a, d)
    A = [a_chi(chi, prime_bound).value for chi in chars]
    series = rho_avg_series(a, d, w_max)
    approx = sum(c * x for c, x in zip(coefs, A))
    residual = abs(series.value - approx)
    alpha = math.gcd(a % d, d)
    units = [u for u in range(d1) if math.gcd(u, d1) == 1] if d1 > 1 else [0]
    rhs = np.array([rho_avg_series(u * alpha, d, w_max).value for u in units], dtype=complex)
    M = np.array([[chi.conj()(u) * x for chi, x in zip(chars, A)] for u in units], dtype=complex)
    k, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    a1 = (a % d) // alpha
    fitted = tuple(complex(kk * chi.conj()(a1)) for kk, chi in zip(k, chars))
    return CharacterDecomposition(a % d, d, d1, tuple(chars), tuple(A), tuple(coefs), fitted,
                                  series, float(residual))
