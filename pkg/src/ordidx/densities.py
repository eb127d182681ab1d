"""Truncated density series for order and index residue classes.

Every evaluator sums its terms over a finite range and reports a rigorous
bound on what was left out.  The bound rests on the majorant

    sum_{v > V} 2^omega(v) / (v phi(v))  <=  8 (log V + 2) / V,

since each series is dominated termwise by ``C 2^omega(v) / (v phi(v))`` once
terms are grouped by ``v = n t`` (resp. ``w``), with ``C = 2h`` for a fixed
base (degrees are at least ``v phi(v) / (2h)``) and ``C = 1`` for averages.

Kinds: ``delta`` (order, with splitting coefficients), ``delta0`` (order,
coefficients set to 1), ``rho`` (residual index) and the base-averaged
``delta_avg`` / ``rho_avg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import (
    DecomposedBase,
    arithmetic_tables,
    decompose,
    euler_phi,
    factorize,
    fundamental_discriminant,
    kernels,
    nu2,
    nu2_array,
    omega,
)
from .quadfields import ab_case, kummer_degree

DEFAULT_V_MAX = 1 << 16
DEFAULT_W_MAX = 1 << 20
ROUNDOFF = 2.0**-40
EXACT_TERM_LIMIT = 2000

KINDS = ("delta", "delta0", "delta_avg", "rho", "rho_avg")


def majorant_tail(V: int) -> float:
    """Upper bound for sum over v > V of 2^omega(v) / (v phi(v))."""
    return 8.0 * (math.log(V) + 2.0) / V


@dataclass(frozen=True)
class DensityEstimate:
    value: float | complex
    tail_bound: float
    truncation: dict
    method: str
    kind: str = ""
    a: int = 0
    d: int = 1
    g: str | None = None
    exact: Fraction | None = None
    reduction: dict | None = field(default=None, compare=False)

    @property
    def interval(self) -> tuple[float, float]:
        v = float(np.real(self.value))
        return v - self.tail_bound, v + self.tail_bound

    def to_json(self) -> dict:
        val = self.value
        rec = {
            "schema": "density.v1",
            "kind": self.kind,
            "g": self.g,
            "a": self.a,
            "d": self.d,
            "value": float(np.real(val)),
            "tail_bound": self.tail_bound,
            "method": self.method,
            "truncation": dict(self.truncation),
        }
        if isinstance(val, complex):
            rec["imag"] = val.imag
        if self.exact is not None:
            rec["exact"] = str(self.exact)
        if self.reduction is not None:
            rec["reduction"] = dict(self.reduction)
        return rec


# --- vectorized degrees and coefficients -------------------------------------


@lru_cache(maxsize=8)
def _phi_table(n: int) -> np.ndarray:
    return arithmetic_tables(n)["phi"]


def _table_size(n: int) -> int:
    # round table sizes up so that lru caches get reused
    return 1 << max(10, int(n).bit_length())


def kummer_degrees(base: DecomposedBase, S: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Vectorized [Q(zeta_S, g^(1/K)) : Q] for arrays with K | S."""
    phi = _phi_table(_table_size(int(S.max())))[S]
    r = S // K
    vh = base.nu2_h
    D = abs(base.D_g0)
    nr = np.lcm(np.left_shift(1, nu2_array(r) + vh + 1), D)
    if base.sign < 0:
        nr = np.where(r % 2 == 1, base.m, nr)
    eps2 = np.where(S % nr == 0, 4, 2)
    if base.sign < 0:
        half = (r % 2 == 1) & (K % 2 == 0) & (K % (1 << (vh + 1)) != 0) & (eps2 == 2)
        eps2 = np.where(half, 1, eps2)
    num = 2 * phi * K
    den = eps2 * np.gcd(K, base.h)
    if np.any(num % den):
        raise ArithmeticError("non-integral Kummer degree in vectorized evaluation")
    return num // den


def _gamma_selector_arrays(D: int, F: np.ndarray, N: np.ndarray, which: int) -> np.ndarray:
    """Vectorized gamma0(D) (which=0) or gamma1(D) (which=1) at pairs (F, N)."""
    if D == 1:
        return np.ones_like(F)
    aD = abs(D)
    vD = nu2(D)
    vF = nu2_array(F)
    oddF = F >> vF
    c1 = np.gcd(oddF, aD)
    g1 = np.where(((c1 - 1) // 2) % 2 == 0, c1, -c1)
    c2 = np.gcd(F, aD)
    b2 = D // c2
    g2 = np.where(((b2 - 1) // 2) % 2 == 0, c2, -c2)
    gam = np.where(vF < vD, g1, g2)
    divides_L = np.lcm(F, N) % aD == 0
    if which == 0:
        mask = (N % aD != 0) & divides_L
    else:
        mask = (vF > nu2_array(N)) & divides_L
    return np.where(mask, gam, 1)


@lru_cache(maxsize=256)
def _kron_table(D: int) -> np.ndarray:
    from .arith import kronecker

    m = abs(D)
    return np.array([kronecker(D, b) for b in range(m)], dtype=np.int64)


def splitting_coefficients(base: DecomposedBase, B: np.ndarray, F: np.ndarray,
                           V: np.ndarray) -> np.ndarray:
    """Vectorized c_g(B, F, V) in {0, 1}; requires gcd(B, F) = 1 and B >= 1."""
    C = np.gcd(F, V)
    ok = (B - 1) % C == 0
    vV = nu2_array(V)
    cases_by_v2 = np.array([ab_case(base, 1 << k) for k in range(int(vV.max()) + 1)])
    case = cases_by_v2[vV]
    gam = np.ones_like(F)
    D0 = base.D_g0
    for cs, D, which in (((2, 3), D0, 0),
                         ((4,), fundamental_discriminant(-base.g0), 0),
                         ((5,), fundamental_discriminant(2 * base.g0), 0),
                         ((7,), D0, 1)):
        sel = np.isin(case, cs)
        if sel.any():
            gam[sel] = _gamma_selector_arrays(D, F[sel], V[sel], which)
    kron = np.ones_like(F)
    for gv in np.unique(gam).tolist():
        if gv == 1:
            continue
        sel = gam == gv
        kron[sel] = _kron_table(gv)[B[sel] % abs(gv)]
    vF = nu2_array(F)
    exc = (vF > vV) & (vV >= 1) & ((case == 6) | ((case == 7) & (np.lcm(F, V) % abs(D0) == 0)))
    eps3 = np.where(exc & ((((B - 1) // C) % 2) == 1), -1, 1)
    return np.where(ok, (1 + eps3 * kron) // 2, 0)


# --- pair generation -----------------------------------------------------------


def _squarefree_pairs(V: int, mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (n, t) with n squarefree and n t <= V."""
    n = np.flatnonzero(mu[1 : V + 1]) + 1
    counts = V // n
    N = np.repeat(n, counts)
    starts = np.cumsum(counts) - counts
    T = np.arange(N.size, dtype=np.int64) - np.repeat(starts, counts) + 1
    return N, T


def _d_part_array(T: np.ndarray, d: int) -> np.ndarray:
    out = np.ones_like(T)
    for p in factorize(d).primes:
        rest = T.copy()
        while True:
            hit = rest % p == 0
            if not hit.any():
                break
            out[hit] *= p
            rest[hit] //= p
    return out


def _sum(terms_num: np.ndarray, terms_den: np.ndarray, tail: float):
    """Exact rational sum when few terms survive, compensated float sum otherwise."""
    nz = terms_num != 0
    num, den = terms_num[nz], terms_den[nz]
    if num.size <= EXACT_TERM_LIMIT:
        exact = sum((Fraction(int(a), int(b)) for a, b in zip(num.tolist(), den.tolist())),
                    Fraction(0))
        return float(exact), exact, tail
    value = math.fsum((num / den).tolist())
    return value, None, tail + ROUNDOFF


# --- delta-type series ---------------------------------------------------------


@lru_cache(maxsize=64)
def _delta_skeleton(base: DecomposedBase | None, d: int, V: int):
    """The a-independent part of the delta-type sums: pairs, Moebius values, degrees."""
    mu = arithmetic_tables(_table_size(V))["mu"].astype(np.int64)
    N, T = _squarefree_pairs(V, mu)
    G = np.gcd(N, d)
    S = N // G * d * T
    Kk = N * T
    if base is None:
        deg = _phi_table(_table_size(int(S.max())))[S] * Kk
    else:
        deg = kummer_degrees(base, S, Kk)
    Td = _d_part_array(T, d)
    for arr in (N, T, G, deg, Td):
        arr.flags.writeable = False
    return N, T, G, mu[N], deg, Td


def _delta_terms(a: int, d: int, V: int, base: DecomposedBase | None, coefficients: bool):
    N, T, G, M, deg, Td = _delta_skeleton(base, d, V)
    a_rep = a if a % d else d
    keep = (a_rep % G == 0) & (np.gcd(1 + T * a_rep, d) == 1)
    M, deg = M[keep], deg[keep]
    if coefficients:
        M = M * splitting_coefficients(base, 1 + T[keep] * a_rep, d * Td[keep], N[keep] * T[keep])
    return M, deg


def _delta_like(kind: str, base, a: int, d: int, v_max: int, reduce: bool) -> DensityEstimate:
    if d < 1:
        raise ValueError("modulus d must be >= 1")
    a %= d
    gname = str(base) if base is not None else None
    if reduce:
        red = reduce_modulus(kind, a, d)
        if red.d != d:
            inner = _delta_like(kind, base, red.a, red.d, v_max, reduce=False)
            return _scaled(inner, red, a, d)
    if base is None:
        M, deg = _delta_terms(a, d, v_max, None, False)
        C = 1.0
    else:
        M, deg = _delta_terms(a, d, v_max, base, kind == "delta")
        C = 2.0 * base.h
    value, exact, tail = _sum(M, deg, C * majorant_tail(v_max))
    return DensityEstimate(value, tail, {"v_max": v_max}, "direct_series", kind, a, d, gname, exact)


def delta_g_series(g, a: int, d: int, v_max: int = DEFAULT_V_MAX, reduce: bool = True) -> DensityEstimate:
    """Density of primes p with ord_g(p) = a mod d, summed over v = n t <= v_max."""
    return _delta_like("delta", decompose(g), a, d, v_max, reduce)


def delta0_g_series(g, a: int, d: int, v_max: int = DEFAULT_V_MAX, reduce: bool = True) -> DensityEstimate:
    """The companion series of delta_g with every splitting coefficient replaced by 1."""
    return _delta_like("delta0", decompose(g), a, d, v_max, reduce)


def delta_avg_series(a: int, d: int, v_max: int = DEFAULT_V_MAX, reduce: bool = True) -> DensityEstimate:
    """Average over g of delta_g(a, d): degrees replaced by phi([d,n]t) n t."""
    return _delta_like("delta_avg", None, a, d, v_max, reduce)


# --- rho-type series -----------------------------------------------------------


def index_class_coefficients(a: int, d: int, W: int) -> np.ndarray:
    """c[w] = sum of mu(w/t) over t | w with t = a mod d, for 0 <= w <= W."""
    mu = arithmetic_tables(_table_size(W))["mu"].astype(np.int64)
    t0 = a % d or d
    c = np.zeros(W + 1, dtype=np.int64)
    m = np.flatnonzero(mu[1 : W // t0 + 1]) + 1
    # blocks of m keep the (m, t) pair arrays small
    counts_all = (W // m - t0) // d + 1
    block = 1 << 22
    cum = np.cumsum(counts_all)
    lo = 0
    while lo < m.size:
        hi = int(np.searchsorted(cum, (cum[lo - 1] if lo else 0) + block, side="right"))
        hi = max(hi, lo + 1)
        mm, cnt = m[lo:hi], counts_all[lo:hi]
        Mrep = np.repeat(mm, cnt)
        starts = np.cumsum(cnt) - cnt
        k = np.arange(Mrep.size, dtype=np.int64) - np.repeat(starts, cnt)
        w = Mrep * (t0 + k * d)
        c += np.bincount(w, weights=mu[Mrep], minlength=W + 1).astype(np.int64)
        lo = hi
    return c


@lru_cache(maxsize=32)
def _rho_degrees(base: DecomposedBase | None, W: int) -> np.ndarray:
    w = np.arange(1, W + 1, dtype=np.int64)
    if base is None:
        return w * _phi_table(_table_size(W))[1 : W + 1]
    return kummer_degrees(base, w, w)


def _rho_like(kind: str, base, a: int, d: int, w_max: int, reduce: bool) -> DensityEstimate:
    if d < 1:
        raise ValueError("modulus d must be >= 1")
    a %= d
    gname = str(base) if base is not None else None
    if reduce:
        red = reduce_modulus(kind, a, d)
        if red.d != d:
            inner = _rho_like(kind, base, red.a, red.d, w_max, reduce=False)
            return _scaled(inner, red, a, d)
    c = index_class_coefficients(a, d, w_max)[1:]
    deg = _rho_degrees(base, w_max)
    C = 1.0 if base is None else 2.0 * base.h
    value, exact, tail = _sum(c, deg, C * majorant_tail(w_max))
    return DensityEstimate(value, tail, {"w_max": w_max}, "w_form", kind, a, d, gname, exact)


def rho_g_series(g, a: int, d: int, w_max: int = DEFAULT_W_MAX, reduce: bool = True) -> DensityEstimate:
    """Density of primes p with residual index r_g(p) = a mod d (w-form, w <= w_max)."""
    return _rho_like("rho", decompose(g), a, d, w_max, reduce)


def rho_avg_series(a: int, d: int, w_max: int = DEFAULT_W_MAX, reduce: bool = True) -> DensityEstimate:
    """Average over g of rho_g(a, d): degrees replaced by w phi(w)."""
    return _rho_like("rho_avg", None, a, d, w_max, reduce)


def evaluate(kind: str, g, a: int, d: int, *, v_max: int = DEFAULT_V_MAX,
             w_max: int = DEFAULT_W_MAX, reduce: bool = True) -> DensityEstimate:
    """Dispatch on kind; g is ignored for the averages."""
    if kind == "delta":
        return delta_g_series(g, a, d, v_max, reduce)
    if kind == "delta0":
        return delta0_g_series(g, a, d, v_max, reduce)
    if kind == "delta_avg":
        return delta_avg_series(a, d, v_max, reduce)
    if kind == "rho":
        return rho_g_series(g, a, d, w_max, reduce)
    if kind == "rho_avg":
        return rho_avg_series(a, d, w_max, reduce)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


# --- closed forms ---------------------------------------------------------------


def rho_closed_forms(a: int, d: int, g=None) -> Fraction | None:
    """Exact rho(a, d) (or rho_g when g is given) for a = 0 mod d and a = d mod 2d.

    Returns None when (a, d) matches neither pattern.
    """
    a %= d
    if a == 0:
        if g is None:
            return Fraction(1, d * euler_phi(d))
        return Fraction(1, kummer_degree(decompose(g), d, d))
    if d % 2 == 0 and 2 * a == d:
        h = d // 2
        if g is None:
            return (3 if h % 2 == 0 else 1) * Fraction(1, d * euler_phi(d))
        base = decompose(g)
        return Fraction(1, kummer_degree(base, h, h)) - Fraction(1, kummer_degree(base, d, d))
    return None


# --- modulus reduction ------------------------------------------------------------


@dataclass(frozen=True)
class Reduction:
    a: int
    d: int
    scale: Fraction
    rule: str

    def to_json(self) -> dict:
        return {"a": self.a, "d": self.d, "scale": str(self.scale), "rule": self.rule}


def reduce_modulus(kind: str, a: int, d: int) -> Reduction:
    """Smallest modulus d' with value(a, d) = scale * value(a mod d', d').

    Order-type kinds drop an odd prime q while q^2 | d (factor 1/q) and a
    factor 2 while 16 | d (factor 1/2), ending at k2(d).  For the index kinds
    only the class a = 0 is reduced (odd q with q^2 | d, factor 1/q^2); other
    classes are returned unchanged.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    a %= d
    scale = Fraction(1)
    d_red = d
    if kind.startswith("delta"):
        for q, e in factorize(d).factors:
            if q == 2:
                while nu2(d_red) > 3:
                    d_red //= 2
                    scale /= 2
            else:
                for _ in range(e - 1):
                    d_red //= q
                    scale /= q
        return Reduction(a % d_red, d_red, scale, "order" if d_red != d else "none")
    if a == 0:
        for q, e in factorize(d).factors:
            if q != 2:
                for _ in range(e - 1):
                    d_red //= q
                    scale /= q * q
        return Reduction(0, d_red, scale, "index_zero" if d_red != d else "none")
    return Reduction(a, d, scale, "none")


def _scaled(inner: DensityEstimate, red: Reduction, a: int, d: int) -> DensityEstimate:
    s = float(red.scale)
    exact = inner.exact * red.scale if inner.exact is not None else None
    return DensityEstimate(inner.value * s, inner.tail_bound * s, inner.truncation, inner.method,
                           inner.kind, a, d, inner.g, exact, red.to_json())


# --- closeness and genericity -------------------------------------------------------


def closeness_bounds(g, d: int) -> tuple[Fraction, Fraction, Fraction]:
    """Bounds on |delta0_g - delta|, |delta_g - delta|, |rho_g - rho| for g in G."""
    base = decompose(g)
    if not base.in_G:
        raise ValueError(f"g={base} is a perfect power; closeness bounds need h = 1")
    D = abs(base.D_g)
    D1 = D // math.gcd(D, d)
    D2 = D if D % 2 == 0 else 2 * D
    b1 = Fraction(2 ** (omega(D1) + 2), euler_phi(D1) * D1)
    b3 = Fraction(2 ** (omega(D2) + 2), euler_phi(D2) * D2)
    return b1, 3 * b1, b3


def _odd_disc_primes(base: DecomposedBase) -> list[int]:
    return [p for p in factorize(abs(base.D_g)).primes if p != 2]


def genericity_check(kind: str, g, a: int, d: int) -> bool:
    """Sufficient condition for the base-g density to equal the average density.

    ``kind`` is "delta0", "delta" or "rho".  A True answer means a prime p | D(g)
    exists with the required congruence; False means no such witness.
    """
    base = decompose(g)
    if not base.in_G:
        return False
    a %= d
    k, k1, k2 = kernels(d)
    primes = _odd_disc_primes(base)
    m = d // math.gcd(a, d)
    to_average = any(d % p and (p % m == 1 % m or p % k2 == 1 % k2) for p in primes)
    if kind == "delta0":
        return to_average
    if kind == "delta":
        # delta_g = delta0_g needs p = 1 mod k1(d); delta0_g = delta needs the delta0 witness
        return to_average and any(d % p and p % k1 == 1 % k1 for p in primes)
    if kind == "rho":
        alpha = math.gcd(a, d)
        d1 = d // alpha
        return any(alpha % p and p % d1 == 1 % d1 for p in primes)
    raise ValueError(f"genericity kinds are delta0, delta, rho; got {kind!r}")


# --- joint density -------------------------------------------------------------------


@dataclass(frozen=True)
class JointEstimate:
    estimate: DensityEstimate
    eps4_all_one: bool


def rho_joint_series(g, d: int, a: int, v_max: int = DEFAULT_V_MAX) -> JointEstimate:
    """Density of primes with k(d) | r_g(p) (2k(d) when d is even) and ord_g(p) = a mod d."""
    if math.gcd(a, d) != 1:
        raise ValueError(f"need gcd(a, d) = 1; got a={a}, d={d}")
    base = decompose(g)
    k = kernels(d)[0]
    step = 2 * k if d % 2 == 0 else k
    mu = arithmetic_tables(_table_size(v_max))["mu"].astype(np.int64)
    N, T = _squarefree_pairs(v_max, mu)
    keep = (T % step == 0) & (np.gcd(N, d) == 1)
    N, T = N[keep], T[keep]
    Kk = N * T
    S = d * Kk
    deg = kummer_degrees(base, S, Kk)
    Td = _d_part_array(T, d)
    eps4 = splitting_coefficients(base, 1 + T * a, d * Td, Kk)
    all_one = bool(np.all(eps4 == 1))
    value, exact, tail = _sum(mu[N] * eps4, deg, 2.0 * base.h * majorant_tail(v_max))
    est = DensityEstimate(value, tail, {"v_max": v_max}, "direct_series", "rho_joint", a % d, d,
                          str(base), exact)
    return JointEstimate(est, all_one)
