"""Brute-force side: segmented prime sieve, multiplicative orders and censuses.

Orders are computed for a whole segment of primes at once.  The numbers
``p - 1`` of a segment occupy a contiguous integer window, so the primes
``p`` with ``q | p - 1`` are found by striding through that window, exactly
like a sieve; each hit runs one vectorized modular exponentiation.
"""

from __future__ import annotations

import fcntl
import json
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .arith import DecomposedBase, decompose, factorize, prime_sieve

MAX_X = 10**9
SEGMENT = 1 << 22
CACHE_MAGIC = b"OIDX"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sHqQQ")
_PAIR = np.dtype([("order", "<u4"), ("p", "<u4")])


def _check_bound(x: int) -> None:
    if x > MAX_X:
        raise ValueError(f"sieve bound {x} exceeds {MAX_X}")


def prime_segments(x: int, segment: int = SEGMENT):
    """Yield arrays of the primes <= x, in increasing order, one segment at a time."""
    _check_bound(x)
    if x < 2:
        return
    base = prime_sieve(math.isqrt(x))
    for lo in range(2, x + 1, segment):
        hi = min(lo + segment, x + 1)
        yield _segment_primes(lo, hi, base)


def _segment_primes(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    flags = np.ones(hi - lo, dtype=bool)
    for p in base.tolist():
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo :: p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


def sieve_primes(x: int) -> np.ndarray:
    """All primes <= x (x <= 10^9)."""
    _check_bound(x)
    parts = list(prime_segments(x))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def powmod(b: np.ndarray, e: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Elementwise b**e mod m; requires m < 3.03e9 so products fit in int64."""
    b = b % m
    e = e.copy()
    r = np.ones_like(b)
    while True:
        odd = (e & 1).astype(bool)
        r[odd] = r[odd] * b[odd] % m[odd]
        e >>= 1
        if not e.any():
            return r
        b = b * b % m


def _mod_array(n: int, P: np.ndarray) -> np.ndarray:
    # n mod P for a Python int of any size
    if abs(n) < 2**62:
        return np.mod(n, P)
    return np.array([n % p for p in P.tolist()], dtype=np.int64)


def _residues(base: DecomposedBase, P: np.ndarray) -> np.ndarray:
    num = _mod_array(base.numerator, P)
    den = _mod_array(base.denominator, P)
    return num * powmod(den, P - 2, P) % P


def _segment_orders(base: DecomposedBase, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    small = prime_sieve(math.isqrt(hi) + 1)
    P = _segment_primes(lo, hi, small)
    keep = (_mod_array(base.numerator, P) != 0) & (_mod_array(base.denominator, P) != 0)
    P = P[keep]
    if P.size == 0:
        return P, P.copy()
    gm = _residues(base, P)
    N = P - 1
    e = N.copy()
    rem = N.copy()
    # window of integers N lies in: [lo - 1, hi - 1)
    pos = np.full(hi - lo, -1, dtype=np.int64)
    pos[N - (lo - 1)] = np.arange(P.size)
    nmax = int(N[-1])
    for q in small.tolist():
        if q * q > nmax:
            break
        first = -(-(lo - 1) // q) * q
        idx = pos[first - (lo - 1) :: q]
        idx = idx[idx >= 0]
        while idx.size:
            rem[idx] //= q
            hit = powmod(gm[idx], e[idx] // q, P[idx]) == 1
            e[idx[hit]] //= q
            idx = idx[rem[idx] % q == 0]
    big = np.flatnonzero(rem > 1)
    if big.size:
        hit = powmod(gm[big], e[big] // rem[big], P[big]) == 1
        e[big[hit]] //= rem[big[hit]]
    return P, e


def _segment_task(args):
    num, den, lo, hi = args
    return _segment_orders(decompose(f"{num}/{den}"), lo, hi)


def order_table(base, x: int, workers: int = 1, segment: int = SEGMENT) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (p, ord_g(p)) over primes p <= x with v_p(g) = 0."""
    base = decompose(base)
    _check_bound(x)
    if x < 2:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy()
    tasks = [(base.numerator, base.denominator, lo, min(lo + segment, x + 1))
             for lo in range(2, x + 1, segment)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_segment_task, tasks))
    else:
        parts = [_segment_orders(base, lo, hi) for _, _, lo, hi in tasks]
    P = np.concatenate([p for p, _ in parts])
    O = np.concatenate([o for _, o in parts])
    return P, O


def multiplicative_order(base, p: int) -> int:
    """Least e >= 1 with g^e = 1 mod p."""
    base = decompose(base)
    if base.numerator % p == 0 or base.denominator % p == 0:
        raise ValueError(f"v_p(g) != 0 for p={p}, g={base}")
    gm = base.numerator % p * pow(base.denominator, -1, p) % p
    e = p - 1
    for q, k in factorize(p - 1).factors:
        for _ in range(k):
            if pow(gm, e // q, p) == 1:
                e //= q
            else:
                break
    return e


def residual_index(base, p: int) -> int:
    return (p - 1) // multiplicative_order(base, p)


# --- censuses ---------------------------------------------------------------


@dataclass
class EmpiricalCensus:
    g: str
    x: int
    d: int
    mode: str
    counts: list[int]
    total: int

    def fraction(self, a: int) -> float:
        return self.counts[a % self.d] / self.total

    def fractions(self) -> list[float]:
        return [c / self.total for c in self.counts]

    def to_json(self) -> dict:
        rec = {"schema": "census.v1"}
        rec.update(asdict(self))
        return rec


@dataclass
class JointCensus:
    """Counts over (first-axis value mod d1, order-or-index mod d2).

    The first axis is p itself by default; ``first`` can also be "order" or
    "index".
    """

    g: str
    x: int
    d1: int
    d2: int
    mode: str
    counts: np.ndarray = field(repr=False)
    total: int
    first: str = "prime"

    def fraction(self, a1: int, a2: int) -> float:
        return float(self.counts[a1 % self.d1, a2 % self.d2]) / self.total


@dataclass
class ResidueStream:
    """Per-prime (p, ord_g(p)) data from which every census is derived."""

    base: DecomposedBase
    x: int
    primes: np.ndarray
    orders: np.ndarray

    def values(self, mode: str) -> np.ndarray:
        if mode == "order":
            return self.orders
        if mode == "index":
            return (self.primes - 1) // self.orders
        raise ValueError(f"mode must be 'order' or 'index', got {mode!r}")

    def census(self, d: int, mode: str = "order") -> EmpiricalCensus:
        if d < 1:
            raise ValueError("modulus d must be >= 1")
        counts = np.bincount(self.values(mode) % d, minlength=d)
        return EmpiricalCensus(str(self.base), self.x, d, mode,
                               [int(c) for c in counts], int(self.primes.size))

    def joint_census(self, d1: int, d2: int, mode: str = "order", first: str = "prime") -> JointCensus:
        rows = self.primes if first == "prime" else self.values(first)
        cell = (rows % d1) * d2 + self.values(mode) % d2
        counts = np.bincount(cell, minlength=d1 * d2).reshape(d1, d2)
        return JointCensus(str(self.base), self.x, d1, d2, mode, counts, int(self.primes.size), first)


@lru_cache(maxsize=16)
def _stream(base: DecomposedBase, x: int) -> ResidueStream:
    P, O = order_table(base, x)
    return ResidueStream(base, x, P, O)


def residue_stream(g, x: int, workers: int = 1, cache_dir: str | os.PathLike | None = None,
                   allow_sieve: bool = True) -> ResidueStream:
    """Load or compute the per-prime order data for (g, x).

    With ``cache_dir`` the binary residue cache is read if present and written
    after a fresh sieve.  ``allow_sieve=False`` turns a cache miss into an error.
    """
    base = decompose(g)
    path = cache_path(cache_dir, base, x) if cache_dir is not None else None
    if path is not None and path.exists():
        return read_residue_cache(path)
    if not allow_sieve:
        raise FileNotFoundError(f"no residue cache for g={base}, x={x} and sieving disabled")
    if workers > 1:
        P, O = order_table(base, x, workers=workers)
        stream = ResidueStream(base, x, P, O)
    else:
        stream = _stream(base, x)
    if path is not None:
        write_residue_cache(path, stream)
    return stream


def census(g, d: int, x: int, mode: str = "order", **kw) -> EmpiricalCensus:
    return residue_stream(g, x, **kw).census(d, mode)


def joint_census(g, d1: int, d2: int, x: int, mode: str = "order", first: str = "prime",
                 **kw) -> JointCensus:
    return residue_stream(g, x, **kw).joint_census(d1, d2, mode, first)


# --- residue cache ----------------------------------------------------------


def cache_path(cache_dir, base: DecomposedBase, x: int) -> Path:
    sign = "m" if base.numerator < 0 else ""
    name = f"g{sign}{abs(base.numerator)}_{base.denominator}_x{x}.oidx"
    return Path(cache_dir) / name


def write_residue_cache(path, stream: ResidueStream) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pairs = np.empty(stream.primes.size, dtype=_PAIR)
    pairs["order"] = stream.orders
    pairs["p"] = stream.primes
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, stream.base.numerator,
                          stream.base.denominator, stream.x)
    lock = path.with_suffix(path.suffix + ".lock")
    with open(lock, "w") as lf:
        fcntl.flock(lf, fcntl.LOCK_EX)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(pairs.tobytes())
        os.replace(tmp, path)
        fcntl.flock(lf, fcntl.LOCK_UN)


def read_residue_cache(path) -> ResidueStream:
    raw = Path(path).read_bytes()
    magic, version, num, den, x = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    pairs = np.frombuffer(raw, dtype=_PAIR, offset=_HEADER.size)
    return ResidueStream(decompose(f"{num}/{den}"), x,
                         pairs["p"].astype(np.int64), pairs["order"].astype(np.int64))


def census_json(c: EmpiricalCensus) -> str:
    return json.dumps(c.to_json(), sort_keys=True)
