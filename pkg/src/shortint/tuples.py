"""Admissible tuples: greedy sieving, well-spaced selection, selection counts,
and the singular-series diagnostic."""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InadmissibleTupleError
from .primes import build_table


def _validate_offsets(offsets: Sequence[int]) -> None:
    if len(offsets) == 0:
        raise ValueError("offsets must be non-empty")
    for h in offsets:
        if h != int(h):
            raise ValueError(f"offsets must be integers, got {h!r}")
        if h < 0:
            raise ValueError(f"offsets must be non-negative, got {h}")
    for a, b in zip(offsets, offsets[1:]):
        if b <= a:
            raise ValueError(f"offsets must be strictly increasing ({a} before {b})")


def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, n + 1, p)))
    return [p for p in range(2, n + 1) if flags[p]]


def first_covered_prime(offsets: Sequence[int]) -> int | None:
    """Smallest prime whose residue classes are all hit by the offsets, or
    None when the offsets are admissible.  Primes above len(offsets) cannot
    be covered by that few residues."""
    _validate_offsets(offsets)
    for p in _primes_upto(len(offsets)):
        if len({h % p for h in offsets}) == p:
            return p
    return None


def is_admissible(offsets: Sequence[int]) -> bool:
    """True iff, for every prime p, the offsets miss some class mod p."""
    return first_covered_prime(offsets) is None


@dataclass(frozen=True)
class AdmissibleTuple:
    """Strictly increasing non-negative offsets drawn from a window [0, span].

    Construction validates admissibility and computes min_gap, the smallest
    distance between adjacent offsets (None for a single offset).
    """

    offsets: tuple[int, ...]
    span: float
    min_gap: int | None = field(init=False, default=None)

    def __post_init__(self) -> None:
        offs = tuple(int(h) for h in self.offsets)
        object.__setattr__(self, "offsets", offs)
        _validate_offsets(offs)
        if offs[-1] > math.floor(self.span):
            raise ValueError(
                f"largest offset {offs[-1]} lies outside the window [0, {self.span}]"
            )
        p = first_covered_prime(offs)
        if p is not None:
            raise InadmissibleTupleError(f"offsets cover every residue class mod {p}")
        gaps = [b - a for a, b in zip(offs, offs[1:])]
        object.__setattr__(self, "min_gap", min(gaps) if gaps else None)

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class SievedSet:
    """Survivors of the greedy residue sieve on {0, ..., floor(window)}.

    removed records, per prime processed, which residue class was deleted.
    """

    elements: np.ndarray
    window: float
    removed: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        arr = np.asarray(self.elements, dtype=np.int64)
        if arr.ndim != 1 or (len(arr) > 1 and not np.all(np.diff(arr) > 0)):
            raise ValueError("elements must be a strictly increasing 1-d sequence")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    def __len__(self) -> int:
        return len(self.elements)


def greedy_sieve(window: float, k: int) -> SievedSet:
    """Sieve {0, ..., floor(window)} by the primes p <= k in increasing order,
    removing at each step the residue class mod p with the fewest survivors
    (ties broken towards the smallest residue)."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    elements = np.arange(math.floor(window) + 1, dtype=np.int64)
    removed: list[tuple[int, int]] = []
    for p in _primes_upto(k):
        counts = np.bincount(elements % p, minlength=p)
        r = int(np.argmin(counts))  # argmin takes the first, i.e. smallest, class
        elements = elements[elements % p != r]
        removed.append((p, r))
    return SievedSet(elements, float(window), tuple(removed))


def _elements_of(source: SievedSet | Iterable[int]) -> list[int]:
    if isinstance(source, SievedSet):
        return source.elements.tolist()
    els = [int(e) for e in source]
    _validate_offsets(els)
    return els


def select_spaced(
    sieved: SievedSet | Iterable[int],
    k: int,
    spacing: int,
    strategy: str = "first-fit",
    seed: int | None = None,
) -> AdmissibleTuple | None:
    """Pick k elements with all pairwise gaps > spacing, or None if impossible.

    Selection is iterative: each chosen element excludes the closed ball of
    radius `spacing` around it.  first-fit always takes the smallest remaining
    candidate; random(seed) draws uniformly from the remainder.  The source
    should be sieved for every prime <= k, so that the result is admissible.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if spacing < 0:
        raise ValueError(f"spacing must be >= 0, got {spacing}")
    if strategy not in ("first-fit", "random"):
        raise ValueError(f"strategy must be 'first-fit' or 'random', got {strategy!r}")
    window = sieved.window if isinstance(sieved, SievedSet) else None
    candidates = np.asarray(_elements_of(sieved), dtype=np.int64)
    rng = random.Random(seed) if strategy == "random" else None
    chosen: list[int] = []
    for _ in range(k):
        if len(candidates) == 0:
            return None
        h = int(candidates[0] if rng is None else candidates[rng.randrange(len(candidates))])
        chosen.append(h)
        candidates = candidates[np.abs(candidates - h) > spacing]
    chosen.sort()
    span = float(window) if window is not None else float(chosen[-1])
    return AdmissibleTuple(tuple(chosen), span)


def count_spaced_selections(
    sieved: SievedSet | Iterable[int], k: int, spacing: int
) -> tuple[int, float]:
    """Exact number of k-subsets with all pairwise gaps > spacing, paired with
    the product lower bound (1/k!) * prod_i max(0, n - 2*(i-1)*spacing).

    The exact count runs a DP over the sorted elements; since elements are
    sorted, the pairwise condition is equivalent to consecutive chosen gaps
    exceeding `spacing`.  The exact count always dominates the bound.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if spacing < 0:
        raise ValueError(f"spacing must be >= 0, got {spacing}")
    els = _elements_of(sieved)
    n = len(els)

    if k > n:
        exact = 0
    else:
        ways = [1] * n  # selections of size 1 ending at each element
        for _ in range(k - 1):
            prefix = [0] * (n + 1)
            for i in range(n):
                prefix[i + 1] = prefix[i] + ways[i]
            nxt = [0] * n
            for i in range(n):
                cut = bisect.bisect_left(els, els[i] - spacing)
                nxt[i] = prefix[cut]
            ways = nxt
        exact = sum(ways)

    prod = 1.0
    for i in range(k):
        prod *= max(0.0, n - 2 * i * spacing)
        if prod == 0.0:
            break
    bound = prod / math.factorial(k)
    return exact, bound


def singular_series(
    tpl: AdmissibleTuple | Sequence[int], cutoff: int
) -> float:
    """Product over primes p <= cutoff of (1 - nu_p/p) * (1 - 1/p)^(-k), where
    nu_p counts distinct offset residues mod p.  Strictly positive exactly for
    admissible tuples; factors beyond the cutoff are dropped."""
    offsets = tpl.offsets if isinstance(tpl, AdmissibleTuple) else tuple(tpl)
    _validate_offsets(offsets)
    witness = first_covered_prime(offsets)
    if witness is not None:
        raise InadmissibleTupleError(
            f"singular series vanishes: offsets cover every class mod {witness}"
        )
    k = len(offsets)
    hmax = offsets[-1]
    if cutoff < hmax:
        raise ValueError(f"cutoff {cutoff} must be >= the largest offset {hmax}")
    if cutoff < 2:
        return 1.0
    primes = build_table(int(cutoff)).primes()
    split = int(np.searchsorted(primes, hmax, side="right"))
    offs = np.asarray(offsets, dtype=np.int64)
    log_total = 0.0
    for p in primes[:split].tolist():
        nu = len(np.unique(offs % p))
        log_total += math.log1p(-nu / p) - k * math.log1p(-1.0 / p)
    tail = primes[split:].astype(np.float64)
    if len(tail):
        log_total += float(np.sum(np.log1p(-k / tail) - k * np.log1p(-1.0 / tail)))
    return math.exp(log_total)


def progression_tuple(
    window: float,
    k: int,
    a: int,
    q: int,
    spacing: int,
    strategy: str = "first-fit",
    seed: int | None = None,
) -> AdmissibleTuple | None:
    """Well-spaced admissible tuple whose offsets all lie in a (mod q).

    Runs the greedy sieve and spaced selection on the cofactor coordinates
    b = (h - a)/q with the spacing threshold scaled down by q, then maps back
    h = a + q*b.  Returns None when the window leaves no room.
    """
    if q < 1 or not 0 <= a < q:
        raise ValueError(f"need 0 <= a < q with q >= 1, got a={a}, q={q}")
    if math.gcd(a, q) != 1:
        raise ValueError(f"a={a} and q={q} must be coprime")
    b_window = (window - a) / q
    if b_window < 1:
        return None
    sieved_b = greedy_sieve(b_window, k)
    picked = select_spaced(sieved_b, k, spacing // q, strategy, seed)
    if picked is None:
        return None
    return AdmissibleTuple(tuple(a + q * b for b in picked.offsets), float(window))


def parse_offsets(line: str) -> tuple[int, ...]:
    """Parse the exchange format "h1,h2,...,hk"; offsets must strictly increase."""
    try:
        offsets = tuple(int(part.strip()) for part in line.strip().split(","))
    except ValueError as exc:
        raise ValueError(f"offsets line is not comma-separated integers: {line!r}") from exc
    _validate_offsets(offsets)
    return offsets


def format_offsets(offsets: Sequence[int]) -> str:
    return ",".join(str(int(h)) for h in offsets)
