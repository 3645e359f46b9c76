"""Densities of starting points n <= x whose short interval [n, n + lam*log n]
contains exactly m filtered primes, with Poisson reference values.

The measurement slides a window whose right edge n + lam*log n is monotone in
n, so per-n counts reduce to two lookups in a cumulative prime counter; the
scan is chunked, vectorised, and equal by construction to a naive per-n
recount.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import OutOfRangeError
from .primes import ALL, PrimeFilter, PrimeTable

DEFAULT_CHUNK_SIZE = 2**22


def poisson_reference(lam: float, m: int) -> float:
    """lam^m * exp(-lam) / m!, switching to exponent-log form when the direct
    product would overflow."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if m <= 170:
        try:
            return lam**m * math.exp(-lam) / math.factorial(m)
        except OverflowError:
            pass
    return math.exp(m * math.log(lam) - lam - math.lgamma(m + 1))


def uniform_poisson_reference(lam: float, m: int) -> float:
    """lam^m / m!: the reference for windows whose lambda shrinks with x."""
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if m <= 170:
        return lam**m / math.factorial(m)
    return math.exp(m * math.log(lam) - math.lgamma(m + 1))


@dataclass(frozen=True)
class DensityReport:
    """Exact window-count histogram for n <= x plus derived densities.

    counts[m] is the number of n <= x whose window holds exactly m filtered
    primes, for 0 <= m <= m_max; overflow collects every n with more.  The
    densities are exact rationals counts[m]/x and always sum to 1 with the
    overflow share included.
    """

    lam: float
    x: int
    filt: PrimeFilter
    m_max: int
    counts: dict[int, int]
    overflow: int
    densities: dict[int, Fraction] = field(init=False)
    overflow_density: Fraction = field(init=False)
    poisson: dict[int, float] = field(init=False)

    def __post_init__(self) -> None:
        total = sum(self.counts.values()) + self.overflow
        if total != self.x:
            raise AssertionError(
                f"counts partition broken: sum {total} != x {self.x}"
            )
        dens = {m: Fraction(c, self.x) for m, c in self.counts.items()}
        over = Fraction(self.overflow, self.x)
        if sum(dens.values(), over) != 1:
            raise AssertionError("densities do not sum to 1")
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "overflow_density", over)
        object.__setattr__(
            self,
            "poisson",
            {m: poisson_reference(self.lam, m) for m in self.counts},
        )

    @property
    def poisson_overflow(self) -> float:
        return max(0.0, 1.0 - sum(self.poisson.values()))


def required_limit(lam: float, x: int) -> int:
    """Smallest table limit that covers every window of a scan up to x."""
    return math.ceil(x + lam * math.log(x) + 1)


def _chunk_histogram(
    primes: np.ndarray, lam: float, a: int, b: int, m_max: int
) -> np.ndarray:
    """Histogram of per-n window counts for n in [a, b] (overflow in the last bin)."""
    pad_hi = int(b + lam * math.log(b)) + 1
    size = pad_hi - a + 1
    ind = np.zeros(size, dtype=np.int32)
    lo_i = np.searchsorted(primes, a, side="left")
    hi_i = np.searchsorted(primes, pad_hi, side="right")
    ind[primes[lo_i:hi_i] - a] = 1
    cum = np.cumsum(ind, dtype=np.int32)  # cum[t] = #primes in [a, a+t]
    n = np.arange(a, b + 1, dtype=np.int64)
    rhs = n + lam * np.log(n.astype(np.float64))
    right = cum[np.floor(rhs).astype(np.int64) - a]
    left_excl = cum[n - a] - ind[n - a]  # #primes in [a, n-1]
    c = (right - left_excl).astype(np.int64)
    np.clip(c, None, m_max + 1, out=c)
    return np.bincount(c, minlength=m_max + 2)


def measure_density(
    table: PrimeTable,
    lam: float,
    x: int,
    m_max: int,
    filt: PrimeFilter = ALL,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
) -> DensityReport:
    """Count, for every n <= x, the filtered primes in [n, n + lam*log n].

    n runs from 1; the window of n = 1 is the single point {1} and lands in
    m = 0.  Chunks re-derive their window boundaries independently, so they
    may be processed concurrently and merged by addition.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max}")
    need = required_limit(lam, x)
    if need > table.limit:
        raise OutOfRangeError(
            f"scan to x={x} at lambda={lam} requires a table with "
            f"limit >= {need}, have {table.limit}"
        )
    primes = table.primes()
    if filt.kind != "all":
        primes = primes[filt.mask(primes)]
    spans = [(a, min(a + chunk_size - 1, x)) for a in range(1, x + 1, chunk_size)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda s: _chunk_histogram(primes, lam, *s, m_max), spans)
            )
        hist = np.sum(parts, axis=0)
    else:
        hist = np.zeros(m_max + 2, dtype=np.int64)
        for a, b in spans:
            hist += _chunk_histogram(primes, lam, a, b, m_max)
    counts = {m: int(hist[m]) for m in range(m_max + 1)}
    return DensityReport(
        lam=float(lam),
        x=int(x),
        filt=filt,
        m_max=int(m_max),
        counts=counts,
        overflow=int(hist[m_max + 1]),
    )


@dataclass(frozen=True)
class GrowthResult:
    """Comparison of exact-m window counts at scan lengths x and 2x.

    ratio is None when the count at x is zero (no growth signal exists);
    a positive-proportion phenomenon shows ratio near 2.
    """

    m: int
    x: int
    count_at_x: int
    count_at_2x: int
    ratio: float | None


def growth_check(
    table: PrimeTable,
    lam: float,
    m: int,
    x: int,
    filt: PrimeFilter = ALL,
) -> GrowthResult:
    """Ratio of exact-m counts between scans to 2x and to x."""
    need = required_limit(lam, 2 * x)
    if need > table.limit:
        raise OutOfRangeError(
            f"growth check at x={x} needs limit >= {need}, have {table.limit}"
        )
    at_x = measure_density(table, lam, x, m, filt).counts[m]
    at_2x = measure_density(table, lam, 2 * x, m, filt).counts[m]
    ratio = at_2x / at_x if at_x > 0 else None
    return GrowthResult(m=m, x=x, count_at_x=at_x, count_at_2x=at_2x, ratio=ratio)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def density_csv(report: DensityReport, compare_poisson: bool = True) -> str:
    """Rows m,count,density,poisson,ratio; one trailing row for the overflow
    bucket.  Poisson columns stay empty unless compare_poisson is set."""
    lines = ["m,count,density,poisson,ratio"]
    rows = [(str(m), report.counts[m], report.densities[m]) for m in sorted(report.counts)]
    rows.append(("overflow", report.overflow, report.overflow_density))
    for label, count, dens in rows:
        if compare_poisson:
            ref = (
                report.poisson[int(label)]
                if label != "overflow"
                else report.poisson_overflow
            )
            ratio = _fmt(float(dens) / ref) if ref > 0 else ""
            lines.append(f"{label},{count},{_fmt(float(dens))},{_fmt(ref)},{ratio}")
        else:
            lines.append(f"{label},{count},{_fmt(float(dens))},,")
    return "\n".join(lines) + "\n"


def density_json(report: DensityReport, compare_poisson: bool = True) -> dict:
    """JSON-ready mirror of the report fields (exact densities as [num, den])."""
    out = {
        "lambda": report.lam,
        "x": report.x,
        "filter": report.filt.tag,
        "m_max": report.m_max,
        "counts": {str(m): report.counts[m] for m in sorted(report.counts)},
        "overflow": report.overflow,
        "densities": {str(m): float(report.densities[m]) for m in sorted(report.counts)},
        "densities_exact": {
            str(m): [report.densities[m].numerator, report.densities[m].denominator]
            for m in sorted(report.counts)
        },
        "overflow_density": float(report.overflow_density),
    }
    if compare_poisson:
        out["poisson"] = {str(m): report.poisson[m] for m in sorted(report.counts)}
        out["poisson_overflow"] = report.poisson_overflow
    return out


def growth_csv(results: list[GrowthResult]) -> str:
    lines = ["m,count_x,count_2x,ratio"]
    for r in results:
        ratio = _fmt(r.ratio) if r.ratio is not None else ""
        lines.append(f"{r.m},{r.count_at_x},{r.count_at_2x},{ratio}")
    return "\n".join(lines) + "\n"
