import itertools
import math
import random

import numpy as np
import pytest

from shortint.errors import InadmissibleTupleError
from shortint.primes import build_table
from shortint.tuples import (
    AdmissibleTuple,
    SievedSet,
    count_spaced_selections,
    first_covered_prime,
    format_offsets,
    greedy_sieve,
    is_admissible,
    parse_offsets,
    progression_tuple,
    select_spaced,
    singular_series,
)


def _primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, p))]


def brute_admissible(offsets):
    """Check every prime up to len(offsets) against every residue directly."""
    for p in _primes_upto(len(offsets)):
        if all(any(h % p == r for h in offsets) for r in range(p)):
            return False
    return True


def test_admissibility_examples():
    assert not is_admissible([0, 2, 4])
    assert is_admissible([0, 2, 6])
    assert is_admissible([0, 4, 6, 10, 12, 16])
    assert first_covered_prime([0, 2, 4]) == 3


def test_admissibility_matches_brute_force_on_random_tuples():
    rng = random.Random(3)
    for _ in range(300):
        k = rng.randint(1, 7)
        offsets = sorted(rng.sample(range(40), k))
        assert is_admissible(offsets) == brute_admissible(offsets), offsets


def test_offsets_validation():
    for bad in ([], [3, 1], [1, 1], [-2, 0]):
        with pytest.raises(ValueError):
            is_admissible(bad)


def test_greedy_sieve_examples():
    s = greedy_sieve(20, 3)
    assert s.elements.tolist() == [0, 2, 6, 8, 12, 14, 18, 20]
    assert s.removed == ((2, 1), (3, 1))
    s = greedy_sieve(5, 1)
    assert s.elements.tolist() == [0, 1, 2, 3, 4, 5]
    assert s.removed == ()


def test_greedy_sieve_mertens_bound():
    s = greedy_sieve(10**4, 10)
    floor = 10**4 * (1 / 2) * (2 / 3) * (4 / 5) * (6 / 7) - 4
    assert len(s) >= floor


def test_greedy_sieve_argument_validation():
    with pytest.raises(ValueError):
        greedy_sieve(0.5, 3)
    with pytest.raises(ValueError):
        greedy_sieve(20, 0)


def test_greedy_sieve_removes_minimum_class_each_step():
    rng = random.Random(5)
    for _ in range(30):
        window = rng.uniform(10, 500)
        k = rng.randint(1, 13)
        s = greedy_sieve(window, k)
        elements = np.arange(math.floor(window) + 1)
        for p, r in s.removed:
            counts = np.bincount(elements % p, minlength=p)
            assert counts[r] == counts.min()  # removed class is minimal
            survivors = elements[elements % p != r]
            assert len(survivors) >= math.ceil(len(elements) * (p - 1) / p)
            elements = survivors
        assert elements.tolist() == s.elements.tolist()


def test_greedy_sieve_survivors_avoid_removed_classes():
    s = greedy_sieve(300, 11)
    for p, r in s.removed:
        assert not np.any(s.elements % p == r)


def test_any_subset_of_sieved_set_is_admissible():
    rng = random.Random(9)
    s = greedy_sieve(400, 12)
    pool = s.elements.tolist()
    for _ in range(100):
        size = rng.randint(1, 12)
        subset = sorted(rng.sample(pool, size))
        assert is_admissible(subset), subset


def test_select_spaced_examples():
    s = SievedSet(np.array([0, 2, 6, 8, 12, 14, 18, 20]), window=20.0)
    picked = select_spaced(s, 2, 10)
    assert picked.offsets == (0, 12)
    assert picked.min_gap == 12 and picked.min_gap > 10
    single = select_spaced(s, 1, 999)
    assert single.offsets == (0,) and single.min_gap is None
    assert select_spaced([0, 2], 2, 5) is None


def test_select_spaced_random_strategy_is_seeded_and_valid():
    s = greedy_sieve(2000, 5)
    a = select_spaced(s, 4, 60, strategy="random", seed=42)
    b = select_spaced(s, 4, 60, strategy="random", seed=42)
    c = select_spaced(s, 4, 60, strategy="random", seed=43)
    assert a == b
    assert a.min_gap > 60 and is_admissible(a.offsets)
    assert c is None or is_admissible(c.offsets)


def test_select_spaced_under_sieved_source_raises():
    # {0..30} untouched by any sieve: first-fit would pick 0, 2, 4
    with pytest.raises(InadmissibleTupleError):
        select_spaced(list(range(31)), 3, 1)


def brute_spaced_count(elements, k, spacing):
    return sum(
        1
        for combo in itertools.combinations(elements, k)
        if all(b - a > spacing for a, b in itertools.combinations(combo, 2))
    )


def test_count_spaced_examples():
    s = [0, 2, 6, 8, 12, 14, 18, 20]
    exact, bound = count_spaced_selections(s, 2, 10)
    assert exact == 10
    assert bound == 0.0
    exact, bound = count_spaced_selections(s, 1, 5)
    assert exact == 8 and bound == 8.0
    exact, _ = count_spaced_selections(list(range(10)), 2, 0)
    assert exact == math.comb(10, 2) == 45


def test_count_spaced_matches_exhaustive_on_arbitrary_sets():
    rng = random.Random(17)
    for _ in range(60):
        n = rng.randint(1, 20)
        elements = sorted(rng.sample(range(60), n))
        k = rng.randint(1, 4)
        spacing = rng.choice([0, 1, 2, 3, 5, 9])
        exact, bound = count_spaced_selections(elements, k, spacing)
        assert exact == brute_spaced_count(elements, k, spacing)
        if k == 1:
            assert exact == bound == n


def test_bound_dominated_by_exact_count_on_sieved_sets():
    # The product bound assumes each pick knocks out at most 2*spacing other
    # candidates, which holds once gaps are >= 2 (any sieve with k >= 2) and
    # spacing >= 1; dense unsieved sets can violate it.
    rng = random.Random(19)
    for _ in range(60):
        k = rng.randint(2, 4)
        sieved = greedy_sieve(rng.uniform(10, 48), k)
        assert len(sieved) <= 24
        spacing = rng.choice([1, 2, 3, 5, 9])
        exact, bound = count_spaced_selections(sieved, k, spacing)
        assert exact == brute_spaced_count(sieved.elements.tolist(), k, spacing)
        assert exact >= bound


def test_singular_series_examples():
    assert singular_series([0], 100) == 1.0
    value = singular_series([0, 2], 10**6)
    assert abs(value - 1.32032) < 1e-3
    with pytest.raises(InadmissibleTupleError):
        singular_series([0, 2, 4], 100)
    with pytest.raises(ValueError):
        singular_series([0, 50], 10)  # cutoff below the largest offset


def test_singular_series_partial_products_stabilise():
    primes = build_table(10**6).primes()
    tail = primes[np.searchsorted(primes, 10**5, side="right") :].astype(np.float64)
    tail_budget = float(np.sum(2.0 / tail**2))
    for offsets in ((0, 2, 6), (0, 4, 6, 10, 12, 16)):
        k = len(offsets)
        drift = abs(
            math.log(singular_series(offsets, 10**6))
            - math.log(singular_series(offsets, 10**5))
        )
        assert drift <= k**2 * tail_budget


def test_admissible_tuple_validation():
    t = AdmissibleTuple((0, 6, 12), span=20.0)
    assert t.min_gap == 6
    with pytest.raises(InadmissibleTupleError):
        AdmissibleTuple((0, 2, 4), span=10.0)
    with pytest.raises(ValueError):
        AdmissibleTuple((0, 30), span=20.0)  # outside the window
    boundary = AdmissibleTuple((0, 20), span=20.0)  # floor(window) is reachable
    assert boundary.offsets == (0, 20)


def test_progression_tuple_lands_in_the_progression():
    t = progression_tuple(1000, 3, 1, 4, 40)
    assert t is not None
    assert all(h % 4 == 1 for h in t.offsets)
    assert t.min_gap > 40
    assert is_admissible(t.offsets)
    assert progression_tuple(6, 2, 1, 4, 1) is None  # no room
    with pytest.raises(ValueError):
        progression_tuple(1000, 2, 2, 4, 10)  # a, q not coprime


def test_offsets_line_roundtrip():
    assert parse_offsets("0, 2,6") == (0, 2, 6)
    assert format_offsets((0, 2, 6)) == "0,2,6"
    assert parse_offsets(format_offsets((5, 11, 17))) == (5, 11, 17)
    with pytest.raises(ValueError):
        parse_offsets("3,2")
    with pytest.raises(ValueError):
        parse_offsets("1,two")
