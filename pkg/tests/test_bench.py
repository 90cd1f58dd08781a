import pytest

from uegs.bench import (
    BENCH_PRIME,
    CountRecord,
    bench_modulus,
    count_multiplications,
    cubic_ratio,
    fit_exponent,
    run_bench,
)
from uegs.store import packaged_data_dir


def test_bench_modulus_is_largest_prime_power():
    assert [bench_modulus(ell) for ell in (5, 7, 13)] == [4, 3, 4]


def test_bench_prime_holds_the_roots_of_unity():
    assert all((BENCH_PRIME - 1) % n == 0 for n in (2, 3, 4, 6, 12))


def test_fit_exponent_recovers_a_power_law():
    ells = [5, 7, 11, 13]
    assert fit_exponent(ells, [3 * x**3 for x in ells]) == pytest.approx(3.0)
    assert fit_exponent(ells, [x**2 for x in ells]) == pytest.approx(2.0)


def test_cubic_ratio_is_one_for_exactly_cubic_counts():
    records = [CountRecord(5, 4, 1, 125, 0, 0), CountRecord(13, 4, 1, 13**3, 0, 0)]
    assert cubic_ratio(records) == pytest.approx(1.0)
    assert cubic_ratio(records[:1]) is None


def test_count_grows_with_the_tensor(modpolys, shipped_reps):
    counts = [count_multiplications(shipped_reps[k], modpolys[k[0]]) for k in [(5, 4), (7, 3), (13, 4)]]
    assert counts == sorted(counts)
    assert count_multiplications(shipped_reps[(5, 4)], modpolys[5]) == count_multiplications(
        shipped_reps[(5, 4)], modpolys[5], BENCH_PRIME)


def test_parallel_counts_equal_serial():
    serial = run_bench((5, 7, 13), packaged_data_dir(), jobs=1)
    parallel = run_bench((5, 7, 13), packaged_data_dir(), jobs=4)
    assert serial.to_json() == parallel.to_json()
    assert [r.count for r in serial.records] == [62, 114, 366]
