"""Streaming prime-sum engine: frozen hand values, oracles, cache format.

The hand-derived spot values below were computed from the definitions (the
commented products and floor sums), not from the implementation, and the
batch sweeps are cross-checked against per-integer factorization oracles.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primemean import primesums
from primemean.errors import CacheFormatError, GridError
from primemean.multfunc import builtin
from primemean.primesums import (CheckpointGrid, SumsReport,
                                 bruteforce_prefix, default_cache_path,
                                 identity_prefix, load_report,
                                 log_geomean_bruteforce, log_geomean_identity,
                                 mertens_m_of_x, omega_summatory, r_sum,
                                 rs_inequality_check, rs_inequality_sweep,
                                 save_report, sums_stream, u_of_x)
from primemean.sieve import factorize

# ---------------------------------------------------------------------------
# per-integer oracles
# ---------------------------------------------------------------------------


def omega_oracle(n: int, table) -> int:
    return sum(len(factorize(k, table)) for k in range(2, n + 1))


def log_kappa_oracle(n: int, table) -> float:
    return math.fsum(math.log(p) for k in range(2, n + 1)
                     for p, _ in factorize(k, table))


def u_oracle(x: int, table) -> float:
    return math.fsum(
        math.fsum(math.log(p) for p, _ in factorize(k, table)) / math.log(k)
        for k in range(2, x + 1))


# ---------------------------------------------------------------------------
# checkpoint grids
# ---------------------------------------------------------------------------


def test_grid_from_points_validates():
    good = CheckpointGrid.from_points([2, 10, 100])
    assert good.points == (2, 10, 100) and good.n_max == 100 and len(good) == 3
    for bad in ([], [1, 5], [10, 10], [100, 10], [2.5, 10], [True, 10],
                list(range(2, 100))[:70], [2, 10 ** 9 + 1]):
        with pytest.raises(GridError):
            CheckpointGrid.from_points(bad)


def test_grid_log_spaced_dedups():
    grid = CheckpointGrid.log_spaced(10, 1000, 7)
    assert grid.points[0] == 10 and grid.points[-1] == 1000
    assert all(a < b for a, b in zip(grid.points, grid.points[1:]))
    tiny = CheckpointGrid.log_spaced(10, 12, 30)  # collapses to 3 integers
    assert tiny.points == (10, 11, 12)
    with pytest.raises(GridError):
        CheckpointGrid.log_spaced(100, 10, 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 10 ** 6), min_size=1, max_size=10))
def test_grid_property_accepts_iff_valid(pts):
    valid = (all(isinstance(p, int) for p in pts) and pts[0] >= 2
             and all(a < b for a, b in zip(pts, pts[1:])))
    if valid:
        assert CheckpointGrid.from_points(pts).points == tuple(pts)
    else:
        with pytest.raises(GridError):
            CheckpointGrid.from_points(pts)


# ---------------------------------------------------------------------------
# frozen spot values at n = 10 (kappa) and friends
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def kappa10():
    return sums_stream(builtin("kappa"), CheckpointGrid.from_points([10]))


def test_s1_at_ten(kappa10):
    # floor(10/2) + floor(10/3) + floor(10/5) + floor(10/7) = 5 + 3 + 2 + 1
    assert kappa10.s1 == (11,)


def test_s2_at_ten(kappa10):
    # product of radicals kappa(2..10) = 2*3*2*5*6*7*2*3*10 = 151200
    assert kappa10.s2[0] == pytest.approx(math.log(151200), abs=1e-12)


def test_s3_vanishes_for_exact_growth(kappa10):
    assert kappa10.s3[0] == 0.0


def test_f1_f2_at_ten(kappa10):
    # F1 = sum_{p<=10} {10/p}: only p=3 (1/3) and p=7 (3/7) contribute
    assert Fraction(1, 3) + Fraction(3, 7) == Fraction(16, 21)
    assert kappa10.f1[0] == pytest.approx(16 / 21, abs=1e-14)
    # F2 extends F1 over all prime powers: adds {10/4}, {10/8}, {10/9}
    extra = Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 9)
    assert Fraction(16, 21) + extra == Fraction(409, 252)
    assert kappa10.f2[0] == pytest.approx(409 / 252, abs=1e-14)


def test_r_and_m_at_ten(kappa10):
    want_r = math.log(3) / 3 + 3 * math.log(7) / 7
    want_m = (math.log(2) / 2 + math.log(3) / 3
              + math.log(5) / 5 + math.log(7) / 7)
    assert kappa10.r_sum[0] == pytest.approx(want_r, abs=1e-14)
    assert kappa10.m_of_x[0] == pytest.approx(want_m, abs=1e-14)
    assert r_sum(10) == pytest.approx(want_r, abs=1e-14)
    assert mertens_m_of_x(10.0) == pytest.approx(want_m, abs=1e-14)
    assert r_sum(2) == 0.0


def test_u_at_small_points(kappa10, table5k):
    assert kappa10.u_of_x[0] == pytest.approx(22 / 3, abs=1e-13)
    assert u_of_x(2, table5k) == 1.0
    assert u_of_x(4, table5k) == pytest.approx(2.5, abs=1e-14)
    with pytest.raises(GridError):
        u_of_x(1, table5k)


def test_u_matches_oracle(table5k):
    for x in (2, 3, 17, 100, 1234, 5000):
        assert u_of_x(x, table5k) == pytest.approx(u_oracle(x, table5k),
                                                   abs=1e-10)


def test_omega_summatory_values(table5k):
    assert omega_summatory(10, table5k) == 11
    assert omega_summatory(1, table5k) == 0
    for n in (2, 30, 127, 1000, 4999):
        assert omega_summatory(n, table5k) == omega_oracle(n, table5k)


# ---------------------------------------------------------------------------
# the identity against brute force
# ---------------------------------------------------------------------------


def test_identity_examples(table5k):
    kappa = builtin("kappa")
    assert log_geomean_identity(kappa, 10) == pytest.approx(
        math.log(151200), abs=1e-12)
    assert log_geomean_bruteforce(kappa, 10, table5k) == pytest.approx(
        math.log(151200), abs=1e-12)
    # 2^omega over 1..6: product = 2*2*2*2*4 = 64
    assert log_geomean_identity(builtin("two_omega"), 6) == pytest.approx(
        6 * math.log(2), abs=1e-12)
    # divisor counts 1,2,2,3: product 12
    assert log_geomean_identity(builtin("divisor_d"), 4) == pytest.approx(
        math.log(12), abs=1e-12)
    # phi over 1..4: 1*1*2*2
    assert log_geomean_identity(builtin("euler_phi"), 4) == pytest.approx(
        math.log(4), abs=1e-12)


def test_identity_trivial_points():
    assert log_geomean_identity(builtin("sigma"), 1) == 0.0
    with pytest.raises(GridError):
        log_geomean_identity(builtin("sigma"), 0)


def test_prefix_sweeps_match_bruteforce(table5k):
    for name in ("kappa", "two_omega", "euler_phi", "sigma", "divisor_d",
                 "jordan_2", "jordan_3"):
        model = builtin(name)
        ident = identity_prefix(model, 600)
        brute = bruteforce_prefix(model, 600, table5k)
        dev = np.max(np.abs(ident - brute) / np.maximum(1, np.arange(601)))
        assert dev <= 1e-9, name
        assert ident[0] == ident[1] == 0.0


def test_prime_power_corrections_kick_in(table5k):
    # sigma is not strongly multiplicative: crossing 4 = 2^2 must add
    # log(sigma(4)/sigma(2)) = log(7/3) to the prime-only part
    sigma = builtin("sigma")
    ident = identity_prefix(sigma, 16)
    brute = bruteforce_prefix(sigma, 16, table5k)
    for n in (4, 8, 9, 16):
        assert ident[n] == pytest.approx(brute[n], abs=1e-12)


def test_error_bound_certifies_identity(table5k):
    grid = CheckpointGrid.from_points([10, 100, 617, 4999])
    for name in ("kappa", "sigma", "jordan_2", "two_omega"):
        model = builtin(name)
        rep = sums_stream(model, grid)
        for i, n in enumerate(grid.points):
            brute = log_geomean_bruteforce(model, n, table5k)
            assert abs(rep.n_log_g[i] - brute) <= rep.err_bound[i] + 1e-11 * n


# ---------------------------------------------------------------------------
# decomposition structure
# ---------------------------------------------------------------------------


def test_kappa_n_log_g_is_exactly_s2():
    grid = CheckpointGrid.log_spaced(10, 10 ** 5, 12)
    rep = sums_stream(builtin("kappa"), grid)
    assert rep.n_log_g == rep.s2  # log alpha = 0, d = 1, S3 = 0, no pp terms


def test_n_log_g_monotone_for_f_ge_one():
    grid = CheckpointGrid.log_spaced(10, 10 ** 4, 10)
    for name in ("kappa", "sigma", "euler_phi", "jordan_2"):
        rep = sums_stream(builtin(name), grid)
        diffs = np.diff(rep.n_log_g)
        assert np.all(diffs >= 0), name


def test_f2_dominates_f1():
    grid = CheckpointGrid.log_spaced(10, 10 ** 5, 10)
    rep = sums_stream(builtin("kappa"), grid)
    f1 = np.array(rep.f1)
    f2 = np.array(rep.f2)
    assert np.all(f2 >= f1) and np.all(f1 >= 0)


def test_smr_identity_small_grid(table5k):
    grid = CheckpointGrid.log_spaced(10, 5000, 10)
    rep = sums_stream(builtin("kappa"), grid)
    for i, n in enumerate(grid.points):
        left = rep.s2[i]
        right = n * rep.m_of_x[i] - rep.r_sum[i]
        assert abs(left - right) <= 1e-9 * n
        assert left == pytest.approx(log_kappa_oracle(n, table5k), abs=1e-9 * n)


def test_report_field_access(kappa10):
    assert kappa10.field("s2") == kappa10.s2
    with pytest.raises(KeyError):
        kappa10.field("nope")
    row = kappa10.checkpoint(0)
    assert row["n"] == 10 and row["s1"] == 11
    assert len(kappa10) == 1


# ---------------------------------------------------------------------------
# inequality sweep
# ---------------------------------------------------------------------------


def test_rs_inequality_spot_points():
    assert rs_inequality_check(319)
    assert rs_inequality_check(10 ** 6)
    assert rs_inequality_check(10)  # left side only below the threshold


def test_rs_sweep_matches_scalar():
    xs = [2, 10, 318, 319, 1000, 12345]
    sweep = rs_inequality_sweep(xs)
    assert sweep == [rs_inequality_check(x) for x in xs]
    with pytest.raises(GridError):
        rs_inequality_sweep([1, 10])


# ---------------------------------------------------------------------------
# determinism and the cache format
# ---------------------------------------------------------------------------


def test_parallel_matches_sequential_exactly():
    grid = CheckpointGrid.log_spaced(100, 2 * 10 ** 6, 9)
    model = builtin("sigma")
    seq = sums_stream(model, grid, parallel=False)
    par = sums_stream(model, grid, parallel=True, max_workers=5)
    assert seq == par


def test_report_roundtrip_bitwise(tmp_path):
    grid = CheckpointGrid.log_spaced(10, 10 ** 4, 6)
    model = builtin("jordan_2")
    rep = sums_stream(model, grid)
    path = tmp_path / "jordan.pmsm"
    save_report(str(path), rep)
    back = load_report(str(path), model, grid)
    assert back == rep
    assert back.n_log_g == rep.n_log_g and back.err_bound == rep.err_bound
    # grid optional on load; mismatched grid must refuse
    assert load_report(str(path), model) == rep
    with pytest.raises(CacheFormatError):
        load_report(str(path), model, CheckpointGrid.from_points([10, 100]))
    with pytest.raises(CacheFormatError):
        load_report(str(path), builtin("kappa"), grid)


def test_cache_rejects_corruption(tmp_path):
    grid = CheckpointGrid.from_points([10, 100])
    model = builtin("kappa")
    rep = sums_stream(model, grid)
    path = tmp_path / "k.pmsm"
    save_report(str(path), rep)
    blob = path.read_bytes()

    for mutant in (blob[:10], b"XXXX" + blob[4:], blob + b"\0" * 8,
                   blob[:4] + b"\xff\xff" + blob[6:]):
        bad = tmp_path / "bad.pmsm"
        bad.write_bytes(mutant)
        with pytest.raises(CacheFormatError):
            load_report(str(bad), model, grid)

    missing = tmp_path / "absent.pmsm"
    with pytest.raises((CacheFormatError, OSError)):
        load_report(str(missing), model, grid)


def test_default_cache_path_keys(tmp_path):
    g1 = CheckpointGrid.from_points([10, 100])
    g2 = CheckpointGrid.from_points([10, 101])
    p_a = default_cache_path(str(tmp_path), builtin("kappa"), g1)
    p_b = default_cache_path(str(tmp_path), builtin("kappa"), g2)
    p_c = default_cache_path(str(tmp_path), builtin("sigma"), g1)
    assert p_a == default_cache_path(str(tmp_path), builtin("kappa"), g1)
    assert len({p_a, p_b, p_c}) == 3
    assert os.path.dirname(p_a) == str(tmp_path)
    assert os.path.basename(p_a).startswith("kappa-")
