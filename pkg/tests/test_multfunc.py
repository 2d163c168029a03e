"""Built-in multiplicative functions against per-integer brute oracles."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primemean.errors import GridError, ModelSpecError
from primemean.multfunc import (BUILTIN_NAMES, builtin, error_profile_check,
                                load_model_file, log_ratio_prime_power,
                                parse_expression, value_at)
from primemean.sieve import factorize

# ---------------------------------------------------------------------------
# oracles: definitions straight from the divisor/coprimality definitions,
# no shared code with the package implementations
# ---------------------------------------------------------------------------


def phi_oracle(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def sigma_oracle(n: int) -> int:
    return sum(divisors(n))


def tau_oracle(n: int) -> int:
    return len(divisors(n))


def prime_divisors(n: int) -> list[int]:
    out = []
    for p in range(2, n + 1):
        if n % p == 0:
            is_p = all(p % q for q in range(2, p))
            if is_p:
                out.append(p)
    return out


def kappa_oracle(n: int) -> int:
    prod = 1
    for p in prime_divisors(n):
        prod *= p
    return prod


def two_omega_oracle(n: int) -> int:
    return 2 ** len(prime_divisors(n))


def jordan2_oracle(n: int) -> int:
    # J_2(n) = #{(a,b) in [1,n]^2 : gcd(a,b,n) = 1}
    return sum(1 for a in range(1, n + 1) for b in range(1, n + 1)
               if math.gcd(math.gcd(a, b), n) == 1)


ORACLES = {
    "kappa": kappa_oracle,
    "two_omega": two_omega_oracle,
    "euler_phi": phi_oracle,
    "sigma": sigma_oracle,
    "divisor_d": tau_oracle,
}


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_value_at_matches_oracle(name, table5k):
    model = builtin(name)
    oracle = ORACLES[name]
    for n in range(1, 401):
        want = oracle(n)
        got = value_at(model, n, table5k)
        assert got.value == want
        assert got.log_value == pytest.approx(math.log(want), abs=1e-12)


def test_jordan2_matches_counting_oracle(table5k):
    model = builtin("jordan_2")
    for n in range(1, 61):
        want = jordan2_oracle(n)
        got = value_at(model, n, table5k)
        assert got.value == want


def test_value_at_one_is_empty_product(table5k):
    for name in ("kappa", "sigma", "jordan_3"):
        v = value_at(builtin(name), 1, table5k)
        assert v.value == 1.0 and v.log_value == 0.0
    with pytest.raises(GridError):
        value_at(builtin("kappa"), 0, table5k)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(2, 80), n=st.integers(2, 60),
       name=st.sampled_from(sorted(ORACLES) + ["jordan_2"]))
def test_multiplicative_on_coprime_pairs(m, n, name, table5k):
    if math.gcd(m, n) != 1:
        return
    model = builtin(name)
    fm = value_at(model, m, table5k)
    fn = value_at(model, n, table5k)
    fmn = value_at(model, m * n, table5k)
    assert fmn.value == fm.value * fn.value
    assert fmn.log_value == pytest.approx(fm.log_value + fn.log_value,
                                          abs=1e-12)


def test_builtin_profiles():
    # (d, alpha, delta, K, strongly) as advertised per model
    profiles = {
        "kappa": (1.0, 1.0, math.inf, 0.0, True),
        "two_omega": (0.0, 2.0, math.inf, 0.0, True),
        "euler_phi": (1.0, 1.0, 1.0, 1.0, False),
        "sigma": (1.0, 1.0, 1.0, 1.0, False),
        "divisor_d": (0.0, 2.0, math.inf, 0.0, False),
        "jordan_2": (2.0, 1.0, 2.0, 1.0, False),
        "jordan_5": (5.0, 1.0, 5.0, 1.0, False),
    }
    for name, (d, alpha, delta, k, strong) in profiles.items():
        m = builtin(name)
        assert (m.d, m.alpha, m.delta, m.k_bound,
                m.strongly_multiplicative) == (d, alpha, delta, k, strong)
        k_hat, ok = error_profile_check(m, 10 ** 4)
        assert ok, f"{name}: measured K_hat {k_hat} exceeds bound {k}"


def test_builtin_rejects_unknown():
    with pytest.raises(ModelSpecError):
        builtin("mobius")
    with pytest.raises(ModelSpecError):
        builtin("jordan_0")


def test_log_ratio_prime_power_rules():
    kappa = builtin("kappa")
    sigma = builtin("sigma")
    assert log_ratio_prime_power(kappa, 3, 5) == 0.0  # strongly multiplicative
    # sigma(3^3)/sigma(3^2) = 40/13
    assert log_ratio_prime_power(sigma, 3, 3) == pytest.approx(
        math.log(40 / 13), abs=1e-12)
    with pytest.raises(GridError):
        log_ratio_prime_power(sigma, 3, 1)


def test_prime_power_values_consistent(table5k):
    # f(p^a) from the model's prime-power rule equals value_at's factor route
    for name in ("sigma", "divisor_d", "jordan_2", "euler_phi"):
        model = builtin(name)
        for p in (2, 3, 5, 13):
            for a in (1, 2, 3, 4):
                if p ** a > table5k.limit:
                    continue
                direct = model.value_at_prime_power(p, a)
                via_table = value_at(model, p ** a, table5k).value
                assert float(direct) == via_table
                assert math.prod(
                    q ** e for q, e in factorize(p ** a, table5k)) == p ** a


# ---------------------------------------------------------------------------
# declarative model files
# ---------------------------------------------------------------------------


SHIFTED = """\
# strongly multiplicative: f(p^a) = p + 1 for every a
name = shifted
d = 1
alpha = 1
delta = 1
K = 1
fp = p + 1
strongly_multiplicative = true
"""


def test_load_model_file_roundtrip(tmp_path, table5k):
    path = tmp_path / "shifted.model"
    path.write_text(SHIFTED)
    model = load_model_file(str(path))
    assert model.name == "shifted"
    assert model.strongly_multiplicative
    # f(12) = f(4) f(3) = f(2) f(3) = 3 * 4
    assert value_at(model, 12, table5k).value == 12.0
    assert value_at(model, 8, table5k).value == 3.0


def test_load_model_file_with_prime_power_rule(tmp_path, table5k):
    path = tmp_path / "custom.model"
    path.write_text(
        "name = sigma_like\nd = 1\nalpha = 1\ndelta = 1\nK = 1\n"
        "fp = p + 1\nfpa = (p^(a+1) - 1) / (p - 1)\n")
    model = load_model_file(str(path))
    assert value_at(model, 9, table5k).value == 13.0  # 1 + 3 + 9


@pytest.mark.parametrize("body,fragment", [
    ("name = x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\n", "missing"),
    ("name = 7x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\nfp = p\n"
     "strongly_multiplicative = true\n", "identifier"),
    ("name = x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\nfp = p - 3\n"
     "strongly_multiplicative = true\n", "not positive"),
    ("name = x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\nfp = p +\n"
     "strongly_multiplicative = true\n", "expression"),
    ("name = x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\nfp = a * p\n"
     "strongly_multiplicative = true\n", "'a' is not allowed"),
    ("name = x\nd = 1\nalpha = 1\ndelta = 1\nK = 1\nfp = p\nfp = p\n"
     "strongly_multiplicative = true\n", "duplicate"),
    ("name = x\nd = 1\nalpha = 1\ndelta = inf\nK = 0\nfp = p + 1\n"
     "strongly_multiplicative = true\n", "growth profile"),
])
def test_load_model_file_rejects(tmp_path, body, fragment):
    path = tmp_path / "bad.model"
    path.write_text(body)
    with pytest.raises(ModelSpecError, match=fragment):
        load_model_file(str(path))


def test_expression_grammar_exact():
    expr = parse_expression("(p^2 - 1) / (p - 1)")
    assert expr.eval(7, None) == Fraction(48, 6) == 8
    assert parse_expression("2^3^2").eval(2, None) == 2 ** 9  # right-assoc
    assert parse_expression("-p + 10").eval(3, None) == 7
    with pytest.raises(ModelSpecError):
        parse_expression("p ** 2")
    with pytest.raises(ModelSpecError):
        parse_expression("(p + 1")


def test_builtin_names_exported():
    for name in BUILTIN_NAMES:
        if "<" in name:  # the jordan_<k> family placeholder
            continue
        assert builtin(name).name == name
