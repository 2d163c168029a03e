"""End-to-end CLI behavior: formats, exit codes, cache persistence."""

from __future__ import annotations

import json
import math

import pytest

from primemean.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_constants_json(capsys):
    rc, out, _ = run(capsys, "constants", "--model", "kappa",
                     "--format", "json", "--aj", "3")
    assert rc == 0
    rows = {r["constant"]: r for r in json.loads(out)}
    assert rows["gamma"]["value"] == pytest.approx(0.5772156649015329,
                                                   abs=1e-12)
    assert rows["meissel_mertens_M"]["value"] == pytest.approx(
        0.2614972128476428, abs=1e-7)
    assert rows["mertens_E"]["value"] == pytest.approx(-1.3325822757332,
                                                       abs=1e-6)
    assert rows["eta0[kappa]"]["value"] == pytest.approx(-1.7553666, abs=1e-6)
    assert {"a_1", "a_2", "a_3"} <= rows.keys()
    assert all(r["tail_bound"] >= 0 for r in rows.values())


def test_constants_table_has_tail_bounds(capsys):
    rc, out, _ = run(capsys, "constants")
    assert rc == 0
    head = out.splitlines()[0]
    assert "tail_bound" in head and "value" in head


def test_geomean_oracle_example(capsys):
    rc, out, _ = run(capsys, "geomean", "--model", "kappa", "--n", "10",
                     "--oracle", "--format", "json")
    assert rc == 0
    row = json.loads(out)[0]
    assert row["n"] == 10
    assert row["log_geomean"] == pytest.approx(math.log(151200) / 10,
                                               abs=1e-12)
    assert row["log_geomean_bruteforce"] == pytest.approx(
        row["log_geomean"], abs=1e-12)


def test_geomean_trivial_point(capsys):
    rc, out, _ = run(capsys, "geomean", "--model", "euler_phi", "--n", "1",
                     "--format", "json")
    assert rc == 0
    assert json.loads(out)[0]["log_geomean"] == 0.0


def test_sums_csv_is_rfc4180(capsys):
    rc, out, _ = run(capsys, "sums", "--model", "kappa", "--to", "100",
                     "--points", "2", "--format", "csv")
    assert rc == 0
    assert "\r\n" in out
    lines = out.strip().splitlines()
    assert lines[0].split(",")[:3] == ["n", "s1", "s2"]
    last = lines[-1].split(",")
    # S1(100) = 50+33+20+14+9+7+5+5+4+3+3+2+2+2+2 + 10*1 = 171
    assert last[0] == "100" and last[1] == "171"


def test_verify_table_and_exit_zero(capsys):
    rc, out, _ = run(capsys, "verify", "--check", "a1-gamma",
                     "--check", "series-algebra")
    assert rc == 0
    lines = [l for l in out.splitlines() if l]
    assert len(lines) == 2 and all(l.startswith("PASS") for l in lines)


def test_verify_grid_override(capsys):
    rc, out, _ = run(capsys, "verify", "--check", "omega-identity",
                     "--to", "20000", "--format", "json")
    assert rc == 0
    assert json.loads(out)[0]["passed"] is True


def test_verify_failing_check_exits_one(capsys):
    # at desk scale the S2 stabilization probe fails (the scaled residual
    # decays like 1/sqrt(n) rather than settling on a constant)
    rc, out, _ = run(capsys, "verify", "--check", "s2-constant",
                     "--to", str(10 ** 6))
    assert rc == 1
    assert "FAIL s2-constant" in out


def test_exit_code_grid(capsys):
    rc, _, err = run(capsys, "sums", "--model", "kappa",
                     "--from", "100", "--to", "10")
    assert rc == 2 and "error:" in err


def test_exit_code_model(capsys):
    rc, _, err = run(capsys, "sums", "--model", "nope", "--to", "100")
    assert rc == 2 and "unknown model" in err


def test_exit_code_precision(capsys):
    rc, _, err = run(capsys, "constants", "--precision", "1e-15")
    assert rc == 3 and "euler_gamma" in err


def test_exit_code_unknown_check(capsys):
    rc, _, err = run(capsys, "verify", "--check", "bogus")
    assert rc == 4 and "bogus" in err


def test_exit_code_ill_conditioned_fit(capsys):
    rc, _, err = run(capsys, "fit", "--target", "s1-residual", "--order", "8",
                     "--from", "1000000", "--to", "1000900", "--points", "10")
    assert rc == 5 and "condition" in err


def test_usage_error_is_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--to", "100000"])  # --target is required
    assert exc.value.code == 2


def test_fit_s1_residual_small_window(capsys):
    rc, out, _ = run(capsys, "fit", "--target", "s1-residual", "--order", "1",
                     "--from", "10000", "--to", "1000000", "--points", "8",
                     "--format", "json")
    assert rc == 0
    rows = {r["term"]: r["value"] for r in json.loads(out)}
    # leading coefficient approximates gamma - 1 even at desk scale
    assert rows["coef[1/log^1]"] == pytest.approx(0.5772156649 - 1.0, abs=0.1)
    assert "constant" not in rows


def test_fit_s2_residual_has_constant(capsys):
    rc, out, _ = run(capsys, "fit", "--target", "s2-residual", "--order", "0",
                     "--from", "10000", "--to", "1000000", "--points", "8",
                     "--format", "json")
    assert rc == 0
    rows = {r["term"]: r["value"] for r in json.loads(out)}
    # gamma + E - 1
    assert rows["constant"] == pytest.approx(-1.7553666, abs=0.05)


def test_cache_roundtrip(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PRIMEMEAN_CACHE", str(tmp_path))
    args = ("sums", "--model", "kappa", "--to", "20000", "--points", "3",
            "--format", "csv")
    rc1, out1, _ = run(capsys, *args)
    cached = list(tmp_path.glob("*.pmsm"))
    assert rc1 == 0 and len(cached) == 1
    rc2, out2, _ = run(capsys, *args)
    assert rc2 == 0 and out2 == out1

    # a corrupted cache entry heals itself
    cached[0].write_bytes(b"garbage")
    rc3, out3, _ = run(capsys, *args)
    assert rc3 == 0 and out3 == out1
    assert cached[0].read_bytes() != b"garbage"


def test_no_cache_without_configuration(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("PRIMEMEAN_CACHE", raising=False)
    monkeypatch.chdir(tmp_path)
    rc, _, _ = run(capsys, "sums", "--model", "kappa", "--to", "5000",
                   "--points", "2")
    assert rc == 0
    assert not list(tmp_path.rglob("*.pmsm"))


def test_custom_model_file(tmp_path, capsys):
    path = tmp_path / "shifted.model"
    path.write_text(
        "name = shifted\nd = 1\nalpha = 1\ndelta = 1\nK = 1\n"
        "fp = p + 1\nstrongly_multiplicative = true\n")
    rc, out, _ = run(capsys, "geomean", "--model", str(path), "--n", "4",
                     "--oracle", "--format", "json")
    assert rc == 0
    # product over 1..4: 1 * 3 * 4 * 3 = 36 (f(4) = f(2) = 3)
    assert json.loads(out)[0]["log_geomean"] == pytest.approx(
        math.log(36) / 4, abs=1e-12)
