import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpancs.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_NO_CLICK, EXIT_OK, RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return [line.split(",") for line in text.splitlines() if not line.startswith("#")]


def test_state_number_state(capsys):
    code, out, _ = run(capsys, "state", "--alpha", "0", "--m", "2", "--f", "pt", "--nu", "3")
    assert code == EXIT_OK
    assert out.splitlines() == ["n,re,im", "2,1,0"]


def test_state_pacs(capsys):
    from scipy.special import factorial
    code, out, _ = run(capsys, "state", "--alpha", "1", "--m", "1", "--f", "unity")
    r = rows(out)[1:]
    n = np.array([int(x[0]) for x in r])
    c = np.array([float(x[1]) for x in r])
    oracle = np.exp(-0.5) * np.sqrt(factorial(n)) / factorial(n - 1) / np.sqrt(2.0)
    np.testing.assert_allclose(c, oracle, atol=1e-12)


def test_state_sqrtn_m0(capsys):
    from scipy.special import factorial
    _, out, _ = run(capsys, "state", "--alpha", "1.5", "--m", "0", "--f", "sqrtn")
    r = rows(out)[1:]
    c = np.array([float(x[1]) for x in r])
    n = np.arange(len(c))
    ratio = c / (1.5 ** n / factorial(n))
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


def test_criteria_pt(capsys):
    code, out, _ = run(capsys, "criteria", "--f", "pt", "--alpha", "0.1:5:20", "--m", "2,5")
    assert code == EXIT_OK
    r = rows(out)
    assert r[0] == "alpha,m,Q,g2,sx,sp,SX,SP,N_used,status".split(",")
    assert len(r) == 41 and all(float(x[2]) < 0 for x in r[1:])


def test_criteria_sqrt_vs_unity(capsys):
    _, a, _ = run(capsys, "criteria", "--f", "sqrtn", "--alpha", "0.5,1,2", "--m", "2")
    _, b, _ = run(capsys, "criteria", "--f", "unity", "--alpha", "0.5,1,2", "--m", "2")
    for x, y in zip(rows(a)[1:], rows(b)[1:]):
        assert float(x[2]) < float(y[2])


def test_weight_cases(capsys):
    code, out, _ = run(capsys, "weight", "--case", "pt", "--nu", "3", "--m", "1")
    assert code == EXIT_OK
    assert all(float(x[1]) > 0 for x in rows(out)[1:]) and "# sign_changes=0" in out
    _, out, _ = run(capsys, "weight", "--case", "pt-neg", "--nu", "3", "--m", "2")
    assert "# sign_changes=0" not in out
    _, out, _ = run(capsys, "weight", "--case", "klauder")
    assert "# sign_changes=1" in out


def test_moments_klauder(capsys):
    code, out, _ = run(capsys, "moments", "--case", "klauder", "--count", "9")
    assert code == EXIT_OK
    r = rows(out)
    assert r[0] == ["k", "target", "computed", "rel_error"]
    assert max(float(x[3]) for x in r[1:]) < 1e-8


def test_generate(capsys):
    code, out, err = run(capsys, "generate", "--alpha", "1", "--m", "1", "--f", "unity", "--eta", "0.01")
    assert code == EXIT_OK and float(rows(out)[1][1]) >= 0.999
    code, _, err = run(capsys, "generate", "--eta", "0.04,0.02,0.01")
    assert "fitted order" in err
    code, _, err = run(capsys, "generate", "--eta", "0")
    assert code == EXIT_NO_CLICK


def test_exit_codes(capsys):
    assert run(capsys, "state", "--alpha", "2", "--m", "1", "--f", "invsqrtn")[0] == EXIT_CONVERGENCE
    assert run(capsys, "weight", "--case", "negative", "--f", "invsqrtn")[0] == EXIT_CONVERGENCE
    assert run(capsys, "state", "--f", "nope")[0] == EXIT_CONFIG
    assert run(capsys, "generate", "--eta", "0.01,0.02")[0] == EXIT_CONFIG
    assert run(capsys, "weight", "--x-min", "5", "--x-max", "1")[0] == EXIT_CONFIG


def test_determinism(capsys):
    args = ("criteria", "--f", "sqrtn", "--alpha", "0.2:3:7", "--m", "1,3")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
    assert run(capsys, *args, "--workers", "2")[1] == run(capsys, *args)[1]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run\nf=pt\nnu=4.5\nalpha=0.5,1.0\nm=2\n")
    code, out, _ = run(capsys, "criteria", "--config", str(cfg), "--print-config")
    parsed = RunConfig.from_text(out)
    assert parsed.f == "pt" and parsed.nu == 4.5 and parsed.alpha == [0.5, 1.0]
    _, out, _ = run(capsys, "criteria", "--config", str(cfg), "--nu", "3", "--print-config")
    assert RunConfig.from_text(out).nu == 3.0
    cfg.write_text("bogus=1\n")
    assert run(capsys, "criteria", "--config", str(cfg))[0] == EXIT_CONFIG


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DPANCS_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "state", "--alpha", "0.5", "--m", "1", "--out", "sub/state.csv")
    assert code == EXIT_OK and out == ""
    assert (tmp_path / "sub" / "state.csv").read_text().startswith("n,re,im\n")


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["state", "criteria", "weight", "moments", "generate"]),
       st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=4),
       st.lists(st.integers(-5, 9), min_size=1, max_size=3),
       st.sampled_from(["unity", "pt", "sqrtn", "invsqrtn", "bg"]),
       st.floats(2.0, 10.0), st.floats(1e-16, 1e-6), st.one_of(st.none(), st.integers(5, 300)),
       st.booleans(), st.lists(st.floats(1e-4, 1.0), min_size=1, max_size=4))
def test_config_round_trip(cmd, alpha, m, f, nu, tol, N, neg, eta):
    cfg = RunConfig(cmd, alpha=alpha, m=m, f=f, nu=nu, tol=tol, N=N, negative=neg, eta=eta)
    assert RunConfig.from_text(cfg.to_text()) == cfg
