import json
import math

import pytest

import minrel


def test_q_algebra_laws():
    for q in (0.5, 2.0):
        x, y = 0.7, 1.9
        lhs = minrel.q_log(minrel.q_product(x, y, q), q)
        assert lhs == pytest.approx(minrel.q_log(x, q) + minrel.q_log(y, q), abs=1e-12)
    assert minrel.q_exp(0.3, 1.0) == pytest.approx(math.exp(0.3))


def test_classical_two_point():
    r = minrel.solve([0.5, 0.5], [[0.0, 1.0]], [0.7])
    assert r.converged
    assert r.posterior == pytest.approx([0.3, 0.7], abs=1e-12)
    assert r.beta[0] == pytest.approx(math.log(3 / 7), abs=1e-10)
    assert r.partition == pytest.approx(5 / 3)
    assert r.closed_form_minimum() == pytest.approx(r.divergence, abs=1e-9)


@pytest.mark.parametrize(
    "kind,target",
    [("q-expectation", 0.49), ("normalized-q-expectation", 0.49 / 0.58)],
)
def test_q_regimes_recover_worked_posterior(kind, target):
    r = minrel.solve([0.5, 0.5], [[0.0, 1.0]], [target], kind=kind, q=2.0)
    assert r.posterior == pytest.approx([0.3, 0.7], abs=1e-8)
    assert r.closed_form_minimum() == pytest.approx(r.divergence, abs=1e-9)


def test_oracle_agrees():
    p = minrel.brute_force_primal([0.2, 0.3, 0.5], [[0.0, 1.0, 2.0]], [0.9])
    r = minrel.solve([0.2, 0.3, 0.5], [[0.0, 1.0, 2.0]], [0.9])
    assert max(abs(a - b) for a, b in zip(p, r.posterior)) < 1e-2


def test_classical_triangle():
    l = [0.3, 0.2, 0.5]
    rep = minrel.verify_classical_pythagoras([1 / 3] * 3, [[0.0, 1.0, 2.0]], [1.2], l)
    assert abs(rep.triangle_residual) < 1e-8
    with pytest.raises(minrel.PreconditionError):
        minrel.verify_classical_pythagoras([1 / 3] * 3, [[0.0, 1.0, 2.0]], [1.0], l)


def test_thermodynamic_checks():
    for c in minrel.thermodynamic_checks([0.5, 0.5], [[0.0, 1.0]], [0.49], kind="q-expectation", q=2.0):
        assert c["residual"] < 1e-5


def test_errors_are_typed():
    with pytest.raises(minrel.DomainError):
        minrel.q_log(-1.0, 2.0)
    with pytest.raises(minrel.InfeasibleError):
        minrel.solve([0.5, 0.5], [[0.0, 1.0]], [1.0])


def test_cli_round_trip(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "space": {"points": 2},
        "features": [{"name": "u", "values": [0, 1]}],
        "constraint": {"kind": "classical", "targets": [0.7]},
    }))
    code, out, err = minrel.run_cli(["solve", "--config", str(cfg)])
    assert code == 0, err
    report = json.loads(out)
    assert report["solve"]["beta"][0] == pytest.approx(-0.8473, abs=1e-4)
    direct = minrel.solve([0.5, 0.5], [[0.0, 1.0]], [0.7])
    assert report["solve"]["divergence"] == direct.divergence
