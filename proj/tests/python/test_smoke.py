import cmath
import json
import math

import pytest

import bergman


def test_moebius_swaps_origin():
    a = [0.3 + 0.1j, -0.2j]
    assert max(abs(x - y) for x, y in zip(bergman.moebius(a, [0, 0]), a)) < 1e-14
    assert max(abs(x) for x in bergman.moebius(a, a)) < 1e-14


def test_metric_hand_values():
    assert bergman.bergman_metric([0], [0.5]) == pytest.approx(0.5 * math.log(3.0))
    assert bergman.pseudo_metric_rho([0, 0], [0.3, 0.4j]) == pytest.approx(0.5)
    assert bergman.normalizing_constant(2, 0.5) == pytest.approx(1.875)
    assert bergman.invariant_ball_volume(1, 1.0) == pytest.approx(math.sinh(1.0) ** 2)


def test_kernel_is_hermitian():
    z, w = [0.2 + 0.1j, -0.3], [0.5j, 0.1]
    k1 = bergman.bergman_kernel(1.0, z, w)
    k2 = bergman.bergman_kernel(1.0, w, z)
    assert k1 == k2.conjugate()
    assert bergman.bergman_kernel(0.0, [0.5], [0.5]) == pytest.approx(1 / 0.5625)


def test_holofun_round_trip_and_projection():
    spec = {"dim": 1, "terms": [{"kind": "monomial", "coeff_re": 1.0, "multi_index": [2]},
                                {"kind": "constant", "coeff_im": 1.0}]}
    f = bergman.HoloFun.from_json(json.dumps(spec))
    assert f.dim == 1
    assert f([0.5]) == pytest.approx(0.25 + 1j)
    again = bergman.HoloFun.from_json(f.to_json())
    assert again([0.1 + 0.2j]) == f([0.1 + 0.2j])
    rep = bergman.project(f, 0.0, [0.3], samples=20000, seed=1)
    assert rep["csv"].splitlines()[0] == "experiment,params,lhs,lhs_se,rhs,rhs_se,ratio,pass"
    assert rep["all_pass"]


def test_suites_are_deterministic():
    cfg = json.dumps({"trials": 50, "dims": [1, 2]})
    a = bergman.verify("geometry", cfg)
    b = bergman.verify("geometry", cfg)
    assert a["csv"] == b["csv"]
    assert a["all_pass"]
    small = json.dumps({"moduli": [0, 0.9], "nodes": 100, "inner_nodes": 32, "gamma": 0.5})
    rep = bergman.equiv("tent", small)
    assert json.loads(rep["json"])["rows"][0]["experiment"] == "equivalence-tent"


def test_errors_become_value_errors():
    with pytest.raises(ValueError):
        bergman.verify("geometry", '{"unknown": 1}')
    with pytest.raises(ValueError):
        bergman.equiv("no-such-functional")
    with pytest.raises(ValueError):
        bergman.space_index("dirichlet")
    assert bergman.space_index("hardy") == -1.0
