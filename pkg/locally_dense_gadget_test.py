"""
Tests Lokal dichtes Gadget
==========================
"""

import itertools
import json
from fractions import Fraction

import pytest

from field_algebra import power_sums
from gadget_errors import CapacityError, GadgetFileError, UsageError
from lab_config import Budgets
from locally_dense_gadget import (SCHEMA, GadgetParams, SubsetReachability, bad_center, build_gadget,
                                  enumerate_s2, feasibility_frontier, floor_power, gadget_document,
                                  load_gadget, monotonicity_violations, power_at_least, reverify_gadget,
                                  select_params, serialize_gadget, verify_projection)
from rs_lattice import build_parity_check, syndrome

GOLDEN_MEMBERS = [(0, 1, 2), (0, 4, 6), (1, 3, 6), (1, 4, 5), (2, 3, 5)]


@pytest.fixture(scope="module")
def golden_gadget():
    return build_gadget(GadgetParams.explicit(7, 2, 3, 1))


def test_floor_power_is_exact():
    assert floor_power(7, Fraction(1, 2)) == 2
    assert floor_power(16, Fraction(1, 2)) == 4
    assert floor_power(4096, Fraction(1, 12)) == 2
    assert floor_power(4093, Fraction(1, 12)) == 1
    assert power_at_least(5, 7, Fraction(1, 2))
    assert not power_at_least(2, 7, Fraction(1, 2))


def test_select_params_formulas():
    params = select_params(1, "1/2", 4099)
    assert params.epsilon1 == Fraction(1, 12)
    assert params.delta == Fraction(1, 24)
    assert params.two_k == 2
    assert params.k == 1
    assert params.h == 1
    assert params.alpha_p == Fraction(3, 4)
    assert params.epsilon2 == Fraction(1, 4)
    assert params.gamma_p_supremum == Fraction(4, 3)


@pytest.mark.parametrize("q", [5, 101, 1009, 4099, 9973])
def test_regime_not_reached_at_desk_scale(q):
    params = select_params(1, "1/2", q)
    assert params.k <= 1
    assert not params.asymptotic_regime_reached
    with pytest.raises(UsageError):
        build_gadget(params)


def test_select_params_rejects_bad_input():
    with pytest.raises(UsageError):
        select_params(1, "3/2", 101)
    with pytest.raises(UsageError):
        select_params("1/2", "1/2", 101)
    with pytest.raises(UsageError):
        select_params(1, 0.5, 101)
    with pytest.raises(UsageError):
        select_params(1, "1/2", 100)


def test_explicit_params():
    params = GadgetParams.explicit(7, 2, 3, 1)
    assert params.epsilon == Fraction(1, 2)
    assert params.ell == 4
    assert params.mode == "explicit"
    assert not params.feasibility["h_below_sqrt_q"]
    assert not params.asymptotic_regime_reached
    assert GadgetParams.from_dict(params.to_dict()) == params


def test_explicit_params_reject_h_above_alpha():
    with pytest.raises(UsageError):
        GadgetParams.explicit(7, 2, 3, 1, epsilon="1/4")
    with pytest.raises(UsageError):
        GadgetParams.explicit(11, 2, 4, 0)  # eps = 1


def test_frontier_flags_are_monotone_in_q():
    primes = [q for q in range(5, 400) if all(q % d for d in range(2, q))]
    rows = feasibility_frontier(1, "1/2", primes)
    assert len(rows) == len(primes)
    assert not any(row["asymptotic_regime_reached"] for row in rows)
    assert monotonicity_violations(rows, ["h_below_sqrt_q", "h_below_half_sqrt_q"]) == []


def test_monotonicity_violation_is_reported():
    rows = [{"q": 5, "k": 1, "flag": True}, {"q": 7, "k": 1, "flag": False}]
    assert monotonicity_violations(rows, ["flag"]) == [("flag", 5, 7)]


def test_bad_center():
    H = build_parity_check(7, 2)
    center = bad_center(H, 3)
    assert center.y == (1, 1, 1, 0, 0, 0, 0)
    assert center.u.u == (3, 3)
    assert center.canonical
    assert not bad_center(H, 3, [1, 3, 6]).canonical
    with pytest.raises(UsageError):
        bad_center(H, 3, [1, 1, 2])


def test_reachability_matches_combinations():
    q, k, size = 11, 3, 4
    targets = power_sums((0, 2, 5, 7), k - 1, q)
    expected = [s for s in itertools.combinations(range(q), size) if power_sums(s, k - 1, q) == targets]
    reach = SubsetReachability(q, k, size)
    assert list(reach.iter_subsets(targets)) == expected
    assert reach.first(targets) == expected[0]


def test_reachability_with_forbidden_values():
    reach = SubsetReachability(7, 2, 2, forbidden=(0,))
    assert list(reach.iter_subsets((3,))) == [(1, 2), (4, 6)]
    assert not SubsetReachability(7, 2, 6, forbidden=(0,)).exists((1,))


def test_reachability_budget():
    with pytest.raises(CapacityError):
        SubsetReachability(11, 3, 4, budgets=Budgets(reachability_cap=100))


def test_enumerate_s2_golden():
    s2 = enumerate_s2(7, 2, 3)
    assert s2.members == GOLDEN_MEMBERS
    assert s2.u == (3, 3)
    assert s2.method == "combinations"
    H = build_parity_check(7, 2)
    for member in s2.members:
        assert syndrome(H, s2.indicator(member)).u == (3, 3)


def test_enumerate_s2_by_reachability():
    s2 = enumerate_s2(7, 2, 3, Budgets(enumeration_cap=10))
    assert s2.method == "reachability"
    assert s2.members == GOLDEN_MEMBERS


def test_enumerate_s2_capacity():
    with pytest.raises(CapacityError):
        enumerate_s2(7, 2, 3, Budgets(enumeration_cap=3))


def test_golden_gadget_certificate(golden_gadget):
    certificate = golden_gadget.certificate
    assert certificate["status"] == "PASS"
    assert certificate["canonical_center"]
    density = certificate["local_density"]
    assert density["clause_one"]["status"] == "PASS"
    assert density["clause_one"]["method"] == "newton_replay"
    assert density["norm_clause"]["status"] == "PASS"
    assert density["s2_size"] == 5
    assert density["s2_target"]["asserted"] is False


def test_golden_gadget_fibers(golden_gadget):
    projection = golden_gadget.certificate["projection"]
    assert projection["status"] == "PASS"
    assert projection["patterns"] == 2
    assert projection["fiber_total"] == 5
    assert projection["partition_holds"]
    assert projection["r_below_h_minus_k"] is False
    fibers = {tuple(f["pattern"]): f for f in projection["fibers"]}
    assert fibers[(0,)]["fiber_size"] == 3
    assert fibers[(1,)]["fiber_size"] == 2
    assert fibers[(1,)]["witness"] == [0, 1, 2]
    assert all(f["witness_valid"] for f in fibers.values())
    assert fibers[(0,)]["z_double_star"] == 18
    assert fibers[(0,)]["sieve_bound"] == 18
    assert all(f["sieve_holds"] for f in fibers.values())


def test_second_fiber_instance():
    gadget = build_gadget(GadgetParams.explicit(11, 3, 5, 1))
    projection = gadget.certificate["projection"]
    assert projection["status"] == "PASS"
    assert projection["fiber_total"] == len(gadget.s2)
    assert (2, 4, 7, 9, 10) in gadget.s2.members


def test_empty_fiber_fails_certificate():
    # S_2 = {{0,1,2,3}}: kein Element meidet die Position 0
    gadget = build_gadget(GadgetParams.explicit(5, 3, 4, 1))
    projection = gadget.certificate["projection"]
    assert gadget.s2.members == [(0, 1, 2, 3)]
    assert projection["empty_patterns"] == [[0]]
    assert projection["status"] == "FAILED"
    assert gadget.certificate["status"] == "FAILED"


def test_r_above_h_minus_k_is_usage_error():
    with pytest.raises(UsageError):
        build_gadget(GadgetParams.explicit(7, 2, 3, 2))


def test_projection_parallel_matches_sequential(golden_gadget):
    assert verify_projection(golden_gadget, 1, jobs=2) == verify_projection(golden_gadget, 1, jobs=1)


def test_serialize_and_reverify(tmp_path, golden_gadget):
    path = serialize_gadget(golden_gadget, tmp_path / "gadget.json")
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["schema"] == SCHEMA
    assert document["determinant"] == "49"
    assert document == json.loads(json.dumps(gadget_document(golden_gadget)))

    result = reverify_gadget(load_gadget(path))
    assert result["status"] == "PASS"
    assert result["certificate_matches"]
    assert all(result["integrity"].values())


def test_reverify_detects_tampering(tmp_path, golden_gadget):
    path = serialize_gadget(golden_gadget, tmp_path / "gadget.json")
    document = json.loads(path.read_text(encoding="utf-8"))
    document["certificate"]["projection"]["fiber_total"] = "6"
    path.write_text(json.dumps(document), encoding="utf-8")
    result = reverify_gadget(load_gadget(path))
    assert result["status"] == "FAILED"
    assert result["mismatched_sections"] == ["projection"]


def test_reverify_detects_tampered_basis(tmp_path, golden_gadget):
    path = serialize_gadget(golden_gadget, tmp_path / "gadget.json")
    document = json.loads(path.read_text(encoding="utf-8"))
    document["basis"][0][0] = str(int(document["basis"][0][0]) + 1)
    path.write_text(json.dumps(document), encoding="utf-8")
    result = reverify_gadget(load_gadget(path))
    assert result["status"] == "FAILED"
    assert not result["integrity"]["columns_in_kernel"]
    assert not result["integrity"]["determinant_matches"]
    assert not result["integrity"]["canonical_basis"]


def test_load_gadget_errors(tmp_path):
    with pytest.raises(GadgetFileError):
        load_gadget(tmp_path / "fehlt.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "gadget-v0"}', encoding="utf-8")
    with pytest.raises(GadgetFileError):
        load_gadget(bad)
    bad.write_text("kein json", encoding="utf-8")
    with pytest.raises(GadgetFileError):
        load_gadget(bad)
