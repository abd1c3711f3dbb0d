"""
Tests Reed-Solomon-Gitter
=========================
"""

import itertools

import numpy as np
import pytest

from gadget_errors import CapacityError, GadgetFileError, UsageError
from lab_config import Budgets
from rs_lattice import (SignedMultisetSearch, build_lattice, build_parity_check, contains, export_lattice,
                        hamming_min_distance_bound, kernel_generators, load_lattice, min_distance_bruteforce,
                        norm_power, same_span, syndrome, verify_bp_lemma)


def test_parity_check_entries():
    H = build_parity_check(5, 3)
    assert H.entries[0] == (1, 1, 1, 1, 1)  # 0^0 = 1
    assert H.entries[1] == (0, 1, 2, 3, 4)
    assert H.entries[2] == (0, 1, 4, 4, 1)
    assert H.column(2) == (1, 2, 4)


@pytest.mark.parametrize("q, k", [(4, 2), (7, 7), (7, 1), (7, 0)])
def test_invalid_parameters(q, k):
    with pytest.raises(UsageError):
        build_parity_check(q, k)


def test_kernel_generators_lie_in_kernel():
    H = build_parity_check(11, 4)
    generators = kernel_generators(H)
    assert len(generators) == 11 - 4
    for vector in generators:
        assert syndrome(H, vector).is_zero()


@pytest.mark.parametrize("q, k", [(5, 2), (7, 3), (11, 4), (13, 6)])
def test_determinant_and_basis_shape(q, k):
    lattice = build_lattice(q, k)
    assert lattice.determinant == q ** k
    assert lattice.dimension == q
    matrix = lattice.basis.matrix()
    assert [matrix[i, i] for i in range(q)] == [q] * k + [1] * (q - k)
    assert all(matrix[r, c] == 0 for c in range(q) for r in range(c + 1, q))
    for column in lattice.basis.columns:
        assert contains(lattice, column)


def test_basis_generates_the_same_lattice():
    assert same_span(build_lattice(7, 3))


def test_membership_by_syndrome():
    lattice = build_lattice(7, 2)
    assert contains(lattice, [1, -1, -1, 1, 0, 0, 0])  # {0,3} gegen {1,2}
    assert contains(lattice, [7, 0, 0, 0, 0, 0, 0])
    assert not contains(lattice, [1, -1, 0, 0, 0, 0, 0])


def test_syndrome_length_checked():
    with pytest.raises(UsageError):
        syndrome(build_parity_check(7, 2), [1, 0])


def test_hamming_bound():
    assert hamming_min_distance_bound(7, 3) == 4


def test_norm_power():
    assert norm_power([1, -2, 0, 3], 1) == 6
    assert norm_power([1, -2, 0, 3], 2) == 14
    with pytest.raises(UsageError):
        norm_power([1, 1], "3/2")


@pytest.mark.parametrize("q, k", [(7, 3), (11, 4), (13, 2)])
def test_p_norm_dominates_l1_root_on_lattice_vectors(q, k):
    # ||x||_p >= ||x||_1^{1/p}  <=>  ||x||_p^p >= ||x||_1 für ganzzahlige x
    lattice = build_lattice(q, k)
    basis = np.array(lattice.basis.columns, dtype=np.int64)
    rng = np.random.default_rng(q * 100 + k)
    for _ in range(200):
        coefficients = rng.integers(-3, 4, size=q)
        vector = [int(v) for v in coefficients @ basis]
        assert contains(lattice, vector)
        l1 = norm_power(vector, 1)
        for p in (2, 3, 4):
            assert norm_power(vector, p) >= l1, (vector, p)


def test_export_and_load(tmp_path):
    lattice = build_lattice(7, 3)
    text = export_lattice(lattice)
    assert text.splitlines()[0] == "7 3 7 343"
    path = tmp_path / "lattice.txt"
    path.write_text(text, encoding="utf-8")
    assert load_lattice(path) == lattice
    assert load_lattice(text) == lattice


def test_load_errors(tmp_path):
    with pytest.raises(GadgetFileError):
        load_lattice(tmp_path / "fehlt.txt")
    with pytest.raises(GadgetFileError):
        load_lattice("7 2 7 49\n1 2\n")


def test_min_distance_q7_k2():
    lattice = build_lattice(7, 2)
    report = min_distance_bruteforce(lattice, 1)
    assert report.exact
    assert report.l1_min == 4
    assert report.value_p_power == 4
    assert contains(lattice, report.witness)
    assert report.certificate() == "lambda^(1)^1 = 4"


def test_min_distance_q7_k3_radius_six():
    lattice = build_lattice(7, 3)
    report = min_distance_bruteforce(lattice, 1, radius_cap=6)
    assert report.exact
    assert report.l1_min == 6
    assert list(report.witness) == [3, -1, -1, 0, -1, 0, 0]  # {0,0,0} gegen {1,2,4}
    assert contains(lattice, report.witness)


def test_min_distance_p2_matches_l1_when_entries_are_units():
    report = min_distance_bruteforce(build_lattice(7, 2), 2)
    assert report.exact
    assert report.value_p_power == 4


def test_min_distance_beyond_half_q():
    # 2k > q: der Vektor (1, ..., 1) hat l1 = q < 2k
    lattice = build_lattice(7, 4)
    report = min_distance_bruteforce(lattice, 1)
    assert report.l1_min == 7
    assert report.exact
    assert contains(lattice, report.witness)


def test_fractional_p_only_lower_bound():
    report = min_distance_bruteforce(build_lattice(7, 2), "3/2")
    assert not report.exact
    assert report.value_p_power is None
    assert report.lower_bound_p_power == 4


def test_radius_too_small_gives_lower_bound():
    report = min_distance_bruteforce(build_lattice(11, 3), 1, radius_cap=3)
    assert report.l1_min is None
    assert not report.exact
    assert report.lower_bound_p_power == 4
    assert report.certificate() == "lambda^(1)^1 >= 4"


def test_search_respects_enumeration_budget():
    tight = Budgets(enumeration_cap=10)
    with pytest.raises(CapacityError):
        min_distance_bruteforce(build_lattice(11, 3), 1, budgets=tight)


def test_size_pairs_include_multiples_of_q():
    search = SignedMultisetSearch(build_lattice(5, 2), 10)
    assert list(search.size_pairs(4)) == [(2, 2)]
    assert (5, 0) in list(search.size_pairs(5))
    assert (6, 1) in list(search.size_pairs(7))


def _naive_short_vectors(q, k, bound):
    """Alle Vektoren mit Einträgen in [-2, 2] und l1 < bound, direkt per Syndrom"""
    H = build_parity_check(q, k)
    found = []
    for vector in itertools.product(range(-2, 3), repeat=q):
        l1 = sum(abs(v) for v in vector)
        if 0 < l1 < bound and syndrome(H, vector).is_zero():
            found.append(vector)
    return found


def test_bp_lemma_against_naive_oracle():
    assert _naive_short_vectors(5, 2, 4) == []
    report = verify_bp_lemma(build_lattice(5, 2))
    assert report.passed
    assert report.searched_radius == 3


@pytest.mark.parametrize("q, k", [(7, 2), (7, 3), (11, 3), (11, 5), (13, 4)])
def test_bp_lemma_passes(q, k):
    report = verify_bp_lemma(build_lattice(q, k))
    assert report.status == "PASS"
    assert report.witnesses == []
    assert report.multisets_enumerated > 0


def test_bp_lemma_requires_two_k_at_most_q():
    with pytest.raises(UsageError):
        verify_bp_lemma(build_lattice(7, 4))
