import numpy as np
import pytest

from hyperbulk import quotient
from hyperbulk.errors import ResourceLimitError
from hyperbulk.triangle import GEN_A, GEN_B

from conftest import QUOTIENT_ORDERS


@pytest.mark.parametrize("p,q", sorted(QUOTIENT_ORDERS))
def test_quotient_orders_mod_2(p, q):
    group = quotient.build_quotient(p, q, 2, 1)
    assert group.order == QUOTIENT_ORDERS[(p, q)]


def test_torsion_audit_flags_collapses():
    # {5,4} mod 2 keeps the full rotation orders
    g54 = quotient.build_quotient(5, 4, 2, 1)
    assert g54.torsion_preserved
    orders = {name: v["order"] for name, v in g54.torsion.items()}
    assert orders == {"A": 5, "B": 4, "AB": 2}
    # {6,6} mod 2 halves both rotation orders; the audit must say so
    g66 = quotient.build_quotient(6, 6, 2, 1)
    assert not g66.torsion_preserved
    orders = {name: v["order"] for name, v in g66.torsion.items()}
    assert orders == {"A": 3, "B": 3, "AB": 2}
    # {8,4} and {8,6} collapse partially
    g84 = quotient.build_quotient(8, 4, 2, 1)
    assert {n: v["order"] for n, v in g84.torsion.items()} == {"A": 4, "B": 4, "AB": 2}
    g86 = quotient.build_quotient(8, 6, 2, 1)
    assert {n: v["order"] for n, v in g86.torsion.items()} == {"A": 8, "B": 3, "AB": 2}


def test_group_axioms_via_permutations(q54_k1):
    g = q54_k1
    n = g.order
    for t in range(4):
        perm = g.gen_perm[t]
        assert np.array_equal(np.sort(perm), np.arange(n))  # bijective
    # inverse table really inverts
    for t, tinv in ((GEN_A, 1), (GEN_B, 3)):
        assert np.array_equal(g.gen_perm[tinv][g.gen_perm[t]], np.arange(n))
    assert np.array_equal(g.inv[g.inv], np.arange(n))
    assert g.inv[0] == 0


def test_left_and_right_actions_commute(q54_k1):
    g = q54_k1
    rng = np.random.default_rng(7)
    for _ in range(20):
        i = int(rng.integers(g.order))
        right = g.gen_perm[GEN_A]
        left = g.left_perm[GEN_B]
        assert left[right[i]] == right[left[i]]


def test_identity_word_and_projection(q54_k1):
    g = q54_k1
    assert g.project(()) == 0
    # A^5 collapses to the identity coset
    assert g.project((GEN_A,) * 5) == 0
    assert g.project((GEN_B,) * 4) == 0
    i = g.project((GEN_A, GEN_B))
    assert g.element_order(i) == 2


def test_element_orders_divide_group_order(q54_k1):
    g = q54_k1
    rng = np.random.default_rng(3)
    for i in rng.integers(0, g.order, size=12):
        assert g.order % g.element_order(int(i)) == 0


def test_coherence_surjection(q54_k1, q54_k2):
    red = q54_k2.reduce_to(q54_k1)
    assert red.shape == (q54_k2.order,)
    assert set(np.unique(red)) == set(range(q54_k1.order))
    # reduction is a homomorphism on generator moves
    rng = np.random.default_rng(5)
    for t in range(4):
        idx = rng.integers(0, q54_k2.order, size=40)
        assert np.array_equal(
            red[q54_k2.gen_perm[t][idx]], q54_k1.gen_perm[t][red[idx]]
        )


def test_element_cap_enforced():
    with pytest.raises(ResourceLimitError):
        quotient.build_quotient(5, 4, 2, 2, element_cap=100)


def test_save_load_round_trip(tmp_path, q54_k1):
    path = str(tmp_path / "g.npz")
    q54_k1.save(path)
    loaded = quotient.QuotientGroup.load(path)
    assert loaded.order == q54_k1.order
    assert np.array_equal(loaded.gen_perm, q54_k1.gen_perm)
    assert np.array_equal(loaded.inv, q54_k1.inv)
    assert loaded.torsion == q54_k1.torsion
    assert loaded.word(5) == q54_k1.word(5)
