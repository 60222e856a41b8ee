import random

import pytest

from relpoly import (
    GRAPH_SIG,
    SignatureError,
    copies,
    disjoint_union,
    hom,
    hom_count,
    ind,
    ind_count,
    induced,
    inj,
    inj_count,
    make_structure,
    mobius,
    quotient,
    set_partitions,
    sig,
    super_patterns,
)
from relpoly.counting import gaifman_components, validate_partition

from genutil import K1, K2, K3, P3, graph, random_graph, random_structure


def test_hom_examples():
    assert hom(K2, K3) == 6
    assert hom(P3, K3) == 12  # proper-coloring count n(n-1)^2 at n=3
    assert hom(K3, make_structure(GRAPH_SIG, 0)) == 0
    assert hom(make_structure(GRAPH_SIG, 0), K3) == 1
    report = hom_count(K2, K3)
    assert report.mode == "hom" and report.nodes_explored > 0


def test_inj_examples():
    assert inj(K2, K3) == 6
    assert inj(graph(2, []), K1) == 0
    assert inj(K1, K3) == 3
    assert inj_count(K3, K2).value == 0


def test_ind_examples():
    assert ind(K2, K3) == 6
    assert ind(graph(2, []), K3) == 0
    assert ind(K1, K3) == 3
    assert ind_count(P3, K3).value == 0


def test_signature_alignment_by_name():
    r_edge = make_structure(sig(("R", 2)), 2, {"R": [(0, 1), (1, 0)]})
    assert hom(r_edge, K3) == 0  # no R relation in the target
    lifted_target = make_structure(
        sig(("E", 2), ("R", 2)), 3,
        {"E": K3.rel("E"), "R": K3.rel("E")},
    )
    assert hom(r_edge, lifted_target) == 6
    with pytest.raises(SignatureError):
        hom(make_structure(sig(("E", 1)), 1, {"E": [(0,)]}), K3)


def test_quotient():
    loop = quotient(K2, [(0, 1)])
    assert loop.domain == 1 and loop.rel("E") == ((0, 0),)
    assert quotient(P3, [(0,), (1,), (2,)]) == P3
    folded = quotient(P3, [(0, 2), (1,)])
    assert folded.domain == 2
    assert (0, 0) not in folded.rel("E") and len(folded.rel("E")) == 2
    with pytest.raises(SignatureError):
        quotient(K2, [(0,)])
    with pytest.raises(SignatureError):
        quotient(K2, [(0, 1), (1,)])
    assert validate_partition([(1,), (0,)], 2) == ((0,), (1,))


def test_mobius():
    assert mobius(((0,), (1,), (2,))) == 1
    assert mobius(((0, 1), (2,))) == -1
    assert mobius(((0, 1, 2),)) == 2
    assert mobius(((0, 1, 2, 3),)) == -6


def test_set_partitions_counts():
    assert len(list(set_partitions(0))) == 1
    assert len(list(set_partitions(3))) == 5
    assert len(list(set_partitions(5))) == 52
    for theta in set_partitions(4):
        assert sorted(v for block in theta for v in block) == [0, 1, 2, 3]
        assert list(theta) == sorted(theta, key=min)


def test_inversion_identities_random():
    rng = random.Random(42)
    for _ in range(12):
        f = random_graph(rng, rng.randrange(1, 5))
        a = random_graph(rng, rng.randrange(1, 6))
        homv, injv, indv = hom(f, a), inj(f, a), ind(f, a)
        assert indv <= injv <= homv
        assert homv == sum(inj(quotient(f, th), a) for th in set_partitions(f.domain))
        assert injv == sum(
            mobius(th) * hom(quotient(f, th), a) for th in set_partitions(f.domain)
        )
        assert injv == sum(ind(g, a) for g, _ in super_patterns(f, closure="simple"))
        assert indv == sum(
            (-1) ** k * inj(g, a) for g, k in super_patterns(f, closure="simple")
        )


def test_inversion_identities_general_relations():
    # loops and asymmetric tuples included; full tuple-lattice closure
    rng = random.Random(43)
    sig_r = sig(("R", 2))
    for _ in range(10):
        f = random_structure(rng, sig_r, rng.randrange(1, 4))
        a = random_structure(rng, sig_r, rng.randrange(1, 5))
        assert inj(f, a) == sum(ind(g, a) for g, _ in super_patterns(f))
        assert ind(f, a) == sum((-1) ** k * inj(g, a) for g, k in super_patterns(f))


def test_hom_multiplicative_over_components():
    rng = random.Random(44)
    for _ in range(8):
        f = disjoint_union(random_graph(rng, 3), random_graph(rng, 2))
        a = random_graph(rng, 5)
        total = 1
        for comp in gaifman_components(f):
            total *= hom(induced(f, comp), a)
        assert hom(f, a) == total


def test_hom_additive_over_disjoint_union_for_connected():
    rng = random.Random(45)
    a = random_graph(rng, 4)
    b = random_graph(rng, 5)
    both = disjoint_union(a, b)
    for f in (K2, K3, P3):
        assert hom(f, both) == hom(f, a) + hom(f, b)


def test_hom_into_copies():
    rng = random.Random(46)
    a = random_graph(rng, 4, 0.5)
    m = 3
    blown = copies(a, m)
    for f in (K2, P3, K3):
        assert hom(f, blown) == m * hom(f, a)
    f = disjoint_union(K2, K2)
    assert hom(f, blown) == (m * hom(K2, a)) ** 2
    assert copies(a, 0).domain == 0


def test_counts_agree_with_full_enumeration():
    from itertools import product as iproduct

    rng = random.Random(47)
    for _ in range(8):
        f = random_graph(rng, rng.randrange(1, 4))
        a = random_graph(rng, rng.randrange(1, 5))
        fa, aa = set(f.rel("E")), set(a.rel("E"))
        brute_hom = brute_inj = brute_ind = 0
        for image in iproduct(range(a.domain), repeat=f.domain):
            preserves = all((image[u], image[v]) in aa for u, v in fa)
            if preserves:
                brute_hom += 1
                if len(set(image)) == f.domain:
                    brute_inj += 1
                    induced_exactly = all(
                        ((image[u], image[v]) in aa) == ((u, v) in fa)
                        for u in range(f.domain)
                        for v in range(f.domain)
                    )
                    if induced_exactly:
                        brute_ind += 1
        assert hom_count(f, a).value == brute_hom
        assert inj_count(f, a).value == brute_inj
        assert ind_count(f, a).value == brute_ind
