import math

import numpy as np
import pytest

from infocore.errors import EmptyProfileError
from infocore.graph import InteractionList, build_graph, split_train_probe
from infocore.recommend import (AlgorithmSpec, ScoreVector, hybrid_scores,
                                knnmd_scores, make_scorer, md_scores,
                                select_neighbors, top_l, ucf_scores)
from infocore.similarity import top_n_table
from oracles import (dense_adjacency, diffusion_oracle, profiles_of,
                     random_graph, restricted_diffusion_oracle, table_oracle,
                     ucf_oracle)

SQ3 = 1 / math.sqrt(3)


# ---------------------------------------------------------------- diffusion

def test_md_g1_frozen(g1):
    scores = md_scores(g1, 0).scores
    assert scores == pytest.approx(
        [13 / 18, 67 / 72, 47 / 72, 35 / 72, 5 / 24], abs=1e-15)
    # uncollected ranking: o4 above o5
    assert scores[3] > scores[4]


def test_md_conservation_g1(g1):
    assert md_scores(g1, 0).scores.sum() == pytest.approx(3.0, abs=1e-12)


def test_md_single_user_star():
    g = build_graph(InteractionList(pairs=(("u1", "o1"),)))
    assert md_scores(g, 0).scores.tolist() == [1.0]


def test_md_empty_profile_raises(g1):
    for seed in range(200):
        split = split_train_probe(g1, 0.8, seed=seed)
        if split.train.user_degrees[3] == 0:
            with pytest.raises(EmptyProfileError):
                md_scores(split.train, 3)
            return
    pytest.fail("no split dropped u4's link")


def test_md_target_range(g1):
    with pytest.raises(ValueError):
        md_scores(g1, 99)


def test_md_matches_oracle_random():
    rng = np.random.default_rng(314)
    for _ in range(60):
        g = random_graph(rng)
        A = dense_adjacency(g)
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            got = md_scores(g, target).scores
            want = diffusion_oracle(A, target, 1.0)
            assert np.max(np.abs(got - want)) < 1e-12
            assert got.min() >= 0.0
            assert got.sum() == pytest.approx(g.user_degrees[target], abs=1e-12)


def test_hybrid_lambda1_equals_md(g1):
    rng = np.random.default_rng(11)
    graphs = [g1] + [random_graph(rng) for _ in range(20)]
    for g in graphs:
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            a = md_scores(g, target).scores
            b = hybrid_scores(g, target, 1.0).scores
            assert np.max(np.abs(a - b)) < 1e-12


def test_hybrid_lambda0_g1_frozen(g1):
    # heat conduction on G1 for u1, verified against the dense-matrix oracle
    scores = hybrid_scores(g1, 0, 0.0).scores
    assert scores == pytest.approx(
        [5 / 6, 13 / 18, 3 / 4, 7 / 12, 1 / 4], abs=1e-15)


def test_hybrid_matches_oracle_random():
    rng = np.random.default_rng(272)
    for _ in range(40):
        g = random_graph(rng)
        A = dense_adjacency(g)
        lam = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            got = hybrid_scores(g, target, lam).scores
            want = diffusion_oracle(A, target, lam)
            assert np.max(np.abs(got - want)) < 1e-12


def test_hybrid_lambda_validation(g1):
    for lam in (-0.1, 1.1):
        with pytest.raises(ValueError):
            hybrid_scores(g1, 0, lam)


def test_full_profile_gives_empty_list():
    g = build_graph(InteractionList(pairs=(
        ("a", "x"), ("a", "y"), ("b", "x"))))
    scores = hybrid_scores(g, 0, 0.5)
    rec = top_l(scores, g.objects_of(0), L=3)
    assert rec.items.size == 0


# ----------------------------------------------------------- select_neighbors

def test_select_similarity_k1(g1):
    table = top_n_table(g1, 10)
    sel = select_neighbors(g1, 0, K=1, strategy="similarity", table=table)
    assert sel.chosen.tolist() == [1]


def test_select_resource_tie(g1):
    # h(u2) = h(u3) = 5/6; ascending id wins
    sel = select_neighbors(g1, 0, K=1, strategy="resource")
    assert sel.chosen.tolist() == [1]


def test_select_degree(g1):
    sel = select_neighbors(g1, 0, K=1, strategy="degree")
    assert sel.chosen.tolist() == [2]  # u3 has degree 4


def test_select_pool_exhaustion(g1):
    table = top_n_table(g1, 10)
    for strategy in ("random", "degree", "resource", "similarity"):
        sel = select_neighbors(g1, 0, K=10, strategy=strategy,
                               table=table, seed=5)
        assert sel.chosen.tolist() == [1, 2]


def test_select_random_seeded(g1):
    a = select_neighbors(g1, 0, K=1, strategy="random", seed=7)
    b = select_neighbors(g1, 0, K=1, strategy="random", seed=7)
    assert a.chosen.tolist() == b.chosen.tolist()
    assert set(a.chosen.tolist()) <= {1, 2}
    with pytest.raises(ValueError):
        select_neighbors(g1, 0, K=1, strategy="random")


def test_select_validation(g1):
    with pytest.raises(ValueError):
        select_neighbors(g1, 0, K=0, strategy="degree")
    with pytest.raises(ValueError):
        select_neighbors(g1, 0, K=1, strategy="nope")
    with pytest.raises(ValueError):
        select_neighbors(g1, 0, K=1, strategy="similarity")  # no table
    table = top_n_table(g1, 2)
    with pytest.raises(ValueError):
        select_neighbors(g1, 0, K=3, strategy="similarity", table=table)


def test_select_all_users_mode(g1):
    sel = select_neighbors(g1, 0, K=10, strategy="degree", all_users=True)
    assert sel.chosen.tolist() == [1, 2, 3]  # u4 shares nothing but is eligible


def test_select_excludes_target(g1):
    for strategy in ("degree", "resource"):
        sel = select_neighbors(g1, 0, K=10, strategy=strategy)
        assert 0 not in sel.chosen.tolist()


# ------------------------------------------------------------------- knnmd

def test_knnmd_g1_frozen(g1):
    table = top_n_table(g1, 10)
    sel = select_neighbors(g1, 0, K=1, strategy="similarity", table=table)
    scores = knnmd_scores(g1, 0, sel).scores
    assert scores == pytest.approx([5 / 18, 5 / 18, 0, 5 / 18, 0], abs=1e-15)
    # o4 alone is positive among uncollected objects; o5 enters as padding
    rec = top_l(ScoreVector(0, scores), g1.objects_of(0), L=5)
    assert rec.items.tolist() == [3, 4]
    assert rec.n_padded == 1
    assert top_l(ScoreVector(0, scores), g1.objects_of(0), L=1).items.tolist() == [3]


def test_knnmd_full_pool_equals_md_uncollected():
    rng = np.random.default_rng(555)
    for _ in range(50):
        g = random_graph(rng)
        table = top_n_table(g, g.n)
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            sel = select_neighbors(g, target, K=g.n, strategy="similarity",
                                   table=table)
            restricted = knnmd_scores(g, target, sel).scores
            full = md_scores(g, target).scores
            uncollected = np.setdiff1d(np.arange(g.m), g.objects_of(target))
            assert np.array_equal(restricted[uncollected], full[uncollected])


def test_knnmd_empty_selection_zero(g1):
    from infocore.recommend import NeighborSelection
    sel = NeighborSelection(strategy="random", K=3,
                            chosen=np.empty(0, dtype=np.int64), seed=1)
    scores = knnmd_scores(g1, 0, sel).scores
    assert not scores.any()
    rec = top_l(ScoreVector(0, scores), g1.objects_of(0), L=3)
    assert rec.items.size == 0


def test_knnmd_matches_restricted_oracle():
    rng = np.random.default_rng(808)
    for _ in range(40):
        g = random_graph(rng)
        A = dense_adjacency(g)
        table = top_n_table(g, g.n)
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            K = int(rng.integers(1, g.n + 1))
            sel = select_neighbors(g, target, K=K, strategy="similarity",
                                   table=table)
            got = knnmd_scores(g, target, sel).scores
            want = restricted_diffusion_oracle(A, target, sel.chosen.tolist())
            assert np.max(np.abs(got - want)) < 1e-12


# --------------------------------------------------------------------- ucf

def test_ucf_g1_k2(g1):
    table = top_n_table(g1, 2)
    scores = ucf_scores(g1, 0, K=2, table=table).scores
    want = [2 / 3, 2 / 3 + SQ3, SQ3, 2 / 3 + SQ3, SQ3]
    assert scores == pytest.approx(want, abs=1e-12)
    assert scores[3] == pytest.approx(1.2440169358562925, abs=1e-12)
    rec = top_l(ScoreVector(0, scores), g1.objects_of(0), L=2)
    assert rec.items.tolist() == [3, 4]


def test_ucf_u4_k1(g1):
    table = top_n_table(g1, 2)
    scores = ucf_scores(g1, 3, K=1, table=table).scores
    assert scores == pytest.approx([0, 0.5, 0.5, 0.5, 0.5], abs=1e-15)
    rec = top_l(ScoreVector(3, scores), g1.objects_of(3), L=3)
    assert rec.items.tolist() == [1, 2, 3]  # id tie-break, o5 collected


def test_ucf_k_exceeds_table(g1):
    table = top_n_table(g1, 2)
    with pytest.raises(ValueError):
        ucf_scores(g1, 0, K=3, table=table)


def test_ucf_empty_table_entry(g1):
    for seed in range(200):
        split = split_train_probe(g1, 0.8, seed=seed)
        if split.train.user_degrees[3] == 0:
            table = top_n_table(split.train, 2)
            assert not ucf_scores(split.train, 3, K=2, table=table).scores.any()
            return
    pytest.fail("no split dropped u4's link")


def test_ucf_matches_bruteforce():
    rng = np.random.default_rng(606)
    for _ in range(50):
        g = random_graph(rng)
        A = dense_adjacency(g)
        N = int(rng.integers(1, 8))
        K = int(rng.integers(1, N + 1))
        table = top_n_table(g, N)
        expected_lists = table_oracle(profiles_of(g), N)
        for target in range(g.n):
            got = ucf_scores(g, target, K=K, table=table).scores
            want = ucf_oracle(A, expected_lists[target][:K])
            assert np.max(np.abs(got - want)) < 1e-12


# -------------------------------------------------------------------- top_l

def test_top_l_g1_md(g1):
    rec = top_l(md_scores(g1, 0), g1.objects_of(0), L=1)
    assert rec.items.tolist() == [3]
    assert rec.n_padded == 0


def test_top_l_filters_profile(g1):
    rec = top_l(md_scores(g1, 0), g1.objects_of(0), L=5)
    assert set(rec.items.tolist()) == {3, 4}


def test_top_l_tie_by_id(g1):
    scores = ScoreVector(0, np.array([0.0, 0.0, 0.0, 0.5, 0.5]))
    rec = top_l(scores, g1.objects_of(0), L=2)
    assert rec.items.tolist() == [3, 4]


def test_top_l_padding_flagged(g1):
    scores = ScoreVector(3, np.array([0.7, 0.0, 0.0, 0.0, 0.0]))
    rec = top_l(scores, g1.objects_of(3), L=3)
    assert rec.items.tolist() == [0, 1, 2]
    assert rec.n_padded == 2


def test_top_l_all_zero_empty(g1):
    scores = ScoreVector(0, np.zeros(5))
    rec = top_l(scores, g1.objects_of(0), L=3)
    assert rec.items.size == 0


def test_top_l_validation(g1):
    with pytest.raises(ValueError):
        top_l(md_scores(g1, 0), g1.objects_of(0), L=0)


# ------------------------------------------------------------ cross-cutting

def test_scores_nonnegative_random():
    rng = np.random.default_rng(123)
    for _ in range(20):
        g = random_graph(rng)
        table = top_n_table(g, g.n)
        for target in range(g.n):
            if g.user_degrees[target] == 0:
                continue
            assert md_scores(g, target).scores.min() >= 0
            assert hybrid_scores(g, target, 0.3).scores.min() >= 0
            assert ucf_scores(g, target, K=1, table=table).scores.min() >= 0


def test_zero_degree_objects_score_zero(g1):
    # objects that only exist in the probe keep score 0 in training
    for seed in range(200):
        split = split_train_probe(g1, 0.8, seed=seed)
        dead = np.flatnonzero(split.train.object_degrees == 0)
        if dead.size == 0:
            continue
        for target in range(split.train.n):
            if split.train.user_degrees[target] == 0:
                continue
            assert not md_scores(split.train, target).scores[dead].any()
            assert not hybrid_scores(split.train, target, 0.4).scores[dead].any()
        return
    pytest.fail("no split produced a zero-degree object")


def test_algorithm_spec_parse_roundtrip():
    cases = {
        "md": "md",
        "hybrid:lambda=0.8": "hybrid(lambda=0.8)",
        "hybrid": "hybrid(lambda=0.8)",
        "knnmd:K=20": "knnmd(strategy=similarity,K=20)",
        "knnmd:strategy=degree,K=5": "knnmd(strategy=degree,K=5)",
        "ucf:K=10": "ucf(K=10)",
    }
    for text, label in cases.items():
        assert AlgorithmSpec.parse(text).label() == label
    for bad in ("md:K=3", "hybrid:lambda=2", "knnmd", "ucf", "nope",
                "knnmd:strategy=best,K=2"):
        with pytest.raises(ValueError):
            AlgorithmSpec.parse(bad)


def test_make_scorer_matches_public_ops(g1):
    table = top_n_table(g1, 10)
    md = make_scorer(g1, AlgorithmSpec.parse("md"))
    assert np.array_equal(md(0).scores, md_scores(g1, 0).scores)
    hyb = make_scorer(g1, AlgorithmSpec.parse("hybrid:lambda=0.25"))
    assert np.array_equal(hyb(0).scores, hybrid_scores(g1, 0, 0.25).scores)
    ucf = make_scorer(g1, AlgorithmSpec.parse("ucf:K=2"), table=table)
    assert np.array_equal(ucf(0).scores, ucf_scores(g1, 0, 2, table).scores)
    knn = make_scorer(g1, AlgorithmSpec.parse("knnmd:K=1"), table=table)
    sel = select_neighbors(g1, 0, K=1, strategy="similarity", table=table)
    assert np.array_equal(knn(0).scores, knnmd_scores(g1, 0, sel).scores)
