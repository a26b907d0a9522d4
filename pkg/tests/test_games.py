import hashlib
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import softeq
from softeq import (
    StrategyProfile,
    UtilityTransform,
    build_graphical,
    build_normal_form,
    data_path,
    from_bimatrix,
    game_from_json,
    game_to_json,
    induce_normal_form,
    load_game,
    parse_transform,
    per_player_expected_payoff,
    raw_action_values,
    save_game,
    transform_utilities,
    unilateral_payoffs,
)

DATA_CHECKSUMS = {
    "prisoners_dilemma.json": "da447c1fa823dd472663b5d6e6bfd32e1835e8ff0466f904e7703e4a5c9f6876",
    "five_by_five.json": "df90412151bc4ce4357365523a912ec4ead86bdd9389a85b7530c942564c535c",
    "separable_pair.json": "f3454ccc53b4b86635c583f52e77c68234cff2844038bedf9db9c1e33c9e961e",
}


def test_bundled_data_checksums():
    for name, expected in DATA_CHECKSUMS.items():
        digest = hashlib.sha256(data_path(name).read_bytes()).hexdigest()
        assert digest == expected, name


def test_bundled_prisoners_dilemma_entries(pd_game):
    assert pd_game.action_counts == (2, 2)
    np.testing.assert_array_equal(pd_game.payoffs[0], [[3, 1], [4, 2]])
    np.testing.assert_array_equal(pd_game.payoffs[1], [[3, 4], [1, 2]])


def test_bundled_five_by_five_shape(five_game):
    assert five_game.action_counts == (5, 5)
    assert float(min(t.min() for t in five_game.payoffs)) == -2.0


# ---------------------------------------------------------------------------
# strategy profiles


def test_uniform_profile():
    p = StrategyProfile.uniform((2, 4))
    assert len(p) == 2
    np.testing.assert_allclose(p[0], [0.5, 0.5])
    np.testing.assert_allclose(p[1], [0.25] * 4)


def test_point_mass_profile():
    p = StrategyProfile.point_mass((3, 2), (1, 0))
    assert p.is_point_mass()
    assert p.to_joint_action() == (1, 0)
    np.testing.assert_array_equal(p[0], [0.0, 1.0, 0.0])


def test_mixed_profile_has_no_joint_action():
    p = StrategyProfile.uniform((2, 2))
    assert not p.is_point_mass()
    with pytest.raises(ValueError):
        p.to_joint_action()


def test_profile_rejects_bad_distributions():
    with pytest.raises(ValueError):
        StrategyProfile((np.array([0.5, 0.6]),))
    with pytest.raises(ValueError):
        StrategyProfile((np.array([-0.1, 1.1]),))
    with pytest.raises(ValueError):
        StrategyProfile((np.array([np.nan, 1.0]),))
    with pytest.raises(ValueError):
        StrategyProfile((np.array([[0.5, 0.5]]),))
    with pytest.raises(ValueError):
        StrategyProfile((np.array([]),))


def test_profile_is_immutable():
    p = StrategyProfile.uniform((2,))
    with pytest.raises(ValueError):
        p[0][0] = 0.9


def test_random_interior_profile():
    rng = np.random.default_rng(3)
    p = StrategyProfile.random_interior((3, 5), rng)
    for dist in p.distributions:
        assert (np.asarray(dist) > 0).all()
        assert float(np.sum(dist)) == pytest.approx(1.0, abs=1e-12)


def test_profile_distance():
    a = StrategyProfile.uniform((2, 2))
    b = StrategyProfile.point_mass((2, 2), (0, 1))
    assert a.distance(b) == pytest.approx(0.5)
    assert a.distance(a) == 0.0


# ---------------------------------------------------------------------------
# game construction


def test_build_normal_form_accepts_flat_tables():
    g = build_normal_form([2, 2], [[3, 1, 4, 2], [3, 4, 1, 2]])
    np.testing.assert_array_equal(g.payoffs[0], [[3, 1], [4, 2]])
    assert g.joint_action_count == 4


def test_build_normal_form_rejects_wrong_size():
    with pytest.raises(ValueError):
        build_normal_form([2, 2], [[1, 2, 3], [1, 2, 3]])
    with pytest.raises(ValueError):
        build_normal_form([2, 2], [np.zeros((2, 2))])


def test_from_bimatrix_matches_build(pd_game):
    g = from_bimatrix([[3, 1], [4, 2]], [[3, 4], [1, 2]])
    for mine, ref in zip(g.payoffs, pd_game.payoffs):
        np.testing.assert_array_equal(mine, ref)


def test_build_graphical_validation():
    t = np.zeros((2, 2))
    with pytest.raises(ValueError):
        build_graphical([2, 2], [(0, 0)], {(0, 0): t})
    with pytest.raises(ValueError):
        build_graphical([2, 2], [(0, 1)], {(0, 1): t})
    with pytest.raises(ValueError):
        build_graphical([2, 3], [(0, 1)], {(0, 1): t, (1, 0): t.T})
    ok = build_graphical([2, 3], [(0, 1)], {(0, 1): np.zeros((2, 3)), (1, 0): np.zeros((3, 2))})
    assert ok.neighbors[0] == (1,)


def test_induce_normal_form_matches_pairwise_sum():
    rng = np.random.default_rng(0)
    t01 = rng.normal(size=(2, 3))
    t12 = rng.normal(size=(3, 2))
    g = build_graphical(
        [2, 3, 2],
        [(0, 1), (1, 2)],
        {(0, 1): t01, (1, 0): t01.T, (1, 2): t12, (2, 1): t12.T},
    )
    dense = induce_normal_form(g)
    for x0 in range(2):
        for x1 in range(3):
            for x2 in range(2):
                assert dense.payoffs[1][x0, x1, x2] == pytest.approx(
                    t01.T[x1, x0] + t12[x1, x2]
                )
                assert dense.payoffs[0][x0, x1, x2] == pytest.approx(t01[x0, x1])


def test_induce_normal_form_guards_joint_size():
    n = 30
    edges = [(i, i + 1) for i in range(n - 1)]
    tables = {}
    for i, j in edges:
        tables[(i, j)] = np.zeros((3, 3))
        tables[(j, i)] = np.zeros((3, 3))
    g = build_graphical([3] * n, edges, tables)
    with pytest.raises(ValueError):
        induce_normal_form(g)


def test_unilateral_payoffs_dense_vs_graphical():
    rng = np.random.default_rng(7)
    t = rng.normal(size=(2, 2))
    g = build_graphical([2, 2], [(0, 1)], {(0, 1): t, (1, 0): t.T})
    dense = induce_normal_form(g)
    for joint in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        for i in range(2):
            np.testing.assert_allclose(
                unilateral_payoffs(g, joint, i), unilateral_payoffs(dense, joint, i)
            )


# ---------------------------------------------------------------------------
# transforms


def test_parse_transform_round_trip():
    for text, kind in [("identity", "identity"), ("shift:3", "shift"), ("exp:0.5", "exponential")]:
        tr = parse_transform(text)
        assert tr.kind == kind
        assert parse_transform(tr.describe()) == tr


def test_parse_transform_rejects_garbage():
    for bad in ("", "powers", "shift", "identity:2"):
        with pytest.raises(ValueError):
            parse_transform(bad)


def test_transform_apply():
    u = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(UtilityTransform.identity().apply(u), u)
    np.testing.assert_allclose(UtilityTransform.shift(3.0).apply(u), [2.0, 3.0, 5.0])
    np.testing.assert_allclose(
        UtilityTransform.exponential(2.0).apply(u), np.exp(u / 2.0)
    )


def test_exponential_requires_positive_hbar():
    with pytest.raises(ValueError):
        UtilityTransform.exponential(0.0)
    with pytest.raises(ValueError):
        UtilityTransform.exponential(-1.0)


def test_identity_transform_rejects_nonpositive_utilities():
    g = from_bimatrix([[1, -2], [3, 4]], [[1, 1], [1, 1]])
    with pytest.raises(ValueError) as err:
        transform_utilities(g, UtilityTransform.identity())
    assert "player 0" in str(err.value)
    ok = transform_utilities(g, UtilityTransform.shift(3.0))
    assert ok.utilities[0].min() == pytest.approx(1.0)


def test_exponential_transform_accepts_negative_utilities():
    g = from_bimatrix([[-5, -2], [-3, -4]], [[-1, -1], [-1, -1]])
    view = transform_utilities(g, UtilityTransform.exponential(1.0))
    p = StrategyProfile.uniform((2, 2))
    vals = view.action_values(p, 0)
    assert (vals > 0).all()


def test_action_values_pd(pd_game):
    view = transform_utilities(pd_game, UtilityTransform.identity())
    p = StrategyProfile.uniform((2, 2))
    np.testing.assert_allclose(view.action_values(p, 0), [2.0, 3.0])
    np.testing.assert_allclose(view.action_values(p, 1), [2.0, 3.0])


def test_log_action_values_match_direct_log(pd_game):
    for transform in (UtilityTransform.identity(), UtilityTransform.exponential(0.7)):
        view = transform_utilities(pd_game, transform)
        p = StrategyProfile.random_interior((2, 2), np.random.default_rng(1))
        for i in range(2):
            np.testing.assert_allclose(
                view.log_action_values(p, i),
                np.log(view.action_values(p, i)),
                rtol=1e-12,
            )


def test_log_action_values_survive_extreme_hbar(pd_game):
    # direct exponentiation of 4/hbar would overflow long before this
    view = transform_utilities(pd_game, UtilityTransform.exponential(0.001))
    p = StrategyProfile.uniform((2, 2))
    logs = view.log_action_values(p, 0)
    assert np.isfinite(logs).all()
    assert logs[1] > logs[0]


def test_expected_payoff_pd(pd_game):
    p = StrategyProfile.uniform((2, 2))
    assert per_player_expected_payoff(pd_game, p, 0) == pytest.approx(2.5)
    assert softeq.overall_payoff(pd_game, p) == pytest.approx(5.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_raw_action_values_graphical_matches_dense(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    counts = [int(rng.integers(2, 4)) for _ in range(n)]
    edges, tables = [], {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.6:
                t = rng.normal(size=(counts[i], counts[j]))
                edges.append((i, j))
                tables[(i, j)] = t
                tables[(j, i)] = t.T
    g = build_graphical(counts, edges, tables)
    dense = induce_normal_form(g)
    p = StrategyProfile.random_interior(tuple(counts), rng)
    for i in range(n):
        np.testing.assert_allclose(
            raw_action_values(g, p, i), raw_action_values(dense, p, i), atol=1e-12
        )


# ---------------------------------------------------------------------------
# serialization


def test_dense_json_round_trip(tmp_path, pd_game):
    path = tmp_path / "pd.json"
    save_game(pd_game, path)
    again = load_game(path)
    for a, b in zip(again.payoffs, pd_game.payoffs):
        np.testing.assert_array_equal(a, b)


def test_graphical_json_round_trip(tmp_path):
    t = np.arange(4.0).reshape(2, 2)
    g = build_graphical([2, 2], [(0, 1)], {(0, 1): t, (1, 0): t.T})
    path = tmp_path / "g.json"
    save_game(g, path)
    again = load_game(path)
    assert again.edges == ((0, 1),)
    np.testing.assert_array_equal(again.tables[(1, 0)], t.T)


def test_game_from_json_rejects_bad_documents():
    with pytest.raises(ValueError):
        game_from_json({"players": 2})
    with pytest.raises(ValueError):
        game_from_json({"players": 2, "actions": [2]})
    with pytest.raises(ValueError):
        game_from_json(
            {"players": 2, "actions": [2, 2], "edges": [[0, 1]], "tables": {"zero-one": []}}
        )


def test_game_to_json_dense_keys(pd_game):
    doc = game_to_json(pd_game)
    assert set(doc) == {"players", "actions", "payoffs"}
    assert json.dumps(doc)
