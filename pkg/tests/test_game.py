"""Container, schema, and lookup tests for the core game structures."""

import dataclasses
import json

import numpy as np
import pytest

from oracles import random_game, random_profile
from stagegame import (
    History,
    MultiStageGame,
    SchemaError,
    StrategyProfile,
    games_equal,
    parse_game,
    serialize_game,
    stage_utility,
    transition,
    validate_game,
)

rng = np.random.default_rng(42)


def tiny_game():
    u0 = np.zeros((1, 2, 2, 2, 2, 2))
    u0[0, 1, 1, :, :, 0] = 3.0
    u0[0, 1, 1, :, :, 1] = -3.0
    u1 = np.arange(2 * 2 * 2 * 2 * 2 * 2, dtype=float).reshape(2, 2, 2, 2, 2, 2)
    t0 = np.array([[[0, 1], [1, 0]]], dtype=np.intp)
    return MultiStageGame(
        horizon=1,
        types1=("hi", "lo"),
        types2=("good", "bad"),
        states=(("root",), ("left", "right")),
        actions1=(("a", "b"), ("c", "d")),
        actions2=(("p", "q"), ("r", "s")),
        utilities=(u0, u1),
        transitions=(t0,),
        prior1=np.full((2, 2), 0.5),
        prior2=np.array([[0.25, 0.75], [0.9, 0.1]]),
    )


def test_lookups_match_raw_arrays():
    g = tiny_game()
    assert transition(g, 0, "root", "a", "q") == "right"
    assert transition(g, 0, "root", "b", "p") == "right"
    assert transition(g, 0, "root", "b", "q") == "left"
    assert stage_utility(g, 0, "root", "b", "q", "lo", "good") == (3.0, -3.0)
    u1, u2 = stage_utility(g, 1, "left", "c", "s", "hi", "bad")
    assert (u1, u2) == tuple(g.utilities[1][0, 0, 1, 0, 1])


def test_transition_rejects_final_stage():
    g = tiny_game()
    with pytest.raises(IndexError):
        transition(g, 1, "left", "c", "r")


def test_unknown_labels_raise():
    g = tiny_game()
    with pytest.raises(KeyError):
        stage_utility(g, 0, "root", "nope", "p", "hi", "good")
    with pytest.raises(KeyError):
        g.state_index(1, "root")
    with pytest.raises(KeyError):
        g.type_index(2, "hi")


def test_validate_good_games_clean():
    for _ in range(10):
        assert validate_game(random_game(rng)).violations == ()


def test_validate_flags_bad_prior():
    g = tiny_game()
    bad = dataclasses.replace(g, prior2=np.array([[0.5, 0.2], [0.3, 0.7]]))
    rules = {v.rule for v in validate_game(bad).violations}
    assert "prior-distribution" in rules


def test_validate_flags_nonfinite_utility():
    g = tiny_game()
    u = [a.copy() for a in g.utilities]
    u[1][1, 0, 1, 0, 0, 1] = np.inf
    bad = dataclasses.replace(g, utilities=tuple(u))
    assert any(v.rule == "finite-utility" for v in validate_game(bad).violations)


def test_constructor_checks_shapes():
    g = tiny_game()
    with pytest.raises(ValueError):
        dataclasses.replace(g, utilities=(g.utilities[0][:, :1], g.utilities[1]))
    with pytest.raises(ValueError):
        dataclasses.replace(g, transitions=())


def test_serialize_round_trip():
    for _ in range(5):
        g = random_game(rng)
        doc = serialize_game(g)
        assert games_equal(g, parse_game(doc))
        # a JSON string must be accepted as well
        assert games_equal(g, parse_game(json.dumps(doc)))


def test_parse_rejects_malformed_documents():
    doc = serialize_game(tiny_game())
    for mutate in (
        lambda d: d.pop("horizon"),
        lambda d: d["types"].pop("player1"),
        lambda d: d["stages"][0]["transitions"][0][0].__setitem__(0, "nowhere"),
        lambda d: d["stages"][1].pop("utilities"),
        lambda d: d["priors"]["player1"]["hi"].__setitem__("good", "much"),
    ):
        broken = json.loads(json.dumps(doc))
        mutate(broken)
        with pytest.raises(SchemaError):
            parse_game(broken)


def test_single_stage_game_supported():
    g = random_game(rng, horizon=0)
    assert g.horizon == 0
    assert validate_game(g).violations == ()
    assert games_equal(g, parse_game(serialize_game(g)))


def test_uniform_profile_rows_normalized():
    g = random_game(rng)
    prof = StrategyProfile.uniform(g)
    for k in range(g.horizon + 1):
        assert np.allclose(prof.sigma1[k].sum(axis=2), 1.0)
        assert np.allclose(prof.sigma2[k].sum(axis=2), 1.0)
    na = len(g.actions1[0])
    assert prof.probability(1, 0, g.states[0][0], g.types1[0], g.actions1[0][0]) == pytest.approx(1.0 / na)


def test_profile_rejects_unnormalized_rows():
    g = random_game(rng)
    prof = random_profile(g, rng)
    bad = [a.copy() for a in prof.sigma1]
    bad[0][0, 0] = 0.0
    with pytest.raises(ValueError):
        StrategyProfile(g, tuple(bad), prof.sigma2)


def test_profile_csv_deterministic(tmp_path):
    g = random_game(rng)
    prof = random_profile(g, rng)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    prof.to_csv(a)
    prof.to_csv(b)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header.split(",") == ["player", "stage", "state", "type", "action", "probability"]


def test_history_validation():
    g = tiny_game()
    h = History((("a", "p"),))
    assert h.state_path(g, "root") == ("root", "left")
    with pytest.raises(KeyError):
        History((("a", "zzz"),)).state_path(g, "root")
    too_long = History((("a", "p"), ("c", "r"), ("c", "r")))
    with pytest.raises(ValueError):
        too_long.state_path(g, "root")
