"""Solver unit tests on small hand-evaluated models."""

import json

import pytest

from teamplan.mdp import (
    Choice,
    DivergenceError,
    Mdp,
    load_model,
    max_reach,
    model_from_dict,
    model_to_dict,
    nested_vi,
    save_model,
    validate,
)

from exhaustive import evaluate_policy


def make(num_states, initial, actions, table, **kw):
    """table maps state -> list of (action_name, [(succ, p), ...], cost)."""
    index = {a: i for i, a in enumerate(actions)}
    choices = [[] for _ in range(num_states)]
    for s, rows in table.items():
        for entry in rows:
            name, outs = entry[0], entry[1]
            cost = entry[2] if len(entry) > 2 else None
            choices[s].append(Choice(index[name], tuple(outs), cost))
    return Mdp(num_states, initial, actions, choices, **kw)


def absorbing(name="stay"):
    return lambda s: (name, [(s, 1.0)])


# ------------------------------------------------------------------
# max_reach on hand-checked models


def test_one_step_probability():
    # 0 --a--> {1 w.p. 0.9, 2 w.p. 0.1}; 1 is the target, 2 a sink
    m = make(3, 0, ["a", "stay"], {
        0: [("a", [(1, 0.9), (2, 0.1)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values == pytest.approx([0.9, 1.0, 0.0], abs=1e-12)
    assert res.policy[0] == 0
    assert res.zero == frozenset({2})
    assert res.almost_sure == frozenset({1})


def test_picks_better_action():
    m = make(3, 0, ["a", "b", "stay"], {
        0: [("a", [(1, 0.9), (2, 0.1)]), ("b", [(1, 0.5), (2, 0.5)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == pytest.approx(0.9, abs=1e-12)
    assert res.policy[0] == 0


def test_retry_loop_value():
    # 0: a -> {1 w.p. 0.5, 0 w.p. 0.5}. Retrying forever reaches the target
    # almost surely, so the value is exactly 1 via the graph precomputation.
    m = make(2, 0, ["a", "stay"], {
        0: [("a", [(1, 0.5), (0, 0.5)])],
        1: [("stay", [(1, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == 1.0
    assert res.iterations == 0
    assert 0 in res.almost_sure


def test_no_retry_means_half():
    m = make(3, 0, ["a", "stay"], {
        0: [("a", [(1, 0.5), (2, 0.5)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == pytest.approx(0.5, abs=1e-12)


def test_policy_avoids_value_preserving_loop():
    # The self-loop at 0 preserves the value 1 but never arrives; the
    # extracted policy must take the direct action despite its higher index.
    m = make(2, 0, ["loop", "go"], {
        0: [("loop", [(0, 1.0)]), ("go", [(1, 1.0)])],
        1: [("go", [(1, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == 1.0
    assert res.policy[0] == 1
    attained = evaluate_policy(m, res.policy, {1})
    assert attained[0] == pytest.approx(1.0, abs=1e-9)


def test_policy_progresses_in_quantitative_region():
    # Both choices at 0 have Q-value 0.5; only "exit" makes progress.
    m = make(3, 0, ["loop", "exit", "stay"], {
        0: [("loop", [(0, 1.0)]), ("exit", [(1, 0.5), (2, 0.5)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == pytest.approx(0.5, abs=1e-9)
    assert res.policy[0] == 1
    attained = evaluate_policy(m, res.policy, {1})
    assert attained[0] == pytest.approx(0.5, abs=1e-9)


def test_avoid_states_block_paths():
    # Only route to the target runs through the avoid state.
    m = make(3, 0, ["a", "stay"], {
        0: [("a", [(1, 1.0)])],
        1: [("a", [(2, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {2}, avoid={1})
    assert res.values == [0.0, 0.0, 1.0]
    assert res.zero >= {0, 1}


def test_avoid_overlap_rejected():
    m = make(2, 0, ["a"], {0: [("a", [(1, 1.0)])], 1: [("a", [(1, 1.0)])]})
    with pytest.raises(ValueError):
        max_reach(m, {1}, avoid={1})
    with pytest.raises(ValueError):
        max_reach(m, {5})


def test_prob1_demands_retry_not_gamble():
    # a retries (almost sure), b risks an absorbing sink.
    m = make(3, 0, ["a", "b", "stay"], {
        0: [("a", [(1, 0.5), (0, 0.5)]), ("b", [(1, 0.5), (2, 0.5)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = max_reach(m, {1})
    assert res.values[0] == 1.0
    assert res.policy[0] == 0


def test_monotone_sweeps_from_zero():
    m = make(4, 0, ["a", "stay"], {
        0: [("a", [(1, 0.5), (3, 0.5)])],
        1: [("a", [(2, 0.8), (3, 0.2)])],
        2: [("stay", [(2, 1.0)])],
        3: [("stay", [(3, 1.0)])],
    })
    log = []
    res = max_reach(m, {2}, sweep_log=log)
    assert res.values[0] == pytest.approx(0.4, abs=1e-9)
    assert len(log) >= 2
    for earlier, later in zip(log, log[1:]):
        for a, b in zip(earlier, later):
            assert b >= a - 1e-15
    for snapshot in log:
        assert all(0.0 <= v <= 1.0 for v in snapshot)


def test_divergence_error_on_tiny_budget():
    m = make(3, 0, ["a", "stay"], {
        0: [("a", [(0, 0.999), (1, 0.0005), (2, 0.0005)])],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    with pytest.raises(DivergenceError):
        max_reach(m, {1}, max_iter=2)


# ------------------------------------------------------------------
# nested probability-then-cost


def test_cost_breaks_probability_tie():
    m = make(2, 0, ["a", "b", "stay"], {
        0: [("a", [(1, 1.0)], 5.0), ("b", [(1, 1.0)], 3.0)],
        1: [("stay", [(1, 1.0)], 0.0)],
    })
    res = nested_vi(m, {1})
    assert res.values[0] == 1.0
    assert res.costs[0] == pytest.approx(3.0, abs=1e-9)
    assert res.policy[0] == 1


def test_probability_dominates_cost():
    # b is free but reaches less often; the nested solver must keep a.
    m = make(3, 0, ["a", "b", "stay"], {
        0: [("a", [(1, 0.9), (2, 0.1)], 1.0), ("b", [(1, 0.8), (2, 0.2)], 0.0)],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)])],
    })
    res = nested_vi(m, {1})
    assert res.values[0] == pytest.approx(0.9, abs=1e-9)
    assert res.costs[0] == pytest.approx(1.0, abs=1e-9)
    assert res.policy[0] == 0


def test_zero_cost_loop_does_not_hide_exit_cost():
    # Waiting is free and value-preserving; the cost of eventually leaving
    # must still be charged.
    m = make(2, 0, ["stay", "go"], {
        0: [("stay", [(0, 1.0)], 0.0), ("go", [(1, 1.0)], 2.0)],
        1: [("stay", [(1, 1.0)], 0.0)],
    })
    res = nested_vi(m, {1})
    assert res.values[0] == 1.0
    assert res.costs[0] == pytest.approx(2.0, abs=1e-9)
    assert res.policy[0] == 1


def test_unreachable_region_costs_zero():
    m = make(3, 0, ["a", "stay"], {
        0: [("a", [(1, 1.0)], 4.0)],
        1: [("stay", [(1, 1.0)])],
        2: [("stay", [(2, 1.0)], 1.0)],
    })
    res = nested_vi(m, {1})
    assert res.values[2] == 0.0
    assert res.costs[2] == 0.0


def test_expected_cost_weighs_retries():
    # 0: try (cost 1) succeeds w.p. 0.5, else back to 0. Expected tries: 2.
    m = make(2, 0, ["try", "stay"], {
        0: [("try", [(1, 0.5), (0, 0.5)], 1.0)],
        1: [("stay", [(1, 1.0)], 0.0)],
    })
    res = nested_vi(m, {1})
    assert res.values[0] == 1.0
    assert res.costs[0] == pytest.approx(2.0, abs=1e-4)


# ------------------------------------------------------------------
# validation and files


def test_validate_accepts_well_formed():
    m = make(2, 0, ["a"], {0: [("a", [(1, 1.0)])], 1: [("a", [(1, 1.0)])]})
    assert validate(m) == []


def test_validate_reports_problems():
    bad = Mdp(3, 0, ("a",), [
        [Choice(0, ((1, 0.5), (1, 0.4)), None)],
        [Choice(0, ((5, 1.0),), None), Choice(0, ((1, 1.0),), -2.0)],
        [],
    ], failure_state=1)
    problems = validate(bad)
    text = "\n".join(problems)
    assert "sum to" in text
    assert "out of range" in text
    assert "enabled twice" in text
    assert "negative cost" in text
    assert "unreachable states: [2]" in text
    assert "not absorbing" in text


def test_validate_flags_bad_initial():
    m = make(2, 0, ["a"], {0: [("a", [(1, 1.0)])], 1: [("a", [(1, 1.0)])]})
    m.initial = 7
    assert validate(m) == ["initial state 7 out of range"]


def test_model_round_trip(tmp_path):
    m = make(3, 0, ["a", "b"], {
        0: [("a", [(1, 0.9), (2, 0.1)], 1.5), ("b", [(2, 1.0)])],
        1: [("a", [(1, 1.0)])],
        2: [("a", [(2, 1.0)])],
    }, atoms=("goal",), labels={1: {"goal"}}, failure_state=2)
    path = tmp_path / "model.json"
    save_model(m, path)
    again = load_model(path)
    assert model_to_dict(again) == model_to_dict(m)
    assert again.label(1) == frozenset({"goal"})
    assert again.label(0) == frozenset()
    assert again.failure_state == 2
    assert again.has_costs


def test_model_rejects_unknown_action():
    data = model_to_dict(make(2, 0, ["a"], {0: [("a", [(1, 1.0)])], 1: [("a", [(1, 1.0)])]}))
    data["trans"][0]["action"] = "zz"
    with pytest.raises(ValueError):
        model_from_dict(data)


def test_model_rejects_bad_source():
    data = {
        "states": 1, "initial": 0, "atoms": [], "labels": {},
        "failure_state": None, "actions": ["a"],
        "trans": [{"from": 3, "action": "a", "outcomes": [{"to": 0, "p": 1.0}]}],
    }
    with pytest.raises(ValueError):
        model_from_dict(data)


def test_model_json_shape(tmp_path):
    m = make(2, 0, ["a"], {0: [("a", [(1, 1.0)], 0.5)], 1: [("a", [(1, 1.0)])]})
    path = tmp_path / "m.json"
    save_model(m, path)
    data = json.loads(path.read_text())
    assert set(data) == {"states", "initial", "atoms", "labels", "failure_state", "actions", "trans"}
    assert data["trans"][0] == {
        "from": 0, "action": "a", "outcomes": [{"to": 1, "p": 1.0}], "cost": 0.5,
    }
    assert "cost" not in data["trans"][1]
