"""Explicit-state MDPs, maximal reachability, and nested probability/cost solving.

Solving is Gauss-Seidel value iteration bracketed by graph precomputation:
states that cannot reach the target under any scheduler are pinned to 0 and
states with an almost-sure strategy are pinned to 1 before iteration starts,
so the iterated region only contains genuinely quantitative states.
"""

import json
from collections import namedtuple
from dataclasses import dataclass, field

Choice = namedtuple("Choice", ["action", "outcomes", "cost"])
# action: index into Mdp.actions; outcomes: tuple of (successor, probability); cost: float or None


class Mdp:
    """Sparse explicit MDP. Treated as immutable once built."""

    def __init__(self, num_states, initial, actions, choices, atoms=(), labels=None, failure_state=None):
        self.num_states: int = num_states
        self.initial: int = initial
        self.actions: tuple[str, ...] = tuple(actions)
        # choices[s] lists the enabled (action, outcomes, cost) triples of s
        self.choices: list[list[Choice]] = choices
        self.atoms: tuple[str, ...] = tuple(atoms)
        self.labels: dict[int, frozenset[str]] = {s: frozenset(l) for s, l in (labels or {}).items()}
        self.failure_state: int | None = failure_state

    def label(self, s: int) -> frozenset[str]:
        return self.labels.get(s, frozenset())

    def enabled(self, s: int) -> list[Choice]:
        return self.choices[s]

    @property
    def has_costs(self) -> bool:
        return any(c.cost is not None for row in self.choices for c in row)

    def is_absorbing(self, s: int) -> bool:
        row = self.choices[s]
        return all(len(c.outcomes) == 1 and c.outcomes[0][0] == s for c in row)

    def transition_count(self) -> int:
        return sum(len(c.outcomes) for row in self.choices for c in row)

    def choice_count(self) -> int:
        return sum(len(row) for row in self.choices)


PROB_ATOL = 1e-9


def validate(mdp: Mdp) -> list[str]:
    """Structural diagnostics; an empty list means the model is well formed."""
    problems = []
    if not (0 <= mdp.initial < mdp.num_states):
        problems.append(f"initial state {mdp.initial} out of range")
        return problems
    for s in range(mdp.num_states):
        seen_actions = set()
        for c in mdp.choices[s]:
            if not (0 <= c.action < len(mdp.actions)):
                problems.append(f"state {s}: action index {c.action} out of range")
                continue
            if c.action in seen_actions:
                problems.append(f"state {s}: action {mdp.actions[c.action]!r} enabled twice")
            seen_actions.add(c.action)
            total = 0.0
            for t, p in c.outcomes:
                if not (0 <= t < mdp.num_states):
                    problems.append(f"state {s}, action {mdp.actions[c.action]!r}: successor {t} out of range")
                if not (0.0 < p <= 1.0):
                    problems.append(f"state {s}, action {mdp.actions[c.action]!r}: probability {p} outside (0, 1]")
                total += p
            if abs(total - 1.0) > PROB_ATOL:
                problems.append(
                    f"state {s}, action {mdp.actions[c.action]!r}: probabilities sum to {total!r}, not 1"
                )
            if c.cost is not None and c.cost < 0:
                problems.append(f"state {s}, action {mdp.actions[c.action]!r}: negative cost {c.cost}")
    reached = {mdp.initial}
    stack = [mdp.initial]
    while stack:
        s = stack.pop()
        for c in mdp.choices[s]:
            for t, _ in c.outcomes:
                if 0 <= t < mdp.num_states and t not in reached:
                    reached.add(t)
                    stack.append(t)
    unreachable = [s for s in range(mdp.num_states) if s not in reached]
    if unreachable:
        problems.append(f"unreachable states: {unreachable}")
    if mdp.failure_state is not None:
        f = mdp.failure_state
        if not (0 <= f < mdp.num_states):
            problems.append(f"failure state {f} out of range")
        elif not mdp.is_absorbing(f):
            problems.append(f"failure state {f} is not absorbing")
    return problems


# ------------------------------------------------------------------
# model files


def model_to_dict(mdp: Mdp) -> dict:
    trans = []
    for s in range(mdp.num_states):
        for c in mdp.choices[s]:
            entry = {
                "from": s,
                "action": mdp.actions[c.action],
                "outcomes": [{"to": t, "p": p} for t, p in c.outcomes],
            }
            if c.cost is not None:
                entry["cost"] = c.cost
            trans.append(entry)
    return {
        "states": mdp.num_states,
        "initial": mdp.initial,
        "atoms": list(mdp.atoms),
        "labels": {str(s): sorted(l) for s, l in sorted(mdp.labels.items()) if l},
        "failure_state": mdp.failure_state,
        "actions": list(mdp.actions),
        "trans": trans,
    }


def model_from_dict(data: dict) -> Mdp:
    num_states = data["states"]
    actions = list(data["actions"])
    action_index = {a: i for i, a in enumerate(actions)}
    choices: list[list[Choice]] = [[] for _ in range(num_states)]
    for t in data["trans"]:
        if not (0 <= t["from"] < num_states):
            raise ValueError(f"transition source {t['from']} out of range")
        if t["action"] not in action_index:
            raise ValueError(f"transition from {t['from']} uses undeclared action {t['action']!r}")
        outcomes = tuple((o["to"], float(o["p"])) for o in t["outcomes"])
        choices[t["from"]].append(Choice(action_index[t["action"]], outcomes, t.get("cost")))
    labels = {int(s): frozenset(l) for s, l in data.get("labels", {}).items()}
    return Mdp(
        num_states=num_states,
        initial=data["initial"],
        actions=actions,
        choices=choices,
        atoms=tuple(data.get("atoms", ())),
        labels=labels,
        failure_state=data.get("failure_state"),
    )


def save_model(mdp: Mdp, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(mdp), fh, indent=2)
        fh.write("\n")


def load_model(path) -> Mdp:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


# ------------------------------------------------------------------
# solving


class SolverError(RuntimeError):
    pass


class DivergenceError(SolverError):
    pass


@dataclass
class ReachResult:
    values: list[float]
    policy: dict[int, int]
    iterations: int
    almost_sure: frozenset[int] = field(default_factory=frozenset)
    zero: frozenset[int] = field(default_factory=frozenset)


@dataclass
class NestedResult:
    values: list[float]
    costs: list[float]
    policy: dict[int, int]


def _predecessors(mdp: Mdp):
    pre: list[set[int]] = [set() for _ in range(mdp.num_states)]
    for s in range(mdp.num_states):
        for c in mdp.choices[s]:
            for t, _ in c.outcomes:
                pre[t].add(s)
    return pre


def _prob0(mdp: Mdp, target: set[int], avoid: set[int]) -> set[int]:
    """States from which no scheduler reaches the target with positive probability."""
    pre = _predecessors(mdp)
    reach = set(target)
    stack = list(target)
    while stack:
        t = stack.pop()
        for s in pre[t]:
            if s not in reach and s not in avoid:
                reach.add(s)
                stack.append(s)
    return set(range(mdp.num_states)) - reach


def _prob1(mdp: Mdp, target: set[int], avoid: set[int]) -> set[int]:
    """States with a scheduler reaching the target almost surely.

    Classical double fixpoint: shrink a candidate set u until it only
    contains states that can reach the target with probability 1 while
    never leaving u. Avoid states count as actionless.
    """
    u = set(range(mdp.num_states)) - avoid
    while True:
        v = set(target)
        changed = True
        while changed:
            changed = False
            for s in u:
                if s in v:
                    continue
                for c in mdp.choices[s]:
                    outs = [t for t, _ in c.outcomes]
                    if all(t in u for t in outs) and any(t in v for t in outs):
                        v.add(s)
                        changed = True
                        break
        if v == u:
            return u
        u = v


def _fresh_q(mdp: Mdp, s: int, values: list[float]) -> list[float]:
    return [sum(p * values[t] for t, p in c.outcomes) for c in mdp.choices[s]]


def _certificate_policy(mdp, states: set[int], target: set[int], policy: dict[int, int]):
    """Inside an almost-sure set, pick actions that stay in the set and make progress."""
    assigned = set(target)
    pending = set(states) - assigned
    while pending:
        added = []
        for s in sorted(pending):
            best = None
            for c in mdp.choices[s]:
                outs = [t for t, _ in c.outcomes]
                if all(t in states or t in target for t in outs) and any(t in assigned for t in outs):
                    best = c.action if best is None else min(best, c.action)
            if best is not None:
                policy[s] = best
                added.append(s)
        if not added:
            raise SolverError("internal: almost-sure certificate incomplete")
        for s in added:
            assigned.add(s)
            pending.discard(s)


def _progress_policy(mdp, mid: set[int], base: set[int], optimal: dict[int, list[Choice]], policy: dict[int, int]):
    """Among value-optimal choices prefer ones with a successor strictly closer
    to the target, then the lowest action index. A plain argmax can pick a
    choice that preserves the value forever without reaching anything."""
    assigned = set(base)
    pending = set(mid)
    while pending:
        added = []
        for s in sorted(pending):
            best = None
            for c in optimal[s]:
                if any(t in assigned for t, _ in c.outcomes):
                    best = c.action if best is None else min(best, c.action)
            if best is not None:
                policy[s] = best
                added.append(s)
        if not added:
            raise SolverError("internal: no progressing optimal action for states " + str(sorted(pending)[:5]))
        for s in added:
            assigned.add(s)
            pending.discard(s)


def max_reach(mdp: Mdp, target, avoid=(), epsilon: float = 1e-6, max_iter: int = 100_000, sweep_log=None) -> ReachResult:
    """Maximal probability of reaching `target` while never entering `avoid`.

    Avoid states are treated as absorbing with value 0 but stay part of the
    state space. Values start at zero and sweep in state order until the
    largest update falls below `epsilon` (absolute).
    """
    target = set(target)
    avoid = set(avoid)
    if target & avoid:
        raise ValueError("target and avoid sets overlap")
    for s in target | avoid:
        if not (0 <= s < mdp.num_states):
            raise ValueError(f"state {s} out of range")

    zero = _prob0(mdp, target, avoid)
    sure = _prob1(mdp, target, avoid) - zero
    values = [0.0] * mdp.num_states
    for s in sure:
        values[s] = 1.0
    for s in target:
        values[s] = 1.0

    mid = [s for s in range(mdp.num_states) if s not in zero and s not in sure and s not in target]
    iterations = 0
    if mid:
        for iterations in range(1, max_iter + 1):
            delta = 0.0
            for s in mid:
                best = 0.0
                for c in mdp.choices[s]:
                    q = sum(p * values[t] for t, p in c.outcomes)
                    if q > best:
                        best = q
                d = best - values[s]
                if d > delta:
                    delta = d
                values[s] = best
            if sweep_log is not None:
                sweep_log.append(list(values))
            if delta < epsilon:
                break
        else:
            raise DivergenceError(f"value iteration exceeded {max_iter} sweeps (last delta {delta})")

    policy: dict[int, int] = {}
    for s in sorted(target):
        if mdp.choices[s]:
            policy[s] = mdp.choices[s][0].action
    _certificate_policy(mdp, sure, target, policy)
    optimal: dict[int, list[Choice]] = {}
    positive_mid = {s for s in mid if values[s] > 0.0}
    for s in positive_mid:
        qs = _fresh_q(mdp, s, values)
        top = max(qs)
        optimal[s] = [c for c, q in zip(mdp.choices[s], qs) if q >= top - PROB_ATOL]
    _progress_policy(mdp, positive_mid, target | sure, optimal, policy)
    for s in range(mdp.num_states):
        if s not in policy and mdp.choices[s]:
            policy[s] = mdp.choices[s][0].action
    return ReachResult(values, policy, iterations, frozenset(sure | target), frozenset(zero))


_COST_CEILING = 1e15


def nested_vi(mdp: Mdp, target, avoid=(), epsilon: float = 1e-6, max_iter: int = 100_000, prob_tol: float = 1e-9) -> NestedResult:
    """Maximize reach probability, then minimize expected cost to absorption.

    Each state keeps only the choices whose probability Q-value sits within
    `prob_tol` of the optimum; over those the expected cumulative cost until
    absorption (target or a zero-probability sink) is minimized. States with
    zero reach probability get cost 0 by convention. The cost iteration runs
    from above: value-preserving zero-cost loops always tie in the first
    phase, and from below they would freeze the cost at 0.
    """
    reach = max_reach(mdp, target, avoid, epsilon, max_iter)
    values = reach.values
    target = set(target)

    restricted: dict[int, list[Choice]] = {}
    active = []
    for s in range(mdp.num_states):
        if s in target or values[s] <= 0.0 or not mdp.choices[s]:
            continue
        qs = _fresh_q(mdp, s, values)
        top = max(qs)
        restricted[s] = [c for c, q in zip(mdp.choices[s], qs) if q >= top - prob_tol]
        active.append(s)

    costs = [0.0] * mdp.num_states
    for s in active:
        costs[s] = _COST_CEILING
    for it in range(1, max_iter + 1):
        delta = 0.0
        for s in active:
            best = _COST_CEILING
            for c in restricted[s]:
                q = (c.cost or 0.0) + sum(p * costs[t] for t, p in c.outcomes)
                if q < best:
                    best = q
            d = costs[s] - best
            if d > delta:
                delta = d
            costs[s] = best
        if delta < epsilon:
            break
    else:
        raise DivergenceError(f"cost iteration exceeded {max_iter} sweeps")

    policy = dict(reach.policy)
    base = target | {s for s in range(mdp.num_states) if values[s] <= 0.0}
    cost_optimal: dict[int, list[Choice]] = {}
    for s in active:
        pairs = [((c.cost or 0.0) + sum(p * costs[t] for t, p in c.outcomes), c) for c in restricted[s]]
        low = min(q for q, _ in pairs)
        cost_optimal[s] = [c for q, c in pairs if q <= low + PROB_ATOL]
    _progress_policy(mdp, set(active), base, cost_optimal, policy)
    return NestedResult(values, costs, policy)
