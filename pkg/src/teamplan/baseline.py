"""Full synchronous joint model of the whole team.

Every robot moves in the same step, actions and outcomes are taken
jointly, and one shared automaton vector advances on the union of the
robots' successor labels. Exponential in the team size, so construction
is guarded by a state-count ceiling; within it, solving this model gives
the unconstrained optimum that the sequential planner and the
reallocation loop are measured against.
"""

import itertools
from collections import deque

from .mdp import Choice, Mdp, max_reach
from .product import (
    advance_vector,
    compile_mission,
    vector_accepting,
    vector_initial,
    vector_violating,
)

IDLE = "idle"


class CeilingExceeded(RuntimeError):
    """Joint model too large to materialize."""

    def __init__(self, size, ceiling):
        super().__init__(
            f"joint model needs {size} states, over the ceiling of {ceiling}"
        )
        self.size = size
        self.ceiling = ceiling


class MamdpModel:
    """Reachable joint product of all robots with the mission automata.

    Joint action names join the per-robot action names with "|"; every
    robot can also "idle" (self-loop) in any state. Safety violating
    joint states keep their action names but become self-loops.
    """

    def __init__(self, models, mission, ceiling=10_000_000, automata=None):
        self.models = list(models)
        if not self.models:
            raise ValueError("at least one robot required")
        task_dfas, safety_dfa = automata if automata is not None else compile_mission(mission)
        self.mission = mission
        self.task_dfas = task_dfas
        self.safety_dfa = safety_dfa

        bound = 1
        for m in self.models:
            bound *= m.num_states
        for d in task_dfas:
            bound *= d.num_states
        if safety_dfa is not None:
            bound *= safety_dfa.num_states
        if ceiling is not None and bound > ceiling:
            raise CeilingExceeded(bound, ceiling)

        names = []
        name_index = {}

        def action_index(parts):
            name = "|".join(parts)
            idx = name_index.get(name)
            if idx is None:
                idx = len(names)
                names.append(name)
                name_index[name] = idx
            return idx

        def options(r, s):
            # idle is always available so the joint optimum dominates any
            # execution in which finished robots stand still
            row = [(self.models[r].actions[c.action], c.outcomes) for c in self.models[r].choices[s]]
            row.append((IDLE, ((s, 1.0),)))
            return row

        entries = tuple(m.initial for m in self.models)
        label0 = frozenset().union(*(m.label(e) for m, e in zip(self.models, entries)))
        q0 = advance_vector(
            task_dfas, safety_dfa, vector_initial(task_dfas, safety_dfa), label0
        )
        init = (entries, q0)
        index = {init: 0}
        self.states = [init]
        choices = []
        queue = deque([0])
        while queue:
            i = queue.popleft()
            pos, q = self.states[i]
            rows = [options(r, s) for r, s in enumerate(pos)]
            row = []
            if vector_violating(safety_dfa, q):
                for combo in itertools.product(*rows):
                    row.append(Choice(action_index([n for n, _ in combo]), ((i, 1.0),), None))
                choices.append(row)
                continue
            for combo in itertools.product(*rows):
                outs = []
                for branch in itertools.product(*(outcomes for _, outcomes in combo)):
                    p = 1.0
                    tgt = []
                    for s2, pr in branch:
                        p *= pr
                        tgt.append(s2)
                    label = frozenset().union(
                        *(m.label(t) for m, t in zip(self.models, tgt))
                    )
                    q2 = advance_vector(task_dfas, safety_dfa, q, label)
                    key = (tuple(tgt), q2)
                    j = index.get(key)
                    if j is None:
                        j = len(self.states)
                        index[key] = j
                        self.states.append(key)
                        queue.append(j)
                    outs.append((j, p))
                row.append(Choice(action_index([n for n, _ in combo]), tuple(outs), None))
            choices.append(row)

        atoms = tuple(sorted(set().union(*(m.atoms for m in self.models))))
        self.mdp = Mdp(len(self.states), 0, tuple(names), choices, atoms=atoms)
        self.accepting = frozenset(
            i for i, (_, q) in enumerate(self.states)
            if vector_accepting(task_dfas, safety_dfa, q)
        )
        self.violating = frozenset(
            i for i, (_, q) in enumerate(self.states)
            if vector_violating(safety_dfa, q)
        )

    @property
    def num_states(self):
        return len(self.states)

    def full_size(self, with_safety=False):
        """Unpruned joint size. The designated failure states carry no task
        progress, so they are not counted as map factors."""
        n = 1
        for m in self.models:
            n *= m.num_states - (1 if m.failure_state is not None else 0)
        for d in self.task_dfas:
            n *= d.num_states
        if with_safety and self.safety_dfa is not None:
            n *= self.safety_dfa.num_states
        return n

    def state_dict(self, i):
        pos, q = self.states[i]
        return {"s": list(pos), "q": list(q)}


def build_mamdp(models, mission, ceiling=10_000_000, automata=None):
    return MamdpModel(models, mission, ceiling=ceiling, automata=automata)


def mamdp_full_size(models, mission, automata=None, with_safety=False):
    """The unpruned joint size, computed without building anything."""
    task_dfas, safety_dfa = automata if automata is not None else compile_mission(mission)
    n = 1
    for m in models:
        n *= m.num_states - (1 if m.failure_state is not None else 0)
    for d in task_dfas:
        n *= d.num_states
    if with_safety and safety_dfa is not None:
        n *= safety_dfa.num_states
    return n


def solve_mamdp(mm, epsilon=1e-6):
    """Optimal mission probability at the joint start, with its policy."""
    res = max_reach(mm.mdp, mm.accepting, mm.violating, epsilon=epsilon)
    return res.values[0], res.policy
