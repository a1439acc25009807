"""Sequential team model: robot product spaces chained by switch transitions.

One robot plans at a time; a switch hands the whole automaton vector,
unchanged, to the next robot in the ring, which continues from its own
entry state. Switching costs nothing and takes probability 1: it is a
planning construct, not an executed action.
"""

from collections import deque
from dataclasses import dataclass

from .ltl import atoms_of
from .mdp import Choice, Mdp, max_reach
from .product import (
    advance_vector,
    vector_accepting,
    vector_initial,
    vector_switchable,
    vector_violating,
)

SWITCH = "switch"


class TeamError(ValueError):
    """Team model cannot be assembled as requested."""


class TeamMdp:
    """Union of (robot, map state, automaton vector) spaces plus switches.

    The switch action is enabled where every automaton component is at its
    initial state or accepting, i.e. never in the middle of a task. It is
    also barred from a failure state reached during the plan: a robot that
    breaks down mid-plan cannot hand anything on, that is what reallocation
    is for. Robots listed in `failed` start at the failure state in a
    reallocation solve and may pass their remaining tasks to the ring
    successor.
    """

    def __init__(self, products, entries=None, start_robot=0, start_q=None, failed=()):
        if not products:
            raise TeamError("at least one robot required")
        mission = products[0].mission
        for k, p in enumerate(products):
            if p.mission != mission:
                raise TeamError(f"robot {k} was built for a different mission")
        n = len(products)
        if entries is None:
            entries = [p.source.initial for p in products]
        if len(entries) != n:
            raise TeamError(f"got {len(entries)} entry states for {n} robots")
        for k, (p, e) in enumerate(zip(products, entries)):
            if not (0 <= e < p.source.num_states):
                raise TeamError(f"entry state {e} out of range for robot {k}")
        if not (0 <= start_robot < n):
            raise TeamError(f"start robot {start_robot} out of range")
        self.products = list(products)
        self.entries = list(entries)
        self.start_robot = start_robot
        self.failed = frozenset(failed)
        self.task_dfas = products[0].task_dfas
        self.safety_dfa = products[0].safety_dfa
        if start_q is None:
            src0 = products[start_robot].source
            start_q = advance_vector(
                self.task_dfas, self.safety_dfa,
                vector_initial(self.task_dfas, self.safety_dfa),
                src0.label(entries[start_robot]),
            )
        self.start_q = tuple(start_q)

        names = []
        seen = {}
        for p in products:
            for a in p.source.actions:
                if a not in seen:
                    seen[a] = len(names)
                    names.append(a)
        if SWITCH in seen:
            raise TeamError(f"action name {SWITCH!r} is reserved for the team model")
        self.switch_action = len(names)
        names.append(SWITCH)
        self.action_map = [[seen[a] for a in p.source.actions] for p in products]
        zeta_cost = 0.0 if any(p.source.has_costs for p in products) else None

        init = (start_robot, entries[start_robot], self.start_q)
        self.states = [init]
        self.index = {init: 0}
        rows = []
        queue = deque([0])
        while queue:
            i = queue.popleft()
            robot, s, qvec = self.states[i]
            src = products[robot].source
            row = []
            if vector_violating(self.safety_dfa, qvec):
                row = [Choice(self.action_map[robot][c.action], ((i, 1.0),), None) for c in src.choices[s]]
            else:
                for c in src.choices[s]:
                    outs = []
                    for t, p in c.outcomes:
                        succ = (robot, t, advance_vector(self.task_dfas, self.safety_dfa, qvec, src.label(t)))
                        outs.append((self._intern(succ, queue), p))
                    row.append(Choice(self.action_map[robot][c.action], tuple(outs), c.cost))
                if self._switch_enabled(robot, s, qvec):
                    nxt = (robot + 1) % n
                    j = self._intern((nxt, entries[nxt], qvec), queue)
                    row.append(Choice(self.switch_action, ((j, 1.0),), zeta_cost))
            rows.append(row)

        labels = {}
        for i, (robot, s, _) in enumerate(self.states):
            lab = products[robot].source.label(s)
            if lab:
                labels[i] = lab
        atoms = []
        for p in products:
            for a in p.source.atoms:
                if a not in atoms:
                    atoms.append(a)
        self.mdp = Mdp(len(self.states), 0, names, rows, atoms=tuple(atoms), labels=labels)
        self.accepting = frozenset(
            i for i, (_, _, q) in enumerate(self.states)
            if vector_accepting(self.task_dfas, self.safety_dfa, q)
        )
        self.violating = frozenset(
            i for i, (_, _, q) in enumerate(self.states) if vector_violating(self.safety_dfa, q)
        )

    def _intern(self, state, queue):
        j = self.index.get(state)
        if j is None:
            j = len(self.states)
            self.index[state] = j
            self.states.append(state)
            queue.append(j)
        return j

    def _switch_enabled(self, robot, s, qvec):
        if (robot + 1) % len(self.products) == self.start_robot:
            # the hand-over ring stops before wrapping: wrapping would
            # restart a robot at its entry without traveling back there
            return False
        fail = self.products[robot].source.failure_state
        if fail is not None and s == fail and robot not in self.failed:
            return False
        return vector_switchable(self.task_dfas, self.safety_dfa, qvec)

    @property
    def num_states(self):
        return len(self.states)

    def full_size(self, with_safety=False):
        return sum(p.full_size(with_safety) for p in self.products)

    def state_dict(self, i):
        robot, s, q = self.states[i]
        return {"robot": robot, "s": s, "q": list(q)}


def build_team(products, entries=None, start_robot=0, start_q=None, failed=()):
    return TeamMdp(products, entries, start_robot, start_q, failed)


@dataclass
class StapuSolution:
    team: TeamMdp
    value: float
    values: list[float]
    policy: dict[int, int]
    allocation: dict[int, int]
    unallocated: tuple[int, ...]
    segments: list[dict]
    switches: list[dict]

    def to_dict(self):
        return {
            "value": self.value,
            "allocation": {str(k): r for k, r in sorted(self.allocation.items())},
            "unallocated": list(self.unallocated),
            "segments": self.segments,
            "switches": self.switches,
        }


def solve_stapu(team, epsilon=1e-6):
    """Solve the team model and read off the allocation the policy implies."""
    res = max_reach(team.mdp, team.accepting, team.violating, epsilon=epsilon)
    allocation, unallocated, segments, switches = _walk_success_path(team, res.policy)
    return StapuSolution(
        team=team,
        value=res.values[0],
        values=res.values,
        policy=res.policy,
        allocation=allocation,
        unallocated=unallocated,
        segments=segments,
        switches=switches,
    )


def _pick_choice(row, action):
    for c in row:
        if c.action == action:
            return c
    return None


def _walk_success_path(team, policy):
    """Follow the policy along non-failure outcomes, splitting at switches.

    A task is allocated to the robot whose move makes its component
    accepting. Exact for the deterministic-or-fail class, best effort
    (highest-probability branch) elsewhere.
    """
    m = len(team.task_dfas)
    robot0, s0, q0 = team.states[0]
    allocation = {}
    for k in range(m):
        if q0[k] in team.task_dfas[k].accepting:
            allocation[k] = robot0

    segments = []
    seen_robots = set()

    def open_segment(i):
        robot, s, q = team.states[i]
        seen_robots.add(robot)
        seg = {"robot": robot, "entry": {"s": s, "q": list(q)}, "choices": []}
        segments.append(seg)
        return seg

    seg = open_segment(0)
    switches = []
    cur = 0
    visited = {0}
    while True:
        if cur in team.accepting or cur in team.violating:
            break
        action = policy.get(cur)
        choice = _pick_choice(team.mdp.choices[cur], action) if action is not None else None
        if choice is None:
            break
        robot, s, q = team.states[cur]
        if choice.action == team.switch_action:
            nxt = choice.outcomes[0][0]
            switches.append({
                "from_robot": robot,
                "to_robot": team.states[nxt][0],
                "state": {"s": s, "q": list(q)},
            })
            if team.states[nxt][0] in seen_robots:
                break
            if nxt in visited:
                break
            visited.add(nxt)
            cur = nxt
            seg = open_segment(cur)
            continue
        seg["choices"].append({"state": {"s": s, "q": list(q)}, "action": team.mdp.actions[choice.action]})
        fail = team.products[robot].source.failure_state
        live = [(t, p) for t, p in choice.outcomes if team.states[t][1] != fail]
        if not live:
            break
        nxt = max(live, key=lambda tp: tp[1])[0]
        if nxt in visited:
            break
        visited.add(nxt)
        newq = team.states[nxt][2]
        for k in range(m):
            if k not in allocation and newq[k] in team.task_dfas[k].accepting:
                allocation[k] = robot
        cur = nxt

    for r in range(len(team.products)):
        if r not in seen_robots:
            segments.append({"robot": r, "entry": {"s": team.entries[r], "q": None}, "choices": []})
    unallocated = tuple(k for k in range(m) if k not in allocation)
    return allocation, unallocated, segments, switches


def check_class(mdp):
    """True when every action is deterministic or a two-outcome split with
    the designated failure state."""
    fail = mdp.failure_state
    for s in range(mdp.num_states):
        for c in mdp.choices[s]:
            if len(c.outcomes) == 1 and abs(c.outcomes[0][1] - 1.0) <= 1e-9:
                continue
            if (
                len(c.outcomes) == 2
                and fail is not None
                and any(t == fail for t, _ in c.outcomes)
                and abs(sum(p for _, p in c.outcomes) - 1.0) <= 1e-9
            ):
                continue
            return False
    return True


def check_single_switch(sol):
    """True when the policy, restricted to its reachable states, switches
    at most once per robot index."""
    team = sol.team
    seen = {0}
    stack = [0]
    switch_states = {}
    while stack:
        i = stack.pop()
        action = sol.policy.get(i)
        choice = _pick_choice(team.mdp.choices[i], action) if action is not None else None
        if choice is None:
            continue
        if choice.action == team.switch_action:
            robot = team.states[i][0]
            switch_states.setdefault(robot, set()).add(i)
        for t, _ in choice.outcomes:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return all(len(v) <= 1 for v in switch_states.values())


def validate_mission_decomposition(mission):
    """Warn when two tasks share an atom: a syntactic independence check
    only. Safety may share atoms with anything, it is conjoined everywhere."""
    warnings = []
    task_atoms = [atoms_of(f) for f in mission.tasks]
    for a in range(len(task_atoms)):
        for b in range(a + 1, len(task_atoms)):
            shared = sorted(task_atoms[a] & task_atoms[b])
            if shared:
                warnings.append(f"tasks {a} and {b} share atoms: {', '.join(shared)}")
    return warnings
