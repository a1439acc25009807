"""Joint execution of a team plan with failure-driven reallocation.

The solved team model moves one robot at a time. At execution time every
robot runs its own segment simultaneously, so this module rebuilds the
plan as a synchronized Markov chain over joint states: one map position
per robot plus a single shared automaton vector, advanced once per step
on the union of the labels of all robots' current positions. Union
semantics credits a task even when a robot other than the allocated one
walks over its atom; instances meant for exact comparisons should keep
task atoms off the other robots' paths.

States where a robot has just broken down become absorbing reallocation
points. Addressing a point solves a fresh team model from the robots'
current positions and grafts the synchronized continuation onto the
point, so the guarantee improves monotonically and unaddressed points
count as failures.
"""

import itertools
import time
from dataclasses import dataclass, field

from .product import advance_vector, compile_mission, local_product, vector_accepting, vector_initial, vector_violating
from .team import build_team, check_class, check_single_switch, solve_stapu

EXECUTING = "executing"
DONE = "done"
FAILED = "failed"
IDLE = "idle"

STEP = "step"
SUCCESS = "success"
VIOLATED = "violated"
POINT = "point"
DEAD = "dead"


class UnsupportedModelError(ValueError):
    """Inputs outside the deterministic-or-fail class the executor covers."""


@dataclass
class JointNode:
    t: int
    positions: tuple
    statuses: tuple
    q: tuple
    kind: str
    actions: tuple | None = None
    steps: list = field(default_factory=list)
    fresh: tuple = ()
    mass: float = 0.0
    addressed: bool = False
    child: object = None

    def to_dict(self, chain_index):
        out = {
            "t": self.t,
            "positions": list(self.positions),
            "statuses": list(self.statuses),
            "q": list(self.q),
            "kind": self.kind,
            "steps": [[p, j] for p, j in self.steps],
        }
        if self.actions is not None:
            out["actions"] = list(self.actions)
        if self.fresh:
            out["fresh"] = list(self.fresh)
        if self.child is not None:
            out["child"] = chain_index[id(self.child)]
        return out


class JointChain:
    """One synchronized chain. Node 0 is the root; successors are appended
    after their parent, so list order is topological."""

    def __init__(self, nodes):
        self.nodes = nodes
        self._propagate()

    def _propagate(self):
        for nd in self.nodes:
            nd.mass = 0.0
        self.nodes[0].mass = 1.0
        success = failure = 0.0
        points = []
        for i, nd in enumerate(self.nodes):
            if nd.kind == STEP:
                for p, j in nd.steps:
                    self.nodes[j].mass += nd.mass * p
            elif nd.kind == SUCCESS:
                success += nd.mass
            elif nd.kind == POINT:
                points.append(i)
            else:
                failure += nd.mass
        self.success_mass = success
        self.failure_mass = failure
        self.point_indices = points


class ReallocPoint:
    """A joint state some robot just failed in."""

    def __init__(self, chain, node_index, robot, prob):
        self.chain = chain
        self.node_index = node_index
        self.robot = robot
        self.prob = prob

    @property
    def node(self):
        return self.chain.nodes[self.node_index]

    @property
    def positions(self):
        return self.node.positions

    @property
    def q(self):
        return self.node.q

    @property
    def failed(self):
        return frozenset(r for r, st in enumerate(self.node.statuses) if st == FAILED)

    @property
    def addressed(self):
        return self.node.addressed or self.node.child is not None

    def mark_addressed(self):
        self.node.addressed = True


class JointPolicy:
    """Grafted tree of synchronized chains. Chain 0 is the initial plan."""

    def __init__(self, chains, robots):
        self.chains = list(chains)
        self.robots = robots

    def graft(self, point, continuation):
        if point.node.child is not None:
            raise ValueError("reallocation point already grafted")
        point.node.child = continuation.chains[0]
        self.chains.extend(continuation.chains)

    def base_masses(self):
        """Absolute reach probability of each chain's root, keyed by id."""
        base = {id(self.chains[0]): 1.0}
        for chain in self.chains:
            here = base.get(id(chain))
            if here is None:
                continue
            for nd in chain.nodes:
                if nd.child is not None:
                    base[id(nd.child)] = here * nd.mass
        return base


def _segment_by_robot(sol):
    out = {}
    for seg in sol.segments:
        if seg["robot"] in out:
            raise UnsupportedModelError("plan visits a robot twice")
        out[seg["robot"]] = seg
    return out


def _program(model, seg):
    """Per-step (source, live successor, failure probability, action name)."""
    steps = []
    fail = model.failure_state
    for step in seg["choices"]:
        s = step["state"]["s"]
        name = step["action"]
        choice = next((c for c in model.choices[s] if model.actions[c.action] == name), None)
        if choice is None:
            raise UnsupportedModelError(f"action {name!r} not enabled at state {s}")
        live = [t for t, _ in choice.outcomes if t != fail]
        if len(live) != 1:
            raise UnsupportedModelError("segment action is not deterministic-or-fail")
        pfail = sum(p for t, p in choice.outcomes if t == fail)
        steps.append((s, live[0], pfail, name))
    return steps


def _classify(team, q, statuses, fresh):
    if vector_accepting(team.task_dfas, team.safety_dfa, q):
        return SUCCESS
    if vector_violating(team.safety_dfa, q):
        return VIOLATED
    if fresh and any(st != FAILED for st in statuses):
        return POINT
    if any(st == EXECUTING for st in statuses):
        return STEP
    return DEAD


def _expand(team, models, progs, node, nodes):
    n = len(models)
    movers = []
    opts = []
    names = []
    for r in range(n):
        if node.statuses[r] != EXECUTING:
            names.append(IDLE)
            continue
        _, succ, pfail, name = progs[r][node.t]
        names.append(name)
        movers.append(r)
        branch = [(succ, 1.0 - pfail, False)]
        if pfail > 0.0:
            branch.append((models[r].failure_state, pfail, True))
        opts.append(branch)
    node.actions = tuple(names)
    for combo in itertools.product(*opts):
        prob = 1.0
        pos = list(node.positions)
        sts = list(node.statuses)
        fresh = []
        for r, (tgt, p, died) in zip(movers, combo):
            prob *= p
            pos[r] = tgt
            if died:
                sts[r] = FAILED
                fresh.append(r)
            elif node.t + 1 >= len(progs[r]):
                sts[r] = DONE
        label = frozenset().union(*(models[r].label(pos[r]) for r in range(n)))
        q = advance_vector(team.task_dfas, team.safety_dfa, node.q, label)
        child = JointNode(
            t=node.t + 1,
            positions=tuple(pos),
            statuses=tuple(sts),
            q=q,
            kind=_classify(team, q, sts, fresh),
            fresh=tuple(fresh),
        )
        node.steps.append((prob, len(nodes)))
        nodes.append(child)


def _build_chain(sol, q0):
    team = sol.team
    n = len(team.products)
    models = [p.source for p in team.products]
    segs = _segment_by_robot(sol)
    progs = []
    positions = []
    statuses = []
    for r in range(n):
        prog = _program(models[r], segs[r])
        progs.append(prog)
        positions.append(prog[0][0] if prog else segs[r]["entry"]["s"])
        if r in team.failed:
            statuses.append(FAILED)
        elif prog:
            statuses.append(EXECUTING)
        else:
            statuses.append(DONE)
    if q0 is None:
        label = frozenset().union(*(models[r].label(positions[r]) for r in range(n)))
        q0 = advance_vector(
            team.task_dfas, team.safety_dfa,
            vector_initial(team.task_dfas, team.safety_dfa), label,
        )
    root = JointNode(
        t=0,
        positions=tuple(positions),
        statuses=tuple(statuses),
        q=tuple(q0),
        kind=_classify(team, tuple(q0), statuses, ()),
    )
    nodes = [root]
    i = 0
    while i < len(nodes):
        if nodes[i].kind == STEP:
            _expand(team, models, progs, nodes[i], nodes)
        i += 1
    return JointChain(nodes)


def synchronize(sol, q0=None):
    """Rebuild a plan as the chain of simultaneous per-robot steps.

    `q0` overrides the automaton vector of the joint start; by default it
    is the mission start advanced once with the union of the robots'
    entry labels. Continuations grafted at a reallocation point pass the
    point's vector, which already accounts for every robot's position.
    """
    for r, product in enumerate(sol.team.products):
        if not check_class(product.source):
            raise UnsupportedModelError(
                f"robot {r}: actions must be deterministic or two-outcome failures"
            )
    if not check_single_switch(sol):
        raise UnsupportedModelError("plan hands over from more than one state per robot")
    return JointPolicy([_build_chain(sol, q0)], robots=len(sol.team.products))


def _survey(jp):
    """Totals over the grafted tree plus every ungrafted point."""
    base = jp.base_masses()
    success = failure = 0.0
    points = []
    for chain in jp.chains:
        here = base.get(id(chain))
        if here is None:
            continue
        success += here * chain.success_mass
        failure += here * chain.failure_mass
        for i in chain.point_indices:
            nd = chain.nodes[i]
            if nd.child is None:
                points.append(ReallocPoint(chain, i, min(nd.fresh), here * nd.mass))
    return success, failure, points


def mission_masses(jp):
    """(success, failure, unaddressed) over the current joint policy."""
    success, failure, points = _survey(jp)
    return success, failure, sum(p.prob for p in points)


def find_realloc_points(jp):
    """Ungrafted, unaddressed points, highest reach probability first.

    Probabilities are absolute, propagated forward through the grafted
    tree. Ties keep graft-then-discovery order.
    """
    _, _, points = _survey(jp)
    order = {id(c): k for k, c in enumerate(jp.chains)}
    points = [p for p in points if not p.addressed]
    points.sort(key=lambda p: (-p.prob, order[id(p.chain)], p.node_index))
    return points


def solve_realloc(point, products, mission=None, epsilon=1e-6):
    """Replan from a failure: fresh team model whose entries are the
    robots' current positions, started at the failed robot so the ring
    hands its tasks onward."""
    if mission is not None and any(p.mission != mission for p in products):
        raise ValueError("products were built for a different mission")
    team = build_team(
        products,
        entries=list(point.positions),
        start_robot=point.robot,
        start_q=point.q,
        failed=point.failed,
    )
    sol = solve_stapu(team, epsilon=epsilon)
    point.mark_addressed()
    return sol


@dataclass
class GuaranteeReport:
    value: float
    initial_value: float
    reallocations: int
    unaddressed: float
    failure: float
    log: list
    wall_ms: float

    def to_dict(self):
        return {
            "value": self.value,
            "initial_value": self.initial_value,
            "reallocations": self.reallocations,
            "unaddressed": self.unaddressed,
            "failure": self.failure,
            "wall_ms": self.wall_ms,
            "log": self.log,
        }


def _log_entry(jp, reallocations, point_prob, new_value, t0):
    success, failure, unaddressed = mission_masses(jp)
    return {
        "reallocations": reallocations,
        "point_probability": point_prob,
        "value": new_value,
        "guarantee": success,
        "success": success,
        "failure": failure,
        "unaddressed": unaddressed,
        "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
    }


def run_stapu_with_realloc(models, mission, max_realloc=None, time_limit=None, epsilon=1e-6):
    """Plan, synchronize, then keep addressing the most probable failure
    until none remain or the budget runs out. Returns the grafted joint
    policy and the guarantee it supports; whatever stays unaddressed is
    counted as failure, so stopping early only understates the value."""
    t0 = time.perf_counter()
    for r, model in enumerate(models):
        if not check_class(model):
            raise UnsupportedModelError(
                f"robot {r}: actions must be deterministic or two-outcome failures"
            )
    shared = compile_mission(mission)
    products = [local_product(m, mission, automata=shared) for m in models]
    sol = solve_stapu(build_team(products), epsilon=epsilon)
    jp = synchronize(sol)
    log = [_log_entry(jp, 0, None, sol.value, t0)]
    reallocations = 0
    while max_realloc is None or reallocations < max_realloc:
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            break
        points = find_realloc_points(jp)
        if not points:
            break
        point = points[0]
        sub = solve_realloc(point, products, epsilon=epsilon)
        jp.graft(point, synchronize(sub, q0=point.q))
        reallocations += 1
        log.append(_log_entry(jp, reallocations, point.prob, sub.value, t0))
    success, failure, unaddressed = mission_masses(jp)
    report = GuaranteeReport(
        value=success,
        initial_value=sol.value,
        reallocations=reallocations,
        unaddressed=unaddressed,
        failure=failure,
        log=log,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
    )
    return jp, report


def policy_to_dict(jp, report=None):
    index = {id(c): k for k, c in enumerate(jp.chains)}
    out = {
        "robots": jp.robots,
        "chains": [{"nodes": [nd.to_dict(index) for nd in c.nodes]} for c in jp.chains],
    }
    if report is not None:
        out["report"] = report.to_dict()
    return out


def policy_from_dict(data):
    chains = []
    links = []
    for ci, cd in enumerate(data["chains"]):
        nodes = []
        for ni, nd in enumerate(cd["nodes"]):
            node = JointNode(
                t=nd["t"],
                positions=tuple(nd["positions"]),
                statuses=tuple(nd["statuses"]),
                q=tuple(nd["q"]),
                kind=nd["kind"],
                actions=tuple(nd["actions"]) if "actions" in nd else None,
                fresh=tuple(nd.get("fresh", ())),
            )
            node.steps = [(p, j) for p, j in nd["steps"]]
            if "child" in nd:
                links.append((ci, ni, nd["child"]))
            nodes.append(node)
        chains.append(JointChain(nodes))
    for ci, ni, target in links:
        chains[ci].nodes[ni].child = chains[target]
    return JointPolicy(chains, robots=data["robots"])
