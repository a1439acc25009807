"""Finite automata for the two temporal fragments, built by formula progression.

A state is a canonical residual formula: the obligation that remains after
the labels consumed so far. Progressing `true`/`false` loops, so both
fragments yield a total deterministic automaton over the powerset of the
formula's own atoms. Reachability formulas accept exactly in the `true`
residual; invariant formulas reject exactly in the `false` residual (the
trap), every other state being accepting.
"""

import json
from itertools import combinations

from .ltl import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eventually,
    Always,
    FalseConst,
    Formula,
    Next,
    NotAtom,
    Or,
    TrueConst,
    Until,
    atoms_of,
    format_formula,
    is_syntactically_cosafe,
    is_syntactically_safe,
    classify,
    FormulaClass,
    to_pnf,
)


class CompileError(ValueError):
    pass


def _key(f: Formula):
    """Structural total order used to sort conjunct/disjunct lists."""
    if isinstance(f, TrueConst):
        return (0, "", ())
    if isinstance(f, FalseConst):
        return (1, "", ())
    if isinstance(f, Atom):
        return (2, f.name, ())
    if isinstance(f, NotAtom):
        return (3, f.name, ())
    if isinstance(f, Next):
        return (4, "", (_key(f.child),))
    if isinstance(f, Eventually):
        return (5, "", (_key(f.child),))
    if isinstance(f, Always):
        return (6, "", (_key(f.child),))
    if isinstance(f, Until):
        return (7, "", (_key(f.left), _key(f.right)))
    if isinstance(f, And):
        return (8, "", tuple(_key(c) for c in f.children))
    if isinstance(f, Or):
        return (9, "", tuple(_key(c) for c in f.children))
    raise TypeError(f"not a formula node: {f!r}")


def _antichain(sets):
    """Minimal elements under inclusion: X | (X & Y) collapses to X."""
    keep = []
    for d in sorted(set(sets), key=lambda s: (len(s), tuple(sorted(_key(x) for x in s)))):
        if not any(k <= d for k in keep):
            keep.append(d)
    return keep


def _branches(f):
    """Conjunct sets of an already canonical formula."""
    if isinstance(f, Or):
        return [frozenset(_conjuncts(c)) for c in f.children]
    return [frozenset(_conjuncts(f))]


def _conjuncts(f):
    return f.children if isinstance(f, And) else (f,)


def _dnf(f):
    """Conjunct sets of `f` with children canonicalized, as an antichain.

    [] means false, [frozenset()] means true.
    """
    if isinstance(f, Or):
        out = []
        for c in f.children:
            cc = canonical(c)
            if isinstance(cc, TrueConst):
                return [frozenset()]
            if isinstance(cc, FalseConst):
                continue
            out.extend(_branches(cc))
        return _antichain(out)
    parts = [frozenset()]
    for c in f.children:
        cc = canonical(c)
        if isinstance(cc, FalseConst):
            return []
        if isinstance(cc, TrueConst):
            continue
        parts = _antichain(p | b for p in parts for b in _branches(cc))
    return parts


def canonical(f: Formula) -> Formula:
    """Canonical form giving progression states a finite identity.

    The boolean layer is rewritten to a disjunction of conjunctions of
    literals and temporal nodes, deduplicated, sorted and pruned by
    absorption, so progressing never nests fresh And/Or alternations;
    temporal operators over constants collapse. No complementary-literal
    or validity reasoning happens here; residuals like `p | !p` stay
    distinct from `true` on purpose, matching the strong/weak
    finite-trace semantics that accept only once the witness has
    actually been observed.
    """
    if isinstance(f, (TrueConst, FalseConst, Atom, NotAtom)):
        return f
    if isinstance(f, (And, Or)):
        parts = _dnf(f)
        if not parts:
            return FALSE
        terms = []
        for conj in parts:
            if not conj:
                return TRUE
            ordered = sorted(conj, key=_key)
            terms.append(ordered[0] if len(ordered) == 1 else And(tuple(ordered)))
        terms = sorted(terms, key=_key)
        return terms[0] if len(terms) == 1 else Or(tuple(terms))
    if isinstance(f, Next):
        c = canonical(f.child)
        if isinstance(c, (TrueConst, FalseConst)):
            return c
        return Next(c)
    if isinstance(f, Eventually):
        c = canonical(f.child)
        if isinstance(c, (TrueConst, FalseConst)):
            return c
        return Eventually(c)
    if isinstance(f, Always):
        c = canonical(f.child)
        if isinstance(c, (TrueConst, FalseConst)):
            return c
        return Always(c)
    if isinstance(f, Until):
        left = canonical(f.left)
        right = canonical(f.right)
        if isinstance(right, (TrueConst, FalseConst)):
            return right
        if isinstance(left, FalseConst):
            return right
        if isinstance(left, TrueConst):
            return Eventually(right)
        return Until(left, right)
    raise TypeError(f"not a formula node: {f!r}")


def progress(f: Formula, label: frozenset[str]) -> Formula:
    """One progression step: the canonical obligation after observing `label`.

    prog(p, L) = [p in L];  prog(X a, L) = a;  prog(F a, L) = prog(a, L) | F a;
    prog(G a, L) = prog(a, L) & G a;  prog(a U b, L) = prog(b, L) | (prog(a, L) & a U b).
    """
    if isinstance(f, (TrueConst, FalseConst)):
        return f
    if isinstance(f, Atom):
        return TRUE if f.name in label else FALSE
    if isinstance(f, NotAtom):
        return TRUE if f.name not in label else FALSE
    if isinstance(f, And):
        return canonical(And(tuple(progress(c, label) for c in f.children)))
    if isinstance(f, Or):
        return canonical(Or(tuple(progress(c, label) for c in f.children)))
    if isinstance(f, Next):
        return f.child
    if isinstance(f, Eventually):
        return canonical(Or((progress(f.child, label), f)))
    if isinstance(f, Always):
        return canonical(And((progress(f.child, label), f)))
    if isinstance(f, Until):
        return canonical(Or((progress(f.right, label), And((progress(f.left, label), f)))))
    raise TypeError(f"not a formula node: {f!r}")


class Dfa:
    """Total deterministic automaton over subsets of its relevant atoms."""

    def __init__(self, num_states, initial, accepting, atoms, delta, state_names=None):
        self.num_states: int = num_states
        self.initial: int = initial
        self.accepting: frozenset[int] = frozenset(accepting)
        self.atoms: tuple[str, ...] = tuple(atoms)
        self.delta: dict[tuple[int, frozenset[str]], int] = dict(delta)
        self.state_names = tuple(state_names) if state_names is not None else None

    def labels(self) -> list[frozenset[str]]:
        """Powerset of the relevant atoms, in a fixed deterministic order."""
        out = []
        for r in range(len(self.atoms) + 1):
            for combo in combinations(self.atoms, r):
                out.append(frozenset(combo))
        return out

    def advance(self, q: int, label) -> int:
        """Step on an arbitrary label set; irrelevant atoms are projected away."""
        return self.delta[(q, frozenset(label) & frozenset(self.atoms))]

    def run(self, trace) -> int:
        q = self.initial
        for step in trace:
            q = self.advance(q, step)
        return q

    def accepts(self, trace) -> bool:
        return self.run(trace) in self.accepting

    def initial_or_accepting(self, q: int) -> bool:
        return q == self.initial or q in self.accepting

    def to_dict(self) -> dict:
        trans = []
        for (q, label), q2 in sorted(self.delta.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))):
            trans.append({"from": q, "label": sorted(label), "to": q2})
        return {
            "states": list(range(self.num_states)),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "atoms": list(self.atoms),
            "trans": trans,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dfa":
        states = data["states"]
        delta = {}
        for t in data["trans"]:
            delta[(t["from"], frozenset(t["label"]))] = t["to"]
        dfa = cls(
            num_states=len(states),
            initial=data["initial"],
            accepting=frozenset(data["accepting"]),
            atoms=tuple(data["atoms"]),
            delta=delta,
        )
        missing = [(q, sorted(l)) for q in range(dfa.num_states) for l in dfa.labels() if (q, l) not in dfa.delta]
        if missing:
            raise ValueError(f"automaton is not total, missing transitions: {missing[:3]}")
        return dfa

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Dfa":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _explore(f: Formula, max_states: int):
    f0 = canonical(to_pnf(f))
    atoms = tuple(sorted(atoms_of(f0)))
    labels = []
    for r in range(len(atoms) + 1):
        for combo in combinations(atoms, r):
            labels.append(frozenset(combo))
    index = {f0: 0}
    order = [f0]
    delta = {}
    frontier = [f0]
    while frontier:
        nxt = []
        for g in frontier:
            qi = index[g]
            for label in labels:
                h = progress(g, label)
                if h not in index:
                    if len(index) >= max_states:
                        raise CompileError(
                            f"progression exceeded {max_states} states for {format_formula(f)!r}"
                        )
                    index[h] = len(order)
                    order.append(h)
                    nxt.append(h)
                delta[(qi, label)] = index[h]
        frontier = nxt
    return order, atoms, delta, index


def compile_cosafe(f: Formula, max_states: int = 50_000) -> Dfa:
    """Automaton accepting exactly the strong-semantics good prefixes."""
    if not is_syntactically_cosafe(f):
        raise CompileError("formula has G, not in the reachability fragment")
    order, atoms, delta, index = _explore(f, max_states)
    accepting = frozenset({index[TRUE]}) if TRUE in index else frozenset()
    return Dfa(len(order), 0, accepting, atoms, delta, [format_formula(g) for g in order])


def compile_safe(f: Formula, max_states: int = 50_000) -> Dfa:
    """Automaton accepting exactly the traces that are not yet bad prefixes."""
    if not is_syntactically_safe(f):
        raise CompileError("formula has F or U, not in the invariant fragment")
    order, atoms, delta, index = _explore(f, max_states)
    trap = index.get(FALSE)
    accepting = frozenset(i for i in range(len(order)) if i != trap)
    return Dfa(len(order), 0, accepting, atoms, delta, [format_formula(g) for g in order])


def compile_formula(f: Formula, max_states: int = 50_000) -> Dfa:
    """Dispatch on the syntactic fragment; rejects formulas in neither."""
    fc = classify(f)
    if fc is FormulaClass.COSAFE:
        return compile_cosafe(f, max_states)
    if fc is FormulaClass.SAFE:
        return compile_safe(f, max_states)
    raise CompileError(f"{format_formula(f)!r} mixes F/U with G, no finite-trace automaton")


def minimize(dfa: Dfa) -> Dfa:
    """Hopcroft minimization; drops unreachable states first."""
    labels = dfa.labels()

    reachable = {dfa.initial}
    stack = [dfa.initial]
    while stack:
        q = stack.pop()
        for label in labels:
            q2 = dfa.delta[(q, label)]
            if q2 not in reachable:
                reachable.add(q2)
                stack.append(q2)

    acc = frozenset(q for q in reachable if q in dfa.accepting)
    rej = frozenset(reachable - acc)
    partition = {b for b in (acc, rej) if b}

    # inverse transition maps, one per label
    pre: dict[frozenset[str], dict[int, set[int]]] = {label: {} for label in labels}
    for q in reachable:
        for label in labels:
            pre[label].setdefault(dfa.delta[(q, label)], set()).add(q)

    # seed the worklist with the smaller side; keeps refinement near n log n
    work = {min((acc, rej), key=len)} if acc and rej else set(partition)
    work = set(work)
    while work:
        splitter = work.pop()
        for label in labels:
            movers = set()
            for q in splitter:
                movers |= pre[label].get(q, set())
            if not movers:
                continue
            for block in list(partition):
                inside = block & movers
                if not inside or inside == block:
                    continue
                outside = block - movers
                partition.remove(block)
                partition.add(frozenset(inside))
                partition.add(frozenset(outside))
                if block in work:
                    work.remove(block)
                    work.add(frozenset(inside))
                    work.add(frozenset(outside))
                else:
                    work.add(min((frozenset(inside), frozenset(outside)), key=len))

    blocks = sorted(partition, key=min)
    block_of = {}
    for i, b in enumerate(blocks):
        for q in b:
            block_of[q] = i
    delta = {}
    for i, b in enumerate(blocks):
        rep = min(b)
        for label in labels:
            delta[(i, label)] = block_of[dfa.delta[(rep, label)]]
    accepting = frozenset(i for i, b in enumerate(blocks) if min(b) in dfa.accepting)
    names = None
    if dfa.state_names is not None:
        names = [dfa.state_names[min(b)] for b in blocks]
    return Dfa(len(blocks), block_of[dfa.initial], accepting, dfa.atoms, delta, names)
