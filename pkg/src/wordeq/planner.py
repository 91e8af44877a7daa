"""Whole-query pipeline: normalization, weak join tree, cyclicity prechecks,
per-atom constrained decomposition, and final join-tree assembly."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .decompose import decompose_atom_with_constraints, is_acyclic_pattern
from .model import (
    CyclicQueryError,
    FcCq,
    FreshVars,
    JoinTree,
    Pattern,
    REpsilon,
    RegularConstraint,
    SmallEquation,
    TwoFcCq,
    UNIVERSE,
    Variable,
    WordEquation,
    gyo,
    regex_word,
    vars_of,
    verify_join_tree,
)


@dataclass(frozen=True)
class NormalizedQuery:
    """Equivalent query whose equations all have terminal-free right sides
    that avoid the left side and the universe variable, pairwise distinct.

    Epsilon requirements surface as regular constraints (x in //) instead of
    empty right-hand sides; ``trace`` records the rewrites for explanation.
    """

    query: FcCq
    trace: tuple[str, ...]
    epsilon_vars: frozenset[Variable]


def _shown(p: Pattern) -> str:
    return ".".join(it.name if isinstance(it, Variable) else repr(it) for it in p) or "''"


def normalize(q: FcCq) -> NormalizedQuery:
    """Rewrite to normalized form; the result is equivalent on all words."""
    fresh = FreshVars(v.name for v in q.variables() | set(q.head))
    equations = list(q.equations)
    constraints = list(q.constraints)
    trace: list[str] = []
    eps_vars: set[Variable] = set()

    def add_eps(v: Variable) -> None:
        if v not in eps_vars:
            eps_vars.add(v)
            constraints.append(RegularConstraint(v, REpsilon()))

    # Terminal blocks become fresh variables pinned by regular constraints.
    for idx, eq in enumerate(equations):
        if all(isinstance(it, Variable) for it in eq.rhs):
            continue
        new_rhs: list[Variable] = []
        run: list[str] = []

        def flush() -> None:
            if run:
                z = fresh.fresh("t")
                constraints.append(RegularConstraint(z, regex_word("".join(run))))
                new_rhs.append(z)
                run.clear()

        for it in eq.rhs:
            if isinstance(it, Variable):
                flush()
                new_rhs.append(it)
            else:
                run.append(it)
        flush()
        equations[idx] = WordEquation(eq.lhs, tuple(new_rhs))
        trace.append(f"terminal blocks of {eq.lhs} = {_shown(eq.rhs)} replaced by fresh variables")

    for _ in range(4 * len(equations) * len(equations) + 8):
        changed = False
        for idx, eq in enumerate(equations):
            # Empty right side pins the left side to epsilon.
            if len(eq.rhs) == 0:
                equations.pop(idx)
                add_eps(eq.lhs)
                trace.append(f"{eq.lhs} = '' recorded as an epsilon constraint")
                changed = True
                break
            # Left side occurring on the right forces the remainder to epsilon.
            if eq.lhs in vars_of(eq.rhs):
                others = [v for v in eq.rhs if isinstance(v, Variable) and v != eq.lhs]
                z = fresh.fresh("z")
                equations[idx] = WordEquation(eq.lhs, (z,))
                for v in others:
                    add_eps(v)
                trace.append(f"{eq.lhs} occurs on both sides; remainder forced to epsilon")
                changed = True
                break
            # The universe variable on the right pins the left side to the word.
            if any(isinstance(v, Variable) and v.is_universe for v in eq.rhs):
                others = [v for v in eq.rhs if isinstance(v, Variable) and not v.is_universe]
                equations[idx] = WordEquation(UNIVERSE, (eq.lhs,))
                for v in others:
                    add_eps(v)
                trace.append(f"{eq.lhs} swallows the whole word; rewritten with u on the left")
                changed = True
                break
        if changed:
            continue
        # Duplicate right sides: the later equation becomes a copy.
        seen: dict[tuple, int] = {}
        for idx, eq in enumerate(equations):
            key = tuple(eq.rhs)
            if key not in seen:
                seen[key] = idx
                continue
            first = equations[seen[key]]
            if first.lhs == eq.lhs:
                equations.pop(idx)
                trace.append(f"dropped duplicate atom {eq.lhs} = {_shown(eq.rhs)}")
            else:
                equations[idx] = WordEquation(eq.lhs, (first.lhs,))
                trace.append(f"{eq.lhs} = {_shown(eq.rhs)} duplicates {first.lhs}; now a copy")
            changed = True
            break
        if not changed:
            break
    else:
        raise AssertionError("normalization did not converge")

    out = FcCq(q.head, tuple(equations), tuple(constraints))
    return NormalizedQuery(out, tuple(trace), frozenset(eps_vars))


def to_structured_normal_form(q: FcCq) -> FcCq:
    """Equivalent query with the universe variable on every left-hand side
    and absent from every right-hand side."""
    fresh = FreshVars(v.name for v in q.variables() | set(q.head))
    work = list(q.equations)
    constraints = list(q.constraints)
    out: list[WordEquation] = []

    # Step one: eliminate the universe variable from right-hand sides.
    while work:
        eq = work.pop(0)
        split = next((i for i, it in enumerate(eq.rhs)
                      if isinstance(it, Variable) and it.is_universe), None)
        if split is None:
            out.append(eq)
            continue
        before, after = eq.rhs[:split], eq.rhs[split + 1:]
        if not eq.lhs.is_universe:
            work.append(WordEquation(UNIVERSE, (eq.lhs,)))
        z = fresh.fresh("z")
        work.append(WordEquation(z, before))
        work.append(WordEquation(z, after))
        work.append(WordEquation(z, ()))

    # Step two: relocate non-universe left-hand sides behind fresh context.
    anchors: dict[Variable, tuple[Variable, Variable]] = {}
    final: list[WordEquation] = []
    for eq in out:
        if eq.lhs.is_universe:
            final.append(eq)
            continue
        if eq.lhs not in anchors:
            p, s = fresh.fresh(f"p_{eq.lhs.name}"), fresh.fresh(f"s_{eq.lhs.name}")
            anchors[eq.lhs] = (p, s)
            final.append(WordEquation(UNIVERSE, (p, eq.lhs, s)))
        p, s = anchors[eq.lhs]
        final.append(WordEquation(UNIVERSE, (p,) + eq.rhs + (s,)))

    return FcCq(q.head, tuple(final), tuple(constraints))


# --- weak join trees and prechecks ---------------------------------------------


def weak_join_tree(nq: NormalizedQuery) -> Optional[JoinTree]:
    """Mark-and-absorb over whole equations; constraints attach later."""
    eqs = nq.query.equations
    if not eqs:
        return JoinTree((), (), ())
    return gyo([(eq, eq.variables()) for eq in eqs])


def edge_shared_vars(tree: JoinTree, a: int, b: int) -> frozenset[Variable]:
    return tree.var_sets[a] & tree.var_sets[b]


def cyclicity_prechecks(nq: NormalizedQuery, weak: Optional[JoinTree]) -> Optional[str]:
    """Reasons the query is definitely cyclic, or None when all checks pass."""
    if weak is None:
        return "rule 1: no weak join tree exists"
    eqs = nq.query.equations
    for eq in eqs:
        if len(eq.rhs) >= 2 and not is_acyclic_pattern(eq.rhs):
            return f"rule 2: right side of {eq.lhs} = {_shown(eq.rhs)} is a cyclic pattern"
    for i in range(len(eqs)):
        for j in range(i + 1, len(eqs)):
            shared = ({v for v in eqs[i].variables() if not v.is_universe}
                      & {v for v in eqs[j].variables() if not v.is_universe})
            if len(shared) > 3:
                return (f"rule 3: atoms {i} and {j} share {len(shared)} variables "
                        f"({', '.join(sorted(v.name for v in shared))})")
            if len(shared) == 3 and (eqs[i].size() > 3 or eqs[j].size() > 3):
                return f"rule 4: atoms {i} and {j} share 3 variables but one is longer than an atom"
    return None


# --- the full plan ---------------------------------------------------------------


@dataclass(frozen=True)
class Plan:
    """Decomposed query, its join tree, and bookkeeping for explanation."""

    query: TwoFcCq
    tree: JoinTree
    normalized: NormalizedQuery
    weak_tree: JoinTree
    atom_groups: tuple[tuple[int, ...], ...]   # node indices per original equation
    constraint_nodes: tuple[int, ...] = ()

    def explain(self) -> str:
        lines = ["normalized query:"]
        for eq in self.normalized.query.equations:
            lines.append(f"  {eq.lhs} = {_shown(eq.rhs)}")
        for c in self.normalized.query.constraints:
            lines.append(f"  {c.var} in /.../")
        if self.normalized.trace:
            lines.append("rewrites:")
            lines.extend(f"  {t}" for t in self.normalized.trace)
        lines.append("decomposed atoms:")
        for node in self.tree.nodes:
            lines.append(f"  {node}")
        lines.append("join tree edges (shared variables):")
        for a, b in self.tree.edges:
            shared = sorted(v.name for v in self.tree.var_sets[a] & self.tree.var_sets[b])
            lines.append(f"  [{a}] -- [{b}]   {{{', '.join(shared)}}}")
        return "\n".join(lines)


def plan(q: FcCq, prefactor: bool = False) -> Plan:
    """Decide acyclicity and assemble the evaluation plan.

    Raises CyclicQueryError (with the failing stage) when no acyclic
    decomposition exists.
    """
    if prefactor:
        q = prefactor_common_subpatterns(q)
    nq = normalize(q)
    weak = weak_join_tree(nq)
    reason = cyclicity_prechecks(nq, weak)
    if reason is not None:
        stage = "weak-join-tree" if weak is None else "precheck"
        raise CyclicQueryError(stage, reason)
    assert weak is not None

    eqs = nq.query.equations
    fresh = FreshVars(v.name for v in nq.query.variables() | set(nq.query.head))

    incident: dict[int, list[frozenset[Variable]]] = {i: [] for i in range(len(eqs))}
    for a, b in weak.edges:
        label = edge_shared_vars(weak, a, b)
        incident[a].append(label)
        incident[b].append(label)

    decomposed: list[TwoFcCq] = []
    for i, eq in enumerate(eqs):
        labels = incident[i]
        if any(len(l) == 3 for l in labels):
            # Prechecks guarantee the atom is small enough to stay verbatim.
            assert len(eq.rhs) <= 2
            rhs = tuple(v for v in eq.rhs if isinstance(v, Variable))
            decomposed.append(TwoFcCq(head=(), equations=(SmallEquation(eq.lhs, rhs),),
                                      introduced=frozenset()))
            continue
        pairs = {l for l in labels if len(l) == 2}
        psi = decompose_atom_with_constraints(eq, pairs, fresh)
        if psi is None:
            raise CyclicQueryError(
                "atom-decomposition",
                f"atom {eq.lhs} = {_shown(eq.rhs)} admits no acyclic decomposition "
                f"covering {sorted(sorted(v.name for v in p) for p in pairs)}")
        decomposed.append(psi)

    # Per-atom join trees, then cross edges along the weak tree (the skeleton).
    nodes: list[object] = []
    node_vars: list[frozenset[Variable]] = []
    edges: list[tuple[int, int]] = []
    groups: list[tuple[int, ...]] = []
    for psi in decomposed:
        sub = gyo([(e, e.variables()) for e in psi.equations])
        assert sub is not None, "per-atom decomposition lost acyclicity"
        base = len(nodes)
        for e in psi.equations:
            nodes.append(e)
            node_vars.append(frozenset(v for v in e.variables() if not v.is_universe))
        edges.extend((base + a, base + b) for a, b in sub.edges)
        groups.append(tuple(range(base, len(nodes))))

    def anchor(group: tuple[int, ...], needed: frozenset[Variable]) -> int:
        for idx in group:
            if needed <= node_vars[idx]:
                return idx
        raise AssertionError(f"no atom covers {set(needed)}")

    for a, b in weak.edges:
        label = frozenset(v for v in edge_shared_vars(weak, a, b) if not v.is_universe)
        edges.append((anchor(groups[a], label), anchor(groups[b], label)))

    # Regular constraints are unary: hang each off a node containing its
    # variable, chaining constraints on variables no equation mentions.
    constraint_nodes: list[int] = []
    placed_constraint: dict[Variable, int] = {}
    for c in nq.query.constraints:
        idx = len(nodes)
        nodes.append(c)
        node_vars.append(frozenset() if c.var.is_universe else frozenset([c.var]))
        constraint_nodes.append(idx)
        target: Optional[int] = None
        if not c.var.is_universe:
            for g in groups:
                for cand in g:
                    if c.var in node_vars[cand]:
                        target = cand
                        break
                if target is not None:
                    break
            if target is None:
                target = placed_constraint.get(c.var)
            placed_constraint.setdefault(c.var, idx)
        if target is None:
            target = 0 if idx > 0 else None
        if target is not None:
            edges.append((target, idx))

    tree = JoinTree(tuple(nodes), tuple(node_vars), tuple(edges))
    assert verify_join_tree(tree), "assembled tree violates the join-tree condition"

    small_eqs = tuple(e for psi in decomposed for e in psi.equations)
    introduced = frozenset().union(*(psi.introduced for psi in decomposed)) if decomposed else frozenset()
    query = TwoFcCq(head=nq.query.head, equations=small_eqs,
                    constraints=nq.query.constraints, introduced=introduced)
    return Plan(query=query, tree=tree, normalized=nq, weak_tree=weak,
                atom_groups=tuple(groups), constraint_nodes=tuple(constraint_nodes))


def skeleton_of(p: Plan) -> JoinTree:
    """Contract the plan's join tree by atom membership; a weak join tree."""
    owner: dict[int, int] = {}
    for g_idx, group in enumerate(p.atom_groups):
        for node in group:
            owner[node] = g_idx
    # Constraint leaves join the group they hang off.
    adj = p.tree.adjacency()
    pending = [n for n in p.constraint_nodes]
    while pending:
        nxt = []
        for n in pending:
            hosts = [owner[m] for m in adj[n] if m in owner]
            if hosts:
                owner[n] = hosts[0]
            else:
                nxt.append(n)
        if len(nxt) == len(pending):
            for n in nxt:
                owner[n] = 0
            break
        pending = nxt

    eqs = p.normalized.query.equations
    edges = set()
    for a, b in p.tree.edges:
        ga, gb = owner[a], owner[b]
        if ga != gb:
            edges.add((min(ga, gb), max(ga, gb)))
    return JoinTree(
        nodes=tuple(eqs),
        var_sets=tuple(frozenset(v for v in eq.variables() if not v.is_universe) for eq in eqs),
        edges=tuple(sorted(edges)),
    )


def prefactor_common_subpatterns(q: FcCq) -> FcCq:
    """Optional rewrite: name maximal common subpatterns shared by two atoms.

    Off by default; it changes which queries pass the prechecks.
    """
    fresh = FreshVars(v.name for v in q.variables() | set(q.head))
    equations = list(q.equations)
    while True:
        best: Optional[tuple[Variable, ...]] = None
        counts: dict[tuple[Variable, ...], set[int]] = {}
        for idx, eq in enumerate(equations):
            rhs = eq.rhs
            if not all(isinstance(v, Variable) for v in rhs):
                continue
            for i in range(len(rhs)):
                for j in range(i + 2, len(rhs) + 1):
                    counts.setdefault(tuple(rhs[i:j]), set()).add(idx)  # type: ignore[arg-type]
        for seq, owners in counts.items():
            if len(owners) >= 2 and (best is None or len(seq) > len(best)):
                best = seq
        if best is None:
            return FcCq(q.head, tuple(equations), q.constraints)
        z = fresh.fresh("w")

        def replace(rhs: Pattern) -> Pattern:
            out: list = []
            i = 0
            while i < len(rhs):
                if tuple(rhs[i:i + len(best)]) == best:
                    out.append(z)
                    i += len(best)
                else:
                    out.append(rhs[i])
                    i += 1
            return tuple(out)

        equations = [WordEquation(eq.lhs, replace(eq.rhs)) for eq in equations]
        equations.append(WordEquation(z, best))
