"""Materialized per-atom relations over factor ids, semi-join reduction over
the plan's join tree, and result enumeration."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from .index import Span, WordIndex
from .model import (
    Alphabet,
    FcCq,
    HasConstraintsError,
    JoinTree,
    RegularConstraint,
    SmallEquation,
    TwoFcCq,
    Variable,
    gyo,
)
from .oracle import brute_evaluate
from .planner import Plan


@dataclass(frozen=True)
class Relation:
    """Set of rows over an ordered schema of variables (factor ids)."""

    schema: tuple[Variable, ...]
    rows: frozenset[tuple[int, ...]]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.schema):
                raise ValueError("row arity does not match the schema")


@dataclass(frozen=True)
class ResultTuple:
    """One answer: head variables mapped to factor ids (canonical spans)."""

    assignment: tuple[tuple[Variable, int], ...]

    def words(self, ix: WordIndex) -> dict[str, str]:
        return {v.name: ix.word_of(f) for v, f in self.assignment}

    def to_json_obj(self, ix: WordIndex) -> dict:
        out = {}
        for v, f in self.assignment:
            s = ix.canonical_span(f)
            out[v.name] = {"word": ix.word_of(f), "span": [s.start, s.end]}
        return out


def _project_positions(positions: list[Variable], wid: int) -> tuple[tuple[Variable, ...], list[Optional[int]]]:
    """Schema of the distinct non-universe variables plus, per position,
    either its schema slot or None for universe positions."""
    schema: list[Variable] = []
    slots: list[Optional[int]] = []
    for v in positions:
        if v.is_universe:
            slots.append(None)
        else:
            if v not in schema:
                schema.append(v)
            slots.append(schema.index(v))
    return tuple(schema), slots


def _rows_from_tuples(positions: list[Variable], wid: int,
                      tuples: Iterator[tuple[int, ...]]) -> Relation:
    schema, slots = _project_positions(positions, wid)
    rows: set[tuple[int, ...]] = set()
    width = len(schema)
    for tup in tuples:
        out: list[Optional[int]] = [None] * width
        ok = True
        for value, slot in zip(tup, slots):
            if slot is None:
                if value != wid:
                    ok = False
                    break
            elif out[slot] is None:
                out[slot] = value
            elif out[slot] != value:
                ok = False
                break
        if ok:
            rows.add(tuple(out))  # type: ignore[arg-type]
    return Relation(schema, frozenset(rows))


def _splits(ix: WordIndex, fid: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write the factor as a concatenation of `parts` factors."""
    span = ix.canonical_span(fid)
    if parts == 1:
        yield (fid,)
        return
    for cuts in combinations(range(span.start, span.end + 1), parts - 1):
        bounds = (span.start,) + cuts + (span.end,)
        yield tuple(ix.factor_id(Span(bounds[t], bounds[t + 1])) for t in range(parts))


def materialize_atom(ix: WordIndex, atom) -> Relation:
    """Relation of one atom: concatenation splits, the copy diagonal, or the
    factors a regex accepts.  Universe positions are pre-bound to the word."""
    wid = ix.whole_word_id()
    if isinstance(atom, RegularConstraint):
        members = ix.regex_members(atom.regex)
        if atom.var.is_universe:
            return Relation((), frozenset({()} if wid in members else set()))
        return Relation((atom.var,), frozenset((m,) for m in members))

    assert isinstance(atom, SmallEquation)
    positions = [atom.lhs, *atom.rhs]
    parts = len(atom.rhs)
    if parts == 1:
        if atom.lhs.is_universe or atom.rhs[0].is_universe:
            tuples: Iterator[tuple[int, ...]] = iter([(wid, wid)])
        else:
            tuples = ((f, f) for f in ix.all_factor_ids())
    elif atom.lhs.is_universe:
        tuples = ((wid,) + rest for rest in _splits(ix, wid, parts))
    else:
        tuples = ((z,) + rest for z in ix.all_factor_ids() for rest in _splits(ix, z, parts))
    return _rows_from_tuples(positions, wid, tuples)


def semijoin(r: Relation, s: Relation) -> Relation:
    """Rows of r whose shared-variable projection appears in s."""
    shared = [v for v in r.schema if v in s.schema]
    if not shared:
        return r if s.rows else Relation(r.schema, frozenset())
    r_idx = [r.schema.index(v) for v in shared]
    s_idx = [s.schema.index(v) for v in shared]
    keys = {tuple(row[i] for i in s_idx) for row in s.rows}
    return Relation(r.schema, frozenset(row for row in r.rows
                                        if tuple(row[i] for i in r_idx) in keys))


def _orientation(tree: JoinTree, root: int = 0) -> tuple[list[int], list[list[int]], list[Optional[int]]]:
    """BFS order, children lists and parent pointers for a rooted traversal."""
    adj = tree.adjacency()
    order = [root]
    parent: list[Optional[int]] = [None] * len(tree.nodes)
    seen = {root}
    for v in order:
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                order.append(w)
    children: list[list[int]] = [[] for _ in tree.nodes]
    for v in order[1:]:
        children[parent[v]].append(v)  # type: ignore[index]
    return order, children, parent


def _materialize_all(plan_tree: JoinTree, ix: WordIndex) -> list[Relation]:
    return [materialize_atom(ix, node) for node in plan_tree.nodes]


def _bottom_up(rels: list[Relation], order: list[int], children: list[list[int]]) -> None:
    for v in reversed(order):
        for c in children[v]:
            rels[v] = semijoin(rels[v], rels[c])


def _top_down(rels: list[Relation], order: list[int], parent: list[Optional[int]]) -> None:
    for v in order:
        p = parent[v]
        if p is not None:
            rels[v] = semijoin(rels[v], rels[p])


def model_check(plan: Plan, ix: WordIndex) -> bool:
    """Bottom-up semi-join pass; true iff the root keeps at least one tuple."""
    rels = _materialize_all(plan.tree, ix)
    order, children, _ = _orientation(plan.tree)
    _bottom_up(rels, order, children)
    return bool(rels[order[0]].rows)


def full_reduction(plan: Plan, ix: WordIndex) -> list[Relation]:
    """Bottom-up then top-down semi-joins: no dangling tuples remain."""
    rels = _materialize_all(plan.tree, ix)
    order, children, parent = _orientation(plan.tree)
    _bottom_up(rels, order, children)
    _top_down(rels, order, parent)
    return rels


def enumerate_results(plan: Plan, ix: WordIndex) -> Iterator[ResultTuple]:
    """Backtracking join along the reduced tree, projected onto the head and
    deduplicated at word level (factor ids are canonical per word)."""
    rels = full_reduction(plan, ix)
    order, children, _ = _orientation(plan.tree)
    root = order[0]
    head = plan.query.head

    def rows_consistent(v: int, binding: dict[Variable, int]) -> Iterator[dict[Variable, int]]:
        rel = rels[v]
        bound_idx = [(i, binding[x]) for i, x in enumerate(rel.schema) if x in binding]
        for row in rel.rows:
            if all(row[i] == val for i, val in bound_idx):
                child = dict(binding)
                child.update(zip(rel.schema, row))
                yield child

    def walk(v: int, binding: dict[Variable, int]) -> Iterator[dict[Variable, int]]:
        for b in rows_consistent(v, binding):
            yield from _descend(children[v], 0, b)

    def _descend(kids: list[int], at: int, binding: dict[Variable, int]) -> Iterator[dict[Variable, int]]:
        if at == len(kids):
            yield binding
            return
        for b in walk(kids[at], binding):
            yield from _descend(kids, at + 1, b)

    seen: set[tuple[int, ...]] = set()
    for binding in walk(root, {}):
        key = tuple(binding[v] for v in head)
        if key in seen:
            continue
        seen.add(key)
        yield ResultTuple(tuple((v, binding[v]) for v in head))


def join_tree_for(two: TwoFcCq) -> Optional[JoinTree]:
    """Join tree over all atoms of a short-equation query (constraints too)."""
    atoms: list[tuple[object, set[Variable]]] = [(eq, eq.variables()) for eq in two.equations]
    atoms += [(c, {c.var}) for c in two.constraints]
    return gyo(atoms)


def check_universality(q: FcCq, alphabet: Alphabet) -> bool:
    """A Boolean constraint-free query accepts every word iff it accepts the
    empty word and some single letter.

    Membership on the two candidate words runs through the engine when the
    query is acyclic, through brute force otherwise.
    """
    from .planner import plan as _plan
    from .model import CyclicQueryError

    if q.head:
        raise ValueError("universality is defined for Boolean queries")
    if q.constraints:
        raise HasConstraintsError("universality shortcut only applies without regular constraints")
    try:
        p = _plan(q)

        def member(w: str) -> bool:
            return model_check(p, WordIndex(w))
    except CyclicQueryError:
        def member(w: str) -> bool:
            return bool(brute_evaluate(q, w))
    if not member(""):
        return False
    return any(member(a) for a in alphabet)


def check_k_ambiguous_bounded(q: FcCq, k: int, max_len: int, alphabet: Alphabet) -> bool:
    """No word of length <= max_len yields more than k head assignments.

    A bounded refutation search: True means no counterexample up to the bound.
    """
    words = [""]
    for w in words:
        if len(brute_evaluate(q, w)) > k:
            return False
        if len(w) < max_len:
            words.extend(w + a for a in alphabet)
    return True
