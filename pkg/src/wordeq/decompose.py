"""Pattern acyclicity and acyclic decompositions into short word equations.

A terminal-free pattern is acyclic when some full bracketing of it decomposes
into a query with a join tree.  The decision procedure grows a derivation
graph of acyclic subintervals bottom-up; a concatenation tree carved out of
that graph yields the decomposition itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .model import (
    BLeaf,
    BNode,
    Bracketing,
    ConcatenationTree,
    FreshVars,
    NotTerminalFreeError,
    Pattern,
    SmallEquation,
    TwoFcCq,
    UNIVERSE,
    Variable,
    WordEquation,
    bracketing_pattern,
    is_terminal_free,
    vars_of,
)

Interval = tuple[int, int]  # 1-based, inclusive


def terminal_free_core(p: Pattern) -> tuple[Pattern, dict[Variable, str]]:
    """Replace each maximal terminal block with a fresh variable.

    Returns the core pattern and the block map; callers re-impose the blocks
    as regular constraints.
    """
    fresh = FreshVars(v.name for v in vars_of(p))
    core: list[Variable] = []
    blocks: dict[Variable, str] = {}
    run: list[str] = []
    for item in p:
        if isinstance(item, Variable):
            if run:
                z = fresh.fresh("t")
                blocks[z] = "".join(run)
                core.append(z)
                run = []
            core.append(item)
        else:
            run.append(item)
    if run:
        z = fresh.fresh("t")
        blocks[z] = "".join(run)
        core.append(z)
    return tuple(core), blocks


def _require_terminal_free(p: Pattern) -> tuple[Variable, ...]:
    if not is_terminal_free(p):
        raise NotTerminalFreeError("pattern contains terminal symbols; take its terminal-free core first")
    return p  # type: ignore[return-value]


class _Intervals:
    """Factor identity and variable masks for all intervals of a pattern."""

    def __init__(self, pat: Sequence[Variable]):
        self.pat = tuple(pat)
        n = len(pat)
        self.n = n
        ids: dict[tuple[Variable, ...], int] = {}
        self.fid: dict[Interval, int] = {}
        self.mask: dict[Interval, int] = {}
        var_bit = {v: 1 << i for i, v in enumerate(dict.fromkeys(pat))}
        for i in range(1, n + 1):
            m = 0
            for j in range(i, n + 1):
                m |= var_bit[pat[j - 1]]
                self.mask[(i, j)] = m
                key = self.pat[i - 1:j]
                self.fid[(i, j)] = ids.setdefault(key, len(ids))

    def factor(self, iv: Interval) -> tuple[Variable, ...]:
        return self.pat[iv[0] - 1:iv[1]]


@dataclass
class _Derivation:
    """Result of the bottom-up fixed point: acyclic intervals and their splits."""

    ivs: _Intervals
    nodes: set[Interval]
    splits: dict[Interval, list[int]]           # parent -> split points j
    child_fids: dict[Interval, set[int]]        # parent -> factor ids of its edge children


def _solve_binary(
    ivs: _Intervals,
    base_pair_ok: Optional[Callable[[int], bool]] = None,
    extra_check: Optional[Callable[[int, int, int], bool]] = None,
) -> _Derivation:
    """Grow acyclic intervals in increasing length order.

    Children of a candidate edge are strictly shorter than the parent, so a
    single ordered pass reaches the fixed point of the unordered loop.
    ``base_pair_ok`` filters which length-2 intervals are admissible (used by
    the constrained variant, which also activates ``extra_check``).
    """
    n = ivs.n
    nodes: set[Interval] = {(i, i) for i in range(1, n + 1)}
    splits: dict[Interval, list[int]] = {}
    child_fids: dict[Interval, set[int]] = {}

    def add_edge(parent: Interval, j: int) -> None:
        splits.setdefault(parent, []).append(j)
        fs = child_fids.setdefault(parent, set())
        fs.add(ivs.fid[(parent[0], j)])
        fs.add(ivs.fid[(j + 1, parent[1])])
        nodes.add(parent)

    for i in range(1, n):
        if base_pair_ok is None or base_pair_ok(i):
            add_edge((i, i + 1), i)

    for length in range(3, n + 1):
        for i in range(1, n - length + 2):
            k = i + length - 1
            for j in range(i, k):
                left, right = (i, j), (j + 1, k)
                if left not in nodes or right not in nodes:
                    continue
                if not _is_acyclic_split(ivs, child_fids, i, j, k):
                    continue
                if extra_check is not None and not extra_check(i, j, k):
                    continue
                add_edge((i, k), j)

    return _Derivation(ivs, nodes, splits, child_fids)


def _is_acyclic_split(
    ivs: _Intervals,
    child_fids: dict[Interval, set[int]],
    i: int,
    j: int,
    k: int,
) -> bool:
    """The six growth conditions: equal halves, disjoint variables, or one
    half equal to an edge child of the other half."""
    left, right = (i, j), (j + 1, k)
    if ivs.fid[left] == ivs.fid[right]:
        return True
    if ivs.mask[left] & ivs.mask[right] == 0:
        return True
    if ivs.fid[right] in child_fids.get(left, ()):
        return True
    if ivs.fid[left] in child_fids.get(right, ()):
        return True
    return False


def is_acyclic_pattern(p: Pattern) -> bool:
    """Decide whether some binary bracketing of the pattern is acyclic."""
    pat = _require_terminal_free(p)
    if not pat:
        raise ValueError("the empty pattern has no bracketing")
    if len(pat) == 1:
        return True
    ivs = _Intervals(pat)
    deriv = _solve_binary(ivs)
    return (1, ivs.n) in deriv.nodes


# --- carving a concatenation tree out of the derivation graph -----------------


class _TreeNode:
    __slots__ = ("iv", "children", "committed")

    def __init__(self, iv: Interval):
        self.iv = iv
        self.children: list[_TreeNode] = []
        self.committed: Optional[int] = None


def _derive_tree(deriv: _Derivation) -> Optional[_TreeNode]:
    """Top-down edge selection with the three guarded cases.

    When one sibling is justified by an edge child of the other, that edge is
    committed so the sibling is expanded the same way later.
    """
    ivs = deriv.ivs
    full = (1, ivs.n)
    if full not in deriv.nodes:
        return None
    root = _TreeNode(full)
    work = [root]
    while work:
        node = work.pop()
        i, k = node.iv
        if i == k:
            continue
        # A committed split must still run the guard logic so that sharing
        # constraints propagate to its own children.
        chosen = _choose_split(deriv, i, k, forced=node.committed)
        if chosen is None:
            return None
        j, commitment = chosen
        left, right = _TreeNode((i, j)), _TreeNode((j + 1, k))
        if commitment is not None:
            side, x = commitment
            (left if side == "left" else right).committed = x
        node.children = [left, right]
        work.extend([right, left])
    return root


_Side = str


def _choose_split(deriv: _Derivation, i: int, k: int,
                  forced: Optional[int] = None) -> Optional[tuple[int, Optional[tuple[_Side, int]]]]:
    ivs = deriv.ivs
    candidates = (forced,) if forced is not None else deriv.splits.get((i, k), ())
    for j in candidates:
        left, right = (i, j), (j + 1, k)
        if ivs.fid[left] == ivs.fid[right] or ivs.mask[left] & ivs.mask[right] == 0:
            return j, None
        for x in deriv.splits.get(left, ()):
            if ivs.fid[(i, x)] == ivs.fid[right] or ivs.fid[(x + 1, j)] == ivs.fid[right]:
                return j, ("left", x)
        for x in deriv.splits.get(right, ()):
            if ivs.fid[left] == ivs.fid[(j + 1, x)] or ivs.fid[left] == ivs.fid[(x + 1, k)]:
                return j, ("right", x)
    return None


def _label_and_prune(
    ivs: _Intervals,
    root: _TreeNode,
    root_var: Variable,
    fresh: FreshVars,
) -> ConcatenationTree:
    """Label interval nodes (equal factors share a label) and prune redundancies."""
    labels: list[Variable] = []
    children: list[list[int]] = []
    by_fid: dict[int, Variable] = {}

    def label_for(node: _TreeNode) -> Variable:
        i, j = node.iv
        if node is root:
            return root_var
        if i == j:
            return ivs.pat[i - 1]
        fid = ivs.fid[node.iv]
        if fid not in by_fid:
            by_fid[fid] = fresh.fresh("z")
        return by_fid[fid]

    def build(node: _TreeNode) -> int:
        idx = len(labels)
        labels.append(label_for(node))
        children.append([])
        for c in node.children:
            ci = build(c)
            children[idx].append(ci)
        return idx

    build(root)
    return prune_tree(labels, [tuple(c) for c in children], 0)


def prune_tree(labels: Sequence[Variable], children: Sequence[tuple[int, ...]], root: int) -> ConcatenationTree:
    """Remove descendants of redundant nodes until, for every label, at most
    one non-leaf node carries it: the deepest one, leftmost on ties."""
    kids: dict[int, tuple[int, ...]] = {}
    depth: dict[int, int] = {root: 0}
    order: dict[int, int] = {}

    def visit(v: int) -> None:
        order[v] = len(order)
        kids[v] = children[v]
        for c in children[v]:
            depth[c] = depth[v] + 1
            visit(c)

    visit(root)

    while True:
        groups: dict[Variable, list[int]] = {}
        for v in list(kids):
            if kids[v]:
                groups.setdefault(labels[v], []).append(v)
        clash = [vs for vs in groups.values() if len(vs) > 1]
        if not clash:
            break
        for vs in clash:
            keeper = max(vs, key=lambda v: (depth[v], -order[v]))
            for v in vs:
                if v == keeper or v not in kids:
                    continue
                stack = list(kids[v])
                kids[v] = ()
                while stack:
                    w = stack.pop()
                    stack.extend(kids.pop(w, ()))

    live = sorted(kids, key=lambda v: order[v])
    remap = {v: i for i, v in enumerate(live)}
    return ConcatenationTree(
        labels=tuple(labels[v] for v in live),
        children=tuple(tuple(remap[c] for c in kids[v]) for v in live),
        root=remap[root],
    )


def tree_to_query(tree: ConcatenationTree, root_var: Variable, original: Iterable[Variable]) -> TwoFcCq:
    """Read the decomposition off a pruned concatenation tree, innermost first."""
    depth = [0] * len(tree.labels)
    order = [tree.root]
    for v in order:
        for c in tree.children[v]:
            depth[c] = depth[v] + 1
            order.append(c)
    pos = {v: idx for idx, v in enumerate(order)}
    internal = [v for v in range(len(tree.labels)) if tree.children[v]]
    internal.sort(key=lambda v: (-depth[v], pos[v]))
    equations = tuple(
        SmallEquation(tree.labels[v], tuple(tree.labels[c] for c in tree.children[v]))
        for v in internal
    )
    keep = set(original) | {root_var}
    introduced = frozenset(l for l in tree.labels if l not in keep)
    return TwoFcCq(head=(), equations=equations, introduced=introduced)


def find_acyclic_decomposition(p: Pattern, root: Variable = UNIVERSE,
                               fresh: Optional[FreshVars] = None) -> Optional[TwoFcCq]:
    """Acyclic decomposition of a terminal-free pattern, or None if cyclic."""
    pat = _require_terminal_free(p)
    if not pat:
        raise ValueError("the empty pattern has no bracketing")
    if fresh is None:
        fresh = FreshVars(v.name for v in vars_of(p) | {root})
    if len(pat) == 1:
        return TwoFcCq(head=(), equations=(SmallEquation(root, (pat[0],)),), introduced=frozenset())
    ivs = _Intervals(pat)
    deriv = _solve_binary(ivs)
    node = _derive_tree(deriv)
    if node is None:
        return None
    tree = _label_and_prune(ivs, node, root, fresh)
    return tree_to_query(tree, root, vars_of(p))


# --- bracketings ---------------------------------------------------------------


def decompose_bracketing(b: Bracketing, root: Variable = UNIVERSE,
                         fresh: Optional[FreshVars] = None) -> TwoFcCq:
    """Bottom-up replacement of sub-bracketings by introduced variables.

    Equal sub-bracketings share one introduced variable; the outermost node is
    named ``root``.  A single leaf yields the copy equation root = x.
    """
    if fresh is None:
        fresh = FreshVars(v.name for v in vars_of(bracketing_pattern(b)) | {root})
    equations: list[SmallEquation] = []
    memo: dict[tuple[Variable, ...], Variable] = {}

    def descend(node: Bracketing) -> Variable:
        if isinstance(node, BLeaf):
            return node.var
        key = tuple(descend(c) for c in node.children)  # type: ignore[union-attr]
        if key not in memo:
            z = fresh.fresh("z")
            memo[key] = z
            equations.append(SmallEquation(z, key))
        return memo[key]

    if isinstance(b, BLeaf):
        equations.append(SmallEquation(root, (b.var,)))
    else:
        key = tuple(descend(c) for c in b.children)
        equations.append(SmallEquation(root, key))
    return TwoFcCq(head=(), equations=tuple(equations),
                   introduced=frozenset(memo.values()))


def concat_tree_of(two: TwoFcCq, root_var: Variable) -> ConcatenationTree:
    """Recursive (then pruned) concatenation tree of a decomposition."""
    defs = two.defining()
    root_eq = two.root_equation()
    assert root_eq.lhs == root_var
    labels: list[Variable] = []
    children: list[tuple[int, ...]] = []

    def build(label: Variable, expand: Optional[SmallEquation]) -> int:
        idx = len(labels)
        labels.append(label)
        children.append(())
        if expand is not None:
            children[idx] = tuple(build(v, defs.get(v)) for v in expand.rhs)
        return idx

    build(root_var, root_eq)
    return prune_tree(labels, children, 0)


def is_acyclic_bracketing(b: Bracketing) -> bool:
    """True iff the decomposition of the bracketing is x-localized for every x.

    Only meaningful for binary bracketings: at higher arities localization is
    sufficient but no longer necessary for acyclicity.
    """
    from .model import bracketing_arity

    if bracketing_arity(b) > 2:
        raise ValueError("localization characterizes acyclicity for binary bracketings only")
    two = decompose_bracketing(b, UNIVERSE)
    return concat_tree_of(two, UNIVERSE).is_localized()


# --- constrained decomposition (pairs that must share an atom) ------------------


def constrained_acyclic_bracketing(p: Pattern, pairs: Iterable[frozenset[Variable]]) -> Optional[Bracketing]:
    """An acyclic bracketing with x and y adjacent for each required pair, or None.

    Adjacent length-2 seeds are admitted only when both variables form a
    required pair or neither occurs in any pair; a paired variable may only be
    concatenated to a sub-bracketing whose variable set is exactly the pair.
    """
    pat = _require_terminal_free(p)
    pair_set = {frozenset(c) for c in pairs}
    for c in pair_set:
        if len(c) != 2:
            raise ValueError(f"constraint {set(c)} is not a pair of distinct variables")
    # Two pairs sharing a variable would force that variable to sit next to
    # two different partners, giving two x-parents whose meeting point is not
    # one: always cyclic.
    listed = sorted(pair_set, key=lambda c: sorted(x.name for x in c))
    for a in range(len(listed)):
        for b in range(a + 1, len(listed)):
            if listed[a] & listed[b]:
                return None
    pool = set().union(*pair_set) if pair_set else set()
    if not pool <= vars_of(p):
        return None
    if not pat:
        return None
    if len(pat) == 1:
        return BLeaf(pat[0]) if not pair_set else None

    ivs = _Intervals(pat)
    pair_vars = {frozenset(pr) for pr in pair_set}

    def base_pair_ok(i: int) -> bool:
        a, b = ivs.pat[i - 1], ivs.pat[i]
        if frozenset((a, b)) in pair_vars:
            return True
        return a not in pool and b not in pool

    def extra_check(i: int, j: int, k: int) -> bool:
        def side_ok(single: Variable, other: Interval) -> bool:
            if single not in pool:
                return True
            sibling_vars = set(ivs.factor(other))
            return any(single in pr and sibling_vars == set(pr) for pr in pair_set)

        if i == j:
            return side_ok(ivs.pat[i - 1], (j + 1, k))
        if j + 1 == k:
            return side_ok(ivs.pat[k - 1], (i, j))
        return True

    deriv = _solve_binary(ivs, base_pair_ok=base_pair_ok, extra_check=extra_check)
    node = _derive_tree(deriv)
    if node is None:
        return None
    return _node_to_bracketing(node, ivs)


def _node_to_bracketing(node: _TreeNode, ivs: _Intervals) -> Bracketing:
    if node.iv[0] == node.iv[1]:
        return BLeaf(ivs.pat[node.iv[0] - 1])
    return BNode(tuple(_node_to_bracketing(c, ivs) for c in node.children))


def decompose_atom_with_constraints(eq: WordEquation, pairs: Iterable[frozenset[Variable]],
                                    fresh: Optional[FreshVars] = None) -> Optional[TwoFcCq]:
    """Acyclic decomposition of one equation with an atom covering each pair.

    Pairs involving the left-hand side must be covered by the root atom; that
    forces the right side into the shape y..y core y..y with the core free of
    y (or, for two such pairs, a verbatim length-2 atom).  Remaining pairs
    need their variables adjacent somewhere and go to the constrained
    bracketing search.
    """
    pat = _require_terminal_free(eq.rhs)
    if eq.lhs in vars_of(eq.rhs):
        raise ValueError("equation is not normalized: left-hand side occurs on the right")
    pair_set = {frozenset(c) for c in pairs}
    for c in pair_set:
        if not c <= eq.variables() or len(c) != 2:
            return None
    if fresh is None:
        fresh = FreshVars(v.name for v in eq.variables())

    partners = sorted({x for c in pair_set if eq.lhs in c for x in c if x != eq.lhs},
                      key=lambda x: x.name)
    rhs_pairs = {c for c in pair_set if eq.lhs not in c}

    if len(partners) >= 2:
        # The root atom is the only one containing the left side, and it has
        # two right slots: both partners must be exactly the right side.
        if len(pat) == 2 and set(pat) == set(partners):
            return TwoFcCq(head=(), equations=(SmallEquation(eq.lhs, tuple(pat)),),
                           introduced=frozenset())
        return None

    if not partners:
        b = constrained_acyclic_bracketing(eq.rhs, rhs_pairs)
        return None if b is None else decompose_bracketing(b, eq.lhs, fresh)

    (y,) = partners
    i = 0
    while i < len(pat) and pat[i] == y:
        i += 1
    j = 0
    while j < len(pat) - i and pat[len(pat) - 1 - j] == y:
        j += 1
    core = pat[i:len(pat) - j]
    if y in vars_of(core):
        return None

    y_pairs = {c for c in rhs_pairs if y in c}
    inner: Optional[Bracketing]
    if y_pairs:
        # y also needs a leaf partner; only a single-variable core can sit
        # next to the nested run of y's.
        if len(core) != 1 or any(c != frozenset({y, core[0]}) for c in y_pairs):
            return None
        if rhs_pairs - y_pairs:
            return None
        inner = BLeaf(core[0])
        prefix, suffix = i, j
    elif core:
        inner = constrained_acyclic_bracketing(core, rhs_pairs)
        if inner is None:
            return None
        prefix, suffix = i, j
    else:
        if rhs_pairs:
            return None
        inner = BLeaf(y)
        if i > 0:
            prefix, suffix = i - 1, j
        else:
            prefix, suffix = 0, j - 1
    node: Bracketing = inner
    for _ in range(prefix):
        node = BNode((BLeaf(y), node))
    for _ in range(suffix):
        node = BNode((node, BLeaf(y)))
    return decompose_bracketing(node, eq.lhs, fresh)


# --- k-ary decompositions --------------------------------------------------------


def _compositions(i: int, k: int, max_parts: int) -> Iterable[tuple[Interval, ...]]:
    """Contiguous partitions of [i..k] into 2..max_parts intervals."""
    def rec(start: int, parts_left: int) -> Iterable[tuple[Interval, ...]]:
        if parts_left == 1:
            yield ((start, k),)
            return
        for end in range(start, k - parts_left + 2):
            for rest in rec(end + 1, parts_left - 1):
                yield ((start, end),) + rest

    for parts in range(2, max_parts + 1):
        if parts > k - i + 1:
            break
        yield from rec(i, parts)


def _kary_tuple_localized(ivs: _Intervals, child_fids: dict[Interval, set[int]],
                          children: Sequence[Interval]) -> bool:
    for a in range(len(children)):
        for b in range(a + 1, len(children)):
            u, v = children[a], children[b]
            if ivs.fid[u] == ivs.fid[v]:
                continue
            if ivs.mask[u] & ivs.mask[v] == 0:
                continue
            if ivs.fid[u] in child_fids.get(v, ()):
                continue
            if ivs.fid[v] in child_fids.get(u, ()):
                continue
            return False
    return True


def k_ary_local_decomposition(p: Pattern, k: int, root: Variable = UNIVERSE,
                              fresh: Optional[FreshVars] = None) -> Optional[TwoFcCq]:
    """Localized k-ary decomposition, or None when the pattern is not k-ary local.

    Sufficient but not necessary for k-ary acyclicity when k exceeds 2: some
    acyclic k-ary decompositions are not localized.
    """
    if k < 2:
        raise ValueError("arity must be at least 2")
    pat = _require_terminal_free(p)
    if not pat:
        raise ValueError("the empty pattern has no bracketing")
    if fresh is None:
        fresh = FreshVars(v.name for v in vars_of(p) | {root})
    if len(pat) == 1:
        return TwoFcCq(head=(), equations=(SmallEquation(root, (pat[0],)),), introduced=frozenset())

    ivs = _Intervals(pat)
    n = ivs.n
    nodes: set[Interval] = {(i, i) for i in range(1, n + 1)}
    tuples: dict[Interval, list[tuple[Interval, ...]]] = {}
    child_fids: dict[Interval, set[int]] = {}

    # Children are strictly shorter than their interval, so one pass in
    # length order reaches the fixed point.  Singleton pairs are always
    # admissible (equal factors or disjoint variable sets), which covers the
    # unit-partition seeds.
    for length in range(2, n + 1):
        for i in range(1, n - length + 2):
            iv = (i, i + length - 1)
            for comp in _compositions(i, iv[1], k):
                if not all(c in nodes for c in comp):
                    continue
                if not _kary_tuple_localized(ivs, child_fids, comp):
                    continue
                tuples.setdefault(iv, []).append(comp)
                nodes.add(iv)
                fs = child_fids.setdefault(iv, set())
                fs.update(ivs.fid[c] for c in comp)

    if (1, n) not in nodes:
        return None
    tree = _derive_kary(ivs, tuples, (1, n), None, {})
    if tree is None:
        return None
    labeled = _label_and_prune(ivs, tree, root, fresh)
    return tree_to_query(labeled, root, vars_of(p))


class _KNode:
    __slots__ = ("iv", "children")

    def __init__(self, iv: Interval, children: Sequence["_KNode"] = ()):
        self.iv = iv
        self.children = list(children)


def _derive_kary(
    ivs: _Intervals,
    tuples: dict[Interval, list[tuple[Interval, ...]]],
    iv: Interval,
    forced: Optional[tuple[Interval, ...]],
    memo: dict,
) -> Optional[_KNode]:
    """Backtracking tree derivation: pick a tuple per interval plus witness
    commitments for overlapping sibling pairs, revisiting earlier choices when
    a committed subtree cannot be completed (the greedy order can dead-end)."""
    if iv[0] == iv[1]:
        return _KNode(iv)
    key = (iv, forced)
    if key in memo:
        return memo[key]
    result: Optional[_KNode] = None
    candidates = (forced,) if forced is not None else tuple(tuples.get(iv, ()))
    for comp in candidates:
        for commitments in _kary_commitments(ivs, tuples, comp):
            kids: list[_KNode] = []
            ok = True
            for c in comp:
                sub = _derive_kary(ivs, tuples, c, commitments.get(c), memo)
                if sub is None:
                    ok = False
                    break
                kids.append(sub)
            if ok:
                result = _KNode(iv, kids)
                break
        if result is not None:
            break
    memo[key] = result
    return result


def _kary_commitments(
    ivs: _Intervals,
    tuples: dict[Interval, list[tuple[Interval, ...]]],
    comp: tuple[Interval, ...],
) -> Iterable[dict[Interval, tuple[Interval, ...]]]:
    """All consistent witness assignments for the sibling pairs of a tuple.

    A pair of overlapping, unequal siblings needs one side expanded by a
    tuple that contains the other side's factor."""
    pairs = [(comp[a], comp[b]) for a in range(len(comp)) for b in range(a + 1, len(comp))
             if ivs.fid[comp[a]] != ivs.fid[comp[b]]
             and ivs.mask[comp[a]] & ivs.mask[comp[b]] != 0]

    def options(parent: Interval, want_fid: int,
                commitments: dict[Interval, tuple[Interval, ...]]):
        if parent in commitments:
            if any(ivs.fid[c] == want_fid for c in commitments[parent]):
                yield commitments[parent], False
            return
        for t in tuples.get(parent, ()):
            if any(ivs.fid[c] == want_fid for c in t):
                yield t, True

    def rec(at: int, commitments: dict[Interval, tuple[Interval, ...]]):
        if at == len(pairs):
            yield dict(commitments)
            return
        u, v = pairs[at]
        for side, other in ((v, u), (u, v)):
            for t, fresh_commit in options(side, ivs.fid[other], commitments):
                if fresh_commit:
                    commitments[side] = t
                yield from rec(at + 1, commitments)
                if fresh_commit:
                    del commitments[side]

    yield from rec(0, {})


