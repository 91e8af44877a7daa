"""Core domain types: alphabets, variables, patterns, equations, queries, trees.

Everything here is immutable after construction and safe to share across
threads; all operations are pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

#: Characters that the query grammar claims for itself.  No alphabet may
#: contain them (``S`` is the sigma macro, ``u`` names the universe variable
#: only in identifier position and stays usable as a terminal).
RESERVED_CHARS = frozenset("'\"#|*()/{}[],:=.+ \t\r\nS\\")

UNIVERSE_NAME = "u"


class WordeqError(Exception):
    """Base class for all errors raised by this package."""


class UnboundVariableError(WordeqError):
    pass


class NotTerminalFreeError(WordeqError):
    pass


class InvalidSpanError(WordeqError):
    pass


class HasConstraintsError(WordeqError):
    pass


class NotPseudoAcyclicError(WordeqError):
    pass


class TooLargeError(WordeqError):
    pass


class CyclicQueryError(WordeqError):
    """Raised by the planner when a query admits no acyclic decomposition."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"cyclic ({stage}): {detail}")
        self.stage = stage
        self.detail = detail


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of terminal symbols (single characters, byte-valued)."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet must be non-empty")
        seen = set()
        for s in self.symbols:
            if len(s) != 1:
                raise ValueError(f"alphabet symbol {s!r} is not a single character")
            if s in RESERVED_CHARS:
                raise ValueError(f"alphabet symbol {s!r} is reserved by the query grammar")
            if s in seen:
                raise ValueError(f"duplicate alphabet symbol {s!r}")
            seen.add(s)
        object.__setattr__(self, "_set", frozenset(self.symbols))

    def __contains__(self, ch: str) -> bool:
        return ch in self._set  # type: ignore[attr-defined]

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


def default_alphabet() -> Alphabet:
    """Lowercase ASCII letters (the CLI default; ``S`` is uppercase, so safe)."""
    return Alphabet(tuple("abcdefghijklmnopqrstuvwxyz"))


@dataclass(frozen=True)
class Variable:
    """An interned variable; the universe variable is the one flagged below."""

    name: str
    is_universe: bool = False

    def __post_init__(self):
        if (self.name == UNIVERSE_NAME) != self.is_universe:
            raise ValueError(f"the name {UNIVERSE_NAME!r} is reserved for the universe variable")

    def __repr__(self) -> str:
        return self.name


#: The universe variable, always bound to the input word.
UNIVERSE = Variable(UNIVERSE_NAME, True)


class FreshVars:
    """Generates variable names that avoid a set of already-used names."""

    def __init__(self, used: Iterable[str] = ()):
        self._used = set(used)
        self._used.add(UNIVERSE_NAME)
        self._counters: dict[str, int] = {}

    def reserve(self, names: Iterable[str]) -> None:
        self._used.update(names)

    def fresh(self, base: str = "z") -> Variable:
        n = self._counters.get(base, 0)
        while True:
            n += 1
            name = f"{base}{n}"
            if name not in self._used:
                break
        self._counters[base] = n
        self._used.add(name)
        return Variable(name)


# A pattern is a word over terminals and variables; terminals are plain
# one-character strings.
PatternItem = Union[Variable, str]
Pattern = tuple[PatternItem, ...]


def pattern(*items: PatternItem) -> Pattern:
    return tuple(items)


def vars_of(p: Pattern) -> set[Variable]:
    """Set of variables occurring in the pattern."""
    return {it for it in p if isinstance(it, Variable)}


def is_terminal_free(p: Pattern) -> bool:
    return all(isinstance(it, Variable) for it in p)


def apply_substitution(p: Pattern, subst: dict[Variable, str]) -> str:
    """Morphic image of the pattern: terminals fixed, variables replaced."""
    out: list[str] = []
    for it in p:
        if isinstance(it, Variable):
            if it not in subst:
                raise UnboundVariableError(f"variable {it} not bound by the substitution")
            out.append(subst[it])
        else:
            out.append(it)
    return "".join(out)


def pattern_to_text(p: Pattern) -> str:
    """Compact display form used in diagnostics (not the query syntax)."""
    if not p:
        return "''"
    return " ".join(it.name if isinstance(it, Variable) else repr(it) for it in p)


# --- regular expressions ---------------------------------------------------


class RegexAst:
    """Base class for regular-expression syntax nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class REmpty(RegexAst):
    __slots__ = ()


@dataclass(frozen=True)
class REpsilon(RegexAst):
    __slots__ = ()


@dataclass(frozen=True)
class RLit(RegexAst):
    __slots__ = ("symbol",)
    symbol: str


@dataclass(frozen=True)
class RUnion(RegexAst):
    __slots__ = ("left", "right")
    left: RegexAst
    right: RegexAst


@dataclass(frozen=True)
class RConcat(RegexAst):
    __slots__ = ("left", "right")
    left: RegexAst
    right: RegexAst


@dataclass(frozen=True)
class RStar(RegexAst):
    __slots__ = ("inner",)
    inner: RegexAst


@dataclass(frozen=True)
class RBind(RegexAst):
    """Variable binding of regex formulas; only valid inside spanner formulas."""

    __slots__ = ("var", "inner")
    var: "Variable"
    inner: RegexAst


def regex_word(word: str) -> RegexAst:
    """Left-associated concatenation of literal symbols; epsilon if empty."""
    if not word:
        return REpsilon()
    node: RegexAst = RLit(word[0])
    for ch in word[1:]:
        node = RConcat(node, RLit(ch))
    return node


def regex_any_of(symbols: Sequence[str]) -> RegexAst:
    """Left-associated union over the given symbols (the ``S`` macro shape)."""
    if not symbols:
        return REmpty()
    node: RegexAst = RLit(symbols[0])
    for ch in symbols[1:]:
        node = RUnion(node, RLit(ch))
    return node


@dataclass(frozen=True)
class RegularConstraint:
    var: Variable
    regex: RegexAst


# --- queries ----------------------------------------------------------------


@dataclass(frozen=True)
class WordEquation:
    """FC-form word equation: exactly one variable on the left."""

    lhs: Variable
    rhs: Pattern

    def variables(self) -> set[Variable]:
        return {self.lhs} | vars_of(self.rhs)

    def size(self) -> int:
        return 1 + len(self.rhs)


@dataclass(frozen=True)
class FcCq:
    """Conjunctive query over word equations plus regular constraints."""

    head: tuple[Variable, ...]
    equations: tuple[WordEquation, ...]
    constraints: tuple[RegularConstraint, ...] = ()

    def variables(self) -> set[Variable]:
        out: set[Variable] = set()
        for eq in self.equations:
            out |= eq.variables()
        for c in self.constraints:
            out.add(c.var)
        return out

    def validate(self) -> None:
        body_vars = self.variables()
        for v in self.head:
            if v.is_universe:
                raise ValueError("the universe variable may not appear in a query head")
            if v not in body_vars:
                raise ValueError(f"head variable {v} does not occur in the body")


# --- bracketings and small-equation queries ---------------------------------


class Bracketing:
    """A full parenthesisation of a terminal-free pattern."""

    __slots__ = ()


@dataclass(frozen=True)
class BLeaf(Bracketing):
    __slots__ = ("var",)
    var: Variable


@dataclass(frozen=True)
class BNode(Bracketing):
    __slots__ = ("children",)
    children: tuple[Bracketing, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("bracketing nodes need at least two children")


def bracketing_pattern(b: Bracketing) -> Pattern:
    """The flat pattern a bracketing parenthesises."""
    if isinstance(b, BLeaf):
        return (b.var,)
    out: list[PatternItem] = []
    for c in b.children:  # type: ignore[union-attr]
        out.extend(bracketing_pattern(c))
    return tuple(out)


def bracketing_arity(b: Bracketing) -> int:
    if isinstance(b, BLeaf):
        return 2
    return max(len(b.children), *(bracketing_arity(c) for c in b.children))


@dataclass(frozen=True)
class SmallEquation:
    """Word equation with a right-hand side of bounded length (1..k)."""

    lhs: Variable
    rhs: tuple[Variable, ...]

    def __post_init__(self):
        if not self.rhs:
            raise ValueError("small equations need a non-empty right-hand side")

    def variables(self) -> set[Variable]:
        return {self.lhs, *self.rhs}

    def __repr__(self) -> str:
        return f"{self.lhs} = {'.'.join(v.name for v in self.rhs)}"


@dataclass(frozen=True)
class TwoFcCq:
    """Query whose equations all have short right-hand sides.

    ``introduced`` holds the fresh variables created by decomposition; each is
    the left-hand side of exactly one equation.
    """

    head: tuple[Variable, ...]
    equations: tuple[SmallEquation, ...]
    constraints: tuple[RegularConstraint, ...] = ()
    introduced: frozenset[Variable] = frozenset()

    def root_equation(self) -> SmallEquation:
        for eq in self.equations:
            if eq.lhs not in self.introduced:
                return eq
        raise ValueError("no root equation (every left-hand side is introduced)")

    def defining(self) -> dict[Variable, SmallEquation]:
        """Map from introduced variable to the single equation defining it."""
        out: dict[Variable, SmallEquation] = {}
        for eq in self.equations:
            if eq.lhs in self.introduced:
                if eq.lhs in out:
                    raise ValueError(f"{eq.lhs} defined twice")
                out[eq.lhs] = eq
        return out

    def expand(self, root: Variable) -> Pattern:
        """Back-substitute introduced variables below ``root``; inverse of decomposition."""
        defs = self.defining()
        root_eqs = [eq for eq in self.equations if eq.lhs == root and root not in self.introduced]
        if len(root_eqs) != 1:
            raise ValueError(f"expected exactly one root equation for {root}")

        def grow(v: Variable) -> Iterator[Variable]:
            if v in defs:
                for w in defs[v].rhs:
                    yield from grow(w)
            else:
                yield v

        out: list[Variable] = []
        for v in root_eqs[0].rhs:
            out.extend(grow(v))
        return tuple(out)


# --- concatenation trees -----------------------------------------------------


@dataclass(frozen=True)
class ConcatenationTree:
    """Pruned derivation tree of a decomposition.

    ``children[v]`` lists the (ordered, left to right) children of node ``v``;
    pruned nodes keep their label but have no children.
    """

    labels: tuple[Variable, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = 0

    def parents(self) -> list[Optional[int]]:
        par: list[Optional[int]] = [None] * len(self.labels)
        for v, kids in enumerate(self.children):
            for c in kids:
                par[c] = v
        return par

    def x_parents(self, x: Variable) -> list[int]:
        """Nodes with a child labelled ``x``."""
        return [v for v, kids in enumerate(self.children)
                if any(self.labels[c] == x for c in kids)]

    def is_x_localized(self, x: Variable) -> bool:
        """True iff all nodes on paths between x-parents are x-parents."""
        marked = set(self.x_parents(x))
        if len(marked) <= 1:
            return True
        # The x-parents must induce a connected subtree.
        par = self.parents()
        depth = [0] * len(self.labels)
        order = [self.root]
        for v in order:
            for c in self.children[v]:
                depth[c] = depth[v] + 1
                order.append(c)
        # Connected iff every marked node except the shallowest has its parent marked.
        top = min(marked, key=lambda v: depth[v])
        for v in marked:
            if v != top and par[v] not in marked:
                return False
        # Guard against two disconnected components at equal depth.
        comp = {top}
        changed = True
        while changed:
            changed = False
            for v in marked - comp:
                if par[v] in comp:
                    comp.add(v)
                    changed = True
        return comp == marked

    def is_localized(self) -> bool:
        seen: set[Variable] = set()
        for v, kids in enumerate(self.children):
            for c in kids:
                seen.add(self.labels[c])
        return all(self.is_x_localized(x) for x in seen)

    def atoms(self) -> list[SmallEquation]:
        out = []
        for v, kids in enumerate(self.children):
            if kids:
                out.append(SmallEquation(self.labels[v], tuple(self.labels[c] for c in kids)))
        return out


# --- join trees and the mark-and-absorb algorithm ----------------------------


@dataclass(frozen=True)
class JoinTree:
    """Tree over atoms; every variable's occurrences induce a connected subtree."""

    nodes: tuple[object, ...]
    var_sets: tuple[frozenset[Variable], ...]
    edges: tuple[tuple[int, int], ...]

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def gyo(atoms: Sequence[tuple[object, Iterable[Variable]]]) -> Optional[JoinTree]:
    """Mark-and-absorb acyclicity test; returns a join tree or None if cyclic.

    Tie-breaking is deterministic: the lowest-index absorbable node is
    absorbed into the lowest-index eligible absorber.
    """
    payloads = tuple(name for name, _ in atoms)
    var_sets = tuple(frozenset(v for v in vs if not v.is_universe) for _, vs in atoms)
    n = len(payloads)
    if n == 0:
        raise ValueError("gyo needs at least one atom")

    unmarked_nodes = set(range(n))
    marked_vars: set[Variable] = set()
    edges: list[tuple[int, int]] = []

    def live(i: int) -> frozenset[Variable]:
        return var_sets[i] - marked_vars

    while True:
        changed = False
        # (a) absorb one node whose live variables are covered by another.
        for i in sorted(unmarked_nodes):
            absorber = None
            for j in sorted(unmarked_nodes):
                if i != j and live(i) <= live(j):
                    absorber = j
                    break
            if absorber is not None:
                edges.append((i, absorber))
                unmarked_nodes.remove(i)
                changed = True
                break
        # (b) mark variables occurring in exactly one unmarked node.
        counts: dict[Variable, int] = {}
        for i in unmarked_nodes:
            for v in live(i):
                counts[v] = counts.get(v, 0) + 1
        for v, c in counts.items():
            if c == 1:
                marked_vars.add(v)
                changed = True
        if not changed:
            break

    if len(unmarked_nodes) == 1:
        return JoinTree(payloads, var_sets, tuple(edges))
    return None


def verify_join_tree(tree: JoinTree) -> bool:
    """Check tree-ness plus the path-connectedness condition for every variable."""
    n = len(tree.nodes)
    if len(tree.edges) != n - 1:
        return False
    adj = tree.adjacency()
    seen = {0} if n else set()
    stack = [0] if n else []
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        return False
    all_vars = set().union(*tree.var_sets) if tree.var_sets else set()
    for x in all_vars:
        holders = [i for i in range(n) if x in tree.var_sets[i]]
        if len(holders) <= 1:
            continue
        # Occurrences of x must induce a connected subgraph.
        comp = {holders[0]}
        stack = [holders[0]]
        hold = set(holders)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w in hold and w not in comp:
                    comp.add(w)
                    stack.append(w)
        if comp != hold:
            return False
    return True
