from __future__ import annotations

import random

import pytest

from conftest import AB, v
from wordeq.bridge import (
    SercqAst,
    fccq_to_sercq,
    is_pseudo_acyclic,
    pseudo_acyclic_to_acyclic_fccq,
    sercq_to_fccq,
)
from wordeq.evaluator import enumerate_results
from wordeq.frontend import parse_query, parse_regex, parse_sercq
from wordeq.index import build_index
from wordeq.model import CyclicQueryError, NotPseudoAcyclicError
from wordeq.oracle import brute_evaluate, brute_sercq_evaluate
from wordeq.planner import plan


def formula(text: str, alphabet=AB):
    return parse_regex(text, alphabet, allow_bindings=True)


def engine_words(q, w):
    """Engine evaluation (planner route, brute force if cyclic)."""
    try:
        p = plan(q)
    except CyclicQueryError:
        return brute_evaluate(q, w)
    ix = build_index(w)
    return {tuple(r.words(ix)[h.name] for h in q.head) for r in enumerate_results(p, ix)}


def spans_to_prefix_content(p: SercqAst, w: str) -> set[tuple[str, ...]]:
    """Spanner results encoded as interleaved (prefix, content) word pairs in
    projection-name order, matching the realization head layout."""
    proj = sorted(p.projection, key=lambda x: x.name)
    out = set()
    for tup in brute_sercq_evaluate(p, w):
        by_name = {name: (i, j) for name, i, j in tup}
        row = []
        for x in proj:
            i, j = by_name[x.name]
            row.extend([w[:i - 1], w[i - 1:j - 1]])
        out.add(tuple(row))
    return out


def realization_words(q, w) -> set[tuple[str, ...]]:
    """Engine results reordered to sorted-projection layout."""
    res = engine_words(q, w)
    names = [h.name for h in q.head]
    # Head is built as x_p, x_c per projected variable, in projection order;
    # reorder to sorted-name order for comparison.
    pairs = [(names[i], names[i + 1]) for i in range(0, len(names), 2)]
    order = sorted(range(len(pairs)), key=lambda k: pairs[k][0])
    out = set()
    for row in res:
        t = []
        for k in order:
            t.extend([row[2 * k], row[2 * k + 1]])
        out.add(tuple(t))
    return out


class TestSercqToFccq:
    def test_ten_atom_golden(self):
        g = formula("(S*.(x{S+}.'a')).S*")
        p = SercqAst((v("x"),), (), (g,))
        q = sercq_to_fccq(p)
        assert len(q.equations) + len(q.constraints) == 10
        assert len(q.head) == 2
        # One universe anchor, three concatenation equations, two copy
        # equations (content and prefix), four regular constraints.
        assert sum(1 for eq in q.equations if eq.lhs.is_universe) == 1
        assert sum(1 for eq in q.equations if len(eq.rhs) == 2) == 3
        assert len(q.constraints) == 4

    def test_variable_free_formula(self):
        p = SercqAst((), (), (formula("'ab'"),))
        q = sercq_to_fccq(p)
        assert q.equations == ()
        assert len(q.constraints) == 1 and q.constraints[0].var.is_universe

    def test_realization_semantics(self):
        cases = [
            SercqAst((v("x"),), (), (formula("(S*.(x{S+}.'a')).S*"),)),
            SercqAst((v("x1"),), ((v("x1"), v("x2")),),
                     (formula("S*.x1{S+}.'a'.S*"), formula("S*.x2{S+}.'b'.S*"))),
            SercqAst((v("x"), v("y")), (), (formula("x{'a'*}.y{'b'*}"),)),
        ]
        for p in cases:
            q = sercq_to_fccq(p)
            for w in ["", "a", "ab", "ba", "aab", "abab"]:
                assert realization_words(q, w) == spans_to_prefix_content(p, w), (p, w)

    def test_random_round_trip(self):
        rng = random.Random(4)
        for _ in range(30):
            p = random_sercq(rng)
            q = sercq_to_fccq(p)
            for w in ["", "a", "ba", "abab"]:
                assert realization_words(q, w) == spans_to_prefix_content(p, w), (p, w)

    def test_nested_and_boundary_bindings(self):
        cases = [
            SercqAst((v("x"), v("y")), (), (formula("'a'.x{'b'.y{S*}.'b'}.'a'"),)),
            SercqAst((v("x"), v("y")), (), (formula("x{y{'ab'}}"),)),
            SercqAst((v("x"),), (), (formula("x{S*}.'b'"),)),
            SercqAst((v("x"),), (), (formula("'b'.x{S*}"),)),
            SercqAst((v("x"), v("y")), (), (formula("x{S*}.y{S*}"),)),
            SercqAst((v("x1"),), ((v("x1"), v("x2")),),
                     (formula("x1{'a'*}.S*"), formula("S*.x2{'a'*}"))),
            SercqAst((), (), (formula("''"),)),
        ]
        for p in cases:
            q = sercq_to_fccq(p)
            for w in ["", "a", "b", "ab", "ba", "bab", "abba"]:
                assert realization_words(q, w) == spans_to_prefix_content(p, w), (p, w)


def random_sercq(rng: random.Random, pseudo: bool = False) -> SercqAst:
    def small_regex() -> str:
        return rng.choice(["'a'", "'b'", "S", "'ab'", "('a'|'b')", "'a'*", "S*", "'b'+", "''"])

    n_formulas = rng.randint(1, 3)
    formulas = []
    bound = []
    for i in range(1, n_formulas + 1):
        x = f"x{i}"
        bound.append(v(x))
        if pseudo or rng.random() < 0.7:
            text = f"{small_regex()}.{x}{{{small_regex()}}}.{small_regex()}"
        else:
            text = f"{small_regex()}.{x}{{{small_regex()}}}.{small_regex()}.y{i}{{{small_regex()}}}"
            bound.append(v(f"y{i}"))
        formulas.append(formula(text))
    eqs = []
    for _ in range(rng.randint(0, 2)):
        if len(bound) >= 2:
            a, b = rng.sample(bound, 2)
            eqs.append((a, b))
    proj = tuple(sorted(rng.sample(bound, rng.randint(0, min(2, len(bound)))),
                        key=lambda q: q.name))
    return SercqAst(proj, tuple(eqs), tuple(formulas))


class TestFccqToSercq:
    def test_repeat_binding_with_equality(self):
        q = parse_query("ans(x) :- u = x.'a'.x", AB)
        s = fccq_to_sercq(q, AB)
        assert len(s.formulas) == 1
        assert len(s.equalities) == 1
        assert s.equalities[0][0] == v("x")

    def test_constraint_only_query(self):
        q = parse_query("ans(x) :- x in /a*/", AB)
        s = fccq_to_sercq(q, AB)
        assert len(s.formulas) >= 1

    def test_semantics_on_small_words(self):
        rng = random.Random(21)
        texts = [
            "ans() :- u = x.'a'.x",
            "ans(x) :- u = x.y, x in /a*/",
            "ans(x,y) :- u = x.y.x",
            "ans() :- u = x.y, u = y.x",
            "ans(x) :- u = 'b'.x",
        ]
        for text in texts:
            q = parse_query(text, AB)
            s = fccq_to_sercq(q, AB)
            for w in ["", "a", "b", "ab", "aba", "abab"]:
                spanner = brute_sercq_evaluate(s, w)
                # Word-level contents of the spanner tuples, in head order.
                name_pos = {x.name: k for k, x in enumerate(sorted(s.projection,
                                                                   key=lambda t: t.name))}
                got = set()
                for tup in spanner:
                    row = [None] * len(q.head)
                    contents = {name: w[i - 1:j - 1] for name, i, j in tup}
                    got.add(tuple(contents[h.name] for h in q.head))
                assert got == brute_evaluate(q, w), (text, w)

    def test_double_conversion_preserves_semantics(self):
        texts = ["ans(x) :- u = x.y", "ans() :- u = x.'a'.x"]
        for text in texts:
            q = parse_query(text, AB)
            s = fccq_to_sercq(q, AB)
            q2 = sercq_to_fccq(s)
            for w in ["", "a", "ab", "ba", "aab"]:
                expected = brute_evaluate(q, w)
                back = engine_words(q2, w)
                # q2's head carries prefix/content pairs per original head var.
                projected = {tuple(row[2 * k + 1] for k in range(len(q.head)))
                             for row in back}
                assert projected == expected, (text, w)


class TestPseudoAcyclic:
    def test_shapes(self):
        assert is_pseudo_acyclic(parse_sercq("pi{x} ( S*.x{'a'+}.S* )", AB))
        assert is_pseudo_acyclic(parse_sercq("pi{x} ( x{'a'} )", AB))
        assert not is_pseudo_acyclic(
            parse_sercq("pi{x} ( S*.x{'a'}.S*.y{'b'}.S* )", AB))

    def test_error_on_bad_input(self):
        p = parse_sercq("pi{x} ( S*.x{'a'}.S*.y{'b'}.S* )", AB)
        with pytest.raises(NotPseudoAcyclicError):
            pseudo_acyclic_to_acyclic_fccq(p)

    def test_output_planner_acyclic(self):
        rng = random.Random(6)
        for _ in range(25):
            p = random_sercq(rng, pseudo=True)
            q = pseudo_acyclic_to_acyclic_fccq(p)
            plan(q)  # must not raise

    def test_equality_cycle_collapses(self):
        p = parse_sercq(
            "pi{x1} eq{x1,x2} eq{x2,x3} eq{x1,x3} "
            "( 'a'*.x1{S}.S* join S*.x2{S}.S* join S*.x3{S}.'b'* )", AB)
        q = pseudo_acyclic_to_acyclic_fccq(p)
        # Only two equality equations survive (spanning forest of a triangle).
        copies = [eq for eq in q.equations if len(eq.rhs) == 1]
        assert len(copies) == 2
        for w in ["", "a", "ab", "ba", "aab", "abb"]:
            assert realization_words(q, w) == spans_to_prefix_content(p, w), w

    def test_realization_semantics(self):
        rng = random.Random(14)
        for _ in range(20):
            p = random_sercq(rng, pseudo=True)
            q = pseudo_acyclic_to_acyclic_fccq(p)
            for w in ["", "ab", "aab", "bba"]:
                assert realization_words(q, w) == spans_to_prefix_content(p, w), (p, w)
