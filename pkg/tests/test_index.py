from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_regex
from wordeq.index import EPSILON_ID, Span, build_index
from wordeq.model import InvalidSpanError
from wordeq.nfa import thompson


def brute_distinct_factors(w: str) -> set[str]:
    return {""} | {w[i:j] for i in range(len(w)) for j in range(i + 1, len(w) + 1)}


class TestFactorIdentity:
    def test_banana_equal_spans(self):
        ix = build_index("banana")
        assert ix.factor_id(Span(2, 4)) == ix.factor_id(Span(4, 6))
        assert ix.word_of(ix.factor_id(Span(2, 4))) == "an"

    def test_epsilon_is_zero(self):
        ix = build_index("banana")
        for i in range(1, 8):
            assert ix.factor_id(Span(i, i)) == EPSILON_ID

    def test_distinct_letters(self):
        ix = build_index("ab")
        assert ix.factor_id(Span(1, 2)) != ix.factor_id(Span(2, 3))

    def test_invalid_span(self):
        ix = build_index("ab")
        with pytest.raises(InvalidSpanError):
            ix.factor_id(Span(1, 9))
        with pytest.raises(InvalidSpanError):
            Span(3, 2)

    @given(st.text(alphabet="ab", max_size=32))
    @settings(max_examples=120)
    def test_ids_mirror_word_equality(self, w):
        ix = build_index(w)
        spans = [(i, j) for i in range(1, len(w) + 2) for j in range(i, len(w) + 2)]
        ids = {}
        for i, j in spans:
            fid = ix.factor_id(Span(i, j))
            ids.setdefault(w[i - 1:j - 1], set()).add(fid)
        for factor, fids in ids.items():
            assert len(fids) == 1
        assert len({next(iter(s)) for s in ids.values()}) == len(ids)
        n = len(w)
        assert ix.factor_count() <= n * (n + 1) // 2 + 1

    def test_counts(self):
        for w, expect in [("aa", 3), ("", 1), ("ab", 4)]:
            assert build_index(w).factor_count() == expect

    def test_canonical_span_is_leftmost(self):
        ix = build_index("banana")
        fid = ix.id_of_word("an")
        assert ix.canonical_span(fid) == Span(2, 4)


class TestConcat:
    def test_banana(self):
        ix = build_index("banana")
        assert ix.concat_id(ix.id_of_word("an"), ix.id_of_word("a")) == ix.id_of_word("ana")

    def test_epsilon_identity(self):
        ix = build_index("abab")
        for fid in ix.all_factor_ids():
            assert ix.concat_id(EPSILON_ID, fid) == fid
            assert ix.concat_id(fid, EPSILON_ID) == fid

    def test_not_a_factor(self):
        ix = build_index("ab")
        b = ix.id_of_word("b")
        assert ix.concat_id(b, b) is None

    @given(st.text(alphabet="ab", min_size=1, max_size=9))
    @settings(max_examples=60, deadline=None)
    def test_associativity_where_defined(self, w):
        ix = build_index(w)
        fids = ix.all_factor_ids()
        for a in fids:
            for b in fids:
                ab_ = ix.concat_id(a, b)
                for c in fids:
                    bc = ix.concat_id(b, c)
                    left = ix.concat_id(ab_, c) if ab_ is not None else None
                    right = ix.concat_id(a, bc) if bc is not None else None
                    if left is not None and right is not None:
                        assert left == right


class TestTriples:
    @pytest.mark.parametrize("w", ["", "a", "aa", "ab", "abab", "banana", "aabbaab", "abaabbbaabab"])
    def test_matches_brute_force(self, w):
        ix = build_index(w)
        got = set(ix.enumerate_concat_triples())
        facs = sorted(brute_distinct_factors(w))
        ids = {f: ix.id_of_word(f) for f in facs}
        expected = {(ids[z], ids[x], ids[y])
                    for z in facs for x in facs for y in facs if x + y == z}
        assert got == expected

    def test_aa_has_six(self):
        assert len(set(build_index("aa").enumerate_concat_triples())) == 6

    def test_every_triple_concats(self):
        ix = build_index("abab")
        for z, x, y in ix.enumerate_concat_triples():
            assert ix.concat_id(x, y) == z


class TestRegexMembers:
    def test_empty_and_epsilon(self, ab):
        from wordeq.model import REmpty, REpsilon
        ix = build_index("abab")
        assert ix.regex_members(REmpty()) == set()
        assert ix.regex_members(REpsilon()) == {EPSILON_ID}

    def test_matches_per_factor_oracle(self):
        rng = random.Random(5)
        for _ in range(40):
            w = "".join(rng.choice("ab") for _ in range(rng.randint(0, 12)))
            regex = random_regex(rng, depth=3)
            ix = build_index(w)
            nfa = thompson(regex)
            expected = {ix.id_of_word(f) for f in brute_distinct_factors(w) if nfa.accepts(f)}
            assert ix.regex_members(regex) == expected

    def test_fixed_regexes_on_abab(self, ab):
        from wordeq.frontend import parse_regex
        ix = build_index("abab")
        members = {ix.word_of(f) for f in ix.regex_members(parse_regex("a('b')*", ab))}
        assert members == {"a", "ab"}
        members = {ix.word_of(f) for f in ix.regex_members(parse_regex("a(b|ba)*", ab))}
        assert members == {"a", "ab", "aba", "abab"}
