"""Index over the input word: canonical factor identities, concatenation
lookup and per-factor regex membership.

Factor ids canonicalize factor equality: two spans get the same id exactly
when they spell the same word.  Ids are handed out lazily; the operations
that need every distinct factor materialize the full table on demand (they
are meant for desk-scale words, the id/lookup path also handles long ones).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .model import Alphabet, InvalidSpanError, RegexAst
from .nfa import thompson

EPSILON_ID = 0


@dataclass(frozen=True)
class Span:
    """1-based, half-open interval of the input word; (i, i) denotes epsilon."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise InvalidSpanError(f"bad span [{self.start},{self.end})")


class WordIndex:
    """Immutable after construction; concurrent read-only queries are safe."""

    def __init__(self, word: str, alphabet: Optional[Alphabet] = None):
        if alphabet is not None:
            for i, ch in enumerate(word):
                if ch not in alphabet:
                    raise ValueError(f"input byte {ch!r} at offset {i} is outside the alphabet")
        self.word = word
        self.n = len(word)
        self._ids: dict[str, int] = {"": EPSILON_ID}
        self._canonical: list[Span] = [Span(1, 1)]
        self._words: list[str] = [""]
        self._all_materialized = False

    # -- identity -------------------------------------------------------------

    def _register(self, factor: str) -> int:
        fid = self._ids.get(factor)
        if fid is not None:
            return fid
        at = self.word.find(factor)
        if at < 0:
            raise ValueError(f"{factor!r} is not a factor of the input word")
        fid = len(self._words)
        self._ids[factor] = fid
        self._canonical.append(Span(at + 1, at + 1 + len(factor)))
        self._words.append(factor)
        return fid

    def check_span(self, s: Span) -> None:
        if s.end > self.n + 1:
            raise InvalidSpanError(f"span [{s.start},{s.end}) exceeds the word (n={self.n})")

    def factor_id(self, s: Span) -> int:
        """Equal factors yield equal ids; the id of epsilon is 0."""
        self.check_span(s)
        return self._register(self.word[s.start - 1:s.end - 1])

    def id_of_word(self, factor: str) -> Optional[int]:
        fid = self._ids.get(factor)
        if fid is not None:
            return fid
        if factor and self.word.find(factor) < 0:
            return None
        return self._register(factor)

    def word_of(self, fid: int) -> str:
        return self._words[fid]

    def canonical_span(self, fid: int) -> Span:
        """Leftmost occurrence (smallest start, then smallest end)."""
        return self._canonical[fid]

    def whole_word_id(self) -> int:
        return self._register(self.word)

    def factor_count(self) -> int:
        self._materialize_all()
        return len(self._words)

    def _materialize_all(self) -> None:
        if self._all_materialized:
            return
        for i in range(self.n):
            for j in range(i + 1, self.n + 1):
                self._register(self.word[i:j])
        self._all_materialized = True

    def all_factor_ids(self) -> list[int]:
        self._materialize_all()
        return list(range(len(self._words)))

    # -- concatenation ----------------------------------------------------------

    def concat_id(self, a: int, b: int) -> Optional[int]:
        """Id of word(a)+word(b) when that word occurs in w, else None."""
        return self.id_of_word(self._words[a] + self._words[b])

    def enumerate_concat_triples(self) -> Iterator[tuple[int, int, int]]:
        """All (z, x, y) over distinct factors with word(z) = word(x)+word(y).

        Every split of the canonical occurrence of z realizes one (x, y) pair,
        and distinct splits give distinct pairs, so there are no duplicates.
        """
        for z in self.all_factor_ids():
            s = self._canonical[z]
            for m in range(s.start, s.end + 1):
                yield z, self.factor_id(Span(s.start, m)), self.factor_id(Span(m, s.end))

    # -- regex membership ---------------------------------------------------------

    def regex_members(self, regex: RegexAst) -> set[int]:
        """Ids of exactly those distinct factors the regex accepts."""
        nfa = thompson(regex)
        out: set[int] = set()
        if nfa.is_accepting(nfa.initial()):
            out.add(EPSILON_ID)
        for i in range(self.n):
            states = nfa.initial()
            for j in range(i, self.n):
                states = nfa.step(states, self.word[j])
                if not states:
                    break
                if nfa.is_accepting(states):
                    out.add(self.factor_id(Span(i + 1, j + 2)))
        return out


def build_index(word: str, alphabet: Optional[Alphabet] = None) -> WordIndex:
    """Build the factor index for an input word."""
    return WordIndex(word, alphabet)
