#!/usr/bin/env python3
"""Evaluation timing sweep: plan once, then model-check a fixed acyclic query
against increasingly long random words.  Words whose atoms stay grounded to
the whole input keep relations linear in the word length."""
from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass

from wordeq.evaluator import model_check
from wordeq.frontend import parse_query
from wordeq.index import build_index
from wordeq.model import Alphabet
from wordeq.planner import plan


@dataclass
class BenchConfig:
    query: str = "ans() :- u = x.y, u = y.x"
    lengths: tuple[int, ...] = (100, 250, 500, 1000, 2000, 4000)
    seed: int = 1
    alphabet: str = "ab"


def run(cfg: BenchConfig) -> None:
    rng = random.Random(cfg.seed)
    alphabet = Alphabet(tuple(cfg.alphabet))
    q = parse_query(cfg.query, alphabet)
    t0 = time.perf_counter()
    p = plan(q)
    print(f"plan: {1000 * (time.perf_counter() - t0):.2f} ms, "
          f"{len(p.tree.nodes)} tree nodes")
    print(f"{'|w|':>7} {'index ms':>9} {'check ms':>9} {'answer':>7}")
    for n in cfg.lengths:
        w = "".join(rng.choice(cfg.alphabet) for _ in range(n))
        t0 = time.perf_counter()
        ix = build_index(w, alphabet)
        t1 = time.perf_counter()
        truth = model_check(p, ix)
        t2 = time.perf_counter()
        print(f"{n:>7} {1000 * (t1 - t0):>8.1f} {1000 * (t2 - t1):>8.1f} {str(truth):>7}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--query", default=BenchConfig.query)
    ap.add_argument("--lengths", type=int, nargs="+",
                    default=list(BenchConfig.lengths))
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    run(BenchConfig(query=args.query, lengths=tuple(args.lengths), seed=args.seed))


if __name__ == "__main__":
    main()
