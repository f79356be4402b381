"""Planned-performance-gain model, Min-FL binning and synthetic Zipf data."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Container, Iterable, Sequence

import numpy as np

from .builder import Document
from .lexicon import Lexicon, SchemaConfig, tokenize
from .planner import QueryClass, classify_part, resolve_lemmas, split_query

NSW_FACTOR = 4.5


def ppg(ranks: Sequence[int], stop: Container[int] | Callable[[int], bool],
        nsw_factor: float = NSW_FACTOR) -> float:
    """Postings read by a traditional plan over postings read with NSW records.

    ``ranks`` are 1-based FL ranks.  Stop lemmas drop out of the NSW plan; the
    rarest non-stop lemma is read with its NSW records, which cost
    ``nsw_factor`` times a plain posting.  Without both a stop and a
    non-stop lemma the gain is 1.
    """
    if any(r < 1 for r in ranks):
        raise ValueError("ranks are 1-based")
    is_stop = stop if callable(stop) else stop.__contains__
    flags = [bool(is_stop(r)) for r in ranks]
    if all(flags) or not any(flags):
        return 1.0
    rest = [r for r, s in zip(ranks, flags) if not s]
    main = max(rest)
    traditional = sum(1 / r for r in ranks)
    with_nsw = sum(1 / r for r in rest) + (1 / main) * (nsw_factor - 1)
    return traditional / with_nsw


def query_ppg(fls: Sequence[int], cfg: SchemaConfig, nsw_factor: float = NSW_FACTOR) -> float:
    """PPG of a query given the FL-numbers of its (distinct) lemmas; 1 unless it is Q2."""
    if not fls or classify_part(fls, cfg) is not QueryClass.Q2:
        return 1.0
    return ppg([f + 1 for f in fls], lambda r: r - 1 < cfg.nsw_limit, nsw_factor)


def appg(workload: Iterable[Sequence[int]], cfg: SchemaConfig, nsw_factor: float = NSW_FACTOR) -> float:
    values = [query_ppg(fls, cfg, nsw_factor) for fls in workload]
    if not values:
        raise ValueError("empty workload")
    return math.fsum(values) / len(values)


def appg_table(workload: Sequence[Sequence[int]], cfg: SchemaConfig, swcounts: Iterable[int],
               nsw_factor: float = NSW_FACTOR) -> list[tuple[int, float]]:
    return [(sw, appg(workload, replace(cfg, swcount=sw), nsw_factor)) for sw in swcounts]


def query_fls(query: str, lexicon: Lexicon) -> list[int]:
    return [lm.fl for lm in resolve_lemmas(tokenize(query), lexicon)]


# -- Min-FL bins --------------------------------------------------------------


@dataclass(frozen=True)
class Bin:
    index: int
    lo: int
    hi: int  # exclusive
    count: int
    mean: float | None


@dataclass(frozen=True)
class BinReport:
    step: int
    bins: tuple[Bin, ...]
    dropped: int = 0  # queries beyond the last bin


def bin_index(min_fl: int, step: int = 100) -> int:
    return min_fl // step


def bin_by_min_fl(min_fls: Sequence[int], metric: Sequence[float], step: int = 100,
                  n_bins: int | None = None) -> BinReport:
    if len(min_fls) != len(metric):
        raise ValueError("one metric value per query")
    if step <= 0:
        raise ValueError("step must be positive")
    if n_bins is None:
        n_bins = max((bin_index(f, step) for f in min_fls), default=-1) + 1
    sums = [0.0] * n_bins
    counts = [0] * n_bins
    dropped = 0
    for f, m in zip(min_fls, metric):
        k = bin_index(f, step)
        if k >= n_bins:
            dropped += 1
            continue
        sums[k] += m
        counts[k] += 1
    bins = tuple(Bin(k, k * step, (k + 1) * step, counts[k], sums[k] / counts[k] if counts[k] else None)
                 for k in range(n_bins))
    return BinReport(step, bins, dropped)


# -- synthetic data -----------------------------------------------------------


def zipf_word(rank: int) -> str:
    return f"w{rank}"


def gen_corpus(seed: int, vocab_size: int, doc_count: int, doc_len_range: tuple[int, int] = (50, 200),
               zipf_exponent: float = 1.0, word: Callable[[int], str] = zipf_word,
               id_prefix: str = "d") -> list[Document]:
    """Documents whose words are drawn i.i.d. with P(rank k) proportional to 1/k**exponent."""
    lo, hi = doc_len_range
    if min(vocab_size, doc_count, lo) <= 0 or hi < lo or zipf_exponent <= 0:
        raise ValueError("generator parameters must be positive")
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, vocab_size + 1) ** zipf_exponent
    lengths = rng.integers(lo, hi + 1, size=doc_count)
    draws = rng.choice(vocab_size, size=int(lengths.sum()), p=weights / weights.sum())
    vocab = [word(k) for k in range(1, vocab_size + 1)]
    docs, at = [], 0
    for i, n in enumerate(lengths):
        docs.append(Document(f"{id_prefix}{i}", " ".join(vocab[j] for j in draws[at:at + n])))
        at += n
    return docs


def _bands(cfg: SchemaConfig, qclass: QueryClass) -> tuple[list[tuple[int, float]], tuple[int, float]]:
    """FL intervals that some lemma must hit, and the interval for the rest."""
    S, F, W, inf = cfg.nsw_limit, cfg.fst_limit, cfg.w_limit, math.inf
    return {
        QueryClass.Q1: ([(0, F)], (0, F)),
        QueryClass.Q2: ([(0, S), (F, inf)], (0, inf)),
        QueryClass.Q3: ([(F, W)], (S, W)),
        QueryClass.Q4: ([(S, W), (W, inf)], (S, inf)),
        QueryClass.Q5: ([(W, inf)], (W, inf)),
    }[qclass]


def gen_query(rng: np.random.Generator, tapes: Sequence[Sequence[frozenset[int]]], lexicon: Lexicon,
              cfg: SchemaConfig, qclass: QueryClass, length: int, from_text: bool = True,
              tries: int = 50) -> str | None:
    """A single-part query of ``length`` words whose lemmas put it in ``qclass``.

    With ``from_text`` lemmas are preferred from one window of a document, so
    that a fair share of queries has matches.  Returns None if no query was
    found.
    """
    required, rest = _bands(cfg, qclass)
    fl_to_id = lexicon.fl_list.order
    n_lemmas = len(lexicon)
    length = min(length, cfg.max_distance)

    def pick(pool, lo, hi, chosen):
        cand = [i for i in pool if lo <= lexicon.fl(i) < hi and i not in chosen]
        if cand:
            return cand[int(rng.integers(len(cand)))]
        top = min(hi, n_lemmas)
        if lo >= top:
            return None
        for _ in range(8):
            i = fl_to_id[int(rng.integers(lo, top))]
            if i not in chosen:
                return i
        return None

    for _ in range(tries):
        pool: list[int] = []
        if from_text and tapes:
            tape = tapes[int(rng.integers(len(tapes)))]
            if tape:
                p = int(rng.integers(len(tape)))
                pool = sorted({i for s in tape[max(0, p - cfg.max_distance):p + cfg.max_distance + 1]
                               for i in s})
        chosen: list[int] = []
        for lo, hi in required:
            i = pick(pool, lo, hi, chosen)
            if i is not None:
                chosen.append(i)
        while len(chosen) < max(length, len(required)):
            i = pick(pool, *rest, chosen)
            if i is None:
                break
            chosen.append(i)
        if not chosen:
            continue
        order = [chosen[k] for k in rng.permutation(len(chosen))]
        query = " ".join(lexicon.name(i) for i in order)
        words = tokenize(query)
        if len(split_query(words, cfg.max_distance)) != 1:
            continue
        lemmas = resolve_lemmas(words, lexicon)
        if classify_part([lm.fl for lm in lemmas], cfg) is qclass:
            return query
    return None


def gen_workload(seed: int, docs: Sequence[Document], lexicon: Lexicon, cfg: SchemaConfig,
                 per_class: int, classes: Iterable[QueryClass] = tuple(QueryClass),
                 length_range: tuple[int, int] = (1, 5)) -> list[tuple[QueryClass, str]]:
    rng = np.random.default_rng(seed)
    tapes = [lexicon.tape(d.text) for d in docs]
    out = []
    for qclass in classes:
        made = 0
        for attempt in range(per_class * 4):
            if made == per_class:
                break
            length = int(rng.integers(length_range[0], length_range[1] + 1))
            q = gen_query(rng, tapes, lexicon, cfg, qclass, length, from_text=attempt % 4 != 3)
            if q is not None:
                out.append((qclass, q))
                made += 1
    return out
