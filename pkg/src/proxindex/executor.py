"""Plan execution (document-at-a-time), the brute-force oracle, and
distance-free document search."""

from __future__ import annotations

import json
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .builder import Document
from .codec import Family, decode_posting_list
from .lexicon import Lexicon, SchemaConfig, tokenize
from .planner import (QueryPart, QueryPlan, choose_anchor, classify_part, plan_query,
                      resolve_lemmas, split_query)
from .store import IndexKey, IndexStore, ReadStats

Matches = dict[int, list[int]]  # doc -> sorted anchor positions


@dataclass
class SearchResult:
    parts: list[Matches] = field(default_factory=list)
    stats: ReadStats = field(default_factory=ReadStats)
    part_stats: list[ReadStats] = field(default_factory=list)

    @property
    def matches(self) -> Matches:
        """Union over parts."""
        out: dict[int, set[int]] = defaultdict(set)
        for m in self.parts:
            for doc, anchors in m.items():
                out[doc].update(anchors)
        return {doc: sorted(out[doc]) for doc in sorted(out)}

    @property
    def docs(self) -> list[int]:
        return sorted({d for m in self.parts for d in m})

    def to_jsonl(self, doc_ids: Sequence[str] | None = None) -> Iterator[str]:
        for n, m in enumerate(self.parts):
            for doc in sorted(m):
                name = doc_ids[doc] if doc_ids is not None else doc
                yield json.dumps({"doc": name, "anchors": m[doc], "part": n})


def _fetch(store: IndexStore, key: IndexKey | None, stats: ReadStats,
           want_nsw: bool = False) -> list[tuple]:
    if key is None:
        return []
    got = store.get_streams(key, want_nsw=want_nsw, stats=stats)
    if got is None:
        return []
    postings = decode_posting_list(got.streams, key.family, got.entry.layout, arity=key.arity)
    stats.postings_decoded[key.family] += len(postings)
    return postings


def _group(postings: Iterable[tuple], value) -> list[tuple[int, object]]:
    """Sorted ``(doc, collection)`` groups; ``value(posting)`` yields one item or None."""
    groups: list[tuple[int, list]] = []
    for p in postings:
        v = value(p)
        if v is None:
            continue
        if not groups or groups[-1][0] != p[0]:
            groups.append((p[0], []))
        groups[-1][1].append(v)
    return groups


def daat(lists: Sequence[Sequence[tuple[int, object]]]) -> Iterator[tuple[int, list]]:
    """Documents present in every list, in ascending order, with each list's payload."""
    if not lists or any(not lst for lst in lists):
        return
    cur = [0] * len(lists)
    target = lists[0][0][0]
    while True:
        aligned = True
        for i, lst in enumerate(lists):
            c = cur[i]
            while c < len(lst) and lst[c][0] < target:
                c += 1
            cur[i] = c
            if c == len(lst):
                return
            if lst[c][0] > target:
                target = lst[c][0]
                aligned = False
        if aligned:
            yield target, [lst[cur[i]][1] for i, lst in enumerate(lists)]
            for i in range(len(lists)):
                cur[i] += 1
            if any(cur[i] == len(lst) for i, lst in enumerate(lists)):
                return
            target = lists[0][cur[0]][0]


def _near(positions: list[int], p: int, md: int) -> bool:
    i = bisect_left(positions, p - md)
    return i < len(positions) and positions[i] <= p + md


def execute_part(part: QueryPart, store: IndexStore, stats: ReadStats | None = None) -> Matches:
    stats = stats if stats is not None else ReadStats()
    if part.anchor.id is None:
        return {}
    md = store.cfg.max_distance
    anchor_id = part.anchor.id
    # candidate lists: each payload is a set of anchor positions in that doc
    candidates: list[list] = []
    for key in part.keys:
        postings = _fetch(store, key, stats)
        if key.family is Family.FST or key.lemmas[0] == anchor_id:
            candidates.append(_group(postings, lambda p: p[1]))
        else:
            candidates.append(_group(postings, lambda p: p[1] + p[2]))
    if part.anchor_list is not None:
        postings = _fetch(store, part.anchor_list, stats, want_nsw=part.read_anchor_nsw)
        if part.read_anchor_nsw:
            need = {lm.id for lm in part.nsw_check}
            if None in need:
                return {}
            candidates.insert(0, _group(postings, lambda p: p[1] if need <= {y for _, y in p[2]} else None))
        else:
            candidates.insert(0, _group(postings, lambda p: p[1]))
    residual = [_group(_fetch(store, r.key, stats), lambda p: p[1]) for r in part.residual]
    if not candidates:
        return {}
    n = len(candidates)
    out: Matches = {}
    for doc, payloads in daat(candidates + residual):
        anchors = set(payloads[0]).intersection(*payloads[1:n])
        hits = sorted(p for p in anchors if all(_near(pos, p, md) for pos in payloads[n:]))
        if hits:
            out[doc] = hits
    return out


def execute(plan: QueryPlan, store: IndexStore) -> SearchResult:
    """Run every part; all referenced lists are read in full."""
    result = SearchResult()
    for part in plan.parts:
        st = ReadStats()
        result.parts.append(execute_part(part, store, st))
        result.part_stats.append(st)
        result.stats.merge(st)
    return result


def search(query: str, store: IndexStore, trad_only: bool = False) -> SearchResult:
    return execute(plan_query(query, store.lexicon, store.cfg, trad_only), store)


# -- oracle -------------------------------------------------------------------


def oracle_search(query: str | Sequence[str], docs: Sequence[Document], lexicon: Lexicon,
                  cfg: SchemaConfig) -> SearchResult:
    """Anchor-star matches found by scanning every document; uses no index."""
    words = tokenize(query) if isinstance(query, str) else list(query)
    tapes = [lexicon.tape(d.text) for d in docs]
    result = SearchResult()
    for span in split_query(words, cfg.max_distance) if words else []:
        lemmas = resolve_lemmas(span, lexicon)
        anchor = choose_anchor(lemmas, classify_part([lm.fl for lm in lemmas], cfg), cfg)
        others = [lm.id for lm in lemmas if lm != anchor]
        found: Matches = {}
        for doc, tape in enumerate(tapes):
            hits = []
            for p, ids in enumerate(tape):
                if anchor.id is None or anchor.id not in ids:
                    continue
                window = tape[max(0, p - cfg.max_distance):p + cfg.max_distance + 1]
                if all(any(o in ids_q for ids_q in window) for o in others):
                    hits.append(p)
            if hits:
                found[doc] = hits
        result.parts.append(found)
    return result


# -- document-level -----------------------------------------------------------


def doc_level_search(query: str | Sequence[str], store: IndexStore,
                     stats: ReadStats | None = None) -> list[int]:
    """Documents containing every query lemma, at any distance."""
    stats = stats if stats is not None else ReadStats()
    words = tokenize(query) if isinstance(query, str) else list(query)
    lemmas = resolve_lemmas(words, store.lexicon)
    if not lemmas or any(lm.id is None for lm in lemmas):
        return []
    docs: set[int] | None = None
    for lm in sorted(lemmas, key=lambda lm: -lm.fl):
        postings = _fetch(store, IndexKey(Family.TRAD, (lm.id,)), stats)
        here = {p[0] for p in postings}
        docs = here if docs is None else docs & here
    return sorted(docs)
