"""Query splitting, classification and plan construction.

A query part matches at an occurrence of its anchor lemma when every other
lemma of the part occurs within ``max_distance`` words of it.  Plans only
decide which lists deliver that predicate most cheaply.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .codec import Family
from .lexicon import Lexicon, SchemaConfig, tokenize
from .store import IndexKey, canonical_key, key_admissible


class QueryClass(str, enum.Enum):
    Q1 = "Q1"  # only stop (FST-band) lemmas
    Q2 = "Q2"  # stop lemmas plus others: NSW records
    Q3 = "Q3"  # only (w, v)-capable lemmas
    Q4 = "Q4"  # (w, v)-capable and ordinary lemmas
    Q5 = "Q5"  # only ordinary lemmas


@dataclass(frozen=True)
class QueryLemma:
    name: str
    id: int | None  # None: lemma never seen by the index
    fl: int

    def sort_key(self) -> tuple:
        return (self.fl, self.name)

    def __str__(self) -> str:
        return f"{self.name}:{self.fl if self.id is not None else '~'}"


@dataclass(frozen=True)
class Lookup:
    """A list whose (doc, pos) pairs are read without NSW records."""

    lemma: QueryLemma
    key: IndexKey | None


@dataclass(frozen=True)
class QueryPart:
    words: tuple[str, ...]
    lemmas: tuple[QueryLemma, ...]  # deduplicated, first-occurrence order
    qclass: QueryClass
    anchor: QueryLemma
    keys: tuple[IndexKey, ...] = ()  # WV/FST keys; each yields anchor positions
    anchor_list: IndexKey | None = None  # read when no key yields anchor positions
    nsw_check: tuple[QueryLemma, ...] = ()  # verified in the anchor's NSW records
    residual: tuple[Lookup, ...] = ()
    trad_only: bool = False

    @property
    def read_anchor_nsw(self) -> bool:
        return bool(self.nsw_check)

    def covered(self) -> list[QueryLemma]:
        """Every lemma the plan accounts for, once per role it plays."""
        out = [self.anchor]
        for key in self.keys:
            out += [lm for lm in self.lemmas if lm.id in key.lemmas and lm != self.anchor]
        out += self.nsw_check
        out += [r.lemma for r in self.residual]
        return out


@dataclass(frozen=True)
class QueryPlan:
    words: tuple[str, ...]
    parts: tuple[QueryPart, ...]


def split_query(words: Sequence[str], max_distance: int) -> list[list[str]]:
    """Greedy left-to-right spans of at most ``max_distance`` words."""
    if max_distance < 1:
        raise ValueError("max_distance must be >= 1")
    return [list(words[i:i + max_distance]) for i in range(0, len(words), max_distance)]


def resolve_lemmas(words: Sequence[str], lexicon: Lexicon) -> tuple[QueryLemma, ...]:
    """One lemma per word (its most frequent known lemma), deduplicated.

    A word none of whose lemmas is indexed maps to an unknown lemma whose
    FL-number is the lexicon size.
    """
    seen: dict[str, QueryLemma] = {}
    for word in words:
        known = [(lexicon.fl(i), i) for i in lexicon.lemma_ids(word)]
        if known:
            fl, lid = min(known)
            lm = QueryLemma(lexicon.name(lid), lid, fl)
        else:
            lm = QueryLemma(min(lexicon.lemma_names(word)), None, len(lexicon))
        seen.setdefault(lm.name, lm)
    return tuple(seen.values())


def classify_part(fls: Sequence[int], cfg: SchemaConfig) -> QueryClass:
    if not fls:
        raise ValueError("cannot classify an empty part")
    if all(f < cfg.fst_limit for f in fls):
        return QueryClass.Q1
    if any(f < cfg.nsw_limit for f in fls):
        return QueryClass.Q2
    wband = [f < cfg.w_limit for f in fls]
    if all(wband):
        return QueryClass.Q3
    return QueryClass.Q4 if any(wband) else QueryClass.Q5


def choose_anchor(lemmas: Sequence[QueryLemma], qclass: QueryClass, cfg: SchemaConfig) -> QueryLemma:
    key = QueryLemma.sort_key
    if qclass is QueryClass.Q1:
        return min(lemmas, key=key)
    if qclass is QueryClass.Q2:
        return max((lm for lm in lemmas if lm.fl >= cfg.nsw_limit), key=key)
    if qclass in (QueryClass.Q3, QueryClass.Q4):
        return max((lm for lm in lemmas if cfg.nsw_limit <= lm.fl < cfg.w_limit), key=key)
    return max(lemmas, key=key)


def _lookup(lm: QueryLemma, cfg: SchemaConfig, trad_only: bool) -> Lookup:
    if lm.id is None:
        return Lookup(lm, None)
    if cfg.proximity and not trad_only and lm.fl >= cfg.nsw_limit:
        return Lookup(lm, IndexKey(Family.TRAD_NSW, (lm.id,)))
    return Lookup(lm, IndexKey(Family.TRAD, (lm.id,)))


def build_plan(words: Sequence[str], lexicon: Lexicon, cfg: SchemaConfig,
               trad_only: bool = False) -> QueryPart | None:
    """Plan one part; ``trad_only`` gives the traditional-index baseline.

    Returns None for a part without words.
    """
    lemmas = resolve_lemmas(words, lexicon)
    if not lemmas:
        return None
    qclass = classify_part([lm.fl for lm in lemmas], cfg)
    anchor = choose_anchor(lemmas, qclass, cfg)
    others = sorted((lm for lm in lemmas if lm != anchor), key=QueryLemma.sort_key)
    base = dict(words=tuple(words), lemmas=lemmas, qclass=qclass, anchor=anchor)

    if trad_only or not cfg.proximity:
        return QueryPart(**base, anchor_list=_lookup(anchor, cfg, True).key,
                         residual=tuple(_lookup(lm, cfg, True) for lm in others), trad_only=True)

    def admissible(family, members):
        if any(m.id is None for m in members):
            return None
        key = canonical_key(family, [m.id for m in members], lexicon)
        return key if key_admissible(key, lexicon, cfg) else None

    keys: list[IndexKey] = []
    residual: list[QueryLemma] = []
    nsw: list[QueryLemma] = []
    if qclass is QueryClass.Q1:
        for i in range(0, len(others), 2):
            group = [anchor, *others[i:i + 2]]
            key = admissible(Family.FST, group)
            if key is None:
                residual += group[1:]
            else:
                keys.append(key)
    elif qclass is QueryClass.Q2:
        for lm in others:
            if lm.fl < cfg.nsw_limit:
                nsw.append(lm)
                continue
            key = admissible(Family.WV, [lm, anchor]) if lm.fl < cfg.w_limit else None
            if key is None:
                residual.append(lm)
            else:
                keys.append(key)
    elif qclass in (QueryClass.Q3, QueryClass.Q4):
        for lm in others:
            key = admissible(Family.WV, [anchor, lm])
            if key is None:
                residual.append(lm)
            else:
                keys.append(key)
    else:
        residual = others

    anchor_list = None
    if qclass is QueryClass.Q2:
        if anchor.id is not None:
            anchor_list = IndexKey(Family.TRAD_NSW, (anchor.id,))
    elif not keys:
        # a lone Q1 lemma is answered from its plain list
        anchor_list = _lookup(anchor, cfg, qclass is QueryClass.Q1).key
    return QueryPart(**base, keys=tuple(keys), anchor_list=anchor_list, nsw_check=tuple(nsw),
                     residual=tuple(_lookup(lm, cfg, False) for lm in residual))


def plan_query(query: str | Sequence[str], lexicon: Lexicon, cfg: SchemaConfig,
               trad_only: bool = False) -> QueryPlan:
    words = tokenize(query) if isinstance(query, str) else list(query)
    parts = []
    for span in split_query(words, cfg.max_distance) if words else []:
        part = build_plan(span, lexicon, cfg, trad_only)
        if part is not None:
            parts.append(part)
    return QueryPlan(tuple(words), tuple(parts))


def _key_text(key: IndexKey, lexicon: Lexicon) -> str:
    return f"{key.family.value}({','.join(lexicon.name(i) for i in key.lemmas)})"


def explain(plan: QueryPlan, lexicon: Lexicon) -> str:
    """Stable text rendering of a plan."""
    lines = []
    for n, part in enumerate(plan.parts):
        lines.append(f"part {n}: {' '.join(part.words)!r} class={part.qclass.value}"
                     f" anchor={part.anchor}" + (" [trad-only]" if part.trad_only else ""))
        lines.append("  lemmas: " + " ".join(str(lm) for lm in part.lemmas))
        if part.anchor_list is not None:
            nsw = " +nsw" if part.read_anchor_nsw else ""
            lines.append(f"  anchor list: {_key_text(part.anchor_list, lexicon)}{nsw}")
        elif part.anchor.id is None and not part.keys:
            lines.append("  anchor list: <absent>")
        for key in part.keys:
            lines.append(f"  key: {_key_text(key, lexicon)}")
        if part.nsw_check:
            lines.append("  nsw check: " + " ".join(lm.name for lm in part.nsw_check))
        for r in part.residual:
            where = _key_text(r.key, lexicon) if r.key is not None else "<absent>"
            lines.append(f"  residual: {r.lemma.name} via {where}")
    return "\n".join(lines)
