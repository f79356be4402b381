"""Tokenization, lemmatization, the FL-list and lemma classification.

A lemma's FL-number is its 0-based rank when all lemmas are sorted by
decreasing corpus frequency.  Every lemma-type and index-admission decision
in the package is a function of FL-numbers and a :class:`SchemaConfig`.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Split on non-alphanumeric characters and case-fold.

    The index of a token in the returned list is its word position.
    """
    return _TOKEN_RE.findall(text.casefold())


# -- dictionary ---------------------------------------------------------------

Dictionary = Mapping[str, tuple[str, ...]]


def parse_dictionary(lines: Iterable[str]) -> dict[str, tuple[str, ...]]:
    """Parse ``word<TAB>lemma1,lemma2`` lines; blank lines and ``#`` comments are skipped."""
    out: dict[str, tuple[str, ...]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            word, lemmas = line.split("\t")
        except ValueError:
            raise ValueError(f"dictionary line {lineno}: expected word<TAB>lemmas") from None
        names = tuple(sorted({lm.strip().casefold() for lm in lemmas.split(",") if lm.strip()}))
        if not names:
            raise ValueError(f"dictionary line {lineno}: no lemmas for {word!r}")
        out[word.strip().casefold()] = names
    return out


def load_dictionary(path: str | Path | None = None) -> dict[str, tuple[str, ...]]:
    """Load a dictionary file, or the small English sample shipped with the package."""
    if path is None:
        text = resources.files("proxindex").joinpath("data/dictionary.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_dictionary(text.splitlines())


def lemmatize(word: str, dictionary: Dictionary) -> frozenset[str]:
    """All lemmas of ``word``; a word missing from the dictionary is its own lemma."""
    return frozenset(dictionary.get(word, (word,)))


# -- FL-list ------------------------------------------------------------------


@dataclass(frozen=True)
class FLList:
    """Lemma registry plus frequency ranking.

    ``lemmas[i]`` is the string of LemmaId ``i``.  ``order`` lists LemmaIds by
    decreasing count (ties by ascending lemma string), so the FL-number of a
    lemma is its index in ``order``.
    """

    lemmas: tuple[str, ...]
    order: tuple[int, ...]
    counts: tuple[int, ...]  # indexed by LemmaId
    _fl: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.lemmas))):
            raise ValueError("order must be a permutation of the lemma ids")
        fl = [0] * len(self.order)
        for rank, lid in enumerate(self.order):
            fl[lid] = rank
        object.__setattr__(self, "_fl", tuple(fl))
        object.__setattr__(self, "_ids", {name: i for i, name in enumerate(self.lemmas)})

    def __len__(self) -> int:
        return len(self.lemmas)

    @property
    def fl_of(self) -> dict[int, int]:
        return dict(enumerate(self._fl))

    @property
    def freq_of(self) -> dict[int, int]:
        return dict(enumerate(self.counts))

    def fl(self, lemma_id: int) -> int:
        return self._fl[lemma_id]

    def lemma_id(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, lemma_id: int) -> str:
        return self.lemmas[lemma_id]

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> FLList:
        # LemmaIds follow lemma string order so they do not depend on document order.
        names = tuple(sorted(counts))
        ranked = sorted(range(len(names)), key=lambda i: (-counts[names[i]], names[i]))
        return cls(names, tuple(ranked), tuple(counts[n] for n in names))

    @classmethod
    def from_ranking(cls, names: Iterable[str]) -> FLList:
        """FL-list with the given lemmas at FL 0, 1, 2, ... (counts are synthetic)."""
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate lemma in ranking")
        n = len(names)
        return cls.from_counts({name: n - rank for rank, name in enumerate(names)})

    def extended(self, new_names: Iterable[str]) -> FLList:
        """Append unseen lemmas after every existing one, with count 0.

        Existing LemmaIds and FL-numbers are unchanged, which is what an
        incremental index update needs.
        """
        fresh = [n for n in dict.fromkeys(new_names) if n not in self._ids]
        if not fresh:
            return self
        base = len(self.lemmas)
        return FLList(
            self.lemmas + tuple(fresh),
            self.order + tuple(range(base, base + len(fresh))),
            self.counts + (0,) * len(fresh),
        )

    def to_json(self) -> dict:
        return {"lemmas": list(self.lemmas), "order": list(self.order), "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: Mapping) -> FLList:
        return cls(tuple(obj["lemmas"]), tuple(obj["order"]), tuple(obj["counts"]))


def count_lemmas(texts: Iterable[str], dictionary: Dictionary) -> Counter:
    # Multi-lemma words add one occurrence to each of their lemmas.
    counts: Counter = Counter()
    for text in texts:
        for word in tokenize(text):
            counts.update(lemmatize(word, dictionary))
    return counts


def build_fl_list(texts: Iterable[str], dictionary: Dictionary) -> FLList:
    return FLList.from_counts(count_lemmas(texts, dictionary))


# -- schema -------------------------------------------------------------------


class SchemaKind(str, enum.Enum):
    ORIGINAL = "original"
    NEW = "new"


class LemmaType(str, enum.Enum):
    STOP = "stop"
    EXTREME_HIGH_FREQ = "extreme_high_freq"
    HIGH_FREQ = "high_freq"
    FREQUENTLY_USED = "frequently_used"
    ORDINARY = "ordinary"


@dataclass(frozen=True)
class SchemaConfig:
    """Index schema thresholds.

    ``proximity=False`` describes a traditional-only index (no NSW records,
    no multi-component keys).
    """

    kind: SchemaKind = SchemaKind.ORIGINAL
    max_distance: int = 5
    swcount: int = 500
    fucount: int = 1050
    ehfcount: int = 100
    hfcount: int = 400
    proximity: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemaKind(self.kind))
        if self.max_distance < 1:
            raise ValueError("max_distance must be >= 1")
        for name in ("swcount", "fucount", "ehfcount", "hfcount"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def original(cls, max_distance=5, swcount=500, fucount=1050, **kw) -> SchemaConfig:
        return cls(SchemaKind.ORIGINAL, max_distance, swcount=swcount, fucount=fucount, **kw)

    @classmethod
    def new(cls, max_distance=5, ehfcount=100, hfcount=400, fucount=1050, **kw) -> SchemaConfig:
        return cls(SchemaKind.NEW, max_distance, fucount=fucount, ehfcount=ehfcount,
                   hfcount=hfcount, **kw)

    # Band limits shared by the builder, planner and admission checks.
    @property
    def nsw_limit(self) -> int:
        """Lemmas with FL below this go into NSW records; the rest carry them."""
        return self.swcount if self.kind is SchemaKind.ORIGINAL else self.ehfcount

    @property
    def fst_limit(self) -> int:
        """Lemmas with FL below this may form (f, s, t) keys."""
        return self.swcount if self.kind is SchemaKind.ORIGINAL else self.ehfcount + self.hfcount

    @property
    def w_limit(self) -> int:
        """Upper bound (exclusive) of FL for the first component of a (w, v) key."""
        if self.kind is SchemaKind.ORIGINAL:
            return self.swcount + self.fucount
        return self.ehfcount + self.hfcount + self.fucount

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "max_distance": self.max_distance,
            "swcount": self.swcount,
            "fucount": self.fucount,
            "ehfcount": self.ehfcount,
            "hfcount": self.hfcount,
            "proximity": self.proximity,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> SchemaConfig:
        return cls(**obj)


def lemma_type(fl: int, cfg: SchemaConfig) -> LemmaType:
    if cfg.kind is SchemaKind.ORIGINAL:
        if fl < cfg.swcount:
            return LemmaType.STOP
        if fl < cfg.swcount + cfg.fucount:
            return LemmaType.FREQUENTLY_USED
        return LemmaType.ORDINARY
    if fl < cfg.ehfcount:
        return LemmaType.EXTREME_HIGH_FREQ
    if fl < cfg.ehfcount + cfg.hfcount:
        return LemmaType.HIGH_FREQ
    if fl < cfg.ehfcount + cfg.hfcount + cfg.fucount:
        return LemmaType.FREQUENTLY_USED
    return LemmaType.ORDINARY


# -- lexicon ------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicon:
    dictionary: Mapping[str, tuple[str, ...]]
    fl_list: FLList

    def __len__(self) -> int:
        return len(self.fl_list)

    def lemma_names(self, word: str) -> frozenset[str]:
        return lemmatize(word, self.dictionary)

    def lemma_ids(self, word: str) -> frozenset[int]:
        """Known LemmaIds of ``word``; lemmas absent from the FL-list are dropped."""
        ids = (self.fl_list.lemma_id(n) for n in lemmatize(word, self.dictionary))
        return frozenset(i for i in ids if i is not None)

    def fl(self, lemma_id: int) -> int:
        return self.fl_list.fl(lemma_id)

    def name(self, lemma_id: int) -> str:
        return self.fl_list.name(lemma_id)

    def tape(self, text: str) -> list[frozenset[int]]:
        """Per-position LemmaId sets of ``text``."""
        return [self.lemma_ids(w) for w in tokenize(text)]

    def extended_with(self, texts: Iterable[str]) -> Lexicon:
        new = (n for t in texts for w in tokenize(t) for n in lemmatize(w, self.dictionary))
        return Lexicon(self.dictionary, self.fl_list.extended(new))

    def to_json(self) -> dict:
        return {
            "dictionary": {w: list(ls) for w, ls in sorted(self.dictionary.items())},
            "fl_list": self.fl_list.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> Lexicon:
        return cls({w: tuple(ls) for w, ls in obj["dictionary"].items()},
                   FLList.from_json(obj["fl_list"]))


def build_lexicon(texts: Iterable[str], dictionary: Dictionary) -> Lexicon:
    return Lexicon(dict(dictionary), build_fl_list(texts, dictionary))
