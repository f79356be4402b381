"""Single-pass construction of all index families."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .codec import Family, decode_posting_list, encode_posting_list, select_stream_layout
from .lexicon import Dictionary, Lexicon, SchemaConfig, build_lexicon
from .store import IndexKey, IndexStore

log = logging.getLogger(__name__)

RawKey = tuple  # (Family, lemma ids...) before IndexKey wrapping


@dataclass(frozen=True)
class Document:
    id: str
    text: str


def read_jsonl(path: str | Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if not isinstance(obj.get("id"), str) or not isinstance(obj.get("text"), str):
                raise ValueError(f"{path}:{lineno}: need string fields 'id' and 'text'")
            docs.append(Document(obj["id"], obj["text"]))
    return docs


def read_text_dir(path: str | Path) -> list[Document]:
    files = sorted(p for p in Path(path).iterdir() if p.is_file())
    return [Document(p.name, p.read_text("utf-8")) for p in files]


def read_corpus(path: str | Path) -> list[Document]:
    path = Path(path)
    return read_text_dir(path) if path.is_dir() else read_jsonl(path)


def write_jsonl(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"id": d.id, "text": d.text}) + "\n")


def index_document(doc: int, tape: Sequence[frozenset[int]], lexicon: Lexicon,
                   cfg: SchemaConfig) -> dict[RawKey, list[tuple]]:
    """Postings contributed by one document, keyed by ``(family, *lemmas)``.

    ``tape[p]`` is the lemma set of the word at position ``p``.  Each key's
    postings come out sorted.
    """
    out: dict[RawKey, list[tuple]] = defaultdict(list)
    occ = [[(lexicon.fl(x), x) for x in sorted(lemmas)] for lemmas in tape]
    for p, lemmas in enumerate(occ):
        for _, x in lemmas:
            out[(Family.TRAD, x)].append((doc, p))
    if not cfg.proximity:
        return out

    md = cfg.max_distance
    nsw_lim, fst_lim, w_lim = cfg.nsw_limit, cfg.fst_limit, cfg.w_limit
    n = len(occ)
    for p in range(n):
        if not occ[p]:
            continue
        window = [(q, fy, y) for q in range(max(0, p - md), min(n, p + md + 1)) for fy, y in occ[q]]
        for fx, x in occ[p]:
            # a neighbour "follows" x when it sorts after x in key order, or is
            # another occurrence of x itself
            if fx >= nsw_lim:
                nsw = tuple(sorted((q - p, y) for q, fy, y in window if fy < nsw_lim))
                out[(Family.TRAD_NSW, x)].append((doc, p, nsw))
            if nsw_lim <= fx < w_lim:
                for q, fy, y in window:
                    if (fy, y) > (fx, x) or (y == x and q != p):
                        out[(Family.WV, x, y)].append((doc, p, q - p))
            if fx < fst_lim:
                nb = [(q, fy, y) for q, fy, y in window
                      if fy < fst_lim and ((fy, y) > (fx, x) or (y == x and q != p))]
                for q, fy, y in nb:
                    out[(Family.FST, x, y)].append((doc, p, q - p))
                for q1, fs, s in nb:
                    for q2, ft, t in nb:
                        if (fs, s) < (ft, t) or (s == t and q1 < q2):
                            out[(Family.FST, x, s, t)].append((doc, p, q1 - p, q2 - p))
    return out


def _scan(item: tuple[int, str], lexicon: Lexicon, cfg: SchemaConfig) -> dict[RawKey, list[tuple]]:
    ordinal, text = item
    return dict(index_document(ordinal, lexicon.tape(text), lexicon, cfg))


def _scan_all(items: list[tuple[int, str]], lexicon: Lexicon, cfg: SchemaConfig,
              jobs: int) -> Iterator[dict[RawKey, list[tuple]]]:
    fn = partial(_scan, lexicon=lexicon, cfg=cfg)
    if jobs <= 1 or len(items) < 2:
        yield from map(fn, items)
        return
    with ProcessPoolExecutor(jobs) as pool:
        # map() preserves input order, so output does not depend on jobs
        yield from pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs)))


def _raw_to_key(raw: RawKey) -> IndexKey:
    return IndexKey(raw[0], raw[1:])


def build_all(docs: Sequence[Document], store: IndexStore, *, jobs: int = 1) -> dict:
    """Index ``docs`` into an open writable store and commit.

    Works for a fresh store and for appending documents to a committed one;
    lists of keys that already exist are merged by concatenation, since new
    documents always get higher ordinals.  Nothing is committed on error.
    """
    lexicon, cfg = store.lexicon, store.cfg
    try:
        ordinals = store.add_documents([d.id for d in docs])
        lists: dict[RawKey, list[tuple]] = defaultdict(list)
        for contrib in _scan_all(list(zip(ordinals, (d.text for d in docs))), lexicon, cfg, jobs):
            for raw, postings in contrib.items():
                lists[raw].extend(postings)
        written = 0
        for key in sorted(map(_raw_to_key, lists), key=IndexKey.sort_key):
            postings = lists[(key.family, *key.lemmas)]
            replace = key in store
            if replace:
                old = store.get_streams(key)
                postings = decode_posting_list(old.streams, key.family, old.entry.layout,
                                               arity=key.arity) + postings
            layout = select_stream_layout(key.family, len(postings), store.threshold)
            streams = encode_posting_list(postings, key.family, layout, arity=key.arity,
                                          max_distance=cfg.max_distance)
            store.put_posting_list(key, streams, layout, len(postings), replace=replace)
            written += 1
        gen = store.commit()
    except BaseException:
        store.rollback()
        raise
    log.info("committed generation %d: %d documents, %d lists", gen, len(docs), written)
    return {"generation": gen, "documents": len(docs), "lists_written": written}


def build_index(docs: Sequence[Document], path: str | Path, cfg: SchemaConfig,
                dictionary: Dictionary, *, threshold: int = 1024, jobs: int = 1,
                lexicon: Lexicon | None = None) -> IndexStore:
    """Build a fresh index directory; returns it opened read-only."""
    if lexicon is None:
        lexicon = build_lexicon((d.text for d in docs), dictionary)
    store = IndexStore.create(path, cfg, lexicon, threshold)
    try:
        build_all(docs, store, jobs=jobs)
    finally:
        store.close()
    return IndexStore.open(path)


def update_index(path: str | Path, docs: Sequence[Document], *, jobs: int = 1) -> dict:
    """Append documents to an existing index.

    FL-numbers stay frozen; lemmas first seen here are appended to the end of
    the FL-list.
    """
    with IndexStore.open(path, writable=True) as store:
        store.set_lexicon(store.lexicon.extended_with(d.text for d in docs))
        return build_all(docs, store, jobs=jobs)
