"""On-disk index directory.

Layout of an index directory::

    manifest              JSON; the only file rewritten in place (atomic rename)
    lexicon.g<N>.json     dictionary + FL-list of generation N
    keys.<family>.g<N>    JSON key directory of one family at generation N
    streams.<i>           append-only payload; stream i of every list lives here
    write.lock            held by the single writer

A commit appends payload, writes fresh generation files and then swaps the
manifest.  The manifest records committed stream lengths; bytes past them
are garbage from an interrupted transaction and are truncated by the next
writer.
"""

from __future__ import annotations

import json
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

from filelock import FileLock, Timeout

from .codec import Family, StreamLayout, nsw_stream_index, stream_count
from .lexicon import Lexicon, SchemaConfig

FORMAT_VERSION = 1
FAMILY_ORDER = (Family.TRAD, Family.TRAD_NSW, Family.WV, Family.FST)
N_STREAM_FILES = 3


class StoreError(Exception):
    pass


class CorruptIndexError(StoreError):
    pass


class AdmissionError(StoreError, ValueError):
    """A key the configured schema does not allow."""


@dataclass(frozen=True)
class IndexKey:
    family: Family
    lemmas: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "lemmas", tuple(self.lemmas))

    @property
    def arity(self) -> int:
        return len(self.lemmas)

    def sort_key(self) -> tuple:
        return (FAMILY_ORDER.index(self.family), self.lemmas)

    def __str__(self) -> str:
        return f"{self.family.value}({','.join(map(str, self.lemmas))})"


def canonical_key(family: Family, lemmas: Sequence[int], lexicon: Lexicon) -> IndexKey:
    """Order lemmas by ascending FL-number (ties by LemmaId)."""
    return IndexKey(family, tuple(sorted(lemmas, key=lambda i: (lexicon.fl(i), i))))


def key_admissible(key: IndexKey, lexicon: Lexicon, cfg: SchemaConfig) -> bool:
    """Whether ``key`` may exist in an index built under ``cfg``."""
    if any(not 0 <= i < len(lexicon) for i in key.lemmas):
        return False
    fls = [lexicon.fl(i) for i in key.lemmas]
    if [(f, i) for f, i in zip(fls, key.lemmas)] != sorted(zip(fls, key.lemmas)):
        return False
    fam = key.family
    if fam is Family.TRAD:
        return key.arity == 1
    if not cfg.proximity:
        return False
    if fam is Family.TRAD_NSW:
        return key.arity == 1 and fls[0] >= cfg.nsw_limit
    if fam is Family.WV:
        return key.arity == 2 and cfg.nsw_limit <= fls[0] < cfg.w_limit
    if fam is Family.FST:
        return key.arity in (2, 3) and all(f < cfg.fst_limit for f in fls)
    return False


class Extent(NamedTuple):
    file: int
    offset: int
    length: int


@dataclass(frozen=True)
class KeyDirectoryEntry:
    key: IndexKey
    layout: StreamLayout
    extents: tuple[Extent, ...]
    posting_count: int

    @property
    def size(self) -> int:
        return sum(e.length for e in self.extents)

    def to_json(self) -> list:
        return [list(self.key.lemmas), int(self.layout), [list(e) for e in self.extents],
                self.posting_count]

    @classmethod
    def from_json(cls, family: Family, obj: list) -> KeyDirectoryEntry:
        lemmas, layout, extents, count = obj
        return cls(IndexKey(family, tuple(lemmas)), StreamLayout(layout),
                   tuple(Extent(*e) for e in extents), count)


@dataclass
class ReadStats:
    """Per-query read accounting."""

    bytes_read: dict[Family, int] = field(default_factory=lambda: defaultdict(int))
    postings_decoded: dict[Family, int] = field(default_factory=lambda: defaultdict(int))
    lists_read: dict[Family, int] = field(default_factory=lambda: defaultdict(int))
    nsw_bytes: int = 0

    @property
    def total_bytes(self) -> int:
        return sum(self.bytes_read.values())

    @property
    def total_postings(self) -> int:
        return sum(self.postings_decoded.values())

    def merge(self, other: ReadStats) -> None:
        for fam, n in other.bytes_read.items():
            self.bytes_read[fam] += n
        for fam, n in other.postings_decoded.items():
            self.postings_decoded[fam] += n
        for fam, n in other.lists_read.items():
            self.lists_read[fam] += n
        self.nsw_bytes += other.nsw_bytes

    def to_json(self) -> dict:
        fams = sorted(set(self.bytes_read) | set(self.postings_decoded), key=FAMILY_ORDER.index)
        return {
            "bytes_read": self.total_bytes,
            "postings_decoded": self.total_postings,
            "nsw_bytes": self.nsw_bytes,
            "families": {
                f.value: {"bytes": self.bytes_read.get(f, 0),
                          "postings": self.postings_decoded.get(f, 0),
                          "lists": self.lists_read.get(f, 0)}
                for f in fams
            },
        }


class Fetched(NamedTuple):
    entry: KeyDirectoryEntry
    streams: tuple[bytes | None, ...]


def _fsync_write(path: Path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())


class IndexStore:
    """Reader or single writer over an index directory.

    Readers see the manifest that was current when they opened.
    """

    def __init__(self, path: str | Path, *, writable: bool = False, _manifest: dict | None = None):
        self.path = Path(path)
        self.writable = writable
        self._lock: FileLock | None = None
        if writable:
            self._lock = FileLock(str(self.path / "write.lock"))
            try:
                self._lock.acquire(timeout=0)
            except Timeout:
                raise StoreError(f"{self.path} is locked by another writer") from None
        try:
            manifest = _manifest if _manifest is not None else self._read_manifest()
            self._load(manifest)
        except Exception:
            self._release()
            raise
        self._readers: dict[int, object] = {}
        self._writers: dict[int, object] = {}
        self._staged: dict[IndexKey, KeyDirectoryEntry] = {}
        self._pending_docs: list[str] = []
        self._pending_lexicon: Lexicon | None = None
        if writable:
            self._truncate_uncommitted()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def create(cls, path: str | Path, cfg: SchemaConfig, lexicon: Lexicon,
               threshold: int = 1024) -> IndexStore:
        """Create an empty index directory (generation 0) and open it for writing."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        if (path / "manifest").exists():
            raise StoreError(f"{path} already holds an index")
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        manifest = {
            "format": FORMAT_VERSION,
            "generation": 0,
            "schema": cfg.to_json(),
            "threshold": threshold,
            "lexicon": None,
            "keys": {},
            "stream_lengths": [0] * N_STREAM_FILES,
            "doc_ids": [],
            "segments": [],
        }
        store = cls(path, writable=True, _manifest=manifest)
        store._pending_lexicon = lexicon
        store.lexicon = lexicon
        return store

    @classmethod
    def open(cls, path: str | Path, writable: bool = False) -> IndexStore:
        path = Path(path)
        if not (path / "manifest").is_file():
            raise StoreError(f"no index at {path}")
        return cls(path, writable=writable)

    def close(self) -> None:
        for fh in (*self._readers.values(), *self._writers.values()):
            fh.close()
        self._readers.clear()
        self._writers.clear()
        self._release()

    def _release(self) -> None:
        if self._lock is not None and self._lock.is_locked:
            self._lock.release()

    def __enter__(self) -> IndexStore:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _read_manifest(self) -> dict:
        try:
            manifest = json.loads((self.path / "manifest").read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise CorruptIndexError(f"unreadable manifest in {self.path}: {e}") from e
        if manifest.get("format") != FORMAT_VERSION:
            raise CorruptIndexError(f"unsupported index format {manifest.get('format')!r}")
        return manifest

    def _load(self, manifest: dict) -> None:
        self.manifest = manifest
        self.generation: int = manifest["generation"]
        self.cfg = SchemaConfig.from_json(manifest["schema"])
        self.threshold: int = manifest["threshold"]
        self.doc_ids: list[str] = list(manifest["doc_ids"])
        self._lengths = list(manifest["stream_lengths"])
        self.lexicon: Lexicon | None = None
        self._dir: dict[IndexKey, KeyDirectoryEntry] = {}
        try:
            if manifest["lexicon"]:
                obj = json.loads((self.path / manifest["lexicon"]).read_text("utf-8"))
                self.lexicon = Lexicon.from_json(obj)
            for fam_name, fname in manifest["keys"].items():
                fam = Family(fam_name)
                for row in json.loads((self.path / fname).read_text("utf-8")):
                    entry = KeyDirectoryEntry.from_json(fam, row)
                    self._dir[entry.key] = entry
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise CorruptIndexError(f"damaged index files in {self.path}: {e}") from e
        for entry in self._dir.values():
            for ext in entry.extents:
                if ext.offset + ext.length > self._lengths[ext.file]:
                    raise CorruptIndexError(f"{entry.key} points past committed stream data")

    def _truncate_uncommitted(self) -> None:
        for i, committed in enumerate(self._lengths):
            p = self.path / f"streams.{i}"
            if p.exists() and p.stat().st_size > committed:
                with open(p, "r+b") as fh:
                    fh.truncate(committed)

    # -- directory ----------------------------------------------------------

    def __contains__(self, key: IndexKey) -> bool:
        return key in self._dir or key in self._staged

    def entry(self, key: IndexKey) -> KeyDirectoryEntry | None:
        return self._staged.get(key) or self._dir.get(key)

    def keys(self, family: Family | None = None) -> Iterator[IndexKey]:
        """Committed keys in canonical order (family, then LemmaIds)."""
        keys = self._dir if family is None else [k for k in self._dir if k.family is Family(family)]
        return iter(sorted(keys, key=IndexKey.sort_key))

    def entries(self, family: Family | None = None) -> Iterator[KeyDirectoryEntry]:
        return (self._dir[k] for k in self.keys(family))

    def stats(self) -> dict[Family, dict[str, int]]:
        out = {f: {"keys": 0, "postings": 0, "bytes": 0} for f in FAMILY_ORDER}
        for e in self._dir.values():
            s = out[e.key.family]
            s["keys"] += 1
            s["postings"] += e.posting_count
            s["bytes"] += e.size
        return out

    # -- writing ------------------------------------------------------------

    def _require_writer(self) -> None:
        if not self.writable:
            raise StoreError("store opened read-only")

    def _append(self, file_no: int, data: bytes) -> Extent:
        fh = self._writers.get(file_no)
        if fh is None:
            fh = self._writers[file_no] = open(self.path / f"streams.{file_no}", "ab")
        offset = fh.tell()
        fh.write(data)
        return Extent(file_no, offset, len(data))

    def put_posting_list(self, key: IndexKey, streams: Sequence[bytes], layout: StreamLayout,
                         posting_count: int | None = None, *, replace: bool = False) -> KeyDirectoryEntry:
        """Append a list's streams and stage its directory entry until :meth:`commit`.

        ``replace=True`` supersedes an existing committed entry (used by
        incremental merges); otherwise a duplicate key is rejected.
        """
        self._require_writer()
        layout = StreamLayout(layout)
        if self.lexicon is None or not key_admissible(key, self.lexicon, self.cfg):
            raise AdmissionError(f"{key} is not admissible under the {self.cfg.kind.value} schema")
        if key in self._staged or (key in self._dir and not replace):
            raise StoreError(f"duplicate key {key}")
        if len(streams) != layout.arity:
            raise StoreError(f"{layout.name} layout needs {layout.arity} streams")
        counts = {stream_count(s) for s in streams}
        if len(counts) != 1 or (posting_count is not None and counts != {posting_count}):
            raise StoreError(f"stream headers disagree on posting count for {key}")
        extents = tuple(self._append(i, bytes(s)) for i, s in enumerate(streams))
        entry = KeyDirectoryEntry(key, layout, extents, counts.pop())
        self._staged[key] = entry
        return entry

    def add_documents(self, doc_ids: Sequence[str]) -> range:
        """Register user ids for new documents; returns their ordinals."""
        self._require_writer()
        seen = set(self.doc_ids).union(self._pending_docs)
        for d in doc_ids:
            if d in seen:
                raise StoreError(f"duplicate document id {d!r}")
            seen.add(d)
        start = len(self.doc_ids) + len(self._pending_docs)
        self._pending_docs.extend(doc_ids)
        return range(start, start + len(doc_ids))

    def set_lexicon(self, lexicon: Lexicon) -> None:
        self._require_writer()
        self._pending_lexicon = lexicon
        self.lexicon = lexicon

    def commit(self) -> int:
        """Make staged lists durable; returns the new generation."""
        self._require_writer()
        lengths = list(self._lengths)
        for i, fh in self._writers.items():
            fh.flush()
            os.fsync(fh.fileno())
            lengths[i] = fh.tell()
        gen = self.generation + 1
        directory = dict(self._dir)
        directory.update(self._staged)
        manifest = dict(self.manifest)
        manifest["generation"] = gen
        manifest["stream_lengths"] = lengths
        if self._pending_lexicon is not None:
            name = f"lexicon.g{gen}.json"
            _fsync_write(self.path / name, json.dumps(self._pending_lexicon.to_json()).encode())
            manifest["lexicon"] = name
        by_family: dict[Family, list] = defaultdict(list)
        for k in sorted(directory, key=IndexKey.sort_key):
            by_family[k.family].append(directory[k].to_json())
        keys = {}
        for fam in FAMILY_ORDER:
            if fam in by_family:
                name = f"keys.{fam.value}.g{gen}"
                _fsync_write(self.path / name, json.dumps(by_family[fam], separators=(",", ":")).encode())
                keys[fam.value] = name
        manifest["keys"] = keys
        if self._pending_docs:
            first = len(self.doc_ids)
            manifest["doc_ids"] = self.doc_ids + self._pending_docs
            manifest["segments"] = manifest["segments"] + [
                {"generation": gen, "docs": [first, first + len(self._pending_docs)]}]
        tmp = self.path / "manifest.tmp"
        _fsync_write(tmp, json.dumps(manifest, indent=1).encode())
        os.replace(tmp, self.path / "manifest")
        self._load(manifest)
        self._staged.clear()
        self._pending_docs.clear()
        self._pending_lexicon = None
        self._drop_old_generations(keep=gen - 1)
        return gen

    def rollback(self) -> None:
        """Discard everything staged since the last commit."""
        self._require_writer()
        for fh in self._writers.values():
            fh.close()
        self._writers.clear()
        self._truncate_uncommitted()
        self._staged.clear()
        self._pending_docs.clear()
        # a never-committed store keeps the lexicon it was created with
        if self._pending_lexicon is not None and self.manifest["lexicon"]:
            self._load(self.manifest)
            self._pending_lexicon = None

    def _drop_old_generations(self, keep: int) -> None:
        # Readers that opened the previous manifest may still load its files.
        for p in self.path.iterdir():
            parts = p.name.split(".")
            if p.name.startswith(("keys.", "lexicon.")):
                tag = next((s for s in parts if s.startswith("g") and s[1:].isdigit()), None)
                if tag is not None and int(tag[1:]) < keep:
                    p.unlink(missing_ok=True)

    # -- reading ------------------------------------------------------------

    def _read(self, ext: Extent) -> bytes:
        if ext.length == 0:
            return b""
        if self.writable and ext.file in self._writers:
            self._writers[ext.file].flush()
        fh = self._readers.get(ext.file)
        if fh is None:
            fh = self._readers[ext.file] = open(self.path / f"streams.{ext.file}", "rb")
        fh.seek(ext.offset)
        data = fh.read(ext.length)
        if len(data) != ext.length:
            raise CorruptIndexError(f"short read in streams.{ext.file}")
        return data

    def get_streams(self, key: IndexKey, want_nsw: bool = True,
                    stats: ReadStats | None = None) -> Fetched | None:
        """Fetch a list's streams, or None for an absent key.

        With ``want_nsw=False`` the NSW stream of a TRAD_NSW list is neither
        read nor counted and comes back as ``None``.
        """
        entry = self._dir.get(key)
        if entry is None:
            return None
        skip = None if want_nsw else nsw_stream_index(key.family, entry.layout)
        streams = []
        for i, ext in enumerate(entry.extents):
            if i == skip:
                streams.append(None)
                continue
            data = self._read(ext)
            streams.append(data)
            if stats is not None:
                stats.bytes_read[key.family] += len(data)
                if i == nsw_stream_index(key.family, entry.layout):
                    stats.nsw_bytes += len(data)
        if stats is not None:
            stats.lists_read[key.family] += 1
        return Fetched(entry, tuple(streams))
