"""Posting-list wire format.

Integers are unsigned LEB128 varints; signed values are zigzag-mapped first.
Every stream starts with ``varint(posting_count)``.  Lists are grouped by
document and delta-encoded: the first document of a list and the first
position of each document group are stored as-is, every later value as the
difference from its predecessor.

Stream bodies after the count header::

    docpos   per group: doc_delta, n, then n position deltas; WV/FST lists in
             ONE-stream layout follow each position with its zigzag offsets
    docs     per group: doc_delta, n                  (THREE-stream TRAD_NSW)
    pos      position deltas, grouped as in ``docs``   (THREE-stream TRAD_NSW)
    dist     zigzag offsets per posting                (TWO-stream WV/FST)
    nsw      per posting: byte_len, m, then m pairs of
             (zigzag lemma delta, zigzag offset), sorted by (offset, lemma)

Posting tuples: TRAD ``(doc, pos)``; TRAD_NSW ``(doc, pos, nsw)`` with
``nsw`` a tuple of ``(offset, lemma)`` pairs; WV ``(doc, pos, d1)``; FST
``(doc, pos, d1)`` or ``(doc, pos, d1, d2)`` for 2- and 3-lemma keys.
"""

from __future__ import annotations

import enum
from typing import Iterator, Sequence


class CodecError(ValueError):
    pass


class Family(str, enum.Enum):
    TRAD = "trad"
    TRAD_NSW = "trad_nsw"
    WV = "wv"
    FST = "fst"


class StreamLayout(enum.IntEnum):
    ONE = 1
    TWO = 2
    THREE = 3

    @property
    def arity(self) -> int:
        return int(self)


DEFAULT_THRESHOLD = 1024


def select_stream_layout(family: Family, length: int, threshold: int = DEFAULT_THRESHOLD) -> StreamLayout:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    family = Family(family)
    if family is Family.TRAD:
        return StreamLayout.ONE
    long = length >= threshold
    if family is Family.TRAD_NSW:
        return StreamLayout.THREE if long else StreamLayout.TWO
    return StreamLayout.TWO if long else StreamLayout.ONE


def nsw_stream_index(family: Family, layout: StreamLayout) -> int | None:
    """Index of the NSW stream in a layout, or None if the list has none."""
    if Family(family) is Family.TRAD_NSW:
        return layout.arity - 1
    return None


# -- varints ------------------------------------------------------------------


def zigzag(n: int) -> int:
    return n << 1 if n >= 0 else ((-n) << 1) - 1


def unzigzag(z: int) -> int:
    return (z >> 1) if not z & 1 else -((z + 1) >> 1)


def put_varint(out: bytearray, n: int) -> None:
    if n < 0:
        raise CodecError(f"negative value {n} cannot be varint-encoded")
    while n >= 0x80:
        out.append((n & 0x7F) | 0x80)
        n >>= 7
    out.append(n)


def encode_varints(values: Sequence[int]) -> bytes:
    out = bytearray()
    for v in values:
        put_varint(out, v)
    return bytes(out)


def decode_varints(buf: bytes) -> list[int]:
    out = []
    n = shift = 0
    for b in buf:
        n |= (b & 0x7F) << shift
        if b & 0x80:
            shift += 7
        else:
            out.append(n)
            n = shift = 0
    if shift:
        raise CodecError("truncated varint")
    return out


class _Reader:
    __slots__ = ("buf", "i")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.i = 0

    def varint(self) -> int:
        buf, i = self.buf, self.i
        n = shift = 0
        try:
            while True:
                b = buf[i]
                i += 1
                n |= (b & 0x7F) << shift
                if b < 0x80:
                    break
                shift += 7
        except IndexError:
            raise CodecError("truncated stream") from None
        self.i = i
        return n

    def signed(self) -> int:
        return unzigzag(self.varint())

    def take(self, n: int) -> bytes:
        if self.i + n > len(self.buf):
            raise CodecError("truncated stream")
        chunk = self.buf[self.i:self.i + n]
        self.i += n
        return chunk

    def done(self) -> None:
        if self.i != len(self.buf):
            raise CodecError(f"{len(self.buf) - self.i} trailing bytes in stream")


# -- grouping + delta ---------------------------------------------------------


def group_by_doc(postings: Sequence[tuple]) -> list[tuple[int, list[int]]]:
    """``[(0,1),(0,5),(1,2)] -> [(0,[1,5]),(1,[2])]``; input must be sorted, no duplicates."""
    groups: list[tuple[int, list[int]]] = []
    prev = None
    for p in postings:
        if prev is not None and p <= prev:
            raise CodecError(f"postings not strictly ascending at {p!r}")
        prev = p
        doc, pos = p[0], p[1]
        if not groups or groups[-1][0] != doc:
            groups.append((doc, []))
        groups[-1][1].append(pos)
    return groups


def delta_groups(groups: Sequence[tuple[int, Sequence[int]]]) -> list[tuple[int, tuple[int, ...]]]:
    out = []
    prev_doc = 0
    for doc, positions in groups:
        deltas = [positions[0]] + [b - a for a, b in zip(positions, positions[1:])]
        out.append((doc - prev_doc, tuple(deltas)))
        prev_doc = doc
    return out


def group_and_delta(postings: Sequence[tuple[int, int]]) -> list[tuple[int, tuple[int, ...]]]:
    return delta_groups(group_by_doc(postings))


def undelta(form: Sequence[tuple[int, Sequence[int]]]) -> list[tuple[int, int]]:
    out = []
    doc = 0
    for doc_delta, deltas in form:
        doc += doc_delta
        pos = 0
        for i, d in enumerate(deltas):
            pos = d if i == 0 else pos + d
            out.append((doc, pos))
    return out


# -- encoding -----------------------------------------------------------------


def _offset_width(family: Family, arity: int | None) -> int:
    if family in (Family.TRAD, Family.TRAD_NSW):
        return 0
    if arity is None:
        arity = 2 if family is Family.WV else 3
    if family is Family.WV and arity != 2 or family is Family.FST and arity not in (2, 3):
        raise CodecError(f"bad key arity {arity} for {family.value}")
    return arity - 1


def _check(postings, family: Family, width: int, max_distance: int | None) -> None:
    prev = None
    for p in postings:
        if family is Family.TRAD_NSW:
            if len(p) != 3:
                raise CodecError(f"expected (doc, pos, nsw), got {p!r}")
            order_key = p[:2]
            offsets = [off for off, _ in p[2]]
            if list(p[2]) != sorted(p[2]):
                raise CodecError(f"NSW record not sorted by (offset, lemma): {p!r}")
        else:
            if len(p) != 2 + width:
                raise CodecError(f"expected {2 + width}-tuple postings, got {p!r}")
            order_key = p
            offsets = p[2:]
        if min(p[0], p[1]) < 0:
            raise CodecError(f"negative doc or position in {p!r}")
        if prev is not None and order_key <= prev:
            raise CodecError(f"postings not strictly ascending at {p!r}")
        prev = order_key
        if max_distance is not None and any(abs(d) > max_distance for d in offsets):
            raise CodecError(f"offset beyond max distance {max_distance} in {p!r}")


def _docpos_stream(postings, inline_width: int) -> bytes:
    out = bytearray()
    put_varint(out, len(postings))
    i, n = 0, len(postings)
    prev_doc = 0
    while i < n:
        doc = postings[i][0]
        j = i
        while j < n and postings[j][0] == doc:
            j += 1
        put_varint(out, doc - prev_doc)
        put_varint(out, j - i)
        prev_doc = doc
        prev_pos = 0
        for k in range(i, j):
            p = postings[k]
            put_varint(out, p[1] - prev_pos)
            prev_pos = p[1]
            for d in p[2:2 + inline_width]:
                put_varint(out, zigzag(d))
        i = j
    return bytes(out)


def _docs_and_pos_streams(postings) -> tuple[bytes, bytes]:
    docs, pos = bytearray(), bytearray()
    put_varint(docs, len(postings))
    put_varint(pos, len(postings))
    prev_doc = 0
    prev_pos = 0
    for k, p in enumerate(postings):
        if k == 0 or p[0] != postings[k - 1][0]:
            count = 1
            while k + count < len(postings) and postings[k + count][0] == p[0]:
                count += 1
            put_varint(docs, p[0] - prev_doc)
            put_varint(docs, count)
            prev_doc = p[0]
            prev_pos = 0
        put_varint(pos, p[1] - prev_pos)
        prev_pos = p[1]
    return bytes(docs), bytes(pos)


def encode_nsw_record(record: Sequence[tuple[int, int]]) -> bytes:
    body = bytearray()
    put_varint(body, len(record))
    prev_lemma = 0
    for offset, lemma in record:
        put_varint(body, zigzag(lemma - prev_lemma))
        put_varint(body, zigzag(offset))
        prev_lemma = lemma
    return bytes(body)


def _nsw_stream(postings) -> bytes:
    out = bytearray()
    put_varint(out, len(postings))
    for p in postings:
        body = encode_nsw_record(p[2])
        put_varint(out, len(body))
        out += body
    return bytes(out)


def _dist_stream(postings, width: int) -> bytes:
    out = bytearray()
    put_varint(out, len(postings))
    for p in postings:
        for d in p[2:2 + width]:
            put_varint(out, zigzag(d))
    return bytes(out)


def encode_posting_list(
    postings: Sequence[tuple],
    family: Family,
    layout: StreamLayout,
    *,
    arity: int | None = None,
    max_distance: int | None = None,
) -> list[bytes]:
    """Encode one key's postings into ``layout.arity`` byte streams.

    ``arity`` is the number of lemmas in the key (WV: 2, FST: 2 or 3) and
    fixes how many signed offsets each posting carries.
    """
    family = Family(family)
    layout = StreamLayout(layout)
    width = _offset_width(family, arity)
    _check(postings, family, width, max_distance)
    if family is Family.TRAD:
        if layout is not StreamLayout.ONE:
            raise CodecError("TRAD lists use a single stream")
        return [_docpos_stream(postings, 0)]
    if family is Family.TRAD_NSW:
        if layout is StreamLayout.TWO:
            return [_docpos_stream(postings, 0), _nsw_stream(postings)]
        if layout is StreamLayout.THREE:
            return [*_docs_and_pos_streams(postings), _nsw_stream(postings)]
        raise CodecError("TRAD_NSW lists use two or three streams")
    if layout is StreamLayout.ONE:
        return [_docpos_stream(postings, width)]
    if layout is StreamLayout.TWO:
        return [_docpos_stream(postings, 0), _dist_stream(postings, width)]
    raise CodecError(f"{family.value} lists use one or two streams")


# -- decoding -----------------------------------------------------------------


def _read_docpos(buf: bytes, inline_width: int) -> list[tuple]:
    r = _Reader(buf)
    n = r.varint()
    out: list[tuple] = []
    doc = 0
    while len(out) < n:
        doc += r.varint()
        k = r.varint()
        if k == 0:
            raise CodecError("empty document group")
        pos = 0
        for _ in range(k):
            pos += r.varint()
            if inline_width == 0:
                out.append((doc, pos))
            elif inline_width == 1:
                out.append((doc, pos, r.signed()))
            else:
                out.append((doc, pos) + tuple(r.signed() for _ in range(inline_width)))
    if len(out) != n:
        raise CodecError("posting count mismatch")
    r.done()
    return out


def _read_docs_pos(docs_buf: bytes, pos_buf: bytes) -> list[tuple[int, int]]:
    docs, pos = _Reader(docs_buf), _Reader(pos_buf)
    n = docs.varint()
    if pos.varint() != n:
        raise CodecError("doc and position streams disagree on posting count")
    out: list[tuple[int, int]] = []
    doc = 0
    while len(out) < n:
        doc += docs.varint()
        k = docs.varint()
        p = 0
        for _ in range(k):
            p += pos.varint()
            out.append((doc, p))
    docs.done()
    pos.done()
    if len(out) != n:
        raise CodecError("posting count mismatch")
    return out


def decode_nsw_record(body: bytes) -> tuple[tuple[int, int], ...]:
    r = _Reader(body)
    m = r.varint()
    rec = []
    lemma = 0
    for _ in range(m):
        lemma += r.signed()
        rec.append((r.signed(), lemma))
    r.done()
    return tuple(rec)


def iter_nsw_stream(buf: bytes) -> Iterator[tuple[tuple[int, int], ...]]:
    r = _Reader(buf)
    n = r.varint()
    for _ in range(n):
        yield decode_nsw_record(r.take(r.varint()))
    r.done()


def _read_dist(buf: bytes, width: int, n_expected: int) -> list[tuple[int, ...]]:
    vals = decode_varints(buf)
    if not vals or vals[0] != n_expected or len(vals) != 1 + n_expected * width:
        raise CodecError("distance stream does not match posting count")
    signed = [unzigzag(v) for v in vals[1:]]
    return [tuple(signed[i * width:(i + 1) * width]) for i in range(n_expected)]


def stream_count(buf: bytes) -> int:
    """Posting count from a stream header."""
    return _Reader(buf).varint()


def decode_doc_pos(streams: Sequence[bytes | None], family: Family, layout: StreamLayout) -> list[tuple[int, int]]:
    """(doc, pos) pairs of a list, touching only the streams that hold them.

    For TRAD_NSW the NSW stream may be passed as ``None``.
    """
    family, layout = Family(family), StreamLayout(layout)
    if family is Family.TRAD_NSW and layout is StreamLayout.THREE:
        return _read_docs_pos(streams[0], streams[1])
    if family in (Family.WV, Family.FST) and layout is StreamLayout.ONE:
        raise CodecError("one-stream WV/FST lists interleave offsets; decode the full list")
    return _read_docpos(streams[0], 0)


def decode_posting_list(
    streams: Sequence[bytes | None],
    family: Family,
    layout: StreamLayout,
    *,
    arity: int | None = None,
) -> list[tuple]:
    """Inverse of :func:`encode_posting_list`.

    A TRAD_NSW list whose NSW stream is ``None`` decodes to ``(doc, pos)`` pairs.
    """
    family, layout = Family(family), StreamLayout(layout)
    if len(streams) != layout.arity:
        raise CodecError(f"expected {layout.arity} streams, got {len(streams)}")
    width = _offset_width(family, arity)
    if family is Family.TRAD:
        return _read_docpos(streams[0], 0)
    if family is Family.TRAD_NSW:
        docpos = decode_doc_pos(streams, family, layout)
        if streams[-1] is None:
            return docpos
        records = list(iter_nsw_stream(streams[-1]))
        if len(records) != len(docpos):
            raise CodecError("NSW stream does not match posting count")
        return [(d, p, rec) for (d, p), rec in zip(docpos, records)]
    if layout is StreamLayout.ONE:
        return _read_docpos(streams[0], width)
    docpos = _read_docpos(streams[0], 0)
    dists = _read_dist(streams[1], width, len(docpos))
    return [dp + ds for dp, ds in zip(docpos, dists)]
