import pytest
from hypothesis import assume, given, settings, strategies as st

from proxindex.codec import (CodecError, Family, StreamLayout, decode_doc_pos, decode_nsw_record,
                             decode_posting_list, decode_varints, delta_groups, encode_nsw_record,
                             encode_posting_list, encode_varints, group_and_delta, group_by_doc,
                             select_stream_layout, undelta, unzigzag, zigzag)

WORKED = [(0, 1), (0, 5), (0, 7), (1, 2), (1, 5)]


def test_worked_example_grouping_and_delta():
    assert group_by_doc(WORKED) == [(0, [1, 5, 7]), (1, [2, 5])]
    assert group_and_delta(WORKED) == [(0, (1, 4, 2)), (1, (2, 3))]
    assert undelta(group_and_delta(WORKED)) == WORKED


def test_singleton_passes_through():
    assert group_and_delta([(3, 9)]) == [(3, (9,))]


def test_unsorted_rejected():
    with pytest.raises(CodecError):
        group_and_delta([(0, 5), (0, 1)])
    with pytest.raises(CodecError):
        group_and_delta([(0, 1), (0, 1)])


def test_trad_stream_bytes():
    # count 5; doc 0, 3 positions 1,4,2; doc delta 1, 2 positions 2,3
    assert encode_posting_list(WORKED, Family.TRAD, StreamLayout.ONE) == [bytes([5, 0, 3, 1, 4, 2, 1, 2, 2, 3])]


def test_varint_and_zigzag():
    values = [0, 1, 127, 128, 300, 2 ** 35]
    assert decode_varints(encode_varints(values)) == values
    assert encode_varints([300]) == b"\xac\x02"
    assert [zigzag(v) for v in (0, -1, 1, -2, 2)] == [0, 1, 2, 3, 4]
    with pytest.raises(CodecError):
        decode_varints(b"\x80")


@given(st.integers(-(2 ** 40), 2 ** 40))
def test_zigzag_round_trip(n):
    assert unzigzag(zigzag(n)) == n and zigzag(n) >= 0


@pytest.mark.parametrize("family, length, threshold, layout", [
    (Family.TRAD_NSW, 10, 1000, StreamLayout.TWO),
    (Family.TRAD_NSW, 1000, 1000, StreamLayout.THREE),
    (Family.WV, 5, 1000, StreamLayout.ONE),
    (Family.FST, 1000, 1000, StreamLayout.TWO),
    (Family.TRAD, 10 ** 6, 1000, StreamLayout.ONE),
])
def test_select_stream_layout(family, length, threshold, layout):
    assert select_stream_layout(family, length, threshold) is layout


def test_select_stream_layout_needs_positive_threshold():
    with pytest.raises(ValueError):
        select_stream_layout(Family.WV, 1, 0)


# -- strategies -----------------------------------------------------------------

MD = 9


@st.composite
def trad_lists(draw, min_size=0):
    pairs = draw(st.sets(st.tuples(st.integers(0, 40), st.integers(0, 300)), min_size=min_size, max_size=60))
    return sorted(pairs)


nsw_records = st.lists(
    st.tuples(st.integers(-MD, MD), st.integers(0, 2000)), max_size=6, unique=True
).map(lambda rec: tuple(sorted(rec)))


@st.composite
def nsw_lists(draw):
    return [(d, p, draw(nsw_records)) for d, p in draw(trad_lists())]


@st.composite
def offset_lists(draw, width):
    offs = st.tuples(*[st.integers(-MD, MD)] * width)
    items = draw(st.sets(st.tuples(st.integers(0, 30), st.integers(0, 200), offs), max_size=60))
    return sorted((d, p, *o) for d, p, o in items)


@settings(max_examples=60)
@given(trad_lists())
def test_trad_round_trip(postings):
    streams = encode_posting_list(postings, Family.TRAD, StreamLayout.ONE)
    assert decode_posting_list(streams, Family.TRAD, StreamLayout.ONE) == postings


@settings(max_examples=60)
@given(nsw_lists(), st.sampled_from([StreamLayout.TWO, StreamLayout.THREE]))
def test_trad_nsw_round_trip_and_skip(postings, layout):
    streams = encode_posting_list(postings, Family.TRAD_NSW, layout, max_distance=MD)
    assert len(streams) == layout.arity
    assert decode_posting_list(streams, Family.TRAD_NSW, layout) == postings
    # NSW stream never touched: same (doc, pos) as the full decode
    partial = list(streams[:-1]) + [None]
    assert decode_posting_list(partial, Family.TRAD_NSW, layout) == [p[:2] for p in postings]
    assert decode_doc_pos(partial, Family.TRAD_NSW, layout) == [p[:2] for p in postings]


@settings(max_examples=60)
@given(st.sampled_from([(Family.WV, 2), (Family.FST, 2), (Family.FST, 3)]),
       st.sampled_from([StreamLayout.ONE, StreamLayout.TWO]), st.data())
def test_pair_and_triple_round_trip(fam_arity, layout, data):
    family, arity = fam_arity
    postings = data.draw(offset_lists(arity - 1))
    streams = encode_posting_list(postings, family, layout, arity=arity, max_distance=MD)
    assert decode_posting_list(streams, family, layout, arity=arity) == postings


def test_fst_same_position_order_preserved():
    postings = [(0, 4, -2, 1), (0, 4, -1, 3), (0, 4, 2, 2), (2, 0, 1, 1)]
    for layout in (StreamLayout.ONE, StreamLayout.TWO):
        streams = encode_posting_list(postings, Family.FST, layout)
        assert decode_posting_list(streams, Family.FST, layout) == postings


def test_trad_nsw_two_streams_structure():
    postings = [(0, 1, ((-1, 7),)), (0, 3, ()), (2, 0, ((0, 3), (1, 9)))]
    a, b = encode_posting_list(postings, Family.TRAD_NSW, StreamLayout.TWO)
    assert decode_posting_list([a], Family.TRAD, StreamLayout.ONE) == [(0, 1), (0, 3), (2, 0)]
    assert b[0] == 3  # three length-prefixed records
    assert decode_posting_list([a, b], Family.TRAD_NSW, StreamLayout.TWO) == postings


def test_nsw_record_round_trip():
    rec = ((-3, 40), (-3, 2), (0, 5), (4, 1))
    rec = tuple(sorted(rec))
    assert decode_nsw_record(encode_nsw_record(rec)) == rec


def test_empty_list():
    for family, layout in [(Family.TRAD, StreamLayout.ONE), (Family.TRAD_NSW, StreamLayout.TWO),
                           (Family.TRAD_NSW, StreamLayout.THREE), (Family.WV, StreamLayout.TWO)]:
        streams = encode_posting_list([], family, layout)
        assert streams == [b"\x00"] * layout.arity
        assert decode_posting_list(streams, family, layout) == []


def test_distance_bound_rejected():
    with pytest.raises(CodecError):
        encode_posting_list([(0, 1, 6)], Family.WV, StreamLayout.ONE, max_distance=5)
    with pytest.raises(CodecError):
        encode_posting_list([(0, 1, ((6, 2),))], Family.TRAD_NSW, StreamLayout.TWO, max_distance=5)


def test_bad_layout_and_shapes_rejected():
    with pytest.raises(CodecError):
        encode_posting_list(WORKED, Family.TRAD, StreamLayout.TWO)
    with pytest.raises(CodecError):
        encode_posting_list([(0, 1, 2)], Family.FST, StreamLayout.ONE, arity=3)
    with pytest.raises(CodecError):
        encode_posting_list([(0, 1, ((2, 1), (1, 1)))], Family.TRAD_NSW, StreamLayout.TWO)
    with pytest.raises(CodecError):
        decode_posting_list([b"\x05\x00"], Family.TRAD, StreamLayout.ONE)


def test_trailing_bytes_detected():
    stream = encode_posting_list(WORKED, Family.TRAD, StreamLayout.ONE)[0]
    with pytest.raises(CodecError):
        decode_posting_list([stream + b"\x00"], Family.TRAD, StreamLayout.ONE)


def _flat_size(postings):
    # (doc, pos) pairs, both delta-coded against the previous pair, no grouping
    out, prev = [], (0, 0)
    for d, p in postings:
        out += [d - prev[0], p if d != prev[0] else p - prev[1]]
        prev = (d, p)
    return len(encode_varints(out))


@st.composite
def dense_lists(draw):
    # some single-posting documents, but at least two postings per document on average
    docs = draw(st.dictionaries(st.integers(0, 200), st.sets(st.integers(0, 500), min_size=1, max_size=12),
                                min_size=1, max_size=15))
    postings = sorted((d, p) for d, ps in docs.items() for p in ps)
    assume(len(postings) >= 2 * len(docs))
    return postings


@settings(max_examples=60)
@given(dense_lists())
def test_grouping_not_larger_than_flat_pairs(postings):
    grouped = encode_posting_list(postings, Family.TRAD, StreamLayout.ONE)[0]
    header = len(encode_varints([len(postings)]))
    assert len(grouped) - header <= _flat_size(postings)


def test_grouping_on_generated_corpus():
    from proxindex.analyzer import gen_corpus
    from proxindex.lexicon import build_lexicon

    docs = gen_corpus(2, 300, 30, (150, 300))
    lex = build_lexicon([d.text for d in docs], {})
    by_lemma = {}
    for n, d in enumerate(docs):
        for p, ids in enumerate(lex.tape(d.text)):
            for i in ids:
                by_lemma.setdefault(i, []).append((n, p))
    grouped = flat = 0
    for postings in by_lemma.values():
        if len(postings) >= 2 * len({d for d, _ in postings}):
            grouped += len(delta_groups_bytes(postings))
            flat += _flat_size(postings)
    assert 0 < grouped <= flat


def delta_groups_bytes(postings):
    vals = []
    for doc_delta, deltas in delta_groups(group_by_doc(postings)):
        vals += [doc_delta, len(deltas), *deltas]
    return encode_varints(vals)
