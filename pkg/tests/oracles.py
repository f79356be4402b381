"""Brute-force index contents, enumerated straight from the schema rules.

Deliberately naive: every occurrence pair/triple in a document is tried,
with no windowing.  Keep documents short.
"""

from itertools import product

from proxindex.codec import Family


def occurrences(tape):
    return [(p, x) for p, ids in enumerate(tape) for x in ids]


def expected_postings(docs_tapes, lexicon, cfg):
    """{(family, *lemmas): sorted postings} for TRAD_NSW, WV and FST."""
    fl = lexicon.fl
    md = cfg.max_distance
    out = {}

    def add(key, posting):
        out.setdefault(key, set()).add(posting)

    def ordered(*lemmas):
        return [(fl(x), x) for x in lemmas] == sorted((fl(x), x) for x in lemmas)

    for doc, tape in enumerate(docs_tapes):
        occ = occurrences(tape)
        for (p, x) in occ:
            if fl(x) >= cfg.nsw_limit:
                rec = tuple(sorted((q - p, y) for q, y in occ if fl(y) < cfg.nsw_limit and abs(q - p) <= md))
                add((Family.TRAD_NSW, x), (doc, p, rec))
        for (p, w), (q, v) in product(occ, occ):
            if (p, w) == (q, v) or abs(q - p) > md or not ordered(w, v):
                continue
            if cfg.nsw_limit <= fl(w) < cfg.w_limit:
                add((Family.WV, w, v), (doc, p, q - p))
        for (p, f), (q, s) in product(occ, occ):
            if (p, f) == (q, s) or abs(q - p) > md or not ordered(f, s):
                continue
            if fl(f) < cfg.fst_limit and fl(s) < cfg.fst_limit:
                add((Family.FST, f, s), (doc, p, q - p))
        for (p, f), (q1, s), (q2, t) in product(occ, occ, occ):
            if len({(p, f), (q1, s), (q2, t)}) < 3:
                continue
            if abs(q1 - p) > md or abs(q2 - p) > md or not ordered(f, s, t):
                continue
            if s == t and q1 > q2:
                continue
            if max(fl(f), fl(s), fl(t)) < cfg.fst_limit:
                add((Family.FST, f, s, t), (doc, p, q1 - p, q2 - p))
    return {k: sorted(v) for k, v in out.items()}
