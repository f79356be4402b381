"""APPG for several stop-lemma counts, and a Min-FL bin report of postings read.

Queries are sampled uniformly from document windows, so the class mix follows
the corpus rather than being balanced.

    python scripts/appg_report.py --swcounts 20,50,100
"""

import argparse
import json
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from proxindex import (SchemaConfig, appg_table, bin_by_min_fl, build_index, execute, gen_corpus, plan_query,
                       query_fls, tokenize)


@dataclass(frozen=True)
class ReportConfig:
    seed: int = 5
    vocab: int = 2000
    docs: int = 300
    min_len: int = 200
    max_len: int = 400
    swcount: int = 50
    fucount: int = 105
    swcounts: str = "20,50,100"
    queries: int = 300
    step: int = 20
    bins: int = 21


def sample_queries(docs, n, seed, max_len=5):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        words = tokenize(docs[int(rng.integers(len(docs)))].text)
        i = int(rng.integers(len(words)))
        out.append(" ".join(words[i:i + int(rng.integers(2, max_len + 1))]))
    return out


def run(cfg: ReportConfig, workdir: Path) -> dict:
    docs = gen_corpus(cfg.seed, cfg.vocab, cfg.docs, (cfg.min_len, cfg.max_len))
    schema = SchemaConfig.original(5, swcount=cfg.swcount, fucount=cfg.fucount)
    queries = sample_queries(docs, cfg.queries, cfg.seed)
    with build_index(docs, workdir / "ix", schema, {}) as store:
        lex = store.lexicon
        fls = [query_fls(q, lex) for q in queries]
        table = appg_table(fls, schema, [int(s) for s in cfg.swcounts.split(",")])
        prox, trad = [], []
        for q in queries:
            prox.append(execute(plan_query(q, lex, schema), store).stats.total_postings)
            trad.append(execute(plan_query(q, lex, schema, trad_only=True), store).stats.total_postings)
    min_fls = [min(f) for f in fls]
    rp = bin_by_min_fl(min_fls, prox, cfg.step, cfg.bins)
    rt = bin_by_min_fl(min_fls, trad, cfg.step, cfg.bins)
    bins = [{"bin": p.index, "min_fl": [p.lo, p.hi], "queries": p.count,
             "factor": (t.mean / p.mean) if p.mean else None} for p, t in zip(rp.bins, rt.bins)]
    return {"config": asdict(cfg), "appg": dict(table), "bins": bins}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(ReportConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = ReportConfig(**vars(ap.parse_args()))
    with tempfile.TemporaryDirectory() as tmp:
        print(json.dumps(run(cfg, Path(tmp)), indent=1))


if __name__ == "__main__":
    main()
