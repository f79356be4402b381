"""Postings decoded by the traditional plan vs. the proximity plan, per query class.

    python scripts/dominance.py --docs 1000 --vocab 2000 --per-class 60
"""

import argparse
import json
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from proxindex import QueryClass, SchemaConfig, build_index, execute, gen_corpus, gen_workload, plan_query


@dataclass(frozen=True)
class DominanceConfig:
    seed: int = 6
    vocab: int = 2000
    docs: int = 1000
    min_len: int = 200
    max_len: int = 400
    max_distance: int = 5
    swcount: int = 50
    fucount: int = 105
    per_class: int = 60
    jobs: int = 1


def run(cfg: DominanceConfig, workdir: Path) -> dict:
    docs = gen_corpus(cfg.seed, cfg.vocab, cfg.docs, (cfg.min_len, cfg.max_len))
    schema = SchemaConfig.original(cfg.max_distance, swcount=cfg.swcount, fucount=cfg.fucount)
    t0 = time.perf_counter()
    store = build_index(docs, workdir / "ix", schema, {}, jobs=cfg.jobs)
    build_secs = time.perf_counter() - t0
    rows = {}
    with store:
        lex = store.lexicon
        workload = gen_workload(cfg.seed + 1, docs, lex, schema, cfg.per_class, length_range=(2, 5))
        for qclass in QueryClass:
            prox, trad = [], []
            for c, q in workload:
                if c is not qclass:
                    continue
                prox.append(execute(plan_query(q, lex, schema), store).stats.total_postings)
                trad.append(execute(plan_query(q, lex, schema, trad_only=True), store).stats.total_postings)
            if prox:
                rows[qclass.value] = {"queries": len(prox), "mean_trad": float(np.mean(trad)),
                                      "mean_proximity": float(np.mean(prox)),
                                      "ratio": float(np.mean(trad) / max(np.mean(prox), 1e-9))}
    return {"config": asdict(cfg), "build_seconds": round(build_secs, 2), "classes": rows}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(DominanceConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    args = ap.parse_args()
    cfg = DominanceConfig(**vars(args))
    with tempfile.TemporaryDirectory() as tmp:
        print(json.dumps(run(cfg, Path(tmp)), indent=1))


if __name__ == "__main__":
    main()
