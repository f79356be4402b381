"""Index size per family for a traditional-only build and proximity builds at
several MaxDistance values.

    python scripts/max_distance_sweep.py --distances 5,7,9
"""

import argparse
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from proxindex import Family, SchemaConfig, build_index, build_lexicon, gen_corpus


@dataclass(frozen=True)
class SweepConfig:
    seed: int = 3
    vocab: int = 2000
    docs: int = 300
    min_len: int = 200
    max_len: int = 400
    swcount: int = 50
    fucount: int = 105
    distances: str = "5,7,9"


def run(cfg: SweepConfig, workdir: Path) -> list[dict]:
    docs = gen_corpus(cfg.seed, cfg.vocab, cfg.docs, (cfg.min_len, cfg.max_len))
    lex = build_lexicon((d.text for d in docs), {})
    builds = [("idx0", SchemaConfig.original(5, swcount=cfg.swcount, fucount=cfg.fucount, proximity=False))]
    for md in (int(x) for x in cfg.distances.split(",")):
        builds.append((f"idx{md}", SchemaConfig.original(md, swcount=cfg.swcount, fucount=cfg.fucount)))
    rows = []
    for name, schema in builds:
        t0 = time.perf_counter()
        with build_index(docs, workdir / name, schema, {}, lexicon=lex) as store:
            stats = store.stats()
        row = {"index": name, "seconds": round(time.perf_counter() - t0, 1)}
        for fam in Family:
            row[f"{fam.value}_bytes"] = stats[fam]["bytes"]
        row["total_bytes"] = sum(s["bytes"] for s in stats.values())
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(SweepConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = SweepConfig(**vars(ap.parse_args()))
    with tempfile.TemporaryDirectory() as tmp:
        rows = run(cfg, Path(tmp))
    print(",".join(rows[0]))
    for row in rows:
        print(",".join(str(v) for v in row.values()))


if __name__ == "__main__":
    main()
