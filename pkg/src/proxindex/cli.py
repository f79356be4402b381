"""Command line entry point.

Exit codes: 0 success, 1 usage, 2 I/O, 3 corrupt index.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .analyzer import NSW_FACTOR, appg_table, bin_by_min_fl, gen_corpus, query_fls
from .builder import build_index, read_corpus, update_index, write_jsonl
from .codec import DEFAULT_THRESHOLD
from .executor import doc_level_search, execute
from .lexicon import SchemaConfig, SchemaKind, load_dictionary, tokenize
from .planner import explain, plan_query
from .store import CorruptIndexError, IndexStore, ReadStats, StoreError

log = logging.getLogger("proxindex")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CORRUPT = 0, 1, 2, 3
INDEX_ENV = "PROXINDEX_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    index_dir: Path
    schema: SchemaConfig
    corpus: Path | None = None
    dictionary: Path | None = None
    threshold: int = DEFAULT_THRESHOLD
    nsw_factor: float = NSW_FACTOR


def _index_dir(args) -> Path:
    path = args.index or os.environ.get(INDEX_ENV)
    if not path:
        raise UsageError(f"no index directory: pass --index or set {INDEX_ENV}")
    return Path(path)


def _schema(args) -> SchemaConfig:
    try:
        if args.schema == SchemaKind.NEW.value:
            return SchemaConfig.new(args.max_distance, args.ehf, args.hf, args.fucount,
                                    proximity=not args.trad_only)
        return SchemaConfig.original(args.max_distance, args.swcount, args.fucount,
                                     proximity=not args.trad_only)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _print_sizes(store: IndexStore, out) -> None:
    for fam, s in store.stats().items():
        print(f"{fam.value:9s} keys={s['keys']:>9d} postings={s['postings']:>11d} bytes={s['bytes']:>12d}",
              file=out)


def cmd_build(args) -> int:
    if args.threshold <= 0:
        raise UsageError("--threshold must be positive")
    index_dir = _index_dir(args)
    docs = read_corpus(args.corpus)
    t0 = time.perf_counter()
    if args.update:
        report = update_index(index_dir, docs, jobs=args.jobs)
        store = IndexStore.open(index_dir)
    else:
        cfg = RunConfig(index_dir, _schema(args), Path(args.corpus), args.dictionary, args.threshold)
        store = build_index(docs, cfg.index_dir, cfg.schema, load_dictionary(cfg.dictionary),
                            threshold=cfg.threshold, jobs=args.jobs)
        report = {"generation": store.generation, "documents": len(docs)}
    with store:
        print(f"indexed {report['documents']} documents into {index_dir} "
              f"(generation {report['generation']}, {time.perf_counter() - t0:.1f}s)")
        print(f"schema: {json.dumps(store.cfg.to_json())}")
        _print_sizes(store, sys.stdout)
    return EXIT_OK


def _run_query(query: str, store: IndexStore, args) -> None:
    if not tokenize(query):
        raise UsageError("empty query")
    if args.doc_level:
        stats = ReadStats()
        for doc in doc_level_search(query, store, stats):
            print(json.dumps({"doc": store.doc_ids[doc]}))
    else:
        plan = plan_query(query, store.lexicon, store.cfg, trad_only=args.trad_only)
        if args.explain:
            print(explain(plan, store.lexicon))
        result = execute(plan, store)
        for line in result.to_jsonl(store.doc_ids):
            print(line)
        stats = result.stats
    if args.stats:
        print(json.dumps({"stats": stats.to_json()}))


def cmd_search(args) -> int:
    with IndexStore.open(_index_dir(args)) as store:
        if args.repl:
            for line in sys.stdin:
                if line.strip():
                    _run_query(line, store, args)
            return EXIT_OK
        if args.query is None:
            raise UsageError("search needs a query (or --repl)")
        _run_query(args.query, store, args)
    return EXIT_OK


def _read_workload(path: str) -> list[str]:
    queries, skipped = [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            if not tokenize(line):
                log.warning("%s:%d: no words in workload line, skipped", path, lineno)
                skipped += 1
                continue
            queries.append(line.strip())
    if skipped:
        print(f"skipped {skipped} malformed workload lines", file=sys.stderr)
    if not queries:
        raise UsageError(f"{path}: empty workload")
    return queries


def _emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(rows, out, indent=1)
        out.write("\n")
        return
    writer = csv.DictWriter(out, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def cmd_analyze_appg(args) -> int:
    try:
        swcounts = [int(s) for s in args.swcount.split(",") if s.strip()]
    except ValueError:
        raise UsageError("--swcount takes comma-separated integers") from None
    queries = _read_workload(args.workload)
    with IndexStore.open(_index_dir(args)) as store:
        workload = [query_fls(q, store.lexicon) for q in queries]
        table = appg_table(workload, store.cfg, swcounts, args.nsw_factor)
    _emit([{"swcount": sw, "appg": round(v, 4), "queries": len(workload)} for sw, v in table],
          args.format)
    return EXIT_OK


_METRICS = {
    "postings": lambda res, secs: res.stats.total_postings,
    "bytes": lambda res, secs: res.stats.total_bytes,
    "time": lambda res, secs: secs,
}


def cmd_analyze_bins(args) -> int:
    queries = _read_workload(args.workload)
    metric = _METRICS[args.metric]
    min_fls, prox, trad = [], [], []
    with IndexStore.open(_index_dir(args)) as store:
        for q in queries:
            values = []
            for trad_only in (False, True):
                t0 = time.perf_counter()
                res = execute(plan_query(q, store.lexicon, store.cfg, trad_only), store)
                values.append(metric(res, time.perf_counter() - t0))
            min_fls.append(min(query_fls(q, store.lexicon)))
            prox.append(values[0])
            trad.append(values[1])
    rp = bin_by_min_fl(min_fls, prox, args.step, args.bins)
    rt = bin_by_min_fl(min_fls, trad, args.step, args.bins)
    rows = []
    for bp, bt in zip(rp.bins, rt.bins):
        factor = bt.mean / bp.mean if bp.mean else None
        rows.append({"bin": bp.index, "min_fl_lo": bp.lo, "min_fl_hi": bp.hi, "queries": bp.count,
                     f"proximity_{args.metric}": bp.mean, f"trad_{args.metric}": bt.mean,
                     "factor": factor})
    _emit(rows, args.format)
    if rp.dropped:
        print(f"{rp.dropped} queries beyond bin {args.bins - 1} not reported", file=sys.stderr)
    return EXIT_OK


def cmd_analyze_gen(args) -> int:
    docs = gen_corpus(args.seed, args.vocab, args.docs, (args.min_len, args.max_len), args.exponent,
                      id_prefix=args.id_prefix)
    if args.out:
        write_jsonl(docs, args.out)
    else:
        for d in docs:
            print(json.dumps({"id": d.id, "text": d.text}))
    return EXIT_OK


def cmd_stats(args) -> int:
    with IndexStore.open(_index_dir(args)) as store:
        print(json.dumps({"generation": store.generation, "documents": len(store.doc_ids),
                          "schema": store.cfg.to_json(),
                          "families": {f.value: s for f, s in store.stats().items()}}, indent=1))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="proxindex", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def index_opt(sp):
        sp.add_argument("--index", help=f"index directory (default: ${INDEX_ENV})")

    b = sub.add_parser("build", help="build or extend an index")
    index_opt(b)
    b.add_argument("--corpus", required=True, help="JSON-lines file or directory of text files")
    b.add_argument("--dictionary", help="word<TAB>lemmas file (default: bundled sample)")
    b.add_argument("--schema", choices=[k.value for k in SchemaKind], default="original")
    b.add_argument("--max-distance", type=int, default=5)
    b.add_argument("--swcount", type=int, default=500)
    b.add_argument("--fucount", "--fu", dest="fucount", type=int, default=1050)
    b.add_argument("--ehf", type=int, default=100)
    b.add_argument("--hf", type=int, default=400)
    b.add_argument("--trad-only", action="store_true", help="traditional index only")
    b.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                   help="posting count from which lists use the long stream layout")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--update", action="store_true", help="append documents to an existing index")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("search", help="run a proximity query")
    index_opt(s)
    s.add_argument("query", nargs="?")
    s.add_argument("--explain", action="store_true")
    s.add_argument("--stats", "--read-stats", dest="stats", action="store_true")
    s.add_argument("--doc-level", action="store_true", help="match documents ignoring distance")
    s.add_argument("--trad-only", action="store_true", help="use only traditional lists")
    s.add_argument("--repl", action="store_true", help="read queries from stdin, one per line")
    s.set_defaults(func=cmd_search)

    st = sub.add_parser("stats", help="per-family index sizes")
    index_opt(st)
    st.set_defaults(func=cmd_stats)

    a = sub.add_parser("analyze", help="cost model and workload reports")
    asub = a.add_subparsers(dest="analysis", required=True, parser_class=_Parser)
    ap = asub.add_parser("appg", help="average planned performance gain per SWCount")
    index_opt(ap)
    ap.add_argument("--workload", required=True)
    ap.add_argument("--swcount", default="100,500,1000")
    ap.add_argument("--nsw-factor", type=float, default=NSW_FACTOR)
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    ap.set_defaults(func=cmd_analyze_appg)

    bn = asub.add_parser("bins", help="per Min-FL bin metric, proximity vs traditional plan")
    index_opt(bn)
    bn.add_argument("--workload", required=True)
    bn.add_argument("--step", type=int, default=100)
    bn.add_argument("--bins", type=int, default=21)
    bn.add_argument("--metric", choices=sorted(_METRICS), default="postings")
    bn.add_argument("--format", choices=["csv", "json"], default="csv")
    bn.set_defaults(func=cmd_analyze_bins)

    g = asub.add_parser("gen", help="write a Zipf corpus as JSON lines")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--vocab", type=int, default=300)
    g.add_argument("--docs", type=int, default=200)
    g.add_argument("--min-len", type=int, default=50)
    g.add_argument("--max-len", type=int, default=200)
    g.add_argument("--exponent", type=float, default=1.0)
    g.add_argument("--id-prefix", default="d", help="document ids are <prefix><n>")
    g.add_argument("--out")
    g.set_defaults(func=cmd_analyze_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"proxindex: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptIndexError as e:
        print(f"proxindex: corrupt index: {e}", file=sys.stderr)
        return EXIT_CORRUPT
    except (StoreError, OSError, ValueError) as e:
        print(f"proxindex: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
