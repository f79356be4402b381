"""Word-level proximity full-text search over multi-component key indexes."""

from .analyzer import appg, appg_table, bin_by_min_fl, gen_corpus, gen_workload, ppg, query_fls
from .builder import Document, build_all, build_index, index_document, update_index
from .codec import Family, StreamLayout
from .executor import SearchResult, doc_level_search, execute, oracle_search, search
from .lexicon import Lexicon, SchemaConfig, SchemaKind, build_lexicon, load_dictionary, tokenize
from .planner import QueryClass, explain, plan_query
from .store import IndexKey, IndexStore

__all__ = [
    "Document", "Family", "IndexKey", "IndexStore", "Lexicon", "QueryClass", "SchemaConfig",
    "SchemaKind", "SearchResult", "StreamLayout", "build_all", "build_index", "build_lexicon",
    "doc_level_search", "execute", "explain", "index_document", "load_dictionary",
    "oracle_search", "plan_query", "search", "update_index", "appg", "appg_table", "bin_by_min_fl",
    "gen_corpus", "gen_workload", "ppg", "query_fls", "tokenize",
]
