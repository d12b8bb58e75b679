"""Compressed in-memory RDF triple store built from one k²-tree per predicate."""

from .bitseq import BitSequence
from .dictionary import Role, TermDictionary, build_dictionary
from .ingest import (
    LineError,
    NTriplesError,
    RawTriple,
    build_from_file,
    build_from_triples,
    deduplicate,
    parse_ntriples,
)
from .joins import Axis, BindingSet, JoinError, JoinQuery, classify, execute, intersect_sorted
from .k2tree import K2Tree
from .triplestore import (
    StoreFormatError,
    TriplePattern,
    TripleStore,
    build_store,
    dump_store,
    load_store,
    solve_pattern,
    tree_access_count,
)

__version__ = "0.1.0"
