"""In-memory join engine: binary hash join, TreeTracker join and one-pass Yannakakis."""
from .catalog import Database, HashIndex, Relation, Schema, Tuple, build_index, load_csv
from .convolution import (
    Convolution,
    convolution_stages,
    is_rooted,
    parse_convolution,
    plan_from_rooted,
    validate_convolution,
)
from .engine import (
    CollectSink,
    CountSink,
    CsvSink,
    ExecStats,
    ExecTrace,
    oracle_join,
    run_hj,
    run_stages,
    run_ttj,
    run_ya,
    semijoin,
)
from .planner import Plan, compile_plan, decompose_bushy, parse_bushy, validate_reverse_gyo
from .query import Atom, Query, find_ear, find_parent, gyo_reduce, is_acyclic, key_schema, parse_query

__version__ = "0.1.0"
