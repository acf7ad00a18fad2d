"""Join executors, the brute-force oracle, and instrumentation."""
from .compiled import ExecutionError
from .executors import (
    ExecTrace,
    bind_relations,
    default_ya_order,
    parse_opts,
    run_hj,
    run_plan,
    run_stages,
    run_ttj,
    run_ya,
    segment_completions,
    semijoin,
)
from .oracle import oracle_join, sort_key
from .sinks import CollectSink, CountSink, CsvSink, OutputSink
from .stats import ExecStats, write_records

__all__ = [
    "CollectSink", "CountSink", "CsvSink", "ExecStats", "ExecTrace", "ExecutionError",
    "OutputSink", "bind_relations", "default_ya_order", "oracle_join", "parse_opts",
    "run_hj", "run_plan", "run_stages", "run_ttj", "run_ya", "segment_completions", "semijoin",
    "sort_key",
    "write_records",
]
