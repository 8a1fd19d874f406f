"""Learn probabilistic deterministic finite automata from trace data.

The toolkit builds a prefix tree from unlabeled traces, merges states in
the red-blue framework under a pluggable statistical evaluation
function, and uses the learned model for sequence probabilities,
perplexity evaluation, and anomaly detection.
"""

from .apta import Apta, AptaNode, build_prefix_tree
from .engine import (Action, EvalParams, candidate_order, greedy_run, is_sink,
                     merge, run_merging, undo_merge)
from .evals import (EvalFunction, available_evals, chi2_sf, get_eval, pool_counts,
                    register)
from .kernels import BACKEND, has_compiled
from .model import (Pdfa, PdfaState, PredictionRecord, finalize_pdfa, is_anomaly,
                    perplexity, trace_log_probability, trace_scores)
from .search import best_first_search
from .traces import Trace, TraceFormatError, TraceSet, parse_abbadingo, write_abbadingo

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Apta",
    "AptaNode",
    "BACKEND",
    "EvalFunction",
    "EvalParams",
    "Pdfa",
    "PdfaState",
    "PredictionRecord",
    "Trace",
    "TraceFormatError",
    "TraceSet",
    "available_evals",
    "best_first_search",
    "build_prefix_tree",
    "candidate_order",
    "chi2_sf",
    "finalize_pdfa",
    "get_eval",
    "greedy_run",
    "has_compiled",
    "is_anomaly",
    "is_sink",
    "merge",
    "parse_abbadingo",
    "perplexity",
    "pool_counts",
    "register",
    "run_merging",
    "trace_log_probability",
    "trace_scores",
    "undo_merge",
    "write_abbadingo",
]
