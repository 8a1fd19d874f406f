"""Backend selection for the merge-cascade kernel.

At import time the compiled extension is preferred; the pure-Python
implementation is the fallback and the reference.  Set the environment
variable ``PDFALEARN_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the parity tests).  Evaluation functions without a
``kernel_id`` (user-registered ones) always run through the Python
cascade, which calls their ``pair``/``finish`` hooks directly.

The compiled cascade performs the structural work and the per-pair
arithmetic, returning the running aggregates; the final verdict
(chi-squared and friends) is applied here, once per candidate.
"""

from __future__ import annotations

import os

from . import _pykernels, evals
from ._pykernels import CascadeOutcome  # noqa: F401  (re-export)
from .mergelog import MergeLog, undo_log

try:
    from . import _speedups
except ImportError:
    _speedups = None

_FORCE_PY = os.environ.get("PDFALEARN_PURE_PYTHON", "") not in ("", "0")

BACKEND = "python" if (_speedups is None or _FORCE_PY) else "compiled"


def has_compiled() -> bool:
    return _speedups is not None


def _finish_builtin(kernel_id: int, params, agg0: float, agg1: int) -> tuple[bool, float]:
    if kernel_id == evals.KERNEL_ALERGIA:
        return True, agg0
    if kernel_id == evals.KERNEL_LIKELIHOODRATIO:
        return evals.likelihood_ratio_test(agg0, agg1, params.confidence_bound)
    if kernel_id == evals.KERNEL_AIC:
        return evals.aic_test(agg0, agg1)
    if kernel_id == evals.KERNEL_MDI:
        return evals.mdi_test(agg0, agg1, params.confidence_bound)
    raise ValueError(f"unknown kernel id {kernel_id}")


_scalar_cache: "weakref.WeakKeyDictionary" = None


def _kernel_scalars(params) -> tuple:
    """Parameter fields converted once per params object, not per call."""
    global _scalar_cache
    if _scalar_cache is None:
        import weakref

        _scalar_cache = weakref.WeakKeyDictionary()
    args = _scalar_cache.get(params)
    if args is None:
        args = (
            float(params.confidence_bound), int(params.state_count),
            int(params.symbol_count), float(params.correction),
            bool(params.finalprob), int(params.markovian), int(params.ktail),
            bool(params.redfixed),
        )
        _scalar_cache[params] = args
    return args


def cascade(apta, q, qp, params, ev, collect_log=False, track_aic=False) -> CascadeOutcome:
    """Attempt the merge of qp into q; see ``_pykernels.cascade``."""
    if BACKEND != "compiled" or ev.kernel_id is None:
        return _pykernels.cascade(apta, q, qp, params, ev, collect_log, track_aic)

    structural_ok, agg0, agg1, dll, dparams, log_tuple = _speedups.cascade(
        apta.rep, apta.color, apta.children, apta.symbol_counts,
        apta.final_count, apta.path_count, apta.aux_weight,
        apta.depth, apta.parent, apta.incoming,
        q, qp,
        *_kernel_scalars(params),
        ev.kernel_id, collect_log, track_aic,
    )
    if not structural_ok:
        return CascadeOutcome(False, 0.0, dll, dparams, None)
    consistent, score = _finish_builtin(ev.kernel_id, params, agg0, agg1)
    log = MergeLog(*log_tuple) if log_tuple is not None else None
    if consistent:
        return CascadeOutcome(True, score, dll, dparams, log)
    if log is not None:
        undo_log(apta, log)
    return CascadeOutcome(False, score, dll, dparams, None)
