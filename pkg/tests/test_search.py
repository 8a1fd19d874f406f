"""Best-first beam search against greedy and an exhaustive oracle."""

import math
import random

from conftest import random_trace_set
from pdfalearn.apta import BLUE, RED, build_prefix_tree
from pdfalearn.engine import (EvalParams, _fringe, _select_blues, candidate_order,
                              greedy_run, refresh_blue, run_merging)
from pdfalearn.evals import aic_of, get_eval
from pdfalearn.kernels import cascade
from pdfalearn.mergelog import undo_log
from pdfalearn.search import best_first_search
from pdfalearn.traces import Trace, TraceSet

AIC = get_eval("aic")


def pdfa_aic(pdfa) -> float:
    """AIC of a finalized model, recomputed independently of the engine."""
    size = len(pdfa.transitions)
    ll = 0.0
    for s in pdfa.states:
        if pdfa.finalprob and s.final_count > 0:
            size += 1
        total = s.path_count
        if total == 0:
            continue
        for (src, _a), (_tgt, count) in pdfa.transitions.items():
            if src == s.id and count > 0:
                ll += count * math.log(count / total)
        if pdfa.finalprob and s.final_count > 0:
            ll += s.final_count * math.log(s.final_count / total)
    return 2.0 * size - 2.0 * ll


def exhaustive_terminal_aics(ts, ev, params):
    """Oracle: enumerate every legal action sequence, collect final AICs."""
    apta = build_prefix_tree(ts)
    results = []

    def explore():
        blues, _ = _fringe(apta, params)
        if not blues:
            results.append(aic_of(apta, params.finalprob))
            return
        any_consistent = False
        for blue, partner in candidate_order(apta, params):
            out = cascade(apta, partner, blue, params, ev, collect_log=True)
            if not out.consistent:
                continue
            any_consistent = True
            colors = refresh_blue(apta)
            explore()
            for node, old, _new in reversed(colors):
                apta.color[node] = old
            undo_log(apta, out.log)
        if not any_consistent:
            if params.extend:
                node = _select_blues(apta, blues, params)[0]
                apta.color[node] = RED
                colors = refresh_blue(apta)
                explore()
                for n2, old, _new in reversed(colors):
                    apta.color[n2] = old
                apta.color[node] = BLUE
            else:
                results.append(aic_of(apta, params.finalprob))

    explore()
    return results


def toy_tree() -> TraceSet:
    traces = [[0]] * 6 + [[1]] * 5 + [[0, 0]] * 4 + [[1, 0]] * 3
    return TraceSet(2, tuple(Trace(1, tuple(t)) for t in traces))


def test_beam_one_equals_greedy_aic():
    rng = random.Random(55)
    params = EvalParams(correction=0.0)
    for _ in range(10):
        ts = random_trace_set(rng, n_traces=rng.randint(3, 25))
        greedy = greedy_run(ts, AIC, params)
        searched = best_first_search(ts, AIC, params, beam_width=1)
        assert searched.structurally_equal(greedy)


def test_search_never_worse_than_greedy_and_matches_oracle():
    params = EvalParams(correction=0.0, largestblue=False)
    ts = toy_tree()
    greedy_aic = pdfa_aic(greedy_run(ts, AIC, params))
    oracle_best = min(exhaustive_terminal_aics(ts, AIC, params))
    searched_aic = pdfa_aic(best_first_search(ts, AIC, params, beam_width=8))
    assert searched_aic <= greedy_aic + 1e-9
    assert abs(searched_aic - oracle_best) < 1e-9


def test_search_on_random_samples_never_worse():
    rng = random.Random(2029)
    params = EvalParams(correction=0.0)
    for _ in range(5):
        ts = random_trace_set(rng, n_traces=rng.randint(5, 30))
        greedy_aic = pdfa_aic(greedy_run(ts, AIC, params))
        searched_aic = pdfa_aic(best_first_search(ts, AIC, params, beam_width=4))
        assert searched_aic <= greedy_aic + 1e-9


def test_search_replay_is_deterministic():
    params = EvalParams(correction=0.0)
    ts = toy_tree()
    first = best_first_search(ts, AIC, params, beam_width=8)
    second = best_first_search(ts, AIC, params, beam_width=8)
    assert first.structurally_equal(second)


def test_search_empty_sample():
    pdfa = best_first_search(TraceSet(2), AIC, EvalParams(), beam_width=4)
    assert pdfa.n_states == 1
