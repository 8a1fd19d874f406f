"""Re-run the large external evaluations when their datasets are available.

These need data that is not shipped with the repository, so nothing here
asserts a score; the functions recompute the published metrics and
return them for inspection.  Point the environment variables at local
copies to activate the corresponding acceptance check:

- ``PAUTOMAC_DIR``: a directory with ``<n>.pautomac.train``,
  ``<n>.pautomac.test`` and ``<n>.pautomac_solution.txt`` files.
- ``HDFS_TRAIN``, ``HDFS_TEST_NORMAL``, ``HDFS_TEST_ABNORMAL``: trace
  files in Abbadingo format (normal training data, plus normal and
  abnormal test sets).

Both can also be run directly::

    python tests/external_harness.py pautomac /path/to/dir
    python tests/external_harness.py hdfs train.dat normal.dat abnormal.dat
"""

from __future__ import annotations

import math
import pathlib
import sys

from pdfalearn.engine import EvalParams, greedy_run
from pdfalearn.evals import get_eval
from pdfalearn.model import is_anomaly, perplexity, trace_log_probability
from pdfalearn.traces import load_abbadingo

ALERGIA_PLUS = dict(
    confidence_bound=0.01,
    sinkson=True,
    sink_count=25,
    state_count=15,
    symbol_count=10,
    correction=1.0,
    largestblue=True,
    finalprob=True,
)


def _read_solution(path: pathlib.Path) -> list[float]:
    lines = path.read_text().split()
    count = int(lines[0])
    probs = [float(x) for x in lines[1 : count + 1]]
    return probs


def pautomac_scores(directory, heuristic: str = "alergia") -> dict[int, float]:
    """Perplexity per problem against the published target probabilities."""
    directory = pathlib.Path(directory)
    scores: dict[int, float] = {}
    ev = get_eval(heuristic)
    for train_path in sorted(directory.glob("*.pautomac.train")):
        stem = train_path.name.split(".")[0]
        test_path = directory / f"{stem}.pautomac.test"
        solution_path = directory / f"{stem}.pautomac_solution.txt"
        if not test_path.exists() or not solution_path.exists():
            continue
        train = load_abbadingo(train_path)
        test = load_abbadingo(test_path)
        model = greedy_run(train, ev, EvalParams(**ALERGIA_PLUS))
        target = _read_solution(solution_path)
        raw = [math.exp(trace_log_probability(model, tr.symbols, 1.0))
               for tr in test.traces]
        total = sum(raw)
        if total == 0 or any(x == 0.0 for x in raw):
            scores[int(stem)] = float("inf")
            continue
        candidate = [x / total for x in raw]
        z = sum(target)
        scores[int(stem)] = perplexity(candidate, [x / z for x in target])
    return scores


def hdfs_f1(train_path, normal_path, abnormal_path, heuristic: str = "aic",
            **param_overrides) -> dict[str, float]:
    """Anomaly-detection scores: alarm on missing transitions or dead ends."""
    params = EvalParams(correction=1.0, finalprob=True, **param_overrides)
    model = greedy_run(load_abbadingo(train_path), get_eval(heuristic), params)
    fp = fn = tp = tn = 0
    for tr in load_abbadingo(normal_path).traces:
        if is_anomaly(model, tr.symbols)[0]:
            fp += 1
        else:
            tn += 1
    for tr in load_abbadingo(abnormal_path).traces:
        if is_anomaly(model, tr.symbols)[0]:
            tp += 1
        else:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"tp": tp, "fp": fp, "tn": tn, "fn": fn,
            "precision": precision, "recall": recall, "f1": f1}


if __name__ == "__main__":
    if len(sys.argv) >= 3 and sys.argv[1] == "pautomac":
        for n, score in sorted(pautomac_scores(sys.argv[2]).items()):
            print(f"problem {n}: perplexity {score:.4f}")
    elif len(sys.argv) >= 5 and sys.argv[1] == "hdfs":
        out = hdfs_f1(sys.argv[2], sys.argv[3], sys.argv[4])
        print(" ".join(f"{k}={v}" for k, v in out.items()))
    else:
        print(__doc__)
        sys.exit(2)
