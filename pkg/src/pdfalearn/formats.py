"""Serialization: Graphviz dot, the versioned model document, prediction CSV.

All exporters are deterministic: states ordered by id, transitions by
(source, symbol), floats printed with 6 significant digits. Identical
models produce byte-identical output.
"""

from __future__ import annotations

import json

from .model import Pdfa, PdfaState, PredictionRecord

SCHEMA_VERSION = 1

DOT_SUFFIX = ".ff.final.dot"
MODEL_SUFFIX = ".ff.final.json"
PREDICT_SUFFIX = ".ff.predict.csv"


class ModelDocumentError(ValueError):
    """Raised when a model document fails validation on import."""


def _fmt(x: float) -> str:
    """6 significant digits; infinities as inf/-inf tokens."""
    return "%g" % x


def _visible_states(pdfa: Pdfa, include_sinks: bool) -> set[int]:
    """States reachable from the start without entering a sink."""
    if include_sinks:
        return {s.id for s in pdfa.states}
    sinks = {s.id for s in pdfa.states if s.sink}
    seen = {0}
    queue = [0]
    while queue:
        q = queue.pop(0)
        for a in range(pdfa.alphabet_size):
            t = pdfa.target(q, a)
            if t is not None and t not in sinks and t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def export_dot(pdfa: Pdfa, include_sinks: bool = False) -> str:
    """Render the automaton as Graphviz dot text.

    States show their id with fin/path counts, edges their symbol and
    count.  Sink states and everything behind them are omitted unless
    requested.
    """
    visible = _visible_states(pdfa, include_sinks)
    lines = ["digraph pdfa {", "\trankdir=LR;", '\t__start__ [shape=point];',
             "\t__start__ -> s0;"]
    for s in pdfa.states:
        if s.id not in visible:
            continue
        lines.append(
            f'\ts{s.id} [shape=circle, label="{s.id}\\nfin: {s.final_count}\\n'
            f'path: {s.path_count}"];'
        )
    for (src, a), (tgt, count) in sorted(pdfa.transitions.items()):
        if src not in visible or tgt not in visible:
            continue
        lines.append(f'\ts{src} -> s{tgt} [label="{a}:{count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_model(pdfa: Pdfa) -> str:
    """Serialize the full model (sinks included) to the json document."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "alphabet_size": pdfa.alphabet_size,
        "finalprob": pdfa.finalprob,
        "meta": pdfa.meta,
        "states": [
            {
                "id": s.id,
                "final_count": s.final_count,
                "path_count": s.path_count,
                "sink": s.sink,
            }
            for s in pdfa.states
        ],
        "transitions": [
            {"source": src, "symbol": a, "target": tgt, "count": count}
            for (src, a), (tgt, count) in sorted(pdfa.transitions.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def import_model(text: str) -> Pdfa:
    """Parse and validate a model document; inverse of export_model."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelDocumentError(f"not valid json: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelDocumentError("document root must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelDocumentError(f"unsupported schema version {version!r}")
    for key in ("alphabet_size", "finalprob", "states", "transitions"):
        if key not in doc:
            raise ModelDocumentError(f"missing field {key!r}")
    try:
        states = [
            PdfaState(
                id=int(s["id"]),
                final_count=int(s["final_count"]),
                path_count=int(s["path_count"]),
                sink=bool(s.get("sink", False)),
            )
            for s in doc["states"]
        ]
        transitions = {
            (int(t["source"]), int(t["symbol"])): (int(t["target"]), int(t["count"]))
            for t in doc["transitions"]
        }
        pdfa = Pdfa(
            alphabet_size=int(doc["alphabet_size"]),
            finalprob=bool(doc["finalprob"]),
            states=states,
            transitions=transitions,
            meta=doc.get("meta", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelDocumentError(str(exc)) from None
    return pdfa


def write_predictions(records: list[PredictionRecord]) -> str:
    """Prediction CSV: one '[states]; [scores]' row per trace."""
    lines = ["state sequence; score sequence"]
    for rec in records:
        states = ",".join(str(s) for s in rec.state_sequence)
        scores = ",".join(_fmt(v) for v in rec.score_sequence)
        lines.append(f"[{states}]; [{scores}]")
    return "\n".join(lines) + "\n"


def parse_predictions(text: str) -> list[PredictionRecord]:
    """Re-parse a prediction CSV (used to check the round trip)."""
    lines = text.splitlines()
    if not lines or lines[0] != "state sequence; score sequence":
        raise ValueError("missing prediction header")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        state_part, score_part = line.split("; ")
        states = [int(x) for x in state_part.strip("[]").split(",") if x]
        scores = [float(x) for x in score_part.strip("[]").split(",") if x]
        records.append(PredictionRecord(states, scores))
    return records
