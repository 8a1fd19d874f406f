"""Command-line entry point.

Configuration comes from an ini file (one [default] section of
key = value lines) with command-line flags taking precedence over it,
and documented defaults below both.  Three modes: batch (greedy
learning), search (best-first AIC search), predict (score traces with a
previously learned model).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, fields

from . import formats
from .engine import Action, EvalParams, greedy_run
from .evals import available_evals, get_eval
from .model import trace_scores
from .search import best_first_search
from .traces import load_abbadingo

# Parameters shared between the ini file and the flags, with their types.
_PARAM_TYPES = {
    "confidence_bound": float,
    "largestblue": bool,
    "shallowfirst": bool,
    "extend": bool,
    "blueblue": bool,
    "redfixed": bool,
    "markovian": int,
    "ktail": int,
    "sinkson": bool,
    "sink_count": int,
    "state_count": int,
    "symbol_count": int,
    "correction": float,
    "finalprob": bool,
    "mode": str,
}


class ConfigError(ValueError):
    """Bad ini contents, bad flag values, or a missing required input."""


@dataclass
class RunConfig:
    """Everything one invocation needs."""

    params: EvalParams
    heuristic_name: str = "alergia"
    data_name: str = ""
    input_path: str = ""
    aptafile: str = ""
    beam_width: int = 100

    def __post_init__(self):
        if self.heuristic_name not in available_evals():
            raise ConfigError(
                f"unknown heuristic {self.heuristic_name!r}; known: {available_evals()}"
            )
        if self.params.mode == "predict" and not self.aptafile:
            raise ConfigError("predict mode requires --aptafile")


def _parse_value(key: str, raw, kind):
    if isinstance(raw, kind) and not isinstance(raw, str):
        return raw
    text = str(raw).strip()
    try:
        if kind is bool:
            return bool(int(text))
        return kind(text)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for parameter {key!r}") from None


def load_config(ini_text: str | None, overrides: dict | None = None) -> RunConfig:
    """Resolve configuration: flag overrides > ini values > defaults."""
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    settings: dict = {}
    if ini_text:
        cp = configparser.ConfigParser()
        try:
            cp.read_string(ini_text)
        except configparser.Error as exc:
            raise ConfigError(f"bad ini file: {exc}") from None
        for section in cp.sections():
            for key, value in cp.items(section):
                settings[key.replace("-", "_")] = value
    settings.update({k.replace("-", "_"): v for k, v in overrides.items()})

    param_kwargs = {}
    extra = {}
    for key, value in settings.items():
        if key in _PARAM_TYPES:
            param_kwargs[key] = _parse_value(key, value, _PARAM_TYPES[key])
        elif key in ("heuristic_name", "data_name", "input_path", "aptafile"):
            extra[key] = str(value)
        elif key == "beam_width":
            extra[key] = _parse_value(key, value, int)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    try:
        params = EvalParams(**param_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(params=params, **extra)


def _progress_reporter(stream):
    def report(act: Action):
        if act.kind == "extend":
            stream.write(f" x{act.freq} ")
        elif act.kind == "merge":
            stream.write(" m%g " % act.score)
        stream.flush()

    return report


def run(config: RunConfig, stdout=None) -> int:
    """Execute one configured run; returns the process exit status."""
    out = stdout if stdout is not None else sys.stdout
    params = config.params
    try:
        if not config.input_path:
            raise ConfigError("an input data path is required")
        if params.mode in ("batch", "search"):
            ev = get_eval(config.heuristic_name)
            ts = load_abbadingo(config.input_path)
            out.write(f"Using heuristic {config.heuristic_name}\n")
            if params.mode == "batch":
                out.write("batch mode selected\n")
                out.write("starting greedy merging\n")
                pdfa = greedy_run(ts, ev, params, reporter=_progress_reporter(out))
            else:
                out.write("search mode selected\n")
                pdfa = best_first_search(ts, ev, params, beam_width=config.beam_width)
            out.write("no more possible merges\n")
            dot_path = config.input_path + formats.DOT_SUFFIX
            json_path = config.input_path + formats.MODEL_SUFFIX
            with open(dot_path, "w", encoding="utf-8") as fh:
                fh.write(formats.export_dot(pdfa))
            with open(json_path, "w", encoding="utf-8") as fh:
                fh.write(formats.export_model(pdfa))
            out.write(f"{dot_path}\n{json_path}\n")
        elif params.mode == "predict":
            with open(config.aptafile, "r", encoding="utf-8") as fh:
                pdfa = formats.import_model(fh.read())
            ts = load_abbadingo(config.input_path)
            records = [
                trace_scores(pdfa, tr.symbols, params.correction) for tr in ts.traces
            ]
            csv_path = config.input_path + formats.PREDICT_SUFFIX
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write(formats.write_predictions(records))
            out.write(f"{csv_path}\n")
        return 0
    except (OSError, ValueError, KeyError) as exc:
        out.write(f"error: {exc}\n")
        return 1


def build_argparser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pdfalearn",
        description="Learn probabilistic automata from traces by state merging.",
    )
    p.add_argument("input", nargs="?", help="trace file in Abbadingo format")
    p.add_argument("--ini", help="ini file with a [default] parameter section")
    p.add_argument("--heuristic-name", dest="heuristic_name",
                   help=f"evaluation function ({', '.join(available_evals())})")
    p.add_argument("--data-name", dest="data_name", help="data processing profile name")
    p.add_argument("--aptafile", help="learned model (json) for predict mode")
    p.add_argument("--beam-width", dest="beam_width", type=int, help="search beam width")
    p.add_argument("--mode", choices=("batch", "search", "predict"))
    for key, kind in _PARAM_TYPES.items():
        if key == "mode":
            continue
        flag = "--" + key
        if kind is bool:
            p.add_argument(flag, type=int, choices=(0, 1), default=None,
                           help=f"{key} (0/1)")
        else:
            p.add_argument(flag, type=kind, default=None, help=key)
    return p


def main(argv=None) -> int:
    args = build_argparser().parse_args(argv)
    ini_text = None
    if args.ini:
        try:
            with open(args.ini, "r", encoding="utf-8") as fh:
                ini_text = fh.read()
        except OSError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return 1
    overrides = {
        key: getattr(args, key)
        for key in list(_PARAM_TYPES) + ["heuristic_name", "data_name", "aptafile",
                                         "beam_width"]
        if getattr(args, key, None) is not None
    }
    if args.input:
        overrides["input_path"] = args.input
    try:
        config = load_config(ini_text, overrides)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
