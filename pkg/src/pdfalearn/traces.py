"""Reading and writing trace samples in Abbadingo text format.

The format is a header line ``N A`` (number of sequences, alphabet size)
followed by one line per sequence: ``type length s1 ... s_length``, all
fields space-separated decimal integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class TraceFormatError(ValueError):
    """Raised when a trace file violates the Abbadingo format."""


@dataclass(frozen=True)
class Trace:
    """One sequence: a type label and its symbols (alphabet indices)."""

    type_label: int
    symbols: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class TraceSet:
    """A parsed input sample over an integer alphabet."""

    alphabet_size: int
    traces: tuple[Trace, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise TraceFormatError(f"alphabet size must be positive, got {self.alphabet_size}")
        for i, tr in enumerate(self.traces):
            if tr.type_label < 0:
                raise TraceFormatError(f"trace {i}: negative type label {tr.type_label}")
            for s in tr.symbols:
                if not 0 <= s < self.alphabet_size:
                    raise TraceFormatError(
                        f"trace {i}: symbol {s} outside alphabet of size {self.alphabet_size}"
                    )

    def __len__(self) -> int:
        return len(self.traces)


def _int_fields(line: str, lineno: int) -> list[int]:
    out = []
    for tok in line.split():
        try:
            out.append(int(tok))
        except ValueError:
            raise TraceFormatError(f"line {lineno}: non-integer field {tok!r}") from None
    return out


def parse_abbadingo(text: str) -> TraceSet:
    """Parse Abbadingo-formatted text into a TraceSet.

    Every declared trace is validated against the header: per-line length
    fields must match the symbol count, symbols must be inside the declared
    alphabet, and the number of trace lines must equal the declared count.
    Trailing blank lines are ignored.
    """
    lines = text.splitlines()
    # Drop trailing blanks only; interior blank lines are format errors.
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise TraceFormatError("empty input: missing header line")

    header = _int_fields(lines[0], 1)
    if len(header) != 2:
        raise TraceFormatError(f"header must have two fields, got {len(header)}")
    num_declared, alphabet_size = header
    if num_declared < 0:
        raise TraceFormatError(f"negative trace count {num_declared} in header")
    if alphabet_size < 1:
        raise TraceFormatError(f"alphabet size must be positive, got {alphabet_size}")

    traces = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = _int_fields(line, lineno)
        if len(fields) < 2:
            raise TraceFormatError(f"line {lineno}: expected 'type length symbols...'")
        type_label, length = fields[0], fields[1]
        symbols = fields[2:]
        if type_label < 0:
            raise TraceFormatError(f"line {lineno}: negative type label {type_label}")
        if length < 0:
            raise TraceFormatError(f"line {lineno}: negative length {length}")
        if len(symbols) != length:
            raise TraceFormatError(
                f"line {lineno}: declared length {length} but {len(symbols)} symbols present"
            )
        for s in symbols:
            if not 0 <= s < alphabet_size:
                raise TraceFormatError(
                    f"line {lineno}: symbol {s} outside alphabet of size {alphabet_size}"
                )
        traces.append(Trace(type_label, tuple(symbols)))

    if len(traces) != num_declared:
        raise TraceFormatError(
            f"header declares {num_declared} traces but {len(traces)} present"
        )
    return TraceSet(alphabet_size, tuple(traces))


def write_abbadingo(ts: TraceSet) -> str:
    """Serialize a TraceSet; the output re-parses to an equal TraceSet."""
    out = [f"{len(ts.traces)} {ts.alphabet_size}"]
    for tr in ts.traces:
        parts = [str(tr.type_label), str(len(tr.symbols))]
        parts.extend(str(s) for s in tr.symbols)
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def load_abbadingo(path) -> TraceSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_abbadingo(fh.read())
