"""Abbadingo parsing and writing."""

import random

import pytest

from conftest import random_trace_set
from pdfalearn.traces import (Trace, TraceFormatError, TraceSet, parse_abbadingo,
                              write_abbadingo)

HDFS_STYLE_HEADER = (
    "4855 50\n"
    "1 19 5 5 5 22 11 9 11 9 11 9 26 26 26 23 23 23 21 21 21\n"
)


def test_parse_header_and_first_line():
    # Only the first declared line is present, so shrink the count.
    text = HDFS_STYLE_HEADER.replace("4855 50", "1 50")
    ts = parse_abbadingo(text)
    assert ts.alphabet_size == 50
    assert len(ts.traces) == 1
    tr = ts.traces[0]
    assert tr.type_label == 1
    assert len(tr) == 19
    assert tr.symbols[:6] == (5, 5, 5, 22, 11, 9)


def test_declared_count_must_match():
    with pytest.raises(TraceFormatError, match="declares 4855"):
        parse_abbadingo(HDFS_STYLE_HEADER)


def test_empty_sample():
    ts = parse_abbadingo("0 1")
    assert ts.alphabet_size == 1
    assert ts.traces == ()


def test_length_mismatch():
    with pytest.raises(TraceFormatError, match="declared length 3 but 2"):
        parse_abbadingo("1 2\n1 3 0 1\n")


def test_symbol_outside_alphabet():
    with pytest.raises(TraceFormatError, match="outside alphabet"):
        parse_abbadingo("1 2\n1 3 0 1 2\n")


def test_header_malformed():
    with pytest.raises(TraceFormatError):
        parse_abbadingo("banana 50\n")
    with pytest.raises(TraceFormatError, match="two fields"):
        parse_abbadingo("1 2 3\n")
    with pytest.raises(TraceFormatError):
        parse_abbadingo("")
    with pytest.raises(TraceFormatError, match="positive"):
        parse_abbadingo("0 0\n")


def test_trailing_blank_lines_ignored():
    ts = parse_abbadingo("1 2\n1 2 0 1\n\n\n")
    assert len(ts.traces) == 1


def test_write_empty():
    assert write_abbadingo(TraceSet(1)) == "0 1\n"


def test_write_single_symbol_trace():
    ts = TraceSet(1, (Trace(1, (0,)),))
    assert write_abbadingo(ts) == "1 1\n1 1 0\n"


def test_round_trip_random():
    rng = random.Random(20240)
    for _ in range(100):
        ts = random_trace_set(rng)
        assert parse_abbadingo(write_abbadingo(ts)) == ts


def test_duplicates_kept():
    ts = parse_abbadingo("3 2\n1 1 0\n1 1 0\n0 1 1\n")
    assert len(ts.traces) == 3
    assert ts.traces[0] == ts.traces[1]
