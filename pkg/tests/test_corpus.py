"""Corpus integrity: every entry loads, desugars, runs, and checks green."""

import pytest

from fieldcalc.corpus import (
    apply_mutation, check_entry, list_entries, load_entry,
)
from fieldcalc.desugar import desugar, is_core
from fieldcalc.errors import FcError
from fieldcalc.parser import parse

ALL = list_entries()


def test_the_corpus_is_complete():
    assert set(ALL) >= {
        "hopcount", "longest-chain", "lights", "stereo", "evacuation",
        "everywhere", "somewhere", "remote-lights", "remote-evacuation-alert",
        "broadcast", "elliptic-channel", "channel", "samevalue", "monitor",
        "adjusting-channel"}
    assert len(ALL) >= 12


@pytest.mark.parametrize("name", ALL)
def test_entry_files_are_consistent(name):
    entry = load_entry(name)
    assert entry.scenario_path.exists()
    assert entry.oracle
    assert entry.negative_mutation
    program = parse(entry.source)
    assert is_core(desugar(program))


@pytest.mark.parametrize("name", ALL)
def test_entry_checks_pass(name):
    report = check_entry(load_entry(name))
    assert report.passed, report.to_lines()


def test_unknown_entry_rejected():
    with pytest.raises(FcError):
        load_entry("no-such-entry")


def test_mutation_requires_the_token():
    with pytest.raises(FcError):
        apply_mutation("abc", "zzz", "qqq")
    assert apply_mutation("min min", "min", "max") == "max min"


def test_report_lines_shape():
    report = check_entry(load_entry("hopcount"))
    lines = report.to_lines().strip().splitlines()
    assert lines[0].startswith("check\thopcount")
    assert lines[-1] == "verdict\tpass"
    assert all(line.split("\t")[0] in ("check", "row", "verdict", "first-divergence")
               for line in lines)
