from __future__ import annotations

import pytest

from tests.factories import event, key
from vipar.io import files
from vipar.sansio import synth
from vipar.sansio.events import CirvEntry
from vipar.sansio.types import CrimeFlag, EventType, Role


@pytest.fixture
def micro_events():
    """A chain A-B-C-D, a pair E-F from a shooting before the cutoff, a loner G, and
    one shooting after the cutoff with C as victim and E as suspect."""
    return [
        event("E1", "2014-03-02", ("A", Role.SUSPECT), ("B", Role.SUSPECT)),
        event(
            "E2",
            "2014-06-01",
            ("B", Role.SUSPECT),
            ("C", Role.VICTIM),
            flags=(CrimeFlag.VIOLENT,),
        ),
        event(
            "E3",
            "2013-01-15",
            ("C", Role.ARRESTEE),
            ("D", Role.ARRESTEE),
            event_type=EventType.ARREST,
        ),
        event(
            "S1",
            "2014-11-11",
            ("E", Role.VICTIM),
            ("F", Role.SUSPECT),
            event_type=EventType.SHOOTING,
        ),
        event(
            "E4", "2012-05-05", ("G", Role.STOPPED), event_type=EventType.FIELD_INTERVIEW
        ),
        event(
            "S2",
            "2015-04-01",
            ("C", Role.VICTIM),
            ("E", Role.SUSPECT),
            event_type=EventType.SHOOTING,
        ),
    ]


@pytest.fixture
def micro_cirv():
    return [CirvEntry(key=key("D"), active=True)]


@pytest.fixture(scope="session")
def small_corpus():
    return synth.generate(synth.SynthConfig(seed=7, n_persons=600, n_groups=70))


@pytest.fixture(scope="session")
def small_corpus_dir(small_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    files.write_corpus(small_corpus, out)
    return out


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"
