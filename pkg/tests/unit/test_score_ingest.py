"""Test MusicXML reading and chordify in score_ingest."""
import logging
from fractions import Fraction

import pytest

from scorenet.pcset_core import normal_order
from scorenet.score_ingest import (ChordEvent, EmptyScoreError,
                                   MalformedScoreError, ScoreParseError,
                                   chordify, ingest, load_score,
                                   parse_musicxml)
from tests.score_fixtures import (C_MAJOR, backup, chord, chord_score,
                                  measure, mxl, note, rest, score, write)


def two_part_score():
    """Sustained C4 against E4 then F4 from beat 3."""
    upper = [measure(1, note('C4', 4), divisions=1)]
    lower = [measure(1, note('E4', 2), note('F4', 2), divisions=1)]
    return score(upper, lower)


def test_parse_single_chord():
    """Test parse_musicxml() on a one-bar C major chord."""
    doc = parse_musicxml(chord_score([C_MAJOR]))
    assert len(doc.parts) == 1
    events = doc.parts[0].events
    assert len(events) == 1
    assert events[0].pitches == frozenset({60, 64, 67})
    assert events[0].onset == 0
    assert events[0].duration == 4
    assert doc.title == 'fixture'


def test_parse_two_parts_onsets():
    """Test onsets of a two-part score."""
    doc = parse_musicxml(two_part_score())
    assert len(doc.parts) == 2
    assert [event.onset for event in doc.parts[1].events] == [0, 2]


def test_parse_divisions():
    """Durations are read in quarter notes whatever the divisions."""
    document = score([measure(1, note('C4', 3), note('D4', 1), divisions=2)])
    events = parse_musicxml(document).parts[0].events
    assert [event.onset for event in events] == [0, Fraction(3, 2)]
    assert events[1].duration == Fraction(1, 2)


def test_parse_errors():
    """Truncated, empty and note-less documents are refused."""
    with pytest.raises(MalformedScoreError, match="malformed XML"):
        parse_musicxml(chord_score([C_MAJOR])[:60])
    with pytest.raises(EmptyScoreError, match="no parts"):
        parse_musicxml(score())
    with pytest.raises(EmptyScoreError, match="no notes"):
        parse_musicxml(chord_score([None, None]))
    with pytest.raises(ScoreParseError):
        parse_musicxml(b'<score-timewise version="3.1"></score-timewise>')
    with pytest.raises(MalformedScoreError):
        parse_musicxml(b'PK\x03\x04 not a zip')


def test_chordify_single_chord():
    """Test chordify() on a whole-note C major chord."""
    seq = chordify(parse_musicxml(chord_score([C_MAJOR])))
    assert seq.events == (ChordEvent(0, 1, normal_order([0, 4, 7])),)


def test_chordify_two_parts():
    """Sustained C4 against E4 then F4 gives [0,4] then [0,5]."""
    seq = chordify(parse_musicxml(two_part_score()))
    assert [event.pcset.pcs for event in seq] == [(0, 4), (0, 5)]


def test_chordify_voices_in_one_part():
    """Two voices of one part are sliced like two parts."""
    document = score([measure(1, note('C4', 4, voice=1), backup(4),
                              note('E4', 2, voice=2), note('F4', 2, voice=2),
                              divisions=1)])
    doc = parse_musicxml(document)
    assert len(doc.parts) == 2
    assert [event.pcset.pcs for event in chordify(doc)] == [(0, 4), (0, 5)]


def test_chordify_drops_rests():
    """Rest slices are not chord events."""
    document = score([measure(1, note('C4', 1), rest(1), note('D4', 1),
                              rest(1), divisions=1)])
    seq = chordify(parse_musicxml(document))
    assert [event.pcset.pcs for event in seq] == [(0,), (2,)]


def test_chordify_merge_repeats():
    """Repeated chords merge unless keep-repeats is asked for."""
    document = score([measure(1, chord(C_MAJOR, 2), chord(C_MAJOR, 2),
                              divisions=1),
                      measure(2, chord(['D4', 'F4', 'A4'], 4))])
    merged = chordify(parse_musicxml(document))
    assert [event.bar for event in merged] == [1, 2]
    assert merged.n_raw_slices == 3
    raw = chordify(parse_musicxml(document), merge_repeats=False)
    assert len(raw) == 3
    assert [event.index for event in raw] == [0, 1, 2]
    for first, second in zip(merged.events[:-1], merged.events[1:]):
        assert first.pcset != second.pcset


def test_chordify_ties_sustain():
    """A tied note is one sounding note, the tie point is no boundary."""
    upper = [measure(1, note('C4', 2, tie='start'), note('C4', 2, tie='stop'),
                     divisions=1)]
    lower = [measure(1, note('E4', 4), divisions=1)]
    seq = chordify(parse_musicxml(score(upper, lower)), merge_repeats=False)
    assert len(seq) == 1
    assert seq.n_raw_slices == 1


def test_chordify_bars():
    """A slice belongs to the bar holding its onset."""
    seq = chordify(parse_musicxml(chord_score([C_MAJOR, ['D4', 'F4', 'A4'],
                                               C_MAJOR])))
    assert [event.bar for event in seq] == [1, 2, 3]


def test_grace_notes_ignored(caplog):
    """Grace notes are skipped with a warning."""
    document = score([measure(1, note('B3', 1, grace=True), note('C4', 4),
                              divisions=1)])
    with caplog.at_level(logging.WARNING):
        seq = chordify(parse_musicxml(document))
    assert [event.pcset.pcs for event in seq] == [(0,)]
    assert "grace notes" in caplog.text


def test_ornaments_warned(caplog):
    """Unsupported ornaments are logged and the note is kept."""
    document = score([measure(1, note('C4', 4, ornament='trill-mark'),
                              divisions=1)])
    with caplog.at_level(logging.WARNING):
        seq = chordify(parse_musicxml(document))
    assert len(seq) == 1
    assert "trill-mark" in caplog.text


def test_chordify_deterministic():
    """Identical bytes give identical chord sequences."""
    document = two_part_score()
    assert chordify(parse_musicxml(document)) == chordify(parse_musicxml(document))


def test_load_score_files(tmp_path):
    """Test load_score() on plain and compressed files."""
    document = chord_score([C_MAJOR, ['D4', 'F4', 'A4']])
    plain = write(tmp_path / 'score.xml', document)
    compressed = write(tmp_path / 'score.mxl', mxl(document))
    assert ingest(plain) == ingest(compressed)
    assert load_score(compressed).n_events == 2

    with pytest.raises(FileNotFoundError):
        load_score(tmp_path / 'missing.xml')
    with pytest.raises(ValueError):
        load_score(write(tmp_path / 'score.mid', document))


def test_to_records():
    """Test ChordSequence.to_records()."""
    seq = chordify(parse_musicxml(chord_score([C_MAJOR])))
    assert seq.to_records() == [{'index': 0, 'bar': 1, 'pcset': [0, 4, 7]}]
