"""
.. module:: score_ingest
   :platform: Unix
   :synopsis: Read MusicXML (plain or .mxl) scores and chordify them into
              a sequence of normal-ordered pitch-class sets.

Times are rational numbers of quarter-note beats from the start of the
score. Written pitch is used throughout.
"""
import bisect
import io
import logging
import os
import re
import xml.etree.ElementTree as ET
import zipfile
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from .pcset_core import TET, PitchClassSet, normal_order

logger = logging.getLogger(__name__)

MUSICXML_MIME_TYPE = 'application/vnd.recordare.musicxml+xml'
SCORE_SUFFIXES = ('.xml', '.musicxml', '.mxl')

STEP_PITCH_CLASS = {'C': 0, 'D': 2, 'E': 4, 'F': 5, 'G': 7, 'A': 9, 'B': 11}


class ScoreParseError(ValueError):
    """Base class for score parsing problems."""


class MalformedScoreError(ScoreParseError):
    """The document is not readable MusicXML."""


class EmptyScoreError(ScoreParseError):
    """The document holds no parts, no notes or only rests."""


@dataclass(frozen=True)
class NoteEvent:
    """Notes of one stream sounding together from onset for duration."""

    onset: Fraction
    duration: Fraction
    pitches: frozenset
    tie_continuation: bool = False

    @property
    def offset(self):
        return self.onset + self.duration


NoteStream = namedtuple('NoteStream', ['part', 'voice', 'events'])


@dataclass
class ScoreDocument:
    """Parsed score: one stream per (part, voice) and the measure map."""

    parts: List[NoteStream]
    measures: List[Tuple[Fraction, int]]
    title: str = ''
    movement: str = ''
    # per pitch tie starts, keyed by (stream index, event index)
    tie_starts: dict = field(default_factory=dict)

    def bar_at(self, onset):
        """Bar number of the measure containing onset."""
        starts = [start for start, _ in self.measures]
        idx = bisect.bisect_right(starts, onset) - 1
        return self.measures[max(idx, 0)][1]

    @property
    def n_events(self):
        return sum(len(stream.events) for stream in self.parts)


@dataclass(frozen=True)
class ChordEvent:
    index: int
    bar: int
    pcset: PitchClassSet


@dataclass(frozen=True)
class ChordSequence:
    """Time-ordered chord events of one score."""

    events: Tuple[ChordEvent, ...]
    title: str = ''
    movement: str = ''
    n_raw_slices: int = 0
    merge_repeats: bool = True

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def pcsets(self):
        return [event.pcset for event in self.events]

    def to_records(self):
        """JSON-ready rows (index, bar, pcset)."""
        return [{'index': event.index, 'bar': event.bar,
                 'pcset': event.pcset.as_list()} for event in self.events]


def _local_tag(element):
    """Tag without any xml namespace."""
    return element.tag.rsplit('}', 1)[-1]


def _read_container(document):
    """Return the MusicXML bytes stored in an .mxl container."""
    try:
        mxlzip = zipfile.ZipFile(io.BytesIO(document))
    except zipfile.BadZipFile as exception:
        raise MalformedScoreError(f"bad .mxl container: {exception}")

    namelist = mxlzip.namelist()
    score_name = ''
    if 'META-INF/container.xml' in namelist:
        try:
            container = ET.fromstring(mxlzip.read('META-INF/container.xml'))
        except ET.ParseError as exception:
            raise MalformedScoreError(f"malformed XML in container: {exception}")
        for rootfile in container.iter():
            if _local_tag(rootfile) != 'rootfile':
                continue
            media_type = rootfile.attrib.get('media-type', MUSICXML_MIME_TYPE)
            if media_type == MUSICXML_MIME_TYPE:
                score_name = rootfile.attrib.get('full-path', '')
                break
    else:
        candidates = [name for name in namelist
                      if name.endswith(('.xml', '.musicxml'))
                      and not name.startswith('META-INF')]
        if len(candidates) == 1:
            score_name = candidates[0]

    if not score_name or score_name not in namelist:
        raise MalformedScoreError(
            "bad .mxl container: unable to locate the score file")

    return mxlzip.read(score_name)


def _duration(xml_element, divisions):
    text = xml_element.findtext('duration')
    if text is None:
        return None
    return Fraction(Fraction(text.strip()), divisions)


def _midi_pitch(xml_pitch):
    step = xml_pitch.findtext('step', '').strip()
    if step not in STEP_PITCH_CLASS:
        raise MalformedScoreError(f"unable to parse pitch step {step!r}")
    alter = float(xml_pitch.findtext('alter', '0') or 0)
    if alter != int(alter):
        logger.warning("_midi_pitch:\tmicrotonal alter %s rounded", alter)
    octave = int(xml_pitch.findtext('octave', '4'))
    return (octave + 1) * 12 + STEP_PITCH_CLASS[step] + int(round(alter))


def _bar_number(xml_measure, ordinal):
    """Leading integer of the measure number, at least 1."""
    match = re.match(r'\s*(\d+)', xml_measure.attrib.get('number', ''))
    if match is None:
        return ordinal
    return max(int(match.group(1)), 1)


class _PartReader:
    """Walks the measures of one <part>, keeping the time position."""

    def __init__(self, xml_part, part_id):
        self.xml_part = xml_part
        self.part_id = part_id
        self.divisions = 1
        self.position = Fraction(0)
        self.chord_onset = Fraction(0)
        self.streams = {}
        self.tie_starts = {}
        self.measures = []
        self.warned = set()

    def _warn_once(self, what):
        if what not in self.warned:
            self.warned.add(what)
            logger.warning("parse_musicxml:\tpart %s: ignoring %s",
                           self.part_id, what)

    def read(self):
        for ordinal, xml_measure in enumerate(self.xml_part.findall('measure'),
                                              start=1):
            start = self.position
            furthest = self.position
            for child in xml_measure:
                tag = _local_tag(child)
                if tag == 'attributes':
                    divisions = child.findtext('divisions')
                    if divisions is not None:
                        self.divisions = int(divisions)
                elif tag == 'backup':
                    self.position -= _duration(child, self.divisions) or 0
                elif tag == 'forward':
                    self.position += _duration(child, self.divisions) or 0
                elif tag == 'note':
                    self._read_note(child)
                furthest = max(furthest, self.position)
            self.measures.append((start, _bar_number(xml_measure, ordinal)))
            self.position = furthest

        return self

    def _read_note(self, xml_note):
        if xml_note.find('grace') is not None:
            self._warn_once('grace notes')
            return
        if xml_note.find('cue') is not None:
            self._warn_once('cue notes')
            return
        ornaments = xml_note.find('notations/ornaments')
        if ornaments is not None:
            unsupported = [_local_tag(orn) for orn in ornaments
                           if _local_tag(orn) != 'tremolo']
            if unsupported:
                self._warn_once('ornaments ' + ', '.join(sorted(unsupported)))

        duration = _duration(xml_note, self.divisions)
        if duration is None or duration <= 0:
            self._warn_once('notes without a positive duration')
            return

        in_chord = xml_note.find('chord') is not None
        if in_chord:
            onset = self.chord_onset
        else:
            onset = self.position
            self.chord_onset = onset
            self.position += duration

        xml_pitch = xml_note.find('pitch')
        if xml_note.find('rest') is not None or xml_pitch is None:
            if xml_note.find('unpitched') is not None:
                self._warn_once('unpitched notes')
            return

        pitch = _midi_pitch(xml_pitch)
        tie_types = {tie.attrib.get('type') for tie in xml_note.findall('tie')}
        continuation = 'stop' in tie_types
        voice = (xml_note.findtext('voice') or '1').strip()
        events = self.streams.setdefault(voice, [])

        previous = events[-1] if events else None
        if (in_chord and previous is not None and previous.onset == onset
                and previous.duration == duration
                and previous.tie_continuation == continuation):
            events[-1] = NoteEvent(onset, duration,
                                   previous.pitches | {pitch}, continuation)
        else:
            events.append(NoteEvent(onset, duration, frozenset([pitch]),
                                    continuation))
        if 'start' in tie_types:
            key = (voice, len(events) - 1)
            self.tie_starts.setdefault(key, set()).add(pitch)


def parse_musicxml(document: bytes) -> ScoreDocument:
    """
    Parse a partwise MusicXML document, plain or .mxl compressed.

    Raises
    ------
    MalformedScoreError
        The bytes are not well-formed MusicXML.
    EmptyScoreError
        The score has no parts or no sounding notes.
    """
    if document[:2] == b'PK':
        document = _read_container(document)
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exception:
        raise MalformedScoreError(f"malformed XML: {exception}")

    root_tag = _local_tag(root)
    if root_tag != 'score-partwise':
        raise MalformedScoreError(
            f"malformed XML: expected score-partwise, found {root_tag}")

    xml_parts = root.findall('part')
    if not xml_parts:
        raise EmptyScoreError("no parts")

    streams, tie_starts, measures = [], {}, None
    for xml_part in xml_parts:
        part_id = xml_part.attrib.get('id', str(len(streams)))
        reader = _PartReader(xml_part, part_id).read()
        if measures is None:
            measures = reader.measures
        for voice in sorted(reader.streams):
            stream_idx = len(streams)
            streams.append(NoteStream(part_id, voice, reader.streams[voice]))
            for (tie_voice, event_idx), pitches in reader.tie_starts.items():
                if tie_voice == voice:
                    tie_starts[(stream_idx, event_idx)] = pitches

    if not any(stream.events for stream in streams):
        raise EmptyScoreError("no notes")
    if not measures:
        measures = [(Fraction(0), 1)]

    title = root.findtext('work/work-title') or ''
    movement = root.findtext('movement-title') or ''
    score = ScoreDocument(streams, measures, title.strip(), movement.strip(),
                          tie_starts)
    logger.info("parse_musicxml:\t%d streams, %d note events, %d measures",
                len(streams), score.n_events, len(measures))

    return score


def load_score(path) -> ScoreDocument:
    """Read and parse a score file (.xml, .musicxml or .mxl)."""
    path = str(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"load_score:\tscore file {path} does not exist")
    if not path.lower().endswith(SCORE_SUFFIXES):
        raise ValueError(f"load_score:\tunsupported score format {path}, "
                         f"expected one of {SCORE_SUFFIXES}")
    with open(path, 'rb') as file:
        document = file.read()

    return parse_musicxml(document)


def _sounding_notes(score):
    """
    Flatten streams to (onset, offset, pitch) notes, joining ties.

    A tied continuation extends the note it continues so that the tie
    point is not a slice boundary of its own.
    """
    notes = []
    for stream_idx, stream in enumerate(score.parts):
        open_ties = {}
        for event_idx, event in enumerate(stream.events):
            started = score.tie_starts.get((stream_idx, event_idx), set())
            for pitch in sorted(event.pitches):
                tied = open_ties.pop(pitch, None)
                if (event.tie_continuation and tied is not None
                        and notes[tied][1] == event.onset):
                    onset = notes[tied][0]
                    notes[tied] = (onset, event.offset, pitch)
                    note_idx = tied
                else:
                    notes.append((event.onset, event.offset, pitch))
                    note_idx = len(notes) - 1
                if pitch in started:
                    open_ties[pitch] = note_idx

    return sorted(notes)


def chordify(score: ScoreDocument, merge_repeats: bool = True,
             tet: int = TET) -> ChordSequence:
    """
    Slice the score at every onset and offset into a chord sequence.

    Each slice's sounding pitches reduce to a normal-ordered set; rest
    slices are dropped. With ``merge_repeats`` consecutive slices with
    the same set become one event.
    """
    notes = _sounding_notes(score)
    boundaries = sorted({t for onset, offset, _ in notes
                         for t in (onset, offset)})

    events, raw_slices = [], 0
    active, next_note = [], 0
    for start, end in zip(boundaries[:-1], boundaries[1:]):
        while next_note < len(notes) and notes[next_note][0] <= start:
            active.append(notes[next_note])
            next_note += 1
        active = [note for note in active if note[1] > start]
        if not active:
            continue
        raw_slices += 1
        pcset = normal_order([pitch for _, _, pitch in active], tet)
        if merge_repeats and events and events[-1].pcset == pcset:
            continue
        events.append(ChordEvent(len(events), score.bar_at(start), pcset))

    if not events:
        raise EmptyScoreError("all-rest score")

    logger.info("chordify:\t%d chord events from %d sounding slices",
                len(events), raw_slices)

    return ChordSequence(tuple(events), score.title, score.movement,
                         raw_slices, merge_repeats)


def ingest(path, merge_repeats=True, tet=TET) -> ChordSequence:
    """Load a score file and chordify it."""
    return chordify(load_score(path), merge_repeats=merge_repeats, tet=tet)
