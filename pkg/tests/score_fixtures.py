"""Small MusicXML documents written by hand for the tests."""
import io
import zipfile

STEPS = {'C', 'D', 'E', 'F', 'G', 'A', 'B'}


def _pitch(name):
    """'C4', 'F#3', 'Bb4' as a MusicXML <pitch> element."""
    step, rest = name[0], name[1:]
    assert step in STEPS, name
    alter = rest.count('#') - rest.count('b')
    octave = rest.lstrip('#b')
    alter_xml = f"<alter>{alter}</alter>" if alter else ""
    return f"<pitch><step>{step}</step>{alter_xml}<octave>{octave}</octave></pitch>"


def note(pitch, duration, chord=False, voice=None, tie=None, grace=False,
         ornament=None):
    """One <note>; tie is 'start', 'stop' or 'both'."""
    parts = ['<note>']
    if grace:
        parts.append('<grace/>')
    if chord:
        parts.append('<chord/>')
    parts.append(_pitch(pitch))
    if not grace:
        parts.append(f"<duration>{duration}</duration>")
    if tie in ('stop', 'both'):
        parts.append('<tie type="stop"/>')
    if tie in ('start', 'both'):
        parts.append('<tie type="start"/>')
    if voice is not None:
        parts.append(f"<voice>{voice}</voice>")
    if ornament:
        parts.append(f"<notations><ornaments><{ornament}/></ornaments></notations>")
    parts.append('</note>')
    return ''.join(parts)


def chord(pitches, duration, voice=None, tie=None):
    """Notes of one chord, the first one carrying the time step."""
    return ''.join(note(pitch, duration, chord=idx > 0, voice=voice, tie=tie)
                   for idx, pitch in enumerate(pitches))


def rest(duration, voice=None):
    voice_xml = f"<voice>{voice}</voice>" if voice is not None else ""
    return f"<note><rest/><duration>{duration}</duration>{voice_xml}</note>"


def backup(duration):
    return f"<backup><duration>{duration}</duration></backup>"


def measure(number, *items, divisions=None):
    attributes = ""
    if divisions is not None:
        attributes = f"<attributes><divisions>{divisions}</divisions></attributes>"
    return f'<measure number="{number}">{attributes}{"".join(items)}</measure>'


def score(*parts, title='fixture'):
    """score-partwise document; each part is a list of measures."""
    part_list = ''.join(f'<score-part id="P{idx}"><part-name>P{idx}</part-name>'
                        '</score-part>' for idx in range(1, len(parts) + 1))
    body = ''.join(f'<part id="P{idx}">{"".join(measures)}</part>'
                   for idx, measures in enumerate(parts, start=1))
    return ('<?xml version="1.0" encoding="UTF-8"?>'
            '<score-partwise version="3.1">'
            f'<work><work-title>{title}</work-title></work>'
            f'<part-list>{part_list}</part-list>{body}</score-partwise>'
            ).encode('utf-8')


def chord_score(chords, beats=4, title='fixture'):
    """One part, one chord per bar; None is a bar of rest."""
    measures = []
    for number, pitches in enumerate(chords, start=1):
        item = rest(beats) if pitches is None else chord(pitches, beats)
        measures.append(measure(number, item,
                                divisions=1 if number == 1 else None))
    return score(measures, title=title)


def mxl(document, name='score.xml'):
    """Wrap a MusicXML document in a compressed .mxl container."""
    container = ('<?xml version="1.0" encoding="UTF-8"?><container>'
                 f'<rootfiles><rootfile full-path="{name}" media-type='
                 '"application/vnd.recordare.musicxml+xml"/></rootfiles>'
                 '</container>')
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, 'w') as archive:
        archive.writestr('META-INF/container.xml', container)
        archive.writestr(name, document)
    return buffer.getvalue()


C_MAJOR = ['C4', 'E4', 'G4']
F_MAJOR = ['F3', 'A3', 'C4']
G_MAJOR = ['G3', 'B3', 'D4']
G_SEVENTH = ['G3', 'B3', 'D4', 'F4']
A_MINOR = ['A3', 'C4', 'E4']
D_MINOR = ['D4', 'F4', 'A4']

# ten bars in C, C is the most visited chord
CADENCES = [C_MAJOR, G_MAJOR, C_MAJOR, F_MAJOR, C_MAJOR, G_MAJOR, C_MAJOR,
            F_MAJOR, C_MAJOR, G_MAJOR]


def write(path, document):
    with open(path, 'wb') as file:
        file.write(document)
    return str(path)
