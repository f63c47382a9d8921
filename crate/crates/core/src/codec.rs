//! Text diagram and Online Sequencer renderings of a pattern.
//!
//! Diagram layout:
//!
//! ```text
//! Suggested tempo: 121
//! \t|-------------X--|----------X-----|   hi-hat
//! \t|--X-X-X--X-X----|X-----------X---|   other percussion
//! \t|--X-X---X------X|X--X-----------X|   kick
//! \t|-----X--XXXXXX--|X--X-XXXX-X--XX-|   snare
//! ```

use std::fmt::Write as _;

use crate::clustering::Role;
use crate::consensus::{ConsensusPattern, PATTERN_STEPS};
use crate::error::{Error, Result};

pub const DEFAULT_SEQUENCE_ID: u64 = 319_887;
const TEMPO_PREFIX: &str = "Suggested tempo: ";
const SEQUENCER_PREFIX: &str = "Online Sequencer";

/// Top-to-bottom row order of the diagram and emission order of the sequencer string.
pub const DISPLAY_ORDER: [Role; 4] = [Role::Hihat, Role::OtherPercussion, Role::Kick, Role::Snare];

/// Role to drum-kit note name, plus the sequencer's sequence id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencerNoteMap {
    notes: [String; 4],
    pub sequence_id: u64,
}

impl Default for SequencerNoteMap {
    fn default() -> Self {
        Self {
            // Indexed by Role::index: snare, kick, other, hihat.
            notes: ["D4".into(), "C3".into(), "D5".into(), "F#3".into()],
            sequence_id: DEFAULT_SEQUENCE_ID,
        }
    }
}

impl SequencerNoteMap {
    pub fn note(&self, role: Role) -> &str {
        &self.notes[role.index()]
    }

    /// Replace one role's note. The four notes must stay distinct.
    pub fn set_note(&mut self, role: Role, note: &str) -> Result<()> {
        let note = note.trim();
        if note.is_empty() || note.contains(|c: char| c.is_whitespace() || c == ';' || c == ':') {
            return Err(Error::InvalidArgument(format!(
                "invalid note name {note:?}"
            )));
        }
        if Role::ALL.iter().any(|&r| r != role && self.note(r) == note) {
            return Err(Error::InvalidArgument(format!(
                "note {note} is already mapped"
            )));
        }
        self.notes[role.index()] = note.to_string();
        Ok(())
    }

    /// Apply a `role=NOTE` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (role, note) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected role=NOTE, got {spec:?}")))?;
        self.set_note(role.parse()?, note)
    }

    pub fn role_of(&self, note: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|&r| self.note(r) == note)
    }
}

fn render_row(track: &[u8; PATTERN_STEPS]) -> String {
    let mut row = String::with_capacity(PATTERN_STEPS + 3);
    row.push('|');
    for (i, &b) in track.iter().enumerate() {
        row.push(if b != 0 { 'X' } else { '-' });
        if i % 16 == 15 {
            row.push('|');
        }
    }
    row
}

pub fn render_text(pattern: &ConsensusPattern) -> String {
    let mut out = format!("{TEMPO_PREFIX}{}\n", pattern.tempo_bpm);
    for role in DISPLAY_ORDER {
        out.push('\t');
        out.push_str(&render_row(pattern.track(role)));
        out.push('\n');
    }
    out
}

pub fn render_sequencer(pattern: &ConsensusPattern, map: &SequencerNoteMap) -> String {
    let mut out = format!("{SEQUENCER_PREFIX}:{}:", map.sequence_id);
    for role in DISPLAY_ORDER {
        for step in pattern.steps_of(role) {
            let _ = write!(out, "{step} {} 1 2;", map.note(role));
        }
    }
    out.push(':');
    out
}

/// Parse a diagram produced by [`render_text`]. Leading whitespace on rows
/// is ignored; blank lines are skipped.
pub fn parse_text(diagram: &str) -> Result<ConsensusPattern> {
    let mut lines = diagram.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        reason: "empty diagram".into(),
    })?;
    let tempo = header
        .trim()
        .strip_prefix(TEMPO_PREFIX)
        .and_then(|t| t.trim().parse::<u32>().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            reason: format!("expected `{TEMPO_PREFIX}<bpm>`, got {header:?}"),
        })?;

    let mut pattern = ConsensusPattern::empty(tempo);
    let rows: Vec<&str> = lines.collect();
    if rows.len() != DISPLAY_ORDER.len() {
        return Err(Error::Diagram {
            row: rows.len().min(4) + 1,
            column: 0,
            reason: format!("expected 4 pattern rows, found {}", rows.len()),
        });
    }
    for (r, (line, role)) in rows.iter().zip(DISPLAY_ORDER).enumerate() {
        *pattern.track_mut(role) = parse_row(line.trim(), r + 1)?;
    }
    Ok(pattern)
}

fn parse_row(row: &str, row_no: usize) -> Result<[u8; PATTERN_STEPS]> {
    let err = |column: usize, reason: String| Error::Diagram {
        row: row_no,
        column,
        reason,
    };
    let chars: Vec<char> = row.chars().collect();
    let mut track = [0u8; PATTERN_STEPS];
    let mut step = 0;
    let mut bar_len = 0;
    for (i, &c) in chars.iter().enumerate() {
        let column = i + 1;
        match c {
            '|' => {
                if i > 0 && bar_len != 16 {
                    return Err(err(column, format!("bar has {bar_len} steps, expected 16")));
                }
                bar_len = 0;
            }
            'X' | '-' => {
                if i == 0 {
                    return Err(err(column, "row must start with '|'".into()));
                }
                if step >= PATTERN_STEPS {
                    return Err(err(column, "more than 32 steps".into()));
                }
                track[step] = (c == 'X') as u8;
                step += 1;
                bar_len += 1;
            }
            other => return Err(err(column, format!("unknown character {other:?}"))),
        }
    }
    if step != PATTERN_STEPS || bar_len != 0 || chars.last() != Some(&'|') {
        return Err(err(
            chars.len(),
            format!("row has {step} steps, expected 32 ending in '|'"),
        ));
    }
    Ok(track)
}

/// One `<step> <note> 1 2;` entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SequencerEntry {
    pub step: usize,
    pub note: String,
}

/// Parse an Online Sequencer string into its id and entries. Whitespace and
/// line breaks between entries are tolerated.
pub fn parse_sequencer(text: &str) -> Result<(u64, Vec<SequencerEntry>)> {
    let perr = |reason: String| Error::Parse { line: 1, reason };
    let body = text
        .trim()
        .strip_prefix(SEQUENCER_PREFIX)
        .and_then(|r| r.strip_prefix(':'))
        .ok_or_else(|| perr(format!("missing `{SEQUENCER_PREFIX}:` prefix")))?;
    let (id, rest) = body
        .split_once(':')
        .ok_or_else(|| perr("missing sequence id".into()))?;
    let id: u64 = id
        .trim()
        .parse()
        .map_err(|_| perr(format!("bad sequence id {id:?}")))?;
    let rest = rest
        .trim_end()
        .strip_suffix(':')
        .ok_or_else(|| perr("missing terminal ':'".into()))?;

    let mut entries = Vec::new();
    for raw in rest.split(';') {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(perr(format!("malformed entry {raw:?}")));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|_| perr(format!("bad step in {raw:?}")))?;
        if step >= PATTERN_STEPS {
            return Err(perr(format!("step {step} out of range")));
        }
        entries.push(SequencerEntry {
            step,
            note: fields[1].to_string(),
        });
    }
    Ok((id, entries))
}
