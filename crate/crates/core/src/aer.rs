//! Address-event readout of per-step spike maps.
//!
//! Within a step, arbitration grants rows in ascending order and columns in
//! ascending order inside a row. Handshake timing is not modeled, only the
//! resulting event order.
//!
//! On-wire format: the magic `AER1`, then 9-byte little-endian records
//! `u32 step, u16 row, u16 col, u8 kind`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"AER1";
const RECORD_LEN: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Amplified = 0,
    Predicted = 1,
}

impl EventKind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(EventKind::Amplified),
            1 => Some(EventKind::Predicted),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Amplified => "AMPLIFIED",
            EventKind::Predicted => "PREDICTED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AerEvent {
    pub step: u32,
    pub row: u16,
    pub col: u16,
    pub kind: EventKind,
}

/// One event per asserted cell, ordered by step, row, column.
pub fn aer_encode(maps: &[Grid<bool>], kind: EventKind) -> Vec<AerEvent> {
    let mut out = Vec::new();
    for (step, grid) in maps.iter().enumerate() {
        for (row, col, &on) in grid.iter_indexed() {
            if on {
                out.push(AerEvent {
                    step: step as u32,
                    row: row as u16,
                    col: col as u16,
                    kind,
                });
            }
        }
    }
    out
}

/// Rebuilds `steps` square `n × n` grids, rejecting any event whose
/// address or step falls outside them.
pub fn aer_decode(events: &[AerEvent], n: usize, steps: usize) -> Result<Vec<Grid<bool>>> {
    let mut out = vec![Grid::new(n, n); steps];
    for e in events {
        let (step, row, col) = (e.step as usize, usize::from(e.row), usize::from(e.col));
        if row >= n || col >= n || step >= steps {
            return Err(Error::CorruptStream(format!(
                "event (step {step}, row {row}, col {col}) outside {n}x{n}x{steps}"
            )));
        }
        out[step][(row, col)] = true;
    }
    Ok(out)
}

/// Merges streams and restores canonical `(step, row, col, kind)` order.
pub fn merge(streams: impl IntoIterator<Item = Vec<AerEvent>>) -> Vec<AerEvent> {
    let mut all: Vec<AerEvent> = streams.into_iter().flatten().collect();
    all.sort_unstable();
    all
}

pub fn of_kind(events: &[AerEvent], kind: EventKind) -> Vec<AerEvent> {
    events.iter().copied().filter(|e| e.kind == kind).collect()
}

pub fn to_bytes(events: &[AerEvent]) -> Vec<u8> {
    let mut out = Vec::with_capacity(MAGIC.len() + events.len() * RECORD_LEN);
    out.extend_from_slice(MAGIC);
    for e in events {
        out.extend_from_slice(&e.step.to_le_bytes());
        out.extend_from_slice(&e.row.to_le_bytes());
        out.extend_from_slice(&e.col.to_le_bytes());
        out.push(e.kind as u8);
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Vec<AerEvent>> {
    let body = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| Error::CorruptStream("missing AER1 magic".into()))?;
    if body.len() % RECORD_LEN != 0 {
        return Err(Error::CorruptStream(format!(
            "{} trailing bytes after last record",
            body.len() % RECORD_LEN
        )));
    }
    body.chunks_exact(RECORD_LEN)
        .map(|r| {
            let kind = EventKind::from_byte(r[8])
                .ok_or_else(|| Error::CorruptStream(format!("unknown event kind {}", r[8])))?;
            Ok(AerEvent {
                step: u32::from_le_bytes([r[0], r[1], r[2], r[3]]),
                row: u16::from_le_bytes([r[4], r[5]]),
                col: u16::from_le_bytes([r[6], r[7]]),
                kind,
            })
        })
        .collect()
}

pub fn write_aer(path: &Path, events: &[AerEvent]) -> Result<()> {
    fs::write(path, to_bytes(events)).map_err(|e| Error::io(path, e))
}

pub fn read_aer(path: &Path) -> Result<Vec<AerEvent>> {
    from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Human-readable mirror: `step,row,col,kind`.
pub fn to_csv(events: &[AerEvent]) -> String {
    let mut out = String::from("step,row,col,kind\n");
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.step, e.row, e.col, e.kind.name());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(step: u32, row: u16, col: u16) -> AerEvent {
        AerEvent {
            step,
            row,
            col,
            kind: EventKind::Predicted,
        }
    }

    #[test]
    fn single_spike() {
        let mut g = Grid::new(4, 4);
        g[(2, 3)] = true;
        assert_eq!(aer_encode(&[g], EventKind::Predicted), vec![ev(0, 2, 3)]);
    }

    #[test]
    fn row_major_arbitration() {
        let mut g = Grid::new(8, 8);
        g[(1, 5)] = true;
        g[(0, 2)] = true;
        assert_eq!(
            aer_encode(&[g], EventKind::Predicted),
            vec![ev(0, 0, 2), ev(0, 1, 5)]
        );
    }

    #[test]
    fn empty_maps_and_stream() {
        assert!(aer_encode(&[Grid::new(3, 3), Grid::new(3, 3)], EventKind::Amplified).is_empty());
        let grids = aer_decode(&[], 3, 2).unwrap();
        assert_eq!(grids, vec![Grid::new(3, 3); 2]);
    }

    #[test]
    fn out_of_range_is_corrupt() {
        assert!(matches!(
            aer_decode(&[ev(0, 0, 4)], 4, 1),
            Err(Error::CorruptStream(_))
        ));
        assert!(matches!(
            aer_decode(&[ev(0, 4, 0)], 4, 1),
            Err(Error::CorruptStream(_))
        ));
        assert!(matches!(
            aer_decode(&[ev(1, 0, 0)], 4, 1),
            Err(Error::CorruptStream(_))
        ));
    }

    #[test]
    fn wire_format_layout() {
        let bytes = to_bytes(&[AerEvent {
            step: 258,
            row: 3,
            col: 513,
            kind: EventKind::Predicted,
        }]);
        assert_eq!(bytes, b"AER1\x02\x01\x00\x00\x03\x00\x01\x02\x01");
        assert_eq!(from_bytes(&bytes).unwrap()[0].col, 513);
    }

    #[test]
    fn malformed_wire_rejected() {
        assert!(from_bytes(b"AER0").is_err());
        assert!(from_bytes(b"AER1\x00\x00").is_err());
        assert!(from_bytes(b"AER1\x00\x00\x00\x00\x00\x00\x00\x00\x07").is_err());
        assert_eq!(from_bytes(b"AER1").unwrap(), vec![]);
    }

    #[test]
    fn merge_orders_by_kind_within_cell() {
        let a = vec![AerEvent {
            kind: EventKind::Predicted,
            ..ev(0, 1, 1)
        }];
        let b = vec![
            AerEvent {
                kind: EventKind::Amplified,
                ..ev(0, 1, 1)
            },
            ev(0, 0, 9),
        ];
        let m = merge([a, b]);
        assert_eq!(m[0], ev(0, 0, 9));
        assert_eq!(m[1].kind, EventKind::Amplified);
        assert_eq!(to_csv(&m[..1]), "step,row,col,kind\n0,0,9,PREDICTED\n");
    }
}
