use thiserror::Error;

use super::{LtvMap, LtvSegment};

const MAGIC: &[u8; 4] = b"LTVM";
const VERSION: u8 = 1;
const HEADER: usize = 16;
const SEGMENT: usize = 34;
const EDGE: usize = 8;
const GOAL: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LtvParseError {
    #[error("not an LTVM stream")]
    BadMagic,
    #[error("unsupported LTVM version {0}")]
    BadVersion(u8),
    #[error("stream truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("{0} trailing bytes after the last goal")]
    TrailingBytes(usize),
}

/// Size of the encoding of a map with the given counts.
pub fn encoded_len(segments: usize, edges: usize, goals: usize) -> usize {
    HEADER + SEGMENT * segments + EDGE * edges + GOAL * goals
}

/// Little-endian encoding. The header carries the segment and edge counts;
/// goals fill the rest of the stream.
pub fn encode(map: &LtvMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(map.segments.len(), map.edges.len(), map.goals.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, 0, 0, 0]);
    out.extend_from_slice(&(map.segments.len() as u32).to_le_bytes());
    out.extend_from_slice(&(map.edges.len() as u32).to_le_bytes());
    for s in &map.segments {
        out.extend_from_slice(&s.id.to_le_bytes());
        for v in s.center.iter().chain([&s.yaw]).chain(&s.half_extents) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(s.exploration);
        out.push(s.coverage);
    }
    for (a, b) in &map.edges {
        out.extend_from_slice(&a.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
    }
    for g in &map.goals {
        for v in g {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<LtvMap, LtvParseError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(LtvParseError::BadMagic);
    }
    if bytes.len() < HEADER {
        return Err(LtvParseError::Truncated { need: HEADER, have: bytes.len() });
    }
    if bytes[4] != VERSION {
        return Err(LtvParseError::BadVersion(bytes[4]));
    }
    let ns = u32_at(bytes, 8) as usize;
    let ne = u32_at(bytes, 12) as usize;
    let need = (ns as u64) * SEGMENT as u64 + (ne as u64) * EDGE as u64 + HEADER as u64;
    if (bytes.len() as u64) < need {
        return Err(LtvParseError::Truncated { need: need as usize, have: bytes.len() });
    }
    let need = need as usize;
    let rest = bytes.len() - need;
    if rest % GOAL != 0 {
        return Err(LtvParseError::TrailingBytes(rest % GOAL));
    }
    let mut at = HEADER;
    let mut segments = Vec::with_capacity(ns);
    for _ in 0..ns {
        let f = |k: usize| f32_at(bytes, at + 4 + 4 * k);
        segments.push(LtvSegment {
            id: u32_at(bytes, at),
            center: [f(0), f(1), f(2)],
            yaw: f(3),
            half_extents: [f(4), f(5), f(6)],
            exploration: bytes[at + 32],
            coverage: bytes[at + 33],
        });
        at += SEGMENT;
    }
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        edges.push((u32_at(bytes, at), u32_at(bytes, at + 4)));
        at += EDGE;
    }
    let goals = (0..rest / GOAL)
        .map(|i| {
            let o = at + i * GOAL;
            [f32_at(bytes, o), f32_at(bytes, o + 4), f32_at(bytes, o + 8)]
        })
        .collect();
    Ok(LtvMap { segments, edges, goals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> LtvMap {
        LtvMap {
            segments: vec![LtvSegment {
                id: 3,
                center: [1.0, -2.5, 0.25],
                yaw: 0.5,
                half_extents: [4.0, 2.0, 1.5],
                exploration: 17,
                coverage: 0,
            }],
            edges: vec![],
            goals: vec![],
        }
    }

    #[test]
    fn empty_is_header_only() {
        let b = encode(&LtvMap::default());
        assert_eq!(b.len(), 16);
        assert_eq!(decode(&b).unwrap(), LtvMap::default());
    }

    #[test]
    fn one_segment_is_fifty_bytes() {
        let b = encode(&one());
        assert_eq!(b.len(), 50);
        assert_eq!(decode(&b).unwrap(), one());
    }

    #[test]
    fn distinct_errors() {
        let mut m = one();
        m.edges.push((3, 3));
        m.goals.push([1.0, 2.0, 3.0]);
        let b = encode(&m);
        assert_eq!(b.len(), encoded_len(1, 1, 1));
        assert_eq!(decode(b"LTV"), Err(LtvParseError::BadMagic));
        assert_eq!(decode(b"XTVM000000000000"), Err(LtvParseError::BadMagic));
        let mut v = b.clone();
        v[4] = 2;
        assert_eq!(decode(&v), Err(LtvParseError::BadVersion(2)));
        assert!(matches!(decode(&b[..40]), Err(LtvParseError::Truncated { .. })));
        assert!(matches!(decode(&b[..10]), Err(LtvParseError::Truncated { .. })));
        assert_eq!(decode(&b[..b.len() - 1]), Err(LtvParseError::TrailingBytes(11)));
        let mut v = b;
        v.push(9);
        assert_eq!(decode(&v), Err(LtvParseError::TrailingBytes(1)));
    }
}
