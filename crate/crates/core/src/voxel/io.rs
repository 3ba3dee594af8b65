//! `VXG1` encoding: little-endian header followed by run-length pairs.

use super::{OccupancyGrid, VoxelState};
use crate::geometry::Vec3;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"VXG1";
const HEADER_LEN: usize = 4 + 8 + 24 + 12;
const RUN_LEN: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridParseError {
    #[error("bad magic, expected VXG1")]
    BadMagic,
    #[error("header truncated: {0} bytes")]
    TruncatedHeader(usize),
    #[error("malformed header: {0}")]
    MalformedHeader(&'static str),
    #[error("payload truncated: {covered} of {expected} voxels covered")]
    TruncatedPayload { covered: usize, expected: usize },
    #[error("runs cover more than {expected} voxels")]
    Surplus { expected: usize },
    #[error("invalid voxel state code {0}")]
    InvalidState(u8),
    #[error("non-canonical run encoding at byte {0}")]
    NonCanonical(usize),
}

pub(super) fn encode(grid: &OccupancyGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&grid.resolution.to_le_bytes());
    for a in 0..3 {
        out.extend_from_slice(&grid.origin[a].to_le_bytes());
    }
    for a in 0..3 {
        out.extend_from_slice(&(grid.dims[a] as u32).to_le_bytes());
    }
    let mut iter = grid.states.iter();
    let Some(&first) = iter.next() else {
        return out;
    };
    let mut state = first;
    let mut count: u32 = 1;
    for &s in iter {
        if s == state && count < u32::MAX {
            count += 1;
        } else {
            out.push(state as u8);
            out.extend_from_slice(&count.to_le_bytes());
            state = s;
            count = 1;
        }
    }
    out.push(state as u8);
    out.extend_from_slice(&count.to_le_bytes());
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("slice of 8"))
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("slice of 4"))
}

pub(super) fn decode(bytes: &[u8]) -> Result<OccupancyGrid, GridParseError> {
    if bytes.len() < 4 {
        return Err(GridParseError::TruncatedHeader(bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err(GridParseError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(GridParseError::TruncatedHeader(bytes.len()));
    }
    let resolution = f64_at(bytes, 4);
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(GridParseError::MalformedHeader("resolution must be positive"));
    }
    let origin = Vec3::new(f64_at(bytes, 12), f64_at(bytes, 20), f64_at(bytes, 28));
    if !origin.iter().all(|c| c.is_finite()) {
        return Err(GridParseError::MalformedHeader("origin must be finite"));
    }
    let dims = [
        u32_at(bytes, 36) as usize,
        u32_at(bytes, 40) as usize,
        u32_at(bytes, 44) as usize,
    ];
    if dims.contains(&0) {
        return Err(GridParseError::MalformedHeader("zero dimension"));
    }
    let expected = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(GridParseError::MalformedHeader("dimensions overflow"))?;

    let mut states = Vec::with_capacity(expected.min(1 << 28));
    let mut at = HEADER_LEN;
    let mut prev: Option<(VoxelState, u32)> = None;
    while states.len() < expected {
        if bytes.len() < at + RUN_LEN {
            return Err(GridParseError::TruncatedPayload {
                covered: states.len(),
                expected,
            });
        }
        let code = bytes[at];
        let state = VoxelState::from_code(code).ok_or(GridParseError::InvalidState(code))?;
        let count = u32_at(bytes, at + 1);
        if count == 0 {
            return Err(GridParseError::NonCanonical(at));
        }
        if let Some((ps, pc)) = prev {
            if ps == state && pc != u32::MAX {
                return Err(GridParseError::NonCanonical(at));
            }
        }
        if states.len() + count as usize > expected {
            return Err(GridParseError::Surplus { expected });
        }
        states.extend(std::iter::repeat_n(state, count as usize));
        prev = Some((state, count));
        at += RUN_LEN;
    }
    if at != bytes.len() {
        return Err(GridParseError::Surplus { expected });
    }
    Ok(OccupancyGrid {
        resolution,
        origin,
        dims,
        states,
    })
}
