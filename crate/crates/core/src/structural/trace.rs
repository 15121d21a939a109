use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::raster::{BinaryImage, NEIGHBORS_8};

/// Moves allowed while following the headline. None of them goes rightward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    West,
    NorthWest,
    SouthWest,
    North,
}

impl Direction {
    /// `(Δrow, Δcol)`.
    pub const fn offset(self) -> (isize, isize) {
        match self {
            Direction::West => (0, -1),
            Direction::NorthWest => (-1, -1),
            Direction::SouthWest => (1, -1),
            Direction::North => (-1, 0),
        }
    }

    /// Lower rank is tried first.
    pub const fn rank(self) -> u8 {
        match self {
            Direction::West => 1,
            Direction::NorthWest => 2,
            Direction::SouthWest => 3,
            Direction::North => 4,
        }
    }
}

/// Candidate moves in the order they are tried.
pub const PRIORITY_MASK: [Direction; 4] = [
    Direction::West,
    Direction::NorthWest,
    Direction::SouthWest,
    Direction::North,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Last pixel has exactly one foreground neighbor.
    OpenEnd,
    /// No move was possible from the start pixel.
    NoMove,
    /// The stroke continues in a forbidden direction and leads back to the trace.
    Loop,
    /// The stroke continues, but only in directions the mask forbids.
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub points: Vec<(usize, usize)>,
    pub termination: Termination,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inclusive column range covered by the trace.
    pub fn col_span(&self) -> (usize, usize) {
        let lo = self.points.iter().map(|p| p.1).min().unwrap_or(0);
        let hi = self.points.iter().map(|p| p.1).max().unwrap_or(0);
        (lo, hi)
    }
}

/// Follows the stroke that starts at the rightmost foreground pixel (topmost on ties),
/// always taking the best-ranked unvisited move of [`PRIORITY_MASK`]. At most
/// `max_consecutive_up` north moves may follow each other.
pub fn trace_from_rightmost(img: &BinaryImage, max_consecutive_up: usize) -> Result<Trace> {
    let bbox = img.bounding_box()?;
    let start_col = bbox.col_max;
    let start_row = (0..img.height())
        .find(|&r| img.get(r, start_col))
        .ok_or(Error::EmptyImage)?;

    let mut points = vec![(start_row, start_col)];
    let mut visited = HashSet::from([(start_row, start_col)]);
    let mut ups = 0usize;
    let (mut r, mut c) = (start_row as isize, start_col as isize);
    loop {
        let mut saw_visited = false;
        let mut step = None;
        for dir in PRIORITY_MASK {
            if dir == Direction::North && ups >= max_consecutive_up {
                continue;
            }
            let (dr, dc) = dir.offset();
            let (nr, nc) = (r + dr, c + dc);
            if !img.at(nr, nc) {
                continue;
            }
            if visited.contains(&(nr as usize, nc as usize)) {
                saw_visited = true;
                continue;
            }
            step = Some((dir, nr, nc));
            break;
        }
        let Some((dir, nr, nc)) = step else {
            let last = (r as usize, c as usize);
            let termination = if points.len() == 1 {
                Termination::NoMove
            } else if img.neighbors(last.0, last.1) == 1 {
                Termination::OpenEnd
            } else if saw_visited || closes_loop(img, &points, &visited) {
                Termination::Loop
            } else {
                Termination::Blocked
            };
            return Ok(Trace {
                points,
                termination,
            });
        };
        ups = if dir == Direction::North { ups + 1 } else { 0 };
        r = nr;
        c = nc;
        visited.insert((r as usize, c as usize));
        points.push((r as usize, c as usize));
    }
}

/// Flood-fills from the last trace pixel through non-trace foreground and reports
/// whether the fill touches the trace again away from its final few pixels.
fn closes_loop(
    img: &BinaryImage,
    points: &[(usize, usize)],
    visited: &HashSet<(usize, usize)>,
) -> bool {
    const TAIL: usize = 3;
    let tail: HashSet<(usize, usize)> = points.iter().rev().take(TAIL).copied().collect();
    let Some(&last) = points.last() else {
        return false;
    };
    let mut seen = HashSet::from([last]);
    let mut stack = vec![last];
    while let Some((r, c)) = stack.pop() {
        for (dr, dc) in NEIGHBORS_8 {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if !img.at(nr, nc) {
                continue;
            }
            let p = (nr as usize, nc as usize);
            if visited.contains(&p) {
                if (r, c) != last && !tail.contains(&p) {
                    return true;
                }
                continue;
            }
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    false
}
