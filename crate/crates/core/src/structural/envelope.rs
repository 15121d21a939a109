use std::ops::Range;

use crate::raster::BinaryImage;

/// Longest run of empty columns (or rows) bridged inside an envelope.
pub const MAX_BRIDGED_GAP: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StraightnessReport {
    pub distances: Vec<usize>,
    /// Largest absolute difference between successive distances.
    pub max_step: usize,
    /// Spread between the largest and smallest distance.
    pub drift: usize,
    pub is_near_straight: bool,
}

/// Differential-distance test: a run is near straight when no successive difference
/// exceeds `step_tol` and the total drift stays within `drift_tol`.
pub fn straightness(distances: &[usize], step_tol: usize, drift_tol: usize) -> StraightnessReport {
    let max_step = distances
        .windows(2)
        .map(|w| w[0].abs_diff(w[1]))
        .max()
        .unwrap_or(0);
    let drift = match (distances.iter().max(), distances.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0,
    };
    StraightnessReport {
        distances: distances.to_vec(),
        max_step,
        drift,
        is_near_straight: max_step <= step_tol && drift <= drift_tol,
    }
}

/// Per column, the row of the topmost foreground pixel; `None` marks an empty column.
pub fn upper_envelope(img: &BinaryImage, cols: Range<usize>) -> Vec<Option<usize>> {
    cols.map(|c| (0..img.height()).find(|&r| img.get(r, c)))
        .collect()
}

/// Per row, the distance from the right edge to the rightmost foreground pixel; `None`
/// marks an empty row.
pub fn right_envelope(img: &BinaryImage, rows: Range<usize>) -> Vec<Option<usize>> {
    let w = img.width();
    rows.map(|r| (0..w).rev().find(|&c| img.get(r, c)).map(|c| w - 1 - c))
        .collect()
}

/// Splits an envelope into gap-free segments. Interior gaps of at most
/// [`MAX_BRIDGED_GAP`] samples are filled by linear interpolation between their
/// neighbors; longer gaps end the current segment.
pub fn bridge_gaps(envelope: &[Option<usize>]) -> Vec<Vec<usize>> {
    let mut segments = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < envelope.len() {
        match envelope[i] {
            Some(d) => {
                current.push(d);
                i += 1;
            }
            None => {
                let start = i;
                while i < envelope.len() && envelope[i].is_none() {
                    i += 1;
                }
                let gap = i - start;
                match (current.last().copied(), envelope.get(i).copied().flatten()) {
                    (Some(before), Some(after)) if gap <= MAX_BRIDGED_GAP => {
                        for k in 1..=gap {
                            let t = k as f64 / (gap + 1) as f64;
                            let v = before as f64 + t * (after as f64 - before as f64);
                            current.push(v.round() as usize);
                        }
                    }
                    _ => {
                        if !current.is_empty() {
                            segments.push(std::mem::take(&mut current));
                        }
                    }
                }
            }
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straightness_examples() {
        let r = straightness(&[5, 5, 5, 5], 2, 5);
        assert_eq!((r.max_step, r.drift, r.is_near_straight), (0, 0, true));
        let r = straightness(&[5, 5, 6, 5], 2, 5);
        assert_eq!((r.max_step, r.drift, r.is_near_straight), (1, 1, true));
        let r = straightness(&[0, 3, 6, 9], 2, 5);
        assert_eq!(r.max_step, 3);
        assert!(!r.is_near_straight);
    }

    #[test]
    fn straightness_single_sample() {
        let r = straightness(&[7], 0, 0);
        assert_eq!((r.max_step, r.drift, r.is_near_straight), (0, 0, true));
    }

    #[test]
    fn upper_envelope_examples() {
        let mut img = BinaryImage::new(10, 10);
        for c in 0..10 {
            img.set(3, c, true);
        }
        assert_eq!(upper_envelope(&img, 0..10), vec![Some(3); 10]);

        img.set(3, 4, false);
        assert_eq!(upper_envelope(&img, 0..10)[4], None);

        let mut stacked = BinaryImage::new(3, 10);
        stacked.set(2, 1, true);
        stacked.set(7, 1, true);
        assert_eq!(upper_envelope(&stacked, 1..2), vec![Some(2)]);
    }

    #[test]
    fn right_envelope_examples() {
        let mut img = BinaryImage::new(100, 100);
        for r in 0..75 {
            img.set(r, 99, true);
        }
        assert_eq!(right_envelope(&img, 0..75), vec![Some(0); 75]);

        let mut img = BinaryImage::new(100, 100);
        for r in 0..100 {
            img.set(r, 80, true);
        }
        img.set(50, 80, false);
        let env = right_envelope(&img, 0..100);
        assert_eq!(env[0], Some(19));
        assert_eq!(env[50], None);
    }

    #[test]
    fn gaps_bridge_or_split() {
        let env = [Some(2), None, None, Some(5), None, None, None, Some(9)];
        assert_eq!(bridge_gaps(&env), vec![vec![2, 3, 4, 5], vec![9]]);
        assert_eq!(bridge_gaps(&[None, Some(1), None]), vec![vec![1]]);
    }
}
