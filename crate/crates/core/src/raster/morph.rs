//! Thickening, thinning and spur pruning.

use std::collections::HashSet;

use super::{BinaryImage, NEIGHBORS_8};

/// Default spur length removed by [`prune`], in pixels at the 100×100 working scale.
pub const DEFAULT_MAX_SPUR: usize = 3;

/// 3×3 dilation. Growth past the image border is clipped.
pub fn thicken(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    let (h, w) = (img.height(), img.width());
    for (r, c) in img.foreground() {
        for rr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
            for cc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                out.set(rr, cc, true);
            }
        }
    }
    out
}

/// Ring of the 8 neighbors in clockwise order starting north, as a bit per position.
#[inline]
fn ring(img: &BinaryImage, r: usize, c: usize) -> [bool; 8] {
    let (r, c) = (r as isize, c as isize);
    let mut out = [false; 8];
    for (slot, (dr, dc)) in out.iter_mut().zip(NEIGHBORS_8) {
        *slot = img.at(r + dr, c + dc);
    }
    out
}

/// Number of background-to-foreground transitions walking once around the ring.
#[inline]
fn transitions(n: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count()
}

/// False for stroke tips. Two neighbors only make a deletable pixel when both are edge
/// neighbors (the outer corner of a right angle); a tip whose neighbors are an edge and a
/// corner pixel is kept, otherwise two-pixel-thick diagonals erode from their ends.
#[inline]
fn removable_count(n: &[bool; 8]) -> bool {
    match n.iter().filter(|&&x| x).count() {
        2 => (0..8).step_by(2).filter(|&i| n[i]).count() == 2,
        b => (3..=6).contains(&b),
    }
}

/// Topological deletability used by both subiterations: a single run of foreground
/// neighbors and not a tip. Such a pixel is always simple.
#[inline]
fn crossing_deletable(n: &[bool; 8]) -> bool {
    removable_count(n) && transitions(n) == 1
}

/// True when removing the center pixel changes neither the number of 8-connected
/// foreground components nor the number of 4-connected background components.
fn is_simple(n: &[bool; 8]) -> bool {
    // ring positions: even indices are edge neighbors, odd indices corners
    let fg_components = {
        let mut seen = [false; 8];
        let mut count = 0;
        for start in 0..8 {
            if !n[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                for j in 0..8 {
                    if n[j] && !seen[j] && ring_adjacent8(i, j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    };
    if fg_components != 1 {
        return false;
    }
    // background runs in the ring are 4-connected; only runs touching an edge neighbor
    // are 4-adjacent to the center
    let mut runs = 0;
    let mut i = 0;
    let start = (0..8).find(|&k| n[k]).unwrap_or(0);
    while i < 8 {
        let k = (start + i) % 8;
        if n[k] {
            i += 1;
            continue;
        }
        let mut touches_edge = false;
        while i < 8 && !n[(start + i) % 8] {
            touches_edge |= (start + i) % 8 % 2 == 0;
            i += 1;
        }
        if touches_edge {
            runs += 1;
        }
    }
    runs == 1
}

fn ring_adjacent8(i: usize, j: usize) -> bool {
    let (ai, bi) = NEIGHBORS_8[i];
    let (aj, bj) = NEIGHBORS_8[j];
    i != j && (ai - aj).abs() <= 1 && (bi - bj).abs() <= 1
}

/// One directional subiteration. Candidates are chosen on a snapshot; each is then
/// re-checked against the current image before deletion so that neighboring deletions
/// can never disconnect a stroke.
fn subiteration(img: &mut BinaryImage, first: bool) -> bool {
    let candidates: Vec<(usize, usize)> = img
        .foreground()
        .filter(|&(r, c)| {
            let n = ring(img, r, c);
            if !crossing_deletable(&n) {
                return false;
            }
            // n: 0=N(P2) 2=E(P4) 4=S(P6) 6=W(P8)
            if first {
                !(n[0] && n[2] && n[4]) && !(n[2] && n[4] && n[6])
            } else {
                !(n[0] && n[2] && n[6]) && !(n[0] && n[4] && n[6])
            }
        })
        .collect();
    let mut changed = false;
    for (r, c) in candidates {
        if crossing_deletable(&ring(img, r, c)) {
            img.set(r, c, false);
            changed = true;
        }
    }
    changed
}

/// Simple and not a tip.
fn redundant(n: &[bool; 8]) -> bool {
    (removable_count(n) || n.iter().filter(|&&x| x).count() >= 3) && is_simple(n)
}

/// Removes remaining simple pixels that are not tips, in raster order. This clears the
/// 2×2 blocks and staircase corners the directional passes leave behind.
fn remove_redundant(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    for r in 0..img.height() {
        for c in 0..img.width() {
            if !img.get(r, c) {
                continue;
            }
            if redundant(&ring(img, r, c)) {
                img.set(r, c, false);
                changed = true;
            }
        }
    }
    changed
}

/// Parallel two-subiteration thinning repeated until a full pass deletes nothing.
///
/// The result is one pixel wide (no 2×2 foreground block) and every 8-connected
/// component of the input survives as exactly one component.
pub fn thin_to_convergence(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    loop {
        let mut changed = subiteration(&mut out, true);
        changed |= subiteration(&mut out, false);
        if !changed {
            changed = remove_redundant(&mut out);
        }
        if !changed {
            return out;
        }
    }
}

struct Spur {
    pixels: Vec<(usize, usize)>,
    junction: (usize, usize),
}

fn foreground_neighbors(img: &BinaryImage, (r, c): (usize, usize)) -> Vec<(usize, usize)> {
    let (r, c) = (r as isize, c as isize);
    NEIGHBORS_8
        .iter()
        .map(|(dr, dc)| (r + dr, c + dc))
        .filter(|&(nr, nc)| img.at(nr, nc))
        .map(|(nr, nc)| (nr as usize, nc as usize))
        .collect()
}

/// A stroke tip: one neighbor, or two neighbors that touch each other.
fn is_tip(img: &BinaryImage, p: (usize, usize)) -> bool {
    match foreground_neighbors(img, p).as_slice() {
        [_] => true,
        [a, b] => a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1,
        _ => false,
    }
}

/// Walks from a tip toward the nearest junction (a pixel with three or more neighbors)
/// and returns the spur pixels, junction excluded, when there are at most `max_spur`.
fn spur_from(img: &BinaryImage, start: (usize, usize), max_spur: usize) -> Option<Spur> {
    let mut path = vec![start];
    let mut visited: HashSet<(usize, usize)> = HashSet::from([start]);
    let mut cur = start;
    loop {
        if cur != start && img.neighbors(cur.0, cur.1) >= 3 {
            path.pop();
            return Some(Spur {
                pixels: path,
                junction: cur,
            });
        }
        let next: Vec<(usize, usize)> = foreground_neighbors(img, cur)
            .into_iter()
            .filter(|p| !visited.contains(p))
            .collect();
        if let Some(&j) = next.iter().find(|p| img.neighbors(p.0, p.1) >= 3) {
            return Some(Spur {
                pixels: path,
                junction: j,
            });
        }
        match next.as_slice() {
            [only] if path.len() < max_spur => {
                cur = *only;
                visited.insert(cur);
                path.push(cur);
            }
            // too long, or a dead end without a junction: a free-standing stroke
            _ => return None,
        }
    }
}

/// Deletes endpoint-to-junction branches of at most `max_spur` pixels, shortest first,
/// repeating until none remains. Branches that never reach a junction are kept. A junction
/// pixel left redundant by the deletion (simple, not a tip) goes with its spur.
///
/// Shortest-first matters on imperfect junctions: a one-pixel nub must go before it
/// turns the end of a real stroke into a removable branch.
pub fn prune(img: &BinaryImage, max_spur: usize) -> BinaryImage {
    let mut out = img.clone();
    if max_spur == 0 {
        return out;
    }
    loop {
        let spurs: Vec<((usize, usize), usize)> = out
            .foreground()
            .filter(|&p| is_tip(&out, p))
            .filter_map(|p| spur_from(&out, p, max_spur).map(|s| (p, s.pixels.len())))
            .collect();
        let Some(shortest) = spurs.iter().map(|s| s.1).min() else {
            return out;
        };
        let mut changed = false;
        for (start, len) in spurs {
            if len != shortest || !out.get(start.0, start.1) || !is_tip(&out, start) {
                continue;
            }
            // earlier deletions this round may have changed the branch
            let Some(spur) = spur_from(&out, start, shortest) else {
                continue;
            };
            for &(sr, sc) in &spur.pixels {
                out.set(sr, sc, false);
            }
            let (jr, jc) = spur.junction;
            if out.get(jr, jc) && redundant(&ring(&out, jr, jc)) {
                out.set(jr, jc, false);
            }
            changed = true;
        }
        if !changed {
            return out;
        }
    }
}
