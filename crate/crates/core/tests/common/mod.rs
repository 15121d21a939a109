#![allow(dead_code)]

use devoc::raster::{draw_line, thin_to_convergence, BinaryImage};
use rand::Rng;

/// 8-connected components by flood fill.
pub fn components(img: &BinaryImage) -> usize {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for (r, c) in img.foreground() {
        if seen[r * w + c] {
            continue;
        }
        count += 1;
        seen[r * w + c] = true;
        let mut stack = vec![(r, c)];
        while let Some((r, c)) = stack.pop() {
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let (nr, nc) = (r as isize + dr, c as isize + dc);
                    if img.at(nr, nc) && !seen[nr as usize * w + nc as usize] {
                        seen[nr as usize * w + nc as usize] = true;
                        stack.push((nr as usize, nc as usize));
                    }
                }
            }
        }
    }
    count
}

pub fn has_2x2_block(img: &BinaryImage) -> bool {
    (0..img.height().saturating_sub(1)).any(|r| {
        (0..img.width().saturating_sub(1))
            .any(|c| img.get(r, c) && img.get(r + 1, c) && img.get(r, c + 1) && img.get(r + 1, c + 1))
    })
}

/// Filled ellipses and rings scattered over a `w`×`h` canvas.
pub fn random_blobs<R: Rng>(rng: &mut R, w: usize, h: usize) -> BinaryImage {
    let mut img = BinaryImage::new(w, h);
    for _ in 0..rng.gen_range(1..=6) {
        let (cr, cc) = (rng.gen_range(0.0..h as f64), rng.gen_range(0.0..w as f64));
        let (ar, ac) = (rng.gen_range(1.0..(h as f64 / 4.0).max(2.0)), rng.gen_range(1.0..(w as f64 / 4.0).max(2.0)));
        let hole = if rng.gen_bool(0.3) { rng.gen_range(0.3..0.7) } else { 0.0 };
        for r in 0..h {
            for c in 0..w {
                let d = ((r as f64 - cr) / ar).powi(2) + ((c as f64 - cc) / ac).powi(2);
                if d <= 1.0 && d >= hole * hole {
                    img.set(r, c, true);
                }
            }
        }
    }
    img
}

/// A few random polylines on a 100×100 canvas, thinned.
pub fn random_skeleton<R: Rng>(rng: &mut R) -> BinaryImage {
    let mut img = BinaryImage::new(100, 100);
    for _ in 0..rng.gen_range(1..=5) {
        let mut p = (rng.gen_range(0..100isize), rng.gen_range(0..100isize));
        for _ in 0..rng.gen_range(1..=4) {
            let q = (rng.gen_range(0..100isize), rng.gen_range(0..100isize));
            draw_line(&mut img, p, q);
            p = q;
        }
    }
    thin_to_convergence(&img)
}

/// Classify every pixel by brute-force neighbor counting, then bucket by tile.
pub fn naive_features(img: &BinaryImage) -> [u32; 32] {
    let mut v = [0u32; 32];
    for r in 0..100 {
        for c in 0..100 {
            if !img.get(r, c) {
                continue;
            }
            let mut n = 0;
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if (dr, dc) != (0, 0) && img.at(r as isize + dr, c as isize + dc) {
                        n += 1;
                    }
                }
            }
            let tile = (r / 25) * 4 + c / 25;
            if n == 1 {
                v[2 * tile + 1] += 1;
            } else if n >= 3 {
                v[2 * tile] += 1;
            }
        }
    }
    v
}
