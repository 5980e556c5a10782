#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use dii_core::{BinaryMask, Connectivity};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each pixel set with probability `density`.
pub fn random_mask(seed: u64, width: usize, height: usize, density: f64) -> BinaryMask {
    let mut r = rng(seed);
    let threshold = (density * u32::MAX as f64) as u32;
    BinaryMask::from_fn(width, height, |_, _| r.next_u32() < threshold).unwrap()
}

/// Dilation by enumerating every offset of the disk.
pub fn brute_dilate(mask: &BinaryMask, radius: i64) -> BinaryMask {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                if dx * dx + dy * dy > radius * radius {
                    continue;
                }
                let (sx, sy) = (x as i64 + dx, y as i64 + dy);
                if (0..w).contains(&sx) && (0..h).contains(&sy) && mask.get(sx as usize, sy as usize) {
                    return true;
                }
            }
        }
        false
    })
    .unwrap()
}

/// Breadth-first flood fill; labels are arbitrary positive ids.
pub fn flood_fill_labels(mask: &BinaryMask, connectivity: Connectivity) -> Vec<u32> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    };
    let mut labels = vec![0u32; mask.len()];
    let mut next = 0;
    for start in 0..mask.len() {
        if !mask.pixels()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if (0..w).contains(&nx) && (0..h).contains(&ny) {
                    let j = (ny * w + nx) as usize;
                    if mask.pixels()[j] && labels[j] == 0 {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    labels
}

/// True if the two labelings induce the same partition.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter().zip(b).all(|(&x, &y)| {
        if (x == 0) != (y == 0) {
            return false;
        }
        *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x
    })
}
