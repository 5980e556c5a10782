//! Binary dilation with a Euclidean disk and connected-component filtering.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;

/// Pixel adjacency used when grouping feature pixels into components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    /// Edge neighbours only.
    Four,
    /// Edge and corner neighbours.
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| format!("connectivity must be 4 or 8, got {s:?}"))
            .and_then(Connectivity::try_from)
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// Dilates `mask` with the disk `{(dx, dy) : dx² + dy² ≤ radius²}`.
///
/// Pixels outside the raster are background. Each disk row `dy` is a
/// horizontal run of half-width `⌊√(r² − dy²)⌋`, so an output pixel is set
/// iff some row within `radius` has a feature pixel within that half-width.
/// Rows are processed in parallel; the result does not depend on the
/// thread count.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (width, height) = mask.dimensions();
    let r = u64::from(radius);
    let half_widths: Vec<u64> = (0..=r).map(|dy| (r * r - dy * dy).isqrt()).collect();

    // Horizontal distance from each pixel to the nearest feature pixel in its
    // own row, saturated at radius + 1.
    let cap = r + 1;
    let row_distance: Vec<Vec<u64>> = (0..height)
        .into_par_iter()
        .map(|y| nearest_in_row(mask.row(y), cap))
        .collect();

    let radius = radius as usize;
    let pixels: Vec<bool> = (0..height)
        .into_par_iter()
        .flat_map_iter(|y| {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(height - 1);
            let rows = &row_distance;
            let half = &half_widths;
            (0..width).map(move |x| {
                (lo..=hi).any(|sy| rows[sy][x] <= half[sy.abs_diff(y)])
            })
        })
        .collect();
    BinaryMask::from_parts(width, height, pixels)
}

fn nearest_in_row(row: &[bool], cap: u64) -> Vec<u64> {
    let mut dist = vec![cap; row.len()];
    let mut last: Option<usize> = None;
    for (x, &p) in row.iter().enumerate() {
        if p {
            last = Some(x);
        }
        if let Some(l) = last {
            dist[x] = ((x - l) as u64).min(cap);
        }
    }
    last = None;
    for x in (0..row.len()).rev() {
        if row[x] {
            last = Some(x);
        }
        if let Some(l) = last {
            dist[x] = dist[x].min(((l - x) as u64).min(cap));
        }
    }
    dist
}

/// Per-pixel component labels of a binary mask.
///
/// Label 0 is background. Components are numbered 1, 2, ... in the order
/// their first pixel is met in a row-major scan. `sizes[l]` is the pixel
/// count of component `l`; `sizes[0]` is always 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl ComponentMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Number of components, excluding background.
    pub fn count(&self) -> usize {
        self.sizes.len() - 1
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: vec![0] }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller id stays root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass connected-component labelling with a union-find table.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentMap {
    let (width, height) = mask.dimensions();
    let pixels = mask.pixels();
    let mut provisional = vec![0u32; pixels.len()];
    let mut sets = DisjointSet::new();

    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !pixels[i] {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut push = |label: u32| {
                if label != 0 {
                    neighbours[n] = label;
                    n += 1;
                }
            };
            if x > 0 {
                push(provisional[i - 1]);
            }
            if y > 0 {
                push(provisional[i - width]);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        push(provisional[i - width - 1]);
                    }
                    if x + 1 < width {
                        push(provisional[i - width + 1]);
                    }
                }
            }
            provisional[i] = match neighbours[..n].iter().min() {
                None => sets.make_set(),
                Some(&first) => {
                    for &other in &neighbours[..n] {
                        sets.union(first, other);
                    }
                    first
                }
            };
        }
    }

    let mut final_label = vec![0u32; sets.parent.len()];
    let mut sizes = vec![0usize];
    let labels = provisional
        .iter()
        .map(|&p| {
            if p == 0 {
                return 0;
            }
            let root = sets.find(p) as usize;
            if final_label[root] == 0 {
                sizes.push(0);
                final_label[root] = (sizes.len() - 1) as u32;
            }
            let l = final_label[root];
            sizes[l as usize] += 1;
            l
        })
        .collect();

    ComponentMap {
        width,
        height,
        labels,
        sizes,
    }
}

/// Drops every component with fewer than `min_size` pixels.
pub fn remove_small_components(mask: &BinaryMask, min_size: usize, connectivity: Connectivity) -> BinaryMask {
    if min_size <= 1 {
        return mask.clone();
    }
    let components = label_components(mask, connectivity);
    let pixels = components
        .labels
        .iter()
        .map(|&l| l != 0 && components.sizes[l as usize] >= min_size)
        .collect();
    BinaryMask::from_parts(mask.width(), mask.height(), pixels)
}
