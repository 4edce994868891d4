//! Brute-force geometric checks for carpet generators on a pixel raster,
//! independent of the library's cell-set code.
#![allow(dead_code)]

use std::collections::VecDeque;

use fractal_index::carpet::CarpetGenerator;
use rand::Rng;

/// Pixels per cell side.
const PIX: usize = 3;

/// Dense boolean raster of `Q_1` drawn at level `m`: every level-`m` cell
/// whose level-1 ancestor is kept becomes a block of `PIX^D` pixels.
pub struct Raster {
    pub dim: usize,
    pub side: usize,
    pub on: Vec<bool>,
}

impl Raster {
    pub fn new(g: &CarpetGenerator, m: usize) -> Self {
        let cells_side = g.l().pow(m as u32);
        let coarse = cells_side / g.l();
        let side = cells_side * PIX;
        let dim = g.dim();
        let total = side.pow(dim as u32);
        let mut on = vec![false; total];
        for (idx, slot) in on.iter_mut().enumerate() {
            let p = unflatten(idx, side, dim);
            let parent: Vec<usize> = p.iter().map(|x| x / PIX / coarse).collect();
            *slot = g.contains(&parent);
        }
        Raster { dim, side, on }
    }

    fn index(&self, p: &[usize]) -> usize {
        p.iter().rev().fold(0, |acc, &x| acc * self.side + x)
    }

    /// Whether the lit pixels inside the box `[lo, hi)` form one 2D-face
    /// connected component (empty counts as connected).
    pub fn connected_in(&self, lo: &[usize], hi: &[usize]) -> bool {
        let ext: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
        let local = |p: &[usize]| -> usize {
            (0..self.dim).rev().fold(0, |acc, j| acc * ext[j] + (p[j] - lo[j]))
        };
        let mut lit = 0;
        let mut start = None;
        each_point(lo, hi, |p| {
            if self.on[self.index(p)] {
                lit += 1;
                start.get_or_insert_with(|| p.to_vec());
            }
        });
        let Some(start) = start else { return true };
        let mut seen = vec![false; ext.iter().product()];
        seen[local(&start)] = true;
        let mut count = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for axis in 0..self.dim {
                for step in [-1i64, 1] {
                    let x = p[axis] as i64 + step;
                    if x < lo[axis] as i64 || x >= hi[axis] as i64 {
                        continue;
                    }
                    let mut n = p.clone();
                    n[axis] = x as usize;
                    let id = local(&n);
                    if self.on[self.index(&n)] && !seen[id] {
                        seen[id] = true;
                        count += 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        count == lit
    }

    /// A lit pixel path from the `x_1 = 0` face to the `x_1 = 1` face.
    pub fn crosses(&self) -> bool {
        let mut seen = vec![false; self.on.len()];
        let mut queue = VecDeque::new();
        let lo = vec![0; self.dim];
        let mut hi = vec![self.side; self.dim];
        hi[0] = 1;
        each_point(&lo, &hi, |p| {
            let id = self.index(p);
            if self.on[id] {
                seen[id] = true;
                queue.push_back(p.to_vec());
            }
        });
        while let Some(p) = queue.pop_front() {
            if p[0] == self.side - 1 {
                return true;
            }
            for axis in 0..self.dim {
                for step in [-1i64, 1] {
                    let x = p[axis] as i64 + step;
                    if x < 0 || x >= self.side as i64 {
                        continue;
                    }
                    let mut n = p.clone();
                    n[axis] = x as usize;
                    let id = self.index(&n);
                    if self.on[id] && !seen[id] {
                        seen[id] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        false
    }
}

fn unflatten(mut idx: usize, side: usize, dim: usize) -> Vec<usize> {
    (0..dim)
        .map(|_| {
            let x = idx % side;
            idx /= side;
            x
        })
        .collect()
}

fn each_point(lo: &[usize], hi: &[usize], mut f: impl FnMut(&[usize])) {
    if lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return;
    }
    let mut p = lo.to_vec();
    loop {
        f(&p);
        let mut j = 0;
        loop {
            if j == p.len() {
                return;
            }
            p[j] += 1;
            if p[j] < hi[j] {
                break;
            }
            p[j] = lo[j];
            j += 1;
        }
    }
}

/// Symmetry through the generators of the hyperoctahedral group: the
/// reflection of `x_1` and the transpositions of adjacent axes.
pub fn symmetric(g: &CarpetGenerator) -> bool {
    let l = g.l();
    g.cells().iter().all(|c| {
        let mut flipped = c.clone();
        flipped[0] = l - 1 - c[0];
        g.contains(&flipped)
            && (0..g.dim() - 1).all(|j| {
                let mut t = c.clone();
                t.swap(j, j + 1);
                g.contains(&t)
            })
    })
}

pub fn connected(g: &CarpetGenerator) -> bool {
    let r = Raster::new(g, 1);
    r.connected_in(&vec![0; r.dim], &vec![r.side; r.dim]) && r.crosses()
}

pub fn borders(g: &CarpetGenerator) -> bool {
    let r = Raster::new(g, 1);
    // Pixels along the x_1 axis edge.
    (0..r.side).all(|x| {
        let mut p = vec![0; r.dim];
        p[0] = x;
        r.on[r.index(&p)]
    })
}

/// Every cube of side `2 / l^m` made of `2^D` level-`m` cells meets `Q_1` in
/// an empty or interior-connected set.
pub fn nondiagonal_at(g: &CarpetGenerator, m: usize) -> bool {
    let r = Raster::new(g, m);
    let cells_side = g.l().pow(m as u32);
    let mut ok = true;
    each_point(&vec![0; r.dim], &vec![cells_side - 1; r.dim], |k| {
        if ok {
            let lo: Vec<usize> = k.iter().map(|x| x * PIX).collect();
            let hi: Vec<usize> = k.iter().map(|x| (x + 2) * PIX).collect();
            ok = r.connected_in(&lo, &hi);
        }
    });
    ok
}

pub fn nondiagonal(g: &CarpetGenerator, max_m: usize) -> bool {
    (1..=max_m).all(|m| nondiagonal_at(g, m))
}

/// Random 2D cell set closed under the symmetries of the square, built
/// from a random choice of orbits.
pub fn random_symmetric(rng: &mut impl Rng, l: usize) -> Vec<Vec<usize>> {
    let mut orbits: Vec<Vec<Vec<usize>>> = Vec::new();
    for x in 0..l {
        for y in 0..l {
            if orbits.iter().any(|o| o.contains(&vec![x, y])) {
                continue;
            }
            let (a, b) = (l - 1 - x, l - 1 - y);
            let mut orbit: Vec<Vec<usize>> =
                vec![vec![x, y], vec![a, y], vec![x, b], vec![a, b], vec![y, x], vec![b, x], vec![y, a], vec![b, a]];
            orbit.sort();
            orbit.dedup();
            orbits.push(orbit);
        }
    }
    loop {
        let cells: Vec<Vec<usize>> =
            orbits.iter().filter(|_| rng.random_bool(0.6)).flatten().cloned().collect();
        if cells.len() >= 2 && cells.len() < l * l {
            return cells;
        }
    }
}
