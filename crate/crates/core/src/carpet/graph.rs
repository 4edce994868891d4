use std::collections::HashMap;
use std::fmt::Debug;
use std::iter::Sum;

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use super::CarpetGenerator;
use crate::error::{Error, Result};
use crate::structure::{CellComplex, Word};

/// Default limit on the number of level-`n` cells.
pub const DEFAULT_VERTEX_CAP: u64 = 1 << 21;

/// Level-`n` cells of a carpet in word order, with their integer coordinates
/// on the `l^n` grid and a coordinate lookup.
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub level: usize,
    pub dim: usize,
    /// `l^n`.
    pub side: usize,
    /// Row-major `count × dim` coordinates.
    coords: Vec<u32>,
    lookup: Lookup,
}

#[derive(Clone, Debug)]
enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u128, u32>),
}

const DENSE_LIMIT: u128 = 1 << 26;

impl CellGrid {
    pub fn new(g: &CarpetGenerator, n: usize, cap: u64) -> Result<Self> {
        let m = g.cell_count() as u64;
        let count = m.checked_pow(n as u32).filter(|&c| c <= cap).ok_or(Error::CapExceeded {
            requested: m.saturating_pow(n as u32),
            cap,
        })? as usize;
        let side = g.l().pow(n as u32);
        let dim = g.dim();
        let grid_size = (side as u128).checked_pow(dim as u32).ok_or(Error::CapExceeded { requested: u64::MAX, cap })?;
        // Coordinates of cell `w` follow from those of its parent prefix.
        let mut coords: Vec<u32> = vec![0; dim];
        for _ in 0..n {
            let mut next = Vec::with_capacity(coords.len() * g.cell_count());
            for parent in coords.chunks(dim) {
                for c in g.cells() {
                    next.extend(parent.iter().zip(c).map(|(p, k)| p * g.l() as u32 + *k as u32));
                }
            }
            coords = next;
        }
        let flat = |c: &[u32]| -> u128 { c.iter().rev().fold(0u128, |acc, &x| acc * side as u128 + x as u128) };
        let lookup = if grid_size <= DENSE_LIMIT {
            let mut dense = vec![u32::MAX; grid_size as usize];
            for (i, c) in coords.chunks(dim).enumerate() {
                dense[flat(c) as usize] = i as u32;
            }
            Lookup::Dense(dense)
        } else {
            Lookup::Sparse(coords.chunks(dim).enumerate().map(|(i, c)| (flat(c), i as u32)).collect())
        };
        debug_assert_eq!(coords.len(), count * dim);
        Ok(Self { level: n, dim, side, coords, lookup })
    }

    pub fn count(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn coords(&self, v: usize) -> &[u32] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn find(&self, c: &[u32]) -> Option<usize> {
        if c.iter().any(|&x| x as usize >= self.side) {
            return None;
        }
        let key = c.iter().rev().fold(0u128, |acc, &x| acc * self.side as u128 + x as u128);
        let id = match &self.lookup {
            Lookup::Dense(d) => d[key as usize],
            Lookup::Sparse(m) => *m.get(&key)?,
        };
        (id != u32::MAX).then_some(id as usize)
    }

    /// Cells sharing a `(D−1)`-face with `v`, in increasing order.
    pub fn face_neighbors(&self, v: usize) -> Vec<usize> {
        let c = self.coords(v).to_vec();
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut probe = c.clone();
        for j in 0..self.dim {
            if c[j] > 0 {
                probe[j] = c[j] - 1;
                out.extend(self.find(&probe));
            }
            probe[j] = c[j] + 1;
            out.extend(self.find(&probe));
            probe[j] = c[j];
        }
        out.sort_unstable();
        out
    }

    /// Cells meeting `v` in at least one point (Chebyshev distance ≤ 1), `v` included.
    pub fn touching(&self, v: usize) -> Vec<usize> {
        let c = self.coords(v);
        let mut out = Vec::new();
        let mut probe = vec![0u32; self.dim];
        let total = 3usize.pow(self.dim as u32);
        'outer: for code in 0..total {
            let mut rest = code;
            for j in 0..self.dim {
                let delta = (rest % 3) as i64 - 1;
                rest /= 3;
                let x = c[j] as i64 + delta;
                if x < 0 {
                    continue 'outer;
                }
                probe[j] = x as u32;
            }
            out.extend(self.find(&probe));
        }
        out.sort_unstable();
        out
    }
}

impl CellComplex for CarpetGenerator {
    fn symbol_count(&self) -> usize {
        self.cell_count()
    }

    fn touching_cells(&self, level: usize) -> Result<Vec<Vec<usize>>> {
        let grid = CellGrid::new(self, level, DEFAULT_VERTEX_CAP)?;
        Ok((0..grid.count()).into_par_iter().map(|v| grid.touching(v)).collect())
    }
}

/// Face-adjacency graph of the level-`n` cells with unit conductances,
/// stored as compressed rows.
#[derive(Clone, Debug)]
pub struct PreCarpetGraph {
    pub grid: CellGrid,
    n_symbols: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl PreCarpetGraph {
    /// Requires the generator to pass all geometric checks.
    pub fn build(g: &CarpetGenerator, n: usize, cap: u64) -> Result<Self> {
        g.validate()?;
        Self::build_unvalidated(g, n, cap)
    }

    /// Skips the geometric checks (for test-only generators such as the full grid).
    pub fn build_unvalidated(g: &CarpetGenerator, n: usize, cap: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("pre-carpet level must be at least 1".into()));
        }
        let grid = CellGrid::new(g, n, cap)?;
        let lists: Vec<Vec<usize>> = (0..grid.count()).into_par_iter().map(|v| grid.face_neighbors(v)).collect();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in &lists {
            neighbors.extend(l.iter().map(|&x| x as u32));
            offsets.push(neighbors.len());
        }
        Ok(Self { grid, n_symbols: g.cell_count(), offsets, neighbors })
    }

    pub fn level(&self) -> usize {
        self.grid.level
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[self.offsets[v]..self.offsets[v + 1]].iter().map(|&x| x as usize)
    }

    pub fn word(&self, v: usize) -> Word {
        Word::from_index(v, self.level(), self.n_symbols)
    }

    /// Cells touching the hyperplane `x_axis = 0` (or `= 1` when `high`).
    pub fn face(&self, axis: usize, high: bool) -> Vec<usize> {
        let target = if high { self.grid.side as u32 - 1 } else { 0 };
        (0..self.vertex_count()).filter(|&v| self.grid.coords(v)[axis] == target).collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    /// Removes the edge `{a, b}` if present.
    pub fn without_edge(&self, a: usize, b: usize) -> Self {
        let mut offsets = vec![0];
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        for v in 0..self.vertex_count() {
            neighbors.extend(
                self.neighbors(v)
                    .filter(|&u| !((v == a && u == b) || (v == b && u == a)))
                    .map(|u| u as u32),
            );
            offsets.push(neighbors.len());
        }
        Self { grid: self.grid.clone(), n_symbols: self.n_symbols, offsets, neighbors }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResistanceOptions {
    /// Relative residual `‖r‖ / ‖b‖` at which CG stops.
    pub tolerance: f64,
    /// Defaults to `max(1000, 20 · unknowns)`.
    pub max_iterations: Option<usize>,
}

impl Default for ResistanceOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResistanceSolution<F> {
    pub resistance: F,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Effective resistance between two vertex sets: `face_a` held at potential
/// 0, `face_b` at 1, unit conductances; solved by Jacobi-preconditioned CG.
pub fn effective_resistance<F>(
    graph: &PreCarpetGraph,
    face_a: &[usize],
    face_b: &[usize],
    opts: &ResistanceOptions,
) -> Result<ResistanceSolution<F>>
where
    F: Float + Send + Sync + Sum + Debug,
{
    let n = graph.vertex_count();
    if face_a.is_empty() || face_b.is_empty() {
        return Err(Error::Invalid("both faces must be nonempty".into()));
    }
    // 0: free, 1: face a, 2: face b.
    if let Some(&v) = face_a.iter().chain(face_b).find(|&&v| v >= n) {
        return Err(Error::Invalid(format!("vertex {v} is out of range")));
    }
    let mut role = vec![0u8; n];
    for &v in face_a {
        role[v] = 1;
    }
    for &v in face_b {
        if role[v] == 1 {
            return Err(Error::Invalid(format!("vertex {v} lies on both faces")));
        }
        role[v] = 2;
    }
    let free: Vec<usize> = (0..n).filter(|&v| role[v] == 0).collect();
    let mut slot = vec![u32::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i as u32;
    }
    let diag: Vec<F> = free.iter().map(|&v| F::from(graph.degree(v)).unwrap()).collect();
    let b: Vec<F> = free
        .iter()
        .map(|&v| F::from(graph.neighbors(v).filter(|&u| role[u] == 2).count()).unwrap())
        .collect();
    let apply = |x: &[F], y: &mut [F]| {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let v = free[i];
            let mut acc = diag[i] * x[i];
            for u in graph.neighbors(v) {
                let s = slot[u];
                if s != u32::MAX {
                    acc = acc - x[s as usize];
                }
            }
            *yi = acc;
        });
    };
    let dot = |a: &[F], b: &[F]| -> F { a.par_iter().zip(b).map(|(x, y)| *x * *y).sum() };

    let m = free.len();
    let mut x = vec![F::zero(); m];
    let mut iterations = 0;
    let mut rel = 0.0;
    if m > 0 {
        let b_norm = dot(&b, &b).sqrt();
        let tol = F::from(opts.tolerance).unwrap();
        let max_iter = opts.max_iterations.unwrap_or_else(|| (20 * m).max(1000));
        let mut r = b.clone();
        let mut z: Vec<F> = r.iter().zip(&diag).map(|(r, d)| *r / *d).collect();
        let mut p = z.clone();
        let mut ap = vec![F::zero(); m];
        let mut rz = dot(&r, &z);
        rel = if b_norm > F::zero() { 1.0 } else { 0.0 };
        while b_norm > F::zero() {
            let r_norm = dot(&r, &r).sqrt();
            rel = (r_norm / b_norm).to_f64().unwrap_or(f64::NAN);
            if r_norm <= tol * b_norm {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::NoConvergence { iterations, residual: rel });
            }
            apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            x.par_iter_mut().zip(&p).for_each(|(x, p)| *x = *x + alpha * *p);
            r.par_iter_mut().zip(&ap).for_each(|(r, ap)| *r = *r - alpha * *ap);
            z.par_iter_mut().zip(&r).zip(&diag).for_each(|((z, r), d)| *z = *r / *d);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = *z + beta * *p);
            iterations += 1;
        }
    }
    let potential = |u: usize| -> F {
        match role[u] {
            1 => F::zero(),
            2 => F::one(),
            _ => x[slot[u] as usize],
        }
    };
    // Total current entering face a.
    let current: F = face_a
        .iter()
        .map(|&v| graph.neighbors(v).filter(|&u| role[u] != 1).map(potential).fold(F::zero(), |a, b| a + b))
        .fold(F::zero(), |a, b| a + b);
    if current <= F::zero() {
        return Err(Error::Invalid("faces are not connected in the graph".into()));
    }
    Ok(ResistanceSolution { resistance: F::one() / current, iterations, relative_residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::{standard_carpet, CarpetGenerator};

    #[test]
    fn level_one_carpet_is_a_ring() {
        let g = PreCarpetGraph::build(&standard_carpet(), 1, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 8));
        assert!((0..8).all(|v| g.degree(v) == 2));
        assert!(g.is_connected());
        assert_eq!(PreCarpetGraph::build(&standard_carpet(), 2, DEFAULT_VERTEX_CAP).unwrap().vertex_count(), 64);
    }

    #[test]
    fn ring_resistance_is_two_parallel_pairs() {
        let g = PreCarpetGraph::build(&standard_carpet(), 1, DEFAULT_VERTEX_CAP).unwrap();
        let opts = ResistanceOptions::default();
        let r = effective_resistance::<f64>(&g, &g.face(0, false), &g.face(0, true), &opts).unwrap();
        assert!((r.resistance - 1.0).abs() < 1e-12);
        let vertical = effective_resistance::<f64>(&g, &g.face(1, false), &g.face(1, true), &opts).unwrap();
        assert!((vertical.resistance - r.resistance).abs() < 1e-8);
    }

    #[test]
    fn single_resistor() {
        let pair = CarpetGenerator::new("pair", 2, 3, vec![vec![0, 0], vec![1, 0]]).unwrap();
        let g = PreCarpetGraph::build_unvalidated(&pair, 1, DEFAULT_VERTEX_CAP).unwrap();
        let r = effective_resistance::<f32>(&g, &[0], &[1], &ResistanceOptions { tolerance: 1e-6, max_iterations: None }).unwrap();
        assert_eq!(r.resistance, 1.0);
        assert!(PreCarpetGraph::build(&pair, 1, DEFAULT_VERTEX_CAP).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let err = PreCarpetGraph::build(&standard_carpet(), 3, 100).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { requested: 512, cap: 100 }));
    }

    #[test]
    fn overlapping_faces_are_rejected() {
        let g = PreCarpetGraph::build(&standard_carpet(), 1, DEFAULT_VERTEX_CAP).unwrap();
        assert!(effective_resistance::<f64>(&g, &[0, 1], &[1], &ResistanceOptions::default()).is_err());
    }
}
