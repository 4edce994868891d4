use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Rational};
use crate::structure::word::{words_at_level, Word};
use num_traits::{One, Zero};

/// Exact point of the model space.
pub type Point = Vec<Rational>;

/// `x ↦ A x + b` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Vec<Vec<Rational>>,
    pub shift: Vec<Rational>,
}

impl AffineMap {
    /// `x ↦ ratio · x + (1 − ratio) · fixed`.
    pub fn similarity(ratio: Rational, fixed: &Point) -> Self {
        let dim = fixed.len();
        let linear = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { ratio.clone() } else { Rational::zero() }).collect())
            .collect();
        let shift = fixed.iter().map(|p| (Rational::one() - &ratio) * p).collect();
        AffineMap { linear, shift }
    }

    /// `x ↦ ratio · x + shift`.
    pub fn scaled_shift(ratio: Rational, shift: Point) -> Self {
        let dim = shift.len();
        let linear = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { ratio.clone() } else { Rational::zero() }).collect())
            .collect();
        AffineMap { linear, shift }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn apply(&self, x: &[Rational]) -> Point {
        self.linear
            .iter()
            .zip(&self.shift)
            .map(|(row, b)| row.iter().zip(x).fold(b.clone(), |acc, (a, xi)| acc + a * xi))
            .collect()
    }
}

/// A post-critically finite self-similar structure given by affine
/// contractions of a model space and its boundary vertex set `V_0`.
///
/// Vertices of `V_m` are glued by exact equality of model coordinates.
#[derive(Clone, Debug)]
pub struct PcfStructure {
    name: String,
    dim: usize,
    maps: Vec<AffineMap>,
    boundary: Vec<Point>,
}

/// Glued vertex set `V_m` together with the global ids of `ψ_w(V_0)` for
/// every `w ∈ W_m` (indexed by lexicographic word position).
///
/// Ids of `V_k` are stable: the first `#V_k` ids of `V_m` are exactly `V_k`.
#[derive(Clone, Debug)]
pub struct VertexTable {
    level: usize,
    points: Vec<Point>,
    cells: Vec<Vec<usize>>,
}

impl VertexTable {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn point(&self, id: usize) -> &Point {
        &self.points[id]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Global ids of `ψ_w(q)` for `q ∈ V_0`, in `V_0` order.
    pub fn cell(&self, index: usize) -> &[usize] {
        &self.cells[index]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// For each vertex, the cells containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.points.len()];
        for (c, ids) in self.cells.iter().enumerate() {
            for &v in ids {
                inc[v].push(c);
            }
        }
        inc
    }
}

impl PcfStructure {
    /// Validates and builds a structure. Checks, in order: at least two
    /// maps, consistent dimensions, at least two distinct boundary points,
    /// injectivity of each map on `V_0`, `V_0 ⊂ V_1`, and connectedness of
    /// the level-1 cell graph.
    pub fn new(name: impl Into<String>, maps: Vec<AffineMap>, boundary: Vec<Point>) -> Result<Self> {
        let name = name.into();
        if maps.len() < 2 {
            return Err(Error::Structure(format!("{name}: need at least 2 maps, got {}", maps.len())));
        }
        if maps.len() > 36 {
            return Err(Error::Structure(format!("{name}: at most 36 maps are supported")));
        }
        let dim = boundary.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Structure(format!("{name}: empty boundary vertex list")));
        }
        for (i, p) in boundary.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Structure(format!("{name}: boundary vertex {i} has dimension {} != {dim}", p.len())));
            }
        }
        for (i, m) in maps.iter().enumerate() {
            if m.shift.len() != dim || m.linear.len() != dim || m.linear.iter().any(|r| r.len() != dim) {
                return Err(Error::Structure(format!("{name}: map {i} is not a {dim}-dimensional affine map")));
            }
        }
        if boundary.len() < 2 {
            return Err(Error::Structure(format!("{name}: need at least 2 boundary vertices")));
        }
        let distinct: BTreeSet<String> = boundary.iter().map(|p| point_key(p)).collect();
        if distinct.len() != boundary.len() {
            return Err(Error::Structure(format!("{name}: boundary vertices are not distinct")));
        }
        let s = PcfStructure { name, dim, maps, boundary };
        let level1 = s.next_table(&s.level0())?;
        let inc = level1.incidence();
        let mut seen = vec![false; level1.cell_count()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for &v in level1.cell(c) {
                for &d in &inc[v] {
                    if !seen[d] {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
        }
        if let Some(c) = seen.iter().position(|x| !x) {
            return Err(Error::Structure(format!(
                "{}: level-1 cell {c} is not connected to cell 0 through shared vertices",
                s.name
            )));
        }
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbol_count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn boundary(&self) -> &[Point] {
        &self.boundary
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    /// All words of level `m` in lexicographic order.
    pub fn cells_at_level(&self, m: usize) -> Vec<Word> {
        words_at_level(self.symbol_count(), m)
    }

    fn level0(&self) -> VertexTable {
        VertexTable { level: 0, points: self.boundary.clone(), cells: vec![(0..self.boundary.len()).collect()] }
    }

    fn next_table(&self, prev: &VertexTable) -> Result<VertexTable> {
        let mut ids: HashMap<Point, usize> = HashMap::with_capacity(prev.points.len() * 2);
        let mut points = prev.points.clone();
        for (i, p) in prev.points.iter().enumerate() {
            ids.insert(p.clone(), i);
        }
        let mut seen = vec![false; prev.points.len()];
        let mut cells = Vec::with_capacity(prev.cells.len() * self.maps.len());
        for (sym, map) in self.maps.iter().enumerate() {
            for (w, cell) in prev.cells.iter().enumerate() {
                let mut out = Vec::with_capacity(cell.len());
                for &v in cell {
                    let image = map.apply(&prev.points[v]);
                    let id = match ids.get(&image) {
                        Some(&id) => id,
                        None => {
                            let id = points.len();
                            ids.insert(image.clone(), id);
                            points.push(image);
                            id
                        }
                    };
                    if out.contains(&id) {
                        let word = Word::from_symbols([sym]).concat(&Word::from_index(w, prev.level, self.maps.len()));
                        return Err(Error::Structure(format!(
                            "{}: inconsistent gluing in cell {word}: two boundary vertices map to the same point",
                            self.name
                        )));
                    }
                    if id < seen.len() {
                        seen[id] = true;
                    }
                    out.push(id);
                }
                cells.push(out);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Structure(format!(
                "{}: vertex {} of V_{} does not lie in V_{}",
                self.name,
                format_point(&prev.points[v]),
                prev.level,
                prev.level + 1
            )));
        }
        Ok(VertexTable { level: prev.level + 1, points, cells })
    }

    /// Glued vertex set `V_m`.
    pub fn vertex_table(&self, m: usize) -> Result<VertexTable> {
        let mut t = self.level0();
        for _ in 0..m {
            t = self.next_table(&t)?;
        }
        Ok(t)
    }

    /// Vertex tables for levels `0..=m`.
    pub fn vertex_tables(&self, m: usize) -> Result<Vec<VertexTable>> {
        let mut out = vec![self.level0()];
        for k in 0..m {
            let next = self.next_table(&out[k])?;
            out.push(next);
        }
        Ok(out)
    }
}

fn point_key(p: &Point) -> String {
    format_point(p)
}

pub fn format_point(p: &Point) -> String {
    let parts: Vec<String> = p.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}
