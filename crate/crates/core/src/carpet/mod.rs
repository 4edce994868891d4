//! Generalized Sierpinski carpets: generators on the `l^D` grid, their
//! geometric checks, pre-carpet graphs and resistance-based dimensions.

mod dims;
mod graph;

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

pub use dims::{dimension_report, resistance_scaling, DimensionReport, LevelResistance, ResistanceScaling, DIMENSION_CAVEAT};
pub use graph::{effective_resistance, CellGrid, PreCarpetGraph, ResistanceOptions, ResistanceSolution, DEFAULT_VERTEX_CAP};

pub type Cell = Vec<usize>;

/// Subset of `{0..l−1}^D` generating a carpet. Cells are kept in
/// lexicographic order, which is the symbol order of words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CarpetGenerator {
    name: String,
    dim: usize,
    l: usize,
    cells: Vec<Cell>,
}

impl CarpetGenerator {
    /// Requires `D ≥ 2`, `l ≥ 3` and `2 ≤ M < l^D`. The four geometric
    /// checks are separate; see [`CarpetGenerator::validate`].
    pub fn new(name: impl Into<String>, dim: usize, l: usize, cells: Vec<Cell>) -> Result<Self> {
        let g = Self::unrestricted(name, dim, l, cells)?;
        let total = l.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if g.cells.len() < 2 {
            return Err(Error::Structure("a carpet generator needs at least two cells".into()));
        }
        if g.cells.len() >= total {
            return Err(Error::Structure(format!("M = {} must be less than l^D = {total}", g.cells.len())));
        }
        Ok(g)
    }

    /// Only checks coordinates and duplicates; used for arbitrary cell sets
    /// such as the full grid.
    pub fn unrestricted(name: impl Into<String>, dim: usize, l: usize, cells: Vec<Cell>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Structure(format!("dimension must be at least 2, got {dim}")));
        }
        if l < 3 {
            return Err(Error::Structure(format!("subdivision l must be at least 3, got {l}")));
        }
        let mut seen = BTreeSet::new();
        for c in &cells {
            if c.len() != dim {
                return Err(Error::Structure(format!("cell {c:?} does not have {dim} coordinates")));
            }
            if c.iter().any(|&k| k >= l) {
                return Err(Error::Structure(format!("cell {c:?} lies outside the {l}-grid")));
            }
            if !seen.insert(c.clone()) {
                return Err(Error::Structure(format!("cell {c:?} is listed twice")));
            }
        }
        Ok(Self { name: name.into(), dim, l, cells: seen.into_iter().collect() })
    }

    /// From rows of `#` (kept) and `.` (removed); row `y` of the text is
    /// `k_2 = y` counted from the top, so the last row is the bottom edge.
    pub fn from_pattern(name: impl Into<String>, rows: &[&str]) -> Result<Self> {
        let l = rows.len();
        let mut cells = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().filter(|c| !c.is_whitespace()).collect();
            if chars.len() != l {
                return Err(Error::Parse(format!("pattern row {y} has {} cells, expected {l}", chars.len())));
            }
            for (x, ch) in chars.iter().enumerate() {
                match ch {
                    '#' | '1' => cells.push(vec![x, l - 1 - y]),
                    '.' | '0' => {}
                    other => return Err(Error::Parse(format!("unexpected pattern character {other:?}"))),
                }
            }
        }
        Self::new(name, 2, l, cells)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// `M`.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, cell: &[usize]) -> bool {
        self.cells.binary_search_by(|c| c.as_slice().cmp(cell)).is_ok()
    }

    /// Runs all geometric checks.
    pub fn checks(&self) -> GeneratorChecks {
        GeneratorChecks {
            symmetry: check_symmetry(self),
            connectedness: check_connectedness(self),
            nondiagonality: check_nondiagonality(self),
            nondiagonality_h: check_nondiagonality_h(self),
            borders: check_borders(self),
        }
    }

    /// Fails with the first violated condition.
    pub fn validate(&self) -> Result<()> {
        match self.checks().first_failure() {
            None => Ok(()),
            Some(name) => Err(Error::Structure(format!("generator {} fails the {name} condition", self.name))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorChecks {
    pub symmetry: bool,
    pub connectedness: bool,
    pub nondiagonality: bool,
    /// Rectangle form; equivalent to `nondiagonality`.
    pub nondiagonality_h: bool,
    pub borders: bool,
}

impl GeneratorChecks {
    pub fn all_pass(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.symmetry, "symmetry"),
            (self.connectedness, "connectedness"),
            (self.nondiagonality, "nondiagonality"),
            (self.nondiagonality_h, "nondiagonality (rectangle form)"),
            (self.borders, "borders-included"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The `2^D · D!` isometries of the grid cube, as maps on cell coordinates.
pub fn cube_isometries(dim: usize, l: usize) -> Vec<Box<dyn Fn(&[usize]) -> Cell + Send + Sync>> {
    let mut out: Vec<Box<dyn Fn(&[usize]) -> Cell + Send + Sync>> = Vec::new();
    for perm in permutations(dim) {
        for flips in 0..(1usize << dim) {
            let perm = perm.clone();
            out.push(Box::new(move |c: &[usize]| {
                (0..dim)
                    .map(|j| {
                        let v = c[perm[j]];
                        if flips >> j & 1 == 1 { l - 1 - v } else { v }
                    })
                    .collect()
            }));
        }
    }
    out
}

/// Invariance of the cell set under every isometry of the cube.
pub fn check_symmetry(g: &CarpetGenerator) -> bool {
    cube_isometries(g.dim, g.l).iter().all(|iso| g.cells.iter().all(|c| g.contains(&iso(c))))
}

/// Whether the union of the given grid cells has connected interior, i.e.
/// the cells are connected through shared `(D−1)`-faces. Empty sets count
/// as connected.
pub fn face_connected(cells: &[Cell]) -> bool {
    let set: HashSet<&[usize]> = cells.iter().map(Vec::as_slice).collect();
    let Some(first) = cells.first() else { return true };
    let mut seen: HashSet<Cell> = HashSet::from([first.clone()]);
    let mut queue = VecDeque::from([first.clone()]);
    while let Some(c) = queue.pop_front() {
        for n in face_neighbors(&c) {
            if set.contains(n.as_slice()) && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

fn face_neighbors(c: &[usize]) -> Vec<Cell> {
    let mut out = Vec::with_capacity(2 * c.len());
    for j in 0..c.len() {
        if c[j] > 0 {
            let mut n = c.to_vec();
            n[j] -= 1;
            out.push(n);
        }
        let mut n = c.to_vec();
        n[j] += 1;
        out.push(n);
    }
    out
}

/// Connected interior plus a face-path from `{x_1 = 0}` to `{x_1 = 1}`.
pub fn check_connectedness(g: &CarpetGenerator) -> bool {
    if !face_connected(&g.cells) {
        return false;
    }
    let touches_low = g.cells.iter().any(|c| c[0] == 0);
    let touches_high = g.cells.iter().any(|c| c[0] == g.l - 1);
    touches_low && touches_high
}

/// Every cell on the `x_1` axis edge is present.
pub fn check_borders(g: &CarpetGenerator) -> bool {
    (0..g.l).all(|k| {
        let mut c = vec![0; g.dim];
        c[0] = k;
        g.contains(&c)
    })
}

fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if extents.contains(&0) {
        return true;
    }
    let mut idx = vec![0; extents.len()];
    loop {
        if !f(&idx) {
            return false;
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return true;
            }
            idx[j] += 1;
            if idx[j] < extents[j] {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Nondiagonality at level `m`: every cube of side `2/l^m` aligned to the
/// level-`m` grid meets `Q_1` in an empty set or a set with connected
/// interior.
pub fn nondiagonality_at_level(g: &CarpetGenerator, m: usize) -> bool {
    if m == 0 {
        return true;
    }
    let side = g.l.pow(m as u32);
    let coarse = g.l.pow(m as u32 - 1);
    let extents = vec![side - 1; g.dim];
    let offsets: Vec<Cell> = {
        let mut v = Vec::new();
        for_each_index(&vec![2; g.dim], |o| {
            v.push(o.to_vec());
            true
        });
        v
    };
    for_each_index(&extents, |k| {
        let inside: Vec<Cell> = offsets
            .iter()
            .map(|o| k.iter().zip(o).map(|(a, b)| a + b).collect::<Cell>())
            .filter(|c| g.contains(&c.iter().map(|x| x / coarse).collect::<Cell>()))
            .collect();
        face_connected(&inside)
    })
}

/// Nondiagonality checked at `m = 2`, which is equivalent to all levels.
pub fn check_nondiagonality(g: &CarpetGenerator) -> bool {
    nondiagonality_at_level(g, 2)
}

/// Rectangle form: every box of level-1 cells with side lengths in
/// `{1/l, 2/l}` meets `Q_1` in an empty set or a set with connected interior.
pub fn check_nondiagonality_h(g: &CarpetGenerator) -> bool {
    for_each_index(&vec![2; g.dim], |shape| {
        let sides: Vec<usize> = shape.iter().map(|s| s + 1).collect();
        let extents: Vec<usize> = sides.iter().map(|s| g.l + 1 - s).collect();
        for_each_index(&extents, |k| {
            let mut inside = Vec::new();
            for_each_index(&sides, |o| {
                let c: Cell = k.iter().zip(o).map(|(a, b)| a + b).collect();
                if g.contains(&c) {
                    inside.push(c);
                }
                true
            });
            face_connected(&inside)
        })
    })
}

pub const CARPET_PRESET_NAMES: &[&str] = &["carpet-2d", "carpet-3d", "carpet-2d-l4"];

/// Standard carpet: the `3 × 3` grid without its center.
pub fn standard_carpet() -> CarpetGenerator {
    CarpetGenerator::from_pattern("carpet-2d", &["###", "#.#", "###"]).expect("valid preset")
}

/// Menger sponge: the 20 cells of the `3^3` grid with at most one middle
/// coordinate.
pub fn menger_sponge() -> CarpetGenerator {
    let mut cells = Vec::new();
    for_each_index(&[3, 3, 3], |c| {
        if c.iter().filter(|&&k| k == 1).count() <= 1 {
            cells.push(c.to_vec());
        }
        true
    });
    CarpetGenerator::new("carpet-3d", 3, 3, cells).expect("valid preset")
}

/// `4 × 4` grid without its central `2 × 2` block.
pub fn carpet_l4() -> CarpetGenerator {
    CarpetGenerator::from_pattern("carpet-2d-l4", &["####", "#..#", "#..#", "####"]).expect("valid preset")
}

pub fn carpet_by_name(name: &str) -> Result<CarpetGenerator> {
    match name {
        "carpet-2d" => Ok(standard_carpet()),
        "carpet-3d" => Ok(menger_sponge()),
        "carpet-2d-l4" => Ok(carpet_l4()),
        other => Err(Error::Invalid(format!(
            "unknown carpet preset {other:?} (available: {})",
            CARPET_PRESET_NAMES.join(", ")
        ))),
    }
}
