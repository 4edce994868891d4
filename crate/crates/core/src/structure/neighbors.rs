use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structure::pcf::PcfStructure;
use crate::structure::word::Word;

/// Cells of a self-similar set at a fixed level, with the "closed cells
/// intersect" relation.
pub trait CellComplex {
    fn symbol_count(&self) -> usize;

    /// For every cell of level `level` (lexicographic index), the indices of
    /// all level-`level` cells meeting it, itself included.
    fn touching_cells(&self, level: usize) -> Result<Vec<Vec<usize>>>;
}

impl CellComplex for PcfStructure {
    fn symbol_count(&self) -> usize {
        PcfStructure::symbol_count(self)
    }

    /// Cells of a p.c.f. set meet exactly in shared vertices of `V_m`.
    fn touching_cells(&self, level: usize) -> Result<Vec<Vec<usize>>> {
        let table = self.vertex_table(level)?;
        let inc = table.incidence();
        Ok((0..table.cell_count())
            .map(|c| {
                let set: BTreeSet<usize> = table.cell(c).iter().flat_map(|&v| inc[v].iter().copied()).collect();
                set.into_iter().collect()
            })
            .collect())
    }
}

/// `N_n(w)`: `N_0(w) = {w}`, and `N_n(w)` collects the cells of the same
/// level meeting some cell of `N_{n−1}(w)`.
pub fn neighbor_set<C: CellComplex + ?Sized>(complex: &C, w: &Word, n: usize) -> Result<BTreeSet<Word>> {
    if w.is_empty() {
        return Err(Error::Invalid("neighbor sets need a nonempty word".into()));
    }
    let s = complex.symbol_count();
    let level = w.level();
    let mut current: BTreeSet<usize> = BTreeSet::from([w.index(s)]);
    if n > 0 {
        let touching = complex.touching_cells(level)?;
        for _ in 0..n {
            let next: BTreeSet<usize> =
                current.iter().flat_map(|&c| touching[c].iter().copied()).collect();
            if next == current {
                break;
            }
            current = next;
        }
    }
    Ok(current.into_iter().map(|i| Word::from_index(i, level, s)).collect())
}
