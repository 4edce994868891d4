//! Cell-level energy measures `ν_f(K_w)`, mutual measures `ν_{f,g}(K_w)`,
//! the averaged (Kusuoka-type) measure and the Φ-matrix field.
//!
//! For a piecewise harmonic `f` and a cell `w` at or below its level,
//! `ν_f(K_w) = 2 r_w^{-1} E^(0)(f∘ψ_w|_{V_0})`, so every table here is exact
//! over [`Rational`](crate::Rational).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{inverse_r_by_cell, HarmonicModel, PiecewiseHarmonic};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;
use crate::structure::{VertexTable, Word};

/// Values indexed by the words of one level (lexicographic order).
#[derive(Clone, Debug, PartialEq)]
pub struct CellMeasureTable<T> {
    pub level: usize,
    pub n_symbols: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> CellMeasureTable<T> {
    pub fn get(&self, w: &Word) -> &T {
        assert_eq!(w.level(), self.level);
        &self.values[w.index(self.n_symbols)]
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Sums children into parents: the table one level up.
    pub fn coarsen(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        let values = self
            .values
            .chunks(self.n_symbols)
            .map(|c| c.iter().fold(T::zero(), |acc, v| acc + v.clone()))
            .collect();
        Some(Self { level: self.level - 1, n_symbols: self.n_symbols, values })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Word, &T)> {
        let (m, s) = (self.level, self.n_symbols);
        self.values.iter().enumerate().map(move |(i, v)| (Word::from_index(i, m, s), v))
    }
}

/// Matrix measure `(ν_{f_i, f_j}(K_w))_{ij}` for every cell of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMatrixField<T> {
    pub level: usize,
    pub n_symbols: usize,
    pub d: usize,
    pub cells: Vec<Matrix<T>>,
}

impl<T: Scalar> EnergyMatrixField<T> {
    pub fn entry_table(&self, i: usize, j: usize) -> CellMeasureTable<T> {
        CellMeasureTable {
            level: self.level,
            n_symbols: self.n_symbols,
            values: self.cells.iter().map(|m| m.get(i, j).clone()).collect(),
        }
    }

    pub fn diagonal(&self, i: usize) -> CellMeasureTable<T> {
        self.entry_table(i, i)
    }

    /// `ν_𝐟 = (1/d) Σ_i ν_{f_i}` cellwise.
    pub fn kusuoka(&self) -> CellMeasureTable<T> {
        let d = T::from_i64(self.d as i64);
        CellMeasureTable {
            level: self.level,
            n_symbols: self.n_symbols,
            values: self.cells.iter().map(|m| m.trace() / d.clone()).collect(),
        }
    }

    /// Sums child matrices into parents.
    pub fn coarsen(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        let cells = self
            .cells
            .chunks(self.n_symbols)
            .map(|c| {
                let mut acc: Matrix<T> = Matrix::zeros(self.d, self.d);
                for m in c {
                    for i in 0..self.d {
                        for j in 0..self.d {
                            acc.set(i, j, acc.get(i, j).clone() + m.get(i, j).clone());
                        }
                    }
                }
                acc
            })
            .collect();
        Some(Self { level: self.level - 1, n_symbols: self.n_symbols, d: self.d, cells })
    }

    /// Field of the recombined tuple `f'_j = Σ_k c_{kj} f_k`: `Cᵀ N(w) C`.
    pub fn recombine(&self, c: &Matrix<T>) -> Self {
        let ct = c.transpose();
        Self {
            level: self.level,
            n_symbols: self.n_symbols,
            d: c.cols(),
            cells: self.cells.iter().map(|n| ct.mul(n).mul(c)).collect(),
        }
    }
}

/// `Φ̂(w)_{ij} = ν_{f_i,f_j}(K_w) / ν_𝐟(K_w)` where `ν_𝐟(K_w) > 0`, the zero
/// matrix elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiCellField<T> {
    pub level: usize,
    pub n_symbols: usize,
    pub d: usize,
    pub kusuoka: Vec<T>,
    pub matrices: Vec<Matrix<T>>,
}

impl<T: Scalar> PhiCellField<T> {
    pub fn from_energy(field: &EnergyMatrixField<T>) -> Self {
        let kusuoka = field.kusuoka().values;
        let matrices = field
            .cells
            .iter()
            .zip(&kusuoka)
            .map(|(n, k)| {
                if k.is_negligible() {
                    Matrix::zeros(field.d, field.d)
                } else {
                    n.map(|x| x.clone() / k.clone())
                }
            })
            .collect();
        Self { level: field.level, n_symbols: field.n_symbols, d: field.d, kusuoka, matrices }
    }

    pub fn is_defined(&self, index: usize) -> bool {
        !self.kusuoka[index].is_negligible()
    }

    pub fn get(&self, w: &Word) -> &Matrix<T> {
        &self.matrices[w.index(self.n_symbols)]
    }

    pub fn kusuoka_total(&self) -> T {
        self.kusuoka.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }
}

/// Per-level summary of the derivation-property diagnostic.
#[derive(Clone, Debug, Serialize)]
pub struct DerivationLevel {
    pub level: usize,
    pub fine_level: usize,
    /// `max_w |ν_{f²,g}(K_w) − 2 f(x_w) ν_{f,g}(K_w)| / ν_𝐟(K_w)`.
    pub max_deviation: f64,
    /// The same deviation further divided by `osc(f, K_w)`; bounded, not
    /// expected to vanish.
    pub max_osc_normalized: f64,
    /// `Σ_w |…| / ν_𝐟(K)`.
    pub total_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivationReport {
    pub levels: Vec<DerivationLevel>,
}

impl<T: Scalar> HarmonicModel<T> {
    /// Cell vectors of every function at the common level `max(level(f_i))`.
    fn tuple_cells(&self, fs: &[PiecewiseHarmonic<T>], tables: &[VertexTable]) -> Result<(usize, Vec<Vec<Vec<T>>>)> {
        if fs.is_empty() {
            return Err(Error::Invalid("need at least one function".into()));
        }
        let n0 = self.boundary_count();
        let start = fs.iter().map(|f| f.level).max().unwrap_or(0);
        if start > 0 && tables.len() <= start {
            return Err(Error::Invalid(format!("vertex tables up to level {start} are required")));
        }
        let per_fn = fs
            .iter()
            .map(|f| {
                if f.level == 0 {
                    if f.values.len() != n0 {
                        return Err(Error::Invalid("level-0 function has wrong length".into()));
                    }
                    return Ok(self.cell_values_at(vec![f.values.clone()], 0, start));
                }
                let g = self.refine_to(f, tables, start)?;
                Ok(self.cell_values(&g, &tables[start]))
            })
            .collect::<Result<Vec<_>>>()?;
        let count = self.symbol_count().pow(start as u32);
        let cells = (0..count).map(|c| per_fn.iter().map(|v| v[c].clone()).collect()).collect();
        Ok((start, cells))
    }

    fn refine_tuples(&self, parents: &[Vec<Vec<T>>]) -> Vec<Vec<Vec<T>>> {
        use rayon::prelude::*;
        let s = self.symbol_count();
        let out: Vec<Vec<Vec<Vec<T>>>> = parents
            .par_iter()
            .map(|tuple| {
                (0..s)
                    .map(|i| tuple.iter().map(|b| self.extension_matrix(i).mul_vec(b)).collect())
                    .collect()
            })
            .collect();
        out.into_iter().flatten().collect()
    }

    fn field_from_tuples(&self, level: usize, tuples: &[Vec<Vec<T>>], scales: &[T]) -> EnergyMatrixField<T> {
        use rayon::prelude::*;
        let d = tuples.first().map_or(0, Vec::len);
        let two = T::from_i64(2);
        let cells = tuples
            .par_iter()
            .zip(scales)
            .map(|(tuple, s)| {
                let images: Vec<Vec<T>> = tuple.iter().map(|b| self.energy0().mul_vec(b)).collect();
                let factor = two.clone() * s.clone();
                let mut m = Matrix::zeros(d, d);
                for i in 0..d {
                    for j in i..d {
                        let v = factor.clone() * dot(&tuple[i], &images[j]);
                        m.set(j, i, v.clone());
                        m.set(i, j, v);
                    }
                }
                m
            })
            .collect();
        EnergyMatrixField { level, n_symbols: self.symbol_count(), d, cells }
    }

    /// Matrix measures of the tuple `fs` at each requested level, computed in
    /// one descent of the word tree. Levels must be at least the tuple's level.
    pub fn energy_matrix_fields(
        &self,
        fs: &[PiecewiseHarmonic<T>],
        levels: &[usize],
        tables: &[VertexTable],
    ) -> Result<Vec<EnergyMatrixField<T>>> {
        let (start, mut tuples) = self.tuple_cells(fs, tables)?;
        if let Some(&bad) = levels.iter().find(|&&m| m < start) {
            return Err(Error::Invalid(format!("level {bad} is below the functions' level {start}")));
        }
        if let Some(fields) = crate::exact::matrix_fields(self, start, &tuples, levels) {
            return Ok(fields);
        }
        let deepest = levels.iter().copied().max().unwrap_or(start);
        let inv_r: Vec<T> = self.harmonic().weights().iter().map(|r| T::one() / r.clone()).collect();
        let mut scales = inverse_r_by_cell(self.harmonic().weights(), start);
        let mut out: Vec<Option<EnergyMatrixField<T>>> = vec![None; levels.len()];
        let mut level = start;
        loop {
            for (slot, &m) in out.iter_mut().zip(levels) {
                if m == level {
                    *slot = Some(self.field_from_tuples(level, &tuples, &scales));
                }
            }
            if level == deepest {
                break;
            }
            tuples = self.refine_tuples(&tuples);
            scales = scales.iter().flat_map(|p| inv_r.iter().map(move |i| p.clone() * i.clone())).collect();
            level += 1;
        }
        Ok(out.into_iter().map(|f| f.expect("every level visited")).collect())
    }

    pub fn energy_matrix_field(
        &self,
        fs: &[PiecewiseHarmonic<T>],
        m: usize,
        tables: &[VertexTable],
    ) -> Result<EnergyMatrixField<T>> {
        Ok(self.energy_matrix_fields(fs, &[m], tables)?.remove(0))
    }

    /// `ν_f(K_w)` for all `w ∈ W_m`.
    pub fn cell_energy_measure(&self, f: &PiecewiseHarmonic<T>, m: usize, tables: &[VertexTable]) -> Result<CellMeasureTable<T>> {
        Ok(self.energy_matrix_field(std::slice::from_ref(f), m, tables)?.diagonal(0))
    }

    /// `ν_{f,g}(K_w)` for all `w ∈ W_m`; signed.
    pub fn mutual_cell_measure(
        &self,
        f: &PiecewiseHarmonic<T>,
        g: &PiecewiseHarmonic<T>,
        m: usize,
        tables: &[VertexTable],
    ) -> Result<CellMeasureTable<T>> {
        Ok(self.energy_matrix_field(&[f.clone(), g.clone()], m, tables)?.entry_table(0, 1))
    }

    /// `ν_𝐟(K_w) = (1/d) Σ_i ν_{f_i}(K_w)`.
    pub fn kusuoka_table(&self, fs: &[PiecewiseHarmonic<T>], m: usize, tables: &[VertexTable]) -> Result<CellMeasureTable<T>> {
        Ok(self.energy_matrix_field(fs, m, tables)?.kusuoka())
    }

    pub fn phi_field(&self, fs: &[PiecewiseHarmonic<T>], m: usize, tables: &[VertexTable]) -> Result<PhiCellField<T>> {
        Ok(PhiCellField::from_energy(&self.energy_matrix_field(fs, m, tables)?))
    }

    /// Checks the derivation property `dν_{f²,g} = 2f dν_{f,g}` at cell
    /// resolution. For each coarse level `m`, the energy of `f²` is taken as
    /// the graph energy on level `m + fine_offset` and compared with
    /// `2 f(x_w) ν_{f,g}(K_w)`, `x_w = ψ_w(q_0)`.
    pub fn derivation_check(
        &self,
        f: &PiecewiseHarmonic<T>,
        g: &PiecewiseHarmonic<T>,
        levels: &[usize],
        fine_offset: usize,
        tables: &[VertexTable],
    ) -> Result<DerivationReport> {
        let (start, base) = self.tuple_cells(&[f.clone(), g.clone()], tables)?;
        let s = self.symbol_count();
        let two = T::from_i64(2);
        let mut out = Vec::new();
        for &m in levels {
            if m < start {
                return Err(Error::Invalid(format!("level {m} is below the functions' level {start}")));
            }
            let mut coarse = base.clone();
            for _ in start..m {
                coarse = self.refine_tuples(&coarse);
            }
            let coarse_scale = inverse_r_by_cell(self.harmonic().weights(), m);
            let mut fine = coarse.clone();
            for _ in 0..fine_offset {
                fine = self.refine_tuples(&fine);
            }
            let fine_scale = inverse_r_by_cell(self.harmonic().weights(), m + fine_offset);
            let block = s.pow(fine_offset as u32);
            let mut kusuoka_total = 0.0;
            let mut abs_total = 0.0;
            let mut max_dev: f64 = 0.0;
            let mut max_osc: f64 = 0.0;
            for (c, tuple) in coarse.iter().enumerate() {
                let (bf, bg) = (&tuple[0], &tuple[1]);
                let nu_f = two.clone() * coarse_scale[c].clone() * self.boundary_energy(bf, bf);
                let nu_g = two.clone() * coarse_scale[c].clone() * self.boundary_energy(bg, bg);
                let nu_fg = two.clone() * coarse_scale[c].clone() * self.boundary_energy(bf, bg);
                let nu_sq_g = (c * block..(c + 1) * block).fold(T::zero(), |acc, v| {
                    let sq: Vec<T> = fine[v][0].iter().map(|x| x.clone() * x.clone()).collect();
                    acc + two.clone() * fine_scale[v].clone() * self.boundary_energy(&sq, &fine[v][1])
                });
                let dev = (nu_sq_g - two.clone() * bf[0].clone() * nu_fg).abs().to_f64();
                let weight = ((nu_f + nu_g) / two.clone()).to_f64();
                kusuoka_total += weight;
                abs_total += dev;
                if weight > 0.0 {
                    let rel = dev / weight;
                    max_dev = max_dev.max(rel);
                    let osc = bf.iter().map(Scalar::to_f64).fold(f64::NEG_INFINITY, f64::max)
                        - bf.iter().map(Scalar::to_f64).fold(f64::INFINITY, f64::min);
                    if osc > 0.0 {
                        max_osc = max_osc.max(rel / osc);
                    }
                }
            }
            out.push(DerivationLevel {
                level: m,
                fine_level: m + fine_offset,
                max_deviation: max_dev,
                max_osc_normalized: max_osc,
                total_deviation: if kusuoka_total > 0.0 { abs_total / kusuoka_total } else { 0.0 },
            });
        }
        Ok(DerivationReport { levels: out })
    }
}
