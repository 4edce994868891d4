//! Harmonic structures `(D, r)`, graph forms `E^(m)`, traces, harmonic
//! extension, energies and pullbacks of piecewise harmonic functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymForm};
use crate::scalar::{rational_approximation, Rational, Scalar};
use crate::structure::{PcfStructure, VertexTable, Word};

/// Boundary form matrix `D` on `V_0` and renormalization weights `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicStructure<T> {
    d: Matrix<T>,
    r: Vec<T>,
}

/// Outcome of checking `D` against the conditions (D1)–(D3).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub symmetric: bool,
    /// `D` is nonpositive-definite.
    pub d1: bool,
    /// `D u = 0` exactly for constant `u`.
    pub d2: bool,
    /// Off-diagonal entries are nonnegative.
    pub d3: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.symmetric && self.d1 && self.d2 && self.d3
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.symmetric {
            out.push("symmetry");
        }
        if !self.d1 {
            out.push("D1");
        }
        if !self.d2 {
            out.push("D2");
        }
        if !self.d3 {
            out.push("D3");
        }
        out
    }
}

/// Checks (D1) nonpositive-definiteness, (D2) kernel equal to the
/// constants and (D3) nonnegative off-diagonal entries.
pub fn validate_harmonic_structure_matrix<T: Scalar>(d: &Matrix<T>) -> Result<ValidityReport> {
    if !d.is_square() || d.rows() < 2 {
        return Err(Error::Invalid(format!("D must be square of order >= 2, got {}x{}", d.rows(), d.cols())));
    }
    let n = d.rows();
    let symmetric = d.is_symmetric();
    let neg = d.neg();
    let psd_rank = if symmetric { neg.psd_rank() } else { None };
    let d1 = psd_rank.is_some();
    let constants_in_kernel = d.mul_vec(&vec![T::one(); n]).iter().all(Scalar::is_negligible);
    let d2 = constants_in_kernel && d.rank() == n - 1;
    let d3 = (0..n).all(|i| (0..n).all(|j| i == j || !d.get(i, j).is_negative() || d.get(i, j).is_negligible()));
    Ok(ValidityReport { symmetric, d1, d2, d3 })
}

impl<T: Scalar> HarmonicStructure<T> {
    /// Checks shapes, positivity of `r` and (D1)–(D3).
    pub fn new(d: Matrix<T>, r: Vec<T>) -> Result<Self> {
        let report = validate_harmonic_structure_matrix(&d)?;
        if !report.is_valid() {
            return Err(Error::Structure(format!("D fails {}", report.failures().join(", "))));
        }
        if let Some((i, ri)) = r.iter().enumerate().find(|(_, ri)| !ri.is_positive()) {
            return Err(Error::Invalid(format!("r_{i} = {ri} is not positive")));
        }
        Ok(Self { d, r })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.d
    }

    pub fn weights(&self) -> &[T] {
        &self.r
    }

    /// `0 < r_i < 1` for all `i`.
    pub fn is_regular(&self) -> bool {
        self.r.iter().all(|r| r.is_positive() && *r < T::one())
    }

    /// `r_w = r_{w₁} ⋯ r_{w_m}`.
    pub fn r_word(&self, w: &Word) -> T {
        w.symbols().fold(T::one(), |acc, s| acc * self.r[s.index()].clone())
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> HarmonicStructure<U> {
        HarmonicStructure { d: self.d.map(&f), r: self.r.iter().map(f).collect() }
    }
}

/// `E^(m)` as a sparse symmetric coefficient table on `V_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphForm<T> {
    pub level: usize,
    pub form: SymForm<T>,
}

impl<T: Scalar> GraphForm<T> {
    pub fn energy(&self, u: &[T]) -> T {
        self.form.quadratic(u)
    }

    pub fn mutual(&self, u: &[T], v: &[T]) -> T {
        self.form.bilinear(u, v)
    }
}

/// `r_w^{-1}` for every cell of level `m`, in lexicographic order.
pub fn inverse_r_by_cell<T: Scalar>(r: &[T], m: usize) -> Vec<T> {
    let inv: Vec<T> = r.iter().map(|x| T::one() / x.clone()).collect();
    let mut out = vec![T::one()];
    for _ in 0..m {
        out = out.iter().flat_map(|p| inv.iter().map(move |i| p.clone() * i.clone())).collect();
    }
    out
}

/// `E^(m)(u, v) = Σ_{w ∈ W_m} r_w^{-1} E^(0)(u∘ψ_w, v∘ψ_w)` on the table's `V_m`.
pub fn assemble_graph_form<T: Scalar>(hs: &HarmonicStructure<T>, table: &VertexTable) -> GraphForm<T> {
    let e0 = hs.d.neg();
    let n0 = e0.rows();
    let scales = inverse_r_by_cell(&hs.r, table.level());
    let mut form = SymForm::new(table.vertex_count());
    for (cell, scale) in table.cells().iter().zip(&scales) {
        for a in 0..n0 {
            for b in a..n0 {
                let q = e0.get(a, b);
                if q.is_zero() {
                    continue;
                }
                form.add(cell[a], cell[b], q.clone() * scale.clone());
            }
        }
    }
    GraphForm { level: table.level(), form }
}

/// Schur complement of `g` onto the vertex ids in `onto` (see
/// [`SymForm::trace_onto`]).
pub fn trace_form<T: Scalar>(g: &GraphForm<T>, onto: &[usize]) -> Result<SymForm<T>> {
    g.form.trace_onto(onto)
}

/// Result of comparing the trace of `E^(1)` on `V_0` with `E^(0)`.
#[derive(Clone, Debug)]
pub struct HarmonicCheck<T> {
    pub holds: bool,
    /// `trace(E^(1)) − E^(0)` as a coefficient matrix.
    pub residual: Matrix<T>,
}

/// Whether `(D, r)` is a harmonic structure: the trace of `E^(1)` onto
/// `V_0` reproduces `E^(0)`.
pub fn verify_harmonic_structure<T: Scalar>(s: &PcfStructure, hs: &HarmonicStructure<T>) -> Result<HarmonicCheck<T>> {
    check_dims(s, hs)?;
    let level1 = s.vertex_table(1)?;
    let g = assemble_graph_form(hs, &level1);
    let onto: Vec<usize> = (0..s.boundary_count()).collect();
    let traced = trace_form(&g, &onto)?.to_dense();
    let residual = traced.sub(&hs.d.neg());
    Ok(HarmonicCheck { holds: residual.is_zero_matrix(), residual })
}

fn check_dims<T: Scalar>(s: &PcfStructure, hs: &HarmonicStructure<T>) -> Result<()> {
    if hs.d.rows() != s.boundary_count() {
        return Err(Error::Invalid(format!(
            "D has order {} but the structure has {} boundary vertices",
            hs.d.rows(),
            s.boundary_count()
        )));
    }
    if hs.r.len() != s.symbol_count() {
        return Err(Error::Invalid(format!("r has {} entries for {} maps", hs.r.len(), s.symbol_count())));
    }
    Ok(())
}

/// Outcome of the uniform renormalization search.
#[derive(Clone, Debug, Serialize)]
pub struct RenormalizationSolution {
    /// Exact rational `r` when a rounded iterate verified exactly.
    #[serde(serialize_with = "crate::io::serialize_opt_rational")]
    pub exact: Option<Rational>,
    pub estimate: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Finds the uniform weight `r` making `(D, (r, …, r))` a harmonic structure.
///
/// Each step rescales `r` by the least-squares ratio between the trace of
/// `E^(1)` and `E^(0)`; every iterate is rounded to a nearby rational and
/// verified exactly.
pub fn solve_renormalization_scalar(
    s: &PcfStructure,
    d: &Matrix<Rational>,
    r0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RenormalizationSolution> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Invalid(format!("initial guess r0 = {r0} must be positive")));
    }
    let unit = HarmonicStructure::new(d.clone(), vec![Rational::from_i64(1); s.symbol_count()])?;
    check_dims(s, &unit)?;
    let level1 = s.vertex_table(1)?;
    let onto: Vec<usize> = (0..s.boundary_count()).collect();
    // Trace of E^(1) at r = 1; for uniform r the trace is this divided by r.
    let unit_trace = trace_form(&assemble_graph_form(&unit, &level1), &onto)?.to_dense();
    let e0 = d.neg();
    let unit_trace_f = unit_trace.map(Scalar::to_f64);
    let e0_f = e0.map(Scalar::to_f64);
    let e0_norm2: f64 = e0_f.to_rows().iter().flatten().map(|x| x * x).sum();

    let mut r = r0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let traced = unit_trace_f.scale(&(1.0 / r));
        let inner: f64 = traced.to_rows().iter().flatten().zip(e0_f.to_rows().iter().flatten()).map(|(a, b)| a * b).sum();
        r *= inner / e0_norm2;
        if !(r.is_finite() && r > 0.0) {
            break;
        }
        residual = unit_trace_f.scale(&(1.0 / r)).sub(&e0_f).to_rows().iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        if let Some(candidate) = rational_approximation(r, 1_000_000) {
            if candidate > Rational::from_i64(0) && e0.scale(&candidate) == unit_trace {
                return Ok(RenormalizationSolution { exact: Some(candidate), estimate: r, iterations: it, residual: 0.0 });
            }
        }
        if residual < tol {
            return Ok(RenormalizationSolution { exact: None, estimate: r, iterations: it, residual });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// Function in `H_m`, given by its values on `V_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseHarmonic<T> {
    pub level: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> PiecewiseHarmonic<T> {
    pub fn new(level: usize, values: Vec<T>) -> Self {
        Self { level, values }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.level, other.level, "functions live on different levels");
        Self::new(self.level, self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.level, self.values.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PiecewiseHarmonic<U> {
        PiecewiseHarmonic { level: self.level, values: self.values.iter().map(f).collect() }
    }

    pub fn min_value(&self) -> T {
        self.values.iter().skip(1).fold(self.values[0].clone(), |m, v| if *v < m { v.clone() } else { m })
    }

    pub fn max_value(&self) -> T {
        self.values.iter().skip(1).fold(self.values[0].clone(), |m, v| if *v > m { v.clone() } else { m })
    }
}

/// A verified harmonic structure on a p.c.f. structure, with the per-symbol
/// extension matrices `A_i` (values on `ψ_i(V_0)` from values on `V_0`).
#[derive(Clone, Debug)]
pub struct HarmonicModel<T> {
    structure: PcfStructure,
    harmonic: HarmonicStructure<T>,
    energy0: Matrix<T>,
    extension: Vec<Matrix<T>>,
}

impl<T: Scalar> HarmonicModel<T> {
    /// Fails unless `(D, r)` verifies as a harmonic structure on `s`.
    pub fn new(structure: PcfStructure, harmonic: HarmonicStructure<T>) -> Result<Self> {
        let check = verify_harmonic_structure(&structure, &harmonic)?;
        if !check.holds {
            return Err(Error::Structure(format!(
                "{}: (D, r) is not a harmonic structure (trace of E^(1) differs from E^(0))",
                structure.name()
            )));
        }
        let level1 = structure.vertex_table(1)?;
        let n0 = structure.boundary_count();
        let n1 = level1.vertex_count();
        let q = assemble_graph_form(&harmonic, &level1).form.to_dense();
        let ni = n1 - n0;
        let mut q_ii = Matrix::zeros(ni, ni);
        let mut q_ib = Matrix::zeros(ni, n0);
        for a in 0..ni {
            for b in 0..ni {
                q_ii.set(a, b, q.get(n0 + a, n0 + b).clone());
            }
            for b in 0..n0 {
                q_ib.set(a, b, -q.get(n0 + a, b).clone());
            }
        }
        let interior = if ni > 0 { q_ii.solve(&q_ib)? } else { Matrix::zeros(0, n0) };
        let row_of = |id: usize| -> Vec<T> {
            if id < n0 {
                (0..n0).map(|j| if j == id { T::one() } else { T::zero() }).collect()
            } else {
                interior.row(id - n0).to_vec()
            }
        };
        let extension = (0..structure.symbol_count())
            .map(|i| Matrix::from_rows(level1.cell(i).iter().map(|&id| row_of(id)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { energy0: harmonic.d.neg(), structure, harmonic, extension })
    }

    pub fn structure(&self) -> &PcfStructure {
        &self.structure
    }

    pub fn harmonic(&self) -> &HarmonicStructure<T> {
        &self.harmonic
    }

    /// `−D`, the coefficient matrix of `E^(0)`.
    pub fn energy0(&self) -> &Matrix<T> {
        &self.energy0
    }

    pub fn extension_matrix(&self, symbol: usize) -> &Matrix<T> {
        &self.extension[symbol]
    }

    pub fn symbol_count(&self) -> usize {
        self.structure.symbol_count()
    }

    pub fn boundary_count(&self) -> usize {
        self.structure.boundary_count()
    }

    /// Same model over another scalar type.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> HarmonicModel<U> {
        HarmonicModel {
            structure: self.structure.clone(),
            harmonic: self.harmonic.map_scalar(&f),
            energy0: self.energy0.map(&f),
            extension: self.extension.iter().map(|a| a.map(&f)).collect(),
        }
    }

    /// `E^(0)(u, v) = (−D u, v)`.
    pub fn boundary_energy(&self, u: &[T], v: &[T]) -> T {
        self.energy0.bilinear(u, v)
    }

    /// Refines a level-`k` function to level `k + 1` by cellwise extension;
    /// `current` and `next` are the vertex tables of levels `k` and `k + 1`.
    pub fn refine(
        &self,
        f: &PiecewiseHarmonic<T>,
        current: &VertexTable,
        next: &VertexTable,
    ) -> Result<PiecewiseHarmonic<T>> {
        if current.level() != f.level || next.level() != f.level + 1 {
            return Err(Error::Invalid(format!(
                "refining a level-{} function needs vertex tables of levels {} and {}",
                f.level,
                f.level,
                f.level + 1
            )));
        }
        let s = self.symbol_count();
        let mut values = vec![T::zero(); next.vertex_count()];
        values[..f.values.len()].clone_from_slice(&f.values);
        for (parent, ids) in current.cells().iter().enumerate() {
            let b: Vec<T> = ids.iter().map(|&i| f.values[i].clone()).collect();
            for i in 0..s {
                let child = next.cell(parent * s + i);
                for (slot, v) in child.iter().zip(self.extension[i].mul_vec(&b)) {
                    if *slot >= f.values.len() {
                        values[*slot] = v;
                    }
                }
            }
        }
        Ok(PiecewiseHarmonic::new(f.level + 1, values))
    }

    /// Refines `f` up to level `m`; `tables` must cover levels `f.level..=m`
    /// (indexed by level).
    pub fn refine_to(&self, f: &PiecewiseHarmonic<T>, tables: &[VertexTable], m: usize) -> Result<PiecewiseHarmonic<T>> {
        if m < f.level {
            return Err(Error::Invalid(format!("cannot refine a level-{} function to level {m}", f.level)));
        }
        if tables.len() <= m {
            return Err(Error::Invalid(format!("vertex tables only cover levels < {}", tables.len())));
        }
        let mut g = f.clone();
        while g.level < m {
            g = self.refine(&g, &tables[g.level], &tables[g.level + 1])?;
        }
        Ok(g)
    }

    /// The harmonic function with boundary values `u`, as an element of `H_m`.
    pub fn harmonic_extension(&self, u: &[T], tables: &[VertexTable], m: usize) -> Result<PiecewiseHarmonic<T>> {
        if u.len() != self.boundary_count() {
            return Err(Error::Invalid(format!(
                "boundary data has {} values for {} boundary vertices",
                u.len(),
                self.boundary_count()
            )));
        }
        self.refine_to(&PiecewiseHarmonic::new(0, u.to_vec()), tables, m)
    }

    /// Values of `f` on `ψ_w(V_0)` for every cell `w` of `f`'s level.
    pub fn cell_values(&self, f: &PiecewiseHarmonic<T>, table: &VertexTable) -> Vec<Vec<T>> {
        assert_eq!(table.level(), f.level, "vertex table level mismatch");
        table.cells().iter().map(|ids| ids.iter().map(|&i| f.values[i].clone()).collect()).collect()
    }

    /// Pushes cell boundary vectors one level down: child `w·i` receives
    /// `A_i` applied to the vector of `w`.
    pub fn refine_cell_values(&self, parents: &[Vec<T>]) -> Vec<Vec<T>> {
        use rayon::prelude::*;
        let s = self.symbol_count();
        let children: Vec<Vec<Vec<T>>> = parents
            .par_iter()
            .map(|b| (0..s).map(|i| self.extension[i].mul_vec(b)).collect())
            .collect();
        children.into_iter().flatten().collect()
    }

    /// Boundary vectors on all cells of level `m` of a function whose
    /// level-`start` cell vectors are `cells`.
    pub fn cell_values_at(&self, cells: Vec<Vec<T>>, start: usize, m: usize) -> Vec<Vec<T>> {
        let mut cur = cells;
        for _ in start..m {
            cur = self.refine_cell_values(&cur);
        }
        cur
    }

    /// `E(f, g) = E^(m)(f, g)` computed cellwise at the functions' level.
    pub fn mutual_energy(&self, f: &PiecewiseHarmonic<T>, g: &PiecewiseHarmonic<T>, table: &VertexTable) -> T {
        let scales = inverse_r_by_cell(&self.harmonic.r, f.level);
        self.cell_values(f, table)
            .iter()
            .zip(self.cell_values(g, table))
            .zip(scales)
            .fold(T::zero(), |acc, ((a, b), s)| acc + s * self.boundary_energy(a, &b))
    }

    pub fn energy(&self, f: &PiecewiseHarmonic<T>, table: &VertexTable) -> T {
        self.mutual_energy(f, f, table)
    }

    /// `E^(m)` on the table's vertex set.
    pub fn graph_form(&self, table: &VertexTable) -> GraphForm<T> {
        assemble_graph_form(&self.harmonic, table)
    }

    /// `ψ_w^* f = f ∘ ψ_w`, an element of `H_{m − |w|}`. `tables` must
    /// contain the vertex tables of levels `m − |w|` and `m`.
    pub fn pullback(&self, f: &PiecewiseHarmonic<T>, w: &Word, tables: &[VertexTable]) -> Result<PiecewiseHarmonic<T>> {
        if w.level() > f.level {
            return Err(Error::Invalid(format!("cannot pull a level-{} function back by {w}", f.level)));
        }
        let low = f.level - w.level();
        if tables.len() <= f.level {
            return Err(Error::Invalid(format!("vertex tables only cover levels < {}", tables.len())));
        }
        let s = self.symbol_count();
        let (small, big) = (&tables[low], &tables[f.level]);
        let offset = w.index(s) * s.pow(low as u32);
        let mut values = vec![T::zero(); small.vertex_count()];
        for v in 0..small.cell_count() {
            for (slot, id) in small.cell(v).iter().zip(big.cell(offset + v)) {
                values[*slot] = f.values[*id].clone();
            }
        }
        Ok(PiecewiseHarmonic::new(low, values))
    }
}
