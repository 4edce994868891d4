//! Rank statistics of Φ̂ fields, the cell-level blowup search and the
//! renormalization of a tuple to identity Φ.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicModel, PiecewiseHarmonic};
use crate::linalg::Matrix;
use crate::measures::{EnergyMatrixField, PhiCellField};
use crate::scalar::Scalar;
use crate::structure::{VertexTable, Word};

/// Fixed tolerance of the iterative eigensolver used for `d > 3`.
pub const EIGEN_TOLERANCE: f64 = 1e-12;

/// Eigenvalues of a symmetric matrix in descending order.
///
/// For `d ≤ 3` the characteristic polynomial is formed exactly in `T` and
/// only its roots are taken in floating point.
pub fn symmetric_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Vec<f64> {
    let d = m.rows();
    let mut eig = match d {
        0 => Vec::new(),
        1 => vec![m.get(0, 0).to_f64()],
        2 => {
            let tr = m.get(0, 0).clone() + m.get(1, 1).clone();
            let det = m.get(0, 0).clone() * m.get(1, 1).clone() - m.get(0, 1).clone() * m.get(1, 0).clone();
            let disc = tr.clone() * tr.clone() - T::from_i64(4) * det.clone();
            let root = disc.to_f64().max(0.0).sqrt();
            let tr = tr.to_f64();
            let top = (tr + root) / 2.0;
            // det / λ₁ avoids cancellation in the small eigenvalue.
            let bottom = if top > 0.0 { det.to_f64() / top } else { (tr - root) / 2.0 };
            vec![top, bottom]
        }
        3 => {
            let a = |i: usize, j: usize| m.get(i, j).clone();
            let c2 = m.trace();
            let c1 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2)
                - a(1, 2) * a(2, 1);
            let c0 = m.determinant();
            cubic_symmetric_roots(c2.to_f64(), c1.to_f64(), c0.to_f64())
        }
        _ => {
            let dm = DMatrix::from_fn(d, d, |i, j| m.get(i, j).to_f64());
            SymmetricEigen::try_new(dm, EIGEN_TOLERANCE * f64::EPSILON.max(1e-16), 10_000)
                .map(|e| e.eigenvalues.iter().copied().collect())
                .unwrap_or_else(|| vec![f64::NAN; d])
        }
    };
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

/// Real roots of `λ³ − c2 λ² + c1 λ − c0` (all real for symmetric matrices).
fn cubic_symmetric_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let shift = c2 / 3.0;
    // Depressed cubic t³ + p t + q with λ = t + shift.
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
    if p.abs() < 1e-300 {
        let t = (-q).cbrt();
        return vec![t + shift; 3];
    }
    let r = (-p / 3.0).max(0.0).sqrt();
    let arg = if r > 0.0 { (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0) } else { 0.0 };
    let phi = arg.acos() / 3.0;
    (0..3)
        .map(|k| 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
        .collect()
}

/// Number of eigenvalues exceeding `eps · λ₁` (zero for the zero matrix).
pub fn eps_rank(eigenvalues: &[f64], eps: f64) -> usize {
    match eigenvalues.first() {
        Some(&top) if top > 0.0 => eigenvalues.iter().filter(|&&l| l > eps * top).count(),
        _ => 0,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSpectrum {
    pub word: String,
    /// `ν_𝐟(K_w) / ν_𝐟(K)`.
    pub weight: f64,
    pub eigenvalues: Vec<f64>,
    pub eps_rank: usize,
}

/// ε-rank statistics of a Φ̂ field at one level.
#[derive(Clone, Debug, Serialize)]
pub struct RankSpectrumReport {
    pub level: usize,
    pub epsilon: f64,
    pub d: usize,
    /// `histogram[k]` is the ν-weighted mass of cells with ε-rank `k`.
    pub histogram: Vec<f64>,
    /// Largest ε-rank over cells of positive mass.
    pub max_rank: usize,
    /// ν-weighted mass of cells with `λ₂/λ₁ > ε`.
    pub mass_ratio_above: f64,
    /// `ν_𝐟(K)` as a decimal.
    pub total_mass: f64,
    #[serde(skip)]
    pub cells: Vec<CellSpectrum>,
}

impl RankSpectrumReport {
    /// ν-mass of cells with ε-rank at least `k`.
    pub fn mass_at_least(&self, k: usize) -> f64 {
        self.histogram.iter().skip(k).sum()
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

/// Rank statistics of an already computed Φ̂ field.
pub fn rank_spectrum_of<T: Scalar>(phi: &PhiCellField<T>, eps: f64) -> Result<RankSpectrumReport> {
    use rayon::prelude::*;
    check_epsilon(eps)?;
    let total = phi.kusuoka_total().to_f64();
    let cells: Vec<CellSpectrum> = (0..phi.matrices.len())
        .into_par_iter()
        .map(|i| {
            let eigenvalues = if phi.is_defined(i) { symmetric_eigenvalues(&phi.matrices[i]) } else { vec![0.0; phi.d] };
            CellSpectrum {
                word: Word::from_index(i, phi.level, phi.n_symbols).to_string(),
                weight: if total > 0.0 { phi.kusuoka[i].to_f64() / total } else { 0.0 },
                eps_rank: eps_rank(&eigenvalues, eps),
                eigenvalues,
            }
        })
        .collect();
    let mut histogram = vec![0.0; phi.d + 1];
    let mut max_rank = 0;
    let mut above = 0.0;
    for c in &cells {
        histogram[c.eps_rank] += c.weight;
        if c.weight > 0.0 {
            max_rank = max_rank.max(c.eps_rank);
        }
        if c.eigenvalues.len() >= 2 && c.eigenvalues[0] > 0.0 && c.eigenvalues[1] / c.eigenvalues[0] > eps {
            above += c.weight;
        }
    }
    Ok(RankSpectrumReport {
        level: phi.level,
        epsilon: eps,
        d: phi.d,
        histogram,
        max_rank,
        mass_ratio_above: above,
        total_mass: total,
        cells,
    })
}

/// `rank_spectrum` at several levels from a single descent of the word tree.
pub fn rank_spectra<T: Scalar>(
    model: &HarmonicModel<T>,
    fs: &[PiecewiseHarmonic<T>],
    levels: &[usize],
    eps: f64,
    tables: &[VertexTable],
) -> Result<Vec<RankSpectrumReport>> {
    check_epsilon(eps)?;
    model
        .energy_matrix_fields(fs, levels, tables)?
        .iter()
        .map(|f| rank_spectrum_of(&PhiCellField::from_energy(f), eps))
        .collect()
}

pub fn rank_spectrum<T: Scalar>(
    model: &HarmonicModel<T>,
    fs: &[PiecewiseHarmonic<T>],
    m: usize,
    eps: f64,
    tables: &[VertexTable],
) -> Result<RankSpectrumReport> {
    Ok(rank_spectra(model, fs, &[m], eps, tables)?.remove(0))
}

/// Linear recombination turning an SPD target `L` into the identity:
/// `C = U Λ^{-1/2}` with `Uᵀ L U = Λ`.
#[derive(Clone, Debug, Serialize)]
pub struct Renormalization {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors of `L`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `C[k][i]`: weight of `f_k` in `h'_i`.
    pub coefficients: Vec<Vec<f64>>,
}

impl Renormalization {
    pub fn coefficient_matrix(&self) -> Matrix<f64> {
        Matrix::from_rows(self.coefficients.clone()).expect("square")
    }

    pub fn eigenvector_matrix(&self) -> Matrix<f64> {
        Matrix::from_rows(self.eigenvectors.clone()).expect("square")
    }
}

/// Diagonalizes `L`, rejecting it unless all leading principal minors are
/// positive. Eigenpairs are ordered by the position of each eigenvector's
/// largest component, with that component made positive.
pub fn renormalization_map(l: &Matrix<f64>) -> Result<Renormalization> {
    let d = l.rows();
    if !l.is_square() || d == 0 {
        return Err(Error::Invalid("target matrix must be square and nonempty".into()));
    }
    if !l.is_symmetric() {
        return Err(Error::Invalid("target matrix is not symmetric".into()));
    }
    if l.leading_minors().iter().any(|m| *m <= 0.0) {
        return Err(Error::Invalid("target matrix is not positive definite".into()));
    }
    let dm = DMatrix::from_fn(d, d, |i, j| *l.get(i, j));
    let eig = SymmetricEigen::new(dm);
    let mut pairs: Vec<(usize, f64, Vec<f64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = (0..d).max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap()).unwrap_or(0);
            if v[lead] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (lead, eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.partial_cmp(&a.1).unwrap()));
    if pairs.iter().any(|p| p.1 <= 0.0) {
        return Err(Error::Invalid("target matrix is not positive definite".into()));
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..d).map(|k| pairs.iter().map(|p| p.2[k]).collect()).collect();
    let coefficients = (0..d)
        .map(|k| pairs.iter().map(|p| p.2[k] / p.1.sqrt()).collect())
        .collect();
    Ok(Renormalization { eigenvalues, eigenvectors, coefficients })
}

/// `h'_i = λ_i^{-1/2} Σ_k u_{ki} f_k`, so that cells with `Φ̂ = L` get `Φ̂' = I`.
pub fn renormalize_pair<T: Scalar>(l: &Matrix<f64>, fs: &[PiecewiseHarmonic<T>]) -> Result<Vec<PiecewiseHarmonic<f64>>> {
    let map = renormalization_map(l)?;
    let d = l.rows();
    if fs.len() != d {
        return Err(Error::Invalid(format!("target is {d}x{d} but {} functions were given", fs.len())));
    }
    let level = fs[0].level;
    if fs.iter().any(|f| f.level != level) {
        return Err(Error::Invalid("functions must share a level".into()));
    }
    let floats: Vec<Vec<f64>> = fs.iter().map(|f| f.values.iter().map(Scalar::to_f64).collect()).collect();
    Ok((0..d)
        .map(|i| {
            let values = (0..floats[0].len())
                .map(|v| (0..d).map(|k| map.coefficients[k][i] * floats[k][v]).sum())
                .collect();
            PiecewiseHarmonic::new(level, values)
        })
        .collect())
}

/// Applies the renormalization to a matrix-measure field: `Cᵀ N(w) C`.
pub fn renormalize_field(l: &Matrix<f64>, field: &EnergyMatrixField<f64>) -> Result<EnergyMatrixField<f64>> {
    let map = renormalization_map(l)?;
    if field.d != l.rows() {
        return Err(Error::Invalid("field and target sizes differ".into()));
    }
    Ok(field.recombine(&map.coefficient_matrix()))
}

/// Options of [`blowup_search`].
#[derive(Clone, Debug, Serialize)]
pub struct BlowupOptions {
    /// Determinant threshold `a`.
    pub threshold: f64,
    /// Neighborhood radii are `1/k` for the successive descent steps; the
    /// last entry repeats.
    pub shrink: Vec<u32>,
    /// Level at which the target `L` is chosen.
    pub reference_level: usize,
    pub max_level: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupStep {
    pub word: String,
    pub phi: Vec<Vec<f64>>,
    pub det: f64,
    pub distance: f64,
    /// ν-fraction of the cell's deepest descendants with `det ≥ a` within `1/k` of `L`.
    pub score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupTrace {
    pub target: Vec<Vec<f64>>,
    pub target_word: Option<String>,
    pub threshold: f64,
    /// `(level, ν-fraction of cells with det Φ̂ ≥ a)`.
    pub candidate_mass: Vec<(usize, f64)>,
    pub steps: Vec<BlowupStep>,
    /// First level with no cell satisfying `det Φ̂ ≥ a`.
    pub failure_depth: Option<usize>,
    /// Level where no child of the current cell had any descendant near `L`.
    pub stopped_at: Option<usize>,
    pub degenerate: bool,
    /// `E(h'_i, h'_j)` for the renormalized pullbacks at the final cell.
    pub renormalized_energy: Option<Vec<Vec<f64>>>,
}

fn to_f64_matrix<T: Scalar>(m: &Matrix<T>) -> Matrix<f64> {
    m.map(Scalar::to_f64)
}

fn frobenius_distance(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.sub(b).to_rows().iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cell-level blowup search: pick `L` as the ν-weighted medoid of
/// `{Φ̂(w) : det Φ̂(w) ≥ a}` at the reference level, then descend the word
/// tree choosing at each level the child whose deepest descendants carry the
/// largest ν-fraction of cells near `L`. Ties go to the lexicographically
/// first child.
pub fn blowup_search<T: Scalar>(
    model: &HarmonicModel<T>,
    fs: &[PiecewiseHarmonic<T>],
    opts: &BlowupOptions,
    tables: &[VertexTable],
) -> Result<BlowupTrace> {
    let d = fs.len();
    if d == 1 {
        return Ok(BlowupTrace {
            target: vec![vec![1.0]],
            target_word: None,
            threshold: opts.threshold,
            candidate_mass: Vec::new(),
            steps: Vec::new(),
            failure_depth: None,
            stopped_at: None,
            degenerate: false,
            renormalized_energy: None,
        });
    }
    let start = fs.iter().map(|f| f.level).max().unwrap_or(0).max(1);
    if opts.max_level < start || opts.reference_level < start || opts.reference_level > opts.max_level {
        return Err(Error::Invalid(format!(
            "need {start} <= reference_level <= max_level, got {} and {}",
            opts.reference_level, opts.max_level
        )));
    }
    if opts.shrink.is_empty() || opts.shrink.contains(&0) {
        return Err(Error::Invalid("shrink schedule needs positive entries".into()));
    }
    let levels: Vec<usize> = (start..=opts.max_level).collect();
    let fields = model.energy_matrix_fields(fs, &levels, tables)?;
    let phis: Vec<PhiCellField<T>> = fields.iter().map(PhiCellField::from_energy).collect();
    let s = model.symbol_count();

    let float_phis: Vec<Vec<Matrix<f64>>> = phis.iter().map(|p| p.matrices.iter().map(to_f64_matrix).collect()).collect();
    let dets: Vec<Vec<f64>> = phis.iter().map(|p| p.matrices.iter().map(|m| m.determinant().to_f64()).collect()).collect();
    let weights: Vec<Vec<f64>> = phis
        .iter()
        .map(|p| {
            let total = p.kusuoka_total().to_f64();
            p.kusuoka.iter().map(|k| if total > 0.0 { k.to_f64() / total } else { 0.0 }).collect()
        })
        .collect();

    let mut candidate_mass = Vec::new();
    let mut failure_depth = None;
    for (li, &level) in levels.iter().enumerate() {
        let mass: f64 = (0..dets[li].len())
            .filter(|&c| phis[li].is_defined(c) && dets[li][c] >= opts.threshold)
            .map(|c| weights[li][c])
            .sum();
        if mass == 0.0 && failure_depth.is_none() {
            failure_depth = Some(level);
        }
        candidate_mass.push((level, mass));
    }

    let ref_i = opts.reference_level - start;
    let candidates: Vec<usize> = (0..dets[ref_i].len())
        .filter(|&c| phis[ref_i].is_defined(c) && dets[ref_i][c] >= opts.threshold)
        .collect();
    let empty_trace = |degenerate| BlowupTrace {
        target: Vec::new(),
        target_word: None,
        threshold: opts.threshold,
        candidate_mass: candidate_mass.clone(),
        steps: Vec::new(),
        failure_depth,
        stopped_at: None,
        degenerate,
        renormalized_energy: None,
    };
    if candidate_mass[0].1 == 0.0 {
        return Ok(empty_trace(true));
    }
    if candidates.is_empty() {
        return Ok(empty_trace(false));
    }
    // ν-weighted medoid.
    let medoid = *candidates
        .iter()
        .min_by(|&&a, &&b| {
            let cost = |i: usize| -> f64 {
                candidates
                    .iter()
                    .map(|&j| weights[ref_i][j] * frobenius_distance(&float_phis[ref_i][i], &float_phis[ref_i][j]))
                    .sum()
            };
            cost(a).partial_cmp(&cost(b)).unwrap().then(a.cmp(&b))
        })
        .expect("nonempty");
    let target = float_phis[ref_i][medoid].clone();

    let deepest = levels.len() - 1;
    let mut steps = Vec::new();
    let mut stopped_at = None;
    let mut current = 0usize;
    for (step, li) in (0..levels.len()).enumerate() {
        let level = levels[li];
        if failure_depth.is_some_and(|f| level >= f) {
            break;
        }
        let k = opts.shrink[step.min(opts.shrink.len() - 1)] as f64;
        let radius = 1.0 / k;
        let span = s.pow((levels[deepest] - level) as u32);
        let score = |cell: usize| -> f64 {
            let (mut hit, mut total) = (0.0, 0.0);
            for c in cell * span..(cell + 1) * span {
                let w = weights[deepest][c];
                total += w;
                if dets[deepest][c] >= opts.threshold && frobenius_distance(&float_phis[deepest][c], &target) < radius {
                    hit += w;
                }
            }
            if total > 0.0 { hit / total } else { 0.0 }
        };
        // Children of the current cell at this level (the root's children
        // when this is the first step below the starting level).
        let first = if step == 0 { 0 } else { current * s };
        let count = if step == 0 { s.pow(level as u32) } else { s };
        let mut best = first;
        let mut best_score = f64::NEG_INFINITY;
        for c in first..first + count {
            if !phis[li].is_defined(c) {
                continue;
            }
            let sc = score(c);
            if sc > best_score {
                best_score = sc;
                best = c;
            }
        }
        if best_score == f64::NEG_INFINITY {
            break;
        }
        current = best;
        steps.push(BlowupStep {
            word: Word::from_index(best, level, s).to_string(),
            phi: float_phis[li][best].to_rows(),
            det: dets[li][best],
            distance: frobenius_distance(&float_phis[li][best], &target),
            score: best_score,
        });
        if best_score == 0.0 {
            stopped_at = Some(level);
            break;
        }
    }

    let renormalized_energy = match (steps.last(), renormalization_map(&target)) {
        (Some(last), Ok(map)) => {
            let level = levels[0] + steps.len() - 1;
            let li = level - start;
            let n = fields[li].cells[Word::parse(&last.word, s)?.index(s)].map(Scalar::to_f64);
            let c = map.coefficient_matrix();
            // E(ψ_w^* h) = r_w ν_h(K_w) / 2.
            let r_w = model.harmonic().r_word(&Word::parse(&last.word, s)?).to_f64();
            Some(c.transpose().mul(&n).mul(&c).scale(&(r_w / 2.0)).to_rows())
        }
        _ => None,
    };

    Ok(BlowupTrace {
        target: target.to_rows(),
        target_word: Some(Word::from_index(medoid, opts.reference_level, s).to_string()),
        threshold: opts.threshold,
        candidate_mass,
        steps,
        failure_depth,
        stopped_at,
        degenerate: false,
        renormalized_energy,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub max_rank: usize,
    /// `mass_at_least[k-1]`: ν-mass of cells with ε-rank ≥ k, `k = 1..=d`.
    pub mass_at_least: Vec<f64>,
    pub mass_ratio_above: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    pub levels: Vec<LevelSummary>,
    pub estimate: usize,
}

/// Cell-resolution index estimate over several levels and thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub structure: String,
    pub d: usize,
    pub levels: Vec<usize>,
    pub all_energies_vanish: bool,
    pub by_epsilon: Vec<EpsilonSummary>,
    /// Smallest per-ε estimate.
    pub estimate: usize,
    pub stable_across_epsilon: bool,
    pub note: String,
}

pub const INDEX_NOTE: &str = "cell-resolution estimate from finite-level density matrices; \
evidence only, not a proof of the index";

/// A rank persists when its deepest-level mass keeps at least this share of
/// its peak over the levels.
pub const PERSISTENCE_FRACTION: f64 = 0.5;

/// Largest rank `k ≥ 2` whose mass persists over the levels, else 1.
pub fn persistent_rank(summaries: &[LevelSummary]) -> usize {
    let Some(last) = summaries.last() else { return 0 };
    (2..=last.mass_at_least.len())
        .filter(|&k| {
            let peak = summaries.iter().map(|s| s.mass_at_least[k - 1]).fold(0.0, f64::max);
            last.mass_at_least[k - 1] > 0.0 && last.mass_at_least[k - 1] >= PERSISTENCE_FRACTION * peak
        })
        .max()
        .unwrap_or(1)
}

/// Per ε, rank `k ≥ 2` counts as persistent when the mass of cells with
/// ε-rank ≥ `k` is positive at the deepest level and at least
/// [`PERSISTENCE_FRACTION`] of its largest value over the levels. The
/// estimate is the largest persistent rank (1 when some energy is positive,
/// 0 when all vanish).
pub fn index_report<T: Scalar>(
    model: &HarmonicModel<T>,
    basis: &[PiecewiseHarmonic<T>],
    levels: &[usize],
    epsilons: &[f64],
    tables: &[VertexTable],
) -> Result<IndexReport> {
    if levels.is_empty() || epsilons.is_empty() {
        return Err(Error::Invalid("index report needs at least one level and one epsilon".into()));
    }
    for &e in epsilons {
        check_epsilon(e)?;
    }
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let d = basis.len();
    let fields = model.energy_matrix_fields(basis, &levels, tables)?;
    let phis: Vec<PhiCellField<T>> = fields.iter().map(PhiCellField::from_energy).collect();
    let all_energies_vanish = phis.iter().all(|p| p.kusuoka_total().is_negligible());
    let mut by_epsilon = Vec::new();
    for &eps in epsilons {
        let reports = phis.iter().map(|p| rank_spectrum_of(p, eps)).collect::<Result<Vec<_>>>()?;
        let summaries: Vec<LevelSummary> = reports
            .iter()
            .map(|r| LevelSummary {
                level: r.level,
                max_rank: r.max_rank,
                mass_at_least: (1..=d).map(|k| r.mass_at_least(k)).collect(),
                mass_ratio_above: r.mass_ratio_above,
            })
            .collect();
        let estimate = if all_energies_vanish {
            0
        } else {
            persistent_rank(&summaries)
        };
        by_epsilon.push(EpsilonSummary { epsilon: eps, levels: summaries, estimate });
    }
    let estimate = by_epsilon.iter().map(|e| e.estimate).min().unwrap_or(0);
    let stable_across_epsilon = by_epsilon.iter().all(|e| e.estimate == estimate);
    Ok(IndexReport {
        structure: model.structure().name().to_string(),
        d,
        levels,
        all_energies_vanish,
        by_epsilon,
        estimate,
        stable_across_epsilon,
        note: INDEX_NOTE.to_string(),
    })
}
