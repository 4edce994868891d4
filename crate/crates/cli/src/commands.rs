use fractal_index::carpet::{
    dimension_report, resistance_scaling, CarpetGenerator, ResistanceOptions, DEFAULT_VERTEX_CAP,
};
use fractal_index::dimension::{blowup_search, index_report, rank_spectra, BlowupOptions};
use fractal_index::harmonic::{validate_harmonic_structure_matrix, verify_harmonic_structure, HarmonicModel, PiecewiseHarmonic};
use fractal_index::io::{self, format_scalar};
use fractal_index::measures::PhiCellField;
use fractal_index::scalar::{parse_rational, Rational};
use fractal_index::structure::presets::PcfPreset;
use fractal_index::{Error, Result, Scalar};
use serde::Serialize;

use crate::output::{CheckResult, OutputDir};

pub fn parse_vector(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(|s| parse_rational(s.trim())).collect()
}

/// Vectors separated by `;`.
pub fn parse_basis(text: &str) -> Result<Vec<Vec<Rational>>> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_vector).collect()
}

/// `a..b` (inclusive) or a comma list.
pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("cannot read levels from {text:?}"));
    let levels: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if levels.is_empty() || levels.contains(&0) {
        return Err(Error::Invalid("levels must be at least 1".into()));
    }
    Ok(levels)
}

pub fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}"))))
        .collect()
}

fn check_boundary(p: &PcfPreset, v: &[Rational]) -> Result<()> {
    let n0 = p.structure.boundary_count();
    if v.len() != n0 {
        return Err(Error::Invalid(format!("boundary vector has {} entries, expected {n0}", v.len())));
    }
    Ok(())
}

fn matrix_strings<T: Scalar>(m: &fractal_index::linalg::Matrix<T>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(format_scalar).collect()).collect()
}

#[derive(Serialize)]
struct VerifyReport {
    structure: String,
    validity: fractal_index::harmonic::ValidityReport,
    r: Vec<String>,
    regular: bool,
    fixed_point: bool,
    residual: Vec<Vec<String>>,
}

pub fn verify_hs(p: &PcfPreset, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let validity = validate_harmonic_structure_matrix(p.harmonic.matrix())?;
    let check = verify_harmonic_structure(&p.structure, &p.harmonic)?;
    let report = VerifyReport {
        structure: p.structure.name().to_string(),
        validity: validity.clone(),
        r: p.harmonic.weights().iter().map(format_scalar).collect(),
        regular: p.harmonic.is_regular(),
        fixed_point: check.holds,
        residual: matrix_strings(&check.residual),
    };
    out.write_json("verify-hs.json", &report)?;
    Ok(vec![
        CheckResult::new("symmetry", validity.symmetric),
        CheckResult::new("D1", validity.d1),
        CheckResult::new("D2", validity.d2),
        CheckResult::new("D3", validity.d3),
        CheckResult::new("fixed point", check.holds),
    ])
}

#[derive(Serialize)]
struct ExtensionSummary {
    structure: String,
    level: usize,
    boundary: Vec<String>,
    energy: String,
    energy_decimal: f64,
    min_value: String,
    max_value: String,
}

pub fn extend(p: &PcfPreset, boundary: &[Rational], level: usize, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    check_boundary(p, boundary)?;
    let model = p.model()?;
    let tables = p.structure.vertex_tables(level)?;
    let f = model.harmonic_extension(boundary, &tables, level)?;
    let energy = model.energy(&f, &tables[level]);
    let mass = model.cell_energy_measure(&PiecewiseHarmonic::new(0, boundary.to_vec()), level, &tables)?.total();
    let boundary_kept = f.values[..boundary.len()] == *boundary;
    let max_principle = f.min_value() >= boundary.iter().min().cloned().unwrap_or_default()
        && f.max_value() <= boundary.iter().max().cloned().unwrap_or_default();
    out.write("extension.csv", &io::vertex_values_csv(&tables[level], &f)?)?;
    out.write_json(
        "extension.json",
        &ExtensionSummary {
            structure: p.structure.name().to_string(),
            level,
            boundary: boundary.iter().map(format_scalar).collect(),
            energy: format_scalar(&energy),
            energy_decimal: energy.to_f64(),
            min_value: format_scalar(&f.min_value()),
            max_value: format_scalar(&f.max_value()),
        },
    )?;
    Ok(vec![
        CheckResult::new("boundary values preserved", boundary_kept),
        CheckResult::new("maximum principle", max_principle),
        CheckResult::new("energy equals half the measure mass", energy.clone() + energy == mass),
    ])
}

#[derive(Serialize)]
struct EnergySummary {
    structure: String,
    level: usize,
    total: String,
    total_decimal: f64,
    energy: String,
}

pub fn energy_table(
    p: &PcfPreset,
    f: &[Rational],
    g: Option<&[Rational]>,
    level: usize,
    out: &mut OutputDir,
) -> Result<Vec<CheckResult>> {
    check_boundary(p, f)?;
    let model = p.model()?;
    let tables = p.structure.vertex_tables(level)?;
    let fh = PiecewiseHarmonic::new(0, f.to_vec());
    let (table, energy) = match g {
        None => (model.cell_energy_measure(&fh, level, &tables)?, model.boundary_energy(f, f)),
        Some(g) => {
            check_boundary(p, g)?;
            let gh = PiecewiseHarmonic::new(0, g.to_vec());
            (model.mutual_cell_measure(&fh, &gh, level, &tables)?, model.boundary_energy(f, g))
        }
    };
    let mut consistent = true;
    let mut t = table.clone();
    while let Some(parent) = t.coarsen() {
        consistent &= parent.total() == t.total();
        t = parent;
    }
    let total = table.total();
    out.write("energy-table.csv", &io::measure_table_csv(&table)?)?;
    out.write_json(
        "energy-table.json",
        &EnergySummary {
            structure: p.structure.name().to_string(),
            level,
            total: format_scalar(&total),
            total_decimal: total.to_f64(),
            energy: format_scalar(&energy),
        },
    )?;
    Ok(vec![
        CheckResult::new("child sums match parents", consistent),
        CheckResult::new("total mass equals twice the energy", total == energy.clone() + energy),
    ])
}

/// Exact or floating model and basis for the Φ-based subcommands.
pub fn basis_functions<T: Scalar>(p: &PcfPreset) -> Result<Vec<PiecewiseHarmonic<T>>> {
    for b in &p.basis {
        check_boundary(p, b)?;
    }
    if p.basis.is_empty() {
        return Err(Error::Invalid("basis is empty".into()));
    }
    Ok(p.basis.iter().map(|b| PiecewiseHarmonic::new(0, b.iter().map(T::from_rational).collect())).collect())
}

pub fn model_as<T: Scalar>(p: &PcfPreset) -> Result<HarmonicModel<T>> {
    Ok(p.model()?.map_scalar(T::from_rational))
}

fn trace_tolerance<T: Scalar>() -> f64 {
    if T::EXACT { 0.0 } else { 1e-9 }
}

fn trace_and_psd<T: Scalar>(phi: &PhiCellField<T>) -> (bool, bool) {
    let d = T::from_i64(phi.d as i64);
    let tol = trace_tolerance::<T>();
    let mut trace_ok = true;
    let mut psd_ok = true;
    for (c, m) in phi.matrices.iter().enumerate() {
        if !phi.is_defined(c) {
            continue;
        }
        trace_ok &= if T::EXACT { m.trace() == d } else { (m.trace() - d.clone()).to_f64().abs() <= tol };
        psd_ok &= if T::EXACT {
            m.psd_rank().is_some()
        } else {
            fractal_index::dimension::symmetric_eigenvalues(m).iter().all(|l| *l >= -1e-9)
        };
    }
    (trace_ok, psd_ok)
}

#[derive(Serialize)]
struct PhiSummary {
    structure: String,
    level: usize,
    d: usize,
    exact: bool,
    kusuoka_total: String,
    cells: usize,
    cells_with_mass: usize,
}

pub fn phi_field<T: Scalar>(p: &PcfPreset, level: usize, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let model = model_as::<T>(p)?;
    let basis = basis_functions::<T>(p)?;
    let tables = p.structure.vertex_tables(level)?;
    let phi = model.phi_field(&basis, level, &tables)?;
    let (trace_ok, psd_ok) = trace_and_psd(&phi);
    out.write("phi-field.csv", &io::phi_field_csv(&phi)?)?;
    out.write_json(
        "phi-field.json",
        &PhiSummary {
            structure: p.structure.name().to_string(),
            level,
            d: phi.d,
            exact: T::EXACT,
            kusuoka_total: format_scalar(&phi.kusuoka_total()),
            cells: phi.matrices.len(),
            cells_with_mass: (0..phi.matrices.len()).filter(|&c| phi.is_defined(c)).count(),
        },
    )?;
    Ok(vec![CheckResult::new("trace equals d", trace_ok), CheckResult::new("positive semidefinite", psd_ok)])
}

#[derive(Serialize)]
struct RankSpectrumOutput<'a> {
    structure: String,
    epsilon: f64,
    /// Whether the mass of cells with λ₂/λ₁ > ε decreases strictly across levels.
    mass_strictly_decreasing: bool,
    levels: &'a [fractal_index::dimension::RankSpectrumReport],
}

pub fn rank_spectrum<T: Scalar>(p: &PcfPreset, levels: &[usize], eps: f64, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let model = model_as::<T>(p)?;
    let basis = basis_functions::<T>(p)?;
    let deepest = *levels.iter().max().expect("nonempty");
    let tables = p.structure.vertex_tables(deepest)?;
    let reports = rank_spectra(&model, &basis, levels, eps, &tables)?;
    let decreasing = reports.windows(2).all(|w| w[1].mass_ratio_above < w[0].mass_ratio_above);
    let normalized = reports
        .iter()
        .all(|r| r.total_mass == 0.0 || (r.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    for r in &reports {
        out.write(&format!("rank-spectrum-level{}.csv", r.level), &io::rank_spectrum_csv(r)?)?;
    }
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.level as f64, r.mass_ratio_above)).collect();
    out.write("rank-spectrum.dat", &io::plot_data(&format!("level mass(lambda2/lambda1 > {eps})"), &points))?;
    out.write_json(
        "rank-spectrum.json",
        &RankSpectrumOutput {
            structure: p.structure.name().to_string(),
            epsilon: eps,
            mass_strictly_decreasing: decreasing,
            levels: &reports,
        },
    )?;
    Ok(vec![CheckResult::new("histograms sum to one", normalized)])
}

pub fn blowup<T: Scalar>(p: &PcfPreset, opts: &BlowupOptions, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let model = model_as::<T>(p)?;
    let basis = basis_functions::<T>(p)?;
    let tables = p.structure.vertex_tables(opts.max_level)?;
    let trace = blowup_search(&model, &basis, opts, &tables)?;
    let points: Vec<(f64, f64)> = trace.candidate_mass.iter().map(|(l, m)| (*l as f64, *m)).collect();
    out.write("blowup-candidates.dat", &io::plot_data(&format!("level mass(det Phi >= {})", opts.threshold), &points))?;
    out.write_json("blowup.json", &trace)?;
    Ok(Vec::new())
}

pub fn index<T: Scalar>(p: &PcfPreset, levels: &[usize], eps: &[f64], out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let model = model_as::<T>(p)?;
    let basis = basis_functions::<T>(p)?;
    let deepest = *levels.iter().max().expect("nonempty");
    let tables = p.structure.vertex_tables(deepest)?;
    let report = index_report(&model, &basis, levels, eps, &tables)?;
    out.write_json("index-report.json", &report)?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct CarpetCheckOutput<'a> {
    generator: &'a CarpetGenerator,
    m: usize,
    checks: fractal_index::carpet::GeneratorChecks,
    first_failure: Option<&'static str>,
}

pub fn carpet_check(g: &CarpetGenerator, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let checks = g.checks();
    out.write_json(
        "carpet-check.json",
        &CarpetCheckOutput { generator: g, m: g.cell_count(), checks, first_failure: checks.first_failure() },
    )?;
    Ok(vec![
        CheckResult::new("symmetry", checks.symmetry),
        CheckResult::new("connectedness", checks.connectedness),
        CheckResult::new("nondiagonality", checks.nondiagonality),
        CheckResult::new("nondiagonality (rectangle form)", checks.nondiagonality_h),
        CheckResult::new("borders-included", checks.borders),
    ])
}

pub struct SolverSettings {
    pub cap: Option<u64>,
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
}

impl SolverSettings {
    fn options(&self) -> ResistanceOptions {
        ResistanceOptions { tolerance: self.tolerance, max_iterations: self.max_iterations }
    }
}

pub fn carpet_resistance(
    g: &CarpetGenerator,
    levels: &[usize],
    solver: &SolverSettings,
    extrapolate: bool,
    out: &mut OutputDir,
) -> Result<Vec<CheckResult>> {
    let (lo, hi) = level_span(levels)?;
    let s = resistance_scaling(g, lo, hi, solver.cap.unwrap_or(DEFAULT_VERTEX_CAP), &solver.options(), extrapolate)?;
    out.write("resistance.csv", &io::resistance_csv(&s)?)?;
    let points: Vec<(f64, f64)> = s.levels.iter().map(|l| (l.level as f64, l.resistance)).collect();
    out.write("resistance.dat", &io::plot_data("level resistance", &points))?;
    out.write_json("resistance.json", &s)?;
    let converged = s.levels.iter().all(|l| l.relative_residual <= solver.tolerance);
    Ok(vec![CheckResult::new("solver converged", converged)])
}

fn level_span(levels: &[usize]) -> Result<(usize, usize)> {
    let lo = *levels.iter().min().expect("nonempty");
    let hi = *levels.iter().max().expect("nonempty");
    if hi <= lo {
        return Err(Error::Invalid("resistance scaling needs at least two levels".into()));
    }
    Ok((lo, hi))
}

pub fn carpet_dims(
    g: &CarpetGenerator,
    levels: Option<&[usize]>,
    r_hat: Option<f64>,
    solver: &SolverSettings,
    extrapolate: bool,
    out: &mut OutputDir,
) -> Result<Vec<CheckResult>> {
    g.validate()?;
    let (r, scaling) = match (r_hat, levels) {
        (Some(r), _) => (r, None),
        (None, Some(levels)) => {
            let (lo, hi) = level_span(levels)?;
            let s = resistance_scaling(g, lo, hi, solver.cap.unwrap_or(DEFAULT_VERTEX_CAP), &solver.options(), extrapolate)?;
            let r = match (extrapolate, s.rho_extrapolated) {
                (true, Some(rho)) => 1.0 / rho,
                _ => s.r_hat,
            };
            out.write("resistance.csv", &io::resistance_csv(&s)?)?;
            (r, Some(s))
        }
        (None, None) => return Err(Error::Invalid("give --levels or --r-hat".into())),
    };
    let report = dimension_report(g, r, scaling)?;
    out.write_json("dimensions.json", &report)?;
    Ok(vec![CheckResult::new("d_H = d_w d_s / 2", report.identity_residual < 1e-12)])
}
