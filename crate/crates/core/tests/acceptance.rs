//! Acceptance run: one PASS/FAIL line per criterion, with timings checked
//! against their budgets. Exits nonzero when any criterion fails.

mod carpet_common;
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use carpet_common as raster;
use common::{q, random_vector};
use fractal_index::carpet::{
    check_nondiagonality, dimension_report, menger_sponge, resistance_scaling, standard_carpet, CarpetGenerator,
    ResistanceOptions, DEFAULT_VERTEX_CAP,
};
use fractal_index::dimension::{rank_spectra, renormalization_map, renormalize_field, renormalize_pair};
use fractal_index::harmonic::{verify_harmonic_structure, PiecewiseHarmonic};
use fractal_index::linalg::Matrix;
use fractal_index::measures::EnergyMatrixField;
use fractal_index::structure::{presets, Word};
use fractal_index::Rational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn basis(p: &presets::PcfPreset) -> Vec<PiecewiseHarmonic<Rational>> {
    p.basis.iter().map(|u| PiecewiseHarmonic::new(0, u.clone())).collect()
}

fn fixed_point() -> Outcome {
    let p = presets::sg2();
    let check = verify_harmonic_structure(&p.structure, &p.harmonic).map_err(|e| e.to_string())?;
    ensure(check.holds && check.residual.is_zero_matrix(), "trace of E^(1) differs from E^(0)")?;
    let d = p.harmonic.matrix().to_rows();
    let fine = common::net(&p.structure, p.harmonic.weights(), 1);
    let traced = common::schur(&common::dense_form(&fine, &d), &[0, 1, 2]);
    ensure(traced == common::dense_form(&common::net(&p.structure, p.harmonic.weights(), 0), &d), "oracle trace differs")?;
    Ok("residual 0 (library and dense Schur oracle)".into())
}

fn mass_and_child_sums() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let levels: Vec<usize> = (0..=8).collect();
    let mut checked = 0;
    for name in ["sg2", "sg3"] {
        let p = presets::by_name(name).unwrap();
        let model = p.model().unwrap();
        let tables = p.structure.vertex_tables(0).unwrap();
        for _ in 0..50 {
            let u = random_vector(&mut rng, model.boundary_count());
            let twice_energy = q(2, 1) * model.boundary_energy(&u, &u);
            let f = PiecewiseHarmonic::new(0, u);
            let fields = model.energy_matrix_fields(&[f], &levels, &tables).map_err(|e| e.to_string())?;
            let tables: Vec<_> = fields.iter().map(|f| f.diagonal(0)).collect();
            for (m, t) in tables.iter().enumerate() {
                ensure(t.total() == twice_energy, format!("{name} level {m}: mass != 2E"))?;
                if m > 0 {
                    ensure(t.coarsen().as_ref() == Some(&tables[m - 1]), format!("{name} level {m}: child sums differ"))?;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} vectors, levels 0..=8, exact"))
}

fn worked_values() -> Outcome {
    let p = presets::sg2();
    let model = p.model().unwrap();
    let tables = p.structure.vertex_tables(1).unwrap();
    let u = [q(1, 1), q(0, 1), q(0, 1)];
    let h = model.harmonic_extension(&u, &tables, 1).map_err(|e| e.to_string())?;
    let oracle = common::minimize(&common::net(&p.structure, p.harmonic.weights(), 1), &p.harmonic.matrix().to_rows(), &u);
    let mut mids = h.values[3..].to_vec();
    mids.sort();
    ensure(mids == [q(1, 5), q(2, 5), q(2, 5)], format!("level-1 values {mids:?}"))?;
    let mut oracle_mids = oracle[3..].to_vec();
    oracle_mids.sort();
    ensure(oracle_mids == mids, "minimization oracle disagrees")?;
    ensure(model.energy(&h, &tables[1]) == q(2, 1), "E != 2")?;
    let masses = model.cell_energy_measure(&h, 1, &tables).map_err(|e| e.to_string())?;
    ensure(masses.values == [q(12, 5), q(4, 5), q(4, 5)], format!("masses {:?}", masses.values))?;
    Ok("values {1/5, 2/5, 2/5}, E = 2, masses {12/5, 4/5, 4/5}".into())
}

fn cellwise_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = presets::sg2();
    let model = p.model().unwrap();
    let tables = p.structure.vertex_tables(0).unwrap();
    let mut cells = 0usize;
    for pair in 0..100 {
        let u = random_vector(&mut rng, 3);
        let v = random_vector(&mut rng, 3);
        let sum: Vec<Rational> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let fs = [u, v, sum].map(|x| PiecewiseHarmonic::new(0, x));
        let field = model.energy_matrix_field(&fs, 6, &tables).map_err(|e| e.to_string())?;
        for m in &field.cells {
            let (f, g, fg, s) = (m.get(0, 0), m.get(1, 1), m.get(0, 1), m.get(2, 2));
            ensure(fg * fg <= f * g, format!("pair {pair}: Cauchy-Schwarz violated"))?;
            // sqrt(s) <= sqrt(f) + sqrt(g)  <=>  s - f - g <= 2 sqrt(f g).
            let gap = s - f - g;
            ensure(!gap.is_positive() || &gap * &gap <= q(4, 1) * f * g, format!("pair {pair}: triangle violated"))?;
            cells += 1;
        }
    }
    Ok(format!("100 pairs, {cells} cell checks at level 6, 0 violations"))
}

fn pullback_identity() -> Outcome {
    let p = presets::sg2();
    let model = p.model().unwrap();
    let tables = p.structure.vertex_tables(5).unwrap();
    let fs: Vec<_> = p
        .basis
        .iter()
        .map(|u| model.harmonic_extension(u, &tables, 5))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let full = model.phi_field(&fs, 5, &tables).map_err(|e| e.to_string())?;
    let mut words = 0;
    for k in 0..=5 {
        for w in p.structure.cells_at_level(k) {
            let pulled: Vec<_> = fs.iter().map(|f| model.pullback(f, &w, &tables)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            let local = model.phi_field(&pulled, 5 - k, &tables).map_err(|e| e.to_string())?;
            for (i, m) in local.matrices.iter().enumerate() {
                let tail = Word::from_index(i, 5 - k, 3);
                ensure(full.get(&w.concat(&tail)) == m, format!("mismatch at {w}·{tail}"))?;
            }
            words += 1;
        }
    }
    Ok(format!("{words} words up to level 5, exact"))
}

fn index_one_witness() -> Outcome {
    let p = presets::sg2();
    let model = p.model().unwrap();
    let tables = p.structure.vertex_tables(0).unwrap();
    let reports = rank_spectra(&model, &basis(&p), &[4, 6, 8, 10], 0.01, &tables).map_err(|e| e.to_string())?;
    let mass: Vec<f64> = reports.iter().map(|r| r.mass_ratio_above).collect();
    let text = format!("mass(λ2/λ1 > 0.01) at 4,6,8,10 = {mass:.5?}");
    ensure(mass.windows(2).all(|w| w[1] < w[0]), format!("not strictly decreasing: {text}"))?;
    ensure(mass[3] < 0.5 * mass[0], format!("level 10 not below half of level 4: {text}"))?;
    Ok(text)
}

fn trace_normalization() -> Outcome {
    let mut cells = 0usize;
    for name in presets::PRESET_NAMES {
        let p = presets::by_name(name).unwrap();
        let model = p.model().unwrap();
        let tables = p.structure.vertex_tables(0).unwrap();
        let fs = basis(&p);
        let d = q(fs.len() as i64, 1);
        let levels: Vec<usize> = (0..=6).collect();
        for field in model.energy_matrix_fields(&fs, &levels, &tables).map_err(|e| e.to_string())? {
            let phi = fractal_index::measures::PhiCellField::from_energy(&field);
            for (i, m) in phi.matrices.iter().enumerate() {
                if phi.kusuoka[i].is_positive() {
                    ensure(m.trace() == d, format!("{name} level {}: trace != d", field.level))?;
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("{cells} cells over all presets, levels 0..=6, exact"))
}

fn all_cells(l: usize) -> Vec<Vec<usize>> {
    (0..l * l).map(|i| vec![i % l, i / l]).collect()
}

fn carpet_validation() -> Outcome {
    let g = standard_carpet();
    ensure(g.checks().all_pass(), "standard carpet fails a check")?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let bases = [(standard_carpet(), 3), (fractal_index::carpet::carpet_l4(), 3), (menger_sponge(), 2)];
    for k in 0..20 {
        let (base, depth) = &bases[k % bases.len()];
        let mut cells = base.cells().to_vec();
        let absent: Vec<Vec<usize>> = if base.dim() == 2 {
            all_cells(base.l()).into_iter().filter(|c| !base.contains(c)).collect()
        } else {
            vec![vec![1, 1, 1]]
        };
        if rng.random_bool(0.5) {
            cells.remove(rng.random_range(0..cells.len()));
        } else {
            cells.push(absent[rng.random_range(0..absent.len())].clone());
        }
        let m = CarpetGenerator::unrestricted(format!("mutant-{k}"), base.dim(), base.l(), cells).unwrap();
        let lib = m.checks();
        let nd = raster::nondiagonal(&m, *depth);
        let agree = lib.symmetry == raster::symmetric(&m)
            && lib.connectedness == raster::connected(&m)
            && lib.borders == raster::borders(&m)
            && lib.nondiagonality == nd
            && lib.nondiagonality_h == nd;
        ensure(agree, format!("mutant {k} misclassified: {:?}", m.cells()))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..100 {
        let l = if k % 2 == 0 { 3 } else { 4 };
        let g = CarpetGenerator::unrestricted("random", 2, l, raster::random_symmetric(&mut rng, l)).unwrap();
        ensure(check_nondiagonality(&g) == raster::nondiagonal(&g, 3), format!("random generator {k} disagrees"))?;
    }
    Ok("standard carpet valid; 20/20 mutants agree with raster oracle; 100/100 level-2 vs levels<=3 agree".into())
}

fn carpet_dimensions() -> Outcome {
    let opts = ResistanceOptions::default();
    let g = standard_carpet();
    let scaling = resistance_scaling(&g, 3, 6, DEFAULT_VERTEX_CAP, &opts, false).map_err(|e| e.to_string())?;
    ensure(scaling.levels.iter().all(|l| l.relative_residual <= 1e-10), "CG residual above 1e-10")?;
    let ratios = scaling.ratios.clone();
    ensure(ratios.iter().all(|r| (1.15..=1.35).contains(r)), format!("ratios {ratios:?} outside [1.15, 1.35]"))?;
    let report = dimension_report(&g, scaling.r_hat, None).map_err(|e| e.to_string())?;
    ensure(report.d_s > 1.7 && report.d_s < 1.9, format!("2D d_s = {}", report.d_s))?;
    ensure(report.dm_bound == 1, "d_s < 2 did not give d_m = 1")?;
    ensure(report.identity_residual < 1e-12, format!("identity residual {}", report.identity_residual))?;

    let sponge = menger_sponge();
    let s3 = resistance_scaling(&sponge, 1, 3, DEFAULT_VERTEX_CAP, &opts, false).map_err(|e| e.to_string())?;
    let r3 = dimension_report(&sponge, s3.r_hat, None).map_err(|e| e.to_string())?;
    ensure(r3.d_s > 2.0 && r3.d_s < 3.0, format!("3D d_s = {}", r3.d_s))?;
    ensure(r3.identity_residual < 1e-12, "3D identity residual")?;
    Ok(format!(
        "2D ratios {:.4?}, d_s = {:.4}, d_m = 1; 3D (levels 1..3) d_s = {:.4}, bound {}",
        ratios, report.d_s, r3.d_s, r3.dm_bound
    ))
}

fn renormalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let p = presets::sg2();
    let model = p.model().unwrap().map_scalar(fractal_index::Scalar::to_f64);
    let tables = p.structure.vertex_tables(0).unwrap();
    let fs: Vec<PiecewiseHarmonic<f64>> = p.basis.iter().map(|u| PiecewiseHarmonic::new(0, u.iter().map(fractal_index::Scalar::to_f64).collect())).collect();
    let original = model.energy_matrix_field(&fs, 4, &tables).map_err(|e| e.to_string())?;
    for trial in 0..50 {
        let d = 2 + trial % 2;
        let b = Matrix::from_rows((0..d).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()).unwrap();
        let mut l = b.mul(&b.transpose());
        for i in 0..d {
            l.set(i, i, l.get(i, i) + 0.25);
        }
        let synthetic = EnergyMatrixField { level: 3, n_symbols: 3, d, cells: vec![l.clone(); 27] };
        let out = renormalize_field(&l, &synthetic).map_err(|e| e.to_string())?;
        for m in &out.cells {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((m.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        if d == 2 {
            // The renormalized functions carry exactly the recombined field.
            let renorm = renormalize_pair(&l, &fs).map_err(|e| e.to_string())?;
            let direct = model.energy_matrix_field(&renorm, 4, &tables).map_err(|e| e.to_string())?;
            let c = renormalization_map(&l).map_err(|e| e.to_string())?.coefficient_matrix();
            for (a, b) in direct.cells.iter().zip(&original.recombine(&c).cells) {
                let scale = b.to_rows().iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
                ensure(a.sub(b).max_abs() <= 1e-12 * scale, format!("trial {trial}: renormalized pair field differs"))?;
            }
        }
    }
    ensure(worst <= 1e-12, format!("max deviation from identity {worst:e}"))?;
    Ok(format!("50 random SPD targets, max |Φ' − I| = {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("harmonic-structure fixed point on SG2", Duration::from_secs(1), fixed_point),
        ("energy-measure mass and child sums", Duration::from_secs(30), mass_and_child_sums),
        ("worked SG2 extension values", Duration::from_secs(1), worked_values),
        ("cellwise Cauchy-Schwarz and triangle inequalities", Duration::from_secs(120), cellwise_inequalities),
        ("pullback identity for the density field", Duration::from_secs(120), pullback_identity),
        ("index-one witness on SG2", Duration::from_secs(120), index_one_witness),
        ("trace normalization of the density field", Duration::from_secs(120), trace_normalization),
        ("carpet generator validation", Duration::from_secs(120), carpet_validation),
        ("carpet dimensions", Duration::from_secs(300), carpet_dimensions),
        ("renormalization to the identity", Duration::from_secs(60), renormalization),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget {budget:?}")),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        failures += usize::from(outcome.is_err());
        println!("criterion {:>2}: {status}  {name}  [{:.2} s]  {detail}", k + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
