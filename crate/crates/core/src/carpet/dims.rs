use serde::Serialize;

use super::graph::{effective_resistance, PreCarpetGraph, ResistanceOptions};
use super::CarpetGenerator;
use crate::error::{Error, Result};

pub const DIMENSION_CAVEAT: &str = "r is estimated from effective resistances of unit-conductance \
pre-carpet graphs; it approximates the resistance scaling factor of the self-similar Dirichlet form \
with no quantified error bound";

#[derive(Clone, Debug, Serialize)]
pub struct LevelResistance {
    pub level: usize,
    pub vertices: usize,
    pub edges: usize,
    pub resistance: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResistanceScaling {
    pub levels: Vec<LevelResistance>,
    /// `ρ̂_n = R_{n+1} / R_n` for consecutive levels.
    pub ratios: Vec<f64>,
    /// Last ratio.
    pub rho_hat: f64,
    /// `1 / ρ̂`.
    pub r_hat: f64,
    /// Aitken Δ² extrapolation of the ratio sequence when requested and
    /// at least three ratios exist.
    pub rho_extrapolated: Option<f64>,
}

/// Resistances between the faces `{x_1 = 0}` and `{x_1 = 1}` for levels
/// `n_min..=n_max`, and their successive ratios.
pub fn resistance_scaling(
    g: &CarpetGenerator,
    n_min: usize,
    n_max: usize,
    cap: u64,
    opts: &ResistanceOptions,
    extrapolate: bool,
) -> Result<ResistanceScaling> {
    if n_min == 0 || n_max < n_min + 1 {
        return Err(Error::Invalid(format!("need 1 <= n_min < n_max, got {n_min} and {n_max}")));
    }
    g.validate()?;
    let mut levels = Vec::new();
    for n in n_min..=n_max {
        let graph = PreCarpetGraph::build_unvalidated(g, n, cap)?;
        let sol = effective_resistance::<f64>(&graph, &graph.face(0, false), &graph.face(0, true), opts)?;
        levels.push(LevelResistance {
            level: n,
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            resistance: sol.resistance,
            iterations: sol.iterations,
            relative_residual: sol.relative_residual,
        });
    }
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[1].resistance / w[0].resistance).collect();
    let rho_hat = *ratios.last().expect("at least two levels");
    let rho_extrapolated = if extrapolate { aitken(&ratios) } else { None };
    Ok(ResistanceScaling { levels, ratios, rho_hat, r_hat: 1.0 / rho_hat, rho_extrapolated })
}

fn aitken(x: &[f64]) -> Option<f64> {
    let [a, b, c] = x.get(x.len().checked_sub(3)?..)? else { return None };
    let denom = (c - b) - (b - a);
    (denom.abs() > f64::EPSILON * c.abs()).then(|| c - (c - b).powi(2) / denom)
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub generator: String,
    pub dim: usize,
    pub l: usize,
    pub m: usize,
    pub r_hat: f64,
    pub d_h: f64,
    pub d_w: f64,
    pub d_s: f64,
    /// `|d_H − d_w d_s / 2|`.
    pub identity_residual: f64,
    /// Upper bound on the martingale dimension.
    pub dm_bound: usize,
    pub dm_branch: String,
    pub resistance: Option<ResistanceScaling>,
    pub caveat: String,
}

/// Dimensions from `r̂`: `d_H = log M / log l`, `d_w = log(M/r̂) / log l`,
/// `d_s = 2 log M / log(M/r̂)`, plus the martingale-dimension bound.
/// Requires `0 < r̂ < M` so that `d_w` is positive.
pub fn dimension_report(g: &CarpetGenerator, r_hat: f64, resistance: Option<ResistanceScaling>) -> Result<DimensionReport> {
    let m = g.cell_count() as f64;
    if !(r_hat > 0.0 && r_hat < m && r_hat.is_finite()) {
        return Err(Error::Invalid(format!("r estimate {r_hat} must lie in (0, M = {m})")));
    }
    let ln_l = (g.l() as f64).ln();
    let d_h = m.ln() / ln_l;
    let d_w = (m / r_hat).ln() / ln_l;
    let d_s = 2.0 * m.ln() / (m / r_hat).ln();
    let (dm_bound, dm_branch) = if d_s < 2.0 - 1e-12 {
        (1, "d_s < 2, so d_m = 1".to_string())
    } else if (d_s - 2.0).abs() <= 1e-12 {
        (2, "d_s = 2, so d_m <= 2".to_string())
    } else {
        let f = d_s.floor() as usize;
        (f, format!("d_m <= floor(d_s) = {f}"))
    };
    Ok(DimensionReport {
        generator: g.name().to_string(),
        dim: g.dim(),
        l: g.l(),
        m: g.cell_count(),
        r_hat,
        d_h,
        d_w,
        d_s,
        identity_residual: (d_h - d_w * d_s / 2.0).abs(),
        dm_bound,
        dm_branch,
        resistance,
        caveat: DIMENSION_CAVEAT.to_string(),
    })
}
