//! Shipped p.c.f. structures with their harmonic structures.

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicModel, HarmonicStructure};
use crate::linalg::Matrix;
use crate::scalar::Rational;
use crate::structure::pcf::{AffineMap, PcfStructure, Point};
use crate::structure::weights::SelfSimilarWeights;

/// A ready-to-use structure: geometry, harmonic structure `(D, r)`,
/// self-similar measure and a basis of harmonic functions modulo constants.
#[derive(Clone, Debug)]
pub struct PcfPreset {
    pub structure: PcfStructure,
    pub harmonic: HarmonicStructure<Rational>,
    pub weights: SelfSimilarWeights,
    /// Boundary data of the canonical basis: unit vectors `e_0, …, e_{n−2}`.
    pub basis: Vec<Vec<Rational>>,
}

impl PcfPreset {
    /// Verified harmonic model over exact rationals.
    pub fn model(&self) -> Result<HarmonicModel<Rational>> {
        HarmonicModel::new(self.structure.clone(), self.harmonic.clone())
    }
}

pub const PRESET_NAMES: &[&str] = &["sg2", "sg3", "interval", "sg2-level3"];

pub fn by_name(name: &str) -> Result<PcfPreset> {
    match name {
        "sg2" => Ok(sg2()),
        "sg3" => Ok(sg3()),
        "interval" => Ok(interval()),
        "sg2-level3" => Ok(sg2_level3()),
        other => Err(Error::Invalid(format!(
            "unknown preset {other:?} (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn int_point(coords: &[i64]) -> Point {
    coords.iter().map(|&c| q(c, 1)).collect()
}

/// Graph Laplacian of the complete graph on `n` vertices (negative diagonal).
pub fn complete_graph_laplacian(n: usize) -> Matrix<Rational> {
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { q(-(n as i64 - 1), 1) } else { q(1, 1) }).collect())
        .collect();
    Matrix::from_rows(rows).expect("square")
}

fn unit_basis(n: usize) -> Vec<Vec<Rational>> {
    (0..n - 1).map(|k| (0..n).map(|i| q((i == k) as i64, 1)).collect()).collect()
}

fn gasket(name: &str, corners: Vec<Point>, r: Rational) -> PcfPreset {
    let maps = corners.iter().map(|p| AffineMap::similarity(q(1, 2), p)).collect::<Vec<_>>();
    let n = corners.len();
    let structure = PcfStructure::new(name, maps, corners).expect("preset geometry is valid");
    PcfPreset {
        harmonic: HarmonicStructure::new(complete_graph_laplacian(n), vec![r; n]).expect("preset D is valid"),
        weights: SelfSimilarWeights::uniform(n),
        basis: unit_basis(n),
        structure,
    }
}

/// Two-dimensional Sierpinski gasket: triangle `(0,0), (1,0), (0,1)`, `r = 3/5`.
pub fn sg2() -> PcfPreset {
    gasket("sg2", vec![int_point(&[0, 0]), int_point(&[1, 0]), int_point(&[0, 1])], q(3, 5))
}

/// Three-dimensional Sierpinski gasket on the standard simplex, `r = 2/3`.
pub fn sg3() -> PcfPreset {
    gasket(
        "sg3",
        vec![int_point(&[0, 0, 0]), int_point(&[1, 0, 0]), int_point(&[0, 1, 0]), int_point(&[0, 0, 1])],
        q(2, 3),
    )
}

/// Unit interval as a two-map self-similar set, `r = 1/2`.
pub fn interval() -> PcfPreset {
    let structure = PcfStructure::new(
        "interval",
        vec![AffineMap::similarity(q(1, 2), &int_point(&[0])), AffineMap::similarity(q(1, 2), &int_point(&[1]))],
        vec![int_point(&[0]), int_point(&[1])],
    )
    .expect("preset geometry is valid");
    PcfPreset {
        structure,
        harmonic: HarmonicStructure::new(complete_graph_laplacian(2), vec![q(1, 2); 2]).expect("valid"),
        weights: SelfSimilarWeights::uniform(2),
        basis: unit_basis(2),
    }
}

/// Gasket built from the six upward triangles of the 3-subdivided triangle,
/// `r = 7/15`.
pub fn sg2_level3() -> PcfPreset {
    let mut maps = Vec::new();
    for i in 0..3i64 {
        for j in 0..3 - i {
            maps.push(AffineMap::scaled_shift(q(1, 3), vec![q(i, 3), q(j, 3)]));
        }
    }
    let corners = vec![int_point(&[0, 0]), int_point(&[1, 0]), int_point(&[0, 1])];
    let structure = PcfStructure::new("sg2-level3", maps, corners).expect("preset geometry is valid");
    PcfPreset {
        structure,
        harmonic: HarmonicStructure::new(complete_graph_laplacian(3), vec![q(7, 15); 6]).expect("valid"),
        weights: SelfSimilarWeights::uniform(6),
        basis: unit_basis(3),
    }
}
