//! Matrix-measure descent for exact scalars in scaled integers: cell
//! vectors are kept as `i128` numerators over one denominator per level,
//! and a rational is built only for each output entry. Any overflow makes
//! the caller fall back to plain rational arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::harmonic::HarmonicModel;
use crate::linalg::Matrix;
use crate::measures::EnergyMatrixField;
use crate::scalar::{Rational, Scalar};

struct IntegerModel {
    n0: usize,
    /// `δ A_i`, row-major.
    ext: Vec<Vec<i128>>,
    delta: i128,
    /// `ε (−D)`, row-major.
    e0: Vec<i128>,
    e0_den: i128,
    /// `r_i^{-1} = inv_num_i / inv_den_i`.
    inv_num: Vec<i128>,
    inv_den: Vec<i128>,
}

fn to_i128(x: &BigInt) -> Option<i128> {
    x.to_i128()
}

fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<i128> {
    let l = values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    to_i128(&l)
}

fn scaled(values: &[Rational], den: i128) -> Option<Vec<i128>> {
    let den = BigInt::from(den);
    values.iter().map(|q| to_i128(&(q.numer() * (&den / q.denom())))).collect()
}

fn rationals<T: Scalar>(m: &Matrix<T>) -> Option<Vec<Rational>> {
    m.to_rows().iter().flatten().map(Scalar::as_rational).collect()
}

impl IntegerModel {
    fn new<T: Scalar>(model: &HarmonicModel<T>) -> Option<Self> {
        let n0 = model.boundary_count();
        let exts = (0..model.symbol_count())
            .map(|i| rationals(model.extension_matrix(i)))
            .collect::<Option<Vec<_>>>()?;
        let delta = common_denominator(exts.iter().flatten())?;
        let ext = exts.iter().map(|a| scaled(a, delta)).collect::<Option<Vec<_>>>()?;
        let e0r = rationals(model.energy0())?;
        let e0_den = common_denominator(&e0r)?;
        let e0 = scaled(&e0r, e0_den)?;
        let mut inv_num = Vec::new();
        let mut inv_den = Vec::new();
        for r in model.harmonic().weights() {
            let r = r.as_rational()?;
            if !r.is_positive() {
                return None;
            }
            inv_num.push(to_i128(r.denom())?);
            inv_den.push(to_i128(r.numer())?);
        }
        Some(Self { n0, ext, delta, e0, e0_den, inv_num, inv_den })
    }

    fn apply(&self, i: usize, b: &[i128]) -> Option<Vec<i128>> {
        let a = &self.ext[i];
        (0..self.n0)
            .map(|r| {
                (0..self.n0).try_fold(0i128, |acc, c| a[r * self.n0 + c].checked_mul(b[c])?.checked_add(acc))
            })
            .collect()
    }

    fn energy(&self, u: &[i128], v: &[i128]) -> Option<i128> {
        let n = self.n0;
        let mut acc = 0i128;
        for r in 0..n {
            let row = (0..n).try_fold(0i128, |s, c| self.e0[r * n + c].checked_mul(v[c])?.checked_add(s))?;
            acc = u[r].checked_mul(row)?.checked_add(acc)?;
        }
        Some(acc)
    }
}

struct Cell {
    /// `d` boundary vectors of numerators.
    vectors: Vec<Vec<i128>>,
    scale_num: i128,
    scale_den: i128,
}

fn reduce(num: i128, den: i128) -> (i128, i128) {
    let g = num.gcd(&den);
    if g > 1 {
        (num / g, den / g)
    } else {
        (num, den)
    }
}

fn ratio(num: i128, den: Result<i128, &BigInt>) -> Rational {
    match den {
        Ok(d) => {
            let (n, d) = reduce(num, d);
            Rational::new_raw(BigInt::from(n), BigInt::from(d))
        }
        Err(big) => Rational::new(BigInt::from(num), big.clone()),
    }
}

/// Fields at every requested level, or `None` when the model or data are
/// not exact or a value leaves the `i128` range.
pub(crate) fn matrix_fields<T: Scalar>(
    model: &HarmonicModel<T>,
    start: usize,
    tuples: &[Vec<Vec<T>>],
    levels: &[usize],
) -> Option<Vec<EnergyMatrixField<T>>> {
    if !T::EXACT {
        return None;
    }
    let im = IntegerModel::new(model)?;
    let d = tuples.first().map_or(0, Vec::len);
    let rational_tuples: Vec<Vec<Vec<Rational>>> = tuples
        .iter()
        .map(|t| t.iter().map(|b| b.iter().map(Scalar::as_rational).collect::<Option<Vec<_>>>()).collect())
        .collect::<Option<_>>()?;
    let l = common_denominator(rational_tuples.iter().flatten().flatten())?;
    let start_scales = crate::harmonic::inverse_r_by_cell(
        &model.harmonic().weights().iter().map(Scalar::as_rational).collect::<Option<Vec<_>>>()?,
        start,
    );
    let mut cells: Vec<Cell> = rational_tuples
        .iter()
        .zip(start_scales)
        .map(|(t, s)| {
            Some(Cell {
                vectors: t.iter().map(|b| scaled(b, l)).collect::<Option<Vec<_>>>()?,
                scale_num: to_i128(s.numer())?,
                scale_den: to_i128(s.denom())?,
            })
        })
        .collect::<Option<_>>()?;
    let deepest = levels.iter().copied().max().unwrap_or(start);
    let s = model.symbol_count();
    let mut out: Vec<Option<EnergyMatrixField<T>>> = vec![None; levels.len()];
    let mut level = start;
    // Values at `level` are numerators over `l δ^(level − start)`.
    let mut den = BigInt::from(l);
    loop {
        if levels.contains(&level) {
            let field = emit(&im, &cells, d, &den, level, s)?;
            for (slot, &m) in out.iter_mut().zip(levels) {
                if m == level {
                    *slot = Some(field.clone());
                }
            }
        }
        if level == deepest {
            break;
        }
        let mut next = Vec::with_capacity(cells.len() * s);
        for c in &cells {
            for i in 0..s {
                let (num, dd) = reduce(c.scale_num.checked_mul(im.inv_num[i])?, c.scale_den.checked_mul(im.inv_den[i])?);
                next.push(Cell {
                    vectors: c.vectors.iter().map(|b| im.apply(i, b)).collect::<Option<Vec<_>>>()?,
                    scale_num: num,
                    scale_den: dd,
                });
            }
        }
        cells = next;
        den *= im.delta;
        level += 1;
    }
    out.into_iter().collect()
}

fn emit<T: Scalar>(
    im: &IntegerModel,
    cells: &[Cell],
    d: usize,
    den: &BigInt,
    level: usize,
    n_symbols: usize,
) -> Option<EnergyMatrixField<T>> {
    // Entry (i, j) = 2 s_num (b_i, ε(−D) b_j) / (s_den ε den²).
    let base = den * den * im.e0_den;
    let base_small = to_i128(&base);
    let mut out = Vec::with_capacity(cells.len());
    for c in cells {
        let mut m = Matrix::zeros(d, d);
        let full_small = base_small.and_then(|b| b.checked_mul(c.scale_den));
        let full = if full_small.is_none() { &base * c.scale_den } else { BigInt::one() };
        for i in 0..d {
            for j in i..d {
                let e = im.energy(&c.vectors[i], &c.vectors[j])?;
                let num = e.checked_mul(2)?.checked_mul(c.scale_num)?;
                let v = T::from_rational(&ratio(num, full_small.ok_or(&full)));
                m.set(j, i, v.clone());
                m.set(i, j, v);
            }
        }
        out.push(m);
    }
    Some(EnergyMatrixField { level, n_symbols, d, cells: out })
}
