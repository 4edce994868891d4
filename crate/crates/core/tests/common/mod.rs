//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's assembly or elimination code.
#![allow(dead_code)]

use std::collections::HashMap;

use fractal_index::structure::{PcfStructure, Point};
use fractal_index::Rational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn random_rational(rng: &mut impl Rng, span: i64, den: i64) -> Rational {
    q(rng.random_range(-span..=span), rng.random_range(1..=den))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng, 9, 7)).collect()
}

fn apply(linear: &[Vec<Rational>], shift: &[Rational], x: &[Rational]) -> Point {
    linear
        .iter()
        .zip(shift)
        .map(|(row, b)| {
            let mut acc = b.clone();
            for (a, xi) in row.iter().zip(x) {
                acc += a * xi;
            }
            acc
        })
        .collect()
}

/// Glued vertex set of level `m` built directly from the maps: each cell is
/// the list of its corner coordinates, in lexicographic word order.
pub struct Net {
    pub points: Vec<Point>,
    pub ids: HashMap<Point, usize>,
    /// Corner ids of every level-`m` cell, in boundary order.
    pub cells: Vec<Vec<usize>>,
    /// `r_w` for every cell.
    pub weights: Vec<Rational>,
}

pub fn net(s: &PcfStructure, r: &[Rational], m: usize) -> Net {
    // Corners of cell i·v are ψ_i applied to the corners of v.
    let mut cells: Vec<(Vec<Point>, Rational)> = vec![(s.boundary().to_vec(), Rational::one())];
    for _ in 0..m {
        let mut next = Vec::new();
        for (i, map) in s.maps().iter().enumerate() {
            for (corners, rw) in &cells {
                next.push((corners.iter().map(|p| apply(&map.linear, &map.shift, p)).collect(), &r[i] * rw));
            }
        }
        cells = next;
    }
    let mut points: Vec<Point> = Vec::new();
    let mut ids = HashMap::new();
    for p in s.boundary() {
        ids.entry(p.clone()).or_insert_with(|| {
            points.push(p.clone());
            points.len() - 1
        });
    }
    let mut out_cells = Vec::new();
    let mut weights = Vec::new();
    for (corners, rw) in cells {
        let c = corners
            .into_iter()
            .map(|p| {
                *ids.entry(p.clone()).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                })
            })
            .collect();
        out_cells.push(c);
        weights.push(rw);
    }
    Net { points, ids, cells: out_cells, weights }
}

/// Dense coefficient matrix `Q` with `E^(m)(u) = uᵀ Q u`, one conductance
/// `D_pq / r_w` per corner pair of every cell.
pub fn dense_form(net: &Net, d: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = net.points.len();
    let mut a = vec![vec![Rational::zero(); n]; n];
    for (cell, rw) in net.cells.iter().zip(&net.weights) {
        for p in 0..cell.len() {
            for qq in p + 1..cell.len() {
                let c = &d[p][qq] / rw;
                let (x, y) = (cell[p], cell[qq]);
                a[x][x] += &c;
                a[y][y] += &c;
                a[x][y] -= &c;
                a[y][x] -= &c;
            }
        }
    }
    a
}

pub fn quadratic(a: &[Vec<Rational>], u: &[Rational], v: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                acc += x * &u[i] * &v[j];
            }
        }
    }
    acc
}

/// Solves `A X = B` by Gauss–Jordan elimination with nonzero pivots.
pub fn solve(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, s)| r.iter().chain(s).cloned().collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !aug[r][col].is_zero()).expect("singular system");
        aug.swap(col, piv);
        let inv = Rational::one() / &aug[col][col];
        for x in aug[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..n + k {
                    let t = &f * &aug[col][c];
                    aug[r][c] -= t;
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Schur complement of `a` onto the index set `keep`.
pub fn schur(a: &[Vec<Rational>], keep: &[usize]) -> Vec<Vec<Rational>> {
    let elim: Vec<usize> = (0..a.len()).filter(|i| !keep.contains(i)).collect();
    let pick = |rows: &[usize], cols: &[usize]| -> Vec<Vec<Rational>> {
        rows.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect()
    };
    let aa = pick(keep, keep);
    if elim.is_empty() {
        return aa;
    }
    let x = solve(&pick(&elim, &elim), &pick(&elim, keep));
    let ab = pick(keep, &elim);
    (0..keep.len())
        .map(|i| {
            (0..keep.len())
                .map(|j| {
                    let mut v = aa[i][j].clone();
                    for (t, row) in x.iter().enumerate() {
                        v -= &ab[i][t] * &row[j];
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Energy minimizer on the net with prescribed values on `V_0`.
pub fn minimize(net: &Net, d: &[Vec<Rational>], boundary: &[Rational]) -> Vec<Rational> {
    let a = dense_form(net, d);
    let nb = boundary.len();
    let n = net.points.len();
    let interior: Vec<usize> = (nb..n).collect();
    let mut values = boundary.to_vec();
    values.resize(n, Rational::zero());
    if interior.is_empty() {
        return values;
    }
    let aii: Vec<Vec<Rational>> = interior.iter().map(|&i| interior.iter().map(|&j| a[i][j].clone()).collect()).collect();
    let rhs: Vec<Vec<Rational>> = interior
        .iter()
        .map(|&i| {
            let mut s = Rational::zero();
            for (j, b) in boundary.iter().enumerate() {
                s -= &a[i][j] * b;
            }
            vec![s]
        })
        .collect();
    for (slot, x) in interior.iter().zip(solve(&aii, &rhs)) {
        values[*slot] = x[0].clone();
    }
    values
}

/// `2 r_w^{-1} (−D u_w, u_w)` for every cell, from vertex values.
pub fn cell_masses(net: &Net, d: &[Vec<Rational>], values: &[Rational]) -> Vec<Rational> {
    net.cells
        .iter()
        .zip(&net.weights)
        .map(|(cell, rw)| {
            let mut e = Rational::zero();
            for p in 0..cell.len() {
                for qq in p + 1..cell.len() {
                    let diff = &values[cell[p]] - &values[cell[qq]];
                    e += &d[p][qq] * &diff * &diff;
                }
            }
            q(2, 1) * e / rw
        })
        .collect()
}

pub fn max_abs(a: &[Vec<Rational>]) -> Rational {
    a.iter().flatten().map(|x| x.abs()).fold(Rational::zero(), |m, x| if x > m { x } else { m })
}
