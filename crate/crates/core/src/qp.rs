//! Dense strictly convex QP solver (Goldfarb-Idnani dual active set).
//!
//! Solves `min 1/2 x'Hx + f'x` subject to `A x <= b` and `lower <= x <= upper`.
//! Constraints are visited in a fixed order and ties resolve to the lowest
//! row, so identical inputs give bit-identical outputs.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    /// Inequality rows `a x <= b`.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Per-variable bounds; infinite entries are absent.
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl QpProblem {
    pub fn unconstrained(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        let n = f.len();
        QpProblem {
            h,
            f,
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            lower: DVector::from_element(n, f64::NEG_INFINITY),
            upper: DVector::from_element(n, f64::INFINITY),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) + self.f.dot(x)
    }

    /// Largest violation over all rows and bounds (0 when feasible).
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut v: f64 = 0.0;
        let ax = &self.a * x;
        for i in 0..self.b.len() {
            v = v.max(ax[i] - self.b[i]);
        }
        for i in 0..x.len() {
            v = v.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        v
    }

    /// All constraints as `n_i . x >= d_i`, rows first, then finite lower
    /// bounds, then finite upper bounds.
    fn standard_form(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        let n = self.dim();
        let mut normals = Vec::new();
        let mut d = Vec::new();
        for i in 0..self.a.nrows() {
            normals.push(-self.a.row(i).transpose());
            d.push(-self.b[i]);
        }
        for i in 0..n {
            if self.lower[i].is_finite() {
                normals.push(DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }));
                d.push(self.lower[i]);
            }
        }
        for i in 0..n {
            if self.upper[i].is_finite() {
                normals.push(DVector::from_fn(n, |k, _| if k == i { -1.0 } else { 0.0 }));
                d.push(-self.upper[i]);
            }
        }
        (normals, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpError {
    NotPositiveDefinite,
    Infeasible,
    IterationLimit,
}

impl core::fmt::Display for QpError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QpError::NotPositiveDefinite => f.write_str("cost matrix is not positive definite"),
            QpError::Infeasible => f.write_str("constraints are infeasible"),
            QpError::IterationLimit => f.write_str("iteration limit reached"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Active constraint indices in standard-form order (rows, lower, upper).
    pub active: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub iterations: usize,
}

const FEAS_TOL: f64 = 1e-10;
const DEP_TOL: f64 = 1e-12;

pub fn solve_qp(problem: &QpProblem) -> Result<QpSolution, QpError> {
    let n = problem.dim();
    let chol = problem.h.clone().cholesky().ok_or(QpError::NotPositiveDefinite)?;
    let hinv = chol.inverse();
    let (normals, d) = problem.standard_form();
    let m = normals.len();
    let mut x = -(&hinv * &problem.f);
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let max_iter = 10 * (m + n) + 50;
    let hinv_n: Vec<DVector<f64>> = normals.iter().map(|c| &hinv * c).collect();

    loop {
        // most violated constraint, scaled by its normal length
        let mut p = None;
        let mut worst = -FEAS_TOL;
        for i in 0..m {
            if active.contains(&i) {
                continue;
            }
            let norm = normals[i].norm();
            if norm == 0.0 {
                if d[i] > FEAS_TOL {
                    return Err(QpError::Infeasible);
                }
                continue;
            }
            let s = (normals[i].dot(&x) - d[i]) / norm;
            if s < worst {
                worst = s;
                p = Some(i);
            }
        }
        let Some(p) = p else {
            return Ok(QpSolution { x, active, multipliers: u, iterations });
        };
        let mut u_plus = u.clone();
        u_plus.push(0.0);
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(QpError::IterationLimit);
            }
            let q = active.len();
            let (z, r) = if q == 0 {
                (hinv_n[p].clone(), DVector::zeros(0))
            } else {
                let nmat = DMatrix::from_fn(n, q, |row, col| normals[active[col]][row]);
                let hn = DMatrix::from_fn(n, q, |row, col| hinv_n[active[col]][row]);
                let gram = nmat.transpose() * &hn;
                let rhs = hn.transpose() * &normals[p];
                let r = match gram.clone().cholesky() {
                    Some(c) => c.solve(&rhs),
                    None => gram.lu().solve(&rhs).ok_or(QpError::Infeasible)?,
                };
                let z = &hinv_n[p] - &hn * &r;
                (z, r)
            };
            // partial step: first active multiplier to reach zero
            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for j in 0..q {
                if r[j] > DEP_TOL {
                    let ratio = u_plus[j] / r[j];
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(j);
                    }
                }
            }
            let zn = z.dot(&normals[p]);
            let dependent = zn <= DEP_TOL * normals[p].norm_squared().max(1.0);
            let t2 = if dependent { f64::INFINITY } else { -(normals[p].dot(&x) - d[p]) / zn };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(QpError::Infeasible);
            }
            for j in 0..q {
                u_plus[j] -= t * r[j];
            }
            u_plus[q] += t;
            if !dependent {
                x += &z * t;
            }
            if t2 <= t1 {
                active.push(p);
                u = u_plus;
                break;
            }
            let k = drop.expect("partial step has a blocking constraint");
            active.remove(k);
            u_plus.remove(k);
        }
    }
}
