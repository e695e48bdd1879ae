use nalgebra::{DMatrix, DVector};

use super::solve_tridiagonal;
use crate::error::{Error, Result};

/// Jacobian in the storage the caller's sparsity calls for.
#[derive(Debug, Clone)]
pub enum Jacobian {
    Dense(DMatrix<f64>),
    /// Bands in the layout of [`solve_tridiagonal`].
    Tridiagonal {
        lower: Vec<f64>,
        diag: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl Jacobian {
    /// Solves `J x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            Jacobian::Dense(m) => {
                let lu = m.clone().lu();
                lu.solve(&DVector::from_column_slice(rhs))
                    .map(|v| v.as_slice().to_vec())
                    .ok_or(Error::SingularSystem { row: 0 })
            }
            Jacobian::Tridiagonal { lower, diag, upper } => solve_tridiagonal(lower, diag, upper, rhs),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 60,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Infinity norm of the residual, starting with the initial guess.
    pub residual_history: Vec<f64>,
}

impl NewtonReport {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::INFINITY)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0f64,
        |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY },
    )
}

/// Newton's method with step halving until the residual norm decreases.
pub fn damped_newton<R, J>(residual: R, jacobian: J, x0: Vec<f64>, opts: NewtonOptions) -> Result<NewtonReport>
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Result<Jacobian>,
{
    let mut x = x0;
    let mut r = residual(&x);
    let mut norm = inf_norm(&r);
    let mut history = vec![norm];
    for it in 0..opts.max_iterations {
        if norm <= opts.tol {
            return Ok(NewtonReport {
                x,
                iterations: it,
                residual_history: history,
            });
        }
        let jac = jacobian(&x)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = jac.solve(&neg)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, di)| xi + lambda * di).collect();
            let rt = residual(&trial);
            let nt = inf_norm(&rt);
            if nt < norm {
                x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(norm);
        if !accepted {
            return Err(Error::NewtonNonConvergence {
                iterations: it + 1,
                residual: norm,
            });
        }
    }
    if norm <= opts.tol {
        let iterations = history.len() - 1;
        return Ok(NewtonReport {
            x,
            iterations,
            residual_history: history,
        });
    }
    Err(Error::NewtonNonConvergence {
        iterations: opts.max_iterations,
        residual: norm,
    })
}

/// Finite-difference Jacobian of a residual whose row `i` depends only on
/// `x[i-1..=i+1]`. Columns are perturbed three at a time (every third
/// column shares a probe), with `eps = 1e-7 (1 + |x_j|)`.
pub fn tridiagonal_fd_jacobian<R>(residual: &R, x: &[f64]) -> Jacobian
where
    R: Fn(&[f64]) -> Vec<f64>,
{
    let m = x.len();
    let base = residual(x);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for color in 0..3 {
        let mut probe = x.to_vec();
        let mut eps = vec![0.0; m];
        for j in (color..m).step_by(3) {
            eps[j] = 1e-7 * (1.0 + x[j].abs());
            probe[j] += eps[j];
        }
        let rp = residual(&probe);
        for j in (color..m).step_by(3) {
            // column j touches rows j-1, j, j+1
            diag[j] = (rp[j] - base[j]) / eps[j];
            if j > 0 {
                upper[j - 1] = (rp[j - 1] - base[j - 1]) / eps[j];
            }
            if j + 1 < m {
                lower[j + 1] = (rp[j + 1] - base[j + 1]) / eps[j];
            }
        }
    }
    Jacobian::Tridiagonal { lower, diag, upper }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> Jacobian {
        let n = rows.len();
        Jacobian::Dense(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    #[test]
    fn linear_converges_in_one_step() {
        let a = 3.7;
        let rep = damped_newton(
            |x| vec![x[0] - a],
            |_| Ok(dense(&[&[1.0]])),
            vec![-10.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((rep.x[0] - a).abs() < 1e-15);
    }

    #[test]
    fn square_root_of_four() {
        let rep = damped_newton(
            |x| vec![x[0] * x[0] - 4.0],
            |x| Ok(dense(&[&[2.0 * x[0]]])),
            vec![3.0],
            NewtonOptions {
                tol: 1e-14,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((rep.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_system_with_chosen_root() {
        // Root chosen at (1, -2): x^2 + y^2 - 5 = 0, x^3 y + 2 = 0.
        let res = |v: &[f64]| vec![v[0] * v[0] + v[1] * v[1] - 5.0, v[0].powi(3) * v[1] + 2.0];
        let jac = |v: &[f64]| {
            Ok(dense(&[
                &[2.0 * v[0], 2.0 * v[1]],
                &[3.0 * v[0] * v[0] * v[1], v[0].powi(3)],
            ]))
        };
        let rep = damped_newton(
            res,
            jac,
            vec![1.3, -1.6],
            NewtonOptions {
                tol: 1e-13,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((rep.x[0] - 1.0).abs() < 1e-12 && (rep.x[1] + 2.0).abs() < 1e-12);
        // Terminal phase is quadratic.
        let h = &rep.residual_history;
        let k = h.len();
        assert!(h[k - 1] <= 10.0 * h[k - 2] * h[k - 2] + 1e-15);
    }

    #[test]
    fn reports_nonconvergence() {
        // x^2 + 1 has no real root; the residual cannot be reduced below 1.
        let r = damped_newton(
            |x| vec![x[0] * x[0] + 1.0],
            |x| Ok(dense(&[&[2.0 * x[0]]])),
            vec![0.5],
            NewtonOptions {
                max_iterations: 20,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::NewtonNonConvergence { .. })));
    }

    #[test]
    fn fd_jacobian_matches_analytic_bands() {
        let res = |x: &[f64]| {
            let m = x.len();
            (0..m)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { 0.0 };
                    let r = if i + 1 < m { x[i + 1] } else { 0.0 };
                    l * x[i] + x[i].powi(3) - 2.0 * r
                })
                .collect::<Vec<_>>()
        };
        let x: Vec<f64> = (0..11).map(|i| 0.3 + 0.1 * i as f64).collect();
        let Jacobian::Tridiagonal { lower, diag, upper } = tridiagonal_fd_jacobian(&res, &x) else {
            unreachable!()
        };
        for i in 0..x.len() {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            assert!((diag[i] - (l + 3.0 * x[i] * x[i])).abs() < 1e-5);
            if i > 0 {
                assert!((lower[i] - x[i]).abs() < 1e-5);
            }
            if i + 1 < x.len() {
                assert!((upper[i] + 2.0).abs() < 1e-5);
            }
        }
    }
}
