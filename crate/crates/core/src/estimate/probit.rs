use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{norm_cdf, norm_pdf, norm_sf, solve_spd, Matrix, SymMatrix};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Φ(z)`, finite for every finite `z`.
pub(crate) fn ln_norm_cdf(z: f64) -> f64 {
    if z > -20.0 {
        norm_cdf(z).ln()
    } else {
        // Asymptotic series of the Mills ratio.
        let r = 1.0 / (z * z);
        -0.5 * z * z - (-z).ln() - LN_SQRT_2PI + (1.0 - r + 3.0 * r * r - 15.0 * r * r * r).ln()
    }
}

/// Inverse Mills ratio `φ(z)/Φ(z)`.
pub(crate) fn mills(z: f64) -> f64 {
    if z > -20.0 {
        norm_pdf(z) / norm_cdf(z)
    } else {
        (-0.5 * z * z - LN_SQRT_2PI - ln_norm_cdf(z)).exp()
    }
}

/// Settings for the Newton–Raphson probit solver.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence when the sup-norm of the (summed) score falls below this.
    pub score_tol: f64,
    pub max_iter: usize,
    /// Fitted probabilities must stay inside `[bound, 1 - bound]`.
    pub boundary: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            score_tol: 1e-8,
            max_iter: 100,
            boundary: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbitFit {
    /// Columns of the full design that enter this fit, in order.
    pub columns: Vec<usize>,
    pub gamma_hat: Vec<f64>,
    /// Linear index `X_j'γ̂`.
    pub index: Vec<f64>,
    pub mu_hat: Vec<f64>,
    pub sigma2_hat: Vec<f64>,
    /// `-(1/n) Σ f(X_j'γ̂)² X_j X_j' / (μ̂_j(1-μ̂_j))`.
    #[serde(skip)]
    pub hessian: SymMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Eval {
    loglik: f64,
    score: Vec<f64>,
    neg_hess: SymMatrix,
}

fn evaluate(x: &Matrix, y: &[f64], gamma: &[f64], with_derivs: bool) -> Eval {
    let p = x.cols();
    let mut loglik = 0.0;
    let mut score = vec![0.0; p];
    let mut neg_hess = SymMatrix::zeros(p);
    for (j, &yj) in y.iter().enumerate() {
        let row = x.row(j);
        let z: f64 = row.iter().zip(gamma).map(|(a, b)| a * b).sum();
        if yj > 0.0 {
            loglik += yj * ln_norm_cdf(z);
        }
        if yj < 1.0 {
            loglik += (1.0 - yj) * ln_norm_cdf(-z);
        }
        if !with_derivs {
            continue;
        }
        let lp = mills(z);
        let lm = mills(-z);
        let d1 = yj * lp - (1.0 - yj) * lm;
        let d2 = yj * lp * (z + lp) + (1.0 - yj) * lm * (lm - z);
        for a in 0..p {
            score[a] += d1 * row[a];
            for b in a..p {
                neg_hess.add(a, b, d2 * row[a] * row[b]);
            }
        }
    }
    Eval {
        loglik,
        score,
        neg_hess,
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximises `Σ_j y_j ln Φ(X_j'γ) + (1-y_j) ln(1-Φ(X_j'γ))` for responses
/// `y_j ∈ [0, 1]` by Newton–Raphson from zero with step halving.
///
/// Fractional `y` gives the population objective whose maximiser is the
/// pseudo-true parameter; binary `y` gives the usual MLE.
pub fn probit_newton(x: &Matrix, y: &[f64], opts: NewtonOptions) -> Result<ProbitFit> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let gram = x.gram();
    if solve_spd(&gram, &vec![0.0; p]).is_err() {
        return Err(Error::RankDeficientX);
    }

    let mut gamma = vec![0.0; p];
    let mut cur = evaluate(x, y, &gamma, true);
    let mut iterations = 0;
    let mut converged = sup_norm(&cur.score) <= opts.score_tol;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let step = solve_spd(&cur.neg_hess, &cur.score).map_err(|_| Error::SingularHessian)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = gamma
                .iter()
                .zip(&step)
                .map(|(g, s)| g + lambda * s)
                .collect();
            let e = evaluate(x, y, &trial, false);
            if e.loglik.is_finite() && e.loglik >= cur.loglik - 1e-12 * (1.0 + cur.loglik.abs()) {
                accepted = Some(trial);
                break;
            }
            lambda *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(Error::NoConvergence {
                what: "probit line search",
                iterations,
            });
        };
        gamma = next;
        if sup_norm(&gamma) > 1e6 {
            return Err(Error::SeparationDetected { units: n });
        }
        cur = evaluate(x, y, &gamma, true);
        converged = sup_norm(&cur.score) <= opts.score_tol;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "probit newton",
            iterations,
        });
    }

    let index = x.mul_vec(&gamma);
    let mu_hat: Vec<f64> = index.iter().map(|&z| norm_cdf(z)).collect();
    let outside = mu_hat
        .iter()
        .filter(|&&m| m < opts.boundary || m > 1.0 - opts.boundary)
        .count();
    if outside > 0 {
        return Err(Error::SeparationDetected { units: outside });
    }
    let sigma2_hat: Vec<f64> = index.iter().map(|&z| norm_cdf(z) * norm_sf(z)).collect();
    let mut hessian = SymMatrix::zeros(p);
    for j in 0..n {
        let row = x.row(j);
        let w = norm_pdf(index[j]).powi(2) / sigma2_hat[j];
        for a in 0..p {
            for b in a..p {
                hessian.add(a, b, w * row[a] * row[b]);
            }
        }
    }
    hessian.scale(-1.0 / n as f64);

    Ok(ProbitFit {
        columns: (0..p).collect(),
        gamma_hat: gamma,
        index,
        mu_hat,
        sigma2_hat,
        hessian,
        log_likelihood: cur.loglik,
        iterations,
        converged,
    })
}

/// Probit MLE of binary `y0` on the full design.
pub fn probit_fit(x: &Matrix, y0: &[u8]) -> Result<ProbitFit> {
    let y: Vec<f64> = y0.iter().map(|&v| f64::from(v)).collect();
    probit_newton(x, &y, NewtonOptions::default())
}

/// Probit MLE on the design with the columns in `omit` removed.
pub fn probit_fit_omitting(x: &Matrix, y0: &[u8], omit: &[usize]) -> Result<ProbitFit> {
    let keep: Vec<usize> = (0..x.cols()).filter(|c| !omit.contains(c)).collect();
    let mut fit = probit_fit(&x.select_columns(&keep), y0)?;
    fit.columns = keep;
    Ok(fit)
}

/// `Σ_j ℓ_j(γ)` for binary or fractional responses.
pub fn probit_loglik(x: &Matrix, y: &[f64], gamma: &[f64]) -> f64 {
    evaluate(x, y, gamma, false).loglik
}

/// Summed score `Σ_j (y_j - μ_j) f(X_j'γ) X_j / (μ_j(1-μ_j))`.
pub fn probit_score(x: &Matrix, y: &[f64], gamma: &[f64]) -> Vec<f64> {
    evaluate(x, y, gamma, true).score
}

/// Summed Hessian of the log-likelihood (negative semidefinite).
pub fn probit_hessian(x: &Matrix, y: &[f64], gamma: &[f64]) -> SymMatrix {
    let mut h = evaluate(x, y, gamma, true).neg_hess;
    h.scale(-1.0);
    h
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OverlapReport {
    pub threshold: f64,
    /// Units whose fitted probability lies outside `(c, 1 - c)`.
    pub flagged: Vec<usize>,
}

impl OverlapReport {
    pub fn rate(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.flagged.len() as f64 / n as f64
        }
    }
}

/// Advisory check that fitted initial-switch probabilities stay away from 0 and 1.
pub fn overlap_diagnostic(fit: &ProbitFit, c: f64) -> OverlapReport {
    let flagged = fit
        .mu_hat
        .iter()
        .enumerate()
        .filter(|(_, &m)| m <= c || m >= 1.0 - c)
        .map(|(j, _)| j)
        .collect();
    OverlapReport {
        threshold: c,
        flagged,
    }
}
