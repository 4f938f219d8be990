use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{overlapping_pairs, DirectedGraph, OverlapPairs};
use crate::numkit::{norm_pdf, norm_quantile, solve_spd, Matrix, SymMatrix};
use crate::simulate::PanelData;

use super::probit::{probit_fit, probit_fit_omitting, ProbitFit};

const SIGMA2_FLOOR: f64 = 1e-12;

fn check_sigma2(sigma2: &[f64]) -> Result<()> {
    match sigma2.iter().position(|&s| !(s > SIGMA2_FLOOR)) {
        Some(unit) => Err(Error::DegenerateVariance {
            unit,
            value: sigma2[unit],
        }),
        None => Ok(()),
    }
}

fn check_len(n: usize, lens: &[usize]) -> Result<()> {
    match lens.iter().find(|&&l| l != n) {
        Some(&got) => Err(Error::SizeMismatch { expected: n, got }),
        None => Ok(()),
    }
}

/// `(1/n) Σ_i Y1_i Σ_{j∈N(i)} (Y0_j - μ_j) / σ²_j` over the observed graph.
pub fn c_stat(
    observed: &DirectedGraph,
    y0: &[u8],
    y1: &[u8],
    mu_ref: &[f64],
    sigma2: &[f64],
) -> Result<f64> {
    let n = observed.n();
    check_len(n, &[y0.len(), y1.len(), mu_ref.len(), sigma2.len()])?;
    check_sigma2(sigma2)?;
    let mut acc = 0.0;
    for i in (0..n).filter(|&i| y1[i] == 1) {
        for &j in observed.in_nbrs(i) {
            acc += (f64::from(y0[j]) - mu_ref[j]) / sigma2[j];
        }
    }
    Ok(acc / n as f64)
}

/// `δ̂_j = (μ̂_j - μ̂_{j,-S}) / σ̂²_j`.
pub fn delta_j(fit_full: &ProbitFit, fit_omit: &ProbitFit) -> Result<Vec<f64>> {
    check_len(fit_full.mu_hat.len(), &[fit_omit.mu_hat.len()])?;
    check_sigma2(&fit_full.sigma2_hat)?;
    Ok(fit_full
        .mu_hat
        .iter()
        .zip(&fit_omit.mu_hat)
        .zip(&fit_full.sigma2_hat)
        .map(|((a, b), s)| (a - b) / s)
        .collect())
}

/// `Δ̂_S = (1/n) Σ_i Y1_i Σ_{j∈N(i)} δ̂_j`.
pub fn delta_hat(
    observed: &DirectedGraph,
    y1: &[u8],
    fit_full: &ProbitFit,
    fit_omit: &ProbitFit,
) -> Result<f64> {
    let n = observed.n();
    check_len(n, &[y1.len(), fit_full.mu_hat.len()])?;
    let d = delta_j(fit_full, fit_omit)?;
    let mut acc = 0.0;
    for i in (0..n).filter(|&i| y1[i] == 1) {
        for &j in observed.in_nbrs(i) {
            acc += d[j];
        }
    }
    Ok(acc / n as f64)
}

/// Influence terms of `Δ̂_S` and their projection on the covariates.
#[derive(Debug, Clone)]
pub struct InfluenceSet {
    pub omit: Vec<usize>,
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub lambda: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    /// Row `j` is `Û_j`.
    pub u: Matrix,
    /// Row `j` is `Û_{j,S}`.
    pub u_s: Matrix,
}

impl InfluenceSet {
    /// `q̂_i - ĥ_i`.
    pub fn residual(&self) -> Vec<f64> {
        self.q.iter().zip(&self.h).map(|(q, h)| q - h).collect()
    }
}

fn neg_solve(neg_h: &SymMatrix, v: &[f64]) -> Result<Vec<f64>> {
    solve_spd(neg_h, v).map_err(|_| Error::SingularHessian)
}

/// Least-squares fit `X(X'X)⁻¹X'q`, returning the coefficients and fitted values.
pub fn project(x: &Matrix, q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(x.rows(), &[q.len()])?;
    let xtq: Vec<f64> = (0..x.cols())
        .map(|a| (0..x.rows()).map(|i| x[(i, a)] * q[i]).sum())
        .collect();
    let lambda = solve_spd(&x.gram(), &xtq).map_err(|_| Error::RankDeficientX)?;
    let h = x.mul_vec(&lambda);
    Ok((lambda, h))
}

/// Sample influence functions `q̂_{i,S}` for `Δ̂_S`.
///
/// `fit_omit.columns` selects `X_{-S}`; `σ̂²_j` always comes from the full fit.
pub fn influence(
    observed: &DirectedGraph,
    x: &Matrix,
    y0: &[u8],
    y1: &[u8],
    fit_full: &ProbitFit,
    fit_omit: &ProbitFit,
) -> Result<InfluenceSet> {
    let n = observed.n();
    let p = x.cols();
    check_len(
        n,
        &[
            x.rows(),
            y0.len(),
            y1.len(),
            fit_full.mu_hat.len(),
            fit_omit.mu_hat.len(),
        ],
    )?;
    let keep = &fit_omit.columns;
    let ps = keep.len();
    let omit: Vec<usize> = (0..p).filter(|c| !keep.contains(c)).collect();
    let xs = x.select_columns(keep);
    let sigma2 = &fit_full.sigma2_hat;
    let d = delta_j(fit_full, fit_omit)?;

    let mut gamma = Matrix::zeros(n, p);
    let mut gamma_s = Matrix::zeros(n, ps);
    let mut neg_h = fit_full.hessian.clone();
    neg_h.scale(-1.0);
    let mut neg_hs = SymMatrix::zeros(ps);
    for j in 0..n {
        let w = norm_pdf(fit_full.index[j]) / sigma2[j];
        for (g, v) in gamma.row_mut(j).iter_mut().zip(x.row(j)) {
            *g = w * v;
        }
        let f = norm_pdf(fit_omit.index[j]);
        for (g, v) in gamma_s.row_mut(j).iter_mut().zip(xs.row(j)) {
            *g = f / sigma2[j] * v;
        }
        let m = fit_omit.mu_hat[j];
        let y = f64::from(y0[j]);
        let c = (y / (m * m) + (1.0 - y) / ((1.0 - m) * (1.0 - m))) * f * f;
        let row = xs.row(j);
        for a in 0..ps {
            for b in a..ps {
                neg_hs.add(a, b, c * row[a] * row[b]);
            }
        }
    }
    neg_hs.scale(1.0 / n as f64);

    let mut u = Matrix::zeros(n, p);
    let mut u_s = Matrix::zeros(n, ps);
    for j in 0..n {
        let eps = f64::from(y0[j]) - fit_full.mu_hat[j];
        let sol = neg_solve(&neg_h, gamma.row(j))?;
        for (dst, s) in u.row_mut(j).iter_mut().zip(sol) {
            *dst = eps * s;
        }
        let eps_s = f64::from(y0[j]) - fit_omit.mu_hat[j];
        let sol = neg_solve(&neg_hs, gamma_s.row(j))?;
        for (dst, s) in u_s.row_mut(j).iter_mut().zip(sol) {
            *dst = eps_s * s;
        }
    }

    let mut kappa1 = vec![0.0; p];
    let mut kappa2 = vec![0.0; ps];
    let mut delta_sum = vec![0.0; n];
    for i in 0..n {
        for &j in observed.in_nbrs(i) {
            delta_sum[i] += d[j];
        }
        if y1[i] == 0 {
            continue;
        }
        for &j in observed.in_nbrs(i) {
            let w = d[j] * (2.0 * fit_full.mu_hat[j] - 1.0) + 1.0;
            for (k, g) in kappa1.iter_mut().zip(gamma.row(j)) {
                *k += w * g;
            }
            for (k, g) in kappa2.iter_mut().zip(gamma_s.row(j)) {
                *k += g;
            }
        }
    }
    kappa1
        .iter_mut()
        .chain(kappa2.iter_mut())
        .for_each(|k| *k /= n as f64);

    let q: Vec<f64> = (0..n)
        .map(|i| {
            let a: f64 = kappa1.iter().zip(u.row(i)).map(|(k, v)| k * v).sum();
            let b: f64 = kappa2.iter().zip(u_s.row(i)).map(|(k, v)| k * v).sum();
            a - b + delta_sum[i] * f64::from(y1[i])
        })
        .collect();
    let (lambda, h) = project(x, &q)?;
    Ok(InfluenceSet {
        omit,
        q,
        h,
        lambda,
        kappa1,
        kappa2,
        u,
        u_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Variance {
    /// The pair sum before any truncation.
    pub raw: f64,
    pub value: f64,
    /// Set when `raw` was negative and replaced by the floor.
    pub clamped: bool,
}

impl Variance {
    fn from_raw(raw: f64) -> Self {
        if raw < 0.0 {
            Self {
                raw,
                value: SIGMA2_FLOOR,
                clamped: true,
            }
        } else {
            Self {
                raw,
                value: raw,
                clamped: false,
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.value.sqrt()
    }
}

/// `(1/n) Σ_{N̄(i1)∩N̄(i2)≠∅} e_{i1} e_{i2}` with `e = q̂ - ĥ`.
pub fn variance_with_pairs(pairs: &OverlapPairs, inf: &InfluenceSet) -> Result<Variance> {
    check_len(pairs.n(), &[inf.q.len()])?;
    let e = inf.residual();
    Ok(Variance::from_raw(
        pairs.bilinear(&e, &e) / pairs.n() as f64,
    ))
}

pub fn variance(observed: &DirectedGraph, inf: &InfluenceSet) -> Result<Variance> {
    variance_with_pairs(&overlapping_pairs(observed), inf)
}

/// Cross-covariances of the per-covariate influence residuals. The upper
/// triangle is computed and mirrored; the diagonal equals the unclamped
/// [`variance`] of each set.
pub fn omega_with_pairs(pairs: &OverlapPairs, sets: &[InfluenceSet]) -> Result<SymMatrix> {
    let n = pairs.n();
    for s in sets {
        check_len(n, &[s.q.len()])?;
    }
    let e: Vec<Vec<f64>> = sets.iter().map(InfluenceSet::residual).collect();
    let mut omega = SymMatrix::zeros(sets.len());
    for a in 0..sets.len() {
        for b in a..sets.len() {
            omega.set(a, b, pairs.bilinear(&e[a], &e[b]) / n as f64);
        }
    }
    Ok(omega)
}

pub fn omega_hat(observed: &DirectedGraph, sets: &[InfluenceSet]) -> Result<SymMatrix> {
    omega_with_pairs(&overlapping_pairs(observed), sets)
}

/// `Δ̂ ∓ z_{1-α/2} σ̂ / √n`.
pub fn confidence_interval(
    delta_hat: f64,
    sigma_hat: f64,
    n: usize,
    alpha: f64,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let half = norm_quantile(1.0 - alpha / 2.0) * sigma_hat / (n as f64).sqrt();
    Ok((delta_hat - half, delta_hat + half))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompResult {
    pub omit: Vec<usize>,
    pub c_hat_s: f64,
    pub c_hat_empty: f64,
    pub delta_hat: f64,
    pub sigma_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub clamped: bool,
}

/// A dataset with its full-model probit fit and overlap pairs, ready to be
/// decomposed for any number of omitted sets.
#[derive(Debug, Clone)]
pub struct Analysis<'a> {
    pub panel: &'a PanelData,
    pub fit: ProbitFit,
    pub pairs: OverlapPairs,
    pub c_hat_empty: f64,
}

impl<'a> Analysis<'a> {
    pub fn new(panel: &'a PanelData) -> Result<Self> {
        panel.validate()?;
        let fit = probit_fit(&panel.x, &panel.y0)?;
        let c_hat_empty = c_stat(
            &panel.observed,
            &panel.y0,
            &panel.y1,
            &fit.mu_hat,
            &fit.sigma2_hat,
        )?;
        Ok(Self {
            panel,
            fit,
            pairs: overlapping_pairs(&panel.observed),
            c_hat_empty,
        })
    }

    pub fn n(&self) -> usize {
        self.panel.n()
    }

    pub fn fit_omitting(&self, omit: &[usize]) -> Result<ProbitFit> {
        let p = self.panel.x.cols();
        if let Some(&bad) = omit.iter().find(|&&s| s >= p) {
            return Err(Error::InvalidConfig(format!(
                "omitted column {bad} out of range for {p} columns"
            )));
        }
        if omit.is_empty() {
            return Ok(self.fit.clone());
        }
        if (0..p).all(|c| omit.contains(&c)) {
            return Err(Error::InvalidConfig("cannot omit every column".into()));
        }
        probit_fit_omitting(&self.panel.x, &self.panel.y0, omit)
    }

    pub fn influence(&self, fit_omit: &ProbitFit) -> Result<InfluenceSet> {
        let d = self.panel;
        influence(&d.observed, &d.x, &d.y0, &d.y1, &self.fit, fit_omit)
    }

    /// Point estimates, variance and a level-`level` interval for one omitted set.
    pub fn decompose(&self, omit: &[usize], level: f64) -> Result<(DecompResult, InfluenceSet)> {
        let d = self.panel;
        let fit_omit = self.fit_omitting(omit)?;
        let c_hat_s = c_stat(
            &d.observed,
            &d.y0,
            &d.y1,
            &fit_omit.mu_hat,
            &self.fit.sigma2_hat,
        )?;
        let delta = delta_hat(&d.observed, &d.y1, &self.fit, &fit_omit)?;
        let inf = self.influence(&fit_omit)?;
        let var = variance_with_pairs(&self.pairs, &inf)?;
        let (ci_low, ci_high) = confidence_interval(delta, var.sigma(), self.n(), 1.0 - level)?;
        let mut omit = omit.to_vec();
        omit.sort_unstable();
        omit.dedup();
        let result = DecompResult {
            omit,
            c_hat_s,
            c_hat_empty: self.c_hat_empty,
            delta_hat: delta,
            sigma_hat: var.sigma(),
            ci_low,
            ci_high,
            level,
            clamped: var.clamped,
        };
        Ok((result, inf))
    }
}

/// One-shot decomposition of a dataset for omitted set `omit`.
pub fn decompose(panel: &PanelData, omit: &[usize], level: f64) -> Result<DecompResult> {
    Ok(Analysis::new(panel)?.decompose(omit, level)?.0)
}
