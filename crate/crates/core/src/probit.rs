//! Probit maximum likelihood with analytic score and information.

use std::io;

use serde::{Deserialize, Serialize};

use crate::data::EstimationSample;
use crate::numerics::{check_full_rank, log_norm_cdf, norm_cdf, pdf_over_cdf, Cholesky, Matrix, Vector, SYMMETRY_TOL};
use crate::parallel::{blocked_reduce, BLOCK_ROWS};
use crate::{Error, Result, SCHEMA_VERSION};

/// Coefficients beyond this magnitude indicate (quasi-)separation.
pub const SEPARATION_BOUND: f64 = 30.0;

/// Dense row-major design with a binary outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<bool>,
    names: Vec<String>,
}

impl Design {
    pub fn new(rows: &[Vec<f64>], y: Vec<bool>, names: Vec<String>) -> Result<Self> {
        let p = names.len();
        if rows.len() != y.len() {
            return Err(Error::Dimension(format!("{} design rows for {} outcomes", rows.len(), y.len())));
        }
        let mut x = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::Dimension(format!("design row {i} has {} entries, expected {p}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("design row {i} has a non-finite entry")));
            }
            x.extend_from_slice(r);
        }
        Ok(Self { n: rows.len(), p, x, y, names })
    }

    /// The (G, T, X·W, X) design of an estimation sample.
    pub fn from_sample(sample: &EstimationSample) -> Self {
        let p = EstimationSample::width();
        let mut x = vec![0.0; sample.len() * p];
        for (row, out) in sample.rows.iter().zip(x.chunks_exact_mut(p)) {
            row.design_into(out);
        }
        Self {
            n: sample.len(),
            p,
            x,
            y: sample.rows.iter().map(|r| r.y).collect(),
            names: EstimationSample::column_names(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    fn check(&self, kappa: &[f64]) -> Result<()> {
        if kappa.len() != self.p {
            return Err(Error::Dimension(format!("kappa has length {}, design width is {}", kappa.len(), self.p)));
        }
        Ok(())
    }

    fn index(&self, i: usize, kappa: &[f64]) -> f64 {
        self.row(i).iter().zip(kappa).map(|(a, b)| a * b).sum()
    }

    /// Check full column rank; the error names the first collinear column.
    pub fn check_rank(&self) -> Result<()> {
        let p = self.p;
        let xtx = blocked_reduce(
            self.n,
            BLOCK_ROWS,
            |r| {
                let mut acc = vec![0.0; p * p];
                for i in r {
                    let row = self.row(i);
                    for a in 0..p {
                        for b in 0..=a {
                            acc[a * p + b] += row[a] * row[b];
                        }
                    }
                }
                acc
            },
            add_into,
            vec![0.0; p * p],
        );
        let gram = Matrix::from_fn(p, p, |a, b| {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            xtx[hi * p + lo]
        });
        check_full_rank(&gram, &self.names)
    }
}

fn add_into(mut acc: Vec<f64>, part: Vec<f64>) -> Vec<f64> {
    acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
    acc
}

/// Σᵢ [yᵢ log Φ(zᵢ) + (1−yᵢ) log Φ(−zᵢ)].
pub fn log_likelihood(kappa: &[f64], design: &Design) -> Result<f64> {
    design.check(kappa)?;
    Ok(blocked_reduce(
        design.n,
        BLOCK_ROWS,
        |r| r.map(|i| row_loglik(design.y[i], design.index(i, kappa))).sum::<f64>(),
        |a, b| a + b,
        0.0,
    ))
}

fn row_loglik(y: bool, z: f64) -> f64 {
    if y {
        log_norm_cdf(z)
    } else {
        log_norm_cdf(-z)
    }
}

/// Score vector Σᵢ λᵢ·rowᵢ, λᵢ = yᵢ φ/Φ(z) − (1−yᵢ) φ/Φ(−z).
pub fn score(kappa: &[f64], design: &Design) -> Result<Vector> {
    design.check(kappa)?;
    let p = design.p;
    let s = blocked_reduce(
        design.n,
        BLOCK_ROWS,
        |r| {
            let mut acc = vec![0.0; p];
            for i in r {
                let z = design.index(i, kappa);
                let lambda = generalized_residual(design.y[i], z);
                acc.iter_mut().zip(design.row(i)).for_each(|(a, x)| *a += lambda * x);
            }
            acc
        },
        add_into,
        vec![0.0; p],
    );
    Ok(Vector::from_vec(s))
}

fn generalized_residual(y: bool, z: f64) -> f64 {
    if y {
        pdf_over_cdf(z)
    } else {
        -pdf_over_cdf(-z)
    }
}

/// φ(z)² / (Φ(z)Φ(−z)), evaluated without cancellation in either tail.
pub fn information_weight(z: f64) -> f64 {
    pdf_over_cdf(z) * pdf_over_cdf(-z)
}

/// Expected information Σᵢ wᵢ·rowᵢ rowᵢᵀ.
pub fn information(kappa: &[f64], design: &Design) -> Result<Matrix> {
    design.check(kappa)?;
    Ok(evaluate(kappa, design).info)
}

struct Evaluation {
    loglik: f64,
    score: Vector,
    info: Matrix,
}

fn evaluate(kappa: &[f64], design: &Design) -> Evaluation {
    let p = design.p;
    // layout: [loglik, score (p), lower triangle of info (p*p row-major)]
    let acc = blocked_reduce(
        design.n,
        BLOCK_ROWS,
        |r| {
            let mut acc = vec![0.0; 1 + p + p * p];
            for i in r {
                let row = design.row(i);
                let z = design.index(i, kappa);
                let y = design.y[i];
                acc[0] += row_loglik(y, z);
                let lambda = generalized_residual(y, z);
                let w = information_weight(z);
                for a in 0..p {
                    acc[1 + a] += lambda * row[a];
                    let wa = w * row[a];
                    if wa == 0.0 {
                        continue;
                    }
                    let base = 1 + p + a * p;
                    for b in 0..=a {
                        acc[base + b] += wa * row[b];
                    }
                }
            }
            acc
        },
        add_into,
        vec![0.0; 1 + p + p * p],
    );
    let info = Matrix::from_fn(p, p, |a, b| {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        acc[1 + p + hi * p + lo]
    });
    Evaluation { loglik: acc[0], score: Vector::from_column_slice(&acc[1..1 + p]), info }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence threshold on ‖score‖∞.
    pub tol: f64,
    /// Added to the information diagonal when solving for the Newton step.
    /// It damps the step only; the fixed point and Σ are unaffected.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-8, ridge: 0.0 }
    }
}

/// Fitted probit. `sigma` is the asymptotic covariance of √n(κ̂ − κ), so the
/// standard error of κ̂ⱼ is √(σⱼⱼ / n).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbitFit {
    pub kappa: Vec<f64>,
    pub sigma: Matrix,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub column_names: Vec<String>,
    pub score_norm: f64,
    pub separation_warning: bool,
    /// Log-likelihood after each accepted step, starting at κ = 0.
    pub loglik_path: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_value: f64,
}

impl ProbitFit {
    pub fn se(&self, j: usize) -> f64 {
        (self.sigma[(j, j)] / self.n as f64).sqrt()
    }

    /// Wald tests of each coefficient, two-sided normal p-values.
    pub fn coefficients(&self) -> Vec<Coefficient> {
        (0..self.kappa.len())
            .map(|j| {
                let se = self.se(j);
                let z = self.kappa[j] / se;
                Coefficient {
                    name: self.column_names[j].clone(),
                    estimate: self.kappa[j],
                    se,
                    z,
                    p_value: 2.0 * norm_cdf(-z.abs()),
                }
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn to_file(&self) -> FitFile {
        let p = self.kappa.len();
        FitFile {
            schema_version: SCHEMA_VERSION,
            kappa: self.kappa.clone(),
            sigma: (0..p).map(|a| (0..p).map(|b| self.sigma[(a, b)]).collect()).collect(),
            loglik: self.loglik,
            converged: self.converged,
            n: self.n,
            column_names: self.column_names.clone(),
            iterations: self.iterations,
            score_norm: self.score_norm,
            separation_warning: self.separation_warning,
        }
    }

    pub fn write_json<W: io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.to_file())?;
        Ok(())
    }

    pub fn read_json<R: io::Read>(reader: R) -> Result<Self> {
        let file: FitFile = serde_json::from_reader(reader)?;
        file.into_fit()
    }
}

/// On-disk form of a [`ProbitFit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub schema_version: u32,
    pub kappa: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub n: usize,
    pub column_names: Vec<String>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub score_norm: f64,
    #[serde(default)]
    pub separation_warning: bool,
}

impl FitFile {
    pub fn into_fit(self) -> Result<ProbitFit> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported fit schema_version {}", self.schema_version)));
        }
        let p = self.kappa.len();
        if p == 0 || self.column_names.len() != p || self.sigma.len() != p || self.sigma.iter().any(|r| r.len() != p) {
            return Err(Error::Schema(format!(
                "fit dimensions disagree: {p} coefficients, {} names, sigma {}x{}",
                self.column_names.len(),
                self.sigma.len(),
                self.sigma.first().map_or(0, Vec::len)
            )));
        }
        if self.n == 0 {
            return Err(Error::Schema("fit has n = 0".into()));
        }
        if self.kappa.iter().chain(self.sigma.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Schema("fit contains non-finite values".into()));
        }
        let sigma = Matrix::from_fn(p, p, |a, b| self.sigma[a][b]);
        let scale = sigma.amax().max(1.0);
        if (0..p).any(|a| (0..a).any(|b| (sigma[(a, b)] - sigma[(b, a)]).abs() > SYMMETRY_TOL * scale)) {
            return Err(Error::Schema("fit sigma is not symmetric".into()));
        }
        if (0..p).any(|j| sigma[(j, j)] < 0.0) {
            return Err(Error::Schema("fit sigma has a negative variance".into()));
        }
        Ok(ProbitFit {
            separation_warning: self.kappa.iter().any(|k| k.abs() > SEPARATION_BOUND),
            kappa: self.kappa,
            sigma,
            loglik: self.loglik,
            iterations: self.iterations,
            converged: self.converged,
            n: self.n,
            column_names: self.column_names,
            score_norm: self.score_norm,
            loglik_path: Vec::new(),
        })
    }
}

/// Fit the (G, T, X·W, X) probit of an estimation sample.
pub fn fit_probit(sample: &EstimationSample, options: &FitOptions) -> Result<ProbitFit> {
    fit_design(&Design::from_sample(sample), options)
}

/// Newton-Raphson from κ = 0 with step halving.
///
/// A step is accepted when the log-likelihood does not decrease; when the
/// change is below the resolution of the summed log-likelihood, the step is
/// accepted if it shrinks the score instead. Iteration stops when
/// ‖score‖∞ ≤ `tol`, when an accepted step shorter than 1e-12 no longer
/// shrinks the score, or after `max_iter` steps; only the first counts as
/// converged.
pub fn fit_design(design: &Design, options: &FitOptions) -> Result<ProbitFit> {
    if !(options.tol > 0.0) || !(options.ridge >= 0.0) || options.max_iter == 0 {
        return Err(Error::Config("fit options need tol > 0, ridge >= 0 and max_iter >= 1".into()));
    }
    if design.n == 0 {
        return Err(Error::Empty("estimation sample has no rows".into()));
    }
    let ones = design.y.iter().filter(|y| **y).count();
    if ones == 0 || ones == design.n {
        return Err(Error::Degenerate(format!("outcome is constant ({} of {} rows are 1)", ones, design.n)));
    }
    design.check_rank()?;

    let p = design.p;
    let mut kappa = vec![0.0; p];
    let mut eval = evaluate(&kappa, design);
    let mut path = vec![eval.loglik];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let gnorm = eval.score.amax();
        if gnorm <= options.tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        let mut h = eval.info.clone();
        for j in 0..p {
            h[(j, j)] += options.ridge;
        }
        let delta = Cholesky::new(&h)?.solve(&eval.score)?;
        let resolution = 64.0 * f64::EPSILON * eval.loglik.abs().max(1.0);
        let mut step = 1.0;
        let mut accepted = None;
        // the full step is always tried; halving stops below 1e-12
        loop {
            let trial: Vec<f64> = kappa.iter().zip(delta.iter()).map(|(k, d)| k + step * d).collect();
            let next = evaluate(&trial, design);
            let ok = next.loglik.is_finite()
                && (next.loglik >= eval.loglik
                    || (next.loglik >= eval.loglik - resolution && next.score.amax() < gnorm));
            if ok {
                accepted = Some((trial, next));
                break;
            }
            step *= 0.5;
            if step * delta.amax() < 1e-12 {
                break;
            }
        }
        let Some((trial, next)) = accepted else { break };
        iterations += 1;
        let moved = step * delta.amax();
        kappa = trial;
        eval = next;
        path.push(eval.loglik);
        // with expected information the iteration is linear, so steps get
        // tiny well before the score does; stop only once the score stalls
        if moved < 1e-12 && eval.score.amax() >= gnorm {
            converged = eval.score.amax() <= options.tol;
            break;
        }
    }

    let info_inv = Cholesky::new(&eval.info)?.inverse();
    let sigma = info_inv * design.n as f64;
    Ok(ProbitFit {
        separation_warning: kappa.iter().any(|k| k.abs() > SEPARATION_BOUND),
        score_norm: eval.score.amax(),
        kappa,
        sigma,
        loglik: eval.loglik,
        iterations,
        converged,
        n: design.n,
        column_names: design.names.clone(),
        loglik_path: path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_gradient, norm_pdf, std_normal_quantile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    fn intercept_only(y: &[bool]) -> Design {
        Design::new(&vec![vec![1.0]; y.len()], y.to_vec(), vec!["const".into()]).unwrap()
    }

    fn simulated(n: usize, kappa: &[f64], seed: u64) -> Design {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kappa.len();
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let mut r = vec![1.0];
            r.extend((1..p).map(|j| if j % 2 == 0 { f64::from(rng.random_bool(0.4)) } else { rng.random_range(-1.0..1.0) }));
            let z: f64 = r.iter().zip(kappa).map(|(a, b)| a * b).sum();
            let e: f64 = rng.sample(StandardNormal);
            y.push(z + e > 0.0);
            rows.push(r);
        }
        Design::new(&rows, y, names(p)).unwrap()
    }

    #[test]
    fn loglik_at_zero() {
        let d = simulated(50, &[0.2, 0.5, -0.3], 1);
        let ll = log_likelihood(&[0.0; 3], &d).unwrap();
        assert!((ll - 50.0 * 0.5f64.ln()).abs() < 1e-10);
        assert!(matches!(log_likelihood(&[0.0; 2], &d), Err(Error::Dimension(_))));
    }

    #[test]
    fn loglik_single_row() {
        let d = Design::new(&[vec![1.96]], vec![true], names(1)).unwrap();
        let ll = log_likelihood(&[1.0], &d).unwrap();
        assert!((ll - 0.975_002_104_851_779_6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn separated_loglik_finite_and_increasing() {
        let d = Design::new(&[vec![-1.0], vec![-2.0], vec![1.0], vec![2.0]], vec![false, false, true, true], names(1)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in [1.0, 5.0, 10.0, 20.0, 30.0] {
            let ll = log_likelihood(&[k], &d).unwrap();
            assert!(ll.is_finite() && ll > prev);
            prev = ll;
        }
        assert!(prev > -1e-100);
    }

    #[test]
    fn score_matches_finite_differences() {
        let d = simulated(400, &[0.3, -0.7, 0.4, 1.1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let k: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
            let analytic = score(&k, &d).unwrap();
            let numeric = finite_diff_gradient(|x| log_likelihood(x, &d), &k, None).unwrap();
            let scale = analytic.amax().max(1.0);
            for (a, b) in analytic.iter().zip(&numeric) {
                assert!((a - b).abs() / scale < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn information_matches_score_derivative() {
        // expected information equals minus the Hessian expectation; at the DGP
        // truth with large n the observed Hessian is close to it
        let d = simulated(20_000, &[0.3, -0.7, 0.4], 4);
        let k = [0.3, -0.7, 0.4];
        let info = information(&k, &d).unwrap();
        for j in 0..3 {
            let col = finite_diff_gradient(
                |x| score(x, &d).map(|s| -s[j]),
                &k,
                None,
            )
            .unwrap();
            for (a, b) in col.iter().enumerate() {
                assert!((info[(j, a)] - b).abs() < 0.05 * info[(j, j)], "({j},{a}) {} vs {b}", info[(j, a)]);
            }
        }
    }

    #[test]
    fn intercept_information_closed_form() {
        let d = intercept_only(&[true, false, true, true, false]);
        let info = information(&[0.0], &d).unwrap();
        let want = 5.0 * norm_pdf(0.0).powi(2) / 0.25;
        assert!((info[(0, 0)] - want).abs() < 1e-12);
    }

    #[test]
    fn intercept_only_recovers_quantile() {
        let y: Vec<bool> = (0..10).map(|i| i < 7).collect();
        let fit = fit_design(&intercept_only(&y), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let q = std_normal_quantile(0.7).unwrap();
        assert!((fit.kappa[0] - q).abs() < 1e-4);
        assert!((fit.kappa[0] - 0.524_400_512_708_040_8).abs() < 1e-9);
    }

    #[test]
    fn constant_outcome_is_degenerate() {
        let r = fit_design(&intercept_only(&[true; 6]), &FitOptions::default());
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn rank_deficiency_names_column() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64, 2.0 * i as f64 + 1.0, (i % 3) as f64]).collect();
        let y = (0..20).map(|i| i % 2 == 0).collect();
        let d = Design::new(&rows, y, vec!["const".into(), "a".into(), "b".into(), "c".into()]).unwrap();
        match fit_design(&d, &FitOptions::default()) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "b"),
            other => panic!("{other:?}"),
        }
        let zero: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, 0.0, i as f64]).collect();
        let d = Design::new(&zero, (0..10).map(|i| i % 2 == 0).collect(), names(3)).unwrap();
        assert!(matches!(d.check_rank(), Err(Error::RankDeficient { column }) if column == "x1"));
    }

    #[test]
    fn fit_contract() {
        let truth = [0.2, -0.5, 0.8, 0.3];
        let d = simulated(5_000, &truth, 5);
        let fit = fit_design(&d, &FitOptions::default()).unwrap();
        assert!(fit.converged && fit.score_norm <= 1e-8);
        assert!(fit.loglik_path.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
        assert!(Cholesky::new(&information(&fit.kappa, &d).unwrap()).is_ok());
        for (j, t) in truth.iter().enumerate() {
            assert!((fit.kappa[j] - t).abs() < 4.0 * fit.se(j));
        }
        assert!(!fit.separation_warning);
        // Σ is symmetric
        assert!((&fit.sigma - fit.sigma.transpose()).amax() < 1e-10);
    }

    #[test]
    fn row_order_invariance() {
        let d = simulated(3_000, &[0.1, 0.6, -0.4], 6);
        let fit = fit_design(&d, &FitOptions::default()).unwrap();
        let n = d.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.swap(0, n / 2);
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| d.row(i).to_vec()).collect();
        let y = order.iter().map(|&i| d.y()[i]).collect();
        let shuffled = Design::new(&rows, y, names(3)).unwrap();
        let other = fit_design(&shuffled, &FitOptions::default()).unwrap();
        for (a, b) in fit.kappa.iter().zip(&other.kappa) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn separation_flagged() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![1.0, 0.01 * (i as f64 - 5.5)]).collect();
        let y = (0..12).map(|i| i >= 6).collect();
        let d = Design::new(&rows, y, names(2)).unwrap();
        let fit = fit_design(&d, &FitOptions { max_iter: 60, ..FitOptions::default() }).unwrap();
        assert!(fit.separation_warning);
        assert!(fit.loglik_path.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn bad_options_rejected() {
        let d = intercept_only(&[true, false]);
        for o in [
            FitOptions { tol: 0.0, ..FitOptions::default() },
            FitOptions { ridge: -1.0, ..FitOptions::default() },
            FitOptions { max_iter: 0, ..FitOptions::default() },
        ] {
            assert!(matches!(fit_design(&d, &o), Err(Error::Config(_))));
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let d = simulated(800, &[0.1, 0.6, -0.4], 7);
        let fit = fit_design(&d, &FitOptions::default()).unwrap();
        let mut buf = Vec::new();
        fit.write_json(&mut buf).unwrap();
        let back = ProbitFit::read_json(buf.as_slice()).unwrap();
        assert_eq!(back.kappa, fit.kappa);
        assert_eq!(back.sigma, fit.sigma);
        assert_eq!(back.column_names, fit.column_names);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"schema_version\": 1"));

        let mut file = fit.to_file();
        file.sigma[0][1] += 1.0;
        assert!(matches!(file.into_fit(), Err(Error::Schema(_))));
        let mut file = fit.to_file();
        file.column_names.pop();
        assert!(matches!(file.into_fit(), Err(Error::Schema(_))));
        assert!(ProbitFit::read_json("{".as_bytes()).is_err());
    }

    #[test]
    fn coefficient_table() {
        let d = simulated(2_000, &[0.0, 1.0], 8);
        let fit = fit_design(&d, &FitOptions::default()).unwrap();
        let c = fit.coefficients();
        assert_eq!(c.len(), 2);
        assert!(c[1].p_value < 1e-10);
        assert!(c.iter().all(|c| (c.z - c.estimate / c.se).abs() < 1e-12));
    }
}
