//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero on any unexpected outcome.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nldid::data::{build_estimation_sample, EstimationSample, SampleConfig, N_COVARIATES};
use nldid::decision_model::{default_mu_grid, effect_gap_grid, mc_simulate, policy_effect, DecisionModelSpec, GapSettings, Group};
use nldid::did::{
    bh_adjust, effect_variance, estimate_effects, gradient_at, placebo_run, placebo_windows, subgroup_cdf, tau_at,
    Dominance, Grouping, PlaceboOptions,
};
use nldid::numerics::finite_diff_gradient;
use nldid::parallel::derive_seed;
use nldid::probit::{fit_probit, log_likelihood, score, Design, FitOptions, ProbitFit};
use nldid::synth::{generate_decision_panel, generate_probit_panel, DecisionDgp, DgpSpec, Preset, ProbitTruth};
use nldid::wealth_index::{first_factor_index, AssetMatrix};

/// Criteria that cannot hold as stated; they are still run and reported.
/// Criterion 5: f(0, 0.4) is positive under the stated k, p⁰ and income
/// laws; the sign changes at p¹ ≈ 0.4045.
const EXPECTED_FAILURES: [u32; 1] = [5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

/// Probit sample of exactly `rows` children. Ages 13-24 put every child in
/// one of the two default windows.
fn probit_sample(rows: usize, seed: u64) -> (EstimationSample, ProbitTruth) {
    let mut spec = DgpSpec::new(rows / 3 + 1000, seed);
    spec.law.age_min = 13;
    spec.law.age_max = 24;
    let (panel, truth) = generate_probit_panel(&spec).unwrap();
    let mut sample = build_estimation_sample(&panel, &SampleConfig::default()).unwrap();
    assert!(sample.len() >= rows, "generator produced {} rows", sample.len());
    sample.rows.truncate(rows);
    (sample, truth)
}

fn sample_att(sample: &EstimationSample, truth: &ProbitTruth) -> f64 {
    truth.att_over(sample.treated().map(|r| r.child_id.as_str())).unwrap()
}

fn fitted_att(fit: &ProbitFit, sample: &EstimationSample) -> f64 {
    let treated: Vec<_> = sample.treated().collect();
    treated.iter().map(|r| tau_at(&fit.kappa, &r.x, &r.x).unwrap()).sum::<f64>() / treated.len() as f64
}

fn c1_probit_recovery() -> Outcome {
    let (sample, _) = probit_sample(100_000, 1);
    let truth = DgpSpec::default_kappa();
    let start = Instant::now();
    let fit = single_thread(|| fit_probit(&sample, &FitOptions::default()).unwrap());
    let elapsed = start.elapsed();
    let worst = (0..truth.len())
        .map(|j| ((fit.kappa[j] - truth[j]) / fit.se(j)).abs())
        .fold(0.0, f64::max);
    let pass = fit.converged && worst <= 3.0 && elapsed < Duration::from_secs(60);
    outcome(pass, format!("n={} max |kappa_hat - kappa|/se = {worst:.3}, single-threaded fit {elapsed:.2?}", sample.len()))
}

fn c2_att_recovery() -> Outcome {
    let reps = 200;
    let errors: Vec<f64> = (0..reps)
        .map(|r| {
            let (sample, truth) = probit_sample(100_000, derive_seed(2, r));
            let fit = fit_probit(&sample, &FitOptions::default()).unwrap();
            fitted_att(&fit, &sample) - sample_att(&sample, &truth)
        })
        .collect();
    let first = errors[0].abs();
    let bias = errors.iter().sum::<f64>() / reps as f64;
    let within = errors.iter().filter(|e| e.abs() < 0.005).count();
    let pass = first < 0.005 && bias.abs() < 0.002;
    outcome(pass, format!("|error| {first:.5} at n=100000; mean bias {bias:+.5} over {reps} replications ({within}/{reps} within 0.005)"))
}

fn c3_delta_method() -> Outcome {
    let profiles: [[f64; N_COVARIATES]; 5] = [
        [1.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 3.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 1.0, 2.0, 0.0, 1.0, 0.0],
        [1.0, 1.0, 1.0, 5.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
    ];
    let reps = 500;
    let draws: Vec<Vec<(f64, f64)>> = (0..reps)
        .map(|r| {
            let (sample, _) = probit_sample(20_000, derive_seed(3, r));
            let fit = fit_probit(&sample, &FitOptions::default()).unwrap();
            profiles
                .iter()
                .map(|x| (tau_at(&fit.kappa, x, x).unwrap(), effect_variance(&fit, x, x).unwrap().se))
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for j in 0..profiles.len() {
        let tau: Vec<f64> = draws.iter().map(|d| d[j].0).collect();
        let mean = tau.iter().sum::<f64>() / reps as f64;
        let sd = (tau.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let se = draws.iter().map(|d| d[j].1).sum::<f64>() / reps as f64;
        let rel = (se / sd - 1.0).abs();
        worst = worst.max(rel);
        parts.push(format!("{se:.4}/{sd:.4}"));
    }
    outcome(worst <= 0.15, format!("delta se / MC sd over {reps} refits: {}; worst relative gap {worst:.3}", parts.join(", ")))
}

fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    analytic.iter().zip(numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

fn c4_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = EstimationSample::width();
    let names = EstimationSample::column_names();
    let mut worst_score: f64 = 0.0;
    let mut worst_omega: f64 = 0.0;
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| {
                let g = f64::from(rng.random_bool(0.5));
                let t = f64::from(rng.random_bool(0.5));
                let x: Vec<f64> = (0..N_COVARIATES)
                    .map(|j| match j {
                        0 => 1.0,
                        3 => f64::from(rng.random_range(1..7)),
                        _ => f64::from(rng.random_bool(0.4)),
                    })
                    .collect();
                let mut row = vec![g, t];
                row.extend(x.iter().map(|v| v * g * t));
                row.extend(x);
                row
            })
            .collect();
        let y: Vec<bool> = (0..rows.len()).map(|_| rng.random_bool(0.5)).collect();
        let design = Design::new(&rows, y, names.clone()).unwrap();
        let kappa: Vec<f64> = (0..p).map(|_| rng.random_range(-0.3..0.3)).collect();
        let analytic: Vec<f64> = score(&kappa, &design).unwrap().iter().copied().collect();
        let numeric = finite_diff_gradient(|k| log_likelihood(k, &design), &kappa, None).unwrap();
        worst_score = worst_score.max(rel_err(&analytic, &numeric));

        let x = &rows[0][2 + N_COVARIATES..];
        let x: Vec<f64> = x.to_vec();
        let omega = gradient_at(&kappa, &x, &x).unwrap();
        let numeric = finite_diff_gradient(|k| tau_at(k, &x, &x), &kappa, None).unwrap();
        worst_omega = worst_omega.max(rel_err(&omega, &numeric));
    }
    let pass = worst_score <= 1e-5 && worst_omega <= 1e-5;
    outcome(pass, format!("max relative error: score {worst_score:.2e}, omega {worst_omega:.2e} (100 points each)"))
}

fn c5_sign_pattern() -> Outcome {
    let start = Instant::now();
    let mu = default_mu_grid();
    let mid: Vec<f64> = (0..8).map(|i| 0.4 + 0.05 * i as f64).collect();
    let mut p1 = vec![0.9, 0.3];
    p1.extend(&mid);
    let cells = effect_gap_grid(&mu, &p1, &GapSettings::default()).unwrap();
    let elapsed = start.elapsed();
    let column = |p: f64| cells.iter().filter(move |c| c.p1 == p);
    let all_negative = column(0.9).all(|c| c.f < 0.0);
    let all_positive = column(0.3).all(|c| c.f > 0.0);
    // the smallest grid point decides "negative for small mu"
    let failing_mid: Vec<String> = mid
        .iter()
        .map(|&p| (p, column(p).next().unwrap().f))
        .filter(|(_, f0)| f0.partial_cmp(&0.0) != Some(std::cmp::Ordering::Less))
        .map(|(p, f0)| format!("p1={p:.2} f(0)={f0:+.6}"))
        .collect();
    let pass = all_negative && all_positive && failing_mid.is_empty() && elapsed < Duration::from_secs(1);
    let mid_text = if failing_mid.is_empty() { "all p1 in [0.4, 0.8) negative at mu=0".to_string() } else { format!("not negative at small mu: {}", failing_mid.join(", ")) };
    outcome(pass, format!("p1=0.9 all negative: {all_negative}; p1=0.3 all positive: {all_positive}; {mid_text}; {elapsed:.2?}"))
}

fn c6_closed_form_vs_mc() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for s in 0..50u64 {
        let spec = DecisionModelSpec::parametric(
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
            rng.random_range(-1.0..2.0),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.02..0.5),
        )
        .unwrap();
        for (i, group) in [Group::NonEducated, Group::Educated].into_iter().enumerate() {
            let tau = policy_effect(&spec, group, spec.k).unwrap();
            let mc = mc_simulate(&spec, group, spec.k, n, derive_seed(s, i as u64)).unwrap();
            let z = (mc.tau_hat - tau).abs() / mc.se;
            worst = worst.max(z);
            misses += usize::from(z > 3.0);
        }
    }
    let worked = DecisionModelSpec::parametric(0.5, 0.9, 0.0, 0.1, 0.1).unwrap();
    let tau0 = policy_effect(&worked, Group::NonEducated, 0.1).unwrap();
    let mc = mc_simulate(&worked, Group::NonEducated, 0.1, n, 606).unwrap();
    let worked_ok = (mc.tau_hat - 0.20639).abs() <= 3.0 * mc.se && (tau0 - 0.20639).abs() <= 3.0 * mc.se;
    let pass = misses == 0 && worked_ok;
    outcome(
        pass,
        format!(
            "50 specs x 2 groups at n=1e6: max |z| {worst:.2}, {misses} beyond 3 se; worked tau0 closed form {tau0:.5}, MC {:.5} (se {:.5})",
            mc.tau_hat, mc.se
        ),
    )
}

/// Step-up definition: p_adj(i) = min over j >= rank(i) of min(1, p_(j) m / j).
fn bh_brute(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    // j for each value: how many p-values are at most it
    let steps: Vec<(f64, usize)> = p.iter().map(|&q| (q, p.iter().filter(|&&r| r <= q).count())).collect();
    p.iter()
        .map(|&pi| {
            let rank = p.iter().filter(|&&q| q < pi).count() + 1;
            let mut best: f64 = 1.0;
            for &(q, j) in &steps {
                if q >= pi && j >= rank {
                    best = best.min(q * (m as f64 / j as f64));
                }
            }
            best.min(1.0)
        })
        .collect()
}

fn c7_bh_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=500);
        let p: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.1) { (rng.random_range(0..20) as f64) / 20.0 } else { rng.random::<f64>().powi(3) })
            .collect();
        if bh_adjust(&p).unwrap() != bh_brute(&p) {
            mismatches += 1;
        }
    }
    let worked = bh_adjust(&[0.01, 0.04, 0.03, 0.20]).unwrap();
    let expected = [0.04, 0.05333, 0.05333, 0.20];
    let worked_ok = worked.iter().zip(expected).all(|(a, b)| (a - b).abs() < 5e-6);
    outcome(mismatches == 0 && worked_ok, format!("{mismatches}/1000 vectors differ from the brute-force step-up; worked example {worked:.5?}"))
}

fn c8_mmi() -> Outcome {
    let reps = 100;
    let households = 30_000;
    let mut counts = BTreeMap::new();
    for (preset, want) in [(Preset::Saturation, Dominance::SecondDominates), (Preset::Conditional, Dominance::FirstDominates)] {
        let hits = (0..reps)
            .filter(|&r| {
                let dgp = DecisionDgp::preset(preset, households, derive_seed(8, r)).unwrap();
                let (panel, _) = generate_decision_panel(&dgp).unwrap();
                let sample = build_estimation_sample(&panel, &SampleConfig::default()).unwrap();
                let fit = fit_probit(&sample, &FitOptions::default()).unwrap();
                let effects = estimate_effects(&fit, &sample).unwrap();
                subgroup_cdf(&effects, Grouping::HeadEducation).unwrap().verdict == want
            })
            .count();
        counts.insert(preset.as_str(), hits);
    }
    let pass = counts.values().all(|&h| h >= 95);
    outcome(
        pass,
        format!(
            "{households} households: saturation non-educated dominates {}/{reps}, conditional educated dominates {}/{reps}",
            counts["saturation"], counts["conditional"]
        ),
    )
}

fn c9_placebo_null() -> Outcome {
    let reps = 100;
    let threshold = 40;
    let windows = placebo_windows(threshold, 60).unwrap();
    let mut kappa = DgpSpec::default_kappa();
    kappa[2..2 + N_COVARIATES].iter_mut().for_each(|g| *g = 0.0);
    let significant = (0..reps)
        .filter(|&r| {
            let mut spec = DgpSpec::new(5_000, derive_seed(9, r));
            spec.kappa_true = kappa.clone();
            spec.windows = windows;
            spec.law.age_min = 29;
            spec.law.age_max = 60;
            let (panel, truth) = generate_probit_panel(&spec).unwrap();
            assert_eq!(truth.true_att, 0.0);
            let cols = placebo_run(&panel, &[threshold], &PlaceboOptions::default()).unwrap();
            cols[0].any_significant
        })
        .count();
    outcome(significant <= 10, format!("{significant}/{reps} zero-effect panels with a BH-significant interaction at 5%"))
}

fn oracle_scores(m: &AssetMatrix) -> Vec<f64> {
    let n = m.rows.len();
    let cols: Vec<usize> = (0..m.labels.len()).filter(|&j| m.rows.iter().any(|r| r[j] != m.rows[0][j])).collect();
    let mut z = DMatrix::<f64>::zeros(n, cols.len());
    for (a, &j) in cols.iter().enumerate() {
        let x: Vec<f64> = m.rows.iter().map(|r| f64::from(r[j])).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        for i in 0..n {
            z[(i, a)] = (x[i] - mean) / sd;
        }
    }
    let corr = z.transpose() * &z / (n - 1) as f64;
    let eig = SymmetricEigen::new(corr);
    let top = eig.eigenvalues.imax();
    let s = &z * eig.eigenvectors.column(top);
    let mean = s.mean();
    let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    s.iter().map(|v| (v - mean) / sd).collect()
}

fn c10_wealth_index() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst_mean, mut worst_var, mut worst_diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.random_range(20..400);
        let p = rng.random_range(3..15);
        let wealth: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let cut: Vec<f64> = (0..p).map(|_| rng.random_range(0.1..0.9)).collect();
        let rows: Vec<Vec<u8>> = wealth
            .iter()
            .map(|w| cut.iter().map(|c| u8::from(w + 0.6 * rng.random::<f64>() > c + 0.3)).collect())
            .collect();
        let ids = (0..n).map(|i| format!("h{i}")).collect();
        let labels = (0..p).map(|j| format!("a{j}")).collect();
        let m = AssetMatrix::new(ids, labels, rows).unwrap();
        let idx = first_factor_index(&m).unwrap();
        let nn = idx.scores.len() as f64;
        let mean = idx.scores.iter().sum::<f64>() / nn;
        let var = idx.scores.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nn - 1.0);
        worst_mean = worst_mean.max(mean.abs());
        worst_var = worst_var.max((var - 1.0).abs());
        let oracle = oracle_scores(&m);
        let d = |sign: f64| idx.scores.iter().zip(&oracle).map(|(a, b)| (a - sign * b).abs()).fold(0.0, f64::max);
        worst_diff = worst_diff.max(d(1.0).min(d(-1.0)));
    }
    let pass = worst_mean < 1e-10 && worst_var < 1e-10 && worst_diff < 1e-8;
    outcome(pass, format!("100 matrices: max |mean| {worst_mean:.1e}, max |var-1| {worst_var:.1e}, max score gap to eigen oracle {worst_diff:.1e}"))
}

fn write_assets(path: &Path, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv::Writer::from_path(path).unwrap();
    let mut header = vec!["household_id"];
    header.extend(nldid::wealth_index::ASSET_FIELDS);
    w.write_record(&header).unwrap();
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    for i in 0..n {
        let wealth: f64 = rng.random();
        let lvl = |levels: &[&'static str], r: f64| levels[((wealth + r) / 2.0 * levels.len() as f64) as usize % levels.len()];
        let mut rec = vec![
            format!("h{i:07}"),
            lvl(&["earth", "cement", "wood", "tile"], rng.random()).to_string(),
            lvl(&["none", "public-piped", "piped-outside", "piped-inside"], rng.random()).to_string(),
            lvl(&["none", "latrine", "flush"], rng.random()).to_string(),
        ];
        for _ in 0..7 {
            rec.push(yes_no(wealth + 0.5 * rng.random::<f64>() > 0.7).to_string());
        }
        w.write_record(&rec).unwrap();
    }
    w.flush().unwrap();
}

fn run_cli(args: &[String]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = nldid::cli::run_with(std::iter::once("nldid".to_string()).chain(args.iter().cloned()), &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    (code, out)
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    write_assets(Path::new(&d("assets.csv")), 800, 11);
    run_cli(&["simulate", "--households", "3000", "--seed", "5", "--age-min", "13", "--age-max", "60", "--output", &d("base.csv")].map(String::from));
    run_cli(&["simulate", "--preset", "saturation", "--households", "3000", "--seed", "5", "--output", &d("mmi.csv")].map(String::from));
    run_cli(&["estimate", "--input", &d("base.csv"), "--output", &d("base-fit.json")].map(String::from));

    let commands: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        ("hwi", vec!["hwi", "--input", &d("assets.csv"), "--output", "{out}/hwi.csv"].into_iter().map(String::from).collect(), vec!["hwi.csv"]),
        (
            "estimate",
            ["estimate", "--input", &d("base.csv"), "--output", "{out}/fit.json", "--coefficients", "{out}/coef.csv"].map(String::from).to_vec(),
            vec!["fit.json", "coef.csv"],
        ),
        (
            "effects",
            ["effects", "--input", &d("base.csv"), "--output", "{out}/effects.csv", "--summary", "{out}/summary.json"].map(String::from).to_vec(),
            vec!["effects.csv", "summary.json"],
        ),
        (
            "cdf",
            ["cdf", "--input", &d("mmi.csv"), "--output", "{out}/cdf.json", "--format", "json"].map(String::from).to_vec(),
            vec!["cdf.json"],
        ),
        ("placebo", ["placebo", "--input", &d("base.csv"), "--output", "{out}/placebo.csv"].map(String::from).to_vec(), vec!["placebo.csv"]),
        ("crosssec", ["crosssec", "--input", &d("base.csv"), "--output", "{out}/table3.json", "--format", "json"].map(String::from).to_vec(), vec!["table3.json"]),
        ("mmi-grid", ["mmi-grid", "--output", "{out}/grid.csv"].map(String::from).to_vec(), vec!["grid.csv"]),
        ("mmi-sim", ["mmi-sim", "--preset", "conditional", "--n", "300000", "--seed", "3", "--output", "{out}/sim.json"].map(String::from).to_vec(), vec!["sim.json"]),
        (
            "simulate",
            ["simulate", "--preset", "conditional", "--households", "2000", "--seed", "9", "--output", "{out}/panel.csv"].map(String::from).to_vec(),
            vec!["panel.csv", "panel.csv.truth.json"],
        ),
        ("describe", ["describe", "--input", &d("base.csv"), "--output", "{out}/describe.json"].map(String::from).to_vec(), vec!["describe.json"]),
    ];

    let mut differing = Vec::new();
    for (name, args, files) in &commands {
        let mut runs = Vec::new();
        for (i, threads) in ["1", "8", "8"].iter().enumerate() {
            let out_dir = dir.path().join(format!("{name}-{i}"));
            std::fs::create_dir(&out_dir).unwrap();
            let od = out_dir.to_string_lossy().into_owned();
            let mut argv = vec!["--threads".to_string(), threads.to_string()];
            argv.extend(args.iter().map(|a| a.replace("{out}", &od)));
            let (_, stdout) = run_cli(&argv);
            let stdout = String::from_utf8(stdout).unwrap().replace(&od, "{out}");
            let contents: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out_dir.join(f)).unwrap()).collect();
            runs.push((stdout, contents));
        }
        if runs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(*name);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} subcommands rerun with --threads 1, 8, 8: {}", commands.len(), if differing.is_empty() { "all byte-identical".into() } else { format!("differ: {}", differing.join(", ")) }),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [Criterion; 11] = [
        (1, "probit recovery", c1_probit_recovery),
        (2, "ATT recovery", c2_att_recovery),
        (3, "delta-method validity", c3_delta_method),
        (4, "gradient correctness", c4_gradients),
        (5, "effect-gap sign pattern", c5_sign_pattern),
        (6, "closed form vs Monte Carlo", c6_closed_form_vs_mc),
        (7, "BH oracle", c7_bh_oracle),
        (8, "MMI qualitative reproduction", c8_mmi),
        (9, "placebo null", c9_placebo_null),
        (10, "wealth index", c10_wealth_index),
        (11, "determinism", c11_determinism),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let tag = match (o.pass, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        if o.pass == expected_fail {
            unexpected += 1;
        }
        println!("{tag} [{id}] {name}: {} [{:.1?}]", o.detail, start.elapsed());
    }
    if unexpected > 0 {
        println!("{unexpected} criteria deviated from the expected outcome");
        std::process::exit(1);
    }
}
