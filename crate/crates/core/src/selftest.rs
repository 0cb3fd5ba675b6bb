//! Fast health check over the main invariants, keyed by criterion ID.
//!
//! Each check is a reduced-budget version of the corresponding acceptance
//! test. The slow criteria (AC-4, AC-6, AC-10) are reported as skipped.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::accounting::{ddg_epsilon, rdp_to_dp};
use crate::bench::{run_experiment, to_csv, BenchMode, ExperimentSpec};
use crate::ddg::{self, DdgParams};
use crate::dgauss::DiscreteGaussian;
use crate::dme::{run_round, DmeConfig, Mode};
use crate::rng::Seed;
use crate::rotate::RotationSpec;
use crate::secagg::{AggregationRound, GroupVector};
use crate::sketch::SketchSpec;
use crate::sparse::{lasso_solve, GaussianProjection, LassoProblem};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Fault injection: aggregate with a modulus one less than the
    /// clients used.
    pub corrupt_modulus: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(id: &'static str, name: &'static str, r: Result<String, String>) -> Self {
        match r {
            Ok(detail) => CheckOutcome {
                id,
                name,
                status: Status::Pass,
                detail,
            },
            Err(detail) => CheckOutcome {
                id,
                name,
                status: Status::Fail,
                detail,
            },
        }
    }
}

pub fn run(opts: SelftestOptions) -> Vec<CheckOutcome> {
    let skipped = |id, name| CheckOutcome {
        id,
        name,
        status: Status::Skipped,
        detail: "long-running; covered by the acceptance test suite".into(),
    };
    vec![
        CheckOutcome::from_result("AC-1", "secagg exactness", secagg_exact(opts.corrupt_modulus)),
        CheckOutcome::from_result("AC-2", "discrete gaussian fidelity", dgauss_fidelity()),
        CheckOutcome::from_result("AC-3", "sketch inner products", sketch_unbiased()),
        skipped("AC-4", "sparse JL tail"),
        CheckOutcome::from_result("AC-5", "ddg roundtrip and unbiasedness", ddg_roundtrip()),
        skipped("AC-6", "mse scaling"),
        CheckOutcome::from_result("AC-7", "communication plateau", plateau()),
        CheckOutcome::from_result("AC-8", "privacy accounting", accounting()),
        CheckOutcome::from_result("AC-9", "lasso optimality", lasso()),
        skipped("AC-10", "sparse mean estimation"),
        CheckOutcome::from_result("AC-11", "determinism", determinism()),
    ]
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.status != Status::Fail)
}

pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        let status = match o.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let _ = writeln!(out, "{:<6} {:<4} {:<32} {}", o.id, status, o.name, o.detail);
    }
    out
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn secagg_exact(corrupt: bool) -> Check {
    let mut rng = Seed::new(0x5ec).derive("selftest:secagg").rng();
    let sets = 200;
    for k in 0..sets {
        let modulus: u64 = if k % 2 == 0 { 1 << 8 } else { 1 << 16 };
        let agg_modulus = if corrupt { modulus - 1 } else { modulus };
        let n = rng.random_range(1..=32);
        let m = rng.random_range(1..=64);
        let msgs: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0..modulus)).collect())
            .collect();
        let expect: Vec<u64> = (0..m)
            .map(|j| (msgs.iter().map(|v| v[j] as u128).sum::<u128>() % modulus as u128) as u64)
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..2 {
            let mut round = AggregationRound::new(agg_modulus, m).map_err(|e| e.to_string())?;
            for &i in &order {
                let signed: Vec<i64> = msgs[i].iter().map(|&v| v as i64).collect();
                let g = GroupVector::from_signed(&signed, agg_modulus).map_err(|e| e.to_string())?;
                round.absorb(&g).map_err(|e| e.to_string())?;
            }
            ensure(round.sum().residues() == expect.as_slice(), || {
                format!("set {k}: aggregate differs from the integer sum mod {modulus}")
            })?;
            order.shuffle(&mut rng);
        }
    }
    Ok(format!("{sets} message sets, 2 orders each"))
}

/// Upper quantile of χ²_k via the Wilson–Hilferty approximation.
fn chi2_upper(k: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

fn dgauss_fidelity() -> Check {
    const Z_1E3: f64 = 3.090_232_306;
    let n = 100_000;
    let mut worst = String::new();
    for &sigma in &[0.5, 1.0, 3.0, 10.0] {
        let g = DiscreteGaussian::new(sigma).map_err(|e| e.to_string())?;
        let mut rng = Seed::new(0xd6).derive(&format!("selftest:dgauss:{sigma}")).rng();
        let draws = g.sample_vec(n, &mut rng);
        // Bins: every x with expected count ≥ 5, plus two tails.
        let mut k = 0i64;
        while g.pmf(k + 1).map_err(|e| e.to_string())? * n as f64 >= 5.0 {
            k += 1;
        }
        let bins = (2 * k + 3) as usize;
        let idx = |x: i64| (x.clamp(-k - 1, k + 1) + k + 1) as usize;
        let mut observed = vec![0f64; bins];
        for &x in &draws {
            observed[idx(x)] += 1.0;
        }
        let mut expected = vec![0f64; bins];
        let mut inner = 0.0;
        for x in -k..=k {
            let p = g.pmf(x).map_err(|e| e.to_string())?;
            expected[idx(x)] = p * n as f64;
            inner += p;
        }
        expected[0] = (1.0 - inner) / 2.0 * n as f64;
        expected[bins - 1] = expected[0];
        let stat: f64 = observed
            .iter()
            .zip(&expected)
            .filter(|(_, e)| **e > 0.0)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        let crit = chi2_upper((bins - 1) as f64, Z_1E3);
        ensure(stat <= crit, || {
            format!("sigma {sigma}: chi-square {stat:.1} > {crit:.1}")
        })?;
        let mean = draws.iter().sum::<i64>() as f64 / n as f64;
        let var = draws.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let target = g.variance().map_err(|e| e.to_string())?;
        ensure((var / target - 1.0).abs() <= 0.05, || {
            format!("sigma {sigma}: variance {var:.4} vs {target:.4}")
        })?;
        let _ = write!(worst, "σ={sigma}: χ²={stat:.1}/{crit:.1} ");
    }
    Ok(worst.trim_end().to_string())
}

fn sketch_unbiased() -> Check {
    let (d, m, t) = (64, 32, 4);
    let trials = 2000;
    let mut rng = Seed::new(0x5c).derive("selftest:sketch:data").rng();
    let g1: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
    let g2: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
    let truth: f64 = g1.iter().zip(&g2).map(|(a, b)| a * b).sum();
    let vals: Vec<f64> = (0..trials)
        .map(|k| {
            let s = SketchSpec::new(Seed::new(0x5c).derive_indexed("selftest:sketch", k), t, m / t, d)
                .map_err(|e| e.to_string())?;
            let (a, b) = (
                s.encode(&g1).map_err(|e| e.to_string())?,
                s.encode(&g2).map_err(|e| e.to_string())?,
            );
            Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
        })
        .collect::<Result<_, String>>()?;
    let (mean, se) = crate::dme::mean_and_stderr(&vals);
    ensure((mean - truth).abs() <= 5.0 * se, || {
        format!("mean {mean:.4} vs {truth:.4} (se {se:.4})")
    })?;
    Ok(format!(
        "{trials} sketches, |bias| = {:.2} se",
        (mean - truth).abs() / se
    ))
}

fn ddg_roundtrip() -> Check {
    let e = |e: crate::Error| e.to_string();
    let d = 64;
    let n = 8;
    // Noiseless roundtrip of on-grid inputs.
    let rot = RotationSpec::new(Seed::new(1), d).map_err(e)?;
    let params = DdgParams::noiseless(1.0, rot.dim(), n).map_err(e)?;
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..d).map(|j| if j == i { 0.5 } else { 0.0 }).collect())
        .collect();
    let mut round = AggregationRound::new(params.modulus, params.dim).map_err(e)?;
    for (i, x) in xs.iter().enumerate() {
        let z = ddg::encode(x, &params, &rot, &mut Seed::new(2).derive_indexed("client", i).rng()).map_err(e)?;
        round.absorb(&z).map_err(e)?;
    }
    let est = ddg::decode_sum(&round.sum(), n, &params, &rot).map_err(e)?;
    for (j, &v) in est.iter().enumerate() {
        let want = if j < n { 0.5 / n as f64 } else { 0.0 };
        ensure((v - want).abs() <= 1e-9, || format!("roundtrip coordinate {j}: {v}"))?;
    }
    // Unbiasedness over a reduced number of rounds.
    let cfg = DmeConfig::new(n, d, 1.0, 1.0).with_mode(Mode::PlainDdg);
    let data = crate::DataGenerator::UniformSphere
        .generate(n, d, 1.0, Seed::new(3))
        .map_err(e)?;
    let truth = crate::vector::mean_of(&data);
    let rounds = 300;
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let mut beta = 0.0;
    for r in 0..rounds {
        let (est, rep) = run_round(&data, &cfg, Seed::new(4).derive_indexed("round", r)).map_err(e)?;
        beta = rep.ddg.map(|p| p.beta).unwrap_or(0.0);
        for j in 0..d {
            sum[j] += est[j];
            sq[j] += est[j] * est[j];
        }
    }
    let k = rounds as f64;
    for j in 0..d {
        let mean = sum[j] / k;
        let var = (sq[j] / k - mean * mean) * k / (k - 1.0);
        let se = (var / k).sqrt();
        ensure((mean - truth[j]).abs() <= 5.0 * se + 2.0 * beta, || {
            format!("coordinate {j}: mean {mean:.4} vs {:.4}", truth[j])
        })?;
    }
    Ok(format!("roundtrip exact; {rounds} noisy rounds unbiased"))
}

fn plateau() -> Check {
    let e = |e: crate::Error| e.to_string();
    let bits: Vec<u64> = [1usize << 10, 1 << 12, 1 << 14]
        .iter()
        .map(|&d| DmeConfig::new(10, d, 1.0, 1.0).bits_per_client())
        .collect::<Result<_, _>>()
        .map_err(e)?;
    ensure(bits.iter().all(|&b| b == bits[0]), || {
        format!("projected bits vary with d: {bits:?}")
    })?;
    let plain = DmeConfig::new(10, 1 << 14, 1.0, 1.0)
        .with_mode(Mode::PlainDdg)
        .bits_per_client()
        .map_err(e)?;
    ensure(plain >= 10 * bits[0], || {
        format!("plain {plain} vs projected {}", bits[0])
    })?;
    Ok(format!("projected {} bits, plain {plain} bits", bits[0]))
}

fn accounting() -> Check {
    let e = |e: crate::Error| e.to_string();
    let mut rng = Seed::new(0xacc).derive("selftest:accounting").rng();
    for _ in 0..1000 {
        let alpha = 1.0 + rng.random::<f64>() * 100.0;
        let eps = rng.random::<f64>() * 10.0;
        let delta = 10f64.powf(-rng.random_range(1.0..12.0));
        let oracle = eps + (1.0 / (alpha * delta)).ln() / (alpha - 1.0) + (1.0 - 1.0 / alpha).ln();
        let got = rdp_to_dp(alpha, eps, delta).map_err(e)?;
        ensure((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), || {
            format!("rdp_to_dp({alpha}, {eps}, {delta}) = {got} vs {oracle}")
        })?;
    }
    let mut prev = f64::INFINITY;
    for k in 1..=20 {
        let p = DdgParams {
            c: 1.0,
            gamma: 0.01,
            sigma: 0.1 * k as f64,
            beta: 0.01,
            modulus: 1 << 20,
            dim: 64,
        };
        let eps = ddg_epsilon(&p, 10).map_err(e)?;
        ensure(eps <= prev, || format!("epsilon increased at sigma {}", p.sigma))?;
        prev = eps;
    }
    for _ in 0..20 {
        let target = rng.random_range(0.1..5.0);
        let n = rng.random_range(2..200);
        let p = ddg::select_params(1.0, n, target, 64, 1e-5).map_err(e)?;
        let got = ddg_epsilon(&p, n).map_err(e)?;
        ensure(got <= target, || format!("select_params gave {got} > {target}"))?;
    }
    Ok("conversion, monotonicity and parameter selection".into())
}

fn lasso() -> Check {
    let e = |e: crate::Error| e.to_string();
    let tol = 1e-7;
    for k in 0..10 {
        let s = GaussianProjection::new(Seed::new(0x1a).derive_indexed("selftest:lasso", k), 20, 40).map_err(e)?;
        let mut rng = Seed::new(0x1b).derive_indexed("selftest:target", k).rng();
        let target: Vec<f64> = (0..20).map(|_| rng.random::<f64>() - 0.5).collect();
        let sol = lasso_solve(&LassoProblem {
            projection: &s,
            target: &target,
            lambda: 0.05,
            tolerance: tol,
            max_iters: 50_000,
        })
        .map_err(e)?;
        ensure(sol.residual <= 10.0 * tol, || {
            format!("problem {k}: residual {:.2e}", sol.residual)
        })?;
    }
    Ok("10 random problems within 10x tolerance".into())
}

fn determinism() -> Check {
    let spec = ExperimentSpec {
        mode: BenchMode::Dense(Mode::ProjectedDdg),
        n: 6,
        d: 48,
        rounds: 5,
        seed: 11,
        ..Default::default()
    };
    let a = run_experiment(&spec).map_err(|e| e.to_string())?;
    let b = run_experiment(&spec).map_err(|e| e.to_string())?;
    let (a, b) = (
        to_csv(&[a], true).map_err(|e| e.to_string())?,
        to_csv(&[b], true).map_err(|e| e.to_string())?,
    );
    ensure(a == b, || "two runs of one spec differ".into())?;
    Ok("identical CSV across runs".into())
}
