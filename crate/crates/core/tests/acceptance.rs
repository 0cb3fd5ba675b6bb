//! Acceptance criteria AC-1 … AC-11. Each test writes one PASS/FAIL line to
//! stderr (uncaptured) and panics on failure.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use dme_core::accounting::{ddg_epsilon, rdp_to_dp};
use dme_core::bench::{run_experiment, to_csv, BenchMode, ExperimentSpec};
use dme_core::ddg::{self, DdgParams};
use dme_core::dgauss::DiscreteGaussian;
use dme_core::dme::{mse_estimate, run_round, DmeConfig, Mode};
use dme_core::rotate::RotationSpec;
use dme_core::secagg::{AggregationRound, GroupVector};
use dme_core::sketch::{jl_tail_estimate, SketchSpec};
use dme_core::sparse::{lasso_solve, run_sparse_round, GaussianProjection, LassoProblem};
use dme_core::{DataGenerator, Seed};

type Outcome = Result<String, String>;

fn verdict(id: &str, name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("{id:<6} PASS  {name}: {detail}"),
        Err(detail) => format!("{id:<6} FAIL  {name}: {detail}"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(detail) = outcome {
        panic!("{id} {name}: {detail}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[test]
fn ac01_secagg_exactness() {
    let run = || -> Outcome {
        let mut rng = Seed::new(101).rng();
        for set in 0..1000 {
            let modulus: u64 = if set % 2 == 0 { 1 << 8 } else { 1 << 16 };
            let n = rng.random_range(1..=32);
            let m = rng.random_range(1..=256);
            let msgs: Vec<GroupVector> = (0..n)
                .map(|_| {
                    let r = (0..m).map(|_| rng.random_range(0..modulus)).collect();
                    GroupVector::new(r, modulus).unwrap()
                })
                .collect();
            let expect: Vec<u64> = (0..m)
                .map(|j| {
                    let total: u128 = msgs.iter().map(|g| g.residues()[j] as u128).sum();
                    (total % modulus as u128) as u64
                })
                .collect();
            let mut orders: Vec<Vec<usize>> = vec![(0..n).collect(), (0..n).rev().collect()];
            for _ in 0..3 {
                let mut o: Vec<usize> = (0..n).collect();
                o.shuffle(&mut rng);
                orders.push(o);
            }
            for order in &orders {
                let mut round = AggregationRound::new(modulus, m).unwrap();
                for &i in order {
                    round.absorb(&msgs[i]).unwrap();
                }
                check(round.sum().residues() == expect.as_slice(), || {
                    format!("set {set}: aggregate differs from integer sum mod {modulus}")
                })?;
            }
            // Two shards merged.
            let cut = n / 2;
            let mut a = AggregationRound::new(modulus, m).unwrap();
            let mut b = AggregationRound::new(modulus, m).unwrap();
            for (i, g) in msgs.iter().enumerate() {
                if i < cut { a.absorb(g) } else { b.absorb(g) }.unwrap();
            }
            a.merge(&b).unwrap();
            check(a.sum().residues() == expect.as_slice(), || {
                format!("set {set}: sharded sum differs")
            })?;
        }
        Ok("1000 message sets, 5 absorption orders plus a sharded merge each".into())
    };
    verdict("AC-1", "secure aggregation is the exact modular sum", run());
}

/// Σ_k k²·e^{−k²/2σ²} / Σ_k e^{−k²/2σ²}, summed until terms vanish.
fn dgauss_variance_oracle(sigma: f64) -> f64 {
    let (mut num, mut den) = (0.0, 1.0);
    let mut k = 1.0f64;
    loop {
        let w = (-(k * k) / (2.0 * sigma * sigma)).exp();
        if w == 0.0 || k * k * w < 1e-300 {
            break;
        }
        num += 2.0 * k * k * w;
        den += 2.0 * w;
        k += 1.0;
    }
    num / den
}

fn dgauss_pmf_oracle(sigma: f64, x: i64) -> f64 {
    let z: f64 = (-2000i64..=2000)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .sum();
    (-((x * x) as f64) / (2.0 * sigma * sigma)).exp() / z
}

#[test]
fn ac02_discrete_gaussian_fidelity() {
    let run = || -> Outcome {
        let n = 1_000_000usize;
        let mut details = Vec::new();
        for (i, &sigma) in [0.5, 1.0, 3.0, 10.0].iter().enumerate() {
            let g = DiscreteGaussian::new(sigma).unwrap();
            let draws = g.sample_vec(n, &mut Seed::new(202).derive_indexed("sigma", i).rng());
            // Cells: each x with expected count ≥ 5 plus the two tails.
            let mut k = 0i64;
            while dgauss_pmf_oracle(sigma, k + 1) * n as f64 >= 5.0 {
                k += 1;
            }
            let cells = (2 * k + 3) as usize;
            let cell = |x: i64| (x.clamp(-k - 1, k + 1) + k + 1) as usize;
            let mut obs = vec![0f64; cells];
            for &x in &draws {
                obs[cell(x)] += 1.0;
            }
            let mut exp = vec![0f64; cells];
            let mut inner = 0.0;
            for x in -k..=k {
                let p = dgauss_pmf_oracle(sigma, x);
                exp[cell(x)] = p * n as f64;
                inner += p;
            }
            let tail = (1.0 - inner) / 2.0 * n as f64;
            exp[0] = tail;
            exp[cells - 1] = tail;
            let stat: f64 = obs
                .iter()
                .zip(&exp)
                .filter(|(_, e)| **e > 0.0)
                .map(|(o, e)| (o - e).powi(2) / e)
                .sum();
            let dof = exp.iter().filter(|e| **e > 0.0).count() - 1;
            let crit = ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - 1e-3);
            check(stat <= crit, || {
                format!("σ={sigma}: χ² = {stat:.2} > {crit:.2} (dof {dof})")
            })?;
            let xs: Vec<f64> = draws.iter().map(|&x| x as f64).collect();
            let (_, sd) = mean_sd(&xs);
            let target = dgauss_variance_oracle(sigma);
            let rel = sd * sd / target - 1.0;
            check(rel.abs() <= 0.05, || {
                format!("σ={sigma}: variance off by {:.2}%", 100.0 * rel)
            })?;
            details.push(format!("σ={sigma} χ²={stat:.1}/{crit:.1} var {:+.2}%", 100.0 * rel));
        }
        Ok(details.join("; "))
    };
    verdict("AC-2", "discrete Gaussian goodness of fit and variance", run());
}

#[test]
fn ac03_sketch_moments() {
    let run = || -> Outcome {
        let d = 256;
        let t = 4;
        let seeds = 10_000;
        let mut rng = Seed::new(303).derive("data").rng();
        let g1: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let g2: Vec<f64> = g1.iter().map(|v| v + 0.3 * (rng.random::<f64>() - 0.5)).collect();
        let inner = dot(&g1, &g2);
        let mut details = Vec::new();
        for &m in &[32usize, 64, 128] {
            let mut ip = Vec::with_capacity(seeds);
            let mut err = Vec::with_capacity(seeds);
            let mut inv_indep = Vec::with_capacity(seeds);
            let mut inv_dep = Vec::with_capacity(seeds);
            for k in 0..seeds {
                let seed = Seed::new(303).derive(&format!("m{m}")).derive_indexed("sketch", k);
                let s = SketchSpec::new(seed, t, m / t, d).unwrap();
                let (y1, y2) = (s.encode(&g1).unwrap(), s.encode(&g2).unwrap());
                ip.push(dot(&y1, &y2));
                let back = s.unsketch(&y1).unwrap();
                err.push(back.iter().zip(&g1).map(|(a, b)| (a - b).powi(2)).sum());
                // Unit v independent of S, and unit v built from S itself.
                let mut vr = seed.derive("v").rng();
                let v: Vec<f64> = (0..m).map(|_| vr.random::<f64>() - 0.5).collect();
                let nv = norm_sq(&v).sqrt();
                let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
                inv_indep.push(norm_sq(&s.unsketch(&v).unwrap()));
                let ny = norm_sq(&y1).sqrt();
                let w: Vec<f64> = y1.iter().map(|x| x / ny).collect();
                inv_dep.push(norm_sq(&s.unsketch(&w).unwrap()));
            }
            let (mu, sd) = mean_sd(&ip);
            let se = sd / (seeds as f64).sqrt();
            check((mu - inner).abs() <= 5.0 * se, || {
                format!("m={m}: E<Sg1,Sg2> = {mu:.4} vs {inner:.4} (se {se:.4})")
            })?;
            let (e, _) = mean_sd(&err);
            let bound = 1.1 * 2.0 * d as f64 / m as f64 * norm_sq(&g1);
            check(e <= bound, || format!("m={m}: E||S'Sg-g||² = {e:.3} > {bound:.3}"))?;
            let inv_bound = 8.0 * d as f64 / m as f64;
            let (a, _) = mean_sd(&inv_indep);
            let (b, _) = mean_sd(&inv_dep);
            check(a <= inv_bound && b <= inv_bound, || {
                format!("m={m}: E||S'v||² = {a:.3} / {b:.3} > {inv_bound:.3}")
            })?;
            details.push(format!(
                "m={m}: bias {:.2}se, err {:.2}/{:.2}, unsketch {:.2}/{:.2}/{:.1}",
                (mu - inner).abs() / se,
                e,
                bound,
                a,
                b,
                inv_bound
            ));
        }
        Ok(details.join("; "))
    };
    verdict("AC-3", "sketch unbiasedness, variance and unsketch bounds", run());
}

#[test]
fn ac04_sparse_jl_tail() {
    let run = || -> Outcome {
        let p = jl_tail_estimate(1024, 15, 4096, 100_000, 0.1, Seed::new(404)).unwrap();
        check(p <= 0.01, || {
            format!("P(||Sg||² >= 1.1) = {p:.5} > 0.01 (m = 1020, t = 15)")
        })?;
        Ok(format!("P(||Sg||² >= 1.1) = {p:.5}"))
    };
    verdict("AC-4", "sparse JL inflation tail", run());
}

#[test]
fn ac05_ddg_roundtrip_and_unbiasedness() {
    let run = || -> Outcome {
        let (n, d) = (8usize, 64usize);
        // Noise-free roundtrip of on-grid data.
        let rot = RotationSpec::new(Seed::new(505), d).unwrap();
        let exact = DdgParams::noiseless(1.0, rot.dim(), n).unwrap();
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|j| ((i * 7 + j) % 5) as f64 / 8.0 - 0.25)
                    .collect::<Vec<f64>>()
            })
            .map(|x| {
                let s = norm_sq(&x).sqrt();
                x.into_iter().map(|v| v / s.max(1.0)).collect()
            })
            .collect();
        let truth: Vec<f64> = (0..d)
            .map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let mut round = AggregationRound::new(exact.modulus, exact.dim).unwrap();
        for (i, x) in xs.iter().enumerate() {
            let z = ddg::encode(x, &exact, &rot, &mut Seed::new(506).derive_indexed("c", i).rng()).unwrap();
            round.absorb(&z).unwrap();
        }
        let est = ddg::decode_sum(&round.sum(), n, &exact, &rot).unwrap();
        let worst = est.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        check(worst <= 1e-9, || format!("noiseless roundtrip error {worst:e}"))?;

        // Noisy: fresh rotation and client randomness every round.
        let params = ddg::select_params(1.0, n, 1.0, d, 1e-5).unwrap();
        let data = DataGenerator::UniformSphere
            .generate(n, d, 1.0, Seed::new(507))
            .unwrap();
        let mu: Vec<f64> = (0..d)
            .map(|j| data.iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let rounds = 2000;
        let mut per_coord = vec![Vec::with_capacity(rounds); d];
        for r in 0..rounds {
            let seed = Seed::new(508).derive_indexed("round", r);
            let rot = RotationSpec::new(seed.derive("rotation"), d).unwrap();
            let mut agg = AggregationRound::new(params.modulus, params.dim).unwrap();
            for (i, x) in data.iter().enumerate() {
                let z = ddg::encode(x, &params, &rot, &mut seed.derive_indexed("client", i).rng()).unwrap();
                agg.absorb(&z).unwrap();
            }
            let est = ddg::decode_sum(&agg.sum(), n, &params, &rot).unwrap();
            for (col, v) in per_coord.iter_mut().zip(&est) {
                col.push(*v);
            }
        }
        let allowance = 2.0 * params.beta * params.c;
        let mut worst_z = 0.0f64;
        for j in 0..d {
            let (m, sd) = mean_sd(&per_coord[j]);
            let se = sd / (rounds as f64).sqrt();
            check((m - mu[j]).abs() <= 5.0 * se + allowance, || {
                format!("coordinate {j}: mean {m:.5} vs {:.5} (se {se:.5})", mu[j])
            })?;
            worst_z = worst_z.max((m - mu[j]).abs() / se);
        }
        Ok(format!(
            "roundtrip error {worst:.1e}; worst coordinate {worst_z:.2} se over {rounds} rounds"
        ))
    };
    verdict("AC-5", "DDG roundtrip and unbiasedness", run());
}

#[test]
fn ac06_mse_scaling() {
    let run = || -> Outcome {
        let rounds = 2000;
        let gen = DataGenerator::UniformSphere;
        let at = |n: usize, d: usize, m: Option<usize>, tag: usize| {
            let mut cfg = DmeConfig::new(n, d, 1.0, 1.0);
            cfg.m = m;
            mse_estimate(&cfg, gen, rounds, Seed::new(606).derive_indexed("point", tag)).unwrap()
        };
        let a = at(8, 256, None, 0);
        let b = at(16, 256, None, 1);
        let ratio_n = a.mean / b.mean;
        check((2.5..=6.0).contains(&ratio_n), || {
            format!("MSE(n=8)/MSE(n=16) = {ratio_n:.3} ({:.4} / {:.4})", a.mean, b.mean)
        })?;
        let c = at(8, 256, Some(60), 2);
        let e = at(8, 512, Some(60), 3);
        let ratio_d = e.mean / c.mean;
        check((2.0 / 1.5..=2.0 * 1.5).contains(&ratio_d), || {
            format!("MSE(d=512)/MSE(d=256) = {ratio_d:.3} ({:.4} / {:.4})", e.mean, c.mean)
        })?;
        Ok(format!("n-doubling ratio {ratio_n:.3}; d-doubling ratio {ratio_d:.3}"))
    };
    verdict("AC-6", "MSE scales as d/n²", run());
}

#[test]
fn ac07_communication_plateau() {
    let run = || -> Outcome {
        let mut bits = Vec::new();
        for &d in &[1usize << 10, 1 << 12, 1 << 14] {
            let cfg = DmeConfig::new(10, d, 1.0, 1.0);
            let xs = DataGenerator::UniformSphere
                .generate(10, d, 1.0, Seed::new(707))
                .unwrap();
            let (_, report) = run_round(&xs, &cfg, Seed::new(708)).unwrap();
            check(report.bits_per_client == cfg.bits_per_client().unwrap(), || {
                "planned and measured bits differ".into()
            })?;
            bits.push(report.bits_per_client);
        }
        check(bits.iter().all(|&b| b == bits[0]), || {
            format!("bits vary with d: {bits:?}")
        })?;
        let d = 1 << 14;
        let plain = DmeConfig::new(10, d, 1.0, 1.0).with_mode(Mode::PlainDdg);
        let xs = DataGenerator::UniformSphere
            .generate(10, d, 1.0, Seed::new(709))
            .unwrap();
        let (_, report) = run_round(&xs, &plain, Seed::new(710)).unwrap();
        let p = report.bits_per_client;
        let log2m = report.log2_modulus as u64;
        check(p == d as u64 * log2m, || format!("plain bits {p} != d·log2 M"))?;
        check(p >= 10 * bits[0], || format!("plain {p} < 10 × projected {}", bits[0]))?;
        Ok(format!(
            "projected {} bits for every d; plain {p} bits ({:.0}×)",
            bits[0],
            p as f64 / bits[0] as f64
        ))
    };
    verdict("AC-7", "communication plateau", run());
}

/// Written independently of the library: ε + (−ln α − ln δ)/(α − 1) + ln((α − 1)/α).
fn rdp_to_dp_oracle(alpha: f64, eps: f64, delta: f64) -> f64 {
    eps + (-alpha.ln() - delta.ln()) / (alpha - 1.0) + ((alpha - 1.0) / alpha).ln()
}

#[test]
fn ac08_privacy_accounting() {
    let run = || -> Outcome {
        let mut rng = Seed::new(808).rng();
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let alpha = 1.0 + 10f64.powf(rng.random_range(-2.0..2.5));
            let eps = rng.random_range(0.0..20.0);
            let delta = 10f64.powf(rng.random_range(-15.0..-0.01));
            let got = rdp_to_dp(alpha, eps, delta).unwrap();
            let want = rdp_to_dp_oracle(alpha, eps, delta);
            let err = (got - want).abs() / want.abs().max(1.0);
            worst = worst.max(err);
            check(err <= 1e-12, || {
                format!("rdp_to_dp({alpha}, {eps}, {delta}): {got} vs {want}")
            })?;
        }
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let p = DdgParams {
                c: 1.0,
                gamma: 1e-3,
                sigma: 0.05 * k as f64,
                beta: 0.01,
                modulus: 1 << 30,
                dim: 256,
            };
            let e = ddg_epsilon(&p, 50).unwrap();
            check(e <= prev, || format!("ddg_epsilon increased at σ = {}", p.sigma))?;
            prev = e;
        }
        for i in 0..100 {
            let target = 10f64.powf(rng.random_range(-1.0..1.0));
            let n = rng.random_range(1..=1000);
            let d = 1usize << rng.random_range(0..=12);
            let c = rng.random_range(0.1..10.0);
            let p = ddg::select_params(c, n, target, d, 1e-5)
                .map_err(|e| format!("target {i} (ε={target}, n={n}, d={d}): {e}"))?;
            let got = ddg_epsilon(&p, n).unwrap();
            check(got <= target, || format!("achieved {got} > target {target}"))?;
        }
        Ok(format!(
            "conversion max rel. error {worst:.1e}; σ grid monotone; 100 targets met"
        ))
    };
    verdict("AC-8", "privacy accounting", run());
}

/// Least squares on the given columns of S, via nalgebra.
fn support_least_squares(s: &GaussianProjection, support: &[usize], target: &[f64]) -> Vec<f64> {
    let m = s.rows();
    let a = DMatrix::from_fn(m, support.len(), |r, k| s.row(r)[support[k]]);
    let b = DVector::from_column_slice(target);
    let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * b)).unwrap();
    let mut x = vec![0.0; s.cols()];
    for (k, &j) in support.iter().enumerate() {
        x[j] = sol[k];
    }
    x
}

#[test]
fn ac09_lasso_correctness() {
    let run = || -> Outcome {
        let tol = 1e-6;
        let mut worst = 0.0f64;
        for k in 0..100 {
            let seed = Seed::new(909).derive_indexed("problem", k);
            let mut rng = seed.derive("shape").rng();
            let m = rng.random_range(5..60);
            let d = rng.random_range(5..120);
            let s = GaussianProjection::new(seed, m, d).unwrap();
            let target: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let lam_max = s.apply_t(&target).unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs())) / m as f64;
            let lambda = lam_max * rng.random_range(0.01..0.9);
            let sol = lasso_solve(&LassoProblem {
                projection: &s,
                target: &target,
                lambda,
                tolerance: tol,
                max_iters: 200_000,
            })
            .unwrap();
            // Independent residual computation.
            let r: Vec<f64> = s
                .apply(&sol.x)
                .unwrap()
                .iter()
                .zip(&target)
                .map(|(a, b)| a - b)
                .collect();
            let g: Vec<f64> = s.apply_t(&r).unwrap().iter().map(|v| v / m as f64).collect();
            for (j, (&gj, &xj)) in g.iter().zip(&sol.x).enumerate() {
                let viol = if xj != 0.0 {
                    (gj + lambda * xj.signum()).abs()
                } else {
                    (gj.abs() - lambda).max(0.0)
                };
                worst = worst.max(viol);
                check(viol <= 10.0 * tol, || {
                    format!("problem {k} ({m}×{d}): coordinate {j} violates by {viol:e}")
                })?;
            }
        }
        let s = GaussianProjection::new(Seed::new(910), 32, 64).unwrap();
        let mut mu = vec![0.0; 64];
        mu[5] = 0.8;
        mu[40] = -0.5;
        let target = s.apply(&mu).unwrap();
        let sol = lasso_solve(&LassoProblem {
            projection: &s,
            target: &target,
            lambda: 1e-6,
            tolerance: 1e-10,
            max_iters: 200_000,
        })
        .unwrap();
        let oracle = support_least_squares(&s, &[5, 40], &target);
        let rel = sol
            .x
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm_sq(&oracle).sqrt();
        check(rel <= 1e-3, || format!("noiseless s=2 recovery relative error {rel:e}"))?;
        Ok(format!(
            "worst optimality violation {worst:.1e}; s=2 recovery error {rel:.1e}"
        ))
    };
    verdict("AC-9", "LASSO optimality and recovery", run());
}

#[test]
fn ac10_sparse_dme() {
    let run = || -> Outcome {
        let (n, d, eps) = (100usize, 512usize, 5.0);
        let cfg = DmeConfig::new(n, d, 1.0, eps);
        let rounds = 50;
        let errors = |s: usize, tag: &str| -> Vec<(f64, f64)> {
            let xs = DataGenerator::CoordinateSparse { s }
                .generate(n, d, 1.0, Seed::new(1010).derive(tag))
                .unwrap();
            let mu: Vec<f64> = (0..d)
                .map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64)
                .collect();
            (0..rounds)
                .map(|r| {
                    let (est, _) =
                        run_sparse_round(&xs, s, &cfg, Seed::new(1011).derive(tag).derive_indexed("round", r)).unwrap();
                    let err = est.iter().zip(&mu).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                    (err, norm_sq(&mu))
                })
                .collect()
        };
        let mse = |v: &[(f64, f64)]| v.iter().map(|(e, _)| e).sum::<f64>() / v.len() as f64;
        let e5 = errors(5, "s5");
        // Root-mean-square over rounds; μ is fixed so ‖μ‖² is the same in every round.
        let rms_rel = (mse(&e5) / e5[0].1).sqrt();
        let worst = e5.iter().map(|(e, m)| (e / m).sqrt()).fold(0.0, f64::max);
        check(rms_rel <= 0.1, || {
            format!("s=5: relative error {rms_rel:.4} (worst round {worst:.4})")
        })?;
        let m2 = mse(&errors(2, "s2"));
        let m8 = mse(&errors(8, "s8"));
        check(m8 / m2 <= 8.0, || format!("MSE(s=8)/MSE(s=2) = {:.3}", m8 / m2))?;
        Ok(format!(
            "s=5 relative error {rms_rel:.4} (worst round {worst:.4}); MSE(s=8)/MSE(s=2) = {:.3}",
            m8 / m2
        ))
    };
    verdict("AC-10", "sparse mean estimation", run());
}

#[test]
fn ac11_determinism() {
    let run = || -> Outcome {
        let specs = [
            ExperimentSpec {
                rounds: 20,
                seed: 1,
                ..Default::default()
            },
            ExperimentSpec {
                mode: BenchMode::Dense(Mode::PlainDdg),
                rounds: 10,
                seed: 2,
                ..Default::default()
            },
            ExperimentSpec {
                mode: BenchMode::Dense(Mode::CentralGaussian),
                rounds: 10,
                seed: 3,
                ..Default::default()
            },
            ExperimentSpec {
                mode: BenchMode::Dense(Mode::PlainMean),
                rounds: 5,
                seed: 4,
                ..Default::default()
            },
            ExperimentSpec {
                mode: BenchMode::Sparse,
                n: 20,
                d: 64,
                s: Some(2),
                gen: DataGenerator::CoordinateSparse { s: 2 },
                rounds: 3,
                seed: 5,
                ..Default::default()
            },
        ];
        for spec in &specs {
            let a = to_csv(&[run_experiment(spec).unwrap()], true).unwrap();
            let b = to_csv(&[run_experiment(spec).unwrap()], true).unwrap();
            check(a == b, || format!("mode {}: rows differ", spec.mode))?;
        }
        Ok(format!("{} specs reproduced byte for byte", specs.len()))
    };
    verdict("AC-11", "deterministic CSV output", run());
}
