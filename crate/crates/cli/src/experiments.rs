//! Packaged experiments: covariance-preservation sweeps, feature-detection
//! benchmarks, copula cumulant signatures and factor-quality comparisons.
//!
//! Every experiment takes `--runs` and `--seed`; run `r` derives its random
//! streams from stream ids `r * 64 + slot`, so reports are reproducible for
//! a fixed flag set and independent of `--jobs`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use nongauss::copulas::{self, ArchFamily, CopulaSpec};
use nongauss::cormat::{cormatgen, CorMethod};
use nongauss::cumulants::{cumulant_tensors, h_norm};
use nongauss::dimreduce::{hosvd_factor, nongauss_weight, select_features, SelectionTarget};
use nongauss::randsource::{mvnormal_sample, RngStream};
use nongauss::special::norm_quantile;
use nongauss::subsetinject as inject;
use nongauss::{stats, SampleMatrix};

#[derive(Subcommand)]
pub enum ExperimentCmd {
    /// Covariance change of subset injection across copulas and a naive
    /// resampling baseline.
    DeltaSweep(DeltaSweepArgs),
    /// Detection of an injected subset by iterative feature selection,
    /// compared with MEV and the random-guess level.
    Detection(DetectionArgs),
    /// Cumulant norms and representative elements of a copula with
    /// standard normal marginals.
    CopulaCumulants(CopulaCumulantsArgs),
    /// Weight of injected marginals in the least-significant HOSVD factor
    /// column, against the covariance-SVD baseline.
    HosvdW(HosvdWArgs),
}

pub fn run(cmd: ExperimentCmd) -> Result<()> {
    match cmd {
        ExperimentCmd::DeltaSweep(args) => delta_sweep(args),
        ExperimentCmd::Detection(args) => detection(args),
        ExperimentCmd::CopulaCumulants(args) => copula_cumulants(args),
        ExperimentCmd::HosvdW(args) => hosvd_w(args),
    }
}

fn random_subset(n: usize, k: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (rng.uniform_open() * (n - i) as f64) as usize;
        pool.swap(i, j.min(n - 1));
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

fn parse_matrix_method(name: &str, alpha: f64, rho: f64) -> Result<CorMethod> {
    Ok(match name {
        "random" => CorMethod::Random,
        "constant-noised" => CorMethod::ConstantNoised { alpha, eps: None },
        "toeplitz" => CorMethod::Toeplitz { rho },
        other => bail!("unknown matrix method '{other}'"),
    })
}

// theta matching a Spearman target, clamped into the attainable range
fn theta_for_rho_clamped(family: ArchFamily, rho: f64) -> Result<(f64, bool)> {
    match copulas::theta_from_rho(family, rho) {
        Ok(theta) => Ok((theta, false)),
        Err(_) => {
            let boundary = match family {
                ArchFamily::Amh => 1.0 - 1e-9,
                ArchFamily::Gumbel | ArchFamily::Clayton => 64.0,
                ArchFamily::Frank => 256.0,
            };
            let max_rho = copulas::rho_from_theta(family, boundary)?;
            let clamped = rho.clamp(-max_rho.abs(), max_rho.abs() - 1e-6);
            Ok((copulas::theta_from_rho(family, clamped)?, true))
        }
    }
}

#[derive(Args)]
pub struct DeltaSweepArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    t: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// random | constant-noised | toeplitz
    #[arg(long, default_value = "random")]
    matrix: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    rho_toeplitz: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct DeltaSweepReport {
    command: String,
    version: String,
    seed: u64,
    runs: usize,
    n: usize,
    k: usize,
    t: usize,
    matrix: String,
    rows: Vec<DeltaRow>,
}

#[derive(Serialize)]
struct DeltaRow {
    transform: String,
    deltas: Vec<f64>,
    median: f64,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn delta_sweep(args: DeltaSweepArgs) -> Result<()> {
    let method = parse_matrix_method(&args.matrix, args.alpha, args.rho_toeplitz)?;
    let transforms = [
        "tstudent-nu5",
        "tstudent-nu10",
        "tstudent-nu20",
        "frechet",
        "gumbel",
        "clayton",
        "frank",
        "amh",
        "naive",
    ];
    let per_run: Vec<Result<Vec<f64>>> = (0..args.runs)
        .into_par_iter()
        .map(|run| -> Result<Vec<f64>> {
            let mut rng = RngStream::new(args.seed, run as u64 * 64);
            let r = cormatgen(method, args.n, &mut rng)?;
            let x = mvnormal_sample(args.t, r.as_matrix(), &mut rng)?;
            let subset = random_subset(args.n, args.k, &mut rng);
            let target_rho = {
                let cols: Vec<Vec<f64>> = subset
                    .iter()
                    .map(|&c| x.column(c).iter().cloned().collect())
                    .collect();
                let mut acc = 0.0;
                let mut cnt = 0.0;
                for a in 0..cols.len() {
                    for b in a + 1..cols.len() {
                        acc += stats::spearman(&cols[a], &cols[b])?;
                        cnt += 1.0;
                    }
                }
                acc / cnt
            };
            let mut deltas = Vec::with_capacity(transforms.len());
            for (slot, name) in transforms.iter().enumerate() {
                let mut rng_t = RngStream::new(args.seed, run as u64 * 64 + 1 + slot as u64);
                let xp = match *name {
                    "tstudent-nu5" => inject::inject_tstudent(&x, &subset, 5, &mut rng_t)?,
                    "tstudent-nu10" => inject::inject_tstudent(&x, &subset, 10, &mut rng_t)?,
                    "tstudent-nu20" => inject::inject_tstudent(&x, &subset, 20, &mut rng_t)?,
                    "frechet" => inject::inject_frechet(&x, &subset, &mut rng_t)?,
                    "naive" => inject::naive_resample_subset(&x, &subset, &mut rng_t)?,
                    family_name => {
                        let family = match family_name {
                            "gumbel" => ArchFamily::Gumbel,
                            "clayton" => ArchFamily::Clayton,
                            "frank" => ArchFamily::Frank,
                            "amh" => ArchFamily::Amh,
                            _ => unreachable!(),
                        };
                        let (theta, _) = theta_for_rho_clamped(family, target_rho)?;
                        inject::inject_archimedean(
                            &x,
                            &subset,
                            family,
                            &inject::ArchInjection::Flat { theta },
                            &mut rng_t,
                        )?
                    }
                };
                deltas.push(inject::cov_change_delta(&x, &xp)?);
            }
            Ok(deltas)
        })
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); transforms.len()];
    for run in per_run {
        for (i, d) in run?.into_iter().enumerate() {
            columns[i].push(d);
        }
    }
    let rows: Vec<DeltaRow> = transforms
        .iter()
        .zip(columns)
        .map(|(name, deltas)| DeltaRow {
            transform: name.to_string(),
            median: median(&deltas),
            deltas,
        })
        .collect();
    let report = DeltaSweepReport {
        command: "experiment delta-sweep".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        runs: args.runs,
        n: args.n,
        k: args.k,
        t: args.t,
        matrix: args.matrix,
        rows,
    };
    std::fs::write(&args.output, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Args)]
pub struct DetectionArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    t: usize,
    /// tstudent | frechet | gumbel | clayton | frank | amh
    #[arg(long, default_value = "tstudent")]
    copula: String,
    #[arg(long, default_value_t = 5)]
    nu: u32,
    /// Selection target to benchmark (hdet4, hnorm4, hdet3, ...).
    #[arg(long, default_value = "hdet4")]
    target: String,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct DetectionReport {
    command: String,
    version: String,
    seed: u64,
    runs: usize,
    n: usize,
    k: usize,
    t: usize,
    copula: String,
    nu: u32,
    target: String,
    target_correct: Vec<usize>,
    mev_correct: Vec<usize>,
    target_histogram: Vec<usize>,
    mev_histogram: Vec<usize>,
    target_mean_correct: f64,
    mev_mean_correct: f64,
    random_guess_mean: f64,
    target_frac_at_least_k_minus_1: f64,
}

fn detection(args: DetectionArgs) -> Result<()> {
    let target = match args.target.as_str() {
        "mev" => SelectionTarget::Mev,
        "hnorm3" => SelectionTarget::HNorm { d: 3 },
        "hnorm4" => SelectionTarget::HNorm { d: 4 },
        "hdet3" => SelectionTarget::HDet { d: 3 },
        "hdet4" => SelectionTarget::HDet { d: 4 },
        other => bail!("unsupported detection target '{other}'"),
    };
    let dmax = match target {
        SelectionTarget::Mev => 2,
        SelectionTarget::HNorm { d } | SelectionTarget::HDet { d } => d,
    };
    let per_run: Vec<Result<(usize, usize)>> = (0..args.runs)
        .into_par_iter()
        .map(|run| -> Result<(usize, usize)> {
            let mut rng = RngStream::new(args.seed, run as u64 * 64);
            let r = cormatgen(CorMethod::Random, args.n, &mut rng)?;
            let x = mvnormal_sample(args.t, r.as_matrix(), &mut rng)?;
            let subset = random_subset(args.n, args.k, &mut rng);
            let mut rng_i = RngStream::new(args.seed, run as u64 * 64 + 1);
            let xp = match args.copula.as_str() {
                "tstudent" => inject::inject_tstudent(&x, &subset, args.nu, &mut rng_i)?,
                "frechet" => inject::inject_frechet(&x, &subset, &mut rng_i)?,
                name => {
                    let family = match name {
                        "gumbel" => ArchFamily::Gumbel,
                        "clayton" => ArchFamily::Clayton,
                        "frank" => ArchFamily::Frank,
                        "amh" => ArchFamily::Amh,
                        other => bail!("unknown copula '{other}'"),
                    };
                    let cols: Vec<Vec<f64>> = subset
                        .iter()
                        .map(|&c| x.column(c).iter().cloned().collect())
                        .collect();
                    let mut acc = 0.0;
                    let mut cnt = 0.0;
                    for a in 0..cols.len() {
                        for b in a + 1..cols.len() {
                            acc += stats::spearman(&cols[a], &cols[b])?;
                            cnt += 1.0;
                        }
                    }
                    let (theta, _) = theta_for_rho_clamped(family, acc / cnt)?;
                    inject::inject_archimedean(
                        &x,
                        &subset,
                        family,
                        &inject::ArchInjection::Flat { theta },
                        &mut rng_i,
                    )?
                }
            };
            let set = cumulant_tensors(&xp, dmax)?;
            let picked = select_features(&set, target, args.k)?;
            let correct = picked
                .retained
                .iter()
                .filter(|c| subset.contains(c))
                .count();
            let mev = select_features(&set, SelectionTarget::Mev, args.k)?;
            let mev_correct = mev.retained.iter().filter(|c| subset.contains(c)).count();
            Ok((correct, mev_correct))
        })
        .collect();
    let mut target_correct = Vec::with_capacity(args.runs);
    let mut mev_correct = Vec::with_capacity(args.runs);
    for r in per_run {
        let (a, b) = r?;
        target_correct.push(a);
        mev_correct.push(b);
    }
    let histogram = |counts: &[usize]| -> Vec<usize> {
        let mut h = vec![0usize; args.k + 1];
        for &c in counts {
            h[c] += 1;
        }
        h
    };
    let mean = |counts: &[usize]| counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let report = DetectionReport {
        command: "experiment detection".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        runs: args.runs,
        n: args.n,
        k: args.k,
        t: args.t,
        copula: args.copula.clone(),
        nu: args.nu,
        target: args.target.clone(),
        target_histogram: histogram(&target_correct),
        mev_histogram: histogram(&mev_correct),
        target_mean_correct: mean(&target_correct),
        mev_mean_correct: mean(&mev_correct),
        random_guess_mean: (args.k * args.k) as f64 / args.n as f64,
        target_frac_at_least_k_minus_1: target_correct
            .iter()
            .filter(|&&c| c + 1 >= args.k)
            .count() as f64
            / args.runs as f64,
        target_correct,
        mev_correct,
    };
    std::fs::write(&args.output, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Args)]
pub struct CopulaCumulantsArgs {
    /// frechet1 | gumbel | clayton | frank | amh | tstudent | gaussian
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    t: usize,
    #[arg(long, default_value_t = 4)]
    dmax: usize,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct CopulaCumulantsReport {
    command: String,
    version: String,
    seed: u64,
    family: String,
    n: usize,
    t: usize,
    dmax: usize,
    norms: Vec<NormRow>,
    third_order_elements: Option<ThirdElements>,
    fourth_order_elements: Option<FourthElements>,
}

#[derive(Serialize)]
struct NormRow {
    order: usize,
    frobenius_norm: f64,
    h_norm: Option<f64>,
}

#[derive(Serialize)]
struct ThirdElements {
    c112: f64,
    c123: f64,
}

#[derive(Serialize)]
struct FourthElements {
    c1112: f64,
    c1122: f64,
    c1123: f64,
    c1234: f64,
}

fn copula_cumulants(args: CopulaCumulantsArgs) -> Result<()> {
    let spec = match args.family.as_str() {
        "frechet1" => CopulaSpec::Frechet1 {
            alpha: args
                .alpha
                .or(args.rho)
                .context("frechet1 needs --alpha or --rho")?,
            n: args.n,
        },
        "gaussian" | "tstudent" => {
            let r = args
                .r
                .or_else(|| args.tau.map(copulas::elliptical_r_from_tau))
                .context("elliptical families need --r or --tau")?;
            let m = nalgebra::DMatrix::from_fn(args.n, args.n, |i, j| if i == j { 1.0 } else { r });
            let cm = nongauss::cormat::CorrMatrix::new(m)?;
            if args.family == "gaussian" {
                CopulaSpec::Gaussian { r: cm }
            } else {
                CopulaSpec::TStudent {
                    r: cm,
                    nu: args.nu.context("tstudent needs --nu")?,
                }
            }
        }
        name => {
            let family = match name {
                "gumbel" => ArchFamily::Gumbel,
                "clayton" => ArchFamily::Clayton,
                "frank" => ArchFamily::Frank,
                "amh" => ArchFamily::Amh,
                other => bail!("unknown family '{other}'"),
            };
            let theta = if let Some(theta) = args.theta {
                theta
            } else if let Some(tau) = args.tau {
                copulas::theta_from_tau(family, tau)?
            } else if let Some(rho) = args.rho {
                copulas::theta_from_rho(family, rho)?
            } else {
                bail!("Archimedean families need --theta, --tau or --rho")
            };
            CopulaSpec::Archimedean {
                family,
                theta,
                n: args.n,
            }
        }
    };
    let mut rng = RngStream::new(args.seed, 0);
    let mut x: SampleMatrix = copulas::sample_copula(&spec, args.t, &mut rng)?;
    for v in x.iter_mut() {
        *v = norm_quantile(v.clamp(1e-15, 1.0 - 1e-15))?;
    }
    let set = cumulant_tensors(&x, args.dmax)?;
    let c2 = set.order(2).unwrap();
    let norms: Vec<NormRow> = (1..=args.dmax)
        .map(|d| {
            let tensor = set.order(d).unwrap();
            NormRow {
                order: d,
                frobenius_norm: tensor.frobenius_norm(),
                h_norm: if d >= 3 {
                    h_norm(c2, tensor).ok()
                } else {
                    None
                },
            }
        })
        .collect();
    let third = set.order(3).map(|c3| ThirdElements {
        c112: c3.get(&[0, 0, 1]).unwrap(),
        c123: c3.get(&[0, 1, 2]).unwrap(),
    });
    let fourth = set.order(4).map(|c4| FourthElements {
        c1112: c4.get(&[0, 0, 0, 1]).unwrap(),
        c1122: c4.get(&[0, 0, 1, 1]).unwrap(),
        c1123: c4.get(&[0, 0, 1, 2]).unwrap(),
        c1234: c4.get(&[0, 1, 2, 3]).unwrap(),
    });
    let report = CopulaCumulantsReport {
        command: "experiment copula-cumulants".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        family: args.family.clone(),
        n: args.n,
        t: args.t,
        dmax: args.dmax,
        norms,
        third_order_elements: third,
        fourth_order_elements: fourth,
    };
    std::fs::write(&args.output, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Args)]
pub struct HosvdWArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    t: usize,
    /// gumbel | clayton | frank | amh | tstudent
    #[arg(long, default_value = "gumbel")]
    copula: String,
    #[arg(long, default_value_t = 0.6)]
    tau: f64,
    #[arg(long, default_value_t = 5)]
    nu: u32,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct HosvdWReport {
    command: String,
    version: String,
    seed: u64,
    runs: usize,
    n: usize,
    t: usize,
    copula: String,
    tau: f64,
    injected_columns: Vec<usize>,
    w_svd: Vec<f64>,
    w_hosvd3: Vec<f64>,
    w_hosvd4: Vec<f64>,
    median_w_svd: f64,
    median_w_hosvd3: f64,
    median_w_hosvd4: f64,
}

fn hosvd_w(args: HosvdWArgs) -> Result<()> {
    let subset = vec![0usize, 1];
    let per_run: Vec<Result<(f64, f64, f64)>> = (0..args.runs)
        .into_par_iter()
        .map(|run| -> Result<(f64, f64, f64)> {
            let mut rng = RngStream::new(args.seed, run as u64 * 64);
            let r = cormatgen(CorMethod::Random, args.n, &mut rng)?;
            let x = mvnormal_sample(args.t, r.as_matrix(), &mut rng)?;
            let mut rng_i = RngStream::new(args.seed, run as u64 * 64 + 1);
            let xp = match args.copula.as_str() {
                "tstudent" => inject::inject_tstudent(&x, &subset, args.nu, &mut rng_i)?,
                name => {
                    let family = match name {
                        "gumbel" => ArchFamily::Gumbel,
                        "clayton" => ArchFamily::Clayton,
                        "frank" => ArchFamily::Frank,
                        "amh" => ArchFamily::Amh,
                        other => bail!("unknown copula '{other}'"),
                    };
                    let theta = copulas::theta_from_tau(family, args.tau)?;
                    inject::inject_archimedean(
                        &x,
                        &subset,
                        family,
                        &inject::ArchInjection::Flat { theta },
                        &mut rng_i,
                    )?
                }
            };
            let set = cumulant_tensors(&xp, 4)?;
            let w_of = |d: usize| -> Result<f64> {
                let factor = hosvd_factor(set.order(d).unwrap())?;
                Ok(nongauss_weight(&factor.factor, subset.len())?)
            };
            Ok((w_of(2)?, w_of(3)?, w_of(4)?))
        })
        .collect();
    let mut w_svd = Vec::new();
    let mut w3 = Vec::new();
    let mut w4 = Vec::new();
    for r in per_run {
        let (a, b, c) = r?;
        w_svd.push(a);
        w3.push(b);
        w4.push(c);
    }
    let report = HosvdWReport {
        command: "experiment hosvd-w".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        runs: args.runs,
        n: args.n,
        t: args.t,
        copula: args.copula.clone(),
        tau: args.tau,
        injected_columns: subset.iter().map(|c| c + 1).collect(),
        median_w_svd: median(&w_svd),
        median_w_hosvd3: median(&w3),
        median_w_hosvd4: median(&w4),
        w_svd,
        w_hosvd3: w3,
        w_hosvd4: w4,
    };
    std::fs::write(&args.output, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}
