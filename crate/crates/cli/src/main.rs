//! Command-line surface: data generation, injection, cumulant analysis,
//! feature selection/extraction, DFA and the packaged experiments.
//!
//! CSV convention: comma separator, decimal point, no header row unless
//! `--header` is given; rows are realisations, columns are marginals.
//! Column indices on the command line are 1-based.

mod experiments;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;

use nongauss::copulas::{self, ArchFamily, CopulaSpec, TailSpec};
use nongauss::cormat::{cormatgen, CorMethod, CorrMatrix};
use nongauss::cumulants::{cumulant_tensors, h_norm};
use nongauss::dimreduce::{als_factor, hosvd_factor, select_features, SelectionTarget};
use nongauss::randsource::RngStream;
use nongauss::special::norm_quantile;
use nongauss::subsetinject as inject;
use nongauss::{io, stats, SampleMatrix};

#[derive(Parser)]
#[command(
    name = "nongauss",
    version,
    about = "Non-Gaussian multivariate data: copula sampling, cumulant tensors, feature selection, DFA"
)]
struct Cli {
    /// Treat the first CSV row as a header (and write one on output).
    #[arg(long, global = true)]
    header: bool,

    /// Worker threads (default: the NONGAUSS_JOBS variable, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random correlation matrix as CSV.
    GenCormat(GenCormatArgs),
    /// Sample a copula into CSV (uniform or standard-normal marginals).
    GenCopula(GenCopulaArgs),
    /// Re-model a subset of marginals with a non-Gaussian copula.
    Inject(InjectArgs),
    /// Cumulant tensor norms of a data matrix.
    Cumulants(CumulantsArgs),
    /// Iterative cumulant-based feature selection.
    Select(SelectArgs),
    /// Factor extraction: covariance SVD, HOSVD of a cumulant, or ALS.
    Extract(ExtractArgs),
    /// Multifractal DFA Hurst exponents of one series column.
    Dfa(DfaArgs),
    /// Tail-dependence coefficients of a copula family.
    TailDep(TailDepArgs),
    /// Packaged experiments with JSON reports.
    #[command(subcommand)]
    Experiment(experiments::ExperimentCmd),
}

#[derive(Args)]
struct GenCormatArgs {
    /// constant | constant-noised | random | toeplitz
    #[arg(long)]
    method: String,
    #[arg(long)]
    n: usize,
    /// Off-diagonal level for the constant methods.
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise amplitude for constant-noised (default (1-alpha)/2).
    #[arg(long)]
    eps: Option<f64>,
    /// Decay for the toeplitz method.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct GenCopulaArgs {
    /// gaussian | tstudent | frechet1 | frechet2 | gumbel | clayton | frank | amh
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Copula parameter (Archimedean theta; mutually exclusive with
    /// --tau/--rho).
    #[arg(long, conflicts_with_all = ["tau", "rho"])]
    theta: Option<f64>,
    /// Target Kendall tau (converted to the family parameter).
    #[arg(long, conflicts_with = "rho")]
    tau: Option<f64>,
    /// Target Spearman rho (converted to the family parameter).
    #[arg(long)]
    rho: Option<f64>,
    /// Degrees of freedom for the t-Student copula.
    #[arg(long)]
    nu: Option<u32>,
    /// Constant off-diagonal correlation for elliptical copulas.
    #[arg(long)]
    r: Option<f64>,
    /// Correlation matrix CSV for elliptical copulas (overrides --r).
    #[arg(long)]
    cormat: Option<PathBuf>,
    /// Maximal-copula fraction for the Fréchet families.
    #[arg(long)]
    alpha: Option<f64>,
    /// Minimal-copula fraction for the bivariate Fréchet family.
    #[arg(long)]
    beta: Option<f64>,
    /// Children sizes for nested Archimedean sampling, e.g. 2,3.
    #[arg(long, value_delimiter = ',')]
    child_sizes: Option<Vec<usize>>,
    /// Children parameters matching --child-sizes.
    #[arg(long, value_delimiter = ',')]
    child_thetas: Option<Vec<f64>>,
    /// Parent parameter for nested sampling.
    #[arg(long)]
    theta0: Option<f64>,
    /// Child Kendall taus (instead of --child-thetas).
    #[arg(long, value_delimiter = ',')]
    child_taus: Option<Vec<f64>>,
    /// Parent Kendall tau (instead of --theta0).
    #[arg(long)]
    tau0: Option<f64>,
    /// Map the sample through the normal quantile (standard-normal
    /// marginals instead of uniform).
    #[arg(long)]
    normal_marginals: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long)]
    input: PathBuf,
    /// 1-based columns to re-model, e.g. 1,2,5.
    #[arg(long, value_delimiter = ',')]
    subset: Vec<usize>,
    /// tstudent | frechet | gumbel | clayton | frank | amh
    #[arg(long)]
    copula: String,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long, conflicts_with_all = ["tau", "rho"])]
    theta: Option<f64>,
    #[arg(long, conflicts_with = "rho")]
    tau: Option<f64>,
    /// Target Spearman rho (default: the subset's mean pairwise rho).
    #[arg(long)]
    rho: Option<f64>,
    /// Derive a nested structure from the subset correlations (Gumbel and
    /// Clayton only).
    #[arg(long)]
    nested: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// JSON report: covariance change, per-column KS, achieved rho.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CumulantsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 4)]
    dmax: usize,
    /// CSV table (order, norm, h_norm).
    #[arg(long)]
    output: PathBuf,
    /// Optional JSON copy of the table.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Directory for dense tensor dumps (one file per order).
    #[arg(long)]
    dump_dense: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    /// mev | hnorm3..hnorm6 | hdet3..hdet6
    #[arg(long)]
    target: String,
    /// Number of marginals to retain.
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    /// svd | hosvd3..hosvd6 | als2..als6
    #[arg(long)]
    method: String,
    /// Number of factor columns to keep.
    #[arg(long)]
    nprime: usize,
    /// Output CSV for the n x n' factor.
    #[arg(long)]
    factor: PathBuf,
    /// Output CSV for the projected data (t x n').
    #[arg(long)]
    projected: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct DfaArgs {
    #[arg(long)]
    input: PathBuf,
    /// 1-based column holding the series.
    #[arg(long, default_value_t = 1)]
    column: usize,
    /// Multifractal orders, e.g. 0.5,1,2.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    q: Vec<f64>,
    /// Largest segment count.
    #[arg(long, default_value_t = 16)]
    segments: usize,
    /// Output CSV of (q, H(q)) rows.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct TailDepArgs {
    /// gaussian | tstudent | frechet1 | frechet2 | gumbel | clayton | frank | amh
    #[arg(long)]
    family: String,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .or_else(|| std::env::var("NONGAUSS_JOBS").ok().and_then(|v| v.parse().ok()));
    if let Some(jobs) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("rayon pool")?;
    }
    match cli.command {
        Command::GenCormat(args) => gen_cormat(args),
        Command::GenCopula(args) => gen_copula(args, cli.header),
        Command::Inject(args) => run_inject(args, cli.header),
        Command::Cumulants(args) => run_cumulants(args, cli.header),
        Command::Select(args) => run_select(args, cli.header),
        Command::Extract(args) => run_extract(args, cli.header),
        Command::Dfa(args) => run_dfa(args, cli.header),
        Command::TailDep(args) => run_taildep(args),
        Command::Experiment(cmd) => experiments::run(cmd),
    }
}

fn gen_cormat(args: GenCormatArgs) -> Result<()> {
    let method = match args.method.as_str() {
        "constant" => CorMethod::Constant {
            alpha: args.alpha.context("--alpha required for constant")?,
        },
        "constant-noised" => CorMethod::ConstantNoised {
            alpha: args.alpha.context("--alpha required for constant-noised")?,
            eps: args.eps,
        },
        "random" => CorMethod::Random,
        "toeplitz" => CorMethod::Toeplitz {
            rho: args.rho.context("--rho required for toeplitz")?,
        },
        other => bail!("unknown correlation method '{other}'"),
    };
    let mut rng = RngStream::new(args.seed, 0);
    let r = cormatgen(method, args.n, &mut rng)?;
    io::write_matrix_csv(&args.output, r.as_matrix())?;
    Ok(())
}

fn parse_arch_family(name: &str) -> Result<ArchFamily> {
    Ok(match name {
        "gumbel" => ArchFamily::Gumbel,
        "clayton" => ArchFamily::Clayton,
        "frank" => ArchFamily::Frank,
        "amh" => ArchFamily::Amh,
        other => bail!("unknown Archimedean family '{other}'"),
    })
}

fn arch_theta(family: ArchFamily, args: &GenCopulaArgs) -> Result<f64> {
    if let Some(theta) = args.theta {
        Ok(theta)
    } else if let Some(tau) = args.tau {
        Ok(copulas::theta_from_tau(family, tau)?)
    } else if let Some(rho) = args.rho {
        Ok(copulas::theta_from_rho(family, rho)?)
    } else {
        bail!("one of --theta, --tau, --rho is required")
    }
}

fn elliptical_matrix(args: &GenCopulaArgs) -> Result<CorrMatrix> {
    if let Some(path) = &args.cormat {
        let m = io::read_matrix_csv(path, false)?;
        return Ok(CorrMatrix::new(m)?);
    }
    let n = args.n.context("--n required")?;
    let r = if let Some(r) = args.r {
        r
    } else if let Some(tau) = args.tau {
        copulas::elliptical_r_from_tau(tau)
    } else {
        bail!("elliptical copulas need --r, --tau or --cormat")
    };
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { r });
    Ok(CorrMatrix::new(m)?)
}

fn gen_copula(args: GenCopulaArgs, header: bool) -> Result<()> {
    let spec = match args.family.as_str() {
        "gaussian" => CopulaSpec::Gaussian {
            r: elliptical_matrix(&args)?,
        },
        "tstudent" => CopulaSpec::TStudent {
            r: elliptical_matrix(&args)?,
            nu: args.nu.context("--nu required for tstudent")?,
        },
        "frechet1" => CopulaSpec::Frechet1 {
            alpha: args
                .alpha
                .or(args.rho)
                .context("--alpha (or --rho) required for frechet1")?,
            n: args.n.context("--n required")?,
        },
        "frechet2" => CopulaSpec::Frechet2 {
            alpha: args.alpha.context("--alpha required for frechet2")?,
            beta: args.beta.context("--beta required for frechet2")?,
        },
        name => {
            let family = parse_arch_family(name)?;
            match (&args.child_sizes, &args.child_thetas, &args.child_taus) {
                (Some(sizes), thetas, taus) => {
                    let child_thetas: Vec<f64> = match (thetas, taus) {
                        (Some(th), _) => th.clone(),
                        (None, Some(ts)) => ts
                            .iter()
                            .map(|&tau| copulas::theta_from_tau(family, tau))
                            .collect::<nongauss::Result<_>>()?,
                        (None, None) => bail!("nested sampling needs --child-thetas or --child-taus"),
                    };
                    let theta0 = match (args.theta0, args.tau0) {
                        (Some(th), _) => th,
                        (None, Some(tau)) => copulas::theta_from_tau(family, tau)?,
                        (None, None) => bail!("nested sampling needs --theta0 or --tau0"),
                    };
                    CopulaSpec::NestedArchimedean {
                        family,
                        child_sizes: sizes.clone(),
                        child_thetas,
                        theta0,
                    }
                }
                _ => CopulaSpec::Archimedean {
                    family,
                    theta: arch_theta(family, &args)?,
                    n: args.n.context("--n required")?,
                },
            }
        }
    };
    let mut rng = RngStream::new(args.seed, 0);
    let mut u = copulas::sample_copula(&spec, args.t, &mut rng)?;
    if args.normal_marginals {
        for v in u.iter_mut() {
            *v = norm_quantile(v.clamp(1e-15, 1.0 - 1e-15))?;
        }
    }
    io::write_matrix_csv_header(&args.output, &u, header)?;
    Ok(())
}

#[derive(Serialize)]
struct InjectReport {
    command: String,
    version: String,
    seed: u64,
    copula: String,
    subset: Vec<usize>,
    nested: bool,
    parameter: f64,
    target_rho: Option<f64>,
    delta: f64,
    per_column_ks_normal: Vec<f64>,
    achieved_mean_subset_rho: f64,
}

fn subset_zero_based(subset: &[usize], ncols: usize) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|&c| {
            if c == 0 || c > ncols {
                bail!("subset column {c} outside 1..={ncols}")
            } else {
                Ok(c - 1)
            }
        })
        .collect()
}

fn mean_subset_spearman(x: &SampleMatrix, subset: &[usize]) -> Result<f64> {
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
    Ok(acc / cnt)
}

fn run_inject(args: InjectArgs, header: bool) -> Result<()> {
    let x = io::read_matrix_csv(&args.input, header)?;
    let subset = subset_zero_based(&args.subset, x.ncols())?;
    let mut rng = RngStream::new(args.seed, 0);
    let mut parameter = f64::NAN;
    let mut target_rho = None;
    let xp = match args.copula.as_str() {
        "tstudent" => {
            let nu = args.nu.context("--nu required for tstudent injection")?;
            parameter = nu as f64;
            inject::inject_tstudent(&x, &subset, nu, &mut rng)?
        }
        "frechet" => inject::inject_frechet(&x, &subset, &mut rng)?,
        name => {
            let family = parse_arch_family(name)?;
            if args.nested {
                let cols: Vec<Vec<f64>> = subset
                    .iter()
                    .map(|&c| x.column(c).iter().cloned().collect())
                    .collect();
                let k = cols.len();
                let mut rho_matrix = DMatrix::identity(k, k);
                for a in 0..k {
                    for b in a + 1..k {
                        let r = stats::spearman(&cols[a], &cols[b])?;
                        rho_matrix[(a, b)] = r;
                        rho_matrix[(b, a)] = r;
                    }
                }
                let partition = inject::getcors(&rho_matrix)?;
                let theta0 = copulas::theta_from_rho(family, partition.rho0)?;
                let children: Vec<(Vec<usize>, f64)> = partition
                    .children
                    .iter()
                    .zip(&partition.child_rhos)
                    .map(|(members, &rho)| {
                        copulas::theta_from_rho(family, rho).map(|th| (members.clone(), th))
                    })
                    .collect::<nongauss::Result<_>>()?;
                parameter = theta0;
                target_rho = Some(partition.rho0);
                inject::inject_archimedean(
                    &x,
                    &subset,
                    family,
                    &inject::ArchInjection::Nested { children, theta0 },
                    &mut rng,
                )?
            } else {
                let rho = match (args.theta, args.tau, args.rho) {
                    (Some(theta), _, _) => {
                        parameter = theta;
                        None
                    }
                    (None, Some(tau), _) => {
                        parameter = copulas::theta_from_tau(family, tau)?;
                        None
                    }
                    (None, None, Some(rho)) => Some(rho),
                    (None, None, None) => Some(mean_subset_spearman(&x, &subset)?),
                };
                if let Some(rho) = rho {
                    parameter = copulas::theta_from_rho(family, rho)?;
                    target_rho = Some(rho);
                }
                inject::inject_archimedean(
                    &x,
                    &subset,
                    family,
                    &inject::ArchInjection::Flat { theta: parameter },
                    &mut rng,
                )?
            }
        }
    };
    io::write_matrix_csv_header(&args.output, &xp, header)?;
    if let Some(report_path) = args.report {
        let ks: Vec<f64> = subset
            .iter()
            .map(|&c| {
                let col: Vec<f64> = xp.column(c).iter().cloned().collect();
                stats::ks_standard_normal(&col)
            })
            .collect();
        let report = InjectReport {
            command: "inject".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: args.seed,
            copula: args.copula.clone(),
            subset: args.subset.clone(),
            nested: args.nested,
            parameter,
            target_rho,
            delta: inject::cov_change_delta(&x, &xp)?,
            per_column_ks_normal: ks,
            achieved_mean_subset_rho: mean_subset_spearman(&xp, &subset)?,
        };
        std::fs::write(report_path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CumulantRow {
    order: usize,
    frobenius_norm: f64,
    h_norm: Option<f64>,
}

#[derive(Serialize)]
struct CumulantsReport {
    command: String,
    version: String,
    input_rows: usize,
    input_cols: usize,
    dmax: usize,
    rows: Vec<CumulantRow>,
}

fn run_cumulants(args: CumulantsArgs, header: bool) -> Result<()> {
    let x = io::read_matrix_csv(&args.input, header)?;
    let set = cumulant_tensors(&x, args.dmax)?;
    let c2 = set.order(2).context("order-2 cumulant missing")?;
    let mut rows = Vec::new();
    for d in 1..=args.dmax {
        let tensor = set.order(d).unwrap();
        let h = if d >= 3 {
            Some(h_norm(c2, tensor)?)
        } else {
            None
        };
        rows.push(CumulantRow {
            order: d,
            frobenius_norm: tensor.frobenius_norm(),
            h_norm: h,
        });
    }
    let mut csv = String::from("order,frobenius_norm,h_norm\n");
    for row in &rows {
        let h = row.h_norm.map(|v| format!("{v:?}")).unwrap_or_default();
        csv.push_str(&format!("{},{:?},{}\n", row.order, row.frobenius_norm, h));
    }
    std::fs::write(&args.output, csv)?;
    if let Some(json_path) = &args.json {
        let report = CumulantsReport {
            command: "cumulants".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_rows: x.nrows(),
            input_cols: x.ncols(),
            dmax: args.dmax,
            rows,
        };
        std::fs::write(json_path, serde_json::to_string_pretty(&report)?)?;
    }
    if let Some(dir) = &args.dump_dense {
        std::fs::create_dir_all(dir)?;
        for d in 1..=args.dmax {
            let path = dir.join(format!("c{d}.csv"));
            io::write_dense_tensor_csv(&path, set.order(d).unwrap())?;
        }
    }
    Ok(())
}

fn parse_target(name: &str) -> Result<SelectionTarget> {
    Ok(match name {
        "mev" => SelectionTarget::Mev,
        "hnorm3" => SelectionTarget::HNorm { d: 3 },
        "hnorm4" => SelectionTarget::HNorm { d: 4 },
        "hnorm5" => SelectionTarget::HNorm { d: 5 },
        "hnorm6" => SelectionTarget::HNorm { d: 6 },
        "hdet3" => SelectionTarget::HDet { d: 3 },
        "hdet4" => SelectionTarget::HDet { d: 4 },
        "hdet5" => SelectionTarget::HDet { d: 5 },
        "hdet6" => SelectionTarget::HDet { d: 6 },
        other => bail!("unknown selection target '{other}'"),
    })
}

#[derive(Serialize)]
struct SelectReport {
    command: String,
    version: String,
    seed: u64,
    target: String,
    retained_columns: Vec<usize>,
    removal_trace: Vec<RemovalStep>,
}

#[derive(Serialize)]
struct RemovalStep {
    removed_column: usize,
    target_value: f64,
}

fn run_select(args: SelectArgs, header: bool) -> Result<()> {
    let x = io::read_matrix_csv(&args.input, header)?;
    let target = parse_target(&args.target)?;
    let dmax = match target {
        SelectionTarget::Mev => 2,
        SelectionTarget::HNorm { d } | SelectionTarget::HDet { d } => d,
    };
    let set = cumulant_tensors(&x, dmax)?;
    let sel = select_features(&set, target, args.s)?;
    let report = SelectReport {
        command: "select".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        target: args.target.clone(),
        retained_columns: sel.retained.iter().map(|c| c + 1).collect(),
        removal_trace: sel
            .trace
            .iter()
            .map(|&(col, value)| RemovalStep {
                removed_column: col + 1,
                target_value: value,
            })
            .collect(),
    };
    std::fs::write(&args.output, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn run_extract(args: ExtractArgs, header: bool) -> Result<()> {
    let x = io::read_matrix_csv(&args.input, header)?;
    let n = x.ncols();
    if args.nprime == 0 || args.nprime > n {
        bail!("--nprime must lie in 1..={n}");
    }
    let factor: DMatrix<f64> = match args.method.as_str() {
        "svd" => {
            let set = cumulant_tensors(&x, 2)?;
            hosvd_factor(set.order(2).context("missing order 2")?)?
                .factor
                .columns(0, args.nprime)
                .into_owned()
        }
        m if m.starts_with("hosvd") => {
            let d: usize = m[5..].parse().context("hosvd order")?;
            let set = cumulant_tensors(&x, d)?;
            hosvd_factor(set.order(d).context("missing order")?)?
                .factor
                .columns(0, args.nprime)
                .into_owned()
        }
        m if m.starts_with("als") => {
            let d: usize = m[3..].parse().context("als order")?;
            let set = cumulant_tensors(&x, d)?;
            let res = als_factor(&set, d, args.nprime, args.max_iters, args.tol)?;
            if !res.converged {
                eprintln!(
                    "warning: ALS stopped at the iteration cap; last objective {:.6e}",
                    res.xi_trace.last().unwrap()
                );
            }
            res.factor
        }
        other => bail!("unknown extraction method '{other}'"),
    };
    io::write_matrix_csv(&args.factor, &factor)?;
    if let Some(projected_path) = args.projected {
        let projected = &x * &factor;
        io::write_matrix_csv_header(&projected_path, &projected, header)?;
    }
    Ok(())
}

fn run_dfa(args: DfaArgs, header: bool) -> Result<()> {
    let x = io::read_matrix_csv(&args.input, header)?;
    if args.column == 0 || args.column > x.ncols() {
        bail!("--column must lie in 1..={}", x.ncols());
    }
    let series: Vec<f64> = x.column(args.column - 1).iter().cloned().collect();
    let mut out = String::from("q,hurst\n");
    for &q in &args.q {
        let h = nongauss::tseries::dfa_hurst(&series, q, args.segments)?;
        out.push_str(&format!("{q:?},{h:?}\n"));
    }
    std::fs::write(&args.output, out)?;
    Ok(())
}

fn run_taildep(args: TailDepArgs) -> Result<()> {
    let spec = match args.family.as_str() {
        "gaussian" => TailSpec::Gaussian,
        "tstudent" => TailSpec::TStudent {
            nu: args.nu.context("--nu required")?,
            r: args.r.context("--r required")?,
        },
        "frechet1" => TailSpec::Frechet1 {
            alpha: args.alpha.context("--alpha required")?,
        },
        "frechet2" => TailSpec::Frechet2 {
            alpha: args.alpha.context("--alpha required")?,
            beta: args.beta.context("--beta required")?,
        },
        name => TailSpec::Archimedean {
            family: parse_arch_family(name)?,
            theta: args.theta.context("--theta required")?,
        },
    };
    let (lower, upper) = copulas::tail_dependence(&spec)?;
    println!("lambda_lower,{lower:?}");
    println!("lambda_upper,{upper:?}");
    Ok(())
}
