use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use qgl_core::bench::{self, reference, Direction, EvalReport, Metric};
use qgl_core::edge_analysis::{beta_grid, ideal_k_curves, linspace, EdgeProfile};
use qgl_core::filters::{make_dx, make_dy, make_gaussian, make_log};
use qgl_core::stats::psnr;
use qgl_core::{score_pair, Error, GrayImage, Kernel2D, QglConfig};

/// Full-reference image quality assessment with the QGL feature.
#[derive(Parser, Debug)]
#[command(name = "qgl", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    model: ModelArgs,

    /// Metrics to evaluate (comma separated: mqgl, sqgl, psnr)
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_metric,
          default_value = "mqgl,sqgl,psnr")]
    metrics: Vec<Metric>,

    /// Worker threads for database runs; 1 forces sequential scoring [default: all cores]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Filter scale [default: 0.5; 1.0 for shift-bench]
    #[arg(long, global = true, value_parser = positive)]
    sigma: Option<f64>,

    /// LoG weight [default: sqrt(2) * sigma]
    #[arg(long, global = true, value_parser = positive)]
    k: Option<f64>,

    /// Normalization stabilizer
    #[arg(long, global = true, default_value_t = QglConfig::DEFAULT_C0, value_parser = non_negative)]
    c0: f64,

    /// Similarity stabilizer
    #[arg(long, global = true, default_value_t = QglConfig::DEFAULT_C1, value_parser = positive)]
    c1: f64,

    /// Normalization window scale, in multiples of sigma
    #[arg(long, global = true, default_value_t = QglConfig::DEFAULT_NORM_SCALE_MULT,
          value_parser = positive)]
    norm_scale_mult: f64,
}

impl ModelArgs {
    fn config(&self, default_sigma: f64) -> QglConfig {
        let sigma = self.sigma.unwrap_or(default_sigma);
        let mut cfg = QglConfig::with_sigma(sigma);
        if let Some(k) = self.k {
            cfg.k = k;
        }
        cfg.c0 = self.c0;
        cfg.c1 = self.c1;
        cfg.norm_scale_mult = self.norm_scale_mult;
        cfg
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one reference/distorted pair
    Score {
        reference: PathBuf,
        distorted: PathBuf,
        /// Also print PSNR
        #[arg(long)]
        psnr: bool,
    },
    /// SROCC against subjective scores for every database in a manifest
    Eval {
        manifest: PathBuf,
        /// Group table; the summary goes next to it as <stem>.summary.csv
        #[arg(long)]
        out: PathBuf,
        /// Optional per-pair score table
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// SROCC as a function of reference displacement
    ShiftBench {
        manifest: PathBuf,
        /// Largest displacement in pixels
        #[arg(long, default_value_t = 10)]
        max_shift: usize,
        /// Shift directions (comma separated)
        #[arg(long, value_delimiter = ',', value_parser = parse_direction,
              default_value = "horizontal,vertical")]
        directions: Vec<Direction>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Step-edge response profiles and ideal-k tables
    EdgeAnalysis {
        /// Scales to profile (comma separated)
        #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "0.5,1,2")]
        sigmas: Vec<f64>,
        /// k / sigma ratios to profile (comma separated)
        #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "1.0")]
        k_ratios: Vec<f64>,
        /// Half-extent of the profiles in units of sigma
        #[arg(long, default_value_t = 4.0, value_parser = positive)]
        extent: f64,
        /// Samples per profile
        #[arg(long, default_value_t = 801, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
        /// Receives profiles.csv and ideal_k.csv
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Dump the Gaussian, LoG, dx and dy taps at --sigma
    Kernels {
        /// Output file [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be finite and > 0"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be finite and >= 0"))
    }
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit status: 1 usage, 2 data validation, 3 I/O.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::InvalidParameter { .. } => 1,
        _ => 2,
    }
}

fn config_line(cfg: &QglConfig) -> String {
    format!(
        "# config sigma={:.6} k={:.6} c0={:.6} c1={:.6} norm_scale_mult={:.6}",
        cfg.sigma, cfg.k, cfg.c0, cfg.c1, cfg.norm_scale_mult
    )
}

fn write_text(path: &Path, body: &str) -> qgl_core::Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_score(
    cli: &Cli,
    reference: &Path,
    distorted: &Path,
    with_psnr: bool,
) -> qgl_core::Result<()> {
    let cfg = cli.model.config(QglConfig::QUALITY_SIGMA);
    cfg.validate()?;
    let r = GrayImage::open(reference)?;
    let d = GrayImage::open(distorted)?;
    let scores = score_pair(&r, &d, &cfg)?;
    println!("{}", config_line(&cfg));
    println!("mqgl={:.6}", scores.mqgl);
    println!("sqgl={:.6}", scores.sqgl);
    if with_psnr {
        println!("psnr={:.6}", psnr(&r, &d, 255.0)?);
    }
    Ok(())
}

fn threads(cli: &Cli) -> Option<usize> {
    cli.threads.map(|n| n as usize)
}

fn print_eval(report: &EvalReport) {
    for (db, group) in &report.per_database {
        let column = reference::database_column(db);
        for (m, v) in &group.srocc {
            let mut line = format!(
                "{db} {m} pairs={} srocc={}",
                group.pairs,
                bench::format_value(*v)
            );
            let published = column.and_then(|c| {
                let label = match m {
                    Metric::Mqgl => "mQGL",
                    Metric::Sqgl => "sQGL",
                    Metric::Psnr => "PSNR",
                };
                reference::database_srocc(label).map(|row| row[c])
            });
            if let Some(p) = published {
                let _ = write!(line, " published={p:.4}");
            }
            println!("{line}");
        }
    }
    for m in &report.metrics {
        println!(
            "{m} weighted_average={} hit_number={}",
            bench::format_value(report.weighted_average[m]),
            report.hit_number[m]
        );
    }
}

fn cmd_eval(cli: &Cli, manifest: &Path, out: &Path, scores: Option<&Path>) -> qgl_core::Result<()> {
    let cfg = cli.model.config(QglConfig::QUALITY_SIGMA);
    cfg.validate()?;
    let records = bench::load_manifest(manifest)?;
    log::info!("{} records from {}", records.len(), manifest.display());
    let report = bench::with_threads(threads(cli), || {
        bench::evaluate_database(&records, &cfg, &cli.metrics)
    })??;
    bench::emit_report(&report, out)?;
    if let Some(p) = scores {
        bench::emit_scores(&report, p)?;
    }
    println!("{}", config_line(&cfg));
    print_eval(&report);
    Ok(())
}

fn cmd_shift_bench(
    cli: &Cli,
    manifest: &Path,
    max_shift: usize,
    directions: &[Direction],
    out: &Path,
) -> qgl_core::Result<()> {
    let cfg = cli.model.config(QglConfig::SHIFT_SIGMA);
    cfg.validate()?;
    let records = bench::load_manifest(manifest)?;
    let report = bench::with_threads(threads(cli), || {
        bench::shift_experiment(&records, &cfg, &cli.metrics, max_shift, directions)
    })??;
    bench::emit_shift_curves(&report.curves, out)?;
    println!("{}", config_line(&cfg));
    if !report.excluded.is_empty() {
        println!("excluded={}", report.excluded.len());
    }
    for c in &report.curves {
        for &m in &c.metrics {
            println!(
                "{} {} {m} d={max_shift} srocc={}",
                c.database,
                c.direction,
                bench::format_value(c.value(m, max_shift))
            );
        }
    }
    Ok(())
}

fn sci(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v:.6e}")
    }
}

fn cmd_edge_analysis(
    sigmas: &[f64],
    k_ratios: &[f64],
    extent: f64,
    samples: usize,
    out_dir: &Path,
) -> qgl_core::Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;

    let mut profiles = String::from("sigma,k,x,x_over_sigma,d1,d2,r,r_normalized,dr\n");
    for &sigma in sigmas {
        for &ratio in k_ratios {
            let k = ratio * sigma;
            let xs = linspace(-extent * sigma, extent * sigma, samples);
            let p = EdgeProfile::new(xs, sigma, k)?;
            let norm = 2.0 * std::f64::consts::PI * sigma * sigma;
            for i in 0..p.xs.len() {
                let _ = writeln!(
                    profiles,
                    "{sigma:.6},{k:.6},{:.6},{:.6},{},{},{},{},{}",
                    p.xs[i],
                    p.xs[i] / sigma,
                    sci(p.d1[i]),
                    sci(p.d2[i]),
                    sci(p.r[i]),
                    sci(p.r[i] * norm),
                    sci(p.f[i]),
                );
            }
        }
    }
    write_text(&out_dir.join("profiles.csv"), &profiles)?;

    // k / sigma does not depend on sigma, so one table covers every scale
    let betas = beta_grid();
    let (k_a, k_b) = ideal_k_curves(&betas, 1.0)?;
    let mut table = String::from("beta,k_a_over_sigma,k_b_over_sigma\n");
    for i in 0..betas.len() {
        let _ = writeln!(table, "{:.6},{},{}", betas[i], sci(k_a[i]), sci(k_b[i]));
    }
    write_text(&out_dir.join("ideal_k.csv"), &table)?;
    println!(
        "wrote {} and {}",
        out_dir.join("profiles.csv").display(),
        out_dir.join("ideal_k.csv").display()
    );
    Ok(())
}

fn cmd_kernels(cli: &Cli, out: Option<&Path>) -> qgl_core::Result<()> {
    let sigma = cli.model.sigma.unwrap_or(QglConfig::QUALITY_SIGMA);
    let kernels: [(&str, Kernel2D); 4] = [
        ("gaussian", make_gaussian(sigma)?),
        ("log", make_log(sigma)?),
        ("dx", make_dx(sigma)?),
        ("dy", make_dy(sigma)?),
    ];
    let mut body = String::from("kernel,sigma,y,x,tap\n");
    for (name, kernel) in &kernels {
        let r = kernel.radius() as isize;
        for y in -r..=r {
            for x in -r..=r {
                let _ = writeln!(body, "{name},{sigma:.6},{y},{x},{}", sci(kernel.tap(x, y)));
            }
        }
    }
    match out {
        Some(p) => write_text(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> qgl_core::Result<()> {
    match &cli.command {
        Command::Score {
            reference,
            distorted,
            psnr,
        } => cmd_score(cli, reference, distorted, *psnr),
        Command::Eval {
            manifest,
            out,
            scores,
        } => cmd_eval(cli, manifest, out, scores.as_deref()),
        Command::ShiftBench {
            manifest,
            max_shift,
            directions,
            out,
        } => cmd_shift_bench(cli, manifest, *max_shift, directions, out),
        Command::EdgeAnalysis {
            sigmas,
            k_ratios,
            extent,
            samples,
            out_dir,
        } => cmd_edge_analysis(sigmas, k_ratios, *extent, *samples as usize, out_dir),
        Command::Kernels { out } => cmd_kernels(cli, out.as_deref()),
    }
}

/// Usage of the subcommand named on the command line, else of the binary.
fn usage_for_args() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = std::env::args()
        .skip(1)
        .find(|a| cmd.find_subcommand(a).is_some());
    match name.and_then(|n| cmd.find_subcommand_mut(&n).map(|c| c.render_usage())) {
        Some(u) => u.to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", usage_for_args());
            }
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qgl: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
