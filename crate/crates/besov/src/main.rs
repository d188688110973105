//! Thin command-line front end over the library. All numerics live in the
//! library crate; this binary parses arguments, loads the experiment config,
//! dispatches, and maps outcomes to exit codes:
//! 0 = verdict pass, 1 = verdict fail, 2 = invalid input, 3 = non-convergence.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use besov::config::ExperimentConfig;
use besov::error::{Error, Result};
use besov::holocalc::{MultiIndex, PolySeries, Symbol};
use besov::operators::{berezin_apply, finite_section, hankel_apply};
use besov::partition::build_partition;
use besov::quadrature::KernelForm;
use besov::report::{Mode, ReportFormat};
use besov::spaces::{besov_norm, lp_norm, SpaceParams};
use besov::verify::{probe_symbol, run_target, Probe, Target};
use besov::C64;

#[derive(Parser)]
#[command(
    name = "besov",
    version,
    about = "Weighted holomorphic function spaces on polydiscs: norms, kernel \
             operators, dyadic partitions, and a falsification harness"
)]
struct Cli {
    /// Worker threads for the global pool (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification target (T1..T6 operator dichotomies, L1/L2/P1
    /// structural checks) against a JSON config
    Verify {
        /// One of L1, L2, P1, T1, T2, T3, T4, T5, T6
        #[arg(long)]
        target: String,
        /// Path to the experiment config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// sufficiency | necessity | check (default: chosen from the index
        /// condition)
        #[arg(long)]
        mode: Option<String>,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Weighted norms (derivative norm and integral norm) of a probe
    Norm {
        #[arg(long)]
        config: PathBuf,
        /// Monomial exponents, comma-separated (default: the constant 1)
        #[arg(long)]
        monomial: Option<String>,
        /// Use the extremal pole probe at this radius instead of a monomial
        #[arg(long)]
        extremal_r: Option<f64>,
    },
    /// Evaluate the Hankel-type operator at interior points
    Hankel {
        #[arg(long)]
        config: PathBuf,
        /// Input monomial exponents, comma-separated (default: constant 1)
        #[arg(long)]
        f: Option<String>,
        /// Evaluation point as 2n comma-separated floats re1,im1,...; repeatable
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
    },
    /// Evaluate the Berezin-type transform at interior points
    Berezin {
        #[arg(long)]
        config: PathBuf,
        /// Input monomial exponents, comma-separated (default: constant 1)
        #[arg(long)]
        f: Option<String>,
        /// Evaluation point as 2n comma-separated floats re1,im1,...; repeatable
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
    },
    /// Emit the dyadic cells (level, index, center, measure) as CSV
    Partition {
        /// Number of disc factors
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Finest dyadic level
        #[arg(long, default_value_t = 6)]
        max_level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted kernel integral int (1-|zeta|^2)^alpha K_b(z, zeta) zeta^k dm
    Integrate {
        #[arg(long)]
        config: PathBuf,
        /// Kernel exponents b, comma-separated (default: alpha + 2)
        #[arg(long)]
        b: Option<String>,
        /// Kernel base point as 2n comma-separated floats (default: origin)
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// holomorphic | modulus
        #[arg(long, default_value = "holomorphic")]
        form: String,
        /// Extra monomial factor exponents (default: none)
        #[arg(long)]
        monomial: Option<String>,
    },
    /// Finite-section matrix of the Hankel-type operator as CSV
    Sections {
        #[arg(long)]
        config: PathBuf,
        /// Conjugate-monomial symbol degree, comma-separated (required)
        #[arg(long)]
        g_degree: String,
        /// Input index box bound per factor (default 4)
        #[arg(long)]
        in_bound: Option<String>,
        /// Output index box bound per factor (default 4)
        #[arg(long)]
        out_bound: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_usizes(s: &str, n: usize, what: &str) -> Result<Vec<usize>> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("{what}: {e}")))?;
    if v.len() != n {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {n} comma-separated entries, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("{what}: {e}")))?;
    if v.len() != n {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {n} comma-separated entries, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_point(s: &str, n: usize) -> Result<Vec<C64>> {
    let flat = parse_floats(s, 2 * n, "point")?;
    Ok(flat.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn norm_json(tag: &str, r: Result<besov::spaces::NormResult>) -> serde_json::Value {
    match r {
        Ok(nr) => serde_json::json!({
            "kind": tag,
            "value": nr.value,
            "est_error": nr.est_error,
            "regularized": nr.regularized,
            "converged": nr.converged,
        }),
        Err(e) => serde_json::json!({ "kind": tag, "error": e.to_string() }),
    }
}

fn monomial_probe(cfg: &ExperimentConfig, spec: &Option<String>) -> Result<(MultiIndex, Probe)> {
    let k = match spec {
        Some(s) => MultiIndex::new(parse_usizes(s, cfg.n, "monomial exponents")?),
        None => MultiIndex::zeros(cfg.n),
    };
    let label = format!("monomial:{}", k.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("."));
    Ok((k.clone(), Probe::from_series(label, PolySeries::monomial(k))?))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Verify { target, config, mode, out, format } => {
            let target: Target = target.parse()?;
            let cfg = ExperimentConfig::from_path(&config)?;
            let mode: Option<Mode> = mode.map(|m| m.parse()).transpose()?;
            let format: ReportFormat = format.parse()?;
            let report = run_target(target, mode, &cfg)?;
            match out {
                Some(p) => report.write_to(format, &p)?,
                None => match format {
                    ReportFormat::Json => println!("{}", report.to_json()?),
                    ReportFormat::Csv => print!("{}", report.to_csv()),
                },
            }
            Ok(if report.verdict.passed() { 0 } else { 1 })
        }
        Command::Norm { config, monomial, extremal_r } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let w = cfg.product_weight()?;
            let sp = SpaceParams::new(cfg.p, w.clone(), cfg.scheme())?;
            let (desc, derivative, integral) = match extremal_r {
                Some(r) => {
                    if monomial.is_some() {
                        return Err(Error::InvalidInput(
                            "--monomial and --extremal-r are mutually exclusive".into(),
                        ));
                    }
                    let k = match &cfg.extremal_k {
                        Some(k) => k.clone(),
                        None => besov::verify::default_extremal_k(&w, cfg.p)?,
                    };
                    let probe = Probe::extremal(&w, cfg.p, &vec![r; cfg.n], &k)?;
                    let d = besov::spaces::besov_norm_from_df(|z| probe.eval_df(z).norm(), &sp);
                    let i = lp_norm(|z| probe.eval_f(z), &sp);
                    (format!("extremal r={r} k={k:?}"), d, i)
                }
                None => {
                    let (k, probe) = monomial_probe(&cfg, &monomial)?;
                    let series = PolySeries::monomial(k);
                    let d = besov_norm(&series, &sp);
                    let i = lp_norm(move |z| probe.eval_f(z), &sp);
                    (probe_label_of(&series), d, i)
                }
            };
            let doc = serde_json::json!({
                "probe": desc,
                "p": cfg.p,
                "norms": [norm_json("derivative", derivative), norm_json("integral", integral)],
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(0)
        }
        Command::Hankel { config, f, point } => {
            operator_eval(config, f, point, /*berezin=*/ false)
        }
        Command::Berezin { config, f, point } => {
            operator_eval(config, f, point, /*berezin=*/ true)
        }
        Command::Partition { n, max_level, out } => {
            let part = build_partition(n, max_level)?;
            let mut csv = String::new();
            let mut head = vec!["id".to_string(), "measure".to_string()];
            for j in 0..n {
                head.push(format!("level_{j}"));
                head.push(format!("index_{j}"));
                head.push(format!("center_re_{j}"));
                head.push(format!("center_im_{j}"));
            }
            csv.push_str(&head.join(","));
            csv.push('\n');
            for cell in part.product_cells() {
                let mut row = vec![cell.id(), format!("{}", cell.measure())];
                for fc in &cell.factors {
                    let c = fc.center();
                    row.push(format!("{}", fc.level));
                    row.push(format!("{}", fc.index));
                    row.push(format!("{}", c.re));
                    row.push(format!("{}", c.im));
                }
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            write_or_print(&out, &csv)?;
            Ok(0)
        }
        Command::Integrate { config, b, z, form, monomial } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let alpha = cfg.alpha_vec()?;
            let b = match b {
                Some(s) => parse_floats(&s, cfg.n, "kernel exponents b")?,
                None => alpha.iter().map(|a| a + 2.0).collect(),
            };
            let z = match z {
                Some(s) => parse_point(&s, cfg.n)?,
                None => vec![C64::new(0.0, 0.0); cfg.n],
            };
            let form = match form.as_str() {
                "holomorphic" => KernelForm::Holomorphic,
                "modulus" => KernelForm::Modulus,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown kernel form {other:?}; expected holomorphic or modulus"
                    )))
                }
            };
            let k = match monomial {
                Some(s) => MultiIndex::new(parse_usizes(&s, cfg.n, "monomial exponents")?),
                None => MultiIndex::zeros(cfg.n),
            };
            let q = besov::quadrature::integrate_kernel(
                &cfg.scheme(),
                &alpha,
                &b,
                &z,
                form,
                |zeta| {
                    let mut v = C64::new(1.0, 0.0);
                    for (zj, kj) in zeta.iter().zip(&k.0) {
                        v *= zj.powu(*kj as u32);
                    }
                    v
                },
            )?;
            let doc = serde_json::json!({
                "value_re": q.value.re,
                "value_im": q.value.im,
                "est_error": q.est_error,
                "converged": q.converged,
                "levels_used": q.levels_used,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(if q.converged { 0 } else { 3 })
        }
        Command::Sections { config, g_degree, in_bound, out_bound, out } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let alpha = cfg.alpha_vec()?;
            let d = MultiIndex::new(parse_usizes(&g_degree, cfg.n, "symbol degree")?);
            let in_b = match in_bound {
                Some(s) => MultiIndex::new(parse_usizes(&s, cfg.n, "input bound")?),
                None => MultiIndex::new(vec![4; cfg.n]),
            };
            let out_b = match out_bound {
                Some(s) => MultiIndex::new(parse_usizes(&s, cfg.n, "output bound")?),
                None => MultiIndex::new(vec![4; cfg.n]),
            };
            let g = Symbol::conj_monomial(d);
            let sec = finite_section(&g, &alpha, &in_b, &out_b, &cfg.scheme())?;
            let mut csv = String::from("row,col,row_index,col_index,re,im\n");
            for (ri, rk) in sec.out_indices.iter().enumerate() {
                for (ci, ck) in sec.in_indices.iter().enumerate() {
                    let v = sec.entry(ri, ci);
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        ri,
                        ci,
                        fmt_index(rk),
                        fmt_index(ck),
                        v.re,
                        v.im
                    ));
                }
            }
            write_or_print(&out, &csv)?;
            Ok(0)
        }
    }
}

fn fmt_index(k: &MultiIndex) -> String {
    k.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
}

fn probe_label_of(series: &PolySeries) -> String {
    let terms = series.terms();
    if terms.len() == 1 {
        format!("monomial:{}", fmt_index(&terms[0].0))
    } else {
        format!("series({} terms)", terms.len())
    }
}

fn operator_eval(
    config: PathBuf,
    f: Option<String>,
    points: Vec<String>,
    berezin: bool,
) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(&config)?;
    let alpha = cfg.alpha_vec()?;
    let (_, probe) = monomial_probe(&cfg, &f)?;
    let g = probe_symbol(&cfg.symbol, &probe, cfg.phase, cfg.n)?;
    let pf = probe.clone();
    let f_sym = Symbol::from_fn("input", 1.0, move |z| pf.eval_f(z));
    let scheme = cfg.scheme();
    let mut rows = Vec::new();
    let mut all_converged = true;
    for ps in &points {
        let z = parse_point(ps, cfg.n)?;
        let q = if berezin {
            berezin_apply(&f_sym, &g, &alpha, &z, &scheme)?
        } else {
            hankel_apply(&f_sym, &g, &alpha, &z, &scheme)?
        };
        all_converged &= q.converged;
        rows.push(serde_json::json!({
            "point": ps,
            "value_re": q.value.re,
            "value_im": q.value.im,
            "est_error": q.est_error,
            "converged": q.converged,
        }));
    }
    let doc = serde_json::json!({
        "operator": if berezin { "berezin" } else { "hankel" },
        "symbol": cfg.symbol.describe(),
        "alpha": alpha,
        "evaluations": rows,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if all_converged { 0 } else { 3 })
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Ignore the error if a pool already exists (e.g. repeated init in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
