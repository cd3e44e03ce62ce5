//! `lcycle`: isolated-cycle statistics of the uniform random graph G(n, M).
//!
//! Every subcommand prints one JSON document on stdout (floats with 17
//! significant digits so values round-trip exactly); errors go to stderr as
//! `{"error":{"kind","message"}}`. Exit codes: 0 success, 1 domain/regime/
//! numeric failure, 2 usage or parse failure.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use lcycle::analytic::excess_dist;
use lcycle::exact::{brute_force_dist, egf_dist};
use lcycle::predictor::{predict, regime_of, Prediction, RegimeTag, DEFAULT_MU_CRIT};
use lcycle::saddle::{
    contour_dist_critical, contour_dist_subcritical, contour_prob_critical,
    contour_prob_subcritical, ContourSpec, DEFAULT_BITS, DEFAULT_NODES,
};
use lcycle::sampler::{dump, sample_gnm_stream};
use lcycle::series::ratio_to_f64;
use lcycle::stats::run_trials;
use lcycle::{Error, Histogram, LengthSet};

#[derive(Parser)]
#[command(
    name = "lcycle",
    version,
    about = "Distribution of the number of isolated cycles with lengths in L in G(n,M)",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GraphArgs {
    /// Number of vertices.
    #[arg(long)]
    n: u64,
    /// Number of edges.
    #[arg(long)]
    m: u64,
}

#[derive(Args)]
struct LengthArg {
    /// Cycle lengths: "3,4,5", "all", "none", "ge:K", "mod:a:m", "even",
    /// "odd", or "not:<spec>".
    #[arg(long = "L")]
    lengths: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Regime classification and the limiting Poisson mean λ_L(z*).
    Predict {
        #[command(flatten)]
        graph: GraphArgs,
        /// Cycle lengths (see --help of simulate for the grammar).
        #[arg(long = "L", default_value = "all")]
        lengths: String,
    },
    /// Monte Carlo simulation with goodness-of-fit statistics.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        lens: LengthArg,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to $LCYCLE_WORKERS, then to all cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write "k,count,empirical,predicted" rows to this file.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Exact rational law Pr[X = k ∧ no complex component].
    Exact {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        lens: LengthArg,
        /// Single k to evaluate.
        #[arg(long, conflicts_with = "all_k")]
        k: Option<u64>,
        /// Evaluate every k the support allows.
        #[arg(long)]
        all_k: bool,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Same law by numerical contour integration (scales far beyond exact).
    Saddle {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        lens: LengthArg,
        #[arg(long)]
        k: u64,
        /// Excess cut-off for the critical window (rejected off-window).
        #[arg(long)]
        rmax: Option<u64>,
        /// Quadrature node floor; raised automatically when the radius and
        /// rmax need finer resolution (the output reports the count used).
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = DEFAULT_BITS)]
        bits: usize,
    },
    /// Asymptotic law of the total excess in the critical window.
    Excess {
        /// Window parameter μ; alternatively derive it from --n/--m.
        #[arg(long, conflicts_with_all = ["n", "m"])]
        mu: Option<f64>,
        #[arg(long, requires = "m")]
        n: Option<u64>,
        #[arg(long, requires = "n")]
        m: Option<u64>,
        #[arg(long, default_value_t = 50)]
        rmax: u64,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Empirical vs Poisson vs exact-or-contour, one row per k.
    Compare {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        lens: LengthArg,
        #[arg(long)]
        kmax: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Draw one G(n,M) sample and print its edge list.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sub-stream index (trial number) within the seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Write the edge list here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            match e {
                Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let doc = json!({"error": {"kind": kind, "message": message}});
    eprintln!("{}", to_json(&doc));
}

/// JSON with floats rendered as `{:.16e}` — 17 significant digits, enough
/// for exact f64 round-trips.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    v.serialize(&mut ser).expect("in-memory JSON write");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn print_json(v: &Value) {
    println!("{}", to_json(v));
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &str, header: &str, rows: &[String]) -> Result<(), Error> {
    let mut text = String::with_capacity(16 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Error::Domain(format!("cannot write CSV to {path}: {e}")))
}

fn parse_lengths(spec: &str) -> Result<LengthSet, Error> {
    spec.parse()
}

fn workers_from(cli_flag: Option<usize>) -> Result<usize, Error> {
    if let Some(w) = cli_flag {
        return Ok(w);
    }
    match std::env::var("LCYCLE_WORKERS") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("LCYCLE_WORKERS must be an integer, got {s:?}"))),
        Err(_) => Ok(0),
    }
}

/// Largest k with any probability mass: ⌊n / min{ℓ ∈ L, ℓ ≤ n}⌋.
fn support_kmax(n: u64, l: &LengthSet) -> Result<u64, Error> {
    for len in 3..=n {
        if l.contains(len)? {
            return Ok(n / len);
        }
    }
    Ok(0)
}

fn prediction_json(p: &Prediction) -> Value {
    json!({
        "regime": p.regime.tag.as_str(),
        "c": p.regime.c,
        "mu": p.regime.mu,
        "alpha": p.regime.alpha,
        "zstar": p.zstar,
        "lambda": p.lambda,
        "p_no_cycle": (-p.lambda).exp(),
    })
}

fn histogram_json(h: &Histogram) -> Value {
    let counts: Map<String, Value> = h
        .counts
        .iter()
        .map(|(k, c)| (k.to_string(), json!(c)))
        .collect();
    json!({"counts": counts, "trials": h.trials})
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Predict { graph, lengths } => cmd_predict(graph.n, graph.m, &lengths),
        Cmd::Simulate {
            graph,
            lens,
            trials,
            seed,
            workers,
            csv,
        } => cmd_simulate(
            graph.n,
            graph.m,
            &lens.lengths,
            trials,
            seed,
            workers,
            csv.as_deref(),
        ),
        Cmd::Exact {
            graph,
            lens,
            k,
            all_k,
            csv,
        } => cmd_exact(graph.n, graph.m, &lens.lengths, k, all_k, csv.as_deref()),
        Cmd::Saddle {
            graph,
            lens,
            k,
            rmax,
            nodes,
            bits,
        } => cmd_saddle(graph.n, graph.m, &lens.lengths, k, rmax, nodes, bits),
        Cmd::Excess { mu, n, m, rmax, csv } => cmd_excess(mu, n, m, rmax, csv.as_deref()),
        Cmd::Compare {
            graph,
            lens,
            kmax,
            trials,
            seed,
            workers,
            csv,
        } => cmd_compare(
            graph.n,
            graph.m,
            &lens.lengths,
            kmax,
            trials,
            seed,
            workers,
            csv.as_deref(),
        ),
        Cmd::Sample {
            graph,
            seed,
            stream,
            out,
        } => cmd_sample(graph.n, graph.m, seed, stream, out.as_deref()),
    }
}

fn cmd_predict(n: u64, m: u64, lengths: &str) -> Result<(), Error> {
    let l = parse_lengths(lengths)?;
    let p = predict(n, m, &l)?;
    let mut doc = Map::new();
    doc.insert("n".into(), json!(n));
    doc.insert("m".into(), json!(m));
    doc.insert("lengths".into(), json!(l.to_string()));
    if let Value::Object(fields) = prediction_json(&p) {
        doc.extend(fields);
    }
    print_json(&Value::Object(doc));
    Ok(())
}

fn cmd_simulate(
    n: u64,
    m: u64,
    lengths: &str,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
    csv: Option<&str>,
) -> Result<(), Error> {
    let l = parse_lengths(lengths)?;
    let workers = workers_from(workers)?;
    let report = run_trials(n, m, &l, trials, seed, workers)?;
    let doc = json!({
        "n": report.n,
        "m": report.m,
        "lengths": l.to_string(),
        "trials": report.trials,
        "seed": report.seed,
        "workers": report.workers,
        "x_histogram": histogram_json(&report.x_hist),
        "excess_histogram": histogram_json(&report.excess_hist),
        "complex_fraction": report.complex_fraction,
        "mean_x": report.mean_x,
        "var_x": report.var_x,
        "prediction": report.prediction.as_ref().map(prediction_json),
        "regime_error": report.regime_error,
        "tv": report.tv,
        "chi2": report.chi2.map(|c| json!({"stat": c.stat, "dof": c.dof, "pvalue": c.pvalue})),
        "ks_normalized": report.ks_normalized,
    });
    if let Some(path) = csv {
        let kmax = report.x_hist.counts.keys().next_back().copied().unwrap_or(0);
        let rows: Vec<String> = (0..=kmax)
            .map(|k| {
                let count = report.x_hist.counts.get(&k).copied().unwrap_or(0);
                let predicted = report
                    .prediction
                    .as_ref()
                    .map(|p| fmt_float(p.poisson_pmf(k)))
                    .unwrap_or_default();
                format!(
                    "{k},{count},{},{predicted}",
                    fmt_float(report.x_hist.freq(k))
                )
            })
            .collect();
        write_csv(path, "k,count,empirical,predicted", &rows)?;
    }
    print_json(&doc);
    Ok(())
}

fn cmd_exact(
    n: u64,
    m: u64,
    lengths: &str,
    k: Option<u64>,
    all_k: bool,
    csv: Option<&str>,
) -> Result<(), Error> {
    let l = parse_lengths(lengths)?;
    let ks: Vec<u64> = match (k, all_k) {
        (Some(k), false) => vec![k],
        (None, true) => (0..=support_kmax(n, &l)?).collect(),
        (None, false) => {
            return Err(Error::Domain("pass --k <K> or --all-k".into()));
        }
        (Some(_), true) => unreachable!("clap conflicts_with"),
    };
    let kmax = *ks.last().expect("nonempty");
    let dist = egf_dist(n, m, &l, kmax)?;
    let entries: Vec<Value> = ks
        .iter()
        .map(|&k| {
            let q = &dist[k as usize];
            json!({"k": k, "rational": q.to_string(), "decimal": ratio_to_f64(q)})
        })
        .collect();
    if let Some(path) = csv {
        let rows: Vec<String> = ks
            .iter()
            .map(|&k| {
                let q = &dist[k as usize];
                format!("{k},{},{}", q, fmt_float(ratio_to_f64(q)))
            })
            .collect();
        write_csv(path, "k,rational,decimal", &rows)?;
    }
    print_json(&json!({
        "n": n,
        "m": m,
        "lengths": l.to_string(),
        "entries": entries,
    }));
    Ok(())
}

fn cmd_saddle(
    n: u64,
    m: u64,
    lengths: &str,
    k: u64,
    rmax: Option<u64>,
    nodes: usize,
    bits: usize,
) -> Result<(), Error> {
    let l = parse_lengths(lengths)?;
    let regime = regime_of(n, m, DEFAULT_MU_CRIT)?;
    let (spec, result) = match regime.tag {
        RegimeTag::Critical => {
            let spec = ContourSpec::for_critical(n, m)?;
            let spec = ContourSpec::new(spec.radius(), nodes, bits)?;
            let rmax = rmax.unwrap_or_else(|| ((n as f64).cbrt().floor() as u64).min(20));
            (spec, contour_prob_critical(n, m, &l, k, rmax, &spec)?)
        }
        _ => {
            if let Some(r) = rmax {
                if r > 0 {
                    return Err(Error::Domain(format!(
                        "the excess expansion (rmax = {r}) applies only in the critical window; \
                         this (n, M) is {}",
                        regime.tag.as_str()
                    )));
                }
            }
            let spec = ContourSpec::for_subcritical(n, m)?;
            let spec = ContourSpec::new(spec.radius(), nodes, bits)?;
            (spec, contour_prob_subcritical(n, m, &l, k, &spec)?)
        }
    };
    print_json(&json!({
        "n": n,
        "m": m,
        "lengths": l.to_string(),
        "k": k,
        "regime": regime.tag.as_str(),
        "radius": spec.radius(),
        "value": result.value,
        "im_over_re": result.im_over_re,
        "nodes": result.nodes,
        "bits": result.bits,
    }));
    Ok(())
}

fn cmd_excess(
    mu: Option<f64>,
    n: Option<u64>,
    m: Option<u64>,
    rmax: u64,
    csv: Option<&str>,
) -> Result<(), Error> {
    let mu = match (mu, n, m) {
        (Some(mu), _, _) => mu,
        (None, Some(n), Some(m)) => {
            let regime = regime_of(n, m, DEFAULT_MU_CRIT)?;
            if regime.tag != RegimeTag::Critical {
                return Err(Error::Domain(format!(
                    "the excess law is a critical-window limit; (n, M) = ({n}, {m}) is {}",
                    regime.tag.as_str()
                )));
            }
            regime.mu
        }
        _ => return Err(Error::Domain("pass --mu, or both --n and --m".into())),
    };
    let probabilities = excess_dist(mu, rmax, 1e-12)?;
    let sum: f64 = probabilities.iter().sum();
    if let Some(path) = csv {
        let rows: Vec<String> = probabilities
            .iter()
            .enumerate()
            .map(|(r, p)| format!("{r},{}", fmt_float(*p)))
            .collect();
        write_csv(path, "r,p", &rows)?;
    }
    print_json(&json!({
        "mu": mu,
        "rmax": rmax,
        "probabilities": probabilities,
        "sum": sum,
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    n: u64,
    m: u64,
    lengths: &str,
    kmax: u64,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
    csv: Option<&str>,
) -> Result<(), Error> {
    let l = parse_lengths(lengths)?;
    let workers = workers_from(workers)?;
    let prediction = predict(n, m, &l)?;
    let report = run_trials(n, m, &l, trials, seed, workers)?;
    let (method, reference): (&str, Vec<f64>) = if n <= 8 {
        let brute = brute_force_dist(n, m, &l)?;
        (
            "exact",
            (0..=kmax).map(|k| ratio_to_f64(&brute.prob(k))).collect(),
        )
    } else {
        match prediction.regime.tag {
            RegimeTag::Critical => {
                let spec = ContourSpec::for_critical(n, m)?;
                let rmax = ((n as f64).cbrt().floor() as u64).min(20);
                let dist = contour_dist_critical(n, m, &l, kmax, rmax, &spec)?;
                ("contour", dist.iter().map(|s| s.value).collect())
            }
            _ => {
                let spec = ContourSpec::for_subcritical(n, m)?;
                let dist = contour_dist_subcritical(n, m, &l, kmax, &spec)?;
                ("contour", dist.iter().map(|s| s.value).collect())
            }
        }
    };
    let rows: Vec<Value> = (0..=kmax)
        .map(|k| {
            let empirical = report.x_hist.freq(k);
            let poisson = prediction.poisson_pmf(k);
            let reference_k = reference[k as usize];
            json!({
                "k": k,
                "empirical": empirical,
                "poisson_prediction": poisson,
                "exact_or_contour": reference_k,
                "abs_gap": (empirical - reference_k).abs(),
            })
        })
        .collect();
    if let Some(path) = csv {
        let lines: Vec<String> = (0..=kmax)
            .map(|k| {
                let empirical = report.x_hist.freq(k);
                let reference_k = reference[k as usize];
                format!(
                    "{k},{},{},{},{}",
                    fmt_float(empirical),
                    fmt_float(prediction.poisson_pmf(k)),
                    fmt_float(reference_k),
                    fmt_float((empirical - reference_k).abs()),
                )
            })
            .collect();
        write_csv(
            path,
            "k,empirical,poisson_prediction,exact_or_contour,abs_gap",
            &lines,
        )?;
    }
    print_json(&json!({
        "n": n,
        "m": m,
        "lengths": l.to_string(),
        "kmax": kmax,
        "trials": trials,
        "seed": seed,
        "method": method,
        "rows": rows,
    }));
    Ok(())
}

fn cmd_sample(n: u64, m: u64, seed: u64, stream: u64, out: Option<&str>) -> Result<(), Error> {
    let g = sample_gnm_stream(n, m, seed, stream)?;
    let text = dump(&g, seed);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Domain(format!("cannot write edge list to {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
