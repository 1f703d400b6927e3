use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dos_sim::analysis::{
    chi2_cdf, lemma1_numeric_check, lemma2_bound, prob_at_least_one, qualification_probability,
    scaling_condition, LemmaFamily,
};
use dos_sim::config::ScenarioConfig;
use dos_sim::harness::{db_to_linear, find_optimal_eta, qualifier_frequency, run_sweep};
use dos_sim::report::{eta_summary, sweep_summary, write_eta_csv, write_sweep_csv};
use dos_sim::scheduling::{DosParams, InterferenceNorm, LogBase};

#[derive(Parser, Debug)]
#[command(
    name = "dos-sim",
    version,
    about = "Uplink multi-cell opportunistic scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario sweep and write one CSV row per grid point.
    Sweep(RunArgs),
    /// Find the rate-maximising eta_I for every (K, N) of a scenario.
    EtaTable {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the full rate-vs-eta_I sweep here.
        #[arg(long)]
        sweep_out: Option<PathBuf>,
    },
    /// Tabulate the closed-form quantities and check them against Monte Carlo.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to the config's `out`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Norm {
    Snr,
    Unit,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, default_value_t = 3)]
    cells: usize,
    #[arg(long, default_value_t = 100)]
    users: usize,
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    eta_i: f64,
    #[arg(long, value_enum, default_value_t = Norm::Snr)]
    norm: Norm,
    /// Step of the x grid on [step, 2) for the chi-square table.
    #[arg(long, default_value_t = 0.01)]
    x_step: f64,
    /// Cells sampled for the Monte Carlo qualification check.
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV for the chi-square/bound table; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => cmd_sweep(&args),
        Command::EtaTable { run, sweep_out } => cmd_eta_table(&run, sweep_out.as_deref()),
        Command::Analyze(args) => cmd_analyze(&args),
    }
}

fn load(args: &RunArgs) -> anyhow::Result<(dos_sim::harness::SweepSpec, Option<PathBuf>)> {
    let cfg = ScenarioConfig::load(&args.config)
        .with_context(|| format!("invalid config {}", args.config.display()))?;
    let mut spec = cfg
        .to_spec()
        .with_context(|| format!("invalid config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            bail!("--trials must be >= 1");
        }
        spec.trials = trials;
    }
    let out = args.out.clone().or_else(|| cfg.out.map(PathBuf::from));
    if let Some(path) = &out {
        check_writable(path)?;
    }
    Ok((spec, out))
}

fn check_writable(path: &Path) -> anyhow::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.is_dir() {
            bail!(
                "cannot write {}: directory {} does not exist",
                path.display(),
                dir.display()
            );
        }
    }
    if path.is_dir() {
        bail!("cannot write {}: it is a directory", path.display());
    }
    Ok(())
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_sweep(args: &RunArgs) -> anyhow::Result<()> {
    let (spec, out) = load(args)?;
    let result = run_sweep(&spec)?;
    write_sweep_csv(&result, open_out(out.as_deref())?)?;
    eprint!("{}", sweep_summary(&result));
    if let Some(p) = out {
        eprintln!("wrote {} rows to {}", result.rows.len(), p.display());
    }
    Ok(())
}

fn cmd_eta_table(args: &RunArgs, sweep_out: Option<&Path>) -> anyhow::Result<()> {
    let (spec, out) = load(args)?;
    if let Some(p) = sweep_out {
        check_writable(p)?;
    }
    let table = find_optimal_eta(&spec)?;
    write_eta_csv(&table, open_out(out.as_deref())?)?;
    if let Some(p) = sweep_out {
        write_sweep_csv(&table.sweep, open_out(Some(p))?)?;
    }
    eprint!("{}", eta_summary(&table));
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<()> {
    if args.cells < 2 {
        bail!("--cells must be >= 2 for the chi-square table");
    }
    if !(args.x_step > 0.0 && args.x_step < 2.0) {
        bail!("--x-step must lie in (0, 2)");
    }
    if let Some(p) = &args.out {
        check_writable(p)?;
    }

    let k = args.cells;
    let mut w = csv::Writer::from_writer(open_out(args.out.as_deref())?);
    w.write_record([
        "K",
        "x",
        "chi2_cdf",
        "closed_form",
        "lemma2_bound",
        "bound_holds",
    ])?;
    let steps = (2.0 / args.x_step).ceil() as usize;
    let mut violations = 0;
    for j in 1..steps {
        let x = j as f64 * args.x_step;
        if x >= 2.0 {
            break;
        }
        let cdf = chi2_cdf(k, x)?;
        let bound = lemma2_bound(k, x)?;
        let closed = match k {
            2 => Some(1.0 - (-x / 2.0).exp()),
            3 => Some(1.0 - (-x / 2.0).exp() * (1.0 + x / 2.0)),
            _ => None,
        };
        let holds = bound <= cdf;
        violations += usize::from(!holds);
        w.write_record([
            k.to_string(),
            format!("{x}"),
            format!("{cdf}"),
            closed.map(|c| format!("{c}")).unwrap_or_default(),
            format!("{bound}"),
            holds.to_string(),
        ])?;
    }
    w.flush()?;

    let norm = match args.norm {
        Norm::Snr => InterferenceNorm::Snr,
        Norm::Unit => InterferenceNorm::Unit,
    };
    let snr = db_to_linear(args.snr_db);
    let params =
        DosParams::from_epsilon(args.epsilon, args.users, args.eta_i, LogBase::Natural, norm)?;
    let p_user = qualification_probability(k, snr, &params)?;
    let p_cell = prob_at_least_one(k, args.users, snr, &params)?;
    let (freq, se) = qualifier_frequency(k, args.users, snr, &params, args.mc_samples, args.seed)?;
    let cond = scaling_condition(k, args.users as f64, snr, args.epsilon, 1.0)?;

    let mut log = io::stderr().lock();
    writeln!(log, "lemma 2 bound violations on the x grid: {violations}")?;
    writeln!(
        log,
        "K={k} N={} SNR={} dB eps={} eta_tr={:.6} eta_I={} norm={:?}",
        args.users, args.snr_db, args.epsilon, params.eta_tr, args.eta_i, norm
    )?;
    writeln!(log, "  per-user qualification probability  {p_user:.6e}")?;
    writeln!(log, "  P(at least one qualifier per cell)  {p_cell:.6}")?;
    writeln!(
        log,
        "  Monte Carlo ({} cells)             {freq:.6} ± {:.6} (z = {:.2})",
        args.mc_samples,
        se,
        if se > 0.0 { (freq - p_cell) / se } else { 0.0 }
    )?;
    writeln!(
        log,
        "  growth driver N^(1-eps)/SNR^(K-1)   {:.6e} (N must outgrow SNR^{:.3})",
        cond.driver, cond.required_exponent
    )?;
    let grid: Vec<f64> = (1..=6).map(|e| 10f64.powi(e)).collect();
    for (name, family) in [
        ("f(x) = 1/x", LemmaFamily::Reciprocal { c: 1.0 }),
        ("f(x) = 2/x", LemmaFamily::Reciprocal { c: 2.0 }),
        ("f(x) = x^-1/2", LemmaFamily::Power { c: 1.0, a: 0.5 }),
    ] {
        let r = lemma1_numeric_check(family, &grid)?;
        let last = r.last();
        writeln!(
            log,
            "  {name:<14} x={:.0e}: x f(x) = {:.4e} ({:?}), (1-f)^x = {:.4e} ({:?})",
            last.x, last.product, r.product_trend, last.power, r.power_trend
        )?;
    }
    Ok(())
}
