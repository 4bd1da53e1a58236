//! `avgfusion` command-line front end.

mod plot;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avgfusion::detection::{pattern_support, BsmPattern};
use avgfusion::metrics::BellLabel;
use avgfusion::sweep::{self, Experiment, SweepConfig, SweepResult};
use avgfusion::verify::{self, VerifyOptions};
use clap::{Args, Parser, Subcommand};

use plot::{LinePlot, Series};

#[derive(Debug, Parser)]
#[command(
    name = "avgfusion",
    about = "Monte-Carlo sweeps and oracle checks for unitary-averaged fusion gates and Bell-state measurements",
    args_override_self = true,
    disable_version_flag = true
)]
struct Cli {
    /// Flat `key=value` file; every key is a flag name without dashes.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Averaged fusion gates on two Bell pairs: F^HH, P_HH, F^HH_norm, P_single and trace distance.
    FusionSweep(FusionSweepArgs),
    /// Averaged Bell-state measurement of ψ+, simulated and closed form.
    BsmSweep(BsmSweepArgs),
    /// Trace distance between the averaged and the perfect fusion gate.
    TraceDistance(TraceDistanceArgs),
    /// Run the oracle suites and print one PASS/FAIL line per suite.
    Verify(VerifyArgs),
    /// Print the BSM detection-pattern support of the four Bell states.
    Table2(Table2Args),
    /// Print the version.
    Version,
}

#[derive(Clone, Debug, PartialEq)]
struct CopyList(Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
struct Grid(Vec<f64>);

fn parse_copies(s: &str) -> Result<CopyList, String> {
    let list = s
        .split(',')
        .map(|t| {
            let n: usize = t
                .trim()
                .parse()
                .map_err(|_| format!("{t:?} is not a copy count"))?;
            if n == 0 {
                Err("copy counts must be at least 1".to_string())
            } else {
                Ok(n)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let distinct: BTreeSet<usize> = list.iter().copied().collect();
    if distinct.len() != list.len() {
        return Err("copy counts must be distinct".into());
    }
    Ok(CopyList(list))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("{s:?} is not start:stop:step"));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("{t:?} is not a number"))
    };
    sweep::m_grid(num(start)?, num(stop)?, num(step)?)
        .map(Grid)
        .map_err(|e| e.to_string())
}

fn parse_width(s: &str) -> Result<f64, String> {
    let m: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=0.5).contains(&m) {
        Ok(m)
    } else {
        Err(format!("m = {m} is outside [0, 0.5]"))
    }
}

fn parse_reflectivity(s: &str) -> Result<f64, String> {
    let eta: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&eta) {
        Ok(eta)
    } else {
        Err(format!("reflectivity {eta} is outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Master seed of the per-trial random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// CSV output path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Also write a mean ± std line plot as SVG.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,

    /// Metric column to plot (defaults to the normalised fidelity, or the trace distance).
    #[arg(long, value_name = "NAME")]
    plot_metric: Option<String>,
}

#[derive(Debug, Args)]
struct FusionSweepArgs {
    /// Comma-separated copy counts N.
    #[arg(long, value_parser = parse_copies, default_value = "1,2,3")]
    n_copies: CopyList,

    /// Noise half-widths as start:stop:step, stop inclusive.
    #[arg(long, value_parser = parse_grid, default_value = "0:0.45:0.05")]
    m_grid: Grid,

    /// Trials per (N, m) cell.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 200)]
    samples: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BsmSweepArgs {
    /// Comma-separated copy counts N.
    #[arg(long, value_parser = parse_copies, default_value = "1,2,3")]
    n_copies: CopyList,

    /// Noise half-widths as start:stop:step, stop inclusive.
    #[arg(long, value_parser = parse_grid, default_value = "0:0.4:0.1")]
    m_grid: Grid,

    /// Trials per (N, m) cell.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 200)]
    samples: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TraceDistanceArgs {
    /// Comma-separated copy counts N.
    #[arg(long, value_parser = parse_copies, default_value = "1,2,3,4,5,6")]
    n_copies: CopyList,

    /// Noise half-width.
    #[arg(long, value_parser = parse_width, default_value_t = 0.2)]
    m: f64,

    /// Trials per copy count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 50)]
    samples: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random instances per copy count in the randomised suites.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 50)]
    samples: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Table2Args {
    /// Reflectivity of the H-mode splitter.
    #[arg(long, value_parser = parse_reflectivity, default_value_t = 0.5)]
    eta_h: f64,

    /// Reflectivity of the V-mode splitter.
    #[arg(long, value_parser = parse_reflectivity, default_value_t = 0.5)]
    eta_v: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<avgfusion::Error> for CliError {
    fn from(e: avgfusion::Error) -> Self {
        match e {
            avgfusion::Error::InvalidConfig(_) | avgfusion::Error::InvalidNoiseWidth(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

const SUBCOMMANDS: [&str; 6] = [
    "fusion-sweep",
    "bsm-sweep",
    "trace-distance",
    "verify",
    "table2",
    "version",
];

/// Splices the `key=value` lines of a `--config` file in as flags right
/// after the subcommand, so explicit flags that follow override them.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            path = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if sub_at.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (path, sub_at) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Failure(format!("cannot read config {path}: {e}")))?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{path}:{}: expected key=value",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(CliError::Usage(format!(
                "{path}:{}: nested config",
                lineno + 1
            )));
        }
        injected.push(format!("--{key}"));
        injected.push(value.trim().to_string());
    }
    let mut out = args[..=sub_at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_at + 1..]);
    Ok(out)
}

fn default_plot_metric(e: Experiment) -> &'static str {
    match e {
        Experiment::Fusion => "f_hh_norm",
        Experiment::Bsm => "f_norm",
        Experiment::TraceDistance => "trace_distance",
    }
}

fn build_plot(res: &SweepResult, metric: &str) -> Result<LinePlot, CliError> {
    let col = res
        .metric_index(metric)
        .ok_or_else(|| CliError::Usage(format!("unknown metric {metric:?} for this sweep")))?;
    let exp = res.config.experiment;
    let series = if exp == Experiment::TraceDistance {
        res.config
            .m_grid
            .iter()
            .enumerate()
            .map(|(mi, m)| Series {
                label: format!("m={m}"),
                points: res
                    .config
                    .n_copies
                    .iter()
                    .filter_map(|&n| res.cell(n, mi))
                    .map(|c| (c.n_copies as f64, c.mean[col], c.std[col]))
                    .collect(),
            })
            .collect()
    } else {
        res.config
            .n_copies
            .iter()
            .map(|&n| Series {
                label: format!("N={n}"),
                points: (0..res.config.m_grid.len())
                    .filter_map(|mi| res.cell(n, mi))
                    .map(|c| (c.m, c.mean[col], c.std[col]))
                    .collect(),
            })
            .collect()
    };
    let x_label = if exp == Experiment::TraceDistance {
        "N"
    } else {
        "m"
    };
    Ok(LinePlot {
        title: format!("{} sweep, seed {}", exp.tag(), res.config.master_seed),
        x_label: x_label.into(),
        y_label: metric.into(),
        series,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn run_sweep_command(
    experiment: Experiment,
    n_copies: Vec<usize>,
    m_grid: Vec<f64>,
    samples: u64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let metric = output
        .plot_metric
        .clone()
        .unwrap_or_else(|| default_plot_metric(experiment).to_string());
    if !experiment.metric_names().contains(&metric.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown metric {metric:?}; choose one of {}",
            experiment.metric_names().join(", ")
        )));
    }
    let cfg = SweepConfig {
        experiment,
        n_copies,
        m_grid,
        samples: usize::try_from(samples)
            .map_err(|_| CliError::Usage("samples too large".into()))?,
        master_seed: output.seed,
        threads: None,
    };
    let res = sweep::run_sweep(&cfg)?;
    let csv = res.to_csv();
    write_file(&output.out, &csv)?;
    if let Some(svg) = &output.svg {
        write_file(svg, &build_plot(&res, &metric)?.to_svg())?;
    }
    let col = res.metric_index(&metric).unwrap_or(0);
    for cell in &res.cells {
        println!(
            "N={} m={}: {metric} mean {:.6} std {:.6}",
            cell.n_copies, cell.m, cell.mean[col], cell.std[col]
        );
    }
    println!(
        "wrote {} rows to {}",
        csv.lines().count() - 1,
        output.out.display()
    );
    Ok(())
}

fn marker(in_support: bool, in_balanced: bool) -> &'static str {
    match (in_support, in_balanced) {
        (true, true) => "✓",
        (true, false) => "×",
        _ => "",
    }
}

/// The support table; `✓` marks patterns shared with balanced splitters,
/// `×` marks patterns that only appear off balance.
fn table2(eta_h: f64, eta_v: f64) -> Result<String, CliError> {
    let mut supports = Vec::new();
    for label in BellLabel::ALL {
        supports.push((
            pattern_support(label, eta_h, eta_v)?,
            pattern_support(label, 0.5, 0.5)?,
        ));
    }
    let mut out = format!("eta_h = {eta_h}, eta_v = {eta_v}\n");
    let mut header = format!("{:<4}", "");
    for label in BellLabel::ALL {
        header.push_str(&format!("{:<4}", label.to_string()));
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for p in BsmPattern::ALL {
        let mut row = format!("{:<4}", p.to_string());
        for (now, balanced) in &supports {
            row.push_str(&format!(
                "{:<4}",
                marker(now.contains(&p), balanced.contains(&p))
            ));
        }
        out.push_str(row.trim_end());
        out.push('\n');
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::FusionSweep(a) => {
            run_sweep_command(
                Experiment::Fusion,
                a.n_copies.0,
                a.m_grid.0,
                a.samples,
                &a.output,
            )?;
        }
        Command::BsmSweep(a) => {
            run_sweep_command(
                Experiment::Bsm,
                a.n_copies.0,
                a.m_grid.0,
                a.samples,
                &a.output,
            )?;
        }
        Command::TraceDistance(a) => {
            run_sweep_command(
                Experiment::TraceDistance,
                a.n_copies.0,
                vec![a.m],
                a.samples,
                &a.output,
            )?;
        }
        Command::Verify(a) => {
            let opts = VerifyOptions {
                samples: usize::try_from(a.samples)
                    .map_err(|_| CliError::Usage("samples too large".into()))?,
                seed: a.seed,
            };
            let reports = verify::run_all(&opts)?;
            for r in &reports {
                println!("{r}");
            }
            if !reports.iter().all(|r| r.passed()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Table2(a) => print!("{}", table2(a.eta_h, a.eta_v)?),
        Command::Version => println!("avgfusion {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args: Result<Vec<String>, OsString> =
        std::env::args_os().map(OsString::into_string).collect();
    let args = match args {
        Ok(a) => a,
        Err(bad) => {
            eprintln!("error: argument {bad:?} is not valid UTF-8");
            return ExitCode::from(2);
        }
    };
    let argv = match expand_config(args) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_lists() {
        assert_eq!(parse_copies("1,2, 3").unwrap(), CopyList(vec![1, 2, 3]));
        assert!(parse_copies("0").is_err());
        assert!(parse_copies("1,1").is_err());
        assert!(parse_copies("a").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(
            parse_grid("0:0.4:0.1").unwrap().0,
            vec![0.0, 0.1, 0.2, 0.3, 0.4]
        );
        assert!(parse_grid("0:0.4").is_err());
        assert!(parse_grid("0:0.9:0.1").is_err());
    }

    #[test]
    fn config_is_spliced_after_the_subcommand() {
        let dir = std::env::temp_dir().join(format!("avgfusion-cfg-{}", std::process::id()));
        std::fs::write(&dir, "# comment\nsamples = 7\nn_copies=1,2\n").unwrap();
        let args: Vec<String> = [
            "avgfusion",
            "--config",
            dir.to_str().unwrap(),
            "bsm-sweep",
            "--samples",
            "3",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let out = expand_config(args).unwrap();
        assert_eq!(
            &out[3..],
            [
                "bsm-sweep",
                "--samples",
                "7",
                "--n-copies",
                "1,2",
                "--samples",
                "3"
            ]
        );
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn table_at_balance_has_no_crosses() {
        let t = table2(0.5, 0.5).unwrap();
        assert!(!t.contains('×'));
        assert_eq!(t.matches('✓').count(), 12);
    }
}
