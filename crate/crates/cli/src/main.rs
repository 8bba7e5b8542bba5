use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qpartial_core::asymptotic::{optimum_closed_form, optimum_for_geometry, optimum_numeric, Optimum, OPTIMUM_CSV_HEADER};
use qpartial_core::config::parse_geometry_config;
use qpartial_core::record::{run_asymptotic, run_surephase, simulate, Engine, RunRecord, CSV_HEADER};
use qpartial_core::sweep::{render_csv, SweepSpec};
use qpartial_core::{SearchGeometry, Step3Ordering};

/// Partial search over a block-structured database.
#[derive(Parser)]
#[command(name = "qpartial", version)]
struct Cli {
    /// Print JSON instead of CSV.
    #[arg(long, global = true, conflicts_with = "gnuplot")]
    json: bool,
    /// Print whitespace-separated rows for plotting.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GeometryArgs {
    /// key=value file with N, K, t, tau. Flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    tau: Option<u64>,
}

impl GeometryArgs {
    fn given(&self) -> bool {
        self.config.is_some() || self.n.is_some() || self.k.is_some() || self.t.is_some() || self.tau.is_some()
    }

    fn resolve(&self) -> Result<SearchGeometry> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Some(parse_geometry_config(&text)?)
            }
            None => None,
        };
        let pick = |flag: Option<u64>, from: fn(&SearchGeometry) -> u64, name: &str| -> Result<u64> {
            match (flag, base.as_ref()) {
                (Some(v), _) => Ok(v),
                (None, Some(g)) => Ok(from(g)),
                (None, None) => bail!("missing --{name}"),
            }
        };
        Ok(SearchGeometry::new(
            pick(self.n, SearchGeometry::n, "N")?,
            pick(self.k, SearchGeometry::k, "K")?,
            pick(self.t, SearchGeometry::t, "t")?,
            pick(self.tau, SearchGeometry::tau, "tau")?,
        )?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Large-block optimum of the global/local split.
    Optimize {
        /// Effective block count K/t.
        #[arg(long = "Ktilde", conflicts_with = "sweep")]
        k_tilde: Option<f64>,
        /// Comma-separated list of K/t values.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        /// Use the numeric minimizer instead of the closed form.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Simulate a schedule with the plain last step.
    Simulate {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Global iterations. Defaults to the rounded large-block optimum.
        #[arg(long, requires = "j2")]
        j1: Option<u64>,
        #[arg(long, requires = "j1")]
        j2: Option<u64>,
        #[arg(long, default_value = "reflection-then-oracle")]
        ordering: Step3Ordering,
        #[arg(long, default_value = "auto")]
        engine: Engine,
        /// Sample a block from the final distribution.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Minimal schedule with a phase-matched last step.
    Surephase {
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Run a sweep described by a spec file.
    Sweep { spec: PathBuf },
}

fn optimum_rows(cli: &Cli, rows: &[(Optimum, bool)]) -> Result<String> {
    if cli.json {
        let values: Vec<_> = rows.iter().map(|(o, _)| o).collect();
        return Ok(serde_json::to_string_pretty(&values)? + "\n");
    }
    let mut out = String::new();
    if !cli.gnuplot {
        out.push_str(OPTIMUM_CSV_HEADER);
        out.push('\n');
    }
    for (o, with_final) in rows {
        let row = o.csv_row(*with_final);
        if cli.gnuplot {
            out.push_str(&row.replace(',', " "));
        } else {
            out.push_str(&row);
        }
        out.push('\n');
    }
    Ok(out)
}

fn record_output(cli: &Cli, record: &RunRecord) -> Result<String> {
    Ok(if cli.json {
        serde_json::to_string_pretty(record)? + "\n"
    } else if cli.gnuplot {
        record.gnuplot_row() + "\n"
    } else {
        format!("{CSV_HEADER}\n{}\n", record.csv_row())
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let text = match &cli.command {
        Command::Optimize {
            k_tilde,
            sweep,
            numeric,
            geometry,
        } => {
            let solve = |k: f64| if *numeric { optimum_numeric(k) } else { optimum_closed_form(k) };
            let rows = if let Some(k) = k_tilde {
                vec![(solve(*k)?, false)]
            } else if !sweep.is_empty() {
                sweep.iter().map(|k| Ok((solve(*k)?, false))).collect::<Result<Vec<_>>>()?
            } else if geometry.given() {
                let g = geometry.resolve()?;
                let o = if *numeric {
                    optimum_numeric(g.k_tilde())?.scaled(&g)
                } else {
                    optimum_for_geometry(&g)?
                };
                vec![(o, true)]
            } else {
                bail!("give --Ktilde, --sweep or a geometry");
            };
            optimum_rows(cli, &rows)?
        }
        Command::Simulate {
            geometry,
            j1,
            j2,
            ordering,
            engine,
            seed,
        } => {
            let g = geometry.resolve()?;
            let record = match (j1, j2) {
                (Some(j1), Some(j2)) => simulate(&g, *j1, *j2, *ordering, *engine, *seed)?,
                _ => run_asymptotic(&g, *engine)?,
            };
            record_output(cli, &record)?
        }
        Command::Surephase { geometry } => {
            let g = geometry.resolve()?;
            let (record, solution) = run_surephase(&g)?;
            if cli.json {
                let value = serde_json::json!({ "solution": solution.to_record(&g), "run": record });
                serde_json::to_string_pretty(&value)? + "\n"
            } else {
                record_output(cli, &record)?
            }
        }
        Command::Sweep { spec } => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec = SweepSpec::parse(&text)?;
            let rows = spec.run();
            let mut failed = 0;
            for row in &rows {
                if let Err(e) = &row.outcome {
                    let p = &row.point;
                    eprintln!("N={} K={} t={} tau={}: {e}", p.n, p.k, p.t, p.tau);
                    failed += 1;
                }
            }
            print!("{}", render_csv(spec.mode, &rows));
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
