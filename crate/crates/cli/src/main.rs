use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use softgap::fit::{fit, FitModel};
use softgap::harness::{
    aggregate, read_records_csv, render_svg, run_consistency, run_sweep, switch_check, write_aggregates_csv,
    write_records, OutputFormat, PlotMetric, SweepConfig, SweepRecord, INVARIANT_NAMES,
};
use softgap::{build_phenomenological_multi, save_graph, GapKind};

#[derive(Parser)]
#[command(
    name = "softgap",
    version,
    about = "Union-Find decoding with early-stopping soft outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a phenomenological rotated-surface-code decoding graph.
    GenGraph {
        #[arg(long)]
        distance: usize,
        /// Measurement rounds (default: the distance).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        p: f64,
        /// Number of boundary nodes; more than 2 splits each side into bands.
        #[arg(long, default_value_t = 2)]
        boundaries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample, decode and evaluate soft outputs over a (d, p) grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Per-sample output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        /// Also write per-(d, p, method) aggregates as CSV.
        #[arg(long)]
        aggregate: Option<PathBuf>,
        /// Also write an SVG plot of one method's aggregates.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long, default_value = "fraction")]
        plot_metric: PlotMetric,
        /// Method to plot (default: first of --methods).
        #[arg(long)]
        plot_method: Option<GapKind>,
    },
    /// Check the relations between gap kinds on every sample.
    Consistency {
        #[command(flatten)]
        grid: GridArgs,
        /// Scatter data (CSV); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a scaling law to per-distance means of a sweep CSV.
    Fit {
        #[arg(long)]
        model: FitModel,
        #[arg(long, default_value_t = 0)]
        dmin: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON result; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which column to fit.
        #[arg(long, default_value = "visited")]
        metric: PlotMetric,
        #[arg(long)]
        method: Option<GapKind>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 20.0)]
        epsilon_max_db: f64,
        #[arg(long)]
        keep_empty: bool,
    },
    /// Rate at which the soft output falls below the threshold, against a bound.
    SwitchCheck {
        #[arg(long)]
        threshold: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        method: Option<GapKind>,
        #[arg(long, default_value_t = 20.0)]
        epsilon_max_db: f64,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    distances: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    probs: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20.0)]
    epsilon_max_db: f64,
    #[arg(long, value_delimiter = ',', default_value = "cluster,bounded,extra,extra-cg")]
    methods: Vec<GapKind>,
    /// Measurement rounds (default: the distance).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Keep samples without detection events in the statistics.
    #[arg(long)]
    keep_empty: bool,
}

impl GridArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            distances: self.distances.clone(),
            probs: self.probs.clone(),
            rounds: self.rounds,
            samples: self.samples,
            epsilon_max_db: self.epsilon_max_db,
            methods: self.methods.clone(),
            master_seed: self.seed,
            skip_empty_syndromes: !self.keep_empty,
            threads: self.threads,
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_records_csv(file).with_context(|| format!("reading {}", path.display()))
}

/// Keeps records of one method, inferring it when the file holds only one.
fn select_method(records: Vec<SweepRecord>, method: Option<GapKind>) -> Result<Vec<SweepRecord>> {
    let mut present: Vec<GapKind> = records.iter().map(|r| r.method).collect();
    present.sort();
    present.dedup();
    let method = match (method, present.as_slice()) {
        (Some(m), _) => m,
        (None, [only]) => *only,
        (None, []) => bail!("input holds no records"),
        (None, many) => bail!("input holds several methods {many:?}; pick one with --method"),
    };
    Ok(records.into_iter().filter(|r| r.method == method).collect())
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::GenGraph {
            distance,
            rounds,
            p,
            boundaries,
            out,
        } => {
            let g = build_phenomenological_multi(distance, rounds.unwrap_or(distance), p, boundaries)?;
            save_graph(&g, &out)?;
            info!(
                "wrote {} nodes, {} edges to {}",
                g.num_nodes(),
                g.num_edges(),
                out.display()
            );
        }
        Command::Sweep {
            grid,
            out,
            format,
            aggregate: agg_out,
            plot,
            plot_metric,
            plot_method,
        } => {
            let cfg = grid.config();
            let records = run_sweep(&cfg)?;
            let mut w = output(out.as_deref())?;
            write_records(&records, format, &mut w)?;
            w.flush()?;
            let aggs = aggregate(&records, cfg.epsilon_max_db, cfg.skip_empty_syndromes);
            if let Some(path) = agg_out {
                write_aggregates_csv(&aggs, output(Some(&path))?)?;
            }
            if let Some(path) = plot {
                let method = plot_method.unwrap_or(cfg.methods[0]);
                let series: Vec<_> = aggs.into_iter().filter(|a| a.method == method).collect();
                std::fs::write(&path, render_svg(&series, plot_metric))?;
            }
        }
        Command::Consistency { grid, out } => {
            let report = run_consistency(&grid.config())?;
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            for pt in &report.points {
                w.serialize(pt)?;
            }
            w.flush()?;
            eprintln!("checked {} samples", report.samples);
            for (name, n) in INVARIANT_NAMES.iter().zip(report.violations) {
                eprintln!("{n:>8}  {name}");
            }
            if report.total_violations() > 0 {
                bail!("{} violations", report.total_violations());
            }
        }
        Command::Fit {
            model,
            dmin,
            input,
            out,
            metric,
            method,
            p,
            epsilon_max_db,
            keep_empty,
        } => {
            let mut records = select_method(read_records(&input)?, method)?;
            if let Some(p) = p {
                records.retain(|r| r.p == p);
            }
            let aggs = aggregate(&records, epsilon_max_db, !keep_empty);
            let mut probs: Vec<f64> = aggs.iter().map(|a| a.p).collect();
            probs.sort_by(f64::total_cmp);
            probs.dedup();
            if probs.len() > 1 {
                bail!("input holds several error rates {probs:?}; pick one with --p");
            }
            let points: Vec<(f64, f64)> = aggs
                .iter()
                .map(|a| {
                    let y = match metric {
                        PlotMetric::MeanVisitedNodes => a.mean_visited_nodes,
                        PlotMetric::MeanExtraNodes => a.mean_extra_nodes,
                        PlotMetric::FractionBelow => a.fraction_below,
                    };
                    (a.d as f64, y)
                })
                .collect();
            let result = fit(model, &points, dmin as f64)?;
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &result)?;
            writeln!(w)?;
        }
        Command::SwitchCheck {
            threshold,
            input,
            method,
            epsilon_max_db,
        } => {
            let records = select_method(read_records(&input)?, method)?;
            let check = switch_check(&records, threshold, epsilon_max_db)?;
            println!("{}", serde_json::to_string_pretty(&check)?);
            if !check.pass {
                bail!("measured rate {} exceeds threshold {threshold}", check.measured_rate);
            }
        }
    }
    Ok(())
}
