use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nest::bench;
use nest::instance::{self, InstanceSpec};
use nest::render::{self, Format};
use nest::run::run_with_sink;
use nest::trace_file::{for_each_event, read_trace, FileSink};
use nest::verify::Verifier;
use nest_core::procedures::RunOptions;
use nest_core::NullSink;

#[derive(Parser)]
#[command(
    name = "nest",
    version,
    about = "Simulate a brick-carrying robot that builds a nest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Build a nest from an instance file.
    Run {
        instance: PathBuf,
        /// Write the event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "on")]
        monitors: Switch,
        /// Steps charged per sensed cell, counted separately from moves.
        #[arg(long, default_value_t = 0)]
        sensing_cost: u64,
        #[arg(long)]
        json: bool,
    },
    /// Replay a trace against its instance.
    Verify {
        instance: PathBuf,
        trace: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run every job of a manifest and tabulate steps against span times size.
    Bench {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "off")]
        monitors: Switch,
        #[arg(long)]
        json: bool,
    },
    /// Write an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output path; standard output if absent.
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
    },
    /// Draw frames of a run from its trace.
    Render {
        instance: PathBuf,
        trace: PathBuf,
        /// Directory for the frame files.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        every: u64,
        #[arg(long, value_enum, default_value = "ascii")]
        format: RenderFormat,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Random {
        #[arg(long)]
        z: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Rect {
        #[arg(long)]
        z: u64,
        #[arg(long)]
        s: u64,
    },
    Fixture {
        name: String,
    },
}

/// Failures that map to a specific exit status.
enum Failure {
    Parse(anyhow::Error),
    Controller(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load_instance(path: &Path) -> Result<InstanceSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Parse)?;
    instance::parse_instance(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Parse)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_run(
    instance: &Path,
    trace: Option<&Path>,
    monitors: Switch,
    sensing_cost: u64,
    json: bool,
) -> Result<bool, Failure> {
    let spec = load_instance(instance)?;
    let options = RunOptions {
        monitors: matches!(monitors, Switch::On),
        sensing_cost,
    };
    let result = match trace {
        Some(path) => {
            let sink =
                FileSink::create(path).with_context(|| format!("creating {}", path.display()))?;
            let (result, sink) = run_with_sink(&spec, options, sink);
            sink.finish()
                .with_context(|| format!("writing {}", path.display()))?;
            result
        }
        None => run_with_sink(&spec, options, NullSink).0,
    };
    let summary = result.map_err(|f| {
        Failure::Controller(anyhow::anyhow!("{} (trace hash {})", f.error, f.trace_hash))
    })?;
    if json {
        print_json(&summary)?;
    } else {
        println!("z {}", summary.z);
        println!("s {}", summary.s);
        println!("steps {}", summary.steps);
        println!("sensing_steps {}", summary.sensing_steps);
        println!("iterations {}", summary.iterations);
        println!("nest_ok {}", summary.nest_ok);
        println!("invariant_violations {}", summary.invariant_violations);
        println!("trace_hash {}", summary.trace_hash);
        for v in &summary.violations {
            println!("violation: {v}");
        }
    }
    Ok(summary.ok())
}

fn cmd_verify(instance: &Path, trace: &Path, json: bool) -> Result<bool, Failure> {
    let spec = load_instance(instance)?;
    let mut verifier = Verifier::new(&spec);
    for_each_event(trace, |e| verifier.push(&e))
        .with_context(|| format!("reading {}", trace.display()))
        .map_err(Failure::Parse)?;
    let report = verifier.finish();
    if json {
        print_json(&report)?;
    } else {
        println!("events {}", report.events);
        println!("moves {}", report.moves);
        println!("bricks {}", report.final_bricks);
        println!("nest_ok {}", report.nest_ok);
        match report.first_violation() {
            Some(v) => println!("first violation at event {}: {}", v.index, v.message),
            None => println!("clean"),
        }
        if report.violations.len() > 1 {
            println!("{} violations in total", report.violations.len());
        }
    }
    Ok(report.is_clean())
}

fn cmd_bench(manifest: &Path, monitors: Switch, json: bool) -> Result<bool, Failure> {
    let text = fs::read_to_string(manifest)
        .with_context(|| format!("reading {}", manifest.display()))
        .map_err(Failure::Parse)?;
    let jobs = bench::parse_manifest(&text).map_err(|e| Failure::Parse(e.into()))?;
    let options = RunOptions {
        monitors: matches!(monitors, Switch::On),
        sensing_cost: 0,
    };
    let rows = bench::run_jobs(&jobs, options);
    let summaries = bench::summarize(&rows);
    if json {
        print_json(&serde_json::json!({ "rows": rows, "groups": summaries }))?;
    } else {
        print!("{}", bench::format_table(&rows, &summaries));
    }
    Ok(summaries.iter().all(|g| g.all_ok))
}

fn cmd_gen(kind: &GenKind, out: Option<&Path>) -> Result<bool, Failure> {
    let spec = match kind {
        GenKind::Random { z, seed } => instance::gen_random_connected(*z, *seed),
        GenKind::Rect { z, s } => instance::gen_rough_rectangle(*z, *s),
        GenKind::Fixture { name } => instance::fixture(name),
    }
    .map_err(|e| Failure::Parse(e.into()))?;
    let text = instance::serialize_instance(&spec);
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(true)
}

fn cmd_render(
    instance: &Path,
    trace: &Path,
    out: &Path,
    every: u64,
    format: RenderFormat,
) -> Result<bool, Failure> {
    let spec = load_instance(instance)?;
    let events = read_trace(trace)
        .with_context(|| format!("reading {}", trace.display()))
        .map_err(Failure::Parse)?;
    let format = match format {
        RenderFormat::Ascii => Format::Ascii,
        RenderFormat::Svg => Format::Svg,
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let frames = render::render(&spec, &events, every, format);
    for frame in &frames {
        let path = out.join(format!("frame-{:08}.{}", frame.after, format.extension()));
        fs::write(&path, &frame.body).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{} frames in {}", frames.len(), out.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            instance,
            trace,
            monitors,
            sensing_cost,
            json,
        } => cmd_run(instance, trace.as_deref(), *monitors, *sensing_cost, *json),
        Command::Verify {
            instance,
            trace,
            json,
        } => cmd_verify(instance, trace, *json),
        Command::Bench {
            manifest,
            monitors,
            json,
        } => cmd_bench(manifest, *monitors, *json),
        Command::Gen { kind, out } => cmd_gen(kind, out.as_deref()),
        Command::Render {
            instance,
            trace,
            out,
            every,
            format,
        } => cmd_render(instance, trace, out, *every, *format),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Parse(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Controller(e)) => {
            eprintln!("controller error: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
