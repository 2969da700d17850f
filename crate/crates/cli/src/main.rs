//! `microgen`: decode, verify, select, build preference data and run
//! benchmarks over the micro-world from the command line.

mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use microgen::bench::{comparison_svg, emit_report, random_spec, run_bench, BenchReport, ReportFormats};
use microgen::digest::{json_digest, sha256_hex};
use microgen::generator::{decode_iterative, PlantedPredictor};
use microgen::microworld::{grid_to_scene, parse_prompt, Category, GridShape, TaskSpec, TokenGrid};
use microgen::preference::{build_cot_labels, build_pairs, read_jsonl, write_jsonl, PreferencePair};
use microgen::selector::{best_of_n, SelectionRecord};
use microgen::seed;
use microgen::verifier::{parse_transcript_bytes, verify};

use settings::{Overrides, Settings, UsageError};

#[derive(Parser)]
#[command(name = "microgen", version, about = "Masked-token decoding, self-verification and preference data over a discrete micro-world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Base seed; all randomness derives from it
    #[arg(long)]
    seed: Option<u64>,
    /// TOML (or JSON) settings file; explicit flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for every emitted file
    #[arg(long, env = "MICROGEN_OUT_DIR", value_name = "DIR")]
    out_dir: PathBuf,
    /// Worker threads (outputs do not depend on this)
    #[arg(long, env = "MICROGEN_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decode one grid for a prompt
    Generate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
        /// Also write a PPM rendering with this many pixels per cell
        #[arg(long, value_name = "PX")]
        ppm: Option<usize>,
    },
    /// Score a grid against a prompt, or parse a transcript file
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
        /// TokenGrid JSON to verify
        #[arg(long, value_name = "FILE", required_unless_present = "transcript")]
        grid: Option<PathBuf>,
        /// Transcript text to parse and score instead of verifying a grid
        #[arg(long, value_name = "FILE", conflicts_with = "grid")]
        transcript: Option<PathBuf>,
    },
    /// Best-of-N: decode N candidates, verify and keep the top K
    Select {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
    },
    /// Build DPO preference pairs
    BuildDpo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
        /// One prompt per line; without it a random suite is used
        #[arg(long, value_name = "FILE")]
        prompts: Option<PathBuf>,
    },
    /// Build chain-of-thought label records from preference pairs
    CotLabels {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
        /// pairs.jsonl written by build-dpo
        #[arg(long, value_name = "FILE")]
        pairs: PathBuf,
    },
    /// Run the benchmark and write CSV/JSON reports
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        o: Overrides,
        /// Also write an SVG bar chart
        #[arg(long)]
        svg: bool,
    },
    /// Compare benchmark reports side by side
    Report {
        #[command(flatten)]
        common: Common,
        /// Report JSON files written by bench
        #[arg(long = "input", value_name = "FILE", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: Settings,
    config_digest: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    wall_clock_seconds: f64,
}

struct Run {
    command: &'static str,
    out_dir: PathBuf,
    settings: Settings,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    started: Instant,
}

impl Run {
    fn new(command: &'static str, common: &Common, o: &Overrides) -> Result<Self> {
        let file = match &common.config {
            Some(p) => settings::load(p)?,
            None => Overrides::default(),
        };
        let default_strategy = if command == "build-dpo" { "rule" } else { "cot" };
        let mut settings = Settings::resolve(o, &file).with_default_strategy(default_strategy);
        if let Some(s) = common.seed {
            settings.seed = s;
        } else if let Some(s) = file.seed {
            settings.seed = s;
        }
        if let Some(j) = common.jobs {
            if j == 0 {
                return Err(UsageError("--jobs must be at least 1".into()).into());
            }
            // Fails only if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
        }
        fs::create_dir_all(&common.out_dir).with_context(|| format!("creating {}", common.out_dir.display()))?;
        Ok(Self { command, out_dir: common.out_dir.clone(), settings, inputs: Vec::new(), outputs: Vec::new(), started: Instant::now() })
    }

    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.record(&path, bytes);
        Ok(path)
    }

    fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) });
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            tool: "microgen",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.settings.seed,
            config_digest: json_digest(&self.settings),
            config: self.settings,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.out_dir.join(format!("{}.manifest.json", self.command));
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn spec_of(settings: &Settings) -> Result<TaskSpec> {
    let Some(prompt) = &settings.prompt else {
        return Err(UsageError("a prompt is required (--prompt or `prompt` in the config file)".into()).into());
    };
    Ok(parse_prompt(prompt)?)
}

fn predictor(settings: &Settings) -> Result<PlantedPredictor> {
    Ok(PlantedPredictor::new(settings.generator(), GridShape::default())?)
}

fn generate(mut run: Run, ppm: Option<usize>) -> Result<()> {
    let s = &run.settings;
    let spec = spec_of(s)?;
    let grid = decode_iterative(&predictor(s)?, &spec, &s.decode(), s.seed)?;
    run.write_json("grid.json", &grid)?;
    if let Some(px) = ppm {
        let bytes = grid_to_scene(&grid)?.to_ppm(px.max(1));
        run.write("grid.ppm", &bytes)?;
    }
    println!("{}", serde_json::to_string(&grid)?);
    run.finish()
}

fn verify_cmd(mut run: Run, grid: Option<PathBuf>, transcript: Option<PathBuf>) -> Result<()> {
    if let Some(path) = transcript {
        let bytes = run.read(&path)?;
        let t = parse_transcript_bytes(&bytes)?;
        #[derive(Serialize)]
        struct Parsed<'a> {
            score: f64,
            yes: usize,
            n: usize,
            mismatched_final: bool,
            transcript: &'a microgen::verifier::Transcript,
        }
        let out = Parsed { score: t.score(), yes: t.yes_count(), n: t.len(), mismatched_final: t.mismatched_final, transcript: &t };
        run.write_json("transcript.json", &out)?;
        println!("{}", t.score());
        return run.finish();
    }
    let path = grid.expect("clap requires --grid without --transcript");
    let grid: TokenGrid = serde_json::from_slice(&run.read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    let s = &run.settings;
    let spec = spec_of(s)?;
    let v = verify(s.verifier()?, &grid, &spec, &s.answerer()?, s.seed)?;
    run.write_json("verdict.json", &v)?;
    println!("{}", v.score);
    run.finish()
}

fn select(mut run: Run) -> Result<()> {
    let s = &run.settings;
    let spec = spec_of(s)?;
    let cfg = s.best_of_n()?;
    let (set, sel) = best_of_n(&predictor(s)?, &spec, &cfg, s.seed)?;
    let record = SelectionRecord::new(&cfg, s.seed, &set, &sel);
    run.write_json("selection.json", &record)?;
    println!("{}", serde_json::to_string(&record.ranked)?);
    run.finish()
}

fn build_dpo(mut run: Run, prompts: Option<PathBuf>) -> Result<()> {
    let specs: Vec<TaskSpec> = match prompts {
        Some(path) => {
            let text = String::from_utf8(run.read(&path)?).context("prompts file is not UTF-8")?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(i, l)| parse_prompt(l).with_context(|| format!("prompt {}", i + 1)))
                .collect::<Result<_>>()?
        }
        None => (0..run.settings.num_specs)
            .map(|i| {
                let c = Category::GENEVAL[i % Category::GENEVAL.len()];
                random_spec(c, seed::derive_path(run.settings.seed, &[seed::streams::SUITE, i as u64]))
            })
            .collect(),
    };
    let s = &run.settings;
    let build = build_pairs(&specs, &predictor(s)?, &s.pair_config()?, s.seed)?;
    let mut jsonl = Vec::new();
    write_jsonl(&build.pairs, &mut jsonl)?;
    run.write("pairs.jsonl", &jsonl)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        specs: usize,
        pairs: usize,
        skipped: usize,
        skipped_indices: &'a [usize],
    }
    let summary = Summary { specs: specs.len(), pairs: build.pairs.len(), skipped: build.skipped.len(), skipped_indices: &build.skipped };
    run.write_json("pairs_summary.json", &summary)?;
    println!("{} pairs, {} skipped", build.pairs.len(), build.skipped.len());
    run.finish()
}

fn cot_labels(mut run: Run, pairs: PathBuf) -> Result<()> {
    let bytes = run.read(&pairs)?;
    let pairs: Vec<PreferencePair> = read_jsonl(&bytes[..]).with_context(|| format!("parsing {}", pairs.display()))?;
    let s = &run.settings;
    let records = build_cot_labels(&pairs, &s.cot_label_config()?, s.seed)?;
    let mut jsonl = Vec::new();
    write_jsonl(&records, &mut jsonl)?;
    run.write("cot_labels.jsonl", &jsonl)?;
    println!("{} records", records.len());
    run.finish()
}

fn bench(mut run: Run, svg: bool) -> Result<()> {
    let cfg = run.settings.bench_config()?;
    let report = run_bench(&cfg)?;
    let formats = ReportFormats { csv: true, json: true, svg };
    for path in emit_report(&report, &run.out_dir, "report", formats)? {
        let bytes = fs::read(&path)?;
        run.record(&path, &bytes);
    }
    println!("overall {:.4} [{:.4}, {:.4}]", report.overall, report.overall_ci.low, report.overall_ci.high);
    run.finish()
}

fn report(mut run: Run, inputs: Vec<PathBuf>) -> Result<()> {
    let mut reports = Vec::new();
    for path in &inputs {
        let bytes = run.read(path)?;
        let r: BenchReport = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        reports.push((format!("{label}:{}", r.config.strategy.name()), r));
    }
    let mut csv = String::from("report,strategy,category,prompts,rate,ci_low,ci_high\n");
    for (label, r) in &reports {
        for c in &r.categories {
            csv += &format!("{label},{},{},{},{},{},{}\n", r.config.strategy.name(), c.category, c.prompts, c.rate, c.ci.low, c.ci.high);
        }
        csv += &format!("{label},{},overall,{},{},{},{}\n", r.config.strategy.name(), r.prompts, r.overall, r.overall_ci.low, r.overall_ci.high);
    }
    run.write("comparison.csv", csv.as_bytes())?;
    let refs: Vec<(&str, &BenchReport)> = reports.iter().map(|(l, r)| (l.as_str(), r)).collect();
    run.write("comparison.svg", comparison_svg(&refs).as_bytes())?;
    for (label, r) in &reports {
        println!("{label}: overall {:.4}", r.overall);
    }
    run.finish()
}

fn execute(cli: Cli) -> Result<()> {
    let none = Overrides::default();
    match cli.command {
        Command::Generate { common, o, ppm } => generate(Run::new("generate", &common, &o)?, ppm),
        Command::Verify { common, o, grid, transcript } => verify_cmd(Run::new("verify", &common, &o)?, grid, transcript),
        Command::Select { common, o } => select(Run::new("select", &common, &o)?),
        Command::BuildDpo { common, o, prompts } => build_dpo(Run::new("build-dpo", &common, &o)?, prompts),
        Command::CotLabels { common, o, pairs } => cot_labels(Run::new("cot-labels", &common, &o)?, pairs),
        Command::Bench { common, o, svg } => bench(Run::new("bench", &common, &o)?, svg),
        Command::Report { common, inputs } => {
            if inputs.is_empty() {
                bail!(UsageError("at least one --input is required".into()));
            }
            report(Run::new("report", &common, &none)?, inputs)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
