use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use metalmap::corpus::{synth_corpus, SynthSpec};
use metalmap::{doom, FeatureKind, Metric};
use metalmap_service::pipeline;
use metalmap_service::server::{self, AppState};
use metalmap_service::PipelineConfig;

#[derive(Parser)]
#[command(name = "metalmap", version, about = "Logo corpus maps: batch pipeline and map service")]
struct Cli {
    /// TOML pipeline config; relative paths inside it resolve against its directory
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed for embedding and synthetic corpora
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    image_root: Option<PathBuf>,
    #[arg(long, global = true)]
    feature_kind: Option<FeatureKind>,
    #[arg(long, global = true)]
    metric: Option<Metric>,
    #[arg(long, global = true)]
    latents: Option<PathBuf>,
    /// Keep every manifest record
    #[arg(long, global = true)]
    no_filters: bool,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    min_dist: Option<f64>,
    #[arg(long, global = true)]
    spread: Option<f64>,
    #[arg(long, global = true)]
    n_epochs: Option<usize>,
    #[arg(long, global = true)]
    negative_samples: Option<usize>,
    #[arg(long, global = true)]
    occupancy: Option<f64>,
    /// Map name
    #[arg(long, global = true)]
    name: Option<String>,
    #[arg(long, global = true)]
    bind: Option<String>,
    #[arg(long, global = true)]
    port: Option<u16>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter the manifest; prints the filter report
    Ingest,
    /// Compute features for the ingested records
    Features,
    /// Embed the computed features in the plane
    Embed,
    /// Snap the embedding to a Hilbert grid
    Gridify,
    /// Run every stage and write the map document
    Atlas,
    /// Serve the map documents under <out>/maps
    Serve {
        /// Directory holding the UI bundle
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Rating statistics for a rater,logo,dimension,score CSV
    RateStats { ratings: PathBuf },
    /// Write a seeded synthetic corpus and a config for it
    Synth {
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
    },
}

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.embed.seed = v;
    }
    if let Some(v) = &o.manifest {
        cfg.manifest = v.clone();
    }
    if let Some(v) = &o.image_root {
        cfg.image_root = v.clone();
    }
    if let Some(v) = o.feature_kind {
        cfg.feature_kind = v;
    }
    if let Some(v) = o.metric {
        cfg.metric = Some(v);
    }
    if let Some(v) = &o.latents {
        cfg.latents = Some(v.clone());
    }
    if o.no_filters {
        cfg.filters = false;
    }
    if let Some(v) = o.k {
        cfg.embed.k = v;
    }
    if let Some(v) = o.min_dist {
        cfg.embed.min_dist = v;
    }
    if let Some(v) = o.spread {
        cfg.embed.spread = v;
    }
    if let Some(v) = o.n_epochs {
        cfg.embed.n_epochs = v;
    }
    if let Some(v) = o.negative_samples {
        cfg.embed.negative_samples = v;
    }
    if let Some(v) = o.occupancy {
        cfg.occupancy = v;
    }
    if let Some(v) = &o.name {
        cfg.name = v.clone();
    }
    if let Some(v) = &o.bind {
        cfg.bind = v.clone();
    }
    if let Some(v) = o.port {
        cfg.port = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn records(cfg: &PipelineConfig) -> Result<Vec<metalmap::BandRecord>> {
    pipeline::load_records(&cfg.out.join(pipeline::RECORDS_FILE)).context("run `ingest` first")
}

fn synth(cli: &Cli, classes: usize, per_class: usize) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
    let corpus = synth_corpus(&SynthSpec::with_classes(classes, per_class)?, cli.seed.unwrap_or(0))?;
    corpus.write_to(&out)?;
    let mut cfg = PipelineConfig {
        name: "synthetic".into(),
        manifest: PathBuf::from("manifest.jsonl"),
        image_root: PathBuf::from("."),
        out: PathBuf::from("out"),
        ..PipelineConfig::default()
    };
    if let Some(seed) = cli.seed {
        cfg.embed.seed = seed;
    }
    let path = out.join("metalmap.toml");
    std::fs::write(&path, cfg.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} records and {}", corpus.records.len(), path.display());
    Ok(())
}

fn rate_stats(cli: &Cli, path: &Path) -> Result<()> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let table = doom::load_ratings(file).with_context(|| format!("loading {}", path.display()))?;
    let report = doom::rating_report(&table)?;
    if let Some(out) = &cli.out {
        std::fs::create_dir_all(out)?;
        let target = out.join("rating_report.json");
        std::fs::write(&target, serde_json::to_vec_pretty(&report)?)?;
    }
    print_json(&report)
}

fn serve(cfg: &PipelineConfig, ui: Option<PathBuf>) -> Result<()> {
    let state = Arc::new(AppState::from_out_dir(&cfg.out, ui)?);
    let ip: IpAddr = cfg.bind.parse().with_context(|| format!("invalid bind address `{}`", cfg.bind))?;
    let addr = SocketAddr::new(ip, cfg.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = server::bind(addr).await?;
        eprintln!("serving {} map(s) on http://{}", state.map_names().count(), listener.local_addr()?);
        server::serve(listener, state).await
    })
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth { classes, per_class } => return synth(&cli, *classes, *per_class),
        Command::RateStats { ratings } => return rate_stats(&cli, ratings),
        _ => {}
    }
    let cfg = config(&cli)?;
    match cli.command {
        Command::Ingest => print_json(&pipeline::ingest(&cfg)?.1),
        Command::Features => {
            let set = pipeline::compute_features(&cfg, &records(&cfg)?)?;
            eprintln!("{} {} vectors of dimension {}", set.len(), set.kind(), set.dim());
            Ok(())
        }
        Command::Embed => {
            let set = pipeline::load_features(&cfg).context("run `features` first")?;
            let e = pipeline::run_embed(&cfg, &set)?;
            eprintln!("embedded {} items with {}", e.layout.len(), e.metric.as_str());
            Ok(())
        }
        Command::Gridify => {
            let e = pipeline::load_embedding(&cfg).context("run `embed` first")?;
            let grid = pipeline::run_gridify(&cfg, &e.layout)?;
            eprintln!("{} items on a {}x{} grid", grid.cells.len(), grid.side(), grid.side());
            Ok(())
        }
        Command::Atlas => {
            let doc = pipeline::run_atlas(&cfg)?;
            println!("{}", pipeline::map_file(&cfg.out, &doc.name).display());
            Ok(())
        }
        Command::Serve { ui } => serve(&cfg, ui),
        Command::Synth { .. } | Command::RateStats { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
