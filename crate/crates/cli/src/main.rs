use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use scratchkit::assistant::SelectionPolicy;
use scratchkit::catalog::DEFAULT_THRESHOLD;
use scratchkit::codegen::{emit_script, inject, parse_block_list_with};
use scratchkit::metrics::SnippetMode;
use scratchkit::rubric::{Dimension, MasteryBands};
use scratchkit::sb3::{save_project, ProjectFormat};
use scratchkit_cli::{exit, parse_project, render, service, sibling_path, Engine, Failure, RunConfig, TransportMode};

#[derive(Parser)]
#[command(name = "scratchkit", version, about = "Score, measure and extend Scratch 3 projects")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Block catalog (TOML) replacing the built-in one.
    #[arg(long, global = true, env = "SCRATCHKIT_CATALOG")]
    catalog: Option<PathBuf>,
    /// Example corpus (JSON) replacing the built-in one.
    #[arg(long, global = true, env = "SCRATCHKIT_CORPUS")]
    corpus: Option<PathBuf>,
    /// Number of examples placed in the prompt.
    #[arg(long, global = true, default_value_t = scratchkit::assistant::DEFAULT_K)]
    k: usize,
    /// Largest normalized edit distance accepted when matching block text.
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Example selection: similarity or fixed.
    #[arg(long, global = true, default_value = "similarity")]
    policy: SelectionPolicy,
}

#[derive(Subcommand)]
enum Command {
    /// Computational-thinking rubric for a project.
    Score {
        project: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Retention and expansion of a template inside a final project.
    Metrics {
        #[arg(long)]
        template: PathBuf,
        #[arg(long = "final")]
        final_project: PathBuf,
        #[arg(long, default_value = "opcode")]
        mode: SnippetMode,
    },
    /// Closest catalog block for a piece of block text.
    Match { text: String },
    /// Compile a JSON list of block texts into a project copy.
    Generate {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        into: PathBuf,
        #[arg(long, default_value = "")]
        sprite: String,
    },
    /// Ask the assistant a question.
    Assist {
        #[arg(long)]
        question: String,
        /// Answer from a {question, answer} fixture file instead of the live endpoint.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Inject the answer into a copy of this project.
        #[arg(long)]
        into: Option<PathBuf>,
        #[arg(long, default_value = "")]
        sprite: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display()), exit::PARSE, 400))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::new("io", format!("{}: {e}", path.display()), exit::PARSE, 500))
}

fn engine(global: &Global, fixture: Option<PathBuf>) -> Result<Engine, Failure> {
    Engine::new(RunConfig {
        catalog: global.catalog.clone(),
        corpus: global.corpus.clone(),
        k: global.k,
        threshold: global.threshold,
        policy: global.policy,
        mode: SnippetMode::Opcode,
        transport: fixture.map_or(TransportMode::Live, TransportMode::Fixture),
        bands: MasteryBands::default(),
    })
}

fn score_table(json: &str) -> String {
    let report: serde_json::Value = serde_json::from_str(json).expect("report is JSON");
    let mut out = String::new();
    for dim in Dimension::ALL {
        out.push_str(&format!("{:<22}{}\n", dim.key(), report[dim.key()]));
    }
    out.push_str(&format!("{:<22}{}/21\n", "total", report["total"]));
    out.push_str(&format!("{:<22}{}\n", "label", report["label"].as_str().unwrap_or_default()));
    out
}

fn save_as_archive(project: &scratchkit::sb3::Project, path: &Path) -> Result<(), Failure> {
    write(path, &save_project(project, ProjectFormat::Archive)?)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Score { project, json } => {
            let report = engine(&cli.global, None)?.score(&read(&project)?)?;
            print!("{}", if json { report } else { score_table(&report) });
        }
        Command::Metrics { template, final_project, mode } => {
            print!("{}", engine(&cli.global, None)?.metrics(&read(&template)?, &read(&final_project)?, mode)?);
        }
        Command::Match { text } => {
            let engine = engine(&cli.global, None)?;
            let found = engine
                .catalog
                .match_block(&text)
                .map_err(|e| Failure::new("no_match", e.to_string(), exit::FAILURE, 422))?;
            print!("{}", render(&found));
        }
        Command::Generate { blocks, into, sprite } => {
            let engine = engine(&cli.global, None)?;
            let texts: Vec<String> = serde_json::from_slice(&read(&blocks)?)
                .map_err(|e| Failure::new("bad_blocks", format!("{}: {e}", blocks.display()), exit::PARSE, 400))?;
            let project = parse_project(&read(&into)?)?;
            let plan = parse_block_list_with(&texts, &engine.catalog, engine.config.threshold)
                .map_err(|e| Failure::from(scratchkit::assistant::AssistError::from(e)))?;
            let patch = emit_script(&plan, None).with_target(&sprite);
            let out = inject(&project, &patch).map_err(|e| Failure::from(scratchkit::assistant::AssistError::from(e)))?;
            print!("{}", render(&patch.to_json()));
            save_as_archive(&out, &sibling_path(&into, "generated"))?;
        }
        Command::Assist { question, fixture, into, sprite } => {
            let engine = engine(&cli.global, fixture)?;
            let project = into.as_deref().map(|p| read(p).and_then(|b| parse_project(&b))).transpose()?;
            let result = engine.assist(&question, project.as_ref(), &sprite)?;
            print!("{}", render(&result.report()));
            if let (Some(path), Some(out)) = (into.as_deref(), result.project.as_ref()) {
                save_as_archive(out, &sibling_path(path, "assist"))?;
            }
        }
        Command::Serve { bind, fixture } => {
            let engine = engine(&cli.global, fixture)?;
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::new("runtime", e.to_string(), exit::FAILURE, 500))?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind)
                    .await
                    .map_err(|e| Failure::new("bind", format!("{bind}: {e}"), exit::FAILURE, 500))?;
                tracing::info!("listening on {bind}");
                axum::serve(listener, service::router(engine))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| Failure::new("serve", e.to_string(), exit::FAILURE, 500))
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(failure) => {
            eprint!("{}", failure.body());
            ExitCode::from(failure.exit)
        }
    }
}
