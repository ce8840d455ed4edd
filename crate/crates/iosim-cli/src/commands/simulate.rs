use super::CliError;
use clap::Args;
use iosim::backends::{AgentContext, AgentDecision, Backend, BackendError, TextRequest};
use iosim::domain::{
    check_personas, generate_personas, load_personas_jsonl, BackendConfig, SimulationConfig,
    TranscriptMode,
};
use iosim::engine::run_simulation;
use iosim::regimes::PromptLibrary;
use iosim::store::EventLogWriter;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU32, Ordering};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config file (JSON, or TOML by extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory for events.jsonl and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the configured backend kind.
    #[arg(long, value_parser = ["scripted", "llm"])]
    pub backend: Option<String>,
    /// Personas JSONL; synthetic personas are generated when omitted.
    #[arg(long)]
    pub personas: Option<PathBuf>,
    /// Directory of prompt template overrides.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
}

/// Trips after enough consecutive transport failures so a dead endpoint
/// cannot stall a long run on per-turn retries; once open, every call
/// fails instantly and the command exits with the backend code.
struct CircuitBreaker<'a> {
    inner: &'a dyn Backend,
    threshold: u32,
    consecutive: AtomicU32,
    tripped: AtomicU32,
}

impl<'a> CircuitBreaker<'a> {
    fn new(inner: &'a dyn Backend, threshold: u32) -> Self {
        CircuitBreaker { inner, threshold, consecutive: AtomicU32::new(0), tripped: AtomicU32::new(0) }
    }

    fn open(&self) -> bool {
        self.tripped.load(Ordering::Relaxed) != 0
    }

    fn observe<T>(&self, result: Result<T, BackendError>) -> Result<T, BackendError> {
        match &result {
            Err(BackendError::Unavailable(_)) | Err(BackendError::Timeout) => {
                let n = self.consecutive.fetch_add(1, Ordering::Relaxed) + 1;
                if n >= self.threshold {
                    self.tripped.store(1, Ordering::Relaxed);
                }
            }
            Err(_) => {}
            Ok(_) => {
                self.consecutive.store(0, Ordering::Relaxed);
            }
        }
        result
    }
}

impl Backend for CircuitBreaker<'_> {
    fn decide(&self, ctx: &AgentContext) -> Result<AgentDecision, BackendError> {
        if self.open() {
            return Err(BackendError::Unavailable("circuit open after repeated failures".into()));
        }
        self.observe(self.inner.decide(ctx))
    }

    fn complete_text(&self, req: &TextRequest) -> Result<String, BackendError> {
        if self.open() {
            return Err(BackendError::Unavailable("circuit open after repeated failures".into()));
        }
        self.observe(self.inner.complete_text(req))
    }
}

pub fn run(args: SimulateArgs) -> Result<(), CliError> {
    let mut config = SimulationConfig::from_file(&args.config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(kind) = &args.backend {
        config.backend = match kind.as_str() {
            "scripted" => BackendConfig::Scripted { params: None },
            "llm" => match config.backend {
                BackendConfig::Llm(_) => config.backend,
                _ => {
                    return Err(CliError::Input(
                        "--backend llm requires llm settings in the config file".into(),
                    ))
                }
            },
            other => return Err(CliError::Input(format!("unknown backend {other}"))),
        };
    }

    let personas = match &args.personas {
        Some(path) => {
            let personas =
                load_personas_jsonl(path).map_err(|e| CliError::Input(e.to_string()))?;
            check_personas(&personas, &config).map_err(|e| CliError::Input(e.to_string()))?;
            personas
        }
        None => generate_personas(&config),
    };

    let prompts = match &args.prompts {
        Some(dir) => PromptLibrary::from_dir(dir).map_err(|e| CliError::Input(e.to_string()))?,
        None => PromptLibrary::default(),
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let log_path = args.out.join("events.jsonl");
    let mut writer =
        EventLogWriter::create(&log_path).map_err(|e| CliError::Input(e.to_string()))?;

    let backend = iosim::backends::from_config(&config, Some(&args.out))
        .map_err(|e| CliError::Backend(e.to_string()))?;
    let is_live_llm = matches!(&config.backend, BackendConfig::Llm(cfg) if cfg.transcript != TranscriptMode::Replay);
    let breaker = CircuitBreaker::new(backend.as_ref(), config.population().max(3));

    let (mut manifest, _records) =
        run_simulation(config.clone(), Some(personas), &breaker, &prompts, &mut writer)
            .map_err(|e| CliError::Input(e.to_string()))?;

    let info = writer.file_info();
    manifest.event_log = "events.jsonl".into();
    super::write_pretty_json(&args.out.join("manifest.json"), &manifest)?;

    if is_live_llm && breaker.open() {
        return Err(CliError::Backend(format!(
            "chat endpoint unreachable; partial log kept at {}",
            log_path.display()
        )));
    }

    println!(
        "run {} complete: {} log lines, digest {}",
        manifest.run_id, info.lines, info.digest
    );
    println!("log: {}", log_path.display());
    println!("manifest: {}", args.out.join("manifest.json").display());
    Ok(())
}
