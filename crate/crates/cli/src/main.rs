mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use entangle_core::axiom::{AxiomFilter, AxiomLibrary};
use entangle_core::embedding::ProviderKind;
use entangle_core::engine::{
    write_audit, AuditRecord, CompareDescriptor, Engine, EngineConfig, EngineError, ErrorClass,
    EvaluateDescriptor, SynthesizeDescriptor,
};
use entangle_core::evaluation::EvaluationReport;
use entangle_core::interference::{ActivationSet, KappaScheme};
use entangle_core::scenario::SixCProfile;
use entangle_core::synthesis::{FramingKind, GeneratorKind, TemplateSet};

const DEFAULT_AUDIT_DIR: &str = ".entangle/audit";

#[derive(Debug, Parser)]
#[command(
    name = "entangle",
    version,
    about = "Compose strategic heuristics into narratives"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML config file; flags override it, it overrides the environment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Axiom library (JSON); defaults to the bundled case-study library.
    #[arg(long, global = true)]
    library: Option<PathBuf>,
    /// Default 6C scenario profile (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    embed_provider: Option<EmbedKind>,
    #[arg(long, global = true)]
    embed_url: Option<String>,
    /// Precomputed embedding store (JSON).
    #[arg(long, global = true)]
    embed_store: Option<PathBuf>,
    #[arg(long, global = true)]
    dimension: Option<usize>,
    #[arg(long, global = true, value_enum)]
    generator: Option<GenKind>,
    #[arg(long, global = true, value_enum)]
    kappa: Option<SchemeArg>,
    /// Directory for prompt template overrides.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Where audit records go [default: .entangle/audit].
    #[arg(long, global = true)]
    audit_dir: Option<PathBuf>,
    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmbedKind {
    Remote,
    Store,
    Deterministic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    SimilarityBased,
    ActionConstraint,
}

impl From<SchemeArg> for KappaScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::SimilarityBased => KappaScheme::SimilarityBased,
            SchemeArg::ActionConstraint => KappaScheme::ActionConstraint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FramingArg {
    Dominant,
    Contrarian,
    Minimalist,
}

impl From<FramingArg> for FramingKind {
    fn from(f: FramingArg) -> Self {
        match f {
            FramingArg::Dominant => FramingKind::Dominant,
            FramingArg::Contrarian => FramingKind::Contrarian,
            FramingArg::Minimalist => FramingKind::Minimalist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableOrJson {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Axiom library operations.
    Library {
        #[command(subcommand)]
        action: LibraryAction,
    },
    /// Activation of every axiom under a scenario.
    Activate {
        /// Profile to score; the configured default scenario otherwise.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: TableOrJson,
        /// Also write the JSON record here.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Interference matrix export.
    Matrix {
        #[arg(long, value_enum, default_value = "csv")]
        format: MatrixFormat,
        /// Restrict to these axiom ids (comma separated).
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<String>>,
    },
    /// Composition graph over the top activations.
    Graph {
        #[arg(long, default_value_t = 3)]
        top_n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Generate a narrative.
    Synthesize {
        #[command(flatten)]
        select: SelectArgs,
        /// Rule-ranking baseline instead of entangled synthesis.
        #[arg(long)]
        baseline: bool,
        /// Write the narrative text here.
        #[arg(long)]
        narrative: Option<PathBuf>,
    },
    /// Score a synthesis text against its input axioms.
    Evaluate {
        #[arg(long)]
        synthesis: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        human_depth: Option<f64>,
    },
    /// Compare two evaluation reports, or run both modes and compare.
    Compare {
        #[arg(long, requires = "baseline", conflicts_with = "run")]
        entangled: Option<PathBuf>,
        #[arg(long, requires = "entangled", conflicts_with = "run")]
        baseline: Option<PathBuf>,
        /// Synthesize with both modes under one generation config.
        #[arg(long)]
        run: bool,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: TableOrJson,
    },
    /// Radar-chart data for one or more evaluation reports.
    Radar {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Also render an SVG chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print the resolved configuration.
    Config,
    /// Start the HTTP service.
    Serve {
        /// host:port [env: ENTANGLE_BIND]
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum LibraryAction {
    /// Load and check the library; print a summary.
    Validate {
        /// Keep only matching axioms, e.g. strategist=martin or tag=speed.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
struct SelectArgs {
    #[arg(long, value_enum, default_value = "dominant")]
    framing: FramingArg,
    #[arg(long)]
    top_n: Option<usize>,
    /// Select every axiom with activation at or above this value.
    #[arg(long)]
    threshold: Option<f64>,
    /// Restrict candidates to these axiom ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<String>>,
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl SelectArgs {
    fn descriptor(&self, baseline: bool) -> Result<SynthesizeDescriptor, EngineError> {
        Ok(SynthesizeDescriptor {
            profile: self.profile.as_deref().map(SixCProfile::load).transpose()?,
            framing: self.framing.into(),
            top_n: self.top_n,
            threshold: self.threshold,
            axiom_ids: self.ids.clone(),
            baseline,
        })
    }
}

fn build_config(g: &GlobalArgs) -> Result<EngineConfig, EngineError> {
    let mut cfg = config::resolve(g.config.as_deref(), |k| std::env::var(k).ok())?;
    if let Some(p) = &g.library {
        cfg.library_path = Some(p.clone());
    }
    if let Some(p) = &g.scenario {
        cfg.scenario_path = Some(p.clone());
    }
    if let Some(k) = g.embed_provider {
        cfg.embedding.kind = match k {
            EmbedKind::Remote => ProviderKind::Remote,
            EmbedKind::Store => ProviderKind::PrecomputedStore,
            EmbedKind::Deterministic => ProviderKind::DeterministicTest,
        };
    }
    if let Some(u) = &g.embed_url {
        cfg.embedding.endpoint = Some(u.clone());
    }
    if let Some(p) = &g.embed_store {
        cfg.embedding.store_path = Some(p.clone());
    }
    if let Some(d) = g.dimension {
        cfg.embedding.dimension = d;
    }
    if let Some(k) = g.generator {
        cfg.generation.provider_kind = match k {
            GenKind::Mock => GeneratorKind::DeterministicMock,
            GenKind::Remote => GeneratorKind::Remote,
        };
    }
    if let Some(s) = g.kappa {
        cfg.kappa.scheme = s.into();
    }
    if let Some(t) = &g.templates {
        cfg.templates_dir = Some(t.clone());
        if cfg.generation.system_message == TemplateSet::default().system.text {
            cfg.generation.system_message = TemplateSet::from_dir(t)
                .map_err(EngineError::Synthesis)?
                .system
                .text;
        }
    }
    if let Some(d) = &g.audit_dir {
        cfg.audit_dir = Some(d.clone());
    }
    if cfg.audit_dir.is_none() {
        cfg.audit_dir = Some(PathBuf::from(DEFAULT_AUDIT_DIR));
    }
    Ok(cfg)
}

fn io_err(path: &Path, e: std::io::Error) -> EngineError {
    EngineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), EngineError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, EngineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| EngineError::Invalid(format!("{}: {e}", path.display())))
}

fn activation_table(act: &ActivationSet) -> String {
    let mut out = format!("{:<4} {:<16} {:>8}\n", "rank", "axiom", "alpha");
    for (k, e) in act.entries.iter().enumerate() {
        out.push_str(&format!(
            "{:<4} {:<16} {:>8.4}\n",
            k + 1,
            e.axiom_id,
            e.alpha
        ));
    }
    out
}

fn run(cli: &Cli, cfg: EngineConfig) -> Result<(), EngineError> {
    let out = cli.global.out.as_deref();
    if let Command::Library {
        action: LibraryAction::Validate { filter },
    } = &cli.command
    {
        let lib = match &cfg.library_path {
            Some(p) => AxiomLibrary::load(p)?,
            None => AxiomLibrary::bundled_meta_case(),
        };
        let lib = match filter {
            Some(f) => lib.filter(&f.parse::<AxiomFilter>()?),
            None => lib,
        };
        let summary = json!({
            "valid": true,
            "axioms": lib.len(),
            "ids": lib.ids(),
            "sources": lib.source_manifest(),
        });
        audit_standalone(&cfg, "library-validate", &filter, &summary);
        return emit(out, &to_json(&summary));
    }
    if let Command::Config = &cli.command {
        cfg.validate()?;
        return emit(out, &to_json(&cfg));
    }

    let engine = Engine::new(cfg)?;
    match &cli.command {
        Command::Library { .. } | Command::Config => unreachable!("handled above"),
        Command::Activate {
            profile,
            format,
            record,
        } => {
            let p = match profile {
                Some(path) => SixCProfile::load(path)?,
                None => engine.default_profile().clone(),
            };
            let act = engine.activations(&p)?;
            engine.audit("activate", &p, &act)?;
            if let Some(r) = record {
                std::fs::write(r, to_json(&act)).map_err(|e| io_err(r, e))?;
            }
            match format {
                TableOrJson::Table => emit(out, &activation_table(&act)),
                TableOrJson::Json => emit(out, &to_json(&act)),
            }
        }
        Command::Matrix { format, ids } => {
            let m = engine.matrix(None, ids.as_deref())?;
            engine.audit("matrix", &json!({ "ids": ids }), &m)?;
            match format {
                MatrixFormat::Csv => emit(out, &m.to_csv()),
                MatrixFormat::Json => emit(out, &to_json(&m)),
            }
        }
        Command::Graph { top_n, format } => {
            let g = engine.graph(engine.default_profile(), *top_n)?;
            engine.audit("graph", &json!({ "top_n": top_n }), &g)?;
            match format {
                GraphFormat::Json => emit(out, &to_json(&g)),
                GraphFormat::Dot => emit(out, &g.to_dot()),
            }
        }
        Command::Synthesize {
            select,
            baseline,
            narrative,
        } => {
            let d = select.descriptor(*baseline)?;
            let r = engine.synthesize(&d)?;
            engine.audit("synthesize", &d, &r)?;
            if let Some(p) = narrative {
                std::fs::write(p, format!("{}\n", r.narrative)).map_err(|e| io_err(p, e))?;
            }
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            emit(out, &to_json(&r))
        }
        Command::Evaluate {
            synthesis,
            inputs,
            label,
            human_depth,
        } => {
            let text = std::fs::read_to_string(synthesis).map_err(|e| io_err(synthesis, e))?;
            let d = EvaluateDescriptor {
                synthesis: text,
                inputs: inputs.clone(),
                label: label.clone(),
                human_depth: *human_depth,
            };
            let report = engine.evaluate(&d)?;
            engine.audit("evaluate", &d, &report)?;
            emit(out, &to_json(&report))
        }
        Command::Compare {
            entangled,
            baseline,
            run,
            select,
            format,
        } => {
            if *run {
                let d = select.descriptor(false)?;
                let r = engine.comparison_run(&d)?;
                engine.audit("compare-run", &d, &r)?;
                return match format {
                    TableOrJson::Table => emit(out, &r.comparison.to_table()),
                    TableOrJson::Json => emit(out, &to_json(&r)),
                };
            }
            let (Some(e), Some(b)) = (entangled, baseline) else {
                return Err(EngineError::Invalid(
                    "compare needs --entangled and --baseline reports, or --run".into(),
                ));
            };
            let d = CompareDescriptor {
                entangled: read_json(e)?,
                baseline: read_json(b)?,
            };
            let c = engine.compare(&d)?;
            engine.audit("compare", &d, &c)?;
            match format {
                TableOrJson::Table => emit(out, &c.to_table()),
                TableOrJson::Json => emit(out, &to_json(&c)),
            }
        }
        Command::Radar { reports, svg } => {
            let rs = reports
                .iter()
                .map(|p| read_json::<EvaluationReport>(p))
                .collect::<Result<Vec<_>, _>>()?;
            let data = engine.radar(&rs)?;
            engine.audit("radar", &rs, &data)?;
            if let Some(p) = svg {
                std::fs::write(p, data.to_svg()).map_err(|e| io_err(p, e))?;
            }
            emit(out, &to_json(&data))
        }
        Command::Serve { bind } => {
            let bind = bind
                .clone()
                .unwrap_or_else(|| engine.config().service_bind.clone());
            let engine = Arc::new(engine);
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| io_err(Path::new("<runtime>"), e))?;
            rt.block_on(entangle_service::serve(engine, &bind))
                .map_err(|e| io_err(Path::new(&bind), e))
        }
    }
}

fn audit_standalone(
    cfg: &EngineConfig,
    command: &str,
    inputs: &impl Serialize,
    outputs: &impl Serialize,
) {
    let Some(dir) = &cfg.audit_dir else {
        return;
    };
    let record = AuditRecord::new(command, "", inputs, cfg, outputs, &TemplateSet::default());
    if let Err(e) = write_audit(dir, &record) {
        eprintln!("warning: audit write failed: {e}");
    }
}

fn exit_code(e: &EngineError) -> u8 {
    match e.class() {
        ErrorClass::Unprocessable => 65,
        ErrorClass::Setup => 66,
        ErrorClass::ProviderFailure => 69,
        ErrorClass::ProviderTimeout => 75,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Library { .. } => "library-validate",
        Command::Activate { .. } => "activate",
        Command::Matrix { .. } => "matrix",
        Command::Graph { .. } => "graph",
        Command::Synthesize { .. } => "synthesize",
        Command::Evaluate { .. } => "evaluate",
        Command::Compare { .. } => "compare",
        Command::Radar { .. } => "radar",
        Command::Config => "config",
        Command::Serve { .. } => "serve",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    match build_config(&cli.global).and_then(|cfg| run(&cli, cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = error_record(name, &e);
            let argv: Vec<String> = std::env::args().collect();
            audit_standalone(
                &failure_config(&cli.global),
                &format!("{name}-failed"),
                &json!({ "argv": argv }),
                &record,
            );
            eprintln!(
                "{}",
                serde_json::to_string(&record).expect("record serializes")
            );
            ExitCode::from(exit_code(&e))
        }
    }
}

fn failure_config(g: &GlobalArgs) -> EngineConfig {
    EngineConfig {
        audit_dir: Some(
            g.audit_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_AUDIT_DIR)),
        ),
        ..Default::default()
    }
}

fn error_record(command: &str, e: &EngineError) -> serde_json::Value {
    json!({
        "error": {
            "code": e.code(),
            "message": e.to_string(),
            "command": command,
        }
    })
}
