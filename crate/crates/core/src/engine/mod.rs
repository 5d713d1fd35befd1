//! One engine behind both the command line and the HTTP service.
//!
//! [`Engine`] owns the library, the default scenario and the providers, and
//! exposes every pipeline step as a method taking plain request records.
//! Both shells serialize the values these methods return, so identical
//! inputs and config give identical payloads.

mod audit;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::axiom::{Axiom, AxiomLibrary, LibraryError};
use crate::embedding::{
    EmbedError, EmbeddingProvider, ProviderConfig, ProviderKind, ENV_EMBED_KEY, ENV_EMBED_URL,
};
use crate::evaluation::{
    compare, evaluate, radar_export, Comparison, EvalError, EvaluationConfig, EvaluationReport,
    RadarData,
};
use crate::interference::{
    build_interference_matrix, compose_field, compute_activations, export_graph, ActivationSet,
    CompositionGraph, InterferenceError, InterferenceMatrix, KappaConfig, KappaScheme, MixConfig,
    ViewConfig,
};
use crate::scenario::{embed_scenario, ScenarioConfig, ScenarioError, SixCProfile};
use crate::synthesis::{
    run_baseline, select_heuristics, synthesize, FramingKind, GenerationConfig, GenerationError,
    GeneratorKind, LlmConfig, MockGenerator, RemoteGenerator, RequestEcho, Selector,
    SynthesisError, SynthesisRequest, SynthesisResult, TemplateSet, TextGenerator, ENV_LLM_KEY,
    ENV_LLM_MODEL, ENV_LLM_URL,
};

pub use audit::{write_audit, AuditRecord};

pub const ENV_BIND: &str = "ENTANGLE_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Coarse failure classes shared by exit records and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input violates an invariant or references something unknown.
    Unprocessable,
    ProviderFailure,
    ProviderTimeout,
    /// Files or configuration the engine cannot start with.
    Setup,
}

fn embed_class(e: &EmbedError) -> ErrorClass {
    if e.is_timeout() {
        ErrorClass::ProviderTimeout
    } else if e.is_transport() {
        ErrorClass::ProviderFailure
    } else {
        match e {
            EmbedError::Decode(_) | EmbedError::NotFound { .. } => ErrorClass::ProviderFailure,
            EmbedError::Batch { source, .. } => embed_class(source),
            EmbedError::Config(_) | EmbedError::Store { .. } => ErrorClass::Setup,
            _ => ErrorClass::Unprocessable,
        }
    }
}

fn generation_class(e: &GenerationError) -> ErrorClass {
    match e {
        GenerationError::Timeout { .. } => ErrorClass::ProviderTimeout,
        GenerationError::Config(_) => ErrorClass::Setup,
        _ => ErrorClass::ProviderFailure,
    }
}

impl EngineError {
    pub fn class(&self) -> ErrorClass {
        match self {
            EngineError::Embed(e)
            | EngineError::Scenario(ScenarioError::Embed(e))
            | EngineError::Interference(InterferenceError::Embed(e))
            | EngineError::Synthesis(SynthesisError::Embed(e))
            | EngineError::Synthesis(SynthesisError::Interference(InterferenceError::Embed(e)))
            | EngineError::Eval(EvalError::Embed(e)) => embed_class(e),
            EngineError::Synthesis(SynthesisError::Generation(g)) => generation_class(g),
            EngineError::Library(LibraryError::Io { .. })
            | EngineError::Scenario(ScenarioError::Io { .. })
            | EngineError::Io { .. }
            | EngineError::Config(_) => ErrorClass::Setup,
            _ => ErrorClass::Unprocessable,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self.class() {
            ErrorClass::ProviderFailure => return "provider_failure",
            ErrorClass::ProviderTimeout => return "provider_timeout",
            _ => {}
        }
        match self {
            EngineError::Library(LibraryError::Io { .. })
            | EngineError::Scenario(ScenarioError::Io { .. })
            | EngineError::Io { .. } => "io_error",
            EngineError::Library(_) => "library_invalid",
            EngineError::Scenario(_) => "scenario_invalid",
            EngineError::Embed(_) => "embedding_invalid",
            EngineError::Interference(_) => "interference_invalid",
            EngineError::Synthesis(_) => "synthesis_invalid",
            EngineError::Eval(_) => "evaluation_invalid",
            EngineError::Invalid(_) => "invalid_request",
            EngineError::Config(_) => "config_invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Axiom library file; the bundled case-study library when unset.
    pub library_path: Option<PathBuf>,
    /// Default scenario profile; the bundled case-study profile when unset.
    pub scenario_path: Option<PathBuf>,
    pub embedding: ProviderConfig,
    pub generation: GenerationConfig,
    pub llm: LlmConfig,
    pub kappa: KappaConfig,
    pub mix: MixConfig,
    pub scenario: ScenarioConfig,
    pub views: ViewConfig,
    pub evaluation: EvaluationConfig,
    pub templates_dir: Option<PathBuf>,
    pub audit_dir: Option<PathBuf>,
    pub service_bind: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            library_path: None,
            scenario_path: None,
            embedding: ProviderConfig::default(),
            generation: GenerationConfig::default(),
            llm: LlmConfig::default(),
            kappa: KappaConfig::default(),
            mix: MixConfig::default(),
            scenario: ScenarioConfig::default(),
            views: ViewConfig::default(),
            evaluation: EvaluationConfig::default(),
            templates_dir: None,
            audit_dir: None,
            service_bind: DEFAULT_BIND.to_string(),
        }
    }
}

impl EngineConfig {
    /// Apply `ENTANGLE_*` variables. An embedding or generation URL switches
    /// the corresponding provider to remote.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        let get = |k: &str| get(k).filter(|v| !v.is_empty());
        if let Some(url) = get(ENV_EMBED_URL) {
            self.embedding.kind = ProviderKind::Remote;
            self.embedding.endpoint = Some(url);
        }
        if let Some(key) = get(ENV_EMBED_KEY) {
            self.embedding.api_key = Some(key);
        }
        if let Some(url) = get(ENV_LLM_URL) {
            self.generation.provider_kind = GeneratorKind::Remote;
            self.llm.endpoint = Some(url);
        }
        if let Some(key) = get(ENV_LLM_KEY) {
            self.llm.api_key = Some(key);
        }
        if let Some(model) = get(ENV_LLM_MODEL) {
            self.llm.model = model;
        }
        if let Some(bind) = get(ENV_BIND) {
            self.service_bind = bind;
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        for p in [&self.library_path, &self.scenario_path, &self.templates_dir]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(EngineError::Io {
                    path: p.display().to_string(),
                    message: "no such file or directory".into(),
                });
            }
        }
        self.embedding.validate()?;
        self.generation.validate()?;
        if self.generation.provider_kind == GeneratorKind::Remote {
            self.llm
                .validate()
                .map_err(|e| EngineError::Synthesis(e.into()))?;
        }
        self.kappa.validate()?;
        self.mix.validate()?;
        self.scenario.buckets.validate()?;
        self.evaluation.validate()?;
        if self.service_bind.parse::<std::net::SocketAddr>().is_err() {
            return Err(EngineError::Config(format!(
                "service_bind {:?} is not host:port",
                self.service_bind
            )));
        }
        Ok(())
    }
}

/// Body of a synthesis call: which heuristics to use and how to frame them.
/// Selection defaults to the top three activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeDescriptor {
    /// Scenario; the engine's default profile when absent.
    #[serde(default)]
    pub profile: Option<SixCProfile>,
    #[serde(default = "default_framing")]
    pub framing: FramingKind,
    #[serde(default)]
    pub top_n: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Restrict candidates to these axioms.
    #[serde(default)]
    pub axiom_ids: Option<Vec<String>>,
    #[serde(default)]
    pub baseline: bool,
}

fn default_framing() -> FramingKind {
    FramingKind::Dominant
}

impl Default for SynthesizeDescriptor {
    fn default() -> Self {
        Self {
            profile: None,
            framing: FramingKind::Dominant,
            top_n: None,
            threshold: None,
            axiom_ids: None,
            baseline: false,
        }
    }
}

impl SynthesizeDescriptor {
    fn selector(&self) -> Selector {
        Selector {
            top_n: Some(self.top_n.unwrap_or(3)),
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateDescriptor {
    pub synthesis: String,
    /// Ids of the axioms the synthesis was built from.
    pub inputs: Vec<String>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub human_depth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareDescriptor {
    pub entangled: EvaluationReport,
    pub baseline: EvaluationReport,
}

/// Entangled and baseline syntheses for one scenario under one generation
/// config, each scored against its own selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRun {
    pub entangled: SynthesisResult,
    pub baseline: SynthesisResult,
    pub entangled_report: EvaluationReport,
    pub baseline_report: EvaluationReport,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderStatus {
    pub kind: String,
    pub model: String,
    pub ready: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub library_size: usize,
    pub embedding: ProviderStatus,
    pub generation: ProviderStatus,
}

pub struct Engine {
    config: EngineConfig,
    library: AxiomLibrary,
    default_profile: SixCProfile,
    embedder: Arc<dyn EmbeddingProvider>,
    generator: Arc<dyn TextGenerator>,
    templates: TemplateSet,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("library", &self.library.len())
            .field("embedder", &self.embedder.model_name())
            .field("generator", &self.generator.name())
            .finish()
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let library = match &config.library_path {
            Some(p) => AxiomLibrary::load(p)?,
            None => AxiomLibrary::bundled_meta_case(),
        };
        let default_profile = match &config.scenario_path {
            Some(p) => SixCProfile::load(p)?,
            None => SixCProfile::meta_case(),
        };
        let templates = match &config.templates_dir {
            Some(d) => TemplateSet::from_dir(d)?,
            None => TemplateSet::default(),
        };
        let embedder = config.embedding.build()?;
        let generator: Arc<dyn TextGenerator> = match config.generation.provider_kind {
            GeneratorKind::DeterministicMock => Arc::new(MockGenerator),
            GeneratorKind::Remote => {
                Arc::new(RemoteGenerator::new(config.llm.clone()).map_err(SynthesisError::from)?)
            }
        };
        Ok(Self {
            config,
            library,
            default_profile,
            embedder,
            generator,
            templates,
        })
    }

    /// Engine with explicit parts, bypassing file and provider resolution.
    pub fn from_parts(
        config: EngineConfig,
        library: AxiomLibrary,
        default_profile: SixCProfile,
        embedder: Arc<dyn EmbeddingProvider>,
        generator: Arc<dyn TextGenerator>,
    ) -> Self {
        Self {
            config,
            library,
            default_profile,
            embedder,
            generator,
            templates: TemplateSet::default(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn library(&self) -> &AxiomLibrary {
        &self.library
    }

    pub fn default_profile(&self) -> &SixCProfile {
        &self.default_profile
    }

    pub fn embedder(&self) -> &dyn EmbeddingProvider {
        self.embedder.as_ref()
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    /// SHA-256 of the library's canonical JSON.
    pub fn library_fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.library.to_json_pretty().as_bytes()))
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            version: VERSION.into(),
            library_size: self.library.len(),
            embedding: ProviderStatus {
                kind: serde_json::to_value(self.embedder.kind())
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                model: self.embedder.model_name().into(),
                ready: true,
            },
            generation: ProviderStatus {
                kind: self.generator.name().into(),
                model: match self.config.generation.provider_kind {
                    GeneratorKind::DeterministicMock => MockGenerator::MODEL.into(),
                    GeneratorKind::Remote => self.config.llm.model.clone(),
                },
                ready: self.generator.ready(),
            },
        }
    }

    fn subset(&self, ids: Option<&[String]>) -> Result<AxiomLibrary, EngineError> {
        match ids {
            Some(ids) => Ok(self.library.select_ids(ids)?),
            None => Ok(self.library.clone()),
        }
    }

    fn activations_over(
        &self,
        profile: &SixCProfile,
        lib: &AxiomLibrary,
    ) -> Result<ActivationSet, EngineError> {
        if lib.is_empty() {
            return Ok(ActivationSet::new(profile.label(), Vec::new()));
        }
        let s = embed_scenario(profile, self.embedder(), &self.config.scenario)?;
        Ok(compute_activations(
            profile.label(),
            &s,
            lib,
            self.embedder(),
            self.config.views.activation,
        )?)
    }

    /// Activation of every library axiom under `profile`.
    pub fn activations(&self, profile: &SixCProfile) -> Result<ActivationSet, EngineError> {
        self.activations_over(profile, &self.library)
    }

    /// Interference matrix over the library (or `ids`), optionally with a
    /// different kappa scheme than configured.
    pub fn matrix(
        &self,
        scheme: Option<KappaScheme>,
        ids: Option<&[String]>,
    ) -> Result<InterferenceMatrix, EngineError> {
        let lib = self.subset(ids)?;
        let cfg = KappaConfig {
            scheme: scheme.unwrap_or(self.config.kappa.scheme),
            ..self.config.kappa
        };
        Ok(build_interference_matrix(
            &lib,
            self.embedder(),
            &cfg,
            self.config.views.interference,
        )?)
    }

    pub fn graph(
        &self,
        profile: &SixCProfile,
        top_n: usize,
    ) -> Result<CompositionGraph, EngineError> {
        let act = self.activations(profile)?;
        let m = self.matrix(None, None)?;
        Ok(export_graph(&act, &m, top_n)?)
    }

    /// Entangled (or, with `baseline`, rule-ranking) synthesis.
    pub fn synthesize(&self, d: &SynthesizeDescriptor) -> Result<SynthesisResult, EngineError> {
        let profile = d.profile.as_ref().unwrap_or(&self.default_profile);
        let lib = self.subset(d.axiom_ids.as_deref())?;
        let act = self.activations_over(profile, &lib)?;
        if d.baseline {
            return Ok(run_baseline(
                profile,
                &act,
                &lib,
                &self.config.generation,
                self.generator.as_ref(),
            )?);
        }
        let selection = select_heuristics(&act, &lib, d.selector())?;
        if selection.is_empty() {
            return Err(SynthesisError::EmptySelection.into());
        }
        let ids = selection.ids();
        let selected_lib = lib.select_ids(&ids)?;
        let m = build_interference_matrix(
            &selected_lib,
            self.embedder(),
            &self.config.kappa,
            self.config.views.interference,
        )?;
        let req = SynthesisRequest {
            scenario: profile.clone(),
            buckets: self.config.scenario.buckets,
            selected: selection.selected.clone(),
            matrix_slice: m.slice(&ids)?,
            framing: self.templates.framing_for(d.framing),
            top_n: d.top_n.unwrap_or(ids.len()),
            generation: self.config.generation.clone(),
        };
        let mut result = synthesize(&req, self.generator.as_ref(), &self.templates)?;
        result.warnings = selection.warnings;
        result.field_alignment = Some(self.field_alignment(&act, &selected_lib, &m)?);
        Ok(result)
    }

    fn field_alignment(
        &self,
        act: &ActivationSet,
        selected: &AxiomLibrary,
        m: &InterferenceMatrix,
    ) -> Result<Vec<(String, f64)>, EngineError> {
        let ids = selected.ids();
        let sub = ActivationSet::new(
            act.scenario_ref.clone(),
            act.entries
                .iter()
                .filter(|e| selected.get(&e.axiom_id).is_some())
                .cloned()
                .collect(),
        );
        let texts: Vec<String> = selected
            .iter()
            .map(|a| self.config.views.interference.text(a))
            .collect();
        let vecs: HashMap<String, _> = ids
            .iter()
            .cloned()
            .zip(self.embedder.batch_embed(&texts)?)
            .collect();
        let field = compose_field(&sub, m, &vecs, &self.config.mix)?;
        Ok(field.alignment(&ids, &vecs)?)
    }

    fn inputs_of(&self, ids: &[String]) -> Result<Vec<Axiom>, EngineError> {
        if ids.is_empty() {
            return Err(EvalError::EmptyInputs.into());
        }
        ids.iter()
            .map(|id| {
                self.library
                    .get(id)
                    .cloned()
                    .ok_or_else(|| LibraryError::UnknownId(id.clone()).into())
            })
            .collect()
    }

    pub fn evaluate(&self, d: &EvaluateDescriptor) -> Result<EvaluationReport, EngineError> {
        let inputs = self.inputs_of(&d.inputs)?;
        let mut report = evaluate(
            d.label.as_deref().unwrap_or("synthesis"),
            &d.synthesis,
            &inputs,
            self.embedder(),
            &self.config.evaluation,
        )?;
        report.human_depth = d.human_depth;
        report.validate()?;
        Ok(report)
    }

    pub fn compare(&self, d: &CompareDescriptor) -> Result<Comparison, EngineError> {
        d.entangled.validate()?;
        d.baseline.validate()?;
        Ok(compare(&d.entangled, &d.baseline)?)
    }

    pub fn radar(&self, reports: &[EvaluationReport]) -> Result<RadarData, EngineError> {
        for r in reports {
            r.validate()?;
        }
        Ok(radar_export(reports)?)
    }

    /// Run the entangled and baseline paths for the same scenario and score
    /// both. Both calls use this engine's single `GenerationConfig`.
    pub fn comparison_run(&self, d: &SynthesizeDescriptor) -> Result<ComparisonRun, EngineError> {
        let entangled = self.synthesize(&SynthesizeDescriptor {
            baseline: false,
            ..d.clone()
        })?;
        let baseline = self.synthesize(&SynthesizeDescriptor {
            baseline: true,
            ..d.clone()
        })?;
        let score = |r: &SynthesisResult, label: String| {
            self.evaluate(&EvaluateDescriptor {
                synthesis: r.narrative.clone(),
                inputs: selected_ids(&r.request_echo),
                label: Some(label),
                human_depth: None,
            })
        };
        let entangled_report = score(&entangled, format!("entangled ({})", d.framing))?;
        let baseline_report = score(&baseline, "rule-ranking baseline".into())?;
        let comparison = compare(&entangled_report, &baseline_report)?;
        Ok(ComparisonRun {
            entangled,
            baseline,
            entangled_report,
            baseline_report,
            comparison,
        })
    }

    /// Audit record for one command; written when `audit_dir` is set.
    pub fn audit(
        &self,
        command: &str,
        inputs: &impl Serialize,
        outputs: &impl Serialize,
    ) -> Result<Option<PathBuf>, EngineError> {
        let Some(dir) = &self.config.audit_dir else {
            return Ok(None);
        };
        let record = AuditRecord::new(
            command,
            &self.library_fingerprint(),
            inputs,
            &self.config,
            outputs,
            self.templates(),
        );
        write_audit(dir, &record).map(Some)
    }
}

/// Ids of the heuristics a synthesis was built from, in selection order.
pub fn selected_ids(echo: &RequestEcho) -> Vec<String> {
    let selected = match echo {
        RequestEcho::Entangled(r) => &r.selected,
        RequestEcho::Baseline(r) => &r.selected,
    };
    selected.iter().map(|s| s.axiom.id.clone()).collect()
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> EngineError {
    EngineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
