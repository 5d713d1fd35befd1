use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SynthesisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramingKind {
    Dominant,
    Contrarian,
    Minimalist,
}

impl FramingKind {
    pub const ALL: [FramingKind; 3] = [
        FramingKind::Dominant,
        FramingKind::Contrarian,
        FramingKind::Minimalist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FramingKind::Dominant => "dominant",
            FramingKind::Contrarian => "contrarian",
            FramingKind::Minimalist => "minimalist",
        }
    }
}

impl fmt::Display for FramingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FramingKind {
    type Err = SynthesisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FramingKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SynthesisError::UnknownFraming(s.to_string()))
    }
}

/// A framing kind bound to the id of the template that renders it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Framing {
    pub kind: FramingKind,
    pub template_id: String,
}

impl Framing {
    /// Framing bound to the built-in template for `kind`.
    pub fn builtin(kind: FramingKind) -> Self {
        Self {
            kind,
            template_id: format!("{kind}.v1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub text: String,
}

/// Prompt templates: the system message, the output contract and one
/// directive per framing kind. Ids are `{name}.v{version}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub system: Template,
    pub output_contract: Template,
    framings: BTreeMap<FramingKind, Template>,
}

fn builtin(id: &str, text: &str) -> Template {
    Template {
        id: id.to_string(),
        text: text.trim().to_string(),
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self {
            system: builtin("system.v1", include_str!("../../templates/system.v1.txt")),
            output_contract: builtin(
                "output_contract.v1",
                include_str!("../../templates/output_contract.v1.txt"),
            ),
            framings: BTreeMap::from([
                (
                    FramingKind::Dominant,
                    builtin(
                        "dominant.v1",
                        include_str!("../../templates/framing/dominant.v1.txt"),
                    ),
                ),
                (
                    FramingKind::Contrarian,
                    builtin(
                        "contrarian.v1",
                        include_str!("../../templates/framing/contrarian.v1.txt"),
                    ),
                ),
                (
                    FramingKind::Minimalist,
                    builtin(
                        "minimalist.v1",
                        include_str!("../../templates/framing/minimalist.v1.txt"),
                    ),
                ),
            ]),
        }
    }
}

impl TemplateSet {
    /// Load templates from a directory laid out like `templates/` in this
    /// crate. For each name the highest `v{N}` present wins; names missing
    /// from the directory keep their built-in template.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, SynthesisError> {
        let dir = dir.as_ref();
        let mut set = Self::default();
        if let Some(t) = latest_version(dir, "system")? {
            set.system = t;
        }
        if let Some(t) = latest_version(dir, "output_contract")? {
            set.output_contract = t;
        }
        for kind in FramingKind::ALL {
            if let Some(t) = latest_version(&dir.join("framing"), kind.as_str())? {
                set.framings.insert(kind, t);
            }
        }
        Ok(set)
    }

    pub fn framing(&self, kind: FramingKind) -> &Template {
        &self.framings[&kind]
    }

    /// Framing bound to this set's template for `kind`.
    pub fn framing_for(&self, kind: FramingKind) -> Framing {
        Framing {
            kind,
            template_id: self.framing(kind).id.clone(),
        }
    }

    /// Directive text for a framing, checking the template id matches.
    pub fn directive(&self, framing: &Framing) -> Result<&str, SynthesisError> {
        let t = self.framing(framing.kind);
        if t.id != framing.template_id {
            return Err(SynthesisError::UnknownTemplate(framing.template_id.clone()));
        }
        Ok(&t.text)
    }
}

fn latest_version(dir: &Path, name: &str) -> Result<Option<Template>, SynthesisError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(SynthesisError::Template(format!("{}: {e}", dir.display()))),
    };
    let mut best: Option<(u32, std::path::PathBuf)> = None;
    for entry in entries.flatten() {
        let file_name = entry.file_name().to_string_lossy().into_owned();
        let Some(version) = file_name
            .strip_prefix(&format!("{name}.v"))
            .and_then(|rest| rest.strip_suffix(".txt"))
            .and_then(|v| v.parse::<u32>().ok())
        else {
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| version > *b) {
            best = Some((version, entry.path()));
        }
    }
    best.map(|(version, path)| {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| SynthesisError::Template(format!("{}: {e}", path.display())))?;
        Ok(Template {
            id: format!("{name}.v{version}"),
            text: text.trim().to_string(),
        })
    })
    .transpose()
}
