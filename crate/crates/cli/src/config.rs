//! Experiment configuration files (TOML).

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use ontochain::{ChainConfig, ClassicalState, OntState, QState};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    CogwheelVerify,
    ChainReport,
    BchVerify,
    BellDemo,
    Hybrid,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::CogwheelVerify => "cogwheel-verify",
            CommandName::ChainReport => "chain-report",
            CommandName::BchVerify => "bch-verify",
            CommandName::BellDemo => "bell-demo",
            CommandName::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "one")]
    pub updates_before: usize,
    #[serde(default = "one")]
    pub updates_after: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub state: Spanned<String>,
    pub amplitude: Spanned<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    pub state: Spanned<String>,
    #[serde(default = "unit_probability")]
    pub probability: Spanned<f64>,
}

fn unit_probability() -> Spanned<f64> {
    Spanned::new(0..0, 1.0)
}

/// Raw file contents. Every field is optional so one file format serves all
/// subcommands; flags override whatever is set here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandName>,
    pub spins: Option<Spanned<usize>>,
    pub classical_spins: Option<Spanned<usize>>,
    pub timestep: Option<Spanned<f64>>,
    pub n_range: Option<Spanned<[usize; 2]>>,
    pub steps: Option<usize>,
    pub start: Option<Spanned<String>>,
    pub pair_site: Option<Spanned<usize>>,
    pub schedule: Option<ScheduleConfig>,
    #[serde(default = "yes")]
    pub interaction: bool,
    pub sites: Option<Spanned<[usize; 2]>>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub quantum: Vec<BranchConfig>,
    #[serde(default)]
    pub classical: Vec<MemberConfig>,
    pub output_dir: Option<PathBuf>,
    pub tolerance: Option<Spanned<f64>>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

fn yes() -> bool {
    true
}

/// A problem with user input, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Source text kept around to turn byte spans into line numbers.
#[derive(Debug)]
pub struct Source {
    pub path: PathBuf,
    text: String,
}

impl Source {
    pub fn line_of(&self, span: Range<usize>) -> Option<usize> {
        if span.start == span.end && span.start == 0 {
            return None;
        }
        Some(self.text[..span.start.min(self.text.len())].matches('\n').count() + 1)
    }

    /// `path:line: field `name`: msg`, dropping the line when unknown.
    pub fn error(&self, span: Option<Range<usize>>, field: &str, msg: impl fmt::Display) -> UsageError {
        match span.and_then(|s| self.line_of(s)) {
            Some(line) => usage(format!("{}:{line}: field `{field}`: {msg}", self.path.display())),
            None => usage(format!("{}: field `{field}`: {msg}", self.path.display())),
        }
    }
}

pub fn load(path: &Path) -> Result<(ExperimentConfig, Source), UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("{}: cannot read config: {e}", path.display())))?;
    let source = Source {
        path: path.to_path_buf(),
        text,
    };
    let config: ExperimentConfig = toml::from_str(&source.text).map_err(|e| {
        let line = e.span().and_then(|s| source.line_of(s));
        let msg = e.message().trim_end().to_string();
        match line {
            Some(l) => usage(format!("{}:{l}: {msg}", path.display())),
            None => usage(format!("{}: {msg}", path.display())),
        }
    })?;
    Ok((config, source))
}

fn parse_state(source: &Source, field: &str, spanned: &Spanned<String>, spins: usize) -> Result<OntState, UsageError> {
    let state: OntState = spanned
        .get_ref()
        .parse()
        .map_err(|e| source.error(Some(spanned.span()), field, e))?;
    if state.num_spins() != spins {
        return Err(source.error(
            Some(spanned.span()),
            field,
            format!("expected {spins} sites, found {}", state.num_spins()),
        ));
    }
    Ok(state)
}

/// Validated inputs of a hybrid experiment.
#[derive(Debug, Clone)]
pub struct HybridInputs {
    pub quantum_chain: ChainConfig,
    pub classical_chain: ChainConfig,
    pub quantum: QState,
    pub classical: ClassicalState,
    pub schedule: (usize, usize),
    pub sites: Option<(usize, usize)>,
}

impl ExperimentConfig {
    pub fn hybrid_inputs(&self, source: &Source, timestep: f64) -> Result<HybridInputs, UsageError> {
        let spins = self
            .spins
            .as_ref()
            .ok_or_else(|| source.error(None, "spins", "required for hybrid experiments"))?;
        let chain = |s: &Spanned<usize>, field: &str| {
            ChainConfig::new(*s.get_ref(), timestep).map_err(|e| source.error(Some(s.span()), field, e))
        };
        let quantum_chain = chain(spins, "spins")?;
        let classical_chain = match &self.classical_spins {
            Some(s) => chain(s, "classical_spins")?,
            None => quantum_chain,
        };

        if self.quantum.is_empty() {
            return Err(source.error(None, "quantum", "at least one branch is required"));
        }
        let mut branches = Vec::with_capacity(self.quantum.len());
        for (k, b) in self.quantum.iter().enumerate() {
            let state = parse_state(source, &format!("quantum[{k}].state"), &b.state, quantum_chain.num_spins())?;
            let [re, im] = *b.amplitude.get_ref();
            if !(re.is_finite() && im.is_finite()) {
                return Err(source.error(Some(b.amplitude.span()), &format!("quantum[{k}].amplitude"), "not finite"));
            }
            if let Some(prev) = branches.iter().position(|(s, _)| *s == state) {
                return Err(source.error(
                    Some(b.state.span()),
                    &format!("quantum[{k}].state"),
                    format!("duplicates quantum[{prev}]"),
                ));
            }
            branches.push((state, Complex64::new(re, im)));
        }
        let quantum = if self.normalize {
            let v = ontochain::SparseVector::from_pairs(
                quantum_chain.num_spins(),
                branches.iter().map(|(s, a)| (s.index(), *a)),
            )
            .map_err(|e| source.error(None, "quantum", e))?;
            QState::normalized(&v)
        } else {
            QState::from_branches(&branches)
        }
        .map_err(|e| source.error(None, "quantum", format!("{e} (set `normalize = true` to rescale)")))?;

        if self.classical.is_empty() {
            return Err(source.error(None, "classical", "at least one member is required"));
        }
        let mut members = Vec::with_capacity(self.classical.len());
        for (k, m) in self.classical.iter().enumerate() {
            let state =
                parse_state(source, &format!("classical[{k}].state"), &m.state, classical_chain.num_spins())?;
            members.push((*m.probability.get_ref(), state));
        }
        let classical = ClassicalState::new(members).map_err(|e| source.error(None, "classical", e))?;

        let schedule = self
            .schedule
            .as_ref()
            .map(|s| (s.updates_before, s.updates_after))
            .unwrap_or((1, 1));
        let sites = if self.interaction {
            let (i, j) = match &self.sites {
                Some(s) => (s.get_ref()[0], s.get_ref()[1]),
                None => ontochain::hybrid::DEFAULT_SITES,
            };
            let limit = quantum_chain.num_spins().min(classical_chain.num_spins());
            if i == j || !(1..=limit).contains(&i) || !(1..=limit).contains(&j) {
                return Err(source.error(
                    self.sites.as_ref().map(|s| s.span()),
                    "sites",
                    format!("need two distinct sites in 1..={limit}, got ({i}, {j})"),
                ));
            }
            Some((i, j))
        } else {
            None
        };
        Ok(HybridInputs {
            quantum_chain,
            classical_chain,
            quantum,
            classical,
            schedule,
            sites,
        })
    }
}
