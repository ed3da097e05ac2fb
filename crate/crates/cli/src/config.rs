//! Command line, validated run configuration and model selection.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use spectral_mesh::adjoint::Completion;
use spectral_mesh::models::dynamo::{self, DynamoParams, Profile};
use spectral_mesh::models::string::{self, StringParams};
use spectral_mesh::models::{parse_node_labels, MeshNode};
use spectral_mesh::Family;

use crate::custom::CustomSpec;
use crate::error::{config, CliError, Step};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "spectral-mesh",
    version,
    about = "Spectral meshes, eigenvalue splitting and instability tongues"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    String,
    Dynamo,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CompletionKind {
    /// Orthonormal complement of the boundary rows.
    Orthogonal,
    /// Dynamo only: the rows `u'(0)`, `u'(1)`.
    BoundaryDerivatives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, value_enum, default_value = "string")]
    pub model: ModelKind,
    /// JSON problem description for `--model custom`.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Defaults to json for `.json` outputs, csv otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Collocation nodes of the oracle.
    #[arg(long, global = true, default_value_t = 64)]
    pub n_nodes: usize,
    /// Strictly decreasing perturbation sizes for drift fits.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_value = "1e-3,5e-4,2.5e-4"
    )]
    pub eps: Vec<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "orthogonal")]
    pub completion: CompletionKind,
    /// Dynamo profile: `cos:K` for cos(2 pi K x) or `series:J=A,...` for
    /// sum A cos(J pi x).
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Rotation speed (string); VALUE or A..B.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Spring stiffness (string).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Damping (string).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d: Option<String>,
    /// Friction (string).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Mean alpha (dynamo).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha0: Option<String>,
    /// Profile amplitude (dynamo).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Boundary parameter (dynamo), in [0, 1].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Any parameter by name: NAME=VALUE or NAME=A..B.
    #[arg(long = "param", global = true, allow_hyphen_values = true)]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Subcommand)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Eigenvalue branches along one swept parameter.
    Mesh {
        /// Mode indices up to this bound.
        #[arg(long, default_value_t = 10)]
        modes: u32,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// closed-form for string and dynamo, oracle for custom.
        #[arg(long, value_enum)]
        source: Option<Source>,
        /// Oracle search box RE0,RE1,IM0,IM1.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', num_args = 1)]
        window: Option<Vec<f64>>,
    },
    /// Crossings of the unperturbed branches.
    Nodes {
        #[arg(long, default_value_t = 6)]
        modes: u32,
    },
    /// First-order splitting of a double eigenvalue at a node.
    Split {
        /// n,eps,m,delta (e.g. 1,-,2,+) or n,m,eps,delta (e.g. 1,2,+,+).
        #[arg(long, allow_hyphen_values = true)]
        node: String,
        /// Direction NAME[=WEIGHT],..., e.g. `beta` or `omega=1,k=0.5`.
        #[arg(long)]
        dir: String,
        /// Also track the eigenvalues with the oracle and fit the residual.
        #[arg(long)]
        oracle: bool,
        /// Oracle search radius around the node.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Instability regions on a grid of two parameters.
    Tongues {
        /// Node for the string model.
        #[arg(long, allow_hyphen_values = true)]
        node: Option<String>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Dynamo: also classify the oscillatory ellipses for n up to this.
        #[arg(long, default_value_t = 0)]
        ellipses: u32,
    },
    /// Cross-checks between closed forms, the generic machinery and the oracle.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        node: Option<String>,
        #[arg(long)]
        dir: Option<String>,
        /// Random function pairs for the Lagrange identity.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Custom model: oracle search box RE0,RE1,IM0,IM1.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', num_args = 1)]
        window: Option<Vec<f64>>,
    },
    /// Boundary matrices, adjoint boundary matrices and concomitant at one point.
    AdjointDump {
        /// RE,IM
        #[arg(
            long,
            allow_hyphen_values = true,
            value_delimiter = ',',
            num_args = 1,
            default_value = "0,0"
        )]
        lambda: Vec<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mesh { .. } => "mesh",
            Command::Nodes { .. } => "nodes",
            Command::Split { .. } => "split",
            Command::Tongues { .. } => "tongues",
            Command::Verify { .. } => "verify",
            Command::AdjointDump { .. } => "adjoint-dump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    /// `samples` evenly spaced points including both ends.
    pub fn linspace(&self, samples: usize) -> Vec<f64> {
        if samples == 1 {
            return vec![self.lo];
        }
        (0..samples)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (samples - 1) as f64)
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Setting {
    Value(f64),
    Range(Range),
}

fn parse_number(s: &str, what: &str) -> Result<f64, CliError> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| config(format!("{what}: '{s}' is not a number")))?;
    if !x.is_finite() {
        return Err(config(format!("{what}: value must be finite")));
    }
    Ok(x)
}

/// `VALUE` or `A..B` with `A < B`.
pub fn parse_setting(s: &str, what: &str) -> Result<Setting, CliError> {
    match s.split_once("..") {
        None => Ok(Setting::Value(parse_number(s, what)?)),
        Some((a, b)) => {
            let (lo, hi) = (parse_number(a, what)?, parse_number(b, what)?);
            if lo >= hi {
                return Err(config(format!("{what}: range {s} is empty")));
            }
            Ok(Setting::Range(Range { lo, hi }))
        }
    }
}

/// Model with its resolved profile or problem description.
#[derive(Debug, Clone)]
pub enum Model {
    String,
    Dynamo(Profile),
    Custom(CustomSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLabel {
    pub n: i64,
    pub eps: i32,
    pub m: i64,
    pub delta: i32,
}

fn sign_token(s: &str) -> Option<i32> {
    match s.trim() {
        "+" => Some(1),
        "-" => Some(-1),
        _ => None,
    }
}

/// `n,eps,m,delta` or `n,m,eps,delta`; signs are `+`/`-` (`+1`/`-1` also
/// accepted in the first form).
pub fn parse_node(s: &str) -> Result<NodeLabel, CliError> {
    let t: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || {
        config(format!(
            "node '{s}': expected n,eps,m,delta or n,m,eps,delta"
        ))
    };
    if t.len() != 4 {
        return Err(bad());
    }
    if sign_token(t[1]).is_none() {
        if let (Some(eps), Some(delta)) = (sign_token(t[2]), sign_token(t[3])) {
            let n = t[0].parse().map_err(|_| bad())?;
            let m = t[1].parse().map_err(|_| bad())?;
            return Ok(NodeLabel { n, eps, m, delta });
        }
    }
    let (n, eps, m, delta) = parse_node_labels(s).ok_or_else(bad)?;
    Ok(NodeLabel { n, eps, m, delta })
}

pub fn sign_label(s: i32) -> &'static str {
    if s < 0 {
        "-"
    } else {
        "+"
    }
}

fn parse_profile(s: &str) -> Result<Profile, CliError> {
    let bad = || config(format!("profile '{s}': expected cos:K or series:J=A,..."));
    if let Some(k) = s.strip_prefix("cos:") {
        let k: u32 = k.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(config("profile cos:0 has nonzero mean"));
        }
        return Ok(Profile::cos_k(k));
    }
    let terms = s.strip_prefix("series:").ok_or_else(bad)?;
    let mut out = Vec::new();
    for term in terms.split(',') {
        let (j, a) = term.split_once('=').ok_or_else(bad)?;
        out.push((
            j.trim().parse::<u32>().map_err(|_| bad())?,
            parse_number(a, "profile")?,
        ));
    }
    Profile::cosine(out).map_err(|e| config(format!("profile '{s}': {e}")))
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::String => "string",
            Model::Dynamo(_) => "dynamo",
            Model::Custom(_) => "custom",
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Model::String => ["omega", "k", "d", "mu"].map(String::from).to_vec(),
            Model::Dynamo(_) => ["alpha0", "gamma", "beta"].map(String::from).to_vec(),
            Model::Custom(spec) => spec.parameters.clone(),
        }
    }

    pub fn defaults(&self) -> Vec<f64> {
        match self {
            Model::String => vec![0.0; 4],
            Model::Dynamo(_) => vec![0.0; 3],
            Model::Custom(spec) => spec.p0.clone(),
        }
    }

    pub fn family(&self, p: &[f64]) -> Result<Family, CliError> {
        match self {
            Model::String => {
                string::string_problem(&StringParams::from_slice(p)).step("string family")
            }
            Model::Dynamo(profile) => {
                dynamo::dynamo_problem(&DynamoParams::new(p[0], p[1], p[2], profile.clone()))
                    .step("dynamo family")
            }
            Model::Custom(spec) => spec.family(p),
        }
    }

    pub fn node(&self, label: NodeLabel) -> Result<MeshNode, CliError> {
        let NodeLabel { n, eps, m, delta } = label;
        let node = match self {
            Model::String => string::node(n, eps, m, delta),
            Model::Dynamo(_) => dynamo::node(n, eps, m, delta),
            Model::Custom(_) => {
                return Err(config(
                    "nodes are defined for the string and dynamo models only",
                ))
            }
        }
        .map_err(|e| config(format!("node: {e}")))?;
        if !node.is_double() {
            return Err(config("node is critical or has more than two branches"));
        }
        Ok(node)
    }
}

/// Everything that determines the output. Serialized (without the output
/// destination) for the configuration hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSpec>,
    pub settings: BTreeMap<String, Setting>,
    pub n_nodes: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub completion: CompletionKind,
    #[serde(skip)]
    pub resolved: Option<Model>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn infer_format(output: Option<&Path>) -> Format {
    match output.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let c = cli.common;
        let model = match c.model {
            ModelKind::String => Model::String,
            ModelKind::Dynamo => {
                Model::Dynamo(parse_profile(c.profile.as_deref().unwrap_or("cos:1"))?)
            }
            ModelKind::Custom => {
                let path = c
                    .spec
                    .as_ref()
                    .ok_or_else(|| config("--model custom needs --spec FILE"))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
                Model::Custom(CustomSpec::parse(&text)?)
            }
        };
        if c.model != ModelKind::Custom && c.spec.is_some() {
            return Err(config("--spec applies to --model custom only"));
        }
        if c.model != ModelKind::Dynamo && c.profile.is_some() {
            return Err(config("--profile applies to --model dynamo only"));
        }
        if c.model != ModelKind::Dynamo && c.completion == CompletionKind::BoundaryDerivatives {
            return Err(config(
                "--completion boundary-derivatives applies to --model dynamo only",
            ));
        }

        let names = model.param_names();
        let mut settings = BTreeMap::new();
        let flags = [
            ("omega", &c.omega),
            ("k", &c.k),
            ("d", &c.d),
            ("mu", &c.mu),
            ("alpha0", &c.alpha0),
            ("gamma", &c.gamma),
            ("beta", &c.beta),
        ];
        let mut add = |name: &str, raw: &str| -> Result<(), CliError> {
            if !names.iter().any(|n| n == name) {
                return Err(config(format!(
                    "parameter '{name}' does not belong to the {} model (parameters: {})",
                    model.kind(),
                    names.join(", ")
                )));
            }
            if settings
                .insert(name.to_string(), parse_setting(raw, name)?)
                .is_some()
            {
                return Err(config(format!("parameter '{name}' given twice")));
            }
            Ok(())
        };
        for (name, raw) in flags {
            if let Some(raw) = raw {
                add(name, raw)?;
            }
        }
        for p in &c.params {
            let (name, raw) = p
                .split_once('=')
                .ok_or_else(|| config(format!("--param '{p}': expected NAME=VALUE")))?;
            add(name.trim(), raw)?;
        }

        if let Some(Setting::Value(b)) = settings.get("beta") {
            if !(0.0..=1.0).contains(b) {
                return Err(config("beta must lie in [0, 1]"));
            }
        }
        if let Some(Setting::Range(r)) = settings.get("beta") {
            if r.lo < 0.0 || r.hi > 1.0 {
                return Err(config("beta must lie in [0, 1]"));
            }
        }
        if c.n_nodes < 8 {
            return Err(config("--n-nodes must be at least 8"));
        }
        if c.eps.len() < 3 {
            return Err(config("--eps needs at least three values"));
        }
        if c.eps.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || c.eps.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(config(
                "--eps values must be positive and strictly decreasing",
            ));
        }

        let format = c
            .format
            .unwrap_or_else(|| infer_format(c.output.as_deref()));
        Ok(RunConfig {
            command: cli.command,
            model: c.model,
            profile: if c.model == ModelKind::Dynamo {
                Some(c.profile.unwrap_or_else(|| "cos:1".into()))
            } else {
                None
            },
            custom: match &model {
                Model::Custom(spec) => Some(spec.clone()),
                _ => None,
            },
            settings,
            n_nodes: c.n_nodes,
            eps: c.eps,
            seed: c.seed,
            completion: c.completion,
            resolved: Some(model),
            output: c.output,
            format,
        })
    }

    pub fn model(&self) -> &Model {
        self.resolved.as_ref().expect("resolved model")
    }

    /// Hex SHA-256 of the serialized configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn completion(&self) -> Completion<f64> {
        match self.completion {
            CompletionKind::Orthogonal => Completion::Orthogonal,
            CompletionKind::BoundaryDerivatives => dynamo::paper_completion(),
        }
    }

    pub fn ranges(&self) -> Vec<(String, Range)> {
        self.settings
            .iter()
            .filter_map(|(k, s)| match s {
                Setting::Range(r) => Some((k.clone(), *r)),
                Setting::Value(_) => None,
            })
            .collect()
    }

    pub fn range(&self, name: &str) -> Option<Range> {
        match self.settings.get(name) {
            Some(Setting::Range(r)) => Some(*r),
            _ => None,
        }
    }

    /// Fails when a parameter other than `allowed` was given as a range.
    pub fn only_ranges(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (name, _) in self.ranges() {
            if !allowed.contains(&name.as_str()) {
                return Err(config(format!(
                    "{}: parameter '{name}' cannot be a range here",
                    self.command.name()
                )));
            }
        }
        Ok(())
    }

    /// Fails when any parameter was given at all.
    pub fn no_settings(&self, why: &str) -> Result<(), CliError> {
        match self.settings.keys().next() {
            Some(name) => Err(config(format!(
                "{}: '{name}' not accepted; {why}",
                self.command.name()
            ))),
            None => Ok(()),
        }
    }

    /// Parameter vector: model defaults overridden by single values.
    /// Ranged parameters keep their default.
    pub fn point(&self) -> Vec<f64> {
        let model = self.model();
        let mut p = model.defaults();
        for (i, name) in model.param_names().iter().enumerate() {
            if let Some(Setting::Value(x)) = self.settings.get(name) {
                p[i] = *x;
            }
        }
        p
    }

    pub fn index(&self, name: &str) -> usize {
        self.model()
            .param_names()
            .iter()
            .position(|n| n == name)
            .expect("known parameter")
    }

    /// `NAME[=WEIGHT],...` into a direction vector.
    pub fn direction(&self, s: &str) -> Result<Vec<f64>, CliError> {
        let names = self.model().param_names();
        let mut dir = vec![0.0; names.len()];
        for part in s.split(',') {
            let (name, w) = match part.split_once('=') {
                Some((n, w)) => (n.trim(), parse_number(w, "direction")?),
                None => (part.trim(), 1.0),
            };
            let i = names.iter().position(|n| n == name).ok_or_else(|| {
                config(format!(
                    "direction: unknown parameter '{name}' (parameters: {})",
                    names.join(", ")
                ))
            })?;
            dir[i] += w;
        }
        if dir.iter().all(|&x| x == 0.0) {
            return Err(config("direction is zero"));
        }
        Ok(dir)
    }
}
