//! Argument parsing and validation.
//!
//! Flags may also come from a flat JSON file named by `--config`, keyed by
//! flag name without the leading dashes. Flags on the command line win.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Beta0,
    Vertex,
    Factorize,
    MassFlow,
    CouplingFlow,
    Validity,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Coeffs,
        Command::Beta0,
        Command::Vertex,
        Command::Factorize,
        Command::MassFlow,
        Command::CouplingFlow,
        Command::Validity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Beta0 => "beta0",
            Command::Vertex => "vertex",
            Command::Factorize => "factorize",
            Command::MassFlow => "mass-flow",
            Command::CouplingFlow => "coupling-flow",
            Command::Validity => "validity",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|c| c.name()).collect();
                CliError::usage(format!(
                    "unknown command '{s}'; expected one of {}",
                    names.join(", ")
                ))
            })
    }

    /// Flags this command reads, beyond `--format`, `--out` and `--config`.
    fn flags(&self) -> &'static [&'static str] {
        match self {
            Command::Coeffs => &["l", "m0sq"],
            Command::Beta0 => &["l", "m0sq", "mu", "lambda0"],
            Command::Vertex => &["l", "m0sq", "mu", "s", "t", "u"],
            Command::Factorize => &["beta-2", "beta-1", "beta-0", "gauge"],
            Command::MassFlow => &[
                "l",
                "m0sq-init",
                "lambda0",
                "mu-s",
                "mu-start",
                "mu-end",
                "points",
                "scale",
                "tol",
            ],
            Command::CouplingFlow => &[
                "l", "m0sq", "lambda-s", "mu-s", "mu-start", "mu-end", "points", "scale",
            ],
            Command::Validity => &["l", "m0sq", "lambda-s", "mu-s", "as-distance"],
        }
    }
}

const COMMON_FLAGS: [&str; 2] = ["format", "out"];

#[derive(Parser, Debug)]
#[command(
    name = "phirg",
    version,
    about = "Observable-state renormalization of scalar phi^l theories",
    after_help = "Commands: coeffs, beta0, vertex, factorize, mass-flow, coupling-flow, validity"
)]
struct Args {
    /// coeffs | beta0 | vertex | factorize | mass-flow | coupling-flow | validity
    command: Option<String>,
    /// Interaction power (even, >= 4)
    #[arg(long, allow_hyphen_values = true)]
    l: Option<String>,
    /// Bare mass squared
    #[arg(long, allow_hyphen_values = true)]
    m0sq: Option<String>,
    /// Bare mass squared at the reference scale of a mass flow
    #[arg(long, allow_hyphen_values = true)]
    m0sq_init: Option<String>,
    /// Bare coupling
    #[arg(long, allow_hyphen_values = true)]
    lambda0: Option<String>,
    /// Coupling at the reference scale
    #[arg(long, allow_hyphen_values = true)]
    lambda_s: Option<String>,
    /// Renormalization scale
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Reference scale of a flow
    #[arg(long, allow_hyphen_values = true)]
    mu_s: Option<String>,
    /// First scale of a sweep
    #[arg(long, allow_hyphen_values = true)]
    mu_start: Option<String>,
    /// Last scale of a sweep
    #[arg(long, allow_hyphen_values = true)]
    mu_end: Option<String>,
    /// Number of sweep points
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// Sweep spacing: log | linear
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<String>,
    /// Local error tolerance of the adaptive integrator
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Mandelstam s
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Mandelstam t
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Mandelstam u
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Diagonal weight of the first loop in a two-loop factorization
    #[arg(long, allow_hyphen_values = true)]
    gauge: Option<String>,
    /// Double-pole coefficient
    #[arg(long = "beta-2", allow_hyphen_values = true)]
    beta_2: Option<String>,
    /// Single-pole coefficient
    #[arg(long = "beta-1", allow_hyphen_values = true)]
    beta_1: Option<String>,
    /// Finite coefficient
    #[arg(long = "beta-0", allow_hyphen_values = true)]
    beta_0: Option<String>,
    /// Report validity intervals in distance d = 1/mu
    #[arg(long)]
    as_distance: bool,
    /// Output format: json | csv
    #[arg(long, allow_hyphen_values = true)]
    format: Option<String>,
    /// Write output to this path instead of stdout
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
    /// Flat JSON file of flag values
    #[arg(long, allow_hyphen_values = true)]
    config: Option<String>,
}

impl Args {
    fn provided(&self) -> Vec<(&'static str, String)> {
        let opt = [
            ("l", &self.l),
            ("m0sq", &self.m0sq),
            ("m0sq-init", &self.m0sq_init),
            ("lambda0", &self.lambda0),
            ("lambda-s", &self.lambda_s),
            ("mu", &self.mu),
            ("mu-s", &self.mu_s),
            ("mu-start", &self.mu_start),
            ("mu-end", &self.mu_end),
            ("points", &self.points),
            ("scale", &self.scale),
            ("tol", &self.tol),
            ("s", &self.s),
            ("t", &self.t),
            ("u", &self.u),
            ("gauge", &self.gauge),
            ("beta-2", &self.beta_2),
            ("beta-1", &self.beta_1),
            ("beta-0", &self.beta_0),
            ("format", &self.format),
            ("out", &self.out),
        ];
        let mut v: Vec<_> = opt
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.as_distance {
            v.push(("as-distance", "true".into()));
        }
        v
    }
}

const ALL_FLAGS: [&str; 22] = [
    "l",
    "m0sq",
    "m0sq-init",
    "lambda0",
    "lambda-s",
    "mu",
    "mu-s",
    "mu-start",
    "mu-end",
    "points",
    "scale",
    "tol",
    "s",
    "t",
    "u",
    "gauge",
    "beta-2",
    "beta-1",
    "beta-0",
    "as-distance",
    "format",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Log,
    Linear,
}

impl Scale {
    pub fn name(&self) -> &'static str {
        match self {
            Scale::Log => "log",
            Scale::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Sweep {
    /// Grid points in ascending order, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.end;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.end - self.start) * f,
                    Scale::Log => (self.start.ln() + (self.end.ln() - self.start.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

/// Validated inputs of one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Coeffs {
        l: u32,
        m0sq: f64,
    },
    Beta0 {
        l: u32,
        m0sq: f64,
        mu: f64,
        lambda0: Option<f64>,
    },
    Vertex {
        l: u32,
        m0sq: f64,
        mu: f64,
        channels: Option<Vec<f64>>,
    },
    Factorize {
        beta: Vec<f64>,
        gauge: f64,
    },
    MassFlow {
        l: u32,
        m0sq_init: f64,
        lambda0: f64,
        mu_s: f64,
        sweep: Sweep,
        tol: f64,
    },
    CouplingFlow {
        l: u32,
        m0sq: f64,
        lambda_s: f64,
        mu_s: f64,
        sweep: Sweep,
    },
    Validity {
        l: u32,
        m0sq: f64,
        lambda_s: f64,
        mu_s: f64,
        as_distance: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub task: Task,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// What a raw argv parse produced.
#[derive(Debug)]
pub enum Parsed {
    Run(Box<RunConfig>),
    /// `--help` or `--version`: print the text and exit successfully.
    Info(String),
}

// Merged raw values keyed by flag name, with their origin.
struct Raw {
    values: BTreeMap<&'static str, String>,
}

impl Raw {
    fn get(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(|s| s.as_str())
    }

    fn f64_opt(&self, k: &str) -> Result<Option<f64>, CliError> {
        match self.get(k) {
            None => Ok(None),
            Some(s) => match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                Ok(_) => Err(CliError::field(k, format!("'{s}' is not a finite number"))),
                Err(_) => Err(CliError::field(k, format!("'{s}' is not a number"))),
            },
        }
    }

    fn f64_req(&self, k: &str) -> Result<f64, CliError> {
        self.f64_opt(k)?
            .ok_or_else(|| CliError::field(k, "required for this command"))
    }

    fn positive(&self, k: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = match (self.f64_opt(k)?, default) {
            (Some(v), _) => v,
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::field(k, "required for this command")),
        };
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::field(k, format!("must be > 0 (got {v})")))
        }
    }

    fn l(&self) -> Result<u32, CliError> {
        let s = self
            .get("l")
            .ok_or_else(|| CliError::field("l", "required for this command"))?;
        let l: u32 = s
            .trim()
            .parse()
            .map_err(|_| CliError::field("l", format!("'{s}' is not a non-negative integer")))?;
        if l < 4 || !l.is_multiple_of(2) {
            return Err(CliError::field(
                "l",
                format!("must be even and at least 4 (got {l})"),
            ));
        }
        Ok(l)
    }

    // m0sq, defaulting to 1 where it cannot affect the result.
    fn m0sq(&self, l: u32, defaultable: bool) -> Result<f64, CliError> {
        let default = (defaultable && l == 4).then_some(1.0);
        self.positive("m0sq", default)
    }

    fn sweep(&self) -> Result<Sweep, CliError> {
        let start = self.positive("mu-start", None)?;
        let end = self.positive("mu-end", None)?;
        if start >= end {
            return Err(CliError::field(
                "mu-end",
                format!("must exceed --mu-start ({end} <= {start})"),
            ));
        }
        let points = match self.get("points") {
            None => 50,
            Some(s) => s
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::field("points", format!("'{s}' is not a count")))?,
        };
        if !(2..=1_000_000).contains(&points) {
            return Err(CliError::field("points", "must be between 2 and 1000000"));
        }
        let scale = match self.get("scale").unwrap_or("log") {
            "log" => Scale::Log,
            "linear" => Scale::Linear,
            other => {
                return Err(CliError::field(
                    "scale",
                    format!("'{other}' is not log or linear"),
                ))
            }
        };
        Ok(Sweep {
            start,
            end,
            points,
            scale,
        })
    }

    fn nonzero(&self, k: &str) -> Result<f64, CliError> {
        let v = self.f64_req(k)?;
        if v == 0.0 {
            return Err(CliError::field(k, "must be nonzero"));
        }
        Ok(v)
    }
}

fn read_config_file(path: &str) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage {
        message: format!("--config: cannot read '{path}': {e}"),
        field: Some("config".into()),
    })?;
    parse_config_text(&text)
}

/// Flat JSON object of flag values, by flag name.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let bad = |m: String| CliError::Usage {
        message: format!("--config: {m}"),
        field: Some("config".into()),
    };
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let Value::Object(map) = v else {
        return Err(bad("expected a JSON object".into()));
    };
    let mut out = BTreeMap::new();
    for (k, v) in map {
        if k != "command" && !ALL_FLAGS.contains(&k.as_str()) {
            return Err(bad(format!("unknown key '{k}'")));
        }
        let s = match v {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Bool(b) if k == "as-distance" => b.to_string(),
            other => return Err(bad(format!("key '{k}' has unsupported value {other}"))),
        };
        out.insert(k, s);
    }
    Ok(out)
}

// clap parse; help and version requests come back as `Ok(Err(text))`.
fn parse_args(argv: &[String]) -> Result<Result<Args, String>, CliError> {
    use clap::error::ErrorKind;
    match Args::try_parse_from(argv) {
        Ok(a) => Ok(Ok(a)),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            Ok(Err(e.to_string()))
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            Err(CliError::usage(first.trim_start_matches("error: ")))
        }
    }
}

/// Parses argv (program name first), reading the `--config` file if named.
pub fn parse_config(argv: &[String]) -> Result<Parsed, CliError> {
    let args = match parse_args(argv)? {
        Ok(a) => a,
        Err(info) => return Ok(Parsed::Info(info)),
    };
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    build(&args, file)
}

/// Same as [`parse_config`] with the config-file content supplied directly.
pub fn parse_config_with(argv: &[String], config_text: Option<&str>) -> Result<Parsed, CliError> {
    let args = match parse_args(argv)? {
        Ok(a) => a,
        Err(info) => return Ok(Parsed::Info(info)),
    };
    let file = match config_text {
        Some(t) => parse_config_text(t)?,
        None => BTreeMap::new(),
    };
    build(&args, file)
}

fn build(args: &Args, file: BTreeMap<String, String>) -> Result<Parsed, CliError> {
    let command_name = args
        .command
        .clone()
        .or_else(|| file.get("command").cloned())
        .ok_or_else(|| CliError::usage("missing command; expected one of coeffs, beta0, vertex, factorize, mass-flow, coupling-flow, validity"))?;
    let command = Command::parse(&command_name)?;
    let relevant = |k: &str| command.flags().contains(&k) || COMMON_FLAGS.contains(&k);

    let mut values: BTreeMap<&'static str, String> = BTreeMap::new();
    // File values irrelevant to this command are ignored, so one file can
    // serve several commands; on the command line they are mistakes.
    for k in ALL_FLAGS {
        if let Some(v) = file.get(k) {
            if relevant(k) {
                values.insert(k, v.clone());
            }
        }
    }
    for (k, v) in args.provided() {
        if !relevant(k) {
            return Err(CliError::field(
                k,
                format!("not used by '{}'", command.name()),
            ));
        }
        values.insert(k, v);
    }
    if values
        .get("as-distance")
        .is_some_and(|v| v != "true" && v != "false")
    {
        return Err(CliError::field("as-distance", "must be true or false"));
    }
    let raw = Raw { values };

    let format = match raw.get("format").unwrap_or("json") {
        "json" => Format::Json,
        "csv" => Format::Csv,
        other => {
            return Err(CliError::field(
                "format",
                format!("'{other}' is not json or csv"),
            ))
        }
    };
    let out = raw.get("out").map(PathBuf::from);

    let task = match command {
        Command::Coeffs => {
            let l = raw.l()?;
            Task::Coeffs {
                l,
                m0sq: raw.m0sq(l, false)?,
            }
        }
        Command::Beta0 => {
            let l = raw.l()?;
            Task::Beta0 {
                l,
                m0sq: raw.m0sq(l, false)?,
                mu: raw.positive("mu", Some(1.0))?,
                lambda0: raw.f64_opt("lambda0")?,
            }
        }
        Command::Vertex => {
            let l = raw.l()?;
            let stu = [raw.f64_opt("s")?, raw.f64_opt("t")?, raw.f64_opt("u")?];
            let channels = match stu {
                [None, None, None] => None,
                [Some(s), Some(t), Some(u)] => Some(vec![s, t, u]),
                _ => {
                    let missing = ["s", "t", "u"]
                        .into_iter()
                        .zip(stu)
                        .find(|(_, v)| v.is_none())
                        .map(|(k, _)| k)
                        .unwrap_or("s");
                    return Err(CliError::field(
                        missing,
                        "--s, --t and --u must be given together",
                    ));
                }
            };
            Task::Vertex {
                l,
                m0sq: raw.m0sq(l, false)?,
                mu: raw.positive("mu", Some(1.0))?,
                channels,
            }
        }
        Command::Factorize => {
            let mut beta = Vec::new();
            if let Some(b2) = raw.f64_opt("beta-2")? {
                beta.push(b2);
            }
            beta.push(raw.f64_req("beta-1")?);
            beta.push(raw.f64_req("beta-0")?);
            Task::Factorize {
                beta,
                gauge: raw.positive("gauge", Some(1.0))?,
            }
        }
        Command::MassFlow => {
            let l = raw.l()?;
            let sweep = raw.sweep()?;
            Task::MassFlow {
                l,
                m0sq_init: raw.positive("m0sq-init", None)?,
                lambda0: raw.f64_req("lambda0")?,
                mu_s: raw.positive("mu-s", Some(sweep.start))?,
                tol: raw.positive("tol", Some(1e-10))?,
                sweep,
            }
        }
        Command::CouplingFlow => {
            let l = raw.l()?;
            Task::CouplingFlow {
                l,
                m0sq: raw.m0sq(l, true)?,
                lambda_s: raw.nonzero("lambda-s")?,
                mu_s: raw.positive("mu-s", Some(1.0))?,
                sweep: raw.sweep()?,
            }
        }
        Command::Validity => {
            let l = raw.l()?;
            Task::Validity {
                l,
                m0sq: raw.m0sq(l, true)?,
                lambda_s: raw.positive("lambda-s", None)?,
                mu_s: raw.positive("mu-s", Some(1.0))?,
                as_distance: raw.get("as-distance") == Some("true"),
            }
        }
    };
    Ok(Parsed::Run(Box::new(RunConfig {
        command,
        task,
        format,
        out,
    })))
}
