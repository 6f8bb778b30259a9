use std::fmt;
use std::path::PathBuf;

use parrondo_core::region::Subcube;
use parrondo_core::{Error, ParamVector, PatternSpec, Rational, Scalar};
use serde::{Deserialize, Serialize};

use crate::args::{Format, GroupChoice, Initial, Mode, Options};

/// Largest ring accepted in rational mode.
pub const RATIONAL_MAX_N: usize = 6;

/// Table rows above this size print a runtime warning.
pub const TABLE_WARN_N: usize = 14;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonErgodic(_)
            | Error::NonStochastic { .. }
            | Error::SolverFailure { .. }
            | Error::ZeroDenominator => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Mean,
    Table,
    Simulate,
    Region,
    Ergodicity,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Mean => "mean",
            CommandKind::Table => "table",
            CommandKind::Simulate => "simulate",
            CommandKind::Region => "region",
            CommandKind::Ergodicity => "ergodicity",
        }
    }

    fn default_format(self) -> Format {
        match self {
            CommandKind::Mean | CommandKind::Ergodicity => Format::Text,
            CommandKind::Table | CommandKind::Simulate | CommandKind::Region => Format::Csv,
        }
    }
}

/// Game schedule with the mixture weight kept as typed, so rational mode
/// can read it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    GameB,
    Pattern { r: usize, s: usize },
    Mixture { gamma: String },
}

impl Schedule {
    pub fn to_spec(&self) -> Result<PatternSpec, CliError> {
        Ok(match self {
            Schedule::GameB => PatternSpec::GameB,
            Schedule::Pattern { r, s } => PatternSpec::pattern(*r, *s)?,
            Schedule::Mixture { gamma } => PatternSpec::mixture(f64::parse_probability(gamma)?)?,
        })
    }
}

/// Everything needed to rerun a job; echoed in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: CommandKind,
    pub n: Option<usize>,
    pub n_range: Option<[usize; 2]>,
    pub params: Option<[String; 4]>,
    pub schedule: Option<Schedule>,
    pub group: GroupChoice,
    pub mode: Mode,
    pub turns: Option<u64>,
    pub seed: u64,
    pub replications: Option<usize>,
    pub reference: Option<f64>,
    pub initial: Initial,
    pub resolution: Option<usize>,
    pub subcube: Option<Subcube>,
    pub reflect: bool,
    pub samples: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl JobConfig {
    /// Ring sizes covered by the job, smallest first.
    pub fn ring_sizes(&self) -> Vec<usize> {
        match (self.n, self.n_range) {
            (_, Some([a, b])) => (a..=b).collect(),
            (Some(n), None) => vec![n],
            (None, None) => vec![],
        }
    }

    pub fn params_f64(&self) -> Result<ParamVector<f64>, CliError> {
        Ok(self.params_rational()?.to_f64())
    }

    pub fn params_rational(&self) -> Result<ParamVector<Rational>, CliError> {
        let texts = self
            .params
            .as_ref()
            .ok_or_else(|| CliError::validation(format!("`{}` needs --params", self.command.name())))?;
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        Ok(ParamVector::parse(&refs)?)
    }
}

fn parse_n_range(text: &str) -> Result<[usize; 2], CliError> {
    let bad = || CliError::validation(format!("--n-range expects A:B with 3 <= A <= B, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < 3 || a > b {
        return Err(bad());
    }
    Ok([a, b])
}

fn parse_params(text: &str) -> Result<[String; 4], CliError> {
    let parts: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    let four = match parts.len() {
        4 => [parts[0].clone(), parts[1].clone(), parts[2].clone(), parts[3].clone()],
        3 => [parts[0].clone(), parts[1].clone(), parts[1].clone(), parts[2].clone()],
        k => {
            return Err(CliError::validation(format!(
                "--params expects 3 or 4 probabilities, got {k}"
            )))
        }
    };
    let refs: Vec<&str> = four.iter().map(String::as_str).collect();
    ParamVector::<Rational>::parse(&refs)?;
    Ok(four)
}

/// Accepts plain integers and scientific notation such as `1e7`.
pub fn parse_turns(text: &str) -> Result<u64, CliError> {
    let bad = || CliError::validation(format!("--turns expects a positive whole number, got `{text}`"));
    let turns = match text.trim().parse::<u64>() {
        Ok(t) => t,
        Err(_) => {
            let x: f64 = text.trim().parse().map_err(|_| bad())?;
            if !(x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15) {
                return Err(bad());
            }
            x as u64
        }
    };
    if turns == 0 {
        return Err(bad());
    }
    Ok(turns)
}

fn parse_schedule(opts: &Options) -> Result<Option<Schedule>, CliError> {
    let given = [opts.pattern.is_some(), opts.game.is_some(), opts.mixture.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given > 1 {
        return Err(CliError::validation("use only one of --pattern, --game, --mixture"));
    }
    if let Some(text) = &opts.pattern {
        let bad = || CliError::validation(format!("--pattern expects R,S with R, S >= 1, got `{text}`"));
        let (r, s) = text.split_once(',').ok_or_else(bad)?;
        let r: usize = r.trim().parse().map_err(|_| bad())?;
        let s: usize = s.trim().parse().map_err(|_| bad())?;
        if r == 0 || s == 0 {
            return Err(bad());
        }
        return Ok(Some(Schedule::Pattern { r, s }));
    }
    if let Some(game) = &opts.game {
        if !game.eq_ignore_ascii_case("b") {
            return Err(CliError::validation(format!("--game accepts only `b`, got `{game}`")));
        }
        return Ok(Some(Schedule::GameB));
    }
    if let Some(gamma) = &opts.mixture {
        let g = Rational::parse_probability(gamma)?;
        if !(g > Rational::from_ratio(0, 1) && g < Rational::from_ratio(1, 1)) {
            return Err(CliError::validation(format!("--mixture needs 0 < gamma < 1, got `{gamma}`")));
        }
        return Ok(Some(Schedule::Mixture { gamma: gamma.trim().to_string() }));
    }
    Ok(None)
}

fn parse_subcube(text: &str) -> Result<Subcube, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::validation(format!("--subcube expects six numbers, got `{text}`")))?;
    if values.len() != 6 {
        return Err(CliError::validation(format!("--subcube expects six numbers, got {}", values.len())));
    }
    Ok(Subcube::new([values[0], values[1], values[2]], [values[3], values[4], values[5]])?)
}

/// Flags a command understands; anything else given is rejected.
fn allowed(command: CommandKind) -> &'static [&'static str] {
    match command {
        CommandKind::Mean => &["n", "params", "schedule", "group", "mode", "jobs", "out", "format"],
        CommandKind::Table => &["n", "n-range", "params", "schedule", "group", "mode", "jobs", "out", "format"],
        CommandKind::Simulate => &[
            "n", "params", "schedule", "turns", "seed", "replications", "reference", "initial", "jobs", "out", "format",
        ],
        CommandKind::Region => &["n", "schedule", "resolution", "subcube", "reflect", "jobs", "out", "format"],
        CommandKind::Ergodicity => &["params", "schedule", "samples", "seed", "out", "format"],
    }
}

fn given_flags(opts: &Options) -> Vec<&'static str> {
    let flags = [
        ("n", opts.n.is_some()),
        ("n-range", opts.n_range.is_some()),
        ("params", opts.params.is_some()),
        ("schedule", opts.pattern.is_some() || opts.game.is_some() || opts.mixture.is_some()),
        ("group", opts.group.is_some()),
        ("mode", opts.mode.is_some()),
        ("turns", opts.turns.is_some()),
        ("seed", opts.seed.is_some()),
        ("replications", opts.replications.is_some()),
        ("reference", opts.reference.is_some()),
        ("initial", opts.initial.is_some()),
        ("resolution", opts.resolution.is_some()),
        ("subcube", opts.subcube.is_some()),
        ("reflect", opts.reflect),
        ("samples", opts.samples.is_some()),
        ("jobs", opts.jobs.is_some()),
        ("out", opts.out.is_some()),
        ("format", opts.format.is_some()),
    ];
    flags.iter().filter(|(_, set)| *set).map(|(name, _)| *name).collect()
}

fn flag_label(name: &str) -> String {
    if name == "schedule" {
        "--pattern/--game/--mixture".into()
    } else {
        format!("--{name}")
    }
}

fn require<T>(value: Option<T>, command: CommandKind, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::validation(format!("`{}` needs {}", command.name(), flag_label(flag))))
}

impl JobConfig {
    pub fn from_options(command: CommandKind, opts: &Options) -> Result<Self, CliError> {
        for flag in given_flags(opts) {
            if !allowed(command).contains(&flag) {
                return Err(CliError::validation(format!(
                    "{} is not used by `{}`",
                    flag_label(flag),
                    command.name()
                )));
            }
        }
        if opts.n.is_some() && opts.n_range.is_some() {
            return Err(CliError::validation("use either --n or --n-range, not both"));
        }
        if let Some(n) = opts.n {
            if n < 3 {
                return Err(CliError::validation(format!("--n must be at least 3, got {n}")));
            }
        }
        if opts.jobs == Some(0) {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        let params = opts.params.as_deref().map(parse_params).transpose()?;
        let schedule = parse_schedule(opts)?;
        let n_range = opts.n_range.as_deref().map(parse_n_range).transpose()?;
        let turns = opts.turns.as_deref().map(parse_turns).transpose()?;
        let subcube = opts.subcube.as_deref().map(parse_subcube).transpose()?;
        let mut config = JobConfig {
            command,
            n: opts.n,
            n_range,
            params,
            schedule,
            group: opts.group.unwrap_or(GroupChoice::Auto),
            mode: Mode::Float,
            turns,
            seed: opts.seed.unwrap_or(1),
            replications: opts.replications,
            reference: opts.reference,
            initial: opts.initial.unwrap_or(Initial::Random),
            resolution: opts.resolution,
            subcube,
            reflect: opts.reflect,
            samples: opts.samples,
            jobs: opts.jobs,
            out: opts.out.clone(),
            format: opts.format.unwrap_or(command.default_format()),
        };
        config.check_required()?;
        if command == CommandKind::Ergodicity && opts.seed.is_some() && opts.samples.is_none() {
            return Err(CliError::validation("--seed is only used with --samples"));
        }
        config.mode = config.resolve_mode(opts.mode)?;
        Ok(config)
    }

    fn check_required(&mut self) -> Result<(), CliError> {
        let cmd = self.command;
        match cmd {
            CommandKind::Mean => {
                require(self.n, cmd, "n")?;
                require(self.params.as_ref(), cmd, "params")?;
                require(self.schedule.as_ref(), cmd, "schedule")?;
            }
            CommandKind::Table => {
                if self.n.is_none() && self.n_range.is_none() {
                    return Err(CliError::validation("`table` needs --n or --n-range"));
                }
                require(self.params.as_ref(), cmd, "params")?;
            }
            CommandKind::Simulate => {
                let n = require(self.n, cmd, "n")?;
                require(self.params.as_ref(), cmd, "params")?;
                require(self.schedule.as_ref(), cmd, "schedule")?;
                require(self.turns, cmd, "turns")?;
                if n > parrondo_core::game::MAX_RING {
                    return Err(CliError::validation(format!(
                        "simulation supports n <= {}",
                        parrondo_core::game::MAX_RING
                    )));
                }
                let checking = self.replications.is_some() || self.reference.is_some();
                if checking && self.initial != Initial::Random {
                    return Err(CliError::validation(
                        "--initial applies to single runs; strong-law checks start from random states",
                    ));
                }
                if self.replications == Some(0) {
                    return Err(CliError::validation("--replications must be at least 1"));
                }
            }
            CommandKind::Region => {
                require(self.n, cmd, "n")?;
                match require(self.schedule.as_ref(), cmd, "schedule")? {
                    Schedule::GameB => {
                        return Err(CliError::validation(
                            "`region` compares game B with a combined schedule; use --pattern or --mixture",
                        ))
                    }
                    _ => {}
                }
                let res = *self.resolution.get_or_insert(32);
                if res < 2 {
                    return Err(CliError::validation(format!("--resolution must be at least 2, got {res}")));
                }
            }
            CommandKind::Ergodicity => match (&self.params, self.samples) {
                (Some(_), None) => {}
                (None, Some(samples)) => {
                    if self.schedule.is_some() {
                        return Err(CliError::validation("condition volumes take no schedule"));
                    }
                    if samples < 10_000 {
                        return Err(CliError::validation(format!("--samples must be at least 10000, got {samples}")));
                    }
                }
                _ => return Err(CliError::validation("`ergodicity` needs exactly one of --params or --samples")),
            },
        }
        if matches!(self.schedule, Some(Schedule::GameB)) && self.command == CommandKind::Ergodicity {
            return Err(CliError::validation("use --mixture or --pattern to set the mixture weight"));
        }
        Ok(())
    }

    fn resolve_mode(&self, requested: Option<Mode>) -> Result<Mode, CliError> {
        let largest = self.ring_sizes().into_iter().max().unwrap_or(0);
        match self.command {
            CommandKind::Mean | CommandKind::Table => {}
            _ => {
                return match requested {
                    Some(Mode::Rational) if self.command != CommandKind::Ergodicity => Err(CliError::validation(
                        format!("`{}` runs in float mode only", self.command.name()),
                    )),
                    _ => Ok(if self.command == CommandKind::Ergodicity { Mode::Rational } else { Mode::Float }),
                }
            }
        }
        match requested {
            Some(Mode::Rational) if largest > RATIONAL_MAX_N => Err(CliError::validation(format!(
                "rational mode is limited to n <= {RATIONAL_MAX_N}; use --mode float"
            ))),
            Some(mode) => Ok(mode),
            None => {
                let fractions = self.params.iter().flatten().any(|p| p.contains('/'))
                    || matches!(&self.schedule, Some(Schedule::Mixture { gamma }) if gamma.contains('/'));
                Ok(if fractions && largest <= RATIONAL_MAX_N { Mode::Rational } else { Mode::Float })
            }
        }
    }
}
