use std::time::Instant;

use parrondo_core::montecarlo::{self, InitialState, SimulationSpec, Z_THRESHOLD};
use parrondo_core::region::{self, Label};
use parrondo_core::scalar::format_significant;
use parrondo_core::{
    Configuration, MeanCalculator, ParamVector, PatternSpec, ProfitReport, Rational, Scalar, SymmetryGroup,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{Format, GroupChoice, Initial, Mode};
use crate::config::{CliError, CommandKind, JobConfig, Schedule, TABLE_WARN_N};

/// Significant digits shown in tables and short renderings.
pub const DISPLAY_DIGITS: u32 = 6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual: Option<f64>,
    pub case_id: Option<u8>,
    pub class_count: Option<usize>,
    pub wall_time: f64,
}

/// Result of one job in every output form.
#[derive(Debug, Clone)]
pub struct Report {
    pub result: Value,
    pub diagnostics: Diagnostics,
    pub csv: String,
    pub text: String,
    /// A statistical check failed.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn json(&self, config: &JobConfig) -> Value {
        json!({
            "config": config,
            "result": self.result,
            "diagnostics": self.diagnostics,
        })
    }

    pub fn render(&self, config: &JobConfig) -> String {
        match config.format {
            Format::Text => self.text.clone(),
            Format::Csv => self.csv.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json(config)).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

pub fn execute(config: &JobConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut report = match config.command {
        CommandKind::Mean => mean(config),
        CommandKind::Table => table(config),
        CommandKind::Simulate => simulate(config),
        CommandKind::Region => region_scan(config),
        CommandKind::Ergodicity => ergodicity(config),
    }?;
    report.diagnostics.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

fn group_for<T: Scalar>(choice: GroupChoice, n: usize, params: &ParamVector<T>) -> Result<SymmetryGroup, CliError> {
    let group = match choice {
        GroupChoice::Auto => SymmetryGroup::auto(n, params),
        GroupChoice::Cyclic => SymmetryGroup::cyclic(n),
        GroupChoice::Dihedral => SymmetryGroup::dihedral(n),
    };
    group.check_compatible(params)?;
    Ok(group)
}

/// Exact value of a mean: the fraction in rational mode, the double otherwise.
struct Computed {
    mu: f64,
    exact: Option<String>,
    case_id: u8,
    residual: f64,
    class_count: usize,
    group: SymmetryGroup,
}

impl<T: Scalar> From<ProfitReport<T>> for Computed {
    fn from(r: ProfitReport<T>) -> Self {
        Computed {
            mu: r.mu.to_f64(),
            exact: T::EXACT.then(|| r.mu.to_string()),
            case_id: r.case_id,
            residual: r.residual,
            class_count: r.class_count,
            group: r.group,
        }
    }
}

fn compute<T: Scalar>(
    n: usize,
    params: &ParamVector<T>,
    schedule: &Schedule,
    choice: GroupChoice,
) -> Result<Computed, CliError> {
    let calc = MeanCalculator::new(n, group_for(choice, n, params)?)?;
    let report = match schedule {
        Schedule::Mixture { gamma } => calc.mixture(params, &T::parse_probability(gamma)?)?,
        other => calc.mean(params, &other.to_spec()?)?,
    };
    Ok(report.into())
}

fn compute_in_mode(config: &JobConfig, n: usize, schedule: &Schedule) -> Result<Computed, CliError> {
    match config.mode {
        Mode::Rational => compute(n, &config.params_rational()?, schedule, config.group),
        Mode::Float => compute(n, &config.params_f64()?, schedule, config.group),
    }
}

fn schedule_label(schedule: &Schedule) -> String {
    match schedule {
        Schedule::GameB => "B".into(),
        Schedule::Pattern { r, s } => format!("[{r},{s}]"),
        Schedule::Mixture { gamma } => format!("mix({gamma})"),
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn mean(config: &JobConfig) -> Result<Report, CliError> {
    let n = config.n.expect("validated");
    let schedule = config.schedule.as_ref().expect("validated");
    let c = compute_in_mode(config, n, schedule)?;
    let short = format_significant(c.mu, DISPLAY_DIGITS);
    let label = schedule_label(schedule);
    let mut text = format!("mu{label} (n = {n}) = {}\n", c.exact.as_deref().unwrap_or(&c.mu.to_string()));
    if c.exact.is_some() {
        text.push_str(&format!("  as decimal: {}\n", c.mu));
    }
    text.push_str(&format!("  6 significant digits: {short}\n"));
    let csv = csv_string(
        &["n", "schedule", "mu", "mu_6sig", "mu_exact"],
        [vec![n.to_string(), label.clone(), c.mu.to_string(), short.clone(), c.exact.clone().unwrap_or_default()]],
    );
    Ok(Report {
        result: json!({
            "n": n,
            "schedule": label,
            "mu": c.mu,
            "mu_6sig": short,
            "mu_exact": c.exact,
            "group": c.group.kind,
        }),
        diagnostics: Diagnostics {
            residual: Some(c.residual),
            case_id: Some(c.case_id),
            class_count: Some(c.class_count),
            wall_time: 0.0,
        },
        csv,
        text,
        flagged: false,
        warnings: vec![],
    })
}

fn table(config: &JobConfig) -> Result<Report, CliError> {
    let schedules: Vec<Schedule> = match &config.schedule {
        Some(s) => vec![s.clone()],
        None => PatternSpec::table_patterns()
            .into_iter()
            .map(|p| match p {
                PatternSpec::Pattern { r, s } => Schedule::Pattern { r, s },
                _ => unreachable!("table patterns are periodic"),
            })
            .collect(),
    };
    let labels: Vec<String> = schedules.iter().map(schedule_label).collect();
    let sizes = config.ring_sizes();
    let mut warnings = vec![];
    if sizes.iter().any(|&n| n > TABLE_WARN_N) {
        warnings.push(format!("rows with N > {TABLE_WARN_N} can take minutes each"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    let mut json_rows = Vec::with_capacity(sizes.len());
    let mut diag = Diagnostics::default();
    for &n in &sizes {
        let mut cells = vec![n.to_string()];
        let mut values = Vec::with_capacity(schedules.len());
        for schedule in &schedules {
            let c = compute_in_mode(config, n, schedule)?;
            cells.push(format_significant(c.mu, DISPLAY_DIGITS));
            diag.residual = Some(diag.residual.unwrap_or(0.0).max(c.residual));
            diag.case_id = Some(c.case_id);
            diag.class_count = Some(c.class_count);
            values.push(json!({ "mu": c.mu, "mu_exact": c.exact }));
        }
        rows.push(cells);
        json_rows.push(json!({ "n": n, "values": values }));
    }
    let mut header = vec!["N"];
    header.extend(labels.iter().map(String::as_str));
    let csv = csv_string(&header, rows.clone());
    let widths: Vec<usize> = (0..header.len())
        .map(|k| rows.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut text = line(header.clone()) + "\n";
    for r in &rows {
        text.push_str(&line(r.iter().map(String::as_str).collect()));
        text.push('\n');
    }
    Ok(Report {
        result: json!({ "columns": labels, "rows": json_rows }),
        diagnostics: diag,
        csv,
        text,
        flagged: false,
        warnings,
    })
}

fn z_score(observed: f64, expected: f64, sigma: f64, turns: u64) -> f64 {
    let diff = observed - expected;
    if sigma > 0.0 {
        diff / (sigma / (turns as f64).sqrt())
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

fn simulate(config: &JobConfig) -> Result<Report, CliError> {
    let n = config.n.expect("validated");
    let params = config.params_f64()?;
    let schedule = config.schedule.as_ref().expect("validated");
    let pattern = schedule.to_spec()?;
    let turns = config.turns.expect("validated");
    let exact = || compute(n, &params, schedule, config.group).map(|c| c.mu);

    if config.replications.is_some() || config.reference.is_some() {
        let reps = config.replications.unwrap_or(8);
        let reference = match config.reference {
            Some(r) => r,
            None => exact()?,
        };
        let r = montecarlo::slln_check_against(reference, n, &params, &pattern, turns, reps, config.seed)?;
        let csv = csv_string(
            &["stream", "final_mean", "sigma_hat", "z"],
            r.replications
                .iter()
                .map(|s| vec![s.stream.to_string(), s.final_mean.to_string(), s.sigma_hat.to_string(), s.z.to_string()]),
        );
        let text = format!(
            "reference mu = {}\nreplications = {}, turns = {}\ngrand mean = {}\naggregate z = {:.3}, max |z| = {:.3}\n{}\n",
            r.reference_mu,
            r.replications.len(),
            r.turns,
            r.grand_mean,
            r.aggregate_z,
            r.max_abs_z,
            if r.flagged {
                format!("FLAGGED: |z| exceeds {Z_THRESHOLD}")
            } else {
                "consistent with the reference".into()
            }
        );
        return Ok(Report {
            result: serde_json::to_value(&r).expect("report serializes"),
            diagnostics: Diagnostics::default(),
            csv,
            text,
            flagged: r.flagged,
            warnings: vec![],
        });
    }

    let initial = match config.initial {
        Initial::Random => InitialState::Random,
        Initial::Losers => InitialState::Fixed(Configuration::all_losers(n)?),
        Initial::Winners => InitialState::Fixed(Configuration::all_winners(n)?),
    };
    let spec = SimulationSpec {
        n,
        params: *params.as_array(),
        pattern,
        turns,
        seed: config.seed,
        initial,
    };
    let run = montecarlo::simulate(&spec)?;
    let mut warnings = vec![];
    let exact_mu = match exact() {
        Ok(mu) => Some(mu),
        Err(e) => {
            warnings.push(format!("no exact mean to compare with: {e}"));
            None
        }
    };
    let z = exact_mu.map(|mu| z_score(run.final_mean, mu, run.sigma_hat, turns));
    let flagged = z.is_some_and(|z| z.abs() > Z_THRESHOLD);
    let csv = csv_string(
        &["turn", "running_mean"],
        run.trajectory.iter().map(|(t, m)| vec![t.to_string(), m.to_string()]),
    );
    let mut text = format!(
        "turns = {turns}, seed = {}\nfinal mean = {}\nsigma_hat = {}\n",
        config.seed, run.final_mean, run.sigma_hat
    );
    if let (Some(mu), Some(z)) = (exact_mu, z) {
        text.push_str(&format!("exact mu = {mu}\nz = {z:.3}\n"));
    }
    Ok(Report {
        result: json!({
            "final_mean": run.final_mean,
            "total_profit": run.total_profit,
            "sigma_hat": run.sigma_hat,
            "exact_mu": exact_mu,
            "z": z,
            "trajectory": run.trajectory,
        }),
        diagnostics: Diagnostics::default(),
        csv,
        text,
        flagged,
        warnings,
    })
}

fn region_scan(config: &JobConfig) -> Result<Report, CliError> {
    let n = config.n.expect("validated");
    let pattern = config.schedule.as_ref().expect("validated").to_spec()?;
    let res = config.resolution.expect("validated");
    let scan = region::scan_with(n, &pattern, res, config.subcube, config.reflect)?;
    let csv = csv_string(
        &["p0", "p3", "p1", "mu_b", "mu_pattern", "label"],
        scan.points.iter().map(|p| {
            vec![
                p.p0.to_string(),
                p.p3.to_string(),
                p.p1.to_string(),
                p.mu_b.to_string(),
                p.mu_pattern.to_string(),
                p.label.as_str().to_string(),
            ]
        }),
    );
    let counts = [Label::Parrondo, Label::AntiParrondo, Label::Neither].map(|l| scan.count(l));
    let components = [Label::Parrondo, Label::AntiParrondo].map(|l| scan.components(l));
    let text = format!(
        "n = {n}, schedule = {pattern}, resolution = {res}{}\n\
         parrondo: {} cells, volume {:.6} +/- {:.6}, {} component(s)\n\
         anti-parrondo: {} cells, volume {:.6} +/- {:.6}, {} component(s)\n\
         neither: {} cells\n",
        if scan.reflected { ", reflected" } else { "" },
        counts[0],
        scan.parrondo_volume,
        scan.parrondo_error,
        components[0],
        counts[1],
        scan.anti_parrondo_volume,
        scan.anti_parrondo_error,
        components[1],
        counts[2],
    );
    let class_count = MeanCalculator::new(n, SymmetryGroup::dihedral(n))?.model().class_count();
    Ok(Report {
        result: json!({
            "parrondo_cells": counts[0],
            "anti_parrondo_cells": counts[1],
            "neither_cells": counts[2],
            "parrondo_components": components[0],
            "anti_parrondo_components": components[1],
            "scan": scan,
        }),
        diagnostics: Diagnostics {
            class_count: Some(class_count),
            ..Diagnostics::default()
        },
        csv,
        text,
        flagged: false,
        warnings: vec![],
    })
}

const CONDITION_NAMES: [&str; 5] = ["a", "b", "c", "d", "union"];

fn ergodicity(config: &JobConfig) -> Result<Report, CliError> {
    if let Some(samples) = config.samples {
        let v = region::condition_volumes(samples, config.seed)?;
        let csv = csv_string(
            &["condition", "volume", "standard_error"],
            (0..5).map(|k| vec![CONDITION_NAMES[k].into(), v.estimates[k].to_string(), v.standard_errors[k].to_string()]),
        );
        let mut text = format!("{samples} samples with p2 = p1, seed = {}\n", config.seed);
        for k in 0..5 {
            text.push_str(&format!(
                "{:>5}: {:.4} +/- {:.4}\n",
                CONDITION_NAMES[k], v.estimates[k], v.standard_errors[k]
            ));
        }
        return Ok(Report {
            result: serde_json::to_value(&v).expect("volumes serialize"),
            diagnostics: Diagnostics::default(),
            csv,
            text,
            flagged: false,
            warnings: vec![],
        });
    }
    let params = config.params_rational()?;
    let gamma: Option<Rational> = match &config.schedule {
        Some(Schedule::Mixture { gamma }) => Some(Rational::parse_probability(gamma)?),
        Some(Schedule::Pattern { r, s }) => Some(Rational::from_ratio(*r as i64, (r + s) as i64)),
        _ => None,
    };
    let c = region::ergodicity_conditions(&params, gamma.as_ref())?;
    let mut flags: Vec<bool> = c.holds.to_vec();
    flags.push(c.in_union);
    let csv = csv_string(
        &["condition", "holds"],
        CONDITION_NAMES.iter().zip(&flags).map(|(n, h)| vec![n.to_string(), h.to_string()]),
    );
    let mut text = String::new();
    if let Some(g) = &gamma {
        text.push_str(&format!("mixed with the fair game at gamma = {g}\n"));
    }
    text.push_str(&format!(
        "evaluated at p = ({})\np_bar = {}\n",
        c.evaluated_at.map(|p| p.to_string()).join(", "),
        c.p_bar
    ));
    for (name, holds) in CONDITION_NAMES.iter().zip(&flags) {
        text.push_str(&format!("{name:>5}: {holds}\n"));
    }
    Ok(Report {
        result: serde_json::to_value(&c).expect("report serializes"),
        diagnostics: Diagnostics::default(),
        csv,
        text,
        flagged: false,
        warnings: vec![],
    })
}
