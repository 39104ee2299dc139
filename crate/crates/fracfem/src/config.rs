//! Experiment configuration: command line values overridden by a flat
//! `key = value` file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fracfem_core::interp::Q_BALL;
use fracfem_core::oracle::DEFAULT_CAP_RADIUS;
use fracfem_core::QuadratureRules;

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Unconstrained problem with the eigenfunction forcing.
    Linear,
    /// Obstacle problem with a known solution on the unit disk.
    ExplicitObstacle,
    /// Cone obstacle, zero forcing; errors against the finest level.
    Qualitative,
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(v: &str) -> Result<Self, HarnessError> {
        match v {
            "linear" => Ok(Experiment::Linear),
            "explicit_obstacle" => Ok(Experiment::ExplicitObstacle),
            "qualitative" => Ok(Experiment::Qualitative),
            _ => Err(HarnessError::Config(format!("unknown experiment `{v}`"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Linear => "linear",
            Experiment::ExplicitObstacle => "explicit_obstacle",
            Experiment::Qualitative => "qualitative",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub s: f64,
    pub mu: f64,
    /// Mesh parameters, strictly decreasing.
    pub h_values: Vec<f64>,
    pub rules: QuadratureRules,
    /// Points per direction of the ball averages of the interpolant.
    pub q_ball: usize,
    /// Bound on the relative stationarity residual of the obstacle solve.
    pub tol: f64,
    pub max_iter: usize,
    /// Contact iff `u − χ ≤ contact_tol · max(1, |χ|)`.
    pub contact_tol: f64,
    /// Radius of the quadratic cap on cone apexes.
    pub r_c: f64,
    pub out: PathBuf,
    pub dump_fields: bool,
    /// Writes `stiffness_<level>.bin` per level.
    pub dump_stiffness: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, s: f64, mu: f64, h_values: Vec<f64>) -> Self {
        ExperimentConfig {
            experiment,
            s,
            mu,
            h_values,
            rules: QuadratureRules::default(),
            q_ball: Q_BALL,
            tol: 1e-8,
            max_iter: 500,
            contact_tol: 1e-10,
            r_c: DEFAULT_CAP_RADIUS,
            out: PathBuf::from("out"),
            dump_fields: true,
            dump_stiffness: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s = {} outside (0, 1)", self.s));
        }
        if !(1.0..=2.0).contains(&self.mu) {
            return bad(format!("mu = {} outside [1, 2]", self.mu));
        }
        if self.h_values.is_empty() {
            return bad("empty h list".into());
        }
        if self.h_values.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return bad("h values must be positive".into());
        }
        if self.h_values.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h values must be strictly decreasing".into());
        }
        if self.experiment == Experiment::Qualitative && self.h_values.len() < 2 {
            return bad("the qualitative experiment needs a finer surrogate level".into());
        }
        if !(self.tol > 0.0) || !(self.contact_tol >= 0.0) || self.max_iter == 0 {
            return bad("solver tolerances must be positive".into());
        }
        if !(self.r_c > 0.0 && self.r_c < 0.2) {
            return bad(format!("r_c = {} outside (0, 0.2)", self.r_c));
        }
        if self.q_ball == 0 {
            return bad("q_ball must be positive".into());
        }
        Ok(())
    }

    /// `key = value` pairs, one per line, as written to output headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let r = &self.rules;
        let hs: Vec<String> = self.h_values.iter().map(|h| format!("{h}")).collect();
        vec![
            ("experiment".into(), self.experiment.to_string()),
            ("s".into(), format!("{}", self.s)),
            ("mu".into(), format!("{}", self.mu)),
            ("h_values".into(), hs.join(", ")),
            ("q_sing".into(), r.q_sing.to_string()),
            ("q_far".into(), r.q_far.to_string()),
            ("q_ang".into(), r.q_ang.to_string()),
            ("q_load".into(), r.q_load.to_string()),
            ("far_ratio".into(), format!("{}", r.far_ratio)),
            ("q_ball".into(), self.q_ball.to_string()),
            ("tol".into(), format!("{:e}", self.tol)),
            ("max_iter".into(), self.max_iter.to_string()),
            ("contact_tol".into(), format!("{:e}", self.contact_tol)),
            ("r_c".into(), format!("{}", self.r_c)),
        ]
    }
}

/// Parsed `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Parse {
                line: n + 1,
                msg: format!("expected `key = value`: {raw}"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(HarnessError::Parse {
                line: n + 1,
                msg: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Values from the command line before the config file is applied.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub s: Option<f64>,
    pub mu: Option<f64>,
    pub levels: Option<usize>,
    pub h0: Option<f64>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_H0: f64 = 0.2;
pub const DEFAULT_H_RATIO: f64 = 0.5;

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, HarnessError> {
    v.parse()
        .map_err(|_| HarnessError::Config(format!("bad value for `{key}`: {v}")))
}

fn flag(key: &str, v: &str) -> Result<bool, HarnessError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(HarnessError::Config(format!("bad value for `{key}`: {v}"))),
    }
}

/// Applies `pairs` over the flag values. The h list is `h_values` if given,
/// else `h0 · h_ratio^k` for `k < levels`.
pub fn resolve(
    mut o: Overrides,
    pairs: &[(String, String)],
) -> Result<ExperimentConfig, HarnessError> {
    let mut h_ratio = DEFAULT_H_RATIO;
    let mut h_values: Option<Vec<f64>> = None;
    let mut rest = Vec::new();
    for (k, v) in pairs {
        match k.as_str() {
            "experiment" => o.experiment = Some(v.clone()),
            "s" => o.s = Some(num(k, v)?),
            "mu" => o.mu = Some(num(k, v)?),
            "levels" => o.levels = Some(num(k, v)?),
            "h0" => o.h0 = Some(num(k, v)?),
            "out" => o.out = Some(PathBuf::from(v)),
            "h_ratio" => h_ratio = num(k, v)?,
            "h_values" => {
                h_values = Some(
                    v.split(',')
                        .map(|x| num(k, x.trim()))
                        .collect::<Result<Vec<f64>, _>>()?,
                )
            }
            _ => rest.push((k, v)),
        }
    }
    let need = |name: &str| HarnessError::Config(format!("missing `{name}`"));
    let experiment: Experiment = o.experiment.ok_or_else(|| need("experiment"))?.parse()?;
    let s = o.s.ok_or_else(|| need("s"))?;
    let mu = o.mu.ok_or_else(|| need("mu"))?;
    let h_values = match h_values {
        Some(h) => h,
        None => {
            let levels = o.levels.ok_or_else(|| need("levels"))?;
            if !(h_ratio > 0.0 && h_ratio < 1.0) {
                return Err(HarnessError::Config(format!(
                    "h_ratio = {h_ratio} outside (0, 1)"
                )));
            }
            let h0 = o.h0.unwrap_or(DEFAULT_H0);
            (0..levels).map(|k| h0 * h_ratio.powi(k as i32)).collect()
        }
    };
    let mut cfg = ExperimentConfig::new(experiment, s, mu, h_values);
    if let Some(out) = o.out {
        cfg.out = out;
    }
    for (k, v) in rest {
        match k.as_str() {
            "q_sing" => cfg.rules.q_sing = num(k, v)?,
            "q_far" => cfg.rules.q_far = num(k, v)?,
            "q_ang" => cfg.rules.q_ang = num(k, v)?,
            "q_load" => cfg.rules.q_load = num(k, v)?,
            "far_ratio" => cfg.rules.far_ratio = num(k, v)?,
            "q_ball" => cfg.q_ball = num(k, v)?,
            "tol" => cfg.tol = num(k, v)?,
            "max_iter" => cfg.max_iter = num(k, v)?,
            "contact_tol" => cfg.contact_tol = num(k, v)?,
            "r_c" => cfg.r_c = num(k, v)?,
            "dump_fields" => cfg.dump_fields = flag(k, v)?,
            "dump_stiffness" => cfg.dump_stiffness = flag(k, v)?,
            _ => return Err(HarnessError::Config(format!("unknown key `{k}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
