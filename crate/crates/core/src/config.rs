//! Solver configuration, the `key = value` file format and named presets.

use std::fmt::Write as _;
use std::path::Path;

use crate::distance::WeightMode;
use crate::error::{Error, Result};

/// One leg of a multi-stage schedule. Overrides accumulate: stage k sees
/// the base configuration plus the overrides of stages 1..=k.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stage {
    pub iters: usize,
    pub overrides: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub dt: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lambda: f64,
    /// Minimum window count for PCA; `None` means `d + 1`.
    pub c_p: Option<usize>,
    pub r_mode: WeightMode,
    pub max_iters: usize,
    pub reinit_iters: usize,
    pub tol: f64,
    pub conv_window: usize,
    /// Padding of the initial box around the cloud, in cells.
    pub pad: f64,
    /// Grid size; derived from the cloud when absent.
    pub grid: Option<Vec<usize>>,
    pub sweep_passes: usize,
    pub stages: Vec<Stage>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eta0: 1.0,
            eta1: 2.0,
            eta2: 1.0,
            dt: 0.5,
            gamma1: 100.0,
            gamma2: 100.0,
            alpha1: 800.0,
            alpha2: 800.0,
            beta1: 0.1,
            beta2: 0.1,
            eps: 1.0,
            lambda: 4.0,
            c_p: None,
            r_mode: WeightMode::Constant,
            max_iters: 300,
            reinit_iters: 3,
            tol: 1e-5,
            conv_window: 10,
            pad: 5.0,
            grid: None,
            sweep_passes: 8,
            stages: Vec::new(),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    let t = v.trim();
    t.parse::<usize>()
        .or_else(|_| match t.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
            _ => Err(()),
        })
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{v}'")))
}

const KEYS: &[&str] = &[
    "eta0",
    "eta1",
    "eta2",
    "dt",
    "gamma1",
    "gamma2",
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "eps",
    "lambda",
    "c_p",
    "r_mode",
    "max_iters",
    "reinit_iters",
    "tol",
    "conv_window",
    "pad",
    "grid",
    "sweep_passes",
];

impl SolverConfig {
    /// Recognized plain keys (stage keys are `stage.N.<key>` and
    /// `stage.N.iters`).
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Sets one key. Shorthands: `gamma`, `alpha`, `beta` set both members
    /// of the pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if let Some(rest) = key.strip_prefix("stage.") {
            let (num, sub) = rest
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("malformed stage key '{key}'")))?;
            let k = parse_usize(key, num)?;
            if k == 0 {
                return Err(Error::Config("stages are numbered from 1".into()));
            }
            if self.stages.len() < k {
                self.stages.resize(k, Stage::default());
            }
            if sub == "iters" {
                self.stages[k - 1].iters = parse_usize(key, value)?;
            } else {
                // validate eagerly against a scratch copy
                let mut probe = self.clone();
                probe.stages.clear();
                probe.set(sub, value)?;
                let st = &mut self.stages[k - 1];
                st.overrides.retain(|(k, _)| k != sub);
                st.overrides.push((sub.to_string(), value.trim().to_string()));
            }
            return Ok(());
        }
        match key {
            "eta0" => self.eta0 = parse_f64(key, value)?,
            "eta1" => self.eta1 = parse_f64(key, value)?,
            "eta2" => self.eta2 = parse_f64(key, value)?,
            "dt" => self.dt = parse_f64(key, value)?,
            "gamma1" => self.gamma1 = parse_f64(key, value)?,
            "gamma2" => self.gamma2 = parse_f64(key, value)?,
            "gamma" => {
                self.gamma1 = parse_f64(key, value)?;
                self.gamma2 = self.gamma1;
            }
            "alpha1" => self.alpha1 = parse_f64(key, value)?,
            "alpha2" => self.alpha2 = parse_f64(key, value)?,
            "alpha" => {
                self.alpha1 = parse_f64(key, value)?;
                self.alpha2 = self.alpha1;
            }
            "beta1" => self.beta1 = parse_f64(key, value)?,
            "beta2" => self.beta2 = parse_f64(key, value)?,
            "beta" => {
                self.beta1 = parse_f64(key, value)?;
                self.beta2 = self.beta1;
            }
            "eps" => self.eps = parse_f64(key, value)?,
            "lambda" => self.lambda = parse_f64(key, value)?,
            "c_p" => {
                self.c_p = match value.trim() {
                    "auto" => None,
                    v => Some(parse_usize(key, v)?),
                }
            }
            "r_mode" => self.r_mode = value.trim().parse()?,
            "max_iters" => self.max_iters = parse_usize(key, value)?,
            "reinit_iters" => self.reinit_iters = parse_usize(key, value)?,
            "tol" => self.tol = parse_f64(key, value)?,
            "conv_window" => self.conv_window = parse_usize(key, value)?,
            "pad" => self.pad = parse_f64(key, value)?,
            "grid" => {
                self.grid = match value.trim() {
                    "auto" => None,
                    v => Some(
                        v.split([',', 'x', ' '])
                            .filter(|s| !s.is_empty())
                            .map(|s| parse_usize(key, s))
                            .collect::<Result<_>>()?,
                    ),
                }
            }
            "sweep_passes" => self.sweep_passes = parse_usize(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, e)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = SolverConfig::default();
        cfg.apply_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k, v)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("eps", self.eps),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("eta0", self.eta0),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("pad", self.pad),
            ("tol", self.tol),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be non-negative, got {v}")));
            }
        }
        if !(self.lambda >= 1.0) {
            return Err(Error::Config(format!("lambda must be at least 1, got {}", self.lambda)));
        }
        if self.conv_window == 0 {
            return Err(Error::Config("conv_window must be at least 1".into()));
        }
        if self.sweep_passes == 0 {
            return Err(Error::Config("sweep_passes must be at least 1".into()));
        }
        if !self.stages.is_empty() {
            let total: usize = self.stages.iter().map(|s| s.iters).sum();
            if total > self.max_iters {
                return Err(Error::Config(format!(
                    "stage iterations sum to {total}, more than max_iters = {}",
                    self.max_iters
                )));
            }
            for s in self.stage_configs()? {
                let mut c = s.0;
                c.stages.clear();
                c.validate()?;
            }
        }
        Ok(())
    }

    /// The effective configuration and iteration budget of every stage.
    /// Without stages this is the configuration itself with `max_iters`.
    pub fn stage_configs(&self) -> Result<Vec<(SolverConfig, usize)>> {
        let mut base = self.clone();
        base.stages.clear();
        if self.stages.is_empty() {
            let n = base.max_iters;
            return Ok(vec![(base, n)]);
        }
        let mut out = Vec::new();
        for st in &self.stages {
            for (k, v) in &st.overrides {
                base.set(k, v)?;
            }
            out.push((base.clone(), st.iters));
        }
        Ok(out)
    }

    /// Renders the configuration in the file format accepted by
    /// [`SolverConfig::apply_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (i, st) in self.stages.iter().enumerate() {
            let _ = writeln!(s, "stage.{}.iters = {}", i + 1, st.iters);
            for (k, v) in &st.overrides {
                let _ = writeln!(s, "stage.{}.{k} = {v}", i + 1);
            }
        }
        s
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("eta0", self.eta0.to_string()),
            ("eta1", self.eta1.to_string()),
            ("eta2", self.eta2.to_string()),
            ("dt", self.dt.to_string()),
            ("gamma1", self.gamma1.to_string()),
            ("gamma2", self.gamma2.to_string()),
            ("alpha1", self.alpha1.to_string()),
            ("alpha2", self.alpha2.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("eps", self.eps.to_string()),
            ("lambda", self.lambda.to_string()),
            ("c_p", self.c_p.map_or("auto".into(), |c| c.to_string())),
            ("r_mode", self.r_mode.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("reinit_iters", self.reinit_iters.to_string()),
            ("tol", self.tol.to_string()),
            ("conv_window", self.conv_window.to_string()),
            ("pad", self.pad.to_string()),
            (
                "grid",
                self.grid.as_ref().map_or("auto".into(), |g| {
                    g.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
                }),
            ),
            ("sweep_passes", self.sweep_passes.to_string()),
        ]
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: &[(&str, &str)] = &[
    ("clean-2d", "complete, clean curves"),
    ("incomplete-2d", "curves with missing pieces, r = sqrt(f)"),
    ("window-2d", "window-size ablation on incomplete curves"),
    ("noisy-2d", "two-stage schedule for noisy curves (ellipse)"),
    ("noisy-2d-flower", "two-stage schedule for noisy curves (flower)"),
    ("clean-3d", "complete, clean surfaces"),
    ("clean-3d-fine", "complete surfaces with fine detail, eps = 0.01"),
    ("incomplete-3d", "surfaces with a missing band (cylinder)"),
    ("incomplete-3d-rail", "thin surfaces with a missing band (hand rail)"),
    ("noisy-3d", "noisy closed surfaces (torus)"),
];

fn two_d(dt: f64) -> SolverConfig {
    SolverConfig {
        dt,
        gamma1: 100.0,
        gamma2: 100.0,
        alpha1: 4.0 * 100.0 / dt,
        alpha2: 4.0 * 100.0 / dt,
        ..SolverConfig::default()
    }
}

fn three_d(dt: f64) -> SolverConfig {
    SolverConfig {
        dt,
        gamma1: 10.0,
        gamma2: 10.0,
        alpha1: 500.0,
        alpha2: 500.0,
        beta1: 2.0,
        beta2: 20.0,
        lambda: 8.0,
        ..SolverConfig::default()
    }
}

/// Returns a named preset.
pub fn preset(name: &str) -> Result<SolverConfig> {
    let mut c = match name {
        "clean-2d" => SolverConfig {
            eta0: 1.0,
            eta1: 2.0,
            eta2: 1.0,
            lambda: 4.0,
            max_iters: 200,
            ..two_d(0.5)
        },
        "incomplete-2d" => SolverConfig {
            eta0: 10.0,
            eta1: 2e4,
            eta2: 8e4,
            lambda: 12.0,
            r_mode: WeightMode::SqrtF,
            max_iters: 500,
            ..two_d(2e-4)
        },
        "window-2d" => SolverConfig {
            eta0: 30.0,
            eta1: 1e4,
            eta2: 4e4,
            lambda: 10.0,
            r_mode: WeightMode::SqrtF,
            max_iters: 500,
            ..two_d(2e-4)
        },
        "noisy-2d" | "noisy-2d-flower" => {
            let (dt1, dt2) = if name == "noisy-2d" { (2e-3, 1e-3) } else { (1e-3, 8e-4) };
            let mut c = SolverConfig {
                eta0: 50.0,
                eta1: 1e3,
                eta2: 1e4,
                beta2: 1e3,
                lambda: 8.0,
                max_iters: 600,
                ..two_d(dt1)
            };
            let a2 = (4.0 * 100.0 / dt2).to_string();
            c.stages = vec![
                Stage {
                    iters: 300,
                    overrides: vec![],
                },
                Stage {
                    iters: 300,
                    overrides: vec![
                        ("eta2".into(), "3e4".into()),
                        ("dt".into(), dt2.to_string()),
                        ("alpha1".into(), a2.clone()),
                        ("alpha2".into(), a2),
                    ],
                },
            ];
            c
        }
        "clean-3d" => SolverConfig {
            eta0: 0.1,
            eta1: 0.1,
            eta2: 0.2,
            max_iters: 300,
            ..three_d(2.0)
        },
        "clean-3d-fine" => SolverConfig {
            eta0: 0.1,
            eta1: 0.05,
            eta2: 0.05,
            eps: 0.01,
            max_iters: 300,
            ..three_d(2.0)
        },
        "incomplete-3d" => SolverConfig {
            eta0: 0.01,
            eta1: 0.0,
            eta2: 1.0,
            lambda: 12.0,
            r_mode: WeightMode::SqrtF,
            max_iters: 1000,
            ..three_d(5.0)
        },
        "incomplete-3d-rail" => SolverConfig {
            eta0: 0.01,
            eta1: 0.0,
            eta2: 3.0,
            lambda: 10.0,
            r_mode: WeightMode::SqrtF,
            max_iters: 1000,
            ..three_d(5.0)
        },
        "noisy-3d" => SolverConfig {
            eta0: 0.1,
            eta1: 0.1,
            eta2: 1.0,
            max_iters: 500,
            ..three_d(2.0)
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
            )))
        }
    };
    c.validate()?;
    c.stages.shrink_to_fit();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            c.validate().unwrap();
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn clean_2d_constants() {
        let c = preset("clean-2d").unwrap();
        assert_eq!((c.eta0, c.eta1, c.eta2, c.dt, c.lambda), (1.0, 2.0, 1.0, 0.5, 4.0));
        assert_eq!(c.dt * c.alpha1, 4.0 * c.gamma1);
        assert_eq!(c.r_mode, WeightMode::Constant);
    }

    #[test]
    fn stages_accumulate() {
        let c = preset("noisy-2d").unwrap();
        let st = c.stage_configs().unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st[0].0.eta2, 1e4);
        assert_eq!(st[1].0.eta2, 3e4);
        assert_eq!(st[1].0.dt, 1e-3);
        assert!((st[1].0.dt * st[1].0.alpha1 - 400.0).abs() < 1e-9);
        assert_eq!(st[1].0.eta0, 50.0);
    }

    #[test]
    fn text_roundtrip() {
        let c = preset("noisy-2d").unwrap();
        let mut back = SolverConfig::default();
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_errors() {
        let mut c = SolverConfig::default();
        assert!(c.apply_text("eta0 = x").is_err());
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("eta0").is_err());
        assert!(c.apply_override("stage.0.eta2=1").is_err());
        c.apply_text("# comment\n eta2 = 0 # trailing\n grid = 64,48\n").unwrap();
        assert_eq!(c.eta2, 0.0);
        assert_eq!(c.grid, Some(vec![64, 48]));
        c.set("dt", "-1").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn stage_budget_checked() {
        let mut c = preset("noisy-2d").unwrap();
        c.max_iters = 10;
        assert!(c.validate().is_err());
    }
}
