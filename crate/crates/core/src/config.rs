//! `key=value` run configuration for the command-line tool.

use crate::cdf_engine::{MixingMatrix2, QuadConfig};
use crate::distributions::ComponentLaw;
use crate::empirical::{EvalGridSpec, GridMode};
use crate::error::{Error, Result};
use crate::montecarlo::{BetaSchedule, Preset, Scale, SweepConfig, SIZE_SWEEP_N, SIZE_SWEEP_RHOS};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub alpha: f64,
    /// overrides the `alpha` construction of `A` when set
    pub matrix_a: Option<MixingMatrix2>,
    pub matrix_b: Option<MixingMatrix2>,
    pub rho_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub c: f64,
    pub reps: usize,
    pub grid_mode: GridMode,
    pub grid_points: usize,
    pub seed: u64,
    pub out: Option<String>,
    /// `xi = Exp(1) - 1` when true, `Exp(1)` otherwise
    pub center_xi: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            matrix_a: None,
            matrix_b: None,
            rho_list: SIZE_SWEEP_RHOS.to_vec(),
            n_list: SIZE_SWEEP_N.to_vec(),
            c: 1.0,
            reps: 200,
            grid_mode: GridMode::CornerSubsample,
            grid_points: 500,
            seed: DEFAULT_SEED,
            out: None,
            center_xi: true,
        }
    }
}

pub fn parse_matrix(s: &str) -> Result<MixingMatrix2> {
    let v = parse_list::<f64>(s, "matrix")?;
    if v.len() != 4 {
        return Err(Error::Invalid(format!("matrix needs 4 entries a11,a12,a21,a22, got {s:?}")));
    }
    MixingMatrix2::new(v[0], v[1], v[2], v[3])
}

pub fn format_matrix(m: &MixingMatrix2) -> String {
    let r = m.rows();
    format!("{},{},{},{}", r[0][0], r[0][1], r[1][0], r[1][1])
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_scalar<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Invalid(format!("bad value for {key}: {v:?}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("line {}: expected key=value, got {raw:?}", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "alpha" => self.alpha = parse_scalar(v, key)?,
            "matrix_a" => self.matrix_a = Some(parse_matrix(v)?),
            "matrix_b" => self.matrix_b = Some(parse_matrix(v)?),
            "rho_list" => self.rho_list = parse_list(v, key)?,
            "n_list" => self.n_list = parse_list(v, key)?,
            "c" => self.c = parse_scalar(v, key)?,
            "reps" => self.reps = parse_scalar(v, key)?,
            "grid_mode" => self.grid_mode = GridMode::parse(v)?,
            "grid_points" => self.grid_points = parse_scalar(v, key)?,
            "seed" => self.seed = parse_scalar(v, key)?,
            "out" => self.out = Some(v.to_string()),
            "center_xi" => self.center_xi = parse_scalar(v, key)?,
            _ => return Err(Error::Invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.abs() < 1.0) {
            return Err(Error::Correlation(self.alpha));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Invalid(format!("c must be finite and >= 0, got {}", self.c)));
        }
        if self.reps == 0 || self.grid_points == 0 {
            return Err(Error::Invalid("reps and grid_points must be >= 1".into()));
        }
        if self.rho_list.is_empty() {
            return Err(Error::Empty("rho list"));
        }
        if self.n_list.is_empty() {
            return Err(Error::Empty("n list"));
        }
        Ok(())
    }

    /// One `key=value` line per setting; unset optional keys are omitted.
    pub fn render(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![("alpha".to_string(), self.alpha.to_string())];
        if let Some(m) = &self.matrix_a {
            e.push(("matrix_a".into(), format_matrix(m)));
        }
        if let Some(m) = &self.matrix_b {
            e.push(("matrix_b".into(), format_matrix(m)));
        }
        e.push(("rho_list".into(), join(&self.rho_list)));
        e.push(("n_list".into(), join(&self.n_list)));
        e.push(("c".into(), self.c.to_string()));
        e.push(("reps".into(), self.reps.to_string()));
        e.push(("grid_mode".into(), self.grid_mode.name().into()));
        e.push(("grid_points".into(), self.grid_points.to_string()));
        e.push(("seed".into(), self.seed.to_string()));
        if let Some(o) = &self.out {
            e.push(("out".into(), o.clone()));
        }
        e.push(("center_xi".into(), self.center_xi.to_string()));
        e
    }

    pub fn matrix_a(&self) -> Result<MixingMatrix2> {
        self.matrix_a.map_or_else(|| MixingMatrix2::lower_pair(self.alpha), Ok)
    }

    pub fn matrix_b(&self) -> Result<MixingMatrix2> {
        self.matrix_b.map_or_else(|| MixingMatrix2::upper_pair(self.alpha), Ok)
    }

    pub fn xi(&self) -> ComponentLaw {
        if self.center_xi {
            ComponentLaw::CenteredExponential
        } else {
            ComponentLaw::StandardExponential
        }
    }

    /// Takes the grid of `rho` and `n`, `N` and `M` from a preset.
    pub fn apply_preset(&mut self, preset: Preset, scale: Scale) -> Result<()> {
        let s = preset.sweep(scale, self.alpha, self.xi(), self.seed)?;
        self.rho_list = preset.rhos();
        self.n_list = s.n_list;
        self.reps = s.reps;
        self.grid_mode = s.grid.mode;
        self.grid_points = s.grid.points;
        self.c = s.c;
        Ok(())
    }

    pub fn sweep(&self, label: &str) -> Result<SweepConfig> {
        self.validate()?;
        Ok(SweepConfig {
            label: label.to_string(),
            a: self.matrix_a()?,
            b: self.matrix_b()?,
            xi: self.xi(),
            zeta: ComponentLaw::StandardNormal,
            schedules: self.rho_list.iter().map(|&rho| BetaSchedule::Power { rho }).collect(),
            n_list: self.n_list.clone(),
            c: self.c,
            reps: self.reps,
            grid: EvalGridSpec {
                mode: self.grid_mode,
                points: self.grid_points,
            },
            seed: self.seed,
            retain: false,
            quad: QuadConfig::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("\n# comment\n  \n").unwrap(), Config::default());
    }

    #[test]
    fn alpha_builds_the_matrix_pair() {
        let c = Config::parse("alpha=0.4").unwrap();
        let s = 0.84f64.sqrt();
        assert_eq!(c.matrix_a().unwrap().rows(), [[1.0, 0.0], [0.4, s]]);
        assert_eq!(c.matrix_b().unwrap().rows(), [[s, 0.4], [0.0, 1.0]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("alpha=1.5").is_err());
        assert!(Config::parse("alpha=-1").is_err());
        assert!(Config::parse("colour=red").is_err());
        assert!(Config::parse("alpha").is_err());
        assert!(Config::parse("reps=ten").is_err());
        assert!(Config::parse("matrix_a=1,2,2,4").is_err());
        assert!(Config::parse("matrix_a=1,2,3").is_err());
        assert!(Config::parse("grid_mode=spiral").is_err());
    }

    #[test]
    fn round_trips() {
        assert_eq!(Config::parse(&Config::default().render()).unwrap(), Config::default());
        let text = "alpha=0.3\nmatrix_a=2,0.5,0.25,1\nrho_list=0.2,0.3\nn_list=10,20\nc=1.5\nreps=7\n\
                    grid_mode=quantile-tensor\ngrid_points=9\nseed=3\nout=x.csv\ncenter_xi=false\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.render(), text);
        assert_eq!(Config::parse(&c.render()).unwrap(), c);
    }

    #[test]
    fn sweep_matches_preset() {
        let mut c = Config::default();
        c.apply_preset(Preset::SizeSweep, Scale::Desk).unwrap();
        let from_cfg = c.sweep("fig1-left").unwrap();
        let preset = Preset::SizeSweep
            .sweep(Scale::Desk, 0.4, ComponentLaw::CenteredExponential, DEFAULT_SEED)
            .unwrap();
        assert_eq!(from_cfg, preset);
    }
}
