//! Run configuration: flat `key=value` files plus command-line overrides.

use std::path::PathBuf;

use cogrates::channel::db_to_linear;
use cogrates::region::DEFAULT_DRAWS;
use cogrates::{GaussianChannelSpec, ModelVariant};

use crate::CliError;

pub const KEYS: [&str; 20] = [
    "model", "draws", "seed", "out", "p1", "p2", "p3", "q1", "q2", "q3", "a12", "a13", "a21", "a23", "a31", "a32",
    "threads", "cov", "zero_gp", "draw",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelVariant,
    /// Transmit powers in dB.
    pub p_db: [f64; 3],
    /// Linear noise variances.
    pub q: [f64; 3],
    /// `a12, a13, a21, a23, a31, a32`
    pub a: [f64; 6],
    pub draws: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub cov: Option<PathBuf>,
    /// Force every alpha and beta to zero.
    pub zero_gp: bool,
    /// Draw index used by `dump-sigma`.
    pub draw: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelVariant::CMS2,
            p_db: [10.0; 3],
            q: [1.0; 3],
            a: [0.55; 6],
            draws: DEFAULT_DRAWS,
            seed: 1,
            out: PathBuf::from("out"),
            threads: None,
            cov: None,
            zero_gp: false,
            draw: 0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("invalid value for {key}: `{value}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "model" => {
                self.model = ModelVariant::from_name(v)
                    .ok_or_else(|| CliError::Config(format!("unknown model `{v}` (cms1, cms2, pms1, pms2)")))?
            }
            "draws" => {
                self.draws = num(key, v)?;
                if self.draws == 0 {
                    return Err(CliError::Config("draws must be at least 1".into()));
                }
            }
            "seed" => self.seed = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "p1" => self.p_db[0] = num(key, v)?,
            "p2" => self.p_db[1] = num(key, v)?,
            "p3" => self.p_db[2] = num(key, v)?,
            "q1" => self.q[0] = num(key, v)?,
            "q2" => self.q[1] = num(key, v)?,
            "q3" => self.q[2] = num(key, v)?,
            "a12" => self.a[0] = num(key, v)?,
            "a13" => self.a[1] = num(key, v)?,
            "a21" => self.a[2] = num(key, v)?,
            "a23" => self.a[3] = num(key, v)?,
            "a31" => self.a[4] = num(key, v)?,
            "a32" => self.a[5] = num(key, v)?,
            "threads" => {
                let n: usize = num(key, v)?;
                if n == 0 {
                    return Err(CliError::Config("threads must be at least 1".into()));
                }
                self.threads = Some(n);
            }
            "cov" => self.cov = Some(PathBuf::from(v)),
            "zero_gp" => self.zero_gp = num(key, v)?,
            "draw" => self.draw = num(key, v)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", n + 1)))?;
            self.set(k.trim(), v).map_err(|e| CliError::Config(format!("config line {}: {}", n + 1, e.message())))?;
        }
        Ok(())
    }

    /// Linear-scale channel description; the only place dB is converted.
    pub fn spec(&self) -> Result<GaussianChannelSpec, CliError> {
        let [a12, a13, a21, a23, a31, a32] = self.a;
        let spec = GaussianChannelSpec {
            p1: db_to_linear(self.p_db[0]),
            p2: db_to_linear(self.p_db[1]),
            p3: db_to_linear(self.p_db[2]),
            q1: self.q[0],
            q2: self.q[1],
            q3: self.q[2],
            a12,
            a13,
            a21,
            a23,
            a31,
            a32,
            variant: self.model,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}
