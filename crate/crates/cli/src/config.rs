use std::path::{Path, PathBuf};

use hodgetrack::pipeline::MuPolicy;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// `mu` in a config file: a number or `"auto"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum MuValue {
    Num(f64),
    Text(String),
}

/// Optional TOML config file. Every key may be left out.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eps: Option<f64>,
    mu: Option<MuValue>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    verbosity: Option<u8>,
    threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalConfig {
    pub eps: f64,
    pub mu: MuPolicy,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub verbosity: u8,
    /// 0 lets the sweeps use every core.
    pub threads: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig { eps: 1e-6, mu: MuPolicy::Auto, seed: 0, out_dir: PathBuf::from("."), verbosity: 0, threads: 0 }
    }
}

/// Values given on the command line (or through the environment).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eps: Option<f64>,
    pub mu: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub verbosity: u8,
    pub threads: Option<usize>,
}

pub fn parse_mu(text: &str) -> Result<MuPolicy> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(MuPolicy::Auto);
    }
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(MuPolicy::Fixed(x)),
        _ => Err(CliError::usage(format!("mu must be 'auto' or a positive number, got '{text}'"))),
    }
}

impl GlobalConfig {
    /// Defaults, then the file, then flags.
    pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let fc = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::new(crate::error::EXIT_DATA, "parse", e.to_string()).at(p))?
            }
            None => FileConfig::default(),
        };
        let d = GlobalConfig::default();
        let file_mu = match fc.mu {
            None => None,
            Some(MuValue::Num(x)) => Some(parse_mu(&x.to_string())?),
            Some(MuValue::Text(t)) => Some(parse_mu(&t)?),
        };
        let mu = match &flags.mu {
            Some(t) => parse_mu(t)?,
            None => file_mu.unwrap_or(d.mu),
        };
        let eps = flags.eps.or(fc.eps).unwrap_or(d.eps);
        if !(eps.is_finite() && eps > 0.0) {
            return Err(CliError::usage(format!("eps must be positive, got {eps}")));
        }
        Ok(GlobalConfig {
            eps,
            mu,
            seed: flags.seed.or(fc.seed).unwrap_or(d.seed),
            out_dir: flags.out_dir.clone().or(fc.out_dir).unwrap_or(d.out_dir),
            verbosity: if flags.verbosity > 0 { flags.verbosity } else { fc.verbosity.unwrap_or(d.verbosity) },
            threads: flags.threads.or(fc.threads).unwrap_or(d.threads),
        })
    }

    /// Relative output paths land under the output directory.
    pub fn output(&self, p: &Path) -> PathBuf {
        self.out_dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "eps = 1e-4\nmu = 0.3\nseed = 9\nthreads = 2\n").unwrap();
        let c = GlobalConfig::load(Some(&p), &Overrides::default()).unwrap();
        assert_eq!((c.eps, c.mu, c.seed, c.threads), (1e-4, MuPolicy::Fixed(0.3), 9, 2));
        assert_eq!(c.out_dir, PathBuf::from("."));
        let flags = Overrides { eps: Some(1e-3), mu: Some("auto".into()), ..Default::default() };
        let c = GlobalConfig::load(Some(&p), &flags).unwrap();
        assert_eq!((c.eps, c.mu, c.seed), (1e-3, MuPolicy::Auto, 9));
    }

    #[test]
    fn bad_config_values() {
        assert_eq!(parse_mu("0").unwrap_err().code, 1);
        assert_eq!(parse_mu("x").unwrap_err().code, 1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "colour = 1\n").unwrap();
        let e = GlobalConfig::load(Some(&p), &Overrides::default()).unwrap_err();
        assert_eq!((e.code, e.error), (2, "parse"));
        let missing = dir.path().join("nope.toml");
        let e = GlobalConfig::load(Some(&missing), &Overrides::default()).unwrap_err();
        assert_eq!(e.path.as_deref(), Some(missing.as_path()));
    }
}
