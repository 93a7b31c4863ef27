use std::path::Path;

use crate::error::{Error, Result};
use crate::fasum::{parse_pairs, FasumConfig};
use crate::fc::{fc_config, Transform};
use crate::metrics::FactccConfig;

/// Everything a subcommand may read from the configuration.
///
/// Keys in a config file are either [`FasumConfig`] keys, `fc.<key>`
/// overrides applied to the corrector's derived config, `factcc.<key>`
/// classifier keys, or the run keys `per_pair` and `transforms`
/// (comma-separated). `seed` feeds every random choice of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fasum: FasumConfig,
    pub corrector: FasumConfig,
    pub factcc: FactccConfig,
    pub per_pair: usize,
    pub transforms: Vec<Transform>,
    pub seed: u64,
}

impl RunConfig {
    /// Precedence, lowest first: desk defaults, `preset`, the file at
    /// `path`, then the `seed` flag.
    pub fn resolve(preset: Option<&str>, path: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let fasum = match preset {
            Some(name) => FasumConfig::preset(name)?,
            None => FasumConfig::desk(),
        };
        let mut pairs = Vec::new();
        if let Some(path) = path {
            if !path.is_file() {
                return Err(Error::FileNotFound(path.to_path_buf()));
            }
            pairs = parse_pairs(&std::fs::read_to_string(path)?)?;
        }
        Self::from_pairs(fasum, &pairs, seed)
    }

    pub fn from_pairs(mut fasum: FasumConfig, pairs: &[(String, String)], seed: Option<u64>) -> Result<Self> {
        let mut factcc = FactccConfig::default();
        let mut fc_overrides = Vec::new();
        let mut per_pair = 3;
        let mut transforms = Transform::CORRUPTING.to_vec();
        for (key, value) in pairs {
            if let Some(k) = key.strip_prefix("factcc.") {
                if k == "seed" {
                    return Err(Error::ConfigInvalid("`factcc.seed` is set through `seed`".into()));
                }
                factcc.set(k, value)?;
            } else if let Some(k) = key.strip_prefix("fc.") {
                fc_overrides.push((k, value.as_str()));
            } else if key == "per_pair" {
                per_pair = value
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad value `{value}` for `per_pair`")))?;
            } else if key == "transforms" {
                transforms = value
                    .split(',')
                    .map(|t| {
                        Transform::parse(t.trim())
                            .ok_or_else(|| Error::ConfigInvalid(format!("unknown transform `{}`", t.trim())))
                    })
                    .collect::<Result<_>>()?;
            } else {
                fasum.set(key, value)?;
            }
        }
        if let Some(seed) = seed {
            fasum.seed = seed;
        }
        let mut corrector = fc_config(&fasum);
        for (k, v) in fc_overrides {
            corrector.set(k, v)?;
        }
        factcc.seed = fasum.seed;
        fasum.validate()?;
        corrector.validate()?;
        factcc.validate()?;
        Ok(Self {
            seed: fasum.seed,
            fasum,
            corrector,
            factcc,
            per_pair,
            transforms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn flags_beat_file_beats_preset() {
        let base = FasumConfig::preset("paper-xsum").unwrap();
        let cfg = RunConfig::from_pairs(base, &kv(&[("beam_width", "3"), ("seed", "5")]), Some(9)).unwrap();
        assert_eq!(cfg.fasum.beam_width, 3);
        assert_eq!(cfg.fasum.max_summary_len, 62);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.factcc.seed, 9);
        assert_eq!(cfg.corrector.seed, 9);
    }

    #[test]
    fn prefixed_and_run_keys() {
        let cfg = RunConfig::from_pairs(
            FasumConfig::desk(),
            &kv(&[
                ("factcc.epochs", "2"),
                ("fc.epochs", "7"),
                ("per_pair", "1"),
                ("transforms", "negation, entity_swap"),
            ]),
            None,
        )
        .unwrap();
        assert_eq!(cfg.factcc.epochs, 2);
        assert_eq!(cfg.corrector.epochs, 7);
        assert!(!cfg.corrector.use_kg);
        assert_eq!(cfg.per_pair, 1);
        assert_eq!(cfg.transforms, vec![Transform::Negation, Transform::EntitySwap]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for bad in [
            ("nope", "1"),
            ("heads", "x"),
            ("transforms", "rot13"),
            ("heads", "3"),
        ] {
            let r = RunConfig::from_pairs(FasumConfig::desk(), &kv(&[bad]), None);
            assert!(matches!(r, Err(Error::ConfigInvalid(_))), "{bad:?}");
        }
        assert!(matches!(
            RunConfig::resolve(Some("huge"), None, None),
            Err(Error::ConfigInvalid(_))
        ));
    }
}
