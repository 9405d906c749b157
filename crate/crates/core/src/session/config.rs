use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::context::ContextConfig;
use crate::error::{Error, Result};
use crate::icn::IcnConfig;
use crate::metrics::MetricsConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    /// maximum re-adjustment rounds per idea
    pub adjustment_cap: u32,
    /// convergence tolerance, in delta elements
    pub eps: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig { adjustment_cap: 3, eps: 0 }
    }
}

/// Every tunable of a session. Read from a sectioned `key = value` file:
///
/// ```text
/// [context]
/// window = 5
/// [session]
/// adjustment_cap = 3
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub context: ContextConfig,
    pub icn: IcnConfig,
    pub metrics: MetricsConfig,
    pub session: LoopConfig,
}

impl SessionConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SessionConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.context.validate().map_err(Error::Config)?;
        self.icn.validate().map_err(Error::Config)?;
        self.metrics.validate().map_err(Error::Config)?;
        if self.session.adjustment_cap == 0 {
            return Err(Error::Config("session.adjustment_cap must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(SessionConfig::parse("").unwrap(), SessionConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = SessionConfig::parse("[context]\nwindow = 7\n\n[session]\neps = 2\n").unwrap();
        assert_eq!(cfg.context.window, 7);
        assert_eq!(cfg.context.decay, 0.7);
        assert_eq!(cfg.session.eps, 2);
        assert_eq!(cfg.session.adjustment_cap, 3);
    }

    #[test]
    fn zero_cap_is_rejected() {
        let err = SessionConfig::parse("[session]\nadjustment_cap = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.contains("adjustment_cap")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SessionConfig::parse("[context]\nwindw = 3\n").is_err());
        assert!(SessionConfig::parse("[contxt]\n").is_err());
    }
}
