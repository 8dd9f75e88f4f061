use std::net::SocketAddr;
use std::time::Duration;

use thiserror::Error;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_TTL_SECS: u64 = 3600;
pub const DEFAULT_MAX_BODY_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{name}: cannot parse `{value}`")]
    Invalid { name: &'static str, value: String },
}

#[derive(Debug, Clone)]
pub struct Config {
    pub bind: SocketAddr,
    pub session_ttl: Duration,
    pub max_body_bytes: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: DEFAULT_BIND.parse().expect("default bind address parses"),
            session_ttl: Duration::from_secs(DEFAULT_TTL_SECS),
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
        }
    }
}

fn var<T: std::str::FromStr>(name: &'static str) -> Result<Option<T>, ConfigError> {
    match std::env::var(name) {
        Ok(value) => value.trim().parse().map(Some).map_err(|_| ConfigError::Invalid { name, value }),
        Err(_) => Ok(None),
    }
}

impl Config {
    /// Reads `IDSS_BIND`, `IDSS_SESSION_TTL_SECS` and `IDSS_MAX_BODY_BYTES`,
    /// falling back to the defaults for unset variables.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut c = Config::default();
        if let Some(bind) = var("IDSS_BIND")? {
            c.bind = bind;
        }
        if let Some(secs) = var::<u64>("IDSS_SESSION_TTL_SECS")? {
            c.session_ttl = Duration::from_secs(secs);
        }
        if let Some(bytes) = var("IDSS_MAX_BODY_BYTES")? {
            c.max_body_bytes = bytes;
        }
        Ok(c)
    }
}
