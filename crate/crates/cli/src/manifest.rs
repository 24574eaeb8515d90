use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header written in front of every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Value,
    pub config: Value,
    pub version: String,
    /// Seconds since the Unix epoch, supplied by the caller; never read from the clock.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, input: Value, config: Value, timestamp: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            input,
            config,
            version: VERSION.to_string(),
            timestamp,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub report: &'a T,
}

/// `--timestamp`, else `SOURCE_DATE_EPOCH`, else 0.
pub fn resolve_timestamp(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
    })
    .unwrap_or(0)
}

pub fn render<T: Serialize>(manifest: &RunManifest, report: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, report }).expect("reports serialize");
    s.push('\n');
    s
}
