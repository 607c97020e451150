//! Structured run reports with a deterministic body.

use serde::Serialize;
use serde_json::Value;

/// Everything but the wall time is a pure function of config + seed, so the
/// body serializes byte-identically across reruns.
#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub config: Value,
    pub results: Value,
    pub verdict: String,
    pub wall_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Report {
    pub fn new(config: Value, results: Value, verdict: String, wall_ms: u128) -> Self {
        Report {
            tool: ToolInfo {
                name: "witten",
                version: env!("CARGO_PKG_VERSION"),
            },
            config,
            results,
            verdict,
            wall_ms,
        }
    }

}
