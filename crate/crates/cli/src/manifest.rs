use std::fmt::Write as _;

use serde_json::{json, Value};

/// Provenance block written ahead of every output.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub schema: &'static str,
    pub command: &'static str,
    pub params: Vec<(&'static str, String)>,
    pub seed: u64,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Manifest {
    fn param_line(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    /// `# key: value` lines; the timestamp comes last on a line of its own.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema: {}", self.schema);
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# params: {}", self.param_line());
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# version: {VERSION}");
        let _ = writeln!(out, "# timestamp: {}", timestamp());
        out
    }

    pub fn to_json(&self) -> Value {
        let params: serde_json::Map<String, Value> =
            self.params.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
        json!({
            "schema": self.schema,
            "command": self.command,
            "params": params,
            "seed": self.seed,
            "version": VERSION,
            "timestamp": timestamp(),
        })
    }
}
