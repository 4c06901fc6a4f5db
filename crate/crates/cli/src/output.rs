use std::fs;
use std::process::ExitCode;

use anisohardy::error::Result;
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// CSV body plus JSON summary of one verifier run.
pub struct Outcome {
    pub name: &'static str,
    pub csv: String,
    pub summary: Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.get("pass").and_then(Value::as_bool).unwrap_or(false)
    }

    /// Write `<out>/<name>.csv` and `<out>/<name>.json` when an output
    /// directory is set, then print the summary line.
    pub fn emit(&self, cfg: &ExperimentConfig) -> Result<ExitCode> {
        let text = serde_json::to_string(&self.summary).expect("summary serializes");
        if let Some(dir) = &cfg.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{}.csv", self.name)), &self.csv)?;
            fs::write(dir.join(format!("{}.json", self.name)), format!("{}\n", text))?;
        }
        println!("{}", text);
        Ok(ExitCode::from(if self.passed() { EXIT_PASS } else { EXIT_VIOLATION }))
    }
}

/// JSON number, or `null` for NaN and infinities.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
