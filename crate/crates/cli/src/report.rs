//! Report rendering. Reports carry the resolved configuration and no
//! wall-clock data, so equal inputs give byte-identical output.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use qbc_core::adversary::{Practicality, Strategy, StrategyConfig};
use qbc_core::analysis::{write_csv, Metric, TrialStats};
use qbc_core::codes::LinearCode;
use qbc_core::protocol::ChannelParams;
use serde::Serialize;
use serde_json::Value;

use crate::Format;

#[derive(Debug, Clone, Serialize)]
pub struct CodeInfo {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl CodeInfo {
    fn of(code: &LinearCode) -> Self {
        CodeInfo { name: code.name().to_string(), n: code.n(), k: code.k(), d: code.d() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub command: &'static str,
    pub code: CodeInfo,
    pub strategy: Strategy,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<usize>,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

impl ResolvedConfig {
    pub fn new(command: &'static str, config: &StrategyConfig) -> Self {
        ResolvedConfig {
            command,
            code: CodeInfo::of(&config.code),
            strategy: config.strategy,
            trials: config.trials,
            seed: config.seed,
            channel: config.channel,
            tolerance: None,
            metrics: Vec::new(),
            param: None,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PracticalityConfig {
    command: &'static str,
    code: CodeInfo,
    channel: ChannelParams,
    margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PracticalityResult {
    lhs: f64,
    rhs: f64,
    ratio: f64,
    margin: f64,
    verdict: &'static str,
}

impl From<Practicality> for PracticalityResult {
    fn from(p: Practicality) -> Self {
        PracticalityResult {
            lhs: p.lhs,
            rhs: p.rhs,
            ratio: p.ratio,
            margin: p.margin,
            verdict: if p.pass { "Pass" } else { "Fail" },
        }
    }
}

pub enum Report {
    Stats { config: ResolvedConfig, results: Vec<TrialStats> },
    Practicality { config: PracticalityConfig, result: PracticalityResult },
}

impl Report {
    pub fn stats(config: ResolvedConfig, results: Vec<TrialStats>) -> Self {
        Report::Stats { config, results }
    }

    pub fn practicality(code: &LinearCode, channel: ChannelParams, result: Practicality) -> Self {
        Report::Practicality {
            config: PracticalityConfig { command: "practicality", code: CodeInfo::of(code), channel, margin: result.margin },
            result: result.into(),
        }
    }

    fn config_value(&self) -> anyhow::Result<Value> {
        Ok(match self {
            Report::Stats { config, .. } => serde_json::to_value(config)?,
            Report::Practicality { config, .. } => serde_json::to_value(config)?,
        })
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => {
                let body = match self {
                    Report::Stats { config, results } => serde_json::json!({ "config": config, "results": results }),
                    Report::Practicality { config, result } => serde_json::json!({ "config": config, "result": result }),
                };
                let mut text = serde_json::to_string_pretty(&body)?;
                text.push('\n');
                Ok(text)
            }
            Format::Csv => {
                let mut buf = Vec::new();
                if let Value::Object(map) = self.config_value()? {
                    for (key, value) in map {
                        let shown = match value {
                            Value::String(s) => s,
                            other => other.to_string(),
                        };
                        writeln!(buf, "# {key}={shown}")?;
                    }
                }
                match self {
                    Report::Stats { results, .. } => write_csv(results, &mut buf)?,
                    Report::Practicality { result, .. } => {
                        writeln!(buf, "lhs,rhs,ratio,margin,verdict")?;
                        writeln!(buf, "{},{},{},{},{}", result.lhs, result.rhs, result.ratio, result.margin, result.verdict)?;
                    }
                }
                Ok(String::from_utf8(buf)?)
            }
        }
    }

    /// One line per result for the terminal.
    pub fn summary(&self) -> String {
        match self {
            Report::Stats { config, results } => {
                let mut s = format!("seed={}\n", config.seed);
                for r in results {
                    if let Some(p) = r.param {
                        s.push_str(&format!("{}={p:.6} ", config.param.as_deref().unwrap_or("param")));
                    }
                    s.push_str(&format!(
                        "{} estimate={:.6} ci=[{:.6}, {:.6}] n={}",
                        r.metric, r.estimate, r.ci_low, r.ci_high, r.trials
                    ));
                    if let (Some(cf), Some(ok)) = (r.closed_form, r.within_tolerance) {
                        s.push_str(&format!(" closed_form={cf:.6} {}", if ok { "ok" } else { "OUT OF TOLERANCE" }));
                    }
                    s.push('\n');
                }
                s
            }
            Report::Practicality { result, .. } => format!(
                "{} lhs={:.6} rhs={:.6} ratio={:.4} margin={}\n",
                result.verdict, result.lhs, result.rhs, result.ratio, result.margin
            ),
        }
    }

    /// Writes the report to `path`, or to `out` when there is no path. With a
    /// path, `out` receives the summary instead.
    pub fn emit<W: Write>(&self, path: Option<&Path>, format: Format, out: &mut W) -> anyhow::Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => {
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                out.write_all(self.summary().as_bytes())?;
            }
            None => out.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}
