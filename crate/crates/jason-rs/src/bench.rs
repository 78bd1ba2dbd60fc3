//! Sequential request latency benchmark.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

pub const MIN_SAMPLES: usize = 30;
/// Runs abort once failures exceed this fraction of the requested samples.
pub const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchMethod {
    #[serde(rename = "GET")]
    Get,
    #[serde(rename = "POST")]
    Post,
}

impl BenchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchMethod::Get => "GET",
            BenchMethod::Post => "POST",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GET" => Ok(BenchMethod::Get),
            "POST" => Ok(BenchMethod::Post),
            _ => Err(format!("unsupported method `{s}` (use GET or POST)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("{failures} of {attempted} requests failed (last error: {last})")]
    TooManyFailures { failures: usize, attempted: usize, last: String },
    #[error("cannot build HTTP client: {0}")]
    Client(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub method: BenchMethod,
    pub samples: usize,
    pub failures: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    /// Successful request durations in issue order.
    pub durations_ms: Vec<f64>,
}

/// Nearest-rank percentile of sorted data: the value at rank ⌈p·n⌉.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl BenchReport {
    /// Computes the summary over successful durations.
    pub fn from_durations(method: BenchMethod, durations_ms: Vec<f64>, failures: usize) -> Self {
        let mut sorted = durations_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let (min_ms, median_ms, p95_ms, max_ms) = if sorted.is_empty() {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            (sorted[0], percentile(&sorted, 0.5), percentile(&sorted, 0.95), sorted[sorted.len() - 1])
        };
        BenchReport { method, samples: durations_ms.len(), failures, min_ms, median_ms, p95_ms, max_ms, durations_ms }
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "method,sample_idx,duration_ms")?;
        for (i, d) in self.durations_ms.iter().enumerate() {
            writeln!(w, "{},{},{:.3}", self.method, i, d)?;
        }
        Ok(())
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:>7} {:>8} {:>10} {:>10} {:>10} {:>10}", "method", "samples", "failures", "min", "median", "p95", "max")?;
        write!(
            f,
            "{:<6} {:>7} {:>8} {:>8.3}ms {:>8.3}ms {:>8.3}ms {:>8.3}ms",
            self.method, self.samples, self.failures, self.min_ms, self.median_ms, self.p95_ms, self.max_ms
        )
    }
}

/// Issues `n` sequential requests to `url` and times each one. POST sends
/// `{"data": i}` with the sample index as the value.
pub fn bench(method: BenchMethod, n: usize, url: &str) -> Result<BenchReport, BenchError> {
    if n < MIN_SAMPLES {
        return Err(BenchError::TooFewSamples(n));
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(10))
        .build()
        .map_err(|e| BenchError::Client(e.to_string()))?;
    let allowed = (n as f64 * MAX_FAILURE_RATE).floor() as usize;
    let mut durations = Vec::with_capacity(n);
    let mut failures = 0;
    for i in 0..n {
        let req = match method {
            BenchMethod::Get => client.get(url),
            BenchMethod::Post => client
                .post(url)
                .header(reqwest::header::CONTENT_TYPE, "application/json")
                .body(format!("{{\"data\": {i}}}")),
        };
        let start = Instant::now();
        let result = req.send().and_then(|r| r.error_for_status()).and_then(|r| r.bytes());
        let elapsed = start.elapsed().as_secs_f64() * 1000.0;
        match result {
            Ok(_) => durations.push(elapsed),
            Err(e) => {
                failures += 1;
                tracing::warn!("request {i} failed: {e}");
                if failures > allowed {
                    return Err(BenchError::TooManyFailures { failures, attempted: i + 1, last: e.to_string() });
                }
            }
        }
    }
    Ok(BenchReport::from_durations(method, durations, failures))
}
