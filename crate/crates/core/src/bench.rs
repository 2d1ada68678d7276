//! Corpus benchmark: every method at every vertex budget on every scan.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::extraction::ExtractionConfig;
use crate::geometry::Point2;
use crate::methods::{run_method, Method, MethodError};
use crate::metrics::{a_value, f_value, rmse};
use crate::optimization::OptimizerOptions;
use crate::scan::Scan;
use crate::sensor_model::ConstantVariance;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "PLE_THREADS";

/// One scan of a benchmark corpus.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub id: String,
    pub scan: Scan,
    /// Ground-truth polygon, for the area error.
    pub truth: Option<Vec<Point2>>,
    pub sensor: Point2,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub budgets: Vec<usize>,
    /// Template for extraction; `max_vertices` is overridden per budget.
    pub extraction: ExtractionConfig,
    pub optimizer: OptimizerOptions,
    /// Worker threads; `None` uses [`THREADS_VAR`] or all cores.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            budgets: vec![10, 20, 30, 40, 50],
            extraction: ExtractionConfig::default(),
            optimizer: OptimizerOptions::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub budget: usize,
    pub scan_index: usize,
    pub scan_id: String,
    /// `None` when no ray hits the map.
    pub rmse: Option<f64>,
    pub f_value: f64,
    /// `None` without ground truth or when the area error is undefined.
    pub a_value: Option<f64>,
    /// Seconds spent in the method itself.
    pub time: f64,
    pub vertices: usize,
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Thread count from [`THREADS_VAR`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn evaluate(case: &BenchCase, index: usize, method: Method, budget: usize, config: &BenchConfig) -> Result<BenchRow, MethodError> {
    let extraction = ExtractionConfig {
        max_vertices: budget,
        ..config.extraction.clone()
    };
    let noise = ConstantVariance::default();
    let start = Instant::now();
    let map = run_method(method, &case.scan, &extraction, &noise, &config.optimizer)?;
    let time = start.elapsed().as_secs_f64();
    Ok(BenchRow {
        method,
        budget,
        scan_index: index,
        scan_id: case.id.clone(),
        rmse: rmse(&case.scan, &map).ok(),
        f_value: f_value(&case.scan, &map),
        a_value: case.truth.as_ref().and_then(|t| a_value(&map, t, case.sensor).ok()),
        time,
        vertices: map.vertex_count(),
    })
}

/// Runs the benchmark. Rows are ordered by method (in the order given),
/// budget and scan index, whatever the scheduling.
pub fn run_bench(cases: &[BenchCase], config: &BenchConfig) -> Result<Vec<BenchRow>, MethodError> {
    let jobs: Vec<(Method, usize, usize)> = config
        .methods
        .iter()
        .flat_map(|&m| {
            config
                .budgets
                .iter()
                .flat_map(move |&j| (0..cases.len()).map(move |i| (m, j, i)))
        })
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(m, j, i)| evaluate(&cases[i], i, m, j, config))
            .collect::<Result<Vec<_>, _>>()
    };
    match config.threads.or_else(threads_from_env) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    }
}

/// Writes rows as CSV with columns
/// `method,J,scan_id,rmse_m,f,a,time_s,vertices`; the `a` column is left
/// out when `with_area` is false. Undefined values are empty fields.
pub fn write_csv<W: Write>(rows: &[BenchRow], with_area: bool, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["method", "J", "scan_id", "rmse_m", "f"];
    if with_area {
        header.push("a");
    }
    header.extend(["time_s", "vertices"]);
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.method.name().to_string(),
            r.budget.to_string(),
            r.scan_id.clone(),
            opt(r.rmse),
            r.f_value.to_string(),
        ];
        if with_area {
            rec.push(opt(r.a_value));
        }
        rec.extend([r.time.to_string(), r.vertices.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    /// `None` for an empty sample. A single value has standard error 0.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return None;
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, se, n })
    }
}

/// Per-(method, budget) aggregate over scans.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub budget: usize,
    pub scans: usize,
    pub rmse: Option<MeanSe>,
    pub f_value: Option<MeanSe>,
    pub a_value: Option<MeanSe>,
    pub time: Option<MeanSe>,
}

/// Aggregates rows in their existing (method, budget) order. Undefined
/// values are left out of their column's mean.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].method, rows[start].budget);
        let end = start + rows[start..].iter().take_while(|r| (r.method, r.budget) == key).count();
        let group = &rows[start..end];
        out.push(SummaryRow {
            method: key.0,
            budget: key.1,
            scans: group.len(),
            rmse: MeanSe::of(group.iter().filter_map(|r| r.rmse)),
            f_value: MeanSe::of(group.iter().map(|r| r.f_value)),
            a_value: MeanSe::of(group.iter().filter_map(|r| r.a_value)),
            time: MeanSe::of(group.iter().map(|r| r.time)),
        });
        start = end;
    }
    out
}

/// Plain-text table of a summary.
pub fn format_summary(summary: &[SummaryRow]) -> String {
    let cell = |m: Option<MeanSe>, scale: f64| match m {
        Some(m) => format!("{:.4} ± {:.4}", m.mean * scale, m.se * scale),
        None => "-".to_string(),
    };
    let mut s = format!(
        "{:<6} {:>4} {:>6}  {:>19}  {:>17}  {:>17}  {:>19}\n",
        "method", "J", "scans", "rmse [m]", "f", "a", "time [ms]"
    );
    for r in summary {
        s.push_str(&format!(
            "{:<6} {:>4} {:>6}  {:>19}  {:>17}  {:>17}  {:>19}\n",
            r.method.name(),
            r.budget,
            r.scans,
            cell(r.rmse, 1.0),
            cell(r.f_value, 1.0),
            cell(r.a_value, 1.0),
            cell(r.time, 1e3),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{corpus, SimConfig};

    fn cases(n: usize) -> Vec<BenchCase> {
        corpus(&SimConfig::with_vertices(5), n, 3)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, c)| BenchCase {
                id: format!("sim{i}"),
                scan: c.scan,
                truth: Some(c.truth.vertices().to_vec()),
                sensor: Point2::ORIGIN,
            })
            .collect()
    }

    #[test]
    fn empty_corpus_gives_header_only() {
        let rows = run_bench(&[], &BenchConfig::default()).unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&rows, true, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "method,J,scan_id,rmse_m,f,a,time_s,vertices\n");
        let mut buf = Vec::new();
        write_csv(&rows, false, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "method,J,scan_id,rmse_m,f,time_s,vertices\n");
    }

    #[test]
    fn rows_are_ordered_and_thread_independent() {
        let cases = cases(3);
        let config = |threads| BenchConfig {
            methods: vec![Method::Sam, Method::Vvl, Method::Ple],
            budgets: vec![8, 4],
            threads: Some(threads),
            ..Default::default()
        };
        let strip = |rows: Vec<BenchRow>| -> Vec<BenchRow> {
            rows.into_iter().map(|r| BenchRow { time: 0.0, ..r }).collect()
        };
        let a = strip(run_bench(&cases, &config(1)).unwrap());
        let b = strip(run_bench(&cases, &config(3)).unwrap());
        assert_eq!(a, b);
        let keys: Vec<(Method, usize, usize)> = a.iter().map(|r| (r.method, r.budget, r.scan_index)).collect();
        assert_eq!(keys[0], (Method::Sam, 8, 0));
        assert_eq!(keys[3], (Method::Sam, 4, 0));
        assert_eq!(keys[6], (Method::Vvl, 8, 0));
        assert_eq!(keys.len(), 18);
        let summary = summarize(&a);
        assert_eq!(summary.len(), 6);
        assert!(summary.iter().all(|s| s.scans == 3));
        assert!(format_summary(&summary).lines().count() == 7);
    }

    #[test]
    fn mean_and_standard_error() {
        let m = MeanSe::of([1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        // Sample variance 5/3, divided by n, square root.
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanSe::of([7.0]).unwrap().se, 0.0);
        assert!(MeanSe::of(std::iter::empty()).is_none());
    }
}
