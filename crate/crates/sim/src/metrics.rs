//! Per-tick metrics and their CSV encoding.
//!
//! One row per tick: the minimum blocklist size across cooperative robots,
//! how many Byzantine robots every cooperative robot has blocked, and the
//! 0/25/50/75/100 percentiles of the scenario error over cooperative
//! robots that rely on the network (non-observers). Output is bit-stable
//! for a given config and seed: all values are produced by deterministic
//! IEEE arithmetic and formatted with Rust's shortest-roundtrip float
//! notation.

pub const METRICS_SCHEMA: &str = "dbp-metrics-v1";

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub tick: u32,
    pub min_blocklist: usize,
    pub byz_blocked_by_all: usize,
    pub err_samples: usize,
    pub err_p0: f64,
    pub err_p25: f64,
    pub err_p50: f64,
    pub err_p75: f64,
    pub err_p100: f64,
}

impl MetricsRow {
    /// Build a row from unsorted error samples. With no samples the
    /// percentile columns are zero and `err_samples` says so.
    pub fn new(
        tick: u32,
        min_blocklist: usize,
        byz_blocked_by_all: usize,
        mut errors: Vec<f64>,
    ) -> Self {
        errors.sort_by(f64::total_cmp);
        let p = |q: f64| percentile(&errors, q);
        MetricsRow {
            tick,
            min_blocklist,
            byz_blocked_by_all,
            err_samples: errors.len(),
            err_p0: p(0.0),
            err_p25: p(0.25),
            err_p50: p(0.5),
            err_p75: p(0.75),
            err_p100: p(1.0),
        }
    }
}

/// Linear-interpolation percentile over a sorted slice; 0.0 for empty
/// input.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

pub fn csv_header() -> String {
    format!(
        "# schema: {METRICS_SCHEMA}\ntick,min_blocklist,byz_blocked_by_all,err_samples,err_p0,err_p25,err_p50,err_p75,err_p100\n"
    )
}

pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut out = csv_header();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.tick,
            r.min_blocklist,
            r.byz_blocked_by_all,
            r.err_samples,
            r.err_p0,
            r.err_p25,
            r.err_p50,
            r.err_p75,
            r.err_p100
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 1.0), 3.0);
        assert_eq!(percentile(&v, 0.5), 1.5);
        assert_eq!(percentile(&v, 0.25), 0.75);
    }

    #[test]
    fn empty_samples_produce_zero_row() {
        let row = MetricsRow::new(3, 1, 0, vec![]);
        assert_eq!(row.err_samples, 0);
        assert_eq!(row.err_p50, 0.0);
    }

    #[test]
    fn csv_round_layout() {
        let rows = vec![MetricsRow::new(0, 0, 0, vec![1.0, 2.0])];
        let csv = to_csv(&rows);
        assert!(csv.starts_with("# schema: dbp-metrics-v1\ntick,"));
        assert!(csv.trim_end().ends_with("0,0,0,2,1,1.25,1.5,1.75,2"));
    }
}
