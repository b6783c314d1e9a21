use serde::{Deserialize, Serialize};

use super::experiment::{SimulationRecord, TruthRecord};
use crate::bootstrap::{IntervalMethod, Statistic};
use crate::datagen::EllipticalLaw;
use crate::stats::{mean, median, proportion_se, sample_variance};

/// Aggregates of one `(law, r, c, statistic)` cell.
///
/// Metric names, in output order:
/// `nsim`, `p`, `lambda1`, `true_value`, `mean_estimate`, `true_bias`,
/// `true_variance`, `truth_simulations`, `median_boot_bias`,
/// `median_boot_variance`, `median_variance_ratio`, then for each interval
/// method `m` in `percentile`, `normal`, `bc`: `coverage_true_m`,
/// `coverage_true_m_se`, `coverage_null_m`, `coverage_null_m_se`, and finally
/// `bc_fallback_rate`. Metrics that are undefined for a cell are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub law: EllipticalLaw,
    pub ratio: f64,
    pub multiplier: f64,
    pub statistic: Statistic,
    pub metrics: Vec<(String, f64)>,
}

impl SummaryRow {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn find(&self, law: EllipticalLaw, ratio: f64, multiplier: f64, statistic: Statistic) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.law == law && r.ratio == ratio && r.multiplier == multiplier && r.statistic == statistic)
    }
}

type Key = (EllipticalLaw, u64, u64, Statistic);

fn group<T>(items: &[T], key: impl Fn(&T) -> Key) -> Vec<(Key, Vec<&T>)> {
    let mut groups: Vec<(Key, Vec<&T>)> = Vec::new();
    for item in items {
        let k = key(item);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(item),
            None => groups.push((k, vec![item])),
        }
    }
    groups
}

fn coverage(
    records: &[&SimulationRecord],
    method: IntervalMethod,
    target: impl Fn(&SimulationRecord) -> Option<f64>,
) -> Option<f64> {
    let mut hits = 0usize;
    for r in records {
        let (lo, hi) = r.interval(method)?;
        let t = target(r)?;
        if lo <= t && t <= hi {
            hits += 1;
        }
    }
    Some(hits as f64 / records.len() as f64)
}

/// Per-cell medians, biases and coverages. True bias and variance use the
/// independent `truth` records for a cell when present, otherwise the
/// point estimates of the bootstrapped simulations themselves.
pub fn summarize(records: &[SimulationRecord], truth: &[TruthRecord]) -> SummaryTable {
    let truth_groups = group(truth, |t| {
        (
            EllipticalLaw::Gaussian,
            t.ratio.to_bits(),
            t.multiplier.to_bits(),
            t.statistic,
        )
    });
    let rows = group(records, |r| {
        (r.law, r.ratio.to_bits(), r.multiplier.to_bits(), r.statistic)
    })
    .into_iter()
    .map(|((law, rb, cb, statistic), recs)| {
        let first = recs[0];
        let nsim = recs.len();
        let mut metrics: Vec<(String, f64)> = Vec::new();
        let mut put = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                metrics.push((name.to_string(), v));
            }
        };
        put("nsim", Some(nsim as f64));
        put("p", Some(first.p as f64));
        put("lambda1", Some(first.lambda1));
        put("true_value", first.true_value);

        let own: Vec<f64> = recs.iter().map(|r| r.point_estimate).collect();
        let independent: Option<Vec<f64>> = truth_groups
            .iter()
            .find(|((_, r, c, s), _)| *r == rb && *c == cb && *s == statistic)
            .map(|(_, ts)| ts.iter().map(|t| t.point_estimate).collect());
        let truth_sample = independent.as_deref().unwrap_or(&own);
        let true_variance = sample_variance(truth_sample);
        put("mean_estimate", Some(mean(&own)));
        put("true_bias", first.true_value.map(|t| mean(truth_sample) - t));
        put("true_variance", true_variance);
        put("truth_simulations", Some(truth_sample.len() as f64));

        let biases: Vec<f64> = recs.iter().map(|r| r.boot_bias).collect();
        put("median_boot_bias", Some(median(&biases)));
        let variances: Option<Vec<f64>> = recs.iter().map(|r| r.boot_variance).collect();
        if let Some(v) = variances {
            put("median_boot_variance", Some(median(&v)));
            if let Some(tv) = true_variance.filter(|tv| *tv > 0.0) {
                let ratios: Vec<f64> = v.iter().map(|b| b / tv).collect();
                put("median_variance_ratio", Some(median(&ratios)));
            }
        }
        for method in IntervalMethod::ALL {
            let name = method.name();
            let ct = coverage(&recs, method, |r| r.true_value);
            put(&format!("coverage_true_{name}"), ct);
            put(&format!("coverage_true_{name}_se"), ct.map(|c| proportion_se(c, nsim)));
            let cn = coverage(&recs, method, |r| r.null_value);
            put(&format!("coverage_null_{name}"), cn);
            put(&format!("coverage_null_{name}_se"), cn.map(|c| proportion_se(c, nsim)));
        }
        if recs.iter().all(|r| r.boot_variance.is_some()) {
            let fb = recs.iter().filter(|r| r.bc_fallback).count() as f64 / nsim as f64;
            put("bc_fallback_rate", Some(fb));
        }
        SummaryRow {
            law,
            ratio: first.ratio,
            multiplier: first.multiplier,
            statistic,
            metrics,
        }
    })
    .collect();
    SummaryTable { rows }
}
