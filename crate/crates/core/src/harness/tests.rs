use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::bootstrap::{BootstrapDistribution, Statistic};
use crate::datagen::EllipticalLaw;
use crate::rng::RngStream;

fn tiny_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(Preset::Desk);
    cfg.n = 40;
    cfg.ratios = vec![0.25, 0.5];
    cfg.spike_multipliers = vec![0.0, 3.0];
    cfg.nsim = 3;
    cfg.replicates = 9;
    cfg.statistics = Statistic::ALL.to_vec();
    cfg.density_simulations = 2;
    cfg
}

fn record(point: f64, lo: f64, hi: f64) -> SimulationRecord {
    SimulationRecord {
        law: EllipticalLaw::Gaussian,
        ratio: 0.5,
        multiplier: 0.0,
        p: 10,
        lambda1: 1.0,
        statistic: Statistic::TopEigenvalue,
        simulation: 0,
        point_estimate: point,
        true_value: Some(1.0),
        null_value: Some(1.0),
        boot_bias: 0.25,
        boot_variance: Some(0.5),
        percentile: Some((lo, hi)),
        normal: Some((lo, hi)),
        bias_corrected: Some((lo, hi)),
        bc_fallback: false,
    }
}

#[test]
fn runs_are_deterministic_and_schedule_independent() {
    let mut cfg = tiny_config();
    cfg.ratios = vec![0.5];
    cfg.spike_multipliers = vec![0.0];
    cfg.nsim = 1;
    cfg.replicates = 1;
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    let one = with_workers(Some(1), || run_experiment(&cfg)).unwrap().unwrap();
    let eight = with_workers(Some(8), || run_experiment(&cfg)).unwrap().unwrap();
    assert_eq!(one, a);
    assert_eq!(eight, a);
    assert_eq!(a.records.len(), 3);
    assert!(a
        .records
        .iter()
        .all(|r| r.boot_variance.is_none() && r.percentile.is_none()));

    let cfg = tiny_config();
    let one = with_workers(Some(1), || run_experiment(&cfg)).unwrap().unwrap();
    let four = with_workers(Some(4), || run_experiment(&cfg)).unwrap().unwrap();
    assert_eq!(one, four);
    assert!(with_workers(Some(0), || ()).is_err());
}

#[test]
fn records_cover_every_cell_and_simulation() {
    let cfg = tiny_config();
    let res = run_experiment(&cfg).unwrap();
    assert!(res.failures.is_empty(), "{:?}", res.failures);
    assert_eq!(res.records.len(), 4 * cfg.nsim * 3);
    assert_eq!(res.samples.len(), 4 * 2 * 3);
    let cell = &res.records[0];
    assert_eq!(
        (cell.ratio, cell.multiplier, cell.p, cell.simulation),
        (0.25, 0.0, 10, 0)
    );
    let spiked = res
        .records
        .iter()
        .find(|r| r.multiplier == 3.0 && r.statistic == Statistic::Gap)
        .unwrap();
    assert!((spiked.true_value.unwrap() - 3.0 * 0.25f64.sqrt()).abs() < 1e-15);
    assert_eq!(spiked.null_value, Some(0.0));
    let ratio = res.records.iter().find(|r| r.statistic == Statistic::GapRatio).unwrap();
    assert_eq!((ratio.true_value, ratio.null_value), (None, None));
}

#[test]
fn basis_redraw_and_recentering_switches_change_results() {
    let base = tiny_config();
    let a = run_experiment(&base).unwrap();
    let mut redraw = base.clone();
    redraw.redraw_basis_per_simulation = true;
    let b = run_experiment(&redraw).unwrap();
    let spiked = |r: &ExperimentResults| r.records.iter().find(|x| x.multiplier == 3.0).unwrap().point_estimate;
    assert_ne!(spiked(&a), spiked(&b));

    let mut fixed = base.clone();
    fixed.recenter_bootstrap = false;
    let c = run_experiment(&fixed).unwrap();
    for (x, y) in a.records.iter().zip(&c.records) {
        assert!((x.point_estimate - y.point_estimate).abs() < 1e-12 * x.point_estimate.abs().max(1.0));
    }
    assert_ne!(a.records[0].boot_bias, c.records[0].boot_bias);
}

#[test]
fn failures_are_recorded_per_simulation() {
    // n = p = 3 with centring: most resamples have rank one, so λ₂ = λ₃ = 0
    // and the gap ratio is undefined.
    let mut cfg = tiny_config();
    cfg.n = 3;
    cfg.ratios = vec![1.0];
    cfg.spike_multipliers = vec![0.0, 2.0];
    cfg.nsim = 4;
    cfg.replicates = 20;
    cfg.statistics = vec![Statistic::TopEigenvalue, Statistic::GapRatio];
    let res = run_experiment(&cfg).unwrap();
    assert!(!res.failures.is_empty());
    assert!(res
        .failures
        .iter()
        .all(|f| f.simulation.is_some() && f.message.contains("gap ratio")));
    assert_eq!(res.records.len() / 2 + res.failures.len(), 2 * cfg.nsim);
}

#[test]
fn truth_runs_use_independent_streams() {
    let mut cfg = tiny_config();
    cfg.truth_simulations = Some(5);
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.truth.len(), 4 * 5 * 3);
    assert_ne!(res.truth[0].point_estimate, res.records[0].point_estimate);
    let (truth, failures) = simulate_point_estimates(&cfg, 5).unwrap();
    assert!(failures.is_empty());
    assert_eq!(truth, res.truth);
    let table = summarize(&res.records, &res.truth);
    let row = table
        .find(EllipticalLaw::Gaussian, 0.25, 0.0, Statistic::TopEigenvalue)
        .unwrap();
    assert_eq!(row.metric("truth_simulations"), Some(5.0));
    assert_eq!(row.metric("nsim"), Some(3.0));
}

#[test]
fn config_validation() {
    let mut cfg = tiny_config();
    cfg.n = 10;
    cfg.ratios = vec![0.2];
    assert!(cfg.validate().is_err(), "p = 2 cannot support the gap ratio");
    let mut cfg = tiny_config();
    cfg.spike_multipliers = vec![-1.0];
    assert!(cfg.validate().is_err());
    let mut cfg = tiny_config();
    cfg.ci_level = 1.0;
    assert!(cfg.validate().is_err());
    let mut cfg = tiny_config();
    cfg.replicates = 0;
    assert!(cfg.validate().is_err());
    assert!("desk".parse::<Preset>().is_ok() && "huge".parse::<Preset>().is_err());
    let paper = ExperimentConfig::preset(Preset::Paper);
    assert_eq!((paper.n, paper.nsim, paper.replicates), (1000, 1000, 999));
    assert_eq!(paper.spike_multipliers, PAPER_SPIKE_MULTIPLIERS.to_vec());
}

#[test]
fn config_json_round_trip_and_strictness() {
    let cfg = tiny_config();
    assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    let text = cfg.to_json().replacen("{", "{\n  \"surprise\": 1,", 1);
    assert!(matches!(
        ExperimentConfig::from_json(&text),
        Err(crate::Error::Parse { .. })
    ));
    let minimal = r#"{"n": 50, "ratios": [0.1], "spike_multipliers": [0], "nsim": 2, "B": 3, "master_seed": 7}"#;
    let m = ExperimentConfig::from_json(minimal).unwrap();
    assert_eq!(m.replicates, 3);
    assert_eq!(m.statistics, vec![Statistic::TopEigenvalue]);
    assert!(m.recenter_bootstrap && m.center && !m.redraw_basis_per_simulation);

    let res = run_experiment(&cfg).unwrap();
    let table = summarize(&res.records, &res.truth);
    let json = serde_json::to_string(&summary_json(&cfg, &table, &res.failures)).unwrap();
    assert_eq!(ExperimentConfig::from_summary_json(&json).unwrap(), cfg);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.json");
    write_summary_json(&path, &cfg, &table, &res.failures).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(ExperimentConfig::from_summary_json(&text).unwrap(), cfg);
    assert!(text.contains("artifact_version") && text.contains("coverage_true_percentile_se"));
}

#[test]
fn summary_of_a_single_simulation() {
    let r = record(2.0, 0.5, 1.5);
    let table = summarize(std::slice::from_ref(&r), &[]);
    let row = &table.rows[0];
    assert_eq!(row.metric("median_boot_bias"), Some(0.25));
    assert_eq!(row.metric("median_boot_variance"), Some(0.5));
    assert_eq!(row.metric("mean_estimate"), Some(2.0));
    assert_eq!(row.metric("true_bias"), Some(1.0));
    assert_eq!(row.metric("true_variance"), None);
    assert_eq!(row.metric("coverage_true_percentile"), Some(1.0));
    assert_eq!(row.metric("nsim"), Some(1.0));
}

#[test]
fn unbounded_intervals_always_cover() {
    let records: Vec<SimulationRecord> = (0..7)
        .map(|s| SimulationRecord {
            simulation: s,
            ..record(3.0 + s as f64, f64::NEG_INFINITY, f64::INFINITY)
        })
        .collect();
    let table = summarize(&records, &[]);
    for m in ["percentile", "normal", "bc"] {
        assert_eq!(table.rows[0].metric(&format!("coverage_true_{m}")), Some(1.0));
        assert_eq!(table.rows[0].metric(&format!("coverage_true_{m}_se")), Some(0.0));
    }
    let ratio = table.rows[0].metric("median_variance_ratio").unwrap();
    assert!((ratio - 0.5 / crate::stats::sample_variance(&[3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap()).abs() < 1e-15);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    write_records_csv(&empty, &[]).unwrap();
    assert_eq!(
        std::fs::read_to_string(&empty).unwrap().trim_end(),
        RECORD_HEADER.join(",")
    );
    write_summary_csv(&empty, &SummaryTable::default()).unwrap();
    assert_eq!(
        std::fs::read_to_string(&empty).unwrap(),
        "law,r,c,statistic,metric,value\n"
    );

    let one = SummaryTable {
        rows: vec![SummaryRow {
            law: EllipticalLaw::EllipExp,
            ratio: 0.1,
            multiplier: 1.5,
            statistic: Statistic::Gap,
            metrics: vec![("true_bias".into(), 1.0 / 3.0)],
        }],
    };
    let path = dir.path().join("one.csv");
    write_summary_csv(&path, &one).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 6);
    assert_eq!(fields[0], "ellip_exp");
    assert_eq!(fields[5].parse::<f64>().unwrap(), 1.0 / 3.0);

    let cfg = tiny_config();
    let res = run_experiment(&cfg).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_records_csv(&a, &res.records).unwrap();
    write_records_csv(&b, &run_experiment(&cfg).unwrap().records).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_records_csv(&a).unwrap(), res.records);

    let s = dir.path().join("samples.csv");
    write_samples_csv(&s, &res.samples).unwrap();
    assert_eq!(read_samples_csv(&s).unwrap(), res.samples);

    let t = dir.path().join("truth.csv");
    let (truth, _) = simulate_point_estimates(&cfg, 2).unwrap();
    write_truth_csv(&t, &truth).unwrap();
    assert_eq!(read_truth_csv(&t).unwrap(), truth);

    let missing = dir.path().join("nope").join("x.csv");
    assert!(matches!(write_records_csv(&missing, &[]), Err(crate::Error::Io { .. })));
    std::fs::write(&a, "wrong,header\n").unwrap();
    assert!(matches!(read_records_csv(&a), Err(crate::Error::Parse { .. })));
}

#[test]
fn float_format_round_trips() {
    for x in [0.1, 1.0 / 3.0, 2.914_213_562_373_095, 1e-300, -7.5e12] {
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }
    assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
}

#[test]
fn density_of_constant_replicates_is_a_point_mass() {
    let d = BootstrapDistribution::new("t", 2.0, vec![3.0; 5]).unwrap();
    let rows = emit_density_data(&[d], GridSpec::Auto { points: 50 }).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].point_mass && rows[0].x == 1.0);
}

#[test]
fn density_of_normal_replicates() {
    let mut r = RngStream::new(3).rng();
    let reps: Vec<f64> = (0..10_000).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let d = BootstrapDistribution::new("t", 0.0, reps).unwrap();
    let flat = BootstrapDistribution::new("u", 1.0, vec![1.0, 1.0]).unwrap();
    let rows = emit_density_data(
        &[d, flat],
        GridSpec::Range {
            lo: -6.0,
            hi: 6.0,
            points: 1201,
        },
    )
    .unwrap();
    let dens: Vec<&DensityRow> = rows.iter().filter(|r| r.dist == 0).collect();
    let at0 = dens.iter().find(|r| r.x.abs() < 1e-9).unwrap().density;
    assert!((at0 - 0.398_942_280_4).abs() < 0.02, "{at0}");
    let integral: f64 = dens
        .windows(2)
        .map(|w| 0.5 * (w[0].density + w[1].density) * (w[1].x - w[0].x))
        .sum();
    assert!((integral - 1.0).abs() < 0.01, "{integral}");
    assert!(rows.iter().any(|r| r.dist == 1 && r.point_mass));

    let auto = emit_density_data(&[dens_source()], GridSpec::Auto { points: 400 }).unwrap();
    let integral: f64 = auto
        .windows(2)
        .map(|w| 0.5 * (w[0].density + w[1].density) * (w[1].x - w[0].x))
        .sum();
    assert!((integral - 1.0).abs() < 0.01, "{integral}");
}

fn dens_source() -> BootstrapDistribution {
    let mut r = RngStream::new(8).rng();
    BootstrapDistribution::new(
        "t",
        1.0,
        (0..199)
            .map(|_| 5.0 + r.sample::<f64, _>(StandardNormal).exp())
            .collect(),
    )
    .unwrap()
}

#[test]
fn density_inputs() {
    assert_eq!("200".parse::<GridSpec>().unwrap(), GridSpec::Auto { points: 200 });
    assert_eq!(
        "-1:2.5:30".parse::<GridSpec>().unwrap(),
        GridSpec::Range {
            lo: -1.0,
            hi: 2.5,
            points: 30
        }
    );
    for bad in ["", "1", "a", "2:1:10", "0:1", "0:1:x"] {
        assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
    }
    let one = BootstrapDistribution::new("t", 0.0, vec![1.0]).unwrap();
    assert!(emit_density_data(&[one], GridSpec::Auto { points: 10 }).is_err());
    assert_eq!(silverman_bandwidth(&[1.0, 1.0, 1.0]), None);
    // Zero IQR but positive spread: falls back to the standard deviation.
    assert!(silverman_bandwidth(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0]).unwrap() > 0.0);
}

#[test]
fn single_replicate_concentration_is_trivial() {
    let r = concentration_experiment(30, 20, Complex64::new(1.0, 1.0), 1, 5).unwrap();
    assert_eq!(r.max_deviation, 0.0);
    assert!(!r.violated);
    assert!(r.tail.iter().all(|t| t.bound >= 0.0 && t.empirical == 0.0));
    assert!(concentration_experiment(30, 20, Complex64::new(1.0, 1e-6), 1, 5).is_err());
}

#[test]
fn spiked_check_smoke() {
    let cfg = SpikedConfig {
        n_grid: vec![100, 200],
        nsim: 20,
        replicates: 19,
        q: 2,
        ..SpikedConfig::default()
    };
    let rep = spiked_consistency_check(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 2);
    for row in &rep.rows {
        assert!(row.interlacing_ok);
        assert_eq!(row.wielandt_rate_scaled, 1.0);
        assert!(row.median_ks.unwrap() <= 1.0 && row.pooled_ks.is_some());
    }
    let bad = SpikedConfig {
        alpha: 0.4,
        ..SpikedConfig::default()
    };
    assert!(spiked_consistency_check(&bad).is_err());
}
