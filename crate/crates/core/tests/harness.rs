mod common;

use common::bpam_ber;
use uwb_core::harness::{
    compare_architectures, format_csv, parse_csv, preset, run_sweep, BerPoint, SweepConfig, SweepDatapath, PRESETS, Z95,
};
use uwb_core::transmitter::Scheme;
use uwb_core::Error;

#[test]
fn ci95_covers_the_analytic_value() {
    let truth = bpam_ber(0.0);
    let covered = (0..100u64)
        .filter(|&seed| {
            let mut cfg = SweepConfig::new(Scheme::Bpam);
            cfg.ebn0_grid = vec![0.0];
            cfg.n_bits_per_point = 2000;
            cfg.base_seed = 0xC0FFEE + seed * 7919;
            let p = run_sweep(&cfg).unwrap()[0];
            (p.ber - truth).abs() <= p.ci95_halfwidth
        })
        .count();
    assert!(covered >= 90, "{covered}/100");
}

#[test]
fn csv_row_for_reference_point() {
    let p = BerPoint::new(6.0, 239, 100_000);
    let text = format_csv(&[p]);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("6.0,239,100000,2.39e-3,"), "{row}");
    let ci: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    let pr = 239.0 / 100_000.0;
    assert_eq!(ci, Z95 * (pr * (1.0 - pr) / 100_000.0_f64).sqrt());
    assert!(text.ends_with('\n'));
    assert_eq!(parse_csv(&text).unwrap(), vec![p]);
}

#[test]
fn single_config_ranks_first_everywhere() {
    let mut cfg = SweepConfig::new(Scheme::Ppm);
    cfg.ebn0_grid = vec![2.0, 6.0];
    cfg.n_bits_per_point = 2000;
    let cmp = compare_architectures(&[cfg]).unwrap();
    for r in &cmp.rankings {
        assert_eq!(r.ranks, vec![1]);
        assert_eq!(r.significant, vec![true]);
    }
}

#[test]
fn grid_mismatch_is_rejected() {
    let a = SweepConfig::new(Scheme::Bpam);
    let mut b = SweepConfig::new(Scheme::Ook);
    b.ebn0_grid = vec![0.0, 1.0];
    assert!(matches!(
        compare_architectures(&[a.clone(), b]),
        Err(Error::GridMismatch)
    ));
    let mut c = SweepConfig::new(Scheme::Ook);
    c.n_bits_per_point = 2000;
    assert!(matches!(compare_architectures(&[a, c]), Err(Error::GridMismatch)));
}

fn bpam_vs_ook(seed: u64, bits: usize) -> uwb_core::harness::Comparison {
    let cfgs: Vec<SweepConfig> = [Scheme::Bpam, Scheme::Ook]
        .into_iter()
        .map(|s| {
            let mut c = SweepConfig::new(s);
            c.ebn0_grid = vec![4.0, 8.0];
            c.n_bits_per_point = bits;
            c.base_seed = seed;
            c
        })
        .collect();
    compare_architectures(&cfgs).unwrap()
}

#[test]
fn bpam_ranked_above_ook_with_significance() {
    let cmp = bpam_vs_ook(11, 100_000);
    let (b, o) = (cmp.index_of("th-bpam").unwrap(), cmp.index_of("th-ook").unwrap());
    for r in &cmp.rankings {
        assert_eq!(r.ranks[b], 1, "{}", r.ebn0_db);
        assert!(r.better[b][o] && r.significant[b], "{}", r.ebn0_db);
    }
    let table = cmp.render_table();
    assert!(table.contains("1:th-bpam*"), "{table}");
}

#[test]
fn significant_rankings_are_seed_stable() {
    let a = bpam_vs_ook(1, 20_000);
    let b = bpam_vs_ook(2, 20_000);
    for (ra, rb) in a.rankings.iter().zip(&b.rankings) {
        for i in 0..ra.ranks.len() {
            if ra.significant[i] && rb.significant[i] {
                assert_eq!(ra.ranks[i], rb.ranks[i], "{}", ra.ebn0_db);
            }
        }
    }
}

#[test]
fn presets_mirror_the_implementation_table() {
    let expected = [
        ("th-ook-v1", Scheme::Ook, "energy detection", 64, 1, false, false),
        ("th-ook-v2", Scheme::Ook, "energy detection", 32, 1, false, false),
        ("th-bpam-v1", Scheme::Bpam, "simple correlation", 32, 1, false, false),
        ("th-bpam-v2", Scheme::Bpam, "simple correlation", 32, 1, false, false),
        ("th-ppm-v1", Scheme::Ppm, "double correlation", 32, 1, false, false),
        ("th-ppm-v2", Scheme::Ppm, "double correlation", 32, 1, true, false),
        ("th-ppm-v3", Scheme::Ppm, "double correlation", 64, 1, false, true),
        ("th-ppm-v4", Scheme::Ppm, "double correlation", 64, 2, false, true),
    ];
    assert_eq!(PRESETS.len(), expected.len());
    for (id, scheme, principle, bits, channels, ranging, reconf) in expected {
        let p = preset(id).unwrap();
        assert_eq!(
            (
                p.scheme,
                p.principle,
                p.sample_size_bits,
                p.channels,
                p.ranging,
                p.reconfigurable
            ),
            (scheme, principle, bits, channels, ranging, reconf),
            "{id}"
        );
        let cfg = p.sweep_config();
        assert_eq!(cfg.scheme, scheme);
        assert_eq!(cfg.datapath, SweepDatapath::Quantized { bits });
        assert_eq!(cfg.preset_id(), Some(id));
        cfg.validate().unwrap();
    }
    assert!(preset("TH-PPM-V3").is_some());
    assert!(preset("th-ppm-v9").is_none());
}

#[test]
fn preset_sweeps_decode_noiselessly() {
    for p in PRESETS {
        let mut cfg = p.sweep_config();
        cfg.ebn0_grid = vec![f64::INFINITY];
        cfg.n_bits_per_point = 1000;
        assert_eq!(run_sweep(&cfg).unwrap()[0].errors, 0, "{}", p.id);
    }
}
