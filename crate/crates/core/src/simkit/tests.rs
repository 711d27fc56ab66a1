use super::*;
use crate::vc::VoronoiConstellation;
use statrs::function::erf::erfc;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn pam_config(snr: Vec<f64>) -> SweepConfig {
    let mut cfg = SweepConfig::new("Z1/2Z1", snr);
    cfg.offset = OffsetKind::Exact;
    cfg.offset_values = Some(vec![0.5]);
    cfg
}

#[test]
fn config_defaults_and_toml() {
    let cfg = SweepConfig::from_toml("vc = \"Z4/16D4\"\nsnr_db = [10.0, 12.0]\n").unwrap();
    assert_eq!(cfg.max_symbols, 10_000_000);
    assert_eq!(cfg.min_bit_errors, 200);
    assert_eq!(cfg.d_policy, DPolicy::Once);
    assert_eq!(cfg.d_cap, 40);
    let back = SweepConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn config_rejections() {
    for text in [
        "vc = \"Z4/16D4\"\nsnr_db = [12.0, 10.0]\n",
        "vc = \"Z4/16D4\"\nsnr_db = [10.0, 10.0]\n",
        "vc = \"Z4/16D4\"\nsnr_db = []\n",
        "vc = \"Z4/16D4\"\nsnr_db = [1.0]\nmin_bit_errors = 99\n",
        "vc = \"Z4/16D4\"\nsnr_db = [1.0]\nd_policy = \"fixed\"\n",
        "vc = \"Z4/16D4\"\nsnr_db = [1.0]\nmapping = \"nope\"\n",
        "vc = \"Z4/16D4\"\nsnr_db = [1.0]\nunknown_key = 3\n",
        "vc = \"Z4/16D4\"\nsnr_db = [1.0]\nllr_r2 = 20\nllr_q = 10.0\n",
    ] {
        assert!(
            matches!(SweepConfig::from_toml(text), Err(crate::Error::Config(_))),
            "{text}"
        );
    }
}

#[test]
fn hash_ignores_outputs_and_threads() {
    let a = SweepConfig::new("Z4/16D4", vec![1.0]);
    let mut b = a.clone();
    b.threads = Some(3);
    b.output_csv = Some("x.csv".into());
    assert_eq!(a.hash(), b.hash());
    b.seed = 1;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn noiseless_error_rate_is_zero() {
    let mut cfg = SweepConfig::new("Z4/16D4", vec![200.0]);
    cfg.max_symbols = 20_000;
    let r = run_error_rate_sweep(&cfg).unwrap();
    let rec = &r.records[0];
    assert_eq!(rec.symbols, 20_000);
    assert_eq!(rec.bit_errors, Some(0));
    assert_eq!(rec.ser, Some(0.0));
    assert!(rec.low_confidence);
}

#[test]
fn ber_bounded_by_ser_times_bits() {
    let mut cfg = SweepConfig::new("Z4/16D4", vec![4.0, 8.0, 12.0]);
    cfg.max_symbols = 50_000;
    let r = run_error_rate_sweep(&cfg).unwrap();
    let bits = r.metadata.vc.bits_per_symbol.unwrap() as f64;
    for rec in &r.records {
        let (ber, ser) = (rec.ber.unwrap(), rec.ser.unwrap());
        assert!(
            ber <= ser + 1e-15 && ser <= 1.0 && ber >= ser / bits - 1e-15,
            "{rec:?}"
        );
        assert!(rec.bit_errors.unwrap() >= 200 || rec.symbols == 50_000);
    }
}

/// Lattice decoding of ±½ returns the nearest point of ℤ − ½ modulo 2, so the
/// symbol is correct exactly when the noise lies in (2k − ½, 2k + ½) for some k.
fn two_pam_lattice_ber(sigma: f64) -> f64 {
    let correct: f64 = (-20i32..=20)
        .map(|k| {
            let c = 2.0 * k as f64;
            q((c - 0.5) / sigma) - q((c + 0.5) / sigma)
        })
        .sum();
    1.0 - correct
}

#[test]
fn two_pam_matches_gaussian_tail() {
    let cfg = pam_config(vec![0.0, 3.0, 6.0]);
    let r = run_error_rate_sweep(&cfg).unwrap();
    assert!((r.metadata.vc.es - 0.25).abs() < 1e-12);
    for rec in &r.records {
        let sigma = (0.25 / 10f64.powf(rec.snr_db / 10.0)).sqrt();
        let p = two_pam_lattice_ber(sigma);
        let ber = rec.ber.unwrap();
        assert!(
            (ber - p).abs() < 3.0 * rec.ber_stderr.unwrap(),
            "{} dB: {ber} vs {p}",
            rec.snr_db
        );
        assert_eq!(rec.ber, rec.ser);
    }
}

#[test]
fn error_sweep_is_independent_of_worker_count() {
    let mut cfg = SweepConfig::new("Z4/16D4", vec![6.0, 9.0]);
    cfg.max_symbols = 200_000;
    cfg.seed = 5;
    cfg.threads = Some(1);
    let a = run_error_rate_sweep(&cfg).unwrap();
    cfg.threads = Some(3);
    let b = run_error_rate_sweep(&cfg).unwrap();
    assert_eq!(a.payload(), b.payload());
    assert_eq!(a.metadata.config_hash, b.metadata.config_hash);
    cfg.seed = 6;
    let c = run_error_rate_sweep(&cfg).unwrap();
    assert_ne!(a.payload(), c.payload());
}

#[test]
fn mi_sweep_is_independent_of_worker_count() {
    let mut cfg = SweepConfig::new("Z4/16D4", vec![14.0]);
    cfg.mi_samples = 1000;
    cfg.d_realizations = 1;
    cfg.threads = Some(1);
    let a = run_mi_sweep(&cfg).unwrap();
    cfg.threads = Some(2);
    let b = run_mi_sweep(&cfg).unwrap();
    assert_eq!(a.payload(), b.payload());
}

#[test]
fn checkpoints_resume_and_guard_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::new("Z4/16D4", vec![6.0, 9.0]);
    cfg.max_symbols = 30_000;
    cfg.checkpoint_dir = Some(dir.path().to_path_buf());
    let a = run_error_rate_sweep(&cfg).unwrap();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    let b = run_error_rate_sweep(&cfg).unwrap();
    assert_eq!(a.records, b.records);
    cfg.seed = 9;
    assert!(matches!(
        run_error_rate_sweep(&cfg),
        Err(crate::Error::Config(_))
    ));
}

#[test]
fn mi_sweep_backends_agree() {
    let mut cfg = SweepConfig::new("Z4/16D4", vec![10.0, 16.0, 22.0]);
    cfg.mi_samples = 2000;
    cfg.seed = 3;
    cfg.mi_backend = MiBackendKind::Exact;
    let exact = run_mi_sweep(&cfg).unwrap();
    cfg.mi_backend = MiBackendKind::Importance;
    cfg.d_policy = DPolicy::PerSnr;
    let imp = run_mi_sweep(&cfg).unwrap();
    for (e, i) in exact.records.iter().zip(&imp.records) {
        let (me, mi) = (e.mi.unwrap(), i.mi.unwrap());
        let s = e.mi_stderr.unwrap().hypot(i.mi_stderr.unwrap());
        assert!(
            (me - mi).abs() < 3.0 * s,
            "{} dB: {me} vs {mi} ± {s}",
            e.snr_db
        );
        assert!(i.d.is_some() && e.d.is_none());
    }
}

#[test]
fn outputs_carry_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = pam_config(vec![3.0]);
    cfg.max_symbols = 10_000;
    cfg.output_csv = Some(dir.path().join("r.csv"));
    cfg.output_json = Some(dir.path().join("r.json"));
    let r = run_error_rate_sweep(&cfg).unwrap();
    r.write_outputs().unwrap();
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1 kind=ber"));
    assert!(csv.contains(&r.metadata.config_hash));
    assert!(csv.contains(&CSV_HEADER.join(",")));
    let back: SweepResult =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn merit_rows_satisfy_rate_identity() {
    let specs: Vec<String> = ["Z4/4D4", "Z4/3D4", "Z4/4D4R", "Z8/8E8", "Z4/4Z4", "D4/4D4"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let opts = MeritOptions {
        mc_samples: 20_000,
        ..Default::default()
    };
    let rows = tabulate_merits(&specs, &opts).unwrap();
    for r in &rows {
        assert!(r.size_identity, "{}", r.vc);
        assert!(
            (r.beta - r.beta_formula).abs() < 1e-9,
            "{}: {} vs {}",
            r.vc,
            r.beta,
            r.beta_formula
        );
    }
    assert_eq!(rows[0].beta_exact, Some((9 * 2, 4)));
    assert_eq!(rows[1].beta_exact, None);
    assert!((rows[2].beta - rows[0].beta - 1.0).abs() < 1e-12);
    assert!(rows[4].gain_db.abs() < 1e-9);
    assert_eq!(rows[3].gs_asymptote_db, Some(0.653));
    let mut out = Vec::new();
    write_merits_csv(&mut out, &rows).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap().lines().count(),
        rows.len() + 1
    );
}

#[test]
fn merit_row_matches_constellation() {
    let vc =
        VoronoiConstellation::from_spec("Z2/6Z2", None, crate::vc::OffsetPolicy::Auto { seed: 0 })
            .unwrap();
    let r = merit_row(&vc, "Z2/6Z2", &MeritOptions::default()).unwrap();
    assert_eq!(r.size, "36");
    assert!((r.es - 2.0 * 35.0 / 12.0).abs() < 1e-9);
}
