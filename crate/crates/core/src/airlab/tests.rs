use super::*;
use crate::vc::{OffsetPolicy, VoronoiConstellation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vc(spec: &str, offset: OffsetPolicy) -> VoronoiConstellation {
    VoronoiConstellation::from_spec(spec, None, offset).unwrap()
}

#[test]
fn channel_noise_power() {
    let ch = AwgnChannel::from_snr(4, 2.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = [0.5, -1.0, 2.0, 0.0];
    let mut y = [0.0; 4];
    let trials = 100_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..trials {
        ch.sample_into(&x, &mut rng, &mut y);
        let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        s += d;
        s2 += d * d;
    }
    let mean = s / trials as f64;
    let se = ((s2 / trials as f64 - mean * mean) / trials as f64).sqrt();
    assert!(
        (mean - ch.sigma2).abs() < 3.0 * se,
        "{mean} vs {}",
        ch.sigma2
    );

    let mut a = ChaCha8Rng::seed_from_u64(9);
    let mut b = ChaCha8Rng::seed_from_u64(9);
    let (mut ya, mut yb) = ([0.0; 4], [0.0; 4]);
    ch.sample_into(&x, &mut a, &mut ya);
    ch.sample_into(&x, &mut b, &mut yb);
    assert_eq!(ya, yb);
}

#[test]
fn single_point_density_is_the_likelihood() {
    let one = vc("Z1/1Z1", OffsetPolicy::Exact(vec![0.0]));
    assert_eq!(one.encode(&[0]).unwrap(), vec![0.0]);
    let table = ConstellationTable::build(&one, 16).unwrap();
    let ch = AwgnChannel::from_snr(1, 1.0, 5.0).unwrap();
    for y in [-1.3, 0.0, 0.2, 4.0] {
        assert!((fy_exact(&table, &ch, &[y]) - ch.log_density(y * y)).abs() < 1e-12);
    }
}

#[test]
fn two_point_midpoint_density() {
    let two = vc("Z1/2Z1", OffsetPolicy::Exact(vec![0.5]));
    let table = ConstellationTable::build(&two, 16).unwrap();
    let mut pts: Vec<f64> = (0..2).map(|i| table.point(i)[0]).collect();
    pts.sort_by(f64::total_cmp);
    assert_eq!(pts, vec![-0.5, 0.5]);
    let ch = AwgnChannel::from_snr(1, 0.25, 2.0).unwrap();
    assert!((fy_exact(&table, &ch, &[0.0]) - ch.log_density(0.25)).abs() < 1e-12);
}

#[test]
fn full_coverage_matches_exact() {
    let v = vc("Z4/4D4", OffsetPolicy::Random { seed: 2 });
    let table = ConstellationTable::build(&v, 1 << 20).unwrap();
    let tables = ShellTables::new(4, 60, 1_000_000).unwrap();
    let es = average_energy(&v, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for snr in [0.0, 8.0, 20.0] {
        let ch = AwgnChannel::from_snr(4, es, snr).unwrap();
        for y in [[0.1, -0.2, 0.3, 0.05], [1.7, -2.2, 0.4, 1.1]] {
            let exact = fy_exact(&table, &ch, &y);
            let f = fy_importance(&v, &tables, &ch, &y, 40, &mut rng).unwrap();
            assert_eq!(f.first_occupied(), Some(0));
            let est = f.log_fy(f.len());
            assert!((exact - est).abs() < 1e-12, "snr {snr}: {exact} vs {est}");
        }
    }
}

#[test]
fn sampled_shells_are_unbiased() {
    let v = vc("Z4/16D4", OffsetPolicy::Random { seed: 5 });
    let es = average_energy(&v, 0).unwrap();
    let ch = AwgnChannel::from_snr(4, es, 14.0).unwrap();
    let y = v
        .encode(&[3, 5, 7, 1])
        .unwrap()
        .iter()
        .map(|x| x + 0.3)
        .collect::<Vec<_>>();
    let d = 10;
    let full = ShellTables::new(4, d, 1_000_000).unwrap();
    let small = ShellTables::new(4, d, 40).unwrap();
    assert!((0..d).any(|k| small.is_sampled(k)));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let reference = fy_importance(&v, &full, &ch, &y, d, &mut rng).unwrap();
    let target: f64 = reference.terms.iter().sum();
    let runs = 1000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..runs {
        let f = fy_importance(&v, &small, &ch, &y, d, &mut rng).unwrap();
        assert_eq!(f.log_ref, reference.log_ref);
        let t: f64 = f.terms.iter().sum();
        s += t;
        s2 += t * t;
    }
    let mean = s / runs as f64;
    let se = ((s2 / runs as f64 - mean * mean) / runs as f64).sqrt();
    assert!(
        (mean - target).abs() < 3.0 * se,
        "{mean} vs {target} (se {se})"
    );
}

#[test]
fn noiseless_limit_needs_one_shell() {
    let v = vc("Z4/16D4", OffsetPolicy::Random { seed: 1 });
    let es = average_energy(&v, 0).unwrap();
    let ch = AwgnChannel::from_snr(4, es, 70.0).unwrap();
    let tables = ShellTables::new(4, 41, DEFAULT_SHELL_BUDGET).unwrap();
    let c = choose_d(&v, &ch, &tables, &DChoiceOptions::default()).unwrap();
    assert_eq!(c.d, 1);
    assert_eq!(c.ball_size, 1);
}

#[test]
fn d_cap_reports_non_convergence() {
    let v = vc("Z4/16D4", OffsetPolicy::Random { seed: 1 });
    let es = average_energy(&v, 0).unwrap();
    let ch = AwgnChannel::from_snr(4, es, 5.0).unwrap();
    let tables = ShellTables::new(4, 4, DEFAULT_SHELL_BUDGET).unwrap();
    let opts = DChoiceOptions {
        cap: 3,
        ..Default::default()
    };
    assert!(matches!(
        choose_d(&v, &ch, &tables, &opts),
        Err(crate::Error::NonConvergence { cap: 3, .. })
    ));
}

#[test]
fn noiseless_mi_is_beta() {
    let v = vc("Z4/4D4", OffsetPolicy::Random { seed: 4 });
    let table = ConstellationTable::build(&v, 1 << 20).unwrap();
    let es = average_energy(&v, 0).unwrap();
    let ch = AwgnChannel::from_snr(4, es, 60.0).unwrap();
    let m = mi_estimate(&v, &ch, FyBackend::Exact(&table), 1000, 3).unwrap();
    assert!((m.mi - 4.5).abs() < 1e-9, "{m:?}");
}

#[test]
fn pam_mi_agrees_with_simulation() {
    // Two-point constellation ±½ is 2-PAM; per-pair MI is twice the per-dimension value.
    let v = vc("Z1/2Z1", OffsetPolicy::Exact(vec![0.5]));
    let table = ConstellationTable::build(&v, 16).unwrap();
    for snr in [-3.0, 0.0, 4.0] {
        let ch = AwgnChannel::from_snr(1, 0.25, snr).unwrap();
        let sim = mi_estimate(&v, &ch, FyBackend::Exact(&table), 200_000, 11).unwrap();
        let quad = 2.0 * pam_mi(2, snr).unwrap();
        assert!(
            (sim.mi - quad).abs() < 3.0 * sim.stderr,
            "snr {snr}: {} ± {} vs {quad}",
            sim.mi,
            sim.stderr
        );
    }
}

#[test]
fn qam_curves_behave() {
    assert!((gap_to_capacity_db(awgn_capacity(17.0), 17.0)).abs() < 1e-9);
    assert_eq!(qam_baseline_levels(9.6).unwrap(), 32);
    assert_eq!(qam_baseline_levels(8.0).unwrap(), 16);
    assert!(qam_baseline_levels(0.0).is_err());
    for snr in [0.0, 10.0, 20.0, 30.0] {
        let mi = qam_mi(64, snr).unwrap();
        assert!(mi < awgn_capacity(snr));
        assert!(mi > awgn_capacity(snr) - 1.0);
    }
    // 1024-QAM at 25 dB sits about 1.33 dB from capacity.
    let gap = gap_to_capacity_db(qam_mi(32, 25.0).unwrap(), 25.0);
    assert!((gap - 1.33).abs() < 0.05, "{gap}");
    assert!((qam_mi(4, 60.0).unwrap() - 4.0).abs() < 1e-9);
    let s = snr_for_qam_mi(6.0, 16).unwrap();
    assert!((qam_mi(16, s).unwrap() - 6.0).abs() < 1e-6);
    // Odd level counts use the same symmetry bookkeeping.
    let odd = pam_mi(3, 10.0).unwrap();
    assert!(odd > 0.0 && odd < 3f64.log2());
}

#[test]
fn two_point_llr_vanishes_at_midpoint() {
    let two = vc("Z1/2Z1", OffsetPolicy::Exact(vec![0.5]));
    let table = ConstellationTable::build(&two, 16).unwrap();
    let ch = AwgnChannel::from_snr(1, 0.25, 6.0).unwrap();
    let mut out = [1.0];
    llr_exact(&table, &ch, &[0.0], &mut out).unwrap();
    assert!(out[0].abs() < 1e-12);
}

#[test]
fn four_pam_llr_closed_form() {
    let pam = vc("Z1/4Z1", OffsetPolicy::Exact(vec![-1.5]));
    // u = 0, 1, 2, 3 land on 1.5, −1.5, −0.5, 0.5 with Gray words 00, 01, 11, 10.
    let expected = [
        (1.5, [0u8, 0u8]),
        (-1.5, [0, 1]),
        (-0.5, [1, 1]),
        (0.5, [1, 0]),
    ];
    for (u, (x, lab)) in expected.iter().enumerate() {
        assert_eq!(pam.encode(&[u as i64]).unwrap(), vec![*x]);
        assert_eq!(pam.gray_label(&[u as i64]).unwrap(), lab.to_vec());
    }
    let table = ConstellationTable::build(&pam, 16).unwrap();
    let ch = AwgnChannel::from_snr(1, 1.25, 4.0).unwrap();
    let v = ch.variance();
    for y in [-2.0, -0.7, 0.0, 0.3, 1.1, 3.0] {
        let mut out = [0.0; 2];
        llr_exact(&table, &ch, &[y], &mut out).unwrap();
        for b in 0..2 {
            let sum = |bit: u8| -> f64 {
                expected
                    .iter()
                    .filter(|(_, l)| l[b] == bit)
                    .map(|(x, _)| (-(y - x) * (y - x) / (2.0 * v)).exp())
                    .sum()
            };
            let closed = (sum(0) / sum(1)).ln();
            assert!(
                (out[b] - closed).abs() < 1e-9,
                "y {y} bit {b}: {} vs {closed}",
                out[b]
            );
        }
    }
}

#[test]
fn wide_ball_gives_max_log() {
    let v = vc("Z4/4D4", OffsetPolicy::Random { seed: 8 });
    let table = ConstellationTable::build(&v, 1 << 20).unwrap();
    let bits = v.bits_per_symbol().unwrap();
    let es = average_energy(&v, 0).unwrap();
    let ch = AwgnChannel::from_snr(4, es, 12.0).unwrap();
    let params = LlrParams::new(40, 100.0).unwrap();
    let ball = BallOffsets::new(4, 40).unwrap();
    let mut s = v.scratch();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut u = vec![0i64; 4];
    for _ in 0..50 {
        v.random_message(&mut rng, &mut u);
        let x = v.encode(&u).unwrap();
        let mut y = vec![0.0; 4];
        ch.sample_into(&x, &mut rng, &mut y);
        let mut approx = vec![0.0; bits];
        llr_approx(&v, &ch, &ball, &params, &y, &mut s, &mut approx).unwrap();
        let mut min = vec![[f64::INFINITY; 2]; bits];
        for i in 0..table.len() {
            let p = table.point(i);
            let d2: f64 = p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            let lab = v.gray_label(&v.decode(&p).unwrap()).unwrap();
            for b in 0..bits {
                let m = &mut min[b][lab[b] as usize];
                *m = m.min(d2);
            }
        }
        for b in 0..bits {
            let maxlog = -(min[b][0] - min[b][1]) / (2.0 * ch.variance());
            assert!((approx[b] - maxlog).abs() < 1e-9);
        }
    }
}

#[test]
fn llr_params_validate() {
    assert!(LlrParams::new(20, 20.0).is_err());
    assert!(LlrParams::new(20, 50.0).is_ok());
    assert_eq!(LlrParams::with_default_q(20).q, 50.0);
}

#[test]
fn llr_streams_roundtrip() {
    let recs = vec![
        LlrRecord {
            symbol: 0,
            bit: 0,
            llr: 1.5,
        },
        LlrRecord {
            symbol: 0,
            bit: 1,
            llr: -0.25,
        },
        LlrRecord {
            symbol: 7,
            bit: 3,
            llr: f64::MIN_POSITIVE,
        },
    ];
    let mut buf = Vec::new();
    write_llr_binary(&mut buf, 4, &recs).unwrap();
    assert_eq!(buf.len(), 24 + 20 * recs.len());
    assert_eq!(&buf[..8], &LLR_MAGIC);
    let (bits, back) = read_llr_binary(&buf[..]).unwrap();
    assert_eq!(bits, 4);
    assert_eq!(back, recs);
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_llr_binary(&bad[..]).is_err());

    let mut csv_out = Vec::new();
    write_llr_csv(&mut csv_out, &recs).unwrap();
    let text = String::from_utf8(csv_out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("symbol,bit,llr"));
    let second: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(second[..2], ["0", "1"]);
    assert_eq!(second[2].parse::<f64>().unwrap(), -0.25);
}

fn naive_log_sum_exp(table: &ConstellationTable, y: &[f64], v: f64) -> (f64, f64) {
    let d: Vec<f64> = (0..table.len())
        .map(|i| {
            table
                .point(i)
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).powi(2))
                .sum()
        })
        .collect();
    let d0 = d.iter().cloned().fold(f64::INFINITY, f64::min);
    (
        d0,
        d.iter()
            .map(|di| (-(di - d0) / (2.0 * v)).exp())
            .sum::<f64>()
            .ln(),
    )
}

#[test]
fn table_scans_match_naive_sums() {
    for (spec, seed) in [("Z4/4D4", 4), ("D4/2D4", 5), ("Z2/400Z2", 6)] {
        let v = vc(spec, OffsetPolicy::Random { seed });
        let table = ConstellationTable::build(&v, 1 << 20).unwrap();
        let n = v.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for var in [0.01, 0.3, 5.0] {
            for scale in [0.5, 3.0, 500.0] {
                let y: Vec<f64> = (0..n).map(|_| scale * (rng.gen::<f64>() - 0.3)).collect();
                let (d0, lse) = table.log_sum_exp(&y, var, 800.0);
                let (n0, nlse) = naive_log_sum_exp(&table, &y, var);
                assert!(
                    (d0 - n0).abs() <= 1e-9 * n0.max(1.0),
                    "{spec}: {d0} vs {n0}"
                );
                assert!((table.min_distance2(&y) - n0).abs() <= 1e-9 * n0.max(1.0));
                assert!(
                    (lse - nlse).abs() < 1e-9,
                    "{spec} var {var} scale {scale}: {lse} vs {nlse}"
                );
            }
        }
    }
}
