use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voronoi_core::airlab::*;
use voronoi_core::intlinalg::{det_int, smith_normal_form, IntMatrix};
use voronoi_core::shells::{ball_cardinality, for_each_shell_point, shell_cardinality};
use voronoi_core::vc::{gray_decode, gray_encode, Mapping, OffsetPolicy, VoronoiConstellation};

const SPECS: [&str; 6] = [
    "Z4/4D4",
    "Z4/8D4R",
    "Z8/4E8",
    "Z16/2BW16",
    "Z24/2Leech24",
    "Z32/2L32",
];

fn is_diagonal(m: &IntMatrix) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| i == j || m[(i, j)] == 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encode_decode_round_trip(which in 0usize..6, mapping in 0usize..3, seed in any::<u64>()) {
        let m = [Mapping::Kurkoski, Mapping::Feng, Mapping::Ferdinand][mapping];
        let Ok(vc) = VoronoiConstellation::from_spec(SPECS[which], Some(m), OffsetPolicy::Random { seed: 3 }) else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = vec![0i64; vc.dim()];
        let mut s = vc.scratch();
        for _ in 0..20 {
            vc.random_message(&mut rng, &mut u);
            let x = vc.encode(&u).unwrap();
            prop_assert!(vc.in_region(&x, &mut s));
            prop_assert_eq!(vc.decode(&x).unwrap(), u.clone());
        }
    }

    #[test]
    fn decoding_is_invariant_under_shaping_translations(seed in any::<u64>()) {
        let vc = VoronoiConstellation::from_spec("Z8/4E8", None, OffsetPolicy::Random { seed: 1 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = vec![0i64; 8];
        vc.random_message(&mut rng, &mut u);
        let x = vc.encode(&u).unwrap();
        let g = vc.shaping().integer_generator().unwrap();
        let shifted: Vec<f64> = x.iter().zip(g.row(seed as usize % 8)).map(|(a, &b)| a + b as f64).collect();
        prop_assert_eq!(vc.decode(&shifted).unwrap(), u);
    }

    #[test]
    fn smith_form_invariants(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 3), 3)) {
        let g = IntMatrix::from_rows(&rows);
        prop_assume!(det_int(&g).unwrap() != 0);
        let d = smith_normal_form(&g).unwrap();
        prop_assert_eq!(d.s.mul(&g).unwrap().mul(&d.t).unwrap(), d.j.clone());
        prop_assert_eq!(det_int(&d.s).unwrap().abs(), 1);
        prop_assert_eq!(det_int(&d.t).unwrap().abs(), 1);
        prop_assert!(is_diagonal(&d.j));
        let f = d.invariant_factors();
        prop_assert!(f.iter().all(|&v| v > 0));
        prop_assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert_eq!(f.iter().product::<i128>(), det_int(&g).unwrap().abs());
    }

    #[test]
    fn shells_partition_the_ball(n in 1usize..=7, r2 in 0u64..=20) {
        let mut count = 0u64;
        let mut bad = 0u64;
        for_each_shell_point(n, r2, |v| {
            count += 1;
            bad += u64::from(v.iter().map(|x| x * x).sum::<i64>() as u64 != r2);
        })
        .unwrap();
        prop_assert_eq!(bad, 0);
        prop_assert_eq!(count, shell_cardinality(n, r2).unwrap());
        let ball: u64 = (0..=r2).map(|k| shell_cardinality(n, k).unwrap()).sum();
        prop_assert_eq!(ball, ball_cardinality(n, r2).unwrap());
    }

    #[test]
    fn gray_code_is_a_bijection_with_unit_steps(v in 0u64..(1 << 40)) {
        prop_assert_eq!(gray_decode(gray_encode(v)), v);
        prop_assert_eq!((gray_encode(v) ^ gray_encode(v + 1)).count_ones(), 1);
    }
}

#[test]
fn importance_equals_exact_when_shells_cover_the_constellation() {
    let vc =
        VoronoiConstellation::from_spec("Z4/2D4", None, OffsetPolicy::Random { seed: 2 }).unwrap();
    let table = ConstellationTable::build(&vc, DEFAULT_TABLE_LIMIT).unwrap();
    let tables = ShellTables::new(4, 40, DEFAULT_SHELL_BUDGET).unwrap();
    let ch = AwgnChannel::from_snr(4, average_energy(&vc, 0).unwrap(), 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y = [0.3, -1.2, 0.7, 2.1];
    let f = fy_importance(&vc, &tables, &ch, &y, 30, &mut rng).unwrap();
    assert!((f.log_fy(f.len()) - fy_exact(&table, &ch, &y)).abs() < 1e-10);
}

#[test]
fn mutual_information_is_bounded_by_rate_and_capacity() {
    let vc =
        VoronoiConstellation::from_spec("Z4/4D4", None, OffsetPolicy::Auto { seed: 1 }).unwrap();
    let table = ConstellationTable::build(&vc, DEFAULT_TABLE_LIMIT).unwrap();
    let beta = 2.0 * vc.log2_size() / 4.0;
    let mut last = 0.0;
    for snr in [0.0, 8.0, 16.0, 30.0] {
        let ch = AwgnChannel::from_snr(4, average_energy(&vc, 0).unwrap(), snr).unwrap();
        let mi = mi_estimate(&vc, &ch, FyBackend::Exact(&table), 2000, 1).unwrap();
        assert!(
            mi.mi <= awgn_capacity(snr) + 3.0 * mi.stderr,
            "{snr} dB: {mi:?}"
        );
        assert!(mi.mi <= beta + 1e-9 && mi.mi >= last - 3.0 * mi.stderr);
        last = mi.mi;
    }
    assert!((last - beta).abs() < 1e-3);
}
