use polarium::bpl::squared_distance;
use polarium::encode::{butterfly_stage, polar_transform, polar_transform_ordered};
use polarium::*;
use proptest::prelude::*;

/// F^{⊗n} built by explicit Kronecker products.
fn kron_matrix(stages: usize) -> Vec<Vec<u8>> {
    let f = [[1u8, 0], [1, 1]];
    let mut g = vec![vec![1u8]];
    for _ in 0..stages {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for (bi, frow) in f.iter().enumerate() {
            for (bj, &fv) in frow.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        next[bi * m + i][bj * m + j] = fv & g[i][j];
                    }
                }
            }
        }
        g = next;
    }
    g
}

fn matrix_encode(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let n = u.len();
    (0..n)
        .map(|j| (0..n).fold(0u8, |acc, i| acc ^ (u[i] & g[i][j])))
        .collect()
}

fn bits(len: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, len)
}

fn transformed(u: &[u8]) -> Vec<u8> {
    let mut x = u.to_vec();
    polar_transform(&mut x);
    x
}

fn stages_and_word() -> impl Strategy<Value = (usize, Vec<u8>)> {
    (1usize..=7).prop_flat_map(|n| (Just(n), bits(1 << n)))
}

fn permutation_of(stages: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=stages).collect::<Vec<usize>>()).prop_shuffle()
}

fn llr_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(
        prop_oneof![-8.0f64..8.0, -1e6f64..1e6, Just(0.0), Just(f64::INFINITY), Just(f64::NEG_INFINITY)],
        len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn butterfly_matches_kronecker((n, u) in stages_and_word()) {
        let g = kron_matrix(n);
        prop_assert_eq!(transformed(&u), matrix_encode(&u, &g));
    }

    #[test]
    fn transform_is_linear_and_involutive((n, a) in stages_and_word(), seed in any::<u64>()) {
        let b: Vec<u8> = (0..1usize << n).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let lhs = transformed(&sum);
        let rhs: Vec<u8> = transformed(&a).iter().zip(transformed(&b)).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(transformed(&transformed(&a)), a);
    }

    #[test]
    fn stage_order_irrelevant(
        (n, u, pi) in (1usize..=7).prop_flat_map(|n| (Just(n), bits(1 << n), permutation_of(n)))
    ) {
        let perm = StagePermutation::new(pi).unwrap();
        prop_assert_eq!(perm.stages(), n);
        let mut x = u.clone();
        polar_transform_ordered(&mut x, perm.separations());
        prop_assert_eq!(x, transformed(&u));
    }

    #[test]
    fn stage_pairs_partition_rows(
        (n, pi) in (1usize..=9).prop_flat_map(|n| (Just(n), permutation_of(n)))
    ) {
        let seps = separations_from_permutation(&pi).unwrap();
        let rows = 1usize << n;
        let mut distinct = seps.clone();
        distinct.sort_unstable();
        prop_assert_eq!(distinct, (0..n).map(|j| 1usize << j).collect::<Vec<_>>());
        for &s in &seps {
            let mut hit = vec![0u8; rows];
            let mut pes = 0;
            for i in (0..rows).filter(|i| i & s == 0) {
                hit[i] += 1;
                hit[i + s] += 1;
                pes += 1;
            }
            prop_assert_eq!(pes, rows / 2);
            prop_assert!(hit.iter().all(|&h| h == 1));
        }
    }

    #[test]
    fn boxplus_bounds(a in -60.0f64..60.0, b in -60.0f64..60.0) {
        for mode in [CheckNode::Exact, CheckNode::minsum()] {
            let v = boxplus(a, b, mode, DEFAULT_CLIP);
            prop_assert!((v - boxplus(b, a, mode, DEFAULT_CLIP)).abs() < 1e-12);
            prop_assert!(v.abs() <= a.abs().min(b.abs()).min(DEFAULT_CLIP) + 1e-12);
            if a * b > 0.0 && v != 0.0 {
                prop_assert!(v > 0.0);
            }
            if a * b < 0.0 && v != 0.0 {
                prop_assert!(v < 0.0);
            }
        }
    }

    #[test]
    fn exact_boxplus_matches_tanh(a in -12.0f64..12.0, b in -12.0f64..12.0) {
        let oracle = 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        prop_assert!((boxplus(a, b, CheckNode::Exact, DEFAULT_CLIP) - oracle).abs() < 1e-9);
    }

    #[test]
    fn bp_messages_stay_clipped(llr in llr_vec(32), clip in 1.0f64..60.0, minsum in any::<bool>()) {
        let code = construct_bhattacharyya(32, 16, 0.5).unwrap();
        let cfg = BpConfig {
            max_iters: 7,
            clip,
            check_node: if minsum { CheckNode::minsum() } else { CheckNode::Exact },
            stop: StopRule::None,
        };
        let mut dec = BpDecoder::new(&code, StagePermutation::descending(5), cfg).unwrap();
        let out = dec.decode(&llr).unwrap();
        prop_assert!(dec.memory().max_magnitude() <= clip);
        prop_assert_eq!(out.iterations, 7);
        prop_assert_eq!(out.pe_updates, 7 * 2 * 16 * 5);
    }

    #[test]
    fn decoders_deterministic(llr in llr_vec(16)) {
        let code = construct_bhattacharyya(16, 8, 0.5).unwrap();
        let cfg = BplConfig { list_size: 4, max_iters: 20, ..BplConfig::default() };
        prop_assert_eq!(bpl_decode(&llr, &llr, &code, &cfg).unwrap(), bpl_decode(&llr, &llr, &code, &cfg).unwrap());
        prop_assert_eq!(scl_decode(&llr, &code, 4, false).unwrap(), scl_decode(&llr, &code, 4, false).unwrap());
    }

    #[test]
    fn bpl_selection_ignores_graph_order(llr in proptest::collection::vec(-6.0f64..6.0, 16), rot in 0usize..4) {
        let code = construct_bhattacharyya(16, 8, 0.5).unwrap();
        let perms = select_permutations(4, 4, 0).unwrap();
        let mut rotated = perms.clone();
        rotated.rotate_left(rot);
        let cfg = BplConfig { max_iters: 30, ..BplConfig::default() };
        let a = BplDecoder::from_permutations(&code, perms, &cfg).unwrap().decode(&llr, &llr).unwrap();
        let b = BplDecoder::from_permutations(&code, rotated, &cfg).unwrap().decode(&llr, &llr).unwrap();
        // same distance; the codeword agrees unless two candidates tie exactly
        let da = squared_distance(&llr, &a.x_hat);
        let db = squared_distance(&llr, &b.x_hat);
        prop_assert!((da - db).abs() < 1e-9);
        prop_assert_eq!(a.any_valid, b.any_valid);
        if a.x_hat != b.x_hat {
            prop_assert!(a.distances.iter().filter(|d| (**d * **d - da).abs() < 1e-9).count() > 1);
        }
    }

    #[test]
    fn scl_metric_non_decreasing(llr in proptest::collection::vec(-5.0f64..5.0, 32), list in 1usize..9) {
        let code = construct_bhattacharyya(32, 16, 0.5).unwrap();
        let out = scl_decode(&llr, &code, list, false).unwrap();
        prop_assert_eq!(out.metric_trace.len(), 32);
        prop_assert!(out.metric_trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(scl_decode(&llr, &code, 1, false).unwrap().u_hat, sc_decode(&llr, &code).unwrap().u_hat);
    }

    #[test]
    fn noiseless_scaled_patterns_decode(payload in bits(8), scale in 0.05f64..30.0) {
        let code = construct_bhattacharyya(16, 8, 0.5).unwrap();
        let x = encode(&assemble_u(&BitVector::from(payload), &code).unwrap(), &code).unwrap();
        let llr: Vec<f64> = bpsk_modulate(&x).iter().map(|s| s * scale).collect();
        prop_assert_eq!(&sc_decode(&llr, &code).unwrap().x_hat, &x);
        prop_assert_eq!(&scl_decode(&llr, &code, 4, false).unwrap().x_hat, &x);
        let bpl = bpl_decode(&llr, &llr, &code, &BplConfig::default()).unwrap();
        prop_assert!(bpl.any_valid);
        prop_assert_eq!(&bpl.x_hat, &x);
    }

    #[test]
    fn crc_round_trip(payload in proptest::collection::vec(0u8..2, 0..80), flip in any::<prop::sample::Index>()) {
        let p = BitVector::from(payload);
        let word = crc_append(&p, &CrcConfig::CRC16);
        prop_assert_eq!(word.len(), p.len() + 16);
        prop_assert!(crc_check(&word, &CrcConfig::CRC16).unwrap());
        let mut bad = word.clone();
        let i = flip.index(bad.len());
        bad.set(i, bad[i] ^ 1);
        prop_assert!(!crc_check(&bad, &CrcConfig::CRC16).unwrap());
    }

    #[test]
    fn construction_partitions_rows(n in 1usize..=9, frac in 0.0f64..=1.0, eps in 0.05f64..0.95) {
        let block = 1usize << n;
        let k = ((block as f64) * frac).round() as usize;
        let code = construct_bhattacharyya(block, k, eps).unwrap();
        let z = bhattacharyya_parameters(n, eps).unwrap();
        prop_assert_eq!(code.info_set().len(), k);
        prop_assert_eq!(code.info_set().len() + code.frozen_set().len(), block);
        let worst_info = code.info_set().iter().map(|&i| z[i]).fold(f64::NEG_INFINITY, f64::max);
        let best_frozen = code.frozen_set().iter().map(|&i| z[i]).fold(f64::INFINITY, f64::min);
        prop_assert!(k == 0 || k == block || worst_info <= best_frozen);
        prop_assert_eq!(PolarCode::from_json(&code.to_json()).unwrap(), code);
    }

    #[test]
    fn rm_polar_freezes_light_rows(n in 2usize..=8, d_exp in 0u32..4, frac in 0.0f64..0.5) {
        let block = 1usize << n;
        let d = 1u64 << d_exp.min(n as u32);
        let eligible = (0..block).filter(|&i| row_weight(i, n).unwrap() > d).count();
        let k = ((eligible as f64) * frac * 2.0).floor().min(eligible as f64) as usize;
        let code = construct_rm_polar(block, k, d, 0.5).unwrap();
        prop_assert!(code.info_set().iter().all(|&i| row_weight(i, n).unwrap() > d));
        prop_assert!(construct_rm_polar(block, eligible + 1, d, 0.5).is_err());
    }

    #[test]
    fn bitvector_text_round_trip(v in proptest::collection::vec(0u8..2, 0..100)) {
        let b = BitVector::from(v);
        let text = b.to_string();
        prop_assert_eq!(text.parse::<BitVector>().unwrap(), b);
    }
}

#[test]
fn butterfly_stage_single_pass() {
    let mut x = vec![0, 1, 0, 1];
    butterfly_stage(&mut x, 1);
    assert_eq!(x, vec![1, 1, 1, 1]);
}

#[test]
fn simulation_independent_of_threads() {
    let code = construct_bhattacharyya(32, 16, 0.5).unwrap();
    for decoder in [
        DecoderSpec::Sc,
        DecoderSpec::Bpl(BplConfig { list_size: 4, max_iters: 30, ..BplConfig::default() }),
    ] {
        let mut cfg = SimConfig::new(code.clone(), decoder, EbN0Sweep { start: 1.0, step: 1.0, stop: 3.0 });
        cfg.max_frames = 700;
        cfg.min_block_errors = 25;
        cfg.master_seed = 99;
        let mut runs = Vec::new();
        for threads in [1, 3] {
            cfg.threads = threads;
            let stats = run_simulation(&cfg).unwrap();
            runs.push(write_csv([(&cfg, stats.as_slice())]));
        }
        assert_eq!(runs[0], runs[1]);
    }
}
