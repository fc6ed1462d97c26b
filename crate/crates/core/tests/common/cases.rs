//! Small hand-checkable cases, one function per behaviour.

use qebp_core::channel::{
    crossover_from_snr, q_function, sample_bsc_error, string_error_probability, BscParams, SnrPoint, EPS_MIN,
};
use qebp_core::gf2::{bundled_code, repetition_code, BundledCode, LinearCode};
use qebp_core::harness::{
    emit_json, load_json, qaoa_decode, qaoa_postsel_decode, run_bler_sweep, to_csv, CachedSyndrome, DecoderKind,
    ExperimentSpec, CSV_HEADER,
};
use qebp_core::minsum::{check_update, decode, init_llr, variable_update, LlrVector, MinSumDecoder};
use qebp_core::optimize::{grid_scan_hamiltonian, optimize_hamiltonian, BfgsOptions};
use qebp_core::oracle::{min_weight_syndrome_decode, ml_decode};
use qebp_core::qaoa::{
    cost_diagonal, cost_expectation, qaoa_state, sample_outcomes, top_ranked, CostHamiltonian, OutcomeCounts,
    OutcomeDistribution, QaoaConfig, SignConvention, Statevector,
};
use qebp_core::qebp::{combined_crossover, fused_crossovers, plain_bp_decode, qebp_decode, QebpMode};
use qebp_core::repetition::{
    bler_majority_vote, bler_one_sample, bler_post_selection, bler_ranking, bler_ranking_from_distributions,
    expected_rounds_postselection, optimize_shared_parameters, success_probability, success_table,
    transfer_eigenvalues, transfer_matrix, RankingMode, RepParams, SumDomain,
};
use qebp_core::{Syndrome, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Check;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn syn(s: &str) -> Syndrome {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn irr() -> LinearCode {
    bundled_code(BundledCode::Irregular12x8).unwrap()
}

fn reg() -> LinearCode {
    bundled_code(BundledCode::Regular12x8).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub const ALL: &[Check] = &[
    ("rep3_syndrome", rep3_syndrome),
    ("codewords_have_zero_syndrome", codewords_have_zero_syndrome),
    ("codeword_membership", codeword_membership),
    ("rep3_generator", rep3_generator),
    ("generator_rank_is_k", generator_rank_is_k),
    ("rep5_codewords", rep5_codewords),
    ("zero_word_enumerated", zero_word_enumerated),
    ("repetition_constructor", repetition_constructor),
    ("alist_round_trip", alist_round_trip),
    ("q_function_symmetry", q_function_symmetry),
    ("zero_signal_limit", zero_signal_limit),
    ("clamped_channel_is_error_free", clamped_channel_is_error_free),
    ("seeded_error_patterns", seeded_error_patterns),
    ("string_probabilities", string_probabilities),
    ("zero_weights_zero_diagonal", zero_weights_zero_diagonal),
    ("zero_angles_uniform_state", zero_angles_uniform_state),
    ("qaoa_state_normalised", qaoa_state_normalised),
    ("uniform_and_basis_distributions", uniform_and_basis_distributions),
    ("distribution_depends_on_syndrome", distribution_depends_on_syndrome),
    ("marginal_cases", marginal_cases),
    ("sampling_and_ranking", sampling_and_ranking),
    ("cost_expectation_cases", cost_expectation_cases),
    ("zero_hamiltonian_optimum", zero_hamiltonian_optimum),
    ("grid_refinement", grid_refinement),
    ("llr_cases", llr_cases),
    ("node_update_cases", node_update_cases),
    ("zero_llrs_decode_to_zero", zero_llrs_decode_to_zero),
    ("codeword_converges_at_once", codeword_converges_at_once),
    ("half_crossovers_decode_to_zero", half_crossovers_decode_to_zero),
    ("crossover_composition", crossover_composition),
    ("small_angles_keep_codeword", small_angles_keep_codeword),
    ("transmissions_share_warm_start", transmissions_share_warm_start),
    ("plain_bp_is_zero_qaoa_error", plain_bp_is_zero_qaoa_error),
    ("qebp_codeword_one_iteration", qebp_codeword_one_iteration),
    ("transfer_matrix_cases", transfer_matrix_cases),
    ("zero_angle_success", zero_angle_success),
    ("eigenvalue_identities", eigenvalue_identities),
    ("shared_optimum_below_norm", shared_optimum_below_norm),
    ("one_sample_cases", one_sample_cases),
    ("post_selection_cases", post_selection_cases),
    ("ranking_cases", ranking_cases),
    ("majority_vote_cases", majority_vote_cases),
    ("uniform_rounds", uniform_rounds),
    ("ml_cases", ml_cases),
    ("min_weight_cases", min_weight_cases),
    ("clamped_sweeps_have_no_errors", clamped_sweeps_have_no_errors),
    ("concentrated_qaoa_decodes", concentrated_qaoa_decodes),
    ("repetition_qualifying_strings", repetition_qualifying_strings),
    ("csv_and_json_output", csv_and_json_output),
];

pub fn rep3_syndrome() {
    let code = repetition_code(3).unwrap();
    assert_eq!(code.h_rows(), &[vec![1, 1, 0], vec![0, 1, 1]]);
    assert_eq!(code.syndrome(&w("100")).unwrap(), syn("10"));
}

pub fn codewords_have_zero_syndrome() {
    let code = irr();
    for c in code.codewords().unwrap() {
        assert!(code.syndrome(c).unwrap().is_zero());
    }
}

pub fn codeword_membership() {
    let code = repetition_code(3).unwrap();
    assert!(code.is_codeword(&w("000")).unwrap());
    assert!(code.is_codeword(&w("111")).unwrap());
    assert!(!code.is_codeword(&w("100")).unwrap());
    for n in 2..9 {
        assert!(repetition_code(n).unwrap().is_codeword(&Word::ones(n)).unwrap());
    }
    assert!(irr().is_codeword(&Word::zeros(12)).unwrap());
}

pub fn rep3_generator() {
    assert_eq!(repetition_code(3).unwrap().nullspace_basis(), vec![w("111")]);
}

pub fn generator_rank_is_k() {
    for code in [irr(), reg(), repetition_code(6).unwrap()] {
        let g = code.nullspace_basis();
        assert_eq!(g.len(), code.k());
        let rows = g.iter().map(|r| r.bits().to_vec()).collect();
        assert_eq!(LinearCode::from_rows(rows).unwrap().rank(), code.k());
    }
}

pub fn rep5_codewords() {
    let words = repetition_code(5).unwrap().enumerate_codewords().unwrap();
    assert_eq!(words, vec![w("00000"), w("11111")]);
}

pub fn zero_word_enumerated() {
    for code in [irr(), reg(), repetition_code(4).unwrap()] {
        assert!(code.enumerate_codewords().unwrap().iter().any(Word::is_zero));
    }
}

pub fn repetition_constructor() {
    assert_eq!(repetition_code(2).unwrap().h_rows(), &[vec![1, 1]]);
    for n in 2..12 {
        assert_eq!(repetition_code(n).unwrap().k(), 1);
    }
}

pub fn alist_round_trip() {
    for code in [irr(), reg(), repetition_code(7).unwrap()] {
        let back = LinearCode::from_alist(&code.to_alist()).unwrap();
        assert_eq!(back.h_rows(), code.h_rows());
    }
}

pub fn q_function_symmetry() {
    assert_eq!(q_function(0.0f64), 0.5);
    for x in [0.1f64, 0.7, 1.3, 2.9, 4.2] {
        assert!(close(q_function(x) + q_function(-x), 1.0, 1e-12));
    }
}

pub fn zero_signal_limit() {
    let b = crossover_from_snr(SnrPoint::db(f64::NEG_INFINITY)).unwrap();
    assert_eq!(b.epsilon, 0.5);
    assert!(close(
        crossover_from_snr(SnrPoint::db(-80.0)).unwrap().epsilon,
        0.5,
        1e-4
    ));
}

pub fn clamped_channel_is_error_free() {
    let b = crossover_from_snr(SnrPoint::db(40.0)).unwrap();
    assert!(b.clamped);
    assert_eq!(b.epsilon, EPS_MIN);
    let mut r = rng(3);
    assert!((0..1000).all(|_| sample_bsc_error(12, &b, &mut r).is_zero()));
}

pub fn seeded_error_patterns() {
    let b = BscParams::new(0.2).unwrap();
    let draw = |seed| {
        let mut r = rng(seed);
        (0..50).map(|_| sample_bsc_error(12, &b, &mut r)).collect::<Vec<_>>()
    };
    assert_eq!(draw(17), draw(17));
    assert_ne!(draw(17), draw(18));
}

pub fn string_probabilities() {
    assert!(close(string_error_probability(&w("000"), 0.1f64), 0.729, 1e-15));
    assert!(close(string_error_probability(&w("010"), 0.1f64), 0.081, 1e-15));
    for n in [1usize, 3, 8] {
        let total: f64 = (0..1u64 << n)
            .map(|z| string_error_probability(&Word::from_index(z, n), 0.1))
            .sum();
        assert!(close(total, 1.0, 1e-12));
    }
}

pub fn zero_weights_zero_diagonal() {
    let d: Vec<f64> = cost_diagonal(&irr(), &syn("10010110"), 0.0, 0.0, SignConvention::MainText).unwrap();
    assert!(d.iter().all(|&c| c == 0.0));
}

pub fn zero_angles_uniform_state() {
    let cfg = QaoaConfig::new(vec![0.0f64; 2], vec![0.0; 2], 1.0, 2.0).unwrap();
    let state = qaoa_state(&irr(), &syn("01000001"), &cfg).unwrap();
    let dist = state.distribution();
    assert!(dist.probs().iter().all(|&p| close(p, 1.0 / 4096.0, 1e-15)));
}

pub fn qaoa_state_normalised() {
    let code = reg();
    let cfg = QaoaConfig::new(vec![0.4f64, 1.9, -2.2], vec![0.3, 2.8, 1.1], 1.0, 2.0).unwrap();
    for s in ["00000000", "11000000", "10110011"] {
        let state = qaoa_state(&code, &syn(s), &cfg).unwrap();
        assert!(close(state.norm_sqr(), 1.0, 1e-10));
    }
}

pub fn uniform_and_basis_distributions() {
    let u = Statevector::<f64>::uniform(2).distribution();
    assert!(u.probs().iter().all(|&p| close(p, 0.25, 1e-15)));
    let b = Statevector::<f64>::basis(3, 5).distribution();
    for z in 0..8 {
        assert_eq!(b.probs()[z], if z == 5 { 1.0 } else { 0.0 });
    }
}

pub fn distribution_depends_on_syndrome() {
    let code = irr();
    let cfg = QaoaConfig::new(vec![0.7f64], vec![0.2], 1.0, 2.0).unwrap();
    let e = w("000100010000");
    let x = code.codewords().unwrap()[3].clone();
    assert!(!x.is_zero());
    let y1 = e.clone();
    let y2 = e.xor(&x);
    let d1 = qaoa_state(&code, &code.syndrome(&y1).unwrap(), &cfg)
        .unwrap()
        .distribution();
    let d2 = qaoa_state(&code, &code.syndrome(&y2).unwrap(), &cfg)
        .unwrap()
        .distribution();
    assert_eq!(d1, d2);
}

pub fn marginal_cases() {
    let u = Statevector::<f64>::uniform(5).distribution();
    assert!(u.marginal_error_probs().iter().all(|&m| close(m, 0.5, 1e-15)));
    let one_hot = Statevector::<f64>::basis(4, w("1000").to_index()).distribution();
    assert_eq!(one_hot.marginal_error_probs(), vec![1.0, 0.0, 0.0, 0.0]);
    let d = OutcomeDistribution::new(2, vec![0.5f64, 0.3, 0.1, 0.1]).unwrap();
    let m = d.marginal_error_probs();
    assert!(close(m[0], 0.2, 1e-15) && close(m[1], 0.4, 1e-15));
}

pub fn sampling_and_ranking() {
    let d = Statevector::<f64>::basis(3, 6).distribution();
    let counts = sample_outcomes(&d, 500, &mut rng(1)).unwrap();
    assert_eq!(counts.count(&w("110")), 500);
    assert_eq!(counts.total(), 500);
    let tie = OutcomeCounts::from_pairs(2, [(w("00"), 5), (w("11"), 5)]);
    assert_eq!(top_ranked(&tie).unwrap(), w("00"));
}

pub fn cost_expectation_cases() {
    let u = Statevector::<f64>::uniform(3);
    assert_eq!(cost_expectation(&u, &[0.0; 8]).unwrap(), 0.0);
    let d: Vec<f64> = cost_diagonal(
        &repetition_code(3).unwrap(),
        &syn("01"),
        1.0,
        2.0,
        SignConvention::MainText,
    )
    .unwrap();
    for z in 0..8 {
        assert_eq!(cost_expectation(&Statevector::basis(3, z), &d).unwrap(), d[z as usize]);
    }
}

pub fn zero_hamiltonian_optimum() {
    let h = CostHamiltonian::<f64>::from_diagonal(3, vec![0.0; 8]).unwrap();
    let r = optimize_hamiltonian(&h, 2, 3, &mut rng(5), &BfgsOptions::default()).unwrap();
    assert_eq!(r.cost, 0.0);
    assert_eq!(grid_scan_hamiltonian(&h, 16).unwrap().cost, 0.0);
}

pub fn grid_refinement() {
    let h = CostHamiltonian::new(
        &repetition_code(4).unwrap(),
        &syn("010"),
        1.0f64,
        2.0,
        SignConvention::MainText,
    )
    .unwrap();
    let mut prev = f64::INFINITY;
    for r in [8, 16, 32, 64] {
        let c = grid_scan_hamiltonian(&h, r).unwrap().cost;
        assert!(c <= prev);
        prev = c;
    }
}

pub fn llr_cases() {
    let l = init_llr(&w("0"), &[0.1f64]).unwrap().values[0];
    assert!(close(l, 2.1972, 1e-4));
    let a = init_llr(&w("01"), &[0.3f64, 0.3]).unwrap().values;
    let b = init_llr(&w("01"), &[0.7f64, 0.7]).unwrap().values;
    assert!(close(a[0], -b[0], 1e-15) && close(a[1], -b[1], 1e-15));
}

pub fn node_update_cases() {
    assert_eq!(check_update(&[2.0f64, -3.0]), -2.0);
    assert_eq!(check_update(&[-1.0f64, -4.0, 5.0]), 1.0);
    assert_eq!(check_update(&[3.0f64, 0.0, -4.0]), 0.0);
    assert_eq!(variable_update(0.8f64, &[]), 0.8);
    assert!(close(variable_update(1.0f64, &[0.5, -0.2]), 1.3, 1e-15));
    assert_eq!(
        variable_update(-1.0f64, &[-0.5, 0.2]),
        -variable_update(1.0, &[0.5, -0.2])
    );
}

pub fn zero_llrs_decode_to_zero() {
    let code = irr();
    let r = MinSumDecoder::new(&code)
        .decode_llr(
            &LlrVector {
                values: vec![0.0f64; 12],
            },
            10,
        )
        .unwrap();
    assert!(r.word.is_zero() && r.converged);
}

pub fn codeword_converges_at_once() {
    let code = reg();
    for c in code.codewords().unwrap().iter().step_by(5) {
        for eps in [0.01f64, 0.2, 0.45] {
            let r = decode(&code, c, &[eps; 12], 50).unwrap();
            assert!(r.converged && r.iterations <= 1 && &r.word == c);
        }
    }
}

pub fn half_crossovers_decode_to_zero() {
    let code = irr();
    let r = decode(&code, &w("110011100001"), &[0.5f64; 12], 50).unwrap();
    assert!(r.converged && r.word.is_zero());
    assert!(r.final_llrs.values.iter().all(|&l| l == 0.0));
}

pub fn crossover_composition() {
    assert_eq!(combined_crossover(0.13f64, 0.0).unwrap(), 0.13);
    for e in [0.0f64, 0.1, 0.4, 0.9] {
        assert_eq!(combined_crossover(e, 0.5).unwrap(), 0.5);
    }
    assert!(close(combined_crossover(0.1f64, 0.9).unwrap(), 0.82, 1e-15));
}

pub fn small_angles_keep_codeword() {
    // a small negative mixer angle (beta just below pi) lowers the cost
    // under the default sign convention
    let code = reg();
    let cfg = QaoaConfig::new(vec![0.05f64], vec![std::f64::consts::PI - 0.05], 1.0, 2.0).unwrap();
    let dist = qaoa_state(&code, &Syndrome::zeros(8), &cfg).unwrap().distribution();
    assert!(dist.marginal_error_probs().iter().all(|&m| m < 0.5));
    for c in code.codewords().unwrap().iter().step_by(3) {
        let r = qebp_decode(&code, c, 0.1, &cfg, QebpMode::Marginal, 50, &mut rng(0)).unwrap();
        assert_eq!(&r.word, c);
    }
}

pub fn transmissions_share_warm_start() {
    let code = irr();
    let cfg = QaoaConfig::new(vec![0.6f64, 0.2], vec![2.5, 2.9], 1.0, 2.0).unwrap();
    let e = w("010000000100");
    let cws = code.codewords().unwrap();
    let (x1, x2) = (&cws[1], &cws[6]);
    let (y1, y2) = (x1.xor(&e), x2.xor(&e));
    let d1 = qaoa_state(&code, &code.syndrome(&y1).unwrap(), &cfg)
        .unwrap()
        .distribution();
    let d2 = qaoa_state(&code, &code.syndrome(&y2).unwrap(), &cfg)
        .unwrap()
        .distribution();
    let f1 = fused_crossovers(0.08, &d1.marginal_error_probs()).unwrap();
    let f2 = fused_crossovers(0.08, &d2.marginal_error_probs()).unwrap();
    assert_eq!(f1, f2);
    let r1 = qebp_decode(&code, &y1, 0.08, &cfg, QebpMode::Marginal, 50, &mut rng(0)).unwrap();
    let r2 = qebp_decode(&code, &y2, 0.08, &cfg, QebpMode::Marginal, 50, &mut rng(0)).unwrap();
    assert_eq!(&r1.word == x1, &r2.word == x2);
    assert_eq!(r1.iterations, r2.iterations);
}

pub fn plain_bp_is_zero_qaoa_error() {
    let code = irr();
    let y = w("000001000010");
    let plain = plain_bp_decode(&code, &y, 0.07f64, 50).unwrap();
    let eps = fused_crossovers(0.07f64, &[0.0; 12]).unwrap();
    assert_eq!(plain, MinSumDecoder::new(&code).decode(&y, &eps, 50).unwrap());
}

pub fn qebp_codeword_one_iteration() {
    let code = irr();
    let cfg = QaoaConfig::new(vec![0.01f64], vec![std::f64::consts::PI - 0.01], 1.0, 2.0).unwrap();
    for c in code.codewords().unwrap() {
        let r = qebp_decode(&code, c, 0.05, &cfg, QebpMode::Marginal, 50, &mut rng(2)).unwrap();
        assert!(r.converged && r.iterations == 1 && &r.word == c);
    }
}

pub fn transfer_matrix_cases() {
    let zero = RepParams::new(1.0f64, 2.0, 0.0, 0.0);
    let t = transfer_matrix(0, &zero);
    assert_eq!(t.entries[0][0].re, 1.0);
    for (i, j) in [(0, 1), (1, 0), (1, 1)] {
        assert_eq!(t.entries[i][j].norm(), 0.0);
    }
    // the error bit only flips the sign multiplying alpha
    let p = RepParams::new(1.0f64, 2.0, 0.37, 1.2);
    let flipped = RepParams::new(-1.0f64, 2.0, 0.37, 1.2);
    let a = transfer_matrix(1, &p);
    let b = transfer_matrix(0, &flipped);
    for i in 0..2 {
        for j in 0..2 {
            assert!((a.entries[i][j] - b.entries[i][j]).norm() < 1e-15);
        }
    }
}

pub fn zero_angle_success() {
    let zero = RepParams::new(1.0f64, 2.0, 0.0, 0.0);
    for n in [2usize, 3, 6] {
        for z in 0..1u64 << n {
            let p = success_probability(&Word::from_index(z, n), &zero).unwrap();
            assert!(close(p, 2f64.powi(-(n as i32)), 1e-15));
        }
    }
}

pub fn eigenvalue_identities() {
    for p in [
        RepParams::<f64>::shared(),
        RepParams::new(1.0, 2.0, 1.1, 2.3),
        RepParams::new(1.0, 2.0, -0.4, 0.9),
    ] {
        for e in [0u8, 1] {
            let t = transfer_matrix(e, &p);
            let (a, b) = transfer_eigenvalues(e, &p);
            assert!((a + b - t.trace()).norm() < 1e-12);
            assert!((a * b - t.det()).norm() < 1e-12);
        }
    }
    let (a, b) = transfer_eigenvalues(0, &RepParams::new(1.0f64, 2.0, 0.0, 0.0));
    let mut mags = [a.norm(), b.norm()];
    mags.sort_by(f64::total_cmp);
    assert!(close(mags[0], 0.0, 1e-15) && close(mags[1], 1.0, 1e-15));
}

pub fn shared_optimum_below_norm() {
    let best = optimize_shared_parameters(1.0, 2.0);
    let t = transfer_matrix(0, &RepParams::new(1.0, 2.0, best.gamma, best.beta));
    assert!(best.modulus <= t.frobenius_norm() + 1e-12);
}

pub fn one_sample_cases() {
    let shared = RepParams::<f64>::shared();
    for n in [3usize, 5, 9] {
        assert_eq!(
            bler_one_sample(n, 0.0, &shared, SumDomain::ExcludeConstant).unwrap(),
            0.0
        );
    }
    let zero = RepParams::new(1.0f64, 2.0, 0.0, 0.0);
    let (n, eps) = (6usize, 0.2f64);
    let expected: f64 = (1..(1u64 << n) - 1)
        .map(|z| string_error_probability(&Word::from_index(z, n), eps) * (1.0 - 2f64.powi(-(n as i32))))
        .sum();
    let got = bler_one_sample(n, eps, &zero, SumDomain::ExcludeConstant).unwrap();
    assert!(close(got, expected, 1e-14));
}

pub fn post_selection_cases() {
    let zero = RepParams::new(1.0f64, 2.0, 0.0, 0.0);
    let (n, eps) = (5usize, 0.15f64);
    let p0 = (1.0 - eps).powi(n as i32);
    let pall = eps.powi(n as i32);
    let got = bler_post_selection(n, eps, &zero, SumDomain::ExcludeConstant).unwrap();
    assert!(close(got, 0.5 * (1.0 - p0 - pall), 1e-14));
    // swapping a string with its complement swaps the error probability
    let table = success_table(n, &RepParams::<f64>::shared()).unwrap();
    let all = (1usize << n) - 1;
    for z in 0..=all {
        let (p, q) = (table[z], table[z ^ all]);
        let err = q / (p + q);
        let swapped = p / (p + q);
        assert!(close(err + swapped, 1.0, 1e-14));
    }
}

pub fn ranking_cases() {
    let n = 4usize;
    let dist_with = |f: &dyn Fn(&mut Vec<f64>, usize)| -> Vec<Vec<f64>> {
        (0..1usize << (n - 1))
            .map(|z| {
                let mut d = vec![0.0; 1 << n];
                f(&mut d, z);
                d
            })
            .collect()
    };
    let hot = dist_with(&|d, z| d[z] = 1.0);
    let tied = dist_with(&|d, z| {
        d[z] = 0.5;
        d[z ^ 0b1111] = 0.5;
    });
    let exact = |d: &[Vec<f64>]| {
        bler_ranking_from_distributions(n, 0.2, 100, d, RankingMode::Expected, SumDomain::IncludeZeroError).unwrap()
    };
    // concentrated on the string whose first bit is 0, so only the
    // complementary strings fail
    let complements: f64 = (0..1u64 << n)
        .filter(|z| z >> (n - 1) == 1)
        .map(|z| string_error_probability(&Word::from_index(z, n), 0.2))
        .sum();
    assert!(close(exact(&hot), complements, 1e-15));
    // exact ties count as failures
    assert!(close(exact(&tied), 1.0, 1e-14));
    // many sampled rounds agree with the infinite-shot limit
    let shared = RepParams::<f64>::shared();
    let n = 5usize;
    let limit = bler_ranking(n, 0.1, 1, &shared, RankingMode::Expected, SumDomain::ExcludeConstant).unwrap();
    let sampled = bler_ranking(
        n,
        0.1,
        20_000,
        &shared,
        RankingMode::MonteCarlo { seed: 9 },
        SumDomain::ExcludeConstant,
    )
    .unwrap();
    let spread: f64 = (0..1u64 << n)
        .map(|z| string_error_probability(&Word::from_index(z, n), 0.1f64).powi(2))
        .sum::<f64>()
        .sqrt()
        / 2.0;
    assert!((limit - sampled).abs() <= 3.0 * spread, "{limit} vs {sampled}");
}

pub fn majority_vote_cases() {
    assert!(close(bler_majority_vote(3, 0.1).unwrap(), 0.028, 1e-15));
    for n in [3usize, 7, 11] {
        assert!(close(bler_majority_vote(n, 0.5).unwrap(), 0.5, 1e-14));
    }
}

pub fn uniform_rounds() {
    let zero = RepParams::new(1.0f64, 2.0, 0.0, 0.0);
    for n in [3usize, 6, 10] {
        let r = expected_rounds_postselection(n, 0.1, &zero, SumDomain::IncludeZeroError).unwrap();
        assert!(close(r, 2f64.powi(n as i32 - 1), 1e-9 * r));
    }
}

pub fn ml_cases() {
    let code = irr();
    for c in code.codewords().unwrap() {
        assert_eq!(&ml_decode(&code, c, 0.1).unwrap(), c);
    }
    assert_eq!(
        ml_decode(&repetition_code(3).unwrap(), &w("100"), 0.1).unwrap(),
        w("000")
    );
    assert_eq!(ml_decode(&repetition_code(2).unwrap(), &w("10"), 0.1).unwrap(), w("00"));
}

pub fn min_weight_cases() {
    let code = irr();
    assert!(min_weight_syndrome_decode(&code, &Syndrome::zeros(8))
        .unwrap()
        .is_zero());
    let rep = repetition_code(3).unwrap();
    assert_eq!(min_weight_syndrome_decode(&rep, &syn("10")).unwrap(), w("100"));
}

pub fn clamped_sweeps_have_no_errors() {
    for decoder in DecoderKind::ALL {
        // at p <= 2 the optimised state on this code sits on a weight-one
        // error; level five concentrates on the zero string
        let mut spec = ExperimentSpec::new("irr_12_8", decoder, vec![40.0]);
        spec.trials = 1000;
        spec.p = 5;
        let r = run_bler_sweep(&spec).unwrap();
        assert!(r.points[0].epsilon_clamped);
        assert_eq!(r.points[0].errors, 0, "{decoder}");
    }
}

pub fn concentrated_qaoa_decodes() {
    let code = irr();
    let e = w("000000010000");
    let y = code.codewords().unwrap()[2].xor(&e);
    let mut probs = vec![0.0; 4096];
    probs[e.to_index() as usize] = 1.0;
    let dist = OutcomeDistribution::new(12, probs).unwrap();
    let entry = CachedSyndrome::from_distribution(vec![], vec![], 0.0, dist);
    let x = y.xor(&e);
    assert_eq!(qaoa_decode(&y, &entry, 50, &mut rng(0)), x);
    assert_eq!(
        qaoa_postsel_decode(&code, &y, &entry, 50, &mut rng(0)).unwrap(),
        (x, false)
    );
}

pub fn repetition_qualifying_strings() {
    for n in [3usize, 5, 8] {
        let code = repetition_code(n).unwrap();
        for z in 0..1u64 << n {
            let e = Word::from_index(z, n);
            let s = code.syndrome(&e).unwrap();
            let mut qualifying: Vec<Word> = (0..1u64 << n)
                .map(|t| Word::from_index(t, n))
                .filter(|t| code.syndrome(t).unwrap() == s)
                .collect();
            qualifying.sort_by_key(Word::to_index);
            let mut expected = vec![e.clone(), e.complement()];
            expected.sort_by_key(Word::to_index);
            assert_eq!(qualifying, expected);
        }
    }
}

pub fn csv_and_json_output() {
    assert_eq!(to_csv(&[]).trim_end(), CSV_HEADER);
    let mut spec = ExperimentSpec::new("reg_12_8", DecoderKind::Bp, vec![1.0, 4.0]);
    spec.trials = 300;
    spec.master_seed = 11;
    let a = run_bler_sweep(&spec).unwrap();
    let b = run_bler_sweep(&spec).unwrap();
    assert_eq!(to_csv(std::slice::from_ref(&a)), to_csv(std::slice::from_ref(&b)));
    let mut empty = a.clone();
    empty.points.clear();
    assert_eq!(to_csv(&[empty]).trim_end(), CSV_HEADER);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("record.json");
    emit_json(&a, &path).unwrap();
    assert_eq!(load_json(&path).unwrap(), a);
}
