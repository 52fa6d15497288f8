use approx::assert_abs_diff_eq;
use qnt_core::hl::{run_hl, s_prime_error};
use qnt_core::mainloop::{self, PhaseOracle};
use qnt_core::ntcore::r2_pairs;
use qnt_core::{HlConfig, QState, SPrime};

#[test]
fn good_pairs_have_exact_phase() {
    for two_n in [16, 20] {
        let s = SPrime::strong(two_n, 8).unwrap();
        for k in (0..two_n).filter(|&k| s.good()[k]) {
            let mut st = QState::basis(s.layout().clone(), &[k, 0, 0, 0, 0]).unwrap();
            s.apply(&mut st).unwrap();
            assert_abs_diff_eq!(st.amplitude(&[k, 0, 0, 0, 0]).re, -1.0, epsilon = 1e-10);
        }
        assert_eq!(
            mainloop::good_count(s.good()) as u64,
            r2_pairs(two_n as u64).unwrap()
        );
    }
}

#[test]
fn pair_residual_bound() {
    for two_n in [16, 20] {
        let mut prev = f64::INFINITY;
        for p in [8, 16] {
            let b = s_prime_error(two_n, p).unwrap();
            assert!(b.e_norm_sq <= b.e_bound, "2N={two_n} P={p}");
            assert_abs_diff_eq!(b.e_norm_sq, b.e_norm_sq_analytic, epsilon = 1e-10);
            assert!(b.e_norm_sq < prev);
            prev = b.e_norm_sq;
        }
    }
}

#[test]
fn s_prime_is_an_involution() {
    let s = SPrime::strong(16, 4).unwrap();
    let mut st = mainloop::flat_input(s.layout()).unwrap();
    let before = st.clone();
    s.apply(&mut st).unwrap();
    s.apply(&mut st).unwrap();
    assert!(st.distance(&before).unwrap() <= 1e-10);
}

#[test]
fn pair_count_report() {
    let r = run_hl(&HlConfig {
        repetitions: 9,
        seed: 3,
        ..HlConfig::new(16, 8, 16)
    })
    .unwrap();
    assert_eq!(r.r2_true, 4);
    assert!(r.budget.e_within_bound);
    assert!(r.success_ok && r.w_err_ok);
    for &l in &r.statistics.modal_outcomes {
        let e = qnt_core::counting::estimate_from_outcome(l, 16, 16).unwrap();
        assert!((e.t - 4.0).abs() <= r.delta_r_bound);
    }
    assert_abs_diff_eq!(
        r.conjecture_ratio_true,
        4.0 * 8f64.ln().powi(2) / 8.0,
        epsilon = 1e-12
    );
}
