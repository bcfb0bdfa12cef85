use std::f64::consts::FRAC_PI_2;

use hopf_core::analysis::{
    blowup_compare, comparison_check, comparison_scale, estimate_is1_trend, estimate_is2, find_solution,
    junction_asymptotics_check, junction_limits, solvability_map, CellVerdict, FindOptions, Verdict,
};
use hopf_core::closed_forms::psi_comparison;
use hopf_core::variational::{glue, GlueOptions};
use hopf_core::HopfParams;

fn params(p: u32, q: u32, lambda: f64, mu: f64) -> HopfParams {
    HopfParams::new(p, q, lambda, mu).unwrap()
}

#[test]
fn main_regime_solution() {
    let Verdict::Solution(f) = find_solution(&params(1, 2, 1.0, 4.0), &FindOptions::default()).unwrap() else {
        panic!("no solution");
    };
    assert!(f.scan.has_sign_change());
    assert!(f.glued.l.abs() <= 1e-6);
    assert!(f.max_residual <= 1e-4);
    let prof = f.glued.profile().unwrap();
    assert!(prof.is_strictly_increasing());
    assert_eq!(f.scan.s_star, Some(f.glued.s));
}

#[test]
fn verdicts_for_other_parameters() {
    assert!(matches!(find_solution(&params(2, 2, 2.0, 2.0), &FindOptions::default()).unwrap(), Verdict::Solution(_)));
    assert!(matches!(find_solution(&params(1, 3, 1.0, 2.0), &FindOptions::default()).unwrap(), Verdict::NoSignChange(_)));
    assert!(matches!(find_solution(&params(1, 2, 1.0, 1.9), &FindOptions::default()).unwrap(), Verdict::NoSignChange(_)));
}

#[test]
fn p_q_one_map_is_diagonal() {
    let cells = solvability_map(1, 1, &[1.0, 2.0], &[1.0, 2.0], &FindOptions::default());
    for c in &cells {
        let expected = if c.lambda == c.mu { CellVerdict::SolutionFound } else { CellVerdict::NoSignChange };
        assert_eq!(c.verdict, expected, "lambda = {}, mu = {}", c.lambda, c.mu);
    }
}

#[test]
fn blowup_distance_trend_and_pinning() {
    let p = params(1, 2, 1.0, 4.0);
    let opts = GlueOptions::default();
    let far = blowup_compare(0.02, &p, 0.1, &opts).unwrap();
    let near = blowup_compare(0.005, &p, 0.1, &opts).unwrap();
    assert!(near <= far, "{near} vs {far}");
    assert!(blowup_compare(0.01, &p, 0.1, &opts).unwrap() <= 0.05);
    for s in [0.005, 0.02] {
        assert_eq!(glue(s, &p, &opts).unwrap().profile().unwrap().eval(s).unwrap(), FRAC_PI_2);
    }
}

#[test]
fn is1_trends() {
    let opts = GlueOptions::default();
    let strong = estimate_is1_trend(&params(1, 2, 4.0, 12.0), &[0.04, 0.02, 0.01], &opts).unwrap();
    assert!(strong[2] >= 0.95 * FRAC_PI_2, "{strong:?}");
    let weak = estimate_is1_trend(&params(1, 2, 1.0, 4.0), &[0.04, 0.02, 0.01], &opts).unwrap();
    assert!(weak[0] < weak[1] && weak[1] < weak[2], "{weak:?}");
    assert!(weak.iter().all(|&v| v > 0.0));
}

#[test]
fn is2_bound_and_ratio_trend() {
    let p = params(1, 2, 1.0, 4.0);
    let opts = GlueOptions::default();
    let e = estimate_is2(&p, 0.01, 50.0, &opts).unwrap();
    assert!(e.bound_holds(), "{e:?}");
    assert!((e.b_bound - 0.5f64.tan().powi(2) * e.i_s1).abs() < 1e-12);
    assert!(e.i_s2 > 0.0 && e.a_s > 0.0 && e.b_s > 0.0);
    let ratios: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&s| estimate_is2(&p, s, 50.0, &opts).unwrap().ratio).collect();
    assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
}

#[test]
fn comparison_at_small_junction() {
    let p = params(1, 2, 1.0, 4.0);
    let (s, r) = (0.01, 50.0);
    let d = comparison_scale(s, r, &p).unwrap().expect("admissible scale");
    let rep = comparison_check(s, 0.5 * (1.0 + d), r * s, &p, &GlueOptions::default()).unwrap();
    assert!(rep.hypothesis_met);
    assert!(rep.ordering_holds(1e-6), "{rep:?}");
    assert!(rep.supersolution_positive(), "{rep:?}");
    assert!(rep.nodes_checked > 100);
}

#[test]
fn junction_limit_values() {
    let (a, _) = junction_limits(10.0, 1.0, 1.0);
    assert!((a + 0.980198).abs() < 1e-6);
    let (_, psi_at_own_scale) = junction_limits(10.0, 10.0, 1.0);
    assert!(psi_at_own_scale.abs() < 1e-15);
    assert!(psi_comparison(0.3, 0.3, 2.0).unwrap().cos().abs() < 1e-15);
}

#[test]
fn junction_error_is_quadratic_in_s() {
    let p = params(1, 2, 1.0, 4.0);
    let opts = GlueOptions::default();
    let errs: Vec<f64> = [0.004, 0.002, 0.001]
        .iter()
        .map(|&s| junction_asymptotics_check(s, 10.0, 3.0, &p, &opts).unwrap().psi_error)
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}
