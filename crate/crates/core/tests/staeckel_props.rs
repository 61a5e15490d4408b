mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{cases, seeded};
use killing_s3::corpus::{random_diagonal, random_frame, random_sym4, random_variety_point, rng};
use killing_s3::decomposition::DiagonalACT;
use killing_s3::integrability::is_integrable;
use killing_s3::ksvariety::{is_singular, ks_matrix};
use killing_s3::lambda2::Sym4;
use killing_s3::oracle::numeric_commutator;
use killing_s3::staeckel::{
    benenti_adjugate_form, benenti_eval, benenti_family, commute_diagonal, commute_general, staeckel_system,
    StaeckelSystem,
};
use killing_s3::ToleranceConfig;

const TOL: f64 = 1e-10;

fn combination(sys: &StaeckelSystem, c: [f64; 3]) -> DiagonalACT {
    let g = sys.generators;
    let e: Vec<f64> = (0..6)
        .map(|k| c[0] * g[0].entries()[k] + c[1] * g[1].entries()[k] + c[2] * g[2].entries()[k])
        .collect();
    // entries are w ± t + s/12
    let w = [0, 1, 2].map(|a| (e[a] + e[a + 3]) / 2.0);
    let t = [0, 1, 2].map(|a| (e[a] - e[a + 3]) / 2.0);
    let s = 12.0 * (w[0] + w[1] + w[2]) / 3.0;
    DiagonalACT::new(w.map(|x| x - s / 12.0), t, s)
}

fn invertible_sym4(r: &mut impl Rng) -> Sym4 {
    loop {
        let h = random_sym4(r);
        if h.matrix().determinant().abs() > 1e-2 {
            return h;
        }
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn benenti_forms_agree(mut r in seeded()) {
        let h = invertible_sym4(&mut r);
        let f = benenti_family(&h);
        let eig = h.eigenvalues();
        for _ in 0..10 {
            let lambda: f64 = r.gen_range(-3.0..3.0);
            prop_assume!(eig.iter().all(|e| (e - lambda).abs() > 1e-2));
            let a = benenti_eval(&f, lambda);
            let b = benenti_adjugate_form(&h, lambda);
            prop_assert!((a.matrix() - b.matrix()).abs().max() <= 1e-9 * a.norm());
        }
    }

    #[test]
    fn benenti_members_are_integrable_and_commute(mut r in seeded()) {
        let cfg = ToleranceConfig::default();
        let f = benenti_family(&random_sym4(&mut r));
        let members: Vec<_> = (0..3).map(|_| benenti_eval(&f, r.gen_range(-3.0..3.0))).collect();
        for m in &members {
            prop_assert!(is_integrable(m, &cfg, None).verdict);
        }
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert!(commute_general(&members[i], &members[j]) < TOL);
            }
        }
    }

    #[test]
    fn staeckel_system_is_a_commuting_integrable_triple(mut r in seeded(), s in -3.0..3.0f64) {
        let cfg = ToleranceConfig::default();
        let m = random_variety_point(&mut r);
        prop_assume!(!is_singular(&m, 1e-6));
        let sys = staeckel_system(&m, s, &cfg).unwrap();
        prop_assert!(sys.independence() > 1e-6);
        for (i, g) in sys.generators.iter().enumerate() {
            prop_assert!(is_integrable(&g.to_act(), &cfg, None).verdict);
            for h in &sys.generators[i + 1..] {
                prop_assert!(commute_diagonal(g, h, TOL));
                prop_assert!(commute_general(&g.to_act(), &h.to_act()) < TOL);
            }
        }
        let x = combination(&sys, [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]);
        prop_assert!(sys.span_residual(&x) < 1e-10);
        prop_assert!(ks_matrix(&x).det().abs() <= 1e-10 * ks_matrix(&x).norm().powi(3).max(1e-300));
    }
}

/// The three commutation tests agree on 100 commuting and 100 generic pairs.
#[test]
fn commutation_tests_agree() {
    let cfg = ToleranceConfig::default();
    let mut r = rng(71);
    let (mut commuting, mut generic) = (0, 0);
    while commuting + generic < 200 {
        let (a, b) = if commuting < 100 {
            let m = random_variety_point(&mut r);
            if is_singular(&m, 1e-6) {
                continue;
            }
            let sys = staeckel_system(&m, r.gen_range(-3.0..3.0), &cfg).unwrap();
            let mut c = || [0; 3].map(|_| r.gen_range(-1.0..1.0));
            (combination(&sys, c()), combination(&sys, c()))
        } else {
            (random_diagonal(&mut r), random_diagonal(&mut r))
        };
        let scale = a.tracefree_norm() * b.tracefree_norm();
        let diag = commute_diagonal(&a, &b, TOL);
        let general = commute_general(&a.to_act(), &b.to_act()) < TOL;
        let numeric = (0..20)
            .map(|_| numeric_commutator(&a.to_act(), &b.to_act(), &random_frame(&mut r, 0.05)))
            .fold(0.0_f64, f64::max)
            / scale
            < TOL;
        assert_eq!(diag, general, "pair {a:?} {b:?}");
        assert_eq!(diag, numeric, "pair {a:?} {b:?}");
        if diag {
            commuting += 1;
        } else {
            generic += 1;
        }
    }
    assert_eq!((commuting, generic), (100, 100));
}
