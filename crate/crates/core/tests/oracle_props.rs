mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{cases, seeded};
use killing_s3::corpus::{on_quadric, random_act, random_diagonal, random_frame};
use killing_s3::integrability::diagonal_is_integrable;
use killing_s3::lambda2::{AlgCurvTensor, Vec4};
use killing_s3::oracle::{
    geodesic_conservation, geodesic_conservation_components, nijenhuis_residual, tns_verdict, TangentFrame,
    DEFAULT_STEP, TNS_FLOOR,
};

fn reframe(f: &TangentFrame, r: &mut impl Rng) -> TangentFrame {
    let seeds = [0; 3].map(|_| Vec4::from_fn(|_, _| r.gen_range(-1.0..1.0)));
    TangentFrame::from_vectors(*f.point(), seeds).unwrap()
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn every_tensor_satisfies_the_killing_equation(mut r in seeded()) {
        let t = random_act(&mut r);
        for _ in 0..5 {
            let f = random_frame(&mut r, 0.05);
            prop_assert!(nijenhuis_residual(&t, &f, DEFAULT_STEP).killing_eq < 1e-7);
            let v = Vec4::from_fn(|_, _| r.gen_range(-1.0..1.0));
            prop_assert!(geodesic_conservation(&t, f.point(), &v, 16) < 1e-12 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn residuals_do_not_depend_on_the_frame(mut r in seeded(), on in any::<bool>()) {
        let d = if on { on_quadric(&mut r) } else { random_diagonal(&mut r) };
        let t = d.to_act();
        let f = random_frame(&mut r, 0.05);
        let a = nijenhuis_residual(&t, &f, DEFAULT_STEP);
        let b = nijenhuis_residual(&t, &reframe(&f, &mut r), DEFAULT_STEP);
        for p in 0..3 {
            let (x, y) = (a.tns[p], b.tns[p]);
            if x.max(y) > TNS_FLOOR {
                prop_assert!(x.max(y) < 2.0 * x.min(y), "p = {}: {} vs {}", p, x, y);
            } else {
                prop_assert!(x.max(y) < TNS_FLOOR);
            }
        }
    }
}

/// Oracle verdicts on 100 tensors on the quadric and 100 off it.
#[test]
fn oracle_matches_the_determinant_test() {
    let mut r = killing_s3::corpus::rng(81);
    let mut disagreements = Vec::new();
    for k in 0..200 {
        let d = if k < 100 {
            on_quadric(&mut r)
        } else {
            random_diagonal(&mut r)
        };
        let frames: Vec<_> = (0..5).map(|_| random_frame(&mut r, 0.05)).collect();
        let res: Vec<_> = frames
            .iter()
            .map(|f| nijenhuis_residual(&d.to_act(), f, DEFAULT_STEP))
            .collect();
        if tns_verdict(&res) != Some(diagonal_is_integrable(&d, 1e-10)) {
            disagreements.push(d);
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:?}");
}

/// A rank-4 array breaking the pair symmetry is no longer conserved along
/// geodesics, while every curvature tensor is.
#[test]
fn conservation_detects_a_corrupted_array() {
    let mut r = killing_s3::corpus::rng(82);
    let t: AlgCurvTensor = random_act(&mut r);
    let mut c = t.components();
    let x = Vec4::new(0.5, 0.5, 0.5, 0.5);
    let v = Vec4::new(1.0, -1.0, 0.0, 0.0);
    assert!(geodesic_conservation_components(&c, &x, &v, 32) < 1e-12);
    c[0][1][0][2] += 0.3;
    c[1][0][2][0] += 0.3;
    assert!(geodesic_conservation_components(&c, &x, &v, 32) > 1e-3);
}
