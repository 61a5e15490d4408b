mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{cases, seeded};
use killing_s3::coords::{
    classify_spectrum, eigenvalues_with_flag, interlacing_slack, q, Spectrum, SpectrumClass, SpherePoint,
};
use killing_s3::corpus::random_sphere_point;
use killing_s3::lambda2::{hodge_conjugate, Sym4};
use killing_s3::oracle::{killing_endomorphism, TangentFrame};
use killing_s3::staeckel::special_killing;

fn spectrum(r: &mut impl Rng) -> [f64; 4] {
    let mut l = [0.0; 4];
    l[0] = r.gen_range(-2.0..2.0);
    for k in 1..4 {
        l[k] = l[k - 1] + r.gen_range(0.1..1.5);
    }
    l
}

fn same_class(a: &SpectrumClass, b: &SpectrumClass) -> bool {
    match (a, b) {
        (SpectrumClass::Type(x), SpectrumClass::Type(y)) => x == y,
        (SpectrumClass::NeedsLineData, SpectrumClass::NeedsLineData) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(cases(10_000))]

    #[test]
    fn eigenvalues_interlace_and_are_roots(mut r in seeded()) {
        let spec = Spectrum::new(spectrum(&mut r), 1e-8).unwrap();
        let x = SpherePoint::new(random_sphere_point(&mut r, 0.1).into()).unwrap();
        let (lam, _) = eigenvalues_with_flag(&spec, &x);
        prop_assert!(interlacing_slack(&spec, &lam) >= -1e-10);
        for l in lam {
            let near = spec.lambda().iter().any(|e| (e - l).abs() < 1e-9);
            if !near {
                prop_assert!(q(&spec, &x, l).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(500))]

    /// The eigenvalues sum to `½ tr K` for the Killing tensor of `★(L⊼g)★`
    /// with `L = diag(Λ)`, evaluated through the oracle.
    #[test]
    fn eigenvalue_sum_matches_the_killing_tensor(mut r in seeded()) {
        let l = spectrum(&mut r);
        let spec = Spectrum::new(l, 1e-8).unwrap();
        let x = random_sphere_point(&mut r, 0.1);
        let lam = killing_s3::coords::elliptic_coords(&spec, &SpherePoint::new(x.into()).unwrap()).unwrap();
        let h = Sym4::diag(l);
        let seeds = [0; 3].map(|_| killing_s3::lambda2::Vec4::from_fn(|_, _| r.gen_range(-1.0..1.0)));
        let frame = TangentFrame::from_vectors(x, seeds).unwrap();
        let k = killing_endomorphism(&hodge_conjugate(&special_killing(&h)), &frame);
        let sum: f64 = lam.iter().sum();
        prop_assert!((sum - 0.5 * k.trace()).abs() < 1e-9 * (1.0 + sum.abs()));
    }

    #[test]
    fn classification_ignores_affine_changes(
        mut r in seeded(),
        ties in prop::array::uniform3(any::<bool>()),
        a in prop_oneof![-5.0..-0.2f64, 0.2..5.0f64],
        b in -5.0..5.0f64,
    ) {
        let mut l = spectrum(&mut r);
        for k in 0..3 {
            if ties[k] {
                l[k + 1] = l[k];
            }
        }
        prop_assume!(ties.iter().any(|t| !t));
        let base = classify_spectrum(&Spectrum::new(l, 1e-8).unwrap()).unwrap();
        let reversed = classify_spectrum(&Spectrum::new(l.map(|x| -x), 1e-8).unwrap()).unwrap();
        let moved = classify_spectrum(&Spectrum::new(l.map(|x| a * x + b), 1e-8).unwrap()).unwrap();
        prop_assert!(same_class(&base, &reversed));
        prop_assert!(same_class(&base, &moved));
    }
}
