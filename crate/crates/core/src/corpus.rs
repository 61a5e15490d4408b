//! Seeded random generators for test corpora.

use nalgebra::{Matrix3, Matrix4, Matrix6, Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{DiagonalACT, RotationPair};
use crate::ksvariety::{ks_matrix, KSMatrix};
use crate::lambda2::{star, AlgCurvTensor, Sym4, Vec4};
use crate::oracle::TangentFrame;

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform3(rng: &mut impl Rng, r: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(-r..r))
}

/// `w`, `t` uniform in `[-1, 1]³` (`w` then projected), `s` uniform in `[-5, 5]`.
pub fn random_diagonal(rng: &mut impl Rng) -> DiagonalACT {
    let w = uniform3(rng, 1.0);
    let t = uniform3(rng, 1.0);
    DiagonalACT::new(w, t, rng.gen_range(-5.0..5.0))
}

/// Diagonal tensor on the quadric `det KS = 0`, obtained by solving for `t₃`.
pub fn on_quadric(rng: &mut impl Rng) -> DiagonalACT {
    loop {
        let d = random_diagonal(rng);
        let (w, t) = (d.w(), d.t());
        let delta = [w[1] - w[2], w[2] - w[0], w[0] - w[1]];
        if delta[2].abs() < 0.05 {
            continue;
        }
        // det(Δ + [t]×) = Δ₁Δ₂Δ₃ + Σ Δ_α t_α²
        let rhs = -(delta[0] * delta[1] * delta[2] + delta[0] * t[0] * t[0] + delta[1] * t[1] * t[1]) / delta[2];
        if rhs < 0.0 {
            continue;
        }
        let t3 = if rng.gen_bool(0.5) { rhs.sqrt() } else { -rhs.sqrt() };
        return DiagonalACT::new(w, [t[0], t[1], t3], d.s());
    }
}

/// Rotation from a unit quaternion drawn uniformly from the ball.
pub fn random_rotation3(rng: &mut impl Rng) -> Matrix3<f64> {
    *random_unit_quaternion(rng).to_rotation_matrix().matrix()
}

fn random_unit_quaternion(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

/// `u ↦ p·u·q̄` on quaternions, an element of SO(4).
pub fn random_so4(rng: &mut impl Rng) -> Matrix4<f64> {
    let p = random_unit_quaternion(rng);
    let q = random_unit_quaternion(rng);
    let (a, b, c, d) = (p.w, p.i, p.j, p.k);
    let left = Matrix4::new(a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a);
    let (a, b, c, d) = (q.w, -q.i, -q.j, -q.k);
    let right = Matrix4::new(a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a);
    left * right
}

pub fn random_rotation_pair(rng: &mut impl Rng) -> RotationPair {
    RotationPair::new(random_rotation3(rng), random_rotation3(rng)).expect("rotations")
}

/// Symmetric 6×6 with uniform entries, projected onto the Bianchi hyperplane.
pub fn random_act(rng: &mut impl Rng) -> AlgCurvTensor {
    let mut m = Matrix6::zeros();
    for i in 0..6 {
        for j in i..6 {
            let x = rng.gen_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    let s = star();
    let m = m - s * ((s * m).trace() / 6.0);
    AlgCurvTensor::from_matrix(m).expect("projected onto the Bianchi hyperplane")
}

pub fn random_sym4(rng: &mut impl Rng) -> Sym4 {
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            m[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    Sym4::from_upper(&m)
}

/// Uniform point of S³ with every coordinate at least `min_abs` in size.
pub fn random_sphere_point(rng: &mut impl Rng, min_abs: f64) -> Vec4 {
    loop {
        let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if !(0.1..=1.0).contains(&n) {
            continue;
        }
        let x = v / n;
        if x.iter().all(|c| c.abs() > min_abs) {
            return x;
        }
    }
}

pub fn random_frame(rng: &mut impl Rng, min_abs: f64) -> TangentFrame {
    loop {
        let x = random_sphere_point(rng, min_abs);
        let seeds = [0; 3].map(|_| Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0)));
        if let Ok(f) = TangentFrame::from_vectors(x, seeds) {
            return f;
        }
    }
}

/// KS-matrix of a random diagonal tensor on the quadric.
pub fn random_variety_point(rng: &mut impl Rng) -> KSMatrix {
    ks_matrix(&on_quadric(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_valid() {
        let (mut a, mut b) = (rng(3), rng(3));
        assert_eq!(random_diagonal(&mut a), random_diagonal(&mut b));
        for _ in 0..50 {
            assert!(ks_matrix(&on_quadric(&mut a)).det().abs() < 1e-12);
            let u = random_so4(&mut a);
            assert!((u.transpose() * u - Matrix4::identity()).abs().max() < 1e-14);
            assert!((u.determinant() - 1.0).abs() < 1e-14);
            let _ = random_act(&mut a);
        }
    }
}
