//! The Killing–Stäckel variety: 3×3 matrices with diagonal trace-free
//! symmetric part and vanishing determinant.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3, SVD};
use serde::{Deserialize, Serialize};

use crate::decomposition::{DiagonalACT, ResidualS4, PERMUTATIONS};
use crate::error::{Error, Result};
use crate::lambda2::adjugate3;
use crate::ToleranceConfig;

const STRUCTURE_TOL: f64 = 1e-12;
/// Relative tolerance for projective comparisons of normalized vectors.
const PROJECTIVE_TOL: f64 = 1e-9;

/// `[[Δ₁, −t₃, t₂], [t₃, Δ₂, −t₁], [−t₂, t₁, Δ₃]]` with `ΣΔ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKS")]
pub struct KSMatrix {
    delta: [f64; 3],
    t: [f64; 3],
}

#[derive(Deserialize)]
struct RawKS {
    delta: [f64; 3],
    t: [f64; 3],
}

impl TryFrom<RawKS> for KSMatrix {
    type Error = Error;
    fn try_from(r: RawKS) -> Result<Self> {
        KSMatrix::new(r.delta, r.t)
    }
}

impl KSMatrix {
    pub fn new(delta: [f64; 3], t: [f64; 3]) -> Result<Self> {
        let trace = delta.iter().sum::<f64>();
        let scale = delta.iter().chain(t.iter()).fold(1.0_f64, |a, x| a.max(x.abs()));
        if trace.abs() > STRUCTURE_TOL * scale {
            return Err(Error::NotTraceFree { trace });
        }
        let m = trace / 3.0;
        Ok(KSMatrix {
            delta: [delta[0] - m, delta[1] - m, delta[2] - m],
            t,
        })
    }

    pub fn zero() -> Self {
        KSMatrix {
            delta: [0.0; 3],
            t: [0.0; 3],
        }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let sym = (m + m.transpose()) * 0.5;
        let scale = m.abs().max().max(1.0);
        let off = sym[(0, 1)].abs().max(sym[(0, 2)].abs()).max(sym[(1, 2)].abs());
        if off > STRUCTURE_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "symmetric part is not diagonal (off-diagonal {off:e})"
            )));
        }
        let skew = (m - m.transpose()) * 0.5;
        KSMatrix::new(
            [m[(0, 0)], m[(1, 1)], m[(2, 2)]],
            [skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]],
        )
    }

    /// Inverse of [`KSMatrix::vector`].
    pub fn from_vector(v: [f64; 6]) -> Result<Self> {
        KSMatrix::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }

    pub fn delta(&self) -> [f64; 3] {
        self.delta
    }

    pub fn t(&self) -> [f64; 3] {
        self.t
    }

    /// Coordinates `(Δ₁, Δ₂, Δ₃, t₁, t₂, t₃)`.
    pub fn vector(&self) -> [f64; 6] {
        let (d, t) = (self.delta, self.t);
        [d[0], d[1], d[2], t[0], t[1], t[2]]
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let (d, t) = (self.delta, self.t);
        Matrix3::new(d[0], -t[2], t[1], t[2], d[1], -t[0], -t[1], t[0], d[2])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn adjugate(&self) -> Matrix3<f64> {
        adjugate3(&self.matrix())
    }

    pub fn norm(&self) -> f64 {
        self.matrix().norm()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &KSMatrix, b: f64) -> KSMatrix {
        let v = self.vector();
        let w = other.vector();
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = a * v[i] + b * w[i];
        }
        KSMatrix {
            delta: [out[0], out[1], out[2]],
            t: [out[3], out[4], out[5]],
        }
    }

    /// Projective normalization: max-abs coordinate 1, first nonzero positive.
    pub fn normalized(&self) -> KSMatrix {
        let v = normalize_projective(&self.vector());
        KSMatrix {
            delta: [v[0], v[1], v[2]],
            t: [v[3], v[4], v[5]],
        }
    }

    pub fn projectively_equal(&self, other: &KSMatrix) -> bool {
        let a = normalize_projective(&self.vector());
        let b = normalize_projective(&other.vector());
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= PROJECTIVE_TOL)
    }
}

fn normalize_projective<const N: usize>(v: &[f64; N]) -> [f64; N] {
    let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m == 0.0 {
        return *v;
    }
    let mut out = v.map(|x| x / m);
    if let Some(first) = out.iter().find(|x| x.abs() > PROJECTIVE_TOL) {
        if *first < 0.0 {
            out = out.map(|x| -x);
        }
    }
    out
}

fn lex_cmp(a: &[f64; 6], b: &[f64; 6]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > PROJECTIVE_TOL {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// A point of ℙ², stored with max-abs entry 1 and first nonzero entry positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjVec3([f64; 3]);

impl ProjVec3 {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        if v.iter().all(|x| *x == 0.0) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::ZeroVector);
        }
        Ok(ProjVec3(normalize_projective(&v)))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.0)
    }

    /// `|n₁| = |n₂| = |n₃|`: the four directions with an isokernel plane.
    pub fn is_exceptional(&self, tol: f64) -> bool {
        let a = self.0.map(f64::abs);
        (a[0] - a[1]).abs() <= tol && (a[1] - a[2]).abs() <= tol
    }
}

/// `Δ₁ = w₂ − w₃`, `Δ₂ = w₃ − w₁`, `Δ₃ = w₁ − w₂`; the scalar part is dropped.
pub fn ks_matrix(d: &DiagonalACT) -> KSMatrix {
    let (w, t) = (d.w(), d.t());
    KSMatrix {
        delta: [w[1] - w[2], w[2] - w[0], w[0] - w[1]],
        t,
    }
}

pub fn diagonal_from_ks(m: &KSMatrix, s: f64) -> DiagonalACT {
    let d = m.delta;
    DiagonalACT::new([(d[2] - d[1]) / 3.0, (d[0] - d[2]) / 3.0, (d[1] - d[0]) / 3.0], m.t, s)
}

/// Rank-one singular point `V±α` (`alpha` in 0..3).
pub fn vertex(alpha: usize, plus: bool) -> KSMatrix {
    let e = if plus { 1.0 } else { -1.0 };
    let m = match alpha {
        0 => Matrix3::new(0.0, 0.0, 0.0, 0.0, 1.0, -e, 0.0, e, -1.0),
        1 => Matrix3::new(-1.0, 0.0, e, 0.0, 0.0, 0.0, -e, 0.0, 1.0),
        2 => Matrix3::new(1.0, -e, 0.0, e, -1.0, 0.0, 0.0, 0.0, 0.0),
        _ => panic!("vertex index {alpha} out of range"),
    };
    KSMatrix::from_matrix(&m).expect("vertices lie in the slice")
}

/// `C₀ = V₊₁ + V₊₂ + V₊₃` and `C_α = V₋α + V₊β + V₊γ`.
pub fn centre(k: usize) -> KSMatrix {
    let signs = match k {
        0 => [true, true, true],
        1 => [false, true, true],
        2 => [true, false, true],
        3 => [true, true, false],
        _ => panic!("centre index {k} out of range"),
    };
    (0..3).fold(KSMatrix::zero(), |acc, a| acc.combine(1.0, &vertex(a, signs[a]), 1.0))
}

/// `V₊₁, V₋₁, V₊₂, V₋₂, V₊₃, V₋₃, C₀, C₁, C₂, C₃`.
pub fn singular_points() -> Vec<KSMatrix> {
    let mut out = Vec::with_capacity(10);
    for a in 0..3 {
        out.push(vertex(a, true));
        out.push(vertex(a, false));
    }
    out.extend((0..4).map(centre));
    out
}

/// Norm of the gradient of `det` restricted to the 5-dimensional slice,
/// divided by `‖M‖²`.
pub fn singular_gradient(m: &KSMatrix) -> f64 {
    let n2 = m.norm().powi(2);
    if n2 == 0.0 {
        return 0.0;
    }
    let x = m.adjugate().transpose();
    let mut p = (x - x.transpose()) * 0.5;
    let mean = x.trace() / 3.0;
    for i in 0..3 {
        p[(i, i)] = x[(i, i)] - mean;
    }
    p.norm() / n2
}

pub fn is_singular(m: &KSMatrix, tol: f64) -> bool {
    singular_gradient(m) <= tol
}

fn singular_values(m: &KSMatrix) -> Vector3<f64> {
    SVD::new(m.matrix(), false, false).singular_values
}

/// Kernel direction of a rank-two variety point, read off the largest column
/// of the adjugate.
pub fn kernel_map(m: &KSMatrix, cfg: &ToleranceConfig) -> Result<ProjVec3> {
    let sv = singular_values(m);
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(|a, b| b.total_cmp(a));
    if s[0] == 0.0 {
        return Err(Error::InvalidInput("zero KS-matrix has no kernel direction".into()));
    }
    if s[2] > cfg.rank * s[0] {
        return Err(Error::NotOnVariety { det: s[2] / s[0] });
    }
    if s[1] <= cfg.rank * s[0] {
        return Err(Error::RankOne);
    }
    let adj = m.adjugate();
    let best = (0..3)
        .max_by(|&a, &b| adj.column(a).norm().total_cmp(&adj.column(b).norm()))
        .unwrap();
    let c = adj.column(best);
    ProjVec3::new([c[0], c[1], c[2]])
}

/// `ι(n)`: the antisymmetric matrix with axis `n`.
pub fn iota(n: &Vector3<f64>) -> KSMatrix {
    KSMatrix {
        delta: [0.0; 3],
        t: [n[0], n[1], n[2]],
    }
}

/// `ν(n)`: `Δ_α = n_β² − n_γ²`, `t_α = n_β n_γ`.
pub fn nu(n: &Vector3<f64>) -> KSMatrix {
    let (a, b, c) = (n[0], n[1], n[2]);
    KSMatrix {
        delta: [b * b - c * c, c * c - a * a, a * a - b * b],
        t: [b * c, c * a, a * b],
    }
}

/// Basis of `{M : M n = 0}` inside the slice: three matrices at the four
/// exceptional directions, otherwise `ι(n)` and `ν(n)`.
pub fn isokernel_space(n: &ProjVec3, cfg: &ToleranceConfig) -> Vec<KSMatrix> {
    if n.is_exceptional(cfg.rank) {
        let s = n.components().map(f64::signum);
        (0..3)
            .map(|k| {
                let mut t = [0.0; 3];
                t[k] = 1.0;
                KSMatrix::new(
                    [
                        s[1] / s[0] * t[2] - s[2] / s[0] * t[1],
                        s[2] / s[1] * t[0] - s[0] / s[1] * t[2],
                        s[0] / s[2] * t[1] - s[1] / s[2] * t[0],
                    ],
                    t,
                )
                .expect("parametrisation is trace free")
            })
            .collect()
    } else {
        vec![iota(&n.vector()), nu(&n.vector())]
    }
}

/// Line of KS-matrices sharing a kernel; the projective image of a Stäckel system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaeckelLine {
    pub base: KSMatrix,
    pub second: KSMatrix,
    pub kernel: ProjVec3,
    pub degenerate: bool,
}

impl StaeckelLine {
    /// Largest `‖M n‖ / (‖M‖‖n‖)` over the two generators.
    pub fn kernel_residual(&self) -> f64 {
        let n = self.kernel.vector();
        [self.base, self.second]
            .iter()
            .map(|m| (m.matrix() * n).norm() / (m.norm() * n.norm()))
            .fold(0.0, f64::max)
    }
}

pub fn staeckel_line(m: &KSMatrix, cfg: &ToleranceConfig) -> Result<StaeckelLine> {
    if is_singular(m, cfg.rank) {
        return Err(Error::SingularPoint);
    }
    let kernel = match kernel_map(m, cfg) {
        Err(Error::RankOne) => return Err(Error::SingularPoint),
        other => other?,
    };
    let base = iota(&kernel.vector());
    if kernel.is_exceptional(cfg.rank) {
        let (b, v) = (base.vector(), m.vector());
        let c = dot6(&v, &b) / dot6(&b, &b);
        let second = m.combine(1.0, &base, -c);
        if second.norm() <= cfg.rank * m.norm() {
            return Err(Error::SingularPoint);
        }
        Ok(StaeckelLine {
            base,
            second,
            kernel,
            degenerate: true,
        })
    } else {
        Ok(StaeckelLine {
            base,
            second: nu(&kernel.vector()),
            kernel,
            degenerate: false,
        })
    }
}

fn dot6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Rotation of the regular octahedron: `σ[i][perm[i]] = signs[i]`, det +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octahedral {
    pub perm: [usize; 3],
    pub signs: [f64; 3],
}

fn perm_sign(p: &[usize; 3]) -> f64 {
    let inversions = (0..3)
        .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Octahedral {
    pub fn matrix(&self) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            m[(i, self.perm[i])] = self.signs[i];
        }
        m
    }

    /// The element of the residual S₄ on diagonal tensors with
    /// `ks_matrix(ρ·d) = c · σᵀ ks_matrix(d) σ`, together with `c = ±1`.
    pub fn residual(&self) -> (ResidualS4, f64) {
        let mut q = [0usize; 3];
        for i in 0..3 {
            q[self.perm[i]] = i;
        }
        let c = perm_sign(&q);
        let flips = [0, 1, 2].map(|j| c * self.signs[q[j]]);
        (ResidualS4 { perm: q, flips }, c)
    }
}

/// The 24 signed permutation matrices with determinant +1, in a fixed order.
pub fn octahedral_group() -> Vec<Octahedral> {
    let mut out = Vec::with_capacity(24);
    for perm in PERMUTATIONS {
        for bits in 0..8u32 {
            let signs = [0, 1, 2].map(|k| if bits >> k & 1 == 1 { -1.0 } else { 1.0 });
            if perm_sign(&perm) * signs.iter().product::<f64>() > 0.0 {
                out.push(Octahedral { perm, signs });
            }
        }
    }
    out
}

pub fn s4_act(m: &KSMatrix, g: &Octahedral) -> KSMatrix {
    let s = g.matrix();
    KSMatrix::from_matrix(&(s.transpose() * m.matrix() * s)).expect("conjugation preserves the slice")
}

/// Lexicographic minimum over the 24-orbit of the normalized `(Δ, t)` vector.
pub fn canonical_form(m: &KSMatrix) -> KSMatrix {
    octahedral_group()
        .iter()
        .map(|g| s4_act(m, g).normalized())
        .min_by(|a, b| lex_cmp(&a.vector(), &b.vector()))
        .unwrap()
}

/// Distinct projective points of the orbit, in group-table order.
pub fn orbit(m: &KSMatrix) -> Vec<KSMatrix> {
    let mut out: Vec<KSMatrix> = Vec::new();
    for g in octahedral_group() {
        let x = s4_act(m, &g).normalized();
        if !out.iter().any(|y| y.projectively_equal(&x)) {
            out.push(x);
        }
    }
    out
}

pub fn stabilizer_size(m: &KSMatrix) -> usize {
    24 / orbit(m).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: [[f64; 3]; 3]) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| rows[i][j])
    }

    #[test]
    fn ks_matrix_examples() {
        assert_eq!(ks_matrix(&DiagonalACT::new([0.0; 3], [0.0; 3], 5.0)), KSMatrix::zero());
        let m = ks_matrix(&DiagonalACT::new([1.0, 0.0, -1.0], [1.0, 0.0, 1.0], 0.0));
        assert_eq!(m.matrix(), mat([[1.0, -1.0, 0.0], [1.0, -2.0, -1.0], [0.0, 1.0, 1.0]]));
        assert_eq!(m.det(), 0.0);
    }

    #[test]
    fn diagonal_from_ks_examples() {
        let d = diagonal_from_ks(&KSMatrix::zero(), 12.0);
        assert_eq!((d.w(), d.t(), d.s()), ([0.0; 3], [0.0; 3], 12.0));
        let d = diagonal_from_ks(&KSMatrix::new([1.0, -2.0, 1.0], [0.0; 3]).unwrap(), 0.0);
        assert_eq!(d.w(), [1.0, 0.0, -1.0]);
    }

    #[test]
    fn singular_point_table() {
        assert_eq!(
            vertex(0, true).matrix(),
            mat([[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, 1.0, -1.0]])
        );
        assert_eq!(
            centre(0).matrix(),
            mat([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
        );
        assert_eq!(centre(0), iota(&Vector3::new(1.0, 1.0, 1.0)));
        for m in singular_points() {
            assert_eq!(singular_gradient(&m), 0.0);
        }
    }

    #[test]
    fn embeddings() {
        let n = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(
            iota(&n).matrix(),
            mat([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
        );
        assert_eq!(
            nu(&n).matrix(),
            mat([[-5.0, -2.0, 3.0], [2.0, 8.0, -6.0], [-3.0, 6.0, -3.0]])
        );
        let one = Vector3::new(1.0, 1.0, 1.0);
        assert_eq!(nu(&one), iota(&one));
    }

    #[test]
    fn kernel_map_examples() {
        let cfg = ToleranceConfig::default();
        let k = kernel_map(&nu(&Vector3::new(1.0, 2.0, 3.0)), &cfg).unwrap();
        let expect = [1.0 / 3.0, 2.0 / 3.0, 1.0];
        for i in 0..3 {
            assert!((k.components()[i] - expect[i]).abs() < 1e-15);
        }
        assert_eq!(kernel_map(&centre(0), &cfg).unwrap().components(), [1.0; 3]);
        assert_eq!(kernel_map(&vertex(0, true), &cfg), Err(Error::RankOne));
        let off = KSMatrix::new([1.0, -2.0, 1.0], [0.0; 3]).unwrap();
        assert!(matches!(kernel_map(&off, &cfg), Err(Error::NotOnVariety { .. })));
    }

    #[test]
    fn isokernel_examples() {
        let cfg = ToleranceConfig::default();
        let plane = isokernel_space(&ProjVec3::new([1.0, 1.0, 1.0]).unwrap(), &cfg);
        assert_eq!(plane, vec![vertex(0, true), vertex(1, true), vertex(2, true)]);
        let e1 = ProjVec3::new([1.0, 0.0, 0.0]).unwrap();
        let line = isokernel_space(&e1, &cfg);
        assert_eq!(line.len(), 2);
        for m in line {
            assert_eq!(m.matrix() * e1.vector(), Vector3::zeros());
        }
    }

    #[test]
    fn staeckel_line_of_benenti_point() {
        let cfg = ToleranceConfig::default();
        let m = KSMatrix::new([1.0, -4.0, 3.0], [-10.0, -5.0, -2.0]).unwrap();
        assert_eq!(
            m.matrix(),
            mat([[1.0, 2.0, -5.0], [-2.0, -4.0, 10.0], [5.0, -10.0, 3.0]])
        );
        let line = staeckel_line(&m, &cfg).unwrap();
        assert!(!line.degenerate);
        let k = line.kernel.components();
        assert!((k[1] - 7.0 / 11.0).abs() < 1e-14 && (k[2] - 5.0 / 11.0).abs() < 1e-14);
        // m = a ι + b ν, solved from the Δ and t coordinates
        let (nu_v, io) = (line.second.vector(), line.base.vector());
        let b = m.delta()[0] / nu_v[0];
        let a = (m.t()[0] - b * nu_v[3]) / io[3];
        let rebuilt = line.base.combine(a, &line.second, b);
        for (x, y) in rebuilt.vector().iter().zip(m.vector().iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_line() {
        let cfg = ToleranceConfig::default();
        let m = vertex(0, true)
            .combine(1.0, &vertex(1, true), 2.0)
            .combine(1.0, &vertex(2, true), 5.0);
        let line = staeckel_line(&m, &cfg).unwrap();
        assert!(line.degenerate);
        assert_eq!(line.base, centre(0));
        assert!(line.kernel_residual() < 1e-15);
        assert_eq!(staeckel_line(&centre(0), &cfg), Err(Error::SingularPoint));
    }

    #[test]
    fn octahedral_table() {
        let g = octahedral_group();
        assert_eq!(g.len(), 24);
        for x in &g {
            let m = x.matrix();
            assert_eq!(m.determinant(), 1.0);
            assert_eq!(m.transpose() * m, Matrix3::identity());
        }
        assert_eq!(orbit(&vertex(0, true)).len(), 6);
        assert_eq!(orbit(&centre(0)).len(), 4);
        assert_eq!(stabilizer_size(&centre(0)), 6);
    }

    #[test]
    fn residual_matches_conjugation() {
        let d = DiagonalACT::new([0.3, -1.1, 0.8], [0.5, -0.7, 1.9], 2.0);
        for g in octahedral_group() {
            let (rho, c) = g.residual();
            let lhs = ks_matrix(&crate::decomposition::s4_residual_action(&d, &rho));
            let rhs = s4_act(&ks_matrix(&d), &g);
            for (x, y) in lhs.vector().iter().zip(rhs.vector().iter()) {
                assert!((x - c * y).abs() < 1e-14);
            }
        }
    }
}
