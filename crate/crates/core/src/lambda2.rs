//! Λ²ℝ⁴ with the fixed basis (01,02,03,23,31,12), the Hodge star, storage of
//! algebraic curvature tensors, the Kulkarni–Nomizu product, adjugates and
//! the Ricci contraction.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Matrix6, SymmetricEigen, Vector4, Vector6};

use crate::error::{Error, Identity, Result};

pub type Vec4 = Vector4<f64>;
pub type Bivector = Vector6<f64>;
/// Arbitrary endomorphism of Λ²ℝ⁴ in the basis [`BASIS`].
pub type End6 = Matrix6<f64>;
/// Rank-4 component array `R[a][b][c][d]`.
pub type Components = [[[[f64; 4]; 4]; 4]; 4];

/// Index pairs of the basis bivectors, in wire order.
pub const BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];
pub const BASIS_LABEL: &str = "01,02,03,23,31,12";

const SYMMETRY_TOL: f64 = 1e-12;
/// Trace-free parts below this fraction of the full norm count as rounding noise.
const METRIC_FLOOR: f64 = 1e-12;

/// Basis position of `e_i∧e_j` and the sign relating it to the stored pair.
pub fn pair_index(i: usize, j: usize) -> Option<(usize, f64)> {
    BASIS.iter().enumerate().find_map(|(k, &(a, b))| {
        if (a, b) == (i, j) {
            Some((k, 1.0))
        } else if (a, b) == (j, i) {
            Some((k, -1.0))
        } else {
            None
        }
    })
}

/// Hodge star: swaps each bivector with its complement.
pub fn star() -> End6 {
    let mut s = End6::zeros();
    for a in 0..3 {
        s[(a, a + 3)] = 1.0;
        s[(a + 3, a)] = 1.0;
    }
    s
}

pub fn wedge(x: &Vec4, v: &Vec4) -> Bivector {
    Bivector::from_fn(|k, _| {
        let (i, j) = BASIS[k];
        x[i] * v[j] - x[j] * v[i]
    })
}

/// Induced action of a 4×4 matrix on bivectors: column `(kl)` is `Ue_k ∧ Ue_l`.
pub fn lambda2_of(u: &Matrix4<f64>) -> End6 {
    let mut m = End6::zeros();
    for (q, &(k, l)) in BASIS.iter().enumerate() {
        let col = wedge(&u.column(k).into_owned(), &u.column(l).into_owned());
        m.set_column(q, &col);
    }
    m
}

fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Symmetric 4×4 tensor. Symmetry holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym4(Matrix4<f64>);

impl Sym4 {
    /// Mirrors the upper triangle of `m`.
    pub fn from_upper(m: &Matrix4<f64>) -> Self {
        let mut s = *m;
        for i in 0..4 {
            for j in 0..i {
                s[(i, j)] = m[(j, i)];
            }
        }
        Sym4(s)
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        let residual = max_abs(&(m - m.transpose()));
        if residual > SYMMETRY_TOL * max_abs(m).max(1.0) {
            return Err(Error::SymmetryViolation {
                identity: Identity::PairSymmetry,
                residual,
            });
        }
        Ok(Sym4::from_upper(m))
    }

    pub fn diag(d: [f64; 4]) -> Self {
        Sym4(Matrix4::from_diagonal(&Vec4::from(d)))
    }

    pub fn metric() -> Self {
        Sym4(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eval(&self, v: &Vec4, w: &Vec4) -> f64 {
        v.dot(&(self.0 * w))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut e: Vec<f64> = SymmetricEigen::new(self.0).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        [e[0], e[1], e[2], e[3]]
    }
}

impl Add for Sym4 {
    type Output = Sym4;
    fn add(self, o: Sym4) -> Sym4 {
        Sym4(self.0 + o.0)
    }
}

impl Sub for Sym4 {
    type Output = Sym4;
    fn sub(self, o: Sym4) -> Sym4 {
        Sym4(self.0 - o.0)
    }
}

impl Mul<Sym4> for f64 {
    type Output = Sym4;
    fn mul(self, s: Sym4) -> Sym4 {
        Sym4(s.0 * self)
    }
}

/// Algebraic curvature tensor stored as the symmetric 6×6 matrix
/// `M[(ij),(kl)] = R_ijkl` with `tr(★M) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgCurvTensor(Matrix6<f64>);

impl AlgCurvTensor {
    pub fn from_matrix(m: Matrix6<f64>) -> Result<Self> {
        let scale = max_abs(&m).max(1.0);
        let residual = max_abs(&(m - m.transpose()));
        if residual > SYMMETRY_TOL * scale {
            return Err(Error::SymmetryViolation {
                identity: Identity::PairSymmetry,
                residual,
            });
        }
        let residual = bianchi_sum(&m).abs();
        if residual > SYMMETRY_TOL * scale {
            return Err(Error::SymmetryViolation {
                identity: Identity::Bianchi,
                residual,
            });
        }
        Ok(AlgCurvTensor::from_matrix_unchecked(m))
    }

    /// Symmetrizes without validating; for internal constructions that are
    /// valid in exact arithmetic.
    pub(crate) fn from_matrix_unchecked(m: Matrix6<f64>) -> Self {
        AlgCurvTensor((m + m.transpose()) * 0.5)
    }

    /// Builds the 6×6 form from a rank-4 array, checking antisymmetry, pair
    /// symmetry and the Bianchi identity to 1e-12.
    pub fn from_components(r: &Components) -> Result<Self> {
        let mut anti = 0.0_f64;
        let mut pair = 0.0_f64;
        let mut bianchi = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let x = r[a][b][c][d];
                        anti = anti.max((x + r[b][a][c][d]).abs()).max((x + r[a][b][d][c]).abs());
                        pair = pair.max((x - r[c][d][a][b]).abs());
                        bianchi = bianchi.max((x + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        for (identity, residual) in [
            (Identity::Antisymmetry, anti),
            (Identity::PairSymmetry, pair),
            (Identity::Bianchi, bianchi),
        ] {
            if residual > SYMMETRY_TOL {
                return Err(Error::SymmetryViolation { identity, residual });
            }
        }
        let m = Matrix6::from_fn(|p, q| {
            let (a, b) = BASIS[p];
            let (c, d) = BASIS[q];
            r[a][b][c][d]
        });
        Ok(AlgCurvTensor::from_matrix_unchecked(m))
    }

    /// ½ g⊼g, the curvature tensor of the round metric (the 6×6 identity).
    pub fn metric() -> Self {
        AlgCurvTensor(Matrix6::identity())
    }

    pub fn zero() -> Self {
        AlgCurvTensor(Matrix6::zeros())
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match (pair_index(a, b), pair_index(c, d)) {
            (Some((p, s1)), Some((q, s2))) => s1 * s2 * self.0[(p, q)],
            _ => 0.0,
        }
    }

    pub fn components(&self) -> Components {
        end6_components(&self.0)
    }

    pub fn scalar_curvature(&self) -> f64 {
        2.0 * self.0.trace()
    }

    /// Operator norm of the 6×6 matrix.
    pub fn norm(&self) -> f64 {
        spectral_radius(&self.0)
    }

    /// `R` minus its scalar part `(s/12)·I`.
    pub fn tracefree_matrix(&self) -> Matrix6<f64> {
        self.0 - Matrix6::identity() * (self.0.trace() / 6.0)
    }

    /// Operator norm of the trace-free part. All residuals are normalized by
    /// this so that adding multiples of the metric never changes a verdict.
    pub fn tracefree_norm(&self) -> f64 {
        spectral_radius(&self.tracefree_matrix())
    }

    /// Scale for normalizing residuals; `None` when `R` is a multiple of the
    /// metric up to rounding, in which case every residual is zero.
    pub fn residual_scale(&self) -> Option<f64> {
        let tf = self.tracefree_norm();
        (tf > METRIC_FLOOR * self.norm()).then_some(tf)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let scale = max_abs(&self.0).max(f64::MIN_POSITIVE);
        (0..6).all(|i| (0..6).all(|j| i == j || self.0[(i, j)].abs() <= tol * scale))
    }
}

impl Add for AlgCurvTensor {
    type Output = AlgCurvTensor;
    fn add(self, o: AlgCurvTensor) -> AlgCurvTensor {
        AlgCurvTensor(self.0 + o.0)
    }
}

impl Sub for AlgCurvTensor {
    type Output = AlgCurvTensor;
    fn sub(self, o: AlgCurvTensor) -> AlgCurvTensor {
        AlgCurvTensor(self.0 - o.0)
    }
}

impl Neg for AlgCurvTensor {
    type Output = AlgCurvTensor;
    fn neg(self) -> AlgCurvTensor {
        AlgCurvTensor(-self.0)
    }
}

impl Mul<AlgCurvTensor> for f64 {
    type Output = AlgCurvTensor;
    fn mul(self, r: AlgCurvTensor) -> AlgCurvTensor {
        AlgCurvTensor(r.0 * self)
    }
}

/// `R0123 + R0231 + R0312`, half of `tr(★M)`.
pub fn bianchi_sum(m: &Matrix6<f64>) -> f64 {
    m[(0, 3)] + m[(1, 4)] + m[(2, 5)]
}

pub(crate) fn spectral_radius(m: &Matrix6<f64>) -> f64 {
    SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Expands any 6×6 matrix to the rank-4 array with bivector antisymmetry.
pub fn end6_components(m: &End6) -> Components {
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for (p, &(a, b)) in BASIS.iter().enumerate() {
        for (q, &(c, d)) in BASIS.iter().enumerate() {
            let x = m[(p, q)];
            r[a][b][c][d] = x;
            r[b][a][c][d] = -x;
            r[a][b][d][c] = -x;
            r[b][a][d][c] = x;
        }
    }
    r
}

/// ★R★: keeps the Weyl and scalar parts, flips the trace-free Ricci part.
pub fn hodge_conjugate(r: &AlgCurvTensor) -> AlgCurvTensor {
    let s = star();
    AlgCurvTensor::from_matrix_unchecked(s * r.0 * s)
}

/// `(h⊼k)_abcd = h_ac k_bd − h_ad k_bc − h_bc k_ad + h_bd k_ac`.
pub fn kulkarni_nomizu(h: &Sym4, k: &Sym4) -> AlgCurvTensor {
    let (h, k) = (&h.0, &k.0);
    let m = Matrix6::from_fn(|p, q| {
        let (a, b) = BASIS[p];
        let (c, d) = BASIS[q];
        h[(a, c)] * k[(b, d)] - h[(a, d)] * k[(b, c)] - h[(b, c)] * k[(a, d)] + h[(b, d)] * k[(a, c)]
    });
    AlgCurvTensor::from_matrix_unchecked(m)
}

pub fn adjugate3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let a = |i: usize, j: usize| m[(i, j)];
    Matrix3::new(
        a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1),
        a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2),
        a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1),
        a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2),
        a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0),
        a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2),
        a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0),
        a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1),
        a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
    )
}

pub fn adjugate4_matrix(m: &Matrix4<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        // adj[i][j] = (-1)^{i+j} · minor(j, i)
        let rows: Vec<usize> = (0..4).filter(|&r| r != j).collect();
        let cols: Vec<usize> = (0..4).filter(|&c| c != i).collect();
        let minor = Matrix3::from_fn(|r, c| m[(rows[r], cols[c])]);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

pub fn adjugate4(h: &Sym4) -> Sym4 {
    Sym4::from_upper(&adjugate4_matrix(&h.0))
}

/// `r(E)_ik = Σ_j E_ijkj`. Symmetric whenever `E` is.
pub fn ricci_contraction(e: &End6) -> Matrix4<f64> {
    let c = end6_components(e);
    Matrix4::from_fn(|i, k| (0..4).map(|j| c[i][j][k][j]).sum())
}
