//! Hodge and Ricci decompositions, the SO(3)×SO(3) action, alignment,
//! diagonalisation and the residual S₄ action on diagonal tensors.

use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix6, SymmetricEigen, Vector3, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Identity, Result};
use crate::lambda2::{kulkarni_nomizu, lambda2_of, ricci_contraction, AlgCurvTensor, Sym4};
use crate::ToleranceConfig;

const BLOCK_TOL: f64 = 1e-12;

/// Orthogonal change to the basis (η₊₁, η₊₂, η₊₃, η₋₁, η₋₂, η₋₃).
pub fn eta_basis() -> Matrix6<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = Matrix6::zeros();
    for a in 0..3 {
        p[(a, a)] = r;
        p[(a + 3, a)] = r;
        p[(a, a + 3)] = r;
        p[(a + 3, a + 3)] = -r;
    }
    p
}

/// Block form `[[W₊ + s/12, T±ᵀ], [T±, W₋ + s/12]]` in the η basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodgeBlocks {
    w_plus: Matrix3<f64>,
    w_minus: Matrix3<f64>,
    t: Matrix3<f64>,
    s: f64,
}

impl HodgeBlocks {
    pub fn new(w_plus: Matrix3<f64>, w_minus: Matrix3<f64>, t: Matrix3<f64>, s: f64) -> Result<Self> {
        let scale = w_plus.abs().max().max(w_minus.abs().max()).max(1.0);
        let asym = (w_plus - w_plus.transpose())
            .abs()
            .max()
            .max((w_minus - w_minus.transpose()).abs().max());
        if asym > BLOCK_TOL * scale {
            return Err(Error::SymmetryViolation {
                identity: Identity::PairSymmetry,
                residual: asym,
            });
        }
        let (plus, minus) = (w_plus.trace(), w_minus.trace());
        if plus.abs() > BLOCK_TOL * scale || minus.abs() > BLOCK_TOL * scale {
            return Err(Error::BianchiViolation { plus, minus });
        }
        Ok(HodgeBlocks {
            w_plus: (w_plus + w_plus.transpose()) * 0.5,
            w_minus: (w_minus + w_minus.transpose()) * 0.5,
            t,
            s,
        })
    }

    pub fn w_plus(&self) -> &Matrix3<f64> {
        &self.w_plus
    }

    pub fn w_minus(&self) -> &Matrix3<f64> {
        &self.w_minus
    }

    /// Lower-left block, mapping the self-dual half to the anti-self-dual half.
    pub fn t(&self) -> &Matrix3<f64> {
        &self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    fn eta_matrix(&self) -> Matrix6<f64> {
        let c = self.s / 12.0;
        let mut x = Matrix6::zeros();
        x.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(self.w_plus + Matrix3::identity() * c));
        x.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(self.w_minus + Matrix3::identity() * c));
        x.fixed_view_mut::<3, 3>(3, 0).copy_from(&self.t);
        x.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.t.transpose());
        x
    }

    /// Weyl part as a 6×6 matrix in the η basis.
    pub fn weyl_eta(&self) -> Matrix6<f64> {
        let mut x = Matrix6::zeros();
        x.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.w_plus);
        x.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.w_minus);
        x
    }

    /// Trace-free Ricci part as a 6×6 matrix in the η basis.
    pub fn ricci_eta(&self) -> Matrix6<f64> {
        let mut x = Matrix6::zeros();
        x.fixed_view_mut::<3, 3>(3, 0).copy_from(&self.t);
        x.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.t.transpose());
        x
    }
}

pub fn hodge_blocks(r: &AlgCurvTensor) -> HodgeBlocks {
    let p = eta_basis();
    let x = p.transpose() * r.matrix() * p;
    let s = r.scalar_curvature();
    let c = Matrix3::identity() * (s / 12.0);
    let w_plus = x.fixed_view::<3, 3>(0, 0).into_owned() - c;
    let w_minus = x.fixed_view::<3, 3>(3, 3).into_owned() - c;
    HodgeBlocks {
        w_plus: (w_plus + w_plus.transpose()) * 0.5,
        w_minus: (w_minus + w_minus.transpose()) * 0.5,
        t: x.fixed_view::<3, 3>(3, 0).into_owned(),
        s,
    }
}

pub fn blocks_to_act(b: &HodgeBlocks) -> AlgCurvTensor {
    let p = eta_basis();
    AlgCurvTensor::from_matrix_unchecked(p * b.eta_matrix() * p.transpose())
}

/// Tensor with diagonal blocks `W₊ = diag(w₊)`, `W₋ = diag(w₋)`, `T± = diag(t)`.
pub fn aligned_act(w_plus: [f64; 3], w_minus: [f64; 3], t: [f64; 3], s: f64) -> Result<AlgCurvTensor> {
    let d = |v: [f64; 3]| Matrix3::from_diagonal(&Vector3::from(v));
    Ok(blocks_to_act(&HodgeBlocks::new(d(w_plus), d(w_minus), d(t), s)?))
}

/// Weyl, trace-free Ricci and scalar parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciParts {
    pub weyl: AlgCurvTensor,
    pub ricci: Sym4,
    pub s: f64,
}

impl RicciParts {
    /// `½ T⊼g`.
    pub fn ricci_part(&self) -> AlgCurvTensor {
        0.5 * kulkarni_nomizu(&self.ricci, &Sym4::metric())
    }

    /// `(s/12)·½ g⊼g`.
    pub fn scalar_part(&self) -> AlgCurvTensor {
        (self.s / 12.0) * AlgCurvTensor::metric()
    }
}

pub fn ricci_decompose(r: &AlgCurvTensor) -> RicciParts {
    let s = r.scalar_curvature();
    let ric = ricci_contraction(r.matrix());
    let ricci = Sym4::from_upper(&(ric - Matrix4::identity() * (s / 4.0)));
    let mut parts = RicciParts {
        weyl: AlgCurvTensor::zero(),
        ricci,
        s,
    };
    parts.weyl = *r - parts.ricci_part() - parts.scalar_part();
    parts
}

/// Diagonal tensor with parameters `(w, t, s)`; `Σw = 0` is enforced by projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawDiagonal")]
pub struct DiagonalACT {
    w: [f64; 3],
    t: [f64; 3],
    s: f64,
}

#[derive(Deserialize)]
struct RawDiagonal {
    w: [f64; 3],
    t: [f64; 3],
    s: f64,
}

impl From<RawDiagonal> for DiagonalACT {
    fn from(r: RawDiagonal) -> Self {
        DiagonalACT::new(r.w, r.t, r.s)
    }
}

impl DiagonalACT {
    pub fn new(w: [f64; 3], t: [f64; 3], s: f64) -> Self {
        let mean = (w[0] + w[1] + w[2]) / 3.0;
        DiagonalACT {
            w: [w[0] - mean, w[1] - mean, w[2] - mean],
            t,
            s,
        }
    }

    pub fn metric() -> Self {
        DiagonalACT::new([0.0; 3], [0.0; 3], 12.0)
    }

    pub fn w(&self) -> [f64; 3] {
        self.w
    }

    pub fn t(&self) -> [f64; 3] {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// The six diagonal entries `R_ijij` in basis order.
    pub fn entries(&self) -> [f64; 6] {
        let c = self.s / 12.0;
        let (w, t) = (self.w, self.t);
        [
            w[0] + t[0] + c,
            w[1] + t[1] + c,
            w[2] + t[2] + c,
            w[0] - t[0] + c,
            w[1] - t[1] + c,
            w[2] - t[2] + c,
        ]
    }

    pub fn to_act(&self) -> AlgCurvTensor {
        let e = self.entries();
        AlgCurvTensor::from_matrix_unchecked(Matrix6::from_diagonal(&e.into()))
    }

    /// Reads `(w, t, s)` from the diagonal of `r`, ignoring off-diagonal entries.
    pub fn from_act_diagonal(r: &AlgCurvTensor) -> Self {
        let m = r.matrix();
        let s = r.scalar_curvature();
        let mut w = [0.0; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let (p, q) = (m[(a, a)], m[(a + 3, a + 3)]);
            t[a] = (p - q) / 2.0;
            w[a] = (p + q) / 2.0 - s / 12.0;
        }
        DiagonalACT::new(w, t, s)
    }

    /// `Some` when `r` is diagonal to relative tolerance `tol`.
    pub fn try_from_act(r: &AlgCurvTensor, tol: f64) -> Option<Self> {
        r.is_diagonal(tol).then(|| DiagonalACT::from_act_diagonal(r))
    }

    /// Operator norm of the trace-free part, `max |w_α ± t_α|`.
    pub fn tracefree_norm(&self) -> f64 {
        (0..3).fold(0.0_f64, |acc, a| {
            acc.max((self.w[a] + self.t[a]).abs())
                .max((self.w[a] - self.t[a]).abs())
        })
    }
}

/// `(U₊, U₋) ∈ SO(3)×SO(3)`, the image of an element of SO(4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPair {
    plus: Matrix3<f64>,
    minus: Matrix3<f64>,
}

fn check_rotation(u: &Matrix3<f64>) -> Result<()> {
    let residual = (u.transpose() * u - Matrix3::identity()).abs().max();
    let det = u.determinant();
    if residual > BLOCK_TOL || (det - 1.0).abs() > BLOCK_TOL {
        return Err(Error::InvalidInput(format!(
            "not a rotation (orthogonality residual {residual:e}, det {det})"
        )));
    }
    Ok(())
}

impl RotationPair {
    pub fn new(plus: Matrix3<f64>, minus: Matrix3<f64>) -> Result<Self> {
        check_rotation(&plus)?;
        check_rotation(&minus)?;
        Ok(RotationPair { plus, minus })
    }

    pub fn identity() -> Self {
        RotationPair {
            plus: Matrix3::identity(),
            minus: Matrix3::identity(),
        }
    }

    /// Pair induced by `u ∈ SO(4)` acting by pullback, `R'(a,b,c,d) = R(ua,ub,uc,ud)`.
    pub fn from_so4(u: &Matrix4<f64>) -> Result<Self> {
        let residual = (u.transpose() * u - Matrix4::identity()).abs().max();
        if residual > BLOCK_TOL || (u.determinant() - 1.0).abs() > BLOCK_TOL {
            return Err(Error::InvalidInput("not an element of SO(4)".into()));
        }
        let p = eta_basis();
        let x = p.transpose() * lambda2_of(u) * p;
        RotationPair::new(
            x.fixed_view::<3, 3>(0, 0).into_owned(),
            x.fixed_view::<3, 3>(3, 3).into_owned(),
        )
    }

    pub fn plus(&self) -> &Matrix3<f64> {
        &self.plus
    }

    pub fn minus(&self) -> &Matrix3<f64> {
        &self.minus
    }
}

pub fn so_action(r: &AlgCurvTensor, u: &RotationPair) -> AlgCurvTensor {
    let p = eta_basis();
    let mut d = Matrix6::zeros();
    d.fixed_view_mut::<3, 3>(0, 0).copy_from(&u.plus);
    d.fixed_view_mut::<3, 3>(3, 3).copy_from(&u.minus);
    let x = p.transpose() * r.matrix() * p;
    AlgCurvTensor::from_matrix_unchecked(p * d.transpose() * x * d * p.transpose())
}

/// Reflection in the e₀ hyperplane: swaps `W₊ ↔ W₋` and transposes `T±`.
pub fn orientation_reverse(r: &AlgCurvTensor) -> AlgCurvTensor {
    let d = Matrix6::from_diagonal(&[-1.0, -1.0, -1.0, 1.0, 1.0, 1.0].into());
    AlgCurvTensor::from_matrix_unchecked(d * r.matrix() * d)
}

/// Max-abs entry of `T±W₊ − W₋T±` (unnormalized).
pub fn alignment_residual(r: &AlgCurvTensor) -> f64 {
    let b = hodge_blocks(r);
    (b.t * b.w_plus - b.w_minus * b.t).abs().max()
}

fn within(value: f64, tol: f64, scale: Option<f64>, degree: i32) -> bool {
    scale.is_none_or(|s| value.abs() <= tol * s.powi(degree))
}

pub fn is_aligned(r: &AlgCurvTensor, cfg: &ToleranceConfig) -> bool {
    within(alignment_residual(r), cfg.eq, r.residual_scale(), 2)
}

/// `tr W₊ᵏ − tr W₋ᵏ` for k = 2, 3.
pub fn chirality_traces(b: &HodgeBlocks) -> [f64; 2] {
    let (p, m) = (b.w_plus, b.w_minus);
    [
        (p * p).trace() - (m * m).trace(),
        (p * p * p).trace() - (m * m * m).trace(),
    ]
}

pub fn is_diagonalisable(r: &AlgCurvTensor, cfg: &ToleranceConfig) -> bool {
    let scale = r.residual_scale();
    let [d2, d3] = chirality_traces(&hodge_blocks(r));
    is_aligned(r, cfg) && within(d2, cfg.eq, scale, 2) && within(d3, cfg.eq, scale, 3)
}

fn sorted_eigen(m: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let e = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = Vector3::from_fn(|i, _| e.eigenvalues[idx[i]]);
    let vecs = Matrix3::from_fn(|r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Rotates `r` to a diagonal tensor. Eigenvectors of `W₊` and `W₋` are
/// matched in ascending order; inside each group of equal eigenvalues the
/// restriction of `T±` is brought to diagonal form by its SVD.
pub fn diagonalise(r: &AlgCurvTensor, cfg: &ToleranceConfig) -> Result<(DiagonalACT, RotationPair)> {
    if !is_diagonalisable(r, cfg) {
        let scale = r.tracefree_norm();
        let [d2, d3] = chirality_traces(&hodge_blocks(r));
        let residual = (alignment_residual(r) / scale.powi(2))
            .max(d2.abs() / scale.powi(2))
            .max(d3.abs() / scale.powi(3));
        return Err(Error::NotDiagonalisable { residual });
    }
    let b = hodge_blocks(r);
    let (lp, mut vp) = sorted_eigen(&b.w_plus);
    let (lm, mut vm) = sorted_eigen(&b.w_minus);
    let lam = (lp + lm) * 0.5;
    let radius = lam.abs().max();
    let gap = cfg.grouping * radius;

    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && lam[end] - lam[end - 1] <= gap {
            end += 1;
        }
        let n = end - start;
        let vp_g = DMatrix::from_fn(3, n, |i, j| vp[(i, start + j)]);
        let vm_g = DMatrix::from_fn(3, n, |i, j| vm[(i, start + j)]);
        let tg = vm_g.transpose() * DMatrix::from_fn(3, 3, |i, j| b.t[(i, j)]) * &vp_g;
        let svd = SVD::new(tg, true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let new_p = &vp_g * v_t.transpose();
        let new_m = &vm_g * u;
        for j in 0..n {
            for i in 0..3 {
                vp[(i, start + j)] = new_p[(i, j)];
                vm[(i, start + j)] = new_m[(i, j)];
            }
        }
        start = end;
    }

    let (dp, dm) = (vp.determinant() < 0.0, vm.determinant() < 0.0);
    if dp {
        vp.column_mut(0).neg_mut();
    }
    if dm {
        vm.column_mut(0).neg_mut();
    }

    let pair = RotationPair::new(vp, vm)?;
    let rotated = so_action(r, &pair);
    Ok((DiagonalACT::from_act_diagonal(&rotated), pair))
}

/// Element of the residual S₄: a permutation of the three indices together
/// with an even pattern of sign flips on `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualS4 {
    pub perm: [usize; 3],
    pub flips: [f64; 3],
}

pub const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];

const EVEN_FLIPS: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]];

impl ResidualS4 {
    pub fn identity() -> Self {
        ResidualS4 {
            perm: [0, 1, 2],
            flips: [1.0; 3],
        }
    }

    pub fn all() -> Vec<ResidualS4> {
        PERMUTATIONS
            .iter()
            .flat_map(|&perm| EVEN_FLIPS.iter().map(move |&flips| ResidualS4 { perm, flips }))
            .collect()
    }
}

/// `w'_i = w_{π(i)}`, `t'_i = ε_i t_{π(i)}`.
pub fn s4_residual_action(d: &DiagonalACT, g: &ResidualS4) -> DiagonalACT {
    let (w, t) = (d.w, d.t);
    DiagonalACT {
        w: [w[g.perm[0]], w[g.perm[1]], w[g.perm[2]]],
        t: [
            g.flips[0] * t[g.perm[0]],
            g.flips[1] * t[g.perm[1]],
            g.flips[2] * t[g.perm[2]],
        ],
        s: d.s,
    }
}
