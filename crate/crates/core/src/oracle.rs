//! Numerical checks on the embedded sphere: Killing tensor fields, the
//! Killing equation, conservation along great circles, pointwise
//! commutators and the Nijenhuis conditions.
//!
//! Everything here works on the rank-4 component array, never on the 6×6
//! matrix, so it shares no code path with the algebraic tests.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambda2::{AlgCurvTensor, Components, Vec4};

const FRAME_TOL: f64 = 1e-12;

/// A point of S³ with an orthonormal basis of its tangent space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    x: Vec4,
    e: [Vec4; 3],
}

impl TangentFrame {
    pub fn new(x: Vec4, e: [Vec4; 3]) -> Result<Self> {
        let all = [x, e[0], e[1], e[2]];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                if (all[i].dot(&all[j]) - want).abs() > FRAME_TOL {
                    return Err(Error::InvalidInput("frame is not orthonormal".into()));
                }
            }
        }
        Ok(TangentFrame { x, e })
    }

    /// Gram–Schmidt on `(x, a, b, c)`.
    pub fn from_vectors(x: Vec4, seeds: [Vec4; 3]) -> Result<Self> {
        let mut basis: Vec<Vec4> = Vec::with_capacity(4);
        for v in [x, seeds[0], seeds[1], seeds[2]] {
            let mut u = v;
            for _ in 0..2 {
                for b in &basis {
                    u -= b * b.dot(&u);
                }
            }
            let n = u.norm();
            if n < 1e-8 * v.norm().max(1.0) {
                return Err(Error::InvalidInput("frame seeds are linearly dependent".into()));
            }
            basis.push(u / n);
        }
        TangentFrame::new(basis[0], [basis[1], basis[2], basis[3]])
    }

    pub fn point(&self) -> &Vec4 {
        &self.x
    }

    pub fn basis(&self) -> &[Vec4; 3] {
        &self.e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionResidual {
    pub killing_eq: f64,
    pub tns: [f64; 3],
}

fn tangent(x: &Vec4, v: &Vec4) -> Vec4 {
    let xx = x.dot(x);
    v - x * (x.dot(v) / xx)
}

/// `Σ c_abcd y^a v^b y^c w^d` for an arbitrary rank-4 array.
pub fn contract(c: &Components, y: &Vec4, v: &Vec4, w: &Vec4) -> f64 {
    let mut acc = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let ab = y[a] * v[b];
            if ab == 0.0 {
                continue;
            }
            for cc in 0..4 {
                for d in 0..4 {
                    acc += c[a][b][cc][d] * ab * y[cc] * w[d];
                }
            }
        }
    }
    acc
}

/// `K_x(v,w) = R(x,v,x,w)` with `v`, `w` first projected to `T_xS³`.
pub fn killing_eval(r: &AlgCurvTensor, x: &Vec4, v: &Vec4, w: &Vec4) -> f64 {
    contract(&r.components(), x, &tangent(x, v), &tangent(x, w))
}

fn endomorphism_of(c: &Components, frame: &TangentFrame) -> Matrix3<f64> {
    let e = &frame.e;
    Matrix3::from_fn(|i, j| contract(c, &frame.x, &e[i], &e[j]))
}

/// Matrix of `K_x` in the frame.
pub fn killing_endomorphism(r: &AlgCurvTensor, frame: &TangentFrame) -> Matrix3<f64> {
    endomorphism_of(&r.components(), frame)
}

/// Largest change of `K(γ̇,γ̇)` along the great circle through `x` with unit
/// velocity `v`, sampled at `n` equally spaced times.
pub fn geodesic_conservation_components(c: &Components, x: &Vec4, v: &Vec4, n: usize) -> f64 {
    let v = tangent(x, v).normalize();
    let k0 = contract(c, x, &v, &v);
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let (s, co) = t.sin_cos();
            let g = x * co + v * s;
            let dg = v * co - x * s;
            (contract(c, &g, &dg, &dg) - k0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn geodesic_conservation(r: &AlgCurvTensor, x: &Vec4, v: &Vec4, n: usize) -> f64 {
    geodesic_conservation_components(&r.components(), x, v, n)
}

/// Frobenius norm of `[K₁, K₂]` at the frame point.
pub fn numeric_commutator(r1: &AlgCurvTensor, r2: &AlgCurvTensor, frame: &TangentFrame) -> f64 {
    let (a, b) = (killing_endomorphism(r1, frame), killing_endomorphism(r2, frame));
    (a * b - b * a).norm()
}

/// `(∇_{e_a} K)(e_b, e_c)` from central differences of the degree-two
/// ambient extension along `e_a`, Richardson-extrapolated over `h` and `h/2`.
/// No correction term is needed since `K̃_x(x, ·) = 0`.
pub fn covariant_derivative(c: &Components, frame: &TangentFrame, step: f64) -> [[[f64; 3]; 3]; 3] {
    let e = &frame.e;
    let x = frame.x;
    let diff = |u: &Vec4, v: &Vec4, w: &Vec4, h: f64| {
        (contract(c, &(x + u * h), v, w) - contract(c, &(x - u * h), v, w)) / (2.0 * h)
    };
    let mut out = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                let coarse = diff(&e[a], &e[b], &e[cc], step);
                let fine = diff(&e[a], &e[b], &e[cc], step / 2.0);
                out[a][b][cc] = (4.0 * fine - coarse) / 3.0;
            }
        }
    }
    out
}

/// `N_{αβγ} = K_αδ(∇_γK_δβ − ∇_βK_δγ) + ∇_δK_αγ K_δβ − ∇_δK_αβ K_δγ`.
fn nijenhuis(k: &Matrix3<f64>, dk: &[[[f64; 3]; 3]; 3]) -> [[[f64; 3]; 3]; 3] {
    let mut n = [[[0.0; 3]; 3]; 3];
    for al in 0..3 {
        for be in 0..3 {
            for ga in 0..3 {
                let mut acc = 0.0;
                for de in 0..3 {
                    acc += k[(al, de)] * (dk[ga][de][be] - dk[be][de][ga]);
                    acc += dk[de][al][ga] * k[(de, be)] - dk[de][al][be] * k[(de, ga)];
                }
                n[al][be][ga] = acc;
            }
        }
    }
    n
}

const S3: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([1, 0, 2], -1.0),
    ([0, 2, 1], -1.0),
    ([2, 1, 0], -1.0),
];

/// Killing-equation residual and the three Nijenhuis conditions
/// `N^i_[jk (Kᵖ)_l]i` for p = 0, 1, 2, relative to powers of the operator
/// norm of `R`.
pub fn nijenhuis_components(c: &Components, frame: &TangentFrame, step: f64, scale: f64) -> TorsionResidual {
    if scale == 0.0 {
        return TorsionResidual {
            killing_eq: 0.0,
            tns: [0.0; 3],
        };
    }
    let k = endomorphism_of(c, frame);
    let dk = covariant_derivative(c, frame, step);
    let mut killing: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                let s = dk[a][b][cc] + dk[b][cc][a] + dk[cc][a][b];
                killing = killing.max(s.abs());
            }
        }
    }
    let n = nijenhuis(&k, &dk);
    let powers = [Matrix3::identity(), k, k * k];
    let mut tns = [0.0; 3];
    for (p, kp) in powers.iter().enumerate() {
        let mut acc = 0.0;
        for (perm, sign) in &S3 {
            let [j, l, m] = *perm;
            for i in 0..3 {
                acc += sign * n[i][j][l] * kp[(m, i)];
            }
        }
        tns[p] = acc.abs() / scale.powi(p as i32 + 2);
    }
    TorsionResidual {
        killing_eq: killing / scale,
        tns,
    }
}

pub fn nijenhuis_residual(r: &AlgCurvTensor, frame: &TangentFrame, step: f64) -> TorsionResidual {
    nijenhuis_components(&r.components(), frame, step, r.norm())
}

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Below this every condition counts as satisfied.
pub const TNS_FLOOR: f64 = 1e-6;
/// Required separation of a violated condition above the floor.
pub const TNS_SEPARATION: f64 = 10.0;

/// Oracle verdict over several frames: integrable when every condition stays
/// under the floor, not integrable when one exceeds the separated threshold,
/// undecided in between.
pub fn tns_verdict(residuals: &[TorsionResidual]) -> Option<bool> {
    let worst = residuals.iter().flat_map(|r| r.tns).fold(0.0_f64, f64::max);
    if worst < TNS_FLOOR {
        Some(true)
    } else if worst > TNS_SEPARATION * TNS_FLOOR {
        Some(false)
    } else {
        None
    }
}
