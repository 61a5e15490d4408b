//! Three independent integrability tests: the algebraic integrability
//! conditions evaluated by brute force, isometry invariants of the Weyl and
//! Ricci parts, and the determinant of the KS-matrix of a diagonal form.

use nalgebra::{DMatrix, Matrix6};
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    chirality_traces, diagonalise, hodge_blocks, is_diagonalisable, ricci_decompose, DiagonalACT,
};
use crate::ksvariety::ks_matrix;
use crate::lambda2::{ricci_contraction, star, AlgCurvTensor};
use crate::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
    Invariants,
    DiagonalDet,
}

/// `c1 = tr[𝐖,𝐓]²`, `c2 = tr ★𝐖²`, `c3 = tr ★𝐖³` divided by the matching
/// power of the trace-free norm; `c4` is the smallest singular value of the
/// column-normalized system `(I, 𝐖, 𝐖² − 𝐓²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Invariants {
    pub fn max_abs(&self) -> f64 {
        self.c1.abs().max(self.c2.abs()).max(self.c3.abs()).max(self.c4.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub verdict: bool,
    pub aic1_residual: f64,
    pub aic2_residual: f64,
    pub invariant_values: Invariants,
    /// `|det KS| / scale³` of the diagonal form; `None` when not diagonalisable.
    pub det_residual: Option<f64>,
    pub method: Method,
}

/// Relative AIC-I residual: `max|Ric(M★M)| + |tr W₊² − tr W₋²|` over `scale²`.
pub fn aic1_residual(r: &AlgCurvTensor) -> f64 {
    let Some(scale) = r.residual_scale() else {
        return 0.0;
    };
    let m = r.matrix();
    let contraction = ricci_contraction(&(m * star() * m));
    let [d2, _] = chirality_traces(&hodge_blocks(r));
    (contraction.abs().max() + d2.abs()) / scale.powi(2)
}

const S4: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

fn sign4(p: &[usize; 4]) -> f64 {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized AIC-II tensor reduced to its four symmetrized slots.
///
/// The antisymmetrized slots `(a₂,b₂,c₂,d₂)` span a one-dimensional space in
/// dimension four, so the full tensor is `ε_{a₂b₂c₂d₂}` times the returned
/// array, and both have the same max-abs entry.
pub fn aic2_tensor(r: &AlgCurvTensor) -> [[[[f64; 4]; 4]; 4]; 4] {
    let c = r.components();
    let mut y = [[[[0.0; 4]; 4]; 4]; 4];
    for a1 in 0..4 {
        for b1 in 0..4 {
            for c1 in 0..4 {
                for d1 in 0..4 {
                    let mut acc = 0.0;
                    for p in &S4 {
                        let sg = sign4(p);
                        let mut inner = 0.0;
                        for i in 0..4 {
                            let left = c[i][b1][p[0]][p[1]];
                            if left == 0.0 {
                                continue;
                            }
                            for k in 0..4 {
                                inner += left * c[i][a1][k][c1] * c[k][d1][p[2]][p[3]];
                            }
                        }
                        acc += sg * inner;
                    }
                    y[a1][b1][c1][d1] = acc;
                }
            }
        }
    }
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, cc, d];
                    out[a][b][cc][d] = S4.iter().map(|p| y[idx[p[0]]][idx[p[1]]][idx[p[2]]][idx[p[3]]]).sum();
                }
            }
        }
    }
    out
}

/// Relative AIC-II residual: max-abs entry of [`aic2_tensor`] over `scale³`.
pub fn aic2_residual(r: &AlgCurvTensor) -> f64 {
    let Some(scale) = r.residual_scale() else {
        return 0.0;
    };
    let t = aic2_tensor(r);
    let m = t
        .iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0_f64, |a, x| a.max(x.abs()));
    m / scale.powi(3)
}

pub fn invariants(r: &AlgCurvTensor) -> Invariants {
    let Some(scale) = r.residual_scale() else {
        return Invariants {
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
        };
    };
    let parts = ricci_decompose(r);
    let w = *parts.weyl.matrix();
    let t = *parts.ricci_part().matrix();
    let comm = w * t - t * w;
    let st = star();
    let w2 = w * w;
    let c1 = (comm * comm).trace() / scale.powi(4);
    let c2 = (st * w2).trace() / scale.powi(2);
    let c3 = (st * w2 * w).trace() / scale.powi(3);

    let cols = [(Matrix6::identity(), 0), (w, 1), (w2 - t * t, 2)];
    let mut sys = DMatrix::zeros(36, 3);
    let mut degenerate = false;
    for (j, (m, degree)) in cols.iter().enumerate() {
        let norm = m.norm();
        if norm <= 1e-12 * scale.powi(*degree) {
            degenerate = true;
            break;
        }
        for (i, x) in m.iter().enumerate() {
            sys[(i, j)] = x / norm;
        }
    }
    let c4 = if degenerate { 0.0 } else { sys.singular_values().min() };
    Invariants { c1, c2, c3, c4 }
}

/// `|det KS(d)| / scale³` with the trace-free norm of `d` as scale.
pub fn diagonal_det_residual(d: &DiagonalACT) -> f64 {
    let scale = d.tracefree_norm();
    if scale == 0.0 {
        return 0.0;
    }
    ks_matrix(d).det().abs() / scale.powi(3)
}

pub fn diagonal_is_integrable(d: &DiagonalACT, tol: f64) -> bool {
    diagonal_det_residual(d) < tol
}

fn default_method(r: &AlgCurvTensor, cfg: &ToleranceConfig) -> Method {
    if is_diagonalisable(r, cfg) {
        Method::DiagonalDet
    } else {
        Method::Invariants
    }
}

/// Computes every residual and decides with `method`, or with the
/// determinant test when `r` is diagonalisable and the invariants otherwise.
///
/// The AIC residuals are taken on the trace-free representative
/// `r − (s/12)·I`. The verdict is the same for every multiple of the metric
/// added, and a large scalar part would otherwise swamp AIC-II in rounding.
pub fn is_integrable(r: &AlgCurvTensor, cfg: &ToleranceConfig, method: Option<Method>) -> IntegrabilityReport {
    let method = method.unwrap_or_else(|| default_method(r, cfg));
    let r0 = *r - (r.matrix().trace() / 6.0) * AlgCurvTensor::metric();
    let aic1 = aic1_residual(&r0);
    let aic2 = aic2_residual(&r0);
    let inv = invariants(r);
    let det_residual = diagonalise(r, cfg).ok().map(|(d, _)| diagonal_det_residual(&d));
    let verdict = match method {
        Method::BruteForce => aic1 < cfg.eq && aic2 < cfg.eq,
        Method::Invariants => inv.max_abs() < cfg.eq,
        Method::DiagonalDet => det_residual.is_some_and(|x| x < cfg.eq),
    };
    IntegrabilityReport {
        verdict,
        aic1_residual: aic1,
        aic2_residual: aic2,
        invariant_values: inv,
        det_residual,
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::aligned_act;

    fn diag(w: [f64; 3], t: [f64; 3], s: f64) -> AlgCurvTensor {
        DiagonalACT::new(w, t, s).to_act()
    }

    #[test]
    fn aic1_examples() {
        assert_eq!(aic1_residual(&AlgCurvTensor::metric()), 0.0);
        assert!(aic1_residual(&diag([1.0, 0.0, -1.0], [0.3, 2.0, -1.0], 4.0)) < 1e-14);
        let r = aligned_act([1.0, 0.0, -1.0], [2.0, -1.0, -1.0], [0.0; 3], 0.0).unwrap();
        assert!(aic1_residual(&r) > 0.1);
    }

    #[test]
    fn aic2_examples() {
        assert_eq!(aic2_residual(&AlgCurvTensor::metric()), 0.0);
        assert!(aic2_residual(&diag([1.0, 0.0, -1.0], [0.0; 3], 0.0)) > 0.1);
        assert!(aic2_residual(&diag([1.0, 0.0, -1.0], [1.0, 0.0, 1.0], 0.0)) < 1e-13);
    }

    #[test]
    fn invariants_examples() {
        let m = invariants(&AlgCurvTensor::metric());
        assert_eq!(m.max_abs(), 0.0);
        let on = invariants(&diag([1.0, 0.0, -1.0], [1.0, 0.0, 1.0], 0.0));
        assert!(on.max_abs() < 1e-13);
        let off = invariants(&diag([1.0, 0.0, -1.0], [0.0; 3], 0.0));
        assert!(off.c1.abs().max(off.c2.abs()).max(off.c3.abs()) < 1e-13);
        assert!(off.c4 > 0.01);
    }

    #[test]
    fn determinant_test_examples() {
        let d = DiagonalACT::new([1.0, 0.0, -1.0], [0.0; 3], 0.0);
        assert_eq!(ks_matrix(&d).det(), -2.0);
        assert!(!diagonal_is_integrable(&d, 1e-10));
        assert!(diagonal_is_integrable(
            &DiagonalACT::new([1.0, 0.0, -1.0], [1.0, 0.0, 1.0], 0.0),
            1e-10
        ));
        assert!(diagonal_is_integrable(
            &DiagonalACT::new([0.0; 3], [0.3, -1.7, 2.0], 5.0),
            1e-10
        ));
    }

    #[test]
    fn chiral_tensor_is_not_integrable() {
        let cfg = ToleranceConfig::default();
        let r = aligned_act([2.0, -1.0, -1.0], [-2.0, 1.0, 1.0], [0.0; 3], 0.0).unwrap();
        for m in [Method::BruteForce, Method::Invariants, Method::DiagonalDet] {
            assert!(!is_integrable(&r, &cfg, Some(m)).verdict);
        }
    }

    #[test]
    fn aic2_is_sixteen_times_the_determinant_on_diagonals() {
        for (w, t) in [
            ([1.0, 0.0, -1.0], [0.0; 3]),
            ([0.7, -0.2, -0.5], [0.4, 1.1, -0.3]),
            ([2.0, -1.5, -0.5], [0.1, 0.2, 3.0]),
        ] {
            let d = DiagonalACT::new(w, t, 0.0);
            let m = aic2_tensor(&d.to_act())
                .iter()
                .flatten()
                .flatten()
                .flatten()
                .fold(0.0_f64, |a, x| a.max(x.abs()));
            let det = ks_matrix(&d).det().abs();
            assert!((m - 16.0 * det).abs() < 1e-12 * m.max(1.0));
        }
    }

    #[test]
    fn aic2_is_blind_to_the_scalar_part() {
        let base = diag([0.7, -0.2, -0.5], [0.4, 1.1, -0.3], 0.0);
        let shifted = base + 3.7 * AlgCurvTensor::metric();
        assert!((aic2_residual(&base) - aic2_residual(&shifted)).abs() < 1e-12);
    }
}
