//! Commutation of Killing tensors, Stäckel systems, special Killing tensors,
//! Benenti families and extensions from lower-dimensional spheres.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::Serialize;

use crate::decomposition::{ricci_decompose, DiagonalACT};
use crate::error::{Error, Result};
use crate::ksvariety::{diagonal_from_ks, staeckel_line, KSMatrix, StaeckelLine};
use crate::lambda2::{adjugate4, hodge_conjugate, kulkarni_nomizu, pair_index, ricci_contraction, AlgCurvTensor, Sym4};
use crate::ToleranceConfig;

/// The four triples of `{0,1,2,3}`.
const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

fn sectional(entries: &[f64; 6], i: usize, j: usize) -> f64 {
    entries[pair_index(i, j).expect("distinct indices").0]
}

/// The four determinants `det(1, R_ijij, R̃_ijij)` over the pairs of each
/// triple, divided by the product of the trace-free norms.
pub fn commutator_determinants(d1: &DiagonalACT, d2: &DiagonalACT) -> [f64; 4] {
    let scale = d1.tracefree_norm() * d2.tracefree_norm();
    if scale == 0.0 {
        return [0.0; 4];
    }
    let (e1, e2) = (d1.entries(), d2.entries());
    TRIPLES.map(|[i, j, k]| {
        let pairs = [(i, j), (j, k), (i, k)];
        let m = Matrix3::from_fn(|r, c| {
            let (a, b) = pairs[r];
            match c {
                0 => 1.0,
                1 => sectional(&e1, a, b),
                _ => sectional(&e2, a, b),
            }
        });
        m.determinant() / scale
    })
}

pub fn commute_diagonal(d1: &DiagonalACT, d2: &DiagonalACT, tol: f64) -> bool {
    commutator_determinants(d1, d2).iter().all(|x| x.abs() <= tol)
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

/// Max-abs entry of `Σ_i R_{i b₁ a₂ b₂} R̃_{i d₁ c₂ d₂}` antisymmetrized in
/// `(a₂, c₂)` and symmetrized in `(b₁, b₂, d₁, d₂)`, over the product of the
/// trace-free norms.
pub fn commute_general(r1: &AlgCurvTensor, r2: &AlgCurvTensor) -> f64 {
    let (Some(s1), Some(s2)) = (r1.residual_scale(), r2.residual_scale()) else {
        return 0.0;
    };
    let (a, b) = (r1.components(), r2.components());
    // t[b1][a2][b2][d1][c2][d2]
    let mut t = [[[[[[0.0; 4]; 4]; 4]; 4]; 4]; 4];
    for b1 in 0..4 {
        for a2 in 0..4 {
            for b2 in 0..4 {
                for d1 in 0..4 {
                    for c2 in 0..4 {
                        for d2 in 0..4 {
                            t[b1][a2][b2][d1][c2][d2] = (0..4).map(|i| a[i][b1][a2][b2] * b[i][d1][c2][d2]).sum();
                        }
                    }
                }
            }
        }
    }
    let mut worst = 0.0_f64;
    for a2 in 0..4 {
        for c2 in a2 + 1..4 {
            for b1 in 0..4 {
                for b2 in 0..4 {
                    for d1 in 0..4 {
                        for d2 in 0..4 {
                            let idx = [b1, b2, d1, d2];
                            let mut acc = 0.0;
                            for p in &S4 {
                                let [x, y, z, w] = p.map(|k| idx[k]);
                                acc += t[x][a2][y][z][c2][w] - t[x][c2][y][z][a2][w];
                            }
                            worst = worst.max(acc.abs());
                        }
                    }
                }
            }
        }
    }
    worst / (s1 * s2)
}

/// Three mutually commuting integrable Killing tensors, the metric first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaeckelSystem {
    pub generators: [DiagonalACT; 3],
    pub line: StaeckelLine,
}

fn vectorized(ds: &[DiagonalACT]) -> DMatrix<f64> {
    DMatrix::from_fn(36, ds.len(), |i, j| ds[j].to_act().matrix()[i])
}

impl StaeckelSystem {
    /// Smallest singular value of the column-normalized generators.
    pub fn independence(&self) -> f64 {
        let mut m = vectorized(&self.generators);
        for mut c in m.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        m.singular_values().min()
    }

    /// Relative least-squares distance of `d` from the span of the generators.
    pub fn span_residual(&self, d: &DiagonalACT) -> f64 {
        let m = vectorized(&self.generators);
        let target = DVector::from_column_slice(d.to_act().matrix().as_slice());
        let svd = m.clone().svd(true, true);
        let coeffs = svd.solve(&target, 1e-14).expect("u and v were computed");
        (m * coeffs - &target).norm() / target.norm()
    }
}

pub fn staeckel_system(m: &KSMatrix, s_default: f64, cfg: &ToleranceConfig) -> Result<StaeckelSystem> {
    let line = staeckel_line(m, cfg)?;
    Ok(StaeckelSystem {
        generators: [
            DiagonalACT::metric(),
            diagonal_from_ks(&line.base, s_default),
            diagonal_from_ks(&line.second, s_default),
        ],
        line,
    })
}

/// `h⊼g`, the tensor of the special Killing tensor built from `h`.
pub fn special_killing(h: &Sym4) -> AlgCurvTensor {
    kulkarni_nomizu(h, &Sym4::metric())
}

/// Recovers `h − (tr h/2)·g` from `h⊼g`; fails when `k` has a Weyl part of
/// relative size above `tol`.
pub fn l_hat_of(k: &AlgCurvTensor, tol: f64) -> Result<Sym4> {
    let parts = ricci_decompose(k);
    let norm = k.norm();
    if norm > 0.0 {
        let weyl = parts.weyl.norm() / norm;
        if weyl > tol {
            return Err(Error::NotSpecial { weyl });
        }
    }
    let s = parts.s;
    let ric = ricci_contraction(k.matrix());
    let h = Sym4::from_upper(&ric) - (s / 6.0) * Sym4::metric();
    let h = 0.5 * h;
    Ok(h - (h.trace() / 2.0) * Sym4::metric())
}

/// `R(λ) = λ²R₂ + λR₁ + R₀ = ★((h − λg)⊼(h − λg))★`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenentiFamily {
    pub h: Sym4,
    pub r0: AlgCurvTensor,
    pub r1: AlgCurvTensor,
    pub r2: AlgCurvTensor,
}

pub fn benenti_family(h: &Sym4) -> BenentiFamily {
    let g = Sym4::metric();
    BenentiFamily {
        h: *h,
        r0: hodge_conjugate(&kulkarni_nomizu(h, h)),
        r1: -2.0 * hodge_conjugate(&kulkarni_nomizu(h, &g)),
        r2: kulkarni_nomizu(&g, &g),
    }
}

pub fn benenti_eval(f: &BenentiFamily, lambda: f64) -> AlgCurvTensor {
    (lambda * lambda) * f.r2 + lambda * f.r1 + f.r0
}

/// `Adj(A)⊼Adj(A) / det A` with `A = h − λg`; singular at eigenvalues of `h`.
pub fn benenti_adjugate_form(h: &Sym4, lambda: f64) -> AlgCurvTensor {
    let a = *h - lambda * Sym4::metric();
    let adj = adjugate4(&a);
    let det = a.matrix().determinant();
    (1.0 / det) * kulkarni_nomizu(&adj, &adj)
}

/// Eigenvalues of `h` grouped by `tol` relative to their spread.
pub fn multiplicities(values: &[f64; 4], tol: f64) -> Vec<usize> {
    let spread = values[3] - values[0];
    let mut out = vec![1];
    for k in 1..4 {
        if values[k] - values[k - 1] <= tol * spread {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

/// The coefficients span a Stäckel system exactly when `h` has no eigenvalue
/// of multiplicity three or more.
pub fn spans_staeckel(f: &BenentiFamily, tol: f64) -> bool {
    multiplicities(&f.h.eigenvalues(), tol).iter().all(|&m| m < 3)
}

/// Diagonal tensor whose KS-matrix is `V_t = t₁V₊₁ + t₂V₊₂ + t₃V₊₃`, with the
/// scalar part fixed by `w_α + s/12 = −t_α`.
pub fn extend_from_s2(t: [f64; 3]) -> DiagonalACT {
    let m = KSMatrix::new([t[2] - t[1], t[0] - t[2], t[1] - t[0]], t).expect("trace free");
    diagonal_from_ks(&m, -4.0 * (t[0] + t[1] + t[2]))
}

/// Diagonal tensor whose KS-matrix is `a·V₋₁ + b·V₊₁`, with `w₂ + s/12 = w₃ + s/12 = 0`.
pub fn extend_from_s1s1(a: f64, b: f64) -> DiagonalACT {
    let m = KSMatrix::new([0.0, a + b, -(a + b)], [b - a, 0.0, 0.0]).expect("trace free");
    diagonal_from_ks(&m, -4.0 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ksvariety::{centre, ks_matrix, nu, vertex};
    use nalgebra::Vector3;

    #[test]
    fn metric_commutes_with_everything() {
        let d = DiagonalACT::new([0.3, -1.0, 0.7], [1.0, 2.0, 3.0], 1.0);
        assert!(commute_diagonal(&d, &DiagonalACT::metric(), 1e-12));
        let r = d.to_act();
        assert_eq!(commute_general(&r, &AlgCurvTensor::metric()), 0.0);
    }

    #[test]
    fn iota_nu_pair_commutes() {
        let iota = DiagonalACT::new([0.0; 3], [1.0, 2.0, 3.0], 0.0);
        let nu = DiagonalACT::new([1.0, 4.0, 9.0], [6.0, 3.0, 2.0], 0.0);
        assert!(commute_diagonal(&iota, &nu, 1e-12));
        assert!(commute_general(&iota.to_act(), &nu.to_act()) < 1e-12);
    }

    #[test]
    fn permuted_pair_does_not_commute() {
        let a = DiagonalACT::new([1.0, 0.0, -1.0], [1.0, 0.0, 1.0], 0.0);
        let b = DiagonalACT::new([0.0, 1.0, -1.0], [0.0, 1.0, 1.0], 0.0);
        assert!(!commute_diagonal(&a, &b, 1e-10));
        assert!(commute_general(&a.to_act(), &b.to_act()) > 1e-3);
    }

    #[test]
    fn tensor_commutes_with_itself() {
        let d = DiagonalACT::new([0.3, -1.0, 0.7], [1.0, 2.0, 3.0], 1.0);
        assert!(commute_general(&d.to_act(), &d.to_act()) < 1e-14);
    }

    #[test]
    fn staeckel_system_of_nu_point() {
        let cfg = ToleranceConfig::default();
        let n = Vector3::new(1.0, 2.0, 3.0);
        let sys = staeckel_system(&nu(&n), 0.0, &cfg).unwrap();
        assert!(sys.independence() > 1e-9);
        for i in 0..3 {
            for j in 0..3 {
                assert!(commute_diagonal(&sys.generators[i], &sys.generators[j], 1e-12));
            }
        }
        assert!(sys.span_residual(&DiagonalACT::new([1.0, 4.0, 9.0], [6.0, 3.0, 2.0], 5.0)) < 1e-12);
    }

    #[test]
    fn degenerate_system_extends_from_s2() {
        let cfg = ToleranceConfig::default();
        let m = ks_matrix(&extend_from_s2([1.0, 2.0, 4.0]));
        let sys = staeckel_system(&m, 0.0, &cfg).unwrap();
        assert!(sys.line.degenerate);
        let one = Vector3::new(1.0, 1.0, 1.0);
        for g in &sys.generators[1..] {
            assert!((ks_matrix(g).matrix() * one).norm() < 1e-14);
        }
    }

    #[test]
    fn special_killing_examples() {
        let h = Sym4::diag([1.0, 2.0, 3.0, 4.0]);
        let d = DiagonalACT::from_act_diagonal(&special_killing(&h));
        let m = ks_matrix(&d);
        assert_eq!(m.delta(), [0.0; 3]);
        // t_α = h₀ + h_α − tr h / 2
        assert_eq!(m.t(), [-2.0, -1.0, 0.0]);
        let g = special_killing(&Sym4::metric());
        assert_eq!(*g.matrix(), *(2.0 * AlgCurvTensor::metric()).matrix());
        assert_eq!(ks_matrix(&DiagonalACT::from_act_diagonal(&g)), KSMatrix::zero());
    }

    #[test]
    fn trace_free_h_reproduces_sum_of_eigenvalues() {
        let h = Sym4::diag([-1.5, -0.5, 0.5, 1.5]);
        let m = ks_matrix(&DiagonalACT::from_act_diagonal(&special_killing(&h)));
        assert_eq!(m.t(), [-2.0, -1.0, 0.0]);
    }

    #[test]
    fn l_hat_round_trip() {
        let h = Sym4::from_upper(&nalgebra::Matrix4::new(
            1.0, 0.3, -0.2, 0.5, 0.0, 2.0, 0.1, 0.0, 0.0, 0.0, -1.0, 0.4, 0.0, 0.0, 0.0, 0.7,
        ));
        let l = l_hat_of(&special_killing(&h), 1e-10).unwrap();
        let expect = h - (h.trace() / 2.0) * Sym4::metric();
        assert!((l.matrix() - expect.matrix()).abs().max() < 1e-13);
        let weyl = DiagonalACT::new([1.0, 0.0, -1.0], [0.0; 3], 0.0).to_act();
        assert!(matches!(l_hat_of(&weyl, 1e-10), Err(Error::NotSpecial { .. })));
    }

    #[test]
    fn benenti_examples() {
        let h = Sym4::diag([1.0, 2.0, 3.0, 4.0]);
        let f = benenti_family(&h);
        let r = benenti_eval(&f, 0.0);
        let expect = [24.0, 16.0, 12.0, 4.0, 6.0, 8.0];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(r.matrix()[(k, k)], *e);
        }
        let g = benenti_family(&Sym4::metric());
        for lam in [-1.3, 0.0, 0.5, 2.0] {
            let r = benenti_eval(&g, lam);
            let want = ((lam - 1.0) * (lam - 1.0)) * kulkarni_nomizu(&Sym4::metric(), &Sym4::metric());
            assert!((r.matrix() - want.matrix()).abs().max() < 1e-13);
        }
        assert_eq!(*f.r2.matrix(), *(2.0 * AlgCurvTensor::metric()).matrix());
        let r = benenti_eval(&f, 0.7);
        let a = benenti_adjugate_form(&h, 0.7);
        assert!((r.matrix() - a.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn triple_eigenvalue_examples() {
        let cases = [
            ([1.0, 2.0, 3.0, 4.0], true),
            ([0.0, 1.0, 1.0, 1.0], false),
            ([0.0, 0.0, 1.0, 1.0], true),
        ];
        for (h, expect) in cases {
            assert_eq!(spans_staeckel(&benenti_family(&Sym4::diag(h)), 1e-8), expect);
        }
    }

    #[test]
    fn extensions() {
        assert!(ks_matrix(&extend_from_s2([1.0, 1.0, 1.0])).projectively_equal(&centre(0)));
        assert_eq!(ks_matrix(&extend_from_s2([1.0, 0.0, 0.0])), vertex(0, true));
        assert_eq!(ks_matrix(&extend_from_s1s1(1.0, 0.0)), vertex(0, false));
        let d = extend_from_s2([0.3, -1.2, 2.0]);
        for a in 0..3 {
            assert!((d.w()[a] + d.s() / 12.0 + d.t()[a]).abs() < 1e-14);
        }
        let e = extend_from_s1s1(0.4, 1.5).entries();
        let expect = [-0.8, 0.0, 0.0, -3.0, 0.0, 0.0];
        for k in 0..6 {
            assert!((e[k] - expect[k]).abs() < 1e-14);
        }
    }
}
