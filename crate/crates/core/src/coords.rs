//! Eigenvalues of special conformal Killing tensors along the sphere,
//! elliptic coordinates and the classification of separation coordinates.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ksvariety::StaeckelLine;
use crate::lambda2::Vec4;
use crate::ToleranceConfig;

/// Weights `x_k²` below this count as a removed pole.
const POLE_FLOOR: f64 = 1e-14;
const SPHERE_TOL: f64 = 1e-12;

/// Sorted eigenvalues `Λ₀ ≤ Λ₁ ≤ Λ₂ ≤ Λ₃` with their equal-value blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    lambda: [f64; 4],
    groups: Vec<Vec<usize>>,
}

impl Spectrum {
    /// Sorts `lambda` and groups entries closer than `tol·(Λ₃ − Λ₀)`.
    pub fn new(mut lambda: [f64; 4], tol: f64) -> Result<Self> {
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        lambda.sort_by(f64::total_cmp);
        let gap = tol * (lambda[3] - lambda[0]);
        let mut groups = vec![vec![0]];
        for k in 1..4 {
            if lambda[k] - lambda[k - 1] <= gap {
                groups.last_mut().unwrap().push(k);
            } else {
                groups.push(vec![k]);
            }
        }
        Ok(Spectrum { lambda, groups })
    }

    pub fn lambda(&self) -> [f64; 4] {
        self.lambda
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn pattern(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn is_simple(&self) -> bool {
        self.groups.len() == 4
    }
}

/// Unit vector in ℝ⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpherePoint([f64; 4]);

impl SpherePoint {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        let n = Vec4::from(x).norm();
        if (n - 1.0).abs() > SPHERE_TOL {
            return Err(Error::InvalidInput(format!("point has norm {n}, expected 1")));
        }
        Ok(SpherePoint(x))
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalize(x: [f64; 4]) -> Result<Self> {
        let n = Vec4::from(x).norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(SpherePoint(x.map(|c| c / n)))
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0
    }

    pub fn vector(&self) -> Vec4 {
        Vec4::from(self.0)
    }
}

/// `q(λ) = Σ x_k² / (Λ_k − λ)`.
pub fn q(spec: &Spectrum, x: &SpherePoint, lambda: f64) -> f64 {
    spec.lambda
        .iter()
        .zip(x.0.iter())
        .map(|(l, c)| c * c / (l - lambda))
        .sum()
}

/// Sign-changing root of an increasing function on `(lo, hi)`: Newton steps
/// while they stay inside the bracket, bisection otherwise, until the bracket
/// shrinks to adjacent doubles.
fn bracketed_root(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (v, dv) = f(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let newton = x - v / dv;
        x = if newton > lo && newton < hi && dv.is_finite() && dv > 0.0 {
            newton
        } else {
            mid
        };
        if x == lo || x == hi {
            x = mid;
        }
    }
    let (a, b) = (f(lo).0.abs(), f(hi).0.abs());
    if !(a.is_finite()) {
        hi
    } else if !(b.is_finite()) || a <= b {
        lo
    } else {
        hi
    }
}

/// The three eigenvalues of `L` at `x`: one root of `q` between consecutive
/// active poles, plus `Λ` for every multiplicity and every vanishing weight.
/// The flag is set when a pole was removed because `x` lies on its hyperplane.
pub fn eigenvalues_with_flag(spec: &Spectrum, x: &SpherePoint) -> ([f64; 3], bool) {
    let mut constants = Vec::new();
    let mut poles: Vec<(f64, f64)> = Vec::new();
    let mut boundary = false;
    for g in &spec.groups {
        let value = g.iter().map(|&k| spec.lambda[k]).sum::<f64>() / g.len() as f64;
        let weight: f64 = g.iter().map(|&k| x.0[k] * x.0[k]).sum();
        constants.extend(std::iter::repeat_n(value, g.len() - 1));
        if weight < POLE_FLOOR {
            constants.push(value);
            boundary = true;
        } else {
            poles.push((value, weight));
        }
    }
    let qa = |lam: f64| -> (f64, f64) {
        poles.iter().fold((0.0, 0.0), |(v, d), &(l, w)| {
            let r = 1.0 / (l - lam);
            (v + w * r, d + w * r * r)
        })
    };
    let mut out = constants;
    for pair in poles.windows(2) {
        out.push(bracketed_root(qa, pair[0].0, pair[1].0));
    }
    out.sort_by(f64::total_cmp);
    ([out[0], out[1], out[2]], boundary)
}

pub fn eigenvalues_at(spec: &Spectrum, x: &SpherePoint) -> [f64; 3] {
    eigenvalues_with_flag(spec, x).0
}

/// Elliptic coordinates for a simple spectrum at a point off every
/// coordinate hyperplane.
pub fn elliptic_coords(spec: &Spectrum, x: &SpherePoint) -> Result<[f64; 3]> {
    if !spec.is_simple() {
        return Err(Error::NotSimple);
    }
    if let Some(index) = x.0.iter().position(|c| c * c < POLE_FLOOR) {
        return Err(Error::DegenerateChartPoint { index });
    }
    Ok(eigenvalues_at(spec, x))
}

/// Minimum of the differences in `Λ₀ ≤ λ₁ ≤ Λ₁ ≤ λ₂ ≤ Λ₂ ≤ λ₃ ≤ Λ₃`.
pub fn interlacing_slack(spec: &Spectrum, lam: &[f64; 3]) -> f64 {
    let l = spec.lambda;
    let chain = [l[0], lam[0], l[1], lam[1], l[2], lam[2], l[3]];
    chain.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SeparationType {
    Elliptic,
    OblateLame,
    ProlateLame,
    Cylindrical,
    LameSubgroup,
    Spherical,
}

/// Where a type sits in the pentagon of parenthesizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stratum {
    Interior,
    Edge,
    Vertex,
}

impl SeparationType {
    pub const ALL: [SeparationType; 6] = [
        SeparationType::Elliptic,
        SeparationType::OblateLame,
        SeparationType::ProlateLame,
        SeparationType::Cylindrical,
        SeparationType::LameSubgroup,
        SeparationType::Spherical,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SeparationType::Elliptic => "elliptic",
            SeparationType::OblateLame => "oblate Lame",
            SeparationType::ProlateLame => "prolate Lame",
            SeparationType::Cylindrical => "cylindrical",
            SeparationType::LameSubgroup => "Lame subgroup reduction",
            SeparationType::Spherical => "spherical",
        }
    }

    pub fn label(&self) -> &'static str {
        associahedron_label(*self)
    }

    /// One fewer than the number of bracket pairs.
    pub fn stratum(&self) -> Stratum {
        match self.label().matches('(').count() {
            1 => Stratum::Interior,
            2 => Stratum::Edge,
            _ => Stratum::Vertex,
        }
    }
}

impl fmt::Display for SeparationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.label())
    }
}

pub fn associahedron_label(t: SeparationType) -> &'static str {
    match t {
        SeparationType::Elliptic => "(0123)",
        SeparationType::OblateLame => "(01(23))",
        SeparationType::ProlateLame => "(0(12)3)",
        SeparationType::Cylindrical => "((01)(23))",
        SeparationType::LameSubgroup => "(0(123))",
        SeparationType::Spherical => "(0(1(23)))",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumClass {
    Type(SeparationType),
    /// A triple eigenvalue; the secondary tensor decides between the two
    /// extensions from S².
    NeedsLineData,
}

pub fn classify_spectrum(spec: &Spectrum) -> Result<SpectrumClass> {
    use SeparationType::*;
    let class = match spec.pattern().as_slice() {
        [1, 1, 1, 1] => SpectrumClass::Type(Elliptic),
        [1, 1, 2] | [2, 1, 1] => SpectrumClass::Type(OblateLame),
        [1, 2, 1] => SpectrumClass::Type(ProlateLame),
        [2, 2] => SpectrumClass::Type(Cylindrical),
        [1, 3] | [3, 1] => SpectrumClass::NeedsLineData,
        _ => return Err(Error::AllEqual),
    };
    Ok(class)
}

/// Simple S²-Ricci eigenvalues give the Lamé subgroup reduction, a double one
/// spherical coordinates.
pub fn classify_s2(t: [f64; 3], tol: f64) -> Result<SeparationType> {
    let mut v = [t[0], t[1], t[2], 0.0];
    v[..3].sort_by(f64::total_cmp);
    let spread = v[2] - v[0];
    let ties = (0..2).filter(|&k| v[k + 1] - v[k] <= tol * spread).count();
    match (spread > 0.0, ties) {
        (true, 0) => Ok(SeparationType::LameSubgroup),
        (true, 1) => Ok(SeparationType::Spherical),
        _ => Err(Error::InvalidLine("S² Ricci eigenvalues all coincide".into())),
    }
}

/// Spectrum classification completed by S²-Ricci data where needed.
pub fn classify(spec: &Spectrum, s2_ricci: Option<[f64; 3]>, tol: f64) -> Result<SeparationType> {
    match classify_spectrum(spec)? {
        SpectrumClass::Type(t) => Ok(t),
        SpectrumClass::NeedsLineData => match s2_ricci {
            Some(t) => classify_s2(t, tol),
            None => Err(Error::InvalidLine(
                "triple eigenvalue needs S² Ricci eigenvalues".into(),
            )),
        },
    }
}

/// Spectrum `Λ₀ = Σn/2`, `Λ_α = (n_α − n_β − n_γ)/2` of the trace-free
/// special conformal Killing tensor with kernel direction `n`.
pub fn spectrum_of_kernel(n: [f64; 3], tol: f64) -> Result<Spectrum> {
    let [a, b, c] = n;
    Spectrum::new(
        [
            (a + b + c) / 2.0,
            (a - b - c) / 2.0,
            (b - c - a) / 2.0,
            (c - a - b) / 2.0,
        ],
        tol,
    )
}

pub fn classify_line(line: &StaeckelLine, s2_ricci: Option<[f64; 3]>, cfg: &ToleranceConfig) -> Result<SeparationType> {
    let n = line.kernel.components();
    if line.kernel_residual() > 1e-10 {
        return Err(Error::InvalidLine("generators do not annihilate the kernel".into()));
    }
    if !line.degenerate {
        return classify(&spectrum_of_kernel(n, cfg.grouping)?, None, cfg.grouping);
    }
    let t = match s2_ricci {
        Some(t) => t,
        None => {
            // conjugate the second generator back into the V₊ plane
            let parity = (n[0] * n[1] * n[2]).signum();
            let t = line.second.t();
            [0, 1, 2].map(|k| n[k].signum() * parity * t[k])
        }
    };
    classify_s2(t, cfg.grouping)
}

/// Roots of `λ² + T(y,y)λ + (Adj T)(y,y)` for `T = diag(t)` made trace free,
/// shifted back; the flag marks `y` on a coordinate axis plane.
pub fn s2_eigenvalues(t: [f64; 3], y: [f64; 3]) -> Result<([f64; 2], bool)> {
    let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    if (n - 1.0).abs() > SPHERE_TOL {
        return Err(Error::InvalidInput(format!("direction has norm {n}, expected 1")));
    }
    let shift = (t[0] + t[1] + t[2]) / 3.0;
    let u = t.map(|x| x - shift);
    let adj = [u[1] * u[2], u[2] * u[0], u[0] * u[1]];
    let b: f64 = (0..3).map(|k| u[k] * y[k] * y[k]).sum();
    let c: f64 = (0..3).map(|k| adj[k] * y[k] * y[k]).sum();
    let disc = (b * b - 4.0 * c).max(0.0).sqrt();
    let r1 = if b >= 0.0 { (-b - disc) / 2.0 } else { (-b + disc) / 2.0 };
    let r2 = if r1 != 0.0 { c / r1 } else { -b };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let boundary = y.iter().any(|c| c * c < POLE_FLOOR);
    Ok(([lo + shift, hi + shift], boundary))
}
