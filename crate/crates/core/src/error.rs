use std::fmt;

/// Which curvature identity a component array failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    Antisymmetry,
    PairSymmetry,
    Bianchi,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Identity::Antisymmetry => "antisymmetry",
            Identity::PairSymmetry => "pair symmetry",
            Identity::Bianchi => "Bianchi",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{identity} violated (max residual {residual:e})")]
    SymmetryViolation { identity: Identity, residual: f64 },

    #[error("Bianchi violated: tr W+ = {plus:e}, tr W- = {minus:e}")]
    BianchiViolation { plus: f64, minus: f64 },

    #[error("tensor is not diagonalisable (residual {residual:e})")]
    NotDiagonalisable { residual: f64 },

    #[error("matrix has rank one; the kernel map is undefined")]
    RankOne,

    #[error("matrix is not on the Killing-Stackel variety (relative det {det:e})")]
    NotOnVariety { det: f64 },

    #[error("matrix is one of the ten singular points")]
    SingularPoint,

    #[error("tensor has a Weyl part of relative size {weyl:e}")]
    NotSpecial { weyl: f64 },

    #[error("sphere point lies on the chart boundary (coordinate {index} vanishes)")]
    DegenerateChartPoint { index: usize },

    #[error("spectrum has repeated eigenvalues")]
    NotSimple,

    #[error("all four eigenvalues coincide")]
    AllEqual,

    #[error("invalid Stackel line: {0}")]
    InvalidLine(String),

    #[error("symmetric part is not trace free (trace {trace:e})")]
    NotTraceFree { trace: f64 },

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
