//! JSON formats for tensors, symmetric forms and KS-matrices, and a
//! serializer printing every float with 17 significant digits.

use std::io;

use nalgebra::{Matrix3, Matrix4, Matrix6};
use serde::{Deserialize, Serialize};

use crate::decomposition::DiagonalACT;
use crate::error::{Error, Result};
use crate::ksvariety::KSMatrix;
use crate::lambda2::{AlgCurvTensor, Sym4, BASIS_LABEL};
use crate::staeckel::special_killing;

pub const ACT_FORMAT: &str = "act-v1";
pub const KS_FORMAT: &str = "ks-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActJson {
    pub format: String,
    #[serde(default = "default_basis")]
    pub basis: String,
    pub matrix: [[f64; 6]; 6],
}

fn default_basis() -> String {
    BASIS_LABEL.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sym4Json {
    pub sym4: [[f64; 4]; 4],
}

/// Any accepted description of an algebraic curvature tensor. A bare
/// `sym4` is read as `h` and mapped to `h⊼g`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TensorInput {
    Act(Box<ActJson>),
    Diagonal(DiagonalACT),
    Sym4(Sym4Json),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsVectorJson {
    #[serde(default)]
    pub format: Option<String>,
    pub delta: [f64; 3],
    pub t: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum KsInput {
    Vector(KsVectorJson),
    Matrix { matrix: [[f64; 3]; 3] },
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed {what}: {e}")))
}

pub fn act_from_json(a: &ActJson) -> Result<AlgCurvTensor> {
    if a.format != ACT_FORMAT {
        return Err(Error::InvalidInput(format!("unknown format {:?}", a.format)));
    }
    if a.basis != BASIS_LABEL {
        return Err(Error::InvalidInput(format!(
            "basis {:?} differs from {BASIS_LABEL:?}",
            a.basis
        )));
    }
    AlgCurvTensor::from_matrix(Matrix6::from_fn(|i, j| a.matrix[i][j]))
}

pub fn act_to_json(r: &AlgCurvTensor) -> ActJson {
    let m = r.matrix();
    ActJson {
        format: ACT_FORMAT.to_string(),
        basis: BASIS_LABEL.to_string(),
        matrix: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])),
    }
}

pub fn sym4_from_rows(rows: &[[f64; 4]; 4]) -> Result<Sym4> {
    Sym4::from_matrix(&Matrix4::from_fn(|i, j| rows[i][j]))
}

pub fn sym4_to_json(h: &Sym4) -> Sym4Json {
    let m = h.matrix();
    Sym4Json {
        sym4: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])),
    }
}

pub fn parse_tensor(text: &str) -> Result<AlgCurvTensor> {
    match parse::<TensorInput>(text, "tensor")? {
        TensorInput::Act(a) => act_from_json(&a),
        TensorInput::Diagonal(d) => Ok(d.to_act()),
        TensorInput::Sym4(s) => Ok(special_killing(&sym4_from_rows(&s.sym4)?)),
    }
}

pub fn parse_sym4(text: &str) -> Result<Sym4> {
    sym4_from_rows(&parse::<Sym4Json>(text, "sym4")?.sym4)
}

pub fn parse_ks(text: &str) -> Result<KSMatrix> {
    match parse::<KsInput>(text, "KS-matrix")? {
        KsInput::Vector(v) => {
            if let Some(f) = &v.format {
                if f != KS_FORMAT {
                    return Err(Error::InvalidInput(format!("unknown format {f:?}")));
                }
            }
            KSMatrix::new(v.delta, v.t)
        }
        KsInput::Matrix { matrix } => KSMatrix::from_matrix(&Matrix3::from_fn(|i, j| matrix[i][j])),
    }
}

pub fn ks_to_json(m: &KSMatrix) -> KsVectorJson {
    KsVectorJson {
        format: Some(KS_FORMAT.to_string()),
        delta: m.delta(),
        t: m.t(),
    }
}

/// Compact JSON with floats in `{:.16e}` form.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
