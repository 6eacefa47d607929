//! JSON file formats and the plain-text report renderer.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of them.
//! An algebra is either a shorthand string such as `"M2xD2"` or an object
//! `{ "block_dims": [..], "factors": [a, b] }` with optional factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgebraElement, FdAlgebra};
use crate::bell::{ChshObservables, ChshResult};
use crate::entanglement::{Decomposition, PureEntanglement, SeparabilityVerdict};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::states::{PureVector, State};

pub type Pair = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraJson {
    Shorthand(String),
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_dims: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factors: Option<Box<(AlgebraJson, AlgebraJson)>>,
    },
}

impl AlgebraJson {
    pub fn from_algebra(a: &FdAlgebra) -> Self {
        Self::Explicit {
            block_dims: Some(a.block_dims().to_vec()),
            factors: a
                .factors()
                .map(|(x, y)| Box::new((Self::from_algebra(x), Self::from_algebra(y)))),
        }
    }

    pub fn to_algebra(&self) -> Result<FdAlgebra> {
        match self {
            Self::Shorthand(s) => s.parse(),
            Self::Explicit { block_dims, factors } => {
                let alg = match (block_dims, factors) {
                    (_, Some(f)) => FdAlgebra::tensor(&f.0.to_algebra()?, &f.1.to_algebra()?),
                    (Some(dims), None) => FdAlgebra::from_blocks(dims.clone())?,
                    (None, None) => {
                        return Err(Error::Parse(
                            "algebra needs \"block_dims\" or \"factors\"".into(),
                        ))
                    }
                };
                if let Some(dims) = block_dims {
                    if dims.as_slice() != alg.block_dims() {
                        return Err(Error::ShapeMismatch(format!(
                            "block_dims {dims:?} disagree with the factors, which give {:?}",
                            alg.block_dims()
                        )));
                    }
                }
                Ok(alg)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockJson {
    pub dim: usize,
    pub entries: Vec<Pair>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub blocks: Vec<BlockJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub algebra: AlgebraJson,
    pub entries: Vec<Pair>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PureJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraJson>,
    pub psi: Vec<Pair>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub weights: Vec<f64>,
    pub a_parts: Vec<StateJson>,
    pub b_parts: Vec<StateJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictJson {
    pub tag: String,
    pub certificate: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservablesJson {
    pub a1: ElementJson,
    pub a2: ElementJson,
    pub b1: ElementJson,
    pub b2: ElementJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChshResultJson {
    pub value: f64,
    pub observables: ObservablesJson,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchmidtJson {
    pub coefficients: Vec<f64>,
    pub schmidt_rank: usize,
    pub entangled: bool,
    pub reduced_purity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BornJson {
    pub probabilities: Vec<f64>,
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pairs_to_complex(p: &[Pair]) -> Vec<Complex64> {
    p.iter().map(complex).collect()
}

fn matrix_entries(m: &CMat) -> Vec<Pair> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(pair(m[(r, c)]));
        }
    }
    out
}

fn square_matrix(n: usize, entries: &[Pair], what: &str) -> Result<CMat> {
    if entries.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "{what} has {} entries, expected {n}x{n} = {}",
            entries.len(),
            n * n
        )));
    }
    Ok(CMat::from_fn(n, n, |r, c| complex(&entries[r * n + c])))
}

pub fn element_to_json(x: &AlgebraElement) -> ElementJson {
    ElementJson {
        blocks: x
            .blocks()
            .iter()
            .map(|b| BlockJson {
                dim: b.nrows(),
                entries: matrix_entries(b),
            })
            .collect(),
    }
}

pub fn element_from_json(owner: &FdAlgebra, j: &ElementJson) -> Result<AlgebraElement> {
    let dims: Vec<usize> = j.blocks.iter().map(|b| b.dim).collect();
    if dims.as_slice() != owner.block_dims() {
        return Err(Error::ShapeMismatch(format!(
            "element blocks {dims:?} do not match algebra {owner} with blocks {:?}",
            owner.block_dims()
        )));
    }
    let blocks = j
        .blocks
        .iter()
        .enumerate()
        .map(|(k, b)| square_matrix(b.dim, &b.entries, &format!("block {k}")))
        .collect::<Result<Vec<_>>>()?;
    AlgebraElement::new(owner, blocks)
}

pub fn state_to_json(s: &State) -> StateJson {
    StateJson {
        algebra: AlgebraJson::from_algebra(s.owner()),
        entries: matrix_entries(&s.to_dense()),
    }
}

pub fn state_from_json(j: &StateJson) -> Result<State> {
    let owner = j.algebra.to_algebra()?;
    let rho = square_matrix(owner.total_dim(), &j.entries, "density matrix")?;
    State::from_dense(&owner, &rho)
}

pub fn pure_to_json(v: &PureVector) -> PureJson {
    PureJson {
        algebra: Some(AlgebraJson::from_algebra(v.owner())),
        psi: v.amplitudes().iter().copied().map(pair).collect(),
    }
}

/// Reads a vector state; without an algebra the vector lives on `M_len`.
/// With `normalize` a nonzero vector is rescaled instead of rejected.
pub fn pure_from_json(j: &PureJson, normalize: bool) -> Result<PureVector> {
    let owner = match &j.algebra {
        Some(a) => a.to_algebra()?,
        None => FdAlgebra::full(j.psi.len())?,
    };
    let psi = pairs_to_complex(&j.psi);
    if normalize {
        PureVector::normalized(&owner, psi)
    } else {
        PureVector::new(&owner, psi)
    }
}

pub fn decomposition_to_json(d: &Decomposition) -> DecompositionJson {
    DecompositionJson {
        weights: d.weights().to_vec(),
        a_parts: d.a_parts().iter().map(state_to_json).collect(),
        b_parts: d.b_parts().iter().map(state_to_json).collect(),
    }
}

pub fn decomposition_from_json(j: &DecompositionJson) -> Result<Decomposition> {
    let a_parts = j.a_parts.iter().map(state_from_json).collect::<Result<Vec<_>>>()?;
    let b_parts = j.b_parts.iter().map(state_from_json).collect::<Result<Vec<_>>>()?;
    Decomposition::new(j.weights.clone(), a_parts, b_parts)
}

pub fn verdict_to_json(v: &SeparabilityVerdict) -> VerdictJson {
    let certificate = match v {
        SeparabilityVerdict::Separable(d) => {
            serde_json::to_value(decomposition_to_json(d)).expect("decomposition serializes")
        }
        SeparabilityVerdict::EntangledPure { reduced_purity } => {
            serde_json::json!({ "reduced_purity": reduced_purity })
        }
        SeparabilityVerdict::EntangledPpt { min_eigenvalue } => {
            serde_json::json!({ "min_eigenvalue": min_eigenvalue })
        }
        SeparabilityVerdict::Undetermined { budget } => serde_json::json!({ "budget": budget }),
    };
    VerdictJson {
        tag: v.tag().to_string(),
        certificate,
    }
}

pub fn verdict_from_json(j: &VerdictJson) -> Result<SeparabilityVerdict> {
    let field = |name: &str| {
        j.certificate
            .get(name)
            .ok_or_else(|| Error::Parse(format!("{} certificate lacks \"{name}\"", j.tag)))
    };
    let number = |name: &str| {
        field(name)?
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("\"{name}\" must be a number")))
    };
    match j.tag.as_str() {
        "Separable" => {
            let d: DecompositionJson = serde_json::from_value(j.certificate.clone())?;
            Ok(SeparabilityVerdict::Separable(decomposition_from_json(&d)?))
        }
        "EntangledPure" => Ok(SeparabilityVerdict::EntangledPure {
            reduced_purity: number("reduced_purity")?,
        }),
        "EntangledPPT" => Ok(SeparabilityVerdict::EntangledPpt {
            min_eigenvalue: number("min_eigenvalue")?,
        }),
        "Undetermined" => Ok(SeparabilityVerdict::Undetermined {
            budget: field("budget")?
                .as_u64()
                .ok_or_else(|| Error::Parse("\"budget\" must be a nonnegative integer".into()))?
                as usize,
        }),
        other => Err(Error::Parse(format!("unknown verdict tag {other:?}"))),
    }
}

pub fn observables_to_json(o: &ChshObservables) -> ObservablesJson {
    ObservablesJson {
        a1: element_to_json(&o.a1),
        a2: element_to_json(&o.a2),
        b1: element_to_json(&o.b1),
        b2: element_to_json(&o.b2),
    }
}

pub fn observables_from_json(a: &FdAlgebra, b: &FdAlgebra, j: &ObservablesJson) -> Result<ChshObservables> {
    ChshObservables::new(
        element_from_json(a, &j.a1)?,
        element_from_json(a, &j.a2)?,
        element_from_json(b, &j.b1)?,
        element_from_json(b, &j.b2)?,
    )
}

pub fn chsh_result_to_json(r: &ChshResult) -> ChshResultJson {
    ChshResultJson {
        value: r.value,
        observables: observables_to_json(&r.observables),
        restarts: r.restarts,
        iterations: r.iterations,
        converged: r.converged,
    }
}

pub fn schmidt_to_json(p: &PureEntanglement) -> SchmidtJson {
    SchmidtJson {
        coefficients: p.schmidt.clone(),
        schmidt_rank: p
            .schmidt
            .iter()
            .filter(|&&s| s > crate::entanglement::SCHMIDT_TOL)
            .count(),
        entangled: p.entangled,
        reduced_purity: p.reduced_purity,
    }
}

/// Reads a state file of either kind as a density matrix.
pub fn read_any_state(text: &str) -> Result<State> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("psi").is_some() {
        let p: PureJson = serde_json::from_value(v)?;
        Ok(pure_from_json(&p, false)?.to_state())
    } else if v.get("entries").is_some() {
        let s: StateJson = serde_json::from_value(v)?;
        state_from_json(&s)
    } else {
        Err(Error::Parse(
            "state file needs \"entries\" (density matrix) or \"psi\" (vector)".into(),
        ))
    }
}

/// `x` rounded to seven significant digits, without trailing zeros.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=6).contains(&mag) {
        let s = format!("{x:.6e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (6 - mag).max(0) as usize;
    let s = trim_zeros(&format!("{x:.decimals$}"));
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Renders a JSON report as indented `key: value` lines, numbers at seven
/// significant digits.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, 0, &mut out);
    out
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() => format_sig(x),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|x| match x {
                    Value::Object(_) => None,
                    other => inline(other),
                })
                .collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        Value::Object(_) => None,
    }
}

fn render_into(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match inline(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match inline(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        render_into(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(2.0 * 2f64.sqrt()), "2.828427");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-0.125), "-0.125");
        assert_eq!(format_sig(1.23456789e-9), "1.234568e-9");
        assert_eq!(format_sig(123456789.0), "1.234568e8");
        assert_eq!(format_sig(-1e-20), "-1e-20");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn algebra_forms() {
        let j: AlgebraJson = serde_json::from_str(r#""M2xD2""#).unwrap();
        assert_eq!(j.to_algebra().unwrap().block_dims(), &[2, 2]);
        let j: AlgebraJson = serde_json::from_str(r#"{"block_dims":[2,1]}"#).unwrap();
        assert_eq!(j.to_algebra().unwrap().block_dims(), &[2, 1]);
        let j: AlgebraJson = serde_json::from_str(r#"{"factors":["M2","M2"]}"#).unwrap();
        let alg = j.to_algebra().unwrap();
        assert!(alg.factors().is_some());
        let back = serde_json::to_string(&AlgebraJson::from_algebra(&alg)).unwrap();
        let again: AlgebraJson = serde_json::from_str(&back).unwrap();
        assert_eq!(again.to_algebra().unwrap(), alg);
        let bad: AlgebraJson = serde_json::from_str(r#"{"block_dims":[3],"factors":["M2","M2"]}"#).unwrap();
        assert!(bad.to_algebra().is_err());
    }

    #[test]
    fn state_round_trip() {
        let w = states::werner(0.4).unwrap();
        let text = serde_json::to_string(&state_to_json(&w)).unwrap();
        let back = read_any_state(&text).unwrap();
        assert!(back.trace_distance(&w).unwrap() < 1e-15);
        let pure = serde_json::to_string(&pure_to_json(&states::singlet())).unwrap();
        let s = read_any_state(&pure).unwrap();
        assert!(s.trace_distance(&states::singlet().to_state()).unwrap() < 1e-15);
    }

    #[test]
    fn verdict_round_trip() {
        let v = SeparabilityVerdict::EntangledPpt { min_eigenvalue: -0.125 };
        let j = verdict_to_json(&v);
        assert_eq!(j.tag, "EntangledPPT");
        assert_eq!(verdict_from_json(&j).unwrap(), v);
    }

    #[test]
    fn text_render() {
        let v = serde_json::json!({"value": 2.8284271247461903, "converged": true, "restarts": 16, "p": [0.5, 0.25]});
        assert_eq!(
            render_text(&v),
            "value: 2.828427\nconverged: true\nrestarts: 16\np: [0.5, 0.25]\n"
        );
    }
}
