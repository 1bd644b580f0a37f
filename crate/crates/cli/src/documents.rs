//! JSON interchange documents. Complex numbers are `[re, im]` pairs, angles
//! are radians, and a divergent `τ∞` is the string `"inf"`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use trframe::angular::{to_self_conjugate, AngularLabel, Basis, PhaseConvention, PureState, SelfConjLabel, Sign};
use trframe::protocols::TargetEnsemble;
use trframe::trio::DensityOperator;
use trframe::{CMatrix, CVector, RMatrix, C64};

use crate::error::CliError;

/// Basis tag of a [`StateDocument`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Angular,
    SelfConjugate,
}

/// A basis label. Angular labels omit `eps`; self-conjugate labels carry it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    pub mu: u32,
    pub ell: u32,
    pub m: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Sign>,
}

/// A pure state. For the self-conjugate basis `labels` may be omitted, in
/// which case the standard ladder `|1 0 0 +⟩, |1 1 0 +⟩, |1 1 1 +⟩, …` is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub basis: BasisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<PhaseConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<LabelRecord>>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDocument {
    pub fn from_state(psi: &PureState, convention: Option<PhaseConvention>) -> Option<Self> {
        let (basis, labels) = match psi.basis() {
            Basis::Angular(ls) => (
                BasisKind::Angular,
                ls.iter().map(|l| LabelRecord { mu: l.mu, ell: l.ell, m: l.m, eps: None }).collect(),
            ),
            Basis::SelfConjugate(ls) => (
                BasisKind::SelfConjugate,
                ls.iter()
                    .map(|l| LabelRecord { mu: l.mu, ell: l.ell, m: l.m as i32, eps: Some(l.eps) })
                    .collect(),
            ),
            Basis::Product(..) => return None,
        };
        Some(StateDocument {
            basis,
            convention,
            labels: Some(labels),
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        })
    }

    /// Builds the validated state, normalized to `tol`.
    pub fn to_state(&self, tol: f64) -> Result<PureState, CliError> {
        let amp = CVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)));
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::Validation("amplitudes must be finite".into()));
        }
        if amp.is_empty() {
            return Err(CliError::Validation("state has no amplitudes".into()));
        }
        let basis = match (self.basis, &self.labels) {
            (BasisKind::SelfConjugate, None) => Basis::SelfConjugate(SelfConjLabel::ladder(amp.len())),
            (BasisKind::Angular, None) => {
                return Err(CliError::Validation("angular states need explicit labels".into()));
            }
            (kind, Some(labels)) => {
                if labels.len() != amp.len() {
                    return Err(CliError::Validation(format!(
                        "{} labels but {} amplitudes",
                        labels.len(),
                        amp.len()
                    )));
                }
                match kind {
                    BasisKind::Angular => Basis::Angular(
                        labels
                            .iter()
                            .map(|l| match l.eps {
                                Some(_) => Err(CliError::Validation(format!("angular label {l:?} has an eps field"))),
                                None => Ok(AngularLabel::new(l.mu, l.ell, l.m)?),
                            })
                            .collect::<Result<_, _>>()?,
                    ),
                    BasisKind::SelfConjugate => Basis::SelfConjugate(
                        labels
                            .iter()
                            .map(|l| {
                                let eps = l
                                    .eps
                                    .ok_or_else(|| CliError::Validation(format!("self-conjugate label {l:?} needs eps")))?;
                                let m = u32::try_from(l.m).map_err(|_| {
                                    CliError::Validation(format!("self-conjugate label {l:?} needs m ≥ 0"))
                                })?;
                                Ok(SelfConjLabel::new(l.mu, l.ell, m, eps)?)
                            })
                            .collect::<Result<_, CliError>>()?,
                    ),
                }
            }
        };
        Ok(PureState::with_tolerance(basis, amp, tol)?)
    }

    /// The state in the self-conjugate basis, converting angular input with
    /// `conv`.
    pub fn to_self_conjugate_state(&self, tol: f64, conv: PhaseConvention) -> Result<PureState, CliError> {
        let psi = self.to_state(tol)?;
        Ok(match psi.basis() {
            Basis::Angular(_) => to_self_conjugate(&psi, conv)?,
            _ => psi,
        })
    }
}

/// `{"items": [{"p": 0.5, "gamma": 0.0}, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    pub items: Vec<EnsembleItem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleItem {
    pub p: f64,
    pub gamma: f64,
}

impl EnsembleDocument {
    pub fn to_ensemble(&self) -> Result<TargetEnsemble, CliError> {
        let pairs: Vec<(f64, f64)> = self.items.iter().map(|i| (i.p, i.gamma)).collect();
        Ok(TargetEnsemble::from_angles(&pairs)?)
    }
}

/// `{"matrix": [[[re, im], …], …]}`, a density operator in the
/// self-conjugate basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDocument {
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityDocument {
    pub fn to_density(&self) -> Result<DensityOperator, CliError> {
        let n = self.matrix.len();
        if n == 0 || self.matrix.iter().any(|row| row.len() != n) {
            return Err(CliError::Validation("density matrix must be square and non-empty".into()));
        }
        if self.matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Validation("density matrix entries must be finite".into()));
        }
        let m = CMatrix::from_fn(n, n, |r, c| C64::new(self.matrix[r][c][0], self.matrix[r][c][1]));
        Ok(DensityOperator::new(m)?)
    }
}

/// Input of `average`: either a density matrix or a pure state.
#[derive(Clone, Debug, PartialEq)]
pub enum AverageInput {
    Density(DensityDocument),
    State(StateDocument),
}

impl AverageInput {
    pub fn to_density(&self, tol: f64, conv: PhaseConvention) -> Result<DensityOperator, CliError> {
        match self {
            AverageInput::Density(d) => d.to_density(),
            AverageInput::State(s) => {
                let psi = s.to_self_conjugate_state(tol, conv)?;
                let v = psi.amplitudes() / C64::from(psi.amplitudes().norm());
                Ok(DensityOperator::pure(&v)?)
            }
        }
    }
}

/// Echo of the invoked command and its resolved arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEcho {
    pub name: String,
    pub arguments: Map<String, Value>,
}

/// Output of every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ResultDocument {
    pub command: CommandEcho,
    /// SHA-256 of the command echo and the raw input bytes.
    pub inputs_digest: String,
    pub outputs: Value,
    pub tool_version: String,
    pub seed: u64,
}

impl ResultDocument {
    pub fn new(command: CommandEcho, input: Option<&[u8]>, outputs: Value, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&command).expect("command echo serializes"));
        h.update([0u8]);
        if let Some(bytes) = input {
            h.update(bytes);
        }
        let inputs_digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        ResultDocument { command, inputs_digest, outputs, tool_version: tool_version(), seed }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }
}

pub fn tool_version() -> String {
    format!("trframe {}", env!("CARGO_PKG_VERSION"))
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn parse_state_document(text: &str) -> Result<StateDocument, CliError> {
    parse_json("state document", text)
}

pub fn parse_ensemble_document(text: &str) -> Result<EnsembleDocument, CliError> {
    parse_json("ensemble document", text)
}

pub fn parse_result_document(text: &str) -> Result<ResultDocument, CliError> {
    parse_json("result document", text)
}

/// Dispatches on the presence of a `matrix` key.
pub fn parse_average_input(text: &str) -> Result<AverageInput, CliError> {
    let v: Value = parse_json("average input", text)?;
    if v.get("matrix").is_some() {
        Ok(AverageInput::Density(
            serde_json::from_value(v).map_err(|e| CliError::Parse(format!("density document: {e}")))?,
        ))
    } else {
        Ok(AverageInput::State(
            serde_json::from_value(v).map_err(|e| CliError::Parse(format!("state document: {e}")))?,
        ))
    }
}

pub fn real_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn complex_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_document_defaults_to_ladder() {
        let doc = parse_state_document(r#"{"basis": "self-conjugate", "amplitudes": [[0.6, 0], [0, 0.8]]}"#).unwrap();
        let psi = doc.to_state(1e-9).unwrap();
        assert_eq!(psi.self_conjugate_labels().unwrap(), &SelfConjLabel::ladder(2)[..]);
        let back = StateDocument::from_state(&psi, None).unwrap();
        assert_eq!(back.to_state(1e-9).unwrap(), psi);
    }

    #[test]
    fn state_document_errors() {
        assert!(matches!(parse_state_document("{"), Err(CliError::Parse(_))));
        assert!(matches!(
            parse_state_document(r#"{"basis": "angular", "amplitudes": [], "extra": 1}"#),
            Err(CliError::Parse(_))
        ));
        let unnormalized = parse_state_document(r#"{"basis": "self-conjugate", "amplitudes": [[1, 0], [1, 0]]}"#).unwrap();
        let err = unnormalized.to_state(1e-9).unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("defect")), "{err}");
        let mismatch = parse_state_document(
            r#"{"basis": "angular", "labels": [{"mu": 1, "ell": 0, "m": 0}], "amplitudes": [[0.6, 0], [0.8, 0]]}"#,
        )
        .unwrap();
        assert!(matches!(mismatch.to_state(1e-9), Err(CliError::Validation(_))));
        let missing_eps = parse_state_document(
            r#"{"basis": "self-conjugate", "labels": [{"mu": 1, "ell": 0, "m": 0}], "amplitudes": [[1, 0]]}"#,
        )
        .unwrap();
        assert!(matches!(missing_eps.to_state(1e-9), Err(CliError::Validation(_))));
    }

    #[test]
    fn average_input_dispatch() {
        assert!(matches!(parse_average_input(r#"{"matrix": [[[1, 0]]]}"#), Ok(AverageInput::Density(_))));
        assert!(matches!(
            parse_average_input(r#"{"basis": "self-conjugate", "amplitudes": [[1, 0]]}"#),
            Ok(AverageInput::State(_))
        ));
        assert!(parse_average_input("[]").is_err());
    }

    #[test]
    fn result_document_round_trip() {
        let mut args = Map::new();
        args.insert("theta".into(), Value::from(std::f64::consts::FRAC_PI_3));
        let doc = ResultDocument::new(
            CommandEcho { name: "tau".into(), arguments: args },
            Some(b"{}"),
            serde_json::json!({"tau": 0.1 + 0.2, "tauInf": "inf"}),
            7,
        );
        let text = doc.to_json();
        let back = parse_result_document(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
        assert_eq!(doc.inputs_digest.len(), 64);
    }
}
