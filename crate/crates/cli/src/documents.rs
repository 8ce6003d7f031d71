//! JSON documents read and written by the command line.

use std::collections::BTreeMap;

use noether_core::actions::ActionKind;
use noether_core::frames::{InvariantSequence, LatticePath};
use noether_core::variational::{InvariantLagrangian, Monomial};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDocument {
    pub action: String,
    pub offset: i64,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Vec<f64>>>,
}

impl PathDocument {
    pub fn kind(&self) -> Result<ActionKind, CliError> {
        self.action.parse().map_err(|_| CliError::Parse(format!("field `action`: unknown action {:?}", self.action)))
    }

    pub fn to_path(&self) -> Result<(ActionKind, LatticePath<f64>), CliError> {
        let kind = self.kind()?;
        let dim = kind.point_dim();
        check_rows("points", &self.points, dim)?;
        let mut path = LatticePath::new(self.offset, dim, &self.points).map_err(CliError::from)?;
        if let Some(v) = &self.velocities {
            check_rows("velocities", v, dim)?;
            if v.len() != self.points.len() {
                return Err(CliError::Parse(format!(
                    "field `velocities`: expected {} rows to match `points`, found {}",
                    self.points.len(),
                    v.len()
                )));
            }
            path = path.with_flat_velocities(v.concat()).map_err(CliError::from)?;
        }
        Ok((kind, path))
    }

    pub fn from_path(kind: ActionKind, path: &LatticePath<f64>) -> Self {
        let rows = |flat: &[f64]| flat.chunks(path.dim()).map(<[f64]>::to_vec).collect();
        PathDocument {
            action: kind.tag().to_string(),
            offset: path.offset(),
            points: rows(path.flat_points()),
            velocities: path.flat_velocities().map(rows),
        }
    }
}

fn check_rows(field: &str, rows: &[Vec<f64>], dim: usize) -> Result<(), CliError> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(CliError::Parse(format!("field `{field}[{i}]`: expected {dim} coordinates, found {}", r.len())));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub coeff: f64,
    #[serde(default)]
    pub kappa: BTreeMap<usize, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<BTreeMap<usize, u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianDocument {
    pub terms: Vec<TermDocument>,
}

impl LagrangianDocument {
    pub fn to_lagrangian(&self, kind: ActionKind) -> Result<InvariantLagrangian, CliError> {
        let mut monomials = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let mut m = Monomial::new(t.coeff);
            for (&s, &e) in &t.kappa {
                m = m.kappa(s, e);
            }
            if let Some(tau) = &t.tau {
                if kind.tau_points().is_none() && !tau.is_empty() {
                    return Err(CliError::Parse(format!("field `terms[{i}].tau`: the {kind} action has no tau invariant")));
                }
                for (&s, &e) in tau {
                    m = m.tau(s, e);
                }
            }
            monomials.push(m);
        }
        Ok(InvariantLagrangian::polynomial(monomials))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsDocument {
    pub offset: i64,
    pub kappa: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
}

impl InvariantsDocument {
    pub fn from_sequence(inv: &InvariantSequence<f64>) -> Self {
        InvariantsDocument { offset: inv.offset, kappa: inv.kappa.clone(), tau: inv.tau.clone() }
    }

    pub fn to_sequence(&self, kind: ActionKind) -> Result<InvariantSequence<f64>, CliError> {
        match (kind.tau_points(), &self.tau) {
            (Some(_), None) => return Err(CliError::Parse(format!("field `tau`: required for the {kind} action"))),
            (None, Some(_)) => return Err(CliError::Parse(format!("field `tau`: the {kind} action has no tau invariant"))),
            _ => {}
        }
        Ok(InvariantSequence::new(self.offset, self.kappa.clone(), self.tau.clone()))
    }
}

/// Conservation data for `reconstruct`: `k`, then either per-site `v` or a
/// Lagrangian to compute it from, and the integration constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsDocument {
    pub k: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_offset: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<LagrangianDocument>,
    pub c0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
}

/// Parse with a diagnostic naming the file, line and column.
pub fn parse<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::to_string;

    #[test]
    fn path_document_round_trips() {
        let text = r#"{"action":"sl2-linear","offset":-2,"points":[[1,0.1],[2,4]],"velocities":[[0,1],[1e-300,-0.5]]}"#;
        let doc: PathDocument = parse("path", text).unwrap();
        assert_eq!(parse::<PathDocument>("path", &to_string(&doc)).unwrap(), doc);
        let (kind, path) = doc.to_path().unwrap();
        assert_eq!(PathDocument::from_path(kind, &path), doc);
    }

    #[test]
    fn shape_errors_name_the_field() {
        let doc: PathDocument = parse("path", r#"{"action":"sa2","offset":0,"points":[[1,2],[3]]}"#).unwrap();
        assert_eq!(doc.to_path().unwrap_err(), CliError::Parse("field `points[1]`: expected 2 coordinates, found 1".into()));
        let err = parse::<PathDocument>("p.json", "{\n\"action\": 3}").unwrap_err();
        assert!(matches!(err, CliError::Parse(m) if m.contains("line 2")));
    }

    #[test]
    fn lagrangian_document_round_trips() {
        let text = r#"{"terms":[{"coeff":1,"kappa":{"0":1}},{"coeff":0.5,"kappa":{},"tau":{"0":2,"1":1}}]}"#;
        let doc: LagrangianDocument = parse("l", text).unwrap();
        assert_eq!(parse::<LagrangianDocument>("l", &to_string(&doc)).unwrap(), doc);
        assert!(doc.to_lagrangian(ActionKind::Sl2Linear).is_ok());
        assert!(doc.to_lagrangian(ActionKind::Sl2Projective).is_err());
        assert!(parse::<LagrangianDocument>("l", r#"{"terms":[{"coeff":1,"kappa":{"0":-1}}]}"#).is_err());
    }

    #[test]
    fn invariants_document_checks_tau() {
        let doc = InvariantsDocument { offset: 0, kappa: vec![1.0], tau: None };
        assert!(doc.to_sequence(ActionKind::Sl2Projective).is_ok());
        assert!(doc.to_sequence(ActionKind::Sa2Linear).is_err());
        assert_eq!(parse::<InvariantsDocument>("i", &to_string(&doc)).unwrap(), doc);
    }
}
