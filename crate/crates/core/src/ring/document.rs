//! JSON documents for presentations and certificates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{format_rat, parse_rat, Int};
use crate::padic::{BoxCell, Coord, PAdicContext, PadicError, Weight};
use crate::presburger::{parse, parse_term, Formula};

use super::presentation::default_lambda_vars;
use super::{Certificate, Generator, Presentation, Rule, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Json(String),
    #[error("{0}")]
    Padic(#[from] PadicError),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocPresentation {
    prime: u64,
    #[serde(default)]
    param_vars: Vec<String>,
    #[serde(default = "default_domain")]
    param_domain: String,
    generators: Vec<DocGenerator>,
}

fn default_domain() -> String {
    "true".into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocGenerator {
    coeff: String,
    dims: usize,
    coords: Vec<DocCoord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_vars: Option<Vec<String>>,
    lambda_formula: String,
    #[serde(default)]
    weight: Option<DocWeight>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DocCoord {
    Box { center: String, level: u32, ac: i64 },
    Point { point: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocWeight {
    r: i64,
    c: String,
    b: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocStep {
    rule: String,
    note: String,
    before: DocPresentation,
    after: DocPresentation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocCertificate {
    steps: Vec<DocStep>,
}

fn small(v: &Int, what: &str) -> i64 {
    i64::try_from(v).unwrap_or_else(|_| panic!("{what} {v} does not fit the document format"))
}

fn to_doc(x: &Presentation) -> DocPresentation {
    let generators = x
        .generators
        .iter()
        .map(|g| {
            let c = &g.cell;
            let coords = c
                .coords
                .iter()
                .map(|co| match co {
                    Coord::Box { center, level, ac } => {
                        DocCoord::Box { center: format_rat(center), level: *level, ac: small(ac, "ac value") }
                    }
                    Coord::Degenerate(q) => DocCoord::Point { point: format_rat(q) },
                })
                .collect();
            let names = (c.lambda_vars != default_lambda_vars(c.lambda_vars.len())).then(|| c.lambda_vars.clone());
            DocGenerator {
                coeff: format_rat(&g.coeff),
                dims: c.dims(),
                coords,
                lambda_vars: names,
                lambda_formula: c.lambda.to_string(),
                weight: c.weight.as_ref().map(|w| DocWeight {
                    r: small(&w.r, "weight denominator"),
                    c: w.c.to_string(),
                    b: w.b.iter().map(|b| small(b, "weight coefficient")).collect(),
                }),
            }
        })
        .collect();
    DocPresentation {
        prime: small(x.p(), "prime") as u64,
        param_vars: x.param_vars.clone(),
        param_domain: x.param_domain.to_string(),
        generators,
    }
}

fn formula(field: &str, text: &str) -> Result<Formula, DocumentError> {
    parse(text).map_err(|e| invalid(field, e.to_string()))
}

fn from_doc(d: DocPresentation) -> Result<Presentation, DocumentError> {
    let ctx = PAdicContext::new(Int::from(d.prime))?;
    let params: BTreeSet<String> = d.param_vars.iter().cloned().collect();
    if params.len() != d.param_vars.len() {
        return Err(invalid("param_vars", "repeated name"));
    }
    let param_domain = formula("param_domain", &d.param_domain)?;
    if let Some(v) = param_domain.free_vars().into_iter().find(|v| !params.contains(v)) {
        return Err(invalid("param_domain", format!("`{v}` is not a parameter")));
    }
    let mut generators = Vec::new();
    for (i, g) in d.generators.into_iter().enumerate() {
        let field = |f: &str| format!("generators[{i}].{f}");
        let coeff = parse_rat(&g.coeff).ok_or_else(|| invalid(field("coeff"), "expected a/b"))?;
        if g.dims != g.coords.len() {
            return Err(invalid(field("dims"), format!("{} coordinates given", g.coords.len())));
        }
        let mut coords = Vec::new();
        for c in g.coords {
            coords.push(match c {
                DocCoord::Box { center, level, ac } => Coord::Box {
                    center: parse_rat(&center).ok_or_else(|| invalid(field("coords"), "bad centre"))?,
                    level,
                    ac: Int::from(ac),
                },
                DocCoord::Point { point } => {
                    Coord::Degenerate(parse_rat(&point).ok_or_else(|| invalid(field("coords"), "bad point"))?)
                }
            });
        }
        let boxes = coords.iter().filter(|c| matches!(c, Coord::Box { .. })).count();
        let lambda_vars = g.lambda_vars.unwrap_or_else(|| default_lambda_vars(boxes));
        let lambda = formula(&field("lambda_formula"), &g.lambda_formula)?;
        for v in lambda.free_vars() {
            if !params.contains(&v) && !lambda_vars.contains(&v) {
                return Err(invalid(field("lambda_formula"), format!("unknown variable `{v}`")));
            }
        }
        let weight = match g.weight {
            None => None,
            Some(w) => {
                let c = parse_term(&w.c).map_err(|e| invalid(field("weight.c"), e.to_string()))?;
                if let Some(v) = c.vars().find(|v| !params.contains(*v)) {
                    return Err(invalid(field("weight.c"), format!("`{v}` is not a parameter")));
                }
                Some(Weight { r: Int::from(w.r), c, b: w.b.into_iter().map(Int::from).collect() })
            }
        };
        let cell = BoxCell { coords, lambda_vars, lambda, weight };
        cell.validate(&ctx).map_err(|e| invalid(format!("generators[{i}]"), e.to_string()))?;
        generators.push(Generator { coeff, cell });
    }
    Ok(Presentation { ctx, param_vars: d.param_vars, param_domain, generators })
}

pub fn presentation_to_json(x: &Presentation) -> String {
    serde_json::to_string_pretty(&to_doc(x)).expect("documents serialize")
}

pub fn presentation_from_json(text: &str) -> Result<Presentation, DocumentError> {
    let d: DocPresentation = serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))?;
    from_doc(d)
}

pub fn certificate_to_json(c: &Certificate) -> String {
    let steps = c
        .steps
        .iter()
        .map(|s| DocStep {
            rule: s.rule.to_string(),
            note: s.note.clone(),
            before: to_doc(&s.before),
            after: to_doc(&s.after),
        })
        .collect();
    serde_json::to_string_pretty(&DocCertificate { steps }).expect("documents serialize")
}

pub fn certificate_from_json(text: &str) -> Result<Certificate, DocumentError> {
    let d: DocCertificate = serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))?;
    let mut steps = Vec::new();
    for (i, s) in d.steps.into_iter().enumerate() {
        let rule: Rule = s.rule.parse().map_err(|e: String| invalid(format!("steps[{i}].rule"), e))?;
        steps.push(Step { rule, note: s.note, before: from_doc(s.before)?, after: from_doc(s.after)? });
    }
    Ok(Certificate { steps })
}
