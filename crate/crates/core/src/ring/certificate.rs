use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::padic::ZeroTest;

use super::measure::MeasureCache;
use super::Presentation;

/// Rule tags a certificate step may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[allow(non_camel_case_types)]
pub enum Rule {
    R1,
    R2,
    R3_translate,
    R3_coordperm,
    R3_shear,
    R3_scale,
    R4,
    L_Delta,
    L_acLevel,
    L_product,
    P_reparam,
    GeomSum,
    CellSplit,
}

pub const ALL_RULES: [Rule; 13] = [
    Rule::R1,
    Rule::R2,
    Rule::R3_translate,
    Rule::R3_coordperm,
    Rule::R3_shear,
    Rule::R3_scale,
    Rule::R4,
    Rule::L_Delta,
    Rule::L_acLevel,
    Rule::L_product,
    Rule::P_reparam,
    Rule::GeomSum,
    Rule::CellSplit,
];

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Rule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ALL_RULES.iter().copied().find(|r| r.to_string() == s).ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub before: Presentation,
    pub after: Presentation,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Certificate {
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("step {step}: {reason}")]
pub struct CertificateError {
    pub step: usize,
    pub reason: String,
}

impl Certificate {
    pub fn first(&self) -> Option<&Presentation> {
        self.steps.first().map(|s| &s.before)
    }

    pub fn last(&self) -> Option<&Presentation> {
        self.steps.last().map(|s| &s.after)
    }
}

/// Replays every step: consecutive steps must chain, and each step must
/// leave the measure function unchanged.
pub fn verify_certificate(cert: &Certificate) -> Result<(), CertificateError> {
    let mut cache = MeasureCache::default();
    for (i, st) in cert.steps.iter().enumerate() {
        let fail = |reason: String| CertificateError { step: i, reason };
        if i > 0 && cert.steps[i - 1].after != st.before {
            return Err(fail("does not start where the previous step ended".into()));
        }
        let diff = st.before.sub(&st.after).map_err(|e| fail(e.to_string()))?;
        let mf = cache.measure(&diff).map_err(|e| fail(e.to_string()))?;
        if let ZeroTest::NonZero(w) = mf.is_zero() {
            let at: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
            return Err(fail(format!("{} changes the measure at ({})", st.rule, at.join(","))));
        }
    }
    Ok(())
}
