//! Uniform carrier for every audited inequality.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Relative slack granted to `lhs <= rhs` comparisons.
pub const AUDIT_REL_TOL: f64 = 1e-9;

/// Name prefix for measurements that are reported but are not theorems.
/// Their outcome never counts as a violation.
pub const INFO_PREFIX: &str = "info:";

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub name: String,
    #[serde(with = "nullable_f64")]
    pub lhs: f64,
    #[serde(with = "nullable_f64")]
    pub rhs: f64,
    pub preconditions_met: bool,
    pub holds: bool,
    #[serde(with = "nullable_f64")]
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
    Informational,
}

impl BoundAudit {
    pub fn check(name: impl Into<String>, lhs: f64, rhs: f64, preconditions_met: bool) -> Self {
        let holds = preconditions_met && lhs <= rhs + AUDIT_REL_TOL * rhs.abs().max(1.0);
        BoundAudit {
            name: name.into(),
            lhs,
            rhs,
            preconditions_met,
            holds,
            slack: rhs - lhs,
        }
    }

    pub fn not_applicable(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::check(name, lhs, rhs, false)
    }

    /// An exact check `lhs <= rhs` with no slack beyond `abs_tol`.
    pub fn check_abs(name: impl Into<String>, lhs: f64, rhs: f64, abs_tol: f64, pre: bool) -> Self {
        let holds = pre && lhs <= rhs + abs_tol;
        BoundAudit {
            name: name.into(),
            lhs,
            rhs,
            preconditions_met: pre,
            holds,
            slack: rhs - lhs,
        }
    }

    pub fn is_informational(&self) -> bool {
        self.name.starts_with(INFO_PREFIX)
    }

    pub fn verdict(&self) -> Verdict {
        if self.is_informational() {
            Verdict::Informational
        } else if !self.preconditions_met {
            Verdict::NotApplicable
        } else if self.holds {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

/// Per-name outcome counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub applicable: usize,
    pub holds: usize,
    pub violated: usize,
    pub not_applicable: usize,
    pub informational: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub by_name: BTreeMap<String, AuditCounts>,
}

impl AuditSummary {
    pub fn from_audits<'a>(audits: impl IntoIterator<Item = &'a BoundAudit>) -> Self {
        let mut by_name: BTreeMap<String, AuditCounts> = BTreeMap::new();
        for a in audits {
            let c = by_name.entry(a.name.clone()).or_default();
            c.informational = a.is_informational();
            if a.preconditions_met {
                c.applicable += 1;
                if a.holds {
                    c.holds += 1;
                } else {
                    c.violated += 1;
                }
            } else {
                c.not_applicable += 1;
            }
        }
        AuditSummary { by_name }
    }

    /// Violations of theorem-backed audits.
    pub fn violations(&self) -> usize {
        self.by_name
            .values()
            .filter(|c| !c.informational)
            .map(|c| c.violated)
            .sum()
    }

    pub fn applicable(&self) -> usize {
        self.by_name
            .values()
            .filter(|c| !c.informational)
            .map(|c| c.applicable)
            .sum()
    }
}

/// Serializes non-finite floats as `null` and reads `null` back as NaN.
mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert_eq!(
            BoundAudit::check("x", 1.0, 2.0, true).verdict(),
            Verdict::Holds
        );
        assert_eq!(
            BoundAudit::check("x", 3.0, 2.0, true).verdict(),
            Verdict::Violated
        );
        assert_eq!(
            BoundAudit::not_applicable("x", 1.0, 2.0).verdict(),
            Verdict::NotApplicable
        );
        assert!(!BoundAudit::not_applicable("x", 1.0, 2.0).holds);
        assert_eq!(
            BoundAudit::check("info:x", 3.0, 2.0, true).verdict(),
            Verdict::Informational
        );
        // relative slack
        assert!(BoundAudit::check("x", 1.0 + 1e-10, 1.0, true).holds);
    }

    #[test]
    fn json_schema_and_non_finite() {
        let a = BoundAudit::check("gap-11", 0.5, f64::INFINITY, false);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(
            s,
            r#"{"name":"gap-11","lhs":0.5,"rhs":null,"preconditions_met":false,"holds":false,"slack":null}"#
        );
        let back: BoundAudit = serde_json::from_str(&s).unwrap();
        assert!(back.rhs.is_nan());
    }

    #[test]
    fn summary_excludes_informational_violations() {
        let audits = vec![
            BoundAudit::check("a", 1.0, 2.0, true),
            BoundAudit::check("a", 1.0, 2.0, false),
            BoundAudit::check("info:b", 3.0, 2.0, true),
        ];
        let s = AuditSummary::from_audits(&audits);
        assert_eq!(s.violations(), 0);
        assert_eq!(s.applicable(), 1);
        assert_eq!(s.by_name["a"].not_applicable, 1);
        assert_eq!(s.by_name["info:b"].violated, 1);
    }
}
