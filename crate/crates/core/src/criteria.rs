//! Solvability verdicts from the dimension conditions (α) and (β).

use serde::{Deserialize, Serialize};

use crate::class::{ClassSet, ClassSpec};
use crate::error::{ensure, Result};
use crate::genericity::{check_neutrality, find_relations, EigenvalueSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Solvable,
    Unsolvable,
    NecessaryConditionsHold,
    NecessaryConditionsFail,
    Inapplicable,
}

/// Which fact a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Sum of traces (product of determinants) condition.
    Neutrality,
    /// `Σ d_j ≥ 2n² − 2`.
    Alpha,
    /// `Σ_{i≠j} r_i ≥ n` for every `j`.
    Beta,
    Genericity,
    /// Some class has `n` distinct eigenvalues.
    DistinctEigenvalueClass,
    /// Generic eigenvalues with a distinct-eigenvalue class: (α) ∧ (β)
    /// decide existence of irreducible tuples.
    GenericCriterion,
    /// A distinct-eigenvalue class: (α) ∧ (β) decide existence of tuples
    /// with trivial centralizer.
    WeakCriterion,
    /// (α) ∧ (β) are necessary, sufficiency is not decided here.
    NecessaryOnly,
    /// Three nonzero nilpotent 2×2 classes satisfy (α) and (β) without a
    /// trivial-centralizer solution, so no criterion applies.
    NilpotentCounterexample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reason {
    pub rule: Rule,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub reasons: Vec<Reason>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub holds: bool,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaCheck {
    pub holds: bool,
    pub margins: Vec<i64>,
}

fn common_size(classes: &[ClassSpec]) -> Result<usize> {
    ensure!(!classes.is_empty(), Precondition, "no classes");
    let n = classes[0].size();
    ensure!(classes.iter().all(|c| c.size() == n), Dimension, "classes have different sizes");
    Ok(n)
}

pub fn check_alpha(classes: &[ClassSpec]) -> Result<AlphaCheck> {
    let n = common_size(classes)?;
    let lhs = classes.iter().map(ClassSpec::dimension).sum();
    let rhs = (2 * n * n).saturating_sub(2);
    Ok(AlphaCheck { holds: lhs >= rhs, lhs, rhs })
}

pub fn check_beta(classes: &[ClassSpec]) -> Result<BetaCheck> {
    let n = common_size(classes)? as i64;
    let r: Vec<i64> = classes.iter().map(|c| c.defect_r() as i64).collect();
    let total: i64 = r.iter().sum();
    let margins: Vec<i64> = r.iter().map(|rj| total - rj - n).collect();
    Ok(BetaCheck { holds: margins.iter().all(|&m| m >= 0), margins })
}

struct Basics {
    reasons: Vec<Reason>,
    neutral: bool,
    alpha_beta: bool,
    distinct: Option<usize>,
}

fn basics(set: &ClassSet) -> Result<Basics> {
    let sys = EigenvalueSystem::from_classes(set);
    let neutral = check_neutrality(&sys);
    let alpha = check_alpha(&set.classes)?;
    let beta = check_beta(&set.classes)?;
    let distinct = set.distinct_class();
    let reasons = vec![
        Reason {
            rule: Rule::Neutrality,
            holds: neutral,
            detail: if neutral { "eigenvalue total is neutral".into() } else { "eigenvalue total is not neutral".into() },
        },
        Reason { rule: Rule::Alpha, holds: alpha.holds, detail: format!("{} >= {}", alpha.lhs, alpha.rhs) },
        Reason { rule: Rule::Beta, holds: beta.holds, detail: format!("margins {:?}", beta.margins) },
        Reason {
            rule: Rule::DistinctEigenvalueClass,
            holds: distinct.is_some(),
            detail: match distinct {
                Some(j) => format!("class {j}"),
                None => "none".into(),
            },
        },
    ];
    Ok(Basics { reasons, neutral, alpha_beta: alpha.holds && beta.holds, distinct })
}

fn refused_by_neutrality(mut b: Basics) -> Verdict {
    b.reasons.retain(|r| r.rule == Rule::Neutrality);
    Verdict { status: Status::Unsolvable, reasons: b.reasons }
}

/// Verdict on existence of irreducible tuples.
pub fn dsp_verdict(set: &ClassSet) -> Result<Verdict> {
    let b = basics(set)?;
    if !b.neutral {
        return Ok(refused_by_neutrality(b));
    }
    let relations = find_relations(&EigenvalueSystem::from_classes(set), false);
    let generic = relations.as_ref().map(Vec::is_empty).ok();
    let mut reasons = b.reasons;
    reasons.push(Reason {
        rule: Rule::Genericity,
        holds: generic == Some(true),
        detail: match &relations {
            Ok(r) if r.is_empty() => "no non-genericity relation".into(),
            Ok(r) => format!("{} non-genericity relation(s)", r.len()),
            Err(e) => format!("not decided: {e}"),
        },
    });
    let status = if generic == Some(true) && b.distinct.is_some() {
        reasons.push(Reason { rule: Rule::GenericCriterion, holds: true, detail: "decides the instance".into() });
        if b.alpha_beta {
            Status::Solvable
        } else {
            Status::Unsolvable
        }
    } else {
        reasons.push(Reason { rule: Rule::NecessaryOnly, holds: b.alpha_beta, detail: "sufficiency open".into() });
        if b.alpha_beta {
            Status::NecessaryConditionsHold
        } else {
            Status::NecessaryConditionsFail
        }
    };
    Ok(Verdict { status, reasons })
}

/// Verdict on existence of tuples with trivial centralizer.
pub fn weak_dsp_verdict(set: &ClassSet) -> Result<Verdict> {
    let b = basics(set)?;
    if !b.neutral {
        return Ok(refused_by_neutrality(b));
    }
    let mut reasons = b.reasons;
    let status = if b.distinct.is_some() {
        reasons.push(Reason { rule: Rule::WeakCriterion, holds: true, detail: "decides the instance".into() });
        if b.alpha_beta {
            Status::Solvable
        } else {
            Status::Unsolvable
        }
    } else {
        reasons.push(Reason {
            rule: Rule::NilpotentCounterexample,
            holds: false,
            detail: "no class with distinct eigenvalues; (α) and (β) are not sufficient here".into(),
        });
        Status::Inapplicable
    };
    Ok(Verdict { status, reasons })
}
