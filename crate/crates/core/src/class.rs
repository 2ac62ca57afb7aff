//! Conjugacy classes given by a Jordan normal form plus concrete eigenvalues.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::eigen::{self, EigenData};
use crate::error::{ensure, DspError, Result};
use crate::jnf::{JordanNormalForm, Partition};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Additive (`ΣA_j = 0`) or multiplicative (`M_1⋯M_{p+1} = I`) problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Additive,
    Multiplicative,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Additive => "additive",
            Mode::Multiplicative => "multiplicative",
        })
    }
}

/// How eigenvalues are written down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// The eigenvalue itself.
    Values,
    /// A rational `θ` standing for `e^{2πiθ}`.
    Exponents,
}

/// A conjugacy class: JNF shape plus one value per eigenvalue label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawClassSpec", into = "RawClassSpec")]
pub struct ClassSpec {
    jnf: JordanNormalForm,
    repr: Representation,
    labels: BTreeMap<String, Scalar>,
}

#[derive(Serialize, Deserialize)]
struct RawClassSpec {
    jnf: JordanNormalForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<BTreeMap<String, Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponents: Option<BTreeMap<String, Scalar>>,
}

impl TryFrom<RawClassSpec> for ClassSpec {
    type Error = DspError;
    fn try_from(raw: RawClassSpec) -> Result<Self> {
        match (raw.eigenvalues, raw.exponents) {
            (Some(v), None) => ClassSpec::new(raw.jnf, v),
            (None, Some(e)) => ClassSpec::from_exponents(raw.jnf, e),
            _ => Err(DspError::Parse("class needs exactly one of `eigenvalues`, `exponents`".into())),
        }
    }
}

impl From<ClassSpec> for RawClassSpec {
    fn from(c: ClassSpec) -> Self {
        let (eigenvalues, exponents) = match c.repr {
            Representation::Values => (Some(c.labels), None),
            Representation::Exponents => (None, Some(c.labels)),
        };
        RawClassSpec { jnf: c.jnf, eigenvalues, exponents }
    }
}

fn check_labels(jnf: &JordanNormalForm, labels: &BTreeMap<String, Scalar>) -> Result<()> {
    ensure!(
        labels.len() == jnf.groups().len() && jnf.groups().iter().all(|(l, _)| labels.contains_key(l)),
        Precondition,
        "eigenvalue labels do not match the JNF {jnf}"
    );
    Ok(())
}

impl ClassSpec {
    pub fn new(jnf: JordanNormalForm, values: BTreeMap<String, Scalar>) -> Result<Self> {
        check_labels(&jnf, &values)?;
        let mut seen: Vec<&Scalar> = values.values().collect();
        seen.sort();
        seen.dedup();
        ensure!(seen.len() == values.len(), Precondition, "distinct labels share a value");
        Ok(Self { jnf, repr: Representation::Values, labels: values })
    }

    /// Multiplicative class with eigenvalues `e^{2πiθ}`; exponents must be
    /// real and pairwise distinct modulo `Z`.
    pub fn from_exponents(jnf: JordanNormalForm, exponents: BTreeMap<String, Scalar>) -> Result<Self> {
        check_labels(&jnf, &exponents)?;
        ensure!(exponents.values().all(Scalar::is_real), Precondition, "exponents must be real rationals");
        let mut reduced: Vec<Scalar> = exponents.values().map(Scalar::mod_integers).collect();
        reduced.sort();
        reduced.dedup();
        ensure!(reduced.len() == exponents.len(), Precondition, "distinct labels share an eigenvalue");
        Ok(Self { jnf, repr: Representation::Exponents, labels: exponents })
    }

    /// Diagonalizable class with the given eigenvalue list (repeats allowed).
    /// Labels are `λ1, λ2, …` in order of first appearance.
    pub fn diagonal(values: &[Scalar]) -> Self {
        let mut distinct: Vec<(Scalar, usize)> = Vec::new();
        for v in values {
            match distinct.iter_mut().find(|(x, _)| x == v) {
                Some((_, m)) => *m += 1,
                None => distinct.push((v.clone(), 1)),
            }
        }
        let groups = distinct
            .iter()
            .enumerate()
            .map(|(i, (_, m))| (format!("λ{}", i + 1), Partition::new(vec![1; *m])))
            .collect();
        let labels = distinct.into_iter().enumerate().map(|(i, (v, _))| (format!("λ{}", i + 1), v)).collect();
        Self {
            jnf: JordanNormalForm::new(groups).expect("fresh labels"),
            repr: Representation::Values,
            labels,
        }
    }

    /// Class from eigen data (labels `λ1, …` in the data's order).
    pub fn from_eigen_data(data: &EigenData) -> Self {
        let groups = data.iter().enumerate().map(|(i, (_, p))| (format!("λ{}", i + 1), p.clone())).collect();
        let labels = data.iter().enumerate().map(|(i, (v, _))| (format!("λ{}", i + 1), v.clone())).collect();
        Self {
            jnf: JordanNormalForm::new(groups).expect("fresh labels"),
            repr: Representation::Values,
            labels,
        }
    }

    /// Class of a matrix whose eigenvalues are all Gaussian rationals.
    pub fn of_matrix(m: &Matrix) -> Option<Self> {
        eigen::eigen_data(m).map(|d| Self::from_eigen_data(&d))
    }

    pub fn jnf(&self) -> &JordanNormalForm {
        &self.jnf
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Raw label map (values or exponents).
    pub fn labels(&self) -> &BTreeMap<String, Scalar> {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.jnf.size()
    }

    pub fn dimension(&self) -> usize {
        self.jnf.class_dimension()
    }

    pub fn defect_r(&self) -> usize {
        self.jnf.class_defect_r()
    }

    pub fn has_distinct_eigenvalues(&self) -> bool {
        self.jnf.has_distinct_eigenvalues()
    }

    /// Raw entries (values or exponents) repeated with multiplicity, in JNF
    /// group order.
    pub fn slots(&self) -> Vec<Scalar> {
        self.jnf
            .groups()
            .iter()
            .flat_map(|(l, p)| std::iter::repeat_n(self.labels[l].clone(), p.total()))
            .collect()
    }

    /// Exact eigenvalue of a label. Exponent-form labels convert only when
    /// `θ` is a multiple of `1/4`, where `e^{2πiθ}` lies in `Q(i)`.
    pub fn value_of(&self, label: &str) -> Option<Scalar> {
        let raw = self.labels.get(label)?;
        match self.repr {
            Representation::Values => Some(raw.clone()),
            Representation::Exponents => exponent_to_value(raw),
        }
    }

    /// `(eigenvalue, partition)` pairs when every eigenvalue is exact.
    pub fn eigen_data(&self) -> Option<EigenData> {
        self.jnf
            .groups()
            .iter()
            .map(|(l, p)| self.value_of(l).map(|v| (v, p.clone())))
            .collect()
    }

    /// Label → value map when every eigenvalue is exact.
    pub fn values(&self) -> Option<BTreeMap<String, Scalar>> {
        self.labels.keys().map(|l| self.value_of(l).map(|v| (l.clone(), v))).collect()
    }

    /// Jordan matrix of the class.
    pub fn jordan_matrix(&self) -> Result<Matrix> {
        let values = self
            .values()
            .ok_or_else(|| DspError::Precondition("class has eigenvalues outside Q(i)".into()))?;
        self.jnf.jordan_matrix(&values)
    }

    /// Same JNF with every block split into size-one blocks.
    pub fn corresponding_diagonal(&self) -> Self {
        let groups = self
            .jnf
            .groups()
            .iter()
            .map(|(l, p)| (l.clone(), Partition::new(vec![1; p.total()])))
            .collect();
        Self { jnf: JordanNormalForm::new(groups).expect("same labels"), ..self.clone() }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.labels.iter().map(|(l, v)| format!("{l}={v}")).collect();
        let kind = match self.repr {
            Representation::Values => "",
            Representation::Exponents => "exp ",
        };
        write!(f, "{} with {kind}{}", self.jnf, vals.join(", "))
    }
}

/// `e^{2πiθ}` for `θ ∈ ¼Z`.
pub fn exponent_to_value(theta: &Scalar) -> Option<Scalar> {
    if !theta.is_real() {
        return None;
    }
    let quarter = theta.mod_integers().re() * BigRational::from_integer(BigInt::from(4));
    if !quarter.is_integer() {
        return None;
    }
    Some(match quarter.to_integer().try_into().ok()? {
        0i64 => Scalar::one(),
        1 => Scalar::i(),
        2 => -Scalar::one(),
        3 => -Scalar::i(),
        _ => unreachable!(),
    })
}

/// A full problem instance: mode plus `p+1` classes of equal size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClassSet")]
pub struct ClassSet {
    pub mode: Mode,
    pub classes: Vec<ClassSpec>,
}

#[derive(Deserialize)]
struct RawClassSet {
    mode: Mode,
    classes: Vec<ClassSpec>,
}

impl TryFrom<RawClassSet> for ClassSet {
    type Error = DspError;
    fn try_from(raw: RawClassSet) -> Result<Self> {
        ClassSet::new(raw.mode, raw.classes)
    }
}

impl ClassSet {
    pub fn new(mode: Mode, classes: Vec<ClassSpec>) -> Result<Self> {
        ensure!(!classes.is_empty(), Precondition, "no classes given");
        let n = classes[0].size();
        ensure!(
            classes.iter().all(|c| c.size() == n),
            Dimension,
            "classes have different sizes"
        );
        match mode {
            Mode::Additive => ensure!(
                classes.iter().all(|c| c.repr == Representation::Values),
                Precondition,
                "exponent form is multiplicative only"
            ),
            Mode::Multiplicative => {
                ensure!(
                    classes.iter().all(|c| c.repr == classes[0].repr),
                    Precondition,
                    "mixed value and exponent classes"
                );
                ensure!(
                    classes.iter().all(|c| c.repr == Representation::Exponents || c.labels.values().all(|v| !v.is_zero())),
                    Precondition,
                    "multiplicative eigenvalues must be nonzero"
                );
            }
        }
        Ok(Self { mode, classes })
    }

    pub fn additive(classes: Vec<ClassSpec>) -> Result<Self> {
        Self::new(Mode::Additive, classes)
    }

    pub fn size(&self) -> usize {
        self.classes[0].size()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn representation(&self) -> Representation {
        self.classes[0].repr
    }

    /// Index of the last class with `n` distinct eigenvalues.
    pub fn distinct_class(&self) -> Option<usize> {
        self.classes.iter().rposition(ClassSpec::has_distinct_eigenvalues)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qf};

    #[test]
    fn json_round_trip() {
        let text = r#"{"mode":"additive","classes":[
            {"jnf":"{a:[2]}","eigenvalues":{"a":"0"}},
            {"jnf":"{a:[1]; b:[1]}","eigenvalues":{"a":"1","b":"2"}},
            {"jnf":"{a:[1]; b:[1]}","eigenvalues":{"a":"-1","b":"-2"}}]}"#;
        let set: ClassSet = serde_json::from_str(text).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.distinct_class(), Some(2));
        let back: ClassSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn rejects_bad_classes() {
        let jnf: JordanNormalForm = "{a:[1]; b:[1]}".parse().unwrap();
        let same = BTreeMap::from([("a".into(), q(1)), ("b".into(), q(1))]);
        assert!(ClassSpec::new(jnf.clone(), same).is_err());
        let wrong = BTreeMap::from([("a".into(), q(1)), ("c".into(), q(2))]);
        assert!(ClassSpec::new(jnf.clone(), wrong).is_err());
        let exps = BTreeMap::from([("a".into(), qf(1, 3)), ("b".into(), qf(4, 3))]);
        assert!(ClassSpec::from_exponents(jnf, exps).is_err());
    }

    #[test]
    fn exponent_values_on_quarter_points() {
        assert_eq!(exponent_to_value(&qf(1, 4)), Some(Scalar::i()));
        assert_eq!(exponent_to_value(&qf(-1, 2)), Some(q(-1)));
        assert_eq!(exponent_to_value(&qf(1, 3)), None);
    }

    #[test]
    fn diagonal_groups_repeats() {
        let c = ClassSpec::diagonal(&[q(1), q(2), q(1)]);
        assert_eq!(c.jnf().multiplicities(), vec![2, 1]);
        assert_eq!(c.slots(), vec![q(1), q(1), q(2)]);
    }
}
