//! The central data model: a fan presented by its ray generators together
//! with the full set of primitive relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// Name of a ray generator, unique within a presentation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

/// A primitive relation `u_1 + ... + u_l = a_1 v_1 + ... + a_m v_m`.
/// The left side is the primitive collection (unit coefficients); an empty
/// right side encodes `sigma(P) = {0}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveRelation {
    pub lhs: BTreeSet<Label>,
    pub rhs: BTreeMap<Label, BigInt>,
}

impl PrimitiveRelation {
    pub fn new<L, R>(lhs: L, rhs: R) -> Self
    where
        L: IntoIterator,
        L::Item: Into<Label>,
        R: IntoIterator,
        R::Item: Into<(Label, BigInt)>,
    {
        PrimitiveRelation {
            lhs: lhs.into_iter().map(Into::into).collect(),
            rhs: rhs.into_iter().map(Into::into).collect(),
        }
    }

    /// Relation with every right-hand coefficient equal to one.
    pub fn unit(lhs: &[&str], rhs: &[&str]) -> Self {
        PrimitiveRelation {
            lhs: lhs.iter().map(|&s| Label::from(s)).collect(),
            rhs: rhs
                .iter()
                .map(|&s| (Label::from(s), BigInt::one()))
                .collect(),
        }
    }

    /// The degree `l - (a_1 + ... + a_m)`; positive for all relations
    /// exactly when the variety is Fano.
    pub fn degree(&self) -> BigInt {
        let l = BigInt::from(self.lhs.len());
        let a: BigInt = self.rhs.values().sum();
        l - a
    }

    /// True when every right-hand coefficient is one.
    pub fn unit_rhs(&self) -> bool {
        self.rhs.values().all(|a| a.is_one())
    }
}

impl fmt::Display for PrimitiveRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.lhs.iter().map(|l| l.0.clone()).collect();
        write!(f, "{}=", lhs.join("+"))?;
        if self.rhs.is_empty() {
            return write!(f, "0");
        }
        let rhs: Vec<String> = self
            .rhs
            .iter()
            .map(|(l, a)| {
                if a.is_one() {
                    l.0.clone()
                } else {
                    format!("{}{}", a, l.0)
                }
            })
            .collect();
        write!(f, "{}", rhs.join("+"))
    }
}

/// A fan given by its generators and the complete set of primitive relations.
///
/// Relation order is presentation order for human-readable traces; equality
/// compares generator maps and relation *sets*.
#[derive(Clone, Debug)]
pub struct FanPresentation {
    pub dim: usize,
    pub generators: BTreeMap<Label, LatticePoint>,
    pub relations: Vec<PrimitiveRelation>,
}

impl PartialEq for FanPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.generators == other.generators
            && self.relation_set() == other.relation_set()
    }
}

impl Eq for FanPresentation {}

impl FanPresentation {
    pub fn new(
        dim: usize,
        generators: BTreeMap<Label, LatticePoint>,
        relations: Vec<PrimitiveRelation>,
    ) -> Self {
        FanPresentation {
            dim,
            generators,
            relations,
        }
    }

    pub fn relation_set(&self) -> BTreeSet<&PrimitiveRelation> {
        self.relations.iter().collect()
    }

    pub fn labels(&self) -> Vec<&Label> {
        self.generators.keys().collect()
    }

    /// Picard number `|G| - d` of the associated smooth complete variety.
    pub fn picard_number(&self) -> isize {
        self.generators.len() as isize - self.dim as isize
    }

    pub fn find_relation_by_lhs(&self, lhs: &BTreeSet<Label>) -> Option<&PrimitiveRelation> {
        self.relations.iter().find(|r| &r.lhs == lhs)
    }

    /// Exact vector sum of a set of generators.
    pub fn sum_of(&self, labels: &BTreeSet<Label>) -> Result<LatticePoint> {
        let mut acc = LatticePoint::zero(self.dim);
        for l in labels {
            let g = self
                .generators
                .get(l)
                .ok_or_else(|| Error::UnknownLabel(l.0.clone()))?;
            acc = acc.add(g);
        }
        Ok(acc)
    }

    /// Checks every structural invariant. The returned list is empty exactly
    /// when the presentation is well formed; each entry names the offending
    /// relation and the violated clause.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (label, point) in &self.generators {
            if point.dim() != self.dim {
                violations.push(format!(
                    "generator {} has length {}, expected {}",
                    label,
                    point.dim(),
                    self.dim
                ));
            }
        }
        for rel in &self.relations {
            let name = rel.to_string();
            if rel.lhs.is_empty() {
                violations.push(format!("{name}: empty collection"));
                continue;
            }
            if rel.lhs.iter().any(|l| rel.rhs.contains_key(l)) {
                violations.push(format!("{name}: lhs and rhs not disjoint"));
            }
            for l in rel.lhs.iter().chain(rel.rhs.keys()) {
                if !self.generators.contains_key(l) {
                    violations.push(format!("{name}: unknown label {l}"));
                }
            }
            for (l, a) in &rel.rhs {
                if !a.is_positive() {
                    violations.push(format!("{name}: nonpositive coefficient on {l}"));
                }
            }
        }
        // Antichain: no collection contains another.
        for (i, a) in self.relations.iter().enumerate() {
            for b in self.relations.iter().skip(i + 1) {
                if a.lhs.is_subset(&b.lhs) || b.lhs.is_subset(&a.lhs) {
                    violations.push(format!("antichain violated: {} vs {}", a, b));
                }
            }
        }
        // sigma(P) must be a cone, so no rhs key-set may contain a collection.
        for rel in &self.relations {
            let rhs_keys: BTreeSet<&Label> = rel.rhs.keys().collect();
            for other in &self.relations {
                if other.lhs.iter().all(|l| rhs_keys.contains(l)) {
                    violations.push(format!("{}: rhs contains the collection of {}", rel, other));
                }
            }
        }
        // Numeric balance under the coordinates.
        for rel in &self.relations {
            if rel
                .lhs
                .iter()
                .chain(rel.rhs.keys())
                .any(|l| !self.generators.contains_key(l))
            {
                continue; // already reported above
            }
            let lhs_sum = self.sum_of(&rel.lhs).expect("labels checked");
            let mut rhs_sum = LatticePoint::zero(self.dim);
            for (l, a) in &rel.rhs {
                rhs_sum = rhs_sum.add(&self.generators[l].scale(a));
            }
            if lhs_sum != rhs_sum {
                violations.push(format!("relation unbalanced: {}", rel));
            }
        }
        violations
    }

    /// Fano test: every primitive relation has positive degree.
    pub fn is_fano(&self) -> Result<bool> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(self.relations.iter().all(|r| r.degree().is_positive()))
    }

    /// Canonical JSON interchange form. Keys and label lists are sorted; when
    /// any integer falls outside the 64-bit range the document is flagged
    /// `"bigint": true` and integers are emitted as strings.
    pub fn to_json(&self) -> Value {
        let bigint = self
            .generators
            .values()
            .flat_map(|p| p.0.iter())
            .chain(self.relations.iter().flat_map(|r| r.rhs.values()))
            .any(|i| i64::try_from(i).is_err());
        let encode = |i: &BigInt| -> Value {
            if bigint {
                Value::String(i.to_string())
            } else {
                json!(i64::try_from(i).expect("checked range"))
            }
        };
        let mut generators = Map::new();
        for (label, point) in &self.generators {
            generators.insert(
                label.0.clone(),
                Value::Array(point.0.iter().map(encode).collect()),
            );
        }
        let relations: Vec<Value> = self
            .relations
            .iter()
            .map(|r| {
                json!({
                    "lhs": r.lhs.iter().map(|l| l.0.clone()).collect::<Vec<_>>(),
                    "rhs": r.rhs.iter().map(|(l, a)| json!([l.0, encode(a)])).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("dim".into(), json!(self.dim));
        if bigint {
            doc.insert("bigint".into(), json!(true));
        }
        doc.insert("generators".into(), Value::Object(generators));
        doc.insert("relations".into(), Value::Array(relations));
        Value::Object(doc)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Json("expected object".into()))?;
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing dim".into()))? as usize;
        let mut generators = BTreeMap::new();
        let gens = obj
            .get("generators")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("missing generators".into()))?;
        for (label, coords) in gens {
            let coords = coords
                .as_array()
                .ok_or_else(|| Error::Json(format!("generator {label}: expected array")))?;
            let point: Vec<BigInt> = coords.iter().map(parse_int).collect::<Result<_>>()?;
            generators.insert(Label::new(label.clone()), LatticePoint(point));
        }
        let mut relations = Vec::new();
        let rels = obj
            .get("relations")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing relations".into()))?;
        for rel in rels {
            let rel = rel
                .as_object()
                .ok_or_else(|| Error::Json("relation: expected object".into()))?;
            let lhs: BTreeSet<Label> = rel
                .get("lhs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Json("relation: missing lhs".into()))?
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(Label::from)
                        .ok_or_else(|| Error::Json("lhs label must be a string".into()))
                })
                .collect::<Result<_>>()?;
            let mut rhs = BTreeMap::new();
            for pair in rel
                .get("rhs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Json("relation: missing rhs".into()))?
            {
                let pair = pair
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::Json("rhs entry must be [label, coeff]".into()))?;
                let label = pair[0]
                    .as_str()
                    .ok_or_else(|| Error::Json("rhs label must be a string".into()))?;
                rhs.insert(Label::from(label), parse_int(&pair[1])?);
            }
            relations.push(PrimitiveRelation { lhs, rhs });
        }
        Ok(FanPresentation {
            dim,
            generators,
            relations,
        })
    }
}

/// Accepts JSON numbers and, for arbitrary precision, decimal strings.
fn parse_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Json(format!("non-integer number {n}"))),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| Error::Json(format!("bad integer literal {s:?}"))),
        other => Err(Error::Json(format!("expected integer, got {other}"))),
    }
}
