//! Ground-truth geometry: reconstructs the cone complex of a presentation by
//! brute force and recomputes primitive collections and relations
//! independently of the rewrite rules. Everything here is exact.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lattice::{self, lp, LatticePoint};
use crate::presentation::{FanPresentation, Label, PrimitiveRelation};

/// Explicit list of maximal cones reconstructed from a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeComplex {
    pub dim: usize,
    pub generators: BTreeMap<Label, LatticePoint>,
    pub max_cones: BTreeSet<BTreeSet<Label>>,
}

/// Outcome of the smoothness/completeness certification. Failures are
/// entries in `issues`, never panics.
#[derive(Clone, Debug, Default)]
pub struct GeometryReport {
    pub smooth: bool,
    pub complete: bool,
    pub proper_intersections: bool,
    pub issues: Vec<String>,
}

impl GeometryReport {
    pub fn ok(&self) -> bool {
        self.smooth && self.complete && self.proper_intersections
    }
}

/// Index-based view of a complex for fast subset tests (|G| <= 32).
struct Indexed {
    labels: Vec<Label>,
    points: Vec<LatticePoint>,
    cones: Vec<u32>,
}

impl Indexed {
    fn new(generators: &BTreeMap<Label, LatticePoint>, cones: &BTreeSet<BTreeSet<Label>>) -> Self {
        let labels: Vec<Label> = generators.keys().cloned().collect();
        let points = labels.iter().map(|l| generators[l].clone()).collect();
        let idx: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let cones = cones
            .iter()
            .map(|c| c.iter().fold(0u32, |m, l| m | 1 << idx[l]))
            .collect();
        Indexed {
            labels,
            points,
            cones,
        }
    }

    fn mask_to_labels(&self, mask: u32) -> BTreeSet<Label> {
        (0..self.labels.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.labels[i].clone())
            .collect()
    }

    fn points_of(&self, mask: u32) -> Vec<LatticePoint> {
        (0..self.labels.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.points[i].clone())
            .collect()
    }

    fn is_face(&self, mask: u32) -> bool {
        self.cones.iter().any(|&c| mask & !c == 0)
    }
}

/// Maximal cones implied by a set of primitive collections: all d-element
/// generator subsets containing no collection. A collection-free subset with
/// linearly dependent vectors makes the presentation unrealizable.
pub fn max_cones_from_collections(
    dim: usize,
    generators: &BTreeMap<Label, LatticePoint>,
    collections: &[BTreeSet<Label>],
) -> Result<BTreeSet<BTreeSet<Label>>> {
    let labels: Vec<&Label> = generators.keys().collect();
    let idx: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut coll_masks = Vec::with_capacity(collections.len());
    for c in collections {
        let mut m = 0u32;
        for l in c {
            let i = idx.get(l).ok_or_else(|| Error::UnknownLabel(l.0.clone()))?;
            m |= 1 << i;
        }
        coll_masks.push(m);
    }
    let mut out = BTreeSet::new();
    for combo in (0..labels.len()).combinations(dim) {
        let mask = combo.iter().fold(0u32, |m, &i| m | 1 << i);
        if coll_masks.iter().any(|&c| c & !mask == 0) {
            continue;
        }
        let vectors: Vec<LatticePoint> = combo
            .iter()
            .map(|&i| generators[labels[i]].clone())
            .collect();
        if lattice::det(&vectors)?.is_zero() {
            let names: Vec<&str> = combo.iter().map(|&i| labels[i].as_str()).collect();
            return Err(Error::NotRealizable(format!(
                "collection-free subset {{{}}} is linearly dependent",
                names.join(",")
            )));
        }
        out.insert(combo.into_iter().map(|i| labels[i].clone()).collect());
    }
    Ok(out)
}

/// Reconstructs the cone complex from a validated presentation.
pub fn reconstruct(f: &FanPresentation) -> Result<ConeComplex> {
    let violations = f.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let collections: Vec<BTreeSet<Label>> = f.relations.iter().map(|r| r.lhs.clone()).collect();
    let max_cones = max_cones_from_collections(f.dim, &f.generators, &collections)?;
    Ok(ConeComplex {
        dim: f.dim,
        generators: f.generators.clone(),
        max_cones,
    })
}

/// Certifies that the complex is the fan of a smooth complete variety:
/// unimodular maximal cones, every facet on exactly two cones, and pairwise
/// intersections along common faces (by exact LP separation).
pub fn check_smooth_complete(c: &ConeComplex) -> GeometryReport {
    let mut report = GeometryReport {
        smooth: true,
        complete: true,
        proper_intersections: true,
        issues: Vec::new(),
    };
    if c.max_cones.is_empty() {
        report.complete = false;
        report.issues.push("no maximal cones".into());
        return report;
    }
    let ix = Indexed::new(&c.generators, &c.max_cones);
    for &cone in &ix.cones {
        let vectors = ix.points_of(cone);
        match lattice::det(&vectors) {
            Ok(d) if d.abs().is_one() => {}
            Ok(d) => {
                report.smooth = false;
                report.issues.push(format!(
                    "cone {{{}}} has determinant {}",
                    join_mask(&ix, cone),
                    d
                ));
            }
            Err(e) => {
                report.smooth = false;
                report.issues.push(format!("cone shape error: {e}"));
            }
        }
    }
    // Facet pairing: each (d-1)-face of a maximal cone on exactly two cones.
    let mut facet_count: BTreeMap<u32, usize> = BTreeMap::new();
    for &cone in &ix.cones {
        for i in 0..ix.labels.len() {
            if cone >> i & 1 == 1 {
                *facet_count.entry(cone & !(1 << i)).or_insert(0) += 1;
            }
        }
    }
    for (&facet, &count) in &facet_count {
        if count != 2 {
            report.complete = false;
            report.issues.push(format!(
                "facet {{{}}} lies on {} maximal cone(s)",
                join_mask(&ix, facet),
                count
            ));
        }
    }
    // Proper intersections, pairwise.
    for (a, &ca) in ix.cones.iter().enumerate() {
        for &cb in ix.cones.iter().skip(a + 1) {
            if !cones_intersect_properly(&ix, ca, cb) {
                report.proper_intersections = false;
                report.issues.push(format!(
                    "cones {{{}}} and {{{}}} do not meet along their common face",
                    join_mask(&ix, ca),
                    join_mask(&ix, cb)
                ));
            }
        }
    }
    report
}

fn join_mask(ix: &Indexed, mask: u32) -> String {
    (0..ix.labels.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| ix.labels[i].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Exact separation: a rational functional vanishing on the common
/// generators, negative on the rest of one cone and positive on the rest of
/// the other, certifies that the two cones meet exactly in the common face.
fn cones_intersect_properly(ix: &Indexed, a: u32, b: u32) -> bool {
    let common = a & b;
    let dim = ix.points[0].dim();
    let var = |k: usize| format!("f{k}");
    let mut cs = Vec::new();
    let mut push = |mask: u32, rel: lp::Rel, rhs: i64| {
        for i in 0..ix.labels.len() {
            if mask >> i & 1 == 1 {
                let terms: Vec<(String, BigRational)> = (0..dim)
                    .map(|k| (var(k), BigRational::from(ix.points[i].0[k].clone())))
                    .collect();
                cs.push(lp::Constraint::new(
                    terms,
                    rel,
                    BigRational::from_integer(rhs.into()),
                ));
            }
        }
    };
    push(common, lp::Rel::Eq, 0);
    push(a & !common, lp::Rel::Le, -1);
    push(b & !common, lp::Rel::Ge, 1);
    lp::lp_feasible(&cs).is_some()
}

/// Recomputes the full presentation from the cone complex: primitive
/// collections are the inclusion-minimal non-faces; each relation target is
/// the unique cone holding the collection sum in its relative interior.
pub fn recompute(c: &ConeComplex) -> Result<FanPresentation> {
    let ix = Indexed::new(&c.generators, &c.max_cones);
    let n = ix.labels.len();
    let mut found: Vec<u32> = Vec::new();
    for size in 1..=(c.dim + 1).min(n) {
        for combo in (0..n).combinations(size) {
            let mask = combo.iter().fold(0u32, |m, &i| m | 1 << i);
            if found.iter().any(|&f| f & !mask == 0) {
                continue;
            }
            if !ix.is_face(mask) {
                // All proper subsets are faces: smaller non-faces would have
                // been found already.
                found.push(mask);
            }
        }
    }
    let mut relations = Vec::with_capacity(found.len());
    for mask in found {
        let lhs = ix.mask_to_labels(mask);
        relations.push(relation_for(c, &lhs)?);
    }
    relations.sort();
    Ok(FanPresentation::new(c.dim, c.generators.clone(), relations))
}

/// Computes the primitive relation of a given collection against the cone
/// structure: locates the unique cone with the generator-sum in its relative
/// interior and reads off the (positive integer) coefficients.
pub fn relation_for(c: &ConeComplex, lhs: &BTreeSet<Label>) -> Result<PrimitiveRelation> {
    let mut sum = LatticePoint::zero(c.dim);
    for l in lhs {
        let g = c
            .generators
            .get(l)
            .ok_or_else(|| Error::UnknownLabel(l.0.clone()))?;
        sum = sum.add(g);
    }
    let mut face: Option<BTreeMap<Label, BigRational>> = None;
    let mut containing = 0usize;
    for cone in &c.max_cones {
        let labels: Vec<&Label> = cone.iter().collect();
        let gens: Vec<LatticePoint> = labels.iter().map(|l| c.generators[*l].clone()).collect();
        if let Some(coeffs) = lattice::solve_nonneg(&gens, &sum)? {
            containing += 1;
            let support: BTreeMap<Label, BigRational> = labels
                .iter()
                .zip(&coeffs)
                .filter(|(_, a)| a.is_positive())
                .map(|(l, a)| ((*l).clone(), a.clone()))
                .collect();
            match &face {
                None => face = Some(support),
                Some(prev) if *prev == support => {}
                Some(prev) => {
                    return Err(Error::NotAFan(format!(
                        "sum of {{{}}} lies in the relative interior of two cones ({} vs {})",
                        lhs.iter().map(|l| l.as_str()).join(","),
                        prev.keys().map(|l| l.as_str()).join(","),
                        support.keys().map(|l| l.as_str()).join(",")
                    )))
                }
            }
        }
    }
    let Some(face) = face else {
        return Err(Error::NotAFan(format!(
            "sum of {{{}}} lies in no cone ({} cones checked)",
            lhs.iter().map(|l| l.as_str()).join(","),
            containing
        )));
    };
    let mut rhs = BTreeMap::new();
    for (label, a) in face {
        if !a.is_integer() {
            return Err(Error::NotAFan(format!(
                "non-integer coefficient {} on {} for collection {{{}}}",
                a,
                label,
                lhs.iter().map(|l| l.as_str()).join(",")
            )));
        }
        rhs.insert(label, a.to_integer());
    }
    Ok(PrimitiveRelation {
        lhs: lhs.clone(),
        rhs,
    })
}

/// Projectivity: existence of a strictly convex piecewise-linear support
/// function, decided by exact LP over one rational value per ray. For each
/// wall shared by cones sigma = F + u and tau = F + v, the linear function of
/// sigma must take a value strictly below a_v at v.
pub fn check_projective(c: &ConeComplex) -> bool {
    let ix = Indexed::new(&c.generators, &c.max_cones);
    let mut walls: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &cone in &ix.cones {
        for i in 0..ix.labels.len() {
            if cone >> i & 1 == 1 {
                walls.entry(cone & !(1 << i)).or_default().push(cone);
            }
        }
    }
    let mut cs = Vec::new();
    for (&facet, cones) in &walls {
        let [sigma, tau] = cones.as_slice() else {
            return false; // not complete
        };
        let v_bit = tau & !facet;
        let v_idx = v_bit.trailing_zeros() as usize;
        let sigma_idx: Vec<usize> = (0..ix.labels.len())
            .filter(|&i| sigma >> i & 1 == 1)
            .collect();
        let gens: Vec<LatticePoint> = sigma_idx.iter().map(|&i| ix.points[i].clone()).collect();
        let coords = match lattice::solve_in_span(&gens, &ix.points[v_idx]) {
            Ok(Some(coords)) => coords,
            _ => return false,
        };
        let mut terms: Vec<(String, BigRational)> = sigma_idx
            .iter()
            .zip(coords)
            .filter(|(_, a)| !a.is_zero())
            .map(|(&i, a)| (ix.labels[i].0.clone(), a))
            .collect();
        terms.push((ix.labels[v_idx].0.clone(), -BigRational::one()));
        cs.push(lp::Constraint::new(terms, lp::Rel::Lt, BigRational::zero()));
    }
    lp::lp_feasible(&cs).is_some()
}

/// One-stop verification used throughout the construction runner: the
/// presentation reconstructs to a smooth complete complex whose recomputed
/// relations equal the input (the anti-drift round trip).
pub fn verify(f: &FanPresentation) -> Result<ConeComplex> {
    let complex = reconstruct(f)?;
    let report = check_smooth_complete(&complex);
    if !report.ok() {
        return Err(Error::NotAFan(report.issues.join("; ")));
    }
    let back = recompute(&complex)?;
    if back != *f {
        return Err(Error::NotAFan(format!(
            "round trip mismatch: recomputed [{}] vs presented [{}]",
            back.relations.iter().map(|r| r.to_string()).join(", "),
            f.relations.iter().map(|r| r.to_string()).join(", ")
        )));
    }
    Ok(complex)
}

impl ConeComplex {
    pub fn to_json(&self) -> Value {
        let mut generators = Map::new();
        for (label, point) in &self.generators {
            generators.insert(
                label.0.clone(),
                Value::Array(
                    point
                        .0
                        .iter()
                        .map(|i| {
                            i64::try_from(i)
                                .map(|v| json!(v))
                                .unwrap_or_else(|_| json!(i.to_string()))
                        })
                        .collect(),
                ),
            );
        }
        json!({
            "dim": self.dim,
            "generators": Value::Object(generators),
            "max_cones": self
                .max_cones
                .iter()
                .map(|c| c.iter().map(|l| l.0.clone()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}
