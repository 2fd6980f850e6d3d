//! Numerical 1-cycles of primitive relations, extremality in the cone they
//! generate (the Kleiman-Mori cone at desk scale), and contraction types.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{lp, LatticePoint};
use crate::presentation::{FanPresentation, Label, PrimitiveRelation};

/// The numerical 1-cycle of a primitive relation: +1 on each collection
/// member, -a_j on each target generator, 0 elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleClass {
    pub coeffs: BTreeMap<Label, BigInt>,
}

impl CycleClass {
    pub fn get(&self, label: &Label) -> BigInt {
        self.coeffs.get(label).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Re-substitution: the cycle is a linear relation among the generators,
    /// so the weighted sum of coordinates is exactly zero.
    pub fn is_relation_among(&self, f: &FanPresentation) -> bool {
        let mut acc = LatticePoint::zero(f.dim);
        for (label, coeff) in &self.coeffs {
            match f.generators.get(label) {
                Some(g) => acc = acc.add(&g.scale(coeff)),
                None => return false,
            }
        }
        acc.is_zero()
    }
}

/// Exceptional-locus classification of an extremal contraction, read off the
/// relation shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContractionType {
    Fiber,
    Divisorial,
    Small,
}

impl fmt::Display for ContractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionType::Fiber => "fiber",
            ContractionType::Divisorial => "divisorial",
            ContractionType::Small => "small",
        })
    }
}

/// Wall-crossing surgery for small contractions: l < m, l = m, l > m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurgeryType {
    Antiflip,
    Flop,
    Flip,
    NotApplicable,
}

impl fmt::Display for SurgeryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurgeryType::Antiflip => "antiflip",
            SurgeryType::Flop => "flop",
            SurgeryType::Flip => "flip",
            SurgeryType::NotApplicable => "n/a",
        })
    }
}

/// The numerical 1-cycle associated to a primitive relation, as a coefficient
/// vector over the generators of `f`.
pub fn cycle_class(f: &FanPresentation, r: &PrimitiveRelation) -> CycleClass {
    let mut coeffs: BTreeMap<Label, BigInt> = f
        .generators
        .keys()
        .map(|l| (l.clone(), BigInt::zero()))
        .collect();
    for l in &r.lhs {
        coeffs.insert(l.clone(), BigInt::one());
    }
    for (l, a) in &r.rhs {
        coeffs.insert(l.clone(), -a.clone());
    }
    CycleClass { coeffs }
}

/// True when integer vectors `a` and `b` are positive rational multiples of
/// each other.
fn positive_multiple(a: &CycleClass, b: &CycleClass) -> bool {
    let keys: Vec<&Label> = a.coeffs.keys().collect();
    let pivot = keys.iter().find(|l| !a.get(l).is_zero());
    let Some(pivot) = pivot else {
        return b.coeffs.values().all(|v| v.is_zero());
    };
    let ap = a.get(pivot);
    let bp = b.get(pivot);
    if bp.is_zero() || ap.sign() != bp.sign() {
        return false;
    }
    // b = (bp/ap) a, cross-multiplied exactly.
    keys.iter().all(|l| &a.get(l) * &bp == &b.get(l) * &ap)
}

/// Extremality of a relation's cycle in the cone spanned by all
/// primitive-collection cycles: the cycle must not be a nonnegative rational
/// combination of the cycles of the other relations (positive multiples of it
/// excluded), decided by exact LP feasibility.
pub fn is_extremal(f: &FanPresentation, r: &PrimitiveRelation) -> Result<bool> {
    let violations = f.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let target = cycle_class(f, r);
    let others: Vec<CycleClass> = f
        .relations
        .iter()
        .filter(|other| other.lhs != r.lhs)
        .map(|other| cycle_class(f, other))
        .filter(|c| !positive_multiple(&target, c))
        .collect();
    if others.is_empty() {
        return Ok(true);
    }
    let mut cs = Vec::new();
    for (i, _) in others.iter().enumerate() {
        cs.push(lp::Constraint::new(
            vec![(format!("l{i}"), BigRational::one())],
            lp::Rel::Ge,
            BigRational::zero(),
        ));
    }
    for label in f.generators.keys() {
        let terms: Vec<(String, BigRational)> = others
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("l{i}"), BigRational::from(c.get(label))))
            .collect();
        cs.push(lp::Constraint::new(
            terms,
            lp::Rel::Eq,
            BigRational::from(target.get(label)),
        ));
    }
    Ok(lp::lp_feasible(&cs).is_none())
}

/// Classifies an extremal relation by its shape: m = 0 is of fiber type,
/// m = 1 with unit coefficient is divisorial, m >= 2 is small. The surgery
/// component compares l against m for small walls with unit coefficients.
pub fn classify(
    f: &FanPresentation,
    r: &PrimitiveRelation,
) -> Result<(ContractionType, SurgeryType)> {
    if !is_extremal(f, r)? {
        return Err(Error::NotExtremal(r.to_string()));
    }
    let m = r.rhs.len();
    let contraction = if m == 0 {
        ContractionType::Fiber
    } else if m == 1 {
        ContractionType::Divisorial
    } else {
        ContractionType::Small
    };
    let surgery = if contraction == ContractionType::Small && r.unit_rhs() {
        let l = r.lhs.len();
        match l.cmp(&m) {
            std::cmp::Ordering::Less => SurgeryType::Antiflip,
            std::cmp::Ordering::Equal => SurgeryType::Flop,
            std::cmp::Ordering::Greater => SurgeryType::Flip,
        }
    } else {
        SurgeryType::NotApplicable
    };
    Ok((contraction, surgery))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{blowup_at_points, projective_space};

    fn rel(f: &FanPresentation, lhs: &[&str]) -> PrimitiveRelation {
        let set = lhs.iter().map(|&s| Label::from(s)).collect();
        f.find_relation_by_lhs(&set)
            .expect("relation exists")
            .clone()
    }

    #[test]
    fn cycle_of_projective_space() {
        let p3 = projective_space(3).unwrap();
        let c = cycle_class(&p3, &p3.relations[0]);
        assert!(c.coeffs.values().all(|v| v == &BigInt::one()));
        assert!(c.is_relation_among(&p3));
    }

    #[test]
    fn cycle_signs_in_b42() {
        let f = blowup_at_points(4, 2).unwrap();
        let r = rel(&f, &["y1", "y2"]);
        let c = cycle_class(&f, &r);
        assert_eq!(c.get(&Label::from("y1")), BigInt::one());
        assert_eq!(c.get(&Label::from("x3")), BigInt::from(-1));
        assert_eq!(c.get(&Label::from("x1")), BigInt::zero());
        assert!(c.is_relation_among(&f));

        let r = rel(&f, &["x1", "y1"]);
        let c = cycle_class(&f, &r);
        assert_eq!(c.get(&Label::from("x1")), BigInt::one());
        assert_eq!(c.get(&Label::from("y1")), BigInt::one());
        assert_eq!(c.get(&Label::from("x2")), BigInt::zero());
        assert!(c.is_relation_among(&f));
    }

    #[test]
    fn single_relation_is_extremal() {
        let p4 = projective_space(4).unwrap();
        assert!(is_extremal(&p4, &p4.relations[0]).unwrap());
    }

    #[test]
    fn b42_wall_is_extremal() {
        let f = blowup_at_points(4, 2).unwrap();
        assert!(is_extremal(&f, &rel(&f, &["y1", "y2"])).unwrap());
    }

    #[test]
    fn bdn_family_extremality() {
        // Divisor-to-divisor and point-blowup relations are extremal; the
        // fiber relations x_i+y_i=0 are not, since for i != i' the cycle of
        // x_i+y_i=0 is the sum of the cycles of the family-(II) relation
        // targeting y_i' and the family-(III) relation on {y_i, y_i'}.
        for (d, n) in [(3, 2), (4, 3), (5, 2), (6, 3)] {
            let f = blowup_at_points(d, n).unwrap();
            for r in &f.relations {
                let fiber = r.rhs.is_empty();
                assert_eq!(is_extremal(&f, r).unwrap(), !fiber, "({d},{n}) {r}");
            }
        }
    }

    #[test]
    fn classify_shapes() {
        let p3 = projective_space(3).unwrap();
        assert_eq!(
            classify(&p3, &p3.relations[0]).unwrap(),
            (ContractionType::Fiber, SurgeryType::NotApplicable)
        );
        let f = blowup_at_points(4, 2).unwrap();
        assert_eq!(
            classify(&f, &rel(&f, &["x2", "x3", "x4", "x5"])).unwrap(),
            (ContractionType::Divisorial, SurgeryType::NotApplicable)
        );
        assert_eq!(
            classify(&f, &rel(&f, &["y1", "y2"])).unwrap(),
            (ContractionType::Small, SurgeryType::Antiflip)
        );
    }

    #[test]
    fn classify_rejects_non_extremal() {
        let f = blowup_at_points(4, 2).unwrap();
        // x1+x2+y1+y2 = 0 balances (y_i = -x_i) and its cycle is the sum of
        // the cycles of x1+y1=0 and x2+y2=0, hence not extremal.
        let fake = PrimitiveRelation::unit(&["x1", "x2", "y1", "y2"], &[]);
        let c = cycle_class(&f, &fake);
        assert!(c.is_relation_among(&f));
        assert!(matches!(classify(&f, &fake), Err(Error::NotExtremal(_))));
    }
}
