//! The three rewrite rules on presentations: blow-up, blow-down, and the
//! star flip covering anti-flips, flips and flops.
//!
//! Each rule derives the new primitive collections combinatorially; the
//! relation targets of the output are then recomputed against the output's
//! own cone structure, so the rewrite can never drift from the geometry.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::mori;
use crate::oracle::{self, ConeComplex};
use crate::presentation::{FanPresentation, Label, PrimitiveRelation};

/// A wall to cross with `star_flip`: the relation whose collection side
/// leaves the fan and whose target side becomes a collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipSpec {
    pub relation: PrimitiveRelation,
}

impl FlipSpec {
    pub fn new(relation: PrimitiveRelation) -> Self {
        FlipSpec { relation }
    }
}

fn validated(f: &FanPresentation) -> Result<()> {
    let violations = f.validate();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(violations))
    }
}

/// Builds the output presentation from its collection set: reconstructs the
/// cone complex implied by the collections and reads each relation target off
/// the geometry.
fn presentation_from_collections(
    dim: usize,
    generators: BTreeMap<Label, LatticePoint>,
    collections: BTreeSet<BTreeSet<Label>>,
) -> Result<FanPresentation> {
    let colls: Vec<BTreeSet<Label>> = collections.into_iter().collect();
    let max_cones = oracle::max_cones_from_collections(dim, &generators, &colls)?;
    let complex = ConeComplex {
        dim,
        generators: generators.clone(),
        max_cones,
    };
    let mut relations: Vec<PrimitiveRelation> = colls
        .iter()
        .map(|lhs| oracle::relation_for(&complex, lhs))
        .collect::<Result<_>>()?;
    relations.sort();
    Ok(FanPresentation::new(dim, generators, relations))
}

/// Inclusion-minimal elements of a family of sets, deduplicated.
fn minimal_sets(family: Vec<BTreeSet<Label>>) -> Vec<BTreeSet<Label>> {
    let mut out: Vec<BTreeSet<Label>> = Vec::new();
    for s in &family {
        if family.iter().any(|t| t.is_subset(s) && t != s) {
            continue;
        }
        if !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

/// Blow-up along the cone spanned by `center`, inserting the new ray
/// `new_label` at the sum of the center's generators.
pub fn blow_up(
    f: &FanPresentation,
    center: &BTreeSet<Label>,
    new_label: Label,
) -> Result<FanPresentation> {
    validated(f)?;
    if center.len() < 2 {
        return Err(Error::CenterTooSmall);
    }
    for l in center {
        if !f.generators.contains_key(l) {
            return Err(Error::UnknownLabel(l.0.clone()));
        }
    }
    if f.generators.contains_key(&new_label) {
        return Err(Error::DuplicateLabel(new_label.0));
    }
    let complex = oracle::reconstruct(f)?;
    if !complex.max_cones.iter().any(|c| center.is_subset(c)) {
        return Err(Error::NotAFace(center.iter().map(|l| l.as_str()).join(",")));
    }

    let mut collections: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    // (1) the center itself becomes a collection with target new_label.
    collections.insert(center.clone());
    // (2) old collections not containing the center survive.
    for r in &f.relations {
        if !center.is_subset(&r.lhs) {
            collections.insert(r.lhs.clone());
        }
    }
    // (3) minimal difference sets of collections meeting the center, each
    // joined with the new ray.
    let diffs: Vec<BTreeSet<Label>> = f
        .relations
        .iter()
        .filter(|r| !r.lhs.is_disjoint(center))
        .map(|r| r.lhs.difference(center).cloned().collect())
        .collect();
    for d in minimal_sets(diffs) {
        let mut p = d;
        p.insert(new_label.clone());
        collections.insert(p);
    }

    let mut generators = f.generators.clone();
    let v = f.sum_of(center)?;
    generators.insert(new_label, v);
    presentation_from_collections(f.dim, generators, collections)
}

/// Blow-down with respect to an extremal divisorial relation
/// `u_1 + ... + u_l = v`: removes the ray v and contracts.
pub fn blow_down(f: &FanPresentation, wall: &PrimitiveRelation) -> Result<FanPresentation> {
    validated(f)?;
    if !f.relations.iter().any(|r| r == wall) {
        return Err(Error::UnknownWall(wall.to_string()));
    }
    let (v, unit) = match wall.rhs.iter().exactly_one() {
        Ok((label, coeff)) => (label.clone(), coeff == &num_bigint::BigInt::from(1)),
        Err(_) => return Err(Error::NotDivisorialWall(wall.to_string())),
    };
    if !unit {
        return Err(Error::NotDivisorialWall(wall.to_string()));
    }
    if !mori::is_extremal(f, wall)? {
        return Err(Error::NotExtremal(wall.to_string()));
    }
    let center = &wall.lhs;

    let mut collections: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    // (1) old collections other than the wall's that avoid v.
    for r in &f.relations {
        if r.lhs != *center && !r.lhs.contains(&v) {
            collections.insert(r.lhs.clone());
        }
    }
    // (2) substitute the full center for v, unless some proper subset of the
    // center already reconstitutes a collection.
    let proper_subsets: Vec<BTreeSet<Label>> = center
        .iter()
        .cloned()
        .powerset()
        .map(|s| s.into_iter().collect::<BTreeSet<Label>>())
        .filter(|s| s != center)
        .collect();
    for r in &f.relations {
        if !r.lhs.contains(&v) {
            continue;
        }
        let base: BTreeSet<Label> = r.lhs.iter().filter(|&l| l != &v).cloned().collect();
        let reconstitutes = proper_subsets.iter().any(|s| {
            let candidate: BTreeSet<Label> = base.union(s).cloned().collect();
            f.relations.iter().any(|q| q.lhs == candidate)
        });
        if !reconstitutes {
            collections.insert(base.union(center).cloned().collect());
        }
    }

    let mut generators = f.generators.clone();
    generators.remove(&v);
    presentation_from_collections(f.dim, generators, collections)
}

/// Crosses the wall of an extremal relation with unit target coefficients,
/// keeping the generator map fixed (isomorphism in codimension one). Handles
/// anti-flips (l < m), flops (l = m) and flips (l > m) alike.
pub fn star_flip(f: &FanPresentation, spec: &FlipSpec) -> Result<FanPresentation> {
    validated(f)?;
    let wall = &spec.relation;
    if !f.relations.iter().any(|r| r == wall) {
        return Err(Error::UnknownWall(wall.to_string()));
    }
    if !wall.unit_rhs() || wall.rhs.is_empty() {
        return Err(Error::NonUnitWall(wall.to_string()));
    }
    if !mori::is_extremal(f, wall)? {
        return Err(Error::NotExtremal(wall.to_string()));
    }
    let u_side: &BTreeSet<Label> = &wall.lhs;
    let v_side: BTreeSet<Label> = wall.rhs.keys().cloned().collect();

    let mut collections: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    // (1) the reversed wall: the target side becomes a collection.
    collections.insert(v_side.clone());
    // (2) old collections that neither contain the target side nor are the
    // wall's own collection.
    for r in &f.relations {
        if r.lhs != *u_side && !v_side.is_subset(&r.lhs) {
            collections.insert(r.lhs.clone());
        }
    }
    // (3) minimal difference sets, joined with the wall collection, subject
    // to the containment condition over proper subsets. Containment is
    // monotone in the subset, so the maximal proper subsets decide it.
    let diffs: Vec<BTreeSet<Label>> = f
        .relations
        .iter()
        .filter(|r| !r.lhs.is_disjoint(&v_side))
        .map(|r| r.lhs.difference(&v_side).cloned().collect())
        .collect();
    for d in minimal_sets(diffs) {
        let admissible = u_side.iter().all(|dropped| {
            let with_s: BTreeSet<Label> = d
                .iter()
                .chain(u_side.iter().filter(|&l| l != dropped))
                .cloned()
                .collect();
            !f.relations.iter().any(|q| q.lhs.is_subset(&with_s))
        });
        if admissible {
            collections.insert(d.union(u_side).cloned().collect());
        }
    }

    presentation_from_collections(f.dim, f.generators.clone(), collections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{blowup_at_points, projective_space};

    fn labels(names: &[&str]) -> BTreeSet<Label> {
        names.iter().map(|&s| Label::from(s)).collect()
    }

    #[test]
    fn blow_up_p3_at_point() {
        let p3 = projective_space(3).unwrap();
        let f = blow_up(&p3, &labels(&["x2", "x3", "x4"]), Label::from("y1")).unwrap();
        let expected: BTreeSet<PrimitiveRelation> = [
            PrimitiveRelation::unit(&["x2", "x3", "x4"], &["y1"]),
            PrimitiveRelation::unit(&["x1", "y1"], &[]),
        ]
        .into();
        assert_eq!(
            f.relations.iter().cloned().collect::<BTreeSet<_>>(),
            expected
        );
    }

    #[test]
    fn blow_up_p4_along_surface() {
        let p4 = projective_space(4).unwrap();
        let f = blow_up(&p4, &labels(&["x1", "x2"]), Label::from("z")).unwrap();
        let rels: BTreeSet<PrimitiveRelation> = f.relations.iter().cloned().collect();
        assert!(rels.contains(&PrimitiveRelation::unit(&["x1", "x2"], &["z"])));
        assert!(rels.contains(&PrimitiveRelation::unit(&["x3", "x4", "x5", "z"], &[])));
    }

    #[test]
    fn blow_up_rejects_rays() {
        let p3 = projective_space(3).unwrap();
        assert!(matches!(
            blow_up(&p3, &labels(&["x1"]), Label::from("z")),
            Err(Error::CenterTooSmall)
        ));
    }

    #[test]
    fn blow_up_rejects_non_faces() {
        let f = blowup_at_points(3, 1).unwrap();
        // {x1, y1} is a primitive collection, not a face.
        assert!(matches!(
            blow_up(&f, &labels(&["x1", "y1"]), Label::from("z")),
            Err(Error::NotAFace(_))
        ));
    }

    #[test]
    fn blow_up_rejects_duplicate_label() {
        let p3 = projective_space(3).unwrap();
        assert!(matches!(
            blow_up(&p3, &labels(&["x1", "x2"]), Label::from("x3")),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn blow_down_inverts_blow_up() {
        let p3 = projective_space(3).unwrap();
        let up = blow_up(&p3, &labels(&["x2", "x3", "x4"]), Label::from("y1")).unwrap();
        let wall = PrimitiveRelation::unit(&["x2", "x3", "x4"], &["y1"]);
        let down = blow_down(&up, &wall).unwrap();
        assert_eq!(down, p3);
    }

    #[test]
    fn blow_down_b42_to_b41() {
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["x2", "x3", "x4", "x5"], &["y1"]);
        let down = blow_down(&f, &wall).unwrap();
        // B^4_1 up to relabeling: same dim, Picard number 2, two relations.
        assert_eq!(down.picard_number(), 2);
        assert_eq!(down.relations.len(), 2);
        let b41 = blowup_at_points(4, 1).unwrap();
        assert_eq!(
            down.relations
                .iter()
                .map(|r| (r.lhs.len(), r.rhs.len()))
                .sorted()
                .collect::<Vec<_>>(),
            b41.relations
                .iter()
                .map(|r| (r.lhs.len(), r.rhs.len()))
                .sorted()
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn blow_down_rejects_small_walls() {
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"]);
        assert!(matches!(
            blow_down(&f, &wall),
            Err(Error::NotDivisorialWall(_))
        ));
    }

    #[test]
    fn star_flip_b42() {
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"]);
        let flipped = star_flip(&f, &FlipSpec::new(wall)).unwrap();
        let expected: BTreeSet<PrimitiveRelation> = [
            PrimitiveRelation::unit(&["x1", "y1"], &[]),
            PrimitiveRelation::unit(&["x2", "y2"], &[]),
            PrimitiveRelation::unit(&["x3", "x4", "x5"], &["y1", "y2"]),
        ]
        .into();
        assert_eq!(
            flipped.relations.iter().cloned().collect::<BTreeSet<_>>(),
            expected
        );
        // Generator map untouched: isomorphic in codimension one.
        assert_eq!(flipped.generators, f.generators);
    }

    #[test]
    fn star_flip_involution() {
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"]);
        let once = star_flip(&f, &FlipSpec::new(wall)).unwrap();
        let back_wall = PrimitiveRelation::unit(&["x3", "x4", "x5"], &["y1", "y2"]);
        let twice = star_flip(&once, &FlipSpec::new(back_wall)).unwrap();
        assert_eq!(twice, f);
    }

    #[test]
    fn star_flip_b53() {
        let f = blowup_at_points(5, 3).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5", "x6"]);
        let flipped = star_flip(&f, &FlipSpec::new(wall.clone())).unwrap();
        let rels: BTreeSet<PrimitiveRelation> = flipped.relations.iter().cloned().collect();
        // The reversed wall appears; x-side collections not containing the
        // target side are retained.
        assert!(rels.contains(&PrimitiveRelation::unit(
            &["x3", "x4", "x5", "x6"],
            &["y1", "y2"]
        )));
        assert!(rels.contains(&PrimitiveRelation::unit(
            &["x1", "x2", "x4", "x5", "x6"],
            &["y3"]
        )));
        assert!(!rels.contains(&wall));
        // Cross-check against the oracle.
        let complex = oracle::reconstruct(&flipped).unwrap();
        assert_eq!(oracle::recompute(&complex).unwrap(), flipped);
    }

    #[test]
    fn picard_number_bookkeeping() {
        let p4 = projective_space(4).unwrap();
        assert_eq!(p4.picard_number(), 1);
        let up = blow_up(&p4, &labels(&["x1", "x2", "x3"]), Label::from("w")).unwrap();
        assert_eq!(up.picard_number(), 2);
        let down = blow_down(&up, &PrimitiveRelation::unit(&["x1", "x2", "x3"], &["w"])).unwrap();
        assert_eq!(down.picard_number(), 1);
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"]);
        assert_eq!(
            star_flip(&f, &FlipSpec::new(wall)).unwrap().picard_number(),
            f.picard_number()
        );
    }

    #[test]
    fn outputs_pass_oracle() {
        let p4 = projective_space(4).unwrap();
        let up = blow_up(&p4, &labels(&["x1", "x2"]), Label::from("z")).unwrap();
        oracle::verify(&up).unwrap();
        let f = blowup_at_points(4, 2).unwrap();
        let wall = PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"]);
        let flipped = star_flip(&f, &FlipSpec::new(wall)).unwrap();
        oracle::verify(&flipped).unwrap();
    }
}
