//! Builds projective space and its blow-ups at torus-invariant points, runs
//! the staged anti-flip schedule, and classifies the outcome.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::mori;
use crate::presentation::{FanPresentation, Label, PrimitiveRelation};
use crate::transforms::{self, FlipSpec};

/// Endpoint classification of a construction run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The endpoint is a (P^1)^n-bundle over projective space.
    BundleFano,
    /// Fano endpoint at stage c = d/2 with only small extremal rays.
    SmallFano { c: usize },
    /// A degree-zero scheduled wall (a flop) blocks the run.
    FlopObstruction { r: usize },
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::BundleFano => "bundle_fano",
            Outcome::SmallFano { .. } => "small_fano",
            Outcome::FlopObstruction { .. } => "flop_obstruction",
        }
    }
}

/// One executed wall crossing.
#[derive(Clone, Debug)]
pub struct ScheduleStep {
    /// Stage index r of the presentation the wall was crossed in.
    pub stage: usize,
    pub wall: PrimitiveRelation,
    /// Presentation reached after the crossing.
    pub result: FanPresentation,
}

/// Full record of a run: crossed walls, stage snapshots and the outcome.
#[derive(Clone, Debug)]
pub struct ConstructionReport {
    pub d: usize,
    pub n: usize,
    pub schedule: Vec<ScheduleStep>,
    /// Presentations at integer stages, keyed by r (starting at r = 1).
    pub stage_snapshots: Vec<(usize, FanPresentation)>,
    pub outcome: Outcome,
    pub flip_count: usize,
}

impl ConstructionReport {
    pub fn final_presentation(&self) -> &FanPresentation {
        &self.stage_snapshots.last().expect("at least one stage").1
    }

    /// Every presentation the run touched, intermediates included.
    pub fn all_presentations(&self) -> Vec<&FanPresentation> {
        let mut out: Vec<&FanPresentation> = vec![&self.stage_snapshots[0].1];
        out.extend(self.schedule.iter().map(|s| &s.result));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "n": self.n,
            "outcome": self.outcome.as_str(),
            "c": match &self.outcome {
                Outcome::SmallFano { c } => json!(c),
                _ => Value::Null,
            },
            "obstruction_stage": match &self.outcome {
                Outcome::FlopObstruction { r } => json!(r),
                _ => Value::Null,
            },
            "flip_count": self.flip_count,
            "schedule": self
                .schedule
                .iter()
                .map(|s| json!({
                    "stage": s.stage,
                    "wall": s.wall.to_string(),
                    "lhs": s.wall.lhs.iter().map(|l| l.0.clone()).collect::<Vec<_>>(),
                }))
                .collect::<Vec<_>>(),
            "stages": self
                .stage_snapshots
                .iter()
                .map(|(r, _)| json!(r))
                .collect::<Vec<_>>(),
        })
    }
}

/// Order in which each stage's walls are crossed. The endpoint is
/// order-independent; lexicographic is the deterministic default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleOrder {
    Lex,
    Reversed,
    /// Deterministic permutation from a seed, for order-independence checks.
    Shuffled(u64),
}

/// The fan of P^d: generators x_1..x_{d+1} with the single relation
/// x_1 + ... + x_{d+1} = 0.
pub fn projective_space(d: usize) -> Result<FanPresentation> {
    if d < 1 {
        return Err(Error::BadArgument("dimension must be at least 1".into()));
    }
    let mut generators = BTreeMap::new();
    for i in 1..=d {
        generators.insert(Label::new(format!("x{i}")), LatticePoint::basis(d, i - 1));
    }
    generators.insert(
        Label::new(format!("x{}", d + 1)),
        LatticePoint(vec![-BigInt::one(); d]),
    );
    let lhs: BTreeSet<Label> = generators.keys().cloned().collect();
    let relation = PrimitiveRelation {
        lhs,
        rhs: BTreeMap::new(),
    };
    Ok(FanPresentation::new(d, generators, vec![relation]))
}

/// B^d_n: the blow-up of P^d at the n torus-invariant points opposite
/// x_1..x_n, so the new rays satisfy y_i = -x_i.
pub fn blowup_at_points(d: usize, n: usize) -> Result<FanPresentation> {
    if d < 2 || n < 1 || n > d + 1 {
        return Err(Error::BadArgument(format!(
            "need d >= 2 and 1 <= n <= d+1, got ({d},{n})"
        )));
    }
    let mut f = projective_space(d)?;
    for i in 1..=n {
        let center: BTreeSet<Label> = (1..=d + 1)
            .filter(|&j| j != i)
            .map(|j| Label::new(format!("x{j}")))
            .collect();
        f = transforms::blow_up(&f, &center, Label::new(format!("y{i}")))?;
    }
    let expected = stage_relations(d, n, 1);
    assert_eq!(
        f.relations.iter().cloned().collect::<BTreeSet<_>>(),
        expected.into_iter().collect::<BTreeSet<_>>(),
        "blow-up of P^{d} at {n} points does not match the closed-form relations"
    );
    Ok(f)
}

fn x_label(i: usize) -> Label {
    Label::new(format!("x{i}"))
}

fn y_label(i: usize) -> Label {
    Label::new(format!("y{i}"))
}

/// The closed-form relation families (I)/(II)/(III) of the stage-r
/// presentation of B^d_n. Stage 1 is B^d_n itself.
pub fn stage_relations(d: usize, n: usize, r: usize) -> Vec<PrimitiveRelation> {
    let mut out = Vec::new();
    // (I) x_i + y_i = 0.
    for i in 1..=n {
        out.push(PrimitiveRelation {
            lhs: [x_label(i), y_label(i)].into(),
            rhs: BTreeMap::new(),
        });
    }
    // (II) sum of the x's outside an r-tuple equals the matching y's.
    for tuple in (1..=n).combinations(r) {
        let lhs: BTreeSet<Label> = (1..=d + 1)
            .filter(|j| !tuple.contains(j))
            .map(x_label)
            .collect();
        let rhs: BTreeMap<Label, BigInt> =
            tuple.iter().map(|&i| (y_label(i), BigInt::one())).collect();
        out.push(PrimitiveRelation { lhs, rhs });
    }
    // (III) an (r+1)-tuple of y's equals the x's outside it.
    for tuple in (1..=n).combinations(r + 1) {
        let lhs: BTreeSet<Label> = tuple.iter().map(|&i| y_label(i)).collect();
        let rhs: BTreeMap<Label, BigInt> = (1..=d + 1)
            .filter(|j| !tuple.contains(j))
            .map(|j| (x_label(j), BigInt::one()))
            .collect();
        out.push(PrimitiveRelation { lhs, rhs });
    }
    out.sort();
    out
}

/// Reads (d, n) off a presentation with the canonical x/y labeling.
fn stage_shape(f: &FanPresentation) -> Result<(usize, usize)> {
    let d = f.dim;
    let mut xs = 0usize;
    let mut ys = 0usize;
    for label in f.generators.keys() {
        let (kind, idx) = label.0.split_at(1);
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::NotStagePresentation(format!("unexpected label {label}")))?;
        match kind {
            "x" if idx >= 1 => xs = xs.max(idx),
            "y" if idx >= 1 => ys = ys.max(idx),
            _ => {
                return Err(Error::NotStagePresentation(format!(
                    "unexpected label {label}"
                )))
            }
        }
    }
    if xs != d + 1 || f.generators.len() != xs + ys {
        return Err(Error::NotStagePresentation(format!(
            "expected x1..x{} and y1..y{}, found {} generators",
            d + 1,
            ys,
            f.generators.len()
        )));
    }
    Ok((d, ys))
}

/// The ordered stage-r wall list: every family-(III) relation, in
/// lexicographic order of its y-index tuple.
pub fn antiflip_schedule(f: &FanPresentation, r: usize) -> Result<Vec<FlipSpec>> {
    let (d, n) = stage_shape(f)?;
    let expected = stage_relations(d, n, r);
    if f.relations.iter().cloned().collect::<BTreeSet<_>>()
        != expected.iter().cloned().collect::<BTreeSet<_>>()
    {
        return Err(Error::NotStagePresentation(format!(
            "relations do not match stage r={r} of B^{d}_{n}"
        )));
    }
    let mut specs = Vec::new();
    for tuple in (1..=n).combinations(r + 1) {
        let lhs: BTreeSet<Label> = tuple.iter().map(|&i| y_label(i)).collect();
        let relation = f
            .find_relation_by_lhs(&lhs)
            .expect("stage shape checked")
            .clone();
        specs.push(FlipSpec::new(relation));
    }
    Ok(specs)
}

/// Number of anti-flips the theory predicts for (d, n): 2^n - n - 1 in the
/// bundle case, the partial binomial sum up to c = d/2 in the small-type
/// case, absent when the run hits a flop.
pub fn predicted_flip_count(d: usize, n: usize) -> Option<usize> {
    if 2 * n - 1 < d {
        return Some((1usize << n) - n - 1);
    }
    if d % 2 != 0 {
        return None;
    }
    let c = d / 2;
    Some((2..=c).map(|r| binomial(n, r)).sum())
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Runs the staged anti-flip construction from B^d_n, crossing walls in
/// lexicographic order.
pub fn run_construction(d: usize, n: usize) -> Result<ConstructionReport> {
    run_construction_ordered(d, n, ScheduleOrder::Lex)
}

/// As `run_construction`, with a chosen within-stage wall order.
pub fn run_construction_ordered(
    d: usize,
    n: usize,
    order: ScheduleOrder,
) -> Result<ConstructionReport> {
    if d < 3 || n < 2 || n > d + 1 {
        return Err(Error::BadArgument(format!(
            "need d >= 3 and 2 <= n <= d+1, got ({d},{n})"
        )));
    }
    let mut f = blowup_at_points(d, n)?;
    let mut r = 1usize;
    let mut schedule: Vec<ScheduleStep> = Vec::new();
    let mut snapshots = vec![(1usize, f.clone())];

    let outcome = loop {
        if r == n {
            break fano_endpoint(d, n, r, &f)?;
        }
        // Family (III) at stage r has degree 2r+1-d.
        let wall_degree = 2 * (r as i64) + 1 - d as i64;
        if wall_degree == 0 {
            break Outcome::FlopObstruction { r };
        }
        if wall_degree > 0 {
            break fano_endpoint(d, n, r, &f)?;
        }
        let mut specs = antiflip_schedule(&f, r)?;
        apply_order(&mut specs, order);
        for (step, spec) in specs.into_iter().enumerate() {
            if !mori::is_extremal(&f, &spec.relation)? {
                return Err(Error::Aborted {
                    stage: r,
                    step,
                    reason: format!("scheduled wall {} is not extremal", spec.relation),
                });
            }
            let next = transforms::star_flip(&f, &spec).map_err(|e| Error::Aborted {
                stage: r,
                step,
                reason: e.to_string(),
            })?;
            schedule.push(ScheduleStep {
                stage: r,
                wall: spec.relation.clone(),
                result: next.clone(),
            });
            f = next;
        }
        r += 1;
        snapshots.push((r, f.clone()));
    };

    Ok(ConstructionReport {
        d,
        n,
        flip_count: schedule.len(),
        schedule,
        stage_snapshots: snapshots,
        outcome,
    })
}

fn apply_order(specs: &mut Vec<FlipSpec>, order: ScheduleOrder) {
    match order {
        ScheduleOrder::Lex => {}
        ScheduleOrder::Reversed => specs.reverse(),
        ScheduleOrder::Shuffled(seed) => {
            // Fisher-Yates driven by a splitmix64 stream; no external RNG
            // needed for a deterministic permutation.
            let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
            let mut next = move || {
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^ (z >> 31)
            };
            for i in (1..specs.len()).rev() {
                let j = (next() % (i as u64 + 1)) as usize;
                specs.swap(i, j);
            }
        }
    }
}

/// Classifies and sanity-checks a Fano endpoint.
fn fano_endpoint(d: usize, n: usize, r: usize, f: &FanPresentation) -> Result<Outcome> {
    if !f.is_fano()? {
        return Err(Error::Aborted {
            stage: r,
            step: 0,
            reason: "endpoint is not Fano".into(),
        });
    }
    if 2 * n - 1 < d {
        // Bundle case: relations must be exactly (I) plus the single bundle
        // relation x_{n+1}+...+x_{d+1} = y_1+...+y_n.
        let expected = stage_relations(d, n, n);
        if f.relations.iter().cloned().collect::<BTreeSet<_>>()
            != expected.into_iter().collect::<BTreeSet<_>>()
        {
            return Err(Error::Aborted {
                stage: r,
                step: 0,
                reason: "bundle endpoint relations do not match the closed form".into(),
            });
        }
        Ok(Outcome::BundleFano)
    } else {
        Ok(Outcome::SmallFano { c: r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn projective_space_shape() {
        let p2 = projective_space(2).unwrap();
        assert_eq!(p2.generators.len(), 3);
        assert_eq!(p2.relations.len(), 1);
        assert!(p2.relations[0].rhs.is_empty());

        let p5 = projective_space(5).unwrap();
        assert_eq!(p5.relations[0].degree(), BigInt::from(6));

        assert!(projective_space(0).is_err());
    }

    #[test]
    fn blowup_relation_counts() {
        for d in 3..=7 {
            for n in 1..=d + 1 {
                let f = blowup_at_points(d, n).unwrap();
                assert_eq!(f.relations.len(), n * (n + 3) / 2, "({d},{n})");
                assert!(f.validate().is_empty(), "({d},{n})");
            }
        }
    }

    #[test]
    fn blowup_32_relations() {
        let f = blowup_at_points(3, 2).unwrap();
        let expected: BTreeSet<PrimitiveRelation> = [
            PrimitiveRelation::unit(&["x1", "y1"], &[]),
            PrimitiveRelation::unit(&["x2", "y2"], &[]),
            PrimitiveRelation::unit(&["x2", "x3", "x4"], &["y1"]),
            PrimitiveRelation::unit(&["x1", "x3", "x4"], &["y2"]),
            PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4"]),
        ]
        .into();
        assert_eq!(
            f.relations.iter().cloned().collect::<BTreeSet<_>>(),
            expected
        );
    }

    #[test]
    fn blowup_rejects_bad_arguments() {
        assert!(blowup_at_points(4, 0).is_err());
        assert!(blowup_at_points(4, 6).is_err());
        assert!(blowup_at_points(1, 1).is_err());
    }

    #[test]
    fn schedule_counts_and_order() {
        let f = blowup_at_points(4, 3).unwrap();
        let specs = antiflip_schedule(&f, 1).unwrap();
        let lhs: Vec<String> = specs
            .iter()
            .map(|s| s.relation.lhs.iter().map(|l| l.as_str()).join(","))
            .collect();
        assert_eq!(lhs, vec!["y1,y2", "y1,y3", "y2,y3"]);

        let f = blowup_at_points(4, 2).unwrap();
        let specs = antiflip_schedule(&f, 1).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(
            specs[0].relation,
            PrimitiveRelation::unit(&["y1", "y2"], &["x3", "x4", "x5"])
        );
    }

    #[test]
    fn schedule_rejects_non_stage_presentations() {
        let p3 = projective_space(3).unwrap();
        assert!(matches!(
            antiflip_schedule(&p3, 1),
            Err(Error::NotStagePresentation(_))
        ));
        let f = blowup_at_points(4, 3).unwrap();
        assert!(matches!(
            antiflip_schedule(&f, 2),
            Err(Error::NotStagePresentation(_))
        ));
    }

    #[test]
    fn predicted_counts() {
        assert_eq!(predicted_flip_count(5, 2), Some(1));
        assert_eq!(predicted_flip_count(7, 3), Some(4));
        assert_eq!(predicted_flip_count(4, 5), Some(10));
        assert_eq!(predicted_flip_count(6, 4), Some(10));
        assert_eq!(predicted_flip_count(5, 3), None);
        assert_eq!(predicted_flip_count(3, 2), None);
    }

    #[test]
    fn run_42_is_single_antiflip_to_bundle() {
        let report = run_construction(4, 2).unwrap();
        assert_eq!(report.outcome, Outcome::BundleFano);
        assert_eq!(report.flip_count, 1);
        let expected = stage_relations(4, 2, 2);
        assert_eq!(
            report
                .final_presentation()
                .relations
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>(),
            expected.into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn run_43_small_fano() {
        let report = run_construction(4, 3).unwrap();
        assert_eq!(report.outcome, Outcome::SmallFano { c: 2 });
        assert_eq!(report.flip_count, 3);
        let f = report.final_presentation();
        assert_eq!(f.relations.len(), 7);
        assert!(f.relations.iter().all(|r| r.degree() >= BigInt::one()));
        assert!(f.is_fano().unwrap());
    }

    #[test]
    fn run_32_hits_flop() {
        let report = run_construction(3, 2).unwrap();
        assert_eq!(report.outcome, Outcome::FlopObstruction { r: 1 });
        assert_eq!(report.flip_count, 0);
        // The blocking wall y1+y2 = x3+x4 has degree zero.
        let wall = report
            .final_presentation()
            .find_relation_by_lhs(&["y1", "y2"].iter().map(|&s| Label::from(s)).collect())
            .unwrap();
        assert_eq!(wall.degree(), BigInt::zero());
    }

    #[test]
    fn run_rejects_bad_arguments() {
        assert!(run_construction(2, 2).is_err());
        assert!(run_construction(4, 1).is_err());
    }
}
