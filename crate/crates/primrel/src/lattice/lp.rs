//! Exact rational LP feasibility over named variables, by phase-I simplex
//! with Bland's rule. Strict inequalities are homogenized with an auxiliary
//! slack bounded below by 1, so no epsilon is ever chosen.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Comparison operator of a linear constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

/// A linear constraint `sum(terms) rel rhs` with exact rational coefficients.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub terms: Vec<(String, BigRational)>,
    pub rel: Rel,
    pub rhs: BigRational,
}

impl Constraint {
    pub fn new(terms: Vec<(String, BigRational)>, rel: Rel, rhs: BigRational) -> Self {
        Constraint { terms, rel, rhs }
    }
}

/// Convenience constructor from integer coefficients.
pub fn constraint_i64(terms: &[(&str, i64)], rel: Rel, rhs: i64) -> Constraint {
    Constraint::new(
        terms
            .iter()
            .map(|(v, c)| (v.to_string(), BigRational::from_integer((*c).into())))
            .collect(),
        rel,
        BigRational::from_integer(rhs.into()),
    )
}

/// Returns a satisfying exact rational assignment, or `None` if the system is
/// infeasible. Deterministic for a fixed constraint order: variables are
/// processed in sorted name order and pivoting follows Bland's rule.
pub fn lp_feasible(constraints: &[Constraint]) -> Option<BTreeMap<String, BigRational>> {
    let names: BTreeSet<&str> = constraints
        .iter()
        .flat_map(|c| c.terms.iter().map(|(v, _)| v.as_str()))
        .collect();
    let names: Vec<&str> = names.into_iter().collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let nv = names.len();
    let has_strict = constraints
        .iter()
        .any(|c| matches!(c.rel, Rel::Lt | Rel::Gt));

    // Structural columns: x_i = plus_i - minus_i, then homogenizer t >= 1,
    // then the strictness slack eps >= 1 when needed.
    let t_col = 2 * nv;
    let eps_col = t_col + 1;
    let ns = if has_strict { 2 * nv + 2 } else { 2 * nv + 1 };

    let mut rows: Vec<(Vec<BigRational>, Rel, BigRational)> = Vec::new();
    for c in constraints {
        let mut coeffs = vec![BigRational::zero(); ns];
        for (v, a) in &c.terms {
            let i = index[v.as_str()];
            coeffs[2 * i] += a;
            coeffs[2 * i + 1] -= a;
        }
        // Homogenize: move the rhs onto t.
        coeffs[t_col] -= &c.rhs;
        let rel = match c.rel {
            Rel::Lt => {
                coeffs[eps_col] += BigRational::one();
                Rel::Le
            }
            Rel::Gt => {
                coeffs[eps_col] -= BigRational::one();
                Rel::Ge
            }
            r => r,
        };
        rows.push((coeffs, rel, BigRational::zero()));
    }
    {
        let mut t_row = vec![BigRational::zero(); ns];
        t_row[t_col] = BigRational::one();
        rows.push((t_row, Rel::Ge, BigRational::one()));
    }
    if has_strict {
        let mut e_row = vec![BigRational::zero(); ns];
        e_row[eps_col] = BigRational::one();
        rows.push((e_row, Rel::Ge, BigRational::one()));
    }

    let solution = phase_one(rows, ns)?;
    let t = solution[t_col].clone();
    debug_assert!(t.is_positive());
    let mut out = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let value = (&solution[2 * i] - &solution[2 * i + 1]) / &t;
        out.insert(name.to_string(), value);
    }
    Some(out)
}

/// Phase-I simplex over nonnegative structural variables. Returns the values
/// of the structural columns for some feasible point, or `None`.
fn phase_one(
    rows: Vec<(Vec<BigRational>, Rel, BigRational)>,
    ns: usize,
) -> Option<Vec<BigRational>> {
    let m = rows.len();
    // Column layout: structural | slacks | artificials | rhs.
    let mut slack_of = vec![None; m];
    let mut n_slack = 0;
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        if matches!(rel, Rel::Le | Rel::Ge) {
            slack_of[i] = Some(ns + n_slack);
            n_slack += 1;
        }
    }
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis = vec![usize::MAX; m];
    let artificial_base = ns + n_slack;
    let mut n_art = 0;
    for (i, (mut coeffs, mut rel, mut rhs)) in rows.into_iter().enumerate() {
        if rhs.is_negative() {
            for c in coeffs.iter_mut() {
                *c = -c.clone();
            }
            rhs = -rhs;
            rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                r => r,
            };
        }
        let mut row = vec![BigRational::zero(); ns + n_slack];
        row[..ns].clone_from_slice(&coeffs);
        match rel {
            Rel::Le => {
                row[slack_of[i].unwrap()] = BigRational::one();
                basis[i] = slack_of[i].unwrap();
            }
            Rel::Ge => {
                row[slack_of[i].unwrap()] = -BigRational::one();
            }
            Rel::Eq => {}
            _ => unreachable!(),
        }
        row.push(rhs);
        tab.push(row);
        if basis[i] == usize::MAX {
            n_art += 1;
        }
    }
    // Append artificial columns for rows without a basic slack.
    let total = ns + n_slack + n_art;
    let mut next_art = artificial_base;
    for i in 0..m {
        let rhs = tab[i].pop().unwrap();
        tab[i].resize(total, BigRational::zero());
        if basis[i] == usize::MAX {
            tab[i][next_art] = BigRational::one();
            basis[i] = next_art;
            next_art += 1;
        }
        tab[i].push(rhs);
    }

    // Objective: minimize the sum of artificials. Price out the artificial
    // basis: z[j] = sum over artificial-basic rows of tab[i][j].
    let mut z = vec![BigRational::zero(); total + 1];
    for i in 0..m {
        if basis[i] >= artificial_base {
            for j in 0..=total {
                z[j] = &z[j] + &tab[i][j];
            }
        }
    }

    loop {
        // Bland: smallest non-artificial column with positive reduced cost.
        let entering = (0..artificial_base).find(|&j| z[j].is_positive());
        let Some(col) = entering else {
            break;
        };
        // Ratio test, ties broken by smallest basis index.
        let mut best: Option<(BigRational, usize)> = None;
        for i in 0..m {
            if tab[i][col].is_positive() {
                let ratio = &tab[i][total] / &tab[i][col];
                match &best {
                    Some((r, bi)) if *r < ratio || (*r == ratio && basis[*bi] <= basis[i]) => {}
                    _ => best = Some((ratio, i)),
                }
            }
        }
        let Some((_, pivot_row)) = best else {
            // Objective is a sum of nonnegative variables, so it cannot be
            // unbounded below; an all-nonpositive column never occurs.
            unreachable!("phase-I objective unbounded");
        };
        pivot(&mut tab, &mut z, &mut basis, pivot_row, col, total);
    }

    if !z[total].is_zero() {
        return None;
    }
    let mut values = vec![BigRational::zero(); ns];
    for i in 0..m {
        if basis[i] < ns {
            values[basis[i]] = tab[i][total].clone();
        }
    }
    Some(values)
}

fn pivot(
    tab: &mut [Vec<BigRational>],
    z: &mut [BigRational],
    basis: &mut [usize],
    row: usize,
    col: usize,
    total: usize,
) {
    let inv = tab[row][col].recip();
    for j in 0..=total {
        tab[row][j] = &tab[row][j] * &inv;
    }
    for i in 0..tab.len() {
        if i != row && !tab[i][col].is_zero() {
            let f = tab[i][col].clone();
            for j in 0..=total {
                tab[i][j] = &tab[i][j] - &f * &tab[row][j];
            }
        }
    }
    if !z[col].is_zero() {
        let f = z[col].clone();
        for j in 0..=total {
            z[j] = &z[j] - &f * &tab[row][j];
        }
    }
    basis[row] = col;
}
