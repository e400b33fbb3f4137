//! Explicit upper bounds on the torsion of CM elliptic curves by degree.
//!
//! Over `FK` the torsion is `Z/a x Z/ab`. Full `a`-torsion and the squaring
//! rule force `d >= h phi_K(ab O_K) / (6b)`. Relaxing with `h >= 1` and
//! `phi_K(N O_K) >= phi(N)^2` gives a condition independent of the field:
//!
//! ```text
//! phi(ab)^2 <= 6 b d
//! ```
//!
//! and `B(d)` is the largest `a^2 b` satisfying it. The search region is
//! finite: `phi(n)^2 >= n/2` forces `a <= 12d`, and the explicit lower bound
//! `phi(n) > n / (e^g log log n + 3 / log log n)` (n >= 3) bounds `n = ab`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::squaring_degree_bound;
use crate::ideal::{phi_k_of_n, principal_ideal};
use crate::quad::{class_number, fundamental_discriminants, Discriminant};
use crate::rational::{rational, Rational};
use crate::ray_class::degree_bounds;
use crate::sieve::{euler_phi, isqrt, phi_segment, primes_up_to, SEGMENT_LEN};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Z/a x Z/ab`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorsionShape {
    pub a: u64,
    pub b: u64,
}

impl TorsionShape {
    pub fn new(a: u64, b: u64) -> Self {
        TorsionShape { a, b }
    }

    pub fn size(&self) -> u128 {
        self.a as u128 * self.a as u128 * self.b as u128
    }

    /// Larger size wins; among equal sizes the smaller `a`.
    fn beats(&self, other: &TorsionShape) -> bool {
        match self.size().cmp(&other.size()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.a, self.b) < (other.a, other.b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub d: u64,
    pub best_shape: TorsionShape,
    pub bound: u128,
    /// `B(d) / (d log log d)`, only for `d >= 3`.
    pub ratio: Option<f64>,
}

impl BoundRecord {
    fn new(d: u64, best_shape: TorsionShape) -> Self {
        BoundRecord {
            d,
            best_shape,
            bound: best_shape.size(),
            ratio: loglog_ratio(best_shape.size(), d),
        }
    }
}

/// `value / (d log log d)` for `d >= 3`.
pub fn loglog_ratio(value: u128, d: u64) -> Option<f64> {
    (d >= 3).then(|| value as f64 / (d as f64 * (d as f64).ln().ln()))
}

/// `phi(ab)^2 <= 6 b d`, in exact integers.
pub fn relaxed_feasible(d: u64, a: u64, b: u64) -> bool {
    let n = a as u128 * b as u128;
    let phi = euler_phi(u64::try_from(n).expect("ab exceeds u64")) as u128;
    phi * phi <= 6 * b as u128 * d as u128
}

fn totient_lower_bound_ratio(n: f64) -> f64 {
    // n / f(n)^2 with f(n) = e^g L + 3/L, L = log log n
    let l = n.ln().ln();
    let f = EULER_GAMMA.exp() * l + 3.0 / l;
    n / (f * f)
}

/// Every relaxed-feasible shape has `ab <= search_cutoff(d)`.
///
/// Feasibility needs `phi(n)^2 <= 6 d n` for `n = ab`, and `phi(n) > n / f(n)`
/// gives `phi(n)^2 / n > n / f(n)^2`, which is increasing on `n >= 3`. The
/// cutoff is the first `n` past which `n / f(n)^2` exceeds `6d` (with a small
/// margin for rounding).
pub fn search_cutoff(d: u64) -> u64 {
    let target = 6.0 * d as f64 * (1.0 + 1e-9);
    let mut hi = 4u64;
    while totient_lower_bound_ratio(hi as f64) <= target {
        hi *= 2;
    }
    let mut lo = 3u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if totient_lower_bound_ratio(mid as f64) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn divisors_from(factors: &[(u64, u32)], limit: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in factors {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                let v = divs[i] * pk;
                if v <= limit {
                    divs.push(v);
                }
            }
        }
    }
    divs
}

fn trial_factor(mut n: u64, primes: &[u64]) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &p in primes {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Every relaxed-feasible shape for `d`, visited as `(shape, least degree)`.
///
/// Visits each `(n, a)` with `a | n`, `n <= search_cutoff(d_max)` and least
/// feasible degree `ceil(a phi(n)^2 / 6n) <= d_max`.
fn for_each_candidate<T, Init, Fold, Reduce>(
    d_max: u64,
    init: Init,
    fold: Fold,
    reduce: Reduce,
) -> T
where
    T: Send,
    Init: Fn() -> T + Sync + Send,
    Fold: Fn(&mut T, TorsionShape, u64) + Sync + Send,
    Reduce: Fn(T, T) -> T + Sync + Send,
{
    let cutoff = search_cutoff(d_max);
    let primes = primes_up_to(isqrt(cutoff) + 1);
    let segments: Vec<u64> = (0..=cutoff / SEGMENT_LEN)
        .map(|i| i * SEGMENT_LEN)
        .collect();
    let dm = d_max as u128;
    segments
        .into_par_iter()
        .fold(&init, |mut acc, lo| {
            let lo = lo.max(1);
            let hi = (lo - lo % SEGMENT_LEN + SEGMENT_LEN).min(cutoff + 1);
            let phis = phi_segment(lo, hi, &primes);
            for (i, &phi) in phis.iter().enumerate() {
                let n = lo + i as u64;
                let phi_sq = phi as u128 * phi as u128;
                let n128 = n as u128;
                if phi_sq > 6 * dm * n128 {
                    continue;
                }
                // a phi^2 <= 6 d_max n
                let a_limit = (6 * dm * n128 / phi_sq).min(n128) as u64;
                for a in divisors_from(&trial_factor(n, &primes), a_limit) {
                    let need = (a as u128 * phi_sq).div_ceil(6 * n128).max(1) as u64;
                    fold(&mut acc, TorsionShape::new(a, n / a), need);
                }
            }
            acc
        })
        .reduce(&init, reduce)
}

/// `B(d)` for every `d` in `d_min..=d_max`.
pub fn bound_table(d_min: u64, d_max: u64) -> Result<Vec<BoundRecord>> {
    if d_min == 0 || d_min > d_max {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= d_min <= d_max, got {d_min}..{d_max}"
        )));
    }
    let len = (d_max - d_min + 1) as usize;
    let merge = |best: &mut Option<TorsionShape>, s: TorsionShape| {
        if best.is_none_or(|cur| s.beats(&cur)) {
            *best = Some(s);
        }
    };
    let buckets = for_each_candidate(
        d_max,
        || vec![None; len],
        |acc: &mut Vec<Option<TorsionShape>>, s, need| {
            merge(&mut acc[(need.max(d_min) - d_min) as usize], s)
        },
        |mut x, y| {
            for (slot, s) in x.iter_mut().zip(y) {
                if let Some(s) = s {
                    merge(slot, s);
                }
            }
            x
        },
    );
    let mut out = Vec::with_capacity(len);
    let mut best: Option<TorsionShape> = None;
    for (i, s) in buckets.into_iter().enumerate() {
        if let Some(s) = s {
            merge(&mut best, s);
        }
        let shape = best.expect("(1,1) is feasible in every degree");
        out.push(BoundRecord::new(d_min + i as u64, shape));
    }
    Ok(out)
}

/// `B(d)` with its maximizing shape (ties: smallest `a`, then `b`).
pub fn torsion_bound(d: u64) -> Result<BoundRecord> {
    Ok(bound_table(d, d)?.remove(0))
}

/// All relaxed-feasible shapes for degree `d`, ordered by `(a, b)`.
pub fn relaxed_region(d: u64) -> Result<Vec<TorsionShape>> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    let mut shapes = for_each_candidate(
        d,
        Vec::new,
        |acc: &mut Vec<TorsionShape>, s, _| acc.push(s),
        |mut x, y| {
            x.extend(y);
            x
        },
    );
    shapes.sort();
    Ok(shapes)
}

/// Supremum of `B(d) / (d log log d)` over a degree range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub d_min: u64,
    pub d_max: u64,
    pub value: f64,
    pub argmax: u64,
}

/// Running supremum over records with `d >= 3`; `None` if there are none.
pub fn constant_from_records(records: &[BoundRecord]) -> Option<ConstantEstimate> {
    let mut best: Option<(f64, u64)> = None;
    for r in records {
        if let Some(ratio) = r.ratio {
            if best.is_none_or(|(v, _)| ratio > v) {
                best = Some((ratio, r.d));
            }
        }
    }
    let (value, argmax) = best?;
    Some(ConstantEstimate {
        d_min: records.first()?.d,
        d_max: records.last()?.d,
        value,
        argmax,
    })
}

pub fn explicit_constant(d_min: u64, d_max: u64) -> Result<ConstantEstimate> {
    if d_min < 3 || d_min > d_max {
        return Err(Error::InvalidArgument(format!(
            "need 3 <= d_min <= d_max, got {d_min}..{d_max}"
        )));
    }
    let records = bound_table(d_min, d_max)?;
    Ok(constant_from_records(&records).expect("range contains d >= 3"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    #[serde(rename = "D")]
    pub disc: Discriminant,
    pub a: u64,
    pub b: u64,
    /// `h phi_K(ab O_K) / (6b)`.
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    pub feasible: bool,
}

/// Exact per-field check of `d >= h phi_K(ab O_K)/(6b)` over the relaxed
/// region, for every fundamental `|D| <= d_cap`.
///
/// Rows come sorted by `a^2 b` descending, then `|D|`, `a`, `b`. Fields past
/// `d_cap` are not covered, so this table is diagnostic only.
pub fn refined_table(
    d: u64,
    d_cap: u64,
    class_numbers: impl Fn(Discriminant) -> u64 + Sync,
) -> Result<Vec<FeasibilityRow>> {
    if d_cap < 3 {
        return Err(Error::InvalidArgument("D_cap must be >= 3".into()));
    }
    let region = relaxed_region(d)?;
    let discs = fundamental_discriminants(d_cap);
    let mut rows: Vec<FeasibilityRow> = discs
        .par_iter()
        .map(|&disc| -> Result<Vec<FeasibilityRow>> {
            let h = class_numbers(disc) as u128;
            region
                .iter()
                .map(|s| {
                    let phi = phi_k_of_n(disc, s.a * s.b)? as u128;
                    let lhs = rational(h * phi, 6 * s.b as u128);
                    Ok(FeasibilityRow {
                        disc,
                        a: s.a,
                        b: s.b,
                        feasible: lhs <= rational(d as u128, 1),
                        lhs,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|x, y| {
        let sx = TorsionShape::new(x.a, x.b).size();
        let sy = TorsionShape::new(y.a, y.b).size();
        sy.cmp(&sx)
            .then(x.disc.abs().cmp(&y.disc.abs()))
            .then((x.a, x.b).cmp(&(y.a, y.b)))
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    pub relation: Relation,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

impl ChainStep {
    fn new(label: &str, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        let holds = match relation {
            Relation::AtLeast => lhs >= rhs,
            Relation::AtMost => lhs <= rhs,
        };
        ChainStep {
            label: label.to_string(),
            lhs,
            relation,
            rhs,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub d: u64,
    #[serde(rename = "D")]
    pub disc: Discriminant,
    pub a: u64,
    pub b: u64,
    pub h: u64,
    pub steps: Vec<ChainStep>,
    pub first_failure: Option<usize>,
}

impl ChainTrace {
    pub fn holds(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Evaluates each inequality of the degree chain for a field of degree `d`,
/// a fundamental discriminant and a torsion shape `Z/a x Z/ab`.
pub fn chain_audit(d: u64, disc: Discriminant, a: u64, b: u64) -> Result<ChainTrace> {
    let disc = disc.require_fundamental()?;
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    let h = class_number(disc);
    let n = a.checked_mul(b).ok_or(Error::Overflow("ab"))?;
    let int = |v: u128| rational(v, 1);

    // [K^(c):Q] = 2 [K^(c):K] >= 2 h phi_K(c) / 6
    let ray_a = degree_bounds(disc, &principal_ideal(disc, a)?)?.lower_weak * int(2);
    let ray_ab = degree_bounds(disc, &principal_ideal(disc, n)?)?.lower_weak * int(2);
    let ext = squaring_degree_bound(a, b)? as u128;
    let phi_ab = phi_k_of_n(disc, n)? as u128;
    let norm_ab = n as u128 * n as u128;

    let steps = vec![
        ChainStep::new(
            "2d >= [K^(aO_K):Q] >= h phi_K(aO_K)/3",
            int(2 * d as u128),
            Relation::AtLeast,
            ray_a,
        ),
        ChainStep::new(
            "2d [L:FK] >= [K^(abO_K):Q] >= h phi_K(abO_K)/3",
            int(2 * d as u128 * ext),
            Relation::AtLeast,
            ray_ab,
        ),
        ChainStep::new(
            "d >= h phi_K(abO_K)/(6b)",
            int(d as u128),
            Relation::AtLeast,
            rational(h as u128 * phi_ab, 6 * b as u128),
        ),
        ChainStep::new(
            "a^2 b <= 6 (d/h) |abO_K| / phi_K(abO_K)",
            int(TorsionShape::new(a, b).size()),
            Relation::AtMost,
            rational(6 * d as u128 * norm_ab, h as u128 * phi_ab),
        ),
    ];
    let first_failure = steps.iter().position(|s| !s.holds);
    Ok(ChainTrace {
        d,
        disc,
        a,
        b,
        h,
        steps,
        first_failure,
    })
}
