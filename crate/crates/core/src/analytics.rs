//! Numerical estimates around the Euler function of imaginary quadratic
//! fields: Mertens products, character Euler products, `L(1, chi)`, the
//! prime character sum, and empirical scans of `h phi_K(c) log log|c| / |c|`.
//!
//! Everything here is floating point and diagnostic; the exact bounds live
//! in `ideal` and `feasibility`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::EULER_GAMMA;
use crate::ideal::{ideals_up_to_norm, phi_k, FactoredIdeal};
use crate::quad::{class_number, kronecker, l1_value, Discriminant};
use crate::sieve::primes_up_to;

/// Kahan-Babuska compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEstimate {
    pub x: u64,
    pub value: f64,
    /// Number of primes `p <= x` used.
    pub terms: u64,
}

/// `prod_{p <= x} (1 - coeff(p)/p)`, accumulated as a sum of logs.
fn euler_product(x: u64, coeff: impl Fn(u64) -> i8) -> ProductEstimate {
    let primes = primes_up_to(x);
    let mut logs = CompensatedSum::default();
    for &p in &primes {
        let c = coeff(p);
        if c != 0 {
            logs.add((-(c as f64) / p as f64).ln_1p());
        }
    }
    ProductEstimate {
        x,
        value: logs.total().exp(),
        terms: primes.len() as u64,
    }
}

/// `prod_{p <= x} (1 - 1/p)`.
pub fn mertens_product(x: u64) -> Result<ProductEstimate> {
    if x < 2 {
        return Err(Error::InvalidArgument("x must be >= 2".into()));
    }
    Ok(euler_product(x, |_| 1))
}

/// `prod_{p <= x} (1 - chi(p)/p)`.
pub fn char_euler_product(d: Discriminant, x: u64) -> Result<ProductEstimate> {
    let d = d.require_fundamental()?;
    if x < 2 {
        return Err(Error::InvalidArgument("x must be >= 2".into()));
    }
    Ok(euler_product(x, |p| kronecker(d, p)))
}

/// `L(1, chi) = 2 pi h / (w sqrt|D|)`.
pub fn l1_from_class_number(d: Discriminant) -> Result<f64> {
    let d = d.require_fundamental()?;
    Ok(l1_value(d, class_number(d)))
}

/// `S(t) = sum_{p <= t} chi(p) log p`.
pub fn char_sum_s(d: Discriminant, t: u64) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument("t must be >= 2".into()));
    }
    let mut acc = CompensatedSum::default();
    for p in primes_up_to(t) {
        match kronecker(d, p) {
            0 => {}
            c => acc.add(c as f64 * (p as f64).ln()),
        }
    }
    Ok(acc.total())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    #[serde(rename = "D")]
    pub disc: Discriminant,
    #[serde(rename = "X")]
    pub x: u64,
    pub min_value: f64,
    pub argmin_ideal: FactoredIdeal,
}

fn scan_value(phi: u64, norm: u64) -> f64 {
    let n = norm as f64;
    phi as f64 * n.ln().ln() / n
}

/// Minimum of `h phi_K(c) log log|c| / |c|` over ideals with `3 <= |c| <= X`.
pub fn phi_bound_scan(d: Discriminant, x: u64) -> Result<ScanResult> {
    let d = d.require_fundamental()?;
    phi_bound_scan_with(d, x, class_number(d))
}

/// [`phi_bound_scan`] with the class number supplied by the caller.
pub fn phi_bound_scan_with(d: Discriminant, x: u64, h: u64) -> Result<ScanResult> {
    if x < 3 {
        return Err(Error::InvalidArgument("X must be >= 3".into()));
    }
    let mut best: Option<(f64, FactoredIdeal)> = None;
    for c in ideals_up_to_norm(d, x)? {
        let norm = c.norm();
        if norm < 3 {
            continue;
        }
        let v = h as f64 * scan_value(phi_k(&c), norm);
        if best.as_ref().is_none_or(|(m, _)| v < *m) {
            best = Some((v, c));
        }
    }
    // norm 4 is always realized: by 2 O_K, or by a prime above 2 squared
    let (min_value, argmin_ideal) = best.expect("some ideal has norm in [3, X]");
    Ok(ScanResult {
        disc: d,
        x,
        min_value,
        argmin_ideal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauCheck {
    #[serde(rename = "D")]
    pub disc: Discriminant,
    #[serde(rename = "X")]
    pub x: u64,
    /// Minimum of `phi_K(a) log log|a| / |a|` over `X/10 <= |a| <= X`.
    pub empirical_min_tail: f64,
    /// `e^-g / L(1, chi)`.
    pub target: f64,
    pub argmin_ideal: FactoredIdeal,
}

pub fn landau_liminf_check(d: Discriminant, x: u64) -> Result<LandauCheck> {
    let d = d.require_fundamental()?;
    landau_liminf_check_with(d, x, class_number(d))
}

pub fn landau_liminf_check_with(d: Discriminant, x: u64, h: u64) -> Result<LandauCheck> {
    if x < 100 {
        return Err(Error::InvalidArgument("X must be >= 100".into()));
    }
    let lo = x.div_ceil(10);
    let mut best: Option<(f64, FactoredIdeal)> = None;
    for c in ideals_up_to_norm(d, x)? {
        let norm = c.norm();
        if norm < lo {
            continue;
        }
        let v = scan_value(phi_k(&c), norm);
        if best.as_ref().is_none_or(|(m, _)| v < *m) {
            best = Some((v, c));
        }
    }
    let (empirical_min_tail, argmin_ideal) = best.expect("norms in [X/10, X] exist");
    Ok(LandauCheck {
        disc: d,
        x,
        empirical_min_tail,
        target: (-EULER_GAMMA).exp() / l1_value(d, h),
        argmin_ideal,
    })
}
