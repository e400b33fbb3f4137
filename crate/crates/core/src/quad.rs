//! Imaginary quadratic discriminants: fundamentality, the Kronecker character,
//! unit counts and class numbers.
//!
//! Class numbers are computed two ways. [`class_number`] counts reduced
//! primitive forms and works for any order discriminant;
//! [`class_number_dirichlet`] evaluates the finite character sum
//! `h = w/(2|D|) * |sum_{k=1}^{|D|} chi(k) k|` and only accepts fundamental
//! discriminants. The two never share code beyond [`kronecker`].

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::{is_prime, isqrt};

/// A negative discriminant `D = 0, 1 (mod 4)`, fundamental or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Discriminant {
    value: i64,
    is_fundamental: bool,
}

impl Discriminant {
    /// Accepts any order discriminant.
    pub fn new(value: i64) -> Result<Self> {
        if !is_discriminant(value) {
            return Err(Error::NotADiscriminant(value));
        }
        Ok(Discriminant {
            value,
            is_fundamental: fundamental_unchecked(value),
        })
    }

    /// Accepts only fundamental discriminants.
    pub fn fundamental(value: i64) -> Result<Self> {
        let d = Self::new(value)?;
        if d.is_fundamental {
            Ok(d)
        } else {
            Err(Error::NotFundamental(value))
        }
    }

    pub fn value(self) -> i64 {
        self.value
    }

    pub fn abs(self) -> u64 {
        self.value.unsigned_abs()
    }

    pub fn is_fundamental(self) -> bool {
        self.is_fundamental
    }

    pub(crate) fn require_fundamental(self) -> Result<Self> {
        if self.is_fundamental {
            Ok(self)
        } else {
            Err(Error::NotFundamental(self.value))
        }
    }
}

impl TryFrom<i64> for Discriminant {
    type Error = Error;
    fn try_from(value: i64) -> Result<Self> {
        Discriminant::new(value)
    }
}

impl From<Discriminant> for i64 {
    fn from(d: Discriminant) -> i64 {
        d.value
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn is_discriminant(value: i64) -> bool {
    value < 0 && matches!(value.rem_euclid(4), 0 | 1)
}

fn is_squarefree(n: u64) -> bool {
    if n.is_multiple_of(4) {
        return false;
    }
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn fundamental_unchecked(value: i64) -> bool {
    match value.rem_euclid(4) {
        1 => is_squarefree(value.unsigned_abs()),
        0 => {
            let m = value / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Whether `value` is a fundamental negative discriminant.
///
/// Values that are not discriminants at all are an error, distinct from a
/// plain `false`.
pub fn is_fundamental(value: i64) -> Result<bool> {
    if !is_discriminant(value) {
        return Err(Error::NotADiscriminant(value));
    }
    Ok(fundamental_unchecked(value))
}

/// Negative fundamental discriminants with `|D| <= cap`, ordered by `|D|`.
pub fn fundamental_discriminants(cap: u64) -> Vec<Discriminant> {
    (3..=cap as i64)
        .map(|n| -n)
        .filter(|&v| is_discriminant(v) && fundamental_unchecked(v))
        .map(|v| Discriminant {
            value: v,
            is_fundamental: true,
        })
        .collect()
}

/// Jacobi symbol `(a | n)` for odd `n >= 1`.
fn jacobi(a: i64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Kronecker symbol `(D | n)` for `n >= 1`: the quadratic character of the
/// order of discriminant `D`.
pub fn kronecker(d: Discriminant, n: u64) -> i8 {
    assert!(n >= 1, "kronecker symbol needs n >= 1");
    let d = d.value;
    let tz = n.trailing_zeros();
    let odd = n >> tz;
    let mut sign = 1i8;
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        // (D|2) = 1 for D = +-1 mod 8, -1 for D = +-3 mod 8
        if tz % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            sign = -1;
        }
    }
    sign * jacobi(d, odd)
}

/// Number of roots of unity in the order of discriminant `D`.
pub fn unit_count(d: Discriminant) -> u32 {
    match d.value {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

impl SplittingType {
    pub fn from_character(chi: i8) -> Self {
        match chi {
            1 => SplittingType::Split,
            -1 => SplittingType::Inert,
            _ => SplittingType::Ramified,
        }
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplittingType::Split => "Split",
            SplittingType::Inert => "Inert",
            SplittingType::Ramified => "Ramified",
        })
    }
}

/// Decomposition type of the rational prime `p` in the order of
/// discriminant `D`.
pub fn splitting_type(d: Discriminant, p: u64) -> Result<SplittingType> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(SplittingType::from_character(kronecker(d, p)))
}

/// Positive definite binary quadratic form `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryQuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryQuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryQuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }
}

impl fmt::Display for BinaryQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// All reduced primitive forms of discriminant `D`, one per proper
/// equivalence class. Sorted by `(a, b)`.
pub fn reduced_forms(d: Discriminant) -> Vec<BinaryQuadraticForm> {
    let dv = d.value;
    let a_max = isqrt(d.abs() / 3) as i64;
    let mut forms = Vec::new();
    for a in 1..=a_max {
        for b in -a..=a {
            // b has the parity of D
            if (b - dv).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - dv;
            if num % (4 * a) != 0 {
                continue;
            }
            let form = BinaryQuadraticForm::new(a, b, num / (4 * a));
            if form.is_reduced() && form.is_primitive() {
                forms.push(form);
            }
        }
    }
    forms
}

/// Class number of the order of discriminant `D`, by counting reduced forms.
pub fn class_number(d: Discriminant) -> u64 {
    reduced_forms(d).len() as u64
}

/// Class number of a fundamental discriminant from the finite character sum.
pub fn class_number_dirichlet(d: Discriminant) -> Result<u64> {
    let d = d.require_fundamental()?;
    let m = d.abs();
    let sum: i128 = (1..=m).map(|k| kronecker(d, k) as i128 * k as i128).sum();
    let num = unit_count(d) as u128 * sum.unsigned_abs();
    let den = 2 * m as u128;
    // the sum is always divisible; anything else means the character is wrong
    assert_eq!(num % den, 0, "character sum for {d} not divisible by 2|D|");
    Ok((num / den) as u64)
}

/// `h`, `w` and `L(1, chi)` of a fundamental discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConstants {
    pub h: u64,
    pub w: u32,
    pub l1: f64,
}

/// `L(1, chi) = 2 pi h / (w sqrt|D|)`.
pub fn l1_value(d: Discriminant, h: u64) -> f64 {
    2.0 * PI * h as f64 / (unit_count(d) as f64 * (d.abs() as f64).sqrt())
}

pub fn field_constants(d: Discriminant) -> Result<FieldConstants> {
    let d = d.require_fundamental()?;
    let h = class_number(d);
    Ok(FieldConstants {
        h,
        w: unit_count(d),
        l1: l1_value(d, h),
    })
}
