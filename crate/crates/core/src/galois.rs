//! The unit group `C_N = (O / N O)^x` as a group of 2x2 matrices mod `N`.
//!
//! With the basis `1, (D + sqrt D)/2` of the order `O` of discriminant `D`,
//! multiplication by `x + y (D + sqrt D)/2` acts on `O / N O = (Z/NZ)^2` by
//!
//! ```text
//! [ x   y (D - D^2)/4 ]
//! [ y   x + y D       ]
//! ```
//!
//! whose determinant is the norm form `x^2 + D x y + (D^2 - D)/4 y^2`. The
//! functions here enumerate that group and check, by exhaustion, that it
//! contains the homotheties, that reduction `C_{p^(A+B)} -> C_{p^A}` is onto
//! with kernel of size `p^(2B)`, and the point-stabilizer bounds that drive
//! the torsion squaring argument.

use std::collections::HashSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{kronecker, Discriminant, SplittingType};
use crate::sieve::is_prime;

/// Default modulus cap for the exhaustive scans.
pub const CN_CAP: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaloisMatrix {
    pub modulus: u64,
    /// Row-major entries, each reduced into `0..modulus`.
    pub entries: [[u64; 2]; 2],
}

impl GaloisMatrix {
    /// Image of `x + y (D + sqrt D)/2` under the regular representation.
    pub fn from_element(d: Discriminant, x: u64, y: u64, modulus: u64) -> Self {
        let m = modulus as i128;
        let dv = d.value() as i128;
        // exact before reduction; D = 0, 1 mod 4 makes this an integer
        let corner = (dv - dv * dv) / 4;
        let (x, y) = (x as i128, y as i128);
        let r = |v: i128| v.rem_euclid(m) as u64;
        GaloisMatrix {
            modulus,
            entries: [[r(x), r(y * corner)], [r(y), r(x + y * dv)]],
        }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::scalar(1, modulus)
    }

    pub fn scalar(a: u64, modulus: u64) -> Self {
        let a = a % modulus;
        GaloisMatrix {
            modulus,
            entries: [[a, 0], [0, a]],
        }
    }

    pub fn mul(&self, other: &GaloisMatrix) -> GaloisMatrix {
        debug_assert_eq!(self.modulus, other.modulus);
        let m = self.modulus as u128;
        let (a, b) = (&self.entries, &other.entries);
        let e = |i: usize, j: usize| {
            ((a[i][0] as u128 * b[0][j] as u128 + a[i][1] as u128 * b[1][j] as u128) % m) as u64
        };
        GaloisMatrix {
            modulus: self.modulus,
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus as u128;
        let e = &self.entries;
        let pos = e[0][0] as u128 * e[1][1] as u128 % m;
        let neg = e[0][1] as u128 * e[1][0] as u128 % m;
        ((pos + m - neg) % m) as u64
    }

    pub fn apply(&self, v: &TorsionVector) -> TorsionVector {
        let m = self.modulus as u128;
        let e = &self.entries;
        let (x, y) = (v.x as u128, v.y as u128);
        TorsionVector {
            x: ((e[0][0] as u128 * x + e[0][1] as u128 * y) % m) as u64,
            y: ((e[1][0] as u128 * x + e[1][1] as u128 * y) % m) as u64,
            modulus: self.modulus,
        }
    }

    /// Reduction to a smaller modulus dividing this one.
    pub fn reduce(&self, modulus: u64) -> GaloisMatrix {
        debug_assert_eq!(self.modulus % modulus, 0);
        let mut entries = self.entries;
        entries.iter_mut().flatten().for_each(|x| *x %= modulus);
        GaloisMatrix { modulus, entries }
    }

    pub fn is_identity_mod(&self, modulus: u64) -> bool {
        self.reduce(modulus) == GaloisMatrix::identity(modulus)
    }
}

/// A point of `(Z/NZ)^2`, standing in for `E[N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorsionVector {
    pub x: u64,
    pub y: u64,
    pub modulus: u64,
}

impl TorsionVector {
    pub fn new(x: u64, y: u64, modulus: u64) -> Self {
        TorsionVector {
            x: x % modulus,
            y: y % modulus,
            modulus,
        }
    }

    /// Additive order; equals `modulus` iff `gcd(x, y, modulus) = 1`.
    pub fn order(&self) -> u64 {
        self.modulus / self.x.gcd(&self.y).gcd(&self.modulus)
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    fn all(modulus: u64) -> impl Iterator<Item = TorsionVector> {
        (0..modulus).flat_map(move |x| (0..modulus).map(move |y| TorsionVector { x, y, modulus }))
    }
}

fn check_cap(what: &'static str, value: u64, cap: u64) -> Result<()> {
    if value > cap {
        Err(Error::CapExceeded { what, value, cap })
    } else {
        Ok(())
    }
}

/// Every element of `C_N`, ordered by `(x, y)`.
pub fn cn_elements(d: Discriminant, n: u64, cap: u64) -> Result<Vec<GaloisMatrix>> {
    if n < 2 {
        return Err(Error::InvalidArgument("N must be >= 2".into()));
    }
    check_cap("N", n, cap)?;
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let g = GaloisMatrix::from_element(d, x, y, n);
            if g.det().gcd(&n) == 1 {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Whether every scalar matrix `a I` with `a` a unit mod `N` lies in `C_N`.
pub fn verify_homotheties(d: Discriminant, n: u64, cap: u64) -> Result<bool> {
    let group: HashSet<GaloisMatrix> = cn_elements(d, n, cap)?.into_iter().collect();
    Ok((1..n)
        .filter(|a| a.gcd(&n) == 1)
        .all(|a| group.contains(&GaloisMatrix::scalar(a, n))))
}

fn prime_power(p: u64, e: u32, cap: u64) -> Result<u64> {
    match p.checked_pow(e) {
        Some(q) => check_cap("p^k", q, cap).map(|_| q),
        None => Err(Error::CapExceeded {
            what: "p^k",
            value: u64::MAX,
            cap,
        }),
    }
}

/// Outcome of reducing `C_{p^(A+B)}` to `C_{p^A}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    pub disc: Discriminant,
    pub p: u64,
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B")]
    pub b: u32,
    pub kernel_size: u64,
    /// Number of distinct reductions of `C_{p^(A+B)}`.
    pub image_size: u64,
    /// `#C_{p^A}`.
    pub target_size: u64,
    pub surjective: bool,
}

/// Size of the kernel of `C_{p^(A+B)} -> C_{p^A}`, with the image counted to
/// confirm surjectivity.
pub fn kernel_size(d: Discriminant, p: u64, a: u32, b: u32, cap: u64) -> Result<KernelReport> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("A and B must be >= 1".into()));
    }
    let big = prime_power(p, a + b, cap)?;
    let small = p.pow(a);
    let group = cn_elements(d, big, cap)?;
    let kernel = group.iter().filter(|g| g.is_identity_mod(small)).count() as u64;
    let image: HashSet<GaloisMatrix> = group.iter().map(|g| g.reduce(small)).collect();
    let target = cn_elements(d, small, cap)?.len() as u64;
    Ok(KernelReport {
        disc: d,
        p,
        a,
        b,
        kernel_size: kernel,
        image_size: image.len() as u64,
        target_size: target,
        surjective: image.len() as u64 == target,
    })
}

/// Largest point stabilizer found by [`max_stabilizer_order`], next to the
/// order it must divide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisImageReport {
    pub disc: Discriminant,
    pub p: u64,
    #[serde(rename = "A")]
    pub a: u32,
    pub split_type: SplittingType,
    pub max_stabilizer_order: u64,
    pub expected_divisor: u64,
}

impl GaloisImageReport {
    pub fn divides_expected(&self) -> bool {
        self.expected_divisor
            .is_multiple_of(self.max_stabilizer_order)
    }
}

/// Largest stabilizer of a point in the relevant part of `C_{p^(A+1)}`.
///
/// For `A = 0`: the maximum over nonzero `v` in `F_p^2` of `#{g in C_p : g v = v}`,
/// which must divide `p - 1`, `1` or `p` as `p` splits, is inert or ramifies.
/// For `A >= 1`: the maximum over `v` of order `p^(A+1)` of the number of
/// elements of `ker(C_{p^(A+1)} -> C_{p^A})` fixing `v`, which must divide `p`.
pub fn max_stabilizer_order(
    d: Discriminant,
    p: u64,
    a: u32,
    cap: u64,
) -> Result<GaloisImageReport> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = prime_power(p, a + 1, cap)?;
    let split_type = SplittingType::from_character(kronecker(d, p));
    let group = cn_elements(d, n, cap)?;
    let (candidates, points): (Vec<GaloisMatrix>, Vec<TorsionVector>) = if a == 0 {
        (
            group,
            TorsionVector::all(n).filter(|v| !v.is_zero()).collect(),
        )
    } else {
        let small = p.pow(a);
        (
            group
                .into_iter()
                .filter(|g| g.is_identity_mod(small))
                .collect(),
            TorsionVector::all(n).filter(|v| v.order() == n).collect(),
        )
    };
    let max = points
        .iter()
        .map(|v| candidates.iter().filter(|g| g.apply(v) == *v).count() as u64)
        .max()
        .unwrap_or(0);
    let expected_divisor = match (a, split_type) {
        (0, SplittingType::Split) => p - 1,
        (0, SplittingType::Inert) => 1,
        _ => p,
    };
    Ok(GaloisImageReport {
        disc: d,
        p,
        a,
        split_type,
        max_stabilizer_order: max,
        expected_divisor,
    })
}

/// Degree bound `[F(E[ab]) : F] <= b` when `Z/a x Z/ab` embeds in `E(F)`.
pub fn squaring_degree_bound(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("a and b must be >= 1".into()));
    }
    Ok(b)
}
