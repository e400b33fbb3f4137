//! Integral ideals of the maximal order, carried in factored form.
//!
//! Norms, the ideal Euler function and enumeration by norm only depend on the
//! factorization type, so no element-level ideal arithmetic lives here.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{kronecker, splitting_type, Discriminant, SplittingType};
use crate::sieve::{factor_with_spf, factorize, smallest_prime_factors};

/// Default modulus cap for [`brute_force_phi`].
pub const BRUTE_FORCE_PHI_CAP: u64 = 300;

/// A prime ideal above the rational prime `p`.
///
/// The two primes above a split `p` are told apart by `conjugate_index`
/// (0 or 1); which is which is arbitrary but fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub p: u64,
    pub conjugate_index: u8,
    #[serde(rename = "type")]
    pub kind: SplittingType,
    pub norm: u64,
}

impl PrimeIdeal {
    fn new(p: u64, kind: SplittingType, conjugate_index: u8) -> Self {
        let norm = match kind {
            SplittingType::Inert => p * p,
            _ => p,
        };
        PrimeIdeal {
            p,
            conjugate_index,
            kind,
            norm,
        }
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SplittingType::Split => write!(f, "P{}.{}", self.p, self.conjugate_index),
            _ => write!(f, "P{}", self.p),
        }
    }
}

/// The prime ideals above `p`: two of norm `p` if split, one of norm `p^2`
/// if inert, one of norm `p` if ramified.
pub fn primes_above(d: Discriminant, p: u64) -> Result<Vec<PrimeIdeal>> {
    let d = d.require_fundamental()?;
    let kind = splitting_type(d, p)?;
    Ok(match kind {
        SplittingType::Split => vec![PrimeIdeal::new(p, kind, 0), PrimeIdeal::new(p, kind, 1)],
        _ => vec![PrimeIdeal::new(p, kind, 0)],
    })
}

/// A nonzero integral ideal as a product of prime ideal powers.
///
/// Factors are kept sorted by prime ideal with positive exponents; the empty
/// product is the unit ideal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactoredIdeal {
    pub disc: Discriminant,
    pub factors: Vec<(PrimeIdeal, u32)>,
}

impl FactoredIdeal {
    pub fn unit(disc: Discriminant) -> Self {
        FactoredIdeal {
            disc,
            factors: Vec::new(),
        }
    }

    /// Builds an ideal from arbitrary `(prime, exponent)` pairs, merging
    /// repeats and dropping zero exponents.
    pub fn from_factors(
        disc: Discriminant,
        factors: impl IntoIterator<Item = (PrimeIdeal, u32)>,
    ) -> Result<Self> {
        let disc = disc.require_fundamental()?;
        let mut v: Vec<(PrimeIdeal, u32)> = factors.into_iter().filter(|f| f.1 > 0).collect();
        v.sort();
        let mut merged: Vec<(PrimeIdeal, u32)> = Vec::with_capacity(v.len());
        for (q, e) in v {
            match merged.last_mut() {
                Some((last, le)) if *last == q => *le += e,
                _ => merged.push((q, e)),
            }
        }
        Ok(FactoredIdeal {
            disc,
            factors: merged,
        })
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of two ideals of the same field.
    pub fn mul(&self, other: &FactoredIdeal) -> FactoredIdeal {
        assert_eq!(self.disc, other.disc, "ideals from different fields");
        FactoredIdeal::from_factors(
            self.disc,
            self.factors.iter().chain(&other.factors).copied(),
        )
        .expect("disc already fundamental")
    }

    pub fn exponent_of(&self, q: &PrimeIdeal) -> u32 {
        self.factors
            .iter()
            .find(|(f, _)| f == q)
            .map_or(0, |&(_, e)| e)
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &FactoredIdeal) -> bool {
        self.factors.iter().all(|(q, e)| other.exponent_of(q) >= *e)
    }

    pub fn norm(&self) -> u64 {
        ideal_norm(self)
    }
}

impl fmt::Display for FactoredIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("(1)");
        }
        for (i, (q, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{q}")?;
            } else {
                write!(f, "{q}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factorization of `N O_K`.
pub fn principal_ideal(d: Discriminant, n: u64) -> Result<FactoredIdeal> {
    let d = d.require_fundamental()?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let mut factors = Vec::new();
    for (p, e) in factorize(n) {
        for q in primes_above(d, p)? {
            let exp = match q.kind {
                SplittingType::Ramified => 2 * e,
                _ => e,
            };
            factors.push((q, exp));
        }
    }
    FactoredIdeal::from_factors(d, factors)
}

/// `|a| = #(O_K / a)`. Panics on `u64` overflow.
pub fn ideal_norm(a: &FactoredIdeal) -> u64 {
    a.factors.iter().fold(1u64, |acc, (q, e)| {
        q.norm
            .checked_pow(*e)
            .and_then(|x| acc.checked_mul(x))
            .expect("ideal norm overflows u64")
    })
}

/// `phi_K(a) = #(O_K / a)^x`, exactly.
pub fn phi_k(a: &FactoredIdeal) -> u64 {
    a.factors.iter().fold(1u64, |acc, (q, e)| {
        let local = q.norm.pow(e - 1) * (q.norm - 1);
        acc.checked_mul(local).expect("phi_K overflows u64")
    })
}

/// `phi_K(N O_K) = N^2 prod_{p | N} (1 - 1/p)(1 - chi(p)/p)`.
pub fn phi_k_of_n(d: Discriminant, n: u64) -> Result<u64> {
    let d = d.require_fundamental()?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    factorize(n).into_iter().try_fold(1u64, |acc, (p, e)| {
        let chi = kronecker(d, p) as i64;
        let local = (p as u128).pow(2 * e - 2) * (p as u128 - 1) * (p as i64 - chi) as u128;
        u64::try_from(local)
            .ok()
            .and_then(|l| acc.checked_mul(l))
            .ok_or(Error::Overflow("phi_K(N O_K)"))
    })
}

/// Counts the units of `O / N O` directly, for any order discriminant.
///
/// Residues are pairs `(x, y)` standing for `x + y (D + sqrt D)/2`; such an
/// element is a unit iff its norm `x^2 + D x y + (D^2 - D)/4 y^2` is a unit
/// mod `N`.
pub fn brute_force_phi(d: Discriminant, n: u64, cap: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap,
        });
    }
    let m = n as i128;
    let dv = d.value() as i128;
    let dm = dv.rem_euclid(m);
    let cm = ((dv * dv - dv) / 4).rem_euclid(m);
    let mut count = 0u64;
    for x in 0..m {
        for y in 0..m {
            let norm = (x * x + dm * x * y + cm * y * y).rem_euclid(m);
            if norm.gcd(&m) == 1 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// All integral ideals of norm at most `limit`, ordered by norm and then by
/// factorization. A clone continues from the same position.
#[derive(Debug, Clone)]
pub struct IdealStream {
    disc: Discriminant,
    limit: u64,
    next_norm: u64,
    spf: std::sync::Arc<Vec<u32>>,
    pending: std::vec::IntoIter<FactoredIdeal>,
}

pub fn ideals_up_to_norm(d: Discriminant, limit: u64) -> Result<IdealStream> {
    let disc = d.require_fundamental()?;
    if limit == 0 {
        return Err(Error::InvalidArgument("norm limit must be >= 1".into()));
    }
    Ok(IdealStream {
        disc,
        limit,
        next_norm: 1,
        spf: std::sync::Arc::new(smallest_prime_factors(limit)),
        pending: Vec::new().into_iter(),
    })
}

impl IdealStream {
    /// Every ideal of norm exactly `n`.
    fn ideals_of_norm(&self, n: u64) -> Vec<FactoredIdeal> {
        let mut partial: Vec<Vec<(PrimeIdeal, u32)>> = vec![Vec::new()];
        for (p, e) in factor_with_spf(n, &self.spf) {
            let kind = SplittingType::from_character(kronecker(self.disc, p));
            let local: Vec<Vec<(PrimeIdeal, u32)>> = match kind {
                SplittingType::Split => {
                    let (p0, p1) = (PrimeIdeal::new(p, kind, 0), PrimeIdeal::new(p, kind, 1));
                    (0..=e)
                        .map(|i| {
                            [(p0, e - i), (p1, i)]
                                .into_iter()
                                .filter(|f| f.1 > 0)
                                .collect()
                        })
                        .collect()
                }
                SplittingType::Inert if e % 2 == 1 => return Vec::new(),
                SplittingType::Inert => vec![vec![(PrimeIdeal::new(p, kind, 0), e / 2)]],
                SplittingType::Ramified => vec![vec![(PrimeIdeal::new(p, kind, 0), e)]],
            };
            partial = partial
                .iter()
                .flat_map(|base| {
                    local.iter().map(move |ext| {
                        let mut v = base.clone();
                        v.extend_from_slice(ext);
                        v
                    })
                })
                .collect();
        }
        let mut out: Vec<FactoredIdeal> = partial
            .into_iter()
            .map(|factors| FactoredIdeal {
                disc: self.disc,
                factors,
            })
            .collect();
        out.sort();
        out
    }
}

impl Iterator for IdealStream {
    type Item = FactoredIdeal;

    fn next(&mut self) -> Option<FactoredIdeal> {
        loop {
            if let Some(a) = self.pending.next() {
                return Some(a);
            }
            if self.next_norm > self.limit {
                return None;
            }
            let n = self.next_norm;
            self.next_norm += 1;
            self.pending = self.ideals_of_norm(n).into_iter();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::fundamental_discriminants;
    use proptest::prelude::*;

    fn disc(v: i64) -> Discriminant {
        Discriminant::new(v).unwrap()
    }

    #[test]
    fn primes_above_examples() {
        let s = primes_above(disc(-4), 5).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s
            .iter()
            .all(|q| q.norm == 5 && q.kind == SplittingType::Split));
        assert_ne!(s[0], s[1]);
        let i = primes_above(disc(-4), 3).unwrap();
        assert_eq!((i.len(), i[0].norm), (1, 9));
        let r = primes_above(disc(-4), 2).unwrap();
        assert_eq!(
            (r.len(), r[0].norm, r[0].kind),
            (1, 2, SplittingType::Ramified)
        );
        assert_eq!(primes_above(disc(-4), 4), Err(Error::NotPrime(4)));
        assert_eq!(primes_above(disc(-12), 5), Err(Error::NotFundamental(-12)));
    }

    #[test]
    fn principal_ideal_examples() {
        let one = principal_ideal(disc(-4), 1).unwrap();
        assert!(one.is_unit());
        assert_eq!(ideal_norm(&one), 1);
        let two = principal_ideal(disc(-4), 2).unwrap();
        assert_eq!(two.factors.len(), 1);
        assert_eq!(two.factors[0].1, 2);
        assert_eq!(ideal_norm(&two), 4);
        let five = principal_ideal(disc(-4), 5).unwrap();
        assert_eq!(five.factors.len(), 2);
        assert!(five.factors.iter().all(|f| f.1 == 1));
        assert_eq!(ideal_norm(&five), 25);
        assert_eq!(five.to_string(), "P5.0*P5.1");
    }

    #[test]
    fn norms() {
        let q3 = primes_above(disc(-4), 3).unwrap()[0];
        let a = FactoredIdeal::from_factors(disc(-4), [(q3, 2)]).unwrap();
        assert_eq!(ideal_norm(&a), 81);
        for d in fundamental_discriminants(60) {
            for n in 1..=1000 {
                assert_eq!(ideal_norm(&principal_ideal(d, n).unwrap()), n * n);
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_k(&FactoredIdeal::unit(disc(-4))), 1);
        assert_eq!(phi_k(&principal_ideal(disc(-4), 5).unwrap()), 16);
        assert_eq!(phi_k(&principal_ideal(disc(-4), 2).unwrap()), 2);
        assert_eq!(phi_k_of_n(disc(-4), 12), Ok(64));
        assert_eq!(phi_k_of_n(disc(-7), 1), Ok(1));
        assert_eq!(phi_k_of_n(disc(-3), 3), Ok(6));
        assert_eq!(brute_force_phi(disc(-4), 12, 300), Ok(64));
        assert_eq!(brute_force_phi(disc(-3), 3, 300), Ok(6));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_phi(disc(-4), 5, 300), Ok(16));
        assert_eq!(brute_force_phi(disc(-4), 1, 300), Ok(1));
        // 3 is inert in Q(sqrt -7): 3^2 - 1
        assert_eq!(brute_force_phi(disc(-7), 3, 300), Ok(8));
        assert_eq!(phi_k_of_n(disc(-7), 3), Ok(8));
        assert_eq!(
            brute_force_phi(disc(-4), 301, 300),
            Err(Error::CapExceeded {
                what: "N",
                value: 301,
                cap: 300
            })
        );
    }

    #[test]
    fn phi_formula_matches_brute_force_small_grid() {
        for d in fundamental_discriminants(40) {
            for n in 1..=30 {
                assert_eq!(
                    phi_k_of_n(d, n).unwrap(),
                    brute_force_phi(d, n, BRUTE_FORCE_PHI_CAP).unwrap(),
                    "D={d} N={n}"
                );
                assert_eq!(
                    phi_k_of_n(d, n).unwrap(),
                    phi_k(&principal_ideal(d, n).unwrap())
                );
            }
        }
    }

    #[test]
    fn phi_dominates_squared_totient() {
        use crate::sieve::euler_phi;
        for d in fundamental_discriminants(100) {
            for n in 1..=500u64 {
                let lhs = phi_k_of_n(d, n).unwrap();
                let rhs = euler_phi(n).pow(2);
                assert!(lhs >= rhs);
                let all_split = factorize(n).iter().all(|&(p, _)| kronecker(d, p) == 1);
                assert_eq!(lhs == rhs, all_split, "D={d} N={n}");
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let d = disc(-4);
        let one: Vec<_> = ideals_up_to_norm(d, 1).unwrap().collect();
        assert_eq!(one, vec![FactoredIdeal::unit(d)]);
        let norms: Vec<u64> = ideals_up_to_norm(d, 5).unwrap().map(|a| a.norm()).collect();
        assert_eq!(norms, vec![1, 2, 4, 5, 5]);
    }

    #[test]
    fn enumeration_counts_match_divisor_sums() {
        for v in [-3, -4, -7, -8, -15, -20, -23, -24, -84] {
            let d = disc(v);
            let mut counts = vec![0u64; 501];
            let mut prev: Option<FactoredIdeal> = None;
            for a in ideals_up_to_norm(d, 500).unwrap() {
                counts[a.norm() as usize] += 1;
                if let Some(p) = &prev {
                    assert!((p.norm(), &p.factors) < (a.norm(), &a.factors));
                }
                prev = Some(a);
            }
            for n in 1..=500u64 {
                let r: i64 = (1..=n)
                    .filter(|m| n % m == 0)
                    .map(|m| kronecker(d, m) as i64)
                    .sum();
                assert_eq!(counts[n as usize] as i64, r, "D={v} n={n}");
            }
            // D = -4: total up to 100
            if v == -4 {
                let total = ideals_up_to_norm(d, 100).unwrap().count() as u64;
                assert_eq!(total, counts[1..=100].iter().sum::<u64>());
            }
        }
    }

    proptest! {
        #[test]
        fn phi_multiplicative_on_coprime_ideals(
            vi in 0usize..12,
            i in 1u64..400,
            j in 1u64..400,
        ) {
            let d = fundamental_discriminants(40)[vi];
            let all: Vec<FactoredIdeal> = ideals_up_to_norm(d, 400).unwrap().collect();
            let a = &all[(i as usize) % all.len()];
            let b = &all[(j as usize) % all.len()];
            let disjoint = a.factors.iter().all(|(q, _)| b.exponent_of(q) == 0);
            if disjoint {
                prop_assert_eq!(phi_k(&a.mul(b)), phi_k(a) * phi_k(b));
            }
            prop_assert_eq!(ideal_norm(&a.mul(b)), ideal_norm(a) * ideal_norm(b));
        }
    }
}
