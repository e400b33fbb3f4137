//! Degree bounds for ray class fields of imaginary quadratic fields.
//!
//! For a modulus `c`, `h phi_K(c) / 6 <= h phi_K(c) / w <= [K^(c) : K] <= h phi_K(c)`.
//! Only this sandwich is modelled; no ray class field is ever constructed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::{phi_k, phi_k_of_n, FactoredIdeal};
use crate::quad::{class_number, unit_count, Discriminant};
use crate::rational::{rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    #[serde(with = "crate::rational::serde_str")]
    pub lower_weak: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub lower: Rational,
    pub upper: u128,
}

impl DegreeBounds {
    /// Bounds from a class number, unit count and `phi_K(c)`.
    pub fn from_parts(h: u64, w: u32, phi: u64) -> Self {
        let hp = h as u128 * phi as u128;
        DegreeBounds {
            lower_weak: rational(hp, 6),
            lower: rational(hp, w as u128),
            upper: hp,
        }
    }
}

/// Bounds on `[K^(c) : K]` for an ideal `c` of the maximal order.
pub fn degree_bounds(d: Discriminant, c: &FactoredIdeal) -> Result<DegreeBounds> {
    let d = d.require_fundamental()?;
    if c.disc != d {
        return Err(Error::InvalidArgument(format!(
            "ideal belongs to discriminant {}, not {d}",
            c.disc
        )));
    }
    Ok(DegreeBounds::from_parts(
        class_number(d),
        unit_count(d),
        phi_k(c),
    ))
}

/// Lower bound on `[F : Q]` when a `K`-CM curve has full `N`-torsion over `FK`.
///
/// `FK` contains `K^(N O_K)`, so `2d >= [FK : Q] >= 2 h phi_K(N O_K) / 6`,
/// i.e. `d >= h phi_K(N O_K) / 6`.
pub fn min_absolute_degree_with_full_n_torsion(d: Discriminant, n: u64) -> Result<Rational> {
    let d = d.require_fundamental()?;
    let phi = phi_k_of_n(d, n)?;
    Ok(rational(class_number(d) as u128 * phi as u128, 6))
}
