//! Exact non-negative rationals used by the bound calculators.

use num_rational::Ratio;

pub type Rational = Ratio<u128>;

pub fn rational(numer: u128, denom: u128) -> Rational {
    Ratio::new(numer, denom)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Serializes a [`Rational`] as `"n/d"` (or `"n"` when integral).
pub mod serde_str {
    use super::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<Rational>().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let r = rational(16, 6);
        assert_eq!(r.to_string(), "8/3");
        assert_eq!("8/3".parse::<Rational>().unwrap(), r);
        assert_eq!(rational(4, 2).to_string(), "2");
    }
}
