//! Class numbers, ideal Euler functions and ray class degree bounds for
//! imaginary quadratic fields, and explicit upper bounds on the torsion of
//! CM elliptic curves over number fields of a given degree.
//!
//! Module map:
//!
//! * [`quad`]: discriminants, the Kronecker character, class numbers.
//! * [`ideal`]: factored ideals, norms and `phi_K`.
//! * [`ray_class`]: degree sandwich for ray class fields.
//! * [`galois`]: the matrix model of `(O/NO)^x` and its exhaustive checks.
//! * [`feasibility`]: the degree chain as a search, giving `B(d)`.
//! * [`analytics`]: Mertens and character Euler products, empirical scans.

pub mod analytics;
pub mod error;
pub mod feasibility;
pub mod galois;
pub mod ideal;
pub mod quad;
pub mod rational;
pub mod ray_class;
pub mod sieve;

pub use analytics::{LandauCheck, ProductEstimate, ScanResult};
pub use error::{Error, Result};
pub use feasibility::{BoundRecord, ChainTrace, ConstantEstimate, FeasibilityRow, TorsionShape};
pub use galois::{GaloisImageReport, GaloisMatrix, KernelReport, TorsionVector};
pub use ideal::{FactoredIdeal, PrimeIdeal};
pub use quad::{BinaryQuadraticForm, Discriminant, FieldConstants, SplittingType};
pub use rational::Rational;
pub use ray_class::DegreeBounds;
