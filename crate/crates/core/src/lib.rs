//! Certificates of `p`-rationality for quadratic and multiquadratic fields,
//! with the supporting arithmetic, class-number machinery, prime searches,
//! table scans and square-free density estimates.

pub mod arith;
pub mod classnum;
pub mod density;
pub mod error;
pub mod field;
pub mod precision;
pub mod prationality;
pub mod report;
pub mod scan;
pub mod search;
pub mod unit;

pub use arith::{crt_combine, kronecker, squarefree_decompose, CrtPlan, QuadRingElement, SquarefreeParts};
pub use classnum::{ClassNumberCertificate, Method};
pub use density::DensityReport;
pub use error::{Error, Result};
pub use field::{make_field, residual_degree, FieldDescriptor, Signature};
pub use precision::Precision;
pub use prationality::{Evidence, FibonacciResidue, Outcome, PRationalityVerdict};
pub use report::{Cell, FixtureSet, Format, Mismatch, Record, ReportDocument, Table};
pub use scan::{ImaginaryRow, RealFamilyRow, Variant};
pub use search::SearchResult;
pub use unit::{fundamental_unit, regulator, FundamentalUnit};
