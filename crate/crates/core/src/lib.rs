//! Analysis and optimization of integer-stake betting strategies in an
//! even-money casino with an exit target.
//!
//! Every solver is generic over [`numeric::Scalar`]; the aliases below pick
//! the common instantiations.

pub mod chain;
pub mod error;
pub mod game;
pub mod horizon;
pub mod linsolve;
pub mod numeric;
pub mod report;
pub mod search;
pub mod simulate;

pub use error::{Error, Result};
pub use game::{GameSpec, Strategy};
pub use numeric::ratfun::RationalFunction;
pub use numeric::{Decimal, ModeChoice, Number, NumericMode, Rational, Scalar};

pub type ExactReport = chain::ChainReport<Rational>;
pub type DecimalReport = chain::ChainReport<Decimal>;
pub type ExactTable = horizon::HorizonTable<Rational>;
pub type DecimalTable = horizon::HorizonTable<Decimal>;
