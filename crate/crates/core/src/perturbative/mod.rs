//! Second-order Nakajima-Zwanzig and time-convolutionless equations, and the
//! Markovian Lindblad limit.

pub mod dressed;
pub mod markov;
pub mod nz;
pub mod tcl;

pub use dressed::{dressed_basis, DressedBasis};
pub use markov::{lindblad_generator, propagate_markovian};
pub use nz::{propagate_nz, propagate_nz_tabulated};
pub use tcl::{
    propagate_tcl_expanded, propagate_tcl_timelocal, tcl_coefficient, TclCoefficients, TclForm,
};
