//! Command-line pipeline: disk geometry → capacitance stencil → bands and
//! gaps → certified gap solitons, with independent re-verification.

pub mod cli;
pub mod commands;
pub mod io;

use std::fmt;

/// A violated input precondition; the process exits with code 2.
#[derive(Debug)]
pub struct Precondition(pub String);

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Precondition {}

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_CERTIFICATION: u8 = 3;

/// Maps an error chain to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use capgap_core::Error as E;
    for cause in err.chain() {
        if cause.is::<Precondition>() {
            return EXIT_PRECONDITION;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::WindowTooSmall { .. }
                | E::WindowMismatch
                | E::SymmetryNotAsserted
                | E::InvalidGeometry(_)
                | E::InvalidStencil(_)
                | E::InvalidParameter(_)
                | E::DecayCertificateViolated { .. }
                | E::NotInGap { .. }
                | E::PeriodTooSmall { .. }
                | E::TooFewAnnuli { .. } => EXIT_PRECONDITION,
                _ => EXIT_OTHER,
            };
        }
    }
    EXIT_OTHER
}
