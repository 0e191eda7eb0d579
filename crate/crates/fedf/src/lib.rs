//! File formats and experiment workbench for the scheduling laboratory; the
//! `fedf` binary is a thin CLI over these modules and the core crate.

pub mod formats;
pub mod workbench;
