//! Checks shared by the test suites and the acceptance harness.
#![allow(dead_code)]

pub mod lemmas;
pub mod observers;
pub mod parity;
pub mod reductions;
