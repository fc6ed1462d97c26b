//! Checks shared by the `properties` and `acceptance` targets. Every check
//! is a plain function that panics on failure.

#![allow(dead_code)]

pub mod cases;

use std::panic::{catch_unwind, AssertUnwindSafe};

pub type Check = (&'static str, fn());

/// Runs each check, capturing panics; returns the names that failed.
pub fn run_all(checks: &[Check]) -> Vec<&'static str> {
    checks
        .iter()
        .filter(|(_, f)| catch_unwind(AssertUnwindSafe(f)).is_err())
        .map(|(name, _)| *name)
        .collect()
}
