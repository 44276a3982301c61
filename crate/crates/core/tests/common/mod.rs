//! Shared test support: brute-force oracles and random fixtures.
#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;
