//! Simulation of two-way secure direct communication built on a one-way
//! EPR-pair QSDC link.
//!
//! Alice sends a message to Bob with the two-step dense-coding protocol in
//! [`oneway`]. The delivered bits then serve as a one-time pad for Bob's
//! reply over a public classical channel ([`duplex`]), so a single quantum
//! device carries traffic in both directions. [`cost`] compares that against
//! running one quantum device per direction.

pub mod adversary;
pub mod bits;
pub mod channel;
pub mod cost;
pub mod duplex;
pub mod oneway;
pub mod quantum;
pub mod selfcheck;
pub mod trials;
