//! Core library for synthetic residential smart-meter data with injected
//! false-data attacks, and the two from-scratch neural models that detect
//! and classify them: a binary MLP detector and a three-class BiLSTM.
//!
//! The crate is `no_std` (with `alloc`) so the models can run on
//! constrained gateway hardware; all IO, file formats, and the CLI live in
//! the companion `fdia-cli` crate. Every stochastic step draws from the
//! documented generators in [`rng`], so identical configs and seeds yield
//! bit-identical results on every platform.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classifier;
pub mod datagen;
pub mod detector;
pub mod eval;
pub mod features;
pub mod math;
pub mod matrix;
pub mod nn;
pub mod rng;

pub use matrix::Matrix;
