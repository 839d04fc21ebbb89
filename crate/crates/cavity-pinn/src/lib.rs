//! Training and evaluation of data-driven (DNN) and physics-informed (PINN)
//! neural networks on synthetic noisy sensor data from a 2-D lid-driven
//! cavity flow.
//!
//! The crate is self-contained: it ships its own scalar automatic
//! differentiation engine ([`autodiff`]), a shared-trunk multilayer
//! perceptron ([`model`]), the incompressible Navier-Stokes residual losses
//! ([`losses`]), an ADAM trainer with reduce-on-plateau scheduling
//! ([`optim`]), a staggered-grid projection solver that produces the ground
//! truth ([`cavity`]), synthetic sensor dataset generation ([`dataset`]),
//! and an experiment harness with a CLI ([`harness`]).
//!
//! Batch evaluation is data-parallel over points via rayon when the
//! `parallel` feature (default) is enabled; results are bit-identical to the
//! sequential fallback because work is split into fixed-size chunks that are
//! always reduced in chunk order.

pub mod autodiff;
pub mod cavity;
pub mod config;
pub mod dataset;
pub mod harness;
pub mod losses;
pub mod model;
pub mod optim;
pub mod parallel;
pub mod rng;
pub mod sampling;
