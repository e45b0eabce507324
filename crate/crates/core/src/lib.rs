// SPDX-License-Identifier: Apache-2.0

//! Simulation engine and verification toolkit for the nondeterministic mixed
//! Hegselmann-Krause opinion model.
//!
//! Opinions evolve as `x(t+1) = B(t) x(t)` with
//! `B = diag(alpha) + (I - diag(alpha)) A`, where `A` averages each agent over
//! its neighbours in the profile (social update graph intersected with the
//! epsilon opinion graph). Group mode updates a drawn agent subset over the
//! social graph; pair mode updates the endpoints of a drawn matching.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod io;
pub mod model;
pub mod reference;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use model::{InteractionMode, ModelConfig, OpinionState, StubbornnessDraw, TraceRecord};
