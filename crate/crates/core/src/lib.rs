//! Building blocks for training robust set-point controllers with PPO over
//! randomized plant ensembles.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computation:
//!
//! * [`envsim`]: cascaded-tank and pH-neutralization plants, rewards, and
//!   ensemble / set-point sampling.
//! * [`control`]: the clamped error integrator, the extended state and the
//!   fixed P/PI prior controller.
//! * [`neuralnet`]: the modular policy network, value network, Gaussian
//!   action head, reverse-mode gradients and Adam.
//! * [`ppo`]: GAE, the clipped surrogate objective and the minibatch update.
//!
//! File formats, configuration and the experiment driver live in the `pime`
//! crate.

#![no_std]

extern crate alloc;

pub mod control;
pub mod envsim;
mod error;
pub(crate) mod math;
pub mod neuralnet;
pub mod ppo;
pub mod rng;

pub use error::{Error, Result};
