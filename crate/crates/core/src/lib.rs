//! Simulator for distributed interactive proofs on small networks.
//!
//! A [`netconfig::NetworkConfig`] describes the network, a
//! [`engine::ProtocolSpec`] describes an interaction between an all-knowing
//! prover and the nodes, and the [`engine`] executes it, measuring
//! acceptance rates and exact certificate, message and randomness sizes.
//! The [`protocols`] module ships concrete protocols, [`transforms`] rewrites
//! protocols into other protocols, and [`adversary`] supplies cheating
//! provers and exact small-instance oracles.

pub mod adversary;
pub mod algebra;
pub mod bits;
pub mod commprims;
pub mod engine;
pub mod netconfig;
pub mod pls;
pub mod protocols;
pub mod transforms;

pub use bits::Bits;
pub use netconfig::NetworkConfig;
