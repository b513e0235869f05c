//! Protocol compilers: majority boosting, shared to distributed
//! randomness, and collapsing Merlin-Arthur-Merlin into Arthur-Merlin.

pub mod boost;
pub mod derandomize;
pub mod dmam;

pub use boost::{boost, coin_spec, majority_success, repetitions_for};
pub use derandomize::{derandomize_shared, DerandMode, Derandomized};
pub use dmam::{compile_damam_to_dam, compile_dmam_to_dam, toy_dmam, DmamDescription};

use crate::bits::{BitReader, Bits};

/// Width of the length prefix on each repetition's certificate or message.
pub const PREFIX_BITS: usize = 16;

/// Appends `b` with a 16-bit length prefix.
///
/// Panics if `b` is longer than `u16::MAX` bits.
pub(crate) fn push_prefixed(out: &mut Bits, b: &Bits) {
    assert!(b.len() <= u16::MAX as usize, "block of {} bits exceeds the length prefix", b.len());
    out.push_uint(b.len() as u64, PREFIX_BITS);
    out.extend(b);
}

pub(crate) fn read_prefixed(r: &mut BitReader<'_>) -> Option<Bits> {
    let len = r.read_uint(PREFIX_BITS)? as usize;
    r.read_bits(len)
}

/// Splits a node's draw for a concatenated domain into `count` slices of
/// `each` coordinates.
pub(crate) fn slices(draw: &[u64], each: usize, count: usize) -> Vec<&[u64]> {
    (0..count).map(|j| draw.get(j * each..(j + 1) * each).unwrap_or(&[])).collect()
}
