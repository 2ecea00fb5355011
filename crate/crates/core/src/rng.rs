//! Counter-based Gaussian increments.
//!
//! Draws come from Philox4x32-10 (Salmon et al., SC'11, the Random123
//! generator). The 64-bit seed is the key; the 128-bit counter is
//! `[step_lo, step_hi, path_index, block]`, where block `b` feeds the two
//! sources `2b+1` and `2b+2` through one Box-Muller transform. Any
//! `(seed, path, step, source)` therefore maps to a fixed value no matter
//! which thread asks for it or in which order.

use core::f64::consts::PI;

use crate::model::N_NOISE;

const MUL0: u32 = 0xD251_1F53;
const MUL1: u32 = 0xCD9E_8D57;
const WEYL0: u32 = 0x9E37_79B9;
const WEYL1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(WEYL0);
            k[1] = k[1].wrapping_add(WEYL1);
        }
        let (hi0, lo0) = mulhilo(MUL0, c[0]);
        let (hi1, lo1) = mulhilo(MUL1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Maps two words to a uniform in the open interval (0, 1) with 52 bits.
#[inline]
fn open_unit(hi: u32, lo: u32) -> f64 {
    let bits = ((u64::from(hi) << 32) | u64::from(lo)) >> 12;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Eight independent standard normal draws for one `(seed, path, step)`.
pub fn standard_normals(seed: u64, path_index: u32, step_index: u64) -> [f64; N_NOISE] {
    let key = [seed as u32, (seed >> 32) as u32];
    let mut out = [0.0; N_NOISE];
    for block in 0..(N_NOISE / 2) {
        let w = philox4x32_10(
            [
                step_index as u32,
                (step_index >> 32) as u32,
                path_index,
                block as u32,
            ],
            key,
        );
        let u1 = open_unit(w[0], w[1]);
        let u2 = open_unit(w[2], w[3]);
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let (sin, cos) = libm::sincos(2.0 * PI * u2);
        out[2 * block] = radius * cos;
        out[2 * block + 1] = radius * sin;
    }
    out
}

/// Brownian increments `dB_1..dB_8 ~ N(0, dt)` for one step of one path.
pub fn gen_increments(seed: u64, path_index: u32, step_index: u64, dt: f64) -> [f64; N_NOISE] {
    let scale = libm::sqrt(dt);
    standard_normals(seed, path_index, step_index).map(|z| z * scale)
}
