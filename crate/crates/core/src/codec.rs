//! Packet encoder and decoder.
//!
//! The positive time line is cut into intervals of length `bγ`. A real-mode
//! packet of `g` bits is laid out as
//!
//! ```text
//! [ sign | parity of ⌊t_s / bγ⌋ | g-2 bits: subinterval index, MSB first ]
//! ```
//!
//! and a complex-mode packet as
//!
//! ```text
//! [ λ bits: phase cell, MSB first | parity | g-λ-1 bits: subinterval index ]
//! ```
//!
//! The decoder knows `t_s ∈ [t_c - γ, t_c]`. That window is shorter than an
//! interval, so it overlaps at most two consecutive intervals, and the
//! parity bit picks the right one. The estimate `q(t_s)` is the center of
//! the indexed subinterval.
//!
//! Subintervals and phase cells are half-open and left-closed; phase cells
//! are anchored at angle 0.
//!
//! Packets too short to carry any timing bits (`g = 1` real, `g = λ`
//! complex) are event markers: the decoder then uses the window midpoint
//! `t_c - γ/2` as its timing estimate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("packet needs at least {min} bits, got {g}")]
    TooFewBits { g: usize, min: usize },
    #[error("complex packets need at least one phase bit")]
    NoPhaseBits,
    #[error("invalid timing parameters: gamma = {gamma}, b = {b}")]
    Timing { gamma: f64, b: f64 },
    #[error("triggering time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("undecodable packet at t_c = {t_c}: no interval in the reception window has parity {parity}")]
    Undecodable { t_c: f64, parity: u8 },
    #[error("ambiguous packet at t_c = {t_c}: window wider than an interval")]
    Ambiguous { t_c: f64 },
    #[error("packet mode mismatch: expected {expected}")]
    Mode { expected: &'static str },
    #[error("malformed packet string {0:?}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    /// `+` for non-negative values.
    pub fn of(v: f64) -> Self {
        if v >= 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    fn bit(self) -> bool {
        self == Sign::Pos
    }
}

/// An encoded event. `lambda == 0` marks a real-mode packet whose first
/// bit is the sign; otherwise the first `lambda` bits are the phase cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub bits: Vec<bool>,
    pub t_generated: f64,
    pub lambda: u32,
}

impl Packet {
    pub fn g(&self) -> usize {
        self.bits.len()
    }

    pub fn is_real(&self) -> bool {
        self.lambda == 0
    }

    /// Number of leading bits that carry sign or phase.
    fn head(&self) -> usize {
        if self.is_real() {
            1
        } else {
            self.lambda as usize
        }
    }

    /// True when the packet carries no timing bits at all.
    pub fn is_marker(&self) -> bool {
        self.g() == self.head()
    }

    /// `g:λ:HEX` where HEX is the bit string, MSB first, right-padded with
    /// zeros to whole nibbles.
    pub fn to_hex(&self) -> String {
        let mut hex = String::with_capacity(self.bits.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nib = 0u8;
            for i in 0..4 {
                nib <<= 1;
                if chunk.get(i).copied().unwrap_or(false) {
                    nib |= 1;
                }
            }
            hex.push(char::from_digit(nib as u32, 16).unwrap().to_ascii_uppercase());
        }
        format!("{}:{}:{}", self.bits.len(), self.lambda, hex)
    }
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Parses the `g:λ:HEX` form. The generation time is not part of the wire
/// format and comes back as `NaN`.
impl FromStr for Packet {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodecError::Malformed(s.to_string());
        let mut parts = s.split(':');
        let g: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let lambda: u32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let hex = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() || hex.len() != g.div_ceil(4) {
            return Err(bad());
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let nib = c.to_digit(16).ok_or_else(bad)?;
            for i in (0..4).rev() {
                bits.push(nib >> i & 1 == 1);
            }
        }
        if bits[g..].iter().any(|&b| b) {
            return Err(bad());
        }
        bits.truncate(g);
        Ok(Packet { bits, t_generated: f64::NAN, lambda })
    }
}

/// Decoded sign or phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heading {
    Sign(Sign),
    /// Center of the decoded phase cell, radians in `[0, 2π)`.
    Phase(f64),
}

impl Heading {
    /// Unit complex number pointing along the decoded direction.
    pub fn unit(&self) -> Complex64 {
        match *self {
            Heading::Sign(s) => Complex64::new(s.value(), 0.0),
            Heading::Phase(p) => Complex64::from_polar(1.0, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedEvent {
    /// Estimate `q(t_s)` of the triggering time.
    pub q_ts: f64,
    pub heading: Heading,
    /// Reconstructed error `z̄(t_c)`, once known.
    pub zbar: Option<Complex64>,
}

fn check_timing(gamma: f64, b: f64) -> Result<(), CodecError> {
    if gamma > 0.0 && b > 1.0 && gamma.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(CodecError::Timing { gamma, b })
    }
}

fn push_index(bits: &mut Vec<bool>, idx: u64, width: usize) {
    for i in (0..width).rev() {
        bits.push(idx >> i & 1 == 1);
    }
}

fn read_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64)
}

/// Appends parity and `index_bits` subinterval bits for `t_s`.
fn push_time(bits: &mut Vec<bool>, t_s: f64, index_bits: usize, gamma: f64, b: f64) {
    let width = b * gamma;
    let j = (t_s / width).floor();
    bits.push(j.rem_euclid(2.0) == 1.0);
    if index_bits > 0 {
        let n = 1u64 << index_bits;
        let sub = width / n as f64;
        let offset = t_s - j * width;
        let idx = ((offset / sub).floor().max(0.0) as u64).min(n - 1);
        push_index(bits, idx, index_bits);
    }
}

/// Recovers `q(t_s)` from the parity bit and subinterval index, given that
/// `t_s` lies in `[t_c - γ, t_c]`.
fn decode_time(parity: bool, index: &[bool], t_c: f64, gamma: f64, b: f64) -> Result<f64, CodecError> {
    let width = b * gamma;
    // Absorbs the rounding of t_c - γ; stays well below the (b-1)γ margin
    // that keeps the window inside two intervals.
    let tol = 1e-12 * (t_c.abs() + width);
    let lo = ((t_c - gamma - tol) / width).floor().max(0.0) as i64;
    let hi = ((t_c + tol) / width).floor().max(0.0) as i64;
    let want = parity as i64;
    let mut found = None;
    for j in lo..=hi {
        if j.rem_euclid(2) == want {
            if found.is_some() {
                return Err(CodecError::Ambiguous { t_c });
            }
            found = Some(j);
        }
    }
    let j = found.ok_or(CodecError::Undecodable { t_c, parity: want as u8 })?;
    let n = 1u64 << index.len();
    let sub = width / n as f64;
    let idx = read_index(index);
    Ok(j as f64 * width + (idx as f64 + 0.5) * sub)
}

/// Real-mode packet of `g >= 2` bits.
pub fn encode_real(t_s: f64, sign: Sign, g: usize, gamma: f64, b: f64) -> Result<Packet, CodecError> {
    if g < 2 {
        return Err(CodecError::TooFewBits { g, min: 2 });
    }
    check_timing(gamma, b)?;
    if t_s < 0.0 {
        return Err(CodecError::NegativeTime(t_s));
    }
    let mut bits = Vec::with_capacity(g);
    bits.push(sign.bit());
    push_time(&mut bits, t_s, g - 2, gamma, b);
    Ok(Packet { bits, t_generated: t_s, lambda: 0 })
}

/// One-bit real packet: the sign and nothing else.
pub fn encode_sign_marker(t_s: f64, sign: Sign) -> Packet {
    Packet { bits: vec![sign.bit()], t_generated: t_s, lambda: 0 }
}

pub fn decode_real(p: &Packet, t_c: f64, gamma: f64, b: f64) -> Result<DecodedEvent, CodecError> {
    if !p.is_real() {
        return Err(CodecError::Mode { expected: "real" });
    }
    if p.g() == 0 {
        return Err(CodecError::TooFewBits { g: 0, min: 1 });
    }
    let sign = if p.bits[0] { Sign::Pos } else { Sign::Neg };
    let q_ts = if p.is_marker() {
        t_c - gamma / 2.0
    } else {
        check_timing(gamma, b)?;
        decode_time(p.bits[1], &p.bits[2..], t_c, gamma, b)?
    };
    Ok(DecodedEvent { q_ts, heading: Heading::Sign(sign), zbar: None })
}

/// `z̄(t_c) = sign · J · e^{A (t_c - q(t_s))}`.
pub fn reconstruct_zbar_real(dec: &DecodedEvent, t_c: f64, a: f64, j: f64) -> f64 {
    let s = match dec.heading {
        Heading::Sign(s) => s.value(),
        Heading::Phase(p) => p.cos().signum(),
    };
    s * j * (a * (t_c - dec.q_ts)).exp()
}

/// Phase cell of width `2π / 2^λ` containing `phase`.
pub fn phase_cell(phase: f64, lambda: u32) -> u64 {
    let n = 1u64 << lambda;
    let cell = 2.0 * PI / n as f64;
    let p = phase.rem_euclid(2.0 * PI);
    ((p / cell).floor() as u64).min(n - 1)
}

pub fn phase_center(cell: u64, lambda: u32) -> f64 {
    let width = 2.0 * PI / (1u64 << lambda) as f64;
    (cell as f64 + 0.5) * width
}

/// Complex-mode packet of `g >= λ + 1` bits.
pub fn encode_complex(
    t_s: f64,
    phase: f64,
    g: usize,
    lambda: u32,
    gamma: f64,
    b: f64,
) -> Result<Packet, CodecError> {
    if lambda == 0 {
        return Err(CodecError::NoPhaseBits);
    }
    let head = lambda as usize;
    if g <= head {
        return Err(CodecError::TooFewBits { g, min: head + 1 });
    }
    check_timing(gamma, b)?;
    if t_s < 0.0 {
        return Err(CodecError::NegativeTime(t_s));
    }
    let mut bits = Vec::with_capacity(g);
    push_index(&mut bits, phase_cell(phase, lambda), head);
    push_time(&mut bits, t_s, g - head - 1, gamma, b);
    Ok(Packet { bits, t_generated: t_s, lambda })
}

/// `λ`-bit complex packet carrying only the phase cell.
pub fn encode_phase_marker(t_s: f64, phase: f64, lambda: u32) -> Result<Packet, CodecError> {
    if lambda == 0 {
        return Err(CodecError::NoPhaseBits);
    }
    let mut bits = Vec::with_capacity(lambda as usize);
    push_index(&mut bits, phase_cell(phase, lambda), lambda as usize);
    Ok(Packet { bits, t_generated: t_s, lambda })
}

/// Decodes a complex packet and rebuilds `z̄(t_c) = e^{A(t_c - q(t_s))} J e^{iφ_q}`.
pub fn decode_complex(
    p: &Packet,
    t_c: f64,
    gamma: f64,
    b: f64,
    a: Complex64,
    j: f64,
) -> Result<DecodedEvent, CodecError> {
    if p.is_real() {
        return Err(CodecError::Mode { expected: "complex" });
    }
    let head = p.lambda as usize;
    if p.g() < head {
        return Err(CodecError::TooFewBits { g: p.g(), min: head });
    }
    let phase = phase_center(read_index(&p.bits[..head]), p.lambda);
    let q_ts = if p.is_marker() {
        t_c - gamma / 2.0
    } else {
        check_timing(gamma, b)?;
        decode_time(p.bits[head], &p.bits[head + 1..], t_c, gamma, b)?
    };
    let zbar = (a * (t_c - q_ts)).exp() * Complex64::from_polar(j, phase);
    Ok(DecodedEvent { q_ts, heading: Heading::Phase(phase), zbar: Some(zbar) })
}

/// Worst-case `|t_s - q(t_s)|` for a packet of `g` bits, `head` of which
/// carry sign or phase.
pub fn timing_error_bound(g: usize, head: usize, gamma: f64, b: f64) -> f64 {
    if g <= head {
        // marker: midpoint of a window of length γ
        gamma / 2.0
    } else {
        b * gamma / 2f64.powi((g - head) as i32)
    }
}
