//! Relay-side MA processing and user-side BC decoding.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::geometry::ChannelRow;
use crate::netmap::NetworkMap;

/// What the relay holds after the MA slot.
#[derive(Debug, Clone, PartialEq)]
pub struct MaObservation {
    pub y: Vec<Complex64>,
    pub h: Vec<ChannelRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEstimate {
    pub s_a: usize,
    pub s_b: usize,
    pub ncs: usize,
    /// Squared residual `‖y − H·x‖²` of the winner.
    pub metric: f64,
}

/// Noiseless superposition `H·(F(s_a), F(s_b))` written into `y`.
#[inline]
pub fn superpose_into(h: &[ChannelRow], xa: Complex64, xb: Complex64, y: &mut [Complex64]) {
    for (out, [ha, hb]) in y.iter_mut().zip(h) {
        *out = ha * xa + hb * xb;
    }
}

pub fn ma_transmit(
    h: &[ChannelRow],
    s_a: usize,
    s_b: usize,
    noise: &[Complex64],
    c: &Constellation,
) -> Result<MaObservation> {
    if noise.len() != h.len() {
        return Err(Error::DimensionMismatch(format!(
            "noise has {} samples for {} relay antennas",
            noise.len(),
            h.len()
        )));
    }
    let (xa, xb) = (c.map_symbol(s_a)?, c.map_symbol(s_b)?);
    let mut y = vec![Complex64::new(0.0, 0.0); h.len()];
    superpose_into(h, xa, xb, &mut y);
    for (y, n) in y.iter_mut().zip(noise) {
        *y += n;
    }
    Ok(MaObservation { y, h: h.to_vec() })
}

/// Exhaustive joint ML detector with reusable scratch space.
#[derive(Debug, Clone)]
pub struct JointDetector {
    points: Vec<Complex64>,
    // per relay row: h_A·F(a) for all a, then h_B·F(b) for all b
    scaled: Vec<Complex64>,
}

impl JointDetector {
    pub fn new(c: &Constellation) -> Self {
        JointDetector {
            points: c.points().to_vec(),
            scaled: Vec::new(),
        }
    }

    /// Minimizes `‖y − H·(F(a), F(b))‖²` over all `M²` pairs; ties go to
    /// the smallest `(a, b)`.
    pub fn detect(&mut self, y: &[Complex64], h: &[ChannelRow], m: &NetworkMap) -> JointEstimate {
        let order = self.points.len();
        self.scaled.clear();
        for [ha, hb] in h {
            self.scaled.extend(self.points.iter().map(|x| ha * x));
            self.scaled.extend(self.points.iter().map(|x| hb * x));
        }
        let mut best = (0, 0, f64::INFINITY);
        if let [y0] = y {
            let (ua, ub) = self.scaled.split_at(order);
            for (a, pa) in ua.iter().enumerate() {
                let r = y0 - pa;
                for (b, pb) in ub.iter().enumerate() {
                    let d = (r - pb).norm_sqr();
                    if d < best.2 {
                        best = (a, b, d);
                    }
                }
            }
        } else {
            for a in 0..order {
                for b in 0..order {
                    let d: f64 = y
                        .iter()
                        .zip(self.scaled.chunks_exact(2 * order))
                        .map(|(yr, row)| (yr - row[a] - row[order + b]).norm_sqr())
                        .sum();
                    if d < best.2 {
                        best = (a, b, d);
                    }
                }
            }
        }
        JointEstimate {
            s_a: best.0,
            s_b: best.1,
            ncs: m.apply(best.0, best.1),
            metric: best.2,
        }
    }
}

pub fn ml_joint_detect(obs: &MaObservation, c: &Constellation, m: &NetworkMap) -> JointEstimate {
    JointDetector::new(c).detect(&obs.y, &obs.h, m)
}

/// Relay broadcast symbol `x_R = F(M(ŝ_A, ŝ_B))`.
pub fn form_ncs(je: &JointEstimate, m: &NetworkMap, c: &Constellation) -> Complex64 {
    c.points()[m.apply(je.s_a, je.s_b)]
}

/// User-side decoding of the partner's message from the relay broadcast,
/// given the user's own message and perfect knowledge of `h'`.
pub fn bc_decode(
    y: Complex64,
    h_prime: Complex64,
    own_msg: usize,
    c: &Constellation,
    m: &NetworkMap,
) -> usize {
    let points = c.points();
    let mut best = (0, f64::INFINITY);
    for s in 0..c.order() {
        let d = (y - h_prime * points[m.apply(own_msg, s)]).norm_sqr();
        if d < best.1 {
            best = (s, d);
        }
    }
    best.0
}

/// User B's side of [`bc_decode`]: its own message is the second map
/// argument and the search runs over `s_A`.
pub fn bc_decode_as_b(
    y: Complex64,
    h_prime: Complex64,
    own_msg: usize,
    c: &Constellation,
    m: &NetworkMap,
) -> usize {
    let points = c.points();
    let mut best = (0, f64::INFINITY);
    for s in 0..c.order() {
        let d = (y - h_prime * points[m.apply(s, own_msg)]).norm_sqr();
        if d < best.1 {
            best = (s, d);
        }
    }
    best.0
}
