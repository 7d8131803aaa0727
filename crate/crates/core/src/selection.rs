//! Antenna selection at the users (and, for JAS, at the relay).
//!
//! All indices are zero-based. Ties go to the lexicographically smallest
//! index tuple.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelSet, User};
use crate::constellation::Constellation;
use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::{ChannelRow, DistanceKernel};
use crate::netmap::NetworkMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// First antenna everywhere, all relay antennas.
    None,
    /// Strongest received power per user.
    Tas1,
    /// Maximize `d_min` over user antenna pairs, all relay antennas.
    Tas2,
    /// Maximize `d_min` over user antenna pairs and a single relay antenna.
    Jas,
}

impl Scheme {
    pub fn token(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Tas1 => "tas1",
            Scheme::Tas2 => "tas2",
            Scheme::Jas => "jas",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Scheme::None),
            "tas1" => Ok(Scheme::Tas1),
            "tas2" => Ok(Scheme::Tas2),
            "jas" => Ok(Scheme::Jas),
            other => Err(format!(
                "unknown scheme '{other}' (expected none, tas1, tas2 or jas)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionResult {
    pub a_idx: usize,
    pub b_idx: usize,
    /// Selected relay antenna; `None` means every relay antenna is used.
    pub r_idx: Option<usize>,
    /// Summed power for TAS1, squared `d_min` otherwise.
    pub metric: f64,
}

impl SelectionResult {
    /// The channel the relay actually sees after selection.
    pub fn effective_channel_into(&self, ch: &ChannelSet, rows: &mut Vec<ChannelRow>) {
        match self.r_idx {
            Some(k) => {
                rows.clear();
                rows.push(ch.relay_row(self.a_idx, self.b_idx, k));
            }
            None => ch.pair_matrix_into(self.a_idx, self.b_idx, rows),
        }
    }

    pub fn effective_channel(&self, ch: &ChannelSet) -> Vec<ChannelRow> {
        let mut rows = Vec::with_capacity(ch.n_r());
        self.effective_channel_into(ch, &mut rows);
        rows
    }
}

fn antenna_power(ch: &ChannelSet, user: User, i: usize) -> f64 {
    ch.antenna(user, i).iter().map(|h| h.norm_sqr()).sum()
}

fn strongest(ch: &ChannelSet, user: User) -> (usize, f64) {
    let mut best = (0, antenna_power(ch, user, 0));
    for i in 1..ch.antennas(user) {
        let p = antenna_power(ch, user, i);
        if p > best.1 {
            best = (i, p);
        }
    }
    best
}

pub fn tas1_select(ch: &ChannelSet) -> SelectionResult {
    let (a_idx, pa) = strongest(ch, User::A);
    let (b_idx, pb) = strongest(ch, User::B);
    SelectionResult {
        a_idx,
        b_idx,
        r_idx: None,
        metric: pa + pb,
    }
}

/// Reusable buffers for [`Selector::select_with`].
#[derive(Debug, Clone, Default)]
pub struct SelectScratch {
    rows: Vec<ChannelRow>,
    // [antenna][relay row][distinct Δ] products h · Δ
    ua: Vec<Complex64>,
    ub: Vec<Complex64>,
}

/// Selection engine bound to one constellation and map.
#[derive(Debug, Clone)]
pub struct Selector {
    scheme: Scheme,
    kernel: DistanceKernel,
}

impl Selector {
    pub fn new(scheme: Scheme, c: &Constellation, m: &NetworkMap) -> Result<Self> {
        Ok(Selector {
            scheme,
            kernel: DistanceKernel::new(c, m)?,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn kernel(&self) -> &DistanceKernel {
        &self.kernel
    }

    pub fn select(&self, ch: &ChannelSet) -> SelectionResult {
        self.select_with(ch, &mut SelectScratch::default())
    }

    pub fn select_with(&self, ch: &ChannelSet, scratch: &mut SelectScratch) -> SelectionResult {
        match self.scheme {
            Scheme::None => {
                ch.pair_matrix_into(0, 0, &mut scratch.rows);
                SelectionResult {
                    a_idx: 0,
                    b_idx: 0,
                    r_idx: None,
                    metric: self.kernel.d_min_sq(&scratch.rows),
                }
            }
            Scheme::Tas1 => tas1_select(ch),
            Scheme::Tas2 => self.tas2(ch, scratch),
            Scheme::Jas => self.jas(ch, scratch),
        }
    }

    fn fill_products(&self, ch: &ChannelSet, scratch: &mut SelectScratch) -> (usize, usize) {
        let n_r = ch.n_r();
        let sa = n_r * self.kernel.delta_a_values().len();
        let sb = n_r * self.kernel.delta_b_values().len();
        scratch.ua.resize(ch.n_a() * sa, Complex64::new(0.0, 0.0));
        scratch.ub.resize(ch.n_b() * sb, Complex64::new(0.0, 0.0));
        for (i, block) in scratch.ua.chunks_exact_mut(sa).enumerate() {
            self.kernel
                .fill_products(ch.antenna(User::A, i), false, block);
        }
        for (j, block) in scratch.ub.chunks_exact_mut(sb).enumerate() {
            self.kernel
                .fill_products(ch.antenna(User::B, j), true, block);
        }
        (sa, sb)
    }

    fn tas2(&self, ch: &ChannelSet, scratch: &mut SelectScratch) -> SelectionResult {
        let (sa, sb) = self.fill_products(ch, scratch);
        let mut best = SelectionResult {
            a_idx: 0,
            b_idx: 0,
            r_idx: None,
            metric: f64::NEG_INFINITY,
        };
        for i in 0..ch.n_a() {
            let ua = &scratch.ua[i * sa..(i + 1) * sa];
            for j in 0..ch.n_b() {
                let ub = &scratch.ub[j * sb..(j + 1) * sb];
                if let Some(d) = self.kernel.d_min_sq_from_products(ua, ub, best.metric) {
                    best = SelectionResult {
                        a_idx: i,
                        b_idx: j,
                        r_idx: None,
                        metric: d,
                    };
                }
            }
        }
        best
    }

    fn jas(&self, ch: &ChannelSet, scratch: &mut SelectScratch) -> SelectionResult {
        let (sa, sb) = self.fill_products(ch, scratch);
        let (ka, kb) = (sa / ch.n_r(), sb / ch.n_r());
        let mut best = SelectionResult {
            a_idx: 0,
            b_idx: 0,
            r_idx: Some(0),
            metric: f64::NEG_INFINITY,
        };
        for i in 0..ch.n_a() {
            for j in 0..ch.n_b() {
                for k in 0..ch.n_r() {
                    let ua = &scratch.ua[i * sa + k * ka..i * sa + (k + 1) * ka];
                    let ub = &scratch.ub[j * sb + k * kb..j * sb + (k + 1) * kb];
                    if let Some(d) = self.kernel.d_min_sq_from_products(ua, ub, best.metric) {
                        best = SelectionResult {
                            a_idx: i,
                            b_idx: j,
                            r_idx: Some(k),
                            metric: d,
                        };
                    }
                }
            }
        }
        best
    }
}

pub fn tas2_select(ch: &ChannelSet, c: &Constellation, m: &NetworkMap) -> Result<SelectionResult> {
    Ok(Selector::new(Scheme::Tas2, c, m)?.select(ch))
}

pub fn jas_select(ch: &ChannelSet, c: &Constellation, m: &NetworkMap) -> Result<SelectionResult> {
    Ok(Selector::new(Scheme::Jas, c, m)?.select(ch))
}
