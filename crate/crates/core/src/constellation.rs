//! Labeled M-ary constellations with unit average energy.
//!
//! Labels are natural binary in counter-clockwise order starting from the
//! first quadrant, so QPSK label `s` sits at `exp(i(π/4 + sπ/2))`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Modulation token accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Psk8,
    Psk16,
}

impl Modulation {
    pub fn order(self) -> usize {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Qpsk => 4,
            Modulation::Psk8 => 8,
            Modulation::Psk16 => 16,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Psk8 => "8psk",
            Modulation::Psk16 => "16psk",
        }
    }

    pub fn constellation(self) -> Constellation {
        match self {
            Modulation::Qpsk => Constellation::qpsk(),
            other => Constellation::psk(other.order()).expect("fixed orders are powers of two"),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "8psk" => Ok(Modulation::Psk8),
            "16psk" => Ok(Modulation::Psk16),
            other => Err(format!(
                "unknown modulation '{other}' (expected bpsk, qpsk, 8psk or 16psk)"
            )),
        }
    }
}

/// An M-ary complex signal set. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
}

pub(crate) fn is_power_of_two_order(m: usize) -> bool {
    m >= 2 && m.is_power_of_two()
}

impl Constellation {
    /// QPSK with the exact coordinates `(±1 ± i)/√2`.
    pub fn qpsk() -> Self {
        let a = FRAC_1_SQRT_2;
        Constellation {
            name: "qpsk".to_owned(),
            points: vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(-a, -a),
                Complex64::new(a, -a),
            ],
        }
    }

    /// M-PSK with points `exp(i(π/M + 2πs/M))`.
    ///
    /// Components within 1e-15 of zero are snapped to exactly zero, and
    /// `M = 4` returns [`Constellation::qpsk`] so the two coincide bit for bit.
    pub fn psk(order: usize) -> Result<Self> {
        if !is_power_of_two_order(order) {
            return Err(Error::InvalidOrder(order));
        }
        if order == 4 {
            return Ok(Self::qpsk());
        }
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        let points = (0..order)
            .map(|s| {
                let theta = PI / order as f64 + 2.0 * PI * s as f64 / order as f64;
                let (sin, cos) = theta.sin_cos();
                Complex64::new(snap(cos), snap(sin))
            })
            .collect();
        let name = match order {
            2 => "bpsk".to_owned(),
            m => format!("{m}psk"),
        };
        Ok(Constellation { name, points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// The mapper F: message → symbol.
    pub fn map_symbol(&self, s: usize) -> Result<Complex64> {
        self.points.get(s).copied().ok_or(Error::SymbolOutOfRange {
            symbol: s,
            order: self.order(),
        })
    }

    /// Exact inverse of [`map_symbol`](Self::map_symbol). This is a table
    /// lookup, not a slicer: anything but a stored point is rejected.
    pub fn demap_symbol(&self, x: Complex64) -> Result<usize> {
        self.points
            .iter()
            .position(|&p| p == x)
            .ok_or(Error::NotAConstellationPoint { re: x.re, im: x.im })
    }
}
