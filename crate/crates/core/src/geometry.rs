//! Intercluster distance at the relay and singular fade states.
//!
//! For an `N_R × 2` channel `H` the distance between joint symbols `s` and
//! `s'` is `‖H·(F(s_A) − F(s_A'), F(s_B) − F(s_B'))‖`, and `d_min` is the
//! minimum over pairs that the map sends to different outputs. All values
//! assume `E_s = 1`.

use std::collections::HashSet;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::netmap::NetworkMap;

/// One relay antenna's row `[h_A, h_B]`.
pub type ChannelRow = [Complex64; 2];

pub type JointSymbol = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub d_min: f64,
    pub pair: (JointSymbol, JointSymbol),
}

fn check_inputs(h: &[ChannelRow], c: &Constellation, m: &NetworkMap) -> Result<()> {
    if h.is_empty() {
        return Err(Error::DimensionMismatch(
            "channel matrix needs at least one row".into(),
        ));
    }
    if c.order() != m.order() {
        return Err(Error::DimensionMismatch(format!(
            "constellation order {} does not match map order {}",
            c.order(),
            m.order()
        )));
    }
    Ok(())
}

#[inline]
fn fold_min(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, |m, d| if d < m { d } else { m })
}

#[inline]
fn superposed_gap_sq(h: &[ChannelRow], da: Complex64, db: Complex64) -> f64 {
    h.iter()
        .map(|[ha, hb]| (ha * da + hb * db).norm_sqr())
        .sum()
}

/// Squared distance between two joint symbols after the channel.
pub fn pair_distance_sq(
    h: &[ChannelRow],
    c: &Constellation,
    s: JointSymbol,
    t: JointSymbol,
) -> f64 {
    let p = c.points();
    superposed_gap_sq(h, p[s.0] - p[t.0], p[s.1] - p[t.1])
}

/// Exhaustive `d_min` over all unordered joint-symbol pairs in different
/// clusters. Ties go to the lexicographically smallest `(s, s')` with `s < s'`.
pub fn min_intercluster_distance(
    h: &[ChannelRow],
    c: &Constellation,
    m: &NetworkMap,
) -> Result<DistanceReport> {
    check_inputs(h, c, m)?;
    let order = c.order();
    let joint: Vec<JointSymbol> = (0..order)
        .flat_map(|a| (0..order).map(move |b| (a, b)))
        .collect();
    let mut best = f64::INFINITY;
    let mut arg = (joint[0], joint[1]);
    for (k, &s) in joint.iter().enumerate() {
        let ncs = m.apply(s.0, s.1);
        for &t in &joint[k + 1..] {
            if m.apply(t.0, t.1) == ncs {
                continue;
            }
            let d = pair_distance_sq(h, c, s, t);
            if d < best {
                best = d;
                arg = (s, t);
            }
        }
    }
    Ok(DistanceReport {
        d_min: best.sqrt(),
        pair: arg,
    })
}

/// Precomputed intercluster difference vectors `(ΔA, ΔB)` for one
/// constellation and map, deduplicated up to a common sign. Evaluating
/// `d_min²` against it gives the same minimum as the exhaustive search.
#[derive(Debug, Clone)]
pub struct DistanceKernel {
    deltas: Vec<ChannelRow>,
    // factored form: distinct ΔA and ΔB values, and each delta as an index pair
    da_vals: Vec<Complex64>,
    db_vals: Vec<Complex64>,
    pairs: Vec<(u32, u32)>,
}

const DEDUP_GRID: f64 = 1e9;

fn quantize(z: Complex64) -> (i64, i64) {
    (
        (z.re * DEDUP_GRID).round() as i64,
        (z.im * DEDUP_GRID).round() as i64,
    )
}

impl DistanceKernel {
    pub fn new(c: &Constellation, m: &NetworkMap) -> Result<Self> {
        if c.order() != m.order() {
            return Err(Error::DimensionMismatch(format!(
                "constellation order {} does not match map order {}",
                c.order(),
                m.order()
            )));
        }
        let order = c.order();
        let p = c.points();
        let mut seen = HashSet::new();
        let mut deltas = Vec::new();
        for s in 0..order * order {
            let (sa, sb) = (s / order, s % order);
            for t in s + 1..order * order {
                let (ta, tb) = (t / order, t % order);
                if m.apply(sa, sb) == m.apply(ta, tb) {
                    continue;
                }
                let mut d = [p[sa] - p[ta], p[sb] - p[tb]];
                let lead = [d[0].re, d[0].im, d[1].re, d[1].im]
                    .into_iter()
                    .find(|v| v.abs() > 1e-12)
                    .unwrap_or(0.0);
                if lead < 0.0 {
                    d = [-d[0], -d[1]];
                }
                let (a, b) = (quantize(d[0]), quantize(d[1]));
                if seen.insert((a, b)) {
                    deltas.push(d);
                }
            }
        }
        let mut da_vals = Vec::new();
        let mut db_vals = Vec::new();
        let index_of = |vals: &mut Vec<Complex64>, z: Complex64| -> u32 {
            match vals.iter().position(|&v| v == z) {
                Some(k) => k as u32,
                None => {
                    vals.push(z);
                    (vals.len() - 1) as u32
                }
            }
        };
        let pairs = deltas
            .iter()
            .map(|[da, db]| (index_of(&mut da_vals, *da), index_of(&mut db_vals, *db)))
            .collect();
        Ok(DistanceKernel {
            deltas,
            da_vals,
            db_vals,
            pairs,
        })
    }

    /// Distinct `ΔA` values; see [`fill_products`](Self::fill_products).
    pub fn delta_a_values(&self) -> &[Complex64] {
        &self.da_vals
    }

    pub fn delta_b_values(&self) -> &[Complex64] {
        &self.db_vals
    }

    /// Writes `coeff[r] · Δ` for every relay row `r` and every distinct
    /// difference of `user_b`'s (or A's) symbols, row-major.
    pub fn fill_products(&self, coeff: &[Complex64], user_b: bool, out: &mut [Complex64]) {
        let vals = if user_b { &self.db_vals } else { &self.da_vals };
        for (h, chunk) in coeff.iter().zip(out.chunks_exact_mut(vals.len())) {
            for (o, v) in chunk.iter_mut().zip(vals) {
                *o = h * v;
            }
        }
    }

    /// `d_min²` from precomputed products (one block per relay row, laid out
    /// as by [`fill_products`](Self::fill_products)), or `None` if it is
    /// `<= floor`. Bit-identical to
    /// [`d_min_sq_above`](Self::d_min_sq_above) on the same channel.
    #[inline]
    pub fn d_min_sq_from_products(
        &self,
        ua: &[Complex64],
        ub: &[Complex64],
        floor: f64,
    ) -> Option<f64> {
        let (na, nb) = (self.da_vals.len(), self.db_vals.len());
        let rows = ua.len() / na;
        debug_assert_eq!(rows, ub.len() / nb);
        // A branch-free minimum beats early exit at these sizes.
        let best = if rows == 1 {
            fold_min(
                self.pairs
                    .iter()
                    .map(|&(ia, ib)| (ua[ia as usize] + ub[ib as usize]).norm_sqr()),
            )
        } else {
            fold_min(self.pairs.iter().map(|&(ia, ib)| {
                (0..rows)
                    .map(|r| (ua[r * na + ia as usize] + ub[r * nb + ib as usize]).norm_sqr())
                    .sum::<f64>()
            }))
        };
        (best > floor).then_some(best)
    }

    /// Distinct difference vectors, one per `±` class.
    pub fn deltas(&self) -> &[ChannelRow] {
        &self.deltas
    }

    #[inline]
    pub fn d_min_sq(&self, h: &[ChannelRow]) -> f64 {
        self.d_min_sq_above(h, f64::NEG_INFINITY)
            .unwrap_or(f64::INFINITY)
    }

    /// `d_min²`, or `None` if it is `<= floor`.
    #[inline]
    pub fn d_min_sq_above(&self, h: &[ChannelRow], floor: f64) -> Option<f64> {
        let best = if let [[ha, hb]] = h {
            fold_min(
                self.deltas
                    .iter()
                    .map(|[da, db]| (ha * da + hb * db).norm_sqr()),
            )
        } else {
            fold_min(
                self.deltas
                    .iter()
                    .map(|[da, db]| superposed_gap_sq(h, *da, *db)),
            )
        };
        (best > floor).then_some(best)
    }
}

/// Channel ratios `γ = h_A / h_B` at which two clusters touch.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularStateList {
    /// Finite nonzero ratios, sorted by `(re, im)`.
    pub ratios: Vec<Complex64>,
    /// `h_A = 0` collapses clusters.
    pub includes_zero: bool,
    /// `h_B = 0` collapses clusters.
    pub includes_infinity: bool,
}

impl SingularStateList {
    /// Distance from `gamma` to the closest finite listed ratio.
    pub fn distance_to_nearest(&self, gamma: Complex64) -> f64 {
        self.ratios
            .iter()
            .map(|r| (r - gamma).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

pub const SINGULAR_DEDUP_TOL: f64 = 1e-9;

pub fn singular_fade_states(c: &Constellation, m: &NetworkMap) -> Result<SingularStateList> {
    let kernel = DistanceKernel::new(c, m)?;
    let mut ratios: Vec<Complex64> = Vec::new();
    let mut includes_zero = false;
    let mut includes_infinity = false;
    for [da, db] in kernel.deltas() {
        if da.norm() < 1e-12 {
            includes_infinity = true;
            continue;
        }
        let gamma = -db / da;
        if gamma.norm() < 1e-12 {
            includes_zero = true;
            continue;
        }
        if ratios
            .iter()
            .all(|r| (r - gamma).norm() > SINGULAR_DEDUP_TOL)
        {
            ratios.push(gamma);
        }
    }
    ratios.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(SingularStateList {
        ratios,
        includes_zero,
        includes_infinity,
    })
}

/// `d_min` over a rectangular grid of `γ`, evaluated at `H = [γ, 1]`.
/// `steps` points per axis, endpoints included.
pub fn d_min_grid(
    c: &Constellation,
    m: &NetworkMap,
    re: (f64, f64),
    im: (f64, f64),
    steps: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    if steps == 0 {
        return Err(Error::InvalidConfig(
            "grid needs at least one step per axis".into(),
        ));
    }
    let kernel = DistanceKernel::new(c, m)?;
    let coord = |(lo, hi): (f64, f64), k: usize| {
        if steps == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (steps - 1) as f64
        }
    };
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(steps * steps);
    for ki in 0..steps {
        let y = coord(im, ki);
        for kr in 0..steps {
            let x = coord(re, kr);
            let d = kernel.d_min_sq(&[[Complex64::new(x, y), one]]).sqrt();
            out.push((x, y, d));
        }
    }
    Ok(out)
}
