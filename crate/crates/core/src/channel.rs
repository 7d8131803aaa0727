//! Rayleigh block fading, complex AWGN, and the per-trial random streams
//! that feed them.
//!
//! Every trial owns a ChaCha8 stream keyed by `(seed, trial index)`. The
//! stream id selects one of ChaCha's 2^64 independent streams, so trial `t`
//! sees the same numbers no matter which worker runs it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    A,
    B,
}

/// Counter-based random stream for one trial.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        RandomStream { rng }
    }

    /// Standard circularly-symmetric complex Gaussian, CN(0, 1).
    #[inline]
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform message in `0..order`.
    #[inline]
    pub fn message(&mut self, order: usize) -> usize {
        self.rng.random_range(0..order)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Keyed once per seed; hands out per-trial streams without re-deriving
/// the key. `factory.stream(id)` equals `RandomStream::new(seed, id)`.
#[derive(Debug, Clone)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        StreamFactory {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn stream(&self, id: u64) -> RandomStream {
        let mut rng = self.base.clone();
        rng.set_stream(id);
        RandomStream { rng }
    }
}

/// Fading coefficients `h[m][i][j]` from antenna `i` of user `m` to relay
/// antenna `j`. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    n_a: usize,
    n_b: usize,
    n_r: usize,
    // user A block first, then B; relay index fastest.
    coeff: Vec<Complex64>,
}

impl ChannelSet {
    pub fn zeros(n_a: usize, n_b: usize, n_r: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 || n_r == 0 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be >= 1, got ({n_a}, {n_b}, {n_r})"
            )));
        }
        Ok(ChannelSet {
            n_a,
            n_b,
            n_r,
            coeff: vec![Complex64::new(0.0, 0.0); (n_a + n_b) * n_r],
        })
    }

    /// Builds a set from per-antenna relay vectors: `a[i][j]`, `b[i][j]`.
    pub fn from_vectors(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<Self> {
        let n_r = a.first().map_or(0, Vec::len);
        let mut set = Self::zeros(a.len(), b.len(), n_r)?;
        for (user, vectors) in [(User::A, a), (User::B, b)] {
            for (i, v) in vectors.iter().enumerate() {
                if v.len() != n_r {
                    return Err(Error::DimensionMismatch(format!(
                        "antenna {i} of user {user:?} has {} relay coefficients, expected {n_r}",
                        v.len()
                    )));
                }
                set.antenna_mut(user, i).copy_from_slice(v);
            }
        }
        Ok(set)
    }

    /// Fresh i.i.d. CN(0, 1) coefficients, user A first, relay index fastest.
    pub fn draw(rs: &mut RandomStream, n_a: usize, n_b: usize, n_r: usize) -> Result<Self> {
        let mut set = Self::zeros(n_a, n_b, n_r)?;
        set.redraw(rs);
        Ok(set)
    }

    /// Overwrites every coefficient in place, same draw order as [`draw`](Self::draw).
    pub fn redraw(&mut self, rs: &mut RandomStream) {
        for h in &mut self.coeff {
            *h = rs.complex_gaussian();
        }
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn antennas(&self, user: User) -> usize {
        match user {
            User::A => self.n_a,
            User::B => self.n_b,
        }
    }

    fn offset(&self, user: User, i: usize) -> usize {
        assert!(
            i < self.antennas(user),
            "antenna {i} out of range for user {user:?}"
        );
        match user {
            User::A => i * self.n_r,
            User::B => (self.n_a + i) * self.n_r,
        }
    }

    /// Column vector `h_{m,i}` across all relay antennas.
    #[inline]
    pub fn antenna(&self, user: User, i: usize) -> &[Complex64] {
        let o = self.offset(user, i);
        &self.coeff[o..o + self.n_r]
    }

    pub fn antenna_mut(&mut self, user: User, i: usize) -> &mut [Complex64] {
        let o = self.offset(user, i);
        let n_r = self.n_r;
        &mut self.coeff[o..o + n_r]
    }

    #[inline]
    pub fn get(&self, user: User, i: usize, j: usize) -> Complex64 {
        self.antenna(user, i)[j]
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeff
    }

    pub fn is_finite(&self) -> bool {
        self.coeff
            .iter()
            .all(|h| h.re.is_finite() && h.im.is_finite())
    }

    /// `N_R × 2` matrix `[h_{A,i} h_{B,j}]` using every relay antenna.
    pub fn pair_matrix(&self, i: usize, j: usize) -> Vec<[Complex64; 2]> {
        let mut rows = Vec::with_capacity(self.n_r);
        self.pair_matrix_into(i, j, &mut rows);
        rows
    }

    pub fn pair_matrix_into(&self, i: usize, j: usize, rows: &mut Vec<[Complex64; 2]>) {
        rows.clear();
        rows.extend(
            self.antenna(User::A, i)
                .iter()
                .zip(self.antenna(User::B, j))
                .map(|(&a, &b)| [a, b]),
        );
    }

    /// `1 × 2` row `[h_{A,i,k} h_{B,j,k}]` for a single relay antenna `k`.
    #[inline]
    pub fn relay_row(&self, i: usize, j: usize, k: usize) -> [Complex64; 2] {
        [self.get(User::A, i, k), self.get(User::B, j, k)]
    }
}

/// Noise variance per complex dimension, with `E_s = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    n0: f64,
}

impl NoiseSpec {
    pub fn new(n0: f64) -> Result<Self> {
        if n0 > 0.0 && n0.is_finite() {
            Ok(NoiseSpec { n0 })
        } else {
            Err(Error::InvalidConfig(format!(
                "noise variance must be positive, got {n0}"
            )))
        }
    }

    /// `N_0 = 10^(-snr/10)`.
    pub fn from_snr_db(es_over_n0_db: f64) -> Self {
        NoiseSpec {
            n0: 10f64.powf(-es_over_n0_db / 10.0),
        }
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Standard deviation scale applied to CN(0, 1) samples.
    pub fn amplitude(&self) -> f64 {
        self.n0.sqrt()
    }
}

pub fn snr_db_to_n0(es_over_n0_db: f64) -> NoiseSpec {
    NoiseSpec::from_snr_db(es_over_n0_db)
}

/// `dim` i.i.d. CN(0, N_0) samples.
pub fn draw_noise(rs: &mut RandomStream, ns: NoiseSpec, dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    fill_noise(rs, ns, &mut out);
    out
}

#[inline]
pub fn fill_noise(rs: &mut RandomStream, ns: NoiseSpec, out: &mut [Complex64]) {
    let amp = ns.amplitude();
    for n in out {
        *n = rs.complex_gaussian() * amp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: usize = 1_000_000;

    #[test]
    fn channel_moments() {
        let mut rs = RandomStream::new(7, 0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        let mut re_sq = 0.0;
        // 4 coefficients per draw; look at each slot independently.
        let mut per_slot = [Complex64::new(0.0, 0.0); 4];
        let mut per_slot_energy = [0.0; 4];
        let draws = SAMPLES / 4;
        let mut set = ChannelSet::zeros(2, 1, 2).unwrap();
        for _ in 0..draws {
            set.redraw(&mut rs);
            for (k, h) in [
                set.get(User::A, 0, 0),
                set.get(User::A, 0, 1),
                set.get(User::A, 1, 0),
                set.get(User::B, 0, 1),
            ]
            .into_iter()
            .enumerate()
            {
                sum += h;
                energy += h.norm_sqr();
                re_sq += h.re * h.re;
                per_slot[k] += h;
                per_slot_energy[k] += h.norm_sqr();
            }
        }
        let n = (draws * 4) as f64;
        assert!((sum / n).norm() < 0.01);
        assert!((energy / n - 1.0).abs() < 0.01);
        assert!((re_sq / n - 0.5).abs() < 0.01);
        for k in 0..4 {
            assert!((per_slot[k] / draws as f64).norm() < 0.01);
            assert!((per_slot_energy[k] / draws as f64 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn noise_moments() {
        let mut rs = RandomStream::new(11, 3);
        let ns = NoiseSpec::new(2.0).unwrap();
        let v = draw_noise(&mut rs, ns, SAMPLES);
        let mean: Complex64 = v.iter().sum::<Complex64>() / SAMPLES as f64;
        let power = v.iter().map(|n| n.norm_sqr()).sum::<f64>() / SAMPLES as f64;
        assert!(mean.norm() < 0.01);
        assert!((power - 2.0).abs() < 0.02, "{power}");
    }

    #[test]
    fn vanishing_noise() {
        let mut rs = RandomStream::new(0, 0);
        let v = draw_noise(&mut rs, NoiseSpec::new(1e-300).unwrap(), 16);
        assert!(v.iter().all(|n| n.norm() < 1e-140));
    }

    #[test]
    fn determinism() {
        let a = ChannelSet::draw(&mut RandomStream::new(5, 9), 2, 3, 2).unwrap();
        let b = ChannelSet::draw(&mut RandomStream::new(5, 9), 2, 3, 2).unwrap();
        assert_eq!(a, b);
        let c = ChannelSet::draw(&mut RandomStream::new(5, 10), 2, 3, 2).unwrap();
        assert_ne!(a, c);
        let ns = NoiseSpec::new(0.5).unwrap();
        assert_eq!(
            draw_noise(&mut RandomStream::new(1, 2), ns, 8),
            draw_noise(&mut RandomStream::new(1, 2), ns, 8)
        );
    }

    #[test]
    fn factory_matches_direct_streams() {
        let f = StreamFactory::new(42);
        for id in [0, 1, 17, u64::MAX] {
            let mut x = f.stream(id);
            let mut y = RandomStream::new(42, id);
            for _ in 0..100 {
                assert_eq!(x.complex_gaussian(), y.complex_gaussian());
            }
        }
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_db_to_n0(0.0).n0(), 1.0);
        assert!((snr_db_to_n0(10.0).n0() - 0.1).abs() < 1e-15);
        assert!((snr_db_to_n0(30.0).n0() - 0.001).abs() < 1e-15);
        assert!(NoiseSpec::new(0.0).is_err());
        assert!(NoiseSpec::new(-1.0).is_err());
    }

    #[test]
    fn layout_and_views() {
        let a = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)],
        ];
        let b = vec![vec![Complex64::new(5.0, 0.0), Complex64::new(6.0, 0.0)]];
        let set = ChannelSet::from_vectors(&a, &b).unwrap();
        assert_eq!(set.get(User::A, 1, 0).re, 3.0);
        assert_eq!(set.get(User::B, 0, 1).re, 6.0);
        let h = set.pair_matrix(1, 0);
        assert_eq!(h.len(), 2);
        assert_eq!((h[1][0].re, h[1][1].re), (4.0, 6.0));
        assert_eq!(set.relay_row(0, 0, 1)[0].re, 2.0);
        assert!(ChannelSet::zeros(0, 1, 1).is_err());
        assert!(ChannelSet::from_vectors(&a, &[vec![Complex64::new(0.0, 0.0)]]).is_err());
    }
}
