use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use pnc::{
    min_intercluster_distance, ChannelRow, Constellation, DistanceKernel, Modulation, NetworkMap,
};

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn channel(max_rows: usize) -> impl Strategy<Value = Vec<ChannelRow>> {
    prop::collection::vec(
        (complex(), complex()).prop_map(|(a, b)| [a, b]),
        1..=max_rows,
    )
}

fn modulation() -> impl Strategy<Value = Modulation> {
    prop_oneof![
        Just(Modulation::Bpsk),
        Just(Modulation::Qpsk),
        Just(Modulation::Psk8)
    ]
}

/// Straight-line reference: every ordered pair of joint symbols whose XOR
/// outputs differ, with the points rebuilt from the polar form.
fn brute_d_min_sq(h: &[ChannelRow], order: usize) -> f64 {
    let point = |s: usize| {
        let theta = std::f64::consts::PI * (1.0 + 2.0 * s as f64) / order as f64;
        Complex64::from_polar(1.0, theta)
    };
    let mut best = f64::INFINITY;
    for a in 0..order {
        for b in 0..order {
            for a2 in 0..order {
                for b2 in 0..order {
                    if a ^ b == a2 ^ b2 {
                        continue;
                    }
                    let (da, db) = (point(a) - point(a2), point(b) - point(b2));
                    let d: f64 = h
                        .iter()
                        .map(|[ha, hb]| (ha * da + hb * db).norm_sqr())
                        .sum();
                    best = best.min(d);
                }
            }
        }
    }
    best
}

fn setup(m: Modulation) -> (Constellation, NetworkMap) {
    (m.constellation(), NetworkMap::xor(m.order()).unwrap())
}

proptest! {
    #[test]
    fn exhaustive_search_matches_reference(h in channel(3), md in modulation()) {
        let (c, m) = setup(md);
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let reference = brute_d_min_sq(&h, md.order());
        assert_relative_eq!(d * d, reference, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn kernel_matches_exhaustive_search(h in channel(3), md in modulation()) {
        let (c, m) = setup(md);
        let k = DistanceKernel::new(&c, &m).unwrap();
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        assert_relative_eq!(k.d_min_sq(&h), d * d, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn reported_pair_attains_minimum(h in channel(2)) {
        let (c, m) = setup(Modulation::Qpsk);
        let r = min_intercluster_distance(&h, &c, &m).unwrap();
        let (s, t) = r.pair;
        prop_assert!(s < t);
        prop_assert_ne!(m.apply(s.0, s.1), m.apply(t.0, t.1));
        let d = pnc::geometry::pair_distance_sq(&h, &c, s, t).sqrt();
        prop_assert_eq!(d, r.d_min);
    }

    #[test]
    fn scales_with_channel_gain(h in channel(3), alpha in complex()) {
        let (c, m) = setup(Modulation::Qpsk);
        let scaled: Vec<ChannelRow> = h.iter().map(|[a, b]| [a * alpha, b * alpha]).collect();
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let ds = min_intercluster_distance(&scaled, &c, &m).unwrap().d_min;
        assert_relative_eq!(ds, alpha.norm() * d, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn invariant_to_global_phase(h in channel(3), phi in 0.0..std::f64::consts::TAU) {
        let (c, m) = setup(Modulation::Qpsk);
        let rot = Complex64::from_polar(1.0, phi);
        let turned: Vec<ChannelRow> = h.iter().map(|[a, b]| [a * rot, b * rot]).collect();
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let dt = min_intercluster_distance(&turned, &c, &m).unwrap().d_min;
        assert_relative_eq!(dt, d, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn xor_is_symmetric_in_users(h in channel(3), md in modulation()) {
        let (c, m) = setup(md);
        let swapped: Vec<ChannelRow> = h.iter().map(|&[a, b]| [b, a]).collect();
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let ds = min_intercluster_distance(&swapped, &c, &m).unwrap().d_min;
        assert_relative_eq!(ds, d, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn extra_relay_rows_never_hurt(h in channel(2), row in (complex(), complex())) {
        let (c, m) = setup(Modulation::Qpsk);
        let mut stacked = h.clone();
        stacked.push([row.0, row.1]);
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let ds = min_intercluster_distance(&stacked, &c, &m).unwrap().d_min;
        prop_assert!(ds >= d * (1.0 - 1e-12));
    }

    #[test]
    fn bounded_by_single_user_gap(h in channel(3)) {
        // Changing only s_B always changes the XOR output, so d_min is at
        // most the smallest QPSK gap seen through h_B alone.
        let (c, m) = setup(Modulation::Qpsk);
        let d = min_intercluster_distance(&h, &c, &m).unwrap().d_min;
        let hb: f64 = h.iter().map(|[_, b]| b.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(d <= std::f64::consts::SQRT_2 * hb * (1.0 + 1e-12));
    }
}
