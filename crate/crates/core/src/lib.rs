//! Link-level simulation of physical-layer network coding over the
//! two-way relay channel.
//!
//! Two users exchange M-PSK symbols through a half-duplex relay. In the
//! multiple-access slot the relay jointly detects the superposed pair and
//! forwards a network-coded symbol (bitwise XOR by default); in the
//! broadcast slot each user strips its own message. Multiple antennas are
//! exploited through antenna selection: strongest channel (TAS1), maximum
//! intercluster distance (TAS2), and joint user/relay selection (JAS).
//!
//! The [`montecarlo`] engine estimates symbol error rates over an Es/N0
//! sweep and fits the empirical diversity order.

pub mod channel;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod netmap;
pub mod selection;
pub mod transceiver;

pub use channel::{ChannelSet, NoiseSpec, RandomStream, StreamFactory, User};
pub use constellation::{Constellation, Modulation};
pub use error::{Error, Result};
pub use geometry::{
    min_intercluster_distance, singular_fade_states, ChannelRow, DistanceKernel, DistanceReport,
    SingularStateList,
};
pub use montecarlo::{
    fit_diversity, DiversityFit, ErrorMetric, Phase, SerEstimate, SimConfig, Simulator, SnrSweep,
};
pub use netmap::{Cluster, NetworkMap};
pub use selection::{Scheme, SelectionResult, Selector};
pub use transceiver::{JointDetector, JointEstimate, MaObservation};
