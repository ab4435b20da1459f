//! Simulation core for RSSI-driven RIS codebook search.
//!
//! * [`gain`]: cascaded channel model and exhaustive optimum
//! * [`channel`], [`frames`]: seeded channel draws and sample-level RSSI
//! * [`oracle`]: the black-box feedback interface with query accounting
//! * [`search`]: the influential-element search, its benchmarks and cost model

pub mod channel;
pub mod codebook;
pub mod element;
pub mod error;
pub mod frames;
pub mod gain;
pub mod oracle;
pub mod rng;
pub mod search;

pub use num_complex::Complex64;
pub use channel::{generate_channel, ChannelKind, ChannelSpec};
pub use codebook::{Codebook, Grid};
pub use element::{element_coefficient, ElementState, OFF, STATES};
pub use error::{Error, Result};
pub use frames::{simulate_frames, FrameConfig};
pub use gain::{
    cascade_gain, exhaustive_optimum, received_power_dbm, ChannelRealization, GainValue,
};
pub use oracle::{OracleConfig, OracleMode, QueryLog, RssiOracle, SimulatedOracle};
pub use search::{AlgorithmId, SearchOptions, SearchReport};

/// `Codebook::flip_all` as a free function.
pub fn flip_all(cb: &Codebook) -> Codebook {
    cb.flip_all()
}
