//! Joint optimization of a MIMO precoder/combiner pair and the phase shifts
//! of a reconfigurable intelligent surface (RIS), by weighted MMSE
//! alternating minimization.
//!
//! ```
//! use ris_core::{draw_channels, run_joint_optimization, AlgorithmOptions, ArrayGeometry,
//!     ChannelDrawConfig, SystemConfig, Variant};
//!
//! let cfg = ChannelDrawConfig::new(4, 4, ArrayGeometry::upa(4, 4), 7);
//! let ch = draw_channels(&cfg).unwrap();
//! let sys = SystemConfig::from_snr_db(2, 10.0);
//! let res = run_joint_optimization(&ch, &sys, &AlgorithmOptions::new(Variant::Scf)).unwrap();
//! assert!(res.rate > 0.0);
//! ```

pub mod channel;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod random;
pub mod reflector;
pub mod scf;
pub mod sdr;
pub mod wmmse;

pub use channel::{draw_channels, AngleRange, ArrayGeometry, ArrayKind, ChannelDrawConfig, ChannelSet};
pub use error::{Error, Result};
pub use optimizer::{
    compute_metrics, kkt_residual, quantize_phases, run_joint_optimization, AlgorithmOptions,
    KktResidual, Metrics, OptimizationResult, SubUpdateTrace, ThetaInit, Variant,
};
pub use reflector::{build_reflector_quadratic, lift_to_real, ReflectorQuadratic};
pub use scf::{scf_solve, ScfOptions, ScfState};
pub use sdr::{sdr_solve, SdrOptions, SdrOutcome};
pub use wmmse::{SystemConfig, TransceiverState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel-model.md")]
    mod channel_model {}
    #[doc = include_str!("../../../book/src/transceiver.md")]
    mod transceiver {}
    #[doc = include_str!("../../../book/src/reflector.md")]
    mod reflector {}
    #[doc = include_str!("../../../book/src/sdr.md")]
    mod sdr {}
    #[doc = include_str!("../../../book/src/outer-loop.md")]
    mod outer_loop {}
}
