//! Clustered mmWave channels (Saleh-Valenzuela) for the BS, RIS and UE arrays.
//!
//! Each link is a sum of `n_clusters * n_paths` rank-one terms
//! `α · a_rx(angles) · a_tx(angle)ᴴ` with `α ~ CN(0, 1)`, scaled by
//! `sqrt(n_rx_elems * n_tx_elems / (n_clusters * n_paths))` so that
//! `E‖·‖_F² = n_rx_elems · n_tx_elems`. The BS and UE carry uniform linear
//! arrays, the RIS a uniform planar array.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::random::{complex_normal, seeded_rng, uniform, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Ula,
    Upa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub count_x: usize,
    pub count_y: usize,
    /// Element spacing over wavelength.
    pub spacing_ratio: f64,
}

impl ArrayGeometry {
    pub fn ula(count: usize) -> Self {
        Self {
            kind: ArrayKind::Ula,
            count_x: count,
            count_y: 1,
            spacing_ratio: 0.5,
        }
    }

    pub fn upa(count_x: usize, count_y: usize) -> Self {
        Self {
            kind: ArrayKind::Upa,
            count_x,
            count_y,
            spacing_ratio: 0.5,
        }
    }

    /// Planar array with `n` elements, as square as the divisors of `n` allow
    /// (`count_y` is the largest divisor not exceeding `sqrt(n)`).
    pub fn upa_for(n: usize) -> Self {
        let mut ny = (n as f64).sqrt().floor() as usize;
        while ny > 1 && n % ny != 0 {
            ny -= 1;
        }
        let ny = ny.max(1);
        Self::upa(n / ny, ny)
    }

    pub fn with_spacing(mut self, spacing_ratio: f64) -> Self {
        self.spacing_ratio = spacing_ratio;
        self
    }

    pub fn len(&self) -> usize {
        self.count_x * self.count_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.count_x == 0 || self.count_y == 0 {
            return Err(Error::Config("array dimensions must be positive".into()));
        }
        if self.kind == ArrayKind::Ula && self.count_y != 1 {
            return Err(Error::Config("a ULA has count_y = 1".into()));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(Error::Config("spacing_ratio must be positive".into()));
        }
        Ok(())
    }

    /// Array response for an azimuth/elevation pair. Elevation is ignored for a ULA.
    pub fn response(&self, azimuth: f64, elevation: f64) -> CVec {
        match self.kind {
            ArrayKind::Ula => ula_response(azimuth, self.count_x, self.spacing_ratio),
            ArrayKind::Upa => upa_response(
                azimuth,
                elevation,
                self.count_x,
                self.count_y,
                self.spacing_ratio,
            ),
        }
    }
}

/// Half-open angle interval `[lo, hi)` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    pub lo: f64,
    pub hi: f64,
}

impl AngleRange {
    fn sample(&self, rng: &mut SimRng) -> f64 {
        uniform(rng, self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDrawConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub ris_geometry: ArrayGeometry,
    pub n_clusters: usize,
    pub n_paths: usize,
    /// Element spacing over wavelength of the BS and UE linear arrays.
    pub terminal_spacing_ratio: f64,
    pub azimuth: AngleRange,
    pub elevation: AngleRange,
    pub seed: u64,
}

impl ChannelDrawConfig {
    pub fn new(n_tx: usize, n_rx: usize, ris_geometry: ArrayGeometry, seed: u64) -> Self {
        Self {
            n_tx,
            n_rx,
            ris_geometry,
            n_clusters: 8,
            n_paths: 10,
            terminal_spacing_ratio: 0.5,
            azimuth: AngleRange { lo: 0.0, hi: 2.0 * PI },
            elevation: AngleRange {
                lo: -PI / 2.0,
                hi: PI / 2.0,
            },
            seed,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.ris_geometry.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.ris_geometry.validate()?;
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::Config("n_tx and n_rx must be positive".into()));
        }
        if self.n_clusters == 0 || self.n_paths == 0 {
            return Err(Error::Config("n_clusters and n_paths must be positive".into()));
        }
        if !(self.terminal_spacing_ratio > 0.0) {
            return Err(Error::Config("terminal spacing must be positive".into()));
        }
        Ok(())
    }
}

/// The three links of one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS → RIS, `N × N_t`.
    pub h_bs_ris: CMat,
    /// UE → RIS, `N × N_r`.
    pub g_ue_ris: CMat,
    /// BS → UE, `N_r × N_t`.
    pub h_direct: CMat,
}

impl ChannelSet {
    pub fn new(h_bs_ris: CMat, g_ue_ris: CMat, h_direct: CMat) -> Result<Self> {
        let set = Self {
            h_bs_ris,
            g_ue_ris,
            h_direct,
        };
        set.check()?;
        Ok(set)
    }

    pub fn n_elements(&self) -> usize {
        self.h_bs_ris.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.h_bs_ris.ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.g_ue_ris.ncols()
    }

    /// Same links with the reflected path removed (`G = 0`).
    pub fn without_reflection(&self) -> Self {
        Self {
            h_bs_ris: self.h_bs_ris.clone(),
            g_ue_ris: CMat::zeros(self.g_ue_ris.nrows(), self.g_ue_ris.ncols()),
            h_direct: self.h_direct.clone(),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let (n, nt) = self.h_bs_ris.shape();
        let (ng, nr) = self.g_ue_ris.shape();
        if ng != n || self.h_direct.shape() != (nr, nt) {
            return Err(Error::Dimension(format!(
                "H is {n}x{nt}, G is {ng}x{nr}, H_d is {}x{}",
                self.h_direct.nrows(),
                self.h_direct.ncols()
            )));
        }
        Ok(())
    }

    /// FNV-1a over the bit patterns of every entry; identifies a draw.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for m in [&self.h_bs_ris, &self.g_ue_ris, &self.h_direct] {
            for z in m.iter() {
                for word in [z.re.to_bits(), z.im.to_bits()] {
                    for byte in word.to_le_bytes() {
                        h ^= byte as u64;
                        h = h.wrapping_mul(0x0000_0100_0000_01b3);
                    }
                }
            }
        }
        h
    }
}

/// ULA steering vector: entry `k` is `exp(-j·2π·spacing·k·sin φ) / sqrt(m)`.
pub fn ula_response(phi: f64, m: usize, spacing_ratio: f64) -> CVec {
    let scale = 1.0 / (m as f64).sqrt();
    let step = -2.0 * PI * spacing_ratio * phi.sin();
    CVec::from_iterator(m, (0..m).map(|k| Complex64::from_polar(scale, step * k as f64)))
}

/// UPA steering vector, `a_x(φ_az) ⊗ a_y(φ_el)`.
pub fn upa_response(phi_az: f64, phi_el: f64, nx: usize, ny: usize, spacing_ratio: f64) -> CVec {
    let ax = ula_response(phi_az, nx, spacing_ratio);
    let ay = ula_response(phi_el, ny, spacing_ratio);
    ax.kronecker(&ay)
}

#[derive(Clone, Copy)]
struct LinkArrays<'a> {
    rx: &'a ArrayGeometry,
    tx: &'a ArrayGeometry,
}

fn draw_link(cfg: &ChannelDrawConfig, arrays: LinkArrays<'_>, rng: &mut SimRng) -> CMat {
    let n_rx = arrays.rx.len();
    let n_tx = arrays.tx.len();
    let terms = cfg.n_clusters * cfg.n_paths;
    let scale = ((n_rx * n_tx) as f64 / terms as f64).sqrt();
    let mut out = CMat::zeros(n_rx, n_tx);
    for _ in 0..terms {
        let gain = complex_normal(rng) * scale;
        let rx_az = cfg.azimuth.sample(rng);
        let rx_el = cfg.elevation.sample(rng);
        let tx_az = cfg.azimuth.sample(rng);
        let tx_el = cfg.elevation.sample(rng);
        let a_rx = arrays.rx.response(rx_az, rx_el);
        let a_tx = arrays.tx.response(tx_az, tx_el);
        out.gerc(gain, &a_rx, &a_tx, Complex64::new(1.0, 0.0));
    }
    out
}

/// Draws `(H, G, H_d)` for one seed. Each link consumes its own ChaCha20
/// substream (0 for `H`, 1 for `G`, 2 for `H_d`), so output is a pure
/// function of `cfg`.
pub fn draw_channels(cfg: &ChannelDrawConfig) -> Result<ChannelSet> {
    cfg.validate()?;
    let bs = ArrayGeometry::ula(cfg.n_tx).with_spacing(cfg.terminal_spacing_ratio);
    let ue = ArrayGeometry::ula(cfg.n_rx).with_spacing(cfg.terminal_spacing_ratio);
    let ris = &cfg.ris_geometry;

    let h = draw_link(cfg, LinkArrays { rx: ris, tx: &bs }, &mut seeded_rng(cfg.seed, 0));
    let g = draw_link(cfg, LinkArrays { rx: ris, tx: &ue }, &mut seeded_rng(cfg.seed, 1));
    let hd = draw_link(cfg, LinkArrays { rx: &ue, tx: &bs }, &mut seeded_rng(cfg.seed, 2));
    ChannelSet::new(h, g, hd)
}
