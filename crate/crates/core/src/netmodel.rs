//! Network geometry, large-scale power bookkeeping and the time-varying
//! small-scale fading process.
//!
//! Transmit power and pathloss are folded into the channel magnitudes, so a
//! beamformer only has to respect `‖w‖² <= 1`. Small-scale fading evolves as
//! a first-order Gauss–Markov process whose one-slot correlation comes from
//! the Jakes autocorrelation `J₀(2π f_D T_s)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cxla::ComplexVector;
use crate::error::{contract, Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Upper bound on the DQN state length `N_C (N_C + 2^{N_C})`.
pub const MAX_STATE_LEN: usize = 1 << 16;
pub const MAX_CELLS: usize = 8;
pub const MAX_TX: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_cells: usize,
    pub n_tx: usize,
    pub cell_radius_m: f64,
    pub tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub slot_s: f64,
    pub user_speed_kmh: f64,
    pub pathloss_a_db: f64,
    pub pathloss_b: f64,
    pub min_bs_user_dist_m: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_cells: 4,
            n_tx: 3,
            cell_radius_m: 70.0,
            tx_power_dbm: 30.0,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 10e6,
            carrier_hz: 2e9,
            slot_s: 1e-3,
            user_speed_kmh: 5.0,
            pathloss_a_db: 34.53,
            pathloss_b: 38.0,
            min_bs_user_dist_m: 3.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(1..=MAX_CELLS).contains(&self.n_cells) {
            problems.push(format!("n_cells = {} outside 1..={MAX_CELLS}", self.n_cells));
        }
        if !(1..=MAX_TX).contains(&self.n_tx) {
            problems.push(format!("n_tx = {} outside 1..={MAX_TX}", self.n_tx));
        }
        for (name, v) in [
            ("cell_radius_m", self.cell_radius_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("carrier_hz", self.carrier_hz),
            ("slot_s", self.slot_s),
            ("pathloss_b", self.pathloss_b),
            ("min_bs_user_dist_m", self.min_bs_user_dist_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("{name} = {v} must be positive and finite"));
            }
        }
        if !(self.user_speed_kmh >= 0.0 && self.user_speed_kmh.is_finite()) {
            problems.push(format!("user_speed_kmh = {} must be nonnegative", self.user_speed_kmh));
        }
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("pathloss_a_db", self.pathloss_a_db),
        ] {
            if !v.is_finite() {
                problems.push(format!("{name} = {v} must be finite"));
            }
        }
        if self.min_bs_user_dist_m >= self.cell_radius_m {
            problems.push("min_bs_user_dist_m must be smaller than cell_radius_m".to_string());
        }
        if problems.is_empty() && self.state_len() > MAX_STATE_LEN {
            problems.push(format!("state length {} exceeds {MAX_STATE_LEN}", self.state_len()));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Size of the per-agent action space, `2^{N_C}`.
    pub fn n_actions(&self) -> usize {
        1 << self.n_cells
    }

    /// Length of the DQN state vector, `N_C (N_C + 2^{N_C})`.
    pub fn state_len(&self) -> usize {
        self.n_cells * (self.n_cells + self.n_actions())
    }

    /// `a + b log10(d)` in dB.
    pub fn pathloss_db(&self, d_m: f64) -> Result<f64> {
        if !(d_m > 0.0) {
            return Err(contract(format!("pathloss distance must be positive, got {d_m}")));
        }
        Ok(self.pathloss_a_db + self.pathloss_b * d_m.log10())
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_w(self.tx_power_dbm)
    }

    /// Thermal noise over the configured bandwidth, in watts.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_w(self.noise_power_dbm())
    }

    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    pub fn doppler_hz(&self) -> f64 {
        self.user_speed_kmh / 3.6 * self.carrier_hz / SPEED_OF_LIGHT
    }

    /// One-slot fading correlation `ρ = J₀(2π f_D T_s)`, clamped to `[0, 1]`.
    pub fn doppler_correlation(&self) -> f64 {
        bessel_j0(2.0 * PI * self.doppler_hz() * self.slot_s).clamp(0.0, 1.0)
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Bessel function of the first kind, order zero, by its power series.
/// Accurate to double precision for `|x| <= 3`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=40u32 {
        term *= -q / f64::from(k * k);
        sum += term;
        if k >= 12 && term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
}

impl Geometry {
    pub fn n_cells(&self) -> usize {
        self.bs_positions.len()
    }

    /// Distance from BS `i` to user `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.bs_positions[i], self.user_positions[j])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "cell", "x_m", "y_m"])?;
        for (kind, pts) in [("bs", &self.bs_positions), ("user", &self.user_positions)] {
            for (c, p) in pts.iter().enumerate() {
                out.write_record([kind.to_string(), c.to_string(), p[0].to_string(), p[1].to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Places BSs on a regular polygon of circumradius `2R` (one BS at the
/// origin when `N_C = 1`) and drops each user uniformly in its own cell.
pub fn generate_geometry(cfg: &NetworkConfig, seed: u64) -> Geometry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n_cells;
    let bs_positions: Vec<Point> = if n == 1 {
        vec![[0.0, 0.0]]
    } else {
        let rad = 2.0 * cfg.cell_radius_m;
        (0..n)
            .map(|k| {
                let ang = 2.0 * PI * k as f64 / n as f64;
                [rad * ang.cos(), rad * ang.sin()]
            })
            .collect()
    };
    let user_positions = bs_positions
        .iter()
        .map(|&bs| loop {
            // uniform in the disk: radius ~ R sqrt(U)
            let r = cfg.cell_radius_m * rng.random::<f64>().sqrt();
            let ang = 2.0 * PI * rng.random::<f64>();
            let p = [bs[0] + r * ang.cos(), bs[1] + r * ang.sin()];
            if dist(p, bs) <= cfg.cell_radius_m
                && bs_positions.iter().all(|&b| dist(p, b) >= cfg.min_bs_user_dist_m)
            {
                break p;
            }
        })
        .collect();
    Geometry { bs_positions, user_positions }
}

/// Effective channels `h_{ij,t}` for every BS–user pair at one slot.
///
/// Entry `[i][j]` is the channel from BS `i` to user `j`; its large-scale
/// amplitude `s_{ij}` is kept alongside for the fading recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    n_cells: usize,
    n_tx: usize,
    pub t: usize,
    h: Vec<Complex64>,
    scale: Vec<f64>,
}

impl ChannelTensor {
    /// Builds a tensor from explicit channel vectors (`h[i][j]`). Amplitudes
    /// default to 1.
    pub fn from_vectors(h: Vec<Vec<ComplexVector>>) -> Result<Self> {
        let n_cells = h.len();
        if n_cells == 0 || h.iter().any(|row| row.len() != n_cells) {
            return Err(contract("channel tensor must be N_C x N_C"));
        }
        let n_tx = h[0][0].len();
        if h.iter().flatten().any(|v| v.len() != n_tx) {
            return Err(contract("all channel vectors must have length N_T"));
        }
        Ok(ChannelTensor {
            n_cells,
            n_tx,
            t: 0,
            h: h.into_iter().flatten().flat_map(|v| v.into_vec()).collect(),
            scale: vec![1.0; n_cells * n_cells],
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.n_cells + j) * self.n_tx
    }

    /// Channel from BS `i` to user `j`.
    pub fn h(&self, i: usize, j: usize) -> &[Complex64] {
        let o = self.offset(i, j);
        &self.h[o..o + self.n_tx]
    }

    pub fn h_mut(&mut self, i: usize, j: usize) -> &mut [Complex64] {
        let o = self.offset(i, j);
        &mut self.h[o..o + self.n_tx]
    }

    /// Large-scale amplitude `s_{ij}`.
    pub fn scale(&self, i: usize, j: usize) -> f64 {
        self.scale[i * self.n_cells + j]
    }

    /// Outgoing channels of BS `i`: everything that BS knows.
    pub fn row(&self, i: usize) -> LocalCsi<'_> {
        let o = self.offset(i, 0);
        LocalCsi { data: &self.h[o..o + self.n_cells * self.n_tx], n_cells: self.n_cells, n_tx: self.n_tx }
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Appends rows `(i, j, t, antenna, re, im)` to an open CSV writer.
    pub fn write_csv_rows<W: Write>(&self, out: &mut csv::Writer<W>) -> Result<()> {
        for i in 0..self.n_cells {
            for j in 0..self.n_cells {
                for (k, z) in self.h(i, j).iter().enumerate() {
                    out.write_record([
                        i.to_string(),
                        j.to_string(),
                        self.t.to_string(),
                        k.to_string(),
                        z.re.to_string(),
                        z.im.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    }
}

/// Writes a channel trajectory as CSV with header `i,j,t,antenna,re,im`.
pub fn write_channels_csv<W: Write>(w: W, tensors: &[ChannelTensor]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "j", "t", "antenna", "re", "im"])?;
    for t in tensors {
        t.write_csv_rows(&mut out)?;
    }
    out.flush()?;
    Ok(())
}

/// Read-only view of one BS's outgoing channels `h_{i·,t}`.
#[derive(Debug, Clone, Copy)]
pub struct LocalCsi<'a> {
    data: &'a [Complex64],
    n_cells: usize,
    n_tx: usize,
}

impl<'a> LocalCsi<'a> {
    pub fn new(data: &'a [Complex64], n_cells: usize, n_tx: usize) -> Result<Self> {
        if data.len() != n_cells * n_tx || n_tx == 0 {
            return Err(contract("local CSI must hold N_C vectors of length N_T"));
        }
        Ok(LocalCsi { data, n_cells, n_tx })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// Channel to user `j`.
    pub fn to_user(&self, j: usize) -> &'a [Complex64] {
        &self.data[j * self.n_tx..(j + 1) * self.n_tx]
    }
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `h_{ij,0} = s_{ij} g` with `g ~ CN(0, I)`.
pub fn init_channels(geom: &Geometry, cfg: &NetworkConfig, seed: u64) -> Result<ChannelTensor> {
    let n = geom.n_cells();
    if n != cfg.n_cells {
        return Err(contract(format!("geometry has {n} cells, config has {}", cfg.n_cells)));
    }
    let p = cfg.tx_power_w();
    let mut scale = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let pl = cfg.pathloss_db(geom.distance(i, j))?;
            scale.push((p * 10f64.powf(-pl / 10.0)).sqrt());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Vec::with_capacity(n * n * cfg.n_tx);
    for &s in &scale {
        for _ in 0..cfg.n_tx {
            h.push(complex_gaussian(&mut rng) * s);
        }
    }
    Ok(ChannelTensor { n_cells: n, n_tx: cfg.n_tx, t: 0, h, scale })
}

/// One Gauss–Markov step: `h_t = ρ h_{t-1} + sqrt(1-ρ²) s g_new`.
///
/// `ρ = 1` leaves the tensor bit-for-bit unchanged and draws nothing.
pub fn advance_channels<R: Rng>(ch: &mut ChannelTensor, rho: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(contract(format!("fading correlation {rho} outside [0, 1]")));
    }
    ch.t += 1;
    if rho == 1.0 {
        return Ok(());
    }
    let innov = (1.0 - rho * rho).sqrt();
    let n_tx = ch.n_tx;
    for (pair, s) in ch.scale.iter().enumerate() {
        for z in &mut ch.h[pair * n_tx..(pair + 1) * n_tx] {
            *z = *z * rho + complex_gaussian(rng) * (innov * s);
        }
    }
    Ok(())
}

/// A channel tensor plus the random stream that drives its evolution.
#[derive(Debug, Clone)]
pub struct ChannelProcess {
    pub tensor: ChannelTensor,
    pub rho: f64,
    rng: ChaCha8Rng,
}

impl ChannelProcess {
    pub fn new(tensor: ChannelTensor, rho: f64, seed: u64) -> Self {
        ChannelProcess { tensor, rho, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn advance(&mut self) -> Result<()> {
        advance_channels(&mut self.tensor, self.rho, &mut self.rng)
    }
}

/// Pooled lag-1 autocorrelation and variance ratio of a fading trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Ar1Statistics {
    /// Empirical one-step autocorrelation, pooled over all real scalars.
    pub lag1: f64,
    /// Empirical variance over stationary variance, pooled likewise.
    pub variance_ratio: f64,
}

/// Runs `steps` slots of `proc` and measures every real scalar (`re` and
/// `im` of every antenna of every pair), each normalized by its stationary
/// standard deviation `s_{ij}/sqrt(2)`.
pub fn ar1_statistics(proc: &mut ChannelProcess, steps: usize) -> Ar1Statistics {
    let n = proc.tensor.n_cells;
    let n_tx = proc.tensor.n_tx;
    let scalars = n * n * n_tx * 2;
    let norm: Vec<f64> = (0..scalars)
        .map(|k| {
            let pair = k / (2 * n_tx);
            std::f64::consts::SQRT_2 / proc.tensor.scale[pair]
        })
        .collect();
    let read = |t: &ChannelTensor, out: &mut [f64]| {
        for (k, z) in t.h.iter().enumerate() {
            out[2 * k] = z.re * norm[2 * k];
            out[2 * k + 1] = z.im * norm[2 * k + 1];
        }
    };
    let mut prev = vec![0.0; scalars];
    let mut cur = vec![0.0; scalars];
    read(&proc.tensor, &mut prev);
    let (mut sum_xx, mut sum_xy, mut sum_x, mut count) = (0.0, 0.0, 0.0, 0usize);
    for _ in 0..steps {
        proc.advance().expect("rho validated at construction");
        read(&proc.tensor, &mut cur);
        for (a, b) in prev.iter().zip(&cur) {
            sum_xx += a * a;
            sum_xy += a * b;
            sum_x += a;
        }
        count += scalars;
        std::mem::swap(&mut prev, &mut cur);
    }
    let mean = sum_x / count as f64;
    let var = sum_xx / count as f64 - mean * mean;
    let cov = sum_xy / count as f64 - mean * mean;
    Ar1Statistics { lag1: cov / var, variance_ratio: var }
}
