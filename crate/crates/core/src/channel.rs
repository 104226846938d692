//! Deployment geometry and seeded Rician channel generation.
//!
//! Every link is one line-of-sight path plus `L` scattered paths whose
//! angles are jittered around the LoS angles. Arrays are uniform planar
//! arrays in the xz-plane; users have a single antenna.

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::sim::ScenarioConfig;
use crate::{CMatrix, CVector, Complex64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Geometry(format!("non-finite position ({x}, {y}, {z})")));
        }
        if z < 0.0 {
            return Err(Error::Geometry(format!("position below ground (z = {z})")));
        }
        Ok(Self { x, y, z })
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Uniform planar array; element spacing is in wavelengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayGeometry {
    pub vertical_count: usize,
    pub horizontal_count: usize,
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(vertical_count: usize, horizontal_count: usize) -> Result<Self> {
        let g = Self {
            vertical_count,
            horizontal_count,
            element_spacing: 0.5,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        self.element_spacing = spacing;
        self.validate()?;
        Ok(self)
    }

    pub fn total(&self) -> usize {
        self.vertical_count * self.horizontal_count
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertical_count == 0 || self.horizontal_count == 0 {
            return Err(Error::Config(format!(
                "array must have at least one element, got {}x{}",
                self.vertical_count, self.horizontal_count
            )));
        }
        if !(self.element_spacing > 0.0) || !self.element_spacing.is_finite() {
            return Err(Error::Config(format!(
                "element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        Ok(())
    }
}

/// Large-scale and small-scale parameters of one link family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicianLinkParams {
    pub path_loss_exponent: f64,
    pub rician_factor_db: f64,
    pub nlos_path_count: usize,
    /// Half-width of the uniform jitter applied to LoS angles for NLoS paths.
    pub angular_spread_deg: f64,
}

impl RicianLinkParams {
    /// BS–user direct link.
    pub const DIRECT: Self = Self {
        path_loss_exponent: 4.2,
        rician_factor_db: 3.0,
        nlos_path_count: 8,
        angular_spread_deg: 10.0,
    };
    /// RIS–user reflection link.
    pub const RIS_USER: Self = Self {
        path_loss_exponent: 2.4,
        rician_factor_db: 5.0,
        nlos_path_count: 4,
        angular_spread_deg: 10.0,
    };
    /// BS–RIS link.
    pub const BS_RIS: Self = Self {
        path_loss_exponent: 2.5,
        rician_factor_db: 5.0,
        nlos_path_count: 8,
        angular_spread_deg: 10.0,
    };

    pub fn rician_factor(&self) -> f64 {
        10f64.powf(self.rician_factor_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::Config(format!(
                "path loss exponent must be positive, got {}",
                self.path_loss_exponent
            )));
        }
        if !self.rician_factor_db.is_finite() {
            return Err(Error::Config("Rician factor must be finite".into()));
        }
        if !(self.angular_spread_deg >= 0.0) {
            return Err(Error::Config("angular spread must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Reference-distance path loss `C0 · (d/d0)^(-exponent)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLossModel {
    pub c0_db: f64,
    pub d0_m: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            c0_db: -30.0,
            d0_m: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLoss {
    /// Linear power gain.
    pub gain: f64,
    /// The distance was below the reference distance and got clamped.
    pub clamped: bool,
}

/// Azimuth `atan2(Δy, Δx)` and elevation `atan2(Δz, horizontal distance)`
/// of `to` as seen from `from`. A purely vertical link has azimuth 0.
pub fn los_angles(from: &Position3D, to: &Position3D) -> Result<(f64, f64)> {
    let (dx, dy, dz) = (to.x - from.x, to.y - from.y, to.z - from.z);
    if dx == 0.0 && dy == 0.0 && dz == 0.0 {
        return Err(Error::Geometry("LoS angles of coincident points".into()));
    }
    let horizontal = dx.hypot(dy);
    let azimuth = if horizontal == 0.0 { 0.0 } else { dy.atan2(dx) };
    Ok((azimuth, dz.atan2(horizontal)))
}

/// Planar-array response. Entry `(p, q)` (vertical index `p`, horizontal
/// index `q`, row-major) is `exp(j·2π·s·(p·sin(el) + q·cos(el)·sin(az)))`.
pub fn upa_steering(azimuth: f64, elevation: f64, geom: &ArrayGeometry) -> CVector {
    let k = 2.0 * PI * geom.element_spacing;
    let (v_step, h_step) = (elevation.sin(), elevation.cos() * azimuth.sin());
    CVector::from_iterator(
        geom.total(),
        (0..geom.vertical_count).flat_map(|p| {
            (0..geom.horizontal_count)
                .map(move |q| Complex64::from_polar(1.0, k * (p as f64 * v_step + q as f64 * h_step)))
        }),
    )
}

/// Path-loss power gain. Distances below `d0_m` are clamped to `d0_m`.
pub fn path_loss_linear(distance_m: f64, exponent: f64, c0_db: f64, d0_m: f64) -> PathLoss {
    let clamped = distance_m < d0_m;
    if clamped {
        warn!("link distance {distance_m} m is below the reference distance {d0_m} m; clamping");
    }
    let d = distance_m.max(d0_m);
    PathLoss {
        gain: 10f64.powf(c0_db / 10.0) * (d / d0_m).powf(-exponent),
        clamped,
    }
}

/// One end of a link: the LoS angles toward the other end and the array
/// (`None` for a single-antenna user, whose response is the scalar 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkEnd {
    pub azimuth: f64,
    pub elevation: f64,
    pub array: Option<ArrayGeometry>,
}

impl LinkEnd {
    pub fn array(azimuth: f64, elevation: f64, geom: ArrayGeometry) -> Self {
        Self {
            azimuth,
            elevation,
            array: Some(geom),
        }
    }

    pub fn single_antenna() -> Self {
        Self {
            azimuth: 0.0,
            elevation: 0.0,
            array: None,
        }
    }

    pub fn len(&self) -> usize {
        self.array.map_or(1, |g| g.total())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn response(&self, azimuth: f64, elevation: f64) -> CVector {
        match &self.array {
            Some(g) => upa_steering(azimuth, elevation, g),
            None => CVector::from_element(1, Complex64::new(1.0, 0.0)),
        }
    }
}

/// Draws one `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Rician channel matrix (`rx.len() × tx.len()`):
///
/// `H = √pl · ( √(κ/(κ+1)) a_rx a_txᴴ + √(1/(κ+1)) · (1/√L) Σ_ℓ g_ℓ a_rx,ℓ a_tx,ℓᴴ )`
///
/// with `g_ℓ ~ CN(0,1)` and NLoS angles drawn uniformly within
/// `±angular_spread_deg` of the LoS angles at each end. With `L = 0` only the
/// LoS term remains, at full power.
pub fn gen_rician_matrix<R: Rng + ?Sized>(
    tx: &LinkEnd,
    rx: &LinkEnd,
    params: &RicianLinkParams,
    pl_gain: f64,
    rng: &mut R,
) -> CMatrix {
    let los = rx.response(rx.azimuth, rx.elevation) * tx.response(tx.azimuth, tx.elevation).adjoint();
    let paths = params.nlos_path_count;
    if paths == 0 {
        return los.scale(pl_gain.sqrt());
    }
    let kappa = params.rician_factor();
    let spread = params.angular_spread_deg.to_radians();
    let jitter = |rng: &mut R| {
        if spread > 0.0 {
            rng.random_range(-spread..=spread)
        } else {
            0.0
        }
    };
    let mut nlos = CMatrix::zeros(rx.len(), tx.len());
    for _ in 0..paths {
        let gain = complex_gaussian(rng);
        let (tx_az, tx_el) = (tx.azimuth + jitter(rng), tx.elevation + jitter(rng));
        let (rx_az, rx_el) = (rx.azimuth + jitter(rng), rx.elevation + jitter(rng));
        let a_rx = rx.response(rx_az, rx_el) * gain;
        let a_tx = tx.response(tx_az, tx_el);
        nlos += a_rx * a_tx.adjoint();
    }
    let los_amp = (kappa / (kappa + 1.0)).sqrt();
    let nlos_amp = (1.0 / (kappa + 1.0)).sqrt() / (paths as f64).sqrt();
    (los.scale(los_amp) + nlos.scale(nlos_amp)).scale(pl_gain.sqrt())
}

/// One realization of every link in the two-cell system.
///
/// Vectors are stored as columns; the row channel a user sees is the
/// conjugate transpose (`h_r1[k]ᴴ` is the RIS-to-user row, and so on).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// BS1 → RIS, `M × N1`.
    pub g1: CMatrix,
    /// BS2 → RIS, `M × N2`.
    pub g2: CMatrix,
    /// RIS → cell-1 users, each of length `M`.
    pub h_r1: Vec<CVector>,
    /// RIS → cell-2 users, each of length `M`.
    pub h_r2: Vec<CVector>,
    /// BS2 → cell-2 users direct, each of length `N2`.
    pub h_d2: Vec<CVector>,
    pub noise_var_1: f64,
    pub noise_var_2: f64,
    /// Phase offset the RIS applies at cell 2's carrier, radians.
    pub theta: f64,
    pub cell1_users: Vec<Position3D>,
    pub cell2_users: Vec<Position3D>,
}

impl ChannelSet {
    pub fn ris_elements(&self) -> usize {
        self.g1.nrows()
    }

    /// Little-endian dump of every number in a fixed field order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let reals = self
            .g1
            .iter()
            .chain(self.g2.iter())
            .chain(self.h_r1.iter().chain(&self.h_r2).chain(&self.h_d2).flat_map(|v| v.iter()))
            .flat_map(|z| [z.re, z.im])
            .chain([self.noise_var_1, self.noise_var_2, self.theta])
            .chain(
                self.cell1_users
                    .iter()
                    .chain(&self.cell2_users)
                    .flat_map(|p| [p.x, p.y, p.z]),
            );
        for v in reals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn all_finite(&self) -> bool {
        self.to_bytes()
            .chunks_exact(8)
            .all(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")).is_finite())
    }
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// SplitMix64 finalizer used to derive independent stream seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, cx: f64, cy: f64, radius: f64, z: f64) -> Position3D {
    let r = radius * rng.random::<f64>().sqrt();
    let a = 2.0 * PI * rng.random::<f64>();
    Position3D {
        x: cx + r * a.cos(),
        y: cy + r * a.sin(),
        z,
    }
}

// Each link family draws from its own stream so that, for example, the
// direct links do not move when an RIS-side parameter changes.
const STREAM_USERS_1: u64 = 1;
const STREAM_USERS_2: u64 = 2;
const STREAM_G1: u64 = 3;
const STREAM_G2: u64 = 4;
const STREAM_HR1: u64 = 5;
const STREAM_HR2: u64 = 6;
const STREAM_HD2: u64 = 7;

/// Draws user positions and every link of one Monte Carlo realization.
pub fn gen_channel_set<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Result<ChannelSet> {
    scenario.validate()?;
    let base: u64 = rng.random();
    let stream = |id: u64| ChaCha8Rng::seed_from_u64(mix_seed(base, id));
    let pl = &scenario.path_loss;

    let users = |id: u64, area: &crate::sim::ServingArea| -> Vec<Position3D> {
        let mut r = stream(id);
        (0..scenario.users_per_cell)
            .map(|_| uniform_in_disc(&mut r, area.center_x, area.center_y, area.radius, scenario.user_height))
            .collect()
    };
    let cell1_users = users(STREAM_USERS_1, &scenario.cell1_area);
    let cell2_users = users(STREAM_USERS_2, &scenario.cell2_area);

    let array_link = |from: &Position3D, from_geom: ArrayGeometry, to: &Position3D, to_geom: ArrayGeometry,
                      params: &RicianLinkParams, r: &mut ChaCha8Rng|
     -> Result<CMatrix> {
        let (taz, tel) = los_angles(from, to)?;
        let (raz, rel) = los_angles(to, from)?;
        let loss = path_loss_linear(from.distance(to), params.path_loss_exponent, pl.c0_db, pl.d0_m);
        Ok(gen_rician_matrix(
            &LinkEnd::array(taz, tel, from_geom),
            &LinkEnd::array(raz, rel, to_geom),
            params,
            loss.gain,
            r,
        ))
    };
    // Downlink to a single-antenna user; returns h with the row channel hᴴ.
    let user_link = |from: &Position3D, from_geom: ArrayGeometry, user: &Position3D,
                     params: &RicianLinkParams, r: &mut ChaCha8Rng|
     -> Result<CVector> {
        let (taz, tel) = los_angles(from, user)?;
        let loss = path_loss_linear(from.distance(user), params.path_loss_exponent, pl.c0_db, pl.d0_m);
        let row = gen_rician_matrix(
            &LinkEnd::array(taz, tel, from_geom),
            &LinkEnd::single_antenna(),
            params,
            loss.gain,
            r,
        );
        Ok(row.row(0).adjoint())
    };

    let g1 = array_link(
        &scenario.bs1_position,
        scenario.bs1_array,
        &scenario.ris_position,
        scenario.ris_array,
        &scenario.bs_ris_link,
        &mut stream(STREAM_G1),
    )?;
    let g2 = array_link(
        &scenario.bs2_position,
        scenario.bs2_array,
        &scenario.ris_position,
        scenario.ris_array,
        &scenario.bs_ris_link,
        &mut stream(STREAM_G2),
    )?;
    let mut r = stream(STREAM_HR1);
    let h_r1 = cell1_users
        .iter()
        .map(|u| user_link(&scenario.ris_position, scenario.ris_array, u, &scenario.ris_user_link, &mut r))
        .collect::<Result<Vec<_>>>()?;
    let mut r = stream(STREAM_HR2);
    let h_r2 = cell2_users
        .iter()
        .map(|u| user_link(&scenario.ris_position, scenario.ris_array, u, &scenario.ris_user_link, &mut r))
        .collect::<Result<Vec<_>>>()?;
    let mut r = stream(STREAM_HD2);
    let h_d2 = cell2_users
        .iter()
        .map(|u| user_link(&scenario.bs2_position, scenario.bs2_array, u, &scenario.direct_link, &mut r))
        .collect::<Result<Vec<_>>>()?;

    let noise = dbm_to_watts(scenario.noise_dbm);
    let set = ChannelSet {
        g1,
        g2,
        h_r1,
        h_r2,
        h_d2,
        noise_var_1: noise,
        noise_var_2: noise,
        theta: scenario.theta_rad,
        cell1_users,
        cell2_users,
    };
    if !set.all_finite() {
        return Err(Error::Numerical("non-finite channel coefficient".into()));
    }
    Ok(set)
}
