//! Scenario configuration and its flat key-value file format.
//!
//! The file is TOML restricted to top-level keys. Arrays are written as
//! `[vertical, horizontal]`, positions as `[x, y, z]` and serving-area
//! centers as `[x, y]`. Every key is optional and defaults to the reference
//! operating point; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, PathLossModel, Position3D, RicianLinkParams};
use crate::manifold::RcgConfig;
use crate::{Error, Result};

/// Disc in the xy-plane where a cell's users are dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServingArea {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub bs1_array: ArrayGeometry,
    pub bs2_array: ArrayGeometry,
    pub ris_array: ArrayGeometry,
    pub bs1_position: Position3D,
    pub bs2_position: Position3D,
    pub ris_position: Position3D,
    pub cell1_area: ServingArea,
    pub cell2_area: ServingArea,
    pub user_height: f64,
    /// Users per cell (`K₁ = K₂ = K`).
    pub users_per_cell: usize,
    pub direct_link: RicianLinkParams,
    pub ris_user_link: RicianLinkParams,
    pub bs_ris_link: RicianLinkParams,
    pub path_loss: PathLossModel,
    /// Transmit power budget of each BS, dBm.
    pub p_t_dbm: f64,
    pub noise_dbm: f64,
    pub theta_rad: f64,
    /// Balancing weight in dB; `-inf` means λ = 0.
    pub lambda_db: f64,
    pub num_drops: usize,
    pub seed: u64,
    pub rcg: RcgConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioFile::default()
            .into_config()
            .expect("built-in defaults are valid")
    }
}

impl ScenarioConfig {
    pub fn ris_elements(&self) -> usize {
        self.ris_array.total()
    }

    /// λ in linear scale.
    pub fn lambda(&self) -> f64 {
        10f64.powf(self.lambda_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        for g in [&self.bs1_array, &self.bs2_array, &self.ris_array] {
            g.validate()?;
        }
        for l in [&self.direct_link, &self.ris_user_link, &self.bs_ris_link] {
            l.validate()?;
        }
        for (name, a) in [("cell1", &self.cell1_area), ("cell2", &self.cell2_area)] {
            if !(a.radius >= 0.0) || !a.center_x.is_finite() || !a.center_y.is_finite() {
                return Err(Error::Config(format!("{name} serving area is invalid")));
            }
        }
        for (name, p) in [
            ("bs1_position", &self.bs1_position),
            ("bs2_position", &self.bs2_position),
            ("ris_position", &self.ris_position),
        ] {
            Position3D::new(p.x, p.y, p.z).map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        if !(self.user_height >= 0.0) {
            return Err(Error::Config("user_height must be nonnegative".into()));
        }
        if self.users_per_cell == 0 {
            return Err(Error::Config("users_per_cell must be at least 1".into()));
        }
        if self.num_drops == 0 {
            return Err(Error::Config("num_drops must be at least 1".into()));
        }
        if !(self.path_loss.d0_m > 0.0) || !self.path_loss.c0_db.is_finite() {
            return Err(Error::Config("path loss reference must be positive and finite".into()));
        }
        if !self.p_t_dbm.is_finite() || !self.noise_dbm.is_finite() || !self.theta_rad.is_finite() {
            return Err(Error::Config("p_t_dbm, noise_dbm and theta_rad must be finite".into()));
        }
        if self.lambda_db.is_nan() || self.lambda_db == f64::INFINITY {
            return Err(Error::Config(format!("lambda_db = {} is not usable", self.lambda_db)));
        }
        self.rcg.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.into_config()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ScenarioFile::from_config(self)).expect("flat config serializes")
    }
}

/// On-disk form of [`ScenarioConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub bs1_array: [usize; 2],
    pub bs2_array: [usize; 2],
    pub ris_array: [usize; 2],
    pub element_spacing: f64,
    pub bs1_position: [f64; 3],
    pub bs2_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub cell1_center: [f64; 2],
    pub cell1_radius: f64,
    pub cell2_center: [f64; 2],
    pub cell2_radius: f64,
    pub user_height: f64,
    pub users_per_cell: usize,
    pub direct_path_loss_exponent: f64,
    pub direct_rician_factor_db: f64,
    pub direct_nlos_paths: usize,
    pub direct_angular_spread_deg: f64,
    pub ris_user_path_loss_exponent: f64,
    pub ris_user_rician_factor_db: f64,
    pub ris_user_nlos_paths: usize,
    pub ris_user_angular_spread_deg: f64,
    pub bs_ris_path_loss_exponent: f64,
    pub bs_ris_rician_factor_db: f64,
    pub bs_ris_nlos_paths: usize,
    pub bs_ris_angular_spread_deg: f64,
    pub path_loss_c0_db: f64,
    pub path_loss_d0_m: f64,
    pub p_t_dbm: f64,
    pub noise_dbm: f64,
    pub theta_rad: f64,
    pub lambda_db: f64,
    pub num_drops: usize,
    pub seed: u64,
    pub rcg_max_iters: usize,
    /// Gradient tolerance per RIS element (total tolerance is this times M).
    pub rcg_grad_tol_per_element: f64,
    pub rcg_obj_tol: f64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        let rcg = RcgConfig::default();
        Self {
            bs1_array: [4, 4],
            bs2_array: [4, 4],
            ris_array: [8, 16],
            element_spacing: 0.5,
            bs1_position: [0.0, 0.0, 15.0],
            bs2_position: [80.0, 0.0, 15.0],
            ris_position: [40.0, 25.0, 10.0],
            cell1_center: [45.0, 15.0],
            cell1_radius: 10.0,
            cell2_center: [75.0, 10.0],
            cell2_radius: 10.0,
            user_height: 1.0,
            users_per_cell: 4,
            direct_path_loss_exponent: RicianLinkParams::DIRECT.path_loss_exponent,
            direct_rician_factor_db: RicianLinkParams::DIRECT.rician_factor_db,
            direct_nlos_paths: RicianLinkParams::DIRECT.nlos_path_count,
            direct_angular_spread_deg: RicianLinkParams::DIRECT.angular_spread_deg,
            ris_user_path_loss_exponent: RicianLinkParams::RIS_USER.path_loss_exponent,
            ris_user_rician_factor_db: RicianLinkParams::RIS_USER.rician_factor_db,
            ris_user_nlos_paths: RicianLinkParams::RIS_USER.nlos_path_count,
            ris_user_angular_spread_deg: RicianLinkParams::RIS_USER.angular_spread_deg,
            bs_ris_path_loss_exponent: RicianLinkParams::BS_RIS.path_loss_exponent,
            bs_ris_rician_factor_db: RicianLinkParams::BS_RIS.rician_factor_db,
            bs_ris_nlos_paths: RicianLinkParams::BS_RIS.nlos_path_count,
            bs_ris_angular_spread_deg: RicianLinkParams::BS_RIS.angular_spread_deg,
            path_loss_c0_db: PathLossModel::default().c0_db,
            path_loss_d0_m: PathLossModel::default().d0_m,
            p_t_dbm: 30.0,
            noise_dbm: -104.0,
            theta_rad: std::f64::consts::FRAC_PI_6,
            lambda_db: 20.0,
            num_drops: 100,
            seed: 1,
            rcg_max_iters: rcg.max_iters,
            rcg_grad_tol_per_element: rcg.grad_tol,
            rcg_obj_tol: rcg.obj_tol,
        }
    }
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig> {
        let array = |[v, h]: [usize; 2]| ArrayGeometry::new(v, h)?.with_spacing(self.element_spacing);
        let pos = |[x, y, z]: [f64; 3]| Position3D::new(x, y, z);
        let area = |[x, y]: [f64; 2], radius| ServingArea {
            center_x: x,
            center_y: y,
            radius,
        };
        let ris_array = array(self.ris_array)?;
        let cfg = ScenarioConfig {
            bs1_array: array(self.bs1_array)?,
            bs2_array: array(self.bs2_array)?,
            ris_array,
            bs1_position: pos(self.bs1_position)?,
            bs2_position: pos(self.bs2_position)?,
            ris_position: pos(self.ris_position)?,
            cell1_area: area(self.cell1_center, self.cell1_radius),
            cell2_area: area(self.cell2_center, self.cell2_radius),
            user_height: self.user_height,
            users_per_cell: self.users_per_cell,
            direct_link: RicianLinkParams {
                path_loss_exponent: self.direct_path_loss_exponent,
                rician_factor_db: self.direct_rician_factor_db,
                nlos_path_count: self.direct_nlos_paths,
                angular_spread_deg: self.direct_angular_spread_deg,
            },
            ris_user_link: RicianLinkParams {
                path_loss_exponent: self.ris_user_path_loss_exponent,
                rician_factor_db: self.ris_user_rician_factor_db,
                nlos_path_count: self.ris_user_nlos_paths,
                angular_spread_deg: self.ris_user_angular_spread_deg,
            },
            bs_ris_link: RicianLinkParams {
                path_loss_exponent: self.bs_ris_path_loss_exponent,
                rician_factor_db: self.bs_ris_rician_factor_db,
                nlos_path_count: self.bs_ris_nlos_paths,
                angular_spread_deg: self.bs_ris_angular_spread_deg,
            },
            path_loss: PathLossModel {
                c0_db: self.path_loss_c0_db,
                d0_m: self.path_loss_d0_m,
            },
            p_t_dbm: self.p_t_dbm,
            noise_dbm: self.noise_dbm,
            theta_rad: self.theta_rad,
            lambda_db: self.lambda_db,
            num_drops: self.num_drops,
            seed: self.seed,
            rcg: RcgConfig {
                max_iters: self.rcg_max_iters,
                grad_tol: self.rcg_grad_tol_per_element * ris_array.total() as f64,
                obj_tol: self.rcg_obj_tol,
                ..RcgConfig::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let dims = |g: &ArrayGeometry| [g.vertical_count, g.horizontal_count];
        let xyz = |p: &Position3D| [p.x, p.y, p.z];
        Self {
            bs1_array: dims(&cfg.bs1_array),
            bs2_array: dims(&cfg.bs2_array),
            ris_array: dims(&cfg.ris_array),
            element_spacing: cfg.ris_array.element_spacing,
            bs1_position: xyz(&cfg.bs1_position),
            bs2_position: xyz(&cfg.bs2_position),
            ris_position: xyz(&cfg.ris_position),
            cell1_center: [cfg.cell1_area.center_x, cfg.cell1_area.center_y],
            cell1_radius: cfg.cell1_area.radius,
            cell2_center: [cfg.cell2_area.center_x, cfg.cell2_area.center_y],
            cell2_radius: cfg.cell2_area.radius,
            user_height: cfg.user_height,
            users_per_cell: cfg.users_per_cell,
            direct_path_loss_exponent: cfg.direct_link.path_loss_exponent,
            direct_rician_factor_db: cfg.direct_link.rician_factor_db,
            direct_nlos_paths: cfg.direct_link.nlos_path_count,
            direct_angular_spread_deg: cfg.direct_link.angular_spread_deg,
            ris_user_path_loss_exponent: cfg.ris_user_link.path_loss_exponent,
            ris_user_rician_factor_db: cfg.ris_user_link.rician_factor_db,
            ris_user_nlos_paths: cfg.ris_user_link.nlos_path_count,
            ris_user_angular_spread_deg: cfg.ris_user_link.angular_spread_deg,
            bs_ris_path_loss_exponent: cfg.bs_ris_link.path_loss_exponent,
            bs_ris_rician_factor_db: cfg.bs_ris_link.rician_factor_db,
            bs_ris_nlos_paths: cfg.bs_ris_link.nlos_path_count,
            bs_ris_angular_spread_deg: cfg.bs_ris_link.angular_spread_deg,
            path_loss_c0_db: cfg.path_loss.c0_db,
            path_loss_d0_m: cfg.path_loss.d0_m,
            p_t_dbm: cfg.p_t_dbm,
            noise_dbm: cfg.noise_dbm,
            theta_rad: cfg.theta_rad,
            lambda_db: cfg.lambda_db,
            num_drops: cfg.num_drops,
            seed: cfg.seed,
            rcg_max_iters: cfg.rcg.max_iters,
            rcg_grad_tol_per_element: cfg.rcg.grad_tol / cfg.ris_array.total() as f64,
            rcg_obj_tol: cfg.rcg.obj_tol,
        }
    }
}
