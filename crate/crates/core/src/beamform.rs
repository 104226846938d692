//! Composite downlink channels and SLNR precoding with equal power per user.

use nalgebra::{Cholesky, LU};

use crate::channel::ChannelSet;
use crate::manifold::ReflectionVector;
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Effective downlink channel of every user of one cell, one row per user
/// (`K × N`); row `k` is the `hₖᴴ` that multiplies the precoder.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeChannels {
    pub rows: CMatrix,
}

impl CompositeChannels {
    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| Error::EmptyInput("no user channels".into()))?;
        let n = first.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::dim("user channels have different lengths"));
        }
        Ok(Self {
            rows: CMatrix::from_fn(columns.len(), n, |k, i| columns[k][i].conj()),
        })
    }

    pub fn users(&self) -> usize {
        self.rows.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.rows.ncols()
    }
}

/// `φᴴ diag(hᴴ)`: the row weights that map `G` to a user's reflected row.
fn reflected_weights(phi: &ReflectionVector, h_r: &CVector) -> CVector {
    phi.as_vector().zip_map(h_r, |p, h| (p * h).conj())
}

fn reflected_rows(phi: &ReflectionVector, h_r: &[CVector], g: &CMatrix) -> Result<CMatrix> {
    if phi.len() != g.nrows() || h_r.iter().any(|h| h.len() != g.nrows()) {
        return Err(Error::dim(format!(
            "φ has {} entries, G has {} rows",
            phi.len(),
            g.nrows()
        )));
    }
    if h_r.is_empty() {
        return Err(Error::EmptyInput("no users".into()));
    }
    let mut rows = CMatrix::zeros(h_r.len(), g.ncols());
    for (k, h) in h_r.iter().enumerate() {
        let w = reflected_weights(phi, h);
        rows.set_row(k, &(w.transpose() * g));
    }
    Ok(rows)
}

/// Cell 1 rows `φᴴ A_{1,k}` (the direct links are blocked).
pub fn composite_cell1(phi: &ReflectionVector, channels: &ChannelSet) -> Result<CompositeChannels> {
    Ok(CompositeChannels {
        rows: reflected_rows(phi, &channels.h_r1, &channels.g1)?,
    })
}

/// Cell 2 rows `h_{d,2,k}ᴴ + e^{jθ} φᴴ A_{2,k}`.
pub fn composite_cell2(phi: &ReflectionVector, channels: &ChannelSet) -> Result<CompositeChannels> {
    let reflected = reflected_rows(phi, &channels.h_r2, &channels.g2)?;
    let direct = direct_cell2(channels)?;
    if direct.rows.shape() != reflected.shape() {
        return Err(Error::dim("direct and reflected cell-2 channels disagree in shape"));
    }
    Ok(CompositeChannels {
        rows: direct.rows + reflected * Complex64::from_polar(1.0, channels.theta),
    })
}

/// Cell 2 rows `h_{d,2,k}ᴴ`: all that BS 2 knows, and what its users see
/// without an RIS.
pub fn direct_cell2(channels: &ChannelSet) -> Result<CompositeChannels> {
    CompositeChannels::from_columns(&channels.h_d2)
}

/// Precoding matrix `F = [f₁ … f_K]` (`N × K`).
#[derive(Clone, Debug, PartialEq)]
pub struct Beamformer {
    pub f: CMatrix,
    pub power_budget: f64,
}

impl Beamformer {
    /// `Tr(Fᴴ F)`.
    pub fn total_power(&self) -> f64 {
        self.f.norm_squared()
    }
}

/// SLNR precoder with equal per-user power:
/// `vₖ = (Σ_{j≠k} hⱼhⱼᴴ + (K σ²/P) I)⁻¹ hₖ`, `fₖ = √(P/K) · vₖ/‖vₖ‖`.
pub fn slnr_beamformer(channels: &CompositeChannels, power_budget: f64, noise_var: f64) -> Result<Beamformer> {
    let k_users = channels.users();
    let n = channels.antennas();
    if k_users == 0 || n == 0 {
        return Err(Error::EmptyInput("SLNR precoder needs at least one user and antenna".into()));
    }
    if !(power_budget > 0.0) || !(noise_var > 0.0) {
        return Err(Error::Config(format!(
            "power budget ({power_budget}) and noise variance ({noise_var}) must be positive"
        )));
    }
    // Beam directions are invariant to a common rescaling of the channels
    // together with σ² by its square; normalize to keep the solve well scaled.
    let scale = channels.rows.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Numerical("all user channels are zero or non-finite".into()));
    }
    let h = channels.rows.unscale(scale);
    let reg = k_users as f64 * noise_var / power_budget / (scale * scale);
    let gram = h.adjoint() * &h;
    let amp = (power_budget / k_users as f64).sqrt();

    let mut f = CMatrix::zeros(n, k_users);
    for k in 0..k_users {
        let hk: CVector = h.row(k).adjoint();
        let mut leak = &gram - &hk * hk.adjoint();
        for i in 0..n {
            leak[(i, i)] += Complex64::new(reg, 0.0);
        }
        let v = match Cholesky::new(leak.clone()) {
            Some(ch) => ch.solve(&hk),
            None => LU::new(leak)
                .solve(&hk)
                .ok_or_else(|| Error::Numerical(format!("singular leakage matrix for user {k}")))?,
        };
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical(format!("user {k} has a zero SLNR direction")));
        }
        f.set_column(k, &v.scale(amp / norm));
    }
    Ok(Beamformer { f, power_budget })
}
