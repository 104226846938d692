//! Per-user SINR, achievable rate and cell sum-rate.

use crate::beamform::{Beamformer, CompositeChannels};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// Linear SINR per user.
    pub per_user_sinr: Vec<f64>,
    /// `log2(1 + SINR)` per user, bits/s/Hz.
    pub per_user_rate: Vec<f64>,
    /// Sum of the per-user rates, bits/s/Hz.
    pub sum_rate: f64,
}

impl RateReport {
    fn from_sinr(per_user_sinr: Vec<f64>) -> Self {
        let per_user_rate: Vec<f64> = per_user_sinr.iter().map(|s| (1.0 + s).log2()).collect();
        let sum_rate = per_user_rate.iter().sum();
        Self {
            per_user_sinr,
            per_user_rate,
            sum_rate,
        }
    }

    /// A cell with no usable link (every rate is zero).
    pub fn silent(users: usize) -> Self {
        Self::from_sinr(vec![0.0; users])
    }
}

/// `SINRₖ = |hₖᴴ fₖ|² / (Σ_{j≠k} |hₖᴴ fⱼ|² + σ²)`.
pub fn evaluate(channels: &CompositeChannels, beams: &Beamformer, noise_var: f64) -> Result<RateReport> {
    if channels.antennas() != beams.f.nrows() || channels.users() != beams.f.ncols() {
        return Err(Error::dim(format!(
            "channels are {}x{} but the precoder is {}x{}",
            channels.users(),
            channels.antennas(),
            beams.f.nrows(),
            beams.f.ncols()
        )));
    }
    if !(noise_var > 0.0) {
        return Err(Error::Config(format!("noise variance must be positive, got {noise_var}")));
    }
    // gains[(k, j)] = hₖᴴ fⱼ
    let gains = &channels.rows * &beams.f;
    let sinr = (0..channels.users())
        .map(|k| {
            let row = gains.row(k);
            let signal = row[k].norm_sqr();
            let interference: f64 = row.iter().map(|z| z.norm_sqr()).sum::<f64>() - signal;
            signal / (interference.max(0.0) + noise_var)
        })
        .collect();
    Ok(RateReport::from_sinr(sinr))
}
