//! Balance matrix construction and RIS reflection designs.
//!
//! For user `k` of cell `i` the RIS-reflected row channel is `φᴴ A_{i,k}`
//! with `A_{i,k} = diag(h_{r,i,k}ᴴ) G_i`. Summing the Gram matrices gives the
//! total reflective gain `φᴴ Ã₁ φ` of cell 1 and the total uncontrolled gain
//! `φᴴ Ã₂ φ` of cell 2 (the phase offset θ cancels in the latter). The
//! balanced design minimizes `-φᴴ R(λ) φ` with
//! `R(λ) = Ã₁/‖Ã₁‖_F - λ·Ã₂/‖Ã₂‖_F`.

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::linalg::{hermitian_defect, max_eigenpair, quadratic_form};
use crate::manifold::{rcg_minimize, retract_point, RcgConfig, RcgTrace, ReflectionVector};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Largest tolerated `|Im(φᴴ R φ)|` (scaled up for large quadratic forms).
pub const HERMITIAN_IMAG_TOL: f64 = 1e-9;

/// `A = diag(h_rᴴ) G`, i.e. `A[m, n] = conj(h_r[m]) · G[m, n]`.
pub fn cascade(h_r: &CVector, g: &CMatrix) -> Result<CMatrix> {
    if h_r.len() != g.nrows() {
        return Err(Error::dim(format!(
            "cascade: h_r has length {}, G has {} rows",
            h_r.len(),
            g.nrows()
        )));
    }
    let mut a = g.clone();
    for (mut row, h) in a.row_iter_mut().zip(h_r.iter()) {
        row *= h.conj();
    }
    Ok(a)
}

/// `Σ_k A_k A_kᴴ`.
pub fn total_gain_matrix(cascades: &[CMatrix]) -> Result<CMatrix> {
    let first = cascades
        .first()
        .ok_or_else(|| Error::EmptyInput("total gain of zero users".into()))?;
    let m = first.nrows();
    let mut total = CMatrix::zeros(m, m);
    for a in cascades {
        if a.nrows() != m {
            return Err(Error::dim(format!(
                "cascaded matrices disagree on RIS size ({} vs {m})",
                a.nrows()
            )));
        }
        total += a * a.adjoint();
    }
    // Exact Hermitian symmetry regardless of summation rounding.
    let sym = (&total + total.adjoint()).scale(0.5);
    Ok(sym)
}

/// Cascaded and total channels of both cells for one realization.
#[derive(Clone, Debug)]
pub struct EffectiveChannels {
    pub a1: Vec<CMatrix>,
    pub a2: Vec<CMatrix>,
    pub atilde1: CMatrix,
    pub atilde2: CMatrix,
}

impl EffectiveChannels {
    pub fn from_channels(channels: &ChannelSet) -> Result<Self> {
        let a1 = channels
            .h_r1
            .iter()
            .map(|h| cascade(h, &channels.g1))
            .collect::<Result<Vec<_>>>()?;
        let a2 = channels
            .h_r2
            .iter()
            .map(|h| cascade(h, &channels.g2))
            .collect::<Result<Vec<_>>>()?;
        let atilde1 = total_gain_matrix(&a1)?;
        let atilde2 = total_gain_matrix(&a2)?;
        if atilde1.nrows() != atilde2.nrows() {
            return Err(Error::dim("cells see RIS matrices of different sizes"));
        }
        Ok(Self {
            a1,
            a2,
            atilde1,
            atilde2,
        })
    }

    pub fn ris_elements(&self) -> usize {
        self.atilde1.nrows()
    }

    /// `φᴴ Ã₁ φ`, the total reflective gain of cell 1.
    pub fn reflective_gain(&self, phi: &ReflectionVector) -> f64 {
        quadratic_form(&self.atilde1, phi.as_vector()).re
    }

    /// `φᴴ Ã₂ φ`, the total uncontrolled gain of cell 2.
    pub fn uncontrolled_gain(&self, phi: &ReflectionVector) -> f64 {
        quadratic_form(&self.atilde2, phi.as_vector()).re
    }

    pub fn balance(&self, lambda: f64) -> Result<BalanceMatrix> {
        balance_matrix(&self.atilde1, &self.atilde2, lambda)
    }
}

/// `R(λ) = Ã₁/‖Ã₁‖_F − λ·Ã₂/‖Ã₂‖_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceMatrix {
    pub r: CMatrix,
    pub lambda: f64,
}

impl BalanceMatrix {
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }
}

pub fn balance_matrix(at1: &CMatrix, at2: &CMatrix, lambda: f64) -> Result<BalanceMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if at1.shape() != at2.shape() || at1.nrows() != at1.ncols() {
        return Err(Error::dim(format!(
            "balance matrix inputs must be square and equal-sized, got {:?} and {:?}",
            at1.shape(),
            at2.shape()
        )));
    }
    let n1 = at1.norm();
    let n2 = at2.norm();
    if !(n1 > 0.0) {
        return Err(Error::Normalization("total reflective channel".into()));
    }
    if !(n2 > 0.0) {
        return Err(Error::Normalization("total uncontrolled channel".into()));
    }
    let r = at1.unscale(n1) - at2.scale(lambda / n2);
    Ok(BalanceMatrix { r, lambda })
}

fn check_dim(phi: &ReflectionVector, r: &BalanceMatrix) -> Result<()> {
    if phi.len() != r.dim() {
        return Err(Error::dim(format!(
            "φ has {} entries, R(λ) is {}x{}",
            phi.len(),
            r.dim(),
            r.dim()
        )));
    }
    Ok(())
}

/// `f(φ) = −φᴴ R(λ) φ`.
pub fn p1_objective(phi: &ReflectionVector, r: &BalanceMatrix) -> Result<f64> {
    check_dim(phi, r)?;
    let q = quadratic_form(&r.r, phi.as_vector());
    if q.im.abs() > HERMITIAN_IMAG_TOL * q.re.abs().max(1.0) {
        return Err(Error::HermitianViolation { imag: q.im });
    }
    Ok(-q.re)
}

/// `∇f(φ) = −R(λ) φ`.
///
/// This is half the gradient of `f` in the real metric `Re(aᴴb)`; the
/// factor only rescales step lengths and leaves stationary points unchanged.
pub fn p1_euclid_grad(phi: &ReflectionVector, r: &BalanceMatrix) -> Result<CVector> {
    check_dim(phi, r)?;
    Ok(-(&r.r * phi.as_vector()))
}

/// Runs the RCG minimizer on `−φᴴ R φ` from `phi0`.
pub fn minimize_balance(
    r: &BalanceMatrix,
    cfg: &RcgConfig,
    phi0: &ReflectionVector,
) -> Result<(ReflectionVector, RcgTrace)> {
    if hermitian_defect(&r.r) > 1e-10 * r.r.norm().max(1.0) {
        return Err(Error::HermitianViolation {
            imag: hermitian_defect(&r.r),
        });
    }
    // Validates dimensions and the starting value once; the closures below
    // skip the per-call checks.
    p1_objective(phi0, r)?;
    let mat = &r.r;
    rcg_minimize(
        |p| -quadratic_form(mat, p.as_vector()).re,
        |p| -(mat * p.as_vector()),
        phi0,
        cfg,
    )
}

/// Balanced design: builds `R(λ)` from the channels and minimizes
/// `−φᴴ R(λ) φ`. Without an explicit start the eigenvector-rounded point is
/// used, falling back to fixed-seed random phases if that fails.
pub fn design_balanced(
    channels: &ChannelSet,
    lambda: f64,
    cfg: &RcgConfig,
    phi0: Option<&ReflectionVector>,
) -> Result<(ReflectionVector, RcgTrace)> {
    let eff = EffectiveChannels::from_channels(channels)?;
    let r = eff.balance(lambda)?;
    match phi0 {
        Some(p) => minimize_balance(&r, cfg, p),
        None => minimize_balance(&r, cfg, &warm_start(&r)),
    }
}

/// Eigenvector-rounded start, or fixed-seed random phases if the eigen-solve
/// fails.
pub fn warm_start(r: &BalanceMatrix) -> ReflectionVector {
    match design_eigen(r) {
        Ok(phi) => phi,
        Err(e) => {
            debug!("eigen warm start failed ({e}); using random phases");
            design_random(r.dim(), &mut ChaCha8Rng::seed_from_u64(0))
        }
    }
}

/// Rounds the principal eigenvector of `R(λ)` onto the manifold.
///
/// Exactly-zero (or negligible) entries get phase 0.
pub fn design_eigen(r: &BalanceMatrix) -> Result<ReflectionVector> {
    let (_, v) = max_eigenpair(&r.r)?;
    let floor = v.camax() * 1e-14;
    let v = v.map(|z| if z.norm() <= floor { Complex64::new(1.0, 0.0) } else { z });
    retract_point(&v)
}

/// Independent uniform phases in `[0, 2π)`.
pub fn design_random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ReflectionVector {
    let phases: Vec<f64> = (0..m)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    ReflectionVector::from_phases(&phases)
}
