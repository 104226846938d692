//! Complex circle manifold `{φ ∈ ℂᴹ : |φₘ| = 1}` and a Riemannian
//! conjugate-gradient minimizer over it.
//!
//! The manifold is embedded in `ℂᴹ ≅ ℝ²ᴹ` with the real inner product
//! `⟨a, b⟩ = Re(aᴴ b)`. The tangent space at `φ` is
//! `{t : Re(tₘ φₘ*) = 0 ∀m}`; projection onto it removes the radial
//! component of each entry, and the same projection serves as vector
//! transport between tangent spaces.

use std::fmt;

use log::debug;

use crate::linalg::real_inner;
use crate::{CVector, Complex64, Error, Result};

/// Tolerance on `| |φₘ| - 1 |` accepted by [`ReflectionVector::new`].
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Tolerance on `|Re(tₘ φₘ*)|` accepted by [`TangentVector::new`].
pub const TANGENCY_TOL: f64 = 1e-10;

/// A point on the complex circle manifold: the RIS reflection coefficients.
#[derive(Clone, PartialEq)]
pub struct ReflectionVector(CVector);

impl ReflectionVector {
    /// Wraps `entries`, rejecting any entry whose modulus is not 1.
    pub fn new(entries: CVector) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("reflection vector has no entries".into()));
        }
        for (m, z) in entries.iter().enumerate() {
            let err = (z.norm() - 1.0).abs();
            if !(err <= UNIT_MODULUS_TOL) {
                return Err(Error::Numerical(format!(
                    "entry {m} has modulus {} (not unit)",
                    z.norm()
                )));
            }
        }
        Ok(Self(entries))
    }

    /// `φₘ = exp(j·phasesₘ)`.
    pub fn from_phases(phases: &[f64]) -> Self {
        Self(CVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ))
    }

    /// All-ones reflection (every element passes the signal unchanged).
    pub fn ones(m: usize) -> Self {
        Self(CVector::from_element(m, Complex64::new(1.0, 0.0)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.arg()).collect()
    }

    /// `e^{jα} φ`; stays on the manifold.
    pub fn rotated(&self, alpha: f64) -> Self {
        let r = Complex64::from_polar(1.0, alpha);
        Self(self.0.map(|z| z * r))
    }
}

impl fmt::Debug for ReflectionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ReflectionVector")
            .field(&self.0.as_slice())
            .finish()
    }
}

/// A vector in the tangent space of the manifold at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    entries: CVector,
    base: ReflectionVector,
}

impl TangentVector {
    /// Checked constructor; fails unless `entries` is tangent at `base`.
    pub fn new(entries: CVector, base: ReflectionVector) -> Result<Self> {
        check_len(entries.len(), base.len())?;
        if let Some(defect) = tangency_defect(&entries, &base) {
            if defect > TANGENCY_TOL {
                return Err(Error::Numerical(format!(
                    "vector is not tangent (radial component {defect:e})"
                )));
            }
        }
        Ok(Self { entries, base })
    }

    pub fn zero(base: ReflectionVector) -> Self {
        Self {
            entries: CVector::zeros(base.len()),
            base,
        }
    }

    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    pub fn base(&self) -> &ReflectionVector {
        &self.base
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Riemannian metric `Re(aᴴ b)`.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        real_inner(&self.entries, &other.entries)
    }
}

/// Largest `|Re(tₘ φₘ*)|` over all entries.
pub fn tangency_defect(t: &CVector, phi: &ReflectionVector) -> Option<f64> {
    t.iter()
        .zip(phi.0.iter())
        .map(|(a, p)| (a * p.conj()).re.abs())
        .max_by(f64::total_cmp)
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::dim(format!("vector has length {got}, manifold point has {want}")));
    }
    Ok(())
}

fn project_raw(g: &CVector, phi: &CVector) -> CVector {
    CVector::from_iterator(
        g.len(),
        g.iter().zip(phi.iter()).map(|(gm, pm)| gm - pm * (gm * pm.conj()).re),
    )
}

/// Orthogonal projection of an ambient vector onto the tangent space at `phi`:
/// `t = g - Re(g ⊙ φ*) ⊙ φ`.
///
/// Applied to a Euclidean gradient this yields the Riemannian gradient.
pub fn project_to_tangent(g: &CVector, phi: &ReflectionVector) -> Result<TangentVector> {
    check_len(g.len(), phi.len())?;
    Ok(TangentVector {
        entries: project_raw(g, &phi.0),
        base: phi.clone(),
    })
}

/// Element-wise normalization `xₘ / |xₘ|` back onto the manifold.
pub fn retract_point(x: &CVector) -> Result<ReflectionVector> {
    if x.is_empty() {
        return Err(Error::EmptyInput("cannot retract an empty vector".into()));
    }
    let mut out = x.clone();
    for (m, z) in out.iter_mut().enumerate() {
        let r = z.norm();
        if r == 0.0 {
            return Err(Error::RetractionSingular { index: m });
        }
        if !r.is_finite() {
            return Err(Error::Numerical(format!("non-finite entry {m} in retraction")));
        }
        *z /= r;
    }
    Ok(ReflectionVector(out))
}

/// Vector transport of `d` into the tangent space at `phi_new`.
pub fn transport(d: &TangentVector, phi_new: &ReflectionVector) -> Result<TangentVector> {
    check_len(d.entries.len(), phi_new.len())?;
    Ok(TangentVector {
        entries: project_raw(&d.entries, &phi_new.0),
        base: phi_new.clone(),
    })
}

/// Settings of the RCG minimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct RcgConfig {
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop once an accepted step decreases the objective by no more than
    /// `obj_tol · max(|f|, 1e-300)`. Zero disables the test; the run then
    /// also ends when no step along steepest descent lowers the objective.
    pub obj_tol: f64,
    pub armijo_initial_step: f64,
    pub armijo_contraction: f64,
    pub armijo_slope: f64,
    pub max_line_search_steps: usize,
}

impl Default for RcgConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-6,
            obj_tol: 0.0,
            armijo_initial_step: 1.0,
            armijo_contraction: 0.5,
            armijo_slope: 1e-4,
            max_line_search_steps: 50,
        }
    }
}

impl RcgConfig {
    /// Defaults with the gradient tolerance scaled to the problem size
    /// (`1e-6 · M`).
    pub fn for_dimension(m: usize) -> Self {
        Self {
            grad_tol: 1e-6 * m as f64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("RcgConfig: {what}")));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.grad_tol >= 0.0) || !(self.obj_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if !(self.armijo_initial_step > 0.0) || !self.armijo_initial_step.is_finite() {
            return bad("armijo_initial_step must be positive");
        }
        if !(self.armijo_contraction > 0.0 && self.armijo_contraction < 1.0) {
            return bad("armijo_contraction must lie in (0, 1)");
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0) {
            return bad("armijo_slope must lie in (0, 1)");
        }
        if self.max_line_search_steps == 0 {
            return bad("max_line_search_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    GradNorm,
    ObjDelta,
    MaxIters,
}

/// Iteration history of one [`rcg_minimize`] run.
#[derive(Clone, Debug, PartialEq)]
pub struct RcgTrace {
    /// Objective at the starting point followed by one value per accepted step.
    pub objective_values: Vec<f64>,
    /// Number of accepted steps.
    pub iterations: usize,
    pub converged_by: StopReason,
    /// Riemannian gradient norm at the returned point.
    pub final_grad_norm: f64,
    /// Step sizes of the accepted steps, aligned with `objective_values[1..]`.
    pub step_sizes: Vec<f64>,
    /// Squared gradient norms at the start of each accepted step.
    pub grad_norms_sq: Vec<f64>,
    /// Times the search direction was reset to steepest descent after a
    /// failed line search.
    pub restarts: usize,
}

impl RcgTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objective_values.last().expect("trace holds the initial value")
    }
}

struct Step {
    point: ReflectionVector,
    value: f64,
    alpha: f64,
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("non-finite {what}: {v}")))
    }
}

fn armijo_search<F>(
    objective: &mut F,
    phi: &ReflectionVector,
    value: f64,
    grad_norm_sq: f64,
    direction: &CVector,
    cfg: &RcgConfig,
) -> Result<Option<Step>>
where
    F: FnMut(&ReflectionVector) -> f64,
{
    let mut alpha = cfg.armijo_initial_step;
    for _ in 0..cfg.max_line_search_steps {
        let trial = &phi.0 + direction.scale(alpha);
        match retract_point(&trial) {
            Ok(point) => {
                let v = finite(objective(&point), "objective")?;
                // The strict test rejects steps whose sufficient-decrease
                // margin is below the rounding level of `value`.
                if v <= value - cfg.armijo_slope * alpha * grad_norm_sq && v < value {
                    return Ok(Some(Step { point, value: v, alpha }));
                }
            }
            // Landed on the origin in some coordinate: shrink and retry.
            Err(Error::RetractionSingular { .. }) => {}
            Err(e) => return Err(e),
        }
        alpha *= cfg.armijo_contraction;
    }
    Ok(None)
}

/// Minimizes `objective` over the complex circle manifold with Riemannian
/// conjugate gradients.
///
/// `euclid_grad` supplies the Euclidean gradient; it is projected onto the
/// tangent space to obtain the Riemannian gradient. The direction update is
/// `d ← -grad f + β·T(d)` with the Polak-Ribière+ coefficient
/// `β = max(0, ⟨g₊, g₊ - T(g)⟩ / ⟨g, g⟩)`, except that every `M`-th
/// iteration restarts from steepest descent (`β = 0`). Every step is an
/// Armijo backtracking step along `d` followed by retraction. A failed line search
/// resets the direction to steepest descent once; a second failure stops
/// the run with [`StopReason::ObjDelta`].
pub fn rcg_minimize<F, G>(
    mut objective: F,
    mut euclid_grad: G,
    phi0: &ReflectionVector,
    cfg: &RcgConfig,
) -> Result<(ReflectionVector, RcgTrace)>
where
    F: FnMut(&ReflectionVector) -> f64,
    G: FnMut(&ReflectionVector) -> CVector,
{
    cfg.validate()?;
    let m = phi0.len();
    let riemannian_grad = |grad_fn: &mut G, phi: &ReflectionVector| -> Result<TangentVector> {
        let eg = grad_fn(phi);
        check_len(eg.len(), m)?;
        if eg.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite Euclidean gradient".into()));
        }
        project_to_tangent(&eg, phi)
    };

    let mut phi = phi0.clone();
    let mut value = finite(objective(&phi), "objective")?;
    let mut grad = riemannian_grad(&mut euclid_grad, &phi)?;
    let mut grad_norm_sq = grad.inner(&grad);
    let mut direction = -grad.entries.clone();

    let mut trace = RcgTrace {
        objective_values: vec![value],
        iterations: 0,
        converged_by: StopReason::MaxIters,
        final_grad_norm: grad_norm_sq.sqrt(),
        step_sizes: Vec::new(),
        grad_norms_sq: Vec::new(),
        restarts: 0,
    };

    for _ in 0..cfg.max_iters {
        if grad_norm_sq.sqrt() < cfg.grad_tol {
            trace.converged_by = StopReason::GradNorm;
            trace.final_grad_norm = grad_norm_sq.sqrt();
            return Ok((phi, trace));
        }
        let mut steepest = false;
        if real_inner(&grad.entries, &direction) >= 0.0 {
            direction = -grad.entries.clone();
            steepest = true;
        }
        let step = loop {
            match armijo_search(&mut objective, &phi, value, grad_norm_sq, &direction, cfg)? {
                Some(step) => break Some(step),
                None if !steepest => {
                    trace.restarts += 1;
                    direction = -grad.entries.clone();
                    steepest = true;
                }
                None => break None,
            }
        };
        let Some(step) = step else {
            debug!("rcg: line search failed along steepest descent; stopping");
            trace.converged_by = StopReason::ObjDelta;
            trace.final_grad_norm = grad_norm_sq.sqrt();
            return Ok((phi, trace));
        };

        let new_grad = riemannian_grad(&mut euclid_grad, &step.point)?;
        let new_grad_norm_sq = new_grad.inner(&new_grad);
        let moved_dir = project_raw(&direction, &step.point.0);
        let moved_grad = project_raw(&grad.entries, &step.point.0);
        let beta = if grad_norm_sq > 0.0 && !(trace.iterations + 1).is_multiple_of(m) {
            let pr = real_inner(&new_grad.entries, &(&new_grad.entries - moved_grad));
            (pr / grad_norm_sq).max(0.0)
        } else {
            0.0
        };
        direction = moved_dir.scale(beta) - &new_grad.entries;

        let decrease = value - step.value;
        let scale = value.abs().max(1e-300);
        trace.grad_norms_sq.push(grad_norm_sq);
        trace.step_sizes.push(step.alpha);
        trace.objective_values.push(step.value);
        trace.iterations += 1;

        phi = step.point;
        value = step.value;
        grad = new_grad;
        grad_norm_sq = new_grad_norm_sq;
        trace.final_grad_norm = grad_norm_sq.sqrt();

        if grad_norm_sq.sqrt() < cfg.grad_tol {
            trace.converged_by = StopReason::GradNorm;
            return Ok((phi, trace));
        }
        if decrease <= cfg.obj_tol * scale {
            trace.converged_by = StopReason::ObjDelta;
            return Ok((phi, trace));
        }
    }
    trace.converged_by = StopReason::MaxIters;
    Ok((phi, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn projection_hand_example() {
        let phi = ReflectionVector::new(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        let g = CVector::from_vec(vec![c(1.0, 1.0), c(2.0, 0.0)]);
        let t = project_to_tangent(&g, &phi).unwrap();
        assert_abs_diff_eq!(t.entries()[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.entries()[0].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.entries()[1].re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.entries()[1].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn projecting_the_point_itself_gives_zero() {
        let phi = ReflectionVector::from_phases(&[0.3, -1.2, 2.9]);
        let t = project_to_tangent(phi.as_vector(), &phi).unwrap();
        assert!(t.norm() < 1e-15);
    }

    #[test]
    fn tangent_input_is_left_alone() {
        let phi = ReflectionVector::from_phases(&[0.7, 1.9]);
        let tangent = phi.as_vector().map(|p| p * c(0.0, 2.5));
        let t = project_to_tangent(&tangent, &phi).unwrap();
        assert!((t.entries() - &tangent).norm() < 1e-15);
    }

    #[test]
    fn projection_dimension_mismatch() {
        let phi = ReflectionVector::ones(3);
        assert!(matches!(
            project_to_tangent(&CVector::zeros(2), &phi),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn retraction_examples() {
        let x = CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 2.0)]);
        let r = retract_point(&x).unwrap();
        assert_abs_diff_eq!((r.as_vector()[0] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((r.as_vector()[1] - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);

        let unit = ReflectionVector::from_phases(&[0.1, 0.2]);
        let same = retract_point(unit.as_vector()).unwrap();
        assert!((same.as_vector() - unit.as_vector()).norm() < 1e-15);
    }

    #[test]
    fn retraction_of_zero_entry_is_singular() {
        let x = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(retract_point(&x), Err(Error::RetractionSingular { index: 1 }));
    }

    #[test]
    fn transport_matches_projection_at_new_point() {
        let old = ReflectionVector::from_phases(&[0.4, -2.0]);
        let new = ReflectionVector::from_phases(&[1.1, 0.5]);
        let d = project_to_tangent(&CVector::from_vec(vec![c(0.3, -1.0), c(2.0, 0.7)]), &old).unwrap();
        let moved = transport(&d, &new).unwrap();
        let projected = project_to_tangent(d.entries(), &new).unwrap();
        assert_eq!(moved.entries(), projected.entries());
        assert!(tangency_defect(moved.entries(), &new).unwrap() < 1e-12);

        let same = transport(&d, &old).unwrap();
        assert!((same.entries() - d.entries()).norm() < 1e-15);
        let base_as_d = TangentVector {
            entries: new.as_vector().clone(),
            base: old,
        };
        assert!(transport(&base_as_d, &new).unwrap().norm() < 1e-15);
    }

    #[test]
    fn checked_constructors() {
        assert!(ReflectionVector::new(CVector::from_vec(vec![c(0.5, 0.0)])).is_err());
        let phi = ReflectionVector::ones(2);
        assert!(TangentVector::new(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]), phi.clone()).is_err());
        assert!(TangentVector::new(CVector::from_vec(vec![c(0.0, 1.0), c(0.0, -3.0)]), phi).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(RcgConfig::default().validate().is_ok());
        let bad = RcgConfig {
            armijo_contraction: 1.0,
            ..RcgConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        assert_abs_diff_eq!(RcgConfig::for_dimension(128).grad_tol, 1.28e-4, epsilon = 1e-18);
    }

    #[test]
    fn scaled_identity_is_a_fixed_point() {
        // f = -c·φᴴφ is constant on the manifold; its gradient is purely radial.
        let phi0 = ReflectionVector::from_phases(&[0.2, 1.4, -0.6, 3.0]);
        let cst = 2.5;
        let (phi, trace) = rcg_minimize(
            |p| -cst * p.as_vector().norm_squared(),
            |p| p.as_vector().scale(-cst),
            &phi0,
            &RcgConfig::for_dimension(4),
        )
        .unwrap();
        assert_eq!(phi, phi0);
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.converged_by, StopReason::GradNorm);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let phi0 = ReflectionVector::ones(2);
        let out = rcg_minimize(|_| f64::NAN, |p| p.as_vector().clone(), &phi0, &RcgConfig::default());
        assert!(matches!(out, Err(Error::Numerical(_))));
    }

    #[test]
    fn gradient_length_is_checked() {
        let phi0 = ReflectionVector::ones(3);
        let out = rcg_minimize(|_| 0.0, |_| CVector::zeros(2), &phi0, &RcgConfig::default());
        assert!(matches!(out, Err(Error::Dimension(_))));
    }

    #[test]
    fn aligns_phases_for_rank_one_objective() {
        // f = -|aᴴφ|²; optimum aligns every φₘ with aₘ, value -(Σ|aₘ|)².
        let a = CVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.8, -0.8)]);
        let opt: f64 = a.iter().map(|z| z.norm()).sum::<f64>().powi(2);
        let a2 = a.clone();
        let (_, trace) = rcg_minimize(
            move |p| -a.dotc(p.as_vector()).norm_sqr(),
            move |p| a2.scale(-1.0) * a2.dotc(p.as_vector()),
            &ReflectionVector::ones(3),
            &RcgConfig::for_dimension(3),
        )
        .unwrap();
        assert!((trace.final_objective() + opt).abs() < 1e-8 * opt);
    }
}
