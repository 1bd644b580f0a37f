//! Reduction of a pure state to its standard resource.
//!
//! Every pure state is related by a real orthogonal (reversible TRIO) map and
//! a global phase to the two-slot form `(1, e^{iθ}, 0, …, 0)ᵀ/√2` with
//! `θ ∈ [0, π/2]`. Since real orthogonal maps preserve `Σ_n ψ_n²`, the angle
//! is fixed by `cos θ = |Σ_n ψ_n²|`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::angular::{Basis, PureState, SelfConjLabel};
use crate::linalg::{norm_sq, orthogonal_with_first_column, orthogonal_with_two_columns, CVector, RMatrix, RVector, C64};
use crate::{Error, Result, CHECK_TOL};

/// A resource class, given by its angle `θ ∈ [0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct StandardResource {
    theta: f64,
}

impl StandardResource {
    /// Accepts `θ ∈ [0, π/2]`; values within `1e-12` outside are clamped.
    pub fn new(theta: f64) -> Result<Self> {
        const SLACK: f64 = 1e-12;
        if !theta.is_finite() || !(-SLACK..=FRAC_PI_2 + SLACK).contains(&theta) {
            return Err(Error::InvalidAngle(format!("θ = {theta} is outside [0, π/2]")));
        }
        Ok(StandardResource { theta: theta.clamp(0.0, FRAC_PI_2) })
    }

    /// Resource with `cos θ = c`, `c` clamped into `[0, 1]`.
    pub fn from_cos(c: f64) -> Self {
        StandardResource { theta: c.clamp(0.0, 1.0).acos() }
    }

    pub fn free() -> Self {
        StandardResource { theta: 0.0 }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    /// `τ = 1 - cos θ`.
    pub fn tau(self) -> f64 {
        1.0 - self.theta.cos()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardizationResult {
    pub resource: StandardResource,
    /// Real orthogonal `K` with `Kᵀψ = e^{iγ}(1, e^{iθ}, 0, …)ᵀ/√2`.
    pub transform: RMatrix,
    /// `γ`.
    pub global_phase: f64,
}

impl StandardizationResult {
    /// `e^{-iγ} Kᵀ ψ`, which should equal the two-slot form.
    pub fn reduce(&self, psi: &CVector) -> CVector {
        let k = self.transform.map(|x| C64::new(x, 0.0));
        k.transpose() * psi * C64::from_polar(1.0, -self.global_phase)
    }
}

/// `(1, e^{iθ}, 0, …)ᵀ/√2`.
pub fn two_slot_form(theta: f64, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[1] = C64::from_polar(FRAC_1_SQRT_2, theta);
    v
}

/// `(e^{iθ/2}, e^{-iθ/2}, 0, …)ᵀ/√2`.
pub fn standard_amplitudes(theta: f64, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[0] = C64::from_polar(FRAC_1_SQRT_2, theta / 2.0);
    v[1] = C64::from_polar(FRAC_1_SQRT_2, -theta / 2.0);
    v
}

/// The standard state over the first `dim` labels of
/// [`SelfConjLabel::ladder`].
pub fn standard_state(res: StandardResource, dim: usize) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::Dimension(format!("standard state needs dim >= 2, got {dim}")));
    }
    PureState::new(Basis::SelfConjugate(SelfConjLabel::ladder(dim)), standard_amplitudes(res.theta, dim))
}

/// Standardizes a state given in a self-conjugate basis (or a product of
/// self-conjugate bases).
pub fn standardize(psi: &PureState) -> Result<StandardizationResult> {
    if !psi.basis().is_self_conjugate() {
        return Err(Error::Basis(format!(
            "standardization needs a self-conjugate basis, got {}",
            psi.basis().kind()
        )));
    }
    standardize_amplitudes(psi.amplitudes())
}

/// Standardizes a raw amplitude vector in a self-conjugate basis.
pub fn standardize_amplitudes(psi: &CVector) -> Result<StandardizationResult> {
    let n2 = norm_sq(psi);
    if !n2.is_finite() || (n2 - 1.0).abs() > CHECK_TOL {
        return Err(Error::Normalization { norm_sq: n2, defect: (n2 - 1.0).abs() });
    }
    let d = psi.len();
    if d == 0 {
        return Err(Error::Dimension("empty state".into()));
    }
    if d == 1 {
        return Ok(StandardizationResult {
            resource: StandardResource::free(),
            transform: RMatrix::identity(1, 1),
            global_phase: psi[0].arg(),
        });
    }

    // Rotate by -i when the imaginary part dominates, so that a = |ψ^R| ≥ 1/√2.
    let mut pre_phase = 0.0;
    let mut re: RVector = psi.map(|z| z.re);
    let mut im: RVector = psi.map(|z| z.im);
    if re.norm_squared() < im.norm_squared() {
        pre_phase = FRAC_PI_2;
        let old_re = re;
        re = im;
        im = -old_re;
    }
    let a = re.norm();
    let x = &re / a;
    let b = x.dot(&im);
    let mut r = &im - &x * b;
    r -= &x * x.dot(&r);
    let c = r.norm();

    // ψ = e^{i·pre}[(a + ib) x + ic y]
    let (k_prime, c) = if c > 1e-13 {
        let y = r / c;
        (orthogonal_with_two_columns(&x, &y), c)
    } else {
        // ψ^I ∥ ψ^R: the state is a phase times a real vector.
        (orthogonal_with_first_column(&x), 0.0)
    };
    let v1 = C64::new(a, b);
    let v2 = C64::new(0.0, c);

    // A real rotation turns the Bloch vector of (v1, v2) about the σ_y axis;
    // pick α to land on the equator (|w1| = |w2|).
    let z = v1.norm_sqr() - v2.norm_sqr();
    let xb = 2.0 * (v1 * v2.conj()).re;
    let alpha = 0.5 * z.atan2(-xb);
    let (s, co) = alpha.sin_cos();
    // R = [[cos, -sin], [sin, cos]];  w = Rᵀ v.
    let mut w = [v1 * co + v2 * s, -v1 * s + v2 * co];
    let mut slot = RMatrix::from_row_slice(2, 2, &[co, -s, s, co]);

    // Canonicalize the relative phase into [0, π/2] with TRIO moves on the two slots.
    let rel = |w: &[C64; 2]| (w[1] * w[0].conj()).arg();
    if rel(&w) < 0.0 {
        w.swap(0, 1);
        slot.swap_columns(0, 1);
    }
    if rel(&w) > FRAC_PI_2 {
        w[1] = -w[1];
        slot.column_mut(1).neg_mut();
        w.swap(0, 1);
        slot.swap_columns(0, 1);
    }
    let theta = rel(&w).clamp(0.0, FRAC_PI_2);
    let global_phase = wrap_angle(w[0].arg() + pre_phase);

    let mut block = RMatrix::identity(d, d);
    block.view_mut((0, 0), (2, 2)).copy_from(&slot);
    Ok(StandardizationResult {
        resource: StandardResource { theta },
        transform: k_prime * block,
        global_phase,
    })
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Real orthogonal `O` and phase `φ` with `O ψ = e^{iφ} · (e^{iθ/2}, e^{-iθ/2}, 0, …)/√2`,
/// i.e. the correction that lines a state up with [`standard_amplitudes`].
pub fn align_to_standard(psi: &CVector) -> Result<(StandardResource, RMatrix, f64)> {
    let s = standardize_amplitudes(psi)?;
    let theta = s.resource.theta;
    let d = psi.len();
    if d == 1 {
        return Err(Error::Dimension("alignment needs dim >= 2".into()));
    }
    // (1, e^{iθ}) = e^{iθ/2}(e^{-iθ/2}, e^{iθ/2}); swapping the slots gives the standard form.
    let mut swap = RMatrix::identity(d, d);
    swap.swap_rows(0, 1);
    let o = swap * s.transform.transpose();
    Ok((s.resource, o, wrap_angle(s.global_phase + theta / 2.0)))
}
