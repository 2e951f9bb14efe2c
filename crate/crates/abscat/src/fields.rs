//! Scalar fields on the plane (magnetic field B, electric potential V), flux
//! assignments, the total flux, and the two-branch decay profile ι_{a,b} with
//! its convolution bound.
//!
//! The built-in shape library covers everything the reconstruction theorems
//! need: (an)isotropic Gaussians for rapid decay, compactly supported ring
//! bumps, and rational profiles (1+|x|²)^(−μ/2) for slow decay.

use crate::geometry::{Line, Obstacle, SupportBound, Vec2};
use crate::quad;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One closed-form field component.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldShape {
    /// amplitude · exp(−dx²/2σx² − dy²/2σy²)
    Gaussian {
        center: Vec2,
        sigma: Vec2,
        amplitude: f64,
    },
    /// Compactly supported C^∞ ring bump of radius r0 and half-width `width`:
    /// amplitude · exp(1 − 1/(1−t²)) with t = (r−r0)/width, |t| < 1.
    Ring {
        center: Vec2,
        r0: f64,
        width: f64,
        amplitude: f64,
    },
    /// amplitude · (1 + |x−center|²)^(−mu/2)
    Rational {
        center: Vec2,
        mu: f64,
        amplitude: f64,
    },
}

impl FieldShape {
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            FieldShape::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let d = p - *center;
                amplitude
                    * (-(d.x * d.x) / (2.0 * sigma.x * sigma.x)
                        - (d.y * d.y) / (2.0 * sigma.y * sigma.y))
                        .exp()
            }
            FieldShape::Ring {
                center,
                r0,
                width,
                amplitude,
            } => {
                let t = ((p - *center).norm() - r0) / width;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            FieldShape::Rational {
                center,
                mu,
                amplitude,
            } => amplitude * (1.0 + (p - *center).norm2()).powf(-mu / 2.0),
        }
    }

    /// Exact (or high-accuracy) plane integral.
    pub fn integral(&self) -> f64 {
        match self {
            FieldShape::Gaussian {
                sigma, amplitude, ..
            } => amplitude * 2.0 * std::f64::consts::PI * sigma.x * sigma.y,
            FieldShape::Ring {
                r0,
                width,
                amplitude,
                ..
            } => {
                let f = |r: f64| {
                    let t = (r - r0) / width;
                    if t.abs() >= 1.0 {
                        0.0
                    } else {
                        r * (1.0 - 1.0 / (1.0 - t * t)).exp()
                    }
                };
                2.0 * std::f64::consts::PI
                    * amplitude
                    * quad::integrate(&f, (r0 - width).max(0.0), r0 + width, 60)
            }
            FieldShape::Rational { mu, amplitude, .. } => {
                2.0 * std::f64::consts::PI * amplitude / (mu - 2.0)
            }
        }
    }

    pub fn center(&self) -> Vec2 {
        match self {
            FieldShape::Gaussian { center, .. }
            | FieldShape::Ring { center, .. }
            | FieldShape::Rational { center, .. } => *center,
        }
    }

    /// Center of radial symmetry, when the shape is isotropic.
    pub fn radial_center(&self) -> Option<Vec2> {
        match self {
            FieldShape::Gaussian { center, sigma, .. } if sigma.x == sigma.y => Some(*center),
            FieldShape::Ring { center, .. } => Some(*center),
            FieldShape::Rational { center, .. } => Some(*center),
            _ => None,
        }
    }

    /// Cumulative flux M(r) = 2π ∫₀ʳ s f(s) ds about the radial center.
    /// Only valid for radial shapes.
    pub fn cumulative_flux(&self, r: f64) -> f64 {
        match self {
            FieldShape::Gaussian {
                sigma, amplitude, ..
            } => {
                debug_assert!(sigma.x == sigma.y);
                let s2 = sigma.x * sigma.x;
                amplitude * 2.0 * std::f64::consts::PI * s2 * (1.0 - (-r * r / (2.0 * s2)).exp())
            }
            FieldShape::Ring {
                r0,
                width,
                amplitude,
                ..
            } => {
                let lo = (r0 - width).max(0.0);
                if r <= lo {
                    return 0.0;
                }
                let hi = r.min(r0 + width);
                let f = |s: f64| {
                    let t = (s - r0) / width;
                    if t.abs() >= 1.0 {
                        0.0
                    } else {
                        s * (1.0 - 1.0 / (1.0 - t * t)).exp()
                    }
                };
                2.0 * std::f64::consts::PI * amplitude * quad::integrate(&f, lo, hi, 60)
            }
            FieldShape::Rational { mu, amplitude, .. } => {
                2.0 * std::f64::consts::PI * amplitude / (mu - 2.0)
                    * (1.0 - (1.0 + r * r).powf(1.0 - mu / 2.0))
            }
            #[allow(unreachable_patterns)]
            _ => panic!("cumulative_flux on a non-radial shape"),
        }
    }

    /// Radius (about the shape center) beyond which the shape is negligible;
    /// None for power-law tails.
    pub fn effective_radius(&self) -> Option<f64> {
        match self {
            FieldShape::Gaussian { sigma, .. } => Some(9.0 * sigma.x.max(sigma.y)),
            FieldShape::Ring { r0, width, .. } => Some(r0 + width),
            FieldShape::Rational { .. } => None,
        }
    }

    /// Interval of line parameters τ outside which this component is
    /// negligible (or `None` when the tail is power-law).
    pub fn line_core_interval(&self, line: &Line) -> Option<(f64, f64)> {
        let t0 = line.project(self.center());
        self.effective_radius().map(|r| (t0 - r, t0 + r))
    }
}

/// Sampled/analytic real field with a declared decay exponent.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub components: Vec<FieldShape>,
    /// Declared decay exponent: μ > 2 for magnetic fields, α > 1 for electric
    /// potentials (pointwise surrogate of the spec's operator condition).
    pub decay_mu: f64,
    /// Declared support bound used by the obstruction-set certification.
    pub support_hint: Option<SupportBound>,
    /// Declared smoothness level C^k.
    pub smoothness: u32,
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField {
            components: vec![],
            decay_mu: 10.0,
            support_hint: None,
            smoothness: u32::MAX,
        }
    }

    pub fn new(components: Vec<FieldShape>, decay_mu: f64) -> Self {
        ScalarField {
            components,
            decay_mu,
            support_hint: None,
            smoothness: u32::MAX,
        }
    }

    pub fn gaussian(center: Vec2, sigma: f64, amplitude: f64) -> Self {
        ScalarField::new(
            vec![FieldShape::Gaussian {
                center,
                sigma: Vec2::new(sigma, sigma),
                amplitude,
            }],
            8.0,
        )
    }

    pub fn ring(center: Vec2, r0: f64, width: f64, amplitude: f64) -> Self {
        ScalarField::new(
            vec![FieldShape::Ring {
                center,
                r0,
                width,
                amplitude,
            }],
            8.0,
        )
    }

    pub fn rational(center: Vec2, mu: f64, amplitude: f64) -> Self {
        ScalarField::new(vec![FieldShape::Rational { center, mu, amplitude }], mu)
    }

    pub fn with_support_hint(mut self, hint: SupportBound) -> Self {
        self.support_hint = Some(hint);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        self.components.iter().map(|c| c.eval(p)).sum()
    }

    /// Exact plane integral ∫_{ℝ²} B̄.
    pub fn integral(&self) -> f64 {
        self.components.iter().map(|c| c.integral()).sum()
    }

    /// True when every component is radial about a common center.
    pub fn common_radial_center(&self) -> Option<Vec2> {
        let mut center = None;
        for c in &self.components {
            let rc = c.radial_center()?;
            match center {
                None => center = Some(rc),
                Some(existing) => {
                    if (existing - rc).norm() > 1e-14 {
                        return None;
                    }
                }
            }
        }
        center
    }

    /// Fit the constant C in |B(x)| ≤ C (1+|x|)^(−μ) on a far-field sample
    /// grid (radii 4..512 geometric × 32 angles).
    pub fn fitted_decay_constant(&self) -> f64 {
        let mut c_max: f64 = 0.0;
        let mut r = 4.0;
        while r <= 512.0 {
            for k in 0..32 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                let p = Vec2::from_angle(th) * r;
                c_max = c_max.max(self.eval(p).abs() * (1.0 + r).powf(self.decay_mu));
            }
            r *= 2.0;
        }
        c_max
    }

    /// Union of component core intervals along a line plus a power-law flag,
    /// for decay-aware line quadrature.
    pub fn line_core_interval(&self, line: &Line) -> (f64, f64, bool) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut power_tail = false;
        for c in &self.components {
            match c.line_core_interval(line) {
                Some((a, b)) => {
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                None => {
                    power_tail = true;
                    let t0 = line.project(c.center());
                    lo = lo.min(t0 - 16.0);
                    hi = hi.max(t0 + 16.0);
                }
            }
        }
        if !lo.is_finite() {
            lo = -1.0;
            hi = 1.0;
        }
        (lo, hi, power_tail)
    }
}

/// Per-component fluxes Φ(K_l), index-aligned with the obstacle components
/// (0 = convex component, then the point components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxAssignment(pub Vec<f64>);

impl FluxAssignment {
    pub fn zeros(n: usize) -> Self {
        FluxAssignment(vec![0.0; n])
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn validate(&self, obs: &Obstacle) -> Result<()> {
        if self.0.len() != obs.n_components() {
            return Err(Error::field(format!(
                "flux assignment has {} entries for {} obstacle components",
                self.0.len(),
                obs.n_components()
            )));
        }
        Ok(())
    }
}

/// Total-flux result with its quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct FluxValue {
    pub value: f64,
    pub error: f64,
}

/// Total flux Φ_B = Σ_{i∈I}(Φ(K_i) − ∫_{int γ_i} B) + Φ(K₁) + ∫_Λ B with
/// ∫_Λ B = ∫_{ℝ²} B̄ − ∫_{K₁} B̄ (bounded measurable extension convention).
pub fn total_flux(
    phi: &FluxAssignment,
    b: &ScalarField,
    obs: &Obstacle,
    quad_tol: f64,
) -> Result<FluxValue> {
    phi.validate(obs)?;
    if b.decay_mu <= 2.0 {
        return Err(Error::field(format!(
            "total flux needs an integrable field (decay exponent {} ≤ 2)",
            b.decay_mu
        )));
    }
    let mut value = phi.0[0];
    let mut error = 0.0;

    let plane = b.integral();
    let k1 = integral_over_convex(b, obs, quad_tol)?;
    value += plane - k1;
    error += quad_tol;

    let rg = obs.gamma_radius();
    for (i, p) in obs.points().iter().enumerate() {
        let disc = if b.is_zero() {
            0.0
        } else {
            quad::integrate_disc(&|x, y| b.eval(Vec2::new(x, y)), (p.x, p.y), rg, 24, 64)
        };
        value += phi.0[i + 1] - disc;
        error += quad_tol;
    }
    Ok(FluxValue { value, error })
}

fn integral_over_convex(b: &ScalarField, obs: &Obstacle, _tol: f64) -> Result<f64> {
    if b.is_zero() {
        return Ok(0.0);
    }
    Ok(match obs.convex() {
        crate::geometry::ConvexRegion::Disc { center, radius } => quad::integrate_disc(
            &|x, y| b.eval(Vec2::new(x, y)),
            (center.x, center.y),
            *radius,
            32,
            96,
        ),
        crate::geometry::ConvexRegion::Polygon { vertices } => {
            let verts: Vec<(f64, f64)> = vertices.iter().map(|v| (v.x, v.y)).collect();
            quad::integrate_polygon(&|x, y| b.eval(Vec2::new(x, y)), &verts, 24)
        }
    })
}

/// The two-branch profile ι_{a,b}(x), log branch when a = 2 or b = 2.
pub fn iota(x_norm: f64, a: f64, b: f64) -> Result<f64> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::field("iota requires a, b ≥ 0"));
    }
    if a + b <= 2.0 {
        return Err(Error::field(format!("iota requires a + b > 2 (got {})", a + b)));
    }
    let r = x_norm.abs();
    let log_branch = (a - 2.0).abs() < 1e-12 || (b - 2.0).abs() < 1e-12;
    Ok(if log_branch {
        (1.0 + r).powi(-2)
            + (std::f64::consts::E + r).ln() / (1.0 + r).powf(a + b - 2.0)
    } else {
        (1.0 + r).powf(-a.min(b)) + (1.0 + r).powf(-(a + b - 2.0))
    })
}

/// Report of the convolution bound ∫ (1+|y|)^(−a)(1+|x−y|)^(−b) dy ≤ C ι_{a,b}(x).
#[derive(Debug, Clone)]
pub struct ConvolutionBoundReport {
    /// (|x|, integral, ratio to ι_{a,b})
    pub samples: Vec<(f64, f64, f64)>,
    pub max_ratio: f64,
}

/// Evaluate the convolution integral at the given radii and return the ratios
/// against ι_{a,b}; a bounded ratio across the far field is the Lemma's claim.
pub fn convolution_bound_check(a: f64, b: f64, radii: &[f64]) -> Result<ConvolutionBoundReport> {
    if a < 0.0 || b < 0.0 || a + b <= 2.0 {
        return Err(Error::field(format!(
            "convolution bound requires a, b ≥ 0 and a + b > 2 (got a = {a}, b = {b})"
        )));
    }
    let mut samples = Vec::with_capacity(radii.len());
    let mut max_ratio: f64 = 0.0;
    for &rx in radii {
        let integral = convolution_at(a, b, rx)?;
        let bound = iota(rx, a, b)?;
        let ratio = integral / bound;
        max_ratio = max_ratio.max(ratio);
        samples.push((rx, integral, ratio));
    }
    Ok(ConvolutionBoundReport { samples, max_ratio })
}

fn convolution_at(a: f64, b: f64, rx: f64) -> Result<f64> {
    // Radial profile g(r) = r ∫ dθ (1+r)^(−a) (1+|x − r e^{iθ}|)^(−b), then a
    // decaying 1D integral over r (the integrand is bounded — no singularity).
    let x = Vec2::new(rx, 0.0);
    let n_theta = 96;
    let g = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for k in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_theta as f64;
            let y = Vec2::from_angle(th) * r;
            s += (1.0 + (x - y).norm()).powf(-b);
        }
        s * 2.0 * std::f64::consts::PI / n_theta as f64 * r * (1.0 + r).powf(-a)
    };
    let hi = (4.0 * (1.0 + rx)).max(16.0);
    let (core, _) = quad::adaptive(&g, 0.0, hi, 1e-9)?;
    // dyadic tail panels with power-law stopping
    let mut total = core;
    let mut t = hi;
    let mut prev = f64::INFINITY;
    loop {
        let (panel, _) = quad::adaptive(&g, t, 2.0 * t, 1e-9)?;
        total += panel;
        if panel.abs() < 1e-10 {
            break;
        }
        let p = if prev.is_finite() && panel.abs() > 0.0 {
            (prev / panel.abs()).log2()
        } else {
            a + b - 1.0
        };
        if p > 0.2 {
            let r = 0.5f64.powf(p);
            if panel.abs() * r / (1.0 - r) < 1e-9 * total.abs().max(1.0) {
                break;
            }
        }
        prev = panel.abs();
        t *= 2.0;
        if t > 1e9 {
            return Err(Error::quadrature("convolution tail did not converge"));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexRegion;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn disc_obstacle() -> Obstacle {
        Obstacle::new(ConvexRegion::disc(Vec2::ZERO, 1.0), vec![]).unwrap()
    }

    #[test]
    fn iota_at_origin() {
        assert_relative_eq!(iota(0.0, 1.0, 3.0).unwrap(), 2.0);
        assert_relative_eq!(iota(0.0, 2.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn iota_direct_formula() {
        // a=1, b=3, |x|=9: 1/10 + 1/100
        assert_relative_eq!(iota(9.0, 1.0, 3.0).unwrap(), 0.11, epsilon = 1e-15);
    }

    #[test]
    fn iota_rejects_small_exponents() {
        assert!(iota(1.0, 0.5, 1.0).is_err());
        assert!(iota(1.0, -0.1, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn iota_radially_nonincreasing(a in 0.0f64..4.0, b in 0.0f64..4.0, r in 0.0f64..50.0) {
            prop_assume!(a + b > 2.05);
            let v1 = iota(r, a, b).unwrap();
            let v2 = iota(r + 0.5, a, b).unwrap();
            prop_assert!(v2 <= v1 + 1e-12);
        }
    }

    #[test]
    fn total_flux_pure_assignment() {
        // B ≡ 0, single convex component with Φ(K1) = 2.5
        let obs = disc_obstacle();
        let phi = FluxAssignment(vec![2.5]);
        let out = total_flux(&phi, &ScalarField::zero(), &obs, 1e-10).unwrap();
        assert_relative_eq!(out.value, 2.5);
    }

    #[test]
    fn total_flux_gaussian_away_from_k() {
        // unit-integral Gaussian away from K, Φ(K1) = 0 → 1
        let obs = disc_obstacle();
        let sigma = 0.5f64;
        let amp = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
        let b = ScalarField::gaussian(Vec2::new(4.0, 0.0), sigma, amp);
        let phi = FluxAssignment(vec![0.0]);
        let out = total_flux(&phi, &b, &obs, 1e-9).unwrap();
        assert_relative_eq!(out.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn total_flux_point_component_correction_vanishes() {
        // point component with Φ = 1, B ≡ 0 → Φ_B = 1
        let obs = Obstacle::new(
            ConvexRegion::disc(Vec2::ZERO, 1.0),
            vec![Vec2::new(3.0, 0.0)],
        )
        .unwrap();
        let phi = FluxAssignment(vec![0.0, 1.0]);
        let out = total_flux(&phi, &ScalarField::zero(), &obs, 1e-10).unwrap();
        assert_relative_eq!(out.value, 1.0);
    }

    #[test]
    fn total_flux_additive_in_flux_shift() {
        let obs = Obstacle::new(
            ConvexRegion::disc(Vec2::ZERO, 1.0),
            vec![Vec2::new(3.0, 0.0), Vec2::new(0.0, -4.0)],
        )
        .unwrap();
        let b = ScalarField::gaussian(Vec2::new(2.0, 2.0), 0.7, 0.9);
        let phi = FluxAssignment(vec![0.4, 1.0, -2.0]);
        let shifted = FluxAssignment(vec![0.4 + 1.5, 1.0 - 0.25, -2.0 + 3.0]);
        let f1 = total_flux(&phi, &b, &obs, 1e-9).unwrap().value;
        let f2 = total_flux(&shifted, &b, &obs, 1e-9).unwrap().value;
        assert_relative_eq!(f2 - f1, 1.5 - 0.25 + 3.0, epsilon = 1e-9);
    }

    #[test]
    fn total_flux_against_brute_force_grid() {
        // compact-support B: Φ_B(0, B) = ∫ B over Λ computed by a plain grid sum
        let obs = disc_obstacle();
        let b = ScalarField::ring(Vec2::ZERO, 2.5, 0.5, 1.3);
        let phi = FluxAssignment(vec![0.0]);
        let out = total_flux(&phi, &b, &obs, 1e-9).unwrap();
        // brute force: 1200^2 grid over [-4, 4], skipping K1 (B vanishes there anyway)
        let n = 1200;
        let h = 8.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = Vec2::new(-4.0 + (i as f64 + 0.5) * h, -4.0 + (j as f64 + 0.5) * h);
                if p.norm() > 1.0 {
                    s += b.eval(p);
                }
            }
        }
        s *= h * h;
        assert_relative_eq!(out.value, s, epsilon = 2e-4);
    }

    #[test]
    fn total_flux_rejects_slow_decay() {
        let obs = disc_obstacle();
        let b = ScalarField::rational(Vec2::ZERO, 1.9, 1.0);
        assert!(total_flux(&FluxAssignment(vec![0.0]), &b, &obs, 1e-9).is_err());
    }

    #[test]
    fn convolution_bound_finite_at_origin() {
        let rep = convolution_bound_check(3.0, 3.0, &[0.0]).unwrap();
        assert!(rep.samples[0].1.is_finite());
        assert!(rep.max_ratio > 0.0);
    }

    #[test]
    fn convolution_ratio_stable_far_field() {
        // ratio at |x| = 50 within 2x of the ratio at |x| = 10 for a=1, b=3
        let rep = convolution_bound_check(1.0, 3.0, &[10.0, 50.0]).unwrap();
        let r10 = rep.samples[0].2;
        let r50 = rep.samples[1].2;
        assert!(r50 < 2.0 * r10, "ratio grew: {r10} → {r50}");
        assert!(r50 > 0.5 * r10, "ratio collapsed: {r10} → {r50}");
    }

    #[test]
    fn convolution_bound_rejects_bad_exponents() {
        assert!(convolution_bound_check(0.5, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn gaussian_field_decay_constant_is_finite() {
        let b = ScalarField::gaussian(Vec2::new(1.0, 0.0), 0.8, 2.0);
        let c = b.fitted_decay_constant();
        assert!(c.is_finite());
        //: |B| ≤ C (1+|x|)^-mu on fresh samples
        for k in 0..10 {
            let p = Vec2::from_angle(0.37 * k as f64) * (6.0 + k as f64);
            assert!(b.eval(p).abs() <= c * (1.0 + p.norm()).powf(-b.decay_mu) + 1e-300);
        }
    }

    #[test]
    fn ring_integral_matches_cumulative_flux_limit() {
        let ring = FieldShape::Ring {
            center: Vec2::ZERO,
            r0: 2.0,
            width: 0.5,
            amplitude: 1.1,
        };
        assert_relative_eq!(
            ring.integral(),
            ring.cumulative_flux(1e6),
            max_relative = 1e-12
        );
    }
}
