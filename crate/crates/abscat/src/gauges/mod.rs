//! Magnetic potential constructors and gauge machinery: the cohomology basis
//! potentials A⁽ʳ⁾, the Coulomb, cone and transversal gauges, circulations,
//! gauge functions λ and their limits λ∞, the long-range part A∞, and the
//! decay-class membership report.

mod classcheck;
mod longrange;
mod parts;

pub use classcheck::{class_membership_check_fn, ClassBound, ClassReport};
pub use longrange::{
    gauge_function, gauge_function_two_paths, lambda_gap_profile, lambda_infinity,
    line_phase_checked, long_range_part, uniform_thetas, LambdaInfinity, LongRangePart,
};
pub use parts::{BumpField, ConeAngleFn, PotentialPart};

use crate::fields::{total_flux, FieldShape, FluxAssignment, ScalarField};
use crate::geometry::{ConvexRegion, Line, Obstacle, Vec2};
use crate::quad;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Default tolerance for circulation identities.
pub const CIRCULATION_TOL: f64 = 1e-8;
/// Default tolerance for finite-difference curl checks (relative).
pub const CURL_TOL: f64 = 1e-3;
/// Default tolerance on the radial residual of the long-range part.
pub const AINF_RADIAL_TOL: f64 = 1e-4;

/// Constructor provenance of a potential.
#[derive(Debug, Clone)]
pub enum GaugeTag {
    Basis { r: usize },
    Coulomb,
    Cone { w_hat: Vec2, eps: f64, q0: Vec2 },
    Transversal,
    Sum,
}

/// Evaluable plane vector field with flux assignment, associated magnetic
/// field, gauge-class metadata and constructor provenance.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    parts: Vec<PotentialPart>,
    pub flux: FluxAssignment,
    pub field: ScalarField,
    /// δ > 1 declaring membership in the second potential class.
    pub class_delta: Option<f64>,
    pub tag: GaugeTag,
}

impl VectorPotential {
    pub fn from_parts(
        parts: Vec<PotentialPart>,
        flux: FluxAssignment,
        field: ScalarField,
        class_delta: Option<f64>,
        tag: GaugeTag,
    ) -> Self {
        VectorPotential {
            parts,
            flux,
            field,
            class_delta,
            tag,
        }
    }

    pub fn parts(&self) -> &[PotentialPart] {
        &self.parts
    }

    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        let mut v = Vec2::ZERO;
        for p in &self.parts {
            v = v + p.eval(x)?;
        }
        Ok(v)
    }

    /// Whole-line integral of the tangential component, a(A, v̂, x) for the
    /// line {x + τv̂}.
    pub fn line_integral(&self, line: &Line, tol: f64) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.parts {
            s += p.line_integral(line, tol)?;
        }
        Ok(s)
    }

    /// Sum of two potentials (fluxes and fields add).
    pub fn sum(a: &VectorPotential, b: &VectorPotential) -> Result<VectorPotential> {
        if a.flux.len() != b.flux.len() {
            return Err(Error::gauge("summing potentials over different obstacles"));
        }
        let mut parts = a.parts.clone();
        parts.extend(b.parts.iter().cloned());
        let flux = FluxAssignment(
            a.flux
                .0
                .iter()
                .zip(&b.flux.0)
                .map(|(x, y)| x + y)
                .collect(),
        );
        let mut components = a.field.components.clone();
        components.extend(b.field.components.iter().cloned());
        let field = ScalarField {
            components,
            decay_mu: a.field.decay_mu.min(b.field.decay_mu),
            support_hint: None,
            smoothness: a.field.smoothness.min(b.field.smoothness),
        };
        let class_delta = match (a.class_delta, b.class_delta) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        Ok(VectorPotential::from_parts(
            parts,
            flux,
            field,
            class_delta,
            GaugeTag::Sum,
        ))
    }

    /// Circulation ∮ A over the surrounding curve γ_l of component `l`.
    pub fn circulation(&self, obs: &Obstacle, l: usize) -> Result<f64> {
        circulation_of(&|p| self.eval(p), obs, l)
    }

    /// Max |∮_{γ_l} A − Φ(K_l)| over all components.
    pub fn max_circulation_error(&self, obs: &Obstacle) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for l in 0..obs.n_components() {
            let c = self.circulation(obs, l)?;
            worst = worst.max((c - self.flux.0[l]).abs());
        }
        Ok(worst)
    }

    /// Finite-difference curl at `x` (4th-order central stencil).
    pub fn curl_fd(&self, x: Vec2, h: f64) -> Result<f64> {
        let a2 = |p: Vec2| -> Result<f64> { Ok(self.eval(p)?.y) };
        let a1 = |p: Vec2| -> Result<f64> { Ok(self.eval(p)?.x) };
        let d1a2 = (-a2(x + Vec2::new(2.0 * h, 0.0))? + 8.0 * a2(x + Vec2::new(h, 0.0))?
            - 8.0 * a2(x - Vec2::new(h, 0.0))?
            + a2(x - Vec2::new(2.0 * h, 0.0))?)
            / (12.0 * h);
        let d2a1 = (-a1(x + Vec2::new(0.0, 2.0 * h))? + 8.0 * a1(x + Vec2::new(0.0, h))?
            - 8.0 * a1(x - Vec2::new(0.0, h))?
            + a1(x - Vec2::new(0.0, 2.0 * h))?)
            / (12.0 * h);
        Ok(d1a2 - d2a1)
    }

    /// Max relative curl error |curl A − B| / max(|B|, floor) over an n×n
    /// exterior sample grid covering `extent` around the obstacle.
    pub fn max_curl_error(&self, obs: &Obstacle, n: usize, extent: f64) -> Result<f64> {
        let (c, r) = obs.bounding_disc();
        let b_scale = (0..n * n)
            .map(|i| {
                let (ix, iy) = (i % n, i / n);
                let p = grid_point(c, extent, n, ix, iy);
                self.field.eval(p).abs()
            })
            .fold(0.0, f64::max)
            .max(1e-12);
        let mut worst: f64 = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                let p = grid_point(c, extent, n, ix, iy);
                if obs.distance(p) < 0.15 * r.max(0.5) + 0.05 {
                    continue;
                }
                let curl = self.curl_fd(p, 2e-4)?;
                let b = self.field.eval(p);
                worst = worst.max((curl - b).abs() / b_scale);
            }
        }
        Ok(worst)
    }

    /// Fit C in |A(x)| ≤ C/(1+|x|) on sampled rays and verify the outer far
    /// field stays below 2C.
    pub fn check_far_field_envelope(&self) -> Result<(f64, bool)> {
        let mut c_inner: f64 = 0.0;
        let mut outer_ok = true;
        for k in 0..16 {
            let v = Vec2::from_angle(TWO_PI * k as f64 / 16.0);
            for e in 3..=7 {
                let s = 2.0f64.powi(e);
                let m = self.eval(v * s)?.norm() * (1.0 + s);
                c_inner = c_inner.max(m);
            }
        }
        for k in 0..16 {
            let v = Vec2::from_angle(TWO_PI * (k as f64 + 0.5) / 16.0);
            for e in 8..=12 {
                let s = 2.0f64.powi(e);
                let m = self.eval(v * s)?.norm() * (1.0 + s);
                if m > 2.0 * c_inner + 1e-12 {
                    outer_ok = false;
                }
            }
        }
        Ok((c_inner, outer_ok))
    }

    /// Decay-class report for the declared (or given) δ.
    pub fn class_membership_check(&self, delta: f64) -> ClassReport {
        class_membership_check_fn(|x| self.eval(x).unwrap_or(Vec2::ZERO), delta)
    }
}

fn grid_point(center: Vec2, extent: f64, n: usize, ix: usize, iy: usize) -> Vec2 {
    let h = 2.0 * extent / (n as f64 - 1.0);
    Vec2::new(
        center.x - extent + ix as f64 * h,
        center.y - extent + iy as f64 * h,
    )
}

/// Circulation of an arbitrary field over γ_l (trapezoid on circles,
/// Gauss–Legendre on polygon edges).
pub fn circulation_of(
    f: &dyn Fn(Vec2) -> Result<Vec2>,
    obs: &Obstacle,
    l: usize,
) -> Result<f64> {
    if l >= obs.n_components() {
        return Err(Error::gauge(format!("component {l} does not exist")));
    }
    if l == 0 {
        match obs.convex() {
            ConvexRegion::Disc { center, radius } => {
                circulation_circle_res(f, *center, *radius, 512)
            }
            ConvexRegion::Polygon { vertices } => {
                let mut s = 0.0;
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let dir = b - a;
                    let g = |t: f64| -> f64 {
                        f(a + dir * t).map(|v| v.dot(dir)).unwrap_or(f64::NAN)
                    };
                    let (v, _) = quad::adaptive(&g, 0.0, 1.0, 1e-11)?;
                    if v.is_nan() {
                        return Err(Error::gauge("singular evaluation on polygon boundary"));
                    }
                    s += v;
                }
                Ok(s)
            }
        }
    } else {
        let c = obs.points()[l - 1];
        circulation_circle_res(f, c, obs.gamma_radius(), 512)
    }
}

fn circulation_circle_res(
    f: &dyn Fn(Vec2) -> Result<Vec2>,
    center: Vec2,
    radius: f64,
    _n: usize,
) -> Result<f64> {
    // adaptive panels in the angle: resolves the cone-gauge smoothstep ramps
    // that a uniform rule misses
    let g = |th: f64| {
        let p = center + Vec2::from_angle(th) * radius;
        let tang = Vec2::new(-th.sin(), th.cos());
        f(p).map(|v| v.dot(tang)).unwrap_or(f64::NAN)
    };
    let (v, _) = quad::adaptive(&g, 0.0, TWO_PI, 1e-12)?;
    if v.is_nan() {
        return Err(Error::gauge("singular evaluation on a circulation curve"));
    }
    Ok(v * radius)
}

/// Basis potential A⁽ʳ⁾ of the 1-cohomology of Λ: circulation δ_{kr},
/// curl = δ(x − x⁽ʳ⁾).
pub fn basis_potential(r: usize, obs: &Obstacle) -> Result<VectorPotential> {
    if r >= obs.n_components() {
        return Err(Error::gauge(format!(
            "basis potential: component {r} of {} does not exist",
            obs.n_components()
        )));
    }
    let center = obs.component_anchor(r);
    let mut flux = FluxAssignment::zeros(obs.n_components());
    flux.0[r] = 1.0;
    Ok(VectorPotential::from_parts(
        vec![PotentialPart::Ab { center, coeff: 1.0 }],
        flux,
        ScalarField::zero(),
        Some(3.0),
        GaugeTag::Basis { r },
    ))
}

/// Coulomb-potential parts of a library field (one per component).
fn coulomb_parts_of_field(b: &ScalarField) -> Result<Vec<PotentialPart>> {
    let mut parts = Vec::new();
    for shape in &b.components {
        match shape {
            FieldShape::Gaussian { center, sigma, amplitude } if sigma.x != sigma.y => {
                parts.push(PotentialPart::AnisoCoulomb {
                    center: *center,
                    sigma: *sigma,
                    amplitude: *amplitude,
                });
            }
            s => {
                if s.radial_center().is_none() {
                    return Err(Error::gauge("field component without a Coulomb fast path"));
                }
                parts.push(PotentialPart::RadialCoulomb { shape: s.clone() });
            }
        }
    }
    Ok(parts)
}

fn circulation_of_parts(parts: &[PotentialPart], obs: &Obstacle, l: usize) -> Result<f64> {
    circulation_of(
        &|p| {
            let mut v = Vec2::ZERO;
            for part in parts {
                v = v + part.eval(p)?;
            }
            Ok(v)
        },
        obs,
        l,
    )
}

/// The Coulomb magnetic potential: divergence-free potential of the extension
/// B̄ plus circulation corrections along the basis potentials.
pub fn coulomb_gauge(
    b: &ScalarField,
    phi: &FluxAssignment,
    obs: &Obstacle,
) -> Result<VectorPotential> {
    phi.validate(obs)?;
    if b.decay_mu <= 2.0 {
        return Err(Error::gauge("Coulomb gauge requires decay exponent μ > 2"));
    }
    let mut parts = coulomb_parts_of_field(b)?;
    let mut all = Vec::new();
    for l in 0..obs.n_components() {
        let c = circulation_of_parts(&parts, obs, l)?;
        all.push((obs.component_anchor(l), phi.0[l] - c));
    }
    for (center, coeff) in all {
        if coeff != 0.0 {
            parts.push(PotentialPart::Ab { center, coeff });
        }
    }
    Ok(VectorPotential::from_parts(
        parts,
        phi.clone(),
        b.clone(),
        Some((b.decay_mu - 1.0).max(1.01)),
        GaugeTag::Coulomb,
    ))
}

/// Short-range remainder A⁽ˢ⁾ = A⁽ᶜ⁾ − (Φ_B/2π)·AB(x⁰) of the Coulomb gauge;
/// its far-field decay is the separate estimate the construction promises.
pub fn coulomb_shortrange_remainder<'a>(
    a_coulomb: &'a VectorPotential,
    obs: &Obstacle,
    x0: Vec2,
) -> Result<impl Fn(Vec2) -> Result<Vec2> + 'a> {
    if obs.distance(x0) > 1e-12 {
        return Err(Error::gauge("x0 must lie in the obstacle"));
    }
    let phi_b = total_flux(&a_coulomb.flux, &a_coulomb.field, obs, 1e-10)?.value;
    let ab = PotentialPart::Ab {
        center: x0,
        coeff: phi_b,
    };
    Ok(move |x: Vec2| Ok(a_coulomb.eval(x)? - ab.eval(x)?))
}

/// The cone magnetic potential: A₁ (Coulomb of B̄ − h) + A₂ supported in the
/// cone of half-angle `eps` about `w_hat` from an auto-chosen apex Q₀.
pub fn cone_gauge(
    b: &ScalarField,
    phi: &FluxAssignment,
    obs: &Obstacle,
    w_hat: Vec2,
    eps: f64,
) -> Result<VectorPotential> {
    phi.validate(obs)?;
    if !(eps > 0.0 && eps <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::gauge(format!(
            "cone half-angle must lie in (0, π/2], got {eps}"
        )));
    }
    let w_hat = w_hat.unit();
    let beta = b.integral();
    let mut parts = coulomb_parts_of_field(b)?;

    // h carries β inside B₁(0); the gradient corrections use a slightly
    // narrower angle so every piece stays strictly inside the requested cone
    let eps_f = 0.75 * eps;
    let h = if beta != 0.0 {
        Some(BumpField::with_integral(Vec2::ZERO, 1.0, beta))
    } else {
        None
    };
    if let Some(h) = &h {
        parts.push(PotentialPart::BumpCoulomb {
            bump: h.clone(),
            scale: -1.0,
        });
    }

    // apex far enough back that rays from q0 through B₁(0) and the shifted
    // sub-cones from the component centers stay within the eps cone
    let (oc, orad) = obs.bounding_disc();
    let reach = oc.norm() + orad + 1.0;
    let q = (reach + 2.0) / (0.25 * eps).sin();
    let q0 = -w_hat * q;

    let mut a2_parts: Vec<PotentialPart> = Vec::new();
    if let Some(h) = &h {
        a2_parts.push(PotentialPart::PoincareBump {
            q: q0,
            bump: h.clone(),
        });
    }
    let theta0 = w_hat.angle();
    // circulations of A1 + A^{(Q)} decide the correction coefficients
    let base: Vec<PotentialPart> = parts.iter().chain(a2_parts.iter()).cloned().collect();
    for l in 0..obs.n_components() {
        let c = circulation_of_parts(&base, obs, l)?;
        let coeff = phi.0[l] - c;
        if coeff != 0.0 {
            let center = obs.component_anchor(l);
            a2_parts.push(PotentialPart::ConeAbPair {
                center,
                f: ConeAngleFn { theta0, eps: eps_f },
                coeff,
            });
        }
    }
    parts.extend(a2_parts);
    Ok(VectorPotential::from_parts(
        parts,
        phi.clone(),
        b.clone(),
        Some((b.decay_mu - 1.0).max(1.01)),
        GaugeTag::Cone {
            w_hat,
            eps,
            q0,
        },
    ))
}

/// Evaluate only the cone part A₂ of a cone-gauge potential (support check).
pub fn cone_a2_eval(a: &VectorPotential, x: Vec2) -> Result<Vec2> {
    let mut v = Vec2::ZERO;
    for p in a.parts() {
        match p {
            PotentialPart::PoincareBump { .. } | PotentialPart::ConeAbPair { .. } => {
                v = v + p.eval(x)?;
            }
            _ => {}
        }
    }
    Ok(v)
}

/// The transversal gauge: A₁ + A_{h,T} + circulation corrections, with
/// A_{h,T}(x) = −x × ∫₀¹ τ h(τx) dτ. The bump h sits off-center inside B₁(0)
/// so the construction differs genuinely from the Coulomb gauge.
pub fn transversal_gauge(
    b: &ScalarField,
    phi: &FluxAssignment,
    obs: &Obstacle,
) -> Result<VectorPotential> {
    phi.validate(obs)?;
    if b.decay_mu <= 2.0 {
        return Err(Error::gauge("transversal gauge requires μ > 2"));
    }
    let beta = b.integral();
    let mut parts = coulomb_parts_of_field(b)?;
    if beta != 0.0 {
        let h = BumpField::with_integral(Vec2::new(0.25, 0.15), 0.6, beta);
        parts.push(PotentialPart::BumpCoulomb {
            bump: h.clone(),
            scale: -1.0,
        });
        parts.push(PotentialPart::TransversalBump { bump: h });
    }
    let mut corrections = Vec::new();
    for l in 0..obs.n_components() {
        let c = circulation_of_parts(&parts, obs, l)?;
        let coeff = phi.0[l] - c;
        if coeff != 0.0 {
            corrections.push(PotentialPart::Ab {
                center: obs.component_anchor(l),
                coeff,
            });
        }
    }
    parts.extend(corrections);
    Ok(VectorPotential::from_parts(
        parts,
        phi.clone(),
        b.clone(),
        Some((b.decay_mu - 1.0).max(1.01)),
        GaugeTag::Transversal,
    ))
}

/// Independent-oracle Coulomb convolution: singularity-split quadrature of
/// ∫ (1/2π)(x−y)⊥/|x−y|² B(y) dy (polar within |y−x| < 1, annulus outside).
/// Requires every component to have an effective support radius.
pub fn coulomb_convolution_quad(b: &ScalarField, x: Vec2) -> Result<Vec2> {
    let mut reach: f64 = 0.0;
    for c in &b.components {
        let r = c
            .effective_radius()
            .ok_or_else(|| Error::gauge("convolution oracle needs compact-ish components"))?;
        reach = reach.max((x - c.center()).norm() + r);
    }
    let reach = reach.max(2.0);
    // inner polar patch around the singularity
    let n_r = 24;
    let n_t = 96;
    let (nodes, weights) = quad::gauss_legendre(n_r);
    let mut acc = Vec2::ZERO;
    for (rn, rw) in nodes.iter().zip(&weights) {
        let rho = 0.5 * (rn + 1.0);
        let w = 0.5 * rw;
        for k in 0..n_t {
            let th = TWO_PI * (k as f64 + 0.5) / n_t as f64;
            let u = Vec2::from_angle(th);
            // kernel(w)·ρ dρ dθ with w = ρu: (1/2π) u⊥ B(x − ρu)
            acc = acc + u.perp() * (b.eval(x - u * rho) * w / TWO_PI * (TWO_PI / n_t as f64));
        }
    }
    // annulus 1..reach in polar around x
    let n_r2 = 64;
    let (nodes2, weights2) = quad::gauss_legendre(n_r2);
    for (rn, rw) in nodes2.iter().zip(&weights2) {
        let rho = 1.0 + 0.5 * (reach - 1.0) * (rn + 1.0);
        let w = 0.5 * (reach - 1.0) * rw;
        for k in 0..n_t {
            let th = TWO_PI * (k as f64 + 0.5) / n_t as f64;
            let u = Vec2::from_angle(th);
            acc = acc + u.perp() * (b.eval(x - u * rho) * w / TWO_PI * (TWO_PI / n_t as f64));
        }
    }
    Ok(acc)
}
