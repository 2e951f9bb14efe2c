//! Potential building blocks. A vector potential is a sum of parts, each with
//! a pointwise evaluation and a whole-line integral of its tangential
//! component (exact where a closed form exists, decay-aware quadrature
//! otherwise).

use crate::fields::FieldShape;
use crate::geometry::{Line, Vec2, POINT_EXCLUSION};
use crate::quad;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// C^∞ bump supported in the disc of `radius` around `center`, scaled to
/// carry total integral `beta`.
#[derive(Debug, Clone)]
pub struct BumpField {
    pub center: Vec2,
    pub radius: f64,
    /// peak amplitude; integral = beta by construction
    amplitude: f64,
    beta: f64,
}

impl BumpField {
    /// ∫ of exp(1 − 1/(1−t²)) over the unit disc (t = |y|), peak value 1.
    fn unit_mass(radius: f64) -> f64 {
        let f = |r: f64| {
            let t = r / radius;
            if t >= 1.0 {
                0.0
            } else {
                r * (1.0 - 1.0 / (1.0 - t * t)).exp()
            }
        };
        TWO_PI * quad::integrate(&f, 0.0, radius, 80)
    }

    pub fn with_integral(center: Vec2, radius: f64, beta: f64) -> Self {
        let amplitude = beta / Self::unit_mass(radius);
        BumpField {
            center,
            radius,
            amplitude,
            beta,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        let t = (p - self.center).norm() / self.radius;
        if t >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }

    /// Cumulative flux about the bump center.
    pub fn cumulative_flux(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.radius {
            return self.beta;
        }
        let f = |s: f64| {
            let t = s / self.radius;
            s * (1.0 - 1.0 / (1.0 - t * t)).exp()
        };
        TWO_PI * self.amplitude * quad::integrate(&f, 0.0, r, 60)
    }

    /// Parameter interval where the segment q + τ·w crosses the support.
    pub fn segment_interval(&self, q: Vec2, w: Vec2) -> Option<(f64, f64)> {
        let d = q - self.center;
        let a = w.norm2();
        if a == 0.0 {
            return None;
        }
        let b = 2.0 * d.dot(w);
        let c = d.norm2() - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
    }
}

/// The cone-gauge angular function f: homogeneous of degree 0, zero within
/// ε/2 of the axis direction θ0, equal to the branch angle θ on
/// [θ0+ε, θ0+2π−ε], C^∞ via an exponential smoothstep.
#[derive(Debug, Clone)]
pub struct ConeAngleFn {
    pub theta0: f64,
    pub eps: f64,
}

fn smooth01(t: f64) -> f64 {
    // classic C^∞ step: 0 for t<=0, 1 for t>=1
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

fn smooth01_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        let da = a / (t * t);
        let db = -b / ((1.0 - t) * (1.0 - t));
        (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
    }
}

impl ConeAngleFn {
    /// Branch angle δ ∈ [0, 2π) of `p` relative to θ0.
    fn delta(&self, p: Vec2) -> f64 {
        let mut d = p.angle() - self.theta0;
        while d < 0.0 {
            d += TWO_PI;
        }
        while d >= TWO_PI {
            d -= TWO_PI;
        }
        d
    }

    /// f and df/dδ at branch angle δ.
    fn value_and_slope(&self, d: f64) -> (f64, f64) {
        let e = self.eps;
        let th = self.theta0;
        if d <= 0.5 * e {
            (0.0, 0.0)
        } else if d < e {
            let t = (d - 0.5 * e) / (0.5 * e);
            let s = smooth01(t);
            let ds = smooth01_deriv(t) / (0.5 * e);
            (s * (th + d), ds * (th + d) + s)
        } else if d <= TWO_PI - e {
            (th + d, 1.0)
        } else if d < TWO_PI - 0.5 * e {
            let t = (d - (TWO_PI - e)) / (0.5 * e);
            let s = 1.0 - smooth01(t);
            let ds = -smooth01_deriv(t) / (0.5 * e);
            (s * (th + d), ds * (th + d) + s)
        } else {
            (0.0, 0.0)
        }
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        self.value_and_slope(self.delta(p)).0
    }

    /// ∇f(p) = f'(δ) · p⊥/|p|².
    pub fn grad(&self, p: Vec2) -> Vec2 {
        let (_, slope) = self.value_and_slope(self.delta(p));
        p.perp() * (slope / p.norm2())
    }

    /// Directional limit of f along the ray with direction `v` (homogeneity).
    pub fn limit_along(&self, v: Vec2) -> f64 {
        self.value_and_slope(self.delta(v)).0
    }
}

/// A summand of a vector potential.
#[derive(Debug, Clone)]
pub enum PotentialPart {
    /// coeff · A⁽ʳ⁾ kernel: coeff/(2π) · (x−center)⊥ / |x−center|².
    Ab { center: Vec2, coeff: f64 },
    /// Coulomb potential of a radial library shape (exact cumulative-flux
    /// form M(r)/(2πr²)·(x−c)⊥).
    RadialCoulomb { shape: FieldShape },
    /// Coulomb potential of `scale` × bump.
    BumpCoulomb { bump: BumpField, scale: f64 },
    /// Coulomb potential of an anisotropic Gaussian via the heat-kernel
    /// representation (1D quadrature per evaluation).
    AnisoCoulomb {
        center: Vec2,
        sigma: Vec2,
        amplitude: f64,
    },
    /// coeff · A^{(l,f)} = coeff·(AB kernel − ∇f/2π) at `center`: supported in
    /// the cone of half-angle ε about θ0; the plateau region cancels exactly.
    ConeAbPair { center: Vec2, f: ConeAngleFn, coeff: f64 },
    /// A^{(Q)}: (x−q)⊥ ∫₀¹ h(q + τ(x−q)) τ dτ, supported in a cone from q.
    PoincareBump { q: Vec2, bump: BumpField },
    /// Transversal gauge of a bump: x⊥ ∫₀¹ τ h(τx) dτ.
    TransversalBump { bump: BumpField },
}

impl PotentialPart {
    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        match self {
            PotentialPart::Ab { center, coeff } => {
                let w = x - *center;
                let r2 = w.norm2();
                if r2 <= POINT_EXCLUSION * POINT_EXCLUSION {
                    return Err(Error::gauge(format!(
                        "evaluation inside the exclusion radius of ({}, {})",
                        center.x, center.y
                    )));
                }
                Ok(w.perp() * (coeff / (TWO_PI * r2)))
            }
            PotentialPart::RadialCoulomb { shape } => {
                let c = shape.radial_center().expect("radial shape");
                let w = x - c;
                let r = w.norm();
                if r < 1e-12 {
                    return Ok(Vec2::ZERO);
                }
                Ok(w.perp() * (shape.cumulative_flux(r) / (TWO_PI * r * r)))
            }
            PotentialPart::BumpCoulomb { bump, scale } => {
                let w = x - bump.center;
                let r = w.norm();
                if r < 1e-12 {
                    return Ok(Vec2::ZERO);
                }
                Ok(w.perp() * (scale * bump.cumulative_flux(r) / (TWO_PI * r * r)))
            }
            PotentialPart::AnisoCoulomb {
                center,
                sigma,
                amplitude,
            } => Ok(aniso_coulomb_eval(*center, *sigma, *amplitude, x)),
            PotentialPart::ConeAbPair { center, f, coeff } => {
                let w = x - *center;
                let r2 = w.norm2();
                if r2 <= POINT_EXCLUSION * POINT_EXCLUSION {
                    return Err(Error::gauge("cone pair evaluated at its center"));
                }
                let (_, slope) = f.value_and_slope(f.delta(w));
                // (1 − slope) vanishes exactly on the plateau, so the pair is
                // identically zero outside the cone
                Ok(w.perp() * (coeff * (1.0 - slope) / (TWO_PI * r2)))
            }
            PotentialPart::PoincareBump { q, bump } => {
                let w = x - *q;
                let integral = match bump.segment_interval(*q, w) {
                    None => 0.0,
                    Some((t1, t2)) => {
                        let lo = t1.max(0.0);
                        let hi = t2.min(1.0);
                        if hi <= lo {
                            0.0
                        } else {
                            quad::integrate(&|t: f64| bump.eval(*q + w * t) * t, lo, hi, 24)
                        }
                    }
                };
                Ok(w.perp() * integral)
            }
            PotentialPart::TransversalBump { bump } => {
                let integral = match bump.segment_interval(Vec2::ZERO, x) {
                    None => 0.0,
                    Some((t1, t2)) => {
                        let lo = t1.max(0.0);
                        let hi = t2.min(1.0);
                        if hi <= lo {
                            0.0
                        } else {
                            quad::integrate(&|t: f64| bump.eval(x * t) * t, lo, hi, 24)
                        }
                    }
                };
                Ok(x.perp() * integral)
            }
        }
    }

    /// Whole-line integral ∫ v̂·part(x+τv̂) dτ.
    pub fn line_integral(&self, line: &Line, tol: f64) -> Result<f64> {
        match self {
            PotentialPart::Ab { center, coeff } => {
                let c0 = (line.anchor() - *center).cross(line.dir());
                if c0.abs() <= POINT_EXCLUSION {
                    return Err(Error::gauge("line passes through an AB singularity"));
                }
                Ok(0.5 * coeff * c0.signum())
            }
            PotentialPart::RadialCoulomb { shape } => {
                let c = shape.radial_center().expect("radial shape");
                let total = shape.integral();
                let reff = shape.effective_radius();
                radial_line_integral(line, c, total, reff, &|r| shape.cumulative_flux(r), tol)
            }
            PotentialPart::BumpCoulomb { bump, scale } => {
                let total = scale * bump.beta();
                radial_line_integral(
                    line,
                    bump.center,
                    total,
                    Some(bump.radius),
                    &|r| scale * bump.cumulative_flux(r),
                    tol,
                )
            }
            PotentialPart::AnisoCoulomb {
                center,
                sigma,
                amplitude,
            } => {
                let total = amplitude * TWO_PI * sigma.x * sigma.y;
                let reff = 9.0 * sigma.x.max(sigma.y);
                // exact AB tail for the monopole part + quadrature of the
                // residual, which decays like a dipole (1/τ²)
                let ab = PotentialPart::Ab {
                    center: *center,
                    coeff: total,
                };
                let ab_val = ab.line_integral(line, tol)?;
                let dir = line.dir();
                let residual = |t: f64| {
                    let x = line.point_at(t);
                    let a = aniso_coulomb_eval(*center, *sigma, *amplitude, x);
                    let abv = ab.eval(x).unwrap_or(Vec2::ZERO);
                    dir.dot(a - abv)
                };
                let t0 = line.project(*center);
                let (res, _) =
                    quad::integrate_real_line(&residual, (t0 - reff - 4.0, t0 + reff + 4.0), tol)?;
                Ok(ab_val + res)
            }
            PotentialPart::ConeAbPair { center, f, coeff } => {
                // AB part: ±coeff/2; ∇f part by homogeneity:
                // ∫ v̂·∇f(x−c+τv̂) dτ = f(+v̂ limit) − f(−v̂ limit)
                let c0 = (line.anchor() - *center).cross(line.dir());
                if c0.abs() <= POINT_EXCLUSION {
                    return Err(Error::gauge("line passes through the cone-pair center"));
                }
                let up = f.limit_along(line.dir());
                let down = f.limit_along(-line.dir());
                Ok(coeff * (0.5 * c0.signum() - (up - down) / TWO_PI))
            }
            PotentialPart::PoincareBump { q, bump } => {
                // decays like the AB kernel from q along any exterior line;
                // integrate with an AB-model tail using the carried flux beta
                let dir = line.dir();
                let g = |t: f64| {
                    let x = line.point_at(t);
                    match self.eval(x) {
                        Ok(v) => dir.dot(v),
                        Err(_) => 0.0,
                    }
                };
                let tq = line.project(*q);
                let span = (bump.center - *q).norm() + bump.radius + 4.0;
                let (v, _) = quad::integrate_real_line(&g, (tq - 4.0 * span, tq + 4.0 * span), tol)?;
                Ok(v)
            }
            PotentialPart::TransversalBump { bump } => {
                let dir = line.dir();
                let g = |t: f64| {
                    let x = line.point_at(t);
                    match self.eval(x) {
                        Ok(v) => dir.dot(v),
                        Err(_) => 0.0,
                    }
                };
                let span = bump.center.norm() + bump.radius + 4.0;
                let (v, _) = quad::integrate_real_line(&g, (-4.0 * span, 4.0 * span), tol)?;
                Ok(v)
            }
        }
    }

    /// Singular centers (evaluation must stay away from these).
    pub fn singular_center(&self) -> Option<Vec2> {
        match self {
            PotentialPart::Ab { center, .. } | PotentialPart::ConeAbPair { center, .. } => {
                Some(*center)
            }
            _ => None,
        }
    }
}

/// Line integral of a radial Coulomb part: exact AB tail for the carried
/// total flux plus quadrature of the compact/fast-decaying residual.
fn radial_line_integral(
    line: &Line,
    center: Vec2,
    total: f64,
    reff: Option<f64>,
    cumflux: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64> {
    let w0 = line.anchor() - center;
    let c0 = w0.cross(line.dir());
    let a0 = w0.dot(line.dir());
    if c0.abs() <= POINT_EXCLUSION {
        // line through the radial center: v̂·A ≡ 0 by symmetry
        return Ok(0.0);
    }
    let ab_total = 0.5 * total * c0.signum();
    // residual integrand: (M(r) − total)·c0 / (2π r²), r² = (τ+a0)² + c0²
    let g = |t: f64| {
        let r2 = (t + a0) * (t + a0) + c0 * c0;
        (cumflux(r2.sqrt()) - total) * c0 / (TWO_PI * r2)
    };
    match reff {
        Some(reff) => {
            // residual vanishes identically beyond the support chord
            let half = (reff * reff - c0 * c0).max(0.0).sqrt() + 1.0;
            let (v, _) = quad::adaptive(&g, -a0 - half, -a0 + half, tol)?;
            Ok(ab_total + v)
        }
        None => {
            let (v, _) = quad::integrate_real_line(&g, (-a0 - 16.0, -a0 + 16.0), tol)?;
            Ok(ab_total + v)
        }
    }
}

/// Coulomb potential of an anisotropic Gaussian, via A = (∇φ)⊥ with
/// Δφ = B and the heat-kernel integral ∇φ = ∫₀^∞ D_t⁻¹w · e^{tΔ}B dt written
/// in the variable z = 1/(2t + σ_min²) (finite smooth integral).
fn aniso_coulomb_eval(center: Vec2, sigma: Vec2, amplitude: f64, x: Vec2) -> Vec2 {
    let w = x - center;
    if w.norm2() < 1e-24 {
        return Vec2::ZERO;
    }
    let d1 = sigma.x * sigma.x;
    let d2 = sigma.y * sigma.y;
    let dmin = d1.min(d2);
    let e1 = d1 - dmin;
    let e2 = d2 - dmin;
    let sqrt_det_d = (d1 * d2).sqrt();
    // grad φ = ∫_0^{1/dmin} G(z) dz / 2 with v = 1/z, D_v = vI + E
    let g = |z: f64| -> Vec2 {
        if z <= 0.0 {
            // limit z→0: amplitude · sqrt(det D) · w
            return w * (amplitude * sqrt_det_d);
        }
        let v = 1.0 / z;
        let dv1 = v + e1;
        let dv2 = v + e2;
        let q1 = w.x / dv1;
        let q2 = w.y / dv2;
        let quad_form = w.x * q1 + w.y * q2;
        let scale = amplitude * sqrt_det_d / (dv1 * dv2).sqrt() * (-0.5 * quad_form).exp() / (z * z);
        Vec2::new(q1, q2) * scale
    };
    let n = 48;
    let (nodes, weights) = quad::gauss_legendre(n);
    let hi = 1.0 / dmin;
    let mut acc = Vec2::ZERO;
    // two panels: [0, hi/8] (far-field scales) and [hi/8, hi]
    for (a, b) in [(0.0, hi / 8.0), (hi / 8.0, hi)] {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (xn, wn) in nodes.iter().zip(&weights) {
            acc = acc + g(c + h * xn) * (*wn * h);
        }
    }
    let grad_phi = acc * 0.5;
    grad_phi.perp()
}
