//! Forward synthesis of high-velocity scattering data (the exact first- and
//! second-order limits) and the grid propagator that approximates the true
//! scattering operator at finite speed.

mod propagator;
mod second_order;

pub use propagator::{
    free_evolve_cn_matched, numeric_scattering_element, propagate, PropagatorCfg,
    ScatteringDiagnostics, ScatteringRun,
};
pub use second_order::{second_order_data, xi_integrated_apply, SecondOrderBreakdown};

use crate::gauges::VectorPotential;
use crate::geometry::{Obstacle, Vec2};
use crate::raster::RasterSpec;
use crate::transforms::{phase_factor_sinogram, PhaseFactorSinogram};
use crate::Result;
use num_complex::Complex64;

/// Complex grid function with velocity boost parameters.
#[derive(Debug, Clone)]
pub struct WavePacket {
    pub spec: RasterSpec,
    pub values: Vec<Complex64>,
    /// velocity boost v (φ_v = e^{im v·x} φ₀); zero for unboosted packets
    pub boost: Vec2,
    pub mass: f64,
}

impl WavePacket {
    /// L²-normalized Gaussian window with an optional plane-wave modulation.
    pub fn gaussian(spec: RasterSpec, center: Vec2, sigma: f64, k_mod: Vec2) -> WavePacket {
        let nx = spec.nx;
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
        let values = crate::exec::map_indexed(spec.len(), |i| {
            let p = spec.point(i % nx, i / nx);
            let d = p - center;
            let amp = norm * (-d.norm2() / (4.0 * sigma * sigma)).exp();
            Complex64::new(0.0, k_mod.dot(p)).exp() * amp
        });
        WavePacket {
            spec,
            values,
            boost: Vec2::ZERO,
            mass: 1.0,
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.spec.dx * self.spec.dy
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    /// Inner product (φ, ψ) = ∫ φ ψ̄.
    pub fn inner(&self, other: &WavePacket) -> Complex64 {
        assert_eq!(self.spec, other.spec);
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.cell_area()
    }

    pub fn l2_distance(&self, other: &WavePacket) -> f64 {
        assert_eq!(self.spec, other.spec);
        (self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.cell_area())
        .sqrt()
    }

    /// Apply the boost e^{i m v·x}.
    pub fn boosted(&self, v: Vec2) -> WavePacket {
        let nx = self.spec.nx;
        let m = self.mass;
        let values = crate::exec::map_indexed(self.spec.len(), |i| {
            let p = self.spec.point(i % nx, i / nx);
            self.values[i] * Complex64::new(0.0, m * v.dot(p)).exp()
        });
        WavePacket {
            spec: self.spec,
            values,
            boost: self.boost + v,
            mass: m,
        }
    }

    /// Pointwise multiplication by a position-space factor.
    pub fn multiplied(&self, f: impl Fn(Vec2) -> Complex64 + Sync) -> WavePacket {
        let nx = self.spec.nx;
        let values = crate::exec::map_indexed(self.spec.len(), |i| {
            self.values[i] * f(self.spec.point(i % nx, i / nx))
        });
        WavePacket {
            spec: self.spec,
            values,
            boost: self.boost,
            mass: self.mass,
        }
    }

    /// Momentum expectation ⟨p⟩ (spectral derivative).
    pub fn momentum_expectation(&self) -> Vec2 {
        let (dx, dy) = crate::spectral::gradient(&self.values, &self.spec);
        let mut px = Complex64::new(0.0, 0.0);
        let mut py = Complex64::new(0.0, 0.0);
        for i in 0..self.values.len() {
            let c = self.values[i].conj();
            px += c * Complex64::new(0.0, -1.0) * dx[i];
            py += c * Complex64::new(0.0, -1.0) * dy[i];
        }
        let n2 = self.norm().powi(2);
        Vec2::new(
            px.re * self.cell_area() / n2,
            py.re * self.cell_area() / n2,
        )
    }

    /// Amplitude centroid (Ehrenfest tracking).
    pub fn centroid(&self) -> Vec2 {
        let nx = self.spec.nx;
        let mut c = Vec2::ZERO;
        let mut mass = 0.0;
        for i in 0..self.values.len() {
            let w = self.values[i].norm_sqr();
            c = c + self.spec.point(i % nx, i / nx) * w;
            mass += w;
        }
        c / mass
    }

    /// Fraction of |φ|² mass at points selected by the predicate.
    pub fn mass_fraction(&self, pred: impl Fn(Vec2) -> bool) -> f64 {
        let nx = self.spec.nx;
        let mut inside = 0.0;
        let mut total = 0.0;
        for i in 0..self.values.len() {
            let w = self.values[i].norm_sqr();
            total += w;
            if pred(self.spec.point(i % nx, i / nx)) {
                inside += w;
            }
        }
        inside / total
    }
}

/// One second-order bilinear sample.
#[derive(Debug, Clone)]
pub struct SecondOrderSample {
    pub v: f64,
    pub packet_label: String,
    pub value: Complex64,
}

/// Forward high-velocity data: the exact v→∞ limits the inverse module
/// consumes.
#[derive(Debug, Clone)]
pub struct HighVelocityRecord {
    pub v_hat: Vec2,
    pub velocities: Vec<f64>,
    pub first_order: PhaseFactorSinogram,
    pub second_order: Vec<SecondOrderSample>,
    pub gauge_tag: String,
    pub scenario_id: String,
}

impl HighVelocityRecord {
    /// |sample| must equal 1 (the data are e^{ia}); returns the worst
    /// deviation.
    pub fn max_unimodularity_error(&self) -> f64 {
        self.first_order
            .values
            .iter()
            .flatten()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// First-order data over a line family: per line, e^{i·a(A, v̂, x)}.
pub fn first_order_data(
    a: &VectorPotential,
    obs: &Obstacle,
    thetas: &[f64],
    offsets: &[f64],
    tol: f64,
) -> Result<HighVelocityRecord> {
    let first_order = phase_factor_sinogram(a, obs, thetas, offsets, tol)?;
    Ok(HighVelocityRecord {
        v_hat: Vec2::new(1.0, 0.0),
        velocities: vec![],
        first_order,
        second_order: vec![],
        gauge_tag: format!("{:?}", a.tag),
        scenario_id: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FluxAssignment, ScalarField};
    use crate::gauges::coulomb_gauge;
    use crate::geometry::ConvexRegion;
    use crate::transforms::offset_grid;
    use approx::assert_relative_eq;

    fn point_obstacle() -> Obstacle {
        Obstacle::new(
            ConvexRegion::disc(Vec2::new(0.0, -30.0), 0.5),
            vec![Vec2::ZERO],
        )
        .unwrap()
    }

    #[test]
    fn packet_norm_and_inner() {
        let spec = RasterSpec::centered(Vec2::ZERO, 128, 0.12);
        let p = WavePacket::gaussian(spec, Vec2::new(0.3, -0.2), 0.8, Vec2::ZERO);
        assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-9);
        let q = p.boosted(Vec2::new(2.0, 0.0));
        assert_relative_eq!(q.norm(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(p.inner(&p).re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn momentum_expectation_of_modulated_packet() {
        let spec = RasterSpec::centered(Vec2::ZERO, 128, 0.12);
        let k = Vec2::new(1.5, -0.7);
        let p = WavePacket::gaussian(spec, Vec2::ZERO, 0.9, k);
        let got = p.momentum_expectation();
        assert_relative_eq!(got.x, k.x, epsilon = 1e-6);
        assert_relative_eq!(got.y, k.y, epsilon = 1e-6);
    }

    #[test]
    fn first_order_zero_potential_gives_ones() {
        let obs = point_obstacle();
        let zero = coulomb_gauge(&ScalarField::zero(), &FluxAssignment(vec![0.0, 0.0]), &obs)
            .unwrap();
        let rec = first_order_data(&zero, &obs, &[0.0, 0.9], &offset_grid(21, 4.0), 1e-10).unwrap();
        for v in rec.first_order.values.iter().flatten() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert_relative_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn first_order_flux_4pi_invisible() {
        // Φ = 4π: both sides give e^{±i2π} = 1, identical to Φ = 0
        let obs = point_obstacle();
        let thetas = [0.0, 0.7, 2.1];
        let offsets = offset_grid(31, 5.0);
        let a4pi = coulomb_gauge(
            &ScalarField::zero(),
            &FluxAssignment(vec![0.0, 4.0 * std::f64::consts::PI]),
            &obs,
        )
        .unwrap();
        let rec = first_order_data(&a4pi, &obs, &thetas, &offsets, 1e-10).unwrap();
        for v in rec.first_order.values.iter().flatten() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-9);
            assert_relative_eq!(v.im, 0.0, epsilon = 1e-9);
        }
        assert!(rec.max_unimodularity_error() < 1e-9);
    }

    #[test]
    fn first_order_gauge_covariance() {
        // gauge-equivalent potentials differ by the constant factor
        // e^{i(λ∞(v̂) − λ∞(−v̂))} on every exterior line
        use crate::gauges::{cone_gauge, lambda_infinity};
        let obs = Obstacle::new(ConvexRegion::disc(Vec2::ZERO, 1.0), vec![]).unwrap();
        let b = ScalarField::gaussian(Vec2::new(0.4, 0.2), 0.5, 1.0);
        let phi = FluxAssignment(vec![0.8]);
        let ac = coulomb_gauge(&b, &phi, &obs).unwrap();
        let aw = cone_gauge(&b, &phi, &obs, Vec2::new(0.0, 1.0), 0.5).unwrap();
        let theta = 0.3;
        let v_hat = Vec2::from_angle(theta);
        let lam_p = lambda_infinity(&aw, &ac, &obs, v_hat, 1e-10).unwrap().value;
        let lam_m = lambda_infinity(&aw, &ac, &obs, -v_hat, 1e-10).unwrap().value;
        let expected = Complex64::new(0.0, lam_p - lam_m).exp();
        let offsets = offset_grid(9, 6.0);
        let rc = first_order_data(&ac, &obs, &[theta], &offsets, 1e-10).unwrap();
        let rw = first_order_data(&aw, &obs, &[theta], &offsets, 1e-10).unwrap();
        for (c, w) in rc
            .first_order
            .values
            .iter()
            .zip(&rw.first_order.values)
        {
            if let (Some(c), Some(w)) = (c, w) {
                let ratio = w / c;
                assert_relative_eq!(ratio.re, expected.re, epsilon = 2e-4);
                assert_relative_eq!(ratio.im, expected.im, epsilon = 2e-4);
            }
        }
    }
}
