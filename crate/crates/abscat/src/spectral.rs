//! 2D FFT helpers on rasters: cached planners, momentum grids, and the
//! diagonal multipliers used by the free propagator and the Ξ operators.

use crate::raster::RasterSpec;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[allow(clippy::type_complexity)]
static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut plans = PLANS.lock().unwrap();
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place 2D FFT over a row-major nx × ny grid.
pub fn fft2(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    assert_eq!(data.len(), nx * ny);
    let row_plan = plan(nx, inverse);
    crate::exec::for_each_chunk_mut(data, nx, |_, row| {
        row_plan.process(row);
    });
    // columns: transpose, FFT rows, transpose back
    let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
    transpose(data, &mut t, nx, ny);
    let col_plan = plan(ny, inverse);
    crate::exec::for_each_chunk_mut(&mut t, ny, |_, row| {
        col_plan.process(row);
    });
    transpose(&t, data, ny, nx);
    if inverse {
        let scale = 1.0 / (nx * ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], nx: usize, ny: usize) {
    const B: usize = 32;
    for by in (0..ny).step_by(B) {
        for bx in (0..nx).step_by(B) {
            for y in by..(by + B).min(ny) {
                for x in bx..(bx + B).min(nx) {
                    dst[x * ny + y] = src[y * nx + x];
                }
            }
        }
    }
}

/// FFT wavenumbers along an axis of length n with spacing h.
pub fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|i| {
            let i = i as i64;
            let i = if i <= (n as i64 - 1) / 2 { i } else { i - n as i64 };
            i as f64 * dk
        })
        .collect()
}

/// Apply a diagonal momentum-space multiplier m(kx, ky) to grid data.
pub fn apply_momentum_multiplier(
    data: &mut [Complex64],
    spec: &RasterSpec,
    m: impl Fn(f64, f64) -> Complex64 + Sync,
) {
    let nx = spec.nx;
    let ny = spec.ny;
    fft2(data, nx, ny, false);
    let kx = wavenumbers(nx, spec.dx);
    let ky = wavenumbers(ny, spec.dy);
    crate::exec::for_each_chunk_mut(data, nx, |iy, row| {
        let kyv = ky[iy];
        for (ix, v) in row.iter_mut().enumerate() {
            *v *= m(kx[ix], kyv);
        }
    });
    fft2(data, nx, ny, true);
}

/// Spectral partial derivatives (∂x, ∂y) of a complex grid function.
pub fn gradient(data: &[Complex64], spec: &RasterSpec) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut dx = data.to_vec();
    let mut dy = data.to_vec();
    let i = Complex64::new(0.0, 1.0);
    apply_momentum_multiplier(&mut dx, spec, |kx, _| i * kx);
    apply_momentum_multiplier(&mut dy, spec, |_, ky| i * ky);
    (dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    #[test]
    fn fft_roundtrip() {
        let spec = RasterSpec::centered(Vec2::ZERO, 32, 0.25);
        let mut data: Vec<Complex64> = (0..spec.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let orig = data.clone();
        fft2(&mut data, 32, 32, false);
        fft2(&mut data, 32, 32, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_gradient_of_plane_wave() {
        let n = 64;
        let spec = RasterSpec::centered(Vec2::ZERO, n, 0.2);
        let k = 2.0 * std::f64::consts::PI / (n as f64 * 0.2) * 3.0; // lattice mode
        let data: Vec<Complex64> = (0..spec.len())
            .map(|i| {
                let p = spec.point(i % n, i / n);
                (Complex64::new(0.0, 1.0) * k * p.x).exp()
            })
            .collect();
        let (dx, _) = gradient(&data, &spec);
        for (d, v) in dx.iter().zip(&data) {
            let expect = Complex64::new(0.0, k) * v;
            assert!((d - expect).norm() < 1e-9);
        }
    }
}
