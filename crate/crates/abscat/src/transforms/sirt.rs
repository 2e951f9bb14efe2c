//! Support-constrained tomographic inversion by SIRT with a matrix-free
//! Joseph projector. The convex obstacle component is a hard exclusion
//! constraint; missing (masked) lines simply contribute no rays, which is the
//! missing-wedge situation the iteration regularizes by construction.

use super::{Sinogram, SinogramKind};
use crate::geometry::{Obstacle, Vec2};
use crate::raster::{Raster, RasterSpec};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SirtSettings {
    pub max_sweeps: usize,
    pub relaxation: f64,
    /// stop when the relative residual improves by less than this per sweep
    pub stop_rel_change: f64,
    /// extra exclusion margin around the convex component (world units)
    pub mask_margin: f64,
}

impl Default for SirtSettings {
    fn default() -> Self {
        SirtSettings {
            max_sweeps: 500,
            relaxation: 1.0,
            stop_rel_change: 1e-5,
            mask_margin: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SirtReport {
    pub sweeps: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub n_rays: usize,
    pub n_masked_lines: usize,
    pub n_excluded_pixels: usize,
}

struct Ray {
    anchor: Vec2,
    dir: Vec2,
    t0: f64,
    t1: f64,
    value: f64,
}

/// Clip a line to the raster bounding box; returns the parameter interval.
fn clip_to_box(spec: &RasterSpec, anchor: Vec2, dir: Vec2) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    let bounds = [
        (dir.x, anchor.x, spec.x0, spec.x_max()),
        (dir.y, anchor.y, spec.y0, spec.y_max()),
    ];
    for (d, a, lo, hi) in bounds {
        if d.abs() < 1e-15 {
            if a < lo || a > hi {
                return None;
            }
        } else {
            let ta = (lo - a) / d;
            let tb = (hi - a) / d;
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Forward-project one ray through the image (Joseph sampling, bilinear taps).
fn project(ray: &Ray, img: &[f64], spec: &RasterSpec, step: f64) -> f64 {
    let n = ((ray.t1 - ray.t0) / step).ceil() as usize;
    let mut acc = 0.0;
    for k in 0..n {
        let t = ray.t0 + (k as f64 + 0.5) * step;
        if t > ray.t1 {
            break;
        }
        let p = ray.anchor + ray.dir * t;
        acc += bilinear(img, spec, p);
    }
    acc * step
}

fn bilinear(img: &[f64], spec: &RasterSpec, p: Vec2) -> f64 {
    let (fx, fy) = spec.frac(p);
    if fx < 0.0 || fy < 0.0 || fx > (spec.nx - 1) as f64 || fy > (spec.ny - 1) as f64 {
        return 0.0;
    }
    let ix = (fx.floor() as usize).min(spec.nx - 2);
    let iy = (fy.floor() as usize).min(spec.ny - 2);
    let tx = fx - ix as f64;
    let ty = fy - iy as f64;
    let i = iy * spec.nx + ix;
    img[i] * (1.0 - tx) * (1.0 - ty)
        + img[i + 1] * tx * (1.0 - ty)
        + img[i + spec.nx] * (1.0 - tx) * ty
        + img[i + spec.nx + 1] * tx * ty
}

/// Transpose-consistent backprojection of one weighted ray value.
fn backproject(ray: &Ray, weight: f64, img: &mut [f64], spec: &RasterSpec, step: f64) {
    let n = ((ray.t1 - ray.t0) / step).ceil() as usize;
    for k in 0..n {
        let t = ray.t0 + (k as f64 + 0.5) * step;
        if t > ray.t1 {
            break;
        }
        let p = ray.anchor + ray.dir * t;
        let (fx, fy) = spec.frac(p);
        if fx < 0.0 || fy < 0.0 || fx > (spec.nx - 1) as f64 || fy > (spec.ny - 1) as f64 {
            continue;
        }
        let ix = (fx.floor() as usize).min(spec.nx - 2);
        let iy = (fy.floor() as usize).min(spec.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let i = iy * spec.nx + ix;
        let w = weight * step;
        img[i] += w * (1.0 - tx) * (1.0 - ty);
        img[i + 1] += w * tx * (1.0 - ty);
        img[i + spec.nx] += w * (1.0 - tx) * ty;
        img[i + spec.nx + 1] += w * tx * ty;
    }
}

/// Reconstruct the field on the exterior raster from a (masked) X-ray
/// sinogram by SIRT with the convex-component exclusion constraint.
pub fn support_constrained_invert(
    sino: &Sinogram,
    obs: &Obstacle,
    spec: RasterSpec,
    cfg: &SirtSettings,
) -> Result<(Raster, SirtReport)> {
    if sino.kind != SinogramKind::Xray {
        return Err(Error::inverse("SIRT expects an X-ray sinogram"));
    }
    let step = 0.5 * spec.dx.min(spec.dy);
    let mut rays = Vec::new();
    let mut n_masked = 0usize;
    for i in 0..sino.thetas.len() {
        for j in 0..sino.offsets.len() {
            match sino.at(i, j) {
                None => n_masked += 1,
                Some(v) => {
                    let line = sino.line(i, j);
                    if let Some((t0, t1)) = clip_to_box(&spec, line.anchor(), line.dir()) {
                        rays.push(Ray {
                            anchor: line.anchor(),
                            dir: line.dir(),
                            t0,
                            t1,
                            value: v,
                        });
                    }
                }
            }
        }
    }
    if rays.is_empty() {
        return Err(Error::inverse("SIRT: no usable rays"));
    }

    // exclusion mask: pixels inside (or within the margin of) the convex body
    let nx = spec.nx;
    let allowed: Vec<bool> = (0..spec.len())
        .map(|i| {
            let p = spec.point(i % nx, i / nx);
            obs.convex().distance(p) > cfg.mask_margin
        })
        .collect();
    let n_excluded = allowed.iter().filter(|a| !**a).count();

    // row sums (per-ray intersection length of allowed pixels) and column sums
    let ones: Vec<f64> = allowed.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let row_sums: Vec<f64> = crate::exec::map_indexed(rays.len(), |r| {
        project(&rays[r], &ones, &spec, step).max(1e-12)
    });
    let col_sums = {
        let chunks = rays.len().div_ceil(2048);
        let partials = crate::exec::map_indexed(chunks, |c| {
            let mut img = vec![0.0; spec.len()];
            for r in c * 2048..((c + 1) * 2048).min(rays.len()) {
                backproject(&rays[r], 1.0, &mut img, &spec, step);
            }
            img
        });
        let mut total = vec![0.0; spec.len()];
        for part in partials {
            for (t, p) in total.iter_mut().zip(&part) {
                *t += p;
            }
        }
        total
    };

    let b_norm = rays.iter().map(|r| r.value * r.value).sum::<f64>().sqrt();
    let mut img = vec![0.0; spec.len()];
    let mut history = Vec::new();
    let mut sweeps = 0;
    for sweep in 0..cfg.max_sweeps {
        sweeps = sweep + 1;
        // forward + residual
        let resid: Vec<f64> = crate::exec::map_indexed(rays.len(), |r| {
            rays[r].value - project(&rays[r], &img, &spec, step)
        });
        let res_norm = (resid.iter().map(|r| r * r).sum::<f64>()).sqrt() / b_norm.max(1e-300);
        history.push(res_norm);
        // backproject normalized residuals (deterministic chunking)
        let chunks = rays.len().div_ceil(2048);
        let partials = crate::exec::map_indexed(chunks, |c| {
            let mut g = vec![0.0; spec.len()];
            for r in c * 2048..((c + 1) * 2048).min(rays.len()) {
                backproject(&rays[r], resid[r] / row_sums[r], &mut g, &spec, step);
            }
            g
        });
        let mut grad = vec![0.0; spec.len()];
        for part in partials {
            for (g, p) in grad.iter_mut().zip(&part) {
                *g += p;
            }
        }
        for i in 0..spec.len() {
            if allowed[i] && col_sums[i] > 1e-12 {
                img[i] += cfg.relaxation * grad[i] / col_sums[i];
            }
        }
        if history.len() >= 2 {
            let prev = history[history.len() - 2];
            if prev - res_norm < cfg.stop_rel_change * prev {
                break;
            }
        }
    }
    let final_residual = {
        let resid: Vec<f64> = crate::exec::map_indexed(rays.len(), |r| {
            rays[r].value - project(&rays[r], &img, &spec, step)
        });
        (resid.iter().map(|r| r * r).sum::<f64>()).sqrt() / b_norm.max(1e-300)
    };
    history.push(final_residual);
    Ok((
        Raster { spec, data: img },
        SirtReport {
            sweeps,
            final_residual,
            residual_history: history,
            n_rays: rays.len(),
            n_masked_lines: n_masked,
            n_excluded_pixels: n_excluded,
        },
    ))
}
