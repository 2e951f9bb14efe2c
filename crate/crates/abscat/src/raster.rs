//! Rasters: row-major f64 grids with world coordinates, bilinear sampling and
//! the on-disk format (little-endian float64 planes + JSON sidecar).

use crate::geometry::Vec2;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Grid geometry: `nx × ny` cells, world origin of cell (0,0) center at
/// (x0, y0), spacings (dx, dy). Row-major layout, index = iy * nx + ix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
}

impl RasterSpec {
    /// Square grid of `n × n` cells centered on `center` with spacing `h`.
    pub fn centered(center: Vec2, n: usize, h: f64) -> Self {
        let half = 0.5 * (n as f64 - 1.0) * h;
        RasterSpec {
            nx: n,
            ny: n,
            x0: center.x - half,
            y0: center.y - half,
            dx: h,
            dy: h,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(self.x0 + ix as f64 * self.dx, self.y0 + iy as f64 * self.dy)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Fractional grid coordinates of a world point.
    pub fn frac(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.x0) / self.dx, (p.y - self.y0) / self.dy)
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + (self.nx - 1) as f64 * self.dx
    }
    pub fn y_max(&self) -> f64 {
        self.y0 + (self.ny - 1) as f64 * self.dy
    }
}

/// Real-valued raster.
#[derive(Debug, Clone)]
pub struct Raster {
    pub spec: RasterSpec,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn zeros(spec: RasterSpec) -> Self {
        Raster {
            spec,
            data: vec![0.0; spec.len()],
        }
    }

    pub fn from_fn(spec: RasterSpec, f: impl Fn(Vec2) -> f64 + Sync) -> Self {
        let nx = spec.nx;
        let data = crate::exec::map_indexed(spec.len(), |i| {
            let (ix, iy) = (i % nx, i / nx);
            f(spec.point(ix, iy))
        });
        Raster { spec, data }
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[self.spec.index(ix, iy)]
    }

    /// Bilinear sample; zero outside the grid.
    pub fn sample(&self, p: Vec2) -> f64 {
        let (fx, fy) = self.spec.frac(p);
        if fx < 0.0 || fy < 0.0 || fx > (self.spec.nx - 1) as f64 || fy > (self.spec.ny - 1) as f64
        {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(self.spec.nx - 2);
        let iy = (fy.floor() as usize).min(self.spec.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v00 = self.get(ix, iy);
        let v10 = self.get(ix + 1, iy);
        let v01 = self.get(ix, iy + 1);
        let v11 = self.get(ix + 1, iy + 1);
        v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.spec.dx * self.spec.dy).sqrt()
    }

    /// Relative L2 error against `other` over the cells selected by `mask`.
    pub fn masked_rel_l2(&self, other: &Raster, mask: impl Fn(Vec2) -> bool) -> f64 {
        assert_eq!(self.spec, other.spec);
        let mut num = 0.0;
        let mut den = 0.0;
        for iy in 0..self.spec.ny {
            for ix in 0..self.spec.nx {
                let p = self.spec.point(ix, iy);
                if mask(p) {
                    let d = self.get(ix, iy) - other.get(ix, iy);
                    num += d * d;
                    den += other.get(ix, iy) * other.get(ix, iy);
                }
            }
        }
        if den == 0.0 {
            return if num == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (num / den).sqrt()
    }

    pub fn write(&self, path: &Path, field_name: &str) -> Result<()> {
        write_planes(path, &self.spec, field_name, &[&self.data])
    }

    pub fn read(path: &Path) -> Result<Raster> {
        let (spec, planes) = read_planes(path, 1)?;
        Ok(Raster {
            spec,
            data: planes.into_iter().next().unwrap(),
        })
    }
}

/// Complex-valued raster (two float64 planes on disk: re then im).
#[derive(Debug, Clone)]
pub struct CRaster {
    pub spec: RasterSpec,
    pub data: Vec<Complex64>,
}

impl CRaster {
    pub fn zeros(spec: RasterSpec) -> Self {
        CRaster {
            spec,
            data: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn write(&self, path: &Path, field_name: &str) -> Result<()> {
        let re: Vec<f64> = self.data.iter().map(|c| c.re).collect();
        let im: Vec<f64> = self.data.iter().map(|c| c.im).collect();
        write_planes(path, &self.spec, field_name, &[&re, &im])
    }

    pub fn read(path: &Path) -> Result<CRaster> {
        let (spec, planes) = read_planes(path, 2)?;
        let data = planes[0]
            .iter()
            .zip(&planes[1])
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(CRaster { spec, data })
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    field_name: String,
    planes: usize,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    std::path::PathBuf::from(p)
}

fn write_planes(path: &Path, spec: &RasterSpec, field_name: &str, planes: &[&[f64]]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let mut buf = Vec::with_capacity(spec.len() * 8 * planes.len());
    for plane in planes {
        assert_eq!(plane.len(), spec.len());
        for v in plane.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    file.write_all(&buf)?;
    let sc = Sidecar {
        nx: spec.nx,
        ny: spec.ny,
        x0: spec.x0,
        y0: spec.y0,
        dx: spec.dx,
        dy: spec.dy,
        field_name: field_name.to_string(),
        planes: planes.len(),
    };
    let json =
        serde_json::to_string_pretty(&sc).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn read_planes(path: &Path, expect_planes: usize) -> Result<(RasterSpec, Vec<Vec<f64>>)> {
    let sc: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    if sc.planes != expect_planes {
        return Err(Error::Io(std::io::Error::other(format!(
            "raster {} has {} planes, expected {}",
            path.display(),
            sc.planes,
            expect_planes
        ))));
    }
    let spec = RasterSpec {
        nx: sc.nx,
        ny: sc.ny,
        x0: sc.x0,
        y0: sc.y0,
        dx: sc.dx,
        dy: sc.dy,
    };
    let mut file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let need = spec.len() * 8 * expect_planes;
    if bytes.len() != need {
        return Err(Error::Io(std::io::Error::other(format!(
            "raster {}: {} bytes, expected {}",
            path.display(),
            bytes.len(),
            need
        ))));
    }
    let mut planes = Vec::with_capacity(expect_planes);
    for pl in 0..expect_planes {
        let mut v = Vec::with_capacity(spec.len());
        for i in 0..spec.len() {
            let off = (pl * spec.len() + i) * 8;
            v.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        }
        planes.push(v);
    }
    Ok((spec, planes))
}
