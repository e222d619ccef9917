//! Grid-sampled fields, the free-space Newtonian potential by FFT
//! convolution, the energy functional and the PDE residual.
//!
//! The potential solve is a Hockney-style free-space convolution: the
//! source is zero-padded to twice the extent per axis and convolved with
//! the Green's function `G = 1/(4π|x|)` sampled at cell centers, the
//! singular cell carrying the closed-form cell average of `G`. Everything
//! downstream (`T[uv]`, `Ψ_u`, quartic energies) reuses the same solve.

use crate::ansatz::{self, BumpConfig};
use crate::error::Error;
use crate::groundstate::{evaluate_profile, GroundState, Profile};
use crate::quad::GaussLegendre;
use crate::Result;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// External potential `V(r) = V₁ + b/r^q`, plus an optional refinement
/// term for the `O(r^{−q−σ})` slack (zero by default).
#[derive(Clone, Copy, Debug)]
pub struct VParams {
    pub v1: f64,
    pub b: f64,
    pub q: f64,
    /// Optional extra decay term added to `V` (the `O(r^{−q−σ})` hook).
    pub refinement: Option<fn(f64) -> f64>,
}

impl VParams {
    pub fn new(v1: f64, b: f64, q: f64) -> Self {
        Self { v1, b, q, refinement: None }
    }

    /// The unit background with `V ≡ 1`.
    pub fn flat() -> Self {
        Self { v1: 1.0, b: 0.0, q: 0.5, refinement: None }
    }
}

/// Literal potential law at `radius > 0`.
pub fn potential_v(radius: f64, p: &VParams) -> f64 {
    debug_assert!(radius > 0.0, "V is singular at radius 0; regularize at the call site");
    let mut v = p.v1 + p.b / radius.powf(p.q);
    if let Some(f) = p.refinement {
        v += f(radius);
    }
    v
}

/// Scalar samples on a uniform Cartesian grid.
///
/// Index layout is row-major with `x` outermost: `(ix·ny + iy)·nz + iz`.
#[derive(Debug, Clone)]
pub struct SampledField {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn zeros(origin: [f64; 3], spacing: f64, dims: [usize; 3]) -> Self {
        assert!(spacing > 0.0, "spacing must be positive");
        Self { origin, spacing, dims, values: vec![0.0; dims[0] * dims[1] * dims[2]] }
    }

    /// Cube of side `2·half_extent` centered at the origin.
    pub fn centered_cube(half_extent: f64, spacing: f64) -> Self {
        let n = (2.0 * half_extent / spacing).round() as usize + 1;
        // keep node coordinates symmetric about 0 and off the exact origin when n is even
        let o = -0.5 * (n - 1) as f64 * spacing;
        Self::zeros([o, o, o], spacing, [n, n, n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [
            self.origin[0] + ix as f64 * self.spacing,
            self.origin[1] + iy as f64 * self.spacing,
            self.origin[2] + iz as f64 * self.spacing,
        ]
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    /// Fill from a function of position, in parallel over x-slabs.
    pub fn fill(&mut self, f: impl Fn([f64; 3]) -> f64 + Sync) {
        let (ny, nz) = (self.dims[1], self.dims[2]);
        let origin = self.origin;
        let spacing = self.spacing;
        self.values
            .par_chunks_mut(ny * nz)
            .enumerate()
            .for_each(|(ix, slab)| {
                for iy in 0..ny {
                    for iz in 0..nz {
                        let p = [
                            origin[0] + ix as f64 * spacing,
                            origin[1] + iy as f64 * spacing,
                            origin[2] + iz as f64 * spacing,
                        ];
                        slab[iy * nz + iz] = f(p);
                    }
                }
            });
    }

    pub fn from_fn(
        origin: [f64; 3],
        spacing: f64,
        dims: [usize; 3],
        f: impl Fn([f64; 3]) -> f64 + Sync,
    ) -> Self {
        let mut field = Self::zeros(origin, spacing, dims);
        field.fill(f);
        field
    }

    /// Sample `W_{r,t}` of a configuration on this grid.
    pub fn sample_w(config: &BumpConfig, gs: &GroundState, half_extent: f64, spacing: f64) -> Self {
        let mut f = Self::centered_cube(half_extent, spacing);
        f.fill(|p| ansatz::evaluate_w(config, gs, p));
        f
    }

    /// Max |value| over the outermost node shell.
    pub fn boundary_max(&self) -> f64 {
        let [nx, ny, nz] = self.dims;
        let mut m = 0.0f64;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    if ix == 0 || iy == 0 || iz == 0 || ix == nx - 1 || iy == ny - 1 || iz == nz - 1
                    {
                        m = m.max(self.values[self.index(ix, iy, iz)].abs());
                    }
                }
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `h³ Σ f_i`: the cell-sum quadrature (spectrally accurate for
    /// smooth decaying samples).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing.powi(3)
    }

    /// `h³ Σ f_i g_i`.
    pub fn inner(&self, other: &SampledField) -> f64 {
        debug_assert_eq!(self.dims, other.dims);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.spacing.powi(3)
    }

    /// Pointwise map into a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let mut out = self.clone();
        out.values.par_iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// Pointwise combination of two fields.
    pub fn zip(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        debug_assert_eq!(self.dims, other.dims);
        let mut out = self.clone();
        out.values
            .par_iter_mut()
            .zip(&other.values)
            .for_each(|(v, w)| *v = f(*v, *w));
        out
    }

    /// Dump as flat CSV `x,y,z,value` (debug aid, not a stable format).
    pub fn dump_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let [nx, ny, nz] = self.dims;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let p = self.position(ix, iy, iz);
                    writeln!(out, "{},{},{},{:.17e}", p[0], p[1], p[2], self.values[self.index(ix, iy, iz)])?;
                }
            }
        }
        Ok(())
    }
}

/// Three-term energy decomposition `total = I₁ + I₂ − I₃`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyBreakdown {
    /// Kinetic plus unit-mass quadratic part `(1/2)∫(|∇u|² + u²)`.
    pub i1: f64,
    /// Potential perturbation `(1/2)∫(V−1)u²`.
    pub i2: f64,
    /// Nonlocal quartic part `(1/32π)∫∫u²u²/|x−y|`.
    pub i3: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Self {
        Self { i1, i2, i3, total: i1 + i2 - i3 }
    }
}

// ---------------------------------------------------------------------------
// free-space convolution
// ---------------------------------------------------------------------------

/// Cached free-space convolver with the `1/(4π|x|)` kernel for one grid
/// geometry. Build once, convolve many times.
pub struct FreeSpacePoisson {
    dims: [usize; 3],
    padded: [usize; 3],
    spacing: f64,
    kernel_hat: Vec<f64>, // kernel is even, so its DFT is real
    plans: [(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>); 3],
}

impl FreeSpacePoisson {
    pub fn new(dims: [usize; 3], spacing: f64) -> Self {
        let padded = [2 * dims[0], 2 * dims[1], 2 * dims[2]];
        let mut planner = FftPlanner::new();
        let plans = [
            (planner.plan_fft_forward(padded[0]), planner.plan_fft_inverse(padded[0])),
            (planner.plan_fft_forward(padded[1]), planner.plan_fft_inverse(padded[1])),
            (planner.plan_fft_forward(padded[2]), planner.plan_fft_inverse(padded[2])),
        ];
        // kernel on the wrapped displacement grid
        let avg = unit_cube_inv_r_integral() / (FOUR_PI * spacing);
        let [mx, my, mz] = padded;
        let mut kernel = vec![Complex::new(0.0, 0.0); mx * my * mz];
        let wrap = |k: usize, m: usize| -> f64 {
            let k = k as i64;
            let m = m as i64;
            let d = if k <= m / 2 { k } else { k - m };
            d as f64 * spacing
        };
        kernel
            .par_chunks_mut(my * mz)
            .enumerate()
            .for_each(|(ix, slab)| {
                let dx = wrap(ix, mx);
                for iy in 0..my {
                    let dy = wrap(iy, my);
                    for iz in 0..mz {
                        let dz = wrap(iz, mz);
                        let r2 = dx * dx + dy * dy + dz * dz;
                        slab[iy * mz + iz].re = if r2 == 0.0 { avg } else { 1.0 / (FOUR_PI * r2.sqrt()) };
                    }
                }
            });
        let mut me = Self { dims, padded, spacing, kernel_hat: Vec::new(), plans };
        me.fft3(&mut kernel, true);
        me.kernel_hat = kernel.iter().map(|c| c.re).collect();
        me
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Convolve `source` with `1/(4π|x|)`; both live on the unpadded grid.
    pub fn convolve(&self, source: &[f64]) -> Vec<f64> {
        let [nx, ny, nz] = self.dims;
        let [mx, my, mz] = self.padded;
        assert_eq!(source.len(), nx * ny * nz);
        let mut buf = vec![Complex::new(0.0, 0.0); mx * my * mz];
        buf.par_chunks_mut(my * mz)
            .take(nx)
            .enumerate()
            .for_each(|(ix, slab)| {
                for iy in 0..ny {
                    for iz in 0..nz {
                        slab[iy * mz + iz].re = source[(ix * ny + iy) * nz + iz];
                    }
                }
            });
        self.fft3(&mut buf, true);
        let scale = self.spacing.powi(3) / (mx * my * mz) as f64;
        buf.par_iter_mut().zip(&self.kernel_hat).for_each(|(v, &k)| *v *= k * scale);
        self.fft3(&mut buf, false);
        let mut out = vec![0.0; nx * ny * nz];
        out.par_chunks_mut(ny * nz)
            .enumerate()
            .for_each(|(ix, slab)| {
                for iy in 0..ny {
                    for iz in 0..nz {
                        slab[iy * nz + iz] = buf[(ix * my + iy) * mz + iz].re;
                    }
                }
            });
        out
    }

    /// `T[fg] = (1/4π) ∫ f(y)g(y)/|x−y| dy` on the grid of `f`.
    pub fn t_product(&self, f: &SampledField, g: &SampledField) -> SampledField {
        let src: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
        SampledField { origin: f.origin, spacing: f.spacing, dims: f.dims, values: self.convolve(&src) }
    }

    fn fft3(&self, data: &mut [Complex<f64>], forward: bool) {
        let [mx, my, mz] = self.padded;
        let pick = |axis: usize| -> Arc<dyn Fft<f64>> {
            let (f, i) = &self.plans[axis];
            if forward { f.clone() } else { i.clone() }
        };
        // z lines are contiguous
        let fft = pick(2);
        data.par_chunks_mut(mz).for_each(|line| fft.process(line));
        // y lines, strided by mz
        let fft = pick(1);
        data.par_chunks_mut(my * mz).for_each(|plane| {
            let mut line = vec![Complex::new(0.0, 0.0); my];
            for iz in 0..mz {
                for iy in 0..my {
                    line[iy] = plane[iy * mz + iz];
                }
                fft.process(&mut line);
                for iy in 0..my {
                    plane[iy * mz + iz] = line[iy];
                }
            }
        });
        // x lines, strided by my*mz: transpose x into the contiguous slot,
        // batch-transform, transpose back (parallel over the y-chunks)
        let fft = pick(0);
        let mut scratch = vec![Complex::new(0.0, 0.0); mx * my * mz];
        scratch
            .par_chunks_mut(mx * mz)
            .enumerate()
            .for_each(|(iy, chunk)| {
                for ix in 0..mx {
                    let base = (ix * my + iy) * mz;
                    chunk[ix * mz..(ix + 1) * mz].copy_from_slice(&data[base..base + mz]);
                }
                // chunk is now (x, z) for fixed y; transform along x per z
                let mut line = vec![Complex::new(0.0, 0.0); mx];
                for iz in 0..mz {
                    for ix in 0..mx {
                        line[ix] = chunk[ix * mz + iz];
                    }
                    fft.process(&mut line);
                    for ix in 0..mx {
                        chunk[ix * mz + iz] = line[ix];
                    }
                }
            });
        data.par_chunks_mut(my * mz)
            .enumerate()
            .for_each(|(ix, plane)| {
                for iy in 0..my {
                    let base = (iy * mx + ix) * mz;
                    plane[iy * mz..(iy + 1) * mz].copy_from_slice(&scratch[base..base + mz]);
                }
            });
    }
}

/// `∫_{[-1/2,1/2]³} dV/|x|`, reduced to a smooth 2D face integral:
/// `(3/4) ∫_{[-1,1]²} dx dy / √(1 + x² + y²)`.
pub fn unit_cube_inv_r_integral() -> f64 {
    let gl = GaussLegendre::new(48);
    let j = gl.integrate(-1.0, 1.0, |x| gl.integrate(-1.0, 1.0, |y| 1.0 / (1.0 + x * x + y * y).sqrt()));
    0.75 * j
}

/// Strict boundary-decay threshold of the plain entry point.
pub const DEFAULT_BOUNDARY_DECAY: f64 = 1e-10;

/// Newtonian potential `Ψ(x) = (1/8π) ∫ field²(y)/|x−y| dy` with the
/// strict boundary-decay precondition.
pub fn newtonian_potential(field: &SampledField) -> Result<SampledField> {
    newtonian_potential_with_threshold(field, DEFAULT_BOUNDARY_DECAY)
}

/// As [`newtonian_potential`] with an explicit decay threshold, for callers
/// whose downstream tolerance justifies a looser truncation budget.
pub fn newtonian_potential_with_threshold(
    field: &SampledField,
    threshold: f64,
) -> Result<SampledField> {
    check_boundary(field, threshold)?;
    let solver = FreeSpacePoisson::new(field.dims, field.spacing);
    Ok(newtonian_potential_cached(field, &solver))
}

/// Potential via a prebuilt convolver (no decay check).
pub fn newtonian_potential_cached(field: &SampledField, solver: &FreeSpacePoisson) -> SampledField {
    let src: Vec<f64> = field.values.iter().map(|u| 0.5 * u * u).collect();
    SampledField {
        origin: field.origin,
        spacing: field.spacing,
        dims: field.dims,
        values: solver.convolve(&src),
    }
}

fn check_boundary(field: &SampledField, threshold: f64) -> Result<()> {
    let b = field.boundary_max();
    let m = field.max_abs();
    if m > 0.0 && b > threshold * m {
        return Err(Error::BoundaryDecay { boundary: b, interior: m });
    }
    Ok(())
}

/// Potential samples with the near-origin regularization `r → max(r, h/2)`.
pub fn sample_potential(field: &SampledField, p: &VParams) -> SampledField {
    let h = field.spacing;
    let mut v = field.clone();
    v.fill(|pos| {
        let r = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt().max(0.5 * h);
        potential_v(r, p)
    });
    v
}

/// Full energy `I(u) = (1/2)∫(|∇u|² + V u²) − (1/32π)∫∫u²u²/|x−y|`,
/// split as `I₁ + I₂ − I₃` with `V = 1 + (V−1)`.
pub fn energy_total(field: &SampledField, vp: &VParams, threshold: f64) -> Result<EnergyBreakdown> {
    check_boundary(field, threshold)?;
    let solver = FreeSpacePoisson::new(field.dims, field.spacing);
    Ok(energy_total_cached(field, vp, &solver))
}

/// Energy with a prebuilt convolver (no decay check).
pub fn energy_total_cached(
    field: &SampledField,
    vp: &VParams,
    solver: &FreeSpacePoisson,
) -> EnergyBreakdown {
    let h = field.spacing;
    let [nx, ny, nz] = field.dims;
    let v = &field.values;
    // centered gradients, one-sided layers excluded
    let grad_sq: f64 = (1..nx.saturating_sub(1))
        .into_par_iter()
        .map(|ix| {
            let mut acc = 0.0;
            for iy in 1..ny - 1 {
                for iz in 1..nz - 1 {
                    let i = (ix * ny + iy) * nz + iz;
                    let gx = (v[i + ny * nz] - v[i - ny * nz]) / (2.0 * h);
                    let gy = (v[i + nz] - v[i - nz]) / (2.0 * h);
                    let gz = (v[i + 1] - v[i - 1]) / (2.0 * h);
                    acc += gx * gx + gy * gy + gz * gz;
                }
            }
            acc
        })
        .sum::<f64>()
        * h.powi(3);
    let mass: f64 = v.iter().map(|u| u * u).sum::<f64>() * h.powi(3);
    let i1 = 0.5 * (grad_sq + mass);

    let vpot = sample_potential(field, vp);
    let i2 = 0.5
        * field
            .values
            .iter()
            .zip(&vpot.values)
            .map(|(u, vv)| (vv - 1.0) * u * u)
            .sum::<f64>()
        * h.powi(3);

    let psi = newtonian_potential_cached(field, solver);
    let quartic: f64 = psi
        .values
        .iter()
        .zip(&field.values)
        .map(|(p, u)| p * u * u)
        .sum::<f64>()
        * h.powi(3);
    let i3 = 0.25 * quartic;
    EnergyBreakdown::new(i1, i2, i3)
}

/// PDE residual `−Δu + Vu − Ψ_u u` with 7-point stencils; returns the
/// residual field and its interior `(L², max)` norms.
pub fn pde_residual(
    field: &SampledField,
    vp: &VParams,
    threshold: f64,
) -> Result<(SampledField, (f64, f64))> {
    check_boundary(field, threshold)?;
    let solver = FreeSpacePoisson::new(field.dims, field.spacing);
    Ok(pde_residual_cached(field, vp, &solver))
}

pub fn pde_residual_cached(
    field: &SampledField,
    vp: &VParams,
    solver: &FreeSpacePoisson,
) -> (SampledField, (f64, f64)) {
    let psi = newtonian_potential_cached(field, solver);
    let vpot = sample_potential(field, vp);
    let res = residual_from_parts(field, &vpot, &psi);
    let norms = interior_norms(&res);
    (res, norms)
}

/// `−Δ_h u + Vu − Ψu` given presampled `V` and `Ψ` (boundary layer zeroed).
pub fn residual_from_parts(
    field: &SampledField,
    vpot: &SampledField,
    psi: &SampledField,
) -> SampledField {
    let mut res = SampledField::zeros(field.origin, field.spacing, field.dims);
    let [nx, ny, nz] = field.dims;
    let h = field.spacing;
    let v = &field.values;
    let stride_x = ny * nz;
    res.values
        .par_chunks_mut(stride_x)
        .enumerate()
        .for_each(|(ix, slab)| {
            if ix == 0 || ix == nx - 1 {
                return;
            }
            for iy in 1..ny - 1 {
                for iz in 1..nz - 1 {
                    let i = (ix * ny + iy) * nz + iz;
                    let lap = (v[i + stride_x] + v[i - stride_x] + v[i + nz] + v[i - nz] + v[i + 1]
                        + v[i - 1]
                        - 6.0 * v[i])
                        / (h * h);
                    slab[iy * nz + iz] = -lap + vpot.values[i] * v[i] - psi.values[i] * v[i];
                }
            }
        });
    res
}

/// Interior `(L², max)` norms, one-sided boundary layers excluded.
pub fn interior_norms(res: &SampledField) -> (f64, f64) {
    let [nx, ny, nz] = res.dims;
    let mut l2 = 0.0;
    let mut mx = 0.0f64;
    for ix in 1..nx - 1 {
        for iy in 1..ny - 1 {
            for iz in 1..nz - 1 {
                let r = res.values[(ix * ny + iy) * nz + iz];
                l2 += r * r;
                mx = mx.max(r.abs());
            }
        }
    }
    (l2.sqrt() * res.spacing.powf(1.5), mx)
}

/// Quadriform `∫∫ u v(y) w z(x) / |x−y| dx dy` via one convolution.
pub fn quadriform(
    solver: &FreeSpacePoisson,
    u: &SampledField,
    v: &SampledField,
    w: &SampledField,
    z: &SampledField,
) -> f64 {
    let t = solver.t_product(u, v);
    FOUR_PI * t.values.iter().zip(&w.values).zip(&z.values).map(|((t, w), z)| t * w * z).sum::<f64>()
        * u.spacing.powi(3)
}

/// Sample the radial ground state `U` on a centered grid.
pub fn sample_ground_state(gs: &GroundState, half_extent: f64, spacing: f64) -> SampledField {
    let mut f = SampledField::centered_cube(half_extent, spacing);
    f.fill(|p| {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        evaluate_profile(gs, r, Profile::U)
    });
    f
}
