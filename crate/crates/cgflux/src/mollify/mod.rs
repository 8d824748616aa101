//! Radial compactly supported unit-mass mollifiers phi^l, mollification
//! restricted to the discrete Omega^l, analytic derivative kernels D^k phi^l,
//! and the commutator decomposition of (f g)^l.
//!
//! The reference path is direct stencil convolution, so the commutator
//! identity holds exactly under the shared quadrature. A transform-based
//! fast path (cyclic on the periodic box, zero-padded on bounded shapes)
//! computes the same sums and must agree with the reference to 1e-10
//! relative; identity-critical callers pin `ConvPath::Reference`.

mod fft;

use crate::error::{CgError, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{GridSpec, Mask};
use crate::reduce::sum_slice;
use crate::scalar::Real;
use rayon::prelude::*;

/// Radial kernel profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    /// (1 - |z|^2)^4 on |z| < 1; C^3 at the support edge, cheap to evaluate.
    Polynomial,
    /// exp(-1/(1 - |z|^2)) on |z| < 1; the classical C-infinity bump.
    Bump,
}

impl KernelShape {
    /// Unnormalized profile value at rho = |z| (unit support).
    fn profile<T: Real>(self, rho2: T) -> T {
        if rho2 >= T::one() {
            return T::zero();
        }
        match self {
            KernelShape::Polynomial => {
                let w = T::one() - rho2;
                w * w * w * w
            }
            KernelShape::Bump => (-(T::one() / (T::one() - rho2))).exp(),
        }
    }

    /// d phi / d(rho^2).
    fn profile_du<T: Real>(self, rho2: T) -> T {
        if rho2 >= T::one() {
            return T::zero();
        }
        match self {
            KernelShape::Polynomial => {
                let w = T::one() - rho2;
                -T::of(4.0) * w * w * w
            }
            KernelShape::Bump => {
                let w = T::one() - rho2;
                -self.profile(rho2) / (w * w)
            }
        }
    }

    /// d^2 phi / d(rho^2)^2.
    fn profile_duu<T: Real>(self, rho2: T) -> T {
        if rho2 >= T::one() {
            return T::zero();
        }
        match self {
            KernelShape::Polynomial => {
                let w = T::one() - rho2;
                T::of(12.0) * w * w
            }
            KernelShape::Bump => {
                let w = T::one() - rho2;
                let phi = self.profile(rho2);
                phi / (w * w * w * w) - T::of(2.0) * phi / (w * w * w)
            }
        }
    }
}

/// Derivative multi-index with |k| in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivIndex {
    First(usize),
    Second(usize, usize),
}

impl DerivIndex {
    /// From per-axis orders; anything above total order 2 is unsupported.
    pub fn from_orders(orders: [u8; 3]) -> Result<Self> {
        let total: u8 = orders.iter().sum();
        match total {
            1 => {
                let axis = orders.iter().position(|&o| o == 1).unwrap();
                Ok(DerivIndex::First(axis))
            }
            2 => {
                let mut axes = Vec::new();
                for (a, &o) in orders.iter().enumerate() {
                    for _ in 0..o {
                        axes.push(a);
                    }
                }
                Ok(DerivIndex::Second(axes[0], axes[1]))
            }
            _ => Err(CgError::Argument(format!(
                "unsupported derivative order {total}; only |k| in {{1, 2}}"
            ))),
        }
    }
}

/// Precomputed stencil of the scaled kernel phi^l on the grid lattice.
#[derive(Debug, Clone)]
pub struct MollifierKernel<T: Real> {
    pub scale: T,
    pub shape: KernelShape,
    pub spacing: [T; 3],
    /// Stencil half-width in cells per axis.
    pub radius: [i32; 3],
    /// Lattice offsets with |z| <= l, in a fixed deterministic order.
    pub offsets: Vec<[i32; 3]>,
    /// Unit-mass weights including the quadrature volume: sum(weights) = 1.
    pub weights: Vec<T>,
    /// Discrete normalization applied to the raw profile samples.
    pub normalization: T,
}

impl<T: Real> MollifierKernel<T> {
    /// Weight lookup table dimensions (2 r + 1 per axis).
    fn table_dims(&self) -> [usize; 3] {
        [
            (2 * self.radius[0] + 1) as usize,
            (2 * self.radius[1] + 1) as usize,
            (2 * self.radius[2] + 1) as usize,
        ]
    }

    /// Physical offset vector for a lattice offset.
    fn physical(&self, o: [i32; 3]) -> [T; 3] {
        [
            T::of(o[0] as f64) * self.spacing[0],
            T::of(o[1] as f64) * self.spacing[1],
            T::of(o[2] as f64) * self.spacing[2],
        ]
    }

    /// Analytic derivative weights D^k phi^l sampled on the stencil and
    /// scaled by the same discrete normalization and cell volume as the mass
    /// weights, so that sum(d-weights) is the discrete integral of D^k phi^l.
    pub fn derivative_weights(&self, index: DerivIndex) -> Vec<T> {
        let l = self.scale;
        let l2 = l * l;
        let dv = self.spacing[0] * self.spacing[1] * self.spacing[2];
        let base = self.normalization * dv / (l * l * l);
        self.offsets
            .iter()
            .map(|&o| {
                let z = self.physical(o);
                let rho2 = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / l2;
                match index {
                    DerivIndex::First(j) => {
                        // d/dz_j phi(|z|/l) = phi'(u) * 2 z_j / l^2, u = rho^2
                        base * self.shape.profile_du(rho2) * T::of(2.0) * z[j] / l2
                    }
                    DerivIndex::Second(i, j) => {
                        let duu = self.shape.profile_duu(rho2)
                            * (T::of(2.0) * z[i] / l2)
                            * (T::of(2.0) * z[j] / l2);
                        let du = if i == j {
                            self.shape.profile_du(rho2) * T::of(2.0) / l2
                        } else {
                            T::zero()
                        };
                        base * (duu + du)
                    }
                }
            })
            .collect()
    }
}

/// Build the discrete kernel for scale l on the given grid.
///
/// Refuses l < 4 dx (the quadrature cannot resolve the profile) and kernels
/// wider than the grid.
pub fn build_kernel<T: Real>(
    l: T,
    shape: KernelShape,
    grid: &GridSpec<T>,
) -> Result<MollifierKernel<T>> {
    let dx_max = grid.spacing[0].max(grid.spacing[1]).max(grid.spacing[2]);
    if l < T::of(4.0) * dx_max {
        return Err(CgError::Resolution(format!(
            "kernel scale l = {} is below 4 dx = {}",
            l,
            T::of(4.0) * dx_max
        )));
    }
    let mut radius = [0i32; 3];
    for k in 0..3 {
        let r = (l / grid.spacing[k]).to_f64_lossy().floor() as i32;
        if 2 * r + 1 > grid.cells[k] as i32 {
            return Err(CgError::Resolution(format!(
                "kernel diameter {} cells exceeds grid axis {} ({} cells)",
                2 * r + 1,
                k,
                grid.cells[k]
            )));
        }
        radius[k] = r;
    }

    let l2 = l * l;
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    for oz in -radius[2]..=radius[2] {
        for oy in -radius[1]..=radius[1] {
            for ox in -radius[0]..=radius[0] {
                let z = [
                    T::of(ox as f64) * grid.spacing[0],
                    T::of(oy as f64) * grid.spacing[1],
                    T::of(oz as f64) * grid.spacing[2],
                ];
                let rho2 = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / l2;
                if rho2 >= T::one() {
                    continue;
                }
                let w = shape.profile(rho2);
                if w == T::zero() {
                    continue;
                }
                offsets.push([ox, oy, oz]);
                raw.push(w);
            }
        }
    }
    // Renormalize to exact discrete unit mass: sum w = 1 with the cell
    // volume folded into the weights.
    let dv = grid.cell_volume();
    let mass = sum_slice(&raw) * dv;
    if !(mass > T::zero()) {
        return Err(CgError::Resolution("kernel mass vanished on this grid".into()));
    }
    // Continuous normalization N in phi^l(z) = N profile(|z|/l) / l^3 chosen
    // so the discrete mass is exactly one: N = l^3 / mass.
    let normalization = l * l * l / mass;
    let weights: Vec<T> = raw.iter().map(|&w| w * dv / mass).collect();
    Ok(MollifierKernel {
        scale: l,
        shape,
        spacing: grid.spacing,
        radius,
        offsets,
        weights,
        normalization,
    })
}

/// Convolution evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvPath {
    /// Direct stencil sums; the identity-critical reference.
    Reference,
    /// Transform-based when profitable, otherwise direct.
    Auto,
    /// Force the transform path (tests).
    Fft,
}

/// Mollified scalar with its support mask (the discrete Omega^l).
#[derive(Debug, Clone)]
pub struct MollifiedScalar<T: Real> {
    pub field: ScalarField<T>,
    pub support: Mask,
}

/// Mollified vector with its support mask.
#[derive(Debug, Clone)]
pub struct MollifiedVector<T: Real> {
    pub field: VectorField<T>,
    pub support: Mask,
}

/// Cells whose full stencil lies inside the domain: everything on the
/// periodic box, else d(center) > l.
pub fn support_mask<T: Real>(grid: &GridSpec<T>, l: T) -> Mask {
    if grid.geometry.is_periodic() {
        return Mask::full(grid.cells);
    }
    let n = grid.total_cells();
    let mut bits = vec![false; n];
    for (idx, b) in bits.iter_mut().enumerate() {
        *b = grid.center_distance(idx) > l;
    }
    Mask::new(grid.cells, bits, 0)
}

fn fft_worthwhile(cells: usize, stencil: usize) -> bool {
    // Direct work ~ cells * stencil; the transform costs a few passes over
    // the (padded) grid. Crossover picked conservatively.
    cells.saturating_mul(stencil) > 64 * cells
}

/// Core convolution: out(x) = sum_z w(z) f(x - z) on the masked cells,
/// zero elsewhere.
fn convolve<T: Real>(
    f: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
    weights: &[T],
    out_mask: &Mask,
    path: ConvPath,
) -> ScalarField<T> {
    let grid = f.grid;
    let use_fft = match path {
        ConvPath::Reference => false,
        ConvPath::Fft => true,
        ConvPath::Auto => fft_worthwhile(grid.total_cells(), kernel.offsets.len()),
    };
    if use_fft {
        return fft::convolve_fft(f, kernel, weights, out_mask);
    }
    convolve_direct(f, kernel, weights, out_mask)
}

fn convolve_direct<T: Real>(
    f: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
    weights: &[T],
    out_mask: &Mask,
) -> ScalarField<T> {
    let grid = f.grid;
    let [nx, ny, nz] = grid.cells;
    let periodic = grid.geometry.is_periodic();
    let r = kernel.radius;
    // Linear deltas valid wherever no wrap occurs.
    let deltas: Vec<isize> = kernel
        .offsets
        .iter()
        .map(|o| -(o[0] as isize + (o[1] as isize) * nx as isize + (o[2] as isize) * (nx * ny) as isize))
        .collect();
    let data = &f.data;
    let mut out = vec![T::zero(); data.len()];
    out.par_chunks_mut(nx)
        .enumerate()
        .for_each(|(row, chunk)| {
            let j = row % ny;
            let k = row / ny;
            let interior_jk = j >= r[1] as usize
                && j + (r[1] as usize) < ny
                && k >= r[2] as usize
                && k + (r[2] as usize) < nz;
            for (i, slot) in chunk.iter_mut().enumerate() {
                let idx = (k * ny + j) * nx + i;
                if !out_mask.get(idx) {
                    continue;
                }
                let interior = interior_jk && i >= r[0] as usize && i + (r[0] as usize) < nx;
                let mut acc = T::zero();
                if interior {
                    for (t, &d) in deltas.iter().enumerate() {
                        let src = (idx as isize + d) as usize;
                        acc = acc + weights[t] * data[src];
                    }
                } else if periodic {
                    for (t, o) in kernel.offsets.iter().enumerate() {
                        let ii = wrap(i as isize - o[0] as isize, nx);
                        let jj = wrap(j as isize - o[1] as isize, ny);
                        let kk = wrap(k as isize - o[2] as isize, nz);
                        acc = acc + weights[t] * data[(kk * ny + jj) * nx + ii];
                    }
                } else {
                    // Bounded shapes: the support mask guarantees every
                    // stencil cell is in range.
                    for (t, o) in kernel.offsets.iter().enumerate() {
                        let ii = (i as isize - o[0] as isize) as usize;
                        let jj = (j as isize - o[1] as isize) as usize;
                        let kk = (k as isize - o[2] as isize) as usize;
                        acc = acc + weights[t] * data[(kk * ny + jj) * nx + ii];
                    }
                }
                *slot = acc;
            }
            let _ = nxy;
        });
    ScalarField { grid, data: out }
}

#[inline]
fn wrap(v: isize, n: usize) -> usize {
    let n = n as isize;
    (((v % n) + n) % n) as usize
}

/// Mollify a scalar field: f^l on the discrete Omega^l (zero outside the
/// returned support mask). Linear in f; min f <= f^l <= max f.
pub fn mollify<T: Real>(
    f: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
    path: ConvPath,
) -> Result<MollifiedScalar<T>> {
    check_kernel_grid(f.grid, kernel)?;
    let support = support_mask(&f.grid, kernel.scale);
    let field = convolve(f, kernel, &kernel.weights, &support, path);
    Ok(MollifiedScalar { field, support })
}

/// Mollify each component of a vector field.
pub fn mollify_vector<T: Real>(
    v: &VectorField<T>,
    kernel: &MollifierKernel<T>,
    path: ConvPath,
) -> Result<MollifiedVector<T>> {
    check_kernel_grid(v.grid, kernel)?;
    let support = support_mask(&v.grid, kernel.scale);
    let mut comps: [Vec<T>; 3] = Default::default();
    for c in 0..3 {
        let f = ScalarField { grid: v.grid, data: v.comps[c].clone() };
        comps[c] = convolve(&f, kernel, &kernel.weights, &support, path).data;
    }
    Ok(MollifiedVector {
        field: VectorField { grid: v.grid, comps },
        support,
    })
}

/// Mollify only at the cells of `where_mask` (intersected with the support);
/// direct stencil, intended for band-restricted evaluations.
pub fn mollify_at<T: Real>(
    f: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
    where_mask: &Mask,
) -> Result<MollifiedScalar<T>> {
    check_kernel_grid(f.grid, kernel)?;
    let support = support_mask(&f.grid, kernel.scale);
    let mut bits = vec![false; support.len()];
    for i in 0..bits.len() {
        bits[i] = support.get(i) && where_mask.get(i);
    }
    let mask = Mask::new(f.grid.cells, bits, 0);
    let field = convolve_direct(f, kernel, &kernel.weights, &mask);
    Ok(MollifiedScalar { field, support: mask })
}

/// D^k f^l by convolving with the analytically differentiated kernel
/// (never by finite-differencing f^l).
pub fn mollified_derivative<T: Real>(
    f: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
    index: DerivIndex,
    path: ConvPath,
) -> Result<MollifiedScalar<T>> {
    check_kernel_grid(f.grid, kernel)?;
    let support = support_mask(&f.grid, kernel.scale);
    let weights = kernel.derivative_weights(index);
    let field = convolve(f, kernel, &weights, &support, path);
    Ok(MollifiedScalar { field, support })
}

/// Kernel-derivative divergence of a vector field: sum_j (D_j phi^l * v_j).
pub fn mollified_divergence<T: Real>(
    v: &VectorField<T>,
    kernel: &MollifierKernel<T>,
    path: ConvPath,
) -> Result<MollifiedScalar<T>> {
    check_kernel_grid(v.grid, kernel)?;
    let support = support_mask(&v.grid, kernel.scale);
    let mut acc = ScalarField::zeros(&v.grid);
    for axis in 0..3 {
        let weights = kernel.derivative_weights(DerivIndex::First(axis));
        let f = ScalarField { grid: v.grid, data: v.comps[axis].clone() };
        let part = convolve(&f, kernel, &weights, &support, path);
        for i in 0..acc.data.len() {
            acc.data[i] = acc.data[i] + part.data[i];
        }
    }
    Ok(MollifiedScalar { field: acc, support })
}

fn check_kernel_grid<T: Real>(grid: GridSpec<T>, kernel: &MollifierKernel<T>) -> Result<()> {
    if grid.spacing != kernel.spacing {
        return Err(CgError::Argument(
            "kernel was built for a different grid spacing".into(),
        ));
    }
    Ok(())
}

/// The four pieces of the commutator identity
/// (f g)^l = f^l g^l + increment - defect, with
/// increment(x) = sum_z w(z) (f(x-z) - f(x)) (g(x-z) - g(x)) and
/// defect = (f - f^l)(g - g^l). All pieces share one stencil, so the
/// identity holds to roundoff on the support.
#[derive(Debug, Clone)]
pub struct CommutatorSplit<T: Real> {
    pub lhs: ScalarField<T>,
    pub resolved: ScalarField<T>,
    pub increment: ScalarField<T>,
    pub defect: ScalarField<T>,
    pub support: Mask,
}

/// Direct-stencil commutator decomposition of (f g)^l.
pub fn commutator_split<T: Real>(
    f: &ScalarField<T>,
    g: &ScalarField<T>,
    kernel: &MollifierKernel<T>,
) -> Result<CommutatorSplit<T>> {
    if !f.grid.same_layout(&g.grid) {
        return Err(CgError::Argument("commutator_split: mismatched grids".into()));
    }
    check_kernel_grid(f.grid, kernel)?;
    let grid = f.grid;
    let support = support_mask(&grid, kernel.scale);
    let product = ScalarField {
        grid,
        data: f.data.iter().zip(&g.data).map(|(&a, &b)| a * b).collect(),
    };
    let lhs = convolve_direct(&product, kernel, &kernel.weights, &support);
    let fl = convolve_direct(f, kernel, &kernel.weights, &support);
    let gl = convolve_direct(g, kernel, &kernel.weights, &support);

    let mut resolved = ScalarField::zeros(&grid);
    let mut defect = ScalarField::zeros(&grid);
    for i in 0..grid.total_cells() {
        if support.get(i) {
            resolved.data[i] = fl.data[i] * gl.data[i];
            defect.data[i] = (f.data[i] - fl.data[i]) * (g.data[i] - gl.data[i]);
        }
    }

    // increment(x): one more stencil pass over the increments product.
    let [nx, ny, nz] = grid.cells;
    let periodic = grid.geometry.is_periodic();
    let fd = &f.data;
    let gd = &g.data;
    let mut inc = vec![T::zero(); grid.total_cells()];
    inc.par_chunks_mut(nx).enumerate().for_each(|(row, chunk)| {
        let j = row % ny;
        let k = row / ny;
        for (i, slot) in chunk.iter_mut().enumerate() {
            let idx = (k * ny + j) * nx + i;
            if !support.get(idx) {
                continue;
            }
            let f0 = fd[idx];
            let g0 = gd[idx];
            let mut acc = T::zero();
            for (t, o) in kernel.offsets.iter().enumerate() {
                let (ii, jj, kk) = if periodic {
                    (
                        wrap(i as isize - o[0] as isize, nx),
                        wrap(j as isize - o[1] as isize, ny),
                        wrap(k as isize - o[2] as isize, nz),
                    )
                } else {
                    (
                        (i as isize - o[0] as isize) as usize,
                        (j as isize - o[1] as isize) as usize,
                        (k as isize - o[2] as isize) as usize,
                    )
                };
                let src = (kk * ny + jj) * nx + ii;
                acc = acc + kernel.weights[t] * (fd[src] - f0) * (gd[src] - g0);
            }
            *slot = acc;
        }
    });
    let increment = ScalarField { grid, data: inc };
    Ok(CommutatorSplit { lhs, resolved, increment, defect, support })
}
