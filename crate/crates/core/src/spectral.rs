//! Cosine/sine tensor-product discretization of the unit box `[0,1]^d`.
//!
//! Scalar fields are expanded in `Π cos(k_i π x_i)`, which satisfies the
//! homogeneous Neumann conditions exactly. Flux component `i` is expanded in
//! `sin(k_i π x_i) Π_{j≠i} cos(k_j π x_j)`, so `q·n = 0` on every face.
//! Collocation nodes are cell midpoints `x_j = (j + 1/2)/n`; the forward
//! transform is a DCT-II (DST-II for the sine direction).
//!
//! Flux coefficients share the scalar multi-index layout. Along its own axis a
//! flux component has no `k_i = 0` sine mode, so that slot stores the Nyquist
//! sine `sin(n π x_i)` instead. Its coupling coefficient `k_i π` is zero in
//! every mode-wise formula, so gradients never excite it and it only relaxes.

use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use serde::{Deserialize, Serialize};

use crate::error::{ChicError, Result};

/// Nodal values of a scalar field on the collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

/// Cosine coefficients `v̂_k`; `v(x) = Σ_k v̂_k Π cos(k_i π x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCoeffs {
    pub values: Vec<f64>,
}

/// Nodal values of the `d` flux components.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub components: Vec<Vec<f64>>,
}

/// Mixed sine/cosine coefficients of the `d` flux components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxCoeffs {
    pub components: Vec<Vec<f64>>,
}

/// Diagonal operators realized in the cosine basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// `A = -Δ` with Neumann conditions.
    Laplacian,
    /// `A0^{r/2}`; negative `r` requires a mean-free input.
    A0Pow(f64),
    /// `(cI + A)^{-1}`.
    InvShifted(f64),
}

pub struct Grid {
    dim: usize,
    n: usize,
    len: usize,
    eig: Vec<f64>,
    weight: Vec<f64>,
    modes: Vec<[usize; 3]>,
    plan_n: Arc<dyn TransformType2And3<f64>>,
    plan_2n: Arc<dyn TransformType2And3<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(ChicError::invalid("dim", format!("must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(ChicError::invalid("n", format!("must be a power of two >= 2, got {n}")));
        }
        let len = n.pow(dim as u32);
        let mut modes = Vec::with_capacity(len);
        let mut eig = Vec::with_capacity(len);
        let mut weight = Vec::with_capacity(len);
        for idx in 0..len {
            let k = unflatten(idx, n, dim);
            let mut lam = 0.0;
            let mut w = 1.0;
            for &ki in k.iter().take(dim) {
                lam += (ki * ki) as f64;
                if ki != 0 {
                    w *= 0.5;
                }
            }
            modes.push(k);
            eig.push(PI * PI * lam);
            weight.push(w);
        }
        let mut planner = DctPlanner::new();
        let plan_n = planner.plan_dct2(n);
        let plan_2n = planner.plan_dct2(2 * n);
        Ok(Grid {
            dim,
            n,
            len,
            eig,
            weight,
            modes,
            plan_n,
            plan_2n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of scalar degrees of freedom, `n^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of points on the 2x oversampled grid.
    pub fn padded_len(&self) -> usize {
        (2 * self.n).pow(self.dim as u32)
    }

    /// `λ_k = π²|k|²`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig[self.len - 1]
    }

    /// `∫ (Π cos(k_i π x_i))² dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn mode(&self, idx: usize) -> [usize; 3] {
        self.modes[idx]
    }

    /// `k_axis π`, the coupling coefficient between scalar mode `idx` and
    /// flux component `axis` in the same slot. Zero for Nyquist slots.
    pub fn wavenumber(&self, idx: usize, axis: usize) -> f64 {
        self.modes[idx][axis] as f64 * PI
    }

    /// `∫ s_{i,k}² dx` for flux component `comp` in slot `idx`.
    pub fn flux_weight(&self, comp: usize, idx: usize) -> f64 {
        let k = self.modes[idx];
        let mut w = 0.5;
        for (j, &kj) in k.iter().enumerate().take(self.dim) {
            if j != comp && kj != 0 {
                w *= 0.5;
            }
        }
        w
    }

    /// `π²|k|²` of the flux basis function in slot `idx` (Nyquist slots use `k_comp = n`).
    pub fn flux_eigenvalue(&self, comp: usize, idx: usize) -> f64 {
        let k = self.modes[idx];
        let mut s = 0.0;
        for (j, &kj) in k.iter().enumerate().take(self.dim) {
            let kk = if j == comp && kj == 0 { self.n } else { kj };
            s += (kk * kk) as f64;
        }
        PI * PI * s
    }

    /// Midpoint collocation nodes, flat row-major order (last axis fastest).
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        (0..self.len)
            .map(|idx| {
                let j = unflatten(idx, self.n, self.dim);
                let mut x = [0.0; 3];
                for a in 0..self.dim {
                    x[a] = (j[a] as f64 + 0.5) / self.n as f64;
                }
                x
            })
            .collect()
    }

    /// Nodes of the 2x oversampled grid used for nonlinear evaluation and quadrature.
    pub fn padded_nodes(&self) -> Vec<[f64; 3]> {
        let m = 2 * self.n;
        (0..self.padded_len())
            .map(|idx| {
                let j = unflatten(idx, m, self.dim);
                let mut x = [0.0; 3];
                for a in 0..self.dim {
                    x[a] = (j[a] as f64 + 0.5) / m as f64;
                }
                x
            })
            .collect()
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        ScalarField {
            values: self.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn sample_flux(&self, f: impl Fn(usize, [f64; 3]) -> f64) -> FluxField {
        let nodes = self.nodes();
        FluxField {
            components: (0..self.dim)
                .map(|c| nodes.iter().map(|&x| f(c, x)).collect())
                .collect(),
        }
    }

    pub fn zeros(&self) -> ScalarCoeffs {
        ScalarCoeffs::zeros(self.len)
    }

    pub fn zero_flux(&self) -> FluxCoeffs {
        FluxCoeffs::zeros(self.dim, self.len)
    }

    /// Constant field `c` in coefficient form.
    pub fn constant(&self, c: f64) -> ScalarCoeffs {
        let mut v = self.zeros();
        v.values[0] = c;
        v
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len {
            return Err(ChicError::DimensionMismatch {
                expected: self.len,
                got,
            });
        }
        Ok(())
    }

    fn check_flux(&self, comps: &[Vec<f64>]) -> Result<()> {
        if comps.len() != self.dim {
            return Err(ChicError::DimensionMismatch {
                expected: self.dim,
                got: comps.len(),
            });
        }
        for c in comps {
            self.check_len(c.len())?;
        }
        Ok(())
    }

    pub fn to_spectral(&self, field: &ScalarField) -> Result<ScalarCoeffs> {
        self.check_len(field.values.len())?;
        let mut data = field.values.clone();
        for axis in 0..self.dim {
            for_each_line(&mut data, self.n, self.dim, axis, |line| {
                cos_forward(self.plan_n.as_ref(), line)
            });
        }
        Ok(ScalarCoeffs { values: data })
    }

    pub fn to_nodal(&self, coeffs: &ScalarCoeffs) -> Result<ScalarField> {
        self.check_len(coeffs.values.len())?;
        let mut data = coeffs.values.clone();
        for axis in 0..self.dim {
            for_each_line(&mut data, self.n, self.dim, axis, |line| {
                cos_inverse(self.plan_n.as_ref(), line)
            });
        }
        Ok(ScalarField { values: data })
    }

    pub fn flux_to_spectral(&self, field: &FluxField) -> Result<FluxCoeffs> {
        self.check_flux(&field.components)?;
        let components = field
            .components
            .iter()
            .enumerate()
            .map(|(comp, vals)| {
                let mut data = vals.clone();
                for axis in 0..self.dim {
                    for_each_line(&mut data, self.n, self.dim, axis, |line| {
                        if axis == comp {
                            sin_forward(self.plan_n.as_ref(), line)
                        } else {
                            cos_forward(self.plan_n.as_ref(), line)
                        }
                    });
                }
                data
            })
            .collect();
        Ok(FluxCoeffs { components })
    }

    pub fn flux_to_nodal(&self, coeffs: &FluxCoeffs) -> Result<FluxField> {
        self.check_flux(&coeffs.components)?;
        let components = coeffs
            .components
            .iter()
            .enumerate()
            .map(|(comp, vals)| {
                let mut data = vals.clone();
                for axis in 0..self.dim {
                    for_each_line(&mut data, self.n, self.dim, axis, |line| {
                        if axis == comp {
                            sin_inverse(self.plan_n.as_ref(), line)
                        } else {
                            cos_inverse(self.plan_n.as_ref(), line)
                        }
                    });
                }
                data
            })
            .collect();
        Ok(FluxField { components })
    }

    pub fn apply(&self, coeffs: &ScalarCoeffs, op: Operator) -> Result<ScalarCoeffs> {
        self.check_len(coeffs.values.len())?;
        let v = &coeffs.values;
        let values = match op {
            Operator::Laplacian => v.iter().zip(&self.eig).map(|(a, l)| a * l).collect(),
            Operator::A0Pow(r) => {
                if r < 0.0 {
                    require_mean_free(coeffs)?;
                }
                let p = 0.5 * r;
                v.iter()
                    .zip(&self.eig)
                    .map(|(a, &l)| if l == 0.0 { 0.0 } else { a * l.powf(p) })
                    .collect()
            }
            Operator::InvShifted(c) => v.iter().zip(&self.eig).map(|(a, l)| a / (c + l)).collect(),
        };
        Ok(ScalarCoeffs { values })
    }

    /// `∇v`: maps cosine mode `k` to `-k_i π` times the sine mode in component `i`.
    pub fn gradient(&self, coeffs: &ScalarCoeffs) -> FluxCoeffs {
        let components = (0..self.dim)
            .map(|comp| {
                coeffs
                    .values
                    .iter()
                    .enumerate()
                    .map(|(idx, a)| -self.wavenumber(idx, comp) * a)
                    .collect()
            })
            .collect();
        FluxCoeffs { components }
    }

    /// `∇·q`; Nyquist slots have no cosine partner and drop out.
    pub fn divergence(&self, flux: &FluxCoeffs) -> ScalarCoeffs {
        let mut out = vec![0.0; self.len];
        for (comp, vals) in flux.components.iter().enumerate() {
            for (idx, o) in out.iter_mut().enumerate() {
                *o += self.wavenumber(idx, comp) * vals[idx];
            }
        }
        ScalarCoeffs { values: out }
    }

    /// Discrete curl coefficients `k_b π q_a - k_a π q_b` for each axis pair `a < b`.
    pub fn curl(&self, flux: &FluxCoeffs) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in (a + 1)..self.dim {
                out.push(
                    (0..self.len)
                        .map(|idx| {
                            self.wavenumber(idx, b) * flux.components[a][idx]
                                - self.wavenumber(idx, a) * flux.components[b][idx]
                        })
                        .collect(),
                );
            }
        }
        out
    }

    pub fn mean_and_deflate(&self, field: &ScalarField) -> Result<(f64, ScalarField)> {
        self.check_len(field.values.len())?;
        let mean = field.values.iter().sum::<f64>() / self.len as f64;
        let values = field.values.iter().map(|v| v - mean).collect();
        Ok((mean, ScalarField { values }))
    }

    /// `⟨u, v⟩` in L²(Ω) via the weighted coefficient sum.
    pub fn inner(&self, u: &ScalarCoeffs, v: &ScalarCoeffs) -> f64 {
        u.values
            .iter()
            .zip(&v.values)
            .zip(&self.weight)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn norm_sq(&self, u: &ScalarCoeffs) -> f64 {
        self.inner(u, u)
    }

    /// `Σ_k w_k f(λ_k) v̂_k²`, the building block of every diagonal norm.
    pub fn spectral_sum(&self, u: &ScalarCoeffs, f: impl Fn(f64) -> f64) -> f64 {
        u.values
            .iter()
            .zip(&self.weight)
            .zip(&self.eig)
            .map(|((a, w), &l)| a * a * w * f(l))
            .sum()
    }

    pub fn flux_inner(&self, p: &FluxCoeffs, q: &FluxCoeffs) -> f64 {
        let mut s = 0.0;
        for comp in 0..self.dim {
            for idx in 0..self.len {
                s += p.components[comp][idx] * q.components[comp][idx] * self.flux_weight(comp, idx);
            }
        }
        s
    }

    pub fn flux_norm_sq(&self, q: &FluxCoeffs) -> f64 {
        self.flux_inner(q, q)
    }

    /// `Σ ∫|∇q_i|²`.
    pub fn flux_grad_norm_sq(&self, q: &FluxCoeffs) -> f64 {
        let mut s = 0.0;
        for comp in 0..self.dim {
            for idx in 0..self.len {
                let a = q.components[comp][idx];
                s += a * a * self.flux_weight(comp, idx) * self.flux_eigenvalue(comp, idx);
            }
        }
        s
    }

    /// Evaluate the represented field at an arbitrary point.
    pub fn eval_at(&self, coeffs: &ScalarCoeffs, x: [f64; 3]) -> f64 {
        coeffs
            .values
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let k = self.modes[idx];
                let mut b = *a;
                for ax in 0..self.dim {
                    b *= (k[ax] as f64 * PI * x[ax]).cos();
                }
                b
            })
            .sum()
    }

    /// Evaluate flux component `comp` at an arbitrary point.
    pub fn eval_flux_at(&self, flux: &FluxCoeffs, comp: usize, x: [f64; 3]) -> f64 {
        flux.components[comp]
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let k = self.modes[idx];
                let mut b = *a;
                for ax in 0..self.dim {
                    if ax == comp {
                        let kk = if k[ax] == 0 { self.n } else { k[ax] };
                        b *= (kk as f64 * PI * x[ax]).sin();
                    } else {
                        b *= (k[ax] as f64 * PI * x[ax]).cos();
                    }
                }
                b
            })
            .sum()
    }

    /// Values of the represented field on the 2x oversampled grid.
    pub fn padded_nodal(&self, coeffs: &ScalarCoeffs) -> Vec<f64> {
        let m = 2 * self.n;
        let mut data = vec![0.0; self.padded_len()];
        for (idx, &a) in coeffs.values.iter().enumerate() {
            data[flatten(self.modes[idx], m, self.dim)] = a;
        }
        for axis in 0..self.dim {
            for_each_line(&mut data, m, self.dim, axis, |line| {
                cos_inverse(self.plan_2n.as_ref(), line)
            });
        }
        data
    }

    /// Projection of oversampled nodal values onto the retained cosine modes.
    pub fn project_padded(&self, values: &[f64]) -> ScalarCoeffs {
        let m = 2 * self.n;
        let mut data = values.to_vec();
        for axis in 0..self.dim {
            for_each_line(&mut data, m, self.dim, axis, |line| {
                cos_forward(self.plan_2n.as_ref(), line)
            });
        }
        let values = (0..self.len)
            .map(|idx| data[flatten(self.modes[idx], m, self.dim)])
            .collect();
        ScalarCoeffs { values }
    }

    /// Dealiased pointwise map: evaluate on the oversampled grid, project back.
    pub fn map_dealiased(&self, coeffs: &ScalarCoeffs, f: impl Fn(f64) -> f64) -> ScalarCoeffs {
        let mut nodal = self.padded_nodal(coeffs);
        for v in nodal.iter_mut() {
            *v = f(*v);
        }
        self.project_padded(&nodal)
    }

    /// Collocation mean of oversampled values (exact for polynomials of degree ≤ 4 in the field).
    pub fn padded_mean(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }

    /// `⟨f(v), 1⟩` by oversampled quadrature.
    pub fn integrate_map(&self, coeffs: &ScalarCoeffs, f: impl Fn(f64) -> f64) -> f64 {
        let nodal = self.padded_nodal(coeffs);
        nodal.iter().map(|&v| f(v)).sum::<f64>() / nodal.len() as f64
    }
}

pub(crate) fn require_mean_free(coeffs: &ScalarCoeffs) -> Result<()> {
    let mean = coeffs.values[0];
    let scale = coeffs.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if mean.abs() > 1e-12 * scale {
        return Err(ChicError::NonzeroMean { mean });
    }
    Ok(())
}

fn unflatten(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut k = [0; 3];
    for a in (0..dim).rev() {
        k[a] = idx % n;
        idx /= n;
    }
    k
}

fn flatten(k: [usize; 3], n: usize, dim: usize) -> usize {
    let mut idx = 0;
    for &ka in k.iter().take(dim) {
        idx = idx * n + ka;
    }
    idx
}

/// Apply `f` to every 1D line of `data` along `axis` (shape `[n; dim]`, row-major).
fn for_each_line(data: &mut [f64], n: usize, dim: usize, axis: usize, mut f: impl FnMut(&mut [f64])) {
    let stride = n.pow((dim - 1 - axis) as u32);
    let block = stride * n;
    let mut line = vec![0.0; n];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[base + j * stride];
            }
            f(&mut line);
            for (j, l) in line.iter().enumerate() {
                data[base + j * stride] = *l;
            }
        }
    }
}

fn cos_forward(plan: &dyn TransformType2And3<f64>, line: &mut [f64]) {
    let n = line.len() as f64;
    plan.process_dct2(line);
    line[0] /= n;
    for v in line.iter_mut().skip(1) {
        *v *= 2.0 / n;
    }
}

fn cos_inverse(plan: &dyn TransformType2And3<f64>, line: &mut [f64]) {
    line[0] *= 2.0;
    plan.process_dct3(line);
}

fn sin_forward(plan: &dyn TransformType2And3<f64>, line: &mut [f64]) {
    let len = line.len();
    let n = len as f64;
    plan.process_dst2(line);
    // DST-II output m holds wavenumber m+1; rotate so slot k holds k and slot 0 holds n.
    let nyquist = line[len - 1] / n;
    for m in (0..len - 1).rev() {
        line[m + 1] = line[m] * 2.0 / n;
    }
    line[0] = nyquist;
}

fn sin_inverse(plan: &dyn TransformType2And3<f64>, line: &mut [f64]) {
    let len = line.len();
    let nyquist = line[0];
    for m in 0..len - 1 {
        line[m] = line[m + 1];
    }
    line[len - 1] = 2.0 * nyquist;
    plan.process_dst3(line);
}

impl ScalarCoeffs {
    pub fn zeros(len: usize) -> Self {
        ScalarCoeffs {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Spatial mean `⟨v, 1⟩` (unit measure).
    pub fn mean(&self) -> f64 {
        self.values[0]
    }

    pub fn deflated(&self) -> ScalarCoeffs {
        let mut out = self.clone();
        out.values[0] = 0.0;
        out
    }

    pub fn add(&self, other: &ScalarCoeffs) -> ScalarCoeffs {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarCoeffs) -> ScalarCoeffs {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> ScalarCoeffs {
        ScalarCoeffs {
            values: self.values.iter().map(|a| a * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &ScalarCoeffs) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn zip_with(&self, other: &ScalarCoeffs, f: impl Fn(f64, f64) -> f64) -> ScalarCoeffs {
        ScalarCoeffs {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl FluxCoeffs {
    pub fn zeros(dim: usize, len: usize) -> Self {
        FluxCoeffs {
            components: vec![vec![0.0; len]; dim],
        }
    }

    pub fn add(&self, other: &FluxCoeffs) -> FluxCoeffs {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FluxCoeffs) -> FluxCoeffs {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> FluxCoeffs {
        FluxCoeffs {
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|a| a * s).collect())
                .collect(),
        }
    }

    pub fn axpy(&mut self, s: f64, other: &FluxCoeffs) {
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            for (a, b) in c.iter_mut().zip(o) {
                *a += s * b;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    fn zip_with(&self, other: &FluxCoeffs, f: impl Fn(f64, f64) -> f64) -> FluxCoeffs {
        FluxCoeffs {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(c, o)| c.iter().zip(o).map(|(a, b)| f(*a, *b)).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField {
            values: (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn cosine_mode_maps_to_unit_coefficient() {
        let grid = Grid::new(1, 16).unwrap();
        let f = grid.sample(|x| (2.0 * PI * x[0]).cos());
        let c = grid.to_spectral(&f).unwrap();
        for (k, v) in c.values.iter().enumerate() {
            let expect = if k == 2 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-14, "k={k} v={v}");
        }
    }

    #[test]
    fn constant_maps_to_mean_slot() {
        let grid = Grid::new(2, 8).unwrap();
        let f = grid.sample(|_| 3.5);
        let c = grid.to_spectral(&f).unwrap();
        assert!((c.values[0] - 3.5).abs() < 1e-14);
        assert!(c.values[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn round_trip_scalar_and_flux() {
        for (dim, n) in [(1, 32), (2, 8), (3, 4)] {
            let grid = Grid::new(dim, n).unwrap();
            let f = random_field(&grid, 7);
            let back = grid.to_nodal(&grid.to_spectral(&f).unwrap()).unwrap();
            for (a, b) in f.values.iter().zip(&back.values) {
                assert!((a - b).abs() < 1e-12);
            }
            let q = FluxField {
                components: (0..dim).map(|c| random_field(&grid, 11 + c as u64).values).collect(),
            };
            let qb = grid.flux_to_nodal(&grid.flux_to_spectral(&q).unwrap()).unwrap();
            for (a, b) in q.components.iter().flatten().zip(qb.components.iter().flatten()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let grid = Grid::new(1, 8).unwrap();
        let bad = ScalarField { values: vec![0.0; 7] };
        assert!(matches!(
            grid.to_spectral(&bad),
            Err(ChicError::DimensionMismatch { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn operator_examples() {
        let grid = Grid::new(1, 16).unwrap();
        let c1 = grid.to_spectral(&grid.sample(|x| (PI * x[0]).cos())).unwrap();
        let a = grid.apply(&c1, Operator::Laplacian).unwrap();
        assert!((a.values[1] - PI * PI).abs() < 1e-12);

        let c3 = grid.to_spectral(&grid.sample(|x| (3.0 * PI * x[0]).cos())).unwrap();
        let inv = grid.apply(&c3, Operator::A0Pow(-2.0)).unwrap();
        assert!((inv.values[3] - 1.0 / (9.0 * PI * PI)).abs() < 1e-14);

        let k = grid.constant(2.0);
        let ak = grid.apply(&k, Operator::Laplacian).unwrap();
        assert!(ak.values.iter().all(|v| *v == 0.0));
        assert!(matches!(
            grid.apply(&k, Operator::A0Pow(-1.0)),
            Err(ChicError::NonzeroMean { .. })
        ));

        let r = grid.apply(&c1, Operator::InvShifted(1.0)).unwrap();
        assert!((r.values[1] - 1.0 / (1.0 + PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn gradient_and_divergence_examples() {
        let grid = Grid::new(1, 16).unwrap();
        let c1 = grid.to_spectral(&grid.sample(|x| (PI * x[0]).cos())).unwrap();
        let g = grid.gradient(&c1);
        let gn = grid.flux_to_nodal(&g).unwrap();
        for (x, v) in grid.nodes().iter().zip(&gn.components[0]) {
            assert!((v + PI * (PI * x[0]).sin()).abs() < 1e-12);
        }
        let c2 = grid.to_spectral(&grid.sample(|x| (2.0 * PI * x[0]).cos())).unwrap();
        let lap = grid.divergence(&grid.gradient(&c2));
        assert!((lap.values[2] + 4.0 * PI * PI).abs() < 1e-12);
        let gz = grid.gradient(&grid.constant(5.0));
        assert_eq!(gz.max_abs(), 0.0);
    }

    #[test]
    fn mean_and_deflate_examples() {
        let grid = Grid::new(1, 32).unwrap();
        let (m, d) = grid
            .mean_and_deflate(&grid.sample(|x| 2.0 + (PI * x[0]).cos()))
            .unwrap();
        assert!((m - 2.0).abs() < 1e-14);
        for (x, v) in grid.nodes().iter().zip(&d.values) {
            assert!((v - (PI * x[0]).cos()).abs() < 1e-14);
        }
        let (m, d) = grid.mean_and_deflate(&grid.sample(|_| 0.7)).unwrap();
        assert!((m - 0.7).abs() < 1e-15 && d.values.iter().all(|v| v.abs() < 1e-15));
        let (m, _) = grid
            .mean_and_deflate(&grid.sample(|x| (3.0 * PI * x[0]).cos()))
            .unwrap();
        assert!(m.abs() < 1e-15);
    }

    #[test]
    fn flux_has_no_normal_component_on_faces() {
        let grid = Grid::new(2, 8).unwrap();
        let q = FluxField {
            components: (0..2).map(|c| random_field(&grid, 40 + c as u64).values).collect(),
        };
        let qc = grid.flux_to_spectral(&q).unwrap();
        for t in [0.1, 0.37, 0.9] {
            for face in [0.0, 1.0] {
                let v0 = grid.eval_flux_at(&qc, 0, [face, t, 0.0]);
                let v1 = grid.eval_flux_at(&qc, 1, [t, face, 0.0]);
                assert!(v0.abs() < 1e-12 && v1.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dealiased_cube_is_exact() {
        let grid = Grid::new(1, 16).unwrap();
        let c = grid.to_spectral(&grid.sample(|x| (PI * x[0]).cos())).unwrap();
        // cos³ = (3 cos + cos 3·)/4
        let cube = grid.map_dealiased(&c, |v| v * v * v);
        assert!((cube.values[1] - 0.75).abs() < 1e-14);
        assert!((cube.values[3] - 0.25).abs() < 1e-14);
        let q = grid.integrate_map(&c, |v| v.powi(4));
        assert!((q - 3.0 / 8.0).abs() < 1e-14);
    }
}
