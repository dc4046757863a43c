//! Lifting low-dimensional problems into a large ambient space.
//!
//! The ambient domain is always `[-1, 1]^D`. A point `x` is optionally
//! rotated (`y = Q x`), the active coordinates of `y` are picked out and each
//! is mapped affinely from `[-1, 1]` onto the base function's native interval.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Objective, Optimum};
use crate::error::{config_err, Error, Result};
use crate::geometry::DomainBounds;
use crate::linalg::{axpy, dot, norm};

/// Dense orthogonal matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    data: Vec<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `Q x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Qᵀ y`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, self.row(i), &mut out);
        }
        out
    }

    /// `max |QᵀQ - I|` over all entries.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let s: f64 = (0..d).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(libm::fabs(s - target));
            }
        }
        worst
    }
}

/// Seeded random orthogonal matrix.
///
/// A matrix of standard normal draws is orthonormalized column by column
/// (modified Gram-Schmidt, applied twice), which fixes the triangular factor
/// to a positive diagonal. If the result is a reflection the first column is
/// negated, so `det Q = +1`; in one dimension this always yields `Q = (1)`.
pub fn random_rotation(d: usize, seed: u64) -> Result<Rotation> {
    if d == 0 {
        return Err(config_err("rotation dimension must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // columns[j] is column j of Q.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    while columns.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let original = norm(&v);
        for _ in 0..2 {
            for q in &columns {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let n = norm(&v);
        // Numerically rank deficient draw: discard and redraw the column.
        if n.is_nan() || n <= 1e-8 * original {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        columns.push(v);
    }
    let mut data = vec![0.0; d * d];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * d + j] = *v;
        }
    }
    let mut q = Rotation { dim: d, data };
    if determinant_sign(&q) < 0.0 {
        for i in 0..d {
            q.data[i * d] = -q.data[i * d];
        }
    }
    Ok(q)
}

/// Sign of the determinant via LU with partial pivoting.
fn determinant_sign(q: &Rotation) -> f64 {
    let d = q.dim;
    let mut a = q.data.clone();
    let mut sign = 1.0;
    for k in 0..d {
        let pivot = (k..d)
            .max_by(|&i, &j| libm::fabs(a[i * d + k]).total_cmp(&libm::fabs(a[j * d + k])))
            .unwrap_or(k);
        if a[pivot * d + k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            for c in 0..d {
                a.swap(k * d + c, pivot * d + c);
            }
            sign = -sign;
        }
        let p = a[k * d + k];
        if p < 0.0 {
            sign = -sign;
        }
        for i in k + 1..d {
            let factor = a[i * d + k] / p;
            if factor != 0.0 {
                for c in k..d {
                    a[i * d + c] -= factor * a[k * d + c];
                }
            }
        }
    }
    sign
}

/// How a base problem sits inside the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpec {
    pub ambient_dim: usize,
    pub active_indices: Vec<usize>,
    pub rotation: Option<Rotation>,
    pub rotation_seed: Option<u64>,
}

impl EmbeddingSpec {
    pub fn axis_aligned(ambient_dim: usize, active_indices: Vec<usize>) -> Result<Self> {
        let spec = Self {
            ambient_dim,
            active_indices,
            rotation: None,
            rotation_seed: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rotated(ambient_dim: usize, active_indices: Vec<usize>, seed: u64) -> Result<Self> {
        let spec = Self {
            ambient_dim,
            active_indices,
            rotation: Some(random_rotation(ambient_dim.max(1), seed)?),
            rotation_seed: Some(seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 {
            return Err(config_err("ambient dimension must be >= 1"));
        }
        for (n, &i) in self.active_indices.iter().enumerate() {
            if i >= self.ambient_dim {
                return Err(config_err(format!(
                    "active index {i} out of range for ambient dimension {}",
                    self.ambient_dim
                )));
            }
            if self.active_indices[..n].contains(&i) {
                return Err(config_err(format!("active index {i} repeated")));
            }
        }
        if let Some(q) = &self.rotation {
            if q.dim() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    found: q.dim(),
                });
            }
        }
        Ok(())
    }
}

/// A base objective lifted into `[-1, 1]^D`.
#[derive(Debug, Clone)]
pub struct Embedded<O> {
    base: O,
    spec: EmbeddingSpec,
    bounds: DomainBounds,
    optimum: Option<Optimum>,
    name: String,
}

/// Wraps `base` according to `spec`.
pub fn embed<O: Objective>(base: O, spec: EmbeddingSpec) -> Result<Embedded<O>> {
    spec.validate()?;
    if spec.active_indices.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: spec.active_indices.len(),
        });
    }
    let bounds = DomainBounds::hypercube(spec.ambient_dim, -1.0, 1.0)?;
    let name = format!(
        "{}-{}{}",
        base.name(),
        spec.ambient_dim,
        if spec.rotation.is_some() { "r" } else { "" }
    );
    let mut embedded = Embedded {
        base,
        spec,
        bounds,
        optimum: None,
        name,
    };
    if embedded.spec.rotation.is_none() {
        embedded.optimum = embedded.base.optimum().map(|o| Optimum {
            point: embedded.ambient_preimage(&o.point),
            value: o.value,
        });
    }
    Ok(embedded)
}

impl<O: Objective> Embedded<O> {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn spec(&self) -> &EmbeddingSpec {
        &self.spec
    }

    /// Base-space point seen by the base function at ambient point `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let base_bounds = self.base.bounds();
        self.spec
            .active_indices
            .iter()
            .enumerate()
            .map(|(j, &idx)| {
                let z = match &self.spec.rotation {
                    Some(q) => dot(q.row(idx), x),
                    None => x[idx],
                };
                base_bounds.lower()[j] + (z + 1.0) * 0.5 * base_bounds.width(j)
            })
            .collect()
    }

    /// Ambient point with zero inactive components (before rotation) whose
    /// projection is `base_point`: `x = Qᵀ y`.
    pub fn ambient_preimage(&self, base_point: &[f64]) -> Vec<f64> {
        let base_bounds = self.base.bounds();
        let mut y = vec![0.0; self.spec.ambient_dim];
        for (j, &idx) in self.spec.active_indices.iter().enumerate() {
            y[idx] = 2.0 * (base_point[j] - base_bounds.lower()[j]) / base_bounds.width(j) - 1.0;
        }
        match &self.spec.rotation {
            Some(q) => q.apply_transpose(&y),
            None => y,
        }
    }
}

impl<O: Objective> Objective for Embedded<O> {
    fn name(&self) -> &str {
        &self.name
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.base.evaluate(&self.project(x))
    }
    fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{branin2, hartmann6};
    use super::*;

    #[test]
    fn one_dimensional_rotation_is_plus_one() {
        for seed in 0..20 {
            assert_eq!(random_rotation(1, seed).unwrap().get(0, 0), 1.0);
        }
    }

    #[test]
    fn rotation_is_orthogonal_and_proper() {
        for d in [2, 3, 10, 50] {
            let q = random_rotation(d, 9).unwrap();
            assert!(q.orthogonality_error() < 1e-10, "d={d}");
            assert_eq!(determinant_sign(&q), 1.0);
        }
    }

    #[test]
    fn rotation_seeds() {
        let a = random_rotation(8, 1).unwrap();
        assert_eq!(a, random_rotation(8, 1).unwrap());
        let b = random_rotation(8, 2).unwrap();
        assert!(a
            .data
            .iter()
            .zip(&b.data)
            .any(|(x, y)| (x - y).abs() > 1e-6));
    }

    #[test]
    fn spec_validation() {
        assert!(EmbeddingSpec::axis_aligned(5, vec![0, 5]).is_err());
        assert!(EmbeddingSpec::axis_aligned(5, vec![1, 1]).is_err());
        let spec = EmbeddingSpec::axis_aligned(5, vec![0, 1, 2]).unwrap();
        assert!(matches!(
            embed(branin2(), spec),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_embedding_matches_base_after_bound_map() {
        let base = hartmann6();
        let emb = embed(
            hartmann6(),
            EmbeddingSpec::axis_aligned(6, (0..6).collect()).unwrap(),
        )
        .unwrap();
        let x = [-0.9, -0.2, 0.0, 0.3, 0.75, 1.0];
        let mapped: Vec<f64> = x.iter().map(|v| (v + 1.0) / 2.0).collect();
        assert!((emb.evaluate(&x) - base.evaluate(&mapped)).abs() < 1e-12);

        let o = emb.optimum().unwrap();
        assert!((emb.evaluate(&o.point) - o.value).abs() < 1e-9);
    }

    #[test]
    fn rotated_embedding_has_no_reported_optimum() {
        let emb = embed(
            branin2(),
            EmbeddingSpec::rotated(10, vec![3, 7], 5).unwrap(),
        )
        .unwrap();
        assert!(emb.optimum().is_none());
        let x = emb.ambient_preimage(&[core::f64::consts::PI, 2.275]);
        assert!((emb.evaluate(&x) - crate::benchmarks::Branin::MIN_VALUE).abs() < 1e-9);
    }
}
