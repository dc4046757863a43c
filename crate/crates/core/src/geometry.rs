//! The anisotropic search box and its updates.
//!
//! A [`SearchBox`] is a parallelepiped spanned by `d` basis vectors around the
//! current point. Candidate moves are random combinations
//! `Δ = Σ r_i b_i`, `r_i ~ U[-1, 1]`, and the box is reshaped after every
//! iteration by the rank-one map
//!
//! ```text
//! b_j <- (I + (ρ - 1) Δ Δᵀ / ‖Δ‖²) b_j
//! ```
//!
//! which stretches (`ρ > 1`) or squeezes (`ρ < 1`) every basis vector along
//! `Δ` and leaves the orthogonal complement untouched.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::{config_err, Error, Result};
use crate::linalg::{axpy, dot, norm, norm_sq, scale};

/// Displacements with a squared norm below this are redrawn and refused by
/// [`SearchBox::apply_affine`].
pub const ZERO_DISPLACEMENT_GUARD: f64 = 1e-24;

/// Maximum number of draws [`sample_displacement`] attempts before giving up.
pub const MAX_RESAMPLES: usize = 16;

/// Lower norm clamp as a fraction of the upper clamp (the domain diagonal).
pub const MIN_LEN_FRACTION: f64 = 1e-12;

const COLLAPSE_TOLERANCE: f64 = 1e-9;

/// Axis-aligned search hyperinterval `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DomainBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(config_err("bounds must have at least one coordinate"));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(config_err(alloc::format!(
                    "coordinate {i}: bounds [{lo}, {hi}] are not a finite, non-empty interval"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn hypercube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Length of the main diagonal `‖upper - lower‖`.
    pub fn diagonal(&self) -> f64 {
        libm::sqrt((0..self.dim()).map(|i| self.width(i) * self.width(i)).sum())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Componentwise projection of `x` onto the box.
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
            .collect()
    }

    /// Draws a point uniformly inside the bounds.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (lo + (hi - lo) * rng.random::<f64>()).min(hi))
            .collect()
    }
}

/// A candidate offset from the current point.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement(Vec<f64>);

impl Displacement {
    pub fn new(delta: Vec<f64>) -> Self {
        Self(delta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    /// `x + sign * Δ`.
    pub fn offset(&self, x: &[f64], sign: f64) -> Vec<f64> {
        x.iter()
            .zip(&self.0)
            .map(|(xi, di)| xi + sign * di)
            .collect()
    }
}

impl core::ops::Neg for &Displacement {
    type Output = Displacement;

    fn neg(self) -> Displacement {
        Displacement(self.0.iter().map(|v| -v).collect())
    }
}

/// Summary of the basis lengths of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMetrics {
    pub min_len: f64,
    pub max_len: f64,
    /// `min_len / max_len`, in `(0, 1]`.
    pub ratio: f64,
    /// Index of the longest basis vector (lowest index on ties).
    pub dominant: usize,
}

/// The search region: `d` basis vectors of dimension `d`, stored row-major.
///
/// Values are immutable; every update returns a new box. Basis norms are kept
/// inside `[len_min, len_max]` by rescaling offending vectors after each
/// update.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    dim: usize,
    basis: Vec<f64>,
    len_min: f64,
    len_max: f64,
}

impl SearchBox {
    /// Axis-aligned initial box: `b_i = eta * (upper_i - lower_i) * e_i`.
    pub fn init(bounds: &DomainBounds, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(config_err(alloc::format!(
                "eta must lie in (0, 1), got {eta}"
            )));
        }
        let d = bounds.dim();
        let mut basis = vec![0.0; d * d];
        for i in 0..d {
            basis[i * d + i] = eta * bounds.width(i);
        }
        let len_max = bounds.diagonal();
        Ok(Self {
            dim: d,
            basis,
            len_min: MIN_LEN_FRACTION * len_max,
            len_max,
        })
    }

    /// Builds a box from explicit basis vectors with no effective norm clamp.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_vectors_with_limits(vectors, f64::MIN_POSITIVE, f64::MAX)
    }

    pub fn from_vectors_with_limits(
        vectors: Vec<Vec<f64>>,
        len_min: f64,
        len_max: f64,
    ) -> Result<Self> {
        let d = vectors.len();
        if d == 0 {
            return Err(config_err("a search box needs at least one basis vector"));
        }
        if !(len_min > 0.0 && len_min <= len_max) {
            return Err(config_err(
                "norm limits must satisfy 0 < len_min <= len_max",
            ));
        }
        let mut basis = Vec::with_capacity(d * d);
        for v in &vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            let n = norm(v);
            if !v.iter().all(|c| c.is_finite()) || n <= 0.0 {
                return Err(config_err("basis vectors must be finite and non-zero"));
            }
            basis.extend_from_slice(v);
        }
        Ok(Self {
            dim: d,
            basis,
            len_min,
            len_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self, i: usize) -> &[f64] {
        &self.basis[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.basis.chunks_exact(self.dim)
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vectors().map(norm).collect()
    }

    pub fn len_limits(&self) -> (f64, f64) {
        (self.len_min, self.len_max)
    }

    /// Rank-one reshaping along `delta` by factor `rho`.
    pub fn apply_affine(&self, delta: &Displacement, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if delta.0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: delta.0.len(),
            });
        }
        let nsq = delta.norm_sq();
        if nsq.is_nan() || nsq < ZERO_DISPLACEMENT_GUARD {
            return Err(Error::ZeroDisplacement(nsq));
        }
        let mut next = self.clone();
        let delta = delta.as_slice();
        for b in next.basis.chunks_exact_mut(self.dim) {
            let coef = (rho - 1.0) * dot(delta, b) / nsq;
            axpy(coef, delta, b);
        }
        next.clamp_norms()?;
        Ok(next)
    }

    /// Uniform scaling `b_i <- rho * b_i`.
    pub fn apply_isotropic(&self, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let mut next = self.clone();
        scale(rho, &mut next.basis);
        next.clamp_norms()?;
        Ok(next)
    }

    fn clamp_norms(&mut self) -> Result<()> {
        let (lo, hi) = (self.len_min, self.len_max);
        for b in self.basis.chunks_exact_mut(self.dim) {
            let n = norm(b);
            if !(n.is_finite() && n > 0.0) {
                return Err(config_err("basis vector degenerated during update"));
            }
            if n > hi {
                scale(hi / n, b);
            } else if n < lo {
                scale(lo / n, b);
            }
        }
        Ok(())
    }

    /// True once every basis vector sits at the lower norm clamp.
    pub fn is_collapsed(&self) -> bool {
        let limit = self.len_min * (1.0 + COLLAPSE_TOLERANCE);
        self.vectors().all(|b| norm(b) <= limit)
    }

    pub fn metrics(&self) -> BoxMetrics {
        let mut min_len = f64::INFINITY;
        let mut max_len = f64::NEG_INFINITY;
        let mut dominant = 0;
        for (i, b) in self.vectors().enumerate() {
            let n = norm(b);
            if n < min_len {
                min_len = n;
            }
            if n > max_len {
                max_len = n;
                dominant = i;
            }
        }
        BoxMetrics {
            min_len,
            max_len,
            ratio: min_len / max_len,
            dominant,
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(config_err(alloc::format!(
            "scaling factor must be positive and finite, got {rho}"
        )))
    }
}

/// Initial axis-aligned box; see [`SearchBox::init`].
pub fn init_box(bounds: &DomainBounds, eta: f64) -> Result<SearchBox> {
    SearchBox::init(bounds, eta)
}

/// Draws `Δ = Σ r_i b_i` with `r_i` iid uniform on `[-1, 1]`.
///
/// Each coefficient is `2u - 1` for `u = rng.random::<f64>()`. Draws whose
/// squared norm falls below [`ZERO_DISPLACEMENT_GUARD`] are repeated, at most
/// [`MAX_RESAMPLES`] times in total.
pub fn sample_displacement<R: Rng + ?Sized>(sbox: &SearchBox, rng: &mut R) -> Result<Displacement> {
    let d = sbox.dim;
    let mut delta = vec![0.0; d];
    for _ in 0..MAX_RESAMPLES {
        delta.iter_mut().for_each(|v| *v = 0.0);
        for b in sbox.vectors() {
            let r = 2.0 * rng.random::<f64>() - 1.0;
            axpy(r, b, &mut delta);
        }
        if norm_sq(&delta) >= ZERO_DISPLACEMENT_GUARD {
            return Ok(Displacement(delta));
        }
    }
    Err(Error::DegenerateSample {
        attempts: MAX_RESAMPLES,
    })
}

pub fn apply_affine(sbox: &SearchBox, delta: &Displacement, rho: f64) -> Result<SearchBox> {
    sbox.apply_affine(delta, rho)
}

pub fn apply_isotropic(sbox: &SearchBox, rho: f64) -> Result<SearchBox> {
    sbox.apply_isotropic(rho)
}

pub fn box_metrics(sbox: &SearchBox) -> BoxMetrics {
    sbox.metrics()
}

/// Angle between the lines spanned by `u` and `v`, in `[0, π/2]` radians.
pub fn angle_between(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cos = (libm::fabs(dot(u, v)) / (nu * nv)).min(1.0);
    Ok(libm::acos(cos).clamp(0.0, FRAC_PI_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_box(d: usize) -> SearchBox {
        let vectors = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        SearchBox::from_vectors(vectors).unwrap()
    }

    #[test]
    fn init_box_norms_follow_eta_and_widths() {
        let b = DomainBounds::hypercube(100, -1.5, 1.5).unwrap();
        let sbox = init_box(&b, 0.2).unwrap();
        for (i, v) in sbox.vectors().enumerate() {
            assert!((norm(v) - 0.6).abs() < 1e-15);
            assert!((v[i] - 0.6).abs() < 1e-15);
        }
        assert_eq!(sbox.metrics().ratio, 1.0);

        let b = DomainBounds::new(vec![0.0, 0.0], vec![10.0, 1.0]).unwrap();
        let n = init_box(&b, 0.2).unwrap().norms();
        assert!((n[0] - 2.0).abs() < 1e-15);
        assert!((n[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn init_box_rejects_eta_out_of_range() {
        let b = DomainBounds::hypercube(3, 0.0, 1.0).unwrap();
        assert!(matches!(init_box(&b, 1.0), Err(Error::Config(_))));
        assert!(matches!(init_box(&b, 0.0), Err(Error::Config(_))));
        assert!(matches!(init_box(&b, f64::NAN), Err(Error::Config(_))));
        let n = init_box(&b, 0.999).unwrap().norms();
        assert!(n.iter().all(|v| (v - 0.999).abs() < 1e-15));
    }

    #[test]
    fn bounds_validation() {
        assert!(DomainBounds::new(vec![0.0], vec![0.0]).is_err());
        assert!(DomainBounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(DomainBounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DomainBounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        assert!(DomainBounds::new(vec![], vec![]).is_err());
    }

    #[test]
    fn clamp_to_bounds_cases() {
        let b = DomainBounds::hypercube(2, -1.0, 1.0).unwrap();
        assert_eq!(b.clamp(&[0.25, -0.5]), vec![0.25, -0.5]);
        assert_eq!(b.clamp(&[2.0, -2.0]), vec![1.0, -1.0]);
        let once = b.clamp(&[3.0, 0.1]);
        assert_eq!(b.clamp(&once), once);
    }

    #[test]
    fn unit_box_displacements_are_bounded() {
        let sbox = unit_box(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let d = sample_displacement(&sbox, &mut rng).unwrap();
            assert!(d.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn displacement_is_deterministic_for_equal_streams() {
        let sbox = unit_box(7);
        let a = sample_displacement(&sbox, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_displacement(&sbox, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    /// Emits `zeros` words mapping to `u = 0.5` (coefficient 0), then words
    /// mapping to `u = 0.75`.
    struct ScriptedRng {
        zeros: usize,
    }

    impl rand::RngCore for ScriptedRng {
        fn next_u32(&mut self) -> u32 {
            self.next_u64() as u32
        }
        fn next_u64(&mut self) -> u64 {
            if self.zeros > 0 {
                self.zeros -= 1;
                1 << 63
            } else {
                3 << 62
            }
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            rand::rand_core::impls::fill_bytes_via_next(self, dst)
        }
    }

    #[test]
    fn zero_coefficients_are_redrawn() {
        let sbox = unit_box(3);
        let d = sample_displacement(&sbox, &mut ScriptedRng { zeros: 3 }).unwrap();
        assert_eq!(d.as_slice(), &[0.5, 0.5, 0.5]);

        let err = sample_displacement(&sbox, &mut ScriptedRng { zeros: usize::MAX }).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateSample {
                attempts: MAX_RESAMPLES
            }
        );
    }

    #[test]
    fn affine_examples() {
        let sbox = SearchBox::from_vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e1 = Displacement::new(vec![1.0, 0.0]);
        let e2 = Displacement::new(vec![0.0, 1.0]);

        assert_eq!(sbox.apply_affine(&e1, 1.0).unwrap(), sbox);

        let dil = sbox.apply_affine(&e1, 5.0).unwrap();
        assert_eq!(dil.basis(0), &[5.0, 0.0]);
        assert_eq!(dil.basis(1), &[0.0, 1.0]);
        let m = dil.metrics();
        assert_eq!(
            (m.min_len, m.max_len, m.ratio, m.dominant),
            (1.0, 5.0, 0.2, 0)
        );

        let ortho = sbox.apply_affine(&e2, 7.3).unwrap();
        assert_eq!(ortho.basis(0), &[1.0, 0.0]);

        let diag = sbox
            .apply_affine(&Displacement::new(vec![1.0, 1.0]), 0.2)
            .unwrap();
        assert!((diag.basis(0)[0] - 0.6).abs() < 1e-15);
        assert!((diag.basis(0)[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn affine_rejects_bad_inputs() {
        let sbox = unit_box(2);
        let tiny = Displacement::new(vec![1e-13, 0.0]);
        assert!(matches!(
            sbox.apply_affine(&tiny, 2.0),
            Err(Error::ZeroDisplacement(_))
        ));
        let d = Displacement::new(vec![1.0, 0.0]);
        assert!(sbox.apply_affine(&d, 0.0).is_err());
        assert!(sbox.apply_affine(&d, -1.0).is_err());
        assert!(sbox
            .apply_affine(&Displacement::new(vec![1.0]), 2.0)
            .is_err());
    }

    #[test]
    fn isotropic_examples() {
        let sbox = unit_box(4);
        assert_eq!(sbox.apply_isotropic(1.0).unwrap(), sbox);
        let small = sbox.apply_isotropic(0.2).unwrap();
        assert!(small.norms().iter().all(|n| (n - 0.2).abs() < 1e-15));
        let back = sbox
            .apply_isotropic(5.0)
            .unwrap()
            .apply_isotropic(0.2)
            .unwrap();
        for (a, b) in back.vectors().zip(sbox.vectors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn norms_are_clamped_to_domain_limits() {
        let bounds = DomainBounds::hypercube(2, 0.0, 1.0).unwrap();
        let sbox = init_box(&bounds, 0.5).unwrap();
        let diag = bounds.diagonal();
        let big = sbox.apply_isotropic(1e6).unwrap();
        assert!(big.norms().iter().all(|n| (n - diag).abs() < 1e-12));

        let mut s = sbox.clone();
        for _ in 0..40 {
            s = s.apply_isotropic(0.2).unwrap();
        }
        assert!(s.is_collapsed());
        assert!(s
            .norms()
            .iter()
            .all(|n| (n / (MIN_LEN_FRACTION * diag) - 1.0).abs() < 1e-9));
        assert!(!sbox.is_collapsed());
    }

    #[test]
    fn metrics_tie_break_on_lowest_index() {
        let sbox = SearchBox::from_vectors(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(sbox.metrics().dominant, 0);
        let sbox = SearchBox::from_vectors(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let m = sbox.metrics();
        assert_eq!(m.dominant, 1);
        assert_eq!(m.ratio, 0.5);
    }

    #[test]
    fn angle_cases() {
        assert_eq!(angle_between(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(angle_between(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 0.0);
        let right = angle_between(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((right - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(
            angle_between(&[0.0, 0.0], &[0.0, 1.0]),
            Err(Error::ZeroVector)
        );
        let a = angle_between(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((a - core::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
