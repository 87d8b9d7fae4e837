//! Dense 2-D scalar fields and the finite-difference operators shared by
//! every solver.
//!
//! Indexing is `(i, j)` = `(row, column)`. The x axis runs along columns and
//! the y axis along rows. Forward differences use a replicate (Neumann)
//! boundary, so the difference across the last column/row is zero, and the
//! transposed operators are the exact matrix adjoints of those differences.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A row-major grid of `f64` samples, at least 2x2.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::FieldTooSmall { width, height });
        }
        if values.len() != width * height {
            return Err(Error::ValueCount {
                width,
                height,
                expected: width * height,
                actual: values.len(),
            });
        }
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    /// Builds a field by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                values.push(f(i, j));
            }
        }
        Self::new(width, height, values)
    }

    pub fn zeros_like(&self) -> Self {
        self.filled_like(0.0)
    }

    pub fn filled_like(&self, value: f64) -> Self {
        ScalarField {
            width: self.width,
            height: self.height,
            values: vec![value; self.values.len()],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.width + j] = v;
    }

    /// Sample with replicate padding: out-of-range indices clamp to the edge.
    #[inline]
    pub fn get_clamped(&self, i: isize, j: isize) -> f64 {
        let i = i.clamp(0, self.height as isize - 1) as usize;
        let j = j.clamp(0, self.width as isize - 1) as usize;
        self.get(i, j)
    }

    pub fn same_shape(&self, other: &ScalarField) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_shape(&self, other: &ScalarField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two fields of identical shape.
    ///
    /// Panics on a shape mismatch; callers inside the crate only combine
    /// fields derived from the same image.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert!(
            self.same_shape(other),
            "zip_map on {}x{} and {}x{}",
            self.width,
            self.height,
            other.width,
            other.height
        );
        ScalarField {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Discrete L2 distance `sqrt(sum (a - b)^2)`.
    pub fn distance(&self, other: &ScalarField) -> f64 {
        assert!(self.same_shape(other));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }
}

impl Index<(usize, usize)> for ScalarField {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[i * self.width + j]
    }
}

impl IndexMut<(usize, usize)> for ScalarField {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[i * self.width + j]
    }
}

/// Per-axis companion fields: x-differences and y-differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradPair {
    pub gx: ScalarField,
    pub gy: ScalarField,
}

impl GradPair {
    pub fn zeros_like(u: &ScalarField) -> Self {
        GradPair {
            gx: u.zeros_like(),
            gy: u.zeros_like(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> GradPair {
        GradPair {
            gx: self.gx.map(f),
            gy: self.gy.map(f),
        }
    }

    pub fn zip_map(&self, other: &GradPair, f: impl Fn(f64, f64) -> f64 + Copy) -> GradPair {
        GradPair {
            gx: self.gx.zip_map(&other.gx, f),
            gy: self.gy.zip_map(&other.gy, f),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.gx
            .values()
            .iter()
            .chain(self.gy.values())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Forward differences with a zero difference across the last column/row.
pub fn grad_forward(u: &ScalarField) -> GradPair {
    let (w, h) = (u.width(), u.height());
    let mut gx = u.zeros_like();
    let mut gy = u.zeros_like();
    for i in 0..h {
        for j in 0..w {
            let here = u.get(i, j);
            if j + 1 < w {
                gx.set(i, j, u.get(i, j + 1) - here);
            }
            if i + 1 < h {
                gy.set(i, j, u.get(i + 1, j) - here);
            }
        }
    }
    GradPair { gx, gy }
}

/// Adjoint of the x forward difference: `(v[i, j-1] - v[i, j])` with the
/// terms that reference the zeroed last column dropped.
pub fn adjoint_x(v: &ScalarField) -> ScalarField {
    let w = v.width();
    let mut out = v.zeros_like();
    for i in 0..v.height() {
        for j in 0..w {
            let mut acc = 0.0;
            if j >= 1 {
                acc += v.get(i, j - 1);
            }
            if j + 1 < w {
                acc -= v.get(i, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Adjoint of the y forward difference.
pub fn adjoint_y(v: &ScalarField) -> ScalarField {
    let h = v.height();
    let mut out = v.zeros_like();
    for i in 0..h {
        for j in 0..v.width() {
            let mut acc = 0.0;
            if i >= 1 {
                acc += v.get(i - 1, j);
            }
            if i + 1 < h {
                acc -= v.get(i, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// `∇ₓᵀ gx + ∇ᵧᵀ gy`, i.e. the negative discrete divergence.
pub fn div_adjoint(g: &GradPair) -> ScalarField {
    let ax = adjoint_x(&g.gx);
    let ay = adjoint_y(&g.gy);
    ax.zip_map(&ay, |a, b| a + b)
}

/// Sum of the four axis neighbours of `(i, j)`, replicating edge samples.
#[inline]
pub fn laplacian_neighbors(u: &ScalarField, i: usize, j: usize) -> f64 {
    let (i, j) = (i as isize, j as isize);
    u.get_clamped(i - 1, j) + u.get_clamped(i + 1, j) + u.get_clamped(i, j - 1) + u.get_clamped(i, j + 1)
}

pub fn clip01(u: &ScalarField) -> ScalarField {
    u.map(|v| v.clamp(0.0, 1.0))
}

pub fn inner(u: &ScalarField, v: &ScalarField) -> Result<f64> {
    u.check_shape(v)?;
    Ok(u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut impl Rng, w: usize, h: usize) -> ScalarField {
        ScalarField::from_fn(w, h, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(ScalarField::zeros(1, 5).is_err());
        assert!(ScalarField::zeros(5, 1).is_err());
        assert!(ScalarField::new(3, 3, vec![0.0; 8]).is_err());
    }

    #[test]
    fn constant_has_zero_gradient() {
        let u = ScalarField::filled(6, 4, 5.0).unwrap();
        let g = grad_forward(&u);
        assert!(g.gx.values().iter().all(|&v| v == 0.0));
        assert!(g.gy.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_ramp_gradient() {
        let u = ScalarField::from_fn(3, 3, |_, j| j as f64).unwrap();
        let g = grad_forward(&u);
        for i in 0..3 {
            assert_eq!(g.gx.get(i, 0), 1.0);
            assert_eq!(g.gx.get(i, 1), 1.0);
            assert_eq!(g.gx.get(i, 2), 0.0);
        }
        assert!(g.gy.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_field(&mut rng, 4, 4);
        let g = grad_forward(&u);
        let v = u.values();
        for i in 0..4 {
            for j in 0..4 {
                let ex = if j < 3 { v[i * 4 + j + 1] - v[i * 4 + j] } else { 0.0 };
                let ey = if i < 3 { v[(i + 1) * 4 + j] - v[i * 4 + j] } else { 0.0 };
                assert_eq!(g.gx.get(i, j), ex);
                assert_eq!(g.gy.get(i, j), ey);
            }
        }
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let z = ScalarField::zeros(5, 3).unwrap();
        let d = div_adjoint(&GradPair {
            gx: z.clone(),
            gy: z.clone(),
        });
        assert_eq!(d, z);
    }

    /// Dense gradient matrices for an `n x n` grid, built column by column
    /// from unit impulses, then transposed explicitly.
    fn dense_gradient(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let m = n * n;
        let mut dx = vec![vec![0.0; m]; m];
        let mut dy = vec![vec![0.0; m]; m];
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            let g = grad_forward(&ScalarField::new(n, n, e).unwrap());
            for r in 0..m {
                dx[r][k] = g.gx.values()[r];
                dy[r][k] = g.gy.values()[r];
            }
        }
        (dx, dy)
    }

    #[test]
    fn adjoint_matches_explicit_transpose_on_delta() {
        let n = 3;
        let (dx, dy) = dense_gradient(n);
        let mut delta = vec![0.0; 9];
        delta[4] = 1.0;
        let mut other = vec![0.0; 9];
        other[1] = 2.0;
        let gx = ScalarField::new(n, n, delta.clone()).unwrap();
        let gy = ScalarField::new(n, n, other.clone()).unwrap();
        let got = div_adjoint(&GradPair { gx, gy });
        for r in 0..9 {
            let expect: f64 = (0..9).map(|k| dx[k][r] * delta[k] + dy[k][r] * other[k]).sum();
            assert_eq!(got.values()[r], expect, "entry {r}");
        }
    }

    #[test]
    fn adjoint_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let w = rng.random_range(2..=16);
            let h = rng.random_range(2..=16);
            let u = random_field(&mut rng, w, h);
            let vx = random_field(&mut rng, w, h);
            let vy = random_field(&mut rng, w, h);
            let g = grad_forward(&u);
            let lhs = inner(&g.gx, &vx).unwrap() + inner(&g.gy, &vy).unwrap();
            let rhs = inner(&u, &div_adjoint(&GradPair { gx: vx, gy: vy })).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn neighbor_sum() {
        let c = ScalarField::filled(4, 4, 2.5).unwrap();
        assert_eq!(laplacian_neighbors(&c, 0, 0), 10.0);
        let ramp = ScalarField::from_fn(5, 5, |_, j| j as f64).unwrap();
        assert_eq!(laplacian_neighbors(&ramp, 2, 3), 12.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&mut rng, 4, 3);
        // corner (0,0): up and left replicate the pixel itself
        let expect = u.get(0, 0) + u.get(1, 0) + u.get(0, 0) + u.get(0, 1);
        assert_eq!(laplacian_neighbors(&u, 0, 0), expect);
        let expect = u.get(1, 3) + u.get(2, 3) + u.get(2, 2) + u.get(2, 3);
        assert_eq!(laplacian_neighbors(&u, 2, 3), expect);
    }

    #[test]
    fn clip_values() {
        let u = ScalarField::new(3, 2, vec![0.5, -0.2, 1.7, 0.0, 1.0, 0.3]).unwrap();
        let c = clip01(&u);
        assert_eq!(c.values(), &[0.5, 0.0, 1.0, 0.0, 1.0, 0.3]);
        assert_eq!(clip01(&c), c);
    }

    #[test]
    fn inner_products() {
        let ones = ScalarField::filled(5, 4, 1.0).unwrap();
        assert_eq!(inner(&ones, &ones).unwrap(), 20.0);
        assert_eq!(inner(&ones, &ones.zeros_like()).unwrap(), 0.0);
        assert!(inner(&ones, &ScalarField::zeros(4, 5).unwrap()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_field(&mut rng, 6, 7);
        let b = random_field(&mut rng, 6, 7);
        let mut expect = 0.0;
        for k in 0..42 {
            expect += a.values()[k] * b.values()[k];
        }
        assert_eq!(inner(&a, &b).unwrap(), expect);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field_pair() -> impl Strategy<Value = (ScalarField, ScalarField)> {
            (2usize..10, 2usize..10).prop_flat_map(|(w, h)| {
                (
                    prop::collection::vec(-10.0f64..10.0, w * h),
                    prop::collection::vec(-10.0f64..10.0, w * h),
                )
                    .prop_map(move |(a, b)| {
                        (
                            ScalarField::new(w, h, a).unwrap(),
                            ScalarField::new(w, h, b).unwrap(),
                        )
                    })
            })
        }

        proptest! {
            #[test]
            fn operators_are_linear((u, v) in field_pair(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
                let combo = u.zip_map(&v, |x, y| a * x + b * y);
                let gc = grad_forward(&combo);
                let (gu, gv) = (grad_forward(&u), grad_forward(&v));
                let dc = div_adjoint(&gc);
                let du = div_adjoint(&gu);
                let dv = div_adjoint(&gv);
                for k in 0..u.len() {
                    let ex = a * gu.gx.values()[k] + b * gv.gx.values()[k];
                    let ey = a * gu.gy.values()[k] + b * gv.gy.values()[k];
                    let ed = a * du.values()[k] + b * dv.values()[k];
                    prop_assert!((gc.gx.values()[k] - ex).abs() < 1e-12 * (1.0 + ex.abs()));
                    prop_assert!((gc.gy.values()[k] - ey).abs() < 1e-12 * (1.0 + ey.abs()));
                    prop_assert!((dc.values()[k] - ed).abs() < 1e-12 * (1.0 + ed.abs()));
                }
            }

            #[test]
            fn clip_is_idempotent((u, _v) in field_pair()) {
                let once = clip01(&u);
                prop_assert_eq!(clip01(&once), once);
            }
        }
    }
}
