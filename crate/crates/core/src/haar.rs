//! The tensor Haar basis on [0,1)^d.
//!
//! A basis function is identified by a [`Shape`] (per-axis orders, order 0
//! meaning the constant factor on that axis) plus a per-axis position. A
//! 1-D factor of order s is supported on one dyadic interval of level s-1,
//! taking +1 on its left half and -1 on its right half. Functions are not
//! normalized: the self inner product equals the support volume.

use alloc::vec::Vec;

use crate::dyadic::{grid_floor, inv_pow2, DyadicInterval, RectSpec, MAX_LEVEL};
use crate::error::Error;
use crate::points::validate_point;

/// Per-axis order vector of a tensor Haar function; the order of the
/// function is the sum of the components, which must be at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape(Vec<u32>);

impl Shape {
    pub fn new(axes: Vec<u32>) -> Result<Self, Error> {
        if axes.is_empty() || axes.iter().all(|&s| s == 0) {
            return Err(Error::BadHaarId);
        }
        if let Some(&level) = axes.iter().find(|&&s| s > MAX_LEVEL) {
            return Err(Error::LevelTooLarge { level });
        }
        Ok(Shape(axes))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn axes(&self) -> &[u32] {
        &self.0
    }

    /// Sum of the per-axis orders.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of distinct positions a function of this shape can occupy:
    /// the product over active axes of 2^(s-1).
    pub fn position_count(&self) -> u64 {
        self.0
            .iter()
            .map(|&s| 1u64 << s.saturating_sub(1))
            .product()
    }
}

/// One tensor Haar function: a shape plus per-axis position indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HaarId {
    shape: Shape,
    pos: Vec<u64>,
}

impl HaarId {
    pub fn new(shape: Shape, pos: Vec<u64>) -> Result<Self, Error> {
        if pos.len() != shape.dim() {
            return Err(Error::BadHaarId);
        }
        for (&s, &p) in shape.axes().iter().zip(pos.iter()) {
            if p >= 1u64 << s.saturating_sub(1) {
                return Err(Error::BadHaarId);
            }
        }
        Ok(HaarId { shape, pos })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn pos(&self) -> &[u64] {
        &self.pos
    }

    pub fn order(&self) -> u32 {
        self.shape.order()
    }

    /// Supporting dyadic interval on an active axis, `None` on a constant
    /// axis.
    pub fn axis_interval(&self, axis: usize) -> Option<DyadicInterval> {
        let s = self.shape.axes()[axis];
        if s == 0 {
            None
        } else {
            Some(DyadicInterval::new(s - 1, self.pos[axis]).expect("validated on construction"))
        }
    }

    /// Volume of the support (product of active-axis interval lengths).
    pub fn support_volume(&self) -> f64 {
        self.shape
            .axes()
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| inv_pow2(s - 1))
            .product()
    }

    /// Volume of the positive (equivalently negative) part of the support.
    pub fn half_volume(&self) -> f64 {
        self.support_volume() / 2.0
    }

    /// Row-major rank of the position among all positions of this shape
    /// (axis 0 slowest), matching the dense array layout of the
    /// coefficient table.
    pub fn flat_index(&self) -> u64 {
        self.shape
            .axes()
            .iter()
            .zip(self.pos.iter())
            .fold(0u64, |acc, (&s, &p)| (acc << s.saturating_sub(1)) + p)
    }

    /// Inverse of [`HaarId::flat_index`].
    pub fn from_flat(shape: Shape, mut flat: u64) -> Result<Self, Error> {
        if flat >= shape.position_count() {
            return Err(Error::BadHaarId);
        }
        let mut pos = alloc::vec![0u64; shape.dim()];
        for axis in (0..shape.dim()).rev() {
            let radix = 1u64 << shape.axes()[axis].saturating_sub(1);
            pos[axis] = flat % radix;
            flat /= radix;
        }
        Ok(HaarId { shape, pos })
    }
}

fn binomial_checked(n: u64, k: u64) -> Result<u64, Error> {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for j in 1..=k {
        // acc * (n - k + j) stays integral after dividing by j.
        acc = acc.checked_mul(n - k + j).ok_or(Error::CountOverflow)? / j;
    }
    Ok(acc)
}

/// Number of shapes of order 1..=h in dimension d:
/// the sum over i of C(i+d-1, d-1).
pub fn shape_count(h: u32, d: u32) -> Result<u64, Error> {
    if d == 0 {
        return Err(Error::BadHaarId);
    }
    let mut total: u64 = 0;
    for i in 1..=h as u64 {
        let term = binomial_checked(i + d as u64 - 1, d as u64 - 1)?;
        total = total.checked_add(term).ok_or(Error::CountOverflow)?;
    }
    Ok(total)
}

fn push_compositions(order: u32, prefix: &mut Vec<u32>, axes_left: usize, out: &mut Vec<Shape>) {
    if axes_left == 1 {
        prefix.push(order);
        out.push(Shape(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=order).rev() {
        prefix.push(first);
        push_compositions(order - first, prefix, axes_left - 1, out);
        prefix.pop();
    }
}

/// All shapes of order 1..=h in dimension d, sorted by order and then by
/// the array arrangement (first axis decreasing).
pub fn enumerate_shapes(h: u32, d: u32) -> Result<Vec<Shape>, Error> {
    if h == 0 || h > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level: h });
    }
    let expected = shape_count(h, d)?;
    let mut out = Vec::with_capacity(expected as usize);
    let mut prefix = Vec::with_capacity(d as usize);
    for order in 1..=h {
        push_compositions(order, &mut prefix, d as usize, &mut out);
    }
    debug_assert_eq!(out.len() as u64, expected);
    Ok(out)
}

/// Shapes of one exact order, in the same arrangement as
/// [`enumerate_shapes`].
pub fn shapes_of_order(order: u32, d: u32) -> Vec<Shape> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(d as usize);
    push_compositions(order, &mut prefix, d as usize, &mut out);
    out
}

/// Evaluates the Haar function at a point; the result is -1, 0 or +1.
pub fn haar_eval(id: &HaarId, x: &[f64]) -> Result<i32, Error> {
    if x.len() != id.shape.dim() {
        return Err(Error::DimensionMismatch {
            expected: id.shape.dim(),
            got: x.len(),
        });
    }
    validate_point(x)?;
    let mut sign = 1i32;
    for (axis, (&s, &xi)) in id.shape.axes().iter().zip(x.iter()).enumerate() {
        if s == 0 {
            continue;
        }
        let cell = grid_floor(xi, s);
        if cell >> 1 != id.pos[axis] {
            return Ok(0);
        }
        if cell & 1 == 1 {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// The unique function of the given shape that is nonzero at `x`, together
/// with its value there.
pub fn locate_nonzero(shape: &Shape, x: &[f64]) -> Result<(Vec<u64>, i32), Error> {
    if x.len() != shape.dim() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: x.len(),
        });
    }
    validate_point(x)?;
    let mut pos = Vec::with_capacity(shape.dim());
    let mut sign = 1i32;
    for (&s, &xi) in shape.axes().iter().zip(x.iter()) {
        if s == 0 {
            pos.push(0);
            continue;
        }
        let cell = grid_floor(xi, s);
        pos.push(cell >> 1);
        if cell & 1 == 1 {
            sign = -sign;
        }
    }
    Ok((pos, sign))
}

/// One term of a dyadic-indicator expansion.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisTerm {
    /// The constant function 1 on [0,1)^d.
    Constant,
    Haar(HaarId),
}

/// Expands the indicator of a dyadic rectangle over the Haar basis.
///
/// Terms involve only functions of order up to the rectangle order; the sum
/// of the coefficient magnitudes, constant included, is exactly 1, and the
/// pointwise sum of `coef * H(x)` reconstructs the indicator.
pub fn decompose_dyadic(rect: &RectSpec) -> Result<Vec<(BasisTerm, f64)>, Error> {
    let axes = rect.as_dyadic()?;
    // Per axis: the constant option plus one Haar factor per level 1..=l.
    // An option is (axis order, position, signed coefficient).
    let mut options: Vec<Vec<(u32, u64, f64)>> = Vec::with_capacity(axes.len());
    for interval in &axes {
        let level = interval.level();
        let mut axis_opts = Vec::with_capacity(level as usize + 1);
        axis_opts.push((0u32, 0u64, inv_pow2(level)));
        for s in 1..=level {
            // The level-s ancestor cell of the interval decides the sign.
            let cell = interval.index() >> (level - s);
            let sign = if cell & 1 == 0 { 1.0 } else { -1.0 };
            axis_opts.push((
                s,
                cell >> 1,
                sign * inv_pow2(level) * crate::dyadic::pow2(s - 1),
            ));
        }
        options.push(axis_opts);
    }
    let dim = axes.len();
    let mut terms = Vec::new();
    let mut cursor = alloc::vec![0usize; dim];
    loop {
        let mut shape_axes = Vec::with_capacity(dim);
        let mut pos = Vec::with_capacity(dim);
        let mut coef = 1.0;
        for (axis, &i) in cursor.iter().enumerate() {
            let (s, p, c) = options[axis][i];
            shape_axes.push(s);
            pos.push(p);
            coef *= c;
        }
        let term = if shape_axes.iter().all(|&s| s == 0) {
            BasisTerm::Constant
        } else {
            BasisTerm::Haar(HaarId::new(Shape::new(shape_axes)?, pos)?)
        };
        terms.push((term, coef));
        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(terms);
            }
            axis -= 1;
            cursor[axis] += 1;
            if cursor[axis] < options[axis].len() {
                break;
            }
            cursor[axis] = 0;
        }
    }
}
