//! Flat storage for sequences of points in [0,1)^d.

use alloc::vec::Vec;

use crate::error::Error;

/// Checks that every coordinate of `point` lies in [0,1).
pub fn validate_point(point: &[f64]) -> Result<(), Error> {
    for (axis, &c) in point.iter().enumerate() {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::BadPoint {
                dim: axis,
                coord: c,
            });
        }
    }
    Ok(())
}

/// An ordered list of d-dimensional points stored as one flat buffer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        PointSet {
            dim,
            coords: Vec::new(),
        }
    }

    /// Wraps an existing flat buffer; length must be a multiple of `dim` and
    /// every coordinate must lie in [0,1).
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self, Error> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: coords.len(),
            });
        }
        validate_point(&coords).map_err(|e| match e {
            Error::BadPoint { dim: flat, coord } => Error::BadPoint {
                dim: flat % dim,
                coord,
            },
            other => other,
        })?;
        Ok(PointSet { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn push(&mut self, point: &[f64]) -> Result<(), Error> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        validate_point(point)?;
        self.coords.extend_from_slice(point);
        Ok(())
    }

    pub fn get(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// The flat coordinate buffer (row-major, one point per `dim` entries).
    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// View of the first `n` points.
    pub fn prefix(&self, n: usize) -> PointsView<'_> {
        PointsView {
            dim: self.dim,
            coords: &self.coords[..n * self.dim],
        }
    }

    pub fn view(&self) -> PointsView<'_> {
        PointsView {
            dim: self.dim,
            coords: &self.coords,
        }
    }
}

/// Borrowed slice-of-points view, same layout as [`PointSet`].
#[derive(Debug, Clone, Copy)]
pub struct PointsView<'a> {
    dim: usize,
    coords: &'a [f64],
}

impl<'a> PointsView<'a> {
    pub fn new(dim: usize, coords: &'a [f64]) -> Self {
        assert!(dim >= 1 && coords.len().is_multiple_of(dim));
        PointsView { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &'a [f64] {
        self.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn push_and_get() {
        let mut ps = PointSet::new(2);
        ps.push(&[0.25, 0.75]).unwrap();
        ps.push(&[0.0, 0.5]).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.get(1), &[0.0, 0.5]);
        assert_eq!(ps.iter().count(), 2);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut ps = PointSet::new(1);
        assert_eq!(ps.push(&[1.0]), Err(Error::BadPoint { dim: 0, coord: 1.0 }));
        assert!(ps.push(&[-0.1]).is_err());
        assert!(PointSet::from_flat(2, vec![0.1, 1.5]).is_err());
    }

    #[test]
    fn rejects_wrong_dim() {
        let mut ps = PointSet::new(2);
        assert_eq!(
            ps.push(&[0.5]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }
}
