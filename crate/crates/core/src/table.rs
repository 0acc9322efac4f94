//! Incrementally maintained Haar-coefficient table of the kept points.
//!
//! For every basis function H of order up to the current maximum, the table
//! stores the integer inner product `<nu, H>` of the counting measure of
//! the kept points against H. Inserting a point touches exactly one entry
//! per shape (the unique function of that shape that is nonzero there), so
//! an insert costs one update per shape. Raising the maximum order
//! allocates the new shapes and replays the stored points into them only.

use alloc::vec::Vec;

use crate::dyadic::grid_floor;
use crate::error::Error;
use crate::haar::{haar_eval, shapes_of_order, HaarId, Shape};
use crate::points::{PointSet, PointsView};

/// Default cap on allocated coefficient entries (8 bytes each).
pub const DEFAULT_ENTRY_CAP: u64 = 1 << 27;

#[derive(Debug, Clone, PartialEq)]
struct ShapeSlot {
    shape: Shape,
    entries: Vec<i64>,
}

impl ShapeSlot {
    fn new(shape: Shape) -> Self {
        let len = shape.position_count() as usize;
        ShapeSlot {
            shape,
            entries: alloc::vec![0; len],
        }
    }

    /// Flat entry index and sign of the unique function of this shape that
    /// is nonzero at the point described by `cells` (per-axis cell indices
    /// at resolution `level`).
    #[inline]
    fn locate(&self, cells: &[u64], level: u32) -> (usize, i64) {
        let mut offset = 0u64;
        let mut sign = 1i64;
        for (&s, &cell_at_level) in self.shape.axes().iter().zip(cells.iter()) {
            if s == 0 {
                continue;
            }
            let cell = cell_at_level >> (level - s);
            offset = (offset << (s - 1)) + (cell >> 1);
            if cell & 1 == 1 {
                sign = -sign;
            }
        }
        (offset as usize, sign)
    }
}

/// The coefficient array plus the append-only list of kept points.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    max_order: u32,
    slots: Vec<ShapeSlot>,
    points: PointSet,
    total_entries: u64,
    entry_cap: u64,
    cells_scratch: Vec<u64>,
}

impl PartialEq for CoefficientTable {
    /// Semantic state only: the entry cap and internal scratch space do
    /// not participate.
    fn eq(&self, other: &Self) -> bool {
        self.max_order == other.max_order
            && self.slots == other.slots
            && self.points == other.points
    }
}

impl CoefficientTable {
    /// Empty table: maximum order 0, no shapes, no points.
    pub fn new(dim: usize) -> Self {
        Self::with_entry_cap(dim, DEFAULT_ENTRY_CAP)
    }

    pub fn with_entry_cap(dim: usize, entry_cap: u64) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        CoefficientTable {
            max_order: 0,
            slots: Vec::new(),
            points: PointSet::new(dim),
            total_entries: 0,
            entry_cap,
            cells_scratch: alloc::vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Current maximum basis order h.
    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn n_kept(&self) -> usize {
        self.points.len()
    }

    pub fn kept_points(&self) -> &PointSet {
        &self.points
    }

    /// Number of tracked shapes; equals `shape_count(max_order, dim)`.
    pub fn shape_total(&self) -> usize {
        self.slots.len()
    }

    pub fn total_entries(&self) -> u64 {
        self.total_entries
    }

    /// Iterates `(shape, entries)` in the canonical arrangement.
    pub fn shape_slots(&self) -> impl Iterator<Item = (&Shape, &[i64])> {
        self.slots.iter().map(|s| (&s.shape, s.entries.as_slice()))
    }

    fn fill_cells(points_dim: usize, scratch: &mut [u64], x: &[f64], level: u32) {
        debug_assert_eq!(points_dim, x.len());
        for (cell, &coord) in scratch.iter_mut().zip(x.iter()) {
            *cell = grid_floor(coord, level);
        }
    }

    /// Raises the maximum order, allocating the new shapes and replaying
    /// every kept point into them. Existing entries are untouched.
    pub fn grow(&mut self, new_order: u32) -> Result<(), Error> {
        if new_order <= self.max_order {
            return Err(Error::NotGrowth {
                current: self.max_order,
                requested: new_order,
            });
        }
        let mut new_slots = Vec::new();
        let mut projected = self.total_entries;
        for order in self.max_order + 1..=new_order {
            for shape in shapes_of_order(order, self.dim() as u32) {
                projected = projected
                    .checked_add(shape.position_count())
                    .ok_or(Error::CountOverflow)?;
                if projected > self.entry_cap {
                    return Err(Error::EntryCapExceeded {
                        projected,
                        cap: self.entry_cap,
                    });
                }
                new_slots.push(ShapeSlot::new(shape));
            }
        }
        let dim = self.dim();
        let mut cells = alloc::vec![0u64; dim];
        for point in self.points.iter() {
            Self::fill_cells(dim, &mut cells, point, new_order);
            for slot in new_slots.iter_mut() {
                let (offset, sign) = slot.locate(&cells, new_order);
                slot.entries[offset] += sign;
            }
        }
        self.slots.extend(new_slots);
        self.total_entries = projected;
        self.max_order = new_order;
        Ok(())
    }

    /// Appends a kept point, updating one entry per shape by plus or minus
    /// one.
    pub fn insert(&mut self, x: &[f64]) -> Result<(), Error> {
        self.points.push(x)?;
        let level = self.max_order;
        let mut cells = core::mem::take(&mut self.cells_scratch);
        Self::fill_cells(self.dim(), &mut cells, x, level);
        for slot in self.slots.iter_mut() {
            let (offset, sign) = slot.locate(&cells, level);
            slot.entries[offset] += sign;
        }
        self.cells_scratch = cells;
        Ok(())
    }

    /// The balance sum `sum over shapes of sgn<nu, -H> H(x)` where H runs
    /// over the unique nonzero function of each shape at `x`. Zero
    /// coefficients contribute zero. The result lies in
    /// `[-shape_total, +shape_total]`.
    pub fn signed_sum(&self, x: &[f64]) -> Result<i64, Error> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        crate::points::validate_point(x)?;
        let level = self.max_order;
        let mut cells = alloc::vec![0u64; self.dim()];
        Self::fill_cells(self.dim(), &mut cells, x, level);
        let mut total = 0i64;
        for slot in &self.slots {
            let (offset, sign_at_x) = slot.locate(&cells, level);
            total -= slot.entries[offset].signum() * sign_at_x;
        }
        Ok(total)
    }

    /// Stored coefficient `<nu, H>` for one basis function.
    pub fn coefficient(&self, id: &HaarId) -> Result<i64, Error> {
        if id.shape().dim() != self.dim() || id.order() > self.max_order {
            return Err(Error::BadHaarId);
        }
        let slot = self
            .slots
            .iter()
            .find(|s| &s.shape == id.shape())
            .ok_or(Error::BadHaarId)?;
        Ok(slot.entries[id.flat_index() as usize])
    }

    /// Rebuilds a table from a snapshot and validates the stored arrays
    /// against a replay of the stored points.
    pub fn from_parts(
        dim: usize,
        max_order: u32,
        points: PointSet,
        arrays: Vec<Vec<i64>>,
    ) -> Result<Self, Error> {
        if points.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.dim(),
            });
        }
        let mut table = CoefficientTable::new(dim);
        if max_order > 0 {
            table.grow(max_order)?;
        }
        for i in 0..points.len() {
            table.insert(points.get(i))?;
        }
        if table.slots.len() != arrays.len() {
            return Err(Error::CorruptSnapshot);
        }
        for (slot, stored) in table.slots.iter().zip(arrays.iter()) {
            if &slot.entries != stored {
                return Err(Error::CorruptSnapshot);
            }
        }
        Ok(table)
    }
}

/// Brute-force oracle: the coefficient of `id` recomputed from scratch.
pub fn recompute_oracle(points: PointsView<'_>, id: &HaarId) -> Result<i64, Error> {
    let mut total = 0i64;
    for p in points.iter() {
        total += haar_eval(id, p)? as i64;
    }
    Ok(total)
}
