//! Dyadic intervals, axis-parallel rectangles and their lattice structure.
//!
//! All endpoints are binary floating point. Levels are capped at
//! [`MAX_LEVEL`] so every grid coordinate `a * 2^-level` is exactly
//! representable and all grid arithmetic below is exact, no tolerances.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::Error;

/// Largest dyadic level with guaranteed-exact f64 grid arithmetic.
pub const MAX_LEVEL: u32 = 40;

/// 2^level as f64 (exact).
#[inline]
pub fn pow2(level: u32) -> f64 {
    debug_assert!(level <= 52);
    (1u64 << level) as f64
}

/// 2^-level as f64 (exact).
#[inline]
pub fn inv_pow2(level: u32) -> f64 {
    1.0 / pow2(level)
}

/// floor(x * 2^level) for x in \[0,1\], exact for level <= MAX_LEVEL.
#[inline]
pub fn grid_floor(x: f64, level: u32) -> u64 {
    (x * pow2(level)) as u64
}

/// ceil(x * 2^level) for x in \[0,1\], exact for level <= MAX_LEVEL.
#[inline]
pub fn grid_ceil(x: f64, level: u32) -> u64 {
    let scaled = x * pow2(level);
    let trunc = scaled as u64;
    if trunc as f64 == scaled {
        trunc
    } else {
        trunc + 1
    }
}

/// True when x is an integer multiple of 2^-level.
#[inline]
pub fn on_grid(x: f64, level: u32) -> bool {
    let scaled = x * pow2(level);
    (scaled as u64) as f64 == scaled
}

/// A half-open interval [a 2^-level, (a+1) 2^-level) inside [0,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    level: u32,
    index: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: u64) -> Result<Self, Error> {
        if level > MAX_LEVEL {
            return Err(Error::LevelTooLarge { level });
        }
        if index >= 1u64 << level {
            return Err(Error::BadHaarId);
        }
        Ok(DyadicInterval { level, index })
    }

    /// The whole unit interval [0,1).
    pub fn unit() -> Self {
        DyadicInterval { level: 0, index: 0 }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn lo(&self) -> f64 {
        self.index as f64 * inv_pow2(self.level)
    }

    pub fn hi(&self) -> f64 {
        (self.index + 1) as f64 * inv_pow2(self.level)
    }

    pub fn length(&self) -> f64 {
        inv_pow2(self.level)
    }

    /// Left half, one level deeper.
    pub fn even_half(&self) -> DyadicInterval {
        debug_assert!(self.level < MAX_LEVEL);
        DyadicInterval {
            level: self.level + 1,
            index: 2 * self.index,
        }
    }

    /// Right half, one level deeper.
    pub fn odd_half(&self) -> DyadicInterval {
        debug_assert!(self.level < MAX_LEVEL);
        DyadicInterval {
            level: self.level + 1,
            index: 2 * self.index + 1,
        }
    }

    /// Half-open membership, boundary resolved by floor(x 2^level).
    pub fn contains(&self, x: f64) -> bool {
        (0.0..1.0).contains(&x) && grid_floor(x, self.level) == self.index
    }
}

/// An axis-parallel half-open rectangle in [0,1)^d.
#[derive(Debug, Clone, PartialEq)]
pub struct RectSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl RectSpec {
    /// Builds a rectangle from per-axis bounds; requires 0 <= lo < hi <= 1.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, Error> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::BadRect);
        }
        for (&a, &b) in lo.iter().zip(hi.iter()) {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::BadRect);
            }
        }
        Ok(RectSpec { lo, hi })
    }

    /// The full cube [0,1)^d.
    pub fn unit_cube(dim: usize) -> Self {
        RectSpec {
            lo: alloc::vec![0.0; dim],
            hi: alloc::vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(&a, &b)| b - a)
            .product()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        debug_assert_eq!(point.len(), self.dim());
        self.lo
            .iter()
            .zip(self.hi.iter())
            .zip(point.iter())
            .all(|((&a, &b), &x)| a <= x && x < b)
    }

    /// True when every corner coordinate is a multiple of 2^-level.
    pub fn is_lattice(&self, level: u32) -> bool {
        self.lo
            .iter()
            .chain(self.hi.iter())
            .all(|&c| on_grid(c, level))
    }

    /// Per-axis dyadic intervals if this rectangle is dyadic.
    pub fn as_dyadic(&self) -> Result<Vec<DyadicInterval>, Error> {
        let mut axes = Vec::with_capacity(self.dim());
        for (&a, &b) in self.lo.iter().zip(self.hi.iter()) {
            axes.push(dyadic_axis(a, b).ok_or(Error::NotDyadic)?);
        }
        Ok(axes)
    }

    /// Sum of per-axis dyadic levels; errors when the rectangle is not dyadic.
    pub fn dyadic_order(&self) -> Result<u32, Error> {
        Ok(self.as_dyadic()?.iter().map(|i| i.level()).sum())
    }

    pub fn from_axes(axes: &[DyadicInterval]) -> Self {
        RectSpec {
            lo: axes.iter().map(|i| i.lo()).collect(),
            hi: axes.iter().map(|i| i.hi()).collect(),
        }
    }

    /// Text form "lo1,hi1;lo2,hi2;..." used by the CLI and config files.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in text.split(';') {
            let (a, b) = axis
                .split_once(',')
                .ok_or(Error::Parse("rectangle axis must be \"lo,hi\""))?;
            lo.push(
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse("rectangle bound is not a number"))?,
            );
            hi.push(
                b.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse("rectangle bound is not a number"))?,
            );
        }
        RectSpec::new(lo, hi)
    }

    /// Inverse of [`RectSpec::parse`], shortest round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (&a, &b)) in self.lo.iter().zip(self.hi.iter()).enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(&a.to_string());
            out.push(',');
            out.push_str(&b.to_string());
        }
        out
    }
}

fn dyadic_axis(lo: f64, hi: f64) -> Option<DyadicInterval> {
    let len = hi - lo;
    for level in 0..=MAX_LEVEL {
        if len == inv_pow2(level) {
            if on_grid(lo, level) {
                return DyadicInterval::new(level, grid_floor(lo, level)).ok();
            }
            return None;
        }
        if len > inv_pow2(level) {
            return None;
        }
    }
    None
}

/// Splits one lattice span [a,b) (grid coordinates at `level`) into at most
/// `2 * level.max(1)` disjoint dyadic intervals by peeling odd endpoints.
fn peel_axis(mut a: u64, mut b: u64, mut level: u32, out: &mut Vec<DyadicInterval>) {
    debug_assert!(a < b && b <= 1u64 << level);
    loop {
        if level == 0 {
            out.push(DyadicInterval::unit());
            return;
        }
        if a % 2 == 1 {
            out.push(DyadicInterval { level, index: a });
            a += 1;
        }
        if b % 2 == 1 {
            out.push(DyadicInterval {
                level,
                index: b - 1,
            });
            b -= 1;
        }
        if a >= b {
            return;
        }
        a /= 2;
        b /= 2;
        level -= 1;
    }
}

/// Writes a lattice rectangle of order `level` as disjoint dyadic rectangles.
///
/// The pieces tile the input exactly; per axis at most `2 * level` intervals
/// are produced, so the piece count is bounded by `(2 * level)^d`.
pub fn decompose_lattice(rect: &RectSpec, level: u32) -> Result<Vec<RectSpec>, Error> {
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level });
    }
    if !rect.is_lattice(level) {
        return Err(Error::NotLattice { level });
    }
    let mut per_axis: Vec<Vec<DyadicInterval>> = Vec::with_capacity(rect.dim());
    for (&a, &b) in rect.lo.iter().zip(rect.hi.iter()) {
        let mut pieces = Vec::new();
        peel_axis(
            grid_floor(a, level),
            grid_floor(b, level),
            level,
            &mut pieces,
        );
        per_axis.push(pieces);
    }
    // Cartesian product of the per-axis piece lists.
    let mut pieces = Vec::new();
    let mut cursor = alloc::vec![0usize; rect.dim()];
    loop {
        let axes: Vec<DyadicInterval> = cursor
            .iter()
            .enumerate()
            .map(|(axis, &i)| per_axis[axis][i])
            .collect();
        pieces.push(RectSpec::from_axes(&axes));
        let mut axis = rect.dim();
        loop {
            if axis == 0 {
                return Ok(pieces);
            }
            axis -= 1;
            cursor[axis] += 1;
            if cursor[axis] < per_axis[axis].len() {
                break;
            }
            cursor[axis] = 0;
        }
    }
}

/// Nearest enclosing and enclosed lattice rectangles of order `level`.
///
/// Returns `(inner, outer)` with `inner ⊆ rect ⊆ outer`; `inner` is `None`
/// when rounding the bounds inward leaves an empty box on some axis. The
/// volume gap satisfies `outer.volume() - inner.volume() <= 2 d 2^(1-level)`.
pub fn lattice_sandwich(
    rect: &RectSpec,
    level: u32,
) -> Result<(Option<RectSpec>, RectSpec), Error> {
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level });
    }
    let step = inv_pow2(level);
    let mut inner_lo = Vec::with_capacity(rect.dim());
    let mut inner_hi = Vec::with_capacity(rect.dim());
    let mut outer_lo = Vec::with_capacity(rect.dim());
    let mut outer_hi = Vec::with_capacity(rect.dim());
    let mut inner_nonempty = true;
    for (&a, &b) in rect.lo.iter().zip(rect.hi.iter()) {
        let in_lo = grid_ceil(a, level);
        let in_hi = grid_floor(b, level);
        if in_lo >= in_hi {
            inner_nonempty = false;
        }
        inner_lo.push(in_lo as f64 * step);
        inner_hi.push(in_hi as f64 * step);
        outer_lo.push(grid_floor(a, level) as f64 * step);
        outer_hi.push(grid_ceil(b, level) as f64 * step);
    }
    let inner = if inner_nonempty {
        Some(RectSpec {
            lo: inner_lo,
            hi: inner_hi,
        })
    } else {
        None
    };
    Ok((
        inner,
        RectSpec {
            lo: outer_lo,
            hi: outer_hi,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStream, StreamRole};
    use alloc::vec;

    #[test]
    fn interval_basics() {
        let i = DyadicInterval::new(2, 1).unwrap();
        assert_eq!(i.lo(), 0.25);
        assert_eq!(i.hi(), 0.5);
        assert_eq!(i.even_half(), DyadicInterval::new(3, 2).unwrap());
        assert_eq!(i.odd_half(), DyadicInterval::new(3, 3).unwrap());
        assert!(i.contains(0.25));
        assert!(!i.contains(0.5));
        assert!(DyadicInterval::new(2, 4).is_err());
        assert!(DyadicInterval::new(MAX_LEVEL + 1, 0).is_err());
    }

    #[test]
    fn boundary_resolves_to_odd_half() {
        // 0.5 belongs to the odd half of [0,1).
        let unit = DyadicInterval::unit();
        assert!(!unit.even_half().contains(0.5));
        assert!(unit.odd_half().contains(0.5));
    }

    #[test]
    fn rect_validation() {
        assert!(RectSpec::new(vec![0.0], vec![1.0]).is_ok());
        assert!(RectSpec::new(vec![0.5], vec![0.5]).is_err());
        assert!(RectSpec::new(vec![0.0, 0.2], vec![1.0]).is_err());
        assert!(RectSpec::new(vec![-0.1], vec![0.5]).is_err());
        assert!(RectSpec::new(vec![0.0], vec![1.1]).is_err());
    }

    #[test]
    fn rect_text_round_trip() {
        let r = RectSpec::parse("0.333333,0.833333;0.333333,0.833333").unwrap();
        assert_eq!(r.dim(), 2);
        let again = RectSpec::parse(&r.to_text()).unwrap();
        assert_eq!(r, again);
        assert!(RectSpec::parse("0.5").is_err());
        assert!(RectSpec::parse("a,b").is_err());
    }

    #[test]
    fn dyadic_detection() {
        let r = RectSpec::new(vec![0.25], vec![0.5]).unwrap();
        assert_eq!(r.dyadic_order().unwrap(), 2);
        let r = RectSpec::new(vec![0.25, 0.0], vec![0.5, 1.0]).unwrap();
        assert_eq!(r.dyadic_order().unwrap(), 2);
        let r = RectSpec::new(vec![0.25], vec![0.75]).unwrap();
        assert_eq!(r.as_dyadic(), Err(Error::NotDyadic));
    }

    #[test]
    fn peel_matches_hand_decomposition() {
        // [1/4, 7/8) at level 3 -> [1/4,1/2), [1/2,3/4), [3/4,7/8).
        let r = RectSpec::new(vec![0.25], vec![0.875]).unwrap();
        let mut pieces = decompose_lattice(&r, 3).unwrap();
        pieces.sort_by(|p, q| p.lo()[0].total_cmp(&q.lo()[0]));
        let bounds: Vec<(f64, f64)> = pieces.iter().map(|p| (p.lo()[0], p.hi()[0])).collect();
        assert_eq!(bounds, vec![(0.25, 0.5), (0.5, 0.75), (0.75, 0.875)]);
    }

    #[test]
    fn peel_identity_when_already_dyadic() {
        let r = RectSpec::new(vec![0.0], vec![1.0]).unwrap();
        for level in 1..6 {
            let pieces = decompose_lattice(&r, level).unwrap();
            assert_eq!(pieces, vec![r.clone()]);
        }
    }

    #[test]
    fn peel_two_dim_product() {
        // [1/4,3/4) x [0,1/2) at level 2 splits only the first axis.
        let r = RectSpec::new(vec![0.25, 0.0], vec![0.75, 0.5]).unwrap();
        let mut pieces = decompose_lattice(&r, 2).unwrap();
        pieces.sort_by(|p, q| p.lo()[0].total_cmp(&q.lo()[0]));
        assert_eq!(pieces.len(), 2);
        assert_eq!((pieces[0].lo()[0], pieces[0].hi()[0]), (0.25, 0.5));
        assert_eq!((pieces[1].lo()[0], pieces[1].hi()[0]), (0.5, 0.75));
        for p in &pieces {
            assert_eq!((p.lo()[1], p.hi()[1]), (0.0, 0.5));
        }
    }

    #[test]
    fn peel_rejects_non_lattice() {
        let r = RectSpec::new(vec![0.3], vec![0.8]).unwrap();
        assert_eq!(
            decompose_lattice(&r, 2),
            Err(Error::NotLattice { level: 2 })
        );
    }

    fn disjoint_on_grid(pieces: &[RectSpec], level: u32) -> bool {
        // Pairwise intersection must be empty; corners sit on the grid so
        // interval overlap checks are exact.
        for (i, p) in pieces.iter().enumerate() {
            for q in pieces.iter().skip(i + 1) {
                let overlap = (0..p.dim())
                    .all(|axis| p.lo()[axis] < q.hi()[axis] && q.lo()[axis] < p.hi()[axis]);
                if overlap {
                    return false;
                }
            }
        }
        let _ = level;
        true
    }

    #[test]
    fn peel_properties_random() {
        let mut rng = SeedStream::new(11, 0, StreamRole::Candidates);
        for dim in 1..=3usize {
            for level in 1..=5u32 {
                for _ in 0..40 {
                    let cells = 1u64 << level;
                    let mut lo = Vec::new();
                    let mut hi = Vec::new();
                    for _ in 0..dim {
                        let a = (rng.next_u64() % cells) as f64;
                        let b = a + 1.0 + (rng.next_u64() % (cells - a as u64)) as f64;
                        lo.push(a * inv_pow2(level));
                        hi.push(b * inv_pow2(level));
                    }
                    let rect = RectSpec::new(lo, hi).unwrap();
                    let pieces = decompose_lattice(&rect, level).unwrap();
                    assert!(pieces.len() as u64 <= (2 * level as u64).pow(dim as u32));
                    assert!(disjoint_on_grid(&pieces, level));
                    let total: f64 = pieces.iter().map(|p| p.volume()).sum();
                    assert_eq!(total, rect.volume());
                    for p in &pieces {
                        for axis in p.as_dyadic().unwrap() {
                            assert!(axis.level() <= level);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sandwich_examples() {
        // Rounding collapses the inner box to empty.
        let r = RectSpec::new(vec![0.3], vec![0.8]).unwrap();
        let (inner, outer) = lattice_sandwich(&r, 1).unwrap();
        assert!(inner.is_none());
        assert_eq!(outer, RectSpec::new(vec![0.0], vec![1.0]).unwrap());

        // Already on the grid: inner == outer == rect.
        let r = RectSpec::new(vec![0.25], vec![0.75]).unwrap();
        let (inner, outer) = lattice_sandwich(&r, 2).unwrap();
        assert_eq!(inner.as_ref(), Some(&r));
        assert_eq!(outer, r);

        // [1/3, 5/6) at level 3.
        let r = RectSpec::new(vec![1.0 / 3.0], vec![5.0 / 6.0]).unwrap();
        let (inner, outer) = lattice_sandwich(&r, 3).unwrap();
        assert_eq!(
            inner.unwrap(),
            RectSpec::new(vec![0.375], vec![0.75]).unwrap()
        );
        assert_eq!(outer, RectSpec::new(vec![0.25], vec![0.875]).unwrap());
    }

    #[test]
    fn sandwich_containment_and_gap() {
        let mut rng = SeedStream::new(23, 0, StreamRole::Candidates);
        for dim in 1..=3usize {
            for level in 1..=8u32 {
                for _ in 0..200 {
                    let mut lo = Vec::new();
                    let mut hi = Vec::new();
                    for _ in 0..dim {
                        let a = rng.unit_f64();
                        let b = rng.unit_f64();
                        let (a, b) = if a < b { (a, b) } else { (b, a) };
                        let b = if a == b { (b + 0.5).min(1.0) } else { b };
                        lo.push(a);
                        hi.push(b);
                    }
                    let rect = match RectSpec::new(lo, hi) {
                        Ok(r) => r,
                        Err(_) => continue,
                    };
                    let (inner, outer) = lattice_sandwich(&rect, level).unwrap();
                    let inner_vol = inner
                        .as_ref()
                        .map(|r| {
                            for axis in 0..dim {
                                assert!(rect.lo()[axis] <= r.lo()[axis]);
                                assert!(r.hi()[axis] <= rect.hi()[axis]);
                            }
                            r.volume()
                        })
                        .unwrap_or(0.0);
                    for axis in 0..dim {
                        assert!(outer.lo()[axis] <= rect.lo()[axis]);
                        assert!(rect.hi()[axis] <= outer.hi()[axis]);
                    }
                    let gap = outer.volume() - inner_vol;
                    assert!(gap >= 0.0);
                    assert!(gap <= 2.0 * dim as f64 * inv_pow2(level - 1));
                }
            }
        }
    }
}
