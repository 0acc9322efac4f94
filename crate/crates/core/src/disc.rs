//! Rectangle discrepancy and bias metrics.
//!
//! The discrepancy of n points is the supremum over axis-parallel half-open
//! rectangles R of `|count(R) - n vol(R)|`. The supremum is attained only
//! in one-sided limits at point locations, so instead of epsilon
//! perturbation each boundary is evaluated symbolically with both
//! strictly-below and through-the-point counts. Reported witness
//! rectangles realize the limit exactly for the counting side and up to
//! one ulp for the volume side.

use alloc::vec::Vec;

use crate::dyadic::{grid_floor, inv_pow2, RectSpec};
use crate::error::Error;
use crate::points::{validate_point, PointsView};

/// Search family a [`DiscReport`] was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscMethod {
    /// All half-open intervals, exact (d = 1).
    Exact1d,
    /// All lattice rectangles of a fixed order.
    Lattice,
    /// Exhaustive boundary enumeration over all rectangles (test oracle).
    Brute,
}

impl DiscMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DiscMethod::Exact1d => "exact_1d",
            DiscMethod::Lattice => "lattice",
            DiscMethod::Brute => "brute",
        }
    }
}

/// A discrepancy value together with a witness rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscReport {
    /// Supremum deviation over the searched family.
    pub value: f64,
    /// Rectangle achieving the supremum (up to one ulp on open sides).
    pub argmax_rect: RectSpec,
    pub method: DiscMethod,
    pub lattice_order: Option<u32>,
    /// Upper bound on the gap to the unrestricted rectangle discrepancy:
    /// zero for exact methods, `n * 2d * 2^(1-level)` for the lattice
    /// family.
    pub additive_error_bound: f64,
}

impl DiscReport {
    /// Recomputes the deviation of the witness rectangle directly.
    pub fn recheck(&self, points: PointsView<'_>) -> f64 {
        rect_bias_view(points, &self.argmax_rect)
    }
}

/// `|count(rect) - n vol(rect)|` for a fixed rectangle.
pub fn rect_bias(points: PointsView<'_>, rect: &RectSpec) -> Result<f64, Error> {
    if points.dim() != rect.dim() {
        return Err(Error::DimensionMismatch {
            expected: rect.dim(),
            got: points.dim(),
        });
    }
    Ok(rect_bias_view(points, rect))
}

fn rect_bias_view(points: PointsView<'_>, rect: &RectSpec) -> f64 {
    let count = points.iter().filter(|p| rect.contains(p)).count();
    let expected = points.len() as f64 * rect.volume();
    (count as f64 - expected).abs()
}

/// Exact interval discrepancy in one dimension, O(n log n).
///
/// Evaluates `G(t) = #\{x < t\} - n t` at both one-sided limits of every
/// point and at 0 and 1; the supremum deviation is `max G - min G`.
pub fn interval_disc_1d(points: &[f64]) -> Result<DiscReport, Error> {
    validate_point(points)?;
    let n = points.len();
    let mut sorted = points.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);

    // One candidate cut per one-sided limit: the cut position, the number
    // of points strictly below the cut, and the realized f64 boundary (the
    // through-the-point limit realizes as the next float up).
    #[derive(Clone, Copy)]
    struct Cut {
        g: f64,
        t: f64,
        below: usize,
        realized: f64,
    }
    let mut best_hi = Cut {
        g: 0.0,
        t: 0.0,
        below: 0,
        realized: 0.0,
    };
    let mut best_lo = best_hi;
    let mut consider = |t: f64, below: usize, realized: f64| {
        let g = below as f64 - n as f64 * t;
        if g > best_hi.g {
            best_hi = Cut {
                g,
                t,
                below,
                realized,
            };
        }
        if g < best_lo.g {
            best_lo = Cut {
                g,
                t,
                below,
                realized,
            };
        }
    };
    consider(1.0, n, 1.0);
    let mut below = 0usize;
    let mut i = 0usize;
    while i < n {
        let v = sorted[i];
        let mut through = i;
        while through < n && sorted[through] == v {
            through += 1;
        }
        consider(v, below, v);
        consider(v, through, v.next_up());
        below = through;
        i = through;
    }

    // Final value recomputed in count-minus-n-volume form, the same
    // expression the brute-force oracle evaluates.
    let (first, second) = if best_hi.t >= best_lo.t {
        (best_lo, best_hi)
    } else {
        (best_hi, best_lo)
    };
    let value =
        ((second.below as i64 - first.below as i64) as f64 - n as f64 * (second.t - first.t)).abs();
    let argmax_rect = if value == 0.0 {
        RectSpec::unit_cube(1)
    } else {
        let a = first.realized;
        let b = if second.realized > a {
            second.realized
        } else {
            a.next_up()
        };
        RectSpec::new(alloc::vec![a], alloc::vec![b]).unwrap_or_else(|_| RectSpec::unit_cube(1))
    };
    Ok(DiscReport {
        value,
        argmax_rect,
        method: DiscMethod::Exact1d,
        lattice_order: None,
        additive_error_bound: 0.0,
    })
}

/// Cap on lattice grid cells (2^(level * d) must not exceed this).
const GRID_CELL_CAP: u64 = 1 << 26;

fn cell_counts(points: PointsView<'_>, level: u32) -> Result<(Vec<i64>, usize), Error> {
    let d = points.dim();
    let m = 1u64 << level;
    let cells = m.checked_pow(d as u32).ok_or(Error::GridTooLarge {
        cells: u64::MAX,
        cap: GRID_CELL_CAP,
    })?;
    if cells > GRID_CELL_CAP {
        return Err(Error::GridTooLarge {
            cells,
            cap: GRID_CELL_CAP,
        });
    }
    let mut counts = alloc::vec![0i64; cells as usize];
    for p in points.iter() {
        validate_point(p)?;
        let mut idx = 0u64;
        for &coord in p {
            idx = (idx << level) + grid_floor(coord, level);
        }
        counts[idx as usize] += 1;
    }
    Ok((counts, m as usize))
}

fn lattice_rect(level: u32, lo_cells: &[u64], hi_cells: &[u64]) -> RectSpec {
    let step = inv_pow2(level);
    RectSpec::new(
        lo_cells.iter().map(|&a| a as f64 * step).collect(),
        hi_cells.iter().map(|&b| b as f64 * step).collect(),
    )
    .expect("lattice anchors are ordered")
}

fn report_from_scaled(
    points: PointsView<'_>,
    level: u32,
    scaled: i64,
    lo: &[u64],
    hi: &[u64],
) -> DiscReport {
    let d = points.dim();
    let cells = (1u64 << level).pow(d as u32);
    let argmax_rect = if scaled == 0 {
        RectSpec::unit_cube(d)
    } else {
        lattice_rect(level, lo, hi)
    };
    DiscReport {
        value: scaled as f64 / cells as f64,
        argmax_rect,
        method: DiscMethod::Lattice,
        lattice_order: Some(level),
        additive_error_bound: points.len() as f64 * 2.0 * d as f64 * inv_pow2(level - 1),
    }
}

/// Exact supremum deviation over all lattice rectangles of the given order.
///
/// Deviations are computed as exact integers scaled by the cell count, so
/// the optimized paths below agree bit for bit with the naive enumeration.
/// `additive_error_bound` bounds the gap to the unrestricted discrepancy.
pub fn lattice_disc(points: PointsView<'_>, level: u32) -> Result<DiscReport, Error> {
    if level == 0 || level > crate::dyadic::MAX_LEVEL {
        return Err(Error::LevelTooLarge { level });
    }
    match points.dim() {
        1 => lattice_disc_1d(points, level),
        2 => lattice_disc_2d(points, level),
        _ => lattice_disc_naive(points, level),
    }
}

fn lattice_disc_1d(points: PointsView<'_>, level: u32) -> Result<DiscReport, Error> {
    let (counts, m) = cell_counts(points, level)?;
    let n = points.len() as i64;
    // Scaled prefix deviation m * count([0,k)) - n * k, exact in i64.
    let mut running = 0i64;
    let (mut max_v, mut max_k) = (0i64, 0u64);
    let (mut min_v, mut min_k) = (0i64, 0u64);
    for k in 1..=m as u64 {
        running += counts[(k - 1) as usize];
        let prefix = m as i64 * running - n * k as i64;
        if prefix > max_v {
            max_v = prefix;
            max_k = k;
        }
        if prefix < min_v {
            min_v = prefix;
            min_k = k;
        }
    }
    let scaled = max_v - min_v;
    let (a, b) = if max_k >= min_k {
        (min_k, max_k)
    } else {
        (max_k, min_k)
    };
    Ok(report_from_scaled(points, level, scaled, &[a], &[b]))
}

fn lattice_disc_2d(points: PointsView<'_>, level: u32) -> Result<DiscReport, Error> {
    let (counts, m) = cell_counts(points, level)?;
    let n = points.len() as i64;
    let mm = (m * m) as i64;
    // Column prefix over rows: col_prefix[r][j] = count(rows [0,r), col j).
    let mut col_prefix = alloc::vec![0i64; (m + 1) * m];
    for r in 0..m {
        for j in 0..m {
            col_prefix[(r + 1) * m + j] = col_prefix[r * m + j] + counts[r * m + j];
        }
    }
    let mut best_scaled = 0i64;
    let mut best = ([0u64; 2], [0u64; 2]);
    // For every row band, scan columns for the extreme contiguous sums of
    // the scaled per-column deviation (both signs).
    for r1 in 0..m {
        for r2 in r1 + 1..=m {
            let height = (r2 - r1) as i64;
            let base = -n * height;
            let mut run_max = 0i64;
            let mut run_max_start = 0usize;
            let mut run_min = 0i64;
            let mut run_min_start = 0usize;
            for j in 0..m {
                let dev = mm * (col_prefix[r2 * m + j] - col_prefix[r1 * m + j]) + base;
                // Max-subarray (Kadane) over nonempty windows, both signs.
                if run_max <= 0 {
                    run_max = dev;
                    run_max_start = j;
                } else {
                    run_max += dev;
                }
                if run_max > best_scaled {
                    best_scaled = run_max;
                    best = ([r1 as u64, run_max_start as u64], [r2 as u64, j as u64 + 1]);
                }
                if run_min >= 0 {
                    run_min = dev;
                    run_min_start = j;
                } else {
                    run_min += dev;
                }
                if -run_min > best_scaled {
                    best_scaled = -run_min;
                    best = ([r1 as u64, run_min_start as u64], [r2 as u64, j as u64 + 1]);
                }
            }
        }
    }
    let (lo, hi) = best;
    Ok(report_from_scaled(points, level, best_scaled, &lo, &hi))
}

/// Reference implementation: full enumeration over all lattice anchors in
/// any dimension. Exact but exponential in d; sized for tests and small
/// inputs.
pub fn lattice_disc_naive(points: PointsView<'_>, level: u32) -> Result<DiscReport, Error> {
    if level == 0 || level > crate::dyadic::MAX_LEVEL {
        return Err(Error::LevelTooLarge { level });
    }
    let d = points.dim();
    let (counts, m) = cell_counts(points, level)?;
    let n = points.len() as i64;
    let cells = (m as u64).pow(d as u32) as i64;

    // (m+1)^d inclusive prefix sums.
    let stride_p: Vec<usize> = (0..d)
        .map(|axis| (m + 1).pow((d - 1 - axis) as u32))
        .collect();
    let stride_c: Vec<usize> = (0..d).map(|axis| m.pow((d - 1 - axis) as u32)).collect();
    let mut prefix = alloc::vec![0i64; (m + 1).pow(d as u32)];
    let mut idx = alloc::vec![0usize; d];
    'fill: loop {
        if idx.iter().all(|&i| i > 0) {
            let mut sum = counts[idx
                .iter()
                .zip(stride_c.iter())
                .map(|(&i, &s)| (i - 1) * s)
                .sum::<usize>()];
            // Inclusion-exclusion over the corner offsets.
            for corner in 1..(1usize << d) {
                let mut at = 0usize;
                let mut sign = 1i64;
                for axis in 0..d {
                    let off = (corner >> axis) & 1;
                    if off == 1 {
                        sign = -sign;
                    }
                    at += (idx[axis] - off) * stride_p[axis];
                }
                sum -= sign * prefix[at];
            }
            let at: usize = idx.iter().zip(stride_p.iter()).map(|(&i, &s)| i * s).sum();
            prefix[at] = sum;
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'fill;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] <= m {
                break;
            }
            idx[axis] = 0;
        }
    }
    let count_box = |lo: &[u64], hi: &[u64]| -> i64 {
        let mut total = 0i64;
        for corner in 0..(1usize << d) {
            let mut at = 0usize;
            let mut sign = 1i64;
            for axis in 0..d {
                let pick = if (corner >> axis) & 1 == 0 {
                    hi[axis]
                } else {
                    lo[axis]
                };
                if (corner >> axis) & 1 == 1 {
                    sign = -sign;
                }
                at += pick as usize * stride_p[axis];
            }
            total += sign * prefix[at];
        }
        total
    };

    let mut best_scaled = 0i64;
    let mut best_lo = alloc::vec![0u64; d];
    let mut best_hi = alloc::vec![1u64; d];
    let mut lo = alloc::vec![0u64; d];
    let mut hi = alloc::vec![1u64; d];
    'outer: loop {
        let volume_cells: i64 = lo
            .iter()
            .zip(hi.iter())
            .map(|(&a, &b)| (b - a) as i64)
            .product();
        let scaled = (cells * count_box(&lo, &hi) - n * volume_cells).abs();
        if scaled > best_scaled {
            best_scaled = scaled;
            best_lo.copy_from_slice(&lo);
            best_hi.copy_from_slice(&hi);
        }
        // Advance the (lo, hi) anchor pair odometer with lo < hi per axis.
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            hi[axis] += 1;
            if hi[axis] <= m as u64 {
                break;
            }
            lo[axis] += 1;
            if lo[axis] < m as u64 {
                hi[axis] = lo[axis] + 1;
                break;
            }
            lo[axis] = 0;
            hi[axis] = 1;
        }
    }
    let mut report = report_from_scaled(points, level, best_scaled, &best_lo, &best_hi);
    report.method = DiscMethod::Lattice;
    Ok(report)
}

/// Cap on boundary combinations explored by the brute-force oracle.
const BRUTE_COMBO_CAP: u64 = 200_000_000;

#[derive(Clone, Copy)]
struct AxisRange {
    lo_limit: f64,
    hi_limit: f64,
    lo_real: f64,
    hi_real: f64,
    mask: u64,
}

/// Exhaustive oracle: exact rectangle discrepancy by trying every
/// one-sided boundary limit on every axis. Points are capped at 64 per
/// set (membership is tracked in a 64-bit mask).
pub fn brute_disc_oracle(points: PointsView<'_>) -> Result<DiscReport, Error> {
    let d = points.dim();
    let n = points.len();
    if n > 64 {
        return Err(Error::GridTooLarge {
            cells: n as u64,
            cap: 64,
        });
    }
    for p in points.iter() {
        validate_point(p)?;
    }

    let mut axis_ranges: Vec<Vec<AxisRange>> = Vec::with_capacity(d);
    let mut combos = 1u64;
    for axis in 0..d {
        let mut values: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        // Lower cuts: (limit, realized, mask of points with x >= / > limit).
        let mut lowers: Vec<(f64, f64, u64)> = Vec::new();
        let mut uppers: Vec<(f64, f64, u64)> = Vec::new();
        let mask_where = |pred: &dyn Fn(f64) -> bool| -> u64 {
            let mut mask = 0u64;
            for (i, p) in points.iter().enumerate() {
                if pred(p[axis]) {
                    mask |= 1 << i;
                }
            }
            mask
        };
        lowers.push((0.0, 0.0, mask_where(&|_| true)));
        uppers.push((1.0, 1.0, mask_where(&|_| true)));
        for &v in &values {
            lowers.push((v, v, mask_where(&|x| x >= v)));
            lowers.push((v, v.next_up(), mask_where(&|x| x > v)));
            uppers.push((v, v, mask_where(&|x| x < v)));
            uppers.push((v, v.next_up(), mask_where(&|x| x <= v)));
        }
        let mut ranges = Vec::new();
        for &(lo_limit, lo_real, lo_mask) in &lowers {
            for &(hi_limit, hi_real, hi_mask) in &uppers {
                if hi_limit < lo_limit {
                    continue;
                }
                ranges.push(AxisRange {
                    lo_limit,
                    hi_limit,
                    lo_real,
                    hi_real: hi_real.max(lo_real.next_up()),
                    mask: lo_mask & hi_mask,
                });
            }
        }
        combos = combos.saturating_mul(ranges.len() as u64);
        axis_ranges.push(ranges);
    }
    if combos > BRUTE_COMBO_CAP {
        return Err(Error::GridTooLarge {
            cells: combos,
            cap: BRUTE_COMBO_CAP,
        });
    }

    let mut best = DiscReport {
        value: 0.0,
        argmax_rect: RectSpec::unit_cube(d),
        method: DiscMethod::Brute,
        lattice_order: None,
        additive_error_bound: 0.0,
    };
    let mut cursor = alloc::vec![0usize; d];
    loop {
        let mut mask = u64::MAX;
        let mut volume = 1.0f64;
        for (axis, &i) in cursor.iter().enumerate() {
            let r = &axis_ranges[axis][i];
            mask &= r.mask;
            volume *= r.hi_limit - r.lo_limit;
        }
        if n > 0 {
            let count = (mask & (u64::MAX >> (64 - n.max(1)))).count_ones();
            let deviation = (count as f64 - n as f64 * volume).abs();
            if deviation > best.value {
                best.value = deviation;
                let mut lo = Vec::with_capacity(d);
                let mut hi = Vec::with_capacity(d);
                for (axis, &i) in cursor.iter().enumerate() {
                    let r = &axis_ranges[axis][i];
                    lo.push(r.lo_real);
                    hi.push(r.hi_real);
                }
                best.argmax_rect = RectSpec::new(lo, hi).expect("realized bounds are ordered");
            }
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(best);
            }
            axis -= 1;
            cursor[axis] += 1;
            if cursor[axis] < axis_ranges[axis].len() {
                break;
            }
            cursor[axis] = 0;
        }
    }
}
