//! Thinning strategies and the two-thinning engine.
//!
//! The engine consumes a stream of candidate points and produces an output
//! sequence. For every output index it evaluates the configured keep
//! probability on the next candidate, draws one uniform from its decision
//! stream, and either keeps the candidate or rejects it; a rejection forces
//! the following candidate to be kept, so no two consecutive candidates are
//! ever dropped. Rejection probabilities never exceed `beta`.

use alloc::vec::Vec;

use crate::error::Error;
use crate::points::{validate_point, PointSet};
use crate::rng::{SeedStream, StreamRole};
use crate::table::CoefficientTable;

/// Which thinning rule drives the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Keep everything (i.i.d. baseline).
    MonteCarlo,
    /// Keep probability proportional to the Haar balance density.
    Haar,
    /// Three-valued rule driven by the sign of the balance sum.
    Greedy,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::MonteCarlo => "monte_carlo",
            StrategyKind::Haar => "haar",
            StrategyKind::Greedy => "greedy",
        }
    }
}

/// Sign convention for the greedy rule.
///
/// `Balance` keeps a candidate outright where the balance sum is positive,
/// i.e. where the kept points are under-represented; `Inverted` applies the
/// mirrored rule and is retained for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyConvention {
    #[default]
    Balance,
    Inverted,
}

impl GreedyConvention {
    pub fn name(&self) -> &'static str {
        match self {
            GreedyConvention::Balance => "balance",
            GreedyConvention::Inverted => "inverted",
        }
    }
}

/// Fixed per-run strategy configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub dim: usize,
    /// Maximal rejection probability, in (0, 1].
    pub beta: f64,
    pub convention: GreedyConvention,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, dim: usize, beta: f64) -> Result<Self, Error> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::BadBeta(beta));
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(StrategyConfig {
            kind,
            dim,
            beta,
            convention: GreedyConvention::Balance,
        })
    }

    pub fn with_convention(mut self, convention: GreedyConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// The balance density and the keep probability it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    /// Conditional density of the next kept point at the queried location;
    /// lies in [1 - beta/2, 1 + beta/2].
    pub lambda: f64,
    /// Keep probability `lambda - beta/2`, in [1 - beta, 1].
    pub keep_prob: f64,
}

/// Haar-density keep probability at `x` for the current table state.
///
/// The density is `1 + beta / (2 W) * signed_sum(x)` where W is the number
/// of tracked shapes; with no shapes yet the density is identically 1.
pub fn haar_keep_prob(
    table: &CoefficientTable,
    beta: f64,
    x: &[f64],
) -> Result<DensityValue, Error> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadBeta(beta));
    }
    let lambda = if table.shape_total() == 0 {
        1.0
    } else {
        let normalizer = 2.0 * table.shape_total() as f64;
        1.0 + beta * table.signed_sum(x)? as f64 / normalizer
    };
    Ok(DensityValue {
        lambda,
        keep_prob: lambda - beta / 2.0,
    })
}

/// Greedy keep probability at `x`: 1 on the favored sign, `1 - beta` on the
/// disfavored sign and `1 - beta/2` on a tie.
pub fn greedy_keep_prob(
    table: &CoefficientTable,
    beta: f64,
    x: &[f64],
    convention: GreedyConvention,
) -> Result<f64, Error> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadBeta(beta));
    }
    let sum = table.signed_sum(x)?;
    let effective = match convention {
        GreedyConvention::Balance => sum,
        GreedyConvention::Inverted => -sum,
    };
    Ok(match effective.signum() {
        1 => 1.0,
        0 => 1.0 - beta / 2.0,
        _ => 1.0 - beta,
    })
}

/// The Monte-Carlo baseline keeps everything.
pub fn monte_carlo_keep_prob() -> f64 {
    1.0
}

/// One accept/reject decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    /// 1-based output index the candidate was considered for.
    pub output_index: u64,
    pub candidate: Vec<f64>,
    pub keep_prob: f64,
    pub kept: bool,
    /// True when the keep was mandatory because the previous candidate was
    /// rejected.
    pub forced: bool,
}

/// A stream of candidate points in [0,1)^d.
pub trait CandidateSource {
    fn dim(&self) -> usize;

    /// Writes the next candidate into `out`; `Ok(false)` signals exhaustion.
    fn next_point(&mut self, out: &mut [f64]) -> Result<bool, Error>;
}

/// Inexhaustible synthetic source of i.i.d. uniform points.
#[derive(Debug, Clone)]
pub struct UniformSource {
    dim: usize,
    stream: SeedStream,
}

impl UniformSource {
    pub fn new(dim: usize, master_seed: u64, run_index: u64) -> Self {
        UniformSource {
            dim,
            stream: SeedStream::new(master_seed, run_index, StreamRole::Candidates),
        }
    }
}

impl CandidateSource for UniformSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_point(&mut self, out: &mut [f64]) -> Result<bool, Error> {
        self.stream.unit_point(out);
        Ok(true)
    }
}

#[inline]
fn floor_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    63 - n.leading_zeros()
}

/// Two-thinning engine state.
#[derive(Debug, Clone)]
pub struct Engine {
    config: StrategyConfig,
    table: CoefficientTable,
    next_output: u64,
    rejected_previous: bool,
    candidates_consumed: u64,
    decisions: SeedStream,
}

impl Engine {
    /// Engine with its decision stream derived from `(master_seed,
    /// run_index)`.
    pub fn new(config: StrategyConfig, master_seed: u64, run_index: u64) -> Self {
        Engine {
            table: CoefficientTable::new(config.dim),
            config,
            next_output: 1,
            rejected_previous: false,
            candidates_consumed: 0,
            decisions: SeedStream::new(master_seed, run_index, StreamRole::Decisions),
        }
    }

    /// Resumes from a previously built coefficient table: the next output
    /// index continues after the stored points. The decision stream starts
    /// fresh from `(master_seed, run_index)`.
    pub fn with_table(
        config: StrategyConfig,
        table: CoefficientTable,
        master_seed: u64,
        run_index: u64,
    ) -> Result<Self, Error> {
        if table.dim() != config.dim {
            return Err(Error::DimensionMismatch {
                expected: config.dim,
                got: table.dim(),
            });
        }
        Ok(Engine {
            next_output: table.n_kept() as u64 + 1,
            table,
            config,
            rejected_previous: false,
            candidates_consumed: 0,
            decisions: SeedStream::new(master_seed, run_index, StreamRole::Decisions),
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    /// Kept points so far, in output order.
    pub fn points(&self) -> &PointSet {
        self.table.kept_points()
    }

    /// 1-based index of the next output to be placed.
    pub fn next_output(&self) -> u64 {
        self.next_output
    }

    pub fn outputs_placed(&self) -> u64 {
        self.next_output - 1
    }

    pub fn candidates_consumed(&self) -> u64 {
        self.candidates_consumed
    }

    /// True when the previous candidate was rejected, so the next one is
    /// kept unconditionally.
    pub fn pending_forced_keep(&self) -> bool {
        self.rejected_previous
    }

    /// Keep probability the configured strategy assigns to `x` for the
    /// upcoming (non-forced) decision. The table must already be grown for
    /// the next output index.
    fn keep_prob(&self, x: &[f64]) -> Result<f64, Error> {
        match self.config.kind {
            StrategyKind::MonteCarlo => {
                validate_point(x)?;
                Ok(monte_carlo_keep_prob())
            }
            StrategyKind::Haar => Ok(haar_keep_prob(&self.table, self.config.beta, x)?.keep_prob),
            StrategyKind::Greedy => {
                greedy_keep_prob(&self.table, self.config.beta, x, self.config.convention)
            }
        }
    }

    /// Offers one candidate and records the decision.
    ///
    /// A rejected candidate leaves the output index unchanged and arms a
    /// forced keep for the next offer. Exactly one uniform is drawn per
    /// non-forced decision regardless of the keep probability, so traces
    /// are replayable across strategies under a fixed seed.
    pub fn offer(&mut self, candidate: &[f64]) -> Result<DecisionRecord, Error> {
        if candidate.len() != self.config.dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.dim,
                got: candidate.len(),
            });
        }
        validate_point(candidate)?;
        self.candidates_consumed += 1;

        if self.rejected_previous {
            self.table.insert(candidate)?;
            let record = DecisionRecord {
                output_index: self.next_output,
                candidate: candidate.to_vec(),
                keep_prob: 1.0,
                kept: true,
                forced: true,
            };
            self.next_output += 1;
            self.rejected_previous = false;
            return Ok(record);
        }

        let wanted_order = floor_log2(self.next_output);
        if wanted_order > self.table.max_order() {
            self.table.grow(wanted_order)?;
        }
        let keep_prob = self.keep_prob(candidate)?;
        let coin = self.decisions.unit_f64();
        let kept = coin <= keep_prob;
        let record = DecisionRecord {
            output_index: self.next_output,
            candidate: candidate.to_vec(),
            keep_prob,
            kept,
            forced: false,
        };
        if kept {
            self.table.insert(candidate)?;
            self.next_output += 1;
        } else {
            self.rejected_previous = true;
        }
        Ok(record)
    }

    /// Advances by exactly one output, consuming one or two candidates.
    pub fn step<S: CandidateSource + ?Sized>(
        &mut self,
        source: &mut S,
    ) -> Result<(DecisionRecord, Option<DecisionRecord>), Error> {
        debug_assert!(!self.rejected_previous);
        let mut buf = alloc::vec![0.0; self.config.dim];
        if !source.next_point(&mut buf)? {
            return Err(Error::CandidatesExhausted {
                produced: self.outputs_placed(),
            });
        }
        let first = self.offer(&buf)?;
        if first.kept {
            return Ok((first, None));
        }
        if !source.next_point(&mut buf)? {
            return Err(Error::CandidatesExhausted {
                produced: self.outputs_placed(),
            });
        }
        let second = self.offer(&buf)?;
        debug_assert!(second.kept && second.forced);
        Ok((first, Some(second)))
    }
}

/// Output sequence plus the full decision trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub points: PointSet,
    pub decisions: Vec<DecisionRecord>,
    pub candidates_consumed: u64,
}

/// Runs a strategy until `n_max` outputs are placed.
///
/// Deterministic given `(config, master_seed, run_index)` and the source
/// contents; consumes at most `2 * n_max` candidates and errors with the
/// number of outputs produced if the source runs dry first.
pub fn run<S: CandidateSource + ?Sized>(
    config: StrategyConfig,
    master_seed: u64,
    run_index: u64,
    n_max: u64,
    source: &mut S,
) -> Result<RunOutput, Error> {
    let mut engine = Engine::new(config, master_seed, run_index);
    let mut decisions = Vec::new();
    while engine.outputs_placed() < n_max {
        let (first, second) = engine.step(source)?;
        decisions.push(first);
        if let Some(second) = second {
            decisions.push(second);
        }
    }
    Ok(RunOutput {
        points: engine.table.kept_points().clone(),
        candidates_consumed: engine.candidates_consumed,
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{enumerate_shapes, HaarId};
    use alloc::vec;

    fn table_with(dim: usize, order: u32, points: &[&[f64]]) -> CoefficientTable {
        let mut t = CoefficientTable::new(dim);
        if order > 0 {
            t.grow(order).unwrap();
        }
        for p in points {
            t.insert(p).unwrap();
        }
        t
    }

    #[test]
    fn haar_density_on_empty_table() {
        let t = CoefficientTable::new(2);
        for beta in [0.1, 0.5, 1.0] {
            let v = haar_keep_prob(&t, beta, &[0.3, 0.9]).unwrap();
            assert_eq!(v.lambda, 1.0);
            assert_eq!(v.keep_prob, 1.0 - beta / 2.0);
        }
    }

    #[test]
    fn haar_density_single_point_order_one() {
        let t = table_with(1, 1, &[&[0.1]]);
        let v = haar_keep_prob(&t, 1.0, &[0.25]).unwrap();
        assert_eq!((v.lambda, v.keep_prob), (0.5, 0.0));
        let v = haar_keep_prob(&t, 1.0, &[0.75]).unwrap();
        assert_eq!((v.lambda, v.keep_prob), (1.5, 1.0));
    }

    #[test]
    fn haar_density_single_point_order_two() {
        // Balance sum at 0.75: the order-1 function contributes +1, the
        // order-2 function over [0.5,1) has coefficient 0 and contributes
        // nothing, so lambda = 1 + (beta/4) * 1.
        let t = table_with(1, 2, &[&[0.1]]);
        assert_eq!(t.signed_sum(&[0.75]).unwrap(), 1);
        let v = haar_keep_prob(&t, 0.5, &[0.75]).unwrap();
        assert_eq!(v.lambda, 1.125);
        assert_eq!(v.keep_prob, 0.875);
    }

    #[test]
    fn haar_density_bounds_hold_on_random_states() {
        let mut rng = SeedStream::new(3, 0, StreamRole::Candidates);
        for dim in 1..=2usize {
            let mut t = CoefficientTable::new(dim);
            t.grow(4).unwrap();
            let mut x = vec![0.0; dim];
            for _ in 0..200 {
                rng.unit_point(&mut x);
                t.insert(&x).unwrap();
            }
            for beta in [0.25, 1.0] {
                for _ in 0..500 {
                    rng.unit_point(&mut x);
                    let v = haar_keep_prob(&t, beta, &x).unwrap();
                    assert!(v.lambda >= 1.0 - beta / 2.0 && v.lambda <= 1.0 + beta / 2.0);
                    assert!(v.keep_prob >= 1.0 - beta && v.keep_prob <= 1.0);
                }
            }
        }
    }

    #[test]
    fn lambda_integrates_to_one_on_the_grid() {
        let mut rng = SeedStream::new(19, 0, StreamRole::Candidates);
        let mut t = CoefficientTable::new(1);
        t.grow(3).unwrap();
        let mut x = [0.0];
        for _ in 0..17 {
            rng.unit_point(&mut x);
            t.insert(&x).unwrap();
        }
        let cells = 1u64 << t.max_order();
        let vol = 1.0 / cells as f64;
        let total: f64 = (0..cells)
            .map(|c| {
                let center = (2 * c + 1) as f64 * vol / 2.0;
                haar_keep_prob(&t, 0.7, &[center]).unwrap().lambda * vol
            })
            .sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn balancing_identity_small_state() {
        // Integral of lambda over H+ minus H- equals
        // beta * half_support * sign(-coefficient) / shape_total.
        let mut rng = SeedStream::new(67, 0, StreamRole::Candidates);
        let mut t = CoefficientTable::new(1);
        t.grow(3).unwrap();
        let mut x = [0.0];
        for _ in 0..9 {
            rng.unit_point(&mut x);
            t.insert(&x).unwrap();
        }
        let beta = 1.0;
        let h = t.max_order();
        let cells = 1u64 << h;
        let vol = 1.0 / cells as f64;
        for shape in enumerate_shapes(h, 1).unwrap() {
            for flat in 0..shape.position_count() {
                let probe = HaarId::from_flat(shape.clone(), flat).unwrap();
                let coef = t.coefficient(&probe).unwrap();
                if coef == 0 {
                    continue;
                }
                let mut split = 0.0;
                for c in 0..cells {
                    let center = (2 * c + 1) as f64 * vol / 2.0;
                    let side = crate::haar::haar_eval(&probe, &[center]).unwrap() as f64;
                    split += side * haar_keep_prob(&t, beta, &[center]).unwrap().lambda * vol;
                }
                let expected =
                    beta * probe.half_volume() * (-coef.signum()) as f64 / t.shape_total() as f64;
                assert!((split - expected).abs() <= 1e-12, "H {probe:?}");
            }
        }
    }

    #[test]
    fn greedy_examples() {
        let empty = CoefficientTable::new(1);
        for beta in [0.2, 1.0] {
            assert_eq!(
                greedy_keep_prob(&empty, beta, &[0.4], GreedyConvention::Balance).unwrap(),
                1.0 - beta / 2.0
            );
        }
        let t = table_with(1, 1, &[&[0.1]]);
        assert_eq!(
            greedy_keep_prob(&t, 1.0, &[0.75], GreedyConvention::Balance).unwrap(),
            1.0
        );
        assert_eq!(
            greedy_keep_prob(&t, 1.0, &[0.25], GreedyConvention::Balance).unwrap(),
            0.0
        );
        // The inverted convention mirrors the two decisive cases.
        assert_eq!(
            greedy_keep_prob(&t, 1.0, &[0.75], GreedyConvention::Inverted).unwrap(),
            0.0
        );
        assert_eq!(
            greedy_keep_prob(&t, 1.0, &[0.25], GreedyConvention::Inverted).unwrap(),
            1.0
        );
        // At beta < 1 the three values clamp to {1-beta, 1-beta/2, 1}.
        assert_eq!(
            greedy_keep_prob(&t, 0.4, &[0.25], GreedyConvention::Balance).unwrap(),
            0.6
        );
    }

    #[test]
    fn monte_carlo_is_always_one() {
        assert_eq!(monte_carlo_keep_prob(), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(StrategyConfig::new(StrategyKind::Haar, 1, 0.0).is_err());
        assert!(StrategyConfig::new(StrategyKind::Haar, 1, 1.2).is_err());
        assert!(StrategyConfig::new(StrategyKind::Haar, 0, 0.5).is_err());
        assert!(StrategyConfig::new(StrategyKind::Haar, 2, 1.0).is_ok());
    }

    #[test]
    fn first_output_uses_flat_density() {
        let config = StrategyConfig::new(StrategyKind::Haar, 1, 0.5).unwrap();
        let mut engine = Engine::new(config, 12, 0);
        let record = engine.offer(&[0.42]).unwrap();
        assert_eq!(record.output_index, 1);
        assert_eq!(record.keep_prob, 1.0 - 0.25);
        assert!(!record.forced);
    }

    #[test]
    fn monte_carlo_keeps_everything() {
        let config = StrategyConfig::new(StrategyKind::MonteCarlo, 1, 1.0).unwrap();
        let mut source = UniformSource::new(1, 5, 0);
        let out = run(config, 5, 0, 50, &mut source).unwrap();
        assert_eq!(out.points.len(), 50);
        assert_eq!(out.candidates_consumed, 50);
        assert!(out.decisions.iter().all(|d| d.kept && !d.forced));

        // The output equals the candidate stream verbatim.
        let mut fresh = UniformSource::new(1, 5, 0);
        let mut buf = [0.0];
        for p in out.points.iter() {
            fresh.next_point(&mut buf).unwrap();
            assert_eq!(p, &buf);
        }
    }

    #[test]
    fn rejection_forces_next_keep() {
        // Greedy with one point at 0.1: a candidate on the deficient right
        // side is kept; one on the left is rejected and the next candidate
        // is kept unconditionally.
        let config = StrategyConfig::new(StrategyKind::Greedy, 1, 1.0).unwrap();
        let mut engine = Engine::new(config, 99, 0);
        // The first offer is a fair coin on the empty table; retry forced
        // if it lost so the state afterwards is exactly one point at 0.1.
        let first = engine.offer(&[0.1]).unwrap();
        assert_eq!(first.keep_prob, 0.5);
        if !first.kept {
            let second_try = engine.offer(&[0.1]).unwrap();
            assert!(second_try.kept && second_try.forced);
        }
        assert_eq!(engine.outputs_placed(), 1);

        let rejected = engine.offer(&[0.3]).unwrap();
        assert_eq!(rejected.keep_prob, 0.0);
        assert!(!rejected.kept);
        assert!(engine.pending_forced_keep());
        assert_eq!(engine.outputs_placed(), 1);

        let forced = engine.offer(&[0.8]).unwrap();
        assert!(forced.kept && forced.forced);
        assert_eq!(forced.output_index, 2);
        assert_eq!(engine.outputs_placed(), 2);
        assert_eq!(engine.points().get(1), &[0.8]);
    }

    #[test]
    fn table_grows_with_output_index() {
        let config = StrategyConfig::new(StrategyKind::Haar, 1, 1.0).unwrap();
        let mut source = UniformSource::new(1, 8, 0);
        let mut engine = Engine::new(config, 8, 0);
        let mut expected_order = 0;
        for n in 1u64..=64 {
            engine.step(&mut source).unwrap();
            assert_eq!(engine.outputs_placed(), n);
            expected_order = floor_log2(n);
            assert_eq!(engine.table().max_order(), expected_order);
        }
        assert_eq!(expected_order, 6);
    }

    #[test]
    fn never_two_consecutive_rejections_and_bounded_consumption() {
        for kind in [StrategyKind::Haar, StrategyKind::Greedy] {
            for beta in [0.3, 1.0] {
                let config = StrategyConfig::new(kind, 1, beta).unwrap();
                let mut source = UniformSource::new(1, 21, 4);
                let out = run(config, 21, 4, 400, &mut source).unwrap();
                assert_eq!(out.points.len(), 400);
                assert!(out.candidates_consumed <= 800);
                let mut prev_rejected = false;
                for d in &out.decisions {
                    if prev_rejected {
                        assert!(d.kept && d.forced);
                    } else {
                        assert!(!d.forced);
                        assert!(d.keep_prob >= 1.0 - beta - 1e-15);
                        assert!(d.keep_prob <= 1.0);
                    }
                    prev_rejected = !d.kept;
                }
                assert_eq!(out.decisions.len() as u64, out.candidates_consumed);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let config = StrategyConfig::new(StrategyKind::Greedy, 2, 0.8).unwrap();
        let mut s1 = UniformSource::new(2, 77, 3);
        let mut s2 = UniformSource::new(2, 77, 3);
        let a = run(config, 77, 3, 300, &mut s1).unwrap();
        let b = run(config, 77, 3, 300, &mut s2).unwrap();
        assert_eq!(a, b);

        let mut s3 = UniformSource::new(2, 77, 4);
        let c = run(config, 77, 4, 300, &mut s3).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn exhausted_source_reports_progress() {
        struct Finite {
            left: u32,
        }
        impl CandidateSource for Finite {
            fn dim(&self) -> usize {
                1
            }
            fn next_point(&mut self, out: &mut [f64]) -> Result<bool, Error> {
                if self.left == 0 {
                    return Ok(false);
                }
                self.left -= 1;
                out[0] = 0.5;
                Ok(true)
            }
        }
        let config = StrategyConfig::new(StrategyKind::MonteCarlo, 1, 1.0).unwrap();
        let mut source = Finite { left: 3 };
        let err = run(config, 0, 0, 10, &mut source).unwrap_err();
        assert_eq!(err, Error::CandidatesExhausted { produced: 3 });
    }
}
