//! Dual-route validation of the whole engine: a slow reference
//! implementation recomputes every keep probability from first principles
//! (coefficients by brute force over the kept prefix, no incremental
//! table) and must reproduce the production engine's output sequence bit
//! for bit under identical random streams.

use haarthin_core::{
    enumerate_shapes, haar_eval, locate_nonzero, run, GreedyConvention, HaarId, SeedStream,
    StrategyConfig, StrategyKind, StreamRole, UniformSource,
};

struct Reference {
    config: StrategyConfig,
    kept: Vec<Vec<f64>>,
    decisions: SeedStream,
    candidates: SeedStream,
}

impl Reference {
    fn new(config: StrategyConfig, master_seed: u64, run_index: u64) -> Self {
        Reference {
            config,
            kept: Vec::new(),
            decisions: SeedStream::new(master_seed, run_index, StreamRole::Decisions),
            candidates: SeedStream::new(master_seed, run_index, StreamRole::Candidates),
        }
    }

    fn next_candidate(&mut self) -> Vec<f64> {
        let mut x = vec![0.0; self.config.dim];
        self.candidates.unit_point(&mut x);
        x
    }

    /// Balance sum at x for max order h, from scratch.
    fn signed_sum(&self, x: &[f64], h: u32) -> i64 {
        if h == 0 {
            return 0;
        }
        let mut total = 0i64;
        for shape in enumerate_shapes(h, self.config.dim as u32).unwrap() {
            let (pos, sign_at_x) = locate_nonzero(&shape, x).unwrap();
            let id = HaarId::new(shape, pos).unwrap();
            let coefficient: i64 = self
                .kept
                .iter()
                .map(|p| haar_eval(&id, p).unwrap() as i64)
                .sum();
            total += -coefficient.signum() * sign_at_x as i64;
        }
        total
    }

    fn keep_prob(&self, x: &[f64], h: u32) -> f64 {
        let beta = self.config.beta;
        match self.config.kind {
            StrategyKind::MonteCarlo => 1.0,
            StrategyKind::Haar => {
                if h == 0 {
                    return 1.0 - beta / 2.0;
                }
                let shapes = enumerate_shapes(h, self.config.dim as u32).unwrap().len();
                let lambda = 1.0 + beta * self.signed_sum(x, h) as f64 / (2.0 * shapes as f64);
                lambda - beta / 2.0
            }
            StrategyKind::Greedy => {
                let sum = self.signed_sum(x, h);
                let effective = match self.config.convention {
                    GreedyConvention::Balance => sum,
                    GreedyConvention::Inverted => -sum,
                };
                match effective.signum() {
                    1 => 1.0,
                    0 => 1.0 - beta / 2.0,
                    _ => 1.0 - beta,
                }
            }
        }
    }

    /// Produces the next output; one decision uniform per output index,
    /// the candidate after a rejection kept unconditionally.
    fn place_next(&mut self) {
        let n = self.kept.len() as u64 + 1;
        let h = 63 - n.leading_zeros();
        let candidate = self.next_candidate();
        let keep_prob = self.keep_prob(&candidate, h);
        let coin = self.decisions.unit_f64();
        if coin <= keep_prob {
            self.kept.push(candidate);
        } else {
            let forced = self.next_candidate();
            self.kept.push(forced);
        }
    }
}

#[test]
fn engine_matches_first_principles_reference() {
    let n_max = 300u64;
    for kind in [
        StrategyKind::MonteCarlo,
        StrategyKind::Haar,
        StrategyKind::Greedy,
    ] {
        for convention in [GreedyConvention::Balance, GreedyConvention::Inverted] {
            if kind != StrategyKind::Greedy && convention == GreedyConvention::Inverted {
                continue;
            }
            for dim in [1usize, 2] {
                for beta in [0.4, 1.0] {
                    let config = StrategyConfig::new(kind, dim, beta)
                        .unwrap()
                        .with_convention(convention);
                    let mut reference = Reference::new(config, 314, 2);
                    for _ in 0..n_max {
                        reference.place_next();
                    }

                    let mut source = UniformSource::new(dim, 314, 2);
                    let out = run(config, 314, 2, n_max, &mut source).unwrap();

                    assert_eq!(out.points.len() as u64, n_max);
                    for (i, fast) in out.points.iter().enumerate() {
                        assert_eq!(
                            fast,
                            reference.kept[i].as_slice(),
                            "{} {} d={dim} beta={beta}: output {i} diverged",
                            kind.name(),
                            convention.name(),
                        );
                    }
                }
            }
        }
    }
}
