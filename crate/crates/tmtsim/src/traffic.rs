//! Synthetic demand generation and the trace file format.
//!
//! Patterns cover the workloads the model is aimed at: uniform all-to-all,
//! the ring-reduce pattern of distributed training, Zipf-skewed demand, and
//! an elephant/mice mix concentrating traffic on a few hot pairs.
//!
//! Randomized patterns draw from a ChaCha8 stream cipher seeded from the
//! spec, so a trace is a pure function of its spec on every platform.
//!
//! Trace files are plain text: one `src dst` pair per line (0-indexed
//! decimal, single space, LF line endings, trailing newline), `#` lines are
//! comments. The request's time slot is its comment-excluded line index,
//! counting from 1.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ModelError, NodeId, Trace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("pattern requires at least 2 nodes, got {n}")]
    TooFewNodes { n: usize },
    #[error("trace length must be at least 1")]
    EmptyLength,
    #[error("zipf skew must be non-negative and finite, got {skew}")]
    InvalidSkew { skew: f64 },
    #[error("elephant fraction must be in [0, 1], got {fraction}")]
    InvalidElephantFraction { fraction: f64 },
    #[error("elephant pair count must be in 1..={max}, got {count}")]
    InvalidElephantCount { count: usize, max: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which synthetic pattern to draw.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind {
    /// Cycles deterministically through all `n(n-1)` ordered pairs in
    /// lexicographic order.
    AllToAll,
    /// Cycles `(0,1), (1,2), ..., (n-1,0)`.
    RingReduce,
    /// Pairs ranked lexicographically; rank `r` drawn with probability
    /// proportional to `r^-skew`. `skew = 0` degenerates to uniform.
    Zipf { skew: f64 },
    /// With probability `fraction`, draw uniformly among `pairs` fixed
    /// elephant pairs; otherwise uniformly among all remaining pairs.
    ElephantMice { fraction: f64, pairs: usize },
}

/// A fully specified synthetic trace: pattern, size, and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl PatternSpec {
    fn validate(&self) -> Result<(), TrafficError> {
        if self.n < 2 {
            return Err(TrafficError::TooFewNodes { n: self.n });
        }
        if self.m < 1 {
            return Err(TrafficError::EmptyLength);
        }
        let pair_count = self.n * (self.n - 1);
        match self.kind {
            PatternKind::AllToAll | PatternKind::RingReduce => {}
            PatternKind::Zipf { skew } => {
                if !skew.is_finite() || skew < 0.0 {
                    return Err(TrafficError::InvalidSkew { skew });
                }
            }
            PatternKind::ElephantMice { fraction, pairs } => {
                if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
                    return Err(TrafficError::InvalidElephantFraction { fraction });
                }
                if pairs == 0 || pairs > pair_count {
                    return Err(TrafficError::InvalidElephantCount {
                        count: pairs,
                        max: pair_count,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Ordered pairs `(src, dst)`, `src != dst`, in lexicographic order; the
/// pair at `index` in that order.
fn pair_at(n: usize, index: usize) -> (NodeId, NodeId) {
    let src = index / (n - 1);
    let rem = index % (n - 1);
    let dst = if rem < src { rem } else { rem + 1 };
    (NodeId::new(src), NodeId::new(dst))
}

/// Generates the trace described by `spec`. Pure: the same spec always
/// yields the same trace.
pub fn generate(spec: &PatternSpec) -> Result<Trace, TrafficError> {
    spec.validate()?;
    let n = spec.n;
    let pair_count = n * (n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let pairs: Vec<(NodeId, NodeId)> = match spec.kind {
        PatternKind::AllToAll => (0..spec.m).map(|i| pair_at(n, i % pair_count)).collect(),
        PatternKind::RingReduce => (0..spec.m)
            .map(|i| {
                let src = i % n;
                (NodeId::new(src), NodeId::new((src + 1) % n))
            })
            .collect(),
        PatternKind::Zipf { skew } => {
            let weights: Vec<f64> = (1..=pair_count)
                .map(|rank| (rank as f64).powf(-skew))
                .collect();
            let dist = WeightedIndex::new(&weights).expect("weights are positive");
            (0..spec.m)
                .map(|_| pair_at(n, dist.sample(&mut rng)))
                .collect()
        }
        PatternKind::ElephantMice { fraction, pairs } => {
            // seeded partial Fisher-Yates picks the elephant pairs
            let mut indices: Vec<usize> = (0..pair_count).collect();
            for i in 0..pairs {
                let j = rng.random_range(i..pair_count);
                indices.swap(i, j);
            }
            let (elephants, mice) = indices.split_at(pairs);
            (0..spec.m)
                .map(|_| {
                    let from_elephants = mice.is_empty() || rng.random_bool(fraction);
                    let index = if from_elephants {
                        elephants[rng.random_range(0..elephants.len())]
                    } else {
                        mice[rng.random_range(0..mice.len())]
                    };
                    pair_at(n, index)
                })
                .collect()
        }
    };
    Ok(Trace::from_pairs(pairs)?)
}

/// Parses the trace file format; node ids must be below `n`.
pub fn parse_trace(text: &str, n: usize) -> Result<Trace, TrafficError> {
    let mut pairs = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        let line_no = line_index + 1;
        let parse_err = |reason: String| TrafficError::Parse {
            line: line_no,
            reason,
        };
        if line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let (src, dst) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(parse_err(format!(
                    "expected \"src dst\", got {line:?}"
                )))
            }
        };
        let parse_node = |text: &str| -> Result<usize, TrafficError> {
            let id: usize = text
                .parse()
                .map_err(|_| parse_err(format!("invalid node id {text:?}")))?;
            if id >= n {
                return Err(parse_err(format!("node id {id} is outside 0..{n}")));
            }
            Ok(id)
        };
        let src = parse_node(src)?;
        let dst = parse_node(dst)?;
        if src == dst {
            return Err(parse_err(format!("self-loop request {src} -> {dst}")));
        }
        pairs.push((NodeId::new(src), NodeId::new(dst)));
    }
    Ok(Trace::from_pairs(pairs)?)
}

/// Writes the canonical trace format; [`parse_trace`] inverts it exactly.
pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for request in trace.requests() {
        writeln!(out, "{} {}", request.src, request.dst).expect("string writes cannot fail");
    }
    out
}
