//! Independent edge-error sampling and syndrome extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DecodingGraph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("edge {0} has no error probability")]
    MissingProbability(usize),
    #[error("node {0} is not a detector of this graph")]
    InvalidEvent(NodeId),
}

/// Identifies one Monte-Carlo sample. The generator for a sample depends only
/// on this pair, so samples can be drawn in any order on any thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        SeedSpec {
            master_seed,
            sample_index,
        }
    }

    /// ChaCha8 keyed by the master seed, with the sample index as stream id.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.sample_index);
        rng
    }
}

/// Set of flipped edges, as sorted edge indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ErrorPattern {
    flipped: Vec<usize>,
}

impl ErrorPattern {
    pub fn new(mut flipped: Vec<usize>) -> Self {
        flipped.sort_unstable();
        flipped.dedup();
        ErrorPattern { flipped }
    }

    pub fn edges(&self) -> &[usize] {
        &self.flipped
    }

    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty()
    }

    pub fn len(&self) -> usize {
        self.flipped.len()
    }

    /// Symmetric difference, i.e. the product of two Pauli errors.
    pub fn xor(&self, other: &ErrorPattern) -> ErrorPattern {
        ErrorPattern {
            flipped: sorted_symmetric_difference(&self.flipped, &other.flipped),
        }
    }
}

/// Detection events: the detectors whose parity flipped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Syndrome {
    events: Vec<NodeId>,
}

impl Syndrome {
    pub fn empty() -> Self {
        Syndrome::default()
    }

    /// Builds a syndrome from detector ids, rejecting boundary or unknown nodes.
    pub fn from_events(g: &DecodingGraph, mut events: Vec<NodeId>) -> Result<Self, SampleError> {
        events.sort_unstable();
        events.dedup();
        if let Some(&bad) = events.iter().find(|&&n| n >= g.num_nodes() || g.is_boundary(n)) {
            return Err(SampleError::InvalidEvent(bad));
        }
        Ok(Syndrome { events })
    }

    pub fn events(&self) -> &[NodeId] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        Syndrome {
            events: sorted_symmetric_difference(&self.events, &other.events),
        }
    }
}

fn sorted_symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Flips each edge independently with its own probability.
pub fn sample_errors(g: &DecodingGraph, seed: SeedSpec) -> Result<ErrorPattern, SampleError> {
    let mut rng = seed.rng();
    let mut flipped = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        let p = e.prob.ok_or(SampleError::MissingProbability(i))?;
        if rng.gen::<f64>() < p {
            flipped.push(i);
        }
    }
    Ok(ErrorPattern { flipped })
}

/// Detectors with an odd number of flipped incident edges. Boundary nodes
/// absorb parity and never appear.
pub fn syndrome_of(g: &DecodingGraph, errors: &ErrorPattern) -> Syndrome {
    let mut parity = vec![false; g.num_nodes()];
    for &ei in errors.edges() {
        let e = g.edge(ei);
        parity[e.u] ^= true;
        parity[e.v] ^= true;
    }
    let events = (0..g.num_nodes()).filter(|&n| parity[n] && !g.is_boundary(n)).collect();
    Syndrome { events }
}
