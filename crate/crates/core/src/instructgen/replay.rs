use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{sample_indices, seeded, shuffled_indices};

const OLD_STREAM: u64 = 2;
const NEW_STREAM: u64 = 1;

/// `r` old samples are drawn once, without replacement, with `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayPlan {
    pub r: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReplayMode {
    Replay(ReplayPlan),
    /// Batches of new samples only.
    NoReplay {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchSource {
    Old,
    New,
}

/// Position of a batch item in the old or new list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRef {
    pub source: BatchSource,
    pub index: usize,
}

/// Endless walk over `items`, reshuffled with `seed + pass` on every pass.
struct Cycler {
    items: Vec<usize>,
    order: Vec<usize>,
    pos: usize,
    pass: u64,
    seed: u64,
    stream: u64,
}

impl Cycler {
    fn new(items: Vec<usize>, seed: u64, stream: u64) -> Self {
        let mut c = Cycler {
            items,
            order: Vec::new(),
            pos: 0,
            pass: 0,
            seed,
            stream,
        };
        c.reshuffle();
        c
    }

    fn reshuffle(&mut self) {
        let mut rng: ChaCha8Rng = seeded(self.seed.wrapping_add(self.pass));
        rng.set_stream(self.stream);
        self.order = shuffled_indices(&mut rng, self.items.len());
        self.pos = 0;
    }

    fn next(&mut self) -> usize {
        if self.pos == self.order.len() {
            self.pass += 1;
            self.reshuffle();
        }
        let i = self.items[self.order[self.pos]];
        self.pos += 1;
        i
    }
}

/// Builds `epochs` epochs of batches. With replay, a batch of size `2n` is
/// `[old, new, old, new, ...]`; an epoch is `ceil(|new| / n)` batches, so
/// each new sample appears once per epoch when `n` divides `|new|`.
pub fn interleave_replay<A, B>(
    d_old: &[A],
    d_new: &[B],
    mode: &ReplayMode,
    batch_size: usize,
    epochs: usize,
) -> Result<Vec<Vec<BatchRef>>> {
    if batch_size == 0 {
        return Err(Error::invalid("batch size must be ≥ 1"));
    }
    if d_new.is_empty() {
        return Err(Error::invalid("new dataset is empty"));
    }
    let new_ref = |index| BatchRef {
        source: BatchSource::New,
        index,
    };
    match *mode {
        ReplayMode::NoReplay { seed } => {
            let mut new = Cycler::new((0..d_new.len()).collect(), seed, NEW_STREAM);
            let per_epoch = d_new.len().div_ceil(batch_size);
            Ok((0..per_epoch * epochs)
                .map(|_| (0..batch_size).map(|_| new_ref(new.next())).collect())
                .collect())
        }
        ReplayMode::Replay(plan) => {
            if !batch_size.is_multiple_of(2) {
                return Err(Error::invalid(format!("batch size must be even, got {batch_size}")));
            }
            if plan.r == 0 {
                return Err(Error::invalid("replay disabled needs r ≥ 1"));
            }
            if plan.r > d_old.len() {
                return Err(Error::invalid(format!(
                    "r = {} exceeds the {} old samples available",
                    plan.r,
                    d_old.len()
                )));
            }
            let replayed = sample_indices(&mut seeded(plan.seed), d_old.len(), plan.r);
            let mut old = Cycler::new(replayed, plan.seed, OLD_STREAM);
            let mut new = Cycler::new((0..d_new.len()).collect(), plan.seed, NEW_STREAM);
            let n = batch_size / 2;
            let per_epoch = d_new.len().div_ceil(n);
            Ok((0..per_epoch * epochs)
                .map(|_| {
                    let mut batch = Vec::with_capacity(batch_size);
                    for _ in 0..n {
                        batch.push(BatchRef {
                            source: BatchSource::Old,
                            index: old.next(),
                        });
                        batch.push(new_ref(new.next()));
                    }
                    batch
                })
                .collect())
        }
    }
}
