use std::borrow::{Borrow, BorrowMut};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::node::{Blocked, PypParams, RestaurantNode};
use super::stirling::StirlingCache;
use crate::error::{Error, Result};

/// A distribution customers can be seated in: a fixed base or a node chained to one.
pub trait Measure {
    /// Ratio of joint likelihoods after/before seating one customer of `item`,
    /// summed over every table-indicator configuration up the chain.
    fn gibbs_weight(&self, item: u32, stirling: &mut StirlingCache) -> f64;

    /// Posterior-predictive probability of `item` (normalised over items).
    fn predictive(&self, item: u32) -> f64;

    /// Samples the table indicators for removing one customer of `item`.
    ///
    /// Returns the number of levels whose table count would drop, or [`Blocked`].
    /// Nothing is modified.
    fn plan_removal<R: Rng + ?Sized>(&self, item: u32, rng: &mut R) -> Result<u32, Blocked>;
}

pub trait MutMeasure: Measure {
    /// Seats one customer, sampling new-table indicators level by level.
    /// Returns the number of levels at which a table was opened.
    fn seat<R: Rng + ?Sized>(&mut self, item: u32, stirling: &mut StirlingCache, rng: &mut R)
        -> u32;

    /// Seats one customer opening tables at exactly the first `depth` levels.
    fn seat_to_depth(&mut self, item: u32, depth: u32);

    /// Removes one customer, dropping tables at the first `depth` levels.
    fn unseat(&mut self, item: u32, depth: u32);
}

/// Fixed probability vector at the root of a hierarchy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedBase {
    probs: Vec<f64>,
}

impl FixedBase {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("base distribution over zero items"));
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("base probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("base probabilities sum to {total}")));
        }
        Ok(FixedBase { probs })
    }

    pub fn uniform(size: usize) -> Self {
        FixedBase {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl Measure for &FixedBase {
    fn gibbs_weight(&self, item: u32, _: &mut StirlingCache) -> f64 {
        self.probs[item as usize]
    }

    fn predictive(&self, item: u32) -> f64 {
        self.probs[item as usize]
    }

    fn plan_removal<R: Rng + ?Sized>(&self, _: u32, _: &mut R) -> Result<u32, Blocked> {
        Ok(0)
    }
}

impl MutMeasure for &FixedBase {
    fn seat<R: Rng + ?Sized>(&mut self, _: u32, _: &mut StirlingCache, _: &mut R) -> u32 {
        0
    }

    fn seat_to_depth(&mut self, _: u32, _: u32) {}

    fn unseat(&mut self, _: u32, _: u32) {}
}

/// Uniform base over `size` items without materialising the vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBase {
    pub size: usize,
}

impl Measure for UniformBase {
    fn gibbs_weight(&self, _: u32, _: &mut StirlingCache) -> f64 {
        1.0 / self.size as f64
    }

    fn predictive(&self, _: u32) -> f64 {
        1.0 / self.size as f64
    }

    fn plan_removal<R: Rng + ?Sized>(&self, _: u32, _: &mut R) -> Result<u32, Blocked> {
        Ok(0)
    }
}

impl MutMeasure for UniformBase {
    fn seat<R: Rng + ?Sized>(&mut self, _: u32, _: &mut StirlingCache, _: &mut R) -> u32 {
        0
    }

    fn seat_to_depth(&mut self, _: u32, _: u32) {}

    fn unseat(&mut self, _: u32, _: u32) {}
}

/// A restaurant node whose tables are customers of `parent`.
///
/// `N` is `&RestaurantNode` for read-only use or `&mut RestaurantNode` to seat.
pub struct Chain<N, P> {
    pub node: N,
    pub params: PypParams,
    pub parent: P,
}

impl<N, P> Chain<N, P> {
    pub fn new(node: N, params: PypParams, parent: P) -> Self {
        Chain {
            node,
            params,
            parent,
        }
    }
}

impl<N: Borrow<RestaurantNode>, P: Measure> Chain<N, P> {
    fn weights(&self, item: u32, stirling: &mut StirlingCache) -> (f64, f64) {
        let parent = self.parent.gibbs_weight(item, stirling);
        self.node
            .borrow()
            .gibbs_weights(item, self.params, stirling.table(self.params.discount), parent)
    }
}

impl<N: Borrow<RestaurantNode>, P: Measure> Measure for Chain<N, P> {
    fn gibbs_weight(&self, item: u32, stirling: &mut StirlingCache) -> f64 {
        let (stay, new) = self.weights(item, stirling);
        stay + new
    }

    fn predictive(&self, item: u32) -> f64 {
        let parent = self.parent.predictive(item);
        self.node.borrow().predictive(item, self.params, parent)
    }

    fn plan_removal<R: Rng + ?Sized>(&self, item: u32, rng: &mut R) -> Result<u32, Blocked> {
        if self.node.borrow().sample_removal(item, rng)? {
            Ok(1 + self.parent.plan_removal(item, rng)?)
        } else {
            Ok(0)
        }
    }
}

impl<N: BorrowMut<RestaurantNode>, P: MutMeasure> MutMeasure for Chain<N, P> {
    fn seat<R: Rng + ?Sized>(
        &mut self,
        item: u32,
        stirling: &mut StirlingCache,
        rng: &mut R,
    ) -> u32 {
        let (stay, new) = self.weights(item, stirling);
        let open = stay == 0.0 || rng.random::<f64>() * (stay + new) < new;
        self.node.borrow_mut().apply_add(item, open);
        if open {
            1 + self.parent.seat(item, stirling, rng)
        } else {
            0
        }
    }

    fn seat_to_depth(&mut self, item: u32, depth: u32) {
        self.node.borrow_mut().apply_add(item, depth > 0);
        if depth > 0 {
            self.parent.seat_to_depth(item, depth - 1);
        }
    }

    fn unseat(&mut self, item: u32, depth: u32) {
        self.node.borrow_mut().apply_remove(item, depth > 0);
        if depth > 0 {
            self.parent.unseat(item, depth - 1);
        }
    }
}
