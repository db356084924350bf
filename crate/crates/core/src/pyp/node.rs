use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pochhammer::{log_pochhammer, log_pochhammer_step};
use super::stirling::StirlingTable;
use crate::error::{Error, Result};

/// Discount `α ∈ [0,1)` and concentration `β > -α` of a Pitman-Yor node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PypParams {
    pub discount: f64,
    pub concentration: f64,
}

impl PypParams {
    pub fn new(discount: f64, concentration: f64) -> Result<Self> {
        let p = PypParams {
            discount,
            concentration,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::invalid(format!("discount {} not in [0,1)", self.discount)));
        }
        if !(self.concentration > -self.discount) || !self.concentration.is_finite() {
            return Err(Error::invalid(format!(
                "concentration {} must exceed -discount {}",
                self.concentration, -self.discount
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemCounts {
    pub customers: u32,
    pub tables: u32,
}

/// Removing the customer would leave an item with customers but no table.
///
/// The customer drawn for removal was a table contributor while other customers of the
/// same item remain. Its block of latent variables is pinned for this step; callers
/// keep the current assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Blocked;

/// Outcome of [`RestaurantNode::remove_customer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Removal {
    /// Customer removed; it was not a table contributor.
    Kept,
    /// Customer and one of its item's tables removed.
    TableRemoved,
    /// Nothing changed, see [`Blocked`].
    Blocked,
}

/// Customer and table counts of one marginalised Pitman-Yor node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RestaurantNode {
    counts: BTreeMap<u32, ItemCounts>,
    customers: u64,
    tables: u64,
}

/// Shared empty node for read-only lookups of nodes that do not exist yet.
pub static EMPTY_NODE: RestaurantNode = RestaurantNode {
    counts: BTreeMap::new(),
    customers: 0,
    tables: 0,
};

impl RestaurantNode {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a node from explicit per-item counts, checking the invariants.
    pub fn from_counts(items: impl IntoIterator<Item = (u32, ItemCounts)>) -> Result<Self> {
        let mut node = RestaurantNode::new();
        for (item, c) in items {
            if c.customers == 0 && c.tables == 0 {
                continue;
            }
            node.customers += u64::from(c.customers);
            node.tables += u64::from(c.tables);
            if node.counts.insert(item, c).is_some() {
                return Err(Error::invalid(format!("duplicate item {item}")));
            }
        }
        node.check()?;
        Ok(node)
    }

    #[inline]
    pub fn get(&self, item: u32) -> ItemCounts {
        self.counts.get(&item).copied().unwrap_or_default()
    }

    pub fn customers(&self) -> u64 {
        self.customers
    }

    pub fn tables(&self) -> u64 {
        self.tables
    }

    pub fn is_empty(&self) -> bool {
        self.customers == 0
    }

    /// Items with at least one customer, in item order.
    pub fn items(&self) -> impl Iterator<Item = (u32, ItemCounts)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn distinct_items(&self) -> usize {
        self.counts.len()
    }

    /// Per-item and total invariants.
    pub fn check(&self) -> Result<()> {
        let mut c_sum = 0u64;
        let mut t_sum = 0u64;
        for (&item, c) in &self.counts {
            if c.customers == 0 || c.tables == 0 || c.tables > c.customers {
                return Err(Error::Audit(format!(
                    "item {item}: {} customers at {} tables",
                    c.customers, c.tables
                )));
            }
            c_sum += u64::from(c.customers);
            t_sum += u64::from(c.tables);
        }
        if c_sum != self.customers || t_sum != self.tables {
            return Err(Error::Audit(format!(
                "totals ({}, {}) disagree with sums ({c_sum}, {t_sum})",
                self.customers, self.tables
            )));
        }
        Ok(())
    }

    /// `log g(N) = log (β|α)_T − log (β)_C + Σ_i log S^{c_i}_{t_i,α}`.
    pub fn log_likelihood(&self, params: PypParams, stirling: &mut StirlingTable) -> f64 {
        debug_assert_eq!(stirling.discount().to_bits(), params.discount.to_bits());
        if self.customers == 0 {
            return 0.0;
        }
        let b = params.concentration;
        let a = params.discount;
        // (β|α)_T / (β)_C with the common first factor β cancelled, so β ≤ 0 is allowed.
        let tables = log_pochhammer_step(b + a, a, self.tables - 1)
            .expect("β > -α keeps every factor positive");
        let customers =
            log_pochhammer(b + 1.0, self.customers - 1).expect("β > -1 keeps every factor positive");
        let stirling_sum: f64 = self
            .counts
            .values()
            .map(|c| stirling.log(c.customers as usize, c.tables as usize))
            .sum();
        tables - customers + stirling_sum
    }

    /// Gibbs weights for seating one more customer of `item`.
    ///
    /// Returns `(no_new_table, new_table)`, each the ratio of the joint over counts
    /// and table indicators after/before the addition. `parent_weight` is the same
    /// ratio one level up (the base probability at the root).
    pub fn gibbs_weights(
        &self,
        item: u32,
        params: PypParams,
        stirling: &mut StirlingTable,
        parent_weight: f64,
    ) -> (f64, f64) {
        let ItemCounts { customers: c, tables: t } = self.get(item);
        if self.customers == 0 {
            return (0.0, parent_weight);
        }
        let denom = params.concentration + self.customers as f64;
        let open = (params.concentration + params.discount * self.tables as f64) / denom;
        if c == 0 {
            return (0.0, open * parent_weight);
        }
        let (c, t) = (c as usize, t as usize);
        let base = stirling.log(c, t);
        let grow = (c + 1) as f64;
        let stay = (stirling.log(c + 1, t) - base).exp() * (c + 1 - t) as f64 / grow / denom;
        let new = (stirling.log(c + 1, t + 1) - base).exp() * (t + 1) as f64 / grow;
        (stay, open * new * parent_weight)
    }

    /// Posterior-predictive probability of `item` given the counts:
    /// `(c_i − α t_i + (β + α T) · parent) / (β + C)`.
    ///
    /// Returns `(from_existing_tables, via_parent)`; their sum is the predictive.
    pub fn predictive_weights(&self, item: u32, params: PypParams, parent: f64) -> (f64, f64) {
        if self.customers == 0 {
            return (0.0, parent);
        }
        let c = self.get(item);
        let denom = params.concentration + self.customers as f64;
        let existing =
            (f64::from(c.customers) - params.discount * f64::from(c.tables)) / denom;
        let fresh =
            (params.concentration + params.discount * self.tables as f64) * parent / denom;
        (existing, fresh)
    }

    pub fn predictive(&self, item: u32, params: PypParams, parent: f64) -> f64 {
        let (a, b) = self.predictive_weights(item, params, parent);
        a + b
    }

    /// Samples whether a removed customer of `item` is a table contributor.
    pub fn sample_removal<R: Rng + ?Sized>(
        &self,
        item: u32,
        rng: &mut R,
    ) -> std::result::Result<bool, Blocked> {
        let ItemCounts { customers: c, tables: t } = self.get(item);
        assert!(c > 0, "removing item {item} with no customers");
        let contributor = t == c || rng.random::<f64>() * f64::from(c) < f64::from(t);
        if contributor && t == 1 && c > 1 {
            return Err(Blocked);
        }
        Ok(contributor)
    }

    pub(crate) fn apply_add(&mut self, item: u32, new_table: bool) {
        let entry = self.counts.entry(item).or_default();
        debug_assert!(new_table || entry.customers > 0, "first customer must open a table");
        entry.customers += 1;
        self.customers += 1;
        if new_table {
            entry.tables += 1;
            self.tables += 1;
        }
    }

    pub(crate) fn apply_remove(&mut self, item: u32, table: bool) {
        let entry = self.counts.get_mut(&item).expect("item present");
        entry.customers -= 1;
        self.customers -= 1;
        if table {
            entry.tables -= 1;
            self.tables -= 1;
        }
        debug_assert!(entry.tables <= entry.customers);
        debug_assert!(entry.customers == 0 || entry.tables > 0);
        if entry.customers == 0 {
            debug_assert_eq!(entry.tables, 0);
            self.counts.remove(&item);
        }
    }

    /// Seats one customer at a root node (fixed parent with probability
    /// `parent_prob`). Returns whether a table was opened.
    pub fn add_customer<R: Rng + ?Sized>(
        &mut self,
        item: u32,
        params: PypParams,
        stirling: &mut StirlingTable,
        parent_prob: f64,
        rng: &mut R,
    ) -> bool {
        let (stay, new) = self.gibbs_weights(item, params, stirling, parent_prob);
        let open = stay == 0.0 || rng.random::<f64>() * (stay + new) < new;
        self.apply_add(item, open);
        open
    }

    /// Removes one customer of `item` from a root node.
    pub fn remove_customer<R: Rng + ?Sized>(&mut self, item: u32, rng: &mut R) -> Result<Removal> {
        if self.get(item).customers == 0 {
            return Err(Error::invalid(format!("item {item} has no customers")));
        }
        Ok(match self.sample_removal(item, rng) {
            Err(Blocked) => Removal::Blocked,
            Ok(table) => {
                self.apply_remove(item, table);
                if table {
                    Removal::TableRemoved
                } else {
                    Removal::Kept
                }
            }
        })
    }
}
