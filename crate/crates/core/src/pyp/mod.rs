//! Marginalised Pitman-Yor restaurants.
//!
//! A node stores, per item, a customer count `c` and a table count `t` (the customers
//! passed up to its parent). Seating arrangements are never stored: the marginal
//! likelihood of a node is
//!
//! ```text
//! g = (β|α)_T / (β)_C · Π_i S^{c_i}_{t_i, α}
//! ```
//!
//! with generalised Stirling numbers `S` served from a [`StirlingCache`]. Removing a
//! customer samples whether it was one of the `t` table contributors (probability
//! `t/c`); adding one samples a new-table indicator per level of the hierarchy.

mod dirichlet;
pub mod hyper;
mod measure;
mod node;
mod pochhammer;
mod stirling;

pub use dirichlet::DirichletNode;
pub use hyper::{sample_group, DiscountPrior, HyperPriors};
pub use measure::{Chain, FixedBase, Measure, MutMeasure, UniformBase};
pub use node::{Blocked, EMPTY_NODE, ItemCounts, PypParams, Removal, RestaurantNode};
pub use pochhammer::{log_pochhammer, log_pochhammer_step};
pub use stirling::{StirlingCache, StirlingTable};
