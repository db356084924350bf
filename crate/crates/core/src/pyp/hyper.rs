//! Auxiliary-variable sampling of `(discount, concentration)` for a group of nodes.
//!
//! Follows the Beta/Bernoulli augmentation for hierarchical Pitman-Yor language
//! models: per node `x ~ Beta(β+1, C−1)` and `y_i ~ Bern(β/(β+αi))` for the tables,
//! per table of size `n` the indicators `z_j ~ Bern((j−1)/(j−α))`, `j < n`, then
//! `α ~ Beta(a + Σ(1−y), b + Σ(1−z))` and `β ~ Gamma(s + Σy, r − Σ log x)`.
//!
//! Table sizes are not stored, so each item's `(c, t)` is expanded into a random
//! seating drawn exactly from its conditional given the counts.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::node::{PypParams, RestaurantNode};
use crate::util::log_add_exp;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountPrior {
    pub a: f64,
    pub b: f64,
}

/// Priors: discount ~ Beta(a, b), concentration ~ Gamma(shape, rate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperPriors {
    pub discount: DiscountPrior,
    pub concentration_shape: f64,
    pub concentration_rate: f64,
}

impl Default for HyperPriors {
    fn default() -> Self {
        HyperPriors {
            discount: DiscountPrior { a: 1.0, b: 1.0 },
            concentration_shape: 1.0,
            concentration_rate: 1.0,
        }
    }
}

#[derive(Default)]
struct AuxSums {
    y_on: f64,
    y_off: f64,
    z_off: f64,
    log_x: f64,
}

/// Draws table sizes for `customers` customers of one item seated at `tables`
/// tables under discount `a`.
///
/// A seating built customer by customer has weight `Π_joins (n_l − a)`; summing over
/// seatings that end at `tables` tables gives `S^c_t`. The forward pass uses the
/// completion weights `G(i,k)` from `(i customers, k tables)` to the final counts.
pub fn sample_table_sizes<R: Rng + ?Sized>(
    customers: usize,
    tables: usize,
    a: f64,
    rng: &mut R,
) -> Vec<usize> {
    assert!(tables >= 1 && tables <= customers);
    if tables == 1 {
        return vec![customers];
    }
    if tables == customers {
        return vec![1; customers];
    }
    // completion[i][k - lo(i)], lo(i) = max(0, t - (c - i)), k ≤ min(i, t)
    let lo = |i: usize| tables.saturating_sub(customers - i);
    let hi = |i: usize| i.min(tables);
    let mut completion: Vec<Vec<f64>> = vec![Vec::new(); customers + 1];
    completion[customers] = vec![0.0];
    for i in (0..customers).rev() {
        let (l, h) = (lo(i), hi(i));
        let (nl, nh) = (lo(i + 1), hi(i + 1));
        let next = &completion[i + 1];
        let at = |k: usize| {
            if k < nl || k > nh {
                f64::NEG_INFINITY
            } else {
                next[k - nl]
            }
        };
        let row: Vec<f64> = (l..=h)
            .map(|k| {
                let open = at(k + 1);
                let join_w = i as f64 - k as f64 * a;
                let join = if join_w > 0.0 { join_w.ln() + at(k) } else { f64::NEG_INFINITY };
                log_add_exp(open, join)
            })
            .collect();
        completion[i] = row;
    }
    let g = |i: usize, k: usize| -> f64 {
        if k < lo(i) || k > hi(i) {
            f64::NEG_INFINITY
        } else {
            completion[i][k - lo(i)]
        }
    };
    let mut sizes: Vec<usize> = Vec::with_capacity(tables);
    for i in 0..customers {
        let k = sizes.len();
        let open = if k == 0 {
            true
        } else if k == tables {
            false
        } else {
            let p_open = (g(i + 1, k + 1) - g(i, k)).exp();
            rng.random::<f64>() < p_open
        };
        if open {
            sizes.push(1);
        } else {
            let total = i as f64 - k as f64 * a;
            let mut u = rng.random::<f64>() * total;
            let mut chosen = k - 1;
            for (l, &n) in sizes.iter().enumerate() {
                let w = n as f64 - a;
                if u < w {
                    chosen = l;
                    break;
                }
                u -= w;
            }
            sizes[chosen] += 1;
        }
    }
    debug_assert_eq!(sizes.len(), tables);
    sizes
}

fn accumulate<'a, R: Rng + ?Sized>(
    nodes: impl IntoIterator<Item = &'a RestaurantNode>,
    params: PypParams,
    rng: &mut R,
) -> AuxSums {
    let (a, b) = (params.discount, params.concentration);
    let mut sums = AuxSums::default();
    for node in nodes {
        let c = node.customers();
        if c < 2 {
            continue;
        }
        let x = Beta::new(b + 1.0, (c - 1) as f64)
            .expect("valid beta")
            .sample(rng);
        sums.log_x += x.max(f64::MIN_POSITIVE).ln();
        for i in 1..node.tables() {
            let p = b / (b + a * i as f64);
            if rng.random::<f64>() < p {
                sums.y_on += 1.0;
            } else {
                sums.y_off += 1.0;
            }
        }
        for (_, counts) in node.items() {
            let sizes =
                sample_table_sizes(counts.customers as usize, counts.tables as usize, a, rng);
            for n in sizes {
                for j in 1..n {
                    let p = (j as f64 - 1.0) / (j as f64 - a);
                    if rng.random::<f64>() >= p {
                        sums.z_off += 1.0;
                    }
                }
            }
        }
    }
    sums
}

/// One auxiliary-variable update of a group's shared `(discount, concentration)`.
///
/// Requires `concentration > 0`. An update that would violate the constraints is
/// rejected and the previous value returned.
pub fn sample_group<'a, R: Rng + ?Sized>(
    nodes: impl IntoIterator<Item = &'a RestaurantNode>,
    params: PypParams,
    priors: &HyperPriors,
    rng: &mut R,
) -> PypParams {
    let sums = accumulate(nodes, params, rng);
    let discount = Beta::new(priors.discount.a + sums.y_off, priors.discount.b + sums.z_off)
        .expect("valid beta")
        .sample(rng);
    let rate = priors.concentration_rate - sums.log_x;
    let concentration = Gamma::new(priors.concentration_shape + sums.y_on, 1.0 / rate)
        .expect("valid gamma")
        .sample(rng);
    let proposal = PypParams {
        discount,
        concentration,
    };
    if proposal.validate().is_ok() && concentration > 0.0 && discount > 0.0 {
        proposal
    } else {
        log::warn!("rejected hyperparameter draw {proposal:?}; keeping {params:?}");
        params
    }
}
