//! Acceptance checks. Each check prints one PASS/FAIL line; the process exits
//! non-zero when any check fails. Pass check numbers as arguments to run a subset.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use totm_core::corpus::{split_corpus, Document, EmotionIndicator, PairIds, Tweet, Vocabulary};
use totm_core::eval::{classification_metrics, classify_labelled, hellinger, perplexity, sentiment_scores, FoldInConfig};
use totm_core::lexicon::{lambda_from_scores, SentimentExponents};
use totm_core::model::{FlatCorpus, Hyperparameters, ModelKind, ModelSnapshot, ModelState, TotmState};
use totm_core::pyp::{sample_group, HyperPriors, ItemCounts, PypParams, RestaurantNode, StirlingTable};
use totm_core::sampler::{
    b_gradient, b_objective, gibbs_sweep, optimize_b, train, ModelSetup, SamplerConfig, SentimentCounts,
};
use totm_core::synth::{crp_node, planted_polarity, topic_corpus, PlantedConfig, TopicCorpusConfig};
use totm_core::util::stream_rng;
use totm_core::{Polarity, Sentiment};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---- 1. combinatorial oracle ----------------------------------------------

/// Sums the probability of every sequential seating of `items` (in order) that ends
/// with `tables[k]` tables for item `k`, excluding base-measure factors.
fn brute_force_seating(items: &[u32], tables: &[u32], a: f64, b: f64) -> f64 {
    fn go(items: &[u32], i: usize, seating: &mut Vec<(u32, u32)>, want: &[u32], a: f64, b: f64) -> f64 {
        if i == items.len() {
            let mut t = vec![0u32; want.len()];
            for &(dish, _) in seating.iter() {
                t[dish as usize] += 1;
            }
            return if t == want { 1.0 } else { 0.0 };
        }
        let x = items[i];
        let n = i as f64;
        let k = seating.len() as f64;
        let mut total = 0.0;
        for j in 0..seating.len() {
            if seating[j].0 == x {
                let size = f64::from(seating[j].1);
                seating[j].1 += 1;
                total += (size - a) / (b + n) * go(items, i + 1, seating, want, a, b);
                seating[j].1 -= 1;
            }
        }
        seating.push((x, 1));
        total += (b + a * k) / (b + n) * go(items, i + 1, seating, want, a, b);
        seating.pop();
        total
    }
    go(items, 0, &mut Vec::new(), tables, a, b)
}

/// Every vector `v` with `lo[k] <= v[k] <= hi[k]`.
fn boxes(lo: &[u32], hi: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for (&l, &h) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (l..=h).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

fn check_combinatorial() -> Check {
    let params = [(0.0, 1.0), (0.5, 0.3), (0.2, 2.0), (0.9, 0.1), (0.75, -0.5)];
    let mut cases = 0;
    let mut worst = 0.0f64;
    for &(a, b) in &params {
        let p = PypParams::new(a, b).map_err(e2s)?;
        let mut table = StirlingTable::new(a);
        for customers in boxes(&[0, 0, 0], &[6, 6, 6]) {
            let total: u32 = customers.iter().sum();
            if total == 0 || total > 6 {
                continue;
            }
            let items: Vec<u32> = customers
                .iter()
                .enumerate()
                .flat_map(|(k, &c)| std::iter::repeat_n(k as u32, c as usize))
                .collect();
            let lo: Vec<u32> = customers.iter().map(|&c| u32::from(c > 0)).collect();
            for tables in boxes(&lo, &customers) {
                let node = RestaurantNode::from_counts(
                    customers
                        .iter()
                        .zip(&tables)
                        .enumerate()
                        .filter(|(_, (&c, _))| c > 0)
                        .map(|(k, (&c, &t))| (k as u32, ItemCounts { customers: c, tables: t })),
                )
                .map_err(e2s)?;
                let got = node.log_likelihood(p, &mut table).exp();
                let want = brute_force_seating(&items, &tables, a, b);
                let rel = ((got - want) / want).abs();
                worst = worst.max(rel);
                ensure(rel <= 1e-8, || {
                    format!("a={a} b={b} c={customers:?} t={tables:?}: {got} vs brute force {want}")
                })?;
                cases += 1;
            }
        }
    }

    // Integer recurrence for a = p/4: T^n_m = 4^n S^n_m,
    // T^{n+1}_m = 4 T^n_{m-1} + (4n - m p) T^n_m.
    let mut stirling_checked = 0;
    for p in 0..4u32 {
        let a = f64::from(p) / 4.0;
        let mut table = StirlingTable::new(a);
        let mut row: Vec<i128> = vec![1];
        for n in 0..=12usize {
            for m in 0..=n {
                let t = row[m];
                ensure(t < (1i128 << 53), || format!("T^{n}_{m} too large for an exact check"))?;
                let want = if t == 0 { f64::NEG_INFINITY } else { (t as f64 / 4f64.powi(n as i32)).ln() };
                let got = table.log(n, m);
                ensure(got == want, || format!("a={a}: log S^{n}_{m} = {got}, recurrence gives {want}"))?;
                stirling_checked += 1;
            }
            let mut next = vec![0i128; n + 2];
            for m in 1..=n + 1 {
                let stay = if m <= n { (4 * n as i128 - m as i128 * i128::from(p)) * row[m] } else { 0 };
                next[m] = 4 * row[m - 1] + stay;
            }
            row = next;
        }
    }
    Ok(format!(
        "{cases} node configurations, worst rel err {worst:.1e}; {stirling_checked} Stirling values exact"
    ))
}

// ---- 2. sampler correctness -----------------------------------------------

enum Parent {
    Node(usize),
    Base(Vec<f64>),
}

/// A Chinese restaurant franchise with explicit tables.
struct Franchise {
    params: Vec<(f64, f64)>,
    parents: Vec<Parent>,
}

type Seating = Vec<Vec<(u32, u32)>>;

impl Franchise {
    fn add(&mut self, params: (f64, f64), parent: Parent) -> usize {
        self.params.push(params);
        self.parents.push(parent);
        self.params.len() - 1
    }

    /// Every way to seat one customer with `dish` at `node`, with its probability.
    fn draw(&self, seating: &Seating, node: usize, dish: u32, prob: f64, out: &mut Vec<(f64, Seating)>) {
        let (a, b) = self.params[node];
        let tables = &seating[node];
        let n: u32 = tables.iter().map(|t| t.1).sum();
        let n = f64::from(n);
        for (j, &(d, size)) in tables.iter().enumerate() {
            if d == dish {
                let mut s = seating.clone();
                s[node][j].1 += 1;
                out.push((prob * (f64::from(size) - a) / (b + n), s));
            }
        }
        let open = prob * (b + a * tables.len() as f64) / (b + n);
        let mut s = seating.clone();
        s[node].push((dish, 1));
        match &self.parents[node] {
            Parent::Base(p) => out.push((open * p[dish as usize], s)),
            Parent::Node(parent) => self.draw(&s, *parent, dish, open, out),
        }
    }

    /// Marginal probability of drawing `draws` (node, dish) in order.
    fn sequence_prob(&self, draws: &[(usize, u32)]) -> f64 {
        let mut paths = vec![(1.0, vec![Vec::new(); self.params.len()])];
        for &(node, dish) in draws {
            let mut next = Vec::new();
            for (p, s) in &paths {
                self.draw(s, node, dish, *p, &mut next);
            }
            paths = next;
        }
        paths.iter().map(|(p, _)| p).sum()
    }
}

struct Toy {
    hyper: Hyperparameters,
    scores: Vec<f64>,
    num_targets: usize,
    /// Pair of tweet 0 (observed positive emotion) and tweet 1 (unobserved).
    pairs: [(u32, u32); 2],
}

/// Index of the joint assignment `(a1, r1, a2, r2, e2)`.
fn joint_index(a: [u32; 2], r: [usize; 2], e2: usize) -> usize {
    (((a[0] as usize * 3 + r[0]) * 2 + a[1] as usize) * 3 + r[1]) * 2 + e2
}

fn enumerate_posterior(toy: &Toy) -> Vec<f64> {
    let h = &toy.hyper;
    let pp = |p: PypParams| (p.discount, p.concentration);
    // φ*_r ∝ (1+b)^X_r with X_+ = S, X_0 = -|S|, X_- = -S
    let prior: Vec<Vec<f64>> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&sign: &f64| {
            let x: Vec<f64> = toy.scores.iter().map(|&s| if sign == 0.0 { -s.abs() } else { sign * s }).collect();
            let w: Vec<f64> = x.iter().map(|&x| (1.0 + h.b).powf(x)).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|w| w / z).collect()
        })
        .collect();
    let mut posterior = vec![0.0; h.max_aspects * 3 * h.max_aspects * 3 * 2];
    let na = h.max_aspects as u32;
    for a1 in 0..na {
        for a2 in 0..na {
            for r1 in 0..3 {
                for r2 in 0..3 {
                    for e2 in 0..2 {
                        let mut f = Franchise { params: Vec::new(), parents: Vec::new() };
                        let theta = f.add(pp(h.theta), Parent::Base(vec![1.0 / f64::from(na); na as usize]));
                        let psi: Vec<usize> = (0..na)
                            .map(|_| f.add(pp(h.psi), Parent::Base(vec![1.0 / toy.num_targets as f64; toy.num_targets])))
                            .collect();
                        let phi: Vec<usize> = (0..3).map(|r| f.add(pp(h.phi), Parent::Base(prior[r].clone()))).collect();
                        let mut leaves = BTreeMap::new();
                        for (t, r) in [(toy.pairs[0].0, r1), (toy.pairs[1].0, r2)] {
                            if let std::collections::btree_map::Entry::Vacant(v) = leaves.entry((t, r)) {
                                v.insert(f.add(pp(h.phi_leaf), Parent::Node(phi[r])));
                            }
                        }
                        let [(t1, o1), (t2, o2)] = toy.pairs;
                        let draws = [
                            (theta, a1),
                            (theta, a2),
                            (psi[a1 as usize], t1),
                            (psi[a2 as usize], t2),
                            (leaves[&(t1, r1)], o1),
                            (leaves[&(t2, r2)], o2),
                        ];
                        let mut p = f.sequence_prob(&draws);
                        // γ_e: sequential Dirichlet-multinomial; tweet 0 has e = +
                        let e = [1usize, e2];
                        let mut counts = [[0.0f64; 3]; 2];
                        for (k, &r) in [r1, r2].iter().enumerate() {
                            let q = h.q[e[k]];
                            let c = counts[e[k]];
                            p *= (q[r] + c[r]) / (q.iter().sum::<f64>() + c.iter().sum::<f64>());
                            counts[e[k]][r] += 1.0;
                        }
                        posterior[joint_index([a1, a2], [r1, r2], e2)] = p;
                    }
                }
            }
        }
    }
    let z: f64 = posterior.iter().sum();
    posterior.iter().map(|p| p / z).collect()
}

fn toy_corpus(toy: &Toy) -> FlatCorpus {
    let tweet = |k: usize, emotion| Tweet {
        tweet_id: k.to_string(),
        text: String::new(),
        emotion,
        label: None,
        pairs: vec![PairIds { target: toy.pairs[k].0, opinion: toy.pairs[k].1 }],
    };
    let doc = Document {
        doc_id: "d".into(),
        tweets: vec![tweet(0, EmotionIndicator::Positive), tweet(1, EmotionIndicator::Unobserved)],
    };
    FlatCorpus::with_sizes(&[doc], toy.num_targets, toy.scores.len()).unwrap()
}

fn run_toy_chain(toy: &Toy, sweeps: usize, seed: u64) -> Result<Vec<f64>, String> {
    let mut rng = stream_rng(seed, 0);
    let exponents = SentimentExponents::from_scores(&toy.scores);
    let mut state = TotmState::init(toy_corpus(toy), exponents, toy.hyper.clone(), &mut rng).map_err(e2s)?;
    let mut counts = vec![0u64; enumerate_posterior_len(toy)];
    for _ in 0..1000 {
        gibbs_sweep(&mut state, false, &mut rng);
    }
    for _ in 0..sweeps {
        gibbs_sweep(&mut state, false, &mut rng);
        let a = state.aspects();
        let r = state.sentiments();
        let e2 = state.emotions()[1].index();
        counts[joint_index([a[0], a[1]], [r[0].index(), r[1].index()], e2)] += 1;
    }
    state.audit().map_err(e2s)?;
    Ok(counts.iter().map(|&c| c as f64 / sweeps as f64).collect())
}

fn enumerate_posterior_len(toy: &Toy) -> usize {
    toy.hyper.max_aspects * toy.hyper.max_aspects * 18
}

fn check_sampler() -> Check {
    let params = |a, b| PypParams::new(a, b).unwrap();
    let hyper = Hyperparameters {
        theta: params(0.3, 0.7),
        psi: params(0.2, 1.5),
        phi: params(0.5, 0.4),
        phi_leaf: params(0.4, 0.9),
        b: 1.0,
        max_aspects: 2,
        ..Default::default()
    };
    let mut details = Vec::new();
    for (name, pairs) in [("repeated pair", [(0, 0), (0, 0)]), ("distinct pairs", [(0, 0), (1, 1)])] {
        let toy = Toy { hyper: hyper.clone(), scores: vec![1.5, -2.0], num_targets: 2, pairs };
        let exact = enumerate_posterior(&toy);
        let empirical = run_toy_chain(&toy, 1_000_000, 11)?;
        let l1: f64 = exact.iter().zip(&empirical).map(|(p, q)| (p - q).abs()).sum();
        ensure(l1 <= 0.02, || format!("{name}: L1 distance {l1:.4} over 72 joint assignments"))?;
        details.push(format!("{name} L1 {l1:.4}"));
    }
    Ok(format!("10^6 sweeps per corpus: {}", details.join(", ")))
}

// ---- 3. gradient check ----------------------------------------------------

fn check_gradient() -> Check {
    let mut rng = stream_rng(2024, 3);
    let mut worst = 0.0f64;
    let mut accepted = 0;
    for fixture in 0..20 {
        let v = rng.random_range(2..40);
        let scores: Vec<f64> = (0..v)
            .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(-5.0..5.0) })
            .collect();
        let x = SentimentExponents::from_scores(&scores);
        let counts: SentimentCounts =
            std::array::from_fn(|_| (0..v).map(|_| f64::from(rng.random_range(0..30u32))).collect());
        let b = rng.random_range(0.05..15.0);
        // objective from first principles: -b + Σ c_rv log φ*_rv(b)
        let prior = x.prior(b).map_err(e2s)?;
        let direct: f64 = -b
            + (0..3)
                .map(|r| counts[r].iter().zip(&prior[r]).map(|(c, p)| c * p.ln()).sum::<f64>())
                .sum::<f64>();
        let l = b_objective(&x, &counts, b);
        ensure((l - direct).abs() <= 1e-9 * direct.abs().max(1.0), || {
            format!("fixture {fixture}: objective {l} vs direct {direct}")
        })?;
        let h = 1e-5;
        let fd = (b_objective(&x, &counts, b + h) - b_objective(&x, &counts, b - h)) / (2.0 * h);
        let g = b_gradient(&x, &counts, b);
        let rel = (g - fd).abs() / g.abs().max(fd.abs());
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || format!("fixture {fixture}: gradient {g} vs finite difference {fd} (b={b})"))?;

        let b0 = rng.random_range(0.01..20.0);
        let search = optimize_b(&x, &counts, b0, rng.random_range(0.01..5.0), 200);
        let mut current = b_objective(&x, &counts, b0.max(totm_core::sampler::B_FLOOR));
        for step in search.steps.iter().filter(|s| s.accepted) {
            let before = b_objective(&x, &counts, step.b);
            let after = b_objective(&x, &counts, step.proposal);
            ensure(after >= before && step.proposal_objective >= step.objective, || {
                format!("fixture {fixture}: accepted step {} -> {} lowers l ({before} -> {after})", step.b, step.proposal)
            })?;
            current = after;
            accepted += 1;
        }
        ensure(current >= b_objective(&x, &counts, b0.max(totm_core::sampler::B_FLOOR)), || {
            format!("fixture {fixture}: search ended below its start")
        })?;
    }
    Ok(format!("20 fixtures, worst rel gradient err {worst:.1e}; {accepted} accepted steps all non-decreasing"))
}

// ---- 4. count audits ------------------------------------------------------

fn independent_audit(s: &TotmState) -> Result<(), String> {
    let c = s.corpus();
    let mut theta: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); c.docs.len()];
    let mut psi: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); s.num_aspects()];
    let mut leaves: BTreeMap<(u32, usize), BTreeMap<u32, u32>> = BTreeMap::new();
    let mut gamma = [[0u32; 3]; 2];
    for (i, p) in c.pairs.iter().enumerate() {
        let a = s.aspects()[i];
        let r = s.sentiments()[i];
        *theta[c.pair_doc(i)].entry(a).or_default() += 1;
        *psi[a as usize].entry(p.target).or_default() += 1;
        *leaves.entry((p.target, r.index())).or_default().entry(p.opinion).or_default() += 1;
        gamma[s.emotions()[c.pair_tweet[i] as usize].index()][r.index()] += 1;
    }
    let customers = |n: &RestaurantNode| -> BTreeMap<u32, u32> { n.items().map(|(k, c)| (k, c.customers)).collect() };
    let tables_ok = |n: &RestaurantNode, what: &str| -> Result<(), String> {
        n.check().map_err(e2s)?;
        for (k, ic) in n.items() {
            ensure(ic.tables >= 1 && ic.tables <= ic.customers, || {
                format!("{what} item {k}: {} tables for {} customers", ic.tables, ic.customers)
            })?;
        }
        Ok(())
    };
    for (d, want) in theta.iter().enumerate() {
        ensure(customers(s.theta(d)) == *want, || format!("theta {d} customers differ from assignments"))?;
        tables_ok(s.theta(d), "theta")?;
    }
    for (a, want) in psi.iter().enumerate() {
        ensure(customers(s.psi(a)) == *want, || format!("psi {a} customers differ from assignments"))?;
        tables_ok(s.psi(a), "psi")?;
    }
    let mut leaf_tables: [BTreeMap<u32, u32>; 3] = Default::default();
    let mut seen = 0;
    for (t, r, node) in s.phi_leaves() {
        let want = leaves.get(&(t, r.index())).cloned().unwrap_or_default();
        ensure(customers(node) == want, || format!("leaf ({t}, {r}) customers differ from assignments"))?;
        tables_ok(node, "leaf")?;
        for (o, ic) in node.items() {
            *leaf_tables[r.index()].entry(o).or_default() += ic.tables;
        }
        seen += 1;
    }
    ensure(seen == leaves.len(), || format!("{seen} stored leaves, {} used", leaves.len()))?;
    for r in Sentiment::ALL {
        let node = s.phi(r);
        ensure(customers(node) == leaf_tables[r.index()], || {
            format!("phi_{r} customers differ from the tables of its children")
        })?;
        tables_ok(node, "phi")?;
    }
    for e in Polarity::BOTH {
        let stored: Vec<u32> = s.gamma(e).counts().to_vec();
        ensure(stored == gamma[e.index()], || format!("gamma_{e:?} counts {stored:?} vs {:?}", gamma[e.index()]))?;
    }
    for (tw, t) in c.tweets.iter().enumerate() {
        if let Some(e) = t.emotion.observed() {
            ensure(s.emotions()[tw] == e, || format!("observed emotion of tweet {tw} changed"))?;
        }
    }
    let prior = s.exponents().prior(s.hyper().b).map_err(e2s)?;
    for r in Sentiment::ALL {
        ensure(s.phi_base(r) == prior[r.index()].as_slice(), || format!("phi*_{r} is stale"))?;
    }
    Ok(())
}

fn check_audits() -> Check {
    let corpus = topic_corpus(&TopicCorpusConfig::default(), 4).map_err(e2s)?;
    let flat = FlatCorpus::new(&corpus.docs, &corpus.vocab).map_err(e2s)?;
    let setup = ModelSetup::plain(corpus.vocab.num_opinions(), 5);
    let config = SamplerConfig {
        max_sweeps: 200,
        convergence_rel_tol: f64::MIN_POSITIVE,
        audit_every: 0,
        ..Default::default()
    };
    let (snap, _) = train(ModelKind::Totm, flat, &setup, &config, 4, String::new()).map_err(e2s)?;
    ensure(snap.sweeps == 200, || format!("stopped after {} sweeps", snap.sweeps))?;
    let ModelState::Totm(state) = &snap.state else { unreachable!() };
    state.audit().map_err(e2s)?;
    independent_audit(state)?;
    Ok(format!(
        "200 sweeps over {} pairs; rebuilt counts match, 1 <= t <= c everywhere (b = {:.3})",
        state.corpus().num_pairs(),
        state.hyper().b
    ))
}

// ---- 5. perplexity against ILDA -------------------------------------------

fn opinion_perplexity(kind: ModelKind, train_docs: &[Document], test: &[Document], vocab: &Vocabulary, seed: u64) -> Result<f64, String> {
    let flat = FlatCorpus::new(train_docs, vocab).map_err(e2s)?;
    let setup = ModelSetup::plain(vocab.num_opinions(), 5);
    let config = SamplerConfig { max_sweeps: 200, ..Default::default() };
    let (snap, _) = train(kind, flat, &setup, &config, seed, String::new()).map_err(e2s)?;
    let report = perplexity(&snap.state, test, &FoldInConfig::default(), seed).map_err(e2s)?;
    report.opinion_perplexity.ok_or_else(|| "no opinion perplexity".to_string())
}

fn check_perplexity() -> Check {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in 0..5u64 {
        let corpus = topic_corpus(&TopicCorpusConfig::default(), seed).map_err(e2s)?;
        let (train_docs, test) = split_corpus(corpus.docs, 0.9, seed).map_err(e2s)?;
        let totm = opinion_perplexity(ModelKind::Totm, &train_docs, &test, &corpus.vocab, seed)?;
        let ilda = opinion_perplexity(ModelKind::Ilda, &train_docs, &test, &corpus.vocab, seed)?;
        if totm < ilda {
            wins += 1;
        }
        lines.push(format!("{totm:.2}/{ilda:.2}"));
    }
    let detail = format!("TOTM lower in {wins}/5 seeds (TOTM/ILDA opinion perplexity: {})", lines.join(", "));
    ensure(wins >= 4, || detail.clone())?;
    Ok(detail)
}

// ---- 6. lexicon prior -----------------------------------------------------

fn check_lexicon() -> Check {
    let seed = 1;
    let p = planted_polarity(&PlantedConfig::default(), seed).map_err(e2s)?;
    let (train_docs, test) = split_corpus(p.docs.clone(), 0.9, seed).map_err(e2s)?;
    let flat = FlatCorpus::new(&train_docs, &p.vocab).map_err(e2s)?;
    let config = SamplerConfig { max_sweeps: 200, ..Default::default() };
    let mut results = Vec::new();
    for with_lexicon in [true, false] {
        let mut setup = ModelSetup::plain(p.vocab.num_opinions(), 5);
        if with_lexicon {
            setup.exponents = SentimentExponents::build(&p.lexicon, &p.vocab);
        }
        let (snap, _) = train(ModelKind::Totm, flat.clone(), &setup, &config, seed, String::new()).map_err(e2s)?;
        let preds = classify_labelled(&test, &snap.state);
        let predicted: Vec<_> = preds.iter().map(|x| x.predicted).collect();
        let gold: Vec<_> = preds.iter().map(|x| x.gold).collect();
        let accuracy = classification_metrics(&predicted, &gold).map_err(e2s)?.accuracy;
        let scores = sentiment_scores(&snap.state, &p.affinity, &p.vocab).map_err(e2s)?;
        results.push((accuracy, scores));
    }
    let (lex, plain) = (results[0], results[1]);
    let detail = format!(
        "accuracy {:.3} with lexicon vs {:.3} without; scores +{:.3}/-{:.3} vs +{:.3}/-{:.3}",
        lex.0, plain.0, lex.1.positive, lex.1.negative, plain.1.positive, plain.1.negative
    );
    ensure(
        lex.0 >= 0.90
            && lex.0 - plain.0 >= 0.10
            && lex.1.positive > plain.1.positive
            && lex.1.negative > plain.1.negative,
        || detail.clone(),
    )?;
    Ok(detail)
}

// ---- 7. hyperparameter recovery -------------------------------------------

fn check_hyper_recovery() -> Check {
    let mut rng = stream_rng(7, 0);
    let truth = PypParams::new(0.5, 10.0).map_err(e2s)?;
    let node = crp_node(truth, 10_000, u32::MAX, &mut rng);
    let priors = HyperPriors::default();
    let mut params = PypParams::new(0.1, 1.0).map_err(e2s)?;
    for _ in 0..200 {
        params = sample_group([&node], params, &priors, &mut rng);
    }
    let (mut discount, mut concentration) = (0.0, 0.0);
    for _ in 0..500 {
        params = sample_group([&node], params, &priors, &mut rng);
        discount += params.discount / 500.0;
        concentration += params.concentration / 500.0;
    }
    let detail = format!(
        "{} tables for 10^4 customers; posterior mean discount {discount:.3} (true 0.5), concentration {concentration:.2} (true 10)",
        node.tables()
    );
    ensure((discount - 0.5).abs() <= 0.1, || detail.clone())?;
    Ok(detail)
}

// ---- 8. convergence -------------------------------------------------------

fn check_convergence() -> Check {
    let mut converged = 0;
    let mut sweeps = Vec::new();
    for seed in 0..5u64 {
        let corpus = topic_corpus(&TopicCorpusConfig { num_docs: 10_000, ..Default::default() }, seed).map_err(e2s)?;
        let flat = FlatCorpus::new(&corpus.docs, &corpus.vocab).map_err(e2s)?;
        let setup = ModelSetup::plain(corpus.vocab.num_opinions(), 5);
        let config = SamplerConfig { max_sweeps: 200, ..Default::default() };
        let (snap, _): (ModelSnapshot, _) =
            train(ModelKind::Totm, flat, &setup, &config, seed, String::new()).map_err(e2s)?;
        if snap.converged {
            converged += 1;
            sweeps.push(snap.sweeps.to_string());
        } else {
            sweeps.push("-".into());
        }
    }
    let detail = format!("{converged}/5 seeds met the 0.1%-for-10-sweeps rule (sweeps: {})", sweeps.join(", "));
    ensure(converged >= 4, || detail.clone())?;
    Ok(detail)
}

// ---- 9. determinism -------------------------------------------------------

fn files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(e2s)? {
        let entry = entry.map_err(e2s)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        out.insert(name, std::fs::read(entry.path()).map_err(e2s)?);
    }
    Ok(out)
}

fn check_determinism() -> Check {
    let f = common::planted_fixture(40, 30);
    for out in ["run1", "run2"] {
        for run in common::pipeline(&f, out) {
            let code = run.status.code();
            ensure(matches!(code, Some(0) | Some(3)), || {
                format!("{out}: exit {code:?}: {}", String::from_utf8_lossy(&run.stderr))
            })?;
        }
    }
    let a = files(&f.path("run1"))?;
    let b = files(&f.path("run2"))?;
    ensure(a.keys().eq(b.keys()), || format!("file sets differ: {:?} vs {:?}", a.keys(), b.keys()))?;
    for (name, bytes) in &a {
        ensure(b[name] == *bytes, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} output files byte-identical across two runs", a.len()))
}

// ---- 10. small math -------------------------------------------------------

fn check_small_math() -> Check {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
    let h = |p: &[f64], q: &[f64]| hellinger(p, q).map_err(e2s);
    ensure(h(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5])? == 0.0, || "H(p, p) != 0".into())?;
    ensure(close(h(&[1.0, 0.0], &[0.0, 1.0])?, 1.0), || "H of disjoint supports != 1".into())?;
    let hand = h(&[1.0, 0.0], &[0.5, 0.5])?;
    let want = (1.0 - 0.5f64.sqrt()).sqrt();
    ensure(close(hand, want) && (hand - 0.5412).abs() < 5e-5, || format!("H((1,0),(.5,.5)) = {hand}"))?;

    let x = SentimentExponents::from_scores(&[3.0, -2.0, 0.0]);
    let rows = [
        (Sentiment::Positive, [3.0, -2.0, 0.0]),
        (Sentiment::Neutral, [-3.0, -2.0, 0.0]),
        (Sentiment::Negative, [-3.0, 2.0, 0.0]),
    ];
    for (r, want) in rows {
        ensure(x.row(r) == want, || format!("X_{r} = {:?}, want {want:?}", x.row(r)))?;
    }

    let prior = x.prior(1e-12).map_err(e2s)?;
    for row in &prior {
        ensure(row.iter().all(|&p| close(p, 1.0 / 3.0)), || format!("b -> 0 prior {row:?} is not uniform"))?;
    }
    let two = SentimentExponents::from_scores(&[1.0, 0.0]).prior(1.0).map_err(e2s)?;
    let pos = &two[Sentiment::Positive.index()];
    ensure(close(pos[0], 2.0 / 3.0) && close(pos[1], 1.0 / 3.0), || format!("two-word prior {pos:?}"))?;

    let lambda = lambda_from_scores(&[2.0, -1.0, 0.0]);
    let want = [[0.05, 0.9, 1.0 / 3.0], [0.05, 0.05, 1.0 / 3.0], [0.9, 0.05, 1.0 / 3.0]];
    for (r, row) in want.iter().enumerate() {
        for (v, &w) in row.iter().enumerate() {
            ensure(close(lambda[r][v], w), || format!("lambda[{r}][{v}] = {}, want {w}", lambda[r][v]))?;
        }
    }
    Ok("Hellinger, prior, exponent and lambda identities hold".into())
}

fn main() {
    let checks: [(u32, &str, fn() -> Check); 10] = [
        (1, "PYP likelihood and Stirling numbers vs brute force", check_combinatorial),
        (2, "Gibbs chain matches the enumerated posterior", check_sampler),
        (3, "b gradient and monotone ascent", check_gradient),
        (4, "count audits after 200 sweeps", check_audits),
        (5, "opinion perplexity below ILDA", check_perplexity),
        (6, "lexicon prior improves polarity", check_lexicon),
        (7, "discount recovered from CRP data", check_hyper_recovery),
        (8, "convergence within 200 sweeps", check_convergence),
        (9, "byte-identical reruns", check_determinism),
        (10, "small exact identities", check_small_math),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (id, name, check) in checks {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let result = check();
        let took = started.elapsed();
        total += took;
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{:.1}s]", took.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{:.1}s]", took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {failed} failed [{:.1}s]", total.as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
