use crate::util::log_add_exp;

/// Rows up to this `n` are built with the plain (non-log) recurrence, which is exact
/// as long as every value stays below `f64::MAX`; `S^n_m ≤ (n-1)!` keeps 150 safe.
const LINEAR_ROWS: usize = 150;

/// Log-space table of generalised Stirling numbers `S^n_{m,α}` for one discount.
///
/// `S^0_0 = 1`, `S^n_0 = 0` for `n > 0`, `S^n_m = 0` for `m > n`, and
/// `S^{n+1}_m = S^n_{m-1} + (n - mα) S^n_m`.
#[derive(Clone, Debug)]
pub struct StirlingTable {
    discount: f64,
    /// `rows[n][m] = log S^n_m` for `m < rows[n].len()`.
    rows: Vec<Vec<f64>>,
    /// Column limit for rows beyond `LINEAR_ROWS`.
    max_tables: usize,
}

impl StirlingTable {
    pub fn new(discount: f64) -> Self {
        assert!((0.0..1.0).contains(&discount), "discount {discount} outside [0,1)");
        let mut table = StirlingTable {
            discount,
            rows: Vec::new(),
            max_tables: 64,
        };
        table.build_linear();
        table
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Number of rows currently materialised.
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    fn build_linear(&mut self) {
        let a = self.discount;
        let mut prev = vec![1.0f64];
        self.rows.push(vec![0.0]);
        for n in 0..LINEAR_ROWS {
            let mut next = vec![0.0f64; n + 2];
            for (m, slot) in next.iter_mut().enumerate().skip(1) {
                let carry = prev[m - 1];
                let stay = if m <= n { (n as f64 - m as f64 * a) * prev[m] } else { 0.0 };
                *slot = carry + stay;
            }
            self.rows.push(next.iter().map(|v| v.ln()).collect());
            prev = next;
        }
    }

    fn log_row_len(&self, n: usize) -> usize {
        (n + 1).min(self.max_tables + 1)
    }

    fn extend_rows(&mut self, upto: usize) {
        let a = self.discount;
        while self.rows.len() <= upto {
            let n = self.rows.len() - 1;
            let prev = &self.rows[n];
            let len = self.log_row_len(n + 1);
            let mut next = vec![f64::NEG_INFINITY; len];
            for (m, slot) in next.iter_mut().enumerate().skip(1) {
                let carry = prev.get(m - 1).copied().unwrap_or(f64::NEG_INFINITY);
                let stay = match prev.get(m) {
                    Some(&p) if m <= n => (n as f64 - m as f64 * a).ln() + p,
                    _ => f64::NEG_INFINITY,
                };
                *slot = log_add_exp(carry, stay);
            }
            self.rows.push(next);
        }
    }

    fn ensure(&mut self, n: usize, m: usize) {
        if n > LINEAR_ROWS && m > self.max_tables {
            self.max_tables = m.max(self.max_tables * 2);
            self.rows.truncate(LINEAR_ROWS + 1);
        }
        if n >= self.rows.len() {
            let target = n.max(self.rows.len() + self.rows.len() / 2);
            self.extend_rows(target);
        }
    }

    /// `log S^n_m`; `-inf` when the number is zero.
    pub fn log(&mut self, n: usize, m: usize) -> f64 {
        if m > n || (m == 0 && n > 0) {
            return f64::NEG_INFINITY;
        }
        self.ensure(n, m);
        self.rows[n][m]
    }

    /// Largest relative residual of the recurrence over the cached triangle.
    pub fn max_recurrence_residual(&self) -> f64 {
        let a = self.discount;
        let mut worst = 0.0f64;
        for n in 0..self.rows.len() - 1 {
            let next = &self.rows[n + 1];
            for m in 1..next.len() {
                let carry = self.rows[n].get(m - 1).copied().unwrap_or(f64::NEG_INFINITY);
                let stay = match self.rows[n].get(m) {
                    Some(&p) if m <= n => (n as f64 - m as f64 * a).ln() + p,
                    _ => f64::NEG_INFINITY,
                };
                let rhs = log_add_exp(carry, stay);
                let lhs = next[m];
                if lhs == f64::NEG_INFINITY && rhs == f64::NEG_INFINITY {
                    continue;
                }
                // log-space difference is the relative error of the value
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }
}

/// One [`StirlingTable`] per distinct discount value.
///
/// Lookups grow the table in place, so concurrent readers need their own cache (or
/// must grow it up front).
#[derive(Clone, Debug, Default)]
pub struct StirlingCache {
    tables: Vec<StirlingTable>,
}

impl StirlingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn table(&mut self, discount: f64) -> &mut StirlingTable {
        let pos = self
            .tables
            .iter()
            .position(|t| t.discount.to_bits() == discount.to_bits());
        match pos {
            Some(i) => &mut self.tables[i],
            None => {
                self.tables.push(StirlingTable::new(discount));
                self.tables.last_mut().expect("just pushed")
            }
        }
    }

    pub fn log_stirling(&mut self, n: usize, m: usize, discount: f64) -> f64 {
        self.table(discount).log(n, m)
    }

    /// Drops tables for discounts no longer in use.
    pub fn retain(&mut self, discounts: &[f64]) {
        self.tables
            .retain(|t| discounts.iter().any(|d| d.to_bits() == t.discount.to_bits()));
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain recurrence in linear space; test oracle.
    fn direct(n: usize, m: usize, a: f64) -> f64 {
        let mut row = vec![1.0f64];
        for k in 0..n {
            let mut next = vec![0.0; k + 2];
            for j in 1..=k + 1 {
                next[j] = row[j - 1] + if j <= k { (k as f64 - j as f64 * a) * row[j] } else { 0.0 };
            }
            row = next;
        }
        row.get(m).copied().unwrap_or(0.0)
    }

    #[test]
    fn boundary_values() {
        let mut t = StirlingTable::new(0.3);
        assert_eq!(t.log(0, 0), 0.0);
        assert_eq!(t.log(5, 0), f64::NEG_INFINITY);
        assert_eq!(t.log(3, 4), f64::NEG_INFINITY);
        for n in 1..400 {
            assert!(t.log(n, n).abs() < 1e-9, "diagonal {n}");
        }
    }

    #[test]
    fn hand_value() {
        let mut t = StirlingTable::new(0.5);
        assert!((t.log(3, 2).exp() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn zero_discount_gives_factorials_in_first_column() {
        let mut t = StirlingTable::new(0.0);
        let mut fact = 1.0f64;
        for n in 1..=8 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            assert_eq!(t.log(n, 1), fact.ln());
        }
    }

    #[test]
    fn small_rows_match_direct_recurrence_exactly() {
        for &a in &[0.0, 0.1, 0.5, 0.9] {
            let mut t = StirlingTable::new(a);
            for n in 0..=12 {
                for m in 0..=n {
                    let d = direct(n, m, a);
                    assert_eq!(t.log(n, m), d.ln(), "n={n} m={m} a={a}");
                }
            }
        }
    }

    #[test]
    fn log_rows_continue_the_recurrence() {
        let mut t = StirlingTable::new(0.4);
        t.log(2_000, 30);
        t.log(1_000, 300);
        assert!(t.max_recurrence_residual() < 1e-10);
        assert!(t.log(10_000, 10).is_finite());
    }

    #[test]
    fn cache_keys_on_exact_discount() {
        let mut cache = StirlingCache::new();
        cache.log_stirling(4, 2, 0.1);
        cache.log_stirling(4, 2, 0.2);
        cache.log_stirling(5, 2, 0.1);
        assert_eq!(cache.len(), 2);
        cache.retain(&[0.2]);
        assert_eq!(cache.len(), 1);
    }
}
