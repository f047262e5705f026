//! Exact entropy, mutual information and total correlation over small
//! discrete joint distributions.
//!
//! Everything here enumerates the full joint, so cost is exponential in the
//! number of variables. These routines are the reference the model's
//! estimates are tested against. All quantities are in nats.

use crate::error::{Error, Result};

/// Largest arity accepted by [`JointTable`].
pub const MAX_ARITY: usize = 12;

const SUM_TOL: f64 = 1e-12;

/// Entropy `-Σ p ln p` with `0 ln 0 = 0`.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    check_distribution(dist, 1e-9)?;
    Ok(entropy_unchecked(dist))
}

fn entropy_unchecked(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

fn check_distribution(dist: &[f64], tol: f64) -> Result<()> {
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "mass {p} is negative or not finite"
        )));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
    }
    Ok(())
}

/// Joint probability table over `k` discrete variables, row-major with the
/// last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(cardinalities: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if cardinalities.is_empty() || cardinalities.len() > MAX_ARITY {
            return Err(Error::InvalidDistribution(format!(
                "arity {} outside 1..={MAX_ARITY}",
                cardinalities.len()
            )));
        }
        if cardinalities.contains(&0) {
            return Err(Error::InvalidDistribution(
                "zero-cardinality variable".into(),
            ));
        }
        let size: usize = cardinalities.iter().product();
        if size != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for {size} outcomes",
                probs.len()
            )));
        }
        check_distribution(&probs, SUM_TOL)?;
        Ok(JointTable {
            cards: cardinalities,
            probs,
        })
    }

    /// All-binary table.
    pub fn binary(arity: usize, probs: Vec<f64>) -> Result<Self> {
        Self::new(vec![2; arity], probs)
    }

    /// Product of independent marginals.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        for m in marginals {
            check_distribution(m, 1e-9)?;
        }
        let cards: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let mut probs = vec![1.0];
        for m in marginals {
            probs = probs
                .iter()
                .flat_map(|&p| m.iter().map(move |&q| p * q))
                .collect();
        }
        Self::new(cards, probs)
    }

    pub fn arity(&self) -> usize {
        self.cards.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Per-variable states of flat outcome `index`.
    pub fn outcome(&self, mut index: usize) -> Vec<usize> {
        let mut states = vec![0; self.cards.len()];
        for (s, &c) in states.iter_mut().zip(&self.cards).rev() {
            *s = index % c;
            index /= c;
        }
        states
    }

    /// Marginal over `vars`, kept in the order given.
    pub fn marginal(&self, vars: &[usize]) -> JointTable {
        assert!(
            vars.iter().all(|&v| v < self.arity()),
            "variable out of range"
        );
        let cards: Vec<usize> = vars.iter().map(|&v| self.cards[v]).collect();
        let mut probs = vec![0.0; cards.iter().product()];
        for (i, &p) in self.probs.iter().enumerate() {
            let states = self.outcome(i);
            let idx = vars
                .iter()
                .fold(0, |acc, &v| acc * self.cards[v] + states[v]);
            probs[idx] += p;
        }
        JointTable { cards, probs }
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.probs)
    }

    /// Distribution of the remaining variables given `var = state`, with
    /// the probability of that conditioning event. `None` when the event
    /// has zero mass.
    pub fn condition(&self, var: usize, state: usize) -> Option<(f64, JointTable)> {
        let rest: Vec<usize> = (0..self.arity()).filter(|&v| v != var).collect();
        let p_state = self.marginal(&[var]).probs[state];
        if p_state <= 0.0 || rest.is_empty() {
            return None;
        }
        let cards: Vec<usize> = rest.iter().map(|&v| self.cards[v]).collect();
        let mut probs = vec![0.0; cards.iter().product()];
        for (i, &p) in self.probs.iter().enumerate() {
            let states = self.outcome(i);
            if states[var] != state {
                continue;
            }
            let idx = rest
                .iter()
                .fold(0, |acc, &v| acc * self.cards[v] + states[v]);
            probs[idx] += p / p_state;
        }
        Some((p_state, JointTable { cards, probs }))
    }
}

fn subset_entropy(joint: &JointTable, vars: &[usize]) -> f64 {
    joint.marginal(vars).entropy()
}

/// `I(A:B) = H(A) + H(B) − H(A,B)` for disjoint variable groups.
pub fn group_mutual_information(joint: &JointTable, a: &[usize], b: &[usize]) -> f64 {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    subset_entropy(joint, a) + subset_entropy(joint, b) - subset_entropy(joint, &ab)
}

pub fn mutual_information(joint: &JointTable) -> Result<f64> {
    if joint.arity() != 2 {
        return Err(Error::InvalidArgument(format!(
            "mutual information needs 2 variables, table has {}",
            joint.arity()
        )));
    }
    Ok(group_mutual_information(joint, &[0], &[1]))
}

/// `Σ H(X_i) − H(X)`.
pub fn total_correlation(joint: &JointTable) -> f64 {
    let singles: f64 = (0..joint.arity())
        .map(|v| subset_entropy(joint, &[v]))
        .sum();
    singles - joint.entropy()
}

/// `D_KL(p(x) || Π p(x_i))`, evaluated directly over the joint.
pub fn total_correlation_kl(joint: &JointTable) -> Result<f64> {
    let marginals: Vec<Vec<f64>> = (0..joint.arity())
        .map(|v| joint.marginal(&[v]).probs)
        .collect();
    let mut kl = 0.0;
    for (i, &p) in joint.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let q: f64 = joint
            .outcome(i)
            .iter()
            .zip(&marginals)
            .map(|(&s, m)| m[s])
            .product();
        if q == 0.0 {
            return Err(Error::InvalidDistribution(
                "positive joint mass over a zero-mass product cell".into(),
            ));
        }
        kl += p * (p / q).ln();
    }
    Ok(kl)
}

/// `TC(X | Y) = Σ_y p(y) TC(X | Y = y)` where `Y` is variable `y_var`.
pub fn conditional_total_correlation(joint: &JointTable, y_var: usize) -> f64 {
    (0..joint.cards[y_var])
        .filter_map(|s| joint.condition(y_var, s))
        .map(|(p, cond)| p * total_correlation(&cond))
        .sum()
}

fn split_last(joint: &JointTable) -> Result<(Vec<usize>, usize)> {
    if joint.arity() < 2 {
        return Err(Error::InvalidArgument(
            "TC reduction needs at least one X variable and a Y".into(),
        ));
    }
    let y = joint.arity() - 1;
    Ok(((0..y).collect(), y))
}

/// `TC(X; Y) = TC(X) − TC(X | Y)` with `Y` the last variable of the table.
pub fn tc_reduction(joint: &JointTable) -> Result<f64> {
    let (xs, y) = split_last(joint)?;
    Ok(total_correlation(&joint.marginal(&xs)) - conditional_total_correlation(joint, y))
}

/// Same quantity as [`tc_reduction`] through `Σ_i I(X_i : Y) − I(X : Y)`.
pub fn tc_reduction_mi(joint: &JointTable) -> Result<f64> {
    let (xs, y) = split_last(joint)?;
    let singles: f64 = xs
        .iter()
        .map(|&x| group_mutual_information(joint, &[x], &[y]))
        .sum();
    Ok(singles - group_mutual_information(joint, &xs, &[y]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    /// Binary table from explicit (outcome bits → mass) rows.
    fn from_rows(arity: usize, rows: &[(&[usize], f64)]) -> JointTable {
        let mut probs = vec![0.0; 1 << arity];
        for (bits, p) in rows {
            let idx = bits.iter().fold(0, |a, &b| a * 2 + b);
            probs[idx] += p;
        }
        JointTable::binary(arity, probs).unwrap()
    }

    fn xor_triple() -> JointTable {
        let mut rows = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                rows.push(([a, b, a ^ b], 0.25));
            }
        }
        let rows: Vec<(&[usize], f64)> = rows.iter().map(|(k, p)| (&k[..], *p)).collect();
        from_rows(3, &rows)
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&[0.5, 0.5]).unwrap(), LN2, epsilon = 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[0.25, 0.75]).unwrap(), 0.562335, epsilon = 1e-6);
        assert!(entropy(&[0.6, 0.6]).is_err());
        assert!(entropy(&[1.2, -0.2]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointTable::product(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        assert_abs_diff_eq!(mutual_information(&prod).unwrap(), 0.0, epsilon = 1e-15);

        let copy = JointTable::binary(2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(mutual_information(&copy).unwrap(), LN2, epsilon = 1e-15);

        // direct Σ p ln(p / (p_a p_b)); both marginals are (0.5, 0.5)
        let direct = 2.0 * 0.4 * (0.4f64 / 0.25).ln() + 2.0 * 0.1 * (0.1f64 / 0.25).ln();
        let t = JointTable::binary(2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        assert_abs_diff_eq!(mutual_information(&t).unwrap(), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(direct, 0.192745, epsilon = 1e-6);

        assert!(mutual_information(&xor_triple()).is_err());
    }

    #[test]
    fn total_correlation_examples() {
        let indep = JointTable::product(&[vec![0.5, 0.5], vec![0.2, 0.8], vec![0.9, 0.1]]).unwrap();
        assert_abs_diff_eq!(total_correlation(&indep), 0.0, epsilon = 1e-15);

        let same = from_rows(3, &[(&[0, 0, 0], 0.5), (&[1, 1, 1], 0.5)]);
        assert_abs_diff_eq!(total_correlation(&same), 2.0 * LN2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            total_correlation_kl(&same).unwrap(),
            2.0 * LN2,
            epsilon = 1e-15
        );

        assert_abs_diff_eq!(total_correlation(&xor_triple()), LN2, epsilon = 1e-15);
    }

    #[test]
    fn tc_reduction_examples() {
        // Y constant
        let t = from_rows(3, &[(&[0, 0, 0], 0.5), (&[1, 1, 0], 0.5)]);
        assert_abs_diff_eq!(tc_reduction(&t).unwrap(), 0.0, epsilon = 1e-15);

        // Y = X1 = X2
        let t = from_rows(3, &[(&[0, 0, 0], 0.5), (&[1, 1, 1], 0.5)]);
        assert_abs_diff_eq!(tc_reduction(&t).unwrap(), LN2, epsilon = 1e-15);
        assert_abs_diff_eq!(tc_reduction_mi(&t).unwrap(), LN2, epsilon = 1e-15);

        // synergy: Y = X1 xor X2
        assert_abs_diff_eq!(tc_reduction(&xor_triple()).unwrap(), -LN2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            tc_reduction_mi(&xor_triple()).unwrap(),
            -LN2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn table_validation() {
        assert!(JointTable::binary(2, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(JointTable::binary(2, vec![1.0]).is_err());
        assert!(JointTable::binary(13, vec![0.0; 1 << 13]).is_err());
    }

    fn random_table(arity: usize) -> impl Strategy<Value = JointTable> {
        proptest::collection::vec(0.0f64..1.0, 1 << arity).prop_filter_map("zero mass", move |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6)
                .then(|| JointTable::binary(arity, w.iter().map(|x| x / s).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn tc_forms_agree(t in (1usize..=4).prop_flat_map(random_table)) {
            let a = total_correlation(&t);
            let b = total_correlation_kl(&t).unwrap();
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            prop_assert!(a >= -1e-12);
        }

        #[test]
        fn product_tables_have_zero_tc(ps in proptest::collection::vec(0.0f64..=1.0, 1..=5)) {
            let t = JointTable::product(&ps.iter().map(|&p| vec![p, 1.0 - p]).collect::<Vec<_>>()).unwrap();
            prop_assert!(total_correlation(&t).abs() < 1e-10);
        }

        #[test]
        fn tc_reduction_is_bounded_by_tc(t in (2usize..=4).prop_flat_map(random_table)) {
            let r = tc_reduction(&t).unwrap();
            let r2 = tc_reduction_mi(&t).unwrap();
            prop_assert!((r - r2).abs() < 1e-12);
            let xs: Vec<usize> = (0..t.arity() - 1).collect();
            prop_assert!(r <= total_correlation(&t.marginal(&xs)) + 1e-12);
        }

        #[test]
        fn independent_y_explains_nothing(
            x in (1usize..=3).prop_flat_map(random_table),
            py in 0.05f64..0.95,
        ) {
            // p(x, y) = p(x) p(y): TC(X|Y) = TC(X)
            let probs: Vec<f64> = x.probs().iter().flat_map(|&p| [p * (1.0 - py), p * py]).collect();
            let t = JointTable::binary(x.arity() + 1, probs).unwrap();
            prop_assert!(tc_reduction(&t).unwrap().abs() < 1e-12);
        }

        #[test]
        fn conditionally_independent_x_is_fully_explained(
            p0 in proptest::collection::vec(0.01f64..0.99, 1..=3),
            p1 in proptest::collection::vec(0.01f64..0.99, 3),
            py in 0.05f64..0.95,
        ) {
            // X_i independent given Y: TC(X;Y) = TC(X)
            let k = p0.len();
            let given = |ps: &[f64]| JointTable::product(&ps.iter().map(|&p| vec![1.0 - p, p]).collect::<Vec<_>>()).unwrap();
            let t0 = given(&p0);
            let t1 = given(&p1[..k]);
            let probs: Vec<f64> = t0.probs().iter().zip(t1.probs())
                .flat_map(|(&a, &b)| [a * (1.0 - py), b * py]).collect();
            let t = JointTable::binary(k + 1, probs).unwrap();
            let xs: Vec<usize> = (0..k).collect();
            let tc = total_correlation(&t.marginal(&xs));
            prop_assert!((tc_reduction(&t).unwrap() - tc).abs() < 1e-12);
        }
    }
}
