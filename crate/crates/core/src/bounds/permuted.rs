use super::{BoundError, Scalar};
use crate::walk::WalkKind;
use crate::weight::WeightFunction;

/// Largest number of elements for which all permutations are enumerated.
pub const PERMUTATION_LIMIT: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct PermutedBound<S> {
    /// Bound on `P(R_k = stats, I_k = v)` for any fixed landing vertex `v`.
    pub with_landing: S,
    /// Bound on `P(R_k = stats)`.
    pub marginal: S,
    /// Number of permutation terms that were summed explicitly.
    pub terms: u64,
    /// Whether the equal-initial-weight shortcut was taken.
    pub collapsed: bool,
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(perm: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
        if i == perm.len() {
            f(perm);
            return;
        }
        for j in i..perm.len() {
            perm.swap(i, j);
            rec(perm, i + 1, f);
            perm.swap(i, j);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rec(&mut perm, 0, &mut f);
}

/// Order-statistic bound obtained by summing the joint bound over every
/// assignment of the sorted counts `stats` to elements with initial weights
/// `initial`. For vertex walks `start` is the position of the start vertex
/// in `initial`; `vertices` is the vertex count used by the edge marginal.
pub fn permuted_orderstat_bound<S: Scalar>(
    kind: WalkKind,
    w: &WeightFunction,
    initial: &[f64],
    stats: &[u64],
    vertices: usize,
    start: usize,
) -> Result<PermutedBound<S>, BoundError> {
    let n = initial.len();
    if stats.len() != n {
        return Err(BoundError::WrongLength { expected: n, got: stats.len() });
    }
    if n == 0 || start >= n {
        return Err(BoundError::OutOfRange("empty element list or start index out of range".into()));
    }
    if stats.windows(2).any(|p| p[0] < p[1]) {
        return Err(BoundError::OutOfRange("order statistics must be non-increasing".into()));
    }
    let collapsed = initial.iter().all(|&x| x == initial[0]);
    if !collapsed && n > PERMUTATION_LIMIT {
        return Err(BoundError::Budget(format!(
            "{n}! permutation terms with distinct initial weights (limit {PERMUTATION_LIMIT} elements)"
        )));
    }
    let init: Vec<S> = initial.iter().map(|&l0| S::weight(w, l0, 0)).collect::<Result<_, _>>()?;
    let min_init = init.iter().skip(1).fold(init[0].clone(), |m, x| if *x < m { x.clone() } else { m });
    let prefactor = match kind {
        WalkKind::Edge => init.iter().fold(S::one(), |a, x| a * x.clone()),
        WalkKind::Vertex => init
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != start)
            .fold(S::one(), |a, (_, x)| a * x.clone()),
    } / min_init;

    // table[i][e] = w(stats[i] + initial[e])
    let table: Vec<Vec<S>> = stats
        .iter()
        .map(|&l| initial.iter().map(|&l0| S::weight(w, l0, l)).collect::<Result<Vec<S>, _>>())
        .collect::<Result<_, _>>()?;
    let term = |sigma: &[usize]| -> S {
        let vals: Vec<S> = (0..n).map(|i| table[i][sigma[i]].clone()).collect();
        match kind {
            WalkKind::Edge => {
                let sum = vals.iter().fold(S::zero(), |a, x| a + x.clone());
                let prod = vals.iter().fold(S::one(), |a, x| a * x.clone());
                sum / prod
            }
            WalkKind::Vertex => {
                let mut total = S::zero();
                for j in 0..n {
                    let mut sum = S::zero();
                    let mut prod = S::one();
                    for (i, x) in vals.iter().enumerate() {
                        if i != j {
                            sum = sum + x.clone();
                            prod = prod * x.clone();
                        }
                    }
                    total = total + sum / prod;
                }
                total
            }
        }
    };

    let (sum, terms) = if collapsed {
        let identity: Vec<usize> = (0..n).collect();
        (S::factorial(n as u64) * term(&identity), 1)
    } else {
        let mut acc = S::zero();
        let mut count = 0u64;
        for_each_permutation(n, |sigma| {
            acc = acc.clone() + term(sigma);
            count += 1;
        });
        (acc, count)
    };
    let with_landing = prefactor * sum;
    let multiplier = match kind {
        WalkKind::Edge => vertices as u64,
        WalkKind::Vertex => n as u64,
    };
    Ok(PermutedBound {
        marginal: S::from_u64(multiplier) * with_landing.clone(),
        with_landing,
        terms,
        collapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn equal_initial_weights_collapse() {
        let w = WeightFunction::power(2.0).unwrap();
        let b: PermutedBound<BigRational> =
            permuted_orderstat_bound(WalkKind::Edge, &w, &[1.0; 3], &[3, 1, 0], 3, 0).unwrap();
        assert!(b.collapsed);
        // one term: (16 + 4 + 1) / (16 * 4 * 1), times 3!
        assert_eq!(b.with_landing, BigRational::new(6.into(), 1.into()) * BigRational::new(21.into(), 64.into()));
        assert_eq!(b.marginal, b.with_landing.clone() * BigRational::from_integer(3.into()));
    }

    #[test]
    fn distinct_initial_weights_sum_all_permutations() {
        let w = WeightFunction::power(2.0).unwrap();
        let l0 = [1.0, 2.0, 3.0];
        let stats = [2u64, 1, 0];
        let b: PermutedBound<f64> = permuted_orderstat_bound(WalkKind::Edge, &w, &l0, &stats, 3, 0).unwrap();
        assert_eq!(b.terms, 6);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut sum = 0.0;
        for p in perms {
            let vals: Vec<f64> = (0..3).map(|i| (stats[i] as f64 + l0[p[i]]).powi(2)).collect();
            sum += vals.iter().sum::<f64>() / vals.iter().product::<f64>();
        }
        let pre = 1.0 * 4.0 * 9.0 / 1.0;
        assert!((b.with_landing - pre * sum).abs() < 1e-12 * b.with_landing);
        let v: PermutedBound<f64> = permuted_orderstat_bound(WalkKind::Vertex, &w, &l0, &stats, 3, 1).unwrap();
        assert!(v.marginal > 0.0 && (v.marginal - 3.0 * v.with_landing).abs() < 1e-9);
    }

    #[test]
    fn budget_is_enforced() {
        let w = WeightFunction::power(2.0).unwrap();
        let l0: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let err = permuted_orderstat_bound::<f64>(WalkKind::Edge, &w, &l0, &[0; 10], 5, 0).unwrap_err();
        assert!(matches!(err, BoundError::Budget(_)));
        assert!(permuted_orderstat_bound::<f64>(WalkKind::Edge, &w, &[1.0; 10], &[0; 10], 5, 0).is_ok());
    }
}
