//! Exact discrete entropies and the two submodularity inequalities.

use std::collections::BTreeMap;

use rand::Rng;

use super::OracleError;

/// Probability mass over integer values.
pub type Pmf = BTreeMap<i64, f64>;
/// Joint mass of `(U1, U2, U3)`.
pub type Joint3 = BTreeMap<(i64, i64, i64), f64>;

pub const SUBMODULARITY_TOLERANCE: f64 = 1e-9;

fn validate<'a>(probs: impl Iterator<Item = &'a f64>) -> Result<(), OracleError> {
    let mut total = 0.0;
    for &p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(OracleError::NotADistribution(format!("mass {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(OracleError::NotADistribution(format!("total mass {total}")));
    }
    Ok(())
}

/// Shannon entropy in bits of a list of masses.
pub fn entropy_bits<'a>(probs: impl IntoIterator<Item = &'a f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn marginal<K: Ord>(joint: &Joint3, f: impl Fn(i64, i64, i64) -> K) -> BTreeMap<K, f64> {
    let mut out = BTreeMap::new();
    for (&(a, b, c), &p) in joint {
        *out.entry(f(a, b, c)).or_insert(0.0) += p;
    }
    out
}

fn h<K>(m: &BTreeMap<K, f64>) -> f64 {
    entropy_bits(m.values())
}

/// Both sides of one inequality `lhs <= rhs`, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `H(U1,U2,U3) + H(U1+U2+U3) <= H(U1+U2, U3) + H(U1, U2+U3)` for any joint law.
pub fn submodularity_joint(joint: &Joint3) -> Result<Inequality, OracleError> {
    validate(joint.values())?;
    let lhs = h(joint) + h(&marginal(joint, |a, b, c| a + b + c));
    let rhs = h(&marginal(joint, |a, b, c| (a + b, c))) + h(&marginal(joint, |a, b, c| (a, b + c)));
    Ok(Inequality { lhs, rhs })
}

fn product(p1: &Pmf, p2: &Pmf, p3: &Pmf) -> Joint3 {
    let mut joint = Joint3::new();
    for (&a, &pa) in p1 {
        for (&b, &pb) in p2 {
            for (&c, &pc) in p3 {
                joint.insert((a, b, c), pa * pb * pc);
            }
        }
    }
    joint
}

/// `H(U2) + H(U1+U2+U3) <= H(U1+U2) + H(U2+U3)` for independent marginals.
pub fn submodularity_independent(p1: &Pmf, p2: &Pmf, p3: &Pmf) -> Result<Inequality, OracleError> {
    for p in [p1, p2, p3] {
        validate(p.values())?;
    }
    let joint = product(p1, p2, p3);
    let lhs = h(p2) + h(&marginal(&joint, |a, b, c| a + b + c));
    let rhs = h(&marginal(&joint, |a, b, _| a + b)) + h(&marginal(&joint, |_, b, c| b + c));
    Ok(Inequality { lhs, rhs })
}

/// Checks both inequalities on independent `U1, U2, U3` within [`SUBMODULARITY_TOLERANCE`].
pub fn check_submodularity(p1: &Pmf, p2: &Pmf, p3: &Pmf) -> Result<bool, OracleError> {
    let joint = submodularity_joint(&product(p1, p2, p3))?;
    let indep = submodularity_independent(p1, p2, p3)?;
    Ok(joint.holds(SUBMODULARITY_TOLERANCE) && indep.holds(SUBMODULARITY_TOLERANCE))
}

/// Random law on `0..n` with `n` uniform in `1..=max_support`.
pub fn random_pmf<R: Rng + ?Sized>(max_support: usize, rng: &mut R) -> Pmf {
    let n = rng.random_range(1..=max_support.max(1));
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights
        .into_iter()
        .enumerate()
        .map(|(v, w)| (v as i64, w / total))
        .collect()
}
