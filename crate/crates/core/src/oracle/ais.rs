//! Aligned image sets at block length one.
//!
//! Set `i` of a completed cycle contributes two codeword symbols: `u_i` from
//! its entry message and `v_i` from the far end of its alignment path. The
//! alignment outputs are `Z_chk,i = floor(g_i0 u_i) + floor(g_i1 v_i)` with
//! random bounded-density gains; the conflict outputs are
//! `Z_x,i = floor(h_i0 w_i) + floor(h_i1 u_{i+1})` with fixed gains, where
//! `w_i` is `u_i` when the set is entered and left at the same message and
//! `v_i` otherwise.
//!
//! Codewords are the full product `{0..pbar}^(2m)` laid out as
//! `(u_1, v_1, .., u_m, v_m)`. Each conflict output `z` in the support is
//! mapped back to one codeword by the choice map `psi`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::entropy::entropy_bits;
use super::OracleError;
use crate::simulator::{substream, ChannelModel};

pub const MAX_PBAR: u64 = 12;
pub const MAX_M: usize = 5;
pub const MAX_CODEWORDS: u64 = 1 << 24;

/// How a conflict output picks its codeword among all preimages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Psi {
    /// Lexicographically smallest preimage.
    #[default]
    LexMin,
    /// Preimage with the smallest largest entry, ties broken lexicographically.
    /// Agrees across alphabet sizes: a preimage inside `{0..p}` is chosen
    /// whenever one exists.
    MinMax,
    /// Uniformly random preimage, fixed by the seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AisParams {
    pub m: usize,
    pub pbar: u64,
    /// `h[i] = [h_i0, h_i1]`.
    pub h: Vec<[f64; 2]>,
    pub exit_is_entry: Vec<bool>,
    pub model: ChannelModel,
    pub psi: Psi,
}

impl AisParams {
    /// Conflict gains uniform on the model's support and random entry/exit flags.
    pub fn random<R: Rng + ?Sized>(m: usize, pbar: u64, model: ChannelModel, psi: Psi, rng: &mut R) -> Self {
        let h = (0..m).map(|_| [model.sample(rng), model.sample(rng)]).collect();
        let exit_is_entry = (0..m).map(|_| rng.random_bool(0.5)).collect();
        AisParams {
            m,
            pbar,
            h,
            exit_is_entry,
            model,
            psi,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        self.model
            .validate()
            .map_err(|e| OracleError::InvalidInstance(e.to_string()))?;
        if self.m < 3 || self.m % 2 == 0 {
            return Err(OracleError::InvalidInstance(format!("m = {} is not odd and >= 3", self.m)));
        }
        if self.h.len() != self.m || self.exit_is_entry.len() != self.m {
            return Err(OracleError::InvalidInstance("need one gain pair and one flag per set".into()));
        }
        if self.h.iter().flatten().any(|x| !x.is_finite() || x.abs() > self.model.delta2) {
            return Err(OracleError::InvalidInstance("conflict gains must satisfy |h| <= delta2".into()));
        }
        if self.m > MAX_M || self.pbar > MAX_PBAR {
            return Err(OracleError::InstanceTooLarge(format!(
                "m = {}, pbar = {} (limits {MAX_M}, {MAX_PBAR})",
                self.m, self.pbar
            )));
        }
        let count = (self.pbar + 1).checked_pow(2 * self.m as u32);
        if count.is_none_or(|c| c > MAX_CODEWORDS) {
            return Err(OracleError::InstanceTooLarge(format!(
                "{}^{} codewords exceed {MAX_CODEWORDS}",
                self.pbar + 1,
                2 * self.m
            )));
        }
        Ok(())
    }

    fn pbar_plus(&self) -> f64 {
        self.pbar.max(1) as f64
    }

    /// `pbar^((m-1)/2) (8 delta2 f_max)^m`, with `pbar` floored at 1.
    fn prefactor(&self) -> f64 {
        let d = &self.model;
        self.pbar_plus().powi(((self.m - 1) / 2) as i32) * (8.0 * d.delta2 * d.f_max()).powi(self.m as i32)
    }

    fn cross(&self, cw: &[u64]) -> Vec<i64> {
        (0..self.m)
            .map(|i| {
                let w = if self.exit_is_entry[i] { cw[2 * i] } else { cw[2 * i + 1] };
                let next = cw[2 * ((i + 1) % self.m)];
                floor_mul(self.h[i][0], w) + floor_mul(self.h[i][1], next)
            })
            .collect()
    }
}

fn floor_mul(c: f64, x: u64) -> i64 {
    (c * x as f64).floor() as i64
}

#[derive(Debug, Clone)]
pub struct AisInstance {
    params: AisParams,
    /// Conflict-output support, ascending.
    support: Vec<Vec<i64>>,
    codewords: Vec<Vec<u64>>,
    /// Number of product codewords mapping to each support element.
    weights: Vec<u64>,
    index: HashMap<Vec<i64>, usize>,
    key_radix: u64,
}

impl AisInstance {
    /// Enumerates the codebook and fixes `psi`.
    pub fn new(params: AisParams) -> Result<Self, OracleError> {
        params.validate()?;
        let key_radix = (2.0 * params.model.delta2 * params.pbar as f64).floor() as u64 + 2;
        if key_radix.checked_pow(params.m as u32).is_none() {
            return Err(OracleError::InstanceTooLarge("alignment outputs overflow a 64-bit key".into()));
        }

        let mut rng = match params.psi {
            Psi::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            Psi::LexMin | Psi::MinMax => None,
        };
        let peak = |c: &[u64]| c.iter().copied().max().unwrap_or(0);
        let mut chosen: HashMap<Vec<i64>, (Vec<u64>, u64)> = HashMap::new();
        let mut cw = vec![0u64; 2 * params.m];
        loop {
            let z = params.cross(&cw);
            match chosen.get_mut(&z) {
                None => {
                    chosen.insert(z, (cw.clone(), 1));
                }
                Some((pick, count)) => {
                    *count += 1;
                    let replace = match rng.as_mut() {
                        Some(rng) => rng.random_range(0..*count) == 0,
                        None => params.psi == Psi::MinMax && peak(&cw) < peak(pick),
                    };
                    if replace {
                        pick.copy_from_slice(&cw);
                    }
                }
            }
            if !advance(&mut cw, params.pbar) {
                break;
            }
        }

        let mut entries: Vec<_> = chosen.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut support = Vec::with_capacity(entries.len());
        let mut codewords = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        for (z, (c, n)) in entries {
            support.push(z);
            codewords.push(c);
            weights.push(n);
        }
        let index = support.iter().enumerate().map(|(i, z)| (z.clone(), i)).collect();
        Ok(AisInstance {
            params,
            support,
            codewords,
            weights,
            index,
            key_radix,
        })
    }

    pub fn params(&self) -> &AisParams {
        &self.params
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, z: &[i64]) -> Option<usize> {
        self.index.get(z).copied()
    }

    /// `psi` applied to the `idx`-th support element.
    pub fn codeword(&self, idx: usize) -> &[u64] {
        &self.codewords[idx]
    }

    /// One realization of the alignment gains, `g[i] = [g_i0, g_i1]`.
    pub fn draw_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<[f64; 2]> {
        let model = &self.params.model;
        (0..self.params.m)
            .map(|_| [model.sample(rng), model.sample(rng)])
            .collect()
    }

    /// Alignment outputs of the `idx`-th support element under `g`.
    pub fn alignment_output(&self, idx: usize, g: &[[f64; 2]]) -> Vec<i64> {
        let cw = &self.codewords[idx];
        g.iter()
            .enumerate()
            .map(|(i, gi)| floor_mul(gi[0], cw[2 * i]) + floor_mul(gi[1], cw[2 * i + 1]))
            .collect()
    }

    fn alignment_key(&self, idx: usize, g: &[[f64; 2]]) -> u64 {
        let cw = &self.codewords[idx];
        g.iter().enumerate().fold(0u64, |acc, (i, gi)| {
            let v = floor_mul(gi[0], cw[2 * i]) + floor_mul(gi[1], cw[2 * i + 1]);
            acc * self.key_radix + v as u64
        })
    }

    /// Indices of all `lambda` whose codewords give the same alignment outputs as `nu` under `g`.
    pub fn aligned_image_set(&self, nu: usize, g: &[[f64; 2]]) -> Vec<usize> {
        let target = self.alignment_key(nu, g);
        (0..self.len()).filter(|&l| self.alignment_key(l, g) == target).collect()
    }

    fn aligned(&self, nu: usize, lambda: usize, g: &[[f64; 2]]) -> bool {
        self.alignment_key(nu, g) == self.alignment_key(lambda, g)
    }
}

/// Odometer step over `{0..=pbar}^len`; false after the last tuple.
fn advance(cw: &mut [u64], pbar: u64) -> bool {
    for x in cw.iter_mut().rev() {
        if *x < pbar {
            *x += 1;
            return true;
        }
        *x = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCheck {
    pub a: u64,
    pub a_prime: u64,
    /// Required value of `floor(g a) - floor(g a')`.
    pub target: i64,
    /// Grid points where the target is met.
    pub hits: usize,
    /// Distance between the first and last such grid point.
    pub extent: f64,
    pub bound: f64,
}

impl IntervalCheck {
    pub fn passes(&self) -> bool {
        self.extent <= self.bound
    }
}

fn grid(model: &ChannelModel, step: f64) -> impl Iterator<Item = f64> + '_ {
    let n = ((model.delta2 - model.delta1) / step).floor() as u64;
    (0..=n)
        .map(move |j| model.delta1 + j as f64 * step)
        .chain(std::iter::once(model.delta2))
}

/// Extent of the gains `g` on the grid over `[delta1, delta2]` for which
/// `floor(g a) - floor(g a') = target`; the partner gain's floor term fixes `target`.
pub fn check_alignment_interval(
    a: u64,
    a_prime: u64,
    target: i64,
    model: &ChannelModel,
    step: f64,
) -> Result<IntervalCheck, OracleError> {
    Ok(scan_alignment_extents(a, a_prime, model, step)?
        .into_iter()
        .find(|c| c.target == target)
        .unwrap_or(IntervalCheck {
            a,
            a_prime,
            target,
            hits: 0,
            extent: 0.0,
            bound: 4.0 / a.abs_diff(a_prime) as f64,
        }))
}

/// One grid scan, reporting every target that occurs.
pub fn scan_alignment_extents(
    a: u64,
    a_prime: u64,
    model: &ChannelModel,
    step: f64,
) -> Result<Vec<IntervalCheck>, OracleError> {
    if a == a_prime {
        return Err(OracleError::InvalidInstance("a and a' must differ".into()));
    }
    if !(step > 0.0) {
        return Err(OracleError::InvalidInstance("grid step must be positive".into()));
    }
    let diff = |g: f64| floor_mul(g, a) - floor_mul(g, a_prime);
    let lo = (model.delta1 * a as f64).floor() as i64 - (model.delta2 * a_prime as f64).floor() as i64 - 1;
    let hi = (model.delta2 * a as f64).floor() as i64 - (model.delta1 * a_prime as f64).floor() as i64 + 1;
    let mut spans: Vec<Option<(f64, f64, usize)>> = vec![None; (hi - lo + 1) as usize];
    for g in grid(model, step) {
        let slot = &mut spans[(diff(g) - lo) as usize];
        match slot {
            None => *slot = Some((g, g, 1)),
            Some((first, last, n)) => {
                *first = first.min(g);
                *last = last.max(g);
                *n += 1;
            }
        }
    }
    let bound = 4.0 / a.abs_diff(a_prime) as f64;
    Ok(spans
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            s.map(|(first, last, hits)| IntervalCheck {
                a,
                a_prime,
                target: lo + i as i64,
                hits,
                extent: last - first,
                bound,
            })
        })
        .collect())
}

/// `pbar^((m-1)/2) (8 delta2 f_max)^m prod_{|lambda_i - nu_i| > 2} 1/(|lambda_i - nu_i| - 2)`.
pub fn alignment_probability_bound(params: &AisParams, lambda: &[i64], nu: &[i64]) -> f64 {
    lambda
        .iter()
        .zip(nu)
        .map(|(l, n)| l.abs_diff(*n))
        .filter(|&d| d > 2)
        .fold(params.prefactor(), |acc, d| acc / (d - 2) as f64)
}

/// `pbar^((m-1)/2) (8 delta2 f_max)^m (7 + 2 ln P^)^m` with `P^ = 3 + floor(2 delta2 pbar)`.
pub fn image_size_bound(params: &AisParams) -> f64 {
    let p_hat = 3.0 + (2.0 * params.model.delta2 * params.pbar as f64).floor();
    params.prefactor() * (7.0 + 2.0 * p_hat.ln()).powi(params.m as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentEstimate {
    pub hits: usize,
    pub samples: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
}

impl AlignmentEstimate {
    pub fn passes(&self) -> bool {
        self.estimate <= self.bound + 3.0 * self.stderr
    }
}

/// Monte Carlo frequency of `lambda` falling in the aligned image set of `nu`.
pub fn estimate_alignment_probability(
    inst: &AisInstance,
    nu: usize,
    lambda: usize,
    samples: usize,
    seed: u64,
) -> AlignmentEstimate {
    let hits = (0..samples as u64)
        .into_par_iter()
        .filter(|&s| inst.aligned(nu, lambda, &inst.draw_gains(&mut substream(seed, s))))
        .count();
    let n = samples.max(1) as f64;
    let estimate = hits as f64 / n;
    AlignmentEstimate {
        hits,
        samples,
        estimate,
        stderr: (estimate * (1.0 - estimate) / n).sqrt(),
        bound: alignment_probability_bound(&inst.params, &inst.support[lambda], &inst.support[nu]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSetResult {
    pub nu: Vec<i64>,
    pub samples: usize,
    pub sizes: Vec<u32>,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
}

impl ImageSetResult {
    pub fn passes(&self) -> bool {
        self.sizes.iter().all(|&s| s >= 1) && self.mean <= self.bound + 3.0 * self.stderr
    }
}

/// Sample mean of `|S(nu, g)|` for each listed `nu`, sharing the gain draws.
pub fn expected_image_size_checks(
    inst: &AisInstance,
    nus: &[usize],
    samples: usize,
    seed: u64,
) -> Vec<ImageSetResult> {
    let per_sample: Vec<Vec<u32>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let g = inst.draw_gains(&mut substream(seed, s));
            let keys: Vec<u64> = (0..inst.len()).map(|l| inst.alignment_key(l, &g)).collect();
            let mut counts: HashMap<u64, u32> = HashMap::with_capacity(keys.len());
            for &k in &keys {
                *counts.entry(k).or_insert(0) += 1;
            }
            nus.iter().map(|&nu| counts[&keys[nu]]).collect()
        })
        .collect();
    let bound = image_size_bound(&inst.params);
    nus.iter()
        .enumerate()
        .map(|(j, &nu)| {
            let sizes: Vec<u32> = per_sample.iter().map(|row| row[j]).collect();
            let (mean, stderr) = mean_stderr(&sizes);
            ImageSetResult {
                nu: inst.support[nu].clone(),
                samples,
                sizes,
                mean,
                stderr,
                bound,
            }
        })
        .collect()
}

pub fn expected_image_size_check(inst: &AisInstance, nu: usize, samples: usize, seed: u64) -> ImageSetResult {
    expected_image_size_checks(inst, &[nu], samples, seed).remove(0)
}

fn mean_stderr(xs: &[u32]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `H(Z_x) - H(Z_chk | G)` in bits, with codewords uniform over the product
/// codebook. Reported next to `((m-1)/2) log2 pbar`; not asserted.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyGap {
    pub h_cross: f64,
    pub h_check_given_g: f64,
    pub gap: f64,
    pub reference: f64,
    pub samples: usize,
}

pub fn entropy_gap_report(inst: &AisInstance, samples: usize, seed: u64) -> EntropyGap {
    let total: u64 = inst.weights.iter().sum();
    let probs: Vec<f64> = inst.weights.iter().map(|&w| w as f64 / total as f64).collect();
    let h_cross = entropy_bits(&probs);
    let per_sample: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let g = inst.draw_gains(&mut substream(seed, s));
            let mut mass: HashMap<u64, f64> = HashMap::new();
            for (l, &p) in probs.iter().enumerate() {
                *mass.entry(inst.alignment_key(l, &g)).or_insert(0.0) += p;
            }
            let mut masses: Vec<f64> = mass.into_values().collect();
            masses.sort_by(f64::total_cmp);
            entropy_bits(&masses)
        })
        .collect();
    let h_check_given_g = per_sample.iter().sum::<f64>() / samples.max(1) as f64;
    let m = inst.params.m;
    EntropyGap {
        h_cross,
        h_check_given_g,
        gap: h_cross - h_check_given_g,
        reference: ((m - 1) / 2) as f64 * inst.params.pbar_plus().log2(),
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: usize, pbar: u64, seed: u64, psi: Psi) -> AisParams {
        AisParams::random(m, pbar, ChannelModel::default(), psi, &mut substream(seed, 0))
    }

    #[test]
    fn reflexive() {
        let inst = AisInstance::new(params(3, 2, 1, Psi::LexMin)).unwrap();
        let mut rng = substream(2, 0);
        for nu in (0..inst.len()).step_by(7) {
            let g = inst.draw_gains(&mut rng);
            assert!(inst.aligned_image_set(nu, &g).contains(&nu));
        }
    }

    #[test]
    fn psi_is_a_right_inverse() {
        for psi in [Psi::LexMin, Psi::Random { seed: 4 }] {
            let inst = AisInstance::new(params(3, 2, 3, psi)).unwrap();
            for (idx, z) in inst.support().iter().enumerate() {
                assert_eq!(&inst.params().cross(inst.codeword(idx)), z);
                assert!(inst.codeword(idx).iter().all(|&x| x <= 2));
            }
        }
    }

    #[test]
    fn zero_alphabet() {
        let inst = AisInstance::new(params(3, 0, 5, Psi::LexMin)).unwrap();
        assert_eq!(inst.len(), 1);
        let g = inst.draw_gains(&mut substream(0, 0));
        assert_eq!(inst.aligned_image_set(0, &g), vec![0]);
        let r = expected_image_size_check(&inst, 0, 50, 1);
        assert_eq!(r.mean, 1.0);
        assert!(r.bound >= 1.0 && r.passes());
    }

    #[test]
    fn limits() {
        let too_big = AisParams {
            pbar: 13,
            ..params(3, 1, 0, Psi::LexMin)
        };
        assert!(matches!(AisInstance::new(too_big), Err(OracleError::InstanceTooLarge(_))));
        let even = AisParams {
            m: 4,
            h: vec![[1.0, 1.0]; 4],
            exit_is_entry: vec![false; 4],
            ..params(3, 1, 0, Psi::LexMin)
        };
        assert!(matches!(AisInstance::new(even), Err(OracleError::InvalidInstance(_))));
        let wide = AisParams {
            m: 5,
            pbar: 12,
            h: vec![[1.0, 1.0]; 5],
            exit_is_entry: vec![false; 5],
            ..params(3, 1, 0, Psi::LexMin)
        };
        assert!(matches!(AisInstance::new(wide), Err(OracleError::InstanceTooLarge(_))));
    }

    #[test]
    fn interval_examples() {
        let model = ChannelModel::default();
        let scan = scan_alignment_extents(10, 0, &model, 1e-6).unwrap();
        assert!(scan.iter().all(IntervalCheck::passes));
        assert!(scan.iter().all(|c| (c.bound - 0.4).abs() < 1e-12));
        // a = 1, a' = 0 on [1, 2]: the only targets are 1 and 2
        let scan = scan_alignment_extents(1, 0, &model, 1e-6).unwrap();
        assert_eq!(scan.iter().map(|c| c.target).collect::<Vec<_>>(), vec![1, 2]);
        assert!(scan.iter().all(IntervalCheck::passes));
        let c = check_alignment_interval(12, 0, 18, &model, 1e-6).unwrap();
        assert!(c.hits > 0 && c.extent <= 1.0 / 3.0);
        assert!(scan_alignment_extents(3, 3, &model, 1e-6).is_err());
    }

    #[test]
    fn probability_bound_shape() {
        let p = params(3, 4, 0, Psi::LexMin);
        let base = 4.0 * 16f64.powi(3);
        assert_eq!(alignment_probability_bound(&p, &[0, 0, 0], &[2, 1, 0]), base);
        assert_eq!(alignment_probability_bound(&p, &[5, 0, 9], &[0, 0, 0]), base / 3.0 / 7.0);
    }

    #[test]
    fn same_codeword_aligns_always() {
        let inst = AisInstance::new(params(3, 3, 9, Psi::LexMin)).unwrap();
        let e = estimate_alignment_probability(&inst, 4, 4, 100, 0);
        assert_eq!(e.estimate, 1.0);
        assert!(e.bound >= 1.0 && e.passes());
    }

    #[test]
    fn size_bound_value() {
        let p = params(3, 3, 0, Psi::LexMin);
        let expected = 3.0 * 16f64.powi(3) * (7.0 + 2.0 * 15f64.ln()).powi(3);
        assert!((image_size_bound(&p) - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn sampling_is_thread_independent() {
        let inst = AisInstance::new(params(3, 3, 2, Psi::LexMin)).unwrap();
        let nus: Vec<usize> = (0..inst.len()).step_by(11).collect();
        let a = expected_image_size_checks(&inst, &nus, 64, 3);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| expected_image_size_checks(&inst, &nus, 64, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_gap_is_finite() {
        let inst = AisInstance::new(params(3, 2, 6, Psi::LexMin)).unwrap();
        let r = entropy_gap_report(&inst, 20, 0);
        assert!(r.h_cross > 0.0 && r.gap.is_finite());
        assert!(r.h_check_given_g <= r.h_cross + 1e-9);
    }
}
