//! Trial-based validation of slot schemes.
//!
//! Channels are redrawn for every channel use (coherence time one) and are
//! never shown to the encoder: [`encode`] sees only messages and the scheme.
//! Receivers know their own channel realizations exactly.
//!
//! The deterministic mode uses integer inputs `x in 0..=pbar` and outputs
//! `sum_l floor(g_kl * x_l)`. Privates take values in `0..qp` with
//! `qp = pbar/2 + 1`; commons sit on the lattice `{0, M, .., (qc-1) M}` with
//! `M = qp / qc`, so `private + common <= pbar`. The AWGN mode sends unit-power
//! PAM symbols scaled by `sqrt(P)` plus unit-variance Gaussian noise.
//!
//! Every trial seeds its own generator from `(seed, trial)`, so summaries do
//! not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scheme::{free_slot, TransmissionScheme};
use crate::topology::NetworkTopology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("symbol {symbol} outside 0..={pbar}")]
    SymbolOutOfRange { symbol: u64, pbar: u64 },
    #[error("coefficient and symbol counts differ ({0} vs {1})")]
    ArityMismatch(usize, usize),
    #[error("invalid channel model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scheme has {scheme} users, topology has {topology}")]
    SchemeTopologyMismatch { scheme: usize, topology: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Channel gains drawn uniformly from `[delta1, delta2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub delta1: f64,
    pub delta2: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            delta1: 1.0,
            delta2: 2.0,
        }
    }
}

impl ChannelModel {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self, SimError> {
        let m = ChannelModel { delta1, delta2 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.delta1 > 0.0 && self.delta2 > self.delta1 && self.delta2.is_finite()) {
            return Err(SimError::InvalidModel(format!(
                "need 0 < delta1 < delta2 < inf, got [{}, {}]",
                self.delta1, self.delta2
            )));
        }
        if self.delta2 < 1.0 || self.f_max() < 1.0 {
            return Err(SimError::InvalidModel("need delta2 >= 1 and f_max >= 1".into()));
        }
        Ok(())
    }

    /// Density bound of the uniform law.
    pub fn f_max(&self) -> f64 {
        1.0 / (self.delta2 - self.delta1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.delta1..=self.delta2)
    }
}

/// `gains[k-1][t][i]` is the gain from the i-th transmitter of `heard(k)` in use `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub gains: Vec<Vec<Vec<f64>>>,
}

impl ChannelTable {
    pub fn row(&self, k: usize, t: usize) -> &[f64] {
        &self.gains[k - 1][t]
    }
}

pub fn draw_channels<R: Rng + ?Sized>(
    model: &ChannelModel,
    t: &NetworkTopology,
    uses: usize,
    rng: &mut R,
) -> ChannelTable {
    let gains = (1..=t.users())
        .map(|k| {
            (0..uses)
                .map(|_| t.heard(k).iter().map(|_| model.sample(rng)).collect())
                .collect()
        })
        .collect();
    ChannelTable { gains }
}

/// `sum_i floor(g_i * x_i)` over one receiver's heard transmitters.
pub fn deterministic_output(g_row: &[f64], symbols: &[u64], pbar: u64) -> Result<i64, SimError> {
    if g_row.len() != symbols.len() {
        return Err(SimError::ArityMismatch(g_row.len(), symbols.len()));
    }
    let mut y = 0i64;
    for (&g, &x) in g_row.iter().zip(symbols) {
        if x > pbar {
            return Err(SimError::SymbolOutOfRange { symbol: x, pbar });
        }
        y += (g * x as f64).floor() as i64;
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMode {
    Deterministic,
    Awgn { snr_db: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pbar: u64,
    pub qc: u64,
    pub trials: usize,
    pub seed: u64,
    pub mode: SimMode,
    pub model: ChannelModel,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(pbar: u64, qc: u64, trials: usize, seed: u64) -> Self {
        SimConfig {
            pbar,
            qc,
            trials,
            seed,
            mode: SimMode::Deterministic,
            model: ChannelModel::default(),
            threads: None,
        }
    }

    pub fn private_alphabet(&self) -> u64 {
        self.pbar / 2 + 1
    }

    /// Common lattice spacing `M`.
    pub fn common_spacing(&self) -> u64 {
        self.private_alphabet() / self.qc.max(1)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.model.validate()?;
        if self.pbar < 2 {
            return Err(SimError::InvalidConfig("pbar must be at least 2".into()));
        }
        if self.qc == 0 || self.common_spacing() == 0 {
            return Err(SimError::InvalidConfig(format!(
                "common alphabet {} too large for pbar {}",
                self.qc, self.pbar
            )));
        }
        if let SimMode::Awgn { snr_db } = self.mode {
            if !snr_db.is_finite() {
                return Err(SimError::InvalidConfig("snr_db must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Common alphabet for a backoff `delta_c`: `floor(pbar^(1/3 - delta_c))`, at least 2.
pub fn common_alphabet_from_backoff(pbar: u64, delta_c: f64) -> u64 {
    // the nudge keeps exact powers such as 10^(6/6) from rounding down
    let q = ((pbar as f64).powf(1.0 / 3.0 - delta_c) + 1e-9).floor();
    (q as u64).max(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub private: u64,
    pub common: u64,
}

/// Integer symbols `x[l-1][t]`. Takes no channel input.
pub fn encode(scheme: &TransmissionScheme, messages: &[Message], spacing: u64) -> Vec<Vec<u64>> {
    messages
        .iter()
        .enumerate()
        .map(|(idx, msg)| {
            let own = scheme.user_slot[idx + 1];
            (1..=scheme.slots)
                .map(|s| {
                    let common = if scheme.common_active { msg.common * spacing } else { 0 };
                    let private = if s == own { msg.private } else { 0 };
                    common + private
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    MacAmbiguous,
    PrivateInvertFail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Per receiver: `None` on success.
    pub failures: Vec<Option<FailureCause>>,
    /// Delivered rate over `ln pbar` per channel use, averaged over receivers.
    pub rate_ratio: f64,
}

impl TrialResult {
    pub fn success(&self) -> Vec<bool> {
        self.failures.iter().map(Option::is_none).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub pbar: u64,
    pub qc: u64,
    pub trials: usize,
    pub seed: u64,
    pub scheme: String,
    pub err_rate_total: f64,
    pub err_mac: f64,
    pub err_private: f64,
    pub rate_ratio_mean: f64,
    #[serde(skip)]
    pub snr_db: Option<f64>,
}

/// Rate of a fully decoded receiver relative to `ln pbar` per channel use.
pub fn nominal_rate_ratio(scheme: &TransmissionScheme, config: &SimConfig) -> f64 {
    let mut nats = (config.private_alphabet() as f64).ln();
    if scheme.common_active {
        nats += (config.qc as f64).ln();
    }
    nats / (scheme.slots as f64 * (config.pbar as f64).ln())
}

pub fn scheme_label(scheme: &TransmissionScheme) -> &'static str {
    if scheme.common_active {
        "four_ninths"
    } else {
        "half"
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one trial or sample.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

fn draw_messages<R: Rng + ?Sized>(users: usize, qp: u64, qc: u64, rng: &mut R) -> Vec<Message> {
    (0..users)
        .map(|_| Message {
            common: rng.random_range(0..qc),
            private: rng.random_range(0..qp),
        })
        .collect()
}

/// Calls `f` on every tuple in `0..q` of the given length, in lexicographic order.
fn for_each_tuple(len: usize, q: u64, mut f: impl FnMut(&[u64])) {
    let mut tuple = vec![0u64; len];
    loop {
        f(&tuple);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < q {
                break;
            }
            tuple[i] = 0;
        }
    }
}

fn check_inputs(scheme: &TransmissionScheme, t: &NetworkTopology, config: &SimConfig) -> Result<(), SimError> {
    config.validate()?;
    if scheme.users != t.users() {
        return Err(SimError::SchemeTopologyMismatch {
            scheme: scheme.users,
            topology: t.users(),
        });
    }
    Ok(())
}

fn run_parallel<F>(config: &SimConfig, trial: F) -> Result<Vec<TrialResult>, SimError>
where
    F: Fn(u64) -> TrialResult + Sync,
{
    let work = || (0..config.trials as u64).into_par_iter().map(&trial).collect::<Vec<_>>();
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(work))
            .map_err(|e| SimError::ThreadPool(e.to_string())),
        None => Ok(work()),
    }
}

fn summarize(scheme: &TransmissionScheme, config: &SimConfig, results: &[TrialResult]) -> SimSummary {
    let decodes = (results.len() * scheme.users).max(1) as f64;
    let count = |cause: Option<FailureCause>| {
        results
            .iter()
            .flat_map(|r| &r.failures)
            .filter(|f| match cause {
                None => f.is_some(),
                Some(c) => **f == Some(c),
            })
            .count() as f64
    };
    let rate_sum: f64 = results.iter().map(|r| r.rate_ratio).sum();
    SimSummary {
        pbar: config.pbar,
        qc: config.qc,
        trials: config.trials,
        seed: config.seed,
        scheme: scheme_label(scheme).to_string(),
        err_rate_total: count(None) / decodes,
        err_mac: count(Some(FailureCause::MacAmbiguous)) / decodes,
        err_private: count(Some(FailureCause::PrivateInvertFail)) / decodes,
        rate_ratio_mean: rate_sum / results.len().max(1) as f64,
        snr_db: match config.mode {
            SimMode::Awgn { snr_db } => Some(snr_db),
            SimMode::Deterministic => None,
        },
    }
}

fn trial_result(failures: Vec<Option<FailureCause>>, nominal: f64) -> TrialResult {
    let ok = failures.iter().filter(|f| f.is_none()).count() as f64;
    let rate_ratio = nominal * ok / failures.len().max(1) as f64;
    TrialResult { failures, rate_ratio }
}

/// Decodes receiver `k` from its integer observations `y[t]`.
fn decode_deterministic(
    scheme: &TransmissionScheme,
    t: &NetworkTopology,
    k: usize,
    channels: &ChannelTable,
    y: &[i64],
    config: &SimConfig,
) -> Result<Message, FailureCause> {
    let heard: Vec<usize> = t.heard(k).iter().copied().collect();
    let own_pos = heard.iter().position(|&l| l == k).unwrap();
    let spacing = config.common_spacing();
    let mut commons = vec![0u64; heard.len()];

    if scheme.common_active {
        let f = free_slot(scheme, t, k).ok_or(FailureCause::MacAmbiguous)? - 1;
        let g = channels.row(k, f);
        let mut matches = 0usize;
        for_each_tuple(heard.len(), config.qc, |c| {
            let sum: i64 = g
                .iter()
                .zip(c)
                .map(|(&gi, &ci)| (gi * (ci * spacing) as f64).floor() as i64)
                .sum();
            if sum == y[f] {
                matches += 1;
                if matches == 1 {
                    commons.copy_from_slice(c);
                }
            }
        });
        if matches != 1 {
            return Err(FailureCause::MacAmbiguous);
        }
    }

    let s = scheme.user_slot[k] - 1;
    let g = channels.row(k, s);
    let mut residual = y[s];
    for (i, &l) in heard.iter().enumerate() {
        if l != k && scheme.common_active {
            residual -= (g[i] * (commons[i] * spacing) as f64).floor() as i64;
        }
    }
    let base = commons[own_pos] * spacing;
    let gk = g[own_pos];
    let value = |p: u64| (gk * (p + base) as f64).floor() as i64;
    // strictly increasing in p because gk >= 1
    let qp = config.private_alphabet();
    let (mut lo, mut hi) = (0u64, qp);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if value(mid) < residual {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if lo < qp && value(lo) == residual {
        Ok(Message {
            private: lo,
            common: commons[own_pos],
        })
    } else {
        Err(FailureCause::PrivateInvertFail)
    }
}

fn deterministic_trial(scheme: &TransmissionScheme, t: &NetworkTopology, config: &SimConfig, index: u64) -> TrialResult {
    let mut rng = substream(config.seed, index);
    let qc = if scheme.common_active { config.qc } else { 1 };
    let messages = draw_messages(t.users(), config.private_alphabet(), qc, &mut rng);
    let x = encode(scheme, &messages, config.common_spacing());
    let channels = draw_channels(&config.model, t, scheme.slots, &mut rng);

    let failures = (1..=t.users())
        .map(|k| {
            let y: Vec<i64> = (0..scheme.slots)
                .map(|s| {
                    let symbols: Vec<u64> = t.heard(k).iter().map(|&l| x[l - 1][s]).collect();
                    deterministic_output(channels.row(k, s), &symbols, config.pbar)
                        .expect("encoder stays within the alphabet")
                })
                .collect();
            match decode_deterministic(scheme, t, k, &channels, &y, config) {
                Ok(m) if m == messages[k - 1] => None,
                Ok(_) => Some(FailureCause::PrivateInvertFail),
                Err(cause) => Some(cause),
            }
        })
        .collect();
    trial_result(failures, nominal_rate_ratio(scheme, config))
}

pub fn run_deterministic_trials(
    scheme: &TransmissionScheme,
    t: &NetworkTopology,
    config: &SimConfig,
) -> Result<SimSummary, SimError> {
    check_inputs(scheme, t, config)?;
    let results = run_parallel(config, |i| deterministic_trial(scheme, t, config, i))?;
    Ok(summarize(scheme, config, &results))
}

/// Zero-mean PAM point `i` of a `q`-ary constellation with the given power.
fn pam(i: u64, q: u64, power: f64) -> f64 {
    if q <= 1 {
        return 0.0;
    }
    let step = (3.0 * power / ((q * q - 1) as f64)).sqrt();
    (2.0 * i as f64 - (q - 1) as f64) * step
}

fn nearest_pam(v: f64, q: u64, power: f64) -> u64 {
    if q <= 1 {
        return 0;
    }
    let step = (3.0 * power / ((q * q - 1) as f64)).sqrt();
    let idx = ((v / step + (q - 1) as f64) / 2.0).round();
    idx.clamp(0.0, (q - 1) as f64) as u64
}

fn awgn_trial(scheme: &TransmissionScheme, t: &NetworkTopology, config: &SimConfig, snr_db: f64, index: u64) -> TrialResult {
    let mut rng = substream(config.seed, index);
    let qp = config.private_alphabet();
    let qc = if scheme.common_active { config.qc } else { 1 };
    let messages = draw_messages(t.users(), qp, qc, &mut rng);
    let channels = draw_channels(&config.model, t, scheme.slots, &mut rng);
    let amp = 10f64.powf(snr_db / 20.0);
    let (pp, pc) = (scheme.private_power, scheme.common_power);

    let tx: Vec<Vec<f64>> = messages
        .iter()
        .enumerate()
        .map(|(idx, msg)| {
            (1..=scheme.slots)
                .map(|s| {
                    let c = if scheme.common_active { pam(msg.common, qc, pc) } else { 0.0 };
                    let p = if s == scheme.user_slot[idx + 1] { pam(msg.private, qp, pp) } else { 0.0 };
                    c + p
                })
                .collect()
        })
        .collect();

    let failures = (1..=t.users())
        .map(|k| {
            let heard: Vec<usize> = t.heard(k).iter().copied().collect();
            let y: Vec<f64> = (0..scheme.slots)
                .map(|s| {
                    let g = channels.row(k, s);
                    let clean: f64 = heard.iter().zip(g).map(|(&l, &gi)| gi * tx[l - 1][s]).sum();
                    let z: f64 = StandardNormal.sample(&mut rng);
                    amp * clean + z
                })
                .collect();
            let own_pos = heard.iter().position(|&l| l == k).unwrap();
            let mut commons = vec![0u64; heard.len()];
            if scheme.common_active {
                let Some(f) = free_slot(scheme, t, k) else {
                    return Some(FailureCause::MacAmbiguous);
                };
                let g = channels.row(k, f - 1);
                let mut best = f64::INFINITY;
                for_each_tuple(heard.len(), qc, |c| {
                    let v: f64 = g.iter().zip(c).map(|(&gi, &ci)| gi * pam(ci, qc, pc)).sum();
                    let d = (y[f - 1] - amp * v).abs();
                    if d < best {
                        best = d;
                        commons.copy_from_slice(c);
                    }
                });
            }
            let s = scheme.user_slot[k] - 1;
            let g = channels.row(k, s);
            let mut r = y[s];
            if scheme.common_active {
                for (i, &gi) in g.iter().enumerate() {
                    r -= amp * gi * pam(commons[i], qc, pc);
                }
            }
            let p_hat = nearest_pam(r / (amp * g[own_pos]), qp, pp);
            let commons_ok = heard
                .iter()
                .zip(&commons)
                .all(|(&l, &c)| c == messages[l - 1].common || !scheme.common_active);
            if !commons_ok {
                Some(FailureCause::MacAmbiguous)
            } else if p_hat != messages[k - 1].private {
                Some(FailureCause::PrivateInvertFail)
            } else {
                None
            }
        })
        .collect();
    trial_result(failures, nominal_rate_ratio(scheme, config))
}

/// Symbol-error summary for the Gaussian channel at `config.mode`'s SNR.
pub fn run_awgn_trials(
    scheme: &TransmissionScheme,
    t: &NetworkTopology,
    config: &SimConfig,
) -> Result<SimSummary, SimError> {
    check_inputs(scheme, t, config)?;
    let SimMode::Awgn { snr_db } = config.mode else {
        return Err(SimError::InvalidConfig("AWGN trials need an SNR".into()));
    };
    let results = run_parallel(config, |i| awgn_trial(scheme, t, config, snr_db, i))?;
    Ok(summarize(scheme, config, &results))
}

/// Dispatches on `config.mode`.
pub fn run_trials(scheme: &TransmissionScheme, t: &NetworkTopology, config: &SimConfig) -> Result<SimSummary, SimError> {
    match config.mode {
        SimMode::Deterministic => run_deterministic_trials(scheme, t, config),
        SimMode::Awgn { .. } => run_awgn_trials(scheme, t, config),
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "pbar",
    "qc",
    "trials",
    "seed",
    "scheme",
    "err_rate_total",
    "err_mac",
    "err_private",
    "rate_ratio_mean",
];

/// Writes the header and one row per summary.
pub fn write_csv<W: std::io::Write>(out: W, rows: &[SimSummary]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}
