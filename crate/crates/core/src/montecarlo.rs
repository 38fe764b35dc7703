//! Event-by-event simulation of explicit local hidden-variable models.
//!
//! Each pair draws its hidden variables once, at production: which of the
//! four production rows it is in, one uniform threshold per kaon and one
//! decay time per kaon. A kaon's strangeness at τ is then a function of its
//! own hidden variables and τ only, so locality holds by construction.
//!
//! Worldline law: a kaon keeps its initial strangeness at τ iff its
//! threshold `u` lies below Q₊(τ), and shows the opposite strangeness
//! otherwise. Jumps happen exactly where the Q₊ curve crosses `u`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_time, Error, Result};
use crate::local_realism::{
    initial_pair_assignments, q_unchecked, InitialPairAssignment, QSign, RealisticKaonState,
};
use crate::params::ParameterSet;
use crate::qm::Strangeness;

/// How the two kaons' worldline thresholds are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HvModel {
    /// u_right = u_left
    ThresholdMax,
    /// u_right = 1 − u_left
    ThresholdMin,
    /// u_left, u_right independent
    IndependentJumps,
}

impl HvModel {
    pub const ALL: [HvModel; 3] = [
        HvModel::ThresholdMax,
        HvModel::ThresholdMin,
        HvModel::IndependentJumps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HvModel::ThresholdMax => "threshold-max",
            HvModel::ThresholdMin => "threshold-min",
            HvModel::IndependentJumps => "independent-jumps",
        }
    }
}

impl fmt::Display for HvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HvModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        HvModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!("unknown model `{s}` (expected threshold-max, threshold-min or independent-jumps)")
            })
    }
}

/// Everything one kaon knows about itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaonHiddenState {
    pub initial: RealisticKaonState,
    pub u: f64,
    pub t_decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVariables {
    /// Production row, 0..4.
    pub row: usize,
    pub assignment: InitialPairAssignment,
    pub u_left: f64,
    pub u_right: f64,
    pub t_decay_left: f64,
    pub t_decay_right: f64,
}

impl HiddenVariables {
    pub fn left(&self) -> KaonHiddenState {
        KaonHiddenState {
            initial: self.assignment.left,
            u: self.u_left,
            t_decay: self.t_decay_left,
        }
    }

    pub fn right(&self) -> KaonHiddenState {
        KaonHiddenState {
            initial: self.assignment.right,
            u: self.u_right,
            t_decay: self.t_decay_right,
        }
    }
}

/// Result of a strangeness measurement on one kaon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Kaon,
    AntiKaon,
    Decayed,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Kaon, Outcome::AntiKaon, Outcome::Decayed];
    pub const LABELS: [&'static str; 3] = ["S=+1", "S=-1", "decayed"];

    pub fn index(self) -> usize {
        match self {
            Outcome::Kaon => 0,
            Outcome::AntiKaon => 1,
            Outcome::Decayed => 2,
        }
    }

    fn from_strangeness(s: Strangeness) -> Self {
        match s {
            Strangeness::Kaon => Outcome::Kaon,
            Strangeness::AntiKaon => Outcome::AntiKaon,
        }
    }
}

/// Per-run decay samplers, built once from the widths.
#[derive(Debug, Clone, Copy)]
struct DecayLaw {
    short: Exp<f64>,
    long: Exp<f64>,
}

impl DecayLaw {
    fn new(p: &ParameterSet) -> Self {
        // Exp::new only rejects negative or NaN rates, which validated or
        // stable-limit parameters never carry.
        DecayLaw {
            short: Exp::new(p.gamma_s).expect("gamma_s is a valid rate"),
            long: Exp::new(p.gamma_l).expect("gamma_l is a valid rate"),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, state: RealisticKaonState, rng: &mut R) -> f64 {
        match state.cp() {
            crate::qm::CpEigenvalue::Short => self.short.sample(rng),
            crate::qm::CpEigenvalue::Long => self.long.sample(rng),
        }
    }
}

fn draw<R: Rng + ?Sized>(model: HvModel, law: &DecayLaw, rng: &mut R) -> HiddenVariables {
    let row = rng.random_range(0..4usize);
    let assignment = initial_pair_assignments()[row];
    let u_left: f64 = rng.random();
    let u_right = match model {
        HvModel::ThresholdMax => u_left,
        HvModel::ThresholdMin => 1.0 - u_left,
        HvModel::IndependentJumps => rng.random(),
    };
    let t_decay_left = law.sample(assignment.left, rng);
    let t_decay_right = law.sample(assignment.right, rng);
    HiddenVariables {
        row,
        assignment,
        u_left,
        u_right,
        t_decay_left,
        t_decay_right,
    }
}

/// Draws the hidden variables of one pair.
pub fn sample_pair<R: Rng + ?Sized>(
    model: HvModel,
    p: &ParameterSet,
    rng: &mut R,
) -> HiddenVariables {
    draw(model, &DecayLaw::new(p), rng)
}

fn outcome_given_q(side: &KaonHiddenState, q_plus: f64, tau: f64) -> Outcome {
    if tau >= side.t_decay {
        return Outcome::Decayed;
    }
    let s0 = side
        .initial
        .strangeness()
        .expect("pairs are produced as kaons");
    let s = if side.u < q_plus { s0 } else { s0.flipped() };
    Outcome::from_strangeness(s)
}

/// Strangeness of one kaon at `tau`, from its own hidden variables only.
pub fn strangeness_at(side: &KaonHiddenState, p: &ParameterSet, tau: f64) -> Result<Outcome> {
    let tau = check_time("tau", tau)?;
    side.initial.measure_strangeness()?;
    Ok(outcome_given_q(side, q_unchecked(p, QSign::Plus, tau), tau))
}

pub type TallyGrid = [[u64; 3]; 3];

/// Events per RNG substream. Substreams are keyed by chunk index, so the
/// tallies do not depend on how chunks are spread over threads.
pub const EVENTS_PER_CHUNK: u64 = 1 << 14;

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Tallies `n_events` pairs measured at (`tau_left`, `tau_right`). `setting`
/// selects an independent family of substreams for the same seed.
pub(crate) fn tally_pairs(
    model: HvModel,
    p: &ParameterSet,
    tau_left: f64,
    tau_right: f64,
    n_events: u64,
    seed: u64,
    setting: u16,
) -> TallyGrid {
    let law = DecayLaw::new(p);
    let q_left = q_unchecked(p, QSign::Plus, tau_left);
    let q_right = q_unchecked(p, QSign::Plus, tau_right);
    let n_chunks = n_events.div_ceil(EVENTS_PER_CHUNK);

    let run_chunk = |chunk: u64| -> TallyGrid {
        let mut rng = chunk_rng(seed, ((setting as u64) << 48) | chunk);
        let start = chunk * EVENTS_PER_CHUNK;
        let len = EVENTS_PER_CHUNK.min(n_events - start);
        let mut grid = [[0u64; 3]; 3];
        for _ in 0..len {
            let hv = draw(model, &law, &mut rng);
            let l = outcome_given_q(&hv.left(), q_left, tau_left);
            let r = outcome_given_q(&hv.right(), q_right, tau_right);
            grid[l.index()][r.index()] += 1;
        }
        grid
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_chunks)
            .into_par_iter()
            .map(run_chunk)
            .reduce(|| [[0; 3]; 3], merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_chunks).map(run_chunk).fold([[0; 3]; 3], merge)
    }
}

fn merge(mut a: TallyGrid, b: TallyGrid) -> TallyGrid {
    for (ra, rb) in a.iter_mut().zip(b.iter()) {
        for (x, y) in ra.iter_mut().zip(rb.iter()) {
            *x += y;
        }
    }
    a
}

/// Joint outcome counts for one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub model: HvModel,
    pub params: ParameterSet,
    pub tau1: f64,
    pub tau2: f64,
    pub seed: u64,
    pub n_events: u64,
    /// `tallies[left][right]`, indexed by [`Outcome::index`].
    pub tallies: TallyGrid,
}

impl Serialize for CountsTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Axes {
            rows: &'static str,
            columns: &'static str,
            labels: [&'static str; 3],
        }
        let mut st = serializer.serialize_struct("CountsTable", 8)?;
        st.serialize_field("model", &self.model)?;
        st.serialize_field("params", &self.params)?;
        st.serialize_field("tau1", &self.tau1)?;
        st.serialize_field("tau2", &self.tau2)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("n_events", &self.n_events)?;
        st.serialize_field(
            "axes",
            &Axes {
                rows: "left kaon at tau1",
                columns: "right kaon at tau2",
                labels: Outcome::LABELS,
            },
        )?;
        st.serialize_field("tallies", &self.tallies)?;
        st.end()
    }
}

impl CountsTable {
    pub fn count(&self, left: Outcome, right: Outcome) -> u64 {
        self.tallies[left.index()][right.index()]
    }

    pub fn total(&self) -> u64 {
        self.tallies.iter().flatten().sum()
    }

    /// Events with both kaons undecayed.
    pub fn undecayed_pairs(&self) -> u64 {
        self.tallies[..2].iter().map(|row| row[0] + row[1]).sum()
    }

    pub fn like_strangeness(&self) -> u64 {
        self.tallies[0][0] + self.tallies[1][1]
    }

    pub fn unlike_strangeness(&self) -> u64 {
        self.tallies[0][1] + self.tallies[1][0]
    }

    /// Fraction of events with both kaons undecayed.
    pub fn undecayed_fraction(&self) -> EstimateWithError {
        EstimateWithError::binomial(self.undecayed_pairs(), self.n_events)
    }

    /// Frequency of `left`/`right` among undecayed pairs.
    pub fn renormalized(&self, left: Strangeness, right: Strangeness) -> Result<EstimateWithError> {
        let n = self.undecayed_pairs();
        if n == 0 {
            return Err(Error::NoUndecayedPairs);
        }
        let k = self.count(
            Outcome::from_strangeness(left),
            Outcome::from_strangeness(right),
        );
        Ok(EstimateWithError::binomial(k, n))
    }

    /// Frequency of strangeness `s` among undecayed left kaons.
    pub fn left_marginal(&self, s: Strangeness) -> Result<EstimateWithError> {
        let undecayed: u64 = self.tallies[..2].iter().flatten().sum();
        if undecayed == 0 {
            return Err(Error::NoUndecayedPairs);
        }
        let k: u64 = self.tallies[Outcome::from_strangeness(s).index()]
            .iter()
            .sum();
        Ok(EstimateWithError::binomial(k, undecayed))
    }

    /// Frequency of strangeness `s` among undecayed right kaons.
    pub fn right_marginal(&self, s: Strangeness) -> Result<EstimateWithError> {
        let undecayed: u64 = self.tallies.iter().map(|row| row[0] + row[1]).sum();
        if undecayed == 0 {
            return Err(Error::NoUndecayedPairs);
        }
        let col = Outcome::from_strangeness(s).index();
        let k: u64 = self.tallies.iter().map(|row| row[col]).sum();
        Ok(EstimateWithError::binomial(k, undecayed))
    }
}

/// Simulates `n_events` pairs measured on the left at `tau1` and on the
/// right at `tau2`.
///
/// The result depends only on the arguments, never on the number of worker
/// threads.
pub fn run_experiment(
    model: HvModel,
    p: &ParameterSet,
    tau1: f64,
    tau2: f64,
    n_events: u64,
    seed: u64,
) -> Result<CountsTable> {
    let tau1 = check_time("tau1", tau1)?;
    let tau2 = check_time("tau2", tau2)?;
    if tau1 > tau2 {
        return Err(Error::Ordering { tau1, tau2 });
    }
    if n_events == 0 {
        return Err(Error::NoEvents);
    }
    let tallies = tally_pairs(model, p, tau1, tau2, n_events, seed, 0);
    Ok(CountsTable {
        model,
        params: *p,
        tau1,
        tau2,
        seed,
        n_events,
        tallies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    /// Frequency k/n with its binomial standard error.
    pub fn binomial(k: u64, n: u64) -> Self {
        if n == 0 {
            return EstimateWithError {
                value: f64::NAN,
                sigma: f64::NAN,
            };
        }
        let n = n as f64;
        let f = k as f64 / n;
        EstimateWithError {
            value: f,
            sigma: (f * (1.0 - f) / n).sqrt(),
        }
    }

    /// A zero error bar from a frequency pinned at 0 or 1.
    pub fn is_degenerate(&self) -> bool {
        self.sigma == 0.0
    }

    /// |value − target| ≤ k·sigma.
    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.sigma
    }
}

/// (unlike − like)/(unlike + like) over undecayed pairs, with the binomial
/// error of the like-strangeness fraction propagated through A = 1 − 2f.
pub fn estimate_asymmetry(c: &CountsTable) -> Result<EstimateWithError> {
    let n = c.undecayed_pairs();
    if n == 0 {
        return Err(Error::NoUndecayedPairs);
    }
    let like = EstimateWithError::binomial(c.like_strangeness(), n);
    Ok(EstimateWithError {
        value: 1.0 - 2.0 * like.value,
        sigma: 2.0 * like.sigma,
    })
}
