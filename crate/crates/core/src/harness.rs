//! Sampled end-to-end check of the three-way equivalence for a pair of
//! algebras: every state on `A ⊗ B` is decomposable, every state satisfies the
//! CHSH bound, and `A` or `B` is commutative.
//!
//! Random pure and Hilbert–Schmidt mixed states are drawn from per-sample
//! ChaCha streams of the caller's seed. When both factors are noncommutative
//! the singlet and a few Werner states are embedded into a `2×2` tensor block
//! and added to the sample set, so the existence side is decided by explicit
//! witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::FdAlgebra;
use crate::bell::{self, ChshObservables};
use crate::entanglement::{self, SeparabilityVerdict};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::states::{self, State};

pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_DIM_CAP: usize = 64;
pub const DEFAULT_BUDGET: usize = 200;
/// Slack on the CHSH bound for optimized values.
pub const CHSH_SLACK: f64 = 1e-6;
/// Slack on the CHSH bound for directly evaluated observable tuples.
pub const EVAL_SLACK: f64 = 1e-9;
/// Trace distance accepted for a conditioning decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Werner parameters injected as witnesses.
pub const WERNER_WITNESSES: [f64; 3] = [0.25, 0.5, 0.6];

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub dim_cap: usize,
    pub budget: usize,
    pub restarts: usize,
    /// Worker threads for per-sample work; 1 runs inline.
    pub threads: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            dim_cap: DEFAULT_DIM_CAP,
            budget: DEFAULT_BUDGET,
            restarts: bell::DEFAULT_RESTARTS,
            threads: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConsistentWithTheorem,
    InconsistentWithTheorem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub shorthand: String,
    pub block_dims: Vec<usize>,
}

impl From<&FdAlgebra> for AlgebraDescriptor {
    fn from(a: &FdAlgebra) -> Self {
        Self {
            shorthand: a.to_string(),
            block_dims: a.block_dims().to_vec(),
        }
    }
}

/// A sample, identified by its position in the sample list and a label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub label: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub separable: usize,
    pub entangled_pure: usize,
    pub entangled_ppt: usize,
    pub undetermined: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaggioReport {
    pub schema: u32,
    pub algebra_a: AlgebraDescriptor,
    pub algebra_b: AlgebraDescriptor,
    pub a_commutative: bool,
    pub b_commutative: bool,
    /// Random samples drawn (injected witnesses not included).
    pub samples: usize,
    pub injected: usize,
    pub ensemble: String,
    pub entangled_found: bool,
    pub entangled_witness: Option<Witness>,
    pub max_chsh: f64,
    pub max_chsh_witness: Witness,
    /// With a commutative factor: fraction of states whose conditioning
    /// decomposition reconstructs within tolerance. Otherwise: fraction of
    /// states with a `Separable` verdict.
    pub decomposition_success_rate: f64,
    pub verdict_counts: VerdictCounts,
    pub verdict: Verdict,
    pub seed: u64,
}

impl RaggioReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::ConsistentWithTheorem
    }
}

struct Sample {
    label: String,
    state: State,
}

struct Outcome {
    verdict: SeparabilityVerdict,
    chsh: f64,
    decomposed: Option<bool>,
}

/// SplitMix64 finalizer, for deriving per-sample seeds.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_dims(a: &FdAlgebra, b: &FdAlgebra, cap: usize) -> Result<FdAlgebra> {
    let dim = a.total_dim() * b.total_dim();
    if dim > cap {
        return Err(Error::ResourceLimit { dim, cap });
    }
    Ok(FdAlgebra::tensor(a, b))
}

/// Embeds a two-qubit density matrix into the first tensor block `(i, j)`
/// with `n_i, m_j ≥ 2`, using the first two basis vectors on each side.
pub fn embed_two_qubit(rho: &CMat, a: &FdAlgebra, b: &FdAlgebra) -> Option<State> {
    let i = a.block_dims().iter().position(|&n| n >= 2)?;
    let j = b.block_dims().iter().position(|&m| m >= 2)?;
    let owner = FdAlgebra::tensor(a, b);
    let (n, m) = (a.block_dims()[i], b.block_dims()[j]);
    let target = i * b.num_blocks() + j;
    let blocks = owner
        .block_dims()
        .iter()
        .enumerate()
        .map(|(k, &dim)| {
            let mut blk = CMat::zeros(dim, dim);
            if k == target {
                for r in 0..4 {
                    for c in 0..4 {
                        blk[((r / 2) * m + r % 2, (c / 2) * m + c % 2)] = rho[(r, c)];
                    }
                }
            }
            blk
        })
        .collect();
    debug_assert_eq!(n * m, owner.block_dims()[target]);
    State::new(&owner, blocks).ok()
}

fn witnesses(a: &FdAlgebra, b: &FdAlgebra) -> Vec<Sample> {
    if a.is_commutative() || b.is_commutative() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let singlet = states::singlet().to_state();
    if let Some(state) = embed_two_qubit(&singlet.blocks()[0], a, b) {
        out.push(Sample {
            label: "singlet".into(),
            state,
        });
    }
    for p in WERNER_WITNESSES {
        let w = states::werner(p).expect("p in range");
        if let Some(state) = embed_two_qubit(&w.blocks()[0], a, b) {
            out.push(Sample {
                label: format!("werner({p})"),
                state,
            });
        }
    }
    out
}

fn random_samples(owner: &FdAlgebra, samples: usize, seed: u64) -> Vec<Sample> {
    (0..samples)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            if k % 2 == 0 {
                Sample {
                    label: format!("random-pure#{k}"),
                    state: State::random_pure(owner, &mut rng),
                }
            } else {
                Sample {
                    label: format!("random-mixed#{k}"),
                    state: State::random_mixed(owner, &mut rng),
                }
            }
        })
        .collect()
}

fn run_indexed<T: Send, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    if threads <= 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

/// Samples states on `a ⊗ b` and checks that separability, the CHSH bound and
/// commutativity of a factor agree. Deterministic given the seed.
pub fn verify_equivalence(
    a: &FdAlgebra,
    b: &FdAlgebra,
    samples: usize,
    seed: u64,
    config: &HarnessConfig,
) -> Result<RaggioReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let owner = check_dims(a, b, config.dim_cap)?;
    let classical_side = a.is_commutative() || b.is_commutative();

    let mut all = random_samples(&owner, samples, seed);
    let injected = witnesses(a, b);
    let injected_count = injected.len();
    all.extend(injected);

    let outcomes: Vec<Result<Outcome>> = run_indexed(all.len(), config.threads, |k| {
        let state = &all[k].state;
        let mut rng = stream_rng(mix(seed, 0x5e9a), k as u64);
        let verdict = entanglement::separability_test(state, config.budget, &mut rng)?;
        let chsh = bell::chsh_optimize(state, config.restarts, mix(seed, k as u64))?.value;
        let decomposed = if classical_side {
            let d = entanglement::classical_decompose(state)?;
            Some(d.reconstruct().trace_distance(state)? <= RECONSTRUCTION_TOL)
        } else {
            None
        };
        Ok(Outcome {
            verdict,
            chsh,
            decomposed,
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut counts = VerdictCounts::default();
    let mut entangled_witness = None;
    let mut max_chsh = f64::NEG_INFINITY;
    let mut max_idx = 0;
    let mut successes = 0usize;
    for (k, out) in outcomes.iter().enumerate() {
        match &out.verdict {
            SeparabilityVerdict::Separable(_) => counts.separable += 1,
            SeparabilityVerdict::EntangledPure { .. } => counts.entangled_pure += 1,
            SeparabilityVerdict::EntangledPpt { .. } => counts.entangled_ppt += 1,
            SeparabilityVerdict::Undetermined { .. } => counts.undetermined += 1,
        }
        if out.verdict.is_entangled() && entangled_witness.is_none() {
            entangled_witness = Some(Witness {
                index: k,
                label: all[k].label.clone(),
            });
        }
        if out.chsh > max_chsh {
            max_chsh = out.chsh;
            max_idx = k;
        }
        let ok = match out.decomposed {
            Some(ok) => ok,
            None => matches!(out.verdict, SeparabilityVerdict::Separable(_)),
        };
        if ok {
            successes += 1;
        }
    }
    let rate = successes as f64 / outcomes.len() as f64;
    let entangled_found = entangled_witness.is_some();
    let consistent = if classical_side {
        !entangled_found && max_chsh <= 2.0 + CHSH_SLACK && successes == outcomes.len()
    } else {
        entangled_found && max_chsh > 2.0 + CHSH_SLACK
    };

    Ok(RaggioReport {
        schema: REPORT_SCHEMA,
        algebra_a: a.into(),
        algebra_b: b.into(),
        a_commutative: a.is_commutative(),
        b_commutative: b.is_commutative(),
        samples,
        injected: injected_count,
        ensemble: "alternating Gaussian vector states and Hilbert-Schmidt mixed states; \
                   singlet and Werner witnesses when both factors are noncommutative"
            .into(),
        entangled_found,
        entangled_witness,
        max_chsh,
        max_chsh_witness: Witness {
            index: max_idx,
            label: all[max_idx].label.clone(),
        },
        decomposition_success_rate: rate,
        verdict_counts: counts,
        verdict: if consistent {
            Verdict::ConsistentWithTheorem
        } else {
            Verdict::InconsistentWithTheorem
        },
        seed,
    })
}

/// Details of [`bell_one_side_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneSideScan {
    pub holds: bool,
    pub max_abs_chsh: f64,
    pub states: usize,
    pub tuples_per_state: usize,
    pub violation: Option<Witness>,
}

/// Evaluates `|CHSH| ≤ 2` on sampled states of `a ⊗ b`, each against
/// `tuples` random observable tuples plus the see-saw optimum.
pub fn bell_one_side_scan(
    a: &FdAlgebra,
    b: &FdAlgebra,
    samples: usize,
    tuples: usize,
    seed: u64,
    config: &HarnessConfig,
) -> Result<OneSideScan> {
    if samples == 0 || tuples == 0 {
        return Err(Error::Precondition(
            "at least one state and one observable tuple are required".into(),
        ));
    }
    let owner = check_dims(a, b, config.dim_cap)?;
    let mut all = random_samples(&owner, samples, seed);
    all.extend(witnesses(a, b));

    let per_state: Vec<Result<f64>> = run_indexed(all.len(), config.threads, |k| {
        let state = &all[k].state;
        let mut rng = stream_rng(mix(seed, 0x0b5e), k as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..tuples {
            let obs = ChshObservables::random(a, b, &mut rng);
            worst = worst.max(bell::chsh_value(state, &obs)?.abs());
        }
        let opt = bell::chsh_optimize(state, config.restarts, mix(seed, k as u64))?;
        Ok(worst.max(opt.value))
    });
    let per_state = per_state.into_iter().collect::<Result<Vec<_>>>()?;
    let mut max_abs = 0.0;
    let mut violation = None;
    for (k, &v) in per_state.iter().enumerate() {
        if v > max_abs {
            max_abs = v;
        }
        if v > 2.0 + EVAL_SLACK && violation.is_none() {
            violation = Some(Witness {
                index: k,
                label: all[k].label.clone(),
            });
        }
    }
    Ok(OneSideScan {
        holds: violation.is_none(),
        max_abs_chsh: max_abs,
        states: all.len(),
        tuples_per_state: tuples + 1,
        violation,
    })
}

/// Whether every sampled state and observable tuple satisfies the CHSH bound.
pub fn bell_one_side_classical(
    a: &FdAlgebra,
    b: &FdAlgebra,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let config = HarnessConfig {
        restarts: 4,
        ..HarnessConfig::default()
    };
    Ok(bell_one_side_scan(a, b, samples, 50, seed, &config)?.holds)
}
