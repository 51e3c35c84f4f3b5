//! Executable density-increment and frequency blow-up machinery.
//!
//! The outer loop watches the L² mass of a difference-free set's transform on
//! arcs of small denominator. Concentration at one denominator buys a denser
//! sub-progression (and swaps the working polynomial for the matching
//! auxiliary); spread-out mass terminates the loop with a set whose spectrum
//! is usable by the inner blow-up, which grows a one-per-arc family of large
//! Fourier coefficients through the combinatorics of reduced fraction sums.
//!
//! Asymptotic thresholds are vacuous at desk scale, so every one of them is a
//! configurable knob with the formula value as the default; assertions here
//! check structural invariants, never asymptotic claims.

use crate::arith::{f64_to_fraction, max_divisor_count, ArithError, ReducedFraction};
use crate::fourier::{
    arc_memberships, classify_arc_fast, max_mass_denominator, ArcClass, ArcParams,
    FourierError, Spectrum,
};
use crate::numeric::pairwise_sum_complex;
use crate::poly::{
    auxiliary_poly, factor_over_rationals, is_intersective, PolyError, QuadraticPoly,
    RationalRootForm,
};
use crate::sets::{is_difference_free, IntegerSet, SetError, Violation};
use crate::weyl::{make_context, weyl_spectrum, WeylError};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IterateError {
    #[error("offset {offset} + step {step} × length {length} exceeds ambient {ambient}")]
    RangeError {
        offset: u64,
        step: u64,
        length: u64,
        ambient: u64,
    },
    #[error("set is not difference-free for {poly}: {violation:?}")]
    NotDifferenceFree {
        poly: QuadraticPoly,
        violation: Violation,
    },
    #[error("polynomial is not intersective")]
    NotIntersective,
    #[error("no arc carries usable paired mass; instance is outside the concentrated regime")]
    EmptyMajorMass,
    #[error("no frequencies to blow up")]
    DegenerateTriple,
    #[error("frequency set violates its invariants: {0}")]
    InvalidFrequencySet(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, IterateError>;

/// Tunable constants of both iterations. Formula-valued fields default to the
/// asymptotic expressions (evaluated at the instance size) when `None`.
#[derive(Debug, Clone, Serialize)]
pub struct IterationParams {
    /// The fixed ε; requires `0 < ε < 1/11` so that `ρ = (1−11ε)/log 3 > 0`.
    pub epsilon: f64,
    /// Denominator/width threshold Q for the outer iteration's arcs.
    pub q_threshold: f64,
    pub rho: f64,
    /// η = c0·σ/U in the inner iteration.
    pub c0: f64,
    /// Small-transform cutoff factor in the X/Y split.
    pub c1: f64,
    /// Required density growth factor per accepted step;
    /// default `1 + (log N)^(−1+ε)/8`.
    pub increment_gain: Option<f64>,
    /// Constant in the shortest admissible projection length `c·σ·L/Q⁴`.
    pub c_increment: f64,
    /// Mass-concentration threshold as a multiple of σ²;
    /// default `(log N)^(−1+ε)`.
    pub mass_threshold_factor: Option<f64>,
    /// Shortest interval the outer loop keeps iterating on; default `Q⁴`.
    pub min_length: Option<u64>,
    /// Verify difference-freeness as a precondition and after every step.
    pub check_difference_free: bool,
}

impl IterationParams {
    pub fn new(epsilon: f64, q_threshold: f64) -> Result<IterationParams> {
        let p = IterationParams {
            epsilon,
            q_threshold,
            rho: (1.0 - 11.0 * epsilon) / 3f64.ln(),
            c0: 0.05,
            c1: 1e-5,
            increment_gain: None,
            c_increment: 1.0,
            mass_threshold_factor: None,
            min_length: None,
            check_difference_free: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 11.0) {
            return Err(IterateError::BadParams("epsilon must lie in (0, 1/11)".into()));
        }
        if self.q_threshold < 1.0 || !self.q_threshold.is_finite() {
            return Err(IterateError::BadParams("q_threshold must be >= 1".into()));
        }
        if self.c0 <= 0.0 || self.c1 <= 0.0 || self.c_increment <= 0.0 {
            return Err(IterateError::BadParams("c0, c1, c_increment must be positive".into()));
        }
        if self.c0 > 1.0 {
            // Keeps η ≤ σ/U, so arc widths stay at least one frequency wide.
            return Err(IterateError::BadParams("c0 must be at most 1".into()));
        }
        Ok(())
    }

    pub fn increment_gain_for(&self, n0: u64) -> f64 {
        self.increment_gain
            .unwrap_or_else(|| 1.0 + (n0 as f64).ln().powf(-1.0 + self.epsilon) / 8.0)
    }

    pub fn mass_factor_for(&self, n0: u64) -> f64 {
        self.mass_threshold_factor
            .unwrap_or_else(|| (n0 as f64).ln().powf(-1.0 + self.epsilon))
    }

    pub fn min_length_value(&self) -> u64 {
        self.min_length
            .unwrap_or_else(|| self.q_threshold.powi(4).min(u64::MAX as f64) as u64)
    }
}

/// Pulls back `B ⊆ [1, L]` along the progression `{offset + m·step}`:
/// `B' = {m ∈ [1, length] : offset + m·step ∈ B} ⊆ [1, length]`.
pub fn project_to_progression(
    b: &IntegerSet,
    offset: u64,
    step: u64,
    length: u64,
) -> Result<IntegerSet> {
    assert!(step >= 1 && length >= 1);
    let ambient = b.ambient();
    if offset + step * length > ambient {
        return Err(IterateError::RangeError {
            offset,
            step,
            length,
            ambient,
        });
    }
    let elements = (1..=length)
        .filter(|m| b.contains(offset + m * step))
        .collect();
    Ok(IntegerSet::new(length, elements)?)
}

/// The projection step that preserves difference-freeness when the transform
/// concentrates at denominator `q`: `q` itself in the two-branch case (where
/// `f_d(q·n + e) = q·f_{qd}(n)` for the coherent offset `e`), `q²` for a
/// double root (where the auxiliary family is constant and only square
/// dilations re-enter the image).
pub fn projection_step(f: &QuadraticPoly, q: u64) -> Result<u64> {
    match factor_over_rationals(f)? {
        RationalRootForm::DoubleRoot { .. } => Ok(q * q),
        _ => Ok(q),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Increment {
    pub offset: u64,
    pub length: u64,
    pub count: u64,
    pub density: f64,
}

/// Scans every offset and a geometric ladder of window lengths for a
/// projection along step `step` whose density beats `σ · gain`. Exact counts;
/// ties prefer higher density, then smaller offset, then longer windows.
pub fn find_density_increment(
    b: &IntegerSet,
    step: u64,
    params: &IterationParams,
    n0: u64,
) -> Option<Increment> {
    let l = b.ambient();
    let sigma = b.density();
    let gain = params.increment_gain_for(n0);
    let q4 = params.q_threshold.powi(4);
    let min_len = ((params.c_increment * sigma * l as f64 / q4).floor() as u64).max(1);
    let mut best: Option<Increment> = None;
    for offset in 0..step.min(l) {
        let m_max = (l - offset) / step;
        if m_max < 1 {
            continue;
        }
        let members: Vec<u64> = b
            .elements()
            .iter()
            .filter(|&&x| x > offset && (x - offset) % step == 0)
            .map(|&x| (x - offset) / step)
            .filter(|&m| m >= 1 && m <= m_max)
            .collect();
        let mut lengths: Vec<u64> = Vec::new();
        let mut len = m_max;
        while len >= min_len {
            lengths.push(len);
            len /= 2;
        }
        if lengths.is_empty() {
            // No window at this offset reaches the admissible floor.
            continue;
        }
        for &len in &lengths {
            let count = members.partition_point(|&m| m <= len) as u64;
            let density = count as f64 / len as f64;
            let better = match &best {
                None => true,
                Some(cur) => {
                    // Exact rational comparison of densities.
                    let lhs = count as u128 * cur.length as u128;
                    let rhs = cur.count as u128 * len as u128;
                    lhs > rhs || (lhs == rhs && (offset, std::cmp::Reverse(len))
                        < (cur.offset, std::cmp::Reverse(cur.length)))
                }
            };
            if better {
                best = Some(Increment {
                    offset,
                    length: len,
                    count,
                    density,
                });
            }
        }
    }
    best.filter(|inc| inc.density >= sigma * gain)
}

#[derive(Debug, Clone, Serialize)]
pub enum StepDecision {
    Increment {
        step: u64,
        offset: u64,
        new_length: u64,
        new_density: f64,
    },
    HalfInterval {
        new_length: u64,
        new_density: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub k: u32,
    pub n: u64,
    pub size: u64,
    pub density: f64,
    pub d: u64,
    pub q: u64,
    pub poly: QuadraticPoly,
    pub max_mass_q: u64,
    pub max_mass: f64,
    pub mass_threshold: f64,
    pub decision: StepDecision,
}

#[derive(Debug, Clone, Serialize)]
pub enum Terminal {
    /// Spread-out spectrum and balanced halves: the state feeds the inner
    /// iteration as `(B, h, σ)`.
    Case2 {
        sigma: f64,
        half_count: u64,
        max_mass: f64,
        mass_threshold: f64,
    },
    /// Another accepted step would push the density past 1.
    DensityExceeded { density: f64 },
    IntervalExhausted { length: u64, min_length: u64 },
    /// Concentration was detected but no window met the gain target.
    IncrementNotFound { q: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct OuterTrace {
    pub initial_n: u64,
    pub initial_density: f64,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
    pub final_d: u64,
    pub final_poly: QuadraticPoly,
    #[serde(skip)]
    pub final_set: IntegerSet,
    pub violations: Vec<String>,
}

/// Runs the outer density-increment iteration from `(A, f)`.
///
/// Each round tests mass concentration over denominators `q ≤ Q` and the
/// half-interval balance. Concentration triggers a projection step (replacing
/// `f_d` by `f_{qd}`); an unbalanced lower half triggers translation of the
/// upper half. The loop ends when both tests pass (`Case2`), the interval or
/// density budget runs out, or no admissible window exists.
pub fn outer_iteration(
    a: &IntegerSet,
    f: &QuadraticPoly,
    params: &IterationParams,
) -> Result<OuterTrace> {
    params.validate()?;
    if !is_intersective(f)?.is_intersective() {
        return Err(IterateError::NotIntersective);
    }
    // Difference sets are symmetric, so a negative leading coefficient is
    // equivalent to its negation.
    let f = if f.a2 < 0 {
        QuadraticPoly {
            a2: -f.a2,
            a1: -f.a1,
            a0: -f.a0,
        }
    } else {
        *f
    };
    let n0 = a.ambient();
    let gain = params.increment_gain_for(n0);
    let mass_factor = params.mass_factor_for(n0);
    let min_length = params.min_length_value().max(2);
    let width = f64_to_fraction(params.q_threshold)?;
    let q_cap = params.q_threshold.floor() as u64;
    let mut violations: Vec<String> = Vec::new();

    let mut set = a.clone();
    let mut d: u64 = 1;
    let mut h = auxiliary_poly(&f, 1)?;
    if params.check_difference_free {
        if let Some(v) = is_difference_free(&set, &h)? {
            return Err(IterateError::NotDifferenceFree {
                poly: h,
                violation: v,
            });
        }
    }
    let mut steps: Vec<TraceStep> = Vec::new();
    let terminal = loop {
        let n_k = set.ambient();
        let delta = set.density();
        if n_k < min_length {
            break Terminal::IntervalExhausted {
                length: n_k,
                min_length,
            };
        }
        if steps.len() > 10_000 {
            violations.push("iteration cap (10000 steps) reached".into());
            break Terminal::IntervalExhausted {
                length: n_k,
                min_length,
            };
        }
        let spectrum = Spectrum::compute(set.elements(), n_k)?;
        let arcs = ArcParams::rational(width, q_cap.max(1));
        let (q_star, mass) = max_mass_denominator(&spectrum, q_cap.max(1), &arcs);
        let threshold = delta * delta * mass_factor;
        let half_count = set.elements().iter().filter(|&&x| 2 * x <= n_k).count() as u64;
        if mass > threshold {
            if delta * gain > 1.0 {
                break Terminal::DensityExceeded { density: delta };
            }
            let step = projection_step(&f, q_star)?;
            match find_density_increment(&set, step, params, n0) {
                Some(inc) => {
                    let projected = project_to_progression(&set, inc.offset, step, inc.length)?;
                    let new_d = d * q_star;
                    let new_h = auxiliary_poly(&f, new_d)?;
                    if params.check_difference_free {
                        if let Some(v) = is_difference_free(&projected, &new_h)? {
                            return Err(IterateError::NotDifferenceFree {
                                poly: new_h,
                                violation: v,
                            });
                        }
                    }
                    if inc.density < delta * gain {
                        violations.push(format!(
                            "step {}: accepted density {} below gain target {}",
                            steps.len(),
                            inc.density,
                            delta * gain
                        ));
                    }
                    steps.push(TraceStep {
                        k: steps.len() as u32,
                        n: n_k,
                        size: set.len() as u64,
                        density: delta,
                        d,
                        q: q_star,
                        poly: h,
                        max_mass_q: q_star,
                        max_mass: mass,
                        mass_threshold: threshold,
                        decision: StepDecision::Increment {
                            step,
                            offset: inc.offset,
                            new_length: inc.length,
                            new_density: inc.density,
                        },
                    });
                    set = projected;
                    d = new_d;
                    h = new_h;
                }
                None => break Terminal::IncrementNotFound { q: q_star },
            }
        } else if 3 * half_count < set.len() as u64 {
            // Mass is spread but the lower half is thin: the upper half is
            // dense, translate it down. Differences are preserved exactly.
            let half = n_k / 2;
            let new_len = n_k - half;
            let elements: Vec<u64> = set
                .elements()
                .iter()
                .filter(|&&x| x > half)
                .map(|&x| x - half)
                .collect();
            let translated = IntegerSet::new(new_len, elements)?;
            let new_density = translated.density();
            if new_density < delta {
                violations.push(format!(
                    "step {}: half-interval translation lost density ({} -> {})",
                    steps.len(),
                    delta,
                    new_density
                ));
            }
            steps.push(TraceStep {
                k: steps.len() as u32,
                n: n_k,
                size: set.len() as u64,
                density: delta,
                d,
                q: 1,
                poly: h,
                max_mass_q: q_star,
                max_mass: mass,
                mass_threshold: threshold,
                decision: StepDecision::HalfInterval {
                    new_length: new_len,
                    new_density,
                },
            });
            set = translated;
        } else {
            break Terminal::Case2 {
                sigma: delta,
                half_count,
                max_mass: mass,
                mass_threshold: threshold,
            };
        }
    };
    Ok(OuterTrace {
        initial_n: n0,
        initial_density: a.density(),
        steps,
        terminal,
        final_d: d,
        final_poly: h,
        final_set: set,
        violations,
    })
}

/// A family of frequencies with one representative per arc: every `t` has
/// `|B̂₁(t)| ≥ σ/U`, lies in some `M_q(K)` with `q ≤ V` (or is 0), and no two
/// share an arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencySet {
    pub frequencies: Vec<u64>,
    pub u: u64,
    pub v: u64,
    pub k: u64,
}

impl FrequencySet {
    /// The canonical starting family: the zero frequency with `U = 3`,
    /// `V = K = 1`.
    pub fn seed() -> FrequencySet {
        FrequencySet {
            frequencies: vec![0],
            u: 3,
            v: 1,
            k: 1,
        }
    }

    /// Structural violations against a concrete spectrum; empty when valid.
    pub fn violations(&self, b1hat: &Spectrum, sigma: f64) -> Vec<String> {
        let mut out = Vec::new();
        let n = b1hat.n();
        let params = ArcParams::integer(self.k.max(1), self.v.max(1));
        let floor = sigma / self.u as f64 * (1.0 - 1e-9);
        let mut arc_owners: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
        for &t in &self.frequencies {
            if b1hat.coeff(t as i64).norm() < floor {
                out.push(format!("|B1^({t})| below sigma/U"));
            }
            if t == 0 {
                continue;
            }
            let arcs = arc_memberships(t, n, &params);
            if arcs.is_empty() {
                out.push(format!("frequency {t} outside every arc with q <= {}", self.v));
            }
            for arc in arcs {
                arc_owners.entry(arc).or_default().push(t);
            }
        }
        for ((a, q), owners) in arc_owners {
            if owners.len() > 1 {
                out.push(format!("arc ({a},{q}) holds {} frequencies: {owners:?}", owners.len()));
            }
        }
        out
    }
}

/// One selected frequency of a blown-up family, with its arc label and the
/// transform magnitudes that justified the selection.
#[derive(Debug, Clone, Serialize)]
pub struct PsMember {
    pub t: u64,
    pub a: u64,
    pub q: u64,
    pub b_mag: f64,
    pub b1_mag: f64,
}

/// Outcome of blowing up a single frequency `s`.
#[derive(Debug, Clone, Serialize)]
pub struct InnerBlowup {
    pub s: u64,
    pub cell: (u32, u32, u32),
    pub v_s: u64,
    pub w_s: u64,
    pub u_s: u64,
    pub members: Vec<PsMember>,
    pub y_count: u64,
    pub contribution: f64,
}

/// Spectral data shared by every `s` of one blow-up call.
struct SpectralData {
    l: u64,
    sigma: f64,
    bhat: Spectrum,
    b1hat: Spectrum,
    s_mag: Vec<f64>,
    eta_inv: ReducedFraction,
    arc_params: ArcParams,
}

fn spectral_data(
    b: &IntegerSet,
    h: &QuadraticPoly,
    u: u64,
    params: &IterationParams,
) -> Result<SpectralData> {
    let l = b.ambient();
    let b1 = b.restrict(l / 2);
    let bhat = Spectrum::compute(b.elements(), l)?;
    let b1hat = Spectrum::compute(b1.elements(), l)?;
    let ctx = make_context(*h, l)?;
    let s_mag: Vec<f64> = weyl_spectrum(&ctx).iter().map(|c| c.norm()).collect();
    let sigma = bhat.density();
    if b.is_empty() {
        return Err(IterateError::EmptyMajorMass);
    }
    // η = c0·σ/U exactly: σ = |B|/L, c0 as a dyadic rational.
    let c0 = f64_to_fraction(params.c0)?;
    let eta_inv = ReducedFraction::new(
        c0.denominator() * l as i128 * u as i128,
        c0.numerator() * b.len() as i128,
    )?;
    let eta_inv_f = eta_inv.as_f64();
    let q_max = (eta_inv_f * eta_inv_f).ceil().min(l as f64).max(1.0) as u64;
    let arc_params = ArcParams::rational(eta_inv, q_max);
    Ok(SpectralData {
        l,
        sigma,
        bhat,
        b1hat,
        s_mag,
        eta_inv,
        arc_params,
    })
}

fn dyadic_level_denominator(q: u64) -> u32 {
    // q ∈ [2^(i−1), 2^i)
    64 - q.leading_zeros()
}

fn dyadic_level_magnitude(sigma: f64, v: f64) -> u32 {
    // smallest k ≥ 1 with σ/2^k ≤ v, clamped inside the shiftable range
    ((sigma / v).log2().ceil() as i64).clamp(1, 62) as u32
}

fn inner_blowup_with(data: &SpectralData, s: u64, u: u64, params: &IterationParams) -> Result<InnerBlowup> {
    let l = data.l;
    let sigma = data.sigma;
    let xy_floor = params.c1 * sigma.powf(3.5) / (u as f64).powi(3);
    struct ArcStat {
        max_b: f64,
        max_b1: f64,
        arg_b1: u64,
        y_count: u64,
        y_contribution: f64,
    }
    let mut arcs: BTreeMap<(u64, u64), ArcStat> = BTreeMap::new();
    for t in 1..l {
        let ArcClass::Major { a, q } = classify_arc_fast(t, l, &data.arc_params) else {
            continue;
        };
        let b_mag = data.bhat.coeff(t as i64).norm();
        let b1_mag = data.b1hat.coeff((s + t) as i64).norm();
        let stat = arcs.entry((a, q)).or_insert(ArcStat {
            max_b: 0.0,
            max_b1: 0.0,
            arg_b1: t,
            y_count: 0,
            y_contribution: 0.0,
        });
        if b_mag > stat.max_b {
            stat.max_b = b_mag;
        }
        if b1_mag > stat.max_b1 {
            stat.max_b1 = b1_mag;
            stat.arg_b1 = t;
        }
        if b_mag.min(b1_mag) > xy_floor {
            stat.y_count += 1;
            stat.y_contribution += b_mag * b1_mag * data.s_mag[t as usize];
        }
    }
    // Dyadic cells over arcs that meet Y; contributions decide the winner,
    // ties go to the lexicographically smallest cell.
    struct Cell {
        contribution: f64,
        y_count: u64,
        members: Vec<PsMember>,
    }
    let mut cells: BTreeMap<(u32, u32, u32), Cell> = BTreeMap::new();
    for ((a, q), stat) in &arcs {
        if stat.y_count == 0 {
            continue;
        }
        let i = dyadic_level_denominator(*q);
        let j = dyadic_level_magnitude(sigma, stat.max_b);
        let kk = dyadic_level_magnitude(sigma, stat.max_b1);
        let cell = cells.entry((i, j, kk)).or_insert(Cell {
            contribution: 0.0,
            y_count: 0,
            members: Vec::new(),
        });
        cell.contribution += stat.y_contribution;
        cell.y_count += stat.y_count;
        cell.members.push(PsMember {
            t: stat.arg_b1,
            a: *a,
            q: *q,
            b_mag: stat.max_b,
            b1_mag: stat.max_b1,
        });
    }
    let mut winner: Option<((u32, u32, u32), &Cell)> = None;
    for (idx, cell) in &cells {
        if winner.is_none_or(|(_, w)| cell.contribution > w.contribution) {
            winner = Some((*idx, cell));
        }
    }
    let Some(((i, j, kk), cell)) = winner else {
        return Err(IterateError::EmptyMajorMass);
    };
    let mut members = cell.members.clone();
    members.sort_by_key(|m| (m.q, m.a));
    Ok(InnerBlowup {
        s,
        cell: (i, j, kk),
        v_s: 1u64 << i,
        w_s: 1u64 << j,
        u_s: 1u64 << kk,
        members,
        y_count: cell.y_count,
        contribution: cell.contribution,
    })
}

/// Blows up a single frequency: finds the dyadic cell of arcs carrying the
/// largest paired spectral mass and returns one representative per arc.
pub fn inner_blowup(
    b: &IntegerSet,
    h: &QuadraticPoly,
    s: u64,
    u: u64,
    params: &IterationParams,
) -> Result<InnerBlowup> {
    let data = spectral_data(b, h, u, params)?;
    inner_blowup_with(&data, s, u, params)
}

/// Counts distinct reduced values of `x + y (mod 1)` where `x` runs over the
/// first components and `y` over the matching per-element sets.
pub fn rational_sumset(pairs: &[(ReducedFraction, Vec<ReducedFraction>)]) -> Result<usize> {
    let mut sums: BTreeSet<ReducedFraction> = BTreeSet::new();
    for (x, ys) in pairs {
        for y in ys {
            sums.insert(x.add_mod1(y)?);
        }
    }
    Ok(sums.len())
}

/// A synthetic or measured instance of the fraction-sum counting inequality.
#[derive(Debug, Clone)]
pub struct CrInstance {
    /// One reduced fraction `a/q` per base frequency, distinct, `q ≤ v`.
    pub base_arcs: Vec<ReducedFraction>,
    /// Per base frequency, the reduced fractions `b/r` of its blown-up arcs.
    pub per_s: Vec<Vec<ReducedFraction>>,
    pub v: u64,
    pub v_tilde: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrCheck {
    pub lhs: u64,
    pub rhs: f64,
    pub d_quantity: u64,
    pub tau_max: u64,
    pub holds: bool,
}

/// Evaluates both sides of
/// `|R| ≥ |P̃|·(min_s |P_s|)² / (Ṽ·D·τ⁸·(1+log V))` exactly.
pub fn lemma_cr_check(instance: &CrInstance) -> Result<CrCheck> {
    assert_eq!(instance.base_arcs.len(), instance.per_s.len());
    let pairs: Vec<(ReducedFraction, Vec<ReducedFraction>)> = instance
        .base_arcs
        .iter()
        .cloned()
        .zip(instance.per_s.iter().cloned())
        .collect();
    let lhs = rational_sumset(&pairs)? as u64;
    let mut by_denominator: BTreeMap<i128, BTreeSet<i128>> = BTreeMap::new();
    for ps in &instance.per_s {
        for frac in ps {
            by_denominator
                .entry(frac.denominator())
                .or_default()
                .insert(frac.numerator());
        }
    }
    let d_quantity = by_denominator
        .iter()
        .filter(|(r, _)| **r <= instance.v_tilde as i128)
        .map(|(_, bs)| bs.len() as u64)
        .max()
        .unwrap_or(0)
        .max(1);
    let tau_max = max_divisor_count(instance.v * instance.v_tilde)?;
    let p_tilde = instance.base_arcs.len() as u64;
    let min_ps = instance.per_s.iter().map(|v| v.len()).min().unwrap_or(0) as u64;
    let rhs = p_tilde as f64 * (min_ps as f64).powi(2)
        / (instance.v_tilde as f64
            * d_quantity as f64
            * (tau_max as f64).powi(8)
            * (1.0 + (instance.v as f64).ln()));
    Ok(CrCheck {
        lhs,
        rhs,
        d_quantity,
        tau_max,
        holds: lhs as f64 >= rhs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowUpReport {
    pub input: FrequencySet,
    pub p_prime: FrequencySet,
    pub cell: (u32, u32, u32),
    pub u_tilde: u64,
    pub w_tilde: u64,
    pub v_tilde: u64,
    pub p_tilde: Vec<u64>,
    pub per_s: Vec<InnerBlowup>,
    pub min_ps: u64,
    pub distinct_sums: u64,
    pub d_quantity: u64,
    pub tau_max: u64,
    pub cr_rhs: f64,
    pub cr_holds: bool,
    pub gain_ratio: f64,
    /// `Σ_{t∈P'} |B̂₁(t)|² / σ²`; Plancherel keeps it at most `1/σ`, and it
    /// dominates `|P'|/U'²`.
    pub p_prime_mass_over_sigma2: f64,
    pub eta_inv: f64,
    pub sigma: f64,
    pub violations: Vec<String>,
}

/// Runs [`inner_blowup`] for every `s ∈ P`, keeps the modal parameter triple,
/// and assembles `P'` by taking one frequency `s + t` per distinct reduced
/// fraction sum `a/q + b/r`. New parameters: `U' = Ũ`, `V' = Ṽ·V`,
/// `K' = K + ⌈η⁻¹⌉`.
pub fn blow_up(
    p: &FrequencySet,
    b: &IntegerSet,
    h: &QuadraticPoly,
    params: &IterationParams,
) -> Result<BlowUpReport> {
    params.validate()?;
    if p.frequencies.is_empty() {
        return Err(IterateError::DegenerateTriple);
    }
    let data = spectral_data(b, h, p.u, params)?;
    let mut violations: Vec<String> = Vec::new();
    for v in p.violations(&data.b1hat, data.sigma) {
        violations.push(format!("input family: {v}"));
    }
    let blowups: Vec<InnerBlowup> = p
        .frequencies
        .iter()
        .map(|&s| inner_blowup_with(&data, s, p.u, params))
        .collect::<Result<_>>()?;
    // Modal (U_s, V_s, W_s) triple; ties toward smaller U_s, then V_s, then W_s.
    let mut groups: BTreeMap<(u64, u64, u64), Vec<usize>> = BTreeMap::new();
    for (idx, bu) in blowups.iter().enumerate() {
        groups.entry((bu.u_s, bu.v_s, bu.w_s)).or_default().push(idx);
    }
    let (&(u_tilde, v_tilde, w_tilde), chosen) = groups
        .iter()
        .max_by_key(|(key, idxs)| (idxs.len(), std::cmp::Reverse(**key)))
        .expect("nonempty groups");
    let p_tilde: Vec<u64> = chosen.iter().map(|&i| blowups[i].s).collect();
    let cell = blowups[chosen[0]].cell;
    // Reduced-fraction sums a/q + b/r over the modal subset.
    let base_params = ArcParams::integer(p.k.max(1), p.v.max(1));
    let mut sums: BTreeMap<ReducedFraction, u64> = BTreeMap::new();
    let mut per_s_fracs: Vec<Vec<ReducedFraction>> = Vec::new();
    let mut base_fracs: Vec<ReducedFraction> = Vec::new();
    for &idx in chosen {
        let bu = &blowups[idx];
        let base = if bu.s == 0 {
            ReducedFraction::zero()
        } else {
            match classify_arc_fast(bu.s, data.l, &base_params) {
                ArcClass::Major { a, q } => ReducedFraction::new(a as i128, q as i128)?,
                _ => {
                    return Err(IterateError::InvalidFrequencySet(format!(
                        "frequency {} has no arc with q <= {}",
                        bu.s, p.v
                    )))
                }
            }
        };
        base_fracs.push(base);
        let mut fracs = Vec::new();
        for m in &bu.members {
            let frac = ReducedFraction::new(m.a as i128, m.q as i128)?;
            fracs.push(frac);
            let sum = base.add_mod1(&frac)?;
            let freq = (bu.s + m.t) % data.l;
            sums.entry(sum)
                .and_modify(|cur| {
                    if freq < *cur {
                        *cur = freq;
                    }
                })
                .or_insert(freq);
        }
        per_s_fracs.push(fracs);
    }
    let distinct_sums = sums.len() as u64;
    let p_prime_freqs: BTreeSet<u64> = sums.values().copied().collect();
    if p_prime_freqs.len() != sums.len() {
        violations.push(format!(
            "{} fraction sums collapsed onto {} frequencies",
            sums.len(),
            p_prime_freqs.len()
        ));
    }
    let eta_inv_ceil = {
        let (n, d) = (data.eta_inv.numerator(), data.eta_inv.denominator());
        ((n + d - 1) / d) as u64
    };
    let p_prime = FrequencySet {
        frequencies: p_prime_freqs.into_iter().collect(),
        u: u_tilde,
        v: v_tilde * p.v,
        k: p.k + eta_inv_ceil,
    };
    for v in p_prime.violations(&data.b1hat, data.sigma) {
        violations.push(format!("output family: {v}"));
    }
    // D: numerators per denominator r ≤ Ṽ whose arc meets ∪ P_s.
    let all_ts: Vec<u64> = chosen
        .iter()
        .flat_map(|&i| blowups[i].members.iter().map(|m| m.t))
        .collect();
    let mut d_quantity = 1u64;
    for r in 1..=v_tilde {
        let mut numerators: BTreeSet<u64> = BTreeSet::new();
        for &t in &all_ts {
            for (a, q) in arc_memberships(t, data.l, &ArcParams::rational(data.eta_inv, r)) {
                if q == r {
                    numerators.insert(a);
                }
            }
        }
        d_quantity = d_quantity.max(numerators.len() as u64);
    }
    let tau_max = max_divisor_count((p.v * v_tilde).max(1))?;
    let min_ps = chosen
        .iter()
        .map(|&i| blowups[i].members.len() as u64)
        .min()
        .unwrap_or(0);
    let cr_rhs = p_tilde.len() as f64 * (min_ps as f64).powi(2)
        / (v_tilde as f64
            * d_quantity as f64
            * (tau_max as f64).powi(8)
            * (1.0 + (p.v as f64).ln()));
    let cr_holds = distinct_sums as f64 >= cr_rhs;
    if !cr_holds {
        violations.push(format!(
            "fraction-sum count {distinct_sums} below combinatorial floor {cr_rhs}"
        ));
    }
    let gain_ratio = (p_prime.frequencies.len() as f64 / (p_prime.u * p_prime.u) as f64)
        / (p.frequencies.len() as f64 / (p.u * p.u) as f64);
    let p_prime_mass_over_sigma2 = p_prime
        .frequencies
        .iter()
        .map(|&t| data.b1hat.coeff(t as i64).norm_sqr())
        .sum::<f64>()
        / (data.sigma * data.sigma);
    // Plancherel over all of Z_L caps the selected mass at |B₁|/(L·σ²) ≤ 1/σ.
    if p_prime_mass_over_sigma2 > 1.0 / data.sigma + 1e-9 {
        violations.push(format!(
            "selected mass {p_prime_mass_over_sigma2} exceeds the Plancherel budget {}",
            1.0 / data.sigma
        ));
    }
    if p_prime_mass_over_sigma2
        < p_prime.frequencies.len() as f64 / (p_prime.u * p_prime.u) as f64 - 1e-9
    {
        violations.push("selected mass below |P'|/U'^2".into());
    }
    Ok(BlowUpReport {
        input: p.clone(),
        p_prime,
        cell,
        u_tilde,
        w_tilde,
        v_tilde,
        p_tilde,
        per_s: chosen.iter().map(|&i| blowups[i].clone()).collect(),
        min_ps,
        distinct_sums,
        d_quantity,
        tau_max,
        cr_rhs,
        cr_holds,
        gain_ratio,
        p_prime_mass_over_sigma2,
        eta_inv: data.eta_inv.as_f64(),
        sigma: data.sigma,
        violations,
    })
}

/// Chains blow-ups: each round's output family feeds the next, as long as the
/// rounds budget lasts and every round keeps producing usable arcs. Returns
/// the reports produced and the reason the chain stopped early, if it did.
pub fn blow_up_cascade(
    p0: &FrequencySet,
    b: &IntegerSet,
    h: &QuadraticPoly,
    params: &IterationParams,
    rounds: u32,
) -> Result<(Vec<BlowUpReport>, Option<String>)> {
    let mut reports: Vec<BlowUpReport> = Vec::new();
    let mut current = p0.clone();
    let mut stop = None;
    for round in 0..rounds {
        match blow_up(&current, b, h, params) {
            Ok(report) => {
                current = report.p_prime.clone();
                reports.push(report);
            }
            Err(e @ (IterateError::EmptyMajorMass | IterateError::DegenerateTriple)) => {
                stop = Some(format!("round {round}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((reports, stop))
}

/// `Σ_{t∈Z_L} B̂(t)·conj(B̂₁(s+t))·S(t)`; identically zero whenever no
/// difference `a − b` (`a ∈ B`, `b ∈ B₁`) equals `h(y)` for `y` in the
/// summation range — in particular whenever `B` is difference-free for `h`.
pub fn orthogonality_sum(b: &IntegerSet, h: &QuadraticPoly, s: u64) -> Result<Complex64> {
    let l = b.ambient();
    let b1 = b.restrict(l / 2);
    let bhat = Spectrum::compute(b.elements(), l)?;
    let b1hat = Spectrum::compute(b1.elements(), l)?;
    let ctx = make_context(*h, l)?;
    let s_spec = weyl_spectrum(&ctx);
    let terms: Vec<Complex64> = (0..l)
        .map(|t| {
            bhat.coeff(t as i64) * b1hat.coeff((s + t) as i64).conj() * s_spec[t as usize]
        })
        .collect();
    Ok(pairwise_sum_complex(&terms))
}

/// Difference-free inheritance under projection, verified exhaustively: the
/// projected set must avoid the image of the auxiliary polynomial at `q·d`.
pub fn verify_projection_inheritance(
    f: &QuadraticPoly,
    d: u64,
    q: u64,
    b: &IntegerSet,
    offset: u64,
) -> Result<bool> {
    let fd = auxiliary_poly(f, d)?;
    if let Some(v) = is_difference_free(b, &fd)? {
        return Err(IterateError::NotDifferenceFree {
            poly: fd,
            violation: v,
        });
    }
    let step = projection_step(f, q)?;
    let length = (b.ambient().saturating_sub(offset)) / step;
    if length == 0 {
        return Ok(true);
    }
    let projected = project_to_progression(b, offset, step, length)?;
    let fqd = auxiliary_poly(f, q * d)?;
    Ok(is_difference_free(&projected, &fqd)?.is_none())
}
