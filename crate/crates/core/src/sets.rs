//! Integer sets and polynomial images: difference-free verification, greedy
//! and exact extremal constructions, and density bound formulas.
//!
//! The image `I(f) = {f(n) > 0 : n ≥ 1}` defines a forbidden-difference
//! structure on `[1, N]`; a set is difference-free when no pairwise difference
//! lands in the image. The extremal solver treats this as maximum independent
//! set in the graph whose edges join `u, v` with `|u − v| ∈ I(f)`.

use crate::poly::QuadraticPoly;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetError {
    #[error("element {element} outside [1, {n}]")]
    ElementOutOfRange { element: u64, n: u64 },
    #[error("leading coefficient must be positive")]
    NonPositiveLeading,
}

/// Strictly increasing elements inside `[1, N]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegerSet {
    n: u64,
    elements: Vec<u64>,
}

impl IntegerSet {
    pub fn new(n: u64, mut elements: Vec<u64>) -> Result<IntegerSet, SetError> {
        elements.sort_unstable();
        elements.dedup();
        for &x in &elements {
            if x == 0 || x > n {
                return Err(SetError::ElementOutOfRange { element: x, n });
            }
        }
        Ok(IntegerSet { n, elements })
    }

    pub fn ambient(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn density(&self) -> f64 {
        self.elements.len() as f64 / self.n as f64
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// The mirror image `{N+1−a : a ∈ A}`; differences are preserved up to sign.
    pub fn reflect(&self) -> IntegerSet {
        let elements = self.elements.iter().rev().map(|&a| self.n + 1 - a).collect();
        IntegerSet {
            n: self.n,
            elements,
        }
    }

    /// Elements in `[1, limit]`, kept in the same ambient interval semantics
    /// as a set over `[1, limit]`.
    pub fn restrict(&self, limit: u64) -> IntegerSet {
        IntegerSet {
            n: limit,
            elements: self
                .elements
                .iter()
                .copied()
                .take_while(|&a| a <= limit)
                .collect(),
        }
    }
}

/// Sorted positive values of `f` that land in `[1, N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialImage {
    pub f: QuadraticPoly,
    pub n: u64,
    values: Vec<u64>,
}

impl PolynomialImage {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn contains(&self, v: u64) -> bool {
        self.values.binary_search(&v).is_ok()
    }
}

/// Largest integer `x` with `g(x) <= 0` for an upward parabola, or None.
/// Exact via the integer square root of the discriminant.
fn floor_upper_root(g: &QuadraticPoly) -> Option<i128> {
    let disc = g.a1 * g.a1 - 4 * g.a2 * g.a0;
    if disc < 0 {
        return None;
    }
    let s = crate::arith::isqrt_u128(disc as u128) as i128;
    let base = (-g.a1 + s).div_euclid(2 * g.a2);
    [base + 1, base].into_iter().find(|&c| g.eval(c) <= 0)
}

/// Enumerates `I(f) ∩ [1, N]` exactly. The candidate arguments with
/// `1 <= f(x) <= N` form at most two integer windows (around each branch of
/// the parabola); both are bounded by root computations, so a large vertex or
/// a deep negative dip costs nothing.
pub fn image_up_to(f: &QuadraticPoly, n: u64) -> Result<PolynomialImage, SetError> {
    if f.a2 <= 0 {
        return Err(SetError::NonPositiveLeading);
    }
    let ni = n as i128;
    // f(x) <= N exactly on [lo, hi]; empty when the level is below the vertex.
    let below_n = QuadraticPoly {
        a2: f.a2,
        a1: f.a1,
        a0: f.a0 - ni,
    };
    let Some(hi) = floor_upper_root(&below_n) else {
        return Ok(PolynomialImage {
            f: *f,
            n,
            values: Vec::new(),
        });
    };
    let lo = -floor_upper_root(&QuadraticPoly {
        a2: below_n.a2,
        a1: -below_n.a1,
        a0: below_n.a0,
    })
    .expect("mirror interval is nonempty when the original is");
    // f(x) <= 0 on [zlo, zhi] (possibly empty); those arguments contribute no
    // positive values and are skipped wholesale.
    let mut windows: Vec<(i128, i128)> = Vec::new();
    match floor_upper_root(f) {
        Some(zhi) => {
            let zlo = -floor_upper_root(&QuadraticPoly {
                a2: f.a2,
                a1: -f.a1,
                a0: f.a0,
            })
            .expect("mirror interval is nonempty when the original is");
            windows.push((lo, zlo - 1));
            windows.push((zhi + 1, hi));
        }
        None => windows.push((lo, hi)),
    }
    let mut values = Vec::new();
    for (a, b) in windows {
        for x in a.max(1)..=b {
            let v = f.eval(x);
            debug_assert!(v <= ni);
            if v >= 1 {
                values.push(v as u64);
            }
        }
    }
    values.sort_unstable();
    values.dedup();
    Ok(PolynomialImage { f: *f, n, values })
}

/// A witnessed violation: `a − a_prime = f(arg)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub a: u64,
    pub a_prime: u64,
    pub arg: u64,
}

/// Scans the sorted difference set of `A` against the sorted image by a
/// two-pointer merge. Returns the violation with the smallest difference
/// (smallest lower element on ties), or None when difference-free.
/// Smallest natural preimage of an image value: the two integer roots of
/// `f − v` are the only candidates.
fn image_preimage(f: &QuadraticPoly, v: u64) -> u64 {
    let shifted = QuadraticPoly {
        a2: f.a2,
        a1: f.a1,
        a0: f.a0 - v as i128,
    };
    let hi = floor_upper_root(&shifted);
    let lo = floor_upper_root(&QuadraticPoly {
        a2: shifted.a2,
        a1: -shifted.a1,
        a0: shifted.a0,
    })
    .map(|y| -y);
    [lo, hi]
        .into_iter()
        .flatten()
        .filter(|&x| x >= 1 && f.eval(x) == v as i128)
        .min()
        .expect("image value must have a preimage") as u64
}

pub fn check_difference_free(set: &IntegerSet, image: &PolynomialImage) -> Option<Violation> {
    let elems = set.elements();
    if elems.is_empty() || image.values().is_empty() {
        return None;
    }
    let values = image.values();
    let found = if elems.len() <= 4096 {
        // All pairwise positive differences, sorted, merged against the image
        // by two pointers; the first hit is the smallest violating difference.
        let mut diffs: Vec<(u64, u64)> = Vec::new();
        for (i, &a) in elems.iter().enumerate() {
            for &b in &elems[..i] {
                diffs.push((a - b, b));
            }
        }
        diffs.sort_unstable();
        let (mut di, mut vi) = (0usize, 0usize);
        let mut hit = None;
        while di < diffs.len() && vi < values.len() {
            let (d, lower) = diffs[di];
            match d.cmp(&values[vi]) {
                std::cmp::Ordering::Less => di += 1,
                std::cmp::Ordering::Greater => vi += 1,
                std::cmp::Ordering::Equal => {
                    hit = Some((d, lower));
                    break;
                }
            }
        }
        hit
    } else {
        // Large sets: walk image values in increasing order against sorted
        // membership instead of materializing |A|² differences. Same witness:
        // smallest violating difference, then smallest lower element.
        let mut hit = None;
        'outer: for &v in values {
            for &b in elems {
                if set.contains(b + v) {
                    hit = Some((v, b));
                    break 'outer;
                }
            }
        }
        hit
    };
    found.map(|(d, lower)| Violation {
        a: lower + d,
        a_prime: lower,
        arg: image_preimage(&image.f, d),
    })
}

/// Convenience wrapper building the image at the set's ambient bound.
pub fn is_difference_free(set: &IntegerSet, f: &QuadraticPoly) -> Result<Option<Violation>, SetError> {
    let image = image_up_to(f, set.ambient().saturating_sub(1).max(1))?;
    Ok(check_difference_free(set, &image))
}

/// First-fit greedy: admits `x` when no admitted element sits at an image
/// distance below it, tracked with a forbidden-position table.
pub fn greedy_difference_free(f: &QuadraticPoly, n: u64) -> Result<IntegerSet, SetError> {
    let image = image_up_to(f, n.saturating_sub(1).max(1))?;
    let mut forbidden = vec![false; n as usize + 1];
    let mut chosen = Vec::new();
    for x in 1..=n {
        if forbidden[x as usize] {
            continue;
        }
        chosen.push(x);
        for &v in image.values() {
            if x + v > n {
                break;
            }
            forbidden[(x + v) as usize] = true;
        }
    }
    Ok(IntegerSet { n, elements: chosen })
}

/// Search limits for the extremal solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverBudget {
    /// Largest N attempted exactly (hard limit 128 for the bitset kernel).
    pub exact_cap: u64,
    /// Branch-and-bound node budget; the incumbent is returned on exhaustion.
    pub max_nodes: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            exact_cap: 64,
            max_nodes: 200_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalResult {
    pub size: u64,
    pub witness: IntegerSet,
    pub exact: bool,
    pub nodes: u64,
}

struct MisSearch<'a> {
    adj: &'a [u128],
    order: &'a [usize],
    best_mask: u128,
    best_size: u32,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl MisSearch<'_> {
    /// Greedy clique cover of the candidate set: each clique can contribute at
    /// most one vertex to an independent set.
    fn cover_bound(&self, candidates: u128) -> u32 {
        let mut cliques: Vec<u128> = Vec::new();
        for &v in self.order {
            let bit = 1u128 << v;
            if candidates & bit == 0 {
                continue;
            }
            let mut placed = false;
            for c in cliques.iter_mut() {
                // v joins a clique when adjacent to every member.
                if *c & !self.adj[v] == 0 {
                    *c |= bit;
                    placed = true;
                    break;
                }
            }
            if !placed {
                cliques.push(bit);
            }
        }
        cliques.len() as u32
    }

    fn run(&mut self, candidates: u128, chosen: u128, size: u32) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if candidates == 0 {
            if size > self.best_size {
                self.best_size = size;
                self.best_mask = chosen;
            }
            return;
        }
        if size + self.cover_bound(candidates) <= self.best_size {
            return;
        }
        let &v = self
            .order
            .iter()
            .find(|&&v| candidates & (1u128 << v) != 0)
            .expect("nonempty candidate set");
        let bit = 1u128 << v;
        // Include v first: deep dives raise the incumbent early.
        self.run(candidates & !self.adj[v] & !bit, chosen | bit, size + 1);
        if self.exhausted {
            return;
        }
        self.run(candidates & !bit, chosen, size);
    }
}

/// Maximum difference-free subset of `[1, N]` by branch-and-bound with a
/// greedy incumbent and a clique-cover upper bound. Beyond the exact cap (or
/// on budget exhaustion) the best set found so far is returned with
/// `exact = false`.
pub fn extremal_difference_free(
    f: &QuadraticPoly,
    n: u64,
    budget: SolverBudget,
) -> Result<ExtremalResult, SetError> {
    let greedy = greedy_difference_free(f, n)?;
    if n > budget.exact_cap.min(128) {
        return Ok(ExtremalResult {
            size: greedy.len() as u64,
            witness: greedy,
            exact: false,
            nodes: 0,
        });
    }
    let image = image_up_to(f, n.saturating_sub(1).max(1))?;
    let nv = n as usize;
    let mut adj = vec![0u128; nv];
    for u in 0..nv {
        for &v in image.values() {
            let w = u + v as usize;
            if w < nv {
                adj[u] |= 1u128 << w;
                adj[w] |= 1u128 << u;
            }
        }
    }
    // Descending degree, ties toward the smaller element: deterministic.
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].count_ones()), v));
    let mut greedy_mask = 0u128;
    for &x in greedy.elements() {
        greedy_mask |= 1u128 << (x - 1);
    }
    let mut search = MisSearch {
        adj: &adj,
        order: &order,
        best_mask: greedy_mask,
        best_size: greedy.len() as u32,
        nodes: 0,
        budget: budget.max_nodes,
        exhausted: false,
    };
    let full = if nv == 128 {
        u128::MAX
    } else {
        (1u128 << nv) - 1
    };
    search.run(full, 0, 0);
    let elements: Vec<u64> = (0..nv as u64)
        .filter(|&v| search.best_mask & (1u128 << v) != 0)
        .map(|v| v + 1)
        .collect();
    Ok(ExtremalResult {
        size: search.best_size as u64,
        witness: IntegerSet { n, elements },
        exact: !search.exhausted,
        nodes: search.nodes,
    })
}

/// The published density bound shapes. `Main` is the headline
/// `(log N)^{-ρ log log log log N}`; the others are the comparison bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// `((log log N)² / log N)^{1/3}`
    ThmA,
    /// `(log N)^{-c·log log log log N}`
    ThmB,
    /// `((log log N)^μ / log N)^{1/(k-1)}`, `μ = 3` for `k = 2`, else 2
    ThmC,
    /// `(log N)^{-ρ·log log log log N}`
    Main,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundParams {
    pub rho: f64,
    pub c: f64,
    pub k: u32,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            rho: (1.0 - 11.0 * 0.05) / 3f64.ln(),
            c: 1.0 / 12.0,
            k: 2,
        }
    }
}

/// A bound evaluation: the numeric value when it is informative, `Vacuous`
/// when an inner logarithm is nonpositive or the expression reaches 1.
/// Vacuous is reported rather than clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundValue {
    Value(f64),
    Vacuous,
}

impl BoundValue {
    fn from(v: f64) -> BoundValue {
        if v.is_finite() && v > 0.0 && v < 1.0 {
            BoundValue::Value(v)
        } else {
            BoundValue::Vacuous
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            BoundValue::Value(v) => Some(*v),
            BoundValue::Vacuous => None,
        }
    }
}

pub fn evaluate_bound(kind: BoundKind, n: u64, params: &BoundParams) -> BoundValue {
    assert!(n >= 3);
    let l1 = (n as f64).ln();
    let l2 = l1.ln();
    match kind {
        BoundKind::ThmA => {
            if l2 <= 0.0 {
                return BoundValue::Vacuous;
            }
            BoundValue::from((l2 * l2 / l1).powf(1.0 / 3.0))
        }
        BoundKind::ThmC => {
            if l2 <= 0.0 || params.k < 2 {
                return BoundValue::Vacuous;
            }
            let mu = if params.k == 2 { 3 } else { 2 };
            BoundValue::from((l2.powi(mu) / l1).powf(1.0 / (params.k as f64 - 1.0)))
        }
        BoundKind::ThmB | BoundKind::Main => {
            if l2 <= 0.0 {
                return BoundValue::Vacuous;
            }
            let l3 = l2.ln();
            if l3 <= 0.0 {
                return BoundValue::Vacuous;
            }
            let l4 = l3.ln();
            if l4 <= 0.0 {
                return BoundValue::Vacuous;
            }
            let exp = match kind {
                BoundKind::ThmB => params.c,
                _ => params.rho,
            };
            BoundValue::from(l1.powf(-exp * l4))
        }
    }
}
