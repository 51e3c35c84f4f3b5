//! Weighted quadratic Weyl sums `S(t) = (1/M²) Σ_{x=j}^{M} x·e^{2πi h(x)t/L}`,
//! complete Gauss sums, the oscillatory phase integral, and moment counting.
//!
//! Phases are always reduced mod L in integer arithmetic before touching
//! floating point: `h(x)·t` overflows a double long before it overflows 128
//! bits, and the phase only matters mod L.

use crate::arith::{gcd_i128, ArithError};
use crate::numeric::{pairwise_sum_by, pairwise_sum_complex};
use crate::poly::QuadraticPoly;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeylError {
    #[error("empty summation range: M < j for this modulus")]
    DegenerateRange,
    #[error("leading coefficient must be positive")]
    NonPositiveLeading,
    #[error("adaptive quadrature failed to converge")]
    QuadratureNonConvergence,
    #[error("instance exceeds the brute-force budget ({0})")]
    BudgetExceeded(&'static str),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
}

pub type Result<T> = std::result::Result<T, WeylError>;

/// A quadratic `h` with positive leading coefficient, a modulus `L`, and the
/// summation range `[j, M]` on which `0 < h(x) < L/3` holds:
/// `j = max{n ≥ 1 : h(n) ≤ 0} + 1` (or 1) and `M = min{n ≥ 1 : h(n) ≥ L/3} − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeylSumContext {
    pub h: QuadraticPoly,
    pub l: u64,
    pub j: u64,
    pub m: u64,
}

/// Floor of the larger real root of `g` (positive leading coefficient),
/// exactly, via integer square root of the discriminant. None when `g` has no
/// real roots. `⌊(−a1 + √disc)/(2a2)⌋` is one of two integer candidates since
/// `√disc ∈ [s, s+1)`; the exact sign test picks it.
fn floor_upper_root(g: &QuadraticPoly) -> Option<i128> {
    let disc = g.a1 * g.a1 - 4 * g.a2 * g.a0;
    if disc < 0 {
        return None;
    }
    let s = crate::arith::isqrt_u128(disc as u128) as i128;
    let base = (-g.a1 + s).div_euclid(2 * g.a2);
    // g(n) <= 0 exactly on the (real) root interval; the floor of the upper
    // root is the largest integer there unless the interval misses integers.
    [base + 1, base].into_iter().find(|&cand| g.eval(cand) <= 0)
}

/// Largest natural `n` with `h(n) <= 0`, or None when `h` is strictly positive
/// on the naturals. Exact: integer square root plus a sign test.
fn last_nonpositive(h: &QuadraticPoly) -> Option<u64> {
    match floor_upper_root(h) {
        Some(n) if n >= 1 => Some(n as u64),
        _ => None,
    }
}

pub fn make_context(h: QuadraticPoly, l: u64) -> Result<WeylSumContext> {
    if h.a2 <= 0 {
        return Err(WeylError::NonPositiveLeading);
    }
    let j = last_nonpositive(&h).map_or(1, |n| n + 1);
    let li = l as i128;
    // h is below L/3 on [1, vertex], so the first crossing of L/3 sits on the
    // increasing branch.
    if 3 * h.checked_eval(1)? >= li {
        return Err(WeylError::DegenerateRange);
    }
    // Smallest n with 3·h(n) >= L: the floor r of the upper root of 3·h − L
    // when it is itself a root, otherwise r + 1. (r exists and r >= 1 because
    // 3·h(1) < L puts 1 inside the root interval.)
    let g = QuadraticPoly {
        a2: 3 * h.a2,
        a1: 3 * h.a1,
        a0: 3 * h.a0 - li,
    };
    let r = floor_upper_root(&g).ok_or(WeylError::DegenerateRange)?;
    let crossing = if g.eval(r) == 0 { r } else { r + 1 };
    let m = (crossing - 1) as u64;
    if m < j {
        return Err(WeylError::DegenerateRange);
    }
    debug_assert!(h.eval(j as i128) > 0);
    debug_assert!(j == 1 || h.eval(j as i128 - 1) <= 0);
    debug_assert!(3 * h.eval(m as i128) < li && 3 * h.eval(m as i128 + 1) >= li);
    Ok(WeylSumContext { h, l, j, m })
}

impl WeylSumContext {
    /// `S(0) = (Σ_{x=j}^{M} x)/M²` as an exact rational pair.
    pub fn s0_exact(&self) -> (i128, i128) {
        let (j, m) = (self.j as i128, self.m as i128);
        (m * (m + 1) / 2 - j * (j - 1) / 2, m * m)
    }

    pub fn s0(&self) -> f64 {
        let (num, den) = self.s0_exact();
        num as f64 / den as f64
    }

    /// Exact integer test of `S(0) >= 1/4`.
    pub fn s0_at_least_quarter(&self) -> bool {
        let (num, den) = self.s0_exact();
        4 * num >= den
    }

    fn phase_table(&self) -> Vec<u64> {
        (self.j..=self.m)
            .map(|x| self.h.eval_mod(x as i128, self.l as i128) as u64)
            .collect()
    }
}

/// `S(t)`, evaluated with exact phase reduction; `t` is read mod L.
pub fn weyl_sum(ctx: &WeylSumContext, t: u64) -> Complex64 {
    let t = (t % ctx.l) as u128;
    let l = ctx.l as u128;
    let scale = TAU / ctx.l as f64;
    let terms: Vec<Complex64> = (ctx.j..=ctx.m)
        .map(|x| {
            let hx = ctx.h.eval_mod(x as i128, ctx.l as i128) as u128;
            let ang = ((hx * t) % l) as f64 * scale;
            Complex64::new(ang.cos(), ang.sin()) * x as f64
        })
        .collect();
    pairwise_sum_complex(&terms) / (ctx.m as f64 * ctx.m as f64)
}

/// `S(t)` for every `t ∈ Z_L`, reusing one `h(x) mod L` table.
pub fn weyl_spectrum(ctx: &WeylSumContext) -> Vec<Complex64> {
    let hx = ctx.phase_table();
    let l = ctx.l as u128;
    let scale = TAU / ctx.l as f64;
    let inv_m2 = 1.0 / (ctx.m as f64 * ctx.m as f64);
    let mut out = Vec::with_capacity(ctx.l as usize);
    let mut terms = vec![Complex64::new(0.0, 0.0); hx.len()];
    for t in 0..ctx.l {
        for (term, (&phase, x)) in terms.iter_mut().zip(hx.iter().zip(ctx.j..=ctx.m)) {
            let ang = ((phase as u128 * t as u128) % l) as f64 * scale;
            *term = Complex64::new(ang.cos(), ang.sin()) * x as f64;
        }
        out.push(pairwise_sum_complex(&terms) * inv_m2);
    }
    out
}

/// Complete Gauss sum `G(a,q) = Σ_{r=0}^{q−1} e^{2πi h(r)a/q}`.
pub fn gauss_sum(h: &QuadraticPoly, a: i128, q: u64) -> Complex64 {
    assert!(q >= 1);
    let qi = q as i128;
    let terms: Vec<Complex64> = (0..qi)
        .map(|r| {
            let ang = TAU * ((h.eval_mod(r, qi) * a.rem_euclid(qi)).rem_euclid(qi)) as f64
                / q as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect();
    pairwise_sum_complex(&terms)
}

fn simpson(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, fa: Complex64, fb: Complex64) -> (Complex64, Complex64) {
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    ((fa + 4.0 * fm + fb) * ((b - a) / 6.0), fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    eps: f64,
    depth: u32,
    ok: &mut bool,
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let (left, flm) = simpson(f, a, mid, fa, fm);
    let (right, frm) = simpson(f, mid, b, fm, fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right;
    }
    adaptive(f, a, mid, fa, flm, fm, left, eps * 0.5, depth - 1, ok)
        + adaptive(f, mid, b, fm, frm, fb, right, eps * 0.5, depth - 1, ok)
}

/// `∫_1^M x·e^{2πi(αx²+βx)λ} dx` by adaptive Simpson quadrature.
pub fn phase_integral(alpha: i128, beta: i128, lambda: f64, m: u64) -> Result<Complex64> {
    assert!(alpha >= 1);
    if lambda == 0.0 {
        let m = m as f64;
        return Ok(Complex64::new(0.5 * (m * m - 1.0), 0.0));
    }
    let g = |x: f64| {
        let ang = TAU * lambda * (alpha as f64 * x * x + beta as f64 * x);
        Complex64::new(ang.cos(), ang.sin()) * x
    };
    // Panel count tracks the total phase variation so each panel is mildly
    // oscillatory before the adaptive refinement takes over.
    let cycles = (lambda.abs() * (alpha as f64 * (m as f64).powi(2) + beta.abs() as f64 * m as f64)).ceil();
    let panels = (4.0 * cycles).clamp(8.0, 4096.0) as usize;
    let eps = 1e-10 * (m as f64).powi(2) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut ok = true;
    let step = (m as f64 - 1.0) / panels as f64;
    for i in 0..panels {
        let a = 1.0 + i as f64 * step;
        let b = 1.0 + (i + 1) as f64 * step;
        let (fa, fb) = (g(a), g(b));
        let (whole, fm) = simpson(&g, a, b, fa, fb);
        total += adaptive(&g, a, b, fa, fm, fb, whole, eps, 28, &mut ok);
    }
    if !ok {
        return Err(WeylError::QuadratureNonConvergence);
    }
    Ok(total)
}

/// Closed form of the pure-quadratic integral
/// `∫_1^M x·e^{2πiαx²λ} dx = (e^{2πiαM²λ} − e^{2πiαλ})/(4πiαλ)` for `λ ≠ 0`.
pub fn phase_integral_closed_quadratic(alpha: i128, lambda: f64, m: u64) -> Complex64 {
    if lambda == 0.0 {
        let m = m as f64;
        return Complex64::new(0.5 * (m * m - 1.0), 0.0);
    }
    let e = |y: f64| {
        let ang = TAU * y;
        Complex64::new(ang.cos(), ang.sin())
    };
    let a = alpha as f64;
    let m2 = (m as f64) * (m as f64);
    (e(a * m2 * lambda) - e(a * lambda)) / (Complex64::new(0.0, 2.0 * TAU * a * lambda))
}

/// Main-term approximation of `S(t)` for `t/L = a/q + λ`:
/// `(1/qM²)·G(a,q)·e^{2πiγλ}·∫_1^M x e^{2πi(αx²+βx)λ} dx`.
///
/// The regime flags report whether the proven hypotheses
/// (`q ≤ M^0.1`, `(a,q) = 1`, `|λ| < M^−1.9`) hold; callers may probe outside
/// them, so a violation is reported rather than fatal.
#[derive(Debug, Clone, Copy)]
pub struct MajorArcApprox {
    pub main_term: Complex64,
    pub hypotheses_ok: bool,
}

pub fn major_arc_approx(ctx: &WeylSumContext, a: i128, q: u64, lambda: f64) -> Result<MajorArcApprox> {
    assert!(q >= 1);
    let hypotheses_ok = (q as f64) <= (ctx.m as f64).powf(0.1)
        && gcd_i128(a, q as i128) == 1
        && lambda.abs() < (ctx.m as f64).powf(-1.9);
    let g = gauss_sum(&ctx.h, a, q);
    let integral = phase_integral(ctx.h.a2, ctx.h.a1, lambda, ctx.m)?;
    let gamma_ang = TAU * ctx.h.a0 as f64 * lambda;
    let gamma_phase = Complex64::new(gamma_ang.cos(), gamma_ang.sin());
    let main_term = g * gamma_phase * integral / (q as f64 * ctx.m as f64 * ctx.m as f64);
    Ok(MajorArcApprox {
        main_term,
        hypotheses_ok,
    })
}

/// Weyl-inequality envelope `log M · (α/q + α/M + q/M²)^{1/2}` for `|S(t)|`
/// when `|t/L − a/q| < 1/q²` with `(a,q) = 1`.
pub fn minor_arc_bound(ctx: &WeylSumContext, q: u64) -> f64 {
    let (alpha, m) = (ctx.h.a2 as f64, ctx.m as f64);
    (m.ln()) * (alpha / q as f64 + alpha / m + q as f64 / (m * m)).sqrt()
}

/// `Σ_{t∈Z_L} |S(t)|⁶`.
pub fn sixth_moment(ctx: &WeylSumContext) -> f64 {
    let spec = weyl_spectrum(ctx);
    pairwise_sum_by(spec.len(), |i| spec[i].norm_sqr().powi(3))
}

const COUNT_BUDGET_M: u64 = 220;

/// Number of solutions of
/// `α(x₁²+x₂²+x₃²−x₄²−x₅²−x₆²) = β(x₁+x₂+x₃−x₄−x₅−x₆)` with `1 ≤ x_i ≤ M`,
/// by meet-in-the-middle over triples: two triples pair up exactly when the
/// scalar `α·Σx² − β·Σx` coincides, so sort one table of M³ keys and sum
/// squared run lengths.
pub fn count_j(alpha: i128, beta: i128, m: u64) -> Result<u128> {
    if m == 0 {
        return Ok(0);
    }
    if m > COUNT_BUDGET_M {
        return Err(WeylError::BudgetExceeded("count_j caps M at 220"));
    }
    let mi = m as i64;
    let (a, b) = (alpha as i64, beta as i64);
    let mut keys: Vec<i64> = Vec::with_capacity((m as usize).pow(3));
    for x1 in 1..=mi {
        for x2 in 1..=mi {
            let partial = a * (x1 * x1 + x2 * x2) - b * (x1 + x2);
            for x3 in 1..=mi {
                keys.push(partial + a * x3 * x3 - b * x3);
            }
        }
    }
    keys.sort_unstable();
    let mut total: u128 = 0;
    let mut i = 0;
    while i < keys.len() {
        let mut jx = i + 1;
        while jx < keys.len() && keys[jx] == keys[i] {
            jx += 1;
        }
        let run = (jx - i) as u128;
        total += run * run;
        i = jx;
    }
    Ok(total)
}

/// Number of `(x₁,…,x₆) ∈ [1,M]⁶` with `Σ₁³x − Σ₄⁶x = s` and
/// `Σ₁³x² − Σ₄⁶x² = t`, by joining triple tables keyed on the exact pair
/// (linear sum, quadratic sum).
pub fn tarry_count(s: i128, t_val: i128, m: u64) -> Result<u128> {
    if m == 0 {
        return Ok(0);
    }
    if m > COUNT_BUDGET_M {
        return Err(WeylError::BudgetExceeded("tarry_count caps M at 220"));
    }
    let mi = m as i64;
    let mut keys: Vec<(i64, i64)> = Vec::with_capacity((m as usize).pow(3));
    for x1 in 1..=mi {
        for x2 in 1..=mi {
            for x3 in 1..=mi {
                keys.push((x1 + x2 + x3, x1 * x1 + x2 * x2 + x3 * x3));
            }
        }
    }
    keys.sort_unstable();
    // Distinct keys with multiplicities.
    let mut runs: Vec<((i64, i64), u128)> = Vec::new();
    for &k in &keys {
        match runs.last_mut() {
            Some((lk, c)) if *lk == k => *c += 1,
            _ => runs.push((k, 1)),
        }
    }
    let (s, t_val) = (s as i64, t_val as i64);
    let mut total: u128 = 0;
    for &((lin, quad), c1) in &runs {
        let want = (lin - s, quad - t_val);
        if let Ok(idx) = runs.binary_search_by_key(&want, |&(k, _)| k) {
            total += c1 * runs[idx].1;
        }
    }
    Ok(total)
}

/// Per-frequency CSV table: `t,|S(t)|,class,bound,main_term_error` with a
/// schema comment line. Major frequencies get the main-term approximation
/// error at their arc's rational point; minor frequencies get the best
/// Weyl-inequality envelope over the continued-fraction approximations of
/// `t/L`.
pub fn spectrum_table_csv(ctx: &WeylSumContext, params: &crate::fourier::ArcParams) -> Result<String> {
    use crate::fourier::{classify_arc_fast, ArcClass};
    let spec = weyl_spectrum(ctx);
    let mut out = String::from("# schema: weyl-detail-v1\n");
    out.push_str(&format!("# poly: {}  L: {}  j: {}  M: {}\n", ctx.h, ctx.l, ctx.j, ctx.m));
    out.push_str("t,|S(t)|,class,bound,main_term_error\n");
    for t in 0..ctx.l {
        let mag = spec[t as usize].norm();
        let (label, bound, err) = match classify_arc_fast(t, ctx.l, params) {
            ArcClass::Zero => ("zero".to_string(), String::new(), String::new()),
            ArcClass::Major { a, q } => {
                let lambda = t as f64 / ctx.l as f64 - a as f64 / q as f64;
                let approx = major_arc_approx(ctx, a as i128, q, lambda)?;
                let err = (spec[t as usize] - approx.main_term).norm();
                ("major".to_string(), String::new(), format!("{err:.6e}"))
            }
            ArcClass::Minor => {
                let bound = crate::arith::convergents(t as i128, ctx.l as i128)
                    .into_iter()
                    .filter(|&(_, q)| q >= 1 && (q as u128) <= (ctx.m as u128).pow(2))
                    .map(|(_, q)| minor_arc_bound(ctx, q as u64))
                    .fold(f64::INFINITY, f64::min);
                ("minor".to_string(), format!("{bound:.6e}"), String::new())
            }
        };
        out.push_str(&format!("{t},{mag:.6e},{label},{bound},{err}\n"));
    }
    Ok(out)
}

/// Range conditions the asymptotic estimates assume, measured on a concrete
/// context: `α·M² ≥ L/4` and `max{α,|β|,|γ|} < M^0.03`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeReport {
    pub alpha_m2_at_least_quarter_l: bool,
    pub coeff_max: i128,
    pub coeff_cap: f64,
    pub coeffs_in_regime: bool,
}

pub fn regime_report(ctx: &WeylSumContext) -> RegimeReport {
    let alpha_m2 = ctx.h.a2 as u128 * (ctx.m as u128) * (ctx.m as u128);
    let coeff_max = ctx.h.a2.max(ctx.h.a1.abs()).max(ctx.h.a0.abs());
    let coeff_cap = (ctx.m as f64).powf(0.03);
    RegimeReport {
        alpha_m2_at_least_quarter_l: 4 * alpha_m2 >= ctx.l as u128,
        coeff_max,
        coeff_cap,
        coeffs_in_regime: (coeff_max as f64) < coeff_cap,
    }
}
