//! Normalized discrete Fourier transform over Z_N and exact arc decomposition
//! of the frequency space.
//!
//! For `F: Z_N → C` the transform is `F̂(t) = (1/N) Σ_x F(x) e^{-2πixt/N}`.
//! Nonzero frequencies split into *major* arcs (within circle distance `K/N`
//! of a reduced rational `a/q` with small `q`) and *minor* arcs (everything
//! else). Arc membership is decided in exact integer arithmetic — the
//! boundaries are sharp and floating point would misclassify near them.
//! The width `K` and the denominator cutoff are independent parameters; the
//! classical decomposition takes cutoff `K²`.

use crate::arith::{gcd_u64, ReducedFraction};
use crate::numeric::{pairwise_sum, pairwise_sum_by};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeSet;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FourierError {
    #[error("set element {element} outside [1, {n}]")]
    ElementOutOfRange { element: u64, n: u64 },
    #[error("modulus must be positive")]
    ZeroModulus,
}

/// Normalized transform of an indicator function, immutable once built.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: u64,
    set_size: u64,
    coeffs: Vec<Complex64>,
}

fn validate(elements: &[u64], n: u64) -> Result<(), FourierError> {
    if n == 0 {
        return Err(FourierError::ZeroModulus);
    }
    for &x in elements {
        if x == 0 || x > n {
            return Err(FourierError::ElementOutOfRange { element: x, n });
        }
    }
    Ok(())
}

fn bit_reverse_permute(data: &mut [Complex64]) {
    let n = data.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place radix-2 transform with sign -1 in the exponent.
fn fft_pow2(data: &mut [Complex64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    bit_reverse_permute(data);
    let mut len = 2;
    while len <= n {
        let ang = -TAU / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for chunk in data.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let u = *a;
                let v = *b * w;
                *a = u + v;
                *b = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

impl Spectrum {
    /// Transform of the indicator of `elements ⊆ [1, n]`. Uses the radix-2
    /// fast transform when `n` is a power of two, the exact-phase direct sum
    /// otherwise.
    pub fn compute(elements: &[u64], n: u64) -> Result<Spectrum, FourierError> {
        validate(elements, n)?;
        if n.is_power_of_two() && n >= 2 {
            let mut data = vec![Complex64::new(0.0, 0.0); n as usize];
            for &x in elements {
                data[(x % n) as usize] = Complex64::new(1.0, 0.0);
            }
            fft_pow2(&mut data);
            let scale = 1.0 / n as f64;
            for c in &mut data {
                *c *= scale;
            }
            Ok(Spectrum {
                n,
                set_size: elements.len() as u64,
                coeffs: data,
            })
        } else {
            Self::direct(elements, n)
        }
    }

    /// Direct O(N·|A|) evaluation with phases reduced mod N before the
    /// conversion to floating point. This is the oracle the fast path is
    /// checked against.
    pub fn direct(elements: &[u64], n: u64) -> Result<Spectrum, FourierError> {
        validate(elements, n)?;
        let mut coeffs = Vec::with_capacity(n as usize);
        let mut terms = vec![Complex64::new(0.0, 0.0); elements.len()];
        for t in 0..n {
            for (term, &x) in terms.iter_mut().zip(elements) {
                let phase = ((x as u128 * t as u128) % n as u128) as f64;
                let ang = -TAU * phase / n as f64;
                *term = Complex64::new(ang.cos(), ang.sin());
            }
            coeffs.push(crate::numeric::pairwise_sum_complex(&terms) / n as f64);
        }
        Ok(Spectrum {
            n,
            set_size: elements.len() as u64,
            coeffs,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn set_size(&self) -> u64 {
        self.set_size
    }

    /// `Â(t)`, indexed mod N.
    pub fn coeff(&self, t: i64) -> Complex64 {
        self.coeffs[t.rem_euclid(self.n as i64) as usize]
    }

    pub fn density(&self) -> f64 {
        self.set_size as f64 / self.n as f64
    }

    /// `Σ_t |Â(t)|²`, cascade-summed.
    pub fn l2_mass(&self) -> f64 {
        pairwise_sum_by(self.coeffs.len(), |i| self.coeffs[i].norm_sqr())
    }
}

/// Arc geometry: a width `K` (kept as an exact rational, in frequency units)
/// and a largest admissible denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArcParams {
    width_num: i128,
    width_den: i128,
    pub q_max: u64,
}

impl ArcParams {
    pub fn integer(k: u64, q_max: u64) -> ArcParams {
        assert!(k >= 1 && q_max >= 1);
        ArcParams {
            width_num: k as i128,
            width_den: 1,
            q_max,
        }
    }

    /// Width `K²` cutoff, the classical choice.
    pub fn standard(k: u64) -> ArcParams {
        ArcParams::integer(k, k * k)
    }

    pub fn rational(width: ReducedFraction, q_max: u64) -> ArcParams {
        assert!(width.numerator() > 0 && q_max >= 1);
        ArcParams {
            width_num: width.numerator(),
            width_den: width.denominator(),
            q_max,
        }
    }

    pub fn width_f64(&self) -> f64 {
        self.width_num as f64 / self.width_den as f64
    }

    /// Exact test for `|t/n - a/q| < K/n` on the circle.
    pub fn in_arc(&self, t: u64, n: u64, a: u64, q: u64) -> bool {
        let (t, n, a, q) = (t as i128, n as i128, a as i128, q as i128);
        let d = (t * q - a * n).abs();
        let d = d.min((n * q - d).abs());
        d * self.width_den < self.width_num * q
    }
}

/// Classification of one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcClass {
    Zero,
    Major { a: u64, q: u64 },
    Minor,
}

impl ArcClass {
    pub fn fraction(&self) -> Option<ReducedFraction> {
        match self {
            ArcClass::Major { a, q } => Some(ReducedFraction::new(*a as i128, *q as i128).unwrap()),
            _ => None,
        }
    }
}

/// Picks the numerator for a frequency known to have an in-width coprime
/// numerator at denominator `q`: the closest candidate, smaller `a` on ties.
fn best_numerator(t: u64, n: u64, q: u64, params: &ArcParams) -> Option<u64> {
    let a0 = (t as u128 * q as u128 / n as u128) as u64;
    let mut best: Option<(i128, u64)> = None;
    for a in [a0, a0 + 1] {
        if a > q {
            continue;
        }
        // a = 0 and a = q are the circle point 0 ≡ 1, reduced denominator 1.
        let (ar, qr) = if a == 0 || a == q { (1, 1) } else { (a, q) };
        if qr != q || gcd_u64(ar, qr) != 1 {
            continue;
        }
        if !params.in_arc(t, n, ar, qr) {
            continue;
        }
        let d = (t as i128 * q as i128 - a as i128 * n as i128).abs();
        if best.is_none_or(|(bd, ba)| d < bd || (d == bd && ar < ba)) {
            best = Some((d, ar));
        }
    }
    best.map(|(_, a)| a)
}

/// Reference classifier: scans denominators in increasing order and, for each,
/// the full window of candidate numerators. Exact and transparent; cost grows
/// with `q_max`, so large decompositions use [`classify_arc_fast`].
pub fn classify_arc(t: u64, n: u64, params: &ArcParams) -> ArcClass {
    assert!(t < n);
    if t == 0 {
        return ArcClass::Zero;
    }
    for q in 1..=params.q_max {
        // Candidate numerators lie within the width window around t·q/n.
        let center = t as i128 * q as i128;
        let half = params.width_num * q as i128 / params.width_den + 1;
        let lo = ((center - half) / n as i128 - 1).max(0);
        let hi = ((center + half) / n as i128 + 1).min(q as i128);
        let mut found: Option<(i128, u64)> = None;
        for a in lo..=hi {
            let a = a as u64;
            // a = 0 and a = q are the circle point 0 ≡ 1 with denominator 1,
            // examined when q = 1; they must not shadow larger q.
            let (ar, qr) = if a == 0 || a == q { (1, 1) } else { (a, q) };
            if qr != q || gcd_u64(ar, qr) != 1 || !params.in_arc(t, n, ar, qr) {
                continue;
            }
            let d = {
                let raw = (t as i128 * q as i128 - a as i128 * n as i128).abs();
                raw.min(n as i128 * q as i128 - raw)
            };
            if found.is_none_or(|(bd, ba)| d < bd || (d == bd && ar < ba)) {
                found = Some((d, ar));
            }
        }
        if let Some((_, a)) = found {
            return ArcClass::Major { a, q };
        }
    }
    ArcClass::Minor
}

/// Smallest-denominator fraction in the open interval `(ln/ld, hn/hd)`.
fn simplest_between(ln: i128, ld: i128, hn: i128, hd: i128) -> (i128, i128) {
    debug_assert!(ld > 0 && hd > 0 && ln * hd < hn * ld);
    let floor_lo = ln.div_euclid(ld);
    let i = floor_lo + 1;
    if i * hd < hn {
        return (i, 1);
    }
    let fln = ln - floor_lo * ld;
    let fhn = hn - floor_lo * hd;
    if fln == 0 {
        // Interval (0, fhn/hd) locally: the minimal denominator admits a = 1.
        let q = hd.div_euclid(fhn) + 1;
        return (floor_lo * q + 1, q);
    }
    // Invert: x ∈ (fln/ld, fhn/hd) ⇔ 1/x ∈ (hd/fhn, ld/fln).
    let (a, q) = simplest_between(hd, fhn, ld, fln);
    (floor_lo * a + q, a)
}

/// Same classification as [`classify_arc`], found by Stern-Brocot descent
/// in O(log n) instead of a denominator scan.
pub fn classify_arc_fast(t: u64, n: u64, params: &ArcParams) -> ArcClass {
    assert!(t < n);
    if t == 0 {
        return ArcClass::Zero;
    }
    let (wn, wd) = (params.width_num, params.width_den);
    let (ti, ni) = (t as i128, n as i128);
    // Distance to the circle point 0 ≡ 1 (denominator 1).
    if ti * wd < wn || (ni - ti) * wd < wn {
        return ArcClass::Major { a: 1, q: 1 };
    }
    // The interval (t/n - K/n, t/n + K/n) now sits inside [0, 1].
    let lo = ReducedFraction::new(ti * wd - wn, ni * wd).unwrap();
    let hi = ReducedFraction::new(ti * wd + wn, ni * wd).unwrap();
    let (_, q) = simplest_between(
        lo.numerator(),
        lo.denominator(),
        hi.numerator(),
        hi.denominator(),
    );
    if q as u128 > params.q_max as u128 {
        return ArcClass::Minor;
    }
    let q = q as u64;
    match best_numerator(t, n, q, params) {
        Some(a) => ArcClass::Major { a, q },
        // Unreachable for a minimal denominator, kept as a safe fallback.
        None => ArcClass::Minor,
    }
}

/// Every `(a, q)` with `q <= q_max`, `(a,q) = 1`, and `t ∈ M_{a,q}`: in sloppy
/// regimes a frequency can belong to several arcs, and honest membership
/// checks need all of them.
pub fn arc_memberships(t: u64, n: u64, params: &ArcParams) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if t == 0 {
        return out;
    }
    for q in 1..=params.q_max {
        let center = t as i128 * q as i128;
        let half = params.width_num * q as i128 / params.width_den + 1;
        let lo = ((center - half) / n as i128 - 1).max(0);
        let hi = ((center + half) / n as i128 + 1).min(q as i128);
        for a in lo..=hi {
            let a = a as u64;
            let (ar, qr) = if a == 0 || a == q { (1, 1) } else { (a, q) };
            if qr != q || gcd_u64(ar, qr) != 1 {
                continue;
            }
            if params.in_arc(t, n, ar, qr) && !out.contains(&(ar, qr)) {
                out.push((ar, qr));
            }
        }
    }
    out
}

/// Full classification table for Z_N, immutable after construction.
#[derive(Debug, Clone)]
pub struct ArcDecomposition {
    n: u64,
    params: ArcParams,
    table: Vec<ArcClass>,
}

impl ArcDecomposition {
    pub fn build(n: u64, params: ArcParams) -> ArcDecomposition {
        let table = (0..n).map(|t| classify_arc_fast(t, n, &params)).collect();
        ArcDecomposition { n, params, table }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn params(&self) -> &ArcParams {
        &self.params
    }

    pub fn class(&self, t: u64) -> ArcClass {
        self.table[t as usize]
    }

    pub fn classes(&self) -> &[ArcClass] {
        &self.table
    }
}

/// Enumerates the nonzero frequencies of `M_q(K)`: every `t` within width of
/// some reduced `a/q` for this exact `q`.
fn mq_frequencies(n: u64, q: u64, params: &ArcParams) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let (wn, wd) = (params.width_num, params.width_den);
    for a in 1..=q {
        if gcd_u64(a, q) != 1 {
            continue;
        }
        let center = a as i128 * n as i128; // t·q near this
        let half = wn * q as i128 / wd + 1;
        let t_lo = (center - half) / q as i128 - 1;
        let t_hi = (center + half) / q as i128 + 1;
        for t in t_lo..=t_hi {
            let tm = t.rem_euclid(n as i128) as u64;
            if tm != 0 && params.in_arc(tm, n, a, q) {
                out.insert(tm);
            }
        }
    }
    out
}

/// `Σ_{t ∈ M_q(K)} |Â(t)|²`: the L² mass on arcs with reduced denominator
/// exactly `q`.
pub fn mass_on_mq(spectrum: &Spectrum, q: u64, params: &ArcParams) -> f64 {
    let freqs: Vec<u64> = mq_frequencies(spectrum.n(), q, params).into_iter().collect();
    let terms: Vec<f64> = freqs
        .iter()
        .map(|&t| spectrum.coeff(t as i64).norm_sqr())
        .collect();
    pairwise_sum(&terms)
}

/// Argmax of [`mass_on_mq`] over `q <= q_cap`; ties go to the smallest `q`.
pub fn max_mass_denominator(spectrum: &Spectrum, q_cap: u64, params: &ArcParams) -> (u64, f64) {
    let mut best = (1u64, f64::NEG_INFINITY);
    for q in 1..=q_cap {
        let m = mass_on_mq(spectrum, q, params);
        if m > best.1 {
            best = (q, m);
        }
    }
    best
}

/// CSV export: `t, re, im, mag2, class, a, q` with a schema comment line.
pub fn spectrum_csv(spectrum: &Spectrum, params: &ArcParams) -> String {
    let mut out = String::from("# schema: spectrum-v1\nt,re,im,mag2,class,a,q\n");
    for t in 0..spectrum.n() {
        let c = spectrum.coeff(t as i64);
        let class = classify_arc_fast(t, spectrum.n(), params);
        let (label, a, q) = match class {
            ArcClass::Zero => ("zero", String::new(), String::new()),
            ArcClass::Minor => ("minor", String::new(), String::new()),
            ArcClass::Major { a, q } => ("major", a.to_string(), q.to_string()),
        };
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{},{},{}\n",
            t,
            c.re,
            c.im,
            c.norm_sqr(),
            label,
            a,
            q
        ));
    }
    out
}
