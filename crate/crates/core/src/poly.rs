//! Integer quadratics: factorization over the rationals, the intersectivity
//! decision with concrete witnesses, coherent root systems `r_d`, the derived
//! auxiliary polynomials `f_d`, and content bounds.
//!
//! A quadratic is *intersective* (has a root modulo every positive integer)
//! exactly when it has rational roots with coprime denominators. The
//! factorization drives everything else: the two linear branches supply
//! residues modulo prime powers, and the Chinese Remainder Theorem glues them
//! into a root system `{r_d}` with `r_d ≡ r_s (mod s)` whenever `s | d`.

use crate::arith::{
    crt_combine, exact_sqrt, factorize, gcd_i128, mod_inverse, p_adic_valuation,
    ArithError, ReducedFraction,
};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum PolyError {
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("polynomial is not intersective")]
    NotIntersective,
    #[error("discriminant is a perfect square; no witness prime exists")]
    NotIrrational,
    #[error("leading coefficient must be positive for this operation")]
    NonPositiveLeading,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, PolyError>;

/// `a2·x² + a1·x + a0` with exact integer evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadraticPoly {
    pub a2: i128,
    pub a1: i128,
    pub a0: i128,
}

impl QuadraticPoly {
    pub fn new(a2: i128, a1: i128, a0: i128) -> Result<Self> {
        if a2 == 0 {
            return Err(PolyError::ZeroLeading);
        }
        Ok(QuadraticPoly { a2, a1, a0 })
    }

    pub fn eval(&self, x: i128) -> i128 {
        (self.a2 * x + self.a1) * x + self.a0
    }

    pub fn checked_eval(&self, x: i128) -> Result<i128> {
        self.a2
            .checked_mul(x)
            .and_then(|t| t.checked_add(self.a1))
            .and_then(|t| t.checked_mul(x))
            .and_then(|t| t.checked_add(self.a0))
            .ok_or(PolyError::Arith(ArithError::Overflow("poly eval")))
    }

    /// `f(x) mod q`, safe for any `x` and `q >= 1`.
    pub fn eval_mod(&self, x: i128, q: i128) -> i128 {
        let xm = x.rem_euclid(q);
        ((self.a2.rem_euclid(q) * xm + self.a1.rem_euclid(q)).rem_euclid(q) * xm
            + self.a0.rem_euclid(q))
        .rem_euclid(q)
    }

    pub fn derivative_at(&self, x: i128) -> i128 {
        2 * self.a2 * x + self.a1
    }

    pub fn discriminant(&self) -> Result<i128> {
        let sq = self
            .a1
            .checked_mul(self.a1)
            .ok_or(ArithError::Overflow("discriminant"))?;
        let cross = self
            .a2
            .checked_mul(self.a0)
            .and_then(|t| t.checked_mul(4))
            .ok_or(ArithError::Overflow("discriminant"))?;
        sq.checked_sub(cross)
            .ok_or(PolyError::Arith(ArithError::Overflow("discriminant")))
    }

    /// gcd of the linear and quadratic coefficients, the quantity that controls
    /// Gauss-sum degeneracy. `gcd(0, n) = n`.
    pub fn content(&self) -> i128 {
        gcd_i128(self.a1, self.a2)
    }

    /// True when `f(x) ≡ 0 (mod q)` has a solution, by exhaustive residue
    /// scan. Incremental: `f(x+1) − f(x) = 2·a2·x + a2 + a1`, so the walk is
    /// two modular additions per residue.
    pub fn has_root_mod(&self, q: u64) -> bool {
        if q == 1 {
            return true;
        }
        let qi = q as i128;
        let mut val = self.a0.rem_euclid(qi) as u64;
        let mut delta = (self.a2 + self.a1).rem_euclid(qi) as u64;
        let step = (2 * self.a2).rem_euclid(qi) as u64;
        for _ in 0..q {
            if val == 0 {
                return true;
            }
            val += delta;
            if val >= q {
                val -= q;
            }
            delta += step;
            if delta >= q {
                delta -= q;
            }
        }
        false
    }
}

impl fmt::Display for QuadraticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a2, self.a1, self.a0)
    }
}

impl FromStr for QuadraticPoly {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected \"a2,a1,a0\", got {s:?}"));
        }
        let coeff = |p: &str| p.parse::<i128>().map_err(|e| format!("bad coefficient {p:?}: {e}"));
        let poly = QuadraticPoly {
            a2: coeff(parts[0])?,
            a1: coeff(parts[1])?,
            a0: coeff(parts[2])?,
        };
        if poly.a2 == 0 {
            return Err("leading coefficient must be nonzero".into());
        }
        Ok(poly)
    }
}

/// Outcome of factoring a quadratic over the rationals.
///
/// `Factored` stores `f = a(αx+β)(γx+λ)` with `(α,β) = (γ,λ) = 1`, both
/// `α, γ > 0`, and the branches ordered lexicographically by `(α, β)` so that
/// downstream root-system construction is deterministic. `DoubleRoot` stores
/// `f = a(x−b)²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RationalRootForm {
    Factored {
        a: i128,
        alpha: i128,
        beta: i128,
        gamma: i128,
        lambda: i128,
    },
    DoubleRoot {
        a: i128,
        root: ReducedFraction,
    },
    Irrational,
}

impl fmt::Display for RationalRootForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn linear(c1: i128, c0: i128) -> String {
            let x = if c1 == 1 {
                "x".to_string()
            } else {
                format!("{c1}x")
            };
            match c0 {
                0 => format!("({x})"),
                c if c > 0 => format!("({x}+{c})"),
                c => format!("({x}{c})"),
            }
        }
        match self {
            RationalRootForm::Factored {
                a,
                alpha,
                beta,
                gamma,
                lambda,
            } => {
                if *a != 1 {
                    write!(f, "{a}")?;
                }
                write!(f, "{}{}", linear(*alpha, *beta), linear(*gamma, *lambda))
            }
            RationalRootForm::DoubleRoot { a, root } => {
                if *a != 1 {
                    write!(f, "{a}")?;
                }
                if root.numerator() == 0 {
                    write!(f, "x^2")
                } else if root.numerator() > 0 {
                    write!(f, "(x-{root})^2")
                } else {
                    write!(f, "(x+{})", -root.numerator())?;
                    if !root.is_integer() {
                        write!(f, "/{}", root.denominator())?;
                    }
                    write!(f, ")^2")
                }
            }
            RationalRootForm::Irrational => write!(f, "irrational"),
        }
    }
}

/// Exact case analysis on the discriminant. The content `gcd(a2,a1,a0)` is
/// divided out before root analysis and reapplied, so scaled polynomials
/// factor predictably.
pub fn factor_over_rationals(f: &QuadraticPoly) -> Result<RationalRootForm> {
    if f.a2 == 0 {
        return Err(PolyError::ZeroLeading);
    }
    let disc = f.discriminant()?;
    if disc < 0 {
        return Ok(RationalRootForm::Irrational);
    }
    if disc == 0 {
        let root = ReducedFraction::new(-f.a1, 2 * f.a2)?;
        return Ok(RationalRootForm::DoubleRoot { a: f.a2, root });
    }
    let Some(s) = exact_sqrt(disc) else {
        return Ok(RationalRootForm::Irrational);
    };
    let c = gcd_i128(gcd_i128(f.a2, f.a1), f.a0);
    let sign = if f.a2 > 0 { 1 } else { -1 };
    let g2 = f.a2 / (c * sign);
    // Roots of the primitive part (same roots as f).
    let r1 = ReducedFraction::new(-f.a1 + s, 2 * f.a2)?;
    let r2 = ReducedFraction::new(-f.a1 - s, 2 * f.a2)?;
    let mut branches = [
        (r1.denominator(), -r1.numerator()),
        (r2.denominator(), -r2.numerator()),
    ];
    branches.sort_unstable();
    let [(alpha, beta), (gamma, lambda)] = branches;
    // Gauss: a primitive integer quadratic with rational roots p1/q1, p2/q2
    // splits as ±(q1·x − p1)(q2·x − p2), so g2 = ±q1·q2 exactly.
    debug_assert_eq!(g2.abs(), alpha * gamma);
    let a = c * sign * g2.signum();
    let form = RationalRootForm::Factored {
        a,
        alpha,
        beta,
        gamma,
        lambda,
    };
    debug_assert_eq!(
        (
            a * alpha * gamma,
            a * (alpha * lambda + beta * gamma),
            a * beta * lambda
        ),
        (f.a2, f.a1, f.a0),
        "factored form must reproduce {f}"
    );
    Ok(form)
}

/// Intersectivity decision. A failed decision carries a modulus with no root;
/// the witness is absent only when the bounded search was exhausted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Intersectivity {
    Intersective,
    NotIntersective { witness: Option<u64> },
}

impl Intersectivity {
    pub fn is_intersective(&self) -> bool {
        matches!(self, Intersectivity::Intersective)
    }
}

const WITNESS_SCAN_CAP: u64 = 1 << 31;

/// Scans powers of the obstructing prime starting from the exponent where the
/// obstruction is provable (odd p-adic valuation of the discriminant makes
/// `y² ≡ disc` unsolvable once the modulus exceeds it; divisor obstructions
/// bite one power past the valuation of the scaled-out factor). Each
/// candidate is still verified by exhaustive residue scan before being
/// returned.
fn verified_witness(f: &QuadraticPoly, p: u64, start_exp: u32) -> Option<u64> {
    let mut q: u64 = p.checked_pow(start_exp)?;
    while q <= WITNESS_SCAN_CAP {
        if !f.has_root_mod(q) {
            return Some(q);
        }
        q = q.checked_mul(p)?;
    }
    None
}

/// Decides whether `f` has a root modulo every positive integer.
///
/// True exactly when `f` factors over the rationals with coprime branch
/// denominators (an integer root and an integer double root are special cases).
/// A negative decision is accompanied by a verified modulus with no root,
/// found by scanning powers of the obstructing prime.
pub fn is_intersective(f: &QuadraticPoly) -> Result<Intersectivity> {
    match factor_over_rationals(f)? {
        RationalRootForm::Factored {
            a, alpha, gamma, ..
        } => {
            let g = gcd_i128(alpha, gamma);
            if g == 1 {
                return Ok(Intersectivity::Intersective);
            }
            // A prime dividing both denominators blocks every root modulo
            // p^(v_p(a)+1): both linear factors are units at p.
            let p = factorize(g as u128)?.factors[0].0;
            let v = p_adic_valuation(a, p)?;
            Ok(Intersectivity::NotIntersective {
                witness: verified_witness(f, p, v + 1),
            })
        }
        RationalRootForm::DoubleRoot { root, .. } => {
            if root.is_integer() {
                return Ok(Intersectivity::Intersective);
            }
            let p = factorize(root.denominator() as u128)?.factors[0].0;
            let c = gcd_i128(gcd_i128(f.a2, f.a1), f.a0);
            let v = p_adic_valuation(c, p)?;
            Ok(Intersectivity::NotIntersective {
                witness: verified_witness(f, p, v + 1),
            })
        }
        RationalRootForm::Irrational => {
            let p = witness_prime(f)?;
            // The square obstruction is provable one power past the
            // discriminant's p-adic valuation.
            let v = p_adic_valuation(f.discriminant()?, p)?;
            Ok(Intersectivity::NotIntersective {
                witness: verified_witness(f, p, v + 1),
            })
        }
    }
}

/// A prime `p` such that the discriminant is not a square in the `p`-adics:
/// 3 when the discriminant is minus a perfect square, otherwise the smallest
/// prime dividing the discriminant to an odd power. Requires the irrational
/// case.
pub fn witness_prime(f: &QuadraticPoly) -> Result<u64> {
    let disc = f.discriminant()?;
    if exact_sqrt(disc).is_some() {
        return Err(PolyError::NotIrrational);
    }
    if disc < 0 && exact_sqrt(-disc).is_some() {
        return Ok(3);
    }
    let fact = factorize(disc.unsigned_abs())?;
    fact.factors
        .iter()
        .find(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p)
        .ok_or(PolyError::NotIrrational)
}

/// Canonical root data for an intersective quadratic: either an integer double
/// root, or the two ordered linear branches with coprime denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RootData {
    Double { root: i128 },
    Branches { alpha: i128, beta: i128, gamma: i128, lambda: i128 },
}

fn root_data(f: &QuadraticPoly) -> Result<RootData> {
    match factor_over_rationals(f)? {
        RationalRootForm::Factored {
            alpha,
            beta,
            gamma,
            lambda,
            ..
        } => {
            if gcd_i128(alpha, gamma) != 1 {
                return Err(PolyError::NotIntersective);
            }
            Ok(RootData::Branches {
                alpha,
                beta,
                gamma,
                lambda,
            })
        }
        RationalRootForm::DoubleRoot { root, .. } => {
            if !root.is_integer() {
                return Err(PolyError::NotIntersective);
            }
            Ok(RootData::Double {
                root: root.numerator(),
            })
        }
        RationalRootForm::Irrational => Err(PolyError::NotIntersective),
    }
}

fn shift_into_range(r: i128, d: i128) -> i128 {
    let m = r.rem_euclid(d);
    if m == 0 {
        0
    } else {
        m - d
    }
}

fn root_for_data(data: &RootData, d: u64) -> Result<i128> {
    let d = d as i128;
    if d == 1 {
        return Ok(0);
    }
    match *data {
        RootData::Double { root } => Ok(shift_into_range(root, d)),
        RootData::Branches {
            alpha,
            beta,
            gamma,
            lambda,
        } => {
            // Canonical prime partition: a prime power of d is routed to the
            // first branch unless its prime divides alpha (then coprimality of
            // the denominators guarantees it misses gamma).
            let mut congruences: Vec<(i128, i128)> = Vec::new();
            for &(p, e) in &factorize(d as u128)?.factors {
                let m = (p as i128)
                    .checked_pow(e)
                    .ok_or(ArithError::Overflow("prime power"))?;
                let (den, num) = if alpha.rem_euclid(p as i128) != 0 {
                    (alpha, -beta)
                } else {
                    (gamma, -lambda)
                };
                let residue = num.rem_euclid(m) * mod_inverse(den, m)? % m;
                congruences.push((residue.rem_euclid(m), m));
            }
            let (r, modulus) = crt_combine(&congruences)?;
            debug_assert_eq!(modulus, d);
            Ok(shift_into_range(r, d))
        }
    }
}

/// The coherent root `r_d ∈ (−d, 0]` with `f(r_d) ≡ 0 (mod d)` and
/// `r_d ≡ r_s (mod s)` whenever `s | d`.
pub fn root_system(f: &QuadraticPoly, d: u64) -> Result<i128> {
    assert!(d >= 1);
    let data = root_data(f)?;
    let r = root_for_data(&data, d)?;
    debug_assert_eq!(f.eval_mod(r, d as i128), 0);
    Ok(r)
}

fn auxiliary_for_root(f: &QuadraticPoly, d: u64, r: i128) -> Result<QuadraticPoly> {
    let d = d as i128;
    let fr = f.checked_eval(r)?;
    debug_assert_eq!(fr.rem_euclid(d), 0);
    Ok(QuadraticPoly {
        a2: f
            .a2
            .checked_mul(d)
            .ok_or(ArithError::Overflow("auxiliary"))?,
        a1: f.derivative_at(r),
        a0: fr / d,
    })
}

/// The auxiliary polynomial `f_d`: for a double root `f = a(x−b)²` this is
/// `a·x²` for every `d`; otherwise `f(r_d + d·x)/d`, which is integral.
pub fn auxiliary_poly(f: &QuadraticPoly, d: u64) -> Result<QuadraticPoly> {
    assert!(d >= 1);
    match root_data(f)? {
        RootData::Double { .. } => Ok(QuadraticPoly {
            a2: f.a2,
            a1: 0,
            a0: 0,
        }),
        data @ RootData::Branches { .. } => {
            let r = root_for_data(&data, d)?;
            auxiliary_for_root(f, d, r)
        }
    }
}

/// Upper bound for `content(f_d)` valid for every `d`: `|a·(αλ−βγ)|` in the
/// two-branch case, exactly `|a|` in the double-root case. `None` when `f` is
/// not intersective.
pub fn content_bound(f: &QuadraticPoly) -> Option<i128> {
    match factor_over_rationals(f).ok()? {
        RationalRootForm::Factored {
            a,
            alpha,
            beta,
            gamma,
            lambda,
        } => {
            if gcd_i128(alpha, gamma) == 1 {
                Some((a * (alpha * lambda - beta * gamma)).abs())
            } else {
                None
            }
        }
        RationalRootForm::DoubleRoot { a, root } => root.is_integer().then(|| a.abs()),
        RationalRootForm::Irrational => None,
    }
}

/// Precomputed `d → (r_d, f_d)` table for one intersective quadratic.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct AuxiliaryFamily {
    base: QuadraticPoly,
    table: Vec<(i128, QuadraticPoly)>,
}

impl AuxiliaryFamily {
    pub fn build(f: &QuadraticPoly, d_max: u64) -> Result<Self> {
        let data = root_data(f)?;
        let mut table = Vec::with_capacity(d_max as usize);
        for d in 1..=d_max {
            let r = root_for_data(&data, d)?;
            debug_assert_eq!(f.eval_mod(r, d as i128), 0);
            let fd = match data {
                RootData::Double { .. } => QuadraticPoly {
                    a2: f.a2,
                    a1: 0,
                    a0: 0,
                },
                RootData::Branches { .. } => auxiliary_for_root(f, d, r)?,
            };
            table.push((r, fd));
        }
        Ok(AuxiliaryFamily { base: *f, table })
    }

    pub fn base(&self) -> &QuadraticPoly {
        &self.base
    }

    pub fn d_max(&self) -> u64 {
        self.table.len() as u64
    }

    pub fn root(&self, d: u64) -> i128 {
        self.table[d as usize - 1].0
    }

    pub fn poly(&self, d: u64) -> &QuadraticPoly {
        &self.table[d as usize - 1].1
    }
}
