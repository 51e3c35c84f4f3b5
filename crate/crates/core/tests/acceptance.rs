//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured quantities (visible with `--nocapture`). Oracles here are
//! independent of the library paths they check: exhaustive enumerations,
//! subset scans, and closed forms computed in test code.

use quaddiff::arith::{gcd_i128, ReducedFraction};
use quaddiff::fourier::Spectrum;
use quaddiff::iterate::{
    blow_up, lemma_cr_check, orthogonality_sum, rational_sumset, verify_projection_inheritance,
    CrInstance, FrequencySet, IterationParams,
};
use quaddiff::poly::{
    auxiliary_poly, content_bound, factor_over_rationals, is_intersective, AuxiliaryFamily,
    Intersectivity, QuadraticPoly, RationalRootForm,
};
use quaddiff::rng::SplitMix64;
use quaddiff::sets::{
    extremal_difference_free, greedy_difference_free, image_up_to, is_difference_free, IntegerSet,
    SolverBudget,
};
use quaddiff::weyl::{
    count_j, gauss_sum, major_arc_approx, make_context, weyl_sum, weyl_spectrum,
};
use std::time::Instant;

fn p(s: &str) -> QuadraticPoly {
    s.parse().unwrap()
}

/// Twenty intersective quadratics: three double-root cases and seventeen
/// two-branch cases with coprime denominators, all primitive except the
/// scaled double root.
fn corpus() -> Vec<QuadraticPoly> {
    [
        "1,0,0",    // x²
        "1,-2,1",   // (x−1)²
        "3,-30,75", // 3(x−5)²
        "1,1,0",    // x(x+1)
        "1,0,-1",   // (x−1)(x+1)
        "2,1,0",    // x(2x+1)
        "6,5,1",    // (2x+1)(3x+1)
        "3,7,2",    // (x+2)(3x+1)
        "6,1,-2",   // (2x−1)(3x+2)
        "5,-13,-6", // (x−3)(5x+2)
        "1,3,2",    // (x+1)(x+2)
        "2,7,3",    // (2x+1)(x+3)
        "15,8,1",   // (3x+1)(5x+1)
        "35,12,1",  // (5x+1)(7x+1)
        "6,-1,-1",  // (2x−1)(3x+1)
        "4,1,0",    // x(4x+1)
        "2,5,-12",  // (x+4)(2x−3)
        "12,7,1",   // (3x+1)(4x+1)
        "10,9,2",   // (2x+1)(5x+2)
        "7,-11,-6", // (x−2)(7x+3)
    ]
    .iter()
    .map(|s| p(s))
    .collect()
}

fn pass(n: u32, detail: &str, start: Instant) {
    println!(
        "[PASS] criterion {n}: {detail} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance_01_plancherel() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x01);
    let mut worst: f64 = 0.0;
    for &n in &[128u64, 256, 1024, 4096] {
        for _ in 0..100 {
            let density = 0.05 + 0.9 * rng.next_f64();
            let mut set: Vec<u64> = (1..=n).filter(|_| rng.next_f64() < density).collect();
            if set.is_empty() {
                set.push(1 + rng.next_below(n));
            }
            let spec = Spectrum::compute(&set, n).unwrap();
            let expect = set.len() as f64 / n as f64;
            let rel = (spec.l2_mass() - expect).abs() / expect;
            worst = worst.max(rel);
            assert!(rel <= 1e-9, "N={n}: relative Plancherel error {rel}");
        }
    }
    pass(1, &format!("Plancherel on 400 random sets, worst rel err {worst:.2e}"), start);
}

#[test]
fn acceptance_02_gauss_sums() {
    let start = Instant::now();
    // |G(a,q)| = √q for h = x², odd q, (a,q) = 1.
    let sq = p("1,0,0");
    let mut worst: f64 = 0.0;
    for q in (1..=101u64).step_by(2) {
        for a in 1..=q {
            if gcd_i128(a as i128, q as i128) != 1 {
                continue;
            }
            let dev = (gauss_sum(&sq, a as i128, q).norm() - (q as f64).sqrt()).abs();
            worst = worst.max(dev);
            assert!(dev <= 1e-9, "|G({a},{q})| deviates by {dev}");
        }
    }
    // |G(a,q)| <= 2·sqrt(content(h)·q) across the corpus.
    let mut worst_ratio: f64 = 0.0;
    for h in corpus() {
        let c = h.content() as f64;
        for q in 1..=101u64 {
            for a in 1..=q {
                if gcd_i128(a as i128, q as i128) != 1 {
                    continue;
                }
                let ratio = gauss_sum(&h, a as i128, q).norm() / (c * q as f64).sqrt();
                worst_ratio = worst_ratio.max(ratio);
                assert!(ratio <= 2.0, "{h}: |G({a},{q})| ratio {ratio}");
            }
        }
    }
    pass(
        2,
        &format!("Gauss magnitudes exact to {worst:.2e}; corpus ratio max {worst_ratio:.3} <= 2"),
        start,
    );
}

#[test]
fn acceptance_03_major_arc_decay() {
    let start = Instant::now();
    let sq = p("1,0,0");
    let mut slopes = Vec::new();
    for &q in &[1u64, 2, 3, 5] {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for exp in 8..=14u32 {
            let m = 1u64 << exp;
            // L: a multiple of q with context range exactly [1, m].
            let l0 = 3 * (m + 1) * (m + 1);
            let l = l0 - l0 % q;
            let ctx = make_context(sq, l).unwrap();
            assert_eq!(ctx.m, m, "context range mismatch at q={q}, M={m}");
            let t = l / q;
            let exact = weyl_sum(&ctx, t);
            let approx = major_arc_approx(&ctx, 1, q, 0.0).unwrap();
            let err = (exact - approx.main_term).norm().max(1e-18);
            points.push(((m as f64).ln(), err.ln()));
        }
        let n = points.len() as f64;
        let (sx, sy): (f64, f64) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = points
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope <= -0.5, "q={q}: log-log error slope {slope} > -0.5");
        slopes.push((q, slope));
    }
    pass(3, &format!("main-term error slopes {slopes:?} all <= -0.5"), start);
}

#[test]
fn acceptance_04_s0_floor() {
    let start = Instant::now();
    let mut count = 0u32;
    for h in corpus() {
        for &l in &[1000u64, 3000, 10000, 30000] {
            let ctx = make_context(h, l).unwrap_or_else(|e| panic!("context ({h}, {l}): {e}"));
            assert!(
                ctx.s0_at_least_quarter(),
                "S(0) = {} < 1/4 for ({h}, L={l})",
                ctx.s0()
            );
            count += 1;
        }
    }
    pass(4, &format!("S(0) >= 1/4 exactly on all {count} corpus contexts"), start);
}

fn count_j_exhaustive(alpha: i128, beta: i128, m: u64) -> u128 {
    let mi = m as i128;
    let mut total = 0u128;
    for x1 in 1..=mi {
        for x2 in 1..=mi {
            for x3 in 1..=mi {
                for x4 in 1..=mi {
                    for x5 in 1..=mi {
                        for x6 in 1..=mi {
                            let qd = x1 * x1 + x2 * x2 + x3 * x3 - x4 * x4 - x5 * x5 - x6 * x6;
                            let ln = x1 + x2 + x3 - x4 - x5 - x6;
                            if alpha * qd == beta * ln {
                                total += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    total
}

#[test]
fn acceptance_05_sixth_moment() {
    let start = Instant::now();
    // Meet-in-the-middle equals full 6-loop enumeration for M <= 12.
    for &(alpha, beta) in &[(1i128, 0i128), (1, 1), (2, 1), (6, 5), (3, 0), (2, -3)] {
        for &m in &[4u64, 8, 12] {
            let fast = count_j(alpha, beta, m).unwrap();
            let slow = count_j_exhaustive(alpha, beta, m);
            assert_eq!(fast, slow, "count mismatch at ({alpha},{beta},{m})");
        }
    }
    // Moment bound, exact, on instances with M <= 120.
    let mut checked = 0u32;
    for poly in ["1,0,0", "1,1,0", "2,1,0", "6,5,1", "3,0,0"] {
        let h = p(poly);
        for &l in &[5040u64, 20010, 43200] {
            let ctx = make_context(h, l).unwrap();
            assert!(ctx.m <= 120, "instance ({poly}, {l}) has M = {} > 120", ctx.m);
            let spec = weyl_spectrum(&ctx);
            let moment: f64 = spec.iter().map(|c| c.norm_sqr().powi(3)).sum();
            let j = count_j(ctx.h.a2, ctx.h.a1, ctx.m).unwrap();
            assert!(j >= (ctx.m as u128).pow(3), "diagonal floor failed");
            let rhs = l as f64 / (ctx.m as f64).powi(6) * j as f64;
            assert!(
                moment <= rhs,
                "({poly}, L={l}): sixth moment {moment} exceeds {rhs}"
            );
            checked += 1;
        }
    }
    pass(
        5,
        &format!("moment bound exact on {checked} instances; mitm == 6-loop on 18 cases"),
        start,
    );
}

#[test]
fn acceptance_06_content_bound() {
    let start = Instant::now();
    let mut checked = 0u64;
    for f in corpus() {
        let fam = AuxiliaryFamily::build(&f, 5000).unwrap();
        match factor_over_rationals(&f).unwrap() {
            RationalRootForm::DoubleRoot { a, .. } => {
                for d in 1..=5000u64 {
                    assert_eq!(fam.poly(d).content(), a, "{f}: double-root content at d={d}");
                    checked += 1;
                }
            }
            RationalRootForm::Factored {
                a,
                alpha,
                beta,
                gamma,
                lambda,
            } => {
                assert_eq!(a.abs(), 1, "corpus two-branch members are primitive");
                let det = (alpha * lambda - beta * gamma).abs();
                assert_eq!(content_bound(&f), Some(det));
                for d in 1..=5000u64 {
                    let c = fam.poly(d).content();
                    assert!(c <= det, "{f}: content(f_{d}) = {c} > {det}");
                    checked += 1;
                }
            }
            RationalRootForm::Irrational => panic!("corpus must be intersective"),
        }
    }
    pass(6, &format!("content bound exact on {checked} (f, d) pairs, zero violations"), start);
}

#[test]
fn acceptance_07_root_coherence() {
    let start = Instant::now();
    let mut coherence_checks = 0u64;
    let mut root_checks = 0u64;
    for f in corpus() {
        let fam = AuxiliaryFamily::build(&f, 5000).unwrap();
        for d in 1..=5000u64 {
            let rd = fam.root(d);
            assert!(rd > -(d as i128) && rd <= 0);
            assert_eq!(f.eval_mod(rd, d as i128), 0, "{f}: f(r_{d}) != 0 mod {d}");
            // Coherence over every divisor.
            let mut s = 1u64;
            while s * s <= d {
                if d % s == 0 {
                    for div in [s, d / s] {
                        let rs = fam.root(div);
                        assert_eq!(
                            rd.rem_euclid(div as i128),
                            rs.rem_euclid(div as i128),
                            "{f}: r_{d} !≡ r_{div} (mod {div})"
                        );
                        coherence_checks += 1;
                    }
                }
                s += 1;
            }
            // Auxiliary intersectivity by brute force.
            for q in 1..=60u64 {
                assert!(fam.poly(d).has_root_mod(q), "{f}: f_{d} has no root mod {q}");
                root_checks += 1;
            }
        }
    }
    pass(
        7,
        &format!("{coherence_checks} coherence checks, {root_checks} root checks, zero failures"),
        start,
    );
}

#[test]
fn acceptance_08_intersectivity_decision() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x08);
    let (mut positive, mut negative) = (0u32, 0u32);
    for trial in 0..200 {
        let mut a2 = 0i128;
        while a2 == 0 {
            a2 = rng.next_range_i64(-50, 50) as i128;
        }
        let f = QuadraticPoly {
            a2,
            a1: rng.next_range_i64(-50, 50) as i128,
            a0: rng.next_range_i64(-50, 50) as i128,
        };
        match is_intersective(&f).unwrap() {
            Intersectivity::Intersective => {
                positive += 1;
                for q in 1..=1000u64 {
                    assert!(f.has_root_mod(q), "trial {trial}: {f} claimed intersective but has no root mod {q}");
                }
            }
            Intersectivity::NotIntersective { witness } => {
                negative += 1;
                let w = witness.unwrap_or_else(|| panic!("trial {trial}: {f} returned no witness"));
                assert!(!f.has_root_mod(w), "trial {trial}: {f} has a root mod witness {w}");
            }
        }
    }
    pass(
        8,
        &format!("200 random quadratics: {positive} intersective verified mod q<=1000, {negative} witnesses verified"),
        start,
    );
}

/// Maximum difference-free subset size by full subset enumeration.
fn exhaustive_extremal(f: &QuadraticPoly, n: u64) -> u64 {
    let image: Vec<u64> = image_up_to(f, n.saturating_sub(1).max(1))
        .unwrap()
        .values()
        .to_vec();
    let mut best = 0u32;
    for mask in 0u32..(1u32 << n) {
        if image.iter().any(|&v| mask & (mask >> v) != 0) {
            continue;
        }
        best = best.max(mask.count_ones());
    }
    best as u64
}

#[test]
fn acceptance_09_extremal_solver() {
    let start = Instant::now();
    let budget = SolverBudget::default();
    for poly in ["1,0,0", "1,1,0", "2,1,0"] {
        let f = p(poly);
        for n in 1..=20u64 {
            let bb = extremal_difference_free(&f, n, budget).unwrap();
            assert!(bb.exact);
            let oracle = exhaustive_extremal(&f, n);
            assert_eq!(bb.size, oracle, "{poly}, N={n}: B&B {} vs oracle {oracle}", bb.size);
            assert_eq!(is_difference_free(&bb.witness, &f).unwrap(), None);
        }
        for n in 21..=40u64 {
            let bb = extremal_difference_free(&f, n, budget).unwrap();
            assert!(bb.exact);
            let greedy = greedy_difference_free(&f, n).unwrap();
            assert!(greedy.len() as u64 <= bb.size, "{poly}, N={n}");
        }
    }
    let g = greedy_difference_free(&p("1,0,0"), 10).unwrap();
    assert_eq!(g.elements(), &[1, 3, 6, 8]);
    pass(9, "B&B == subset enumeration (N<=20, 3 polys); greedy <= exact to N=40; greedy(x²,10) = {1,3,6,8}", start);
}

#[test]
fn acceptance_10_inheritance() {
    let start = Instant::now();
    let corpus5 = ["1,0,0", "1,1,0", "1,0,-1", "2,1,0", "6,5,1"];
    let mut rng = SplitMix64::new(0x10);
    for trial in 0..1000 {
        let f = p(corpus5[rng.next_below(5) as usize]);
        let d = 1 + rng.next_below(12);
        let q = 1 + rng.next_below(60 / d);
        assert!(d * q <= 60);
        let l = 150 + rng.next_below(200);
        let fd = auxiliary_poly(&f, d).unwrap();
        let image = image_up_to(&fd, l).unwrap();
        let mut order: Vec<u64> = (1..=l).collect();
        rng.shuffle(&mut order);
        let mut chosen: Vec<u64> = Vec::new();
        for x in order {
            if rng.next_f64() < 0.6 && chosen.iter().all(|&a| !image.contains(a.abs_diff(x))) {
                chosen.push(x);
            }
        }
        let b = IntegerSet::new(l, chosen).unwrap();
        let step = quaddiff::iterate::projection_step(&f, q).unwrap();
        let offset = rng.next_below(step);
        assert!(
            verify_projection_inheritance(&f, d, q, &b, offset).unwrap(),
            "trial {trial}: f={f}, d={d}, q={q}, offset={offset}: projection not difference-free"
        );
    }
    pass(10, "1000 randomized projections all difference-free for the advanced auxiliary", start);
}

/// Distinct fraction sums counted over one fixed common denominator — an
/// independent route that never reduces individual sums.
fn sumset_oracle(pairs: &[(ReducedFraction, Vec<ReducedFraction>)]) -> usize {
    let mut big: i128 = 1;
    let mut fold = |d: i128| {
        let g = gcd_i128(big, d);
        big = big / g * d;
    };
    for (x, ys) in pairs {
        fold(x.denominator());
        for y in ys {
            fold(y.denominator());
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for (x, ys) in pairs {
        for y in ys {
            let num = x.numerator() * (big / x.denominator()) + y.numerator() * (big / y.denominator());
            seen.insert(num.rem_euclid(big));
        }
    }
    seen.len()
}

#[test]
fn acceptance_11_lemma_cr() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x11);
    for trial in 0..500 {
        let v = 1 + rng.next_below(8);
        let v_tilde = 1u64 << (1 + rng.next_below(4));
        // Pool of base fractions a/q, q <= v, plus the zero fraction.
        let mut base_pool = vec![ReducedFraction::zero()];
        for q in 1..=v {
            for a in 1..=q {
                if gcd_i128(a as i128, q as i128) == 1 {
                    base_pool.push(ReducedFraction::new(a as i128, q as i128).unwrap());
                }
            }
        }
        rng.shuffle(&mut base_pool);
        let n_base = 1 + rng.next_below(5.min(base_pool.len() as u64)) as usize;
        let base_arcs: Vec<ReducedFraction> = base_pool[..n_base].to_vec();
        // Pool of blow-up fractions b/r with r in the dyadic band [Ṽ/2, Ṽ].
        let mut ps_pool = Vec::new();
        for r in (v_tilde / 2).max(1)..=v_tilde {
            for b in 1..=r {
                if gcd_i128(b as i128, r as i128) == 1 {
                    ps_pool.push(ReducedFraction::new(b as i128, r as i128).unwrap());
                }
            }
        }
        let per_s: Vec<Vec<ReducedFraction>> = (0..n_base)
            .map(|_| {
                let mut pool = ps_pool.clone();
                rng.shuffle(&mut pool);
                let k = 1 + rng.next_below(6.min(pool.len() as u64)) as usize;
                pool[..k].to_vec()
            })
            .collect();
        let inst = CrInstance {
            base_arcs: base_arcs.clone(),
            per_s: per_s.clone(),
            v,
            v_tilde,
        };
        let check = lemma_cr_check(&inst).unwrap();
        assert!(
            check.holds,
            "trial {trial}: |R| = {} below floor {}",
            check.lhs, check.rhs
        );
        // The counting route must agree with the common-denominator oracle.
        let pairs: Vec<(ReducedFraction, Vec<ReducedFraction>)> = base_arcs
            .into_iter()
            .zip(per_s)
            .collect();
        let counted = rational_sumset(&pairs).unwrap();
        assert_eq!(counted, sumset_oracle(&pairs), "trial {trial}: sumset mismatch");
        assert_eq!(counted as u64, check.lhs);
    }
    pass(11, "500 random instances: counting inequality holds, sumset equals oracle", start);
}

#[test]
fn acceptance_12_orthogonality() {
    let start = Instant::now();
    let polys = ["1,0,0", "1,1,0", "2,1,0", "6,5,1", "1,0,-1"];
    let lengths = [600u64, 900, 1500, 2400, 3000];
    let mut rng = SplitMix64::new(0x12);
    let mut worst: f64 = 0.0;
    let mut count = 0u32;
    for poly in polys {
        let h = p(poly);
        for &l in &lengths {
            for thin in [1.0f64, 0.7] {
                let full = greedy_difference_free(&h, l).unwrap();
                let elements: Vec<u64> = full
                    .elements()
                    .iter()
                    .copied()
                    .filter(|_| rng.next_f64() < thin)
                    .collect();
                let b = IntegerSet::new(l, elements).unwrap();
                assert_eq!(is_difference_free(&b, &h).unwrap(), None);
                for s in [0u64, 1] {
                    let residual = orthogonality_sum(&b, &h, s).unwrap().norm();
                    worst = worst.max(residual);
                    assert!(
                        residual <= 1e-8,
                        "({poly}, L={l}, thin={thin}, s={s}): residual {residual}"
                    );
                }
                count += 1;
                if count >= 50 {
                    break;
                }
            }
        }
    }
    assert!(count >= 50);
    pass(12, &format!("orthogonality residual <= 1e-8 on {count} instances (worst {worst:.2e})"), start);
}

#[test]
fn acceptance_13_blowup_structure() {
    let start = Instant::now();
    let mut params = IterationParams::new(0.05, 4.0).unwrap();
    // Structured regime: η⁻¹ must stay below the arc separation, so the
    // documented instances run with c0 = 1/2.
    params.c0 = 0.5;
    params.check_difference_free = false;

    // Documented structured instance: the full class 3 mod 5 in [1, 2995].
    let l = 2995u64;
    let class5: Vec<u64> = (0..599).map(|m| 3 + 5 * m).collect();
    let b = IntegerSet::new(l, class5).unwrap();
    let report = blow_up(&FrequencySet::seed(), &b, &p("1,0,0"), &params).unwrap();
    assert!(report.violations.is_empty(), "violations: {:?}", report.violations);
    assert!(report.cr_holds);
    assert!(report.gain_ratio > 1.0, "gain ratio {} <= 1", report.gain_ratio);
    let gain = report.gain_ratio;

    // D stays below W̃² times the measured per-denominator mass over σ²: every
    // arc counted by D carries a coefficient of size at least σ/W̃.
    {
        use quaddiff::fourier::{mass_on_mq, ArcParams};
        let bhat = Spectrum::compute(b.elements(), l).unwrap();
        let eta_params = ArcParams::rational(
            ReducedFraction::new(report.eta_inv as i128, 1).unwrap(),
            report.v_tilde,
        );
        let max_mass = (1..=report.v_tilde)
            .map(|r| mass_on_mq(&bhat, r, &eta_params))
            .fold(0.0f64, f64::max);
        let cap = (report.w_tilde * report.w_tilde) as f64 * max_mass
            / (report.sigma * report.sigma);
        assert!(
            (report.d_quantity as f64) <= cap + 1e-9,
            "D = {} exceeds W̃²·mass/σ² = {cap}",
            report.d_quantity
        );
    }

    // A two-class instance: structural conclusions must hold even when the
    // peaks split across cells.
    let l2 = 2970u64;
    let mut union: Vec<u64> = (1..=l2).filter(|x| x % 5 == 3 || x % 6 == 1).collect();
    union.dedup();
    let b2 = IntegerSet::new(l2, union).unwrap();
    let report2 = blow_up(&FrequencySet::seed(), &b2, &p("1,1,0"), &params).unwrap();
    assert!(report2.violations.is_empty(), "violations: {:?}", report2.violations);
    assert!(report2.cr_holds);

    // Cell indices stay inside the dyadic search grid.
    for rep in [&report, &report2] {
        let eta_inv = rep.eta_inv;
        let j_cap = ((rep.input.u as f64).powi(3)
            / (params.c1 * rep.sigma.powf(2.5)))
        .log2()
        .ceil() as u32
            + 1;
        for inner in &rep.per_s {
            let (i, j, k) = inner.cell;
            assert!((1u64 << i) <= (2.0 * eta_inv * eta_inv) as u64 + 2);
            assert!(j <= j_cap && k <= j_cap);
            // One representative per arc, arcs pairwise distinct.
            let mut labels: Vec<(u64, u64)> = inner.members.iter().map(|m| (m.a, m.q)).collect();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(labels.len(), inner.members.len());
        }
    }
    pass(13, &format!("membership and disjointness exact on both reports; structured gain {gain:.2} > 1"), start);
}
