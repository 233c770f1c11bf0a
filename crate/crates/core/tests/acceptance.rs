//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime. Zero-tolerance checks are exact rational comparisons;
//! transcendental-valued bounds are compared in f64.
//!
//! Criterion 10 (figure reproduction pipeline) lives in the CLI crate's
//! acceptance suite; everything else is here.

use std::time::Instant;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toruslab_core::birkhoff::*;
use toruslab_core::cf::*;
use toruslab_core::classify::*;
use toruslab_core::flow::*;
use toruslab_core::numeric::*;
use toruslab_core::{golden_prefix, sqrt2_minus_one_prefix};

fn report(id: u32, name: &str, start: Instant, budget_s: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("ACCEPTANCE {id:2} {name}: PASS ({elapsed:.2}s, budget {budget_s}s)");
    assert!(
        elapsed < budget_s,
        "criterion {id} exceeded its {budget_s}s budget: {elapsed:.2}s"
    );
}

fn random_angle(rng: &mut ChaCha8Rng, depth: usize, max_quotient: u64) -> Angle {
    let mut qs = vec![Int::zero()];
    for _ in 0..depth {
        qs.push(Int::from(rng.gen_range(1..=max_quotient)));
    }
    if qs[depth] == Int::one() {
        qs[depth] = Int::from(2); // canonical tail
    }
    Angle::from_quotients(&qs).unwrap()
}

/// 1. CF identity suite on randomized angles, plus the golden q_11 check.
#[test]
fn criterion_01_cf_identities() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..20 {
        let angle = random_angle(&mut rng, 25, 50);
        let table = convergents(&angle);
        table.check_identities(&angle, 1500).unwrap();
        assert_eq!(table.q(0), &Int::one());
    }
    let golden = golden_prefix(20);
    let table = convergents(&golden);
    assert_eq!(table.q(11), &Int::from(144));
    table.check_identities(&golden, 1500).unwrap();
    report(1, "cf identity suite", t0, 5.0);
}

/// 2. λ(E_{n,ℓ}) = ℓ·q_n·λ^(n) exactly for all (n, ℓ) with
///    ℓ·q_n < q_{n+1} ≤ 10^4, on 5 angles.
#[test]
fn criterion_02_e_measure() {
    let t0 = Instant::now();
    let angles = [
        sqrt2_minus_one_prefix(12),
        golden_prefix(18),
        Angle::from_u64_quotients(&[0, 1, 10, 1, 10, 1, 10, 1, 10, 2]).unwrap(),
        Angle::from_u64_quotients(&[0, 3, 1, 7, 2, 5, 1, 9, 2, 4, 2]).unwrap(),
        Angle::from_u64_quotients(&[0, 2, 30, 2, 30, 2, 30, 2]).unwrap(),
    ];
    let cap = Int::from(10_000);
    let mut pairs = 0u32;
    for angle in &angles {
        let table = convergents(angle);
        for n in 0..=angle.horizon() {
            if *table.q(n + 1) > cap {
                continue;
            }
            let mut ell = 1u64;
            while Int::from(ell) * table.q(n) < *table.q(n + 1) {
                let e = build_e(angle, n, ell).unwrap();
                assert_eq!(e.measure(), &e_measure(&table, n, ell));
                pairs += 1;
                ell += 1;
            }
        }
    }
    assert!(pairs > 50, "only {pairs} (n, ℓ) pairs exercised");
    report(2, "orbit-neighbourhood measure identity", t0, 5.0);
}

/// 3. Θ-symmetry: Θ_n^β(x)·Θ_n^β(J_n^β(x)) = 1 exactly on 10³ random
///    triples with n ≤ 200.
#[test]
fn criterion_03_theta_symmetry() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E7A);
    let angles = [
        sqrt2_minus_one_prefix(14),
        golden_prefix(16),
        Angle::from_u64_quotients(&[0, 4, 2, 6, 1, 3, 2, 8, 1, 5, 2]).unwrap(),
    ];
    for trial in 0..1000 {
        let angle = &angles[trial % angles.len()];
        let x = CirclePoint::new(rat_from_u64(rng.gen_range(1..9973), 9973));
        let beta = CirclePoint::new(rat_from_u64(rng.gen_range(1..4999), 4999));
        let n = rng.gen_range(1..=200u64);
        let j = j_involution(angle, n, &beta, &x);
        let t1 = theta(angle, &x, &beta, n, SumMode::Exact).unwrap();
        let t2 = theta(angle, &j, &beta, n, SumMode::Exact).unwrap();
        assert_eq!(t1.exact.unwrap() * t2.exact.unwrap(), Rat::one());
    }
    report(3, "theta symmetry", t0, 10.0);
}

/// 4. Bound-oracle batch: each oracle passes on 100% of ≥ 100
///    hypothesis-satisfying sampled instances.
#[test]
fn criterion_04_bound_oracles() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EC7);
    let sqrt2 = sqrt2_minus_one_prefix(18);
    let golden = golden_prefix(20);
    let mixed = Angle::from_u64_quotients(&[0, 3, 2, 5, 1, 4, 2, 7, 1, 3, 5, 2, 2]).unwrap();
    let angles = [&sqrt2, &golden, &mixed];

    // sector bounds
    let mut count = 0;
    while count < 100 {
        let angle = angles[count % 3];
        let n = rng.gen_range(1..=8usize.min(angle.horizon()));
        let y = CirclePoint::new(rat_from_u64(rng.gen_range(1..99_991), 99_991));
        let r = sector_sum_bounds(angle, &y, n).unwrap();
        assert!(r.holds, "sector bound failed: {r:?}");
        count += 1;
    }

    // kq lower bound (exact for small k·q_n, double with clear flag above 10^4)
    let mut count = 0;
    while count < 100 {
        let angle = angles[count % 3];
        let n = rng.gen_range(1..=9usize.min(angle.horizon()));
        let k = rng.gen_range(1..=5u64);
        let table = convergents(angle);
        let terms = Int::from(k) * table.q(n);
        let mode = if terms <= Int::from(10_000) {
            SumMode::Exact
        } else {
            SumMode::Double
        };
        let x = CirclePoint::new(rat_from_u64(rng.gen_range(1..99_991), 99_991));
        let r = kq_lower_bound_check(angle, &x, n, k, mode).unwrap();
        assert!(r.holds, "kq bound failed: {r:?}");
        count += 1;
    }
    // a couple of large double-mode instances
    for n in [14usize, 15] {
        let x = CirclePoint::new(rat_from_u64(rng.gen_range(1..99_991), 99_991));
        let r = kq_lower_bound_check(&sqrt2, &x, n, 2, SumMode::Double).unwrap();
        assert!(r.holds);
    }

    // Lipschitz transfer, both one-sided observables
    let mut count = 0;
    while count < 100 {
        let angle = angles[count % 3];
        let n = rng.gen_range(2..=8usize.min(angle.horizon()));
        let table = convergents(angle);
        let x = CirclePoint::new(rat_from_u64(rng.gen_range(1..99_991), 99_991));
        let t = rat_from_u64(rng.gen_range(0..1000), 1000);
        let y = CirclePoint::new(x.value() + table.lambda(n) * t);
        let kind = if count % 2 == 0 {
            PsiKind::Psi1
        } else {
            PsiKind::Psi2
        };
        match lipschitz_transfer(angle, &x, &y, n, kind) {
            Ok(r) => {
                assert!(r.holds, "transfer bound failed: {r:?}");
                count += 1;
            }
            Err(BirkhoffError::OrbitHitsPole(_)) => {}
            Err(e) => panic!("unexpected: {e}"),
        }
    }

    // rational shadow sums
    for count in 0..100 {
        let q = rng.gen_range(3..=400u64);
        let delta = rat_from_u64(1, q * rng.gen_range(2..=50));
        let points: Vec<CirclePoint> = (1..q)
            .map(|k| {
                let jitter = &delta * rat_from_i64(rng.gen_range(-999..1000), 1000);
                CirclePoint::new(rat_from_u64(k, q) + jitter)
            })
            .collect();
        let r = rational_shadow_sum_bound(q, &delta, &points).unwrap();
        assert!(r.holds, "shadow bound failed at instance {count}: {r:?}");
    }

    // off-grid sums: A chosen strictly below the realized margin
    let mut count = 0;
    while count < 100 {
        let q = rng.gen_range(3..=500u64);
        let beta = CirclePoint::new(rat_from_u64(rng.gen_range(1..99_991), 99_991));
        let min_dist = (0..q)
            .map(|n| circle_norm(&(rat_from_u64(n, q) - beta.value())))
            .min()
            .unwrap();
        if min_dist.is_zero() {
            continue;
        }
        let a_margin = min_dist * Int::from(q) * rat_from_u64(7, 8);
        if !a_margin.is_positive() {
            continue;
        }
        let r = offgrid_sum_bound(q, &a_margin, &beta).unwrap();
        assert!(r.holds, "off-grid bound failed: {r:?}");
        count += 1;
    }

    // smallest grid distance
    let mut count = 0;
    while count < 100 {
        let a = rng.gen_range(1..50u64);
        let b = rng.gen_range(2..50u64);
        let q = rng.gen_range(2..2000u64);
        if num_integer::Integer::gcd(&a, &b) != 1 || num_integer::Integer::gcd(&b, &q) != 1 {
            continue;
        }
        let (_, r) = smallest_distance_margin(a, b, q).unwrap();
        assert!(r.holds, "grid distance margin failed: {r:?}");
        count += 1;
    }

    // ground-floor lower bound, plain and widened
    let mut count = 0;
    while count < 100 {
        let angle = angles[count % 3];
        let table = convergents(angle);
        let n = rng.gen_range(1..=7usize.min(angle.horizon() - 1));
        let ratio = (table.q(n + 1) / table.q(n)).to_u64().unwrap();
        if ratio < 2 {
            continue;
        }
        let ell = rng.gen_range(1..=ratio.min(30));
        if Int::from(ell) * table.q(n) >= *table.q(n + 1) {
            continue;
        }
        let widened = count % 2 == 1;
        let (x, k) = &sample_e_points(angle, n, ell, 1, &mut rng).unwrap()[0];
        let r =
            ground_floor_lower_bound(angle, n, ell, x, widened, Some(*k), SumMode::Exact).unwrap();
        assert!(r.holds, "ground floor bound failed: {r:?}");
        count += 1;
    }
    // widened variant on points outside E but inside the widened set
    let mut count = 0;
    while count < 20 {
        let table = convergents(&sqrt2);
        let n = 4;
        let ell = 2u64;
        let k = rng.gen_range(0..ell * table.q_usize(n) as u64);
        // offset in (λ/2, 2λ): inside Ẽ, outside E
        let off = table.lambda(n) * rat_from_u64(rng.gen_range(51..199), 100);
        let x = CirclePoint::new(off - sqrt2.value() * Int::from(k));
        let r =
            ground_floor_lower_bound(&sqrt2, n, ell, &x, true, Some(k), SumMode::Exact).unwrap();
        assert!(r.holds, "widened ground floor failed: {r:?}");
        count += 1;
    }

    // close-return dominance at levels ≥ 11
    let mut count = 0;
    while count < 100 {
        let angle = &sqrt2;
        let table = convergents(angle);
        let n = rng.gen_range(11..=12usize);
        let q_n = table.q_usize(n) as u64;
        let i = rng.gen_range(1..q_n);
        let eps = rat_from_u64(rng.gen_range(1..100), 100);
        let gate = &eps
            / (Rat::from(table.q(n).clone())
                * rat_from_f64((3.0 * big_ratio_to_f64(table.q(n), &Int::one())).ln()));
        let u = &gate * rat_from_i64(rng.gen_range(-900..900), 1000);
        let x = CirclePoint::new(u - angle.value() * Int::from(i));
        match close_return_dominance(angle, &x, i, n, &eps) {
            Ok(r) => {
                assert!(r.holds, "close-return dominance failed: {r:?}");
                count += 1;
            }
            Err(BirkhoffError::OrbitHitsPole(_)) | Err(BirkhoffError::HypothesisViolated(_)) => {}
            Err(e) => panic!("unexpected: {e}"),
        }
    }

    report(4, "bound-oracle batch", t0, 120.0);
}

/// 5. End-to-end extreme-historic dominance at reduced scale:
///    α ∈ W(1,3) with q_n ≈ 2.5·10^4 at the witness level, β = 1/3, K = 2.
#[test]
fn criterion_05_dominance() {
    let t0 = Instant::now();
    let (b, k_factor) = (3u64, 2u64);
    // seed ladder reaching q ≈ 2.5e4 with gcd(q, 3) = 1
    let mut seed = vec![Int::zero()];
    seed.extend(std::iter::repeat(Int::from(2)).take(10));
    seed.push(Int::from(4));
    let nu = Rat::one();
    let angle = construct_w_angle(&nu, b, &seed, 1).unwrap();
    let cert = w_membership(&angle, &nu, b, angle.horizon());
    let witness = cert.witnesses.last().unwrap().n;
    let table = convergents(&angle);
    let q_n = table.q(witness).to_u64().unwrap();
    assert!((20_000..40_000).contains(&q_n), "q_n = {q_n}");
    let a_next = angle.quotients()[witness + 1].to_u64().unwrap();

    // ℓ in the proof's window: ν·a/(16bK) < ℓ and ℓ+1 ≤ ν·a/(8bK)
    let ell = a_next / (16 * b * k_factor) + 1;
    assert!(ell as f64 > a_next as f64 / (16 * b * k_factor) as f64);
    assert!(((ell + 1) * 8 * b * k_factor) as f64 <= a_next as f64);
    let m = ell * q_n;
    assert!((5_000_000..20_000_000).contains(&m), "m = {m}");

    // exact measure bound λ(E) ≥ ν/(64bK)
    let measure = e_measure(&table, witness, ell);
    assert!(measure >= Rat::new(Int::one(), Int::from(64 * b * k_factor)));

    // dominance S_m(x) > K·S_m(x − 1/3) on measure-uniform samples
    let beta = CirclePoint::from_ints(1, b as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(0xD011);
    let samples = sample_e_points(&angle, witness, ell, 50, &mut rng).unwrap();
    let mut passes = 0usize;
    for (x, _) in &samples {
        let s_x = birkhoff_total(&angle, x, m, SumMode::Double).unwrap();
        let shifted = CirclePoint::new(x.value() - beta.value());
        let s_b = birkhoff_total(&angle, &shifted, m, SumMode::Double).unwrap();
        if s_x.total > k_factor as f64 * s_b.total {
            passes += 1;
        }
    }
    assert!(
        passes as f64 / samples.len() as f64 >= 0.99,
        "only {passes}/50 samples dominate"
    );
    report(5, "extreme-historic dominance (reduced scale)", t0, 180.0);
}

/// 6. Close-return spike / historic signature with same-orbit β = 7α over
///    10^5 special-flow returns.
#[test]
fn criterion_06_historic_spike() {
    let t0 = Instant::now();
    let angle = sqrt2_minus_one_prefix(40);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let params = FlowParams {
        angle: angle.clone(),
        p: (rat_from_u64(1, 2), rat_from_u64(3, 10)),
        q: (
            mod1(&(rat_from_u64(1, 2) + rat_from_u64(15, 2))),
            mod1(&(rat_from_u64(3, 10) + angle.value() * rat_from_u64(15, 2))),
        ),
        d_p: pi2,
        d_q: pi2,
        section_x0: rat_from_u64(1, 4),
        speed_model: SpeedModel::MinDistance,
    };
    let section = section_setup(&params).unwrap();
    assert_eq!(
        same_orbit_detect(&angle, &section.p0, &section.q0, 100),
        Some(7)
    );
    // a start whose (y − p0)-orbit has a strong close return inside the tail
    let spike_at = 70_001u64;
    let start = CirclePoint::new(
        section.p0.value() + rat_from_f64(1e-8) - angle.value() * Int::from(spike_at),
    );
    let spec = SpecialFlowSpec {
        returns: 100_000,
        record_points: 200,
        tail_start: 70_000,
    };
    let s = special_flow_simulate(&params, &section, &start, &spec).unwrap();
    assert!(
        (s.theta_tail.min - 1.0).abs() < 0.1,
        "tail min {} not within 0.1 of 1",
        s.theta_tail.min
    );
    assert!(s.theta_tail.max > 10.0, "tail max {}", s.theta_tail.max);

    // consistency with the Birkhoff-level Θ at the final index (σ ≡ 0 and
    // d_p = d_q, so the proxy is exactly Θ)
    let x_rel = CirclePoint::new(start.value() - section.p0.value());
    let th = theta(&angle, &x_rel, &section.beta, spec.returns, SumMode::Double).unwrap();
    let rel = ((s.final_row.theta_proxy - th.value) / th.value).abs();
    assert!(rel < 1e-6, "flow/birkhoff theta mismatch: {rel}");
    report(6, "historic spike signature", t0, 60.0);
}

/// 7. Physical-measure trend for a constructed rapid-growth angle with
///    same-orbit β over 10^6 returns.
#[test]
fn criterion_07_physical_trend() {
    let t0 = Instant::now();
    let angle = construct_rapid_growth_angle(1.0, 0.5, 5, None).unwrap();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let params = FlowParams {
        angle: angle.clone(),
        p: (rat_from_u64(1, 2), rat_from_u64(3, 10)),
        q: (
            mod1(&(rat_from_u64(1, 2) + rat_from_u64(3, 2))),
            mod1(&(rat_from_u64(3, 10) + angle.value() * rat_from_u64(3, 2))),
        ),
        d_p: 4.0 * pi2,
        d_q: pi2,
        section_x0: rat_from_u64(1, 4),
        speed_model: SpeedModel::MinDistance,
    };
    let section = section_setup(&params).unwrap();
    assert_eq!(
        same_orbit_detect(&angle, &section.p0, &section.q0, 100),
        Some(1)
    );
    let spec = SpecialFlowSpec {
        returns: 1_000_000,
        record_points: 500,
        tail_start: 100_000,
    };
    let start = CirclePoint::from_ints(2_718_281, 10_000_000);
    let s = special_flow_simulate(&params, &section, &start, &spec).unwrap();
    let target = params.d_p.sqrt() / (params.d_p.sqrt() + params.d_q.sqrt());
    assert!(
        (s.occ_q_tail.min - target).abs() < 0.05 && (s.occ_q_tail.max - target).abs() < 0.05,
        "tail occupancy [{}, {}] vs target {target}",
        s.occ_q_tail.min,
        s.occ_q_tail.max
    );
    // damped oscillation: each decade's width beats the one two decades
    // earlier
    let widths: Vec<f64> = s.occ_q_decades.iter().map(|w| w.max - w.min).collect();
    for k in 2..widths.len() {
        assert!(
            widths[k] < widths[k - 2],
            "width trend fails at decade {k}: {widths:?}"
        );
    }
    assert!(widths.last().unwrap() < &1e-2);
    report(7, "physical-measure trend", t0, 120.0);
}

/// 8. β₀ machinery: exact partial-sum increments, ℓ_n growth bounds, and
///    on/off-orbit margins.
#[test]
fn criterion_08_beta0() {
    let t0 = Instant::now();
    let sqrt2 = sqrt2_minus_one_prefix(16);
    let table = convergents(&sqrt2);
    for level in 0..sqrt2.horizon() {
        let (a, _) = beta0_partial(&sqrt2, level).unwrap();
        let (b, _) = beta0_partial(&sqrt2, level + 1).unwrap();
        assert_eq!(
            &circle_norm(&(b.value() - a.value())),
            table.lambda(level + 1)
        );
    }
    // ℓ_n bounds hold along the whole ladder (asserted inside ell_sequence)
    for angle in [&sqrt2, &golden_prefix(16)] {
        ell_sequence(angle, angle.horizon()).unwrap();
    }
    // non-golden construction: positive margin over |k| ≤ 10^3
    let (beta, _) = beta0_partial(&sqrt2, 9).unwrap();
    let (margin, zero_at) = not_on_orbit_margin(&sqrt2, &beta, 1000).unwrap();
    assert!(margin.is_positive());
    assert_eq!(zero_at, None);
    // all-ones tail: margin 0 exactly at the predicted index ℓ_N + q_{N−1}
    let mut qs = vec![0u64];
    qs.extend(std::iter::repeat(1).take(14));
    qs.extend([2, 2]);
    let golden = Angle::from_u64_quotients(&qs).unwrap();
    let (beta, index) = beta0_ones_tail(&golden, 6).unwrap();
    let gt = convergents(&golden);
    let ell = ell_sequence(&golden, 6).unwrap();
    assert_eq!(&index, &(ell[6].clone() + gt.q(5)));
    let k = index.to_u64().unwrap();
    let (margin, zero_at) = not_on_orbit_margin(&golden, &beta, k + 10).unwrap();
    assert!(margin.is_zero());
    assert_eq!(zero_at, Some(k as i64));
    report(8, "beta0 machinery", t0, 10.0);
}

/// 9. Crossing-time asymptotics: closed form vs quadrature to 1e-10, and
///    bounded monotone residuals along dyadic y.
#[test]
fn criterion_09_crossing_times() {
    let t0 = Instant::now();
    let forms = [
        (1.0, 0.0, 1.0),
        (2.0, 0.0, 1.0),
        (2.0, 1.0, 3.0),
        (1.0, 0.4, 1.0),
        (3.0, -0.5, 2.0),
    ];
    for &(a, b, c) in &forms {
        for delta in [0.5, 1.0, 2.0] {
            for y in [1.0, 0.5, 0.1, -0.5, -0.1, 0.025] {
                let r = kappa_quadratic(a, b, c, delta, y).unwrap();
                let rel = ((r.quadrature_shifted - r.closed_form) / r.closed_form).abs();
                assert!(rel < 1e-10, "rel = {rel} at {a},{b},{c},{delta},{y}");
            }
        }
    }
    // dyadic residual sequence: bounded by twice the analytic 2/(aδ) scale
    // and monotone for the axis-aligned forms
    for &(a, delta) in &[(1.0, 1.0), (2.0, 0.5)] {
        let mut prev = 0.0f64;
        for k in 0..=14 {
            let y = 2f64.powi(-k);
            let r = kappa_quadratic(a, 0.0, a, delta, y).unwrap();
            let mag = r.residual.abs();
            assert!(mag <= 2.0 * 2.0 / (a * delta));
            assert!(mag + 1e-9 >= prev, "not monotone at k = {k}");
            prev = mag;
        }
    }
    // skew form: boundedness only
    for k in 0..=14 {
        let y = 2f64.powi(-k);
        let r = kappa_quadratic(2.0, 1.0, 3.0, 0.5, y).unwrap();
        assert!(r.residual.abs() <= 2.0 * 2.0 / (2.0 * 0.5));
    }
    report(9, "crossing-time asymptotics", t0, 30.0);
}

/// 11. Close-return series: monotone partial sums with a divergence trend.
///     The per-level weight form must grow by more than 50% from depth 12
///     to depth 25; the per-index threshold form is monotone as well.
#[test]
fn criterion_11_fuchs_kim_series() {
    let t0 = Instant::now();
    let angle = sqrt2_minus_one_prefix(28);
    let weight = phi_level_weight_schedule(&angle, 25);
    let sums = fuchs_kim_series(&angle, &weight, 25).unwrap();
    assert!(sums.windows(2).all(|w| w[0] <= w[1]), "not monotone");
    let s12 = rat_to_f64(&sums[11]);
    let s25 = rat_to_f64(&sums[24]);
    assert!(
        s25 > 1.5 * s12,
        "no divergence trend: S(25) = {s25}, S(12) = {s12}"
    );
    // the per-index threshold schedule is monotone but its head dominates:
    // report its ratio for inspection
    let threshold = phi_threshold_schedule(&angle, 25);
    let tsums = fuchs_kim_series(&angle, &threshold, 25).unwrap();
    assert!(tsums.windows(2).all(|w| w[0] <= w[1]));
    println!(
        "  threshold-schedule ratio S(25)/S(12) = {:.3} (reported, not asserted)",
        rat_to_f64(&tsums[24]) / rat_to_f64(&tsums[11])
    );
    report(11, "close-return series divergence trend", t0, 5.0);
}
