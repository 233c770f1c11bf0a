//! Orbits of the rotation R_α, gap statistics, renormalization intervals
//! Δ^(n) with their two towers, projections onto the renormalization domain,
//! and the near-rational bijection σ.
//!
//! Interval conventions: Δ^(n) is half-open with 0 as an endpoint, on the
//! right of 0 for even n and on the left for odd n. Boundary points belong
//! to the left-closed end, which makes the tower partition exact.

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::cf::{convergents, Angle, CfError, CirclePoint, ConvergentTable};
use crate::numeric::{circle_norm, mod1, Int, Rat};

#[derive(Debug, Error)]
pub enum RotationError {
    #[error("orbit of length {0} has no gaps")]
    DegenerateOrbit(usize),
    #[error("m = {m} is outside (0, q_{{n+1}} = {q_next})")]
    RangeError { m: Int, q_next: Int },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sample {0} lies outside the renormalization domain")]
    SampleOutsideDomain(usize),
    #[error(transparent)]
    Cf(#[from] CfError),
}

/// A finite orbit segment (R_α^i(base))_{0≤i<k}, exact.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub base: CirclePoint,
    pub points: Vec<Rat>,
}

/// Exact orbit of length k starting at x.
pub fn orbit(angle: &Angle, x: &CirclePoint, k: usize) -> OrbitSegment {
    assert!(k >= 1);
    let alpha = angle.value();
    let mut points = Vec::with_capacity(k);
    let mut y = x.value().clone();
    for _ in 0..k {
        points.push(y.clone());
        y = mod1(&(y + alpha));
    }
    OrbitSegment {
        base: x.clone(),
        points,
    }
}

/// Smallest and largest gap between consecutive orbit points on the circle.
#[derive(Debug, Clone)]
pub struct GapStats {
    pub min_gap: Rat,
    pub max_gap: Rat,
    /// Some(n) when the segment length is a convergent denominator q_n.
    pub level: Option<usize>,
    /// For base 0 at length q_n: whether m = λ^(n−1) and
    /// M = λ^(n) + λ^(n−1) hold exactly.
    pub identities_hold: Option<bool>,
}

pub fn gap_stats(angle: &Angle, segment: &OrbitSegment) -> Result<GapStats, RotationError> {
    let k = segment.points.len();
    if k < 2 {
        return Err(RotationError::DegenerateOrbit(k));
    }
    let mut sorted = segment.points.clone();
    sorted.sort();
    let mut min_gap: Option<Rat> = None;
    let mut max_gap: Option<Rat> = None;
    for i in 0..k {
        let gap = if i + 1 < k {
            &sorted[i + 1] - &sorted[i]
        } else {
            Rat::one() - &sorted[k - 1] + &sorted[0]
        };
        if min_gap.as_ref().is_none_or(|g| gap < *g) {
            min_gap = Some(gap.clone());
        }
        if max_gap.as_ref().is_none_or(|g| gap > *g) {
            max_gap = Some(gap);
        }
    }
    let (min_gap, max_gap) = (min_gap.unwrap(), max_gap.unwrap());

    let table = convergents(angle);
    let level = (0..=angle.horizon()).find(|&n| table.q(n) == &Int::from(k));
    let identities_hold = match level {
        Some(n) if n >= 1 && segment.base.value().is_zero() => {
            let m_ok = min_gap == *table.lambda(n - 1);
            let big_ok = max_gap == table.lambda(n) + table.lambda(n - 1);
            Some(m_ok && big_ok)
        }
        _ => None,
    };
    Ok(GapStats {
        min_gap,
        max_gap,
        level,
        identities_hold,
    })
}

/// Euclidean decomposition of an orbit: for 0 < m < q_{n+1} with
/// m = ℓ q_n + r, the orbit O(m) equals the union of the ℓ translates
/// R_{ρ_n}^i O(q_n) together with R_{ρ_n}^ℓ O(r). Verified as an exact
/// point-set equality.
pub fn orbit_decomposition(
    angle: &Angle,
    m: usize,
    level: usize,
) -> Result<(usize, usize), RotationError> {
    angle.check_level(level)?;
    let table = convergents(angle);
    let q_n = table.q_usize(level);
    let q_next = table.q(level + 1);
    if m == 0 || Int::from(m) >= *q_next {
        return Err(RotationError::RangeError {
            m: Int::from(m),
            q_next: q_next.clone(),
        });
    }
    let ell = m / q_n;
    let r = m % q_n;
    let zero = CirclePoint::new(Rat::zero());
    let mut lhs = orbit(angle, &zero, m).points;
    let rho_n = table.rho(level);
    let base_orbit = orbit(angle, &zero, q_n).points;
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    let mut shift = Rat::zero();
    for _ in 0..ell {
        rhs.extend(base_orbit.iter().map(|p| mod1(&(p + &shift))));
        shift += rho_n;
    }
    if r > 0 {
        rhs.extend(
            orbit(angle, &zero, r)
                .points
                .iter()
                .map(|p| mod1(&(p + &shift))),
        );
    }
    lhs.sort();
    rhs.sort();
    assert_eq!(lhs, rhs, "orbit decomposition point sets differ");
    Ok((ell, r))
}

/// Which of the two renormalization towers a point sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tower {
    Large,
    Small,
}

/// Address of x in the level-n tower partition: x = R_α^floor(x^(n)) with
/// x^(n) in Δ^(n) (large tower) or Δ^(n+1) (small tower).
#[derive(Debug, Clone)]
pub struct TowerAddress {
    pub tower: Tower,
    pub floor: usize,
    /// The projection x^(n) itself.
    pub projection: CirclePoint,
    /// Distance from the left endpoint of the base interval to x^(n).
    pub offset: Rat,
}

/// The two base intervals and floor counts at level n.
#[derive(Debug, Clone)]
pub struct RenormLevel {
    pub n: usize,
    /// Δ^(n) as a half-open interval [a, b) in [0, 1].
    pub delta_n: (Rat, Rat),
    /// Δ^(n+1) likewise.
    pub delta_next: (Rat, Rat),
    pub large_floors: Int,
    pub small_floors: Int,
}

fn delta_interval(table: &ConvergentTable, n: usize) -> (Rat, Rat) {
    let lam = table.lambda(n);
    if n.is_multiple_of(2) {
        (Rat::zero(), lam.clone())
    } else {
        (Rat::one() - lam, Rat::one())
    }
}

fn in_interval(x: &Rat, iv: &(Rat, Rat)) -> bool {
    *x >= iv.0 && *x < iv.1
}

pub fn renorm_level(angle: &Angle, n: usize) -> Result<RenormLevel, RotationError> {
    if n + 1 > angle.horizon() {
        return Err(CfError::LevelBeyondHorizon {
            level: n + 1,
            horizon: angle.horizon(),
        }
        .into());
    }
    let table = convergents(angle);
    Ok(RenormLevel {
        n,
        delta_n: delta_interval(&table, n),
        delta_next: delta_interval(&table, n + 1),
        large_floors: table.q(n + 1).clone(),
        small_floors: table.q(n).clone(),
    })
}

/// Exact partition check: the q_{n+1} translates of Δ^(n) and the q_n
/// translates of Δ^(n+1) tile [0, 1) with total measure exactly 1.
pub fn tower_partition_check(angle: &Angle, n: usize) -> Result<(), RotationError> {
    let level = renorm_level(angle, n)?;
    let table = convergents(angle);
    let total = Rat::from(level.large_floors.clone()) * table.lambda(n)
        + Rat::from(level.small_floors.clone()) * table.lambda(n + 1);
    if total != Rat::one() {
        return Err(RotationError::HypothesisViolated(format!(
            "tower measures sum to {total}, not 1"
        )));
    }
    let q_large = level.large_floors.to_usize().expect("tower fits usize");
    let q_small = level.small_floors.to_usize().expect("tower fits usize");
    let alpha = angle.value();
    let mut cells: Vec<(Rat, Rat)> = Vec::with_capacity(q_large + q_small);
    for (base, count) in [(&level.delta_n, q_large), (&level.delta_next, q_small)] {
        let mut shift = Rat::zero();
        for _ in 0..count {
            let a = mod1(&(&base.0 + &shift));
            let b = &a + (&base.1 - &base.0);
            if b <= Rat::one() {
                cells.push((a, b));
            } else {
                cells.push((a, Rat::one()));
                cells.push((Rat::zero(), b - Rat::one()));
            }
            shift += alpha;
        }
    }
    cells.sort();
    let mut edge = Rat::zero();
    for (a, b) in &cells {
        if *a != edge {
            return Err(RotationError::HypothesisViolated(format!(
                "tower cells leave a hole or overlap at {a}"
            )));
        }
        edge = b.clone();
    }
    if edge != Rat::one() {
        return Err(RotationError::HypothesisViolated(
            "tower cells do not reach 1".into(),
        ));
    }
    Ok(())
}

/// Unique tower address of x at level n; reconstruction is exact.
pub fn tower_address(
    angle: &Angle,
    x: &CirclePoint,
    n: usize,
) -> Result<TowerAddress, RotationError> {
    let level = renorm_level(angle, n)?;
    let q_large = level.large_floors.to_usize().expect("tower fits usize");
    let q_small = level.small_floors.to_usize().expect("tower fits usize");
    let alpha = angle.value();
    let mut y = x.value().clone();
    for floor in 0..q_large.max(q_small) {
        if floor < q_large && in_interval(&y, &level.delta_n) {
            return Ok(TowerAddress {
                tower: Tower::Large,
                floor,
                offset: &y - &level.delta_n.0,
                projection: CirclePoint::new(y),
            });
        }
        if floor < q_small && in_interval(&y, &level.delta_next) {
            return Ok(TowerAddress {
                tower: Tower::Small,
                floor,
                offset: &y - &level.delta_next.0,
                projection: CirclePoint::new(y),
            });
        }
        y = mod1(&(y - alpha));
    }
    unreachable!("tower partition covers the circle");
}

/// Per-sample first-return data on the renormalization domain Δ(n).
#[derive(Debug, Clone)]
pub struct FirstReturn {
    pub sample: CirclePoint,
    pub tower: Tower,
    pub return_time: usize,
    pub returned: CirclePoint,
}

/// First return of R_α to Δ(n) = Δ^(n) ∪ Δ^(n+1): time q_{n+1} on Δ^(n) and
/// q_n on Δ^(n+1), landing back in Δ(n) displaced by the induced rotation
/// angle ±λ^(n). Everything is checked exactly, including that no earlier
/// iterate re-enters the domain.
pub fn first_return_check(
    angle: &Angle,
    n: usize,
    samples: &[CirclePoint],
) -> Result<Vec<FirstReturn>, RotationError> {
    let level = renorm_level(angle, n)?;
    let table = convergents(angle);
    let alpha = angle.value();
    let q_large = level.large_floors.to_usize().expect("tower fits usize");
    let q_small = level.small_floors.to_usize().expect("tower fits usize");
    let circumference = table.lambda(n) + table.lambda(n + 1);
    let mut out = Vec::with_capacity(samples.len());
    for (i, sample) in samples.iter().enumerate() {
        let y0 = sample.value();
        let (tower, expect_time, expect_shift) = if in_interval(y0, &level.delta_n) {
            (Tower::Large, q_large, table.rho(n + 1).clone())
        } else if in_interval(y0, &level.delta_next) {
            (Tower::Small, q_small, table.rho(n).clone())
        } else {
            return Err(RotationError::SampleOutsideDomain(i));
        };
        let mut y = y0.clone();
        for step in 1..=expect_time {
            y = mod1(&(y + alpha));
            let inside = in_interval(&y, &level.delta_n) || in_interval(&y, &level.delta_next);
            if step < expect_time {
                assert!(!inside, "early return at step {step} of {expect_time}");
            } else {
                assert!(inside, "no return at the expected time {expect_time}");
            }
        }
        assert_eq!(y, mod1(&(y0 + &expect_shift)), "return displacement");
        // as a rotation of the quotient circle of circumference
        // λ^(n) + λ^(n+1), both branches shift by the same induced angle
        // ρ_n = (−1)^n λ^(n): the two displacements differ by exactly ±L
        let excess = &expect_shift - table.rho(n);
        assert!(
            excess.is_zero() || excess.clone().abs() == circumference,
            "induced rotation angle"
        );
        out.push(FirstReturn {
            sample: sample.clone(),
            tower,
            return_time: expect_time,
            returned: CirclePoint::new(y),
        });
    }
    Ok(out)
}

/// The bijection σ of {0..q_n−1} with ‖kα − σ(k)/q_n‖ < λ^(n), which exists
/// whenever a_{n+1} ≥ 2. σ(k) is the nearest multiple of 1/q_n to kα.
pub fn near_rational_bijection(angle: &Angle, n: usize) -> Result<Vec<usize>, RotationError> {
    angle.check_level(n)?;
    let table = convergents(angle);
    if angle.quotients()[n + 1] < Int::from(2) {
        return Err(RotationError::HypothesisViolated(format!(
            "a_{} = 1 < 2",
            n + 1
        )));
    }
    let q_n = table.q_usize(n);
    let q_rat = Rat::from(Int::from(q_n));
    let lambda = table.lambda(n);
    let alpha = angle.value();
    let mut sigma = Vec::with_capacity(q_n);
    let mut seen = vec![false; q_n];
    let mut point = Rat::zero();
    let half = Rat::new(Int::one(), Int::from(2));
    for k in 0..q_n {
        let scaled = &point * &q_rat + &half;
        let nearest = scaled.floor().to_integer().to_usize().unwrap() % q_n;
        let dist = circle_norm(&(&point - Rat::new(Int::from(nearest), Int::from(q_n))));
        assert!(dist < *lambda, "σ({k}) misses by {dist} >= λ^({n})");
        assert!(!seen[nearest], "σ not injective at {k}");
        seen[nearest] = true;
        sigma.push(nearest);
        point = mod1(&(point + alpha));
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat_from_u64, rat_to_f64};
    use rand::{Rng, SeedableRng};

    fn sqrt2_prefix(len: usize) -> Angle {
        let mut q = vec![0u64];
        q.extend(std::iter::repeat(2).take(len));
        Angle::from_u64_quotients(&q).unwrap()
    }

    fn golden_prefix(ones: usize) -> Angle {
        let mut q = vec![0u64];
        q.extend(std::iter::repeat(1).take(ones));
        q.push(2);
        Angle::from_u64_quotients(&q).unwrap()
    }

    #[test]
    fn orbit_basics() {
        let angle = sqrt2_prefix(10);
        let zero = CirclePoint::new(Rat::zero());
        let seg = orbit(&angle, &zero, 1);
        assert_eq!(seg.points, vec![Rat::zero()]);
        let seg = orbit(&angle, &zero, 5);
        let approx: Vec<f64> = seg.points.iter().map(rat_to_f64).collect();
        let expect = [0.0, 0.41421, 0.82842, 0.24264, 0.65685];
        for (a, b) in approx.iter().zip(expect) {
            assert!((a - b).abs() < 1e-4);
        }
        // rational third of a circle
        let third = Angle::from_u64_quotients(&[0, 3, 1000, 2, 2]).unwrap();
        let seg = orbit(&third, &CirclePoint::from_ints(1, 2), 2);
        assert!((rat_to_f64(&seg.points[1]) - (0.5 + rat_to_f64(third.value()))).abs() < 1e-12);
    }

    #[test]
    fn gap_identities_at_convergent_lengths() {
        let angle = sqrt2_prefix(10);
        let table = convergents(&angle);
        let zero = CirclePoint::new(Rat::zero());
        // n = 2, q_2 = 5
        let stats = gap_stats(&angle, &orbit(&angle, &zero, 5)).unwrap();
        assert_eq!(stats.level, Some(2));
        assert_eq!(stats.identities_hold, Some(true));
        assert_eq!(stats.min_gap, *table.lambda(1));
        assert_eq!(stats.max_gap, table.lambda(2) + table.lambda(1));
        // golden, n = 4 (q_4 = 5 with ones)
        let golden = golden_prefix(12);
        let gt = convergents(&golden);
        assert_eq!(gt.q_usize(4), 5);
        let stats = gap_stats(&golden, &orbit(&golden, &zero, 5)).unwrap();
        assert_eq!(stats.level, Some(4));
        assert_eq!(stats.identities_hold, Some(true));
        assert_eq!(stats.min_gap, *gt.lambda(3));
        // single point is degenerate
        assert!(matches!(
            gap_stats(&angle, &orbit(&angle, &zero, 1)),
            Err(RotationError::DegenerateOrbit(1))
        ));
        // non-convergent length: raw gaps, no identity claim
        let stats = gap_stats(&angle, &orbit(&angle, &zero, 7)).unwrap();
        assert_eq!(stats.level, None);
        assert_eq!(stats.identities_hold, None);
        // translated base has the same gap multiset
        let shifted = gap_stats(&angle, &orbit(&angle, &CirclePoint::from_ints(1, 7), 5)).unwrap();
        assert_eq!(shifted.min_gap, stats_base(&angle).0);
        assert_eq!(shifted.max_gap, stats_base(&angle).1);
    }

    fn stats_base(angle: &Angle) -> (Rat, Rat) {
        let zero = CirclePoint::new(Rat::zero());
        let s = gap_stats(angle, &orbit(angle, &zero, 5)).unwrap();
        (s.min_gap, s.max_gap)
    }

    #[test]
    fn decomposition_examples() {
        let angle = sqrt2_prefix(10);
        // m = q_2 = 5: trivial decomposition
        assert_eq!(orbit_decomposition(&angle, 5, 2).unwrap(), (1, 0));
        // m = 11 = 2·5 + 1 at n = 2
        assert_eq!(orbit_decomposition(&angle, 11, 2).unwrap(), (2, 1));
        // m = q_3 = 12 out of range
        assert!(matches!(
            orbit_decomposition(&angle, 12, 2),
            Err(RotationError::RangeError { .. })
        ));
    }

    #[test]
    fn tower_partition_and_addresses() {
        let angle = sqrt2_prefix(10);
        for n in 0..=3 {
            tower_partition_check(&angle, n).unwrap();
        }
        // x in Δ^(n) gets floor 0 in the large tower
        let level = renorm_level(&angle, 3).unwrap();
        let inside = CirclePoint::new((&level.delta_n.0 + &level.delta_n.1) / Int::from(2));
        let addr = tower_address(&angle, &inside, 3).unwrap();
        assert_eq!(addr.tower, Tower::Large);
        assert_eq!(addr.floor, 0);
        assert_eq!(addr.offset, inside.value() - &level.delta_n.0);
        // its image gets floor 1
        let image = inside.translate(angle.value());
        let addr = tower_address(&angle, &image, 3).unwrap();
        assert_eq!(addr.tower, Tower::Large);
        assert_eq!(addr.floor, 1);
        // random points reconstruct exactly
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let x = CirclePoint::new(rat_from_u64(rng.gen_range(0..10_000), 10_001));
            let addr = tower_address(&angle, &x, 3).unwrap();
            let back = addr
                .projection
                .translate(&(angle.value() * Int::from(addr.floor)));
            assert_eq!(back.value(), x.value());
        }
    }

    #[test]
    fn first_returns() {
        let angle = sqrt2_prefix(10);
        let n = 3;
        let table = convergents(&angle);
        let level = renorm_level(&angle, n).unwrap();
        // left endpoints are included by the half-open convention
        let in_large = CirclePoint::new(level.delta_n.0.clone());
        let in_small = CirclePoint::new(level.delta_next.0.clone());
        let mid_large = CirclePoint::new((&level.delta_n.0 + &level.delta_n.1) / Int::from(2));
        let reports = first_return_check(&angle, n, &[in_large, in_small, mid_large]).unwrap();
        assert_eq!(reports[0].return_time, table.q_usize(n + 1));
        assert_eq!(reports[1].return_time, table.q_usize(n));
        assert_eq!(reports[2].return_time, table.q_usize(n + 1));
        // a point outside the domain is rejected
        let outside = CirclePoint::from_ints(1, 2);
        assert!(matches!(
            first_return_check(&angle, n, &[outside]),
            Err(RotationError::SampleOutsideDomain(0))
        ));
    }

    #[test]
    fn sigma_bijection() {
        let angle = sqrt2_prefix(10);
        // n = 2: q_2 = 5, a_3 = 2
        let sigma = near_rational_bijection(&angle, 2).unwrap();
        assert_eq!(sigma, vec![0, 2, 4, 1, 3]);
        assert_eq!(sigma[0], 0);
        let golden = golden_prefix(12);
        assert!(matches!(
            near_rational_bijection(&golden, 4),
            Err(RotationError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn random_angle_structure() {
        use proptest::prelude::*;
        use proptest::test_runner::{Config, TestRunner};
        let mut runner = TestRunner::new(Config::with_cases(60));
        runner
            .run(
                &(
                    proptest::collection::vec(1u64..5, 4..7),
                    0usize..3,
                    1usize..200,
                ),
                |(body, n, m)| {
                    let mut qs = vec![0u64];
                    qs.extend(body);
                    qs.push(2);
                    let angle = Angle::from_u64_quotients(&qs).unwrap();
                    prop_assume!(angle.horizon() >= 2);
                    let n = n.min(angle.horizon() - 1);
                    // exact two-tower partition at every admissible level
                    tower_partition_check(&angle, n).unwrap();
                    // Euclidean orbit decomposition as exact point sets
                    // (q_{n+1} = 1 leaves no admissible m)
                    let table = convergents(&angle);
                    let q_next = table.q_usize(n + 1);
                    if q_next >= 2 {
                        let m = 1 + m % (q_next - 1);
                        orbit_decomposition(&angle, m, n).unwrap();
                    }
                    // near-rational bijection whenever its hypothesis holds
                    if angle.quotients()[n + 1] >= Int::from(2) {
                        near_rational_bijection(&angle, n).unwrap();
                    }
                    Ok(())
                },
            )
            .unwrap();
    }

    #[test]
    fn sigma_exhaustive_medium_levels() {
        // injectivity re-checked on every admissible level with q_n <= 1e4
        let angle = sqrt2_prefix(14);
        let table = convergents(&angle);
        for n in 1..=angle.horizon() {
            if angle.quotients()[n + 1] >= Int::from(2) && table.q_usize(n) <= 10_000 {
                near_rational_bijection(&angle, n).unwrap();
            }
        }
    }
}
