//! Birkhoff sums of the observable ψ = 1/‖·‖ over circle rotations, the
//! ratio Θ_n^β and its symmetry, the sector/rational-comparison bound
//! oracles, neighbourhoods of orbits as exact interval unions, and the bad
//! sets that control close returns.
//!
//! Two computation modes. Exact mode reduces the whole orbit to integer
//! arithmetic over a common denominator L: every orbit point is y_i = k_i/L,
//! so a Birkhoff sum is L·Σ 1/k_i, summed pairwise without intermediate
//! reduction. Double mode steps the orbit in f64, re-anchors on the exact
//! orbit every `ANCHOR_STRIDE` steps, recomputes any close-return term
//! exactly, and carries a rigorous relative error bound; a condition flag is
//! raised when any term exceeds 1e12.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::cf::{convergents, Angle, CfError, CirclePoint, ConvergentTable};
use crate::numeric::{
    big_ratio_to_f64, circle_norm, ln_big, mod1, rat_from_f64, rat_to_f64, unit_fraction_sum,
    BigRatio, Int, KahanSum, Rat,
};

const ANCHOR_STRIDE: u64 = 1024;
const REFINE_BELOW: f64 = 1e-3;
const CONDITION_TERM: f64 = 1e12;

#[derive(Debug, Error)]
pub enum BirkhoffError {
    #[error("psi has a pole at 0")]
    PoleAtZero,
    #[error("orbit hits the pole at index {0}")]
    OrbitHitsPole(u64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("range error: {0}")]
    RangeError(String),
    #[error("intervals overlap: {0}")]
    OverlappingIntervals(String),
    #[error("construction needs {needed} intervals, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error(transparent)]
    Cf(#[from] CfError),
}

type Result<T> = std::result::Result<T, BirkhoffError>;

// ---------------------------------------------------------------------------
// ψ and its split
// ---------------------------------------------------------------------------

/// ψ₁ = 1/y, ψ₂ = 1/(1−y) and ψ = max(ψ₁, ψ₂) = 1/‖y‖ for y in (0,1).
#[derive(Debug, Clone)]
pub struct PsiTriple {
    pub psi1: Rat,
    pub psi2: Rat,
    pub psi: Rat,
}

pub fn psi_eval(y: &CirclePoint) -> Result<PsiTriple> {
    if y.value().is_zero() {
        return Err(BirkhoffError::PoleAtZero);
    }
    let psi1 = y.value().recip();
    let psi2 = (Rat::one() - y.value()).recip();
    let psi = psi1.clone().max(psi2.clone());
    Ok(PsiTriple { psi1, psi2, psi })
}

// ---------------------------------------------------------------------------
// Exact orbit over a common denominator
// ---------------------------------------------------------------------------

/// The orbit x + iα reduced to integer arithmetic: on the common denominator
/// L, the i-th point has numerator (x0 + i·step) mod L.
pub struct ExactOrbit {
    l: Int,
    x0: Int,
    step: Int,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    /// 1/y on the [0,1) representative.
    Psi1,
    /// 1/(1−y).
    Psi2,
    /// 1/‖y‖.
    Norm,
}

impl ExactOrbit {
    pub fn new(alpha: &Rat, x: &Rat) -> ExactOrbit {
        let l = num_integer::Integer::lcm(alpha.denom(), x.denom());
        let x0 = num_integer::Integer::mod_floor(&(x.numer() * (&l / x.denom())), &l);
        let step = num_integer::Integer::mod_floor(&(alpha.numer() * (&l / alpha.denom())), &l);
        ExactOrbit { l, x0, step }
    }

    pub fn denominator(&self) -> &Int {
        &self.l
    }

    /// Numerator of the i-th orbit point over L.
    pub fn point_numer(&self, i: u64) -> Int {
        num_integer::Integer::mod_floor(&(&self.x0 + &self.step * Int::from(i)), &self.l)
    }

    pub fn point_f64(&self, i: u64) -> f64 {
        big_ratio_to_f64(&self.point_numer(i), &self.l)
    }

    fn kind_numer(&self, y: Int, kind: PsiKind) -> Int {
        match kind {
            PsiKind::Psi1 => y,
            PsiKind::Psi2 => &self.l - y,
            PsiKind::Norm => {
                let opp = &self.l - &y;
                y.min(opp)
            }
        }
    }

    /// Numerators k_i with ψ_kind(y_i) = L/k_i, for i = 0..n. A zero entry
    /// is a pole.
    pub fn numerators(&self, n: u64, kind: PsiKind) -> Vec<Int> {
        let mut out = Vec::with_capacity(n as usize);
        let mut y = self.x0.clone();
        for _ in 0..n {
            out.push(self.kind_numer(y.clone(), kind));
            y += &self.step;
            if y >= self.l {
                y -= &self.l;
            }
        }
        out
    }

    /// Exact ψ value at index i.
    pub fn psi_exact(&self, i: u64, kind: PsiKind) -> Result<Rat> {
        let k = self.kind_numer(self.point_numer(i), kind);
        if k.is_zero() {
            return Err(BirkhoffError::OrbitHitsPole(i));
        }
        Ok(Rat::new(self.l.clone(), k))
    }

    fn psi_f64_refined(&self, i: u64, kind: PsiKind) -> Result<f64> {
        let k = self.kind_numer(self.point_numer(i), kind);
        if k.is_zero() {
            return Err(BirkhoffError::OrbitHitsPole(i));
        }
        Ok(big_ratio_to_f64(&self.l, &k))
    }
}

// ---------------------------------------------------------------------------
// Birkhoff sums
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    Exact,
    Double,
}

/// Prefix sums S_1..S_n of Σ ψ(x + iα).
#[derive(Debug)]
pub struct SumSeries {
    pub x: CirclePoint,
    pub mode: SumMode,
    /// f64 shadows of the prefix sums (empty unless recording was requested).
    pub prefix: Vec<f64>,
    pub total: f64,
    /// Exact total, in exact mode.
    pub exact_total: Option<BigRatio>,
    /// Raised when any term exceeds 1e12 (pole proximity).
    pub condition_flagged: bool,
    /// Rigorous relative error bound of `total` in double mode.
    pub rel_error_bound: f64,
}

fn exact_sum_from_numerators(l: &Int, ks: &[Int]) -> Result<BigRatio> {
    for (i, k) in ks.iter().enumerate() {
        if k.is_zero() {
            return Err(BirkhoffError::OrbitHitsPole(i as u64));
        }
    }
    let s = unit_fraction_sum(ks);
    Ok(s.mul_int(l))
}

fn birkhoff_impl(
    angle: &Angle,
    x: &CirclePoint,
    n: u64,
    kind: PsiKind,
    mode: SumMode,
    record_prefix: bool,
) -> Result<SumSeries> {
    assert!(n >= 1);
    let orbit = ExactOrbit::new(angle.value(), x.value());
    match mode {
        SumMode::Exact => {
            let ks = orbit.numerators(n, kind);
            let mut prefix = Vec::new();
            if record_prefix {
                let mut acc = KahanSum::new();
                for k in &ks {
                    if k.is_zero() {
                        break;
                    }
                    acc.add(big_ratio_to_f64(&orbit.l, k));
                    prefix.push(acc.value());
                }
            }
            let exact = exact_sum_from_numerators(&orbit.l, &ks)?;
            let total = exact.to_f64();
            let mut max_term = 0.0f64;
            for k in &ks {
                let t = big_ratio_to_f64(&orbit.l, k);
                if t > max_term {
                    max_term = t;
                }
            }
            Ok(SumSeries {
                x: x.clone(),
                mode,
                prefix,
                total,
                exact_total: Some(exact),
                condition_flagged: max_term > CONDITION_TERM,
                rel_error_bound: 0.0,
            })
        }
        SumMode::Double => {
            let alpha = rat_to_f64(angle.value());
            let mut acc = KahanSum::new();
            let mut prefix = if record_prefix {
                Vec::with_capacity(n as usize)
            } else {
                Vec::new()
            };
            let mut flagged = false;
            let mut y = orbit.point_f64(0);
            for i in 0..n {
                if i % ANCHOR_STRIDE == 0 && i > 0 {
                    y = orbit.point_f64(i);
                }
                let norm = match kind {
                    PsiKind::Psi1 => y,
                    PsiKind::Psi2 => 1.0 - y,
                    PsiKind::Norm => y.min(1.0 - y),
                };
                let term = if norm < REFINE_BELOW {
                    orbit.psi_f64_refined(i, kind)?
                } else {
                    1.0 / norm
                };
                if term > CONDITION_TERM {
                    flagged = true;
                }
                acc.add(term);
                if record_prefix {
                    prefix.push(acc.value());
                }
                y += alpha;
                if y >= 1.0 {
                    y -= 1.0;
                }
            }
            let rel = (ANCHOR_STRIDE as f64 * f64::EPSILON) / REFINE_BELOW + 8.0 * f64::EPSILON;
            Ok(SumSeries {
                x: x.clone(),
                mode,
                prefix,
                total: acc.value(),
                exact_total: None,
                condition_flagged: flagged,
                rel_error_bound: rel,
            })
        }
    }
}

/// Birkhoff sum series S_1..S_n of ψ = 1/‖·‖ along x, R_α(x), …, with
/// recorded prefix sums.
pub fn birkhoff_series(angle: &Angle, x: &CirclePoint, n: u64, mode: SumMode) -> Result<SumSeries> {
    birkhoff_impl(angle, x, n, PsiKind::Norm, mode, true)
}

/// Total S_n only (no prefix storage); use for long orbits.
pub fn birkhoff_total(angle: &Angle, x: &CirclePoint, n: u64, mode: SumMode) -> Result<SumSeries> {
    birkhoff_impl(angle, x, n, PsiKind::Norm, mode, false)
}

/// Exact S_n as an unreduced ratio.
pub fn birkhoff_exact(angle: &Angle, x: &CirclePoint, n: u64) -> Result<BigRatio> {
    let orbit = ExactOrbit::new(angle.value(), x.value());
    let ks = orbit.numerators(n, PsiKind::Norm);
    exact_sum_from_numerators(&orbit.l, &ks)
}

/// Exact one-sided sum Σ_{i<n} ψ_kind(x + iα).
pub fn birkhoff_exact_kind(
    angle: &Angle,
    x: &CirclePoint,
    n: u64,
    kind: PsiKind,
) -> Result<BigRatio> {
    let orbit = ExactOrbit::new(angle.value(), x.value());
    let ks = orbit.numerators(n, kind);
    exact_sum_from_numerators(&orbit.l, &ks)
}

/// Θ_n^β(x) = S_n(x)/S_n(x−β).
#[derive(Debug)]
pub struct Theta {
    pub value: f64,
    /// Present in exact mode (reduced; meant for moderate n).
    pub exact: Option<Rat>,
    pub condition_flagged: bool,
}

pub fn theta(
    angle: &Angle,
    x: &CirclePoint,
    beta: &CirclePoint,
    n: u64,
    mode: SumMode,
) -> Result<Theta> {
    let shifted = CirclePoint::new(x.value() - beta.value());
    match mode {
        SumMode::Exact => {
            let num = birkhoff_exact(angle, x, n)?;
            let den = birkhoff_exact(angle, &shifted, n)?;
            let exact = Rat::new(&num.num * &den.den, &num.den * &den.num);
            Ok(Theta {
                value: rat_to_f64(&exact),
                exact: Some(exact),
                condition_flagged: false,
            })
        }
        SumMode::Double => {
            let num = birkhoff_total(angle, x, n, SumMode::Double)?;
            let den = birkhoff_total(angle, &shifted, n, SumMode::Double)?;
            Ok(Theta {
                value: num.total / den.total,
                exact: None,
                condition_flagged: num.condition_flagged || den.condition_flagged,
            })
        }
    }
}

/// The involution J_n^β = R_{β−(n−1)α} ∘ I; applying it twice is the
/// identity, and Θ_n^β ∘ J_n^β = 1/Θ_n^β.
pub fn j_involution(angle: &Angle, n: u64, beta: &CirclePoint, x: &CirclePoint) -> CirclePoint {
    let shift = beta.value() - angle.value() * Int::from(n - 1);
    CirclePoint::new(shift - x.value())
}

// ---------------------------------------------------------------------------
// Sector and rational-comparison oracles
// ---------------------------------------------------------------------------

/// Outcome of a single inequality oracle: lhs ≤/≥ rhs as stated, with the
/// slack left in the bound.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

impl BoundReport {
    fn upper(lhs: f64, rhs: f64) -> Self {
        BoundReport {
            lhs,
            rhs,
            holds: lhs <= rhs,
            slack: rhs - lhs,
        }
    }

    fn strict_upper(lhs: f64, rhs: f64) -> Self {
        BoundReport {
            lhs,
            rhs,
            holds: lhs < rhs,
            slack: rhs - lhs,
        }
    }
}

/// Sector sum report: S = Σ_{i<q_n} ψ(R^i y) against
/// ψ(y₀) + log(q_n)/(2λ^(n−1)) from below and ψ(y₀) + 4·log(q_n)/λ^(n−1)
/// from above, y₀ the closest orbit point to 0.
#[derive(Debug)]
pub struct SectorReport {
    pub sum: f64,
    pub psi_y0: f64,
    pub y0: CirclePoint,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn sector_sum_bounds(angle: &Angle, y: &CirclePoint, n: usize) -> Result<SectorReport> {
    angle.check_level(n)?;
    if n < 1 {
        return Err(BirkhoffError::RangeError("need n >= 1".into()));
    }
    let table = convergents(angle);
    let q_n = table
        .q(n)
        .to_u64()
        .ok_or_else(|| BirkhoffError::RangeError("q_n too large for a sector sum".into()))?;
    let orbit = ExactOrbit::new(angle.value(), y.value());
    let ks = orbit.numerators(q_n, PsiKind::Norm);
    let sum = exact_sum_from_numerators(&orbit.l, &ks)?;
    // the closest point to 0 has the largest ψ, i.e. the smallest k_i
    let (i0, _) = ks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .expect("nonempty orbit");
    let y0 = CirclePoint::new(Rat::new(orbit.point_numer(i0 as u64), orbit.l.clone()));
    let psi_y0 = big_ratio_to_f64(&orbit.l, &ks[i0]);
    let log_q = ln_big(table.q(n));
    let lam_prev = rat_to_f64(table.lambda(n - 1));
    let lower = psi_y0 + log_q / (2.0 * lam_prev);
    let upper = psi_y0 + 4.0 * log_q / lam_prev;
    let s = sum.to_f64();
    Ok(SectorReport {
        sum: s,
        psi_y0,
        y0,
        lower,
        upper,
        holds: lower <= s && s <= upper,
    })
}

/// S_{k·q_n}(x) > k·log(q_n)/(2λ^(n−1)) for every k ≥ 1 and every x.
pub fn kq_lower_bound_check(
    angle: &Angle,
    x: &CirclePoint,
    n: usize,
    k: u64,
    mode: SumMode,
) -> Result<BoundReport> {
    angle.check_level(n)?;
    if n < 1 || k < 1 {
        return Err(BirkhoffError::RangeError("need n >= 1 and k >= 1".into()));
    }
    let table = convergents(angle);
    let q_n = table
        .q(n)
        .to_u64()
        .ok_or_else(|| BirkhoffError::RangeError("q_n too large".into()))?;
    let total = birkhoff_total(angle, x, k * q_n, mode)?;
    let rhs = k as f64 * ln_big(table.q(n)) / (2.0 * rat_to_f64(table.lambda(n - 1)));
    Ok(BoundReport {
        lhs: total.total,
        rhs,
        holds: total.total > rhs,
        slack: total.total - rhs,
    })
}

/// Close-return dominance: for n ≥ 11, a_{n+1} ≥ 2, 0 < i < q_n and
/// ‖x+iα‖ < ε/(q_n log(3q_n)), the single close return dominates the
/// history: 6ε/‖x+iα‖ > S_i(x).
pub fn close_return_dominance(
    angle: &Angle,
    x: &CirclePoint,
    i: u64,
    n: usize,
    epsilon: &Rat,
) -> Result<BoundReport> {
    angle.check_level(n)?;
    if n < 11 {
        return Err(BirkhoffError::HypothesisViolated(format!("n = {n} < 11")));
    }
    if angle.quotients()[n + 1] < Int::from(2) {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "a_{} = 1 < 2",
            n + 1
        )));
    }
    if !(epsilon.is_positive() && *epsilon < Rat::one()) {
        return Err(BirkhoffError::HypothesisViolated("need 0 < ε < 1".into()));
    }
    let table = convergents(angle);
    if i == 0 || Int::from(i) >= *table.q(n) {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "i = {i} outside (0, q_{n})"
        )));
    }
    let close = circle_norm(&(x.value() + angle.value() * Int::from(i)));
    if close.is_zero() {
        return Err(BirkhoffError::OrbitHitsPole(i));
    }
    let q_n_f = big_ratio_to_f64(table.q(n), &Int::one());
    let gate = rat_to_f64(epsilon) / (q_n_f * (3.0 * q_n_f).ln());
    if rat_to_f64(&close) >= gate {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "‖x+iα‖ = {} not below ε/(q_n log 3q_n) = {gate}",
            rat_to_f64(&close)
        )));
    }
    let mode = if i <= 100_000 {
        SumMode::Exact
    } else {
        SumMode::Double
    };
    let s_i = birkhoff_total(angle, x, i, mode)?;
    let lhs = 6.0 * rat_to_f64(epsilon) / rat_to_f64(&close);
    Ok(BoundReport {
        lhs,
        rhs: s_i.total,
        holds: lhs > s_i.total,
        slack: lhs - s_i.total,
    })
}

/// One-sided Lipschitz transfer over a q_n block: with ‖x−y‖ ≤ λ^(n), the
/// ψ₁ sums over j < q_n differ by at most the two argmax terms plus
/// λ^(n)·q_n/λ^(n−1). Fully exact comparison.
pub fn lipschitz_transfer(
    angle: &Angle,
    x: &CirclePoint,
    y: &CirclePoint,
    n: usize,
    kind: PsiKind,
) -> Result<BoundReport> {
    angle.check_level(n)?;
    if n < 1 {
        return Err(BirkhoffError::RangeError("need n >= 1".into()));
    }
    let table = convergents(angle);
    let dist = circle_norm(&(x.value() - y.value()));
    if dist > *table.lambda(n) {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "‖x−y‖ = {} > λ^({n})",
            rat_to_f64(&dist)
        )));
    }
    let q_n = table
        .q(n)
        .to_u64()
        .ok_or_else(|| BirkhoffError::RangeError("q_n too large".into()))?;
    let ox = ExactOrbit::new(angle.value(), x.value());
    let oy = ExactOrbit::new(angle.value(), y.value());
    let kx = ox.numerators(q_n, kind);
    let ky = oy.numerators(q_n, kind);
    let sx = exact_sum_from_numerators(&ox.l, &kx)?;
    let sy = exact_sum_from_numerators(&oy.l, &ky)?;
    // argmax of ψ is argmin of the numerator
    let j0 = kx.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).unwrap().0 as u64;
    let j1 = ky.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).unwrap().0 as u64;
    let lhs = {
        let d = sx.sub(&sy);
        BigRatio::new(d.num.abs(), d.den)
    };
    let mut rhs = BigRatio::from_rat(&(&(table.lambda(n) * table.q(n)) / table.lambda(n - 1)));
    for j in [j0, j1] {
        let d = (ox.psi_exact(j, kind)? - oy.psi_exact(j, kind)?).abs();
        rhs = rhs.add(&BigRatio::from_rat(&d));
    }
    let holds = lhs.cmp_ratio(&rhs) != std::cmp::Ordering::Greater;
    let (lhs_f, rhs_f) = (lhs.to_f64(), rhs.to_f64());
    Ok(BoundReport {
        lhs: lhs_f,
        rhs: rhs_f,
        holds,
        slack: rhs_f - lhs_f,
    })
}

/// Points shadowing the rational grid k/q within δ < 1/q have reciprocal-norm
/// sum at most 2q·log(3q)/(1−δq).
pub fn rational_shadow_sum_bound(
    q: u64,
    delta: &Rat,
    points: &[CirclePoint],
) -> Result<BoundReport> {
    if points.len() as u64 != q - 1 {
        return Err(BirkhoffError::RangeError(format!(
            "need q−1 = {} points, got {}",
            q - 1,
            points.len()
        )));
    }
    let q_rat = Rat::from(Int::from(q));
    if !(delta.is_positive() && delta * &q_rat < Rat::one()) {
        return Err(BirkhoffError::HypothesisViolated("need 0 < δ < 1/q".into()));
    }
    let mut sum = Rat::zero();
    for (idx, x) in points.iter().enumerate() {
        let k = idx as u64 + 1;
        let target = Rat::new(Int::from(k), Int::from(q));
        if circle_norm(&(x.value() - &target)) >= *delta {
            return Err(BirkhoffError::HypothesisViolated(format!(
                "point {k} is not δ-close to {k}/{q}"
            )));
        }
        let norm = x.norm();
        if norm.is_zero() {
            return Err(BirkhoffError::PoleAtZero);
        }
        sum += norm.recip();
    }
    let lhs = rat_to_f64(&sum);
    let dq = rat_to_f64(&(delta * &q_rat));
    let rhs = 2.0 * q as f64 * (3.0 * q as f64).ln() / (1.0 - dq);
    Ok(BoundReport::upper(lhs, rhs))
}

/// β at distance > A/q from the grid n/q gives
/// Σ_{n<q} 1/‖n/q − β‖ < 2q(A⁻¹ + log(A⁻¹ q)).
pub fn offgrid_sum_bound(q: u64, a_margin: &Rat, beta: &CirclePoint) -> Result<BoundReport> {
    if !a_margin.is_positive() {
        return Err(BirkhoffError::HypothesisViolated("need A > 0".into()));
    }
    let gate = a_margin / Rat::from(Int::from(q));
    let mut sum = Rat::zero();
    for n in 0..q {
        let d = circle_norm(&(Rat::new(Int::from(n), Int::from(q)) - beta.value()));
        if d <= gate {
            return Err(BirkhoffError::HypothesisViolated(format!(
                "grid point {n}/{q} within A/q of β"
            )));
        }
        sum += d.recip();
    }
    let a_inv = rat_to_f64(&a_margin.recip());
    let rhs = 2.0 * q as f64 * (a_inv + (a_inv * q as f64).ln());
    Ok(BoundReport::strict_upper(rat_to_f64(&sum), rhs))
}

/// min_n ‖n/q − a/b‖ for coprime a,b and coprime b,q is at least 1/(bq).
pub fn smallest_distance_margin(a: u64, b: u64, q: u64) -> Result<(Rat, BoundReport)> {
    if b < 2 {
        return Err(BirkhoffError::HypothesisViolated("need b >= 2".into()));
    }
    if num_integer::Integer::gcd(&a, &b) != 1 {
        return Err(BirkhoffError::HypothesisViolated("gcd(a,b) != 1".into()));
    }
    if num_integer::Integer::gcd(&b, &q) != 1 {
        return Err(BirkhoffError::HypothesisViolated("gcd(b,q) != 1".into()));
    }
    let target = Rat::new(Int::from(a), Int::from(b));
    let mut best: Option<Rat> = None;
    for n in 0..q {
        let d = circle_norm(&(Rat::new(Int::from(n), Int::from(q)) - &target));
        if best.as_ref().is_none_or(|m| d < *m) {
            best = Some(d);
        }
    }
    let best = best.unwrap();
    let bound = Rat::new(Int::one(), Int::from(b) * Int::from(q));
    let holds = best >= bound;
    let report = BoundReport {
        lhs: rat_to_f64(&best),
        rhs: rat_to_f64(&bound),
        holds,
        slack: rat_to_f64(&best) - rat_to_f64(&bound),
    };
    Ok((best, report))
}

// ---------------------------------------------------------------------------
// Interval unions on the circle
// ---------------------------------------------------------------------------

/// A finite union of half-open intervals [a, b) on the circle, kept sorted
/// and non-overlapping, with exact total measure.
#[derive(Debug, Clone)]
pub struct IntervalUnion {
    intervals: Vec<(Rat, Rat)>,
    measure: Rat,
}

impl IntervalUnion {
    /// Builds a union from raw [lo, hi) pieces (interpreted mod 1; each must
    /// be shorter than the full circle). With `require_disjoint` any interior
    /// overlap is an error; otherwise overlaps merge.
    pub fn from_circle_intervals(
        raw: impl IntoIterator<Item = (Rat, Rat)>,
        require_disjoint: bool,
    ) -> Result<IntervalUnion> {
        let mut pieces: Vec<(Rat, Rat)> = Vec::new();
        for (lo, hi) in raw {
            if hi <= lo {
                return Err(BirkhoffError::RangeError("empty interval".into()));
            }
            if &hi - &lo >= Rat::one() {
                return Err(BirkhoffError::RangeError(
                    "interval covers the circle".into(),
                ));
            }
            let a = mod1(&lo);
            let b = &a + (&hi - &lo);
            if b <= Rat::one() {
                pieces.push((a, b));
            } else {
                pieces.push((a, Rat::one()));
                pieces.push((Rat::zero(), b - Rat::one()));
            }
        }
        pieces.sort();
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    if require_disjoint {
                        return Err(BirkhoffError::OverlappingIntervals(format!(
                            "[{a}, {b}) overlaps [{}, {})",
                            last.0, last.1
                        )));
                    }
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        let mut measure = Rat::zero();
        for (a, b) in &merged {
            measure += b - a;
        }
        Ok(IntervalUnion {
            intervals: merged,
            measure,
        })
    }

    pub fn measure(&self) -> &Rat {
        &self.measure
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.intervals
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let x = mod1(x);
        let idx = self.intervals.partition_point(|(a, _)| *a <= x);
        idx > 0 && x < self.intervals[idx - 1].1
    }

    /// Uniform-by-measure sample (dyadic offsets at 64-bit granularity).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Rat {
        assert!(!self.intervals.is_empty());
        let u = rng.gen::<u64>();
        let frac = Rat::new(Int::from(u), Int::from(u128::from(u64::MAX) + 1));
        let mut target = frac * &self.measure;
        for (a, b) in &self.intervals {
            let len = b - a;
            if target < len {
                return a + target;
            }
            target -= len;
        }
        self.intervals.last().unwrap().0.clone()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "measure": format!("{}/{}", self.measure.numer(), self.measure.denom()),
            "measure_dec": rat_to_f64(&self.measure),
            "intervals": self.intervals.iter().map(|(a, b)| {
                serde_json::json!([format!("{}/{}", a.numer(), a.denom()),
                                   format!("{}/{}", b.numer(), b.denom())])
            }).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// E_{n,ℓ}: λ^(n)/2-neighbourhood of the backward orbit of 0
// ---------------------------------------------------------------------------

/// E_{n,ℓ} = ∪_{k<ℓq_n} R_α^{−k}(I_n) with I_n = [−λ^(n)/2, λ^(n)/2), built
/// exactly with disjointness verified; measure is exactly ℓ·q_n·λ^(n).
pub fn build_e(angle: &Angle, n: usize, ell: u64) -> Result<IntervalUnion> {
    let table = convergents(angle);
    let count = check_e_range(angle, &table, n, ell)?;
    let half = table.lambda(n) / Int::from(2);
    let alpha = angle.value();
    let mut centers = Vec::with_capacity(count as usize);
    let mut c = Rat::zero();
    for _ in 0..count {
        centers.push(c.clone());
        c = mod1(&(c - alpha));
    }
    let union = IntervalUnion::from_circle_intervals(
        centers.into_iter().map(|c| (&c - &half, &c + &half)),
        true,
    )?;
    let closed_form = e_measure(&table, n, ell);
    assert_eq!(union.measure(), &closed_form, "E measure != ℓ·q_n·λ^(n)");
    Ok(union)
}

fn check_e_range(angle: &Angle, table: &ConvergentTable, n: usize, ell: u64) -> Result<u64> {
    angle.check_level(n)?;
    if ell < 1 {
        return Err(BirkhoffError::RangeError("need ℓ >= 1".into()));
    }
    let m = Int::from(ell) * table.q(n);
    if m >= *table.q(n + 1) {
        return Err(BirkhoffError::RangeError(format!(
            "ℓ·q_n = {m} >= q_{} = {}",
            n + 1,
            table.q(n + 1)
        )));
    }
    Ok(m.to_u64().expect("ℓ·q_n fits u64"))
}

/// Closed-form measure ℓ·q_n·λ^(n) of E_{n,ℓ}.
pub fn e_measure(table: &ConvergentTable, n: usize, ell: u64) -> Rat {
    Rat::from(Int::from(ell) * table.q(n)) * table.lambda(n)
}

/// Measure-uniform samples from E_{n,ℓ} without materializing the union:
/// pick the orbit index k < ℓ·q_n uniformly and a dyadic offset in I_n.
/// Returns (point, witness index k).
pub fn sample_e_points<R: Rng>(
    angle: &Angle,
    n: usize,
    ell: u64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(CirclePoint, u64)>> {
    let table = convergents(angle);
    let m = check_e_range(angle, &table, n, ell)?;
    let half = table.lambda(n) / Int::from(2);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(0..m);
        let u = rng.gen::<u64>();
        let frac = Rat::new(Int::from(u), Int::from(u128::from(u64::MAX) + 1));
        let offset = frac * table.lambda(n) - &half;
        let x = CirclePoint::new(offset - angle.value() * Int::from(k));
        out.push((x, k));
    }
    Ok(out)
}

fn confirm_e_membership(
    angle: &Angle,
    table: &ConvergentTable,
    n: usize,
    ell: u64,
    x: &CirclePoint,
    witness_k: Option<u64>,
    widened: bool,
) -> Result<()> {
    let m = check_e_range(angle, table, n, ell)?;
    let radius = if widened {
        table.lambda(n) * Int::from(2)
    } else {
        table.lambda(n) / Int::from(2)
    };
    let hit = |k: u64| -> bool {
        let d = circle_norm(&(x.value() + angle.value() * Int::from(k)));
        d < radius
    };
    match witness_k {
        Some(k) if k < m && hit(k) => Ok(()),
        Some(k) => Err(BirkhoffError::HypothesisViolated(format!(
            "witness index {k} does not place x in the neighbourhood"
        ))),
        None => {
            if m > 2_000_000 {
                return Err(BirkhoffError::BudgetExceeded {
                    needed: m,
                    budget: 2_000_000,
                });
            }
            let orbit = ExactOrbit::new(angle.value(), x.value());
            let radius_gate = &radius * &orbit.l;
            let gate = radius_gate.to_integer();
            let mut y = orbit.x0.clone();
            for _ in 0..m {
                let k = orbit.kind_numer(y.clone(), PsiKind::Norm);
                if k < gate {
                    return Ok(());
                }
                y += &orbit.step;
                if y >= orbit.l {
                    y -= &orbit.l;
                }
            }
            Err(BirkhoffError::HypothesisViolated(
                "x is not in the neighbourhood of the orbit".into(),
            ))
        }
    }
}

/// Ground floor lower bound: x ∈ E_{n,ℓ} gives S_{ℓq_n}(x) ≥ log(ℓ)/λ^(n);
/// the widened variant (radius 2λ^(n)) gives log(ℓ)/(4λ^(n)).
pub fn ground_floor_lower_bound(
    angle: &Angle,
    n: usize,
    ell: u64,
    x: &CirclePoint,
    widened: bool,
    witness_k: Option<u64>,
    mode: SumMode,
) -> Result<BoundReport> {
    let table = convergents(angle);
    confirm_e_membership(angle, &table, n, ell, x, witness_k, widened)?;
    let m = Int::from(ell) * table.q(n);
    let total = birkhoff_total(angle, x, m.to_u64().unwrap(), mode)?;
    let denom = if widened { 4.0 } else { 1.0 };
    let rhs = (ell as f64).ln() / (denom * rat_to_f64(table.lambda(n)));
    Ok(BoundReport {
        lhs: total.total,
        rhs,
        holds: total.total >= rhs,
        slack: total.total - rhs,
    })
}

/// Upper bound for the shifted sum: with β at grid distance ≥ A/q_n,
/// ℓ+1 ≤ B·a_{n+1} and x ∈ E_{n,ℓ}:
/// Σ_{k<ℓq_n} 1/‖x+kα−β‖ < 2ℓq_n(A⁻¹+log(A⁻¹q_n))/(1−B/A).
#[allow(clippy::too_many_arguments)]
pub fn abc_upper_bound(
    angle: &Angle,
    n: usize,
    ell: u64,
    beta: &CirclePoint,
    a_margin: &Rat,
    b_margin: &Rat,
    x: &CirclePoint,
    witness_k: Option<u64>,
    mode: SumMode,
) -> Result<BoundReport> {
    let table = convergents(angle);
    let half = Rat::new(Int::one(), Int::from(2));
    if !(b_margin.is_positive() && b_margin < a_margin && *a_margin < half) {
        return Err(BirkhoffError::HypothesisViolated(
            "need 0 < B < A < 1/2".into(),
        ));
    }
    if Rat::from(Int::from(ell) + 1) > b_margin * Rat::from(angle.quotients()[n + 1].clone()) {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "ℓ+1 = {} > B·a_{}",
            ell + 1,
            n + 1
        )));
    }
    let q_n = table.q_usize(n) as u64;
    let gate = a_margin / Rat::from(table.q(n).clone());
    for i in 0..q_n {
        let d = circle_norm(&(Rat::new(Int::from(i), table.q(n).clone()) - beta.value()));
        if d < gate {
            return Err(BirkhoffError::HypothesisViolated(format!(
                "grid point {i}/q_n within A/q_n of β"
            )));
        }
    }
    confirm_e_membership(angle, &table, n, ell, x, witness_k, false)?;
    let m = (Int::from(ell) * table.q(n)).to_u64().unwrap();
    let shifted = CirclePoint::new(x.value() - beta.value());
    let total = birkhoff_total(angle, &shifted, m, mode)?;
    let a_inv = rat_to_f64(&a_margin.recip());
    let q_f = big_ratio_to_f64(table.q(n), &Int::one());
    let rhs =
        2.0 * m as f64 * (a_inv + (a_inv * q_f).ln()) / (1.0 - rat_to_f64(&(b_margin / a_margin)));
    Ok(BoundReport::strict_upper(total.total, rhs))
}

// ---------------------------------------------------------------------------
// Bad sets D_n
// ---------------------------------------------------------------------------

/// The scale parameters at (n, k): a_{n,k} = log(k)/λ^(n),
/// b_{n,k} = k·log(q_n)/λ^(n−1), c_{n,k} = max of the two, and the interval
/// I_{n,k} = [−u_n/(2c_{n,k}), u_n/(2c_{n,k})].
#[derive(Debug, Clone)]
pub struct BadSetParams {
    pub n: usize,
    pub k: u64,
    pub a_nk: f64,
    pub b_nk: f64,
    pub c_nk: f64,
    /// Exact (dyadic) half-width of I_{n,k} actually used downstream.
    pub half_width: Rat,
}

pub fn bad_set_params(table: &ConvergentTable, n: usize, k: u64, u_n: f64) -> BadSetParams {
    assert!(n >= 2 && k >= 1);
    let a_nk = (k as f64).ln() / rat_to_f64(table.lambda(n));
    let b_nk = k as f64 * ln_big(table.q(n)) / rat_to_f64(table.lambda(n - 1));
    let c_nk = a_nk.max(b_nk);
    let half_width = rat_from_f64(u_n / (2.0 * c_nk));
    BadSetParams {
        n,
        k,
        a_nk,
        b_nk,
        c_nk,
        half_width,
    }
}

/// n(i) = max{n : q_n ≤ i} and k(i) = max{k : k·q_{n(i)} ≤ i}.
pub fn level_index_of(table: &ConvergentTable, i: u64) -> (usize, u64) {
    let i_int = Int::from(i);
    let mut n = 0;
    for m in 0..=table.depth() {
        if *table.q(m) <= i_int {
            n = m;
        } else {
            break;
        }
    }
    let k = (&i_int / table.q(n)).to_u64().expect("k fits u64");
    (n, k)
}

/// Schedules for the u_n sequence.
#[derive(Debug, Clone)]
pub enum USchedule {
    /// u_n = n^(γ/4), for rapidly growing q_n.
    Power { gamma: f64 },
    /// u_n = log log(n+3), a slow default for the Σ 1/log a_n regime.
    LogLog,
}

impl USchedule {
    pub fn u(&self, n: usize) -> f64 {
        match self {
            USchedule::Power { gamma } => (n as f64).powf(gamma / 4.0),
            USchedule::LogLog => ((n as f64) + 3.0).ln().ln(),
        }
    }
}

/// v_n = ⌈log(n+2)⌉ by default.
pub fn default_v(n: usize) -> u64 {
    ((n as f64) + 2.0).ln().ceil() as u64
}

#[derive(Debug)]
pub struct BadSets {
    pub d_n: IntervalUnion,
    pub tilde_d_n: IntervalUnion,
    /// (m, λ(D_m), running Σ λ(D_m), running Σ v_m·λ(D_m)) for m = 2..=n.
    pub ledger: Vec<(usize, f64, f64, f64)>,
    /// v-schedule sanity at the tested range: v non-decreasing and growing,
    /// and v_{m+1}/u_m trending down over the tested levels.
    pub v_checks_ok: bool,
}

const BAD_SET_BUDGET: u64 = 400_000;

fn build_d_level(
    angle: &Angle,
    table: &ConvergentTable,
    n: usize,
    u_n: f64,
) -> Result<IntervalUnion> {
    let q_n = table
        .q(n)
        .to_u64()
        .ok_or_else(|| BirkhoffError::RangeError("q_n too large".into()))?;
    let q_next = table
        .q(n + 1)
        .to_u64()
        .ok_or(BirkhoffError::BudgetExceeded {
            needed: u64::MAX,
            budget: BAD_SET_BUDGET,
        })?;
    if q_next - q_n > BAD_SET_BUDGET {
        return Err(BirkhoffError::BudgetExceeded {
            needed: q_next - q_n,
            budget: BAD_SET_BUDGET,
        });
    }
    let alpha = angle.value();
    let mut raw = Vec::with_capacity((q_next - q_n) as usize);
    let mut center = mod1(&(-(alpha * Int::from(q_n))));
    let mut width = bad_set_params(table, n, 1, u_n).half_width;
    let mut current_k = 1u64;
    for i in q_n..q_next {
        let k = i / q_n;
        if k != current_k {
            current_k = k;
            width = bad_set_params(table, n, k, u_n).half_width;
        }
        raw.push((&center - &width, &center + &width));
        center = mod1(&(center - alpha));
    }
    IntervalUnion::from_circle_intervals(raw, false)
}

/// Builds D_n (close-return bad set over [q_n, q_{n+1})) and its
/// v-reindexed variant over [v_n·q_n, v_{n+1}·q_{n+1}), plus the measure
/// ledger for levels 2..=n.
pub fn build_bad_sets(angle: &Angle, u: &USchedule, v: &[u64], n: usize) -> Result<BadSets> {
    angle.check_level(n + 1)?;
    if n < 2 {
        return Err(BirkhoffError::RangeError("need n >= 2".into()));
    }
    let table = convergents(angle);
    let d_n = build_d_level(angle, &table, n, u.u(n))?;

    // ledger over all levels up to n, plain and v-weighted
    let v_at = |m: usize| -> u64 { v.get(m).copied().unwrap_or_else(|| default_v(m)) };
    let mut ledger = Vec::new();
    let mut running = 0.0;
    let mut running_v = 0.0;
    for m in 2..=n {
        let dm = if m == n {
            d_n.measure().clone()
        } else {
            build_d_level(angle, &table, m, u.u(m))?.measure().clone()
        };
        let dm = rat_to_f64(&dm);
        running += dm;
        running_v += v_at(m) as f64 * dm;
        ledger.push((m, dm, running, running_v));
    }

    // tilde variant: indices i in [v_n q_n, v_{n+1} q_{n+1}),
    // scales at (ñ(i), k̃(i)) with ñ(i) = max{m : v_m q_m ≤ i}
    let lo = v_at(n) * table.q(n).to_u64().unwrap();
    let hi = v_at(n + 1)
        .checked_mul(
            table
                .q(n + 1)
                .to_u64()
                .ok_or(BirkhoffError::BudgetExceeded {
                    needed: u64::MAX,
                    budget: BAD_SET_BUDGET,
                })?,
        )
        .ok_or(BirkhoffError::BudgetExceeded {
            needed: u64::MAX,
            budget: BAD_SET_BUDGET,
        })?;
    if hi - lo > BAD_SET_BUDGET {
        return Err(BirkhoffError::BudgetExceeded {
            needed: hi - lo,
            budget: BAD_SET_BUDGET,
        });
    }
    let tilde_n_of = |i: u64| -> usize {
        let mut m = 0;
        for t in 0..=table.depth() {
            match table.q(t).to_u64() {
                Some(qt) if v_at(t).saturating_mul(qt) <= i => m = t,
                _ => break,
            }
        }
        m
    };
    let alpha = angle.value();
    let mut raw = Vec::with_capacity((hi - lo) as usize);
    let mut center = mod1(&(-(alpha * Int::from(lo))));
    for i in lo..hi {
        let nn = tilde_n_of(i);
        let kk = i / table.q(nn).to_u64().unwrap();
        let params = bad_set_params(&table, nn.max(2), kk.max(1), u.u(nn.max(2)));
        raw.push((&center - &params.half_width, &center + &params.half_width));
        center = mod1(&(center - alpha));
    }
    let tilde_d_n = IntervalUnion::from_circle_intervals(raw, false)?;

    // v-schedule conditions at the tested range: non-decreasing (heading
    // to infinity), and the tail mean of v_{m+1}/u_m below the head mean
    // (heading to zero). Summability is what the v-weighted ledger column
    // reports.
    let mut v_checks_ok = (2..n).all(|m| v_at(m + 1) >= v_at(m));
    if n > 4 {
        let ratios: Vec<f64> = (2..n).map(|m| v_at(m + 1) as f64 / u.u(m)).collect();
        let half = ratios.len() / 2;
        let head: f64 = ratios[..half].iter().sum::<f64>() / half.max(1) as f64;
        let tail: f64 = ratios[half..].iter().sum::<f64>() / (ratios.len() - half).max(1) as f64;
        v_checks_ok &= tail <= head;
    }
    Ok(BadSets {
        d_n,
        tilde_d_n,
        ledger,
        v_checks_ok,
    })
}

/// Escape bound: x ∉ D_n and q_n ≤ i < q_{n+1} give
/// ψ(R^i x) ≤ (8/u_n)·S_i(x') for any x' within λ^(n) of x.
#[allow(clippy::too_many_arguments)]
pub fn bad_set_escape_check(
    angle: &Angle,
    d_n: &IntervalUnion,
    n: usize,
    u_n: f64,
    x: &CirclePoint,
    i: u64,
    x_prime: &CirclePoint,
    mode: SumMode,
) -> Result<BoundReport> {
    let table = convergents(angle);
    if d_n.contains(x.value()) {
        return Err(BirkhoffError::HypothesisViolated("x ∈ D_n".into()));
    }
    let in_range = Int::from(i) >= *table.q(n) && Int::from(i) < *table.q(n + 1);
    if !in_range {
        return Err(BirkhoffError::HypothesisViolated(format!(
            "i = {i} outside [q_{n}, q_{})",
            n + 1
        )));
    }
    if circle_norm(&(x.value() - x_prime.value())) > *table.lambda(n) {
        return Err(BirkhoffError::HypothesisViolated("‖x − x'‖ > λ^(n)".into()));
    }
    let orbit = ExactOrbit::new(angle.value(), x.value());
    let k = orbit.kind_numer(orbit.point_numer(i), PsiKind::Norm);
    if k.is_zero() {
        return Err(BirkhoffError::OrbitHitsPole(i));
    }
    let lhs = big_ratio_to_f64(&orbit.l, &k);
    let s = birkhoff_total(angle, x_prime, i, mode)?;
    let rhs = 8.0 / u_n * s.total;
    Ok(BoundReport::upper(lhs, rhs))
}

// ---------------------------------------------------------------------------
// Close-return series (Borel–Cantelli style partial sums)
// ---------------------------------------------------------------------------

/// Partial sums of Σ_n (q_n − q_{n−1})·min(φ(n), ‖q_{n−1}α‖); φ is indexed
/// by level, φ[0] unused.
pub fn fuchs_kim_series(angle: &Angle, phi: &[Rat], depth: usize) -> Result<Vec<Rat>> {
    angle.check_level(depth)?;
    if phi.iter().any(|p| p.is_negative()) {
        return Err(BirkhoffError::HypothesisViolated(
            "phi must be nonnegative".into(),
        ));
    }
    let table = convergents(angle);
    let mut sums = Vec::with_capacity(depth);
    let mut acc = Rat::zero();
    for n in 1..=depth {
        let gap = Rat::from(table.q(n) - table.q(n - 1));
        let lam = table.lambda(n - 1);
        let phi_n = phi.get(n).cloned().unwrap_or_else(Rat::zero);
        let m = if &phi_n < lam { phi_n } else { lam.clone() };
        acc += gap * m;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Per-index closeness thresholds ε_n/(q_n·log(3q_n)) with ε_n = 1/log n on
/// levels with a_n, a_{n+1} ≥ 2 (zero elsewhere and at n ≤ 1).
pub fn phi_threshold_schedule(angle: &Angle, depth: usize) -> Vec<Rat> {
    phi_schedule_impl(angle, depth, true)
}

/// Per-level weights ε_n/log(3q_n) (no q_n division), same qualifying
/// levels; the series then saturates at ‖q_{n−1}α‖ and its partial sums
/// grow linearly — the divergence-trend form.
pub fn phi_level_weight_schedule(angle: &Angle, depth: usize) -> Vec<Rat> {
    phi_schedule_impl(angle, depth, false)
}

#[allow(clippy::needless_range_loop)] // n is the ladder level, not an index
fn phi_schedule_impl(angle: &Angle, depth: usize, per_point: bool) -> Vec<Rat> {
    let table = convergents(angle);
    let two = Int::from(2);
    let mut out = vec![Rat::zero(); depth + 1];
    for n in 2..=depth.min(angle.depth() - 1) {
        if angle.quotients()[n] >= two && angle.quotients()[n + 1] >= two {
            let eps = 1.0 / (n as f64).ln();
            let log3q = ln_big(table.q(n)) + 3f64.ln();
            let val = if per_point {
                eps / (big_ratio_to_f64(table.q(n), &Int::one()) * log3q)
            } else {
                eps / log3q
            };
            out[n] = rat_from_f64(val);
        }
    }
    out
}
