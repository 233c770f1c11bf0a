//! Exact continued-fraction arithmetic: angles as finite partial-quotient
//! programs, the convergent ladder (p_n, q_n, ρ_n, λ^(n)), the β₀ partial
//! sums and the ℓ_n sequence.
//!
//! An irrational angle is represented by a finite prefix [a_0; a_1, …, a_N]
//! of its expansion, with exact value p_N/q_N. Convergent data of the prefix
//! coincides with the true angle's up to level N−2, so every level-indexed
//! operation carries a validity horizon of N−2 and rejects deeper levels.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{circle_norm, mod1, rat_to_f64, Int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfError {
    #[error("need at least 3 partial quotients, got {0}")]
    EmptyQuotients(usize),
    #[error("partial quotient a_{index} = {value} is not allowed (a_0 >= 0, a_i >= 1)")]
    NonPositiveQuotient { index: usize, value: Int },
    #[error("level {level} exceeds validity horizon {horizon}")]
    LevelBeyondHorizon { level: usize, horizon: usize },
}

/// A point of the circle T = R/Z: an exact rational representative in [0,1)
/// plus a double-precision shadow for fast paths.
#[derive(Debug, Clone)]
pub struct CirclePoint {
    value: Rat,
    shadow: f64,
}

impl PartialEq for CirclePoint {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for CirclePoint {}

impl PartialOrd for CirclePoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CirclePoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value.cmp(&other.value)
    }
}

impl CirclePoint {
    pub fn new(x: Rat) -> Self {
        let value = mod1(&x);
        let shadow = rat_to_f64(&value);
        CirclePoint { value, shadow }
    }

    pub fn from_ints(num: i64, den: i64) -> Self {
        CirclePoint::new(Rat::new(Int::from(num), Int::from(den)))
    }

    /// Exact representative in [0, 1).
    pub fn value(&self) -> &Rat {
        &self.value
    }

    pub fn shadow(&self) -> f64 {
        self.shadow
    }

    /// The shadow loses all relative accuracy once the point sits closer to
    /// a pole than ~1e-12.
    pub fn shadow_reliable(&self) -> bool {
        let n = self.norm();
        n.is_zero() || n > crate::numeric::rat_from_u64(1, 1_000_000_000_000)
    }

    /// ‖x‖: distance to the nearest integer.
    pub fn norm(&self) -> Rat {
        circle_norm(&self.value)
    }

    pub fn translate(&self, t: &Rat) -> CirclePoint {
        CirclePoint::new(&self.value + t)
    }

    pub fn neg(&self) -> CirclePoint {
        CirclePoint::new(-&self.value)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An angle given by a finite partial-quotient program [a_0; a_1, …, a_N].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Angle {
    quotients: Vec<Int>,
    value: Rat,
    horizon: usize,
}

impl Angle {
    /// Builds an angle from partial quotients. Requires a_0 ≥ 0, a_i ≥ 1 for
    /// i ≥ 1 and at least 3 quotients (so the horizon N−2 is non-negative).
    pub fn from_quotients(quotients: &[Int]) -> Result<Angle, CfError> {
        if quotients.len() < 3 {
            return Err(CfError::EmptyQuotients(quotients.len()));
        }
        for (i, a) in quotients.iter().enumerate() {
            let bad = if i == 0 {
                a.is_negative()
            } else {
                !a.is_positive()
            };
            if bad {
                return Err(CfError::NonPositiveQuotient {
                    index: i,
                    value: a.clone(),
                });
            }
        }
        let (mut p_prev, mut p) = (Int::one(), quotients[0].clone());
        let (mut q_prev, mut q) = (Int::zero(), Int::one());
        for a in &quotients[1..] {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = p;
            p = p_next;
            q_prev = q;
            q = q_next;
        }
        Ok(Angle {
            horizon: quotients.len() - 3,
            value: Rat::new(p, q),
            quotients: quotients.to_vec(),
        })
    }

    pub fn from_u64_quotients(quotients: &[u64]) -> Result<Angle, CfError> {
        let qs: Vec<Int> = quotients.iter().map(|&a| Int::from(a)).collect();
        Angle::from_quotients(&qs)
    }

    pub fn quotients(&self) -> &[Int] {
        &self.quotients
    }

    /// a_n, if level n is present in the program.
    pub fn quotient(&self, n: usize) -> Option<&Int> {
        self.quotients.get(n)
    }

    /// Exact value p_N/q_N of the finite continued fraction.
    pub fn value(&self) -> &Rat {
        &self.value
    }

    /// Largest level at which downstream operations may use this angle.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Index N of the last partial quotient.
    pub fn depth(&self) -> usize {
        self.quotients.len() - 1
    }

    pub fn check_level(&self, n: usize) -> Result<(), CfError> {
        if n > self.horizon {
            Err(CfError::LevelBeyondHorizon {
                level: n,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

/// One row of the convergent ladder.
#[derive(Debug, Clone)]
pub struct ConvergentRow {
    pub n: usize,
    pub p: Int,
    pub q: Int,
    /// ρ_n = q_n·α − p_n, signed; the signs alternate.
    pub rho: Rat,
    /// λ^(n) = |ρ_n|, the n-th renormalization scale.
    pub lambda: Rat,
}

/// The full exact ladder (p_n, q_n, ρ_n, λ^(n)) for n = 0..N.
#[derive(Debug, Clone)]
pub struct ConvergentTable {
    rows: Vec<ConvergentRow>,
    horizon: usize,
}

/// Computes the full convergent table of an angle.
pub fn convergents(angle: &Angle) -> ConvergentTable {
    let alpha = angle.value();
    let mut rows = Vec::with_capacity(angle.quotients().len());
    let (mut p_prev, mut q_prev) = (Int::one(), Int::zero());
    let (mut p, mut q) = (angle.quotients()[0].clone(), Int::one());
    for n in 0..angle.quotients().len() {
        if n > 0 {
            let a = &angle.quotients()[n];
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
        }
        let rho = alpha * &q - Rat::from(p.clone());
        let lambda = rho.abs();
        rows.push(ConvergentRow {
            n,
            p: p.clone(),
            q: q.clone(),
            rho,
            lambda,
        });
    }
    ConvergentTable {
        rows,
        horizon: angle.horizon(),
    }
}

impl ConvergentTable {
    pub fn rows(&self) -> &[ConvergentRow] {
        &self.rows
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn depth(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn p(&self, n: usize) -> &Int {
        &self.rows[n].p
    }

    pub fn q(&self, n: usize) -> &Int {
        &self.rows[n].q
    }

    pub fn rho(&self, n: usize) -> &Rat {
        &self.rows[n].rho
    }

    pub fn lambda(&self, n: usize) -> &Rat {
        &self.rows[n].lambda
    }

    pub fn q_usize(&self, n: usize) -> usize {
        self.rows[n].q.to_usize().expect("q_n fits in usize")
    }

    /// Checks the ladder identities at every level up to the horizon, with
    /// exact arithmetic:
    ///   λ^(n) = (−1)^n ρ_n,
    ///   λ^(n−2)/λ^(n−1) ∈ [a_n, a_n+1),
    ///   q_{n+1} = a_{n+1} q_n + q_{n−1},
    ///   λ^(n−1) = a_{n+1} λ^(n) + λ^(n+1),
    ///   1/(q_{n+1}+q_n) < λ^(n) < 1/q_{n+1},
    /// plus min_{1≤j<q_{n+1}} ‖jα‖ = λ^(n) by brute force while
    /// q_{n+1} ≤ `min_check_bound`.
    pub fn check_identities(&self, angle: &Angle, min_check_bound: u64) -> Result<(), String> {
        let h = self.horizon;
        for n in 0..=h {
            let row = &self.rows[n];
            // sign alternation
            let expect = if n % 2 == 0 {
                row.rho.clone()
            } else {
                -row.rho.clone()
            };
            if row.lambda != expect {
                return Err(format!("sign identity fails at n={n}"));
            }
            // q recurrence
            if n < self.depth() {
                let a = &angle.quotients()[n + 1];
                let q_prev = if n == 0 {
                    Int::zero()
                } else {
                    self.rows[n - 1].q.clone()
                };
                if self.rows[n + 1].q != a * &row.q + &q_prev {
                    return Err(format!("q recurrence fails at n={n}"));
                }
            }
            // lambda recurrence  λ^(n−1) = a_{n+1} λ^(n) + λ^(n+1)
            if n >= 1 && n < self.depth() {
                let a = Rat::from(angle.quotients()[n + 1].clone());
                let lhs = &self.rows[n - 1].lambda;
                let rhs = a * &row.lambda + &self.rows[n + 1].lambda;
                if *lhs != rhs {
                    return Err(format!("lambda recurrence fails at n={n}"));
                }
            }
            // quotient ratio  λ^(n−2)/λ^(n−1) ∈ [a_n, a_n+1)
            if n >= 2 {
                let ratio = &self.rows[n - 2].lambda / &self.rows[n - 1].lambda;
                let a = Rat::from(angle.quotients()[n].clone());
                if ratio < a || ratio >= a + Rat::one() {
                    return Err(format!("quotient ratio fails at n={n}"));
                }
            }
            // two-sided bound  1/(q_{n+1}+q_n) < λ^(n) < 1/q_{n+1}
            if n < self.depth() {
                let q_next = &self.rows[n + 1].q;
                let lower = Rat::new(Int::one(), q_next + &row.q);
                let upper = Rat::new(Int::one(), q_next.clone());
                if !(lower < row.lambda && row.lambda < upper) {
                    return Err(format!("lambda/q bound fails at n={n}"));
                }
            }
            // best-approximation minimum, brute force on small levels
            if n >= 1 && n < self.depth() {
                if let Some(qn1) = self.rows[n + 1].q.to_u64() {
                    if qn1 <= min_check_bound {
                        let mut best: Option<Rat> = None;
                        let mut point = Rat::zero();
                        for _ in 1..qn1 {
                            point += angle.value();
                            let d = circle_norm(&point);
                            if best.as_ref().is_none_or(|b| d < *b) {
                                best = Some(d);
                            }
                        }
                        if best.as_ref() != Some(&row.lambda) {
                            return Err(format!("best-approximation minimum fails at n={n}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn json_rows(&self) -> Vec<serde_json::Value> {
        self.rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "p": r.p.to_string(),
                    "q": r.q.to_string(),
                    "rho": format!("{}/{}", r.rho.numer(), r.rho.denom()),
                    "rho_dec": format!("{:.17e}", rat_to_f64(&r.rho)),
                    "lambda": format!("{}/{}", r.lambda.numer(), r.lambda.denom()),
                    "lambda_dec": format!("{:.17e}", rat_to_f64(&r.lambda)),
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "horizon": self.horizon,
            "rows": self.json_rows(),
        })
    }
}

/// Serializable mirror of an angle: the quotient list as decimal strings.
#[derive(Debug, Serialize, Deserialize)]
pub struct AngleJson {
    pub quotients: Vec<String>,
    pub value: String,
    pub value_dec: String,
    pub horizon: usize,
}

impl AngleJson {
    pub fn of(angle: &Angle) -> Self {
        AngleJson {
            quotients: angle.quotients().iter().map(|a| a.to_string()).collect(),
            value: format!("{}/{}", angle.value().numer(), angle.value().denom()),
            value_dec: format!("{:.17e}", angle.to_f64()),
            horizon: angle.horizon(),
        }
    }

    pub fn parse(&self) -> Result<Angle, CfError> {
        let qs: Vec<Int> = self
            .quotients
            .iter()
            .map(|s| s.parse::<Int>().expect("integer quotient"))
            .collect();
        Angle::from_quotients(&qs)
    }
}

/// Partial quotients of a rational in [0, 1) by the Euclidean algorithm,
/// canonical form (terminating expansions end with a quotient ≥ 2), truncated
/// at `depth` quotients after a_0 = 0.
pub fn expand_cf(value: &Rat, depth: usize) -> Vec<Int> {
    assert!(depth >= 1);
    let v = mod1(value);
    let mut out = vec![Int::zero()];
    let mut num = v.numer().clone();
    let mut den = v.denom().clone();
    // invariant: expanding num/den with num < den
    while !num.is_zero() && out.len() <= depth {
        let (q, r) = num_integer::Integer::div_rem(&den, &num);
        out.push(q);
        den = std::mem::replace(&mut num, r);
    }
    // canonical tail: […, a, 1] == […, a+1]
    if out.len() > 2 && out.last().map(|a| a.is_one()).unwrap_or(false) && num.is_zero() {
        out.pop();
        let last = out.last_mut().unwrap();
        *last += 1;
    }
    out
}

/// ℓ_n = q_0 + … + q_n for n = 0..=N, together with the growth checks
/// ℓ_n < q_n + q_{n+1} (always) and ℓ_n < q_{n+1} when a_{n+1} ≥ 2.
pub fn ell_sequence(angle: &Angle, level: usize) -> Result<Vec<Int>, CfError> {
    angle.check_level(level)?;
    let table = convergents(angle);
    let mut out = Vec::with_capacity(level + 1);
    let mut acc = Int::zero();
    for n in 0..=level {
        acc += table.q(n);
        let bound = table.q(n) + table.q(n + 1);
        assert!(acc < bound, "ell_{n} >= q_{n} + q_{}", n + 1);
        if angle.quotients()[n + 1] >= Int::from(2) {
            assert!(acc < *table.q(n + 1), "ell_{n} >= q_{} with a >= 2", n + 1);
        }
        out.push(acc.clone());
    }
    Ok(out)
}

/// Partial sum Σ_{n≤N} ρ_n of the β₀ series, with the exact tail bound
/// λ^(N+1) on ‖β₀ − value‖ (alternating series with decreasing terms).
pub fn beta0_partial(angle: &Angle, level: usize) -> Result<(CirclePoint, Rat), CfError> {
    angle.check_level(level)?;
    let table = convergents(angle);
    let mut sum = Rat::zero();
    for n in 0..=level {
        sum += table.rho(n);
    }
    Ok((CirclePoint::new(sum), table.lambda(level + 1).clone()))
}

/// Closed form of the β₀ limit for an angle whose expansion continues with
/// a_n = 1 forever after level N: β₀ = Σ_{k≤N} ρ_k + ρ_{N−1}, which lies on
/// the orbit of 0 at index ℓ_N + q_{N−1}.
pub fn beta0_ones_tail(angle: &Angle, level: usize) -> Result<(CirclePoint, Int), CfError> {
    assert!(level >= 1);
    angle.check_level(level)?;
    let table = convergents(angle);
    let mut sum = Rat::zero();
    for n in 0..=level {
        sum += table.rho(n);
    }
    sum += table.rho(level - 1);
    let ell = ell_sequence(angle, level)?;
    let index = ell.last().unwrap() + table.q(level - 1);
    Ok((CirclePoint::new(sum), index))
}

/// min_{|k| ≤ K} ‖kα − β‖, exactly, together with an index attaining zero if
/// β lies on the length-K orbit piece.
pub fn not_on_orbit_margin(
    angle: &Angle,
    beta: &CirclePoint,
    k_max: u64,
) -> Result<(Rat, Option<i64>), CfError> {
    assert!(k_max >= 1);
    let table = convergents(angle);
    // distances below λ^(horizon) are not faithful to the true angle, so the
    // scan range must stay inside the prefix's resolution
    if Int::from(k_max) >= *table.q(angle.horizon() + 1) {
        return Err(CfError::LevelBeyondHorizon {
            level: k_max as usize,
            horizon: angle.horizon(),
        });
    }
    let alpha = angle.value();
    let mut best = circle_norm(beta.value());
    let mut best_k: i64 = 0;
    let mut fwd = Rat::zero();
    let mut bwd = Rat::zero();
    for k in 1..=k_max as i64 {
        fwd += alpha;
        bwd -= alpha;
        for (point, idx) in [(&fwd, k), (&bwd, -k)] {
            let d = circle_norm(&(point - beta.value()));
            if d < best {
                best = d;
                best_k = idx;
            }
        }
        if best.is_zero() {
            break;
        }
    }
    let zero_at = if best.is_zero() { Some(best_k) } else { None };
    Ok((best, zero_at))
}
