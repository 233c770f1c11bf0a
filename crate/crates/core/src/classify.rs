//! Diophantine regime detection and the constructive angle recipes.
//!
//! All the predicates here ("a_{n+1} ≥ q_n^ν infinitely often" and friends)
//! are statements about infinitely many levels; a finite prefix can only
//! witness them up to its depth. Certificates therefore carry the witnessed
//! levels with both sides of each inequality and are labeled
//! "consistent-with" — never "proved". Every witness is re-checkable from
//! the convergent table alone.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cf::{beta0_partial, convergents, Angle, CfError, CirclePoint};
use crate::flow::{section_setup, FlowError, FlowParams};
use crate::numeric::{circle_norm, ln_big, Int, Rat};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("construction budget exceeded: {0}")]
    LevelBudgetExceeded(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// One witnessed inequality at level n.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub n: usize,
    pub lhs: String,
    pub rhs: String,
}

/// Finite-depth evidence for a Diophantine property.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeCertificate {
    pub kind: String,
    pub witnesses: Vec<Witness>,
    pub depth: usize,
    /// Always "consistent-with": finite evidence, never a proof.
    pub verdict_strength: String,
    pub notes: Vec<String>,
}

impl RegimeCertificate {
    fn new(kind: &str, depth: usize) -> Self {
        RegimeCertificate {
            kind: kind.to_string(),
            witnesses: Vec::new(),
            depth,
            verdict_strength: "consistent-with".to_string(),
            notes: Vec::new(),
        }
    }
}

/// Smallest integer ≥ q^ν for rational ν = r/s > 0.
pub fn ceil_pow(q: &Int, nu: &Rat) -> Int {
    assert!(nu.is_positive() && q.is_positive());
    let r = nu.numer().to_u32().expect("small exponent numerator");
    let s = nu.denom().to_u32().expect("small exponent denominator");
    let t = q.pow(r);
    let root = t.nth_root(s);
    if root.pow(s) == t {
        root
    } else {
        root + 1
    }
}

fn power_at_least(a: &Int, q: &Int, nu: &Rat) -> bool {
    // a ≥ q^(r/s)  ⟺  a^s ≥ q^r
    let r = nu.numer().to_u32().expect("small exponent numerator");
    let s = nu.denom().to_u32().expect("small exponent denominator");
    a.pow(s) >= q.pow(r)
}

fn power_greater(a: &Int, q: &Int, k: u32) -> bool {
    *a > q.pow(k)
}

/// Witness levels n ≤ depth with a_{n+1} ≥ q_n^ν and gcd(q_n, k) = 1.
pub fn w_membership(angle: &Angle, nu: &Rat, k: u64, depth: usize) -> RegimeCertificate {
    let depth = depth.min(angle.horizon());
    let table = convergents(angle);
    let mut cert = RegimeCertificate::new("w-membership", depth);
    cert.notes.push(format!("nu = {nu}, k = {k}"));
    if k < 2 {
        cert.notes
            .push("k = 1: the gcd condition is vacuous".to_string());
    }
    let k_int = Int::from(k.max(1));
    for n in 0..=depth {
        let a_next = &angle.quotients()[n + 1];
        if power_at_least(a_next, table.q(n), nu) && table.q(n).gcd(&k_int).is_one() {
            cert.witnesses.push(Witness {
                n,
                lhs: a_next.to_string(),
                rhs: format!("{}^{nu}", table.q(n)),
            });
        }
    }
    cert
}

/// Witness levels with a_{n+1} > q_n^k. For k = 0 the strict inequality
/// reads a_{n+1} > 1, i.e. only levels with a_{n+1} ≥ 2 qualify.
pub fn liouville_witnesses(angle: &Angle, k: u32, depth: usize) -> RegimeCertificate {
    let depth = depth.min(angle.horizon());
    let table = convergents(angle);
    let mut cert = RegimeCertificate::new("liouville", depth);
    cert.notes.push(format!("exponent k = {k}"));
    for n in 0..=depth {
        let a_next = &angle.quotients()[n + 1];
        if power_greater(a_next, table.q(n), k) {
            cert.witnesses.push(Witness {
                n,
                lhs: a_next.to_string(),
                rhs: format!("{}^{k}", table.q(n)),
            });
        }
    }
    cert
}

/// Smallest i ≥ 1 with gcd(a + i·b, c) = 1; exists whenever gcd(a, b) = 1.
pub fn coprime_step(a: &Int, b: &Int, c: &Int) -> Int {
    assert!(a.gcd(b).is_one(), "need gcd(a,b) = 1");
    let mut i = Int::one();
    loop {
        if (a + &i * b).gcd(c).is_one() {
            return i;
        }
        i += 1;
        assert!(i <= c + 1, "coprime step not found below c + 1");
    }
}

/// Extends `seed` so that the resulting angle has `levels` witness levels
/// for (ν, k)-approximability: at each round, first fix gcd(q_n, k) = 1 by
/// one extra quotient chosen via the coprime step if needed, then append
/// a_{n+1} = ⌈q_n^ν⌉. Two tail quotients keep the witnesses inside the
/// horizon.
pub fn construct_w_angle(
    nu: &Rat,
    k: u64,
    seed: &[Int],
    levels: usize,
) -> Result<Angle, ClassifyError> {
    if !nu.is_positive() {
        return Err(ClassifyError::InvalidParameter("ν must be positive".into()));
    }
    if k < 2 {
        return Err(ClassifyError::InvalidParameter("k must be ≥ 2".into()));
    }
    let mut quotients: Vec<Int> = if seed.is_empty() {
        vec![Int::zero(), Int::from(2)]
    } else {
        seed.to_vec()
    };
    if quotients.len() < 2 {
        quotients.push(Int::from(2));
    }
    let k_int = Int::from(k);
    let ladder = |qs: &[Int]| -> (Int, Int) {
        let (mut q_prev, mut q) = (Int::zero(), Int::one());
        for a in &qs[1..] {
            let next = a * &q + &q_prev;
            q_prev = std::mem::replace(&mut q, next);
        }
        (q_prev, q)
    };
    for _ in 0..levels {
        let (q_prev, q) = ladder(&quotients);
        let q_cur = if q.gcd(&k_int).is_one() {
            q
        } else {
            // one corrective quotient: q_new = i·q + q_prev coprime to k
            let i = coprime_step(&q_prev, &q, &k_int);
            quotients.push(i.clone());
            let (_, q_new) = ladder(&quotients);
            debug_assert!(q_new.gcd(&k_int).is_one());
            q_new
        };
        quotients.push(ceil_pow(&q_cur, nu));
        if quotients.len() > 64 {
            return Err(ClassifyError::LevelBudgetExceeded(
                "more than 64 quotients".into(),
            ));
        }
    }
    quotients.push(Int::from(2));
    quotients.push(Int::from(2));
    let angle = Angle::from_quotients(&quotients)?;
    let cert = w_membership(&angle, nu, k, angle.horizon());
    assert!(
        cert.witnesses.len() >= levels,
        "construction produced {} witnesses, wanted {levels}",
        cert.witnesses.len()
    );
    Ok(angle)
}

/// Partial sums of Σ 1/log q_n over levels n ≥ 2 with a_n, a_{n+1} ≥ 2.
/// Returns (level, term, partial-sum) rows for the qualifying levels.
pub fn khinchin_levy_partial(angle: &Angle, depth: usize) -> Vec<(usize, f64, f64)> {
    let depth = depth.min(angle.horizon());
    let table = convergents(angle);
    let two = Int::from(2);
    let mut acc = 0.0;
    let mut out = Vec::new();
    for n in 2..=depth {
        if angle.quotients()[n] >= two && angle.quotients()[n + 1] >= two {
            let term = 1.0 / ln_big(table.q(n));
            acc += term;
            out.push((n, term, acc));
        }
    }
    out
}

/// Per-level check of q_n ≥ C·exp(n^(2+γ)).
pub fn growth_check(angle: &Angle, c: f64, gamma: f64, depth: usize) -> RegimeCertificate {
    assert!(c > 0.0 && gamma > 0.0);
    let depth = depth.min(angle.horizon());
    let table = convergents(angle);
    let mut cert = RegimeCertificate::new("rapid-growth", depth);
    cert.notes.push(format!("C = {c}, gamma = {gamma}"));
    let mut failures = Vec::new();
    for n in 0..=depth {
        let lhs = ln_big(table.q(n));
        let rhs = c.ln() + (n as f64).powf(2.0 + gamma);
        if lhs >= rhs {
            cert.witnesses.push(Witness {
                n,
                lhs: format!("log q_n = {lhs:.6}"),
                rhs: format!("log C + n^(2+gamma) = {rhs:.6}"),
            });
        } else {
            failures.push(n);
        }
    }
    if !failures.is_empty() {
        cert.notes.push(format!("failing levels: {failures:?}"));
    }
    cert
}

/// Builds an angle with q_n ≥ C·exp(n^(2+γ)) at every appended level, by
/// a_{n} = ⌈C·exp(n^(2+γ))/q_{n−1}⌉ + 1. At most 8 levels (the q_n explode
/// doubly exponentially). Two tail quotients keep the horizon past the last
/// constructed level.
pub fn construct_rapid_growth_angle(
    c: f64,
    gamma: f64,
    levels: usize,
    seed: Option<&[Int]>,
) -> Result<Angle, ClassifyError> {
    if !(c > 0.0 && gamma > 0.0) {
        return Err(ClassifyError::InvalidParameter(
            "need C > 0 and gamma > 0".into(),
        ));
    }
    if levels > 8 {
        return Err(ClassifyError::LevelBudgetExceeded(format!(
            "levels = {levels} > 8"
        )));
    }
    let mut quotients: Vec<Int> = seed
        .map(|s| s.to_vec())
        .unwrap_or_else(|| vec![Int::zero()]);
    let base = quotients.len() - 1;
    let (mut q_prev, mut q) = {
        let (mut qp, mut qq) = (Int::zero(), Int::one());
        for a in &quotients[1..] {
            let next = a * &qq + &qp;
            qp = std::mem::replace(&mut qq, next);
        }
        (qp, qq)
    };
    for m in base + 1..=base + levels {
        let ln_target = c.ln() + (m as f64).powf(2.0 + gamma);
        let ln_a = ln_target - ln_big(&q);
        if ln_a > 700.0 {
            return Err(ClassifyError::LevelBudgetExceeded(format!(
                "quotient at level {m} needs exp({ln_a:.1})"
            )));
        }
        let raw: Int = if ln_a <= 0.0 {
            Int::one()
        } else {
            num_traits::FromPrimitive::from_f64(ln_a.exp().ceil())
                .expect("quotient fits a big integer")
        };
        let a = raw + Int::one();
        quotients.push(a.clone());
        let q_next = &a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, q_next);
    }
    quotients.push(Int::from(2));
    quotients.push(Int::from(2));
    let angle = Angle::from_quotients(&quotients)?;
    let cert = growth_check(&angle, c, gamma, (base + levels).min(angle.horizon()));
    for m in base + 1..=base + levels {
        assert!(
            cert.witnesses.iter().any(|w| w.n == m),
            "growth check fails at constructed level {m}"
        );
    }
    Ok(angle)
}

/// Partial sums of Σ 1/log a_n over levels with a_n ≥ 2; levels with
/// a_n = 1 make the series infinite and are reported separately.
#[derive(Debug, Clone, Serialize)]
pub struct InvLogAReport {
    pub partials: Vec<(usize, f64)>,
    pub ones_levels: Vec<usize>,
    pub divergent_flag: bool,
}

pub fn sum_inv_log_a(angle: &Angle, depth: usize) -> InvLogAReport {
    let depth = depth.min(angle.depth());
    let two = Int::from(2);
    let mut acc = 0.0;
    let mut partials = Vec::new();
    let mut ones = Vec::new();
    for n in 1..=depth {
        let a = &angle.quotients()[n];
        if *a >= two {
            acc += 1.0 / ln_big(a);
        } else {
            ones.push(n);
        }
        partials.push((n, acc));
    }
    InvLogAReport {
        divergent_flag: !ones.is_empty(),
        partials,
        ones_levels: ones,
    }
}

/// Smallest |j| ≤ horizon_k with q0 = p0 + jα, scanning |j| upward
/// (positive first on ties). Exact.
pub fn same_orbit_detect(
    angle: &Angle,
    p0: &CirclePoint,
    q0: &CirclePoint,
    horizon_k: u64,
) -> Option<i64> {
    assert!(horizon_k >= 1);
    let alpha = angle.value();
    let diff = q0.value() - p0.value();
    if circle_norm(&diff).is_zero() {
        return Some(0);
    }
    let mut fwd = Rat::zero();
    let mut bwd = Rat::zero();
    for j in 1..=horizon_k as i64 {
        fwd += alpha;
        bwd -= alpha;
        if circle_norm(&(&diff - &fwd)).is_zero() {
            return Some(j);
        }
        if circle_norm(&(&diff - &bwd)).is_zero() {
            return Some(-j);
        }
    }
    None
}

/// The constructive offset from the midpoint recipe: β = b/q_n + 1/(2q_n)
/// for a chosen witness level n.
pub fn midpoint_beta(table_q_n: &Int, b: u64) -> CirclePoint {
    let q = Rat::from(table_q_n.clone());
    CirclePoint::new(Rat::new(Int::from(2 * b + 1), Int::from(2)) / q)
}

/// Regime verdict for (α, p, q): matches the hypothesis sets in a fixed
/// priority order (physical-measure conditions first), surfacing any other
/// condition that also has evidence instead of silently resolving.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeVerdict {
    pub regime: String,
    pub predicted_pomega: String,
    pub basis: String,
    pub depth: usize,
    pub verdict_strength: String,
    pub conflicts: Vec<String>,
    pub certificates: Vec<RegimeCertificate>,
}

/// Evidence thresholds for the verdict engine (finite-depth heuristics):
/// growth must be witnessed at several levels including the deepest one;
/// the divergent-sum condition needs a constant fraction of qualifying
/// levels; approximability witnesses only count once q_n has left the
/// trivial range.
const MIN_GROWTH_WITNESSES: usize = 3;
const MIN_KL_LEVELS: usize = 3;
const MIN_WITNESS_Q: u64 = 10;

pub fn regime_verdict(
    angle: &Angle,
    params: &FlowParams,
    depth: usize,
) -> Result<RegimeVerdict, ClassifyError> {
    let depth = depth.min(angle.horizon());
    let section = section_setup(params)?;
    let beta = &section.beta;
    let table = convergents(angle);

    let mut certificates = Vec::new();
    let mut matches: Vec<(String, String, String)> = Vec::new(); // (regime, pomega, basis)

    // -- ingredient evidence --------------------------------------------
    let orbit_j = same_orbit_detect(angle, &section.p0, &section.q0, 1000);
    let growth = growth_check(angle, 1e-6, 0.5, depth);
    let growth_ok = growth.witnesses.len() >= MIN_GROWTH_WITNESSES
        && growth.witnesses.iter().any(|w| w.n == depth);
    let kl = khinchin_levy_partial(angle, depth);
    let kl_ok = kl.len() >= MIN_KL_LEVELS.max(depth / 3);
    let inv_log_a = sum_inv_log_a(angle, depth);
    let inv_log_a_ok = !inv_log_a.divergent_flag
        && inv_log_a.partials.len() >= 4
        && tail_term_decayed(&inv_log_a.partials);
    // β₀ offset: β ≈ −Σ ρ_n within the series tail bound
    let beta0_ok = match beta0_partial(angle, depth.saturating_sub(1).max(1)) {
        Ok((b0, tail)) => circle_norm(&(beta.value() + b0.value())) <= tail * Int::from(2),
        Err(_) => false,
    };
    // rational offset with small denominator; witnesses below the trivial
    // q_n range do not count as evidence
    let nontrivial = |c: &RegimeCertificate| {
        c.witnesses.iter().any(|w| {
            table
                .q(w.n)
                .to_u64()
                .map(|q| q >= MIN_WITNESS_Q)
                .unwrap_or(true)
        })
    };
    let b_denom = beta
        .value()
        .denom()
        .to_u64()
        .filter(|&b| (2..=1000).contains(&b));
    let w_cert = b_denom.map(|b| w_membership(angle, &Rat::one(), b, depth));
    let w_ok = w_cert.as_ref().map(&nontrivial).unwrap_or(false);
    let liou = liouville_witnesses(angle, 2, depth);
    let liou_ok = nontrivial(&liou);
    // midpoint recipe: β sits at a grid midpoint of a witnessed level
    let midpoint_ok = liou
        .witnesses
        .iter()
        .any(|w| beta_is_grid_midpoint(beta, table.q(w.n)));

    if let Some(j) = orbit_j {
        let mut c = RegimeCertificate::new("same-orbit", depth);
        c.witnesses.push(Witness {
            n: 0,
            lhs: format!("q0 = p0 + {j}·alpha"),
            rhs: "exact".into(),
        });
        certificates.push(c);
    }
    certificates.push(growth.clone());
    certificates.push(liou.clone());
    if let Some(c) = w_cert.clone() {
        certificates.push(c);
    }

    // -- hypothesis sets in priority order ------------------------------
    if orbit_j.is_some() && growth_ok {
        matches.push((
            "physical-measure".into(),
            "{mu_infinity}".into(),
            "same-orbit offset with rapidly growing q_n".into(),
        ));
    }
    if orbit_j.is_some() && inv_log_a_ok {
        matches.push((
            "physical-measure".into(),
            "{mu_infinity}".into(),
            "same-orbit offset with summable 1/log a_n".into(),
        ));
    }
    if beta0_ok && (growth_ok || inv_log_a_ok) {
        matches.push((
            "physical-measure".into(),
            "{mu_infinity}".into(),
            "distinguished beta0 offset with rapid growth".into(),
        ));
    }
    if w_ok {
        matches.push((
            "extreme-historic".into(),
            "[delta_p, delta_q]".into(),
            "rational offset with witnessed (nu,b)-approximability".into(),
        ));
    }
    if liou_ok && midpoint_ok {
        matches.push((
            "extreme-historic".into(),
            "[delta_p, delta_q]".into(),
            "Liouville witnesses with grid-midpoint offset".into(),
        ));
    }
    if orbit_j.is_some() && kl_ok {
        matches.push((
            "historic".into(),
            "[mu_infinity, delta_p]".into(),
            "same-orbit offset with divergent sum of 1/log q_n".into(),
        ));
    }
    if kl_ok {
        // divergent Σ 1/log q_n forces divergent averages for any offset;
        // the limit segment is only pinned down in the same-orbit case
        matches.push((
            "historic".into(),
            "undetermined segment".into(),
            "divergent sum of 1/log q_n (any offset)".into(),
        ));
    }

    let (regime, pomega, basis) = matches.first().cloned().unwrap_or((
        "no-theorem-applies".into(),
        "unknown".into(),
        "no hypothesis set matched at this depth".into(),
    ));
    let conflicts = matches
        .iter()
        .skip(1)
        .filter(|(r, _, _)| *r != regime)
        .map(|(r, _, b)| format!("{r}: {b}"))
        .collect();
    Ok(RegimeVerdict {
        regime,
        predicted_pomega: pomega,
        basis,
        depth,
        verdict_strength: "consistent-with".into(),
        conflicts,
        certificates,
    })
}

fn tail_term_decayed(partials: &[(usize, f64)]) -> bool {
    let n = partials.len();
    if n < 4 {
        return false;
    }
    let last = partials[n - 1].1 - partials[n - 2].1;
    let first = partials[1].1 - partials[0].1;
    last < 0.25 * first.max(1e-12) || last == 0.0
}

fn beta_is_grid_midpoint(beta: &CirclePoint, q_n: &Int) -> bool {
    // β = (2b+1)/(2 q_n) for some integer b
    let scaled = beta.value() * Rat::from(Int::from(2) * q_n);
    scaled.is_integer() && num_integer::Integer::is_odd(&scaled.to_integer())
}
