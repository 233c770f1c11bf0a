//! The reparameterized flow itself: local crossing times through a
//! quadratic stopping point, the two-cusp roof function, the special-flow
//! simulator over the Poincaré section, the explicit Euler torus integrator
//! from the figure pipeline, and occupancy tracking.
//!
//! The default roof is the principal two-cusp model
//! T(y) = π/(√d_p ‖y−p₀‖) + π/(√d_q ‖y−q₀‖) (σ ≡ 0); an isotropic
//! quadratic box model is available as an opt-in correction.

use num_traits::Zero;
use thiserror::Error;

use crate::birkhoff::{BirkhoffError, ExactOrbit, PsiKind};
use crate::cf::{expand_cf, Angle, CfError, CirclePoint};
use crate::numeric::{mod1, rat_from_f64, rat_to_f64, unit_fraction_sum, BigRatio, Int, Rat};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("evaluation at the pole y = 0")]
    PoleAtZero,
    #[error("roof evaluated at a cusp")]
    PoleAtCusp,
    #[error("orbit hits a cusp at return {0}")]
    OrbitHitsCusp(u64),
    #[error("section passes through a stopping point")]
    SectionThroughStoppingPoint,
    #[error("Hessian determinant must be positive")]
    NonPositiveDeterminant,
    #[error("empty occupancy series")]
    EmptySeries,
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
    #[error(transparent)]
    Cf(#[from] CfError),
}

type Result<T> = std::result::Result<T, FlowError>;

// ---------------------------------------------------------------------------
// Crossing time through a quadratic zero
// ---------------------------------------------------------------------------

/// Crossing-time data for the horizontal flow slowed by the positive
/// definite form φ(x, y) = a x² + 2bxy + c y², d = ac − b².
#[derive(Debug, Clone)]
pub struct KappaReport {
    /// (2/(|y|√d))·arctan(δ/(|y|√d)).
    pub closed_form: f64,
    /// Adaptive quadrature over the arctan-aligned limits; matches
    /// `closed_form` to quadrature accuracy.
    pub quadrature_shifted: f64,
    /// Adaptive quadrature of the crossing time over [−δ, δ].
    pub quadrature: f64,
    /// π/(√d·|y|).
    pub principal: f64,
    /// quadrature − principal; stays bounded as y → 0.
    pub residual: f64,
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    rec(f, a, b, simpson(f, a, m, b), tol, 48)
}

pub fn kappa_quadratic(a: f64, b: f64, c: f64, delta: f64, y: f64) -> Result<KappaReport> {
    let d = a * c - b * b;
    if !(a > 0.0 && d > 0.0) {
        return Err(FlowError::NotPositiveDefinite);
    }
    if y == 0.0 {
        return Err(FlowError::PoleAtZero);
    }
    if delta <= 0.0 {
        return Err(FlowError::NotPositiveDefinite);
    }
    let sd = d.sqrt();
    let ay = y.abs();
    let closed_form = 2.0 / (ay * sd) * (delta / (ay * sd)).atan();
    let phi = move |x: f64| 1.0 / (a * x * x + 2.0 * b * x * y + c * y * y);
    let tol = 1e-13 * closed_form.max(1.0);
    let quadrature_shifted = adaptive_simpson(&phi, (-delta - b * y) / a, (delta - b * y) / a, tol);
    let quadrature = adaptive_simpson(&phi, -delta, delta, tol);
    let principal = std::f64::consts::PI / (sd * ay);
    Ok(KappaReport {
        closed_form,
        quadrature_shifted,
        quadrature,
        principal,
        residual: quadrature - principal,
    })
}

// ---------------------------------------------------------------------------
// Flow parameters and the Poincaré section
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedModel {
    /// φ(M) = min(|M−p|₂, |M−q|₂), the figure pipeline's speed.
    MinDistance,
    /// Isotropic quadratic wells √d·|M−cusp|₂² near each stopping point.
    QuadraticHessian,
}

/// Parameters of a reparameterized linear flow with two stopping points.
#[derive(Debug, Clone)]
pub struct FlowParams {
    pub angle: Angle,
    pub p: (Rat, Rat),
    pub q: (Rat, Rat),
    pub d_p: f64,
    pub d_q: f64,
    pub section_x0: Rat,
    pub speed_model: SpeedModel,
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if self.d_p <= 0.0 || self.d_q <= 0.0 {
            return Err(FlowError::NonPositiveDeterminant);
        }
        if self.p == self.q {
            return Err(FlowError::SectionThroughStoppingPoint);
        }
        Ok(())
    }
}

/// Section data: the backward-flow projections of p and q to Σ = {x₀}×T
/// and their offset β = q₀ − p₀.
#[derive(Debug, Clone)]
pub struct SectionData {
    pub x0: Rat,
    pub p0: CirclePoint,
    pub q0: CirclePoint,
    pub beta: CirclePoint,
    pub r_p: Rat,
    pub r_q: Rat,
}

fn project_to_section(angle: &Angle, point: &(Rat, Rat), x0: &Rat) -> Result<(CirclePoint, Rat)> {
    let r = mod1(&(&point.0 - x0));
    if r.is_zero() {
        return Err(FlowError::SectionThroughStoppingPoint);
    }
    let y = CirclePoint::new(&point.1 - angle.value() * &r);
    Ok((y, r))
}

/// Computes p₀, q₀ by flowing back along (1, α) to abscissa x₀. If the two
/// projections coincide (the section misses the orbit segment joining p to
/// q), the section is moved to the midpoint of the x-gap from p to q.
pub fn section_setup(params: &FlowParams) -> Result<SectionData> {
    params.validate()?;
    let angle = &params.angle;
    let mut x0 = params.section_x0.clone();
    for attempt in 0..2 {
        let (p0, r_p) = project_to_section(angle, &params.p, &x0)?;
        let (q0, r_q) = project_to_section(angle, &params.q, &x0)?;
        if p0 != q0 {
            let beta = CirclePoint::new(q0.value() - p0.value());
            return Ok(SectionData {
                x0,
                p0,
                q0,
                beta,
                r_p,
                r_q,
            });
        }
        if attempt == 1 {
            break;
        }
        x0 = mod1(&(&params.p.0 + mod1(&(&params.q.0 - &params.p.0)) / Int::from(2)));
        if x0 == params.p.0 || x0 == params.q.0 {
            x0 = mod1(&(&x0 + rat_from_f64(1.0 / 127.0)));
        }
    }
    Err(FlowError::SectionThroughStoppingPoint)
}

/// Physical-measure weights (√d_q, √d_p)/(√d_p + √d_q) of δ_p and δ_q.
pub fn mu_infinity(d_p: f64, d_q: f64) -> Result<(f64, f64)> {
    if d_p <= 0.0 || d_q <= 0.0 {
        return Err(FlowError::NonPositiveDeterminant);
    }
    let (sp, sq) = (d_p.sqrt(), d_q.sqrt());
    Ok((sq / (sp + sq), sp / (sp + sq)))
}

/// Roof model: σ ≡ 0 (principal) or the isotropic quadratic box correction.
#[derive(Debug, Clone, Copy)]
pub enum RoofModel {
    Principal,
    QuadraticBox { delta: f64 },
}

/// Return time to the section: the principal two-cusp part plus σ.
pub fn roof(
    params: &FlowParams,
    section: &SectionData,
    model: RoofModel,
    y: &CirclePoint,
) -> Result<f64> {
    let eta_p = crate::numeric::circle_norm(&(y.value() - section.p0.value()));
    let eta_q = crate::numeric::circle_norm(&(y.value() - section.q0.value()));
    if eta_p.is_zero() || eta_q.is_zero() {
        return Err(FlowError::PoleAtCusp);
    }
    let np = rat_to_f64(&eta_p);
    let nq = rat_to_f64(&eta_q);
    let principal = std::f64::consts::PI / (params.d_p.sqrt() * np)
        + std::f64::consts::PI / (params.d_q.sqrt() * nq);
    match model {
        RoofModel::Principal => Ok(principal),
        RoofModel::QuadraticBox { delta } => {
            let mut t = 1.0 - 4.0 * delta;
            for (eta, d) in [(np, params.d_p), (nq, params.d_q)] {
                if eta < delta {
                    // isotropic form with form determinant d
                    let k = kappa_quadratic(d.sqrt(), 0.0, d.sqrt(), delta, eta)?;
                    t += k.quadrature;
                } else {
                    t += 2.0 * delta;
                }
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------------------
// Special-flow simulation over the section
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OccupancyRow {
    pub n: u64,
    pub t: f64,
    pub occ_p: f64,
    pub occ_q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub total: f64,
    pub theta_proxy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct WindowStat {
    pub start: u64,
    pub end: u64,
    pub min: f64,
    pub max: f64,
}

/// Accumulated dwell times split into the cusp-p part A, cusp-q part B and
/// the remainder C, with A_n + B_n + C_n = T_n; occupancies are the
/// fractions A_n/T_n and B_n/T_n, and the Θ-proxy is (√d_p·A_n)/(√d_q·B_n).
#[derive(Debug)]
pub struct OccupancySeries {
    pub rows: Vec<OccupancyRow>,
    pub final_row: OccupancyRow,
    /// Θ-proxy extrema per decade [10^k, 10^(k+1)).
    pub theta_decades: Vec<WindowStat>,
    /// Box(q)-occupancy extrema per decade.
    pub occ_q_decades: Vec<WindowStat>,
    /// Θ-proxy extrema over the requested tail [tail_start, N].
    pub theta_tail: WindowStat,
    pub occ_q_tail: WindowStat,
    /// max |A+B+C−T|/T over the run (0 in exact mode).
    pub ledger_residual: f64,
}

pub struct SpecialFlowSpec {
    pub returns: u64,
    /// Record a row roughly every `returns/record_points` returns.
    pub record_points: u64,
    /// Tail window start for the tail statistics.
    pub tail_start: u64,
}

/// Runs the special flow over the base rotation in double precision,
/// re-anchoring the two shifted orbits on their exact values periodically.
pub fn special_flow_simulate(
    params: &FlowParams,
    section: &SectionData,
    start: &CirclePoint,
    spec: &SpecialFlowSpec,
) -> Result<OccupancySeries> {
    params.validate()?;
    let n_ret = spec.returns;
    assert!(n_ret >= 1);
    let angle = &params.angle;
    let alpha = rat_to_f64(angle.value());
    let coef_p = std::f64::consts::PI / params.d_p.sqrt();
    let coef_q = std::f64::consts::PI / params.d_q.sqrt();
    let xp = CirclePoint::new(start.value() - section.p0.value());
    let xq = CirclePoint::new(start.value() - section.q0.value());
    let op = ExactOrbit::new(angle.value(), xp.value());
    let oq = ExactOrbit::new(angle.value(), xq.value());

    let stride = (n_ret / spec.record_points.max(1)).max(1);
    let mut rows = Vec::new();
    let mut a_acc = crate::numeric::KahanSum::new();
    let mut b_acc = crate::numeric::KahanSum::new();
    let mut t_acc = crate::numeric::KahanSum::new();
    let mut ledger_residual = 0.0f64;

    let mut decade_edges: Vec<u64> = Vec::new();
    let mut edge = 10u64;
    while edge < n_ret {
        decade_edges.push(edge);
        edge = edge.saturating_mul(10);
    }
    let mut theta_decades: Vec<WindowStat> = Vec::new();
    let mut occ_q_decades: Vec<WindowStat> = Vec::new();
    let mut cur_theta = WindowStat {
        start: 1,
        end: 0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut cur_occ = cur_theta;
    let mut theta_tail = WindowStat {
        start: spec.tail_start,
        end: n_ret,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut occ_q_tail = theta_tail;

    const ANCHOR: u64 = 1024;
    const REFINE: f64 = 1e-3;
    let mut yp = op.point_f64(0);
    let mut yq = oq.point_f64(0);
    for i in 0..n_ret {
        if i > 0 && i % ANCHOR == 0 {
            yp = op.point_f64(i);
            yq = oq.point_f64(i);
        }
        let mut np = yp.min(1.0 - yp);
        let mut nq = yq.min(1.0 - yq);
        if np < REFINE {
            let k = op.psi_exact(i, PsiKind::Norm).map_err(pole_to_cusp)?;
            np = 1.0 / rat_to_f64(&k);
        }
        if nq < REFINE {
            let k = oq.psi_exact(i, PsiKind::Norm).map_err(pole_to_cusp)?;
            nq = 1.0 / rat_to_f64(&k);
        }
        if np == 0.0 || nq == 0.0 {
            return Err(FlowError::OrbitHitsCusp(i));
        }
        let a_term = coef_p / np;
        let b_term = coef_q / nq;
        a_acc.add(a_term);
        b_acc.add(b_term);
        t_acc.add(a_term + b_term);
        let n1 = i + 1;
        let (a, b, t) = (a_acc.value(), b_acc.value(), t_acc.value());
        let resid = ((a + b - t) / t).abs();
        if resid > ledger_residual {
            ledger_residual = resid;
        }
        let theta = (params.d_p.sqrt() * a) / (params.d_q.sqrt() * b);
        let occ_q = b / t;
        stat_update(&mut cur_theta, n1, theta);
        stat_update(&mut cur_occ, n1, occ_q);
        if decade_edges.first() == Some(&n1) {
            decade_edges.remove(0);
            theta_decades.push(cur_theta);
            occ_q_decades.push(cur_occ);
            cur_theta = fresh_stat(n1);
            cur_occ = fresh_stat(n1);
        }
        if n1 >= spec.tail_start {
            stat_update(&mut theta_tail, n1, theta);
            stat_update(&mut occ_q_tail, n1, occ_q);
        }
        if n1 % stride == 0 || n1 == n_ret {
            rows.push(OccupancyRow {
                n: n1,
                t,
                occ_p: a / t,
                occ_q,
                a,
                b,
                c: 0.0,
                total: t,
                theta_proxy: theta,
            });
        }
        yp += alpha;
        if yp >= 1.0 {
            yp -= 1.0;
        }
        yq += alpha;
        if yq >= 1.0 {
            yq -= 1.0;
        }
    }
    theta_decades.push(cur_theta);
    occ_q_decades.push(cur_occ);
    let final_row = rows.last().expect("at least one row").clone();
    Ok(OccupancySeries {
        rows,
        final_row,
        theta_decades,
        occ_q_decades,
        theta_tail,
        occ_q_tail,
        ledger_residual,
    })
}

fn pole_to_cusp(e: BirkhoffError) -> FlowError {
    match e {
        BirkhoffError::OrbitHitsPole(i) => FlowError::OrbitHitsCusp(i),
        other => FlowError::Birkhoff(other),
    }
}

fn stat_update(s: &mut WindowStat, n: u64, v: f64) {
    s.end = n;
    if v < s.min {
        s.min = v;
    }
    if v > s.max {
        s.max = v;
    }
}

fn fresh_stat(n: u64) -> WindowStat {
    WindowStat {
        start: n,
        end: n,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    }
}

/// Exact special-flow ledger for the principal model with rational cusp
/// coefficients: A and B are the separately accumulated cusp series, and
/// `total` is the roof series T summed return by return (one term
/// coef_p·ψ_p(i) + coef_q·ψ_q(i) per return). The identity A + B = T is
/// checked exactly across the two summation routes.
pub struct ExactLedger {
    pub a: BigRatio,
    pub b: BigRatio,
    pub total: BigRatio,
}

pub fn special_flow_exact_ledger(
    angle: &Angle,
    section: &SectionData,
    start: &CirclePoint,
    returns: u64,
    coef_p: &Rat,
    coef_q: &Rat,
) -> Result<ExactLedger> {
    let xp = CirclePoint::new(start.value() - section.p0.value());
    let xq = CirclePoint::new(start.value() - section.q0.value());
    let op = ExactOrbit::new(angle.value(), xp.value());
    let oq = ExactOrbit::new(angle.value(), xq.value());
    let kp = op.numerators(returns, PsiKind::Norm);
    let kq = oq.numerators(returns, PsiKind::Norm);
    for (i, k) in kp.iter().chain(kq.iter()).enumerate() {
        if k.is_zero() {
            return Err(FlowError::OrbitHitsCusp((i as u64) % returns));
        }
    }
    let sp = unit_fraction_sum(&kp).mul_int(op.denominator());
    let sq = unit_fraction_sum(&kq).mul_int(oq.denominator());
    let a = sp.mul_rat(coef_p);
    let b = sq.mul_rat(coef_q);
    // the roof series, summed per return rather than per cusp
    fn roof_series(lp: &Int, lq: &Int, kp: &[Int], kq: &[Int], cp: &Rat, cq: &Rat) -> BigRatio {
        match kp.len() {
            0 => BigRatio::zero(),
            1 => {
                let tp = BigRatio::new(lp * cp.numer(), cp.denom() * &kp[0]);
                let tq = BigRatio::new(lq * cq.numer(), cq.denom() * &kq[0]);
                tp.add(&tq)
            }
            len => {
                let (kp1, kp2) = kp.split_at(len / 2);
                let (kq1, kq2) = kq.split_at(len / 2);
                roof_series(lp, lq, kp1, kq1, cp, cq).add(&roof_series(lp, lq, kp2, kq2, cp, cq))
            }
        }
    }
    let total = roof_series(op.denominator(), oq.denominator(), &kp, &kq, coef_p, coef_q);
    assert_eq!(
        total.cmp_ratio(&a.add(&b)),
        std::cmp::Ordering::Equal,
        "exact ledger identity A + B = T failed"
    );
    Ok(ExactLedger { a, b, total })
}

// ---------------------------------------------------------------------------
// Euler integrator on the torus (figure pipeline)
// ---------------------------------------------------------------------------

fn torus_dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let mut dx = (a.0 - b.0).abs() % 1.0;
    if dx > 0.5 {
        dx = 1.0 - dx;
    }
    let mut dy = (a.1 - b.1).abs() % 1.0;
    if dy > 0.5 {
        dy = 1.0 - dy;
    }
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone)]
pub struct EulerRow {
    pub step: u64,
    pub t_log10: f64,
    pub x: f64,
    pub y: f64,
    pub in_box_p: bool,
    pub in_box_q: bool,
}

#[derive(Debug)]
pub struct EulerSeries {
    /// Subsampled trajectory rows.
    pub rows: Vec<EulerRow>,
    /// (log10 of step count, occupancy fraction of the p-ball, of the
    /// q-ball) on a log-uniform grid.
    pub occupancy: Vec<(f64, f64, f64)>,
    pub final_occ_p: f64,
    pub final_occ_q: f64,
    pub stagnated_at: Option<u64>,
}

pub struct EulerSpec {
    pub start: (f64, f64),
    pub step_delta: f64,
    pub steps: u64,
    pub box_r: f64,
    /// Number of occupancy grid points per decade of step count.
    pub grid_per_decade: u32,
    /// Cap on stored trajectory rows.
    pub max_rows: u64,
}

/// Iterates M ← M + δ·φ(M)·(1, α) mod Z², counting the fraction of steps
/// spent inside the r-balls around p and q. Occupancy is weighted by step
/// count. A stagnation guard aborts when the displacement drops below
/// 1e-30.
pub fn euler_torus_simulate(params: &FlowParams, spec: &EulerSpec) -> Result<EulerSeries> {
    params.validate()?;
    let alpha = params.angle.to_f64();
    let p = (rat_to_f64(&params.p.0), rat_to_f64(&params.p.1));
    let q = (rat_to_f64(&params.q.0), rat_to_f64(&params.q.1));
    let phi = |m: (f64, f64)| -> f64 {
        let dp = torus_dist2(m, p);
        let dq = torus_dist2(m, q);
        match params.speed_model {
            SpeedModel::MinDistance => dp.min(dq),
            SpeedModel::QuadraticHessian => {
                (params.d_p.sqrt() * dp * dp).min(params.d_q.sqrt() * dq * dq)
            }
        }
    };
    let mut m = (spec.start.0.rem_euclid(1.0), spec.start.1.rem_euclid(1.0));
    let mut in_p: u64 = 0;
    let mut in_q: u64 = 0;
    let mut rows = Vec::new();
    let mut occupancy = Vec::new();
    let mut stagnated_at = None;
    let mut next_grid = 1.0f64;
    let grid_factor = 10f64.powf(1.0 / spec.grid_per_decade.max(1) as f64);
    let row_stride = (spec.steps / spec.max_rows.max(1)).max(1);
    for step in 1..=spec.steps {
        let speed = phi(m);
        let disp = spec.step_delta * speed;
        if disp < 1e-30 {
            stagnated_at = Some(step);
            break;
        }
        m.0 = (m.0 + disp).rem_euclid(1.0);
        m.1 = (m.1 + disp * alpha).rem_euclid(1.0);
        let bp = torus_dist2(m, p) < spec.box_r;
        let bq = torus_dist2(m, q) < spec.box_r;
        if bp {
            in_p += 1;
        }
        if bq {
            in_q += 1;
        }
        if step % row_stride == 0 || step == spec.steps {
            rows.push(EulerRow {
                step,
                t_log10: (step as f64).log10(),
                x: m.0,
                y: m.1,
                in_box_p: bp,
                in_box_q: bq,
            });
        }
        if step as f64 >= next_grid || step == spec.steps {
            occupancy.push((
                (step as f64).log10(),
                in_p as f64 / step as f64,
                in_q as f64 / step as f64,
            ));
            while next_grid <= step as f64 {
                next_grid *= grid_factor;
            }
        }
    }
    let steps_done = stagnated_at.unwrap_or(spec.steps);
    Ok(EulerSeries {
        rows,
        occupancy,
        final_occ_p: in_p as f64 / steps_done as f64,
        final_occ_q: in_q as f64 / steps_done as f64,
        stagnated_at,
    })
}

/// (liminf-estimate, limsup-estimate) of a recorded occupancy series over
/// its tail fraction.
pub fn pomega_estimate(series: &[f64], tail_fraction: f64) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(FlowError::EmptySeries);
    }
    assert!(tail_fraction > 0.0 && tail_fraction <= 1.0);
    let start = ((series.len() as f64) * (1.0 - tail_fraction)).floor() as usize;
    let tail = &series[start.min(series.len() - 1)..];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in tail {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

/// Named experiment presets from the figure pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2Left,
    Fig2Right,
}

impl Preset {
    pub fn by_name(name: &str) -> Option<Preset> {
        match name {
            "fig1" => Some(Preset::Fig1),
            "fig2-left" => Some(Preset::Fig2Left),
            "fig2-right" => Some(Preset::Fig2Right),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2Left => "fig2-left",
            Preset::Fig2Right => "fig2-right",
        }
    }
}

pub struct PresetConfig {
    pub params: FlowParams,
    pub euler: EulerSpec,
}

fn angle_from_rat(value: &Rat, depth: usize) -> Angle {
    let qs = expand_cf(value, depth);
    Angle::from_quotients(&qs).expect("preset angle")
}

/// Builds the full parameter set of a named preset. The trajectory start,
/// step size and stopping points follow the figure captions; q in the
/// fig2 presets is the time-8.357 image of p under the unit-speed linear
/// flow.
pub fn preset_config(preset: Preset) -> PresetConfig {
    match preset {
        Preset::Fig1 => {
            let alpha = Rat::new(Int::from(764_831u64), Int::from(1_000_000u64));
            let angle = angle_from_rat(&alpha, 40);
            let params = FlowParams {
                angle,
                p: (rat_from_f64(0.25), rat_from_f64(0.75)),
                q: (rat_from_f64(0.75), rat_from_f64(0.25)),
                d_p: 1.0,
                d_q: 1.0,
                section_x0: rat_from_f64(0.5),
                speed_model: SpeedModel::MinDistance,
            };
            PresetConfig {
                params,
                euler: EulerSpec {
                    start: (0.1, 0.3),
                    step_delta: 0.1972348,
                    steps: 100_000,
                    box_r: 0.1,
                    grid_per_decade: 8,
                    max_rows: 20_000,
                },
            }
        }
        Preset::Fig2Left | Preset::Fig2Right => {
            let alpha = if preset == Preset::Fig2Left {
                Rat::new(Int::from(4), Int::from(13))
                    + Rat::new(Int::from(2), Int::from(135))
                    + Rat::new(Int::from(1), Int::from(26_714))
                    + Rat::new(Int::from(2), Int::from(166_267_121u64))
            } else {
                // √2 − 1 at depth 40
                let mut qs = vec![Int::zero()];
                qs.extend(std::iter::repeat_n(Int::from(2), 40));
                return preset_fig2(Angle::from_quotients(&qs).unwrap(), preset);
            };
            preset_fig2(angle_from_rat(&alpha, 40), preset)
        }
    }
}

fn preset_fig2(angle: Angle, _preset: Preset) -> PresetConfig {
    let alpha_f = angle.to_f64();
    let p = (0.25f64, 0.75f64);
    let flight = 8.357f64;
    let q = (
        (p.0 + flight).rem_euclid(1.0),
        (p.1 + flight * alpha_f).rem_euclid(1.0),
    );
    let params = FlowParams {
        angle,
        p: (rat_from_f64(p.0), rat_from_f64(p.1)),
        q: (rat_from_f64(q.0), rat_from_f64(q.1)),
        d_p: 1.0,
        d_q: 1.0,
        section_x0: rat_from_f64(0.5),
        speed_model: SpeedModel::MinDistance,
    };
    PresetConfig {
        params,
        euler: EulerSpec {
            start: (0.6319874, 0.3684641),
            step_delta: 0.1572348,
            steps: 1_000_000,
            box_r: 0.1,
            grid_per_decade: 8,
            max_rows: 20_000,
        },
    }
}
