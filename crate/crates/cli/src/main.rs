//! toruslab: a command-line lab for circle-rotation renormalization,
//! Birkhoff sums with the 1/‖·‖ observable, Diophantine regime
//! classification, and cusped-flow simulation.
//!
//! Exit codes: 0 on success, 2 when a verify suite finds an inequality
//! violation on a hypothesis-satisfying instance, 1 on usage or runtime
//! errors (with machine-readable JSON on stderr).

mod emit;
mod manifest;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use toruslab_core::birkhoff::{
    birkhoff_series, build_bad_sets, default_v, theta, SumMode, USchedule,
};
use toruslab_core::cf::{convergents, AngleJson, CirclePoint};
use toruslab_core::classify::{
    construct_rapid_growth_angle, construct_w_angle, growth_check, khinchin_levy_partial,
    liouville_witnesses, regime_verdict, sum_inv_log_a, w_membership,
};
use toruslab_core::flow::{
    euler_torus_simulate, preset_config, section_setup, special_flow_simulate, FlowParams, Preset,
    SpecialFlowSpec, SpeedModel,
};
use toruslab_core::numeric::{mod1, rat_to_f64};
use toruslab_core::{Angle, Int, Rat};

use manifest::ManifestWriter;

#[derive(Parser)]
#[command(
    name = "toruslab",
    version,
    about = "rotation renormalization and cusped-flow lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Partial quotients, comma separated (a_0,a_1,...)
    #[arg(long)]
    quotients: Option<String>,
    /// Output directory for CSV/JSON/SVG artifacts plus manifest.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a JSON report to stdout
    #[arg(long)]
    json: bool,
    /// Seed for all randomness in the command
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Exact convergent ladder (p_n, q_n, rho_n, lambda_n) of an angle
    Convergents {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Diophantine certificates and (optionally) the regime verdict
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Exponent for the approximability certificate
        #[arg(long, default_value = "1")]
        nu: String,
        /// Modulus for the gcd condition
        #[arg(long, default_value_t = 3)]
        k: u64,
        /// Stopping point p as "x,y" (rationals); enables the verdict
        #[arg(long)]
        p: Option<String>,
        /// Stopping point q as "x,y"
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        dp: f64,
        #[arg(long, default_value_t = 1.0)]
        dq: f64,
        /// Section abscissa x0
        #[arg(long, default_value = "1/4")]
        x0: String,
    },
    /// Construct an angle: witnessed approximability or rapid growth
    ConstructAngle {
        #[command(flatten)]
        common: CommonArgs,
        /// "w" (witnessed (nu,k)-approximability) or "rapid"
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "1")]
        nu: String,
        #[arg(long, default_value_t = 3)]
        k: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Seed prefix quotients, comma separated
        #[arg(long)]
        seed_quotients: Option<String>,
    },
    /// Birkhoff sum series S_1..S_n of 1/||x + i*alpha||
    Birkhoff {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "exact")]
        mode: String,
    },
    /// Theta ratio series S_n(x)/S_n(x - beta)
    Theta {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "exact")]
        mode: String,
    },
    /// Close-return bad sets D_n and their measure ledger
    Badsets {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 3)]
        level: usize,
        /// u-schedule: "pow:GAMMA" or "loglog"
        #[arg(long, default_value = "pow:1.0")]
        u_schedule: String,
    },
    /// Run a named inequality suite; exit 2 on any inequality violation
    Verify {
        /// Lemma tag (see `verify list`)
        name: String,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long, default_value = "1")]
        nu: String,
        #[arg(long, default_value_t = 3)]
        b: u64,
        #[arg(long = "big-k", default_value_t = 2)]
        k_factor: u64,
    },
    /// Simulate the flow (euler integrator or special flow over the section)
    Simulate {
        #[command(subcommand)]
        sim: SimCommand,
    },
    /// Regime-verdict sweep over the built-in angle × offset grid
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// List or show the named experiment presets
    Preset {
        /// "list" or a preset name to show
        #[arg(default_value = "list")]
        which: String,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Explicit Euler integration of M <- M + delta*phi(M)*(1, alpha)
    Euler {
        #[command(flatten)]
        common: CommonArgs,
        /// Named preset: fig1, fig2-left, fig2-right
        #[arg(long)]
        preset: String,
        /// Step count (scientific notation accepted)
        #[arg(long)]
        steps: Option<String>,
    },
    /// Special flow over the base rotation with the two-cusp roof
    Special {
        #[command(flatten)]
        common: CommonArgs,
        /// Named experiment preset supplying angle and flow parameters
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        returns: u64,
        #[arg(long, default_value_t = 1.0)]
        dp: f64,
        #[arg(long, default_value_t = 1.0)]
        dq: f64,
        /// Stopping point p as "x,y"
        #[arg(long, default_value = "1/2,3/10")]
        p: String,
        /// Stopping point q as "x,y"; default puts q on p's orbit
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value = "1/4")]
        x0: String,
        /// Start height on the section
        #[arg(long, default_value = "27/100")]
        start: String,
        /// Tail window start for the tail statistics
        #[arg(long)]
        tail_start: Option<u64>,
    },
}

fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n
            .trim()
            .parse()
            .map_err(|e| anyhow!("bad numerator: {e}"))?;
        let d: Int = d
            .trim()
            .parse()
            .map_err(|e| anyhow!("bad denominator: {e}"))?;
        if d == Int::from(0) {
            bail!("zero denominator in '{s}'");
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let scale = Int::from(10u32).pow(frac.len() as u32);
        let whole: Int = if whole.is_empty() || whole == "-" {
            Int::from(0)
        } else {
            whole.parse().map_err(|e| anyhow!("bad number: {e}"))?
        };
        let frac_val: Int = frac.parse().map_err(|e| anyhow!("bad number: {e}"))?;
        let sign = Int::from(if s.starts_with('-') { -1 } else { 1 });
        let v = Rat::from(whole) + Rat::new(frac_val * sign, scale);
        return Ok(v);
    }
    let n: Int = s.parse().map_err(|e| anyhow!("bad number '{s}': {e}"))?;
    Ok(Rat::from(n))
}

fn parse_point(s: &str) -> Result<(Rat, Rat)> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("point must be 'x,y', got '{s}'"))?;
    Ok((parse_rat(x)?, parse_rat(y)?))
}

fn parse_quotients(s: &str) -> Result<Vec<Int>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Int>()
                .map_err(|e| anyhow!("bad quotient '{t}': {e}"))
        })
        .collect()
}

fn parse_angle(common: &CommonArgs) -> Result<Angle> {
    let qs = common
        .quotients
        .as_ref()
        .ok_or_else(|| anyhow!("--quotients is required"))?;
    Ok(Angle::from_quotients(&parse_quotients(qs)?)?)
}

fn parse_mode(s: &str) -> Result<SumMode> {
    match s {
        "exact" => Ok(SumMode::Exact),
        "double" => Ok(SumMode::Double),
        other => bail!("mode must be exact|double, got '{other}'"),
    }
}

fn parse_steps(s: &str) -> Result<u64> {
    let v: f64 = s
        .parse()
        .map_err(|e| anyhow!("bad step count '{s}': {e}"))?;
    if !(v.is_finite() && v >= 1.0) {
        bail!("step count must be >= 1");
    }
    Ok(v as u64)
}

/// Named experiment presets beyond the euler figure set: a witnessed
/// (1,3)-approximable angle with the rational offset 1/3, a rapid-growth
/// angle with a same-orbit offset, and the rapid-growth angle with the
/// distinguished β₀ offset. Explicit flags override preset values.
const EXPERIMENT_PRESETS: &[&str] = &["w-construct", "rapid-growth", "beta0-physical"];

fn experiment_preset(name: &str) -> Result<FlowParams> {
    let p = (parse_rat("1/2")?, parse_rat("3/10")?);
    let pi2 = std::f64::consts::PI.powi(2);
    let (angle, q) = match name {
        "w-construct" => {
            let seed = vec![Int::from(0), Int::from(2), Int::from(2)];
            let angle = construct_w_angle(&Rat::from(Int::from(1)), 3, &seed, 2)
                .map_err(|e| anyhow!(e.to_string()))?;
            let q = (p.0.clone(), mod1(&(&p.1 + parse_rat("1/3")?)));
            (angle, q)
        }
        "rapid-growth" => {
            let angle = construct_rapid_growth_angle(1.0, 0.5, 5, None)
                .map_err(|e| anyhow!(e.to_string()))?;
            let r = parse_rat("3/2")?;
            let q = (mod1(&(&p.0 + &r)), mod1(&(&p.1 + angle.value() * &r)));
            (angle, q)
        }
        "beta0-physical" => {
            let angle = construct_rapid_growth_angle(1.0, 0.5, 5, None)
                .map_err(|e| anyhow!(e.to_string()))?;
            let level = angle.horizon() - 1;
            let (b0, _) = toruslab_core::cf::beta0_partial(&angle, level)
                .map_err(|e| anyhow!(e.to_string()))?;
            let q = (p.0.clone(), mod1(&(&p.1 - b0.value())));
            (angle, q)
        }
        other => bail!("unknown experiment preset '{other}'"),
    };
    Ok(FlowParams {
        angle,
        p,
        q,
        d_p: 4.0 * pi2,
        d_q: pi2,
        section_x0: parse_rat("1/4")?,
        speed_model: SpeedModel::MinDistance,
    })
}

fn emit_json(common: &CommonArgs, value: &serde_json::Value) {
    if common.json || common.out.is_none() {
        println!("{}", serde_json::to_string_pretty(value).unwrap());
    }
}

fn maybe_manifest(
    common: &CommonArgs,
    config: serde_json::Value,
    files: Vec<(String, Vec<u8>)>,
) -> Result<()> {
    if let Some(dir) = &common.out {
        let mut writer = ManifestWriter::new(dir, config, common.seed)?;
        for (name, body) in files {
            writer.write(&name, &body)?;
        }
        writer.finish()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Convergents { common } => {
            let angle = parse_angle(&common)?;
            let table = convergents(&angle);
            let report = serde_json::json!({
                "angle": AngleJson::of(&angle),
                "table": table.to_json(),
            });
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "convergents"}),
                vec![(
                    "convergents.json".into(),
                    serde_json::to_vec_pretty(&report)?,
                )],
            )?;
            Ok(0)
        }
        Command::Classify {
            common,
            depth,
            nu,
            k,
            p,
            q,
            dp,
            dq,
            x0,
        } => {
            let angle = parse_angle(&common)?;
            let nu = parse_rat(&nu)?;
            let depth = depth.min(angle.horizon());
            let mut report = serde_json::json!({
                "angle": AngleJson::of(&angle),
                "depth": depth,
                "w_membership": w_membership(&angle, &nu, k, depth),
                "liouville": liouville_witnesses(&angle, 2, depth),
                "khinchin_levy_partials": khinchin_levy_partial(&angle, depth),
                "growth": growth_check(&angle, 1e-6, 0.5, depth),
                "sum_inv_log_a": sum_inv_log_a(&angle, depth),
            });
            if let (Some(p), Some(q)) = (p, q) {
                let params = FlowParams {
                    angle: angle.clone(),
                    p: parse_point(&p)?,
                    q: parse_point(&q)?,
                    d_p: dp,
                    d_q: dq,
                    section_x0: parse_rat(&x0)?,
                    speed_model: SpeedModel::MinDistance,
                };
                let verdict = regime_verdict(&angle, &params, depth)?;
                report["verdict"] = serde_json::to_value(&verdict)?;
            }
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "classify", "depth": depth}),
                vec![("classify.json".into(), serde_json::to_vec_pretty(&report)?)],
            )?;
            Ok(0)
        }
        Command::ConstructAngle {
            common,
            kind,
            nu,
            k,
            c,
            gamma,
            levels,
            seed_quotients,
        } => {
            let seed = seed_quotients.as_deref().map(parse_quotients).transpose()?;
            let angle = match kind.as_str() {
                "w" => {
                    let nu = parse_rat(&nu)?;
                    let default_seed = vec![Int::from(0), Int::from(2)];
                    construct_w_angle(&nu, k, seed.as_deref().unwrap_or(&default_seed), levels)?
                }
                "rapid" => construct_rapid_growth_angle(c, gamma, levels, seed.as_deref())?,
                other => bail!("kind must be w|rapid, got '{other}'"),
            };
            let report = serde_json::json!({ "angle": AngleJson::of(&angle) });
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "construct-angle", "kind": kind}),
                vec![("angle.json".into(), serde_json::to_vec_pretty(&report)?)],
            )?;
            Ok(0)
        }
        Command::Birkhoff { common, x, n, mode } => {
            let angle = parse_angle(&common)?;
            let x = CirclePoint::new(parse_rat(&x)?);
            let mode = parse_mode(&mode)?;
            let series = birkhoff_series(&angle, &x, n, mode)?;
            let mode_name = if mode == SumMode::Exact {
                "exact"
            } else {
                "double"
            };
            let csv = emit::series_csv("S_n", &series.prefix, mode_name, series.condition_flagged);
            let report = serde_json::json!({
                "n": n,
                "mode": mode_name,
                "total": emit::dec(series.total),
                "total_exact": series.exact_total.as_ref().map(|e| {
                    // reducing a fraction with a megadigit denominator is a
                    // gcd on the whole thing; only do it when printable
                    if e.den.bits() < 200_000 {
                        let r = e.to_rat();
                        format!("{}/{}", r.numer(), r.denom())
                    } else {
                        "[too large to reduce; use --mode double]".to_string()
                    }
                }),
                "condition_flagged": series.condition_flagged,
                "rel_error_bound": series.rel_error_bound,
            });
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "birkhoff", "n": n, "mode": mode_name}),
                vec![
                    ("birkhoff.csv".into(), csv.into_bytes()),
                    ("birkhoff.json".into(), serde_json::to_vec_pretty(&report)?),
                ],
            )?;
            Ok(0)
        }
        Command::Theta {
            common,
            x,
            beta,
            n,
            mode,
        } => {
            if mode == "exact" && n > 20_000 {
                bail!("exact theta reduces a huge fraction; use --mode double beyond n = 20000");
            }
            let angle = parse_angle(&common)?;
            let x = CirclePoint::new(parse_rat(&x)?);
            let beta = CirclePoint::new(parse_rat(&beta)?);
            let mode = parse_mode(&mode)?;
            let mode_name = if mode == SumMode::Exact {
                "exact"
            } else {
                "double"
            };
            // prefix ratio series from the two sum series
            let sx = birkhoff_series(&angle, &x, n, mode)?;
            let shifted = CirclePoint::new(x.value() - beta.value());
            let sb = birkhoff_series(&angle, &shifted, n, mode)?;
            let ratios: Vec<f64> = sx
                .prefix
                .iter()
                .zip(&sb.prefix)
                .map(|(a, b)| a / b)
                .collect();
            let flagged = sx.condition_flagged || sb.condition_flagged;
            let csv = emit::series_csv("Theta_n", &ratios, mode_name, flagged);
            let t = theta(&angle, &x, &beta, n, mode)?;
            let report = serde_json::json!({
                "n": n,
                "mode": mode_name,
                "theta": emit::dec(t.value),
                "theta_exact": t.exact.as_ref().map(|r| format!("{}/{}", r.numer(), r.denom())),
                "condition_flagged": flagged,
            });
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "theta", "n": n, "mode": mode_name}),
                vec![
                    ("theta.csv".into(), csv.into_bytes()),
                    ("theta.json".into(), serde_json::to_vec_pretty(&report)?),
                ],
            )?;
            Ok(0)
        }
        Command::Badsets {
            common,
            level,
            u_schedule,
        } => {
            let angle = parse_angle(&common)?;
            let u = if let Some(gamma) = u_schedule.strip_prefix("pow:") {
                USchedule::Power {
                    gamma: gamma.parse().context("bad gamma in u-schedule")?,
                }
            } else if u_schedule == "loglog" {
                USchedule::LogLog
            } else {
                bail!("u-schedule must be pow:GAMMA or loglog");
            };
            let v: Vec<u64> = (0..angle.depth() + 2).map(default_v).collect();
            let sets = build_bad_sets(&angle, &u, &v, level)?;
            let report = serde_json::json!({
                "level": level,
                "d_n": sets.d_n.to_json(),
                "tilde_d_n": sets.tilde_d_n.to_json(),
                "ledger": sets.ledger,
                "v_checks_ok": sets.v_checks_ok,
            });
            emit_json(&common, &report);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "badsets", "level": level}),
                vec![("badsets.json".into(), serde_json::to_vec_pretty(&report)?)],
            )?;
            Ok(0)
        }
        Command::Verify {
            name,
            common,
            samples,
            level,
            ell,
            nu,
            b,
            k_factor,
        } => {
            if name == "list" {
                println!("{}", verify::LEMMA_TAGS.join("\n"));
                return Ok(0);
            }
            let args = verify::VerifyArgs {
                samples,
                seed: common.seed,
                quotients: common
                    .quotients
                    .as_deref()
                    .map(parse_quotients)
                    .transpose()?,
                level,
                ell,
                nu: parse_rat(&nu)?,
                b,
                k_factor,
            };
            let report = verify::run(&name, &args)?;
            let value = serde_json::to_value(&report)?;
            emit_json(&common, &value);
            maybe_manifest(
                &common,
                serde_json::json!({"command": "verify", "lemma": name}),
                vec![("verify.json".into(), serde_json::to_vec_pretty(&value)?)],
            )?;
            Ok(report.exit_code())
        }
        Command::Simulate { sim } => match sim {
            SimCommand::Euler {
                common,
                preset,
                steps,
            } => {
                let preset =
                    Preset::by_name(&preset).ok_or_else(|| anyhow!("unknown preset '{preset}'"))?;
                let mut cfg = preset_config(preset);
                if let Some(steps) = steps {
                    cfg.euler.steps = parse_steps(&steps)?;
                }
                let series = euler_torus_simulate(&cfg.params, &cfg.euler)?;
                let occ_points: Vec<(f64, f64)> =
                    series.occupancy.iter().map(|(t, p, _)| (*t, *p)).collect();
                let traj_points: Vec<(f64, f64)> = series.rows.iter().map(|r| (r.x, r.y)).collect();
                let report = serde_json::json!({
                    "preset": preset.name(),
                    "steps": cfg.euler.steps,
                    "final_occ_p": series.final_occ_p,
                    "final_occ_q": series.final_occ_q,
                    "stagnated_at": series.stagnated_at,
                });
                emit_json(&common, &report);
                maybe_manifest(
                    &common,
                    serde_json::json!({
                        "command": "simulate-euler",
                        "preset": preset.name(),
                        "steps": cfg.euler.steps,
                        "alpha": emit::dec(cfg.params.angle.to_f64()),
                        "delta": emit::dec(cfg.euler.step_delta),
                    }),
                    vec![
                        ("euler.csv".into(), emit::euler_csv(&series).into_bytes()),
                        (
                            "occupancy.csv".into(),
                            emit::occupancy_csv(&series).into_bytes(),
                        ),
                        (
                            "occupancy.svg".into(),
                            emit::line_svg(&occ_points, "log10 t", "occupancy(p)").into_bytes(),
                        ),
                        (
                            "trajectory.svg".into(),
                            emit::scatter_svg(&traj_points, "x", "y").into_bytes(),
                        ),
                        ("summary.json".into(), serde_json::to_vec_pretty(&report)?),
                    ],
                )?;
                Ok(0)
            }
            SimCommand::Special {
                common,
                preset,
                returns,
                dp,
                dq,
                p,
                q,
                x0,
                start,
                tail_start,
            } => {
                let params = if let Some(name) = &preset {
                    let mut params = experiment_preset(name)?;
                    // explicit flags override the preset's flow data
                    if let Some(qs) = &common.quotients {
                        params.angle = Angle::from_quotients(&parse_quotients(qs)?)?;
                    }
                    if let Some(q) = &q {
                        params.q = parse_point(q)?;
                    }
                    params
                } else {
                    let angle = parse_angle(&common)?;
                    let p = parse_point(&p)?;
                    let q = match &q {
                        Some(q) => parse_point(q)?,
                        None => {
                            let r = Rat::new(Int::from(3), Int::from(2));
                            (mod1(&(&p.0 + &r)), mod1(&(&p.1 + angle.value() * &r)))
                        }
                    };
                    FlowParams {
                        angle,
                        p,
                        q,
                        d_p: dp,
                        d_q: dq,
                        section_x0: parse_rat(&x0)?,
                        speed_model: SpeedModel::MinDistance,
                    }
                };
                let section = section_setup(&params)?;
                let spec = SpecialFlowSpec {
                    returns,
                    record_points: 1000,
                    tail_start: tail_start.unwrap_or(returns / 2),
                };
                let start = CirclePoint::new(parse_rat(&start)?);
                let series = special_flow_simulate(&params, &section, &start, &spec)?;
                let theta_points: Vec<(f64, f64)> = series
                    .rows
                    .iter()
                    .map(|r| ((r.n as f64).log10(), r.theta_proxy))
                    .collect();
                let report = serde_json::json!({
                    "returns": returns,
                    "beta": emit::rat_cols(section.beta.value()).1,
                    "final_occ_p": series.final_row.occ_p,
                    "final_occ_q": series.final_row.occ_q,
                    "final_theta_proxy": series.final_row.theta_proxy,
                    "theta_tail": {
                        "min": series.theta_tail.min, "max": series.theta_tail.max,
                    },
                    "ledger_residual": series.ledger_residual,
                });
                emit_json(&common, &report);
                maybe_manifest(
                    &common,
                    serde_json::json!({"command": "simulate-special", "returns": returns}),
                    vec![
                        (
                            "special.csv".into(),
                            emit::special_csv(&series).into_bytes(),
                        ),
                        (
                            "theta.svg".into(),
                            emit::line_svg(&theta_points, "log10 n", "theta proxy").into_bytes(),
                        ),
                        ("summary.json".into(), serde_json::to_vec_pretty(&report)?),
                    ],
                )?;
                Ok(0)
            }
        },
        Command::Sweep { common, depth } => {
            let reuse: Vec<String> = common
                .out
                .as_ref()
                .map(|dir| dir.join("sweep.csv"))
                .filter(|p| p.exists())
                .map(|p| {
                    std::fs::read_to_string(p)
                        .unwrap_or_default()
                        .lines()
                        .skip(1)
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            let rows = sweep::run_sweep(depth, &reuse);
            let csv = sweep::rows_to_csv(&rows);
            if common.json || common.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            }
            maybe_manifest(
                &common,
                serde_json::json!({"command": "sweep", "depth": depth}),
                vec![("sweep.csv".into(), csv.into_bytes())],
            )?;
            Ok(0)
        }
        Command::Preset { which } => {
            if which == "list" {
                for p in [Preset::Fig1, Preset::Fig2Left, Preset::Fig2Right] {
                    println!("{}", p.name());
                }
                for p in EXPERIMENT_PRESETS {
                    println!("{p}");
                }
                return Ok(0);
            }
            if EXPERIMENT_PRESETS.contains(&which.as_str()) {
                let params = experiment_preset(&which)?;
                let report = serde_json::json!({
                    "name": which,
                    "kind": "special-flow experiment",
                    "quotients": params.angle.quotients().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "alpha": emit::dec(params.angle.to_f64()),
                    "p": [emit::rat_cols(&params.p.0).1, emit::rat_cols(&params.p.1).1],
                    "q": [emit::rat_cols(&params.q.0).1, emit::rat_cols(&params.q.1).1],
                    "d_p": params.d_p,
                    "d_q": params.d_q,
                    "x0": emit::rat_cols(&params.section_x0).1,
                });
                println!("{}", serde_json::to_string_pretty(&report)?);
                return Ok(0);
            }
            let preset =
                Preset::by_name(&which).ok_or_else(|| anyhow!("unknown preset '{which}'"))?;
            let cfg = preset_config(preset);
            let report = serde_json::json!({
                "name": preset.name(),
                "alpha": emit::dec(cfg.params.angle.to_f64()),
                "alpha_exact": format!("{}/{}", cfg.params.angle.value().numer(), cfg.params.angle.value().denom()),
                "p": [emit::dec(rat_to_f64(&cfg.params.p.0)), emit::dec(rat_to_f64(&cfg.params.p.1))],
                "q": [emit::dec(rat_to_f64(&cfg.params.q.0)), emit::dec(rat_to_f64(&cfg.params.q.1))],
                "delta": emit::dec(cfg.euler.step_delta),
                "start": [emit::dec(cfg.euler.start.0), emit::dec(cfg.euler.start.1)],
                "steps": cfg.euler.steps,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TORUSLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!(
                "{}",
                serde_json::json!({"error": "usage", "detail": e.to_string()})
            );
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": e.to_string()}));
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(
            parse_rat("3/4").unwrap(),
            Rat::new(Int::from(3), Int::from(4))
        );
        assert_eq!(
            parse_rat("0.25").unwrap(),
            Rat::new(Int::from(1), Int::from(4))
        );
        assert_eq!(parse_rat("2").unwrap(), Rat::from(Int::from(2)));
        assert_eq!(
            parse_rat("-0.5").unwrap(),
            Rat::new(Int::from(-1), Int::from(2))
        );
        assert!(parse_rat("1/0").is_err());
        let (x, y) = parse_point("1/2,3/10").unwrap();
        assert_eq!(x, Rat::new(Int::from(1), Int::from(2)));
        assert_eq!(y, Rat::new(Int::from(3), Int::from(10)));
    }

    #[test]
    fn steps_parsing() {
        assert_eq!(parse_steps("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_steps("100000").unwrap(), 100_000);
        assert!(parse_steps("0").is_err());
    }
}
