//! Parameter sweeps: a finite grid over angle presets and stopping-point
//! offset recipes, one regime-verdict row per cell. Cells run in parallel;
//! rows are emitted in a fixed order so reruns are byte-identical, and
//! completed cells listed in an existing sweep CSV are reused on rerun.

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use toruslab_core::cf::beta0_partial;
use toruslab_core::classify::regime_verdict;
use toruslab_core::flow::{FlowParams, SpeedModel};
use toruslab_core::numeric::{mod1, rat_from_u64, Rat};
use toruslab_core::{golden_prefix, sqrt2_minus_one_prefix, Angle, Int};

pub const ANGLE_PRESETS: &[&str] = &["sqrt2", "golden", "rapid-growth", "w-1-3"];
pub const BETA_RECIPES: &[&str] = &["same-orbit", "rational-third", "beta0-offset"];

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub cell: usize,
    pub angle: String,
    pub recipe: String,
    pub status: String,
    pub regime: String,
    pub basis: String,
    pub pomega: String,
    pub conflicts: usize,
}

fn build_angle(name: &str) -> Result<Angle> {
    Ok(match name {
        "sqrt2" => sqrt2_minus_one_prefix(16),
        "golden" => golden_prefix(18),
        "rapid-growth" => toruslab_core::classify::construct_rapid_growth_angle(1.0, 0.5, 4, None)?,
        "w-1-3" => {
            let seed = vec![Int::from(0), Int::from(2), Int::from(2)];
            toruslab_core::classify::construct_w_angle(&Rat::from(Int::from(1)), 3, &seed, 2)?
        }
        other => anyhow::bail!("unknown angle preset '{other}'"),
    })
}

fn build_params(angle: &Angle, recipe: &str) -> Result<FlowParams> {
    let p = (rat_from_u64(1, 2), rat_from_u64(3, 10));
    let q = match recipe {
        "same-orbit" => {
            let r = rat_from_u64(3, 2);
            (mod1(&(&p.0 + &r)), mod1(&(&p.1 + angle.value() * &r)))
        }
        "rational-third" => (p.0.clone(), mod1(&(&p.1 + rat_from_u64(1, 3)))),
        "beta0-offset" => {
            let level = angle.horizon().saturating_sub(1).max(1);
            let (b0, _) = beta0_partial(angle, level)?;
            (p.0.clone(), mod1(&(&p.1 - b0.value())))
        }
        other => anyhow::bail!("unknown beta recipe '{other}'"),
    };
    Ok(FlowParams {
        angle: angle.clone(),
        p,
        q,
        d_p: 4.0 * std::f64::consts::PI.powi(2),
        d_q: std::f64::consts::PI.powi(2),
        section_x0: rat_from_u64(1, 4),
        speed_model: SpeedModel::MinDistance,
    })
}

pub fn run_sweep(depth: usize, reuse: &[String]) -> Vec<SweepRow> {
    let cells: Vec<(usize, &str, &str)> = ANGLE_PRESETS
        .iter()
        .flat_map(|a| BETA_RECIPES.iter().map(move |r| (*a, *r)))
        .enumerate()
        .map(|(i, (a, r))| (i, a, r))
        .collect();
    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|(cell, angle_name, recipe)| {
            if let Some(done) = reuse
                .iter()
                .find(|line| line.starts_with(&format!("{cell},{angle_name},{recipe},")))
            {
                return reused_row(*cell, angle_name, recipe, done);
            }
            let outcome = build_angle(angle_name).and_then(|angle| {
                let params = build_params(&angle, recipe)?;
                Ok(regime_verdict(&angle, &params, depth.min(angle.horizon()))?)
            });
            match outcome {
                Ok(v) => SweepRow {
                    cell: *cell,
                    angle: angle_name.to_string(),
                    recipe: recipe.to_string(),
                    status: "ok".into(),
                    regime: v.regime,
                    basis: v.basis,
                    pomega: v.predicted_pomega,
                    conflicts: v.conflicts.len(),
                },
                Err(e) => SweepRow {
                    cell: *cell,
                    angle: angle_name.to_string(),
                    recipe: recipe.to_string(),
                    status: format!("error: {e}"),
                    regime: "-".into(),
                    basis: "-".into(),
                    pomega: "-".into(),
                    conflicts: 0,
                },
            }
        })
        .collect();
    rows.sort_by_key(|r| r.cell);
    rows
}

fn reused_row(cell: usize, angle: &str, recipe: &str, line: &str) -> SweepRow {
    let fields: Vec<&str> = line.split(',').collect();
    SweepRow {
        cell,
        angle: angle.to_string(),
        recipe: recipe.to_string(),
        status: fields.get(3).unwrap_or(&"ok").to_string(),
        regime: fields.get(4).unwrap_or(&"-").to_string(),
        basis: fields.get(5).unwrap_or(&"-").to_string(),
        pomega: fields.get(6).unwrap_or(&"-").to_string(),
        conflicts: fields
            .get(7)
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0),
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("cell,angle,recipe,status,regime,basis,pomega,conflicts\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.cell,
            r.angle,
            r.recipe,
            r.status,
            r.regime,
            r.basis.replace(',', ";"),
            r.pomega.replace(',', ";"),
            r.conflicts
        ));
    }
    out
}
