//! `graphnls run --config`: one experiment from a JSON configuration.

use std::path::Path;

use graphnls::asymptotics::Scenario;
use graphnls::io::{resolve_coefficient, write_spectrum, ExperimentConfig};
use graphnls::nls::{weak_residual_battery, SolveOptions};
use graphnls::spectral::{default_h, eigenvalues};
use serde_json::json;

use crate::analysis::{blowup_into, decay_into, family_decay_rows, mass_into, Family, MassInputs};
use crate::output::{CliError, CliResult, Ctx};

fn family_of(scenario: &str) -> Option<Family> {
    match scenario {
        "soliton" => Some(Family::Soliton),
        "four-star-near" => Some(Family::FourStarNear),
        "four-star-far" => Some(Family::FourStarFar),
        _ => None,
    }
}

fn lambdas(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    match (&cfg.lambda_grid, cfg.lambda) {
        (Some(grid), _) => Ok(grid.values()?),
        (None, Some(l)) => Ok(vec![l]),
        (None, None) => Err(CliError::usage("config needs lambda or lambda_grid")),
    }
}

/// Run `config`; the output directory is the config's unless `--out` was
/// given.
pub fn run(ctx: &Ctx, config: &Path, out_given: bool) -> CliResult {
    let text = std::fs::read_to_string(config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let g = cfg
        .graph
        .load()
        .map_err(|e| CliError::invalid_graph(e.to_string()))?;
    let ctx = Ctx {
        out: if out_given { ctx.out.clone() } else { cfg.output.clone() },
        ..ctx.clone()
    };
    let lambdas = lambdas(&cfg)?;
    let inputs = serde_json::to_value(&cfg).map_err(|e| CliError::new("serialize", e.to_string()))?;
    let scenario = cfg.scenario.as_str();
    let files: Vec<&str> = match scenario {
        "soliton" | "four-star-near" | "four-star-far" => {
            vec!["blowup.csv", "blowup.json", "config.json", "decay.csv", "decay.json", "mass_scaling.csv", "profile.csv", "summary.json"]
        }
        "nls" | "localized" | "compact" => vec!["config.json", "envelope.csv", "mass.csv", "mass.json", "summary.json"],
        "spectrum" => vec!["config.json", "spectrum.csv", "spectrum.json", "summary.json"],
        other => {
            return Err(CliError::usage(format!(
                "unknown scenario '{other}' (soliton, four-star-near, four-star-far, nls, localized, compact, spectrum)"
            )))
        }
    };
    if ctx.dry_run {
        let mut plan = ctx.plan("run", inputs, &files);
        plan["lambdas"] = json!(lambdas);
        return Ok(plan);
    }
    let opts = SolveOptions {
        tol: cfg.solver.tol,
        h: cfg.solver.h,
        ..SolveOptions::default()
    };
    let mut out = ctx.artifacts();
    out.json("config.json", &cfg)?;
    let mut summary = if let Some(f) = family_of(scenario) {
        let blow = blowup_into(&ctx, &mut out, f, cfg.p, &lambdas, &[2.0], 10.0, inputs.clone())?;
        let rows = family_decay_rows(f, cfg.p, &lambdas, &[])?;
        let decay = decay_into(&ctx, &mut out, &rows, inputs.clone())?;
        let mut weak: f64 = 0.0;
        for &l in &lambdas {
            let ex = f.build(cfg.p, l)?;
            weak = weak.max(weak_residual_battery(&ex.graph, &ex.candidate, 50, cfg.seed)?);
        }
        json!({
            "scenario": scenario,
            "blowup": blow["passes"],
            "decay": decay["passes"],
            "weak_residual_max": weak,
        })
    } else if scenario == "spectrum" {
        let w = resolve_coefficient(&g, &cfg.w, 0.0, 50.0)?;
        let h = cfg.solver.h.unwrap_or_else(|| default_h(&g));
        let count = cfg.m_star.map_or(7, |m| m + 1);
        let s = eigenvalues(&g, &w, count, h)?;
        let summary = json!({"scenario": scenario, "h": h, "eigenvalues": s.values, "clusters": s.clusters});
        out.csv("spectrum.csv", |wr| write_spectrum(&s, wr))?;
        out.json("spectrum.json", &summary)?;
        summary
    } else {
        let scen: Scenario = scenario.parse()?;
        let seed = cfg.branch.clone().unwrap_or_else(|| {
            match scen {
                Scenario::Nls => "soliton",
                Scenario::Localized => "tadpole",
                Scenario::Compact => "bifurcation",
            }
            .to_string()
        });
        let w = serde_json::to_string(&cfg.w).expect("coefficient spec serializes");
        let rho = serde_json::to_string(&cfg.rho).expect("coefficient spec serializes");
        let m = MassInputs {
            scenario: scen,
            p: cfg.p,
            lambdas: &lambdas,
            seed: &seed,
            graph: Some(g.clone()),
            w: &w,
            rho: &rho,
            lambda0: cfg.lambda,
            morse: cfg.m_star.is_some(),
            m_star: cfg.m_star,
            opts,
        };
        let mass = mass_into(&ctx, &mut out, &m, inputs.clone())?;
        json!({"scenario": scenario, "branch": seed, "mass": mass})
    };
    summary["seed"] = json!(cfg.seed);
    summary["lambdas"] = json!(lambdas);
    out.json("summary.json", &summary)?;
    out.finish(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names() {
        assert_eq!(family_of("soliton"), Some(Family::Soliton));
        assert_eq!(family_of("nls"), None);
    }
}

