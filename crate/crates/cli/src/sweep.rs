//! Parameter grids: `key=a:b:step` runs the target per grid value in
//! parallel and concatenates rows behind a leading `sweep` column.

use rayon::prelude::*;

use refmarket::dynamics::GroupState;
use refmarket::report::CsvMeta;

use crate::commands;
use crate::config::Scenario;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<f64>,
}

pub fn parse(spec: &str) -> Result<SweepSpec, CliError> {
    let bad = || {
        CliError::Config(format!(
            "sweep spec {spec:?} must look like key=start:stop:step"
        ))
    };
    let (key, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(CliError::Config(format!(
            "sweep range {range:?} must have stop >= start and step > 0"
        )));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    let values = (0..count)
        .map(|i| start + i as f64 * step)
        .filter(|v| *v <= stop + step * 1e-9)
        .collect();
    Ok(SweepSpec {
        key: key.trim().to_string(),
        values,
    })
}

/// State override implied by a swept key.
fn swept_state(sc: &Scenario, key: &str, v: f64) -> Result<Option<GroupState>, CliError> {
    match key {
        "initial_state.e_g" | "e_g" => Ok(Some(GroupState::new(sc.state0.e_b, v))),
        "initial_state.e_b" | "e_b" => Ok(Some(GroupState::new(v, sc.state0.e_g))),
        // Complementary sweep: greens take v, blues the rest of the unit
        // firm mass (the usual single-axis presentation).
        "initial_state.e_g_complement" | "e_g_complement" => {
            Ok(Some(GroupState::new(1.0 - v, v)))
        }
        _ => Ok(None),
    }
}

pub fn run(sc: &Scenario, meta: &CsvMeta, target: &str, spec: &str) -> Result<String, CliError> {
    let spec = parse(spec)?;
    let rows: Vec<Result<String, CliError>> = spec
        .values
        .par_iter()
        .map(|&v| -> Result<String, CliError> {
            let row = match target {
                "dynamics" => {
                    let state = swept_state(sc, &spec.key, v)?.ok_or_else(|| {
                        CliError::Config(format!(
                            "dynamics sweep key {:?} not recognized",
                            spec.key
                        ))
                    })?;
                    commands::dynamics_single_row(sc, &state)?
                }
                "firing" => match spec.key.as_str() {
                    "lambda" | "policy.lambda" => commands::firing_row(sc, v)?,
                    other => {
                        return Err(CliError::Config(format!(
                            "firing sweep key {other:?} not recognized (use lambda)"
                        )))
                    }
                },
                "macro" => match spec.key.as_str() {
                    "kappa" | "policy.kappa" => {
                        commands::macro_row(sc, v)?.trim_end().to_string()
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "macro sweep key {other:?} not recognized (use kappa)"
                        )))
                    }
                },
                "equilibrium" => {
                    let state = swept_state(sc, &spec.key, v)?.ok_or_else(|| {
                        CliError::Config(format!(
                            "equilibrium sweep key {:?} not recognized",
                            spec.key
                        ))
                    })?;
                    let prim = commands::primitives(sc, &state)?;
                    let eq = refmarket::equilibrium::solve_threshold(&prim, sc.r)?;
                    let csv = refmarket::report::equilibrium_csv(
                        &prim,
                        &eq,
                        &CsvMeta {
                            version: String::new(),
                            config_hash: 0,
                        },
                    );
                    csv.lines().nth(2).unwrap_or_default().to_string()
                }
                other => {
                    return Err(CliError::Config(format!(
                        "sweep target {other:?} not supported (equilibrium | dynamics | firing | macro)"
                    )))
                }
            };
            Ok(format!("{:.16e},{row}\n", v))
        })
        .collect();

    let header = match target {
        "dynamics" => {
            "sweep,period,e_b,e_g,threshold,pool_value,hire_ref_b,hire_ref_g,hire_pool_b,\
             hire_pool_g,mean_wage_b,mean_wage_g,production,per_worker_productivity,gini,profits"
        }
        "firing" => {
            "sweep,lambda,v1,v2,pool1_value,pool2_value,production_pre,production_post,\
             production_total,bias_pre,bias_post"
        }
        "macro" => {
            "sweep,kappa,production_base,production_shocked,per_worker_base,per_worker_shocked,\
             wage_fosd_baseline_dominates,screened_loss_b,screened_loss_g,e_g_base,e_g_shocked"
        }
        _ => {
            "sweep,threshold,mixing_r,pool_value,pool_hiring,mass_hired_referral,\
             mass_hired_pool,employment_mass,lemons_gap,production,per_worker_productivity,gini"
        }
    };
    let mut out = meta.comment_line();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}
