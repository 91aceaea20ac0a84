//! One scripted run per exit alternative.

use super::{interval_mesh, Bound, Series, StudyReport};
use crate::models::{builtin_logistic, builtin_porous_media_linear};
use crate::solver::{diagnose, run, ExitStatus, SolverConfig};
use crate::{Field, Result};

fn indicator(hit: bool) -> f64 {
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Budget completion for the logistic with `lambda = 1`, approach to the
/// boundary of `X = (0, inf)` for `lambda = -0.5`, and norm blow-up for a
/// porous medium with growth rate 5. All three start from constant data, so
/// decay and blow-up times follow from the exponential rate of the constant
/// mode.
pub fn exit_alternative_study() -> Result<StudyReport> {
    let mut report = StudyReport::new("exit_alternatives");
    let mesh = interval_mesh(1.0, 32, 32, 2.0)?;

    let logistic = builtin_logistic(1.0, 1.0, 1.0)?;
    let budget = SolverConfig {
        dt_max: 0.1,
        ..SolverConfig::fixed(20.0, 0.01)
    };
    let out = run(&Field::constant(&mesh, &[0.5]), &logistic, &mesh, &budget, usize::MAX)?;
    report.measure(
        "budget_run_completes",
        indicator(matches!(out.exit, ExitStatus::CompletedBudget { .. })),
        Bound::AtLeast { limit: 1.0 },
    );

    let (u0, delta_x, rate) = (0.1, 1e-3, 0.5);
    let decay = builtin_logistic(1.0, -rate, 0.0)?;
    let config = SolverConfig {
        delta_x,
        ..SolverConfig::fixed(50.0, 0.01)
    };
    let out = run(&Field::constant(&mesh, &[u0]), &decay, &mesh, &config, usize::MAX)?;
    let predicted = (u0 / delta_x).ln() / rate;
    report.param("decay_predicted_exit", predicted);
    let hit = matches!(out.exit, ExitStatus::StateBoundaryApproach { .. });
    report.measure("decay_run_reaches_state_boundary", indicator(hit), Bound::AtLeast { limit: 1.0 });
    report.measure(
        "decay_exit_time_relative_error",
        (out.exit.time() - predicted).abs() / predicted,
        Bound::AtMost { limit: 0.1 },
    );
    report.series.push(Series::new(
        "decay_min_distance",
        "t",
        "min_dist",
        out.log.iter().map(|r| (r.t, r.min_dist)).collect(),
    ));

    let growth = 5.0;
    let norm_max = 1e4;
    let porous = builtin_porous_media_linear(1.0, growth)?;
    let config = SolverConfig {
        norm_max,
        ..SolverConfig::fixed(10.0, 0.01)
    };
    let start = Field::constant(&mesh, &[1.0]);
    let norm0 = diagnose(&start, &porous, &mesh, config.p)?.norm;
    let predicted = (norm_max / norm0).ln() / growth;
    report.param("growth_predicted_exit", predicted);
    let out = run(&start, &porous, &mesh, &config, usize::MAX)?;
    let hit = matches!(out.exit, ExitStatus::NormDivergence { .. });
    report.measure("growth_run_diverges", indicator(hit), Bound::AtLeast { limit: 1.0 });
    report.measure(
        "growth_exit_time_relative_error",
        (out.exit.time() - predicted).abs() / predicted,
        Bound::AtMost { limit: 0.1 },
    );
    report.series.push(Series::new(
        "growth_norm",
        "t",
        "norm",
        out.log.iter().map(|r| (r.t, r.norm)).collect(),
    ));
    Ok(report)
}
