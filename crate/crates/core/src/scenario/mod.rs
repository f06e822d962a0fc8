//! Scenario files, the runner that turns them into checks, and reports.

mod config;
mod report;
mod run;

pub use config::{
    parse_scenario, parse_scenario_str, GridConfig, HamiltonianConfig, HamiltonianPreset, InitialConfig,
    InitialPreset, IntegratorConfig, Layer, ScenarioConfig, SpinConfig, Tolerances,
};
pub use report::{
    compare_reports, emit_report, read_report, render_report, Check, DiffKind, DiffRow, ReportDiff, ReportFormat,
    RunReport, Table,
};
pub use run::{charge_bracket_residual, run_scenario};

use crate::error::Result;

/// Built-in scenarios as `(name, toml)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("ho-equivalence", include_str!("presets/ho-equivalence.toml")),
    ("free-shear-convergence", include_str!("presets/free-shear-convergence.toml")),
    ("ho-coherent", include_str!("presets/ho-coherent.toml")),
    ("plane-wave", include_str!("presets/plane-wave.toml")),
    ("box", include_str!("presets/box.toml")),
    ("central-2d", include_str!("presets/central-2d.toml")),
    ("central-2d-charge", include_str!("presets/central-2d-charge.toml")),
    ("spin-suite", include_str!("presets/spin-suite.toml")),
];

pub fn preset(name: &str) -> Option<Result<ScenarioConfig>> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario_str(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_under_their_names() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap().unwrap();
            assert_eq!(cfg.name, *name);
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn degenerate_run_is_flagged_and_passes() {
        let mut cfg = preset("ho-coherent").unwrap().unwrap();
        cfg.integrator.dt = Some(0.0);
        let r = run_scenario(&cfg);
        assert!(r.degenerate);
        let norm = r.checks.iter().find(|c| c.name == "norm_drift").unwrap();
        assert!(norm.pass && norm.note == "degenerate");
    }

    #[test]
    fn module_errors_become_failed_checks() {
        let text = "name = \"bad\"\nlayer = \"classical\"\n[hamiltonian]\npreset = \"box\"\n[grid]\npoints = 16\n";
        let r = run_scenario(&parse_scenario_str(text).unwrap());
        assert!(!r.all_pass());
        let c = &r.checks[0];
        assert!(c.value.is_nan() && c.note.contains("box"), "{c:?}");
    }

    #[test]
    fn spin_suite_reports_the_casimir() {
        let r = run_scenario(&preset("spin-suite").unwrap().unwrap());
        let c = r.checks.iter().find(|c| c.name == "spin_up_casimir").unwrap();
        assert!(c.pass && c.note.starts_with("S.S = 0.75"), "{c:?}");
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}
