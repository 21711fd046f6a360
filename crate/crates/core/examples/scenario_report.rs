//! Driving the scenario runner programmatically: the same reports the
//! `oscwalk` binary emits, without shelling out.

use oscwalk::cli::{run_scenario, Cli, Format, Scenario};

fn main() {
    let cli = Cli {
        scenario: Some(Scenario::QwToHo),
        instance: None,
        generate: Some("cycle:8".into()),
        t_final: 1.0,
        probe_times: Some("0.5,1,3".into()),
        tol: 1e-9,
        seed: 0,
        format: Format::Json,
        out: None,
        emit_golden: None,
    };
    let report = run_scenario(&cli, Scenario::QwToHo).unwrap();
    println!("{}", report.to_json().unwrap());
    assert!(report.pass);
}
