mod common;

use std::fs;

use chrono::TimeDelta;
use common::*;
use hwdims_cli::ingest::ingest;
use serde_json::Value;

const TWO_SEASONS: &str = r#"
data = "load.csv"
trend = "additive"

[[season]]
id = "day"
cycle = 24
mode = "multiplicative"

[[season]]
id = "week"
cycle = 168
mode = "multiplicative"
"#;

#[test]
fn ingest_examples() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    write_series(
        &clean,
        &(0..48).map(|t| 50.0 + t as f64).collect::<Vec<_>>(),
        TimeDelta::hours(1),
    );
    assert_eq!(ingest(&clean).unwrap().series.len(), 48);

    let gap = dir.path().join("gap.csv");
    fs::write(
        &gap,
        "timestamp,value\n2024-01-01T00:00:00,90\n2024-01-01T01:00:00,100\n2024-01-01T03:00:00,104\n",
    )
    .unwrap();
    let r = ingest(&gap).unwrap();
    assert_eq!(r.series.values()[2], 102.0);
    assert_eq!(r.interpolated.len(), 1);

    let long = dir.path().join("long.csv");
    fs::write(
        &long,
        "timestamp,value\n2024-01-01T00:00:00,90\n2024-01-01T01:00:00,100\n2024-01-01T02:00:00,100\n2024-01-01T05:00:00,104\n",
    )
    .unwrap();
    let err = ingest(&long).unwrap_err().to_string();
    assert!(
        err.contains("2024-01-01 02:00:00") && err.contains("2024-01-01 05:00:00"),
        "{err}"
    );
}

#[test]
fn fit_writes_every_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let n = 8 * 168;
    write_series(
        &dir.path().join("load.csv"),
        &taylor_process(n, 10.0, 7),
        TimeDelta::hours(1),
    );
    write_calendar(
        &dir.path().join("hol.csv"),
        "holiday",
        &[24 * 10, 24 * 30, 24 * 45],
    );
    let config = write_config(
        dir.path(),
        &format!(
            "calendar = \"hol.csv\"\ndamping = true\nar_adjustment = true\n{TWO_SEASONS}\n\
             [[dims]]\ngroup = \"holiday\"\nmode = \"multiplicative\"\n[optimizer]\nmax_evals = 300\n"
        ),
    );
    let out = dir.path().join("out");
    let o = run_command("fit", &config, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let model: Value =
        serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["schema_version"], 1);
    let p = &model["params"];
    for key in ["alpha", "gamma", "phi", "ar1"] {
        assert!(p[key].is_f64(), "{key}");
    }
    assert_eq!(p["deltas"].as_array().unwrap().len(), 2);
    assert_eq!(p["deltas_dims"].as_array().unwrap().len(), 1);
    let state = &model["state"];
    assert_eq!(state["seasonal"][1].as_array().unwrap().len(), 168);
    assert_eq!(state["dims"][0].as_array().unwrap().len(), 24);
    assert_eq!(state["next_step"], n);
    assert!(state["last_residual"].is_f64());

    let acc: Value =
        serde_json::from_str(&fs::read_to_string(out.join("accuracy.json")).unwrap()).unwrap();
    for key in ["rmse", "mape", "aic", "warmup", "canonical_form"] {
        assert!(!acc[key].is_null(), "{key}");
    }
    assert_eq!(acc["warmup"], 168);
}

#[test]
fn decompose_writes_one_file_per_panel() {
    let dir = tempfile::tempdir().unwrap();
    write_series(
        &dir.path().join("load.csv"),
        &taylor_process(4 * 168, 5.0, 3),
        TimeDelta::hours(1),
    );
    write_calendar(&dir.path().join("hol.csv"), "holiday", &[24 * 9, 24 * 20]);
    let config = write_config(
        dir.path(),
        &format!("calendar = \"hol.csv\"\n{TWO_SEASONS}\n[[dims]]\ngroup = \"holiday\"\nmode = \"additive\"\n"),
    );
    let out = dir.path().join("out");
    let o = run_command("decompose", &config, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "dims_holiday_locations.csv",
            "dims_holiday_profile.csv",
            "original.csv",
            "remainder.csv",
            "seasonal_day.csv",
            "seasonal_week.csv",
            "trend.csv"
        ]
    );
}

#[test]
fn evaluate_grid_has_five_days_of_rows() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..240)
        .map(|t| {
            100.0
                + 20.0 * (2.0 * std::f64::consts::PI * (t % 24) as f64 / 24.0).sin()
                + (t % 5) as f64
        })
        .collect();
    write_series(&dir.path().join("load.csv"), &values, TimeDelta::hours(1));
    let config = write_config(
        dir.path(),
        "data = \"load.csv\"\n[[season]]\nid = \"day\"\ncycle = 24\nmode = \"multiplicative\"\n\
         [optimizer]\nmax_evals = 200\n[evaluate]\nfirst_origin = 120\nstep = 24\nhorizon = 24\n",
    );
    let out = dir.path().join("out");
    let o = run_command("evaluate", &config, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(
        lines.next(),
        Some("origin_timestamp,horizon_step,actual,forecast,ape")
    );
    assert_eq!(lines.count(), 5 * 24);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["origins"], 5);
    assert_eq!(
        summary["per_origin"][0]["origin_timestamp"],
        "2024-01-06T00:00:00"
    );
    assert_eq!(summary["per_horizon_mape"].as_array().unwrap().len(), 24);
}

#[test]
fn evaluate_reports_special_day_error() {
    let dir = tempfile::tempdir().unwrap();
    let (values, starts) = holiday_load(120, 5);
    write_series(&dir.path().join("load.csv"), &values, TimeDelta::hours(1));
    write_calendar(&dir.path().join("hol.csv"), "holiday", &starts);
    let config = write_config(
        dir.path(),
        &format!(
            "calendar = \"hol.csv\"\n{}\n[[dims]]\ngroup = \"holiday\"\nmode = \"multiplicative\"\n\
             [optimizer]\nmax_evals = 200\n[evaluate]\nfirst_origin = 336\nhorizon = 24\norigins = \"dims\"\n",
            TWO_SEASONS
        ),
    );
    let out = dir.path().join("out");
    let o = run_command("evaluate", &config, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let expected = starts
        .iter()
        .filter(|&&s| s >= 336 && s + 24 <= values.len())
        .count();
    assert_eq!(summary["origins"], expected);
    assert!(summary["special_day_mape"]["holiday"].is_f64());
}

fn exit_code(o: &std::process::Output) -> i32 {
    o.status.code().unwrap()
}

fn diagnostic(o: &std::process::Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().last().unwrap()).unwrap()
}

#[test]
fn exit_codes_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let o = hwdims(&["fit"]);
    assert_eq!(exit_code(&o), 1);
    assert_eq!(diagnostic(&o)["error"], "usage");
    assert_eq!(exit_code(&hwdims(&["train", "--config", "x"])), 1);
    assert_eq!(exit_code(&hwdims(&["--help"])), 0);

    let config = write_config(dir.path(), TWO_SEASONS);
    let o = run_command("fit", &config, &out);
    assert_eq!(exit_code(&o), 2, "missing data file");
    assert_eq!(diagnostic(&o)["error"], "data");

    fs::write(
        dir.path().join("load.csv"),
        "timestamp,value\n2024-01-01T00:00:00,1\n2024-01-01T01:00:00,1\n2024-01-01T04:00:00,1\n",
    )
    .unwrap();
    assert_eq!(exit_code(&run_command("fit", &config, &out)), 2);

    // a large negative reading makes every admissible parameter point infeasible
    let mut values = vec![100.0; 400];
    for (t, v) in values.iter_mut().enumerate() {
        *v += [5.0, -3.0, 8.0, -10.0][t % 4];
    }
    values[300] = -150.0;
    write_series(&dir.path().join("load.csv"), &values, TimeDelta::hours(1));
    let config = write_config(
        dir.path(),
        "data = \"load.csv\"\n[[season]]\nid = \"s\"\ncycle = 4\nmode = \"multiplicative\"\n\
         [optimizer]\nmax_evals = 60\nbounds = [[0.99, 1.0], [0.0, 0.0], [0.0, 0.0]]\n",
    );
    let o = run_command("fit", &config, &out);
    assert_eq!(exit_code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(diagnostic(&o)["error"], "infeasible");

    let o = run_command("forecast", &config, &out);
    assert_eq!(exit_code(&o), 1, "no [forecast] section");
}
