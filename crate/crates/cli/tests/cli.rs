use std::path::PathBuf;
use std::process::{Command, Output};

use arexit::{McConfig, NoiseShape, Parallelism, Sidedness};
use arexit_cli::config::{AnalyzeSection, ExitSection, ModelSection, OutputSection};
use arexit_cli::{Format, RunConfig};
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arexit"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

fn analyze_json(name: &str) -> Value {
    let o = run(&["analyze", "--config", config(name).to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn analyze_reports_bivariate_values() {
    let v = analyze_json("table1.toml");
    assert_eq!(v["schema_version"], 1);
    assert!((v["asymptotic_exponent"].as_f64().unwrap() - 81.0 / 2426.0).abs() < 1e-11);
    let s = &v["sigma_inf"];
    assert!((s[0][0].as_f64().unwrap() - 925.0 / 81.0).abs() < 1e-10);
    assert!((s[0][1].as_f64().unwrap() - 10.0 / 9.0).abs() < 1e-10);
    assert!((s[1][1].as_f64().unwrap() - 12.0 / 9.0).abs() < 1e-10);
    assert_eq!(v["optimal_path"]["points"].as_array().unwrap().len(), 11);
}

#[test]
fn scalar_exponent() {
    let v = analyze_json("scalar.toml");
    assert_eq!(v["asymptotic_exponent"].as_f64().unwrap(), 0.375);
}

#[test]
fn ar1_written_as_arn_matches_matrix_form() {
    let mut scalar = analyze_json("scalar.toml");
    let mut arn = analyze_json("ar1_via_arn.toml");
    assert_eq!(arn["sigma2"], scalar["quadratic_form"]);
    for v in [&mut scalar, &mut arn] {
        let obj = v.as_object_mut().unwrap();
        obj.remove("model");
        obj.remove("sigma2");
    }
    assert_eq!(scalar, arn);
}

#[test]
fn ar2_reports_sigma2() {
    let v = analyze_json("ar2.toml");
    let sigma2 = v["sigma2"].as_f64().unwrap();
    // gamma_0 of AR(2): (1 - b2) / ((1 + b2) ((1 - b2)^2 - b1^2)).
    let expected = 0.8 / (1.2 * (0.64 - 0.25));
    assert!((sigma2 - expected).abs() < 1e-10);
}

#[test]
fn annotated_example_parses() {
    let cfg = RunConfig::load(&config("example.toml")).unwrap();
    assert_eq!(cfg.output.format, Some(Format::Text));
    assert_eq!(cfg.mc.parallelism, Parallelism::Auto);
}

#[test]
fn unstable_model_exits_one() {
    let f = write_temp("[model]\nkind = \"matrix\"\na = [[1.2]]\n[exit]\nc = [1.0]\n");
    let o = run(&["analyze", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("no stationary distribution; exit exponent is 0 is NOT implied"), "{err}");
}

#[test]
fn invalid_configs_exit_two() {
    let cases = [
        "[model]\nkind = \"matrix\"\na = [[0.5]]\n[exit]\nc = [1.0, 2.0]\n",
        "[model]\nkind = \"matrix\"\na = [[0.5]]\nbogus = 1\n[exit]\nc = [1.0]\n",
        "[model]\nkind = \"arn\"\ncoefficients = [0.5]\n[exit]\nc = [1.0]\n",
        "[model]\nkind = \"matrix\"\na = [[0.5]]\nepsilon = -1.0\n[exit]\nc = [1.0]\n",
        "not toml at all [",
    ];
    for text in cases {
        let f = write_temp(text);
        let o = run(&["analyze", "--config", f.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
    }
    assert_eq!(run(&["analyze", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    let scalar = config("scalar.toml");
    assert_eq!(
        run(&["simulate", "--config", scalar.to_str().unwrap(), "--threads", "zero"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--config", scalar.to_str().unwrap(), "--paths", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn all_censored_simulation_exits_one() {
    let scalar = config("scalar.toml");
    let o = run(&[
        "simulate",
        "--config",
        scalar.to_str().unwrap(),
        "--eps",
        "0.01",
        "--max-steps",
        "5",
        "--paths",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_csv_columns_and_sweep() {
    let cfg = config("table1.toml");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--eps",
        "0.2,0.15,0.12",
        "--paths",
        "200",
        "--seed",
        "42",
        "--threads",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        headers,
        [
            "epsilon",
            "n_paths",
            "mean_tau",
            "ci_low",
            "ci_high",
            "scaled_log",
            "censored",
            "seed",
            "rng_version",
            "schema_version"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let scaled: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    for r in &rows {
        assert_eq!(&r[1], "200");
        assert_eq!(&r[7], "42");
        assert_eq!(&r[9], "1");
    }
}

#[test]
fn out_flag_writes_file_and_json_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&[
        "table1",
        "--eps",
        "0.12",
        "--paths",
        "100",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    let row = &v["rows"][0];
    assert_eq!(row["published"], 0.0639);
    assert_eq!(row["n_paths"], 100);
    assert!((v["limit"].as_f64().unwrap() - 81.0 / 2426.0).abs() < 1e-11);
}

#[test]
fn table1_rejects_unknown_noise_scale() {
    assert_eq!(run(&["table1", "--eps", "0.3"]).status.code(), Some(2));
}

#[test]
fn analyze_csv_is_long_format() {
    let o = run(&["analyze", "--config", config("table1.toml").to_str().unwrap(), "--format", "csv"]);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["quantity", "index", "value", "schema_version"]);
    let n = rdr.records().map(Result::unwrap).filter(|r| &r[0] == "sigma_inf").count();
    assert_eq!(n, 4);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let o = run(&["verify", "--trials", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("all checks passed"));
    let bad = run(&["verify", "--trials", "30", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("a=[["));
}

fn finite() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    let matrix = (1usize..=3).prop_flat_map(|d| {
        (
            prop::collection::vec(prop::collection::vec(finite(), d), d),
            prop::option::of(0.01..2.0f64),
            prop::option::of(prop::collection::vec(finite(), d)),
            any::<bool>(),
            prop::collection::vec(finite().prop_filter("nonzero", |x| x.abs() > 1e-3), d),
            any::<bool>(),
        )
            .prop_map(move |(a, epsilon, x0, first, c, explicit_d)| {
                (
                    ModelSection::Matrix {
                        d: explicit_d.then_some(d),
                        a,
                        epsilon,
                        x0,
                        noise: if first {
                            NoiseShape::FirstCoordinate
                        } else {
                            NoiseShape::Identity
                        },
                    },
                    Some(c),
                )
            })
    });
    let arn = (1usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(finite(), n),
            prop::option::of(0.01..2.0f64),
            prop::option::of(prop::collection::vec(finite(), n)),
        )
            .prop_map(|(coefficients, epsilon, starts)| {
                (
                    ModelSection::Arn {
                        coefficients,
                        epsilon,
                        starts,
                    },
                    None,
                )
            })
    });
    (
        prop_oneof![matrix, arn],
        0.1..5.0f64,
        any::<bool>(),
        1usize..5000,
        any::<u64>(),
        1u64..u64::MAX,
        prop::option::of(1usize..64),
        prop::option::of(prop_oneof![Just(Format::Text), Just(Format::Csv), Just(Format::Json)]),
        prop::collection::vec(1usize..500, 1..6),
        1usize..50,
    )
        .prop_map(
            |((model, c), level, one_sided, n_paths, seed, max_steps, threads, format, horizons, path_horizon)| {
                RunConfig {
                    model,
                    exit: ExitSection {
                        c,
                        level,
                        sided: if one_sided {
                            Sidedness::OneSided
                        } else {
                            Sidedness::TwoSided
                        },
                    },
                    mc: McConfig {
                        n_paths,
                        seed,
                        max_steps,
                        parallelism: threads
                            .and_then(std::num::NonZeroUsize::new)
                            .map_or(Parallelism::Auto, Parallelism::Threads),
                    },
                    output: OutputSection {
                        format,
                        path: format.map(|_| PathBuf::from("out/report.txt")),
                    },
                    analyze: AnalyzeSection {
                        horizons,
                        path_horizon,
                    },
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trip(cfg in run_config()) {
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml_string().unwrap(), text);
    }
}
