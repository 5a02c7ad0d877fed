use qstime_demo::{bound_report, quasi_stationary, tail_curves};

fn parse(s: String) -> serde_json::Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn tail_curves_start_at_one_minus_pi_a() {
    let v = parse(tail_curves("cycle:n=4", "0", 50));
    assert_eq!(v["t"].as_array().unwrap().len(), 51);
    assert!((v["tail_pi"][0].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((v["tail_alpha"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let gap = v["gap"].as_array().unwrap();
    let (pi_a, r_m) = (v["pi_a"].as_f64().unwrap(), v["r_m"].as_f64().unwrap());
    assert!(gap.iter().all(|g| {
        let g = g.as_f64().unwrap();
        g >= pi_a - 1e-9 && g <= r_m + 1e-9
    }));
}

#[test]
fn quasi_stationary_is_a_distribution_on_b() {
    let v = parse(quasi_stationary("torus:d=2,m=6", "0,1"));
    let alpha: Vec<f64> = v["alpha_m"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
    assert_eq!(alpha.len(), 36);
    assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    assert_eq!((alpha[0], alpha[1]), (0.0, 0.0));
    assert_eq!(v["components"].as_array().unwrap().len(), 1);
}

#[test]
fn bound_report_passes_and_errors_are_json() {
    let v = parse(bound_report("hypercube:k=3", "0"));
    assert!(v["verdicts"].as_object().unwrap().values().all(|x| x["pass"] == true));
    let e = parse(bound_report("cycle:n=4", "0,1,2,3"));
    assert!(e["error"].is_string());
    let e = parse(tail_curves("file:/etc/passwd", "0", 10));
    assert!(e["error"].as_str().unwrap().contains("browser"));
    let e = parse(quasi_stationary("torus:d=2,m=100", "0"));
    assert!(e["error"].as_str().unwrap().contains("too many"));
}
