//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes spec strings (the same syntax as the command line) and
//! returns a JSON string. Errors come back as `{"error": "..."}` so the page
//! can show them without try/catch around every call.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qstime::bounds::Tolerances;
use qstime::suite::{GridSpec, Prepared};
use qstime::{BoundReport, GraphSpec, SetSpec};

const MAX_STATES: usize = 4096;

fn prepare(graph: &str, set: &str) -> Result<(Prepared, SetSpec), String> {
    let spec: GraphSpec = graph.parse().map_err(|e| format!("{e}"))?;
    let set: SetSpec = set.parse().map_err(|e| format!("{e}"))?;
    if matches!(spec, GraphSpec::File(_)) {
        return Err("file graphs are not available in the browser".into());
    }
    let n = spec.build().map_err(|e| e.to_string())?.vertex_count();
    if n > MAX_STATES {
        return Err(format!("{n} states is too many for the demo (limit {MAX_STATES})"));
    }
    Ok((Prepared::new(&spec).map_err(|e| e.to_string())?, set))
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
pub struct TailCurves {
    pub t: Vec<f64>,
    pub tail_pi: Vec<f64>,
    pub tail_alpha: Vec<f64>,
    pub gap: Vec<f64>,
    pub pi_a: f64,
    pub r_m: f64,
    pub t_rel: f64,
    pub ab_error: f64,
    pub refined_upper: f64,
}

/// `P_pi[T_A > t]`, `P_alpha[T_A > t]` and their relative gap on a log grid
/// reaching five quasi-stationary means.
pub fn tail_curves_native(graph: &str, set: &str, points: usize) -> Result<TailCurves, String> {
    let (prepared, set) = prepare(graph, set)?;
    let ts = prepared.target(&set).map_err(|e| e.to_string())?;
    let law = qstime::HittingLaw::new(&prepared.chain, &ts).map_err(|e| e.to_string())?;
    let points = points.clamp(2, 2000);
    let grid = GridSpec {
        min: law.t_rel() / 100.0,
        max: 5.0 * law.mean_from_alpha(),
        count: points,
    };
    let t = grid.times();
    let tail_pi: Vec<f64> = t.iter().map(|&s| law.tail_from_pi(s)).collect();
    let tail_alpha: Vec<f64> = t.iter().map(|&s| law.tail_from_alpha(s)).collect();
    let gap = tail_pi.iter().zip(&tail_alpha).map(|(p, a)| 1.0 - p / a).collect();
    let ab_error = law.t_rel() / law.mean_from_alpha();
    let refined_upper = qstime::bounds::doubled_square_sum(&law, 2.0 * law.t_rel()) + law.pi_a();
    Ok(TailCurves {
        pi_a: law.pi_a(),
        r_m: law.r_m(),
        t_rel: law.t_rel(),
        ab_error,
        refined_upper,
        t,
        tail_pi,
        tail_alpha,
        gap,
    })
}

#[derive(Serialize)]
pub struct Component {
    pub id: usize,
    pub vertices: Vec<usize>,
    pub lambda: f64,
    pub mean_hit: f64,
    pub is_max: bool,
}

#[derive(Serialize)]
pub struct QuasiStationary {
    pub n: usize,
    pub target: Vec<usize>,
    pub alpha_m: Vec<f64>,
    pub components: Vec<Component>,
}

pub fn quasi_stationary_native(graph: &str, set: &str) -> Result<QuasiStationary, String> {
    let (prepared, set) = prepare(graph, set)?;
    let ts = prepared.target(&set).map_err(|e| e.to_string())?;
    let law = qstime::HittingLaw::new(&prepared.chain, &ts).map_err(|e| e.to_string())?;
    let killed = law.killed();
    Ok(QuasiStationary {
        n: prepared.chain.state_count(),
        target: ts.a().to_vec(),
        alpha_m: killed.max_component().alpha.clone(),
        components: killed
            .components()
            .iter()
            .map(|c| Component {
                id: c.id,
                vertices: c.vertices.clone(),
                lambda: c.lambda,
                mean_hit: c.mean_hit,
                is_max: c.is_max,
            })
            .collect(),
    })
}

pub fn bound_report_native(graph: &str, set: &str) -> Result<BoundReport, String> {
    let (prepared, set) = prepare(graph, set)?;
    let analysis = prepared
        .analyze(&set, None, &Tolerances::default())
        .map_err(|e| e.to_string())?;
    Ok(analysis.report)
}

#[wasm_bindgen]
pub fn tail_curves(graph: &str, set: &str, points: usize) -> String {
    to_json(tail_curves_native(graph, set, points))
}

#[wasm_bindgen]
pub fn quasi_stationary(graph: &str, set: &str) -> String {
    to_json(quasi_stationary_native(graph, set))
}

#[wasm_bindgen]
pub fn bound_report(graph: &str, set: &str) -> String {
    to_json(bound_report_native(graph, set))
}
