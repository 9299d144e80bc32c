use std::fmt::Write as _;
use std::io::Write;

use geoprod::geodesic::{generators_from_velocity, ProductCurve};
use geoprod::homogeneous::{check_bracket_condition, check_lem2, check_natural_reductivity};
use geoprod::liealgebra::AlgebraVector;
use geoprod::oracle::{self, compare_paths, integrate_horizontal, OdeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::{CheckResult, RunReport};
use crate::spec::{ChainFamily, Space};
use crate::CliError;

/// Default seed for every randomized sweep.
pub const DEFAULT_SEED: u64 = 42;
/// `compare` fails above this deviation.
pub const COMPARE_LIMIT: f64 = 1e-5;
/// Deviation at which `bench` reports the two methods as matched.
pub const BENCH_MATCH: f64 = 1e-6;

const LEM2_DRAWS: usize = 100;

pub fn describe(space: &Space) -> String {
    let n = space.spec.group.n;
    let levels: Vec<String> = space
        .spec
        .chain
        .iter()
        .map(|l| match l.family {
            ChainFamily::Trivial => "{e}".to_string(),
            ChainFamily::So => format!("SO({})", l.k.unwrap_or(0)),
        })
        .collect();
    let lambdas: Vec<String> = space.spec.lambdas.iter().map(|l| format!("{l}")).collect();
    format!("SO({n})/{} chain {} < SO({n}) lambdas ({})", levels[0], levels.join(" < "), lambdas.join(", "))
}

/// Parses comma- or whitespace-separated m-coordinates.
pub fn parse_velocity(text: &str, space: &Space) -> Result<AlgebraVector, CliError> {
    let coords = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Input(format!("bad velocity entry {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let dim = space.metric.split().dim_m();
    if coords.len() != dim {
        return Err(CliError::Input(format!("velocity has {} entries, dim m = {dim}", coords.len())));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Input("velocity entries must be finite".into()));
    }
    Ok(space.metric.split().m_vector(&coords)?)
}

/// Unit velocity with uniform random m-coordinates from `seed`.
pub fn random_velocity(space: &Space, seed: u64) -> AlgebraVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.metric.split().dim_m();
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            let c: Vec<f64> = c.iter().map(|x| x / norm).collect();
            return space.metric.split().m_vector(&c).expect("coordinates have dim m entries");
        }
    }
}

pub fn velocity_or_random(text: Option<&str>, space: &Space, seed: u64) -> Result<AlgebraVector, CliError> {
    match text {
        Some(t) => parse_velocity(t, space),
        None => Ok(random_velocity(space, seed)),
    }
}

/// Runs every algebraic checker on `space`.
pub fn verify(space: &Space, seed: u64, tol_override: Option<f64>) -> RunReport {
    let cm = &space.metric;
    let split = cm.split();
    let alg = cm.algebra();
    let tol = |default: f64| tol_override.unwrap_or(default);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (defect, sum_dims, dim_m) = cm.decomposition_defect();
    let decomposition = if sum_dims == dim_m { defect } else { f64::INFINITY };
    let natred = check_natural_reductivity(split, &mut rng).max_violation;
    let mut lem2 = 0.0f64;
    for _ in 0..LEM2_DRAWS {
        let x = AlgebraVector::random(alg, &mut rng);
        let w = AlgebraVector::random(alg, &mut rng);
        lem2 = lem2.max(check_lem2(cm, &x, &w).unwrap_or(f64::INFINITY));
    }
    let anchored = space.orbit.soundness_violation(split, &mut rng, LEM2_DRAWS).unwrap_or(f64::INFINITY);

    let checks = vec![
        CheckResult::new("jacobi_identity", alg.jacobi_violation(), tol(1e-12)),
        CheckResult::new("form_ad_invariance", split.form().ad_invariance_violation(), tol(1e-12)),
        CheckResult::new("eigenspace_decomposition", decomposition, tol(1e-12)),
        CheckResult::new("reductivity", split.isotropy_violation(), tol(1e-11)),
        CheckResult::new("eigenspace_isotropy", cm.isotropy_violation(), tol(1e-11)),
        CheckResult::new("bracket_condition", check_bracket_condition(cm).max_violation, tol(1e-11)),
        CheckResult::new("natural_reductivity", natred, tol(1e-11)),
        CheckResult::new("ad_h_skew", split.ad_h_skew_violation(), tol(1e-11)),
        CheckResult::new("metric_equivariance", cm.equivariance_violation(), tol(1e-11)),
        CheckResult::new("lem2", lem2, tol(1e-11)),
        CheckResult::new("orbit_map_soundness", anchored, tol(1e-11)),
    ];
    RunReport::new(describe(space), seed, checks, cm.warnings().to_vec())
}

/// Formats a real with 17 significant digits; `-0` prints as `0`.
pub fn fmt17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// CSV of the closed-form geodesic at `samples` equally spaced times in `[0, t_max]`.
pub fn geodesic_csv(space: &Space, v: &AlgebraVector, t_max: f64, samples: usize) -> Result<String, CliError> {
    if samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    if !t_max.is_finite() {
        return Err(CliError::Input("--t-max must be finite".into()));
    }
    let pc = ProductCurve::new(generators_from_velocity(&space.metric, v)?);
    let om = &space.orbit;
    let n = om.matrix_size();
    let mut out = String::from("t");
    for &c in om.anchored_columns() {
        for r in 0..n {
            write!(out, ",g_{r}_{c}").unwrap();
        }
    }
    out.push_str(",residual_mod_h,residual_full,energy\n");
    for k in 0..samples {
        let t = t_max * k as f64 / (samples - 1) as f64;
        let g = pc.eval(t)?;
        let r = pc.lax_residual(t)?;
        let e = pc.energy(t)?;
        out.push_str(&fmt17(t));
        for x in om.project(g.matrix().inner()) {
            out.push(',');
            out.push_str(&fmt17(x));
        }
        for x in [r.mod_h, r.full, e] {
            out.push(',');
            out.push_str(&fmt17(x));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct GeneratorsDoc {
    space: String,
    basis: String,
    lambdas: Vec<f64>,
    eigenspace_dims: Vec<usize>,
    velocity_m: Vec<f64>,
    velocity: Vec<f64>,
    components: Vec<Vec<f64>>,
    generators: Vec<Vec<f64>>,
}

/// JSON listing the generators `X_i` (and `Y_i`) in the basis of `g`.
pub fn generators_json(space: &Space, v: &AlgebraVector) -> Result<String, CliError> {
    let gen = generators_from_velocity(&space.metric, v)?;
    let doc = GeneratorsDoc {
        space: describe(space),
        basis: format!("so({}) lexicographic E_ij - E_ji, i < j", space.spec.group.n),
        lambdas: space.spec.lambdas.clone(),
        eigenspace_dims: space.metric.eigenspace_dims(),
        velocity_m: space.metric.split().m_coords(v)?.iter().copied().collect(),
        velocity: v.coeffs().iter().copied().collect(),
        components: gen.component_coeffs().iter().map(|c| c.iter().copied().collect()).collect(),
        generators: gen.generator_coeffs().iter().map(|c| c.iter().copied().collect()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("generators serialize");
    s.push('\n');
    Ok(s)
}

/// Writes the deviation report; returns the maximal deviation.
pub fn compare(space: &Space, v: &AlgebraVector, t_max: f64, step: f64, out: &mut dyn Write) -> Result<f64, CliError> {
    let pc = ProductCurve::new(generators_from_velocity(&space.metric, v)?);
    let path = integrate_horizontal(&space.metric, v, &OdeConfig::new(step, t_max))?;
    let cmp = compare_paths(&pc, &path, &space.orbit)?;
    let stride = (cmp.per_sample.len() / 20).max(1);
    writeln!(out, "space: {}", describe(space))?;
    writeln!(out, "step: {step:e}  t_max: {t_max}  samples: {}", cmp.per_sample.len())?;
    writeln!(out, "{:>12}  {:>12}", "t", "deviation")?;
    let last = cmp.per_sample.len() - 1;
    for (k, (t, d)) in cmp.per_sample.iter().enumerate() {
        if k % stride == 0 || k == last {
            writeln!(out, "{t:>12.6}  {d:>12.3e}")?;
        }
    }
    writeln!(out, "max_deviation: {:.6e}", cmp.max_deviation)?;
    writeln!(out, "energy_drift: {:.6e}", path.energy_drift(&space.metric))?;
    Ok(cmp.max_deviation)
}

/// Writes closed-form vs RK4 timings; never fails on timing.
pub fn bench(
    space: &Space,
    v: &AlgebraVector,
    t_max: f64,
    step: f64,
    samples: usize,
    out: &mut dyn Write,
) -> Result<oracle::BenchReport, CliError> {
    if samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    let ts: Vec<f64> = (0..samples).map(|k| t_max * k as f64 / (samples - 1) as f64).collect();
    let cfg = OdeConfig::new(step, t_max);
    let r = oracle::bench(&space.metric, v, &ts, &cfg)?;
    let cf = r.closed_form_time.as_secs_f64();
    let ode = r.ode_time.as_secs_f64();
    writeln!(out, "space: {}", describe(space))?;
    writeln!(out, "samples: {}  t_max: {t_max}  rk4_step: {step:e}  rk4_steps: {}", r.samples, r.ode_steps)?;
    writeln!(out, "closed_form_time_s: {cf:.6e}")?;
    writeln!(out, "rk4_time_s: {ode:.6e}")?;
    if cf > 0.0 {
        writeln!(out, "speedup: {:.1}", ode / cf)?;
    }
    writeln!(out, "deviation: {:.6e}", r.deviation)?;
    let matched = if r.deviation <= BENCH_MATCH { "yes" } else { "no" };
    writeln!(out, "matched_at_1e-6: {matched}")?;
    Ok(r)
}

pub fn catalog() -> String {
    let mut out = String::new();
    out.push_str(
        "groups:\n  SO(n), n >= 2, basis E_ij - E_ji (i < j) in lexicographic order\n\
         chains:\n  h_0 < ... < h_{N-1} as lower-right blocks, h_N = so(n) implicit\n  \
         {\"family\":\"trivial\"}     the trivial subalgebra (first level only)\n  \
         {\"family\":\"SO\",\"k\":k}    so(k) in the lower-right block, 2 <= k < n, k increasing\n\
         form:\n  \"negative_trace\"  Q(X,Y) = -tr(XY)\n\
         lambdas:\n  one nonzero real per chain step; lambda_1 scales m_1, the complement of h_{N-1} in g\n\
         velocity coordinates:\n  Q-orthonormal basis of m_1, then m_2, ..., m_N\n\
         examples:\n",
    );
    for (name, text) in EXAMPLES {
        writeln!(out, "  {name}:\n    {text}").unwrap();
    }
    out
}

pub const EXAMPLES: [(&str, &str); 3] = [
    (
        "SO(3)/{e}, N=2",
        r#"{"group":{"family":"SO","n":3},"chain":[{"family":"trivial"},{"family":"SO","k":2}],"lambdas":[1,2],"form":"negative_trace"}"#,
    ),
    (
        "SO(4)/SO(2), N=2",
        r#"{"group":{"family":"SO","n":4},"chain":[{"family":"SO","k":2},{"family":"SO","k":3}],"lambdas":[1,2],"form":"negative_trace"}"#,
    ),
    (
        "SO(4)/{e}, N=3",
        r#"{"group":{"family":"SO","n":4},"chain":[{"family":"trivial"},{"family":"SO","k":2},{"family":"SO","k":3}],"lambdas":[0.5,2,3],"form":"negative_trace"}"#,
    ),
];
