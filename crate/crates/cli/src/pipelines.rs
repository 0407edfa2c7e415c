use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use feynlab::bv::{
    bv_bracket, bv_from_gauge, bv_integral, bv_laplacian, bv_pushforward, master_residuals, transfer, BVAction, BVIntegralOptions, BVModel,
    BVSpace, BVVariant, LinearLagrangian, MasterResiduals,
};
use feynlab::exact::{format_rational, int, rat, RMatrix, Scalar};
use feynlab::gauge::{brst_apply, build_fp, fp_critical_points, fp_expand, gauge_fermion, gauge_fermion_check, DetMode, FPModel, GaugeModel};
use feynlab::graph::{enumerate_by_adjacency, enumerate_graphs, EnumerateOptions, Graph};
use feynlab::lie::{graph_color_weight, ihx_defect, validate, LieData};
use feynlab::stationary::{expand, normalized_series, ActionModel, AsymptoticSeries, WeightMode, SCHEMA_VERSION};
use feynlab::superalgebra::{SuperFunction, SuperSpace};
use feynlab::wick::{moment_oracle, wick_moment, ORACLE_MAX_LEN};
use feynlab_oracle::Mode;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{Check, RunReport};
use crate::scan::{parse_window, scan, ScanOptions, DEFAULT_HBARS};
use crate::{CliError, Command, DetModeArg, OracleModeArg, WeightModeArg};

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8], what: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

fn series_json(s: &AsymptoticSeries) -> Value {
    let contributions: Vec<Value> = s
        .contributions
        .iter()
        .map(|c| {
            json!({
                "point": c.point.iter().map(format_rational).collect::<Vec<_>>(),
                "action_value": c.value.to_string(),
                "fresnel": c.fresnel.to_string(),
                "constant": c.constant.to_string(),
                "pi_power": c.pi_power,
                "corrections": c.corrections.terms().map(|(k, v)| (k.to_string(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
            })
        })
        .collect();
    json!({ "order": s.order, "contributions": contributions })
}

pub fn dispatch(cmd: &Command, seed: u64) -> Result<RunReport, CliError> {
    match cmd {
        Command::Expand { model, order, hbar, window, resolution, no_oracle } => {
            let bytes = read(model)?;
            let flags = json!({ "order": order, "hbar": hbar, "window": window, "resolution": resolution, "oracle": !no_oracle });
            let (results, checks) = run_expand(&bytes, *order, hbar, window.as_deref(), *resolution, !no_oracle)?;
            Ok(RunReport::new("expand", &bytes, flags, results, checks))
        }
        Command::Graphs { max_excess, degrees, tadpoles, no_tadpoles, leaves, connected, mode } => {
            let allow_tadpoles = *tadpoles || !*no_tadpoles;
            let flags = json!({
                "max_excess": max_excess, "degrees": degrees, "tadpoles": allow_tadpoles, "leaves": leaves,
                "connected": connected, "mode": format!("{mode:?}").to_lowercase(),
            });
            let opts = EnumerateOptions::new(*max_excess, degrees).tadpoles(allow_tadpoles).leaves(*leaves).connected(*connected);
            let (results, checks) = run_graphs(&opts, *mode)?;
            Ok(RunReport::new("graphs", &[], flags, results, checks))
        }
        Command::Wick { model, samples } => {
            let bytes = read(model)?;
            let flags = json!({ "samples": samples, "seed": seed });
            let (results, checks) = run_wick(&bytes, *samples, seed)?;
            Ok(RunReport::new("wick", &bytes, flags, results, checks))
        }
        Command::Fp { model, order, det_mode } => {
            let bytes = read(model)?;
            let flags = json!({ "order": order, "det_mode": format!("{det_mode:?}").to_lowercase() });
            let mode = match det_mode {
                DetModeArg::Abs => DetMode::Abs,
                DetModeArg::Signed => DetMode::Signed,
            };
            let (results, checks) = run_fp(&bytes, *order, mode)?;
            Ok(RunReport::new("fp", &bytes, flags, results, checks))
        }
        Command::Bv { model, order, fiber, y_degree, samples } => {
            let bytes = read(model)?;
            let flags = json!({ "order": order, "fiber": fiber, "y_degree": y_degree, "samples": samples, "seed": seed });
            let (results, checks) = run_bv(&bytes, *order, fiber, *y_degree, *samples, seed)?;
            Ok(RunReport::new("bv", &bytes, flags, results, checks))
        }
        Command::Lie { model } => {
            let bytes = read(model)?;
            let (results, checks) = run_lie(&bytes)?;
            Ok(RunReport::new("lie", &bytes, json!({}), results, checks))
        }
        Command::Oracle { model, mode, order, hbar, window, resolution } => {
            let bytes = read(model)?;
            let flags = json!({
                "mode": format!("{mode:?}").to_lowercase(), "order": order, "hbar": hbar, "window": window, "resolution": resolution,
            });
            let (results, checks) = run_oracle(&bytes, *mode, *order, hbar, window.as_deref(), *resolution)?;
            Ok(RunReport::new("oracle", &bytes, flags, results, checks))
        }
    }
}

fn scan_options(hbar: &[f64], window: Option<&str>, resolution: Option<usize>, mode: Mode) -> Result<ScanOptions, CliError> {
    Ok(ScanOptions {
        hbars: if hbar.is_empty() { DEFAULT_HBARS.to_vec() } else { hbar.to_vec() },
        window: window.map(parse_window).transpose()?,
        resolution,
        mode,
    })
}

fn run_expand(
    bytes: &[u8],
    order: usize,
    hbar: &[f64],
    window: Option<&str>,
    resolution: Option<usize>,
    oracle: bool,
) -> Result<(Value, Vec<Check>), CliError> {
    let model: ActionModel = parse(bytes, "action model")?;
    let series = expand(&model, order).map_err(|e| CliError::pipeline("stationary-phase", e))?;
    let mut results = json!({ "series": series_json(&series) });
    let mut checks = vec![Check::new("critical points", !series.contributions.is_empty(), format!("{} nondegenerate", series.contributions.len()))];
    if oracle && model.action.dim() == 1 {
        let prediction = expand(&model, order + 1).map_err(|e| CliError::pipeline("stationary-phase", e))?;
        let opts = scan_options(hbar, window, resolution, Mode::Oscillatory)?;
        let (o, c) = scan(&model, Some((&series, &prediction, order)), &opts)?;
        results["oracle"] = o;
        checks.extend(c);
    }
    Ok((results, checks))
}

fn run_oracle(
    bytes: &[u8],
    mode: OracleModeArg,
    order: usize,
    hbar: &[f64],
    window: Option<&str>,
    resolution: Option<usize>,
) -> Result<(Value, Vec<Check>), CliError> {
    let model: ActionModel = parse(bytes, "action model")?;
    let mode = match mode {
        OracleModeArg::Oscillatory => Mode::Oscillatory,
        OracleModeArg::Euclidean => Mode::Euclidean,
    };
    let opts = scan_options(hbar, window, resolution, mode)?;
    if mode == Mode::Euclidean {
        return scan(&model, None, &opts);
    }
    let series = expand(&model, order).map_err(|e| CliError::pipeline("stationary-phase", e))?;
    let prediction = expand(&model, order + 1).map_err(|e| CliError::pipeline("stationary-phase", e))?;
    let (mut o, checks) = scan(&model, Some((&series, &prediction, order)), &opts)?;
    o["series"] = series_json(&series);
    Ok((o, checks))
}

fn run_graphs(opts: &EnumerateOptions, mode: WeightModeArg) -> Result<(Value, Vec<Check>), CliError> {
    let classes = enumerate_graphs(opts).map_err(|e| CliError::pipeline("graph-kit", e))?;
    let other = enumerate_by_adjacency(opts).map_err(|e| CliError::pipeline("graph-kit", e))?;
    let keys: BTreeSet<&Vec<u8>> = classes.iter().map(|c| &c.canonical_key).collect();
    let other_keys: BTreeSet<&Vec<u8>> = other.iter().map(|c| &c.canonical_key).collect();
    let mode = match mode {
        WeightModeArg::Partition => WeightMode::PartitionFunction,
        WeightModeArg::Effective => WeightMode::EffectiveAction,
    };
    let mut rows = Vec::new();
    for c in &classes {
        let weight = match normalized_series(c, mode, &Scalar::one()) {
            Ok(s) => s.to_string(),
            Err(_) => "disconnected".to_string(),
        };
        rows.push(json!({
            "canonical_key": c.canonical_key.iter().map(|b| format!("{b:02x}")).collect::<String>(),
            "vertices": c.representative.vertices().len(),
            "edges": c.representative.edges().len(),
            "leaves": c.representative.leaves().len(),
            "excess": c.excess,
            "loops": c.loop_count,
            "aut_order": c.aut_order,
            "weight": weight,
        }));
    }
    let checks = vec![Check::new(
        "two generation strategies agree",
        keys == other_keys,
        format!("{} classes by matchings, {} by adjacency", keys.len(), other_keys.len()),
    )];
    Ok((json!({ "count": classes.len(), "classes": rows }), checks))
}

#[derive(Deserialize)]
struct WickModel {
    schema_version: u32,
    /// Propagator `K`, symmetric.
    k: Vec<Vec<Scalar>>,
    tuples: Vec<Vec<usize>>,
}

fn real_matrix(rows: &[Vec<Scalar>], what: &str) -> Result<RMatrix, CliError> {
    let n = rows.len();
    let mut out = Vec::with_capacity(n);
    for r in rows {
        if r.len() != n || r.iter().any(|c| !c.is_real()) {
            return Err(CliError::Input(format!("{what} must be a real square matrix")));
        }
        out.push(r.iter().map(|c| c.re.clone()).collect());
    }
    Ok(RMatrix::from_rows(out))
}

fn run_wick(bytes: &[u8], samples: usize, seed: u64) -> Result<(Value, Vec<Check>), CliError> {
    let m: WickModel = parse(bytes, "wick model")?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!("unsupported schema version {}", m.schema_version)));
    }
    let k = real_matrix(&m.k, "k")?;
    if !k.is_symmetric() || k.rows() == 0 {
        return Err(CliError::Input("k must be symmetric and nonempty".into()));
    }
    let n = k.rows();
    if let Some(t) = m.tuples.iter().find(|t| t.iter().any(|&i| i >= n)) {
        return Err(CliError::Input(format!("tuple {t:?} has an index outside dimension {n}")));
    }
    let mut moments = Vec::new();
    let mut mismatches = Vec::new();
    for t in &m.tuples {
        let w = wick_moment(&k, t);
        if t.len() <= ORACLE_MAX_LEN && moment_oracle(&k, t) != w {
            mismatches.push(format!("{t:?}"));
        }
        moments.push(json!({ "tuple": t, "coeff": format_rational(&w.coeff), "power": w.power, "value": w.to_string() }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_bad = 0;
    for _ in 0..samples {
        let len = 2 * rng.gen_range(0..=3);
        let t: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
        random_bad += usize::from(wick_moment(&k, &t) != moment_oracle(&k, &t));
    }
    let checks = vec![
        Check::new("matching sum equals derivative oracle", mismatches.is_empty(), format!("{} listed tuples, mismatches {mismatches:?}", m.tuples.len())),
        Check::new("seeded random tuples", random_bad == 0, format!("{samples} tuples of length <= 6, seed {seed}, {random_bad} mismatches")),
    ];
    Ok((json!({ "dimension": n, "moments": moments }), checks))
}

fn brst_checks(fp: &FPModel) -> Vec<Check> {
    let space = fp.space();
    let mut bad = Vec::new();
    for name in space.even_names().iter().chain(space.odd_names()) {
        let g = SuperFunction::named(space, name).expect("generator of the FP space");
        if !brst_apply(fp, &brst_apply(fp, &g)).is_zero() {
            bad.push(name.clone());
        }
    }
    let q_s = brst_apply(fp, fp.action());
    vec![
        Check::new("Q^2 = 0 on generators", bad.is_empty(), format!("failing generators {bad:?}")),
        Check::new("Q S_FP = 0", q_s.is_zero(), format!("Q S_FP = {q_s}")),
        Check::new("S + Q psi = S_FP", gauge_fermion_check(fp), String::new()),
    ]
}

fn run_fp(bytes: &[u8], order: usize, mode: DetMode) -> Result<(Value, Vec<Check>), CliError> {
    let gm: GaugeModel = parse(bytes, "gauge model")?;
    if let Err(e) = gm.validate() {
        return Ok((json!({}), vec![Check::new("gauge invariance and bracket relations", false, e.to_string())]));
    }
    let fp = build_fp(&gm).map_err(|e| CliError::pipeline("gauge-fp", e))?;
    let search = fp_critical_points(&fp).map_err(|e| CliError::pipeline("gauge-fp", e))?;
    let points: Vec<Value> = search
        .points
        .iter()
        .map(|p| json!({ "x": p.x.iter().map(format_rational).collect::<Vec<_>>(), "action_value": p.value.to_string(), "det_fp": format_rational(&p.det_fp) }))
        .collect();
    let excluded: Vec<String> = search.excluded.iter().map(ToString::to_string).collect();
    let series = fp_expand(&fp, order, mode).map_err(|e| CliError::pipeline("gauge-fp", e))?;
    let mut checks = vec![Check::new("gauge invariance and bracket relations", true, String::new())];
    checks.extend(brst_checks(&fp));
    let results = json!({
        "fp_action": fp.action().to_string(),
        "measure": fp.measure_prefactor(),
        "critical_points": points,
        "excluded": excluded,
        "series": series_json(&series),
    });
    Ok((results, checks))
}

fn residuals_json(r: &MasterResiduals) -> Value {
    json!({
        "cme": r.cme.to_string(),
        "qme": r.qme.iter().map(|q| Value::String(q.to_string())).collect::<Vec<_>>(),
    })
}

fn master_checks(r: &MasterResiduals, checks: &mut Vec<Check>) {
    checks.push(Check::new("classical master equation", r.cme_holds(), format!("(S0,S0)/2 = {}", r.cme)));
    let detail = match r.qme_witness() {
        Some((k, w)) => format!("hbar^{k} coefficient {w}"),
        None => String::new(),
    };
    checks.push(Check::new("quantum master equation", r.qme_holds(), detail));
}

/// BV action, Lagrangian and integration data from either a BV model or a gauge model.
fn bv_input(bytes: &[u8]) -> Result<(BVAction, Option<LinearLagrangian>, BVIntegralOptions, &'static str), CliError> {
    let v: Value = parse(bytes, "model")?;
    if v.get("pairs").is_some() {
        let text = std::str::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))?;
        let m = BVModel::from_json(text).map_err(|e| CliError::Input(format!("BV model: {e}")))?;
        return Ok((m.action, m.lagrangian, m.options, "bv model"));
    }
    let gm: GaugeModel = serde_json::from_value(v).map_err(|e| CliError::Input(format!("gauge model: {e}")))?;
    let fp = build_fp(&gm).map_err(|e| CliError::pipeline("gauge-fp", e))?;
    let s = bv_from_gauge(&fp, BVVariant::NonMinimal).map_err(|e| CliError::pipeline("bv-lab", e))?;
    // the Lagrangian integral needs declared critical points; without them only residuals run
    let l = (!gm.base.critical_points.is_empty())
        .then(|| LinearLagrangian::GaugeFermion { psi: transfer(&gauge_fermion(&fp), &s.space().field_space()) });
    let k = fp.k();
    let critical_points = gm.base.critical_points.iter().map(|x| x.iter().cloned().chain((0..k).map(|_| int(0))).collect()).collect();
    let berezinian = (1..=k).rev().flat_map(|a| [format!("cb{a}"), format!("c{a}")]).collect();
    Ok((s, l, BVIntegralOptions { critical_points, berezinian: Some(berezinian) }, "gauge model"))
}

fn random_function(rng: &mut ChaCha8Rng, space: &Arc<SuperSpace>) -> SuperFunction {
    let names: Vec<&String> = space.even_names().iter().chain(space.odd_names()).collect();
    let mut f = SuperFunction::zero(space);
    for _ in 0..rng.gen_range(1..=4) {
        let c = Scalar::real(rat(rng.gen_range(-3..=3), rng.gen_range(1..=3)));
        let mut m = SuperFunction::constant(space, c);
        for _ in 0..rng.gen_range(0..=3) {
            m = m.mul(&SuperFunction::named(space, names[rng.gen_range(0..names.len())]).expect("known generator"));
        }
        f = f.add(&m);
    }
    let (even, odd) = f.split_parity();
    if rng.gen_bool(0.5) {
        even
    } else {
        odd
    }
}

fn parity(f: &SuperFunction) -> u8 {
    u8::from(f.split_parity().0.is_zero() && !f.is_zero())
}

fn sign(k: u8) -> Scalar {
    if k % 2 == 0 {
        Scalar::one()
    } else {
        Scalar::from_int(-1)
    }
}

/// Δ² = 0, graded antisymmetry, Jacobi and the derivation-failure identity on seeded samples.
fn algebra_suite(bv: &BVSpace, samples: usize, seed: u64) -> Result<Check, CliError> {
    let e = |x| CliError::pipeline("bv-lab", x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = bv.super_space();
    let mut failures = [0usize; 4];
    for _ in 0..samples {
        let (f, g, h) = (random_function(&mut rng, space), random_function(&mut rng, space), random_function(&mut rng, space));
        let (pf, pg) = (parity(&f), parity(&g));
        let br = |a: &SuperFunction, b: &SuperFunction| bv_bracket(bv, a, b);
        let lap = |a: &SuperFunction| bv_laplacian(bv, a);
        failures[0] += usize::from(!lap(&lap(&f).map_err(e)?).map_err(e)?.is_zero());
        let anti = br(&g, &f).map_err(e)?.scale(&sign((pf + 1) * (pg + 1))).neg();
        failures[1] += usize::from(br(&f, &g).map_err(e)? != anti);
        let jac = br(&br(&f, &g).map_err(e)?, &h).map_err(e)?.add(&br(&g, &br(&f, &h).map_err(e)?).map_err(e)?.scale(&sign((pf + 1) * (pg + 1))));
        failures[2] += usize::from(br(&f, &br(&g, &h).map_err(e)?).map_err(e)? != jac);
        let rhs = lap(&f).map_err(e)?.mul(&g).add(&f.mul(&lap(&g).map_err(e)?).scale(&sign(pf))).add(&br(&f, &g).map_err(e)?.scale(&sign(pf)));
        failures[3] += usize::from(lap(&f.mul(&g)).map_err(e)? != rhs);
    }
    Ok(Check::new(
        "BV algebra identities",
        failures.iter().all(|&k| k == 0),
        format!(
            "{samples} samples, seed {seed}; failures: Delta^2 {}, antisymmetry {}, Jacobi {}, derivation {}",
            failures[0], failures[1], failures[2], failures[3]
        ),
    ))
}

fn run_bv(bytes: &[u8], order: usize, fiber: &[String], y_degree: u32, samples: usize, seed: u64) -> Result<(Value, Vec<Check>), CliError> {
    let (action, lagrangian, options, source) = bv_input(bytes)?;
    let r = master_residuals(&action);
    let mut checks = Vec::new();
    master_checks(&r, &mut checks);
    let mut results = json!({ "source": source, "residuals": residuals_json(&r) });
    if let Some(l) = &lagrangian {
        let series = bv_integral(&action, l, &options, order).map_err(|e| CliError::pipeline("bv-lab", e))?;
        results["integral"] = series_json(&series);
    }
    if !fiber.is_empty() {
        let names: Vec<&str> = fiber.iter().map(String::as_str).collect();
        let p = bv_pushforward(&action, &names, &LinearLagrangian::antifields_zero(), order, y_degree)
            .map_err(|e| CliError::pipeline("bv-lab", e))?;
        let terms: Vec<Value> = p.action.terms().iter().map(|t| Value::String(t.to_string())).collect();
        results["pushforward"] = json!({ "order": order, "y_degree": y_degree, "terms": terms });
        checks.push(Check::new(
            "pushforward satisfies the QME",
            p.qme_holds(),
            format!("through hbar^{order}, Y-degree <= {}", y_degree.saturating_sub(2)),
        ));
    }
    checks.push(algebra_suite(action.space(), samples, seed)?);
    Ok((results, checks))
}

fn run_lie(bytes: &[u8]) -> Result<(Value, Vec<Check>), CliError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))?;
    let ld = LieData::from_json(text).map_err(|e| CliError::Input(format!("Lie data: {e}")))?;
    let report = validate(&ld);
    let ihx = ihx_defect(&ld);
    let witness = |c: &feynlab::lie::Check| c.witness.as_ref().map(|w| format!("at {:?}: {}", w.indices, w.value)).unwrap_or_default();
    let mut checks = vec![
        Check::new("total antisymmetry", report.antisymmetry.pass, witness(&report.antisymmetry)),
        Check::new("Jacobi identity", report.jacobi.pass, witness(&report.jacobi)),
        Check::new("unimodularity", report.unimodular.pass, witness(&report.unimodular)),
        Check::new("IHX defect vanishes", ihx.is_zero(), format!("max |defect| = {}", ihx.max_abs)),
    ];
    let mut results = json!({
        "dim": ld.dim(),
        "validate": serde_json::to_value(&report).expect("serializable"),
        "ihx": serde_json::to_value(&ihx).expect("serializable"),
    });
    if report.antisymmetry.pass {
        let theta = graph_color_weight(&Graph::theta(), &ld).map_err(|e| CliError::pipeline("lie-weights", e))?;
        let opts = EnumerateOptions::new(2, &[3]).tadpoles(true);
        let classes = enumerate_graphs(&opts).map_err(|e| CliError::pipeline("graph-kit", e))?;
        let mut weights = Vec::new();
        let mut tadpoles_zero = true;
        for c in &classes {
            let w = graph_color_weight(&c.representative, &ld).map_err(|e| CliError::pipeline("lie-weights", e))?;
            let tadpole = c.representative.has_tadpole();
            tadpoles_zero &= !tadpole || w.is_zero();
            weights.push(json!({
                "canonical_key": c.canonical_key.iter().map(|b| format!("{b:02x}")).collect::<String>(),
                "tadpole": tadpole,
                "weight": w.to_string(),
            }));
        }
        results["theta_weight"] = Value::String(theta.to_string());
        results["weights"] = Value::Array(weights);
        if report.unimodular.pass {
            checks.push(Check::new("tadpole weights vanish", tadpoles_zero, String::new()));
        }
    }
    Ok((results, checks))
}

