use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use trace_lab_core::algebra::diagonal_class;
use trace_lab_core::analysis::series::exact_numbers;
use trace_lab_core::analysis::spectral::raw_poly_traces;
use trace_lab_core::analysis::{
    deviation_series, fit_exponent, ids_curve, limsup_estimate, shubin_check, DeviationSeries, Fit, WindowData,
};
use trace_lab_core::algebra::RestrictedMatrix;
use trace_lab_core::example::{verify_example as run_verification, Fault};
use trace_lab_core::geometry::WindowFamily;
use trace_lab_core::number::{format_sig, parse_q, q_to_f64, qi};
use trace_lab_core::substitution::{check_primitive, perron_data, TraceIndex};
use trace_lab_core::{Error, Number, Precision, Q};

use crate::setup::{emit, json_bytes, parse_coefficients, Setup};
use crate::{Common, Failure, OperatorArgs, Schedule};

fn fit_json(fit: Result<Fit, Error>) -> Result<Value, Failure> {
    match fit {
        Ok(f) => Ok(serde_json::to_value(f).expect("serializable fit")),
        Err(Error::AllZeroTail) => Ok(Value::Null),
        Err(e) => Err(e.into()),
    }
}

pub fn analyze(common: &Common) -> Result<(), Failure> {
    let setup = Setup::new(common)?;
    let rule = &setup.rule;
    let ab = rule.abelianize();
    let eig = setup.eigen()?;
    let perron = perron_data(rule, setup.precision)?;
    let currents = eig.currents()?;
    let (primitive, power) = check_primitive(&ab);
    let alphabet: Vec<String> = rule.alphabet().iter().map(|c| c.to_string()).collect();
    let matrix: Vec<Vec<u64>> = (0..ab.size()).map(|r| (0..ab.size()).map(|c| ab.get(r, c)).collect()).collect();
    let groups: Vec<Value> = eig
        .groups
        .iter()
        .map(|g| {
            json!({
                "i": g.i,
                "value": g.value,
                "display": g.value.to_string(),
                "multiplicity": g.multiplicity,
                "chain_heights": g.chains.heights(),
                "exponent": g.exponent,
                "membership": g.membership,
            })
        })
        .collect();
    let basis: Vec<Value> = eig
        .basis
        .iter()
        .map(|b| {
            let current = currents.iter().find(|(i, _)| *i == b.index).map(|(_, v)| v);
            json!({
                "index": b.index.to_string(),
                "vector": b.vector,
                "part": b.part,
                "exponent": eig.exponent(b.index),
                "log_power": eig.log_power(b.index),
                "membership": eig.membership(b.index),
                "current": current,
            })
        })
        .collect();
    let expanding: Vec<String> = eig.expanding_indices().iter().map(|i| i.to_string()).collect();
    let report = json!({
        "alphabet": alphabet,
        "matrix": matrix,
        "lengths": rule.lengths(),
        "proper": rule.is_proper(),
        "primitive": primitive,
        "primitivity_power": power,
        "precision": setup.precision,
        "expansion": perron.expansion,
        "frequencies": perron.frequencies,
        "density": perron.density,
        "eigenvalues": groups,
        "basis": basis,
        "expanding_set": expanding,
    });
    emit(common.out.as_deref(), "analyze.json", &json_bytes(&report))
}

pub fn generate(common: &Common, t: f64) -> Result<(), Failure> {
    let setup = Setup::new(common)?;
    let seg = setup.segment(t, None)?;
    let mut csv = String::from("index,coordinate,label\n");
    let origin = seg.origin() as i64;
    for w in seg.window_range() {
        let coord = match seg.exact_coordinate(w) {
            Some(x) => format_sig(q_to_f64(&x)),
            None => format_sig(seg.coordinate(w)),
        };
        let label = setup.rule.alphabet()[seg.label(w) as usize];
        writeln!(csv, "{},{},{}", w as i64 - origin, coord, label).unwrap();
    }
    emit(common.out.as_deref(), "segment.csv", csv.as_bytes())
}

fn degree(coeffs: &[Q]) -> usize {
    coeffs.iter().rposition(|c| *c != qi(0)).unwrap_or(0)
}

pub fn trace(
    common: &Common,
    schedule: &Schedule,
    operator: &OperatorArgs,
    phi: &str,
    indices: &[String],
) -> Result<(), Failure> {
    let setup = Setup::new(common)?;
    let kernel = setup.operator(&operator.op, operator.degree_cap)?;
    let coeffs = parse_coefficients(phi)?;
    if degree(&coeffs) > operator.degree_cap {
        return Err(Error::DegreeCap(degree(&coeffs), operator.degree_cap).into());
    }
    let eig = setup.eigen()?;
    let indices: Vec<TraceIndex> = if indices.is_empty() {
        eig.expanding_indices()
    } else {
        indices
            .iter()
            .map(|s| TraceIndex::parse(s).ok_or_else(|| Failure::Input(format!("bad index '{s}'"))))
            .collect::<Result<_, _>>()?
    };
    let family = WindowFamily::new(setup.expansion()?, schedule.nmax, schedule.phases)?;
    let phi_kernel = kernel.poly(&coeffs);
    let seg = setup.segment(family.max_t(), Some(&phi_kernel))?;
    let data = WindowData::new(&seg, family)?;
    let class = diagonal_class(&phi_kernel, &eig)?;
    let raw = exact_numbers(raw_poly_traces(&kernel, &coeffs, &seg, &data)?);
    let raw_f: Vec<f64> = raw.iter().map(Number::to_f64).collect();

    let series: Vec<DeviationSeries> = indices
        .iter()
        .map(|&idx| deviation_series(&data, &raw, &eig, &class, idx))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("n,phase,T,raw");
    for s in &series {
        let tag = format!("{}_{}_{}", s.index.i, s.index.j, s.index.k);
        write!(csv, ",remainder_{tag},normalized_{tag},psi_{tag}").unwrap();
    }
    csv.push('\n');
    for (r, sample) in data.samples().iter().enumerate() {
        write!(csv, "{},{},{},{}", sample.n, sample.phase, format_sig(sample.t), format_sig(raw_f[r])).unwrap();
        for s in &series {
            let row = &s.rows[r];
            write!(csv, ",{},{},{}", format_sig(row.remainder.to_f64()), format_sig(row.normalized), format_sig(row.psi))
                .unwrap();
        }
        csv.push('\n');
    }

    let mut per_index = Vec::new();
    for s in &series {
        let est = limsup_estimate(s);
        let rem: Vec<f64> = s.rows.iter().map(|r| r.remainder.to_f64()).collect();
        let tau = class.tau(s.index);
        // same growth, not subtracted: their terms stay in the remainder
        let mixed: Vec<String> = eig
            .expanding_indices()
            .into_iter()
            .filter(|&i| i != s.index && eig.growth_order(i, s.index).is_eq())
            .filter(|i| !s.subtracted.iter().any(|t| t.index == *i))
            .map(|i| i.to_string())
            .collect();
        per_index.push(json!({
            "index": s.index.to_string(),
            "exponent": eig.exponent(s.index),
            "membership": eig.membership(s.index),
            "tau": tau,
            "tau_decimal": format_sig(tau.to_f64()),
            "subtracted": s.subtracted.iter().map(|t| t.index.to_string()).collect::<Vec<_>>(),
            "equal_growth_unsubtracted": mixed,
            "estimate": est.estimate,
            "estimate_unit_psi": est.raw,
            "psi_sup": est.psi_sup,
            "diagnostic": est.diagnostic,
            "stabilized": est.stabilized,
            "relative_error": if tau.is_zero() { Value::Null } else { json!((est.estimate - tau.to_f64().abs()).abs() / tau.to_f64().abs()) },
            "remainder_fit": fit_json(fit_exponent(&data.family, &rem))?,
        }));
    }
    let summary = json!({
        "operator": operator.op,
        "phi": coeffs.iter().map(|c| Number::Exact(c.clone())).collect::<Vec<_>>(),
        "precision": setup.precision,
        "seed": seed_name(&setup),
        "n_max": schedule.nmax,
        "phases": schedule.phases,
        "max_t": data.family.max_t(),
        "raw_fit": fit_json(fit_exponent(&data.family, &raw_f))?,
        "indices": per_index,
    });
    match common.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "deviation.csv", csv.as_bytes())?;
            emit(Some(dir), "trace.json", &json_bytes(&summary))
        }
        None => emit(None, "", &json_bytes(&summary)),
    }
}

fn seed_name(setup: &Setup) -> String {
    let a = setup.rule.alphabet();
    format!("{},{}", a[setup.seed.0 as usize], a[setup.seed.1 as usize])
}

pub fn ids(common: &Common, schedule: &Schedule, operator: &OperatorArgs, window: Option<f64>) -> Result<(), Failure> {
    let setup = Setup::new(common)?;
    let kernel = setup.operator(&operator.op, operator.degree_cap)?;
    if !kernel.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint.into());
    }
    let expansion = setup.expansion()?;
    let t = window.unwrap_or(expansion.powi(5));
    let eig = setup.eigen()?;
    let perron = perron_data(&setup.rule, setup.precision)?;
    let family = WindowFamily::new(expansion, schedule.nmax, schedule.phases)?;
    let cap = operator.degree_cap;
    let top = kernel.pow(cap.max(1));
    let seg = setup.segment(t.max(family.max_t()), Some(&top))?;
    let curve = ids_curve(&kernel, &seg, t)?;
    let matrix = RestrictedMatrix::new(&kernel, &seg, t)?;
    let powers = matrix.power_traces(cap);
    let data = WindowData::new(&seg, family)?;

    let mut moments = Vec::new();
    for m in 1..=cap {
        let eigen_path = curve.moment(m as u32);
        let power_path = powers[m] / curve.volume;
        let mut coeffs = vec![qi(0); m + 1];
        coeffs[m] = qi(1);
        let report = shubin_check(&kernel, &coeffs, &seg, &data, &eig, &perron)?;
        let scale = eigen_path.abs().max(power_path.abs());
        moments.push(json!({
            "m": m,
            "eigen_path": eigen_path,
            "power_path": power_path,
            "relative_difference": if scale > 0.0 { (eigen_path - power_path).abs() / scale } else { 0.0 },
            "limit": report.limit,
            "limit_decimal": format_sig(report.limit.to_f64()),
            "gap_fit": report.fit,
            "expected_slope": report.expected_slope,
        }));
    }
    let summary = json!({
        "operator": operator.op,
        "precision": setup.precision,
        "seed": seed_name(&setup),
        "t": t,
        "volume": curve.volume,
        "dimension": curve.eigenvalues.len(),
        "mass": curve.mass(),
        "min_eigenvalue": curve.eigenvalues.first(),
        "max_eigenvalue": curve.eigenvalues.last(),
        "n_max": schedule.nmax,
        "phases": schedule.phases,
        "moments": moments,
    });
    match common.out.as_deref() {
        Some(dir) => {
            let mut csv = Vec::new();
            curve.write_csv(&mut csv)?;
            emit(Some(dir), "ids.csv", &csv)?;
            emit(Some(dir), "ids.json", &json_bytes(&summary))
        }
        None => emit(None, "", &json_bytes(&summary)),
    }
}

fn parse_fault(s: &str) -> Result<Fault, Failure> {
    let (name, delta) = s
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("fault must be NAME=DELTA, got '{s}'")))?;
    let delta = parse_q(delta).ok_or_else(|| Failure::Input(format!("bad fault delta '{delta}'")))?;
    Ok(Fault { constant: name.trim().to_string(), delta })
}

pub fn verify_example(float: bool, out: Option<&Path>, fault: Option<&str>) -> Result<(), Failure> {
    let fault = fault.map(parse_fault).transpose()?;
    let precision = if float { Precision::Float } else { Precision::Exact };
    let verification = run_verification(precision, fault.as_ref())?;
    print!("{verification}");
    if let Some(dir) = out {
        let value = serde_json::to_value(&verification).expect("serializable verification");
        emit(Some(dir), "verify.json", &json_bytes(&value))?;
    }
    if verification.all_pass() {
        println!("all {} checks passed", verification.checks.len());
        Ok(())
    } else {
        println!("{} of {} checks failed", verification.failures().len(), verification.checks.len());
        Err(Failure::Verification)
    }
}
