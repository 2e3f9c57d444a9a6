use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use homog_core::analysis::{estimate, sweep as sweep_amplitudes, Mode, ModeChoice, SeriesInZ, SingularityEstimate};
use homog_core::constructor::{construct_with, regularize, IterationRecord, Status};
use homog_core::meso::{
    default_amplitude_order, expand_compact, meso_construct, meso_kappa, meso_residual, two_step_vs_one_step, Basis,
    EVOLUTION_COMPACT, FIELD_COMPACT,
};
use homog_core::trigpoly::{parse_decimal, rational_to_f64};
use homog_core::validate::{bloch_branch, cross_validate, CrossValidation, HomogenizedModel};
use homog_core::{construct, Error, Family, HomogenizedPDE, Rational, Substitution};
use serde_json::{json, Value};

use crate::output::{num, write_atomic, Csv};
use crate::{
    AnalyzeArgs, BasisArg, BlochArgs, ConstructArgs, FamilyArg, MesoArgs, ModeArg, ModelArg, SimulateArgs, SweepArgs,
};

/// The slow order through which the compact forms are complete.
const COMPACT_EVOLUTION_ORDER: u32 = 4;
const COMPACT_FIELD_ORDER: u32 = 2;

fn decimal(flag: &str, s: &str) -> Result<Rational> {
    parse_decimal(s).ok_or_else(|| anyhow!("--{flag}: `{s}` is not an exact decimal or fraction"))
}

fn opt_decimal(flag: &str, s: &Option<String>) -> Result<Option<Rational>> {
    s.as_deref().map(|s| decimal(flag, s)).transpose()
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Quasi => Family::QuasiPeriodic,
        FamilyArg::Single => Family::SinglePeriod,
    }
}

fn mode(m: ModeArg) -> ModeChoice {
    match m {
        ModeArg::Auto => ModeChoice::Auto,
        ModeArg::Ds => ModeChoice::Fixed(Mode::RealAxis),
        ModeArg::Mr => ModeChoice::Fixed(Mode::ConjugatePair),
    }
}

fn report_iteration(r: &IterationRecord) {
    eprintln!(
        "iteration {:>3}  truncation ({}, {})  residual {} terms / {} monomials  dropped means {}  {:.3} s",
        r.iteration,
        r.truncation.max_d,
        r.truncation.max_a,
        r.residual_terms,
        r.residual_monomials,
        r.dropped_means,
        r.elapsed.as_secs_f64()
    );
}

fn wrote(path: &Path) {
    eprintln!("wrote {}", path.display());
}

pub fn construct_cmd(args: &ConstructArgs) -> Result<()> {
    let fam = family(args.family);
    let n_a = args.a_order.unwrap_or(args.order);
    let sub = Substitution {
        a1: opt_decimal("a1", &args.a1)?,
        a2: opt_decimal("a2", &args.a2)?,
        k1: opt_decimal("k1", &args.k1)?,
        k2: opt_decimal("k2", &args.k2)?,
    };
    let c = construct_with(fam, args.order, n_a, report_iteration)?;
    eprintln!(
        "{} iterations in {:.3} s; residual certificate {}",
        c.report.iterations(),
        c.report.elapsed.as_secs_f64(),
        if c.residual.is_zero() { "zero" } else { "NONZERO" }
    );
    for w in &c.warnings {
        eprintln!("warning: {w}");
    }
    ensure!(
        c.report.status == Status::Converged && c.residual.is_zero(),
        "construction did not reach a zero residual"
    );
    let mut pde = c.pde;
    let doc = if sub.is_empty() {
        pde.to_json()
    } else {
        pde.coeffs = pde.coeffs.iter().map(|k| k.substitute(&sub)).collect::<homog_core::Result<_>>()?;
        let mut doc = pde.to_json();
        let given: serde_json::Map<String, Value> = [("a1", &sub.a1), ("a2", &sub.a2), ("k1", &sub.k1), ("k2", &sub.k2)]
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), json!(v.to_string()))))
            .collect();
        doc["substitution"] = Value::Object(given);
        doc
    };
    let path = write_atomic(&args.out, &(serde_json::to_string(&doc)? + "\n"))?;
    wrote(&path);
    Ok(())
}

fn read_pde(path: &Path) -> Result<HomogenizedPDE> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(HomogenizedPDE::from_json(&v)?)
}

fn read_series(path: &Path) -> Result<SeriesInZ> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let coeffs = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad coefficient `{t}`")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesInZ::new(coeffs))
}

const EST_HEADER: [&str; 5] = ["a", "kstar", "thetastar", "mode", "reliable"];

fn est_row(csv: &mut Csv, a: String, e: &SingularityEstimate) {
    csv.row(&[a, num(e.k_star), num(e.theta_star()), e.mode.name().into(), e.reliable.to_string()]);
}

fn summarize(a: &str, e: &SingularityEstimate) {
    eprintln!(
        "a = {a}: {} k* = {:.6} θ* = {:.6} window {:?} fit rms {:.4}{}",
        e.mode,
        e.k_star,
        e.theta_star(),
        e.window,
        e.fit_rms,
        if e.reliable { "" } else { "  (unreliable)" }
    );
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let (series, a_label) = match (&args.pde, &args.series_file) {
        (Some(p), _) => {
            let a = args.a.as_deref().ok_or_else(|| anyhow!("--a is required with --pde"))?;
            let numeric = read_pde(p)?.evaluate_single(&decimal("a", a)?)?;
            (SeriesInZ::from_pde(&numeric), a.to_string())
        }
        (None, Some(f)) => (read_series(f)?, args.a.clone().unwrap_or_else(|| "nan".into())),
        (None, None) => bail!("one of --pde or --series-file is required"),
    };
    let e = estimate(&series, mode(args.mode))?;
    summarize(&a_label, &e);
    let mut csv = Csv::new(&EST_HEADER);
    est_row(&mut csv, a_label, &e);
    wrote(&write_atomic(&args.out, csv.as_str())?);
    if let Some(path) = &args.ratios {
        let mut r = Csv::new(&["n", "inv_n", "invB", "theta"]);
        for rec in e.records.iter().filter(|r| !r.excluded) {
            r.row(&[
                rec.n.to_string(),
                num(1.0 / rec.n as f64),
                num(rec.value),
                num(rec.theta_z / 2.0),
            ]);
        }
        wrote(&write_atomic(path, r.as_str())?);
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = spec.split(':').collect();
    ensure!(parts.len() == 3, "--a-grid must be lo:hi:step");
    let lo = decimal("a-grid", parts[0])?;
    let hi = decimal("a-grid", parts[1])?;
    let step = decimal("a-grid", parts[2])?;
    ensure!(step > Rational::from_integer(0.into()), "--a-grid step must be positive");
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        out.push(a.clone());
        a += &step;
    }
    Ok(out)
}

fn decimal_label(a: &Rational) -> String {
    format!("{}", rational_to_f64(a))
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let grid = parse_grid(&args.a_grid)?;
    let pde = match &args.pde {
        Some(p) => read_pde(p)?,
        None => {
            let c = construct_with(Family::SinglePeriod, args.orders, args.orders, report_iteration)?;
            ensure!(c.residual.is_zero(), "construction did not reach a zero residual");
            c.pde
        }
    };
    let mut csv = Csv::new(&EST_HEADER);
    for row in sweep_amplitudes(&pde, &grid, mode(args.mode))? {
        let label = decimal_label(&row.a);
        summarize(&label, &row.estimate);
        est_row(&mut csv, label, &row.estimate);
    }
    wrote(&write_atomic(&args.out, csv.as_str())?);
    Ok(())
}

pub fn bloch(args: &BlochArgs) -> Result<()> {
    ensure!(args.points >= 1, "--points must be positive");
    ensure!(args.kmax >= args.kmin, "--kmax must not be below --kmin");
    let a = decimal("a", &args.a)?;
    let order = args.truncations.iter().copied().max().unwrap_or(0).max(4) as u32;
    let c = construct(Family::SinglePeriod, order, order)?;
    let pde = c.pde.evaluate_single(&a)?;
    let ks: Vec<f64> = (0..args.points)
        .map(|i| {
            if args.points == 1 {
                args.kmin
            } else {
                args.kmin + (args.kmax - args.kmin) * i as f64 / (args.points - 1) as f64
            }
        })
        .collect();
    let table = bloch_branch(rational_to_f64(&a), &ks, args.modes)?.with_series(&pde, &args.truncations);
    if regularize(&pde).is_err() {
        eprintln!("regularized model inapplicable at a = {}: K_4 < 0", args.a);
    }
    let mut header = vec!["k".to_string(), "lambda_bloch".to_string()];
    header.extend(args.truncations.iter().map(|n| format!("lambda_N{n}")));
    header.push("lambda_reg".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header);
    for r in &table.rows {
        if r.flagged {
            eprintln!("warning: branch tracking overlap {:.3} at k = {}", r.overlap, r.k);
        }
        let mut cells = vec![num(r.k), num(r.lambda_bloch)];
        cells.extend(r.series.iter().map(|v| num(*v)));
        cells.push(num(r.regularized.unwrap_or(f64::NAN)));
        csv.row(&cells);
    }
    eprintln!("{} Fourier modes per side", table.modes);
    wrote(&write_atomic(&args.out, csv.as_str())?);
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let a_exact = decimal("a", &args.a)?;
    let a = rational_to_f64(&a_exact);
    let order = args.lift_order.max(4);
    let lift = construct(Family::SinglePeriod, order, order)?;
    let pde = lift.pde.evaluate_single(&a_exact)?;
    let mut csv = Csv::new(&["model", "periods", "t", "error", "mean"]);
    for &periods in &args.periods {
        let mut cfg = CrossValidation::new(a, periods);
        cfg.points_per_period = args.points_per_period;
        cfg.dt = args.dt;
        cfg.samples = args.samples;
        for m in &args.models {
            let model = match m {
                ModelArg::N2 => HomogenizedModel::Truncated { pde: pde.clone(), order: 2 },
                ModelArg::N4 => HomogenizedModel::Truncated { pde: pde.clone(), order: 4 },
                ModelArg::Reg => HomogenizedModel::Regularized(regularize(&pde)?),
            };
            match cross_validate(&cfg, &lift, &model) {
                Ok(r) => {
                    eprintln!("{} L/l1 = {periods}: max relative error {:.3e}", r.model, r.max_error());
                    for ((t, e), mean) in r.times.iter().zip(&r.errors).zip(&r.means) {
                        csv.row(&[r.model.clone(), periods.to_string(), num(*t), num(*e), num(*mean)]);
                    }
                }
                Err(Error::Unstable(msg)) => eprintln!("advisory: L/l1 = {periods}: {msg}"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    wrote(&write_atomic(&args.out, csv.as_str())?);
    Ok(())
}

pub fn meso(args: &MesoArgs) -> Result<()> {
    let n_a = args.a_order.unwrap_or_else(|| default_amplitude_order(args.order));
    let basis = match args.basis {
        BasisArg::B => Basis::B,
        BasisArg::C => Basis::C,
    };
    let c = meso_construct(args.order, n_a)?;
    eprintln!("{} iterations in {:.3} s", c.iterations, c.elapsed.as_secs_f64());
    let t = c.manifold.u.truncation();
    let residual_zero =
        c.residual.is_zero() && meso_residual(&c.manifold.u, &c.manifold.g, &meso_kappa(t))?.is_zero();
    let ev_order = args.order.min(COMPACT_EVOLUTION_ORDER);
    let evolution_ok = c.pde.evolution.slow_slice(ev_order) == expand_compact(EVOLUTION_COMPACT, t)?.slow_slice(ev_order);
    let field_order = args.order.min(COMPACT_FIELD_ORDER);
    let field_ok = c.manifold.u.slow_slice(field_order) == expand_compact(FIELD_COMPACT, t)?.slow_slice(field_order);
    let two = two_step_vs_one_step(args.two_step_order, args.two_step_order)?;
    let two_ok = two.leading_agrees() && two.field_agrees();
    for (name, ok) in [
        ("residual certificate", residual_zero),
        ("evolution equals compact form", evolution_ok),
        ("field equals compact form", field_ok),
        ("two-step equals one-step", two_ok),
    ] {
        eprintln!("{}: {name}", if ok { "pass" } else { "FAIL" });
    }
    let mut doc = c.pde.to_json(basis);
    doc["field"] = c.manifold.u.to_json(basis);
    doc["checks"] = json!({
        "residual_zero": residual_zero,
        "evolution_compact": { "slow_order": ev_order, "equal": evolution_ok },
        "field_compact": { "slow_order": field_order, "equal": field_ok },
        "two_step": two.to_json(),
    });
    wrote(&write_atomic(&args.out, &(serde_json::to_string(&doc)? + "\n"))?);
    ensure!(residual_zero && evolution_ok && field_ok && two_ok, "mesoscale certificate failed");
    Ok(())
}
