use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use pkpz::distribution::{
    cdf_derivative, conditional_probability, joint_cdf, ConditionalQuery, ContourSpec, Estimate, EvaluationPoint,
    PeriodCase,
};
use pkpz::limits::{limit_conditional_cdf, s_inf_probabilistic, s_inf_quadrature, SArgs, FALLBACK_PATHS};
use pkpz::montecarlo::{estimate_limit_probability, RandomStream};
use pkpz::specfun::{a1, a2, c_of_rho, c_of_rho_dual, polylog, wrapped_gaussian, CirclePoint, ComplexDisk, PolylogOrder};
use pkpz::tasep::{empirical_scaled_cdf, scaled_samples};
use pkpz::verify::{self, Criterion, Report};
use pkpz::Complex64;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::record::{echo, join, PlotRow, ResultRecord};
use crate::{CliError, Settings};

pub enum Output {
    Records(Vec<ResultRecord>),
    Plot(Vec<PlotRow>),
    Verify(Vec<Report>),
}

type Res<T> = Result<T, CliError>;

pub fn dispatch(cmd: Command, config: ConfigFile, s: &Settings) -> Res<Output> {
    match cmd {
        Command::Cdf(a) => cdf(a.over(config.cdf), s),
        Command::Conditional(a) => conditional(a.over(config.conditional), s),
        Command::Limit(a) => limit(a.over(config.limit), s),
        Command::Mc(a) => mc(a.over(config.mc), s),
        Command::Tasep(a) => tasep(a.over(config.tasep), s),
        Command::Specfun(a) => specfun(a.over(config.specfun), s),
        Command::Verify(a) => verify(a.over(config.verify), s),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn need<T>(v: Option<T>, flag: &str) -> Res<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required")))
}

fn timed<T>(s: &Settings, f: impl FnOnce() -> Res<T>) -> Res<(T, Option<f64>)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, s.timing.then(|| t0.elapsed().as_secs_f64())))
}

fn with_estimate(mut r: ResultRecord, e: &Estimate) -> ResultRecord {
    r.im = e.imag;
    r.quad_proxy = Some(e.quad_proxy);
    r.trunc_proxy = Some(e.trunc_proxy);
    r
}

fn grid(from: f64, to: f64, points: usize) -> Res<Vec<f64>> {
    if !(from < to) || points < 2 {
        return Err(usage(format!("grid needs from < to and at least 2 points, got {from}..{to} with {points}")));
    }
    Ok((0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect())
}

fn parse_case(s: &str) -> Res<PeriodCase> {
    match s {
        "1" | "large" => Ok(PeriodCase::Large),
        "2" | "critical" => Ok(PeriodCase::Critical),
        "3" | "small" => Ok(PeriodCase::Small),
        _ => Err(usage(format!("--case must be 1, 2, 3, large, critical or small, got {s:?}"))),
    }
}

fn case_name(c: PeriodCase) -> &'static str {
    match c {
        PeriodCase::Large => "large",
        PeriodCase::Critical => "critical",
        PeriodCase::Small => "small",
    }
}

/// `x` defaults to zeros of the length of `t`.
fn positions(x: Option<Vec<f64>>, m: usize) -> Vec<f64> {
    x.unwrap_or_else(|| vec![0.0; m])
}

fn default_radii(m: usize) -> Vec<f64> {
    match m {
        1 => vec![0.5],
        2 => vec![0.3, 0.6],
        _ => ContourSpec::geometric(m, 16).map(|c| c.moduli()).unwrap_or_default(),
    }
}

fn contour(radii: &Option<Vec<f64>>, m: usize, nodes: usize) -> Res<(ContourSpec, Vec<f64>)> {
    let mut r = radii.clone().unwrap_or_else(|| default_radii(m));
    if r.len() != m {
        return Err(usage(format!("{} radii given for {m} points", r.len())));
    }
    r.sort_by(f64::total_cmp);
    Ok((ContourSpec::raw(r.clone(), nodes)?, r))
}

fn cdf(a: CdfArgs, s: &Settings) -> Res<Output> {
    let quantity = a.quantity.unwrap_or(Quantity::Cdf);
    let nodes = a.nodes.unwrap_or(64);
    let eval = |pt: &EvaluationPoint, c: &ContourSpec| -> Res<Estimate> {
        Ok(match quantity {
            Quantity::Cdf => joint_cdf(pt, c, &s.trunc)?,
            Quantity::Density => cdf_derivative(pt, c, &s.trunc)?,
        })
    };
    if a.plot_data {
        return cdf_plot(&a, quantity, nodes, &eval);
    }
    let points = match &a.batch {
        Some(path) => read_batch(path)?,
        None => vec![point_from_flags(&a)?],
    };
    if let Some(m) = a.m {
        if let Some(pt) = points.iter().find(|pt| pt.m() != m) {
            return Err(usage(format!("--m {m} but a point has {} entries", pt.m())));
        }
    }
    let label = match quantity {
        Quantity::Cdf => "cdf",
        Quantity::Density => "density",
    };
    let mut out = Vec::with_capacity(points.len());
    for (i, pt) in points.iter().enumerate() {
        let (c, radii) = contour(&a.radii, pt.m(), nodes)?;
        let (e, wall) = timed(s, || eval(pt, &c))?;
        let inputs = echo(&[
            ("gamma", join(&pt.gamma)),
            ("tau", join(&pt.tau)),
            ("beta", join(&pt.beta)),
            ("p", pt.p.to_string()),
            ("nodes", nodes.to_string()),
            ("radii", join(&radii)),
            ("roots", s.trunc.roots.to_string()),
        ]);
        let mut r = with_estimate(ResultRecord::new("cdf", i, label, inputs, e.value), &e);
        r.wall_seconds = wall;
        out.push(r);
    }
    Ok(Output::Records(out))
}

fn point_from_flags(a: &CdfArgs) -> Res<EvaluationPoint> {
    let tau = need(a.tau.clone(), "tau")?;
    let beta = need(a.beta.clone(), "beta")?;
    let p = need(a.p, "p")?;
    let gamma = positions(a.gamma.clone(), tau.len());
    Ok(EvaluationPoint::new(gamma, tau, beta, p)?)
}

fn tail_reference(q: Quantity, x: f64) -> Option<f64> {
    (x > 0.0).then(|| {
        let e = (-(4.0 / 3.0) * x.powf(1.5)).exp();
        match q {
            Quantity::Cdf => 1.0 - e / (16.0 * PI * x.powf(1.5)),
            Quantity::Density => e / (8.0 * PI * x),
        }
    })
}

fn cdf_plot(a: &CdfArgs, q: Quantity, nodes: usize, eval: &dyn Fn(&EvaluationPoint, &ContourSpec) -> Res<Estimate>) -> Res<Output> {
    let gamma = a.gamma.clone().unwrap_or_else(|| vec![0.0]);
    let tau = a.tau.clone().unwrap_or_else(|| vec![1.0]);
    if gamma.len() != 1 || tau.len() != 1 {
        return Err(usage("plot data is for a single point"));
    }
    let p = a.p.unwrap_or(1.0);
    let (c, _) = contour(&a.radii, 1, nodes)?;
    let xs = grid(a.from.unwrap_or(-4.0), a.to.unwrap_or(4.0), a.points.unwrap_or(33))?;
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let e = eval(&EvaluationPoint::one(gamma[0], tau[0], x, p)?, &c)?;
        let reference = if p == 1.0 && gamma[0] == 0.0 && tau[0] == 1.0 { tail_reference(q, x) } else { None };
        rows.push(PlotRow { x, y: e.value, err: Some(e.proxy()), reference });
    }
    Ok(Output::Plot(rows))
}

fn read_batch(path: &Path) -> Res<Vec<EvaluationPoint>> {
    let bad = |line: u64, msg: String| usage(format!("batch {} line {line}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| usage(format!("batch {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    if let Some(h) = headers.iter().find(|h| !["gamma", "tau", "beta", "p"].contains(&h.trim())) {
        return Err(bad(1, format!("unknown column {h:?}")));
    }
    let (Some(ti), Some(bi), Some(pi)) = (col("tau"), col("beta"), col("p")) else {
        return Err(bad(1, "columns tau, beta and p are required".into()));
    };
    let gi = col("gamma");
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let vec_at = |i: usize, name: &str| -> Res<Vec<f64>> {
            rec.get(i)
                .unwrap_or("")
                .split([';', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| bad(line, format!("{name}: {t:?} is not a number"))))
                .collect()
        };
        let tau = vec_at(ti, "tau")?;
        let beta = vec_at(bi, "beta")?;
        let p = rec.get(pi).unwrap_or("").trim();
        let p: f64 = p.parse().map_err(|_| bad(line, format!("p: {p:?} is not a number")))?;
        let gamma = match gi {
            Some(i) => vec_at(i, "gamma")?,
            None => vec![0.0; tau.len()],
        };
        points.push(EvaluationPoint::new(gamma, tau, beta, p).map_err(|e| bad(line, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(bad(1, "no points".into()));
    }
    Ok(points)
}

fn conditional(a: ConditionalArgs, s: &Settings) -> Res<Output> {
    let t = a.t.unwrap_or_default();
    let h = a.h.unwrap_or_default();
    let x = positions(a.x, t.len());
    let ell = need(a.ell, "ell")?;
    let p = need(a.p, "p")?;
    let nodes = a.nodes.unwrap_or(64);
    let q = ConditionalQuery::new(x.clone(), t.clone(), h.clone(), ell, p)?;
    let c = ContourSpec::family(ell, p, q.m(), nodes)?;
    let (res, wall) = timed(s, || Ok(conditional_probability(&q, &c, &s.trunc)?))?;
    let inputs = echo(&[
        ("x", join(&x)),
        ("t", join(&t)),
        ("h", join(&h)),
        ("ell", ell.to_string()),
        ("p", p.to_string()),
        ("nodes", nodes.to_string()),
        ("roots", s.trunc.roots.to_string()),
    ]);
    let mut r = ResultRecord::new("conditional", 0, "conditional", inputs, res.value);
    r.im = res.imag;
    r.quad_proxy = Some(res.proxy);
    r.wall_seconds = wall;
    Ok(Output::Records(vec![r]))
}

fn limit(a: LimitArgs, s: &Settings) -> Res<Output> {
    match a.what.unwrap_or(LimitKind::Conditional) {
        LimitKind::Conditional => {
            let case = parse_case(&need(a.case, "case")?)?;
            let t = a.t.unwrap_or_default();
            let h = a.h.unwrap_or_default();
            let x = positions(a.x, t.len());
            let (v, wall) = timed(s, || Ok(limit_conditional_cdf(case, &x, &t, &h, a.r)?))?;
            let mut pairs = vec![("case", case_name(case).to_string()), ("x", join(&x)), ("t", join(&t)), ("h", join(&h))];
            if let Some(r) = a.r {
                pairs.push(("r", r.to_string()));
            }
            let sampled = t.len() > 2;
            let mut r = ResultRecord::new("limit", 0, if sampled { "monte-carlo" } else { "quadrature" }, echo(&pairs), v);
            if sampled {
                r.se = Some((v * (1.0 - v) / FALLBACK_PATHS as f64).sqrt());
                r.seed = Some(0);
            }
            r.wall_seconds = wall;
            Ok(Output::Records(vec![r]))
        }
        LimitKind::SInf => {
            let args = SArgs::new(need(a.a, "a")?, need(a.b, "b")?)?;
            let inputs = echo(&[("a", join(&args.a)), ("b", join(&args.b))]);
            let (line, wall) = timed(s, || Ok(s_inf_quadrature(&args, None)?))?;
            let mut r = ResultRecord::new("limit", 0, "line", inputs.clone(), line.value);
            r.im = line.imag;
            r.wall_seconds = wall;
            let mut out = vec![r];
            if args.m() <= 4 {
                let (v, wall) = timed(s, || Ok(s_inf_probabilistic(&args)?))?;
                let mut r = ResultRecord::new("limit", 1, "bridge", inputs, v);
                r.wall_seconds = wall;
                out.push(r);
            }
            Ok(Output::Records(out))
        }
    }
}

fn mc(a: McArgs, s: &Settings) -> Res<Output> {
    let case = parse_case(&need(a.case, "case")?)?;
    let t = need(a.t, "t")?;
    let h = need(a.h, "h")?;
    let x = positions(a.x, t.len());
    let paths = a.paths.unwrap_or(100_000);
    let stream_id = a.stream.unwrap_or(0);
    let stream = RandomStream::new(s.seed, stream_id);
    let (e, wall) = timed(s, || Ok(estimate_limit_probability(case, &x, &t, &h, a.r, paths, &stream)?))?;
    let mut pairs = vec![("case", case_name(case).to_string()), ("x", join(&x)), ("t", join(&t)), ("h", join(&h))];
    if let Some(r) = a.r {
        pairs.push(("r", r.to_string()));
    }
    pairs.push(("paths", paths.to_string()));
    pairs.push(("stream", stream_id.to_string()));
    let mut r = ResultRecord::new("mc", 0, "probability", echo(&pairs), e.value);
    r.se = Some(e.se);
    r.seed = Some(s.seed);
    r.wall_seconds = wall;
    Ok(Output::Records(vec![r]))
}

fn tasep(a: TasepArgs, s: &Settings) -> Res<Output> {
    let half = a.a.unwrap_or(16);
    let runs = a.runs.unwrap_or(1000);
    let stream_id = a.stream.unwrap_or(0);
    let stream = RandomStream::new(s.seed, stream_id);
    if a.plot_data {
        if half < 8 || runs < 1000 {
            return Err(usage(format!("need a ≥ 8 and at least 1000 runs, got a = {half}, {runs} runs")));
        }
        let gamma = a.gamma.unwrap_or_else(|| vec![0.0]);
        let tau = a.tau.unwrap_or_else(|| vec![1.0]);
        if gamma.len() != 1 || tau.len() != 1 {
            return Err(usage("plot data is for a single point"));
        }
        let xs = grid(a.from.unwrap_or(-4.0), a.to.unwrap_or(3.0), a.points.unwrap_or(29))?;
        let samples: Vec<f64> = scaled_samples(&[(gamma[0], tau[0])], half, runs, &stream)?.into_iter().map(|v| v[0]).collect();
        let c = ContourSpec::raw(vec![0.5], 64)?;
        let n = samples.len() as f64;
        let mut rows = Vec::with_capacity(xs.len());
        for x in xs {
            let y = samples.iter().filter(|v| **v <= x).count() as f64 / n;
            let exact = EvaluationPoint::one(gamma[0], tau[0], x, 1.0).and_then(|pt| joint_cdf(&pt, &c, &s.trunc));
            let reference = exact.ok().filter(|e| e.proxy() < 1e-3).map(|e| e.value);
            rows.push(PlotRow { x, y, err: Some((y * (1.0 - y) / n).sqrt()), reference });
        }
        return Ok(Output::Plot(rows));
    }
    let tau = need(a.tau, "tau")?;
    let beta = need(a.beta, "beta")?;
    let gamma = positions(a.gamma, tau.len());
    if gamma.len() != tau.len() || beta.len() != tau.len() {
        return Err(usage("gamma, tau and beta must have equal lengths"));
    }
    let points: Vec<(f64, f64, f64)> = (0..tau.len()).map(|i| (gamma[i], tau[i], beta[i])).collect();
    let ((v, se), wall) = timed(s, || Ok(empirical_scaled_cdf(&points, half, runs, &stream)?))?;
    let inputs = echo(&[
        ("a", half.to_string()),
        ("gamma", join(&gamma)),
        ("tau", join(&tau)),
        ("beta", join(&beta)),
        ("runs", runs.to_string()),
        ("stream", stream_id.to_string()),
    ]);
    let mut r = ResultRecord::new("tasep", 0, "empirical-cdf", inputs, v);
    r.se = Some(se);
    r.seed = Some(s.seed);
    r.wall_seconds = wall;
    Ok(Output::Records(vec![r]))
}

fn disk(z: Option<Vec<f64>>) -> Res<ComplexDisk> {
    let z = need(z, "z")?;
    let w = match z.as_slice() {
        [re] => Complex64::new(*re, 0.0),
        [re, im] => Complex64::new(*re, *im),
        _ => return Err(usage("--z takes re or re,im")),
    };
    Ok(ComplexDisk::new(w)?)
}

fn specfun(a: SpecfunArgs, s: &Settings) -> Res<Output> {
    let f = need(a.function, "fn")?;
    let tol = s.tol.unwrap_or(1e-16);
    let complex = |label: &str, inputs: String, v: Complex64| {
        let mut r = ResultRecord::new("specfun", 0, label, inputs, v.re);
        r.im = v.im;
        r
    };
    let t0 = std::time::Instant::now();
    let mut records = match f {
        Special::COfRho => {
            let rho = need(a.rho, "rho")?;
            let inputs = echo(&[("fn", "c_of_rho".into()), ("rho", rho.to_string())]);
            let direct = c_of_rho(rho, tol)?;
            let dual = c_of_rho_dual(rho, tol)?;
            vec![
                ResultRecord::new("specfun", 0, "theta", inputs.clone(), direct),
                ResultRecord::new("specfun", 1, "dual", inputs.clone(), dual),
                ResultRecord::new("specfun", 2, "difference", inputs, direct - dual),
            ]
        }
        Special::Polylog => {
            let order = match need(a.order, "order")? {
                0.5 => PolylogOrder::Half,
                1.5 => PolylogOrder::ThreeHalves,
                2.5 => PolylogOrder::FiveHalves,
                o => return Err(usage(format!("--order must be 0.5, 1.5 or 2.5, got {o}"))),
            };
            let z = disk(a.z)?;
            let inputs = echo(&[("fn", "polylog".into()), ("order", order.exponent().to_string()), ("z", join(&[z.value().re, z.value().im]))]);
            vec![complex("polylog", inputs, polylog(order, z, tol)?)]
        }
        Special::A1 | Special::A2 => {
            let z = disk(a.z)?;
            let name = if f == Special::A1 { "a1" } else { "a2" };
            let inputs = echo(&[("fn", name.into()), ("z", join(&[z.value().re, z.value().im]))]);
            let v = if f == Special::A1 { a1(z)? } else { a2(z)? };
            vec![complex(name, inputs, v)]
        }
        Special::Wrapped => {
            let (x, t, rho) = (need(a.x, "x")?, need(a.t, "t")?, need(a.rho, "rho")?);
            let inputs = echo(&[("fn", "wrapped".into()), ("x", x.to_string()), ("t", t.to_string()), ("rho", rho.to_string())]);
            vec![ResultRecord::new("specfun", 0, "wrapped", inputs, wrapped_gaussian(CirclePoint::new(x, rho)?, t, tol)?)]
        }
    };
    if s.timing {
        let wall = t0.elapsed().as_secs_f64();
        records.iter_mut().for_each(|r| r.wall_seconds = Some(wall));
    }
    Ok(Output::Records(records))
}

fn verify(a: VerifyArgs, s: &Settings) -> Res<Output> {
    let suite = a.suite.unwrap_or_else(|| "all".into());
    let chosen: Vec<Criterion> = match suite.as_str() {
        "all" => Criterion::ALL.to_vec(),
        "fast" => Criterion::ALL.into_iter().filter(|c| c.is_fast()).collect(),
        name => vec![Criterion::parse(name).ok_or_else(|| {
            let names: Vec<&str> = Criterion::ALL.iter().map(|c| c.name()).collect();
            usage(format!("unknown suite {name:?}; expected all, fast, 1-8 or one of {}", names.join(", ")))
        })?],
    };
    Ok(Output::Verify(chosen.into_iter().map(|c| verify::run(c, s.seed)).collect()))
}

/// Flat view of verification checks for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub criterion: String,
    pub check: String,
    pub measured: f64,
    pub required: f64,
    pub passed: bool,
    pub note: String,
}

pub fn check_rows(reports: &[Report]) -> Vec<CheckRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(|c| CheckRow {
                criterion: r.criterion.name().into(),
                check: c.name.clone(),
                measured: c.measured,
                required: c.required,
                passed: c.passed,
                note: c.note.clone(),
            })
        })
        .collect()
}
