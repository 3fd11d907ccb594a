use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mplab::decay::{
    angular_min_max, combine_bounds, confinement_epsilon, corollary_epsilon, counterexample_report, delta_sd, delta_threshold_stft, fit_decay,
    gabor_matrix, phase_lattice, psi_s, stft_class_report, verify_spreading_bound, verify_spreading_bound_with_delta,
    write_margin_csv, GSClass,
};
use mplab::flows::{rows_from_matrix, FlowKind, FlowSpec};
use mplab::io::load_matrix;
use mplab::lemmas::{c_eps_s, run_sweep, Lemma, SweepConfig};
use mplab::plot::{render_svg, spreading_frames};
use mplab::symplectic::{euler_decompose, spreading_matrix, SymplecticMatrix};
use mplab::tf::{
    stft_full, stft_fundamental_identity_check, wigner, wigner_marginal_checks, GaussianChirp, Grid, SampledField, TfArray,
};
use mplab::util::fmt_g17;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::config::{load_section, merge};
use crate::Status;

struct Ctx {
    out: PathBuf,
    dry_run: bool,
}

impl Ctx {
    fn emit(&self, name: &str, contents: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("{}: cannot create output directory", self.out.display()))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("{}: cannot write", path.display()))?;
        Ok(path)
    }

    fn emit_json(&self, name: &str, v: &impl Serialize) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.emit(name, &s)
    }

    fn dry(&self, what: &str) -> Result<Status> {
        println!("dry-run: {what} inputs are valid");
        Ok(Status::Ok)
    }
}

fn status(pass: bool) -> Status {
    if pass {
        Status::Ok
    } else {
        Status::CheckFailed
    }
}

pub fn dispatch(cli: &Cli) -> Result<Status> {
    let name = cli.command.name();
    let cfg = cli.config.as_ref().map(|p| load_section(p, name)).transpose()?;
    let src = cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "arguments".into());
    let get = |k: &str| cfg.as_ref().and_then(|c| c.get(k).cloned());
    let out = match (&cli.out, get("out")) {
        (Some(o), _) => o.clone(),
        (None, Some(Value::String(o))) => PathBuf::from(o),
        _ => PathBuf::from("."),
    };
    let dry_run = cli.dry_run || get("dry_run").and_then(|v| v.as_bool()).unwrap_or(false);
    let ctx = Ctx { out, dry_run };
    let c = cfg.as_ref();
    match &cli.command {
        Command::Euler(a) => euler(&ctx, merge(a, c, &src)?),
        Command::Flow(a) => flow(&ctx, merge(a, c, &src)?),
        Command::Stft(a) => stft_cmd(&ctx, merge(a, c, &src)?),
        Command::Wigner(a) => wigner_cmd(&ctx, merge(a, c, &src)?),
        Command::Gabor(a) => gabor(&ctx, merge(a, c, &src)?),
        Command::DecayFit(a) => decay_fit(&ctx, merge(a, c, &src)?),
        Command::Confine(a) => confine(&ctx, merge(a, c, &src)?),
        Command::Verify(a) => verify(&ctx, merge(a, c, &src)?),
        Command::Constants(a) => constants(&ctx, merge(a, c, &src)?),
        Command::SpreadingPlot(a) => spreading_plot(&ctx, merge(a, c, &src)?),
    }
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing required --{flag}"))
}

fn parse_list<T: std::str::FromStr>(text: &str, field: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| anyhow!("--{field}: cannot parse {t:?}: {e}")))
        .collect()
}

fn flow_spec(a: &FlowArgs) -> Result<FlowSpec> {
    let mut obj = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("{}: cannot read flow spec", p.display()))?;
            match serde_json::from_str::<Value>(&text).with_context(|| format!("{}: malformed JSON", p.display()))? {
                Value::Object(o) => o,
                _ => bail!("{}: flow spec must be a JSON object", p.display()),
            }
        }
        None => Map::new(),
    };
    if let Some(k) = &a.flow {
        obj.insert("kind".into(), Value::String(k.clone()));
    }
    if let Some(t) = a.t {
        obj.insert("t".into(), json!(t));
    }
    if let Some(m) = a.m {
        obj.insert("m".into(), json!(m));
    }
    if let Some(o) = &a.omega {
        obj.insert("omega".into(), json!(parse_list::<f64>(o, "omega")?));
    }
    for (key, v) in [("B", &a.b), ("Q", &a.q), ("E", &a.e), ("R", &a.r)] {
        if let Some(text) = v {
            let m: Value = serde_json::from_str(text).map_err(|e| anyhow!("--{key}: expected a nested JSON array: {e}"))?;
            obj.insert(key.into(), m);
        }
    }
    if let Some(j) = &a.j_set {
        obj.insert("J_set".into(), json!(parse_list::<usize>(j, "J-set")?));
    }
    if let Some(r) = a.rank {
        obj.insert("rank".into(), json!(r));
    }
    if let Some(d) = a.d {
        obj.insert("d".into(), json!(d));
    }
    if !obj.contains_key("kind") {
        bail!("missing required --flow (or a spec file with \"kind\")");
    }
    let mut spec: FlowSpec = serde_json::from_value(Value::Object(obj)).map_err(|e| anyhow!("flow spec: {e}"))?;
    if spec.kind == FlowKind::FreeParticle && spec.d.is_none() {
        spec.d = Some(1);
    }
    spec.matrix().map_err(|e| anyhow!("flow spec: {e}"))?;
    Ok(spec)
}

fn euler(ctx: &Ctx, a: EulerArgs) -> Result<Status> {
    let path = require(&a.input, "input")?;
    let tol = a.tol.unwrap_or(1e-10);
    let m = load_matrix(&path)?;
    let s = SymplecticMatrix::new(m, tol).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    if ctx.dry_run {
        return ctx.dry("euler");
    }
    let dec = euler_decompose(&s, tol)?;
    let r = dec.residuals(s.matrix());
    let pass = r.reconstruction <= 1e-9 && r.max_factor() <= 1e-10 * s.matrix().norm().max(1.0);
    let report = json!({
        "dim": s.dim(),
        "sigma": dec.sigma,
        "sigma_min": dec.sigma_min(),
        "U": rows_from_matrix(&dec.u),
        "V": rows_from_matrix(&dec.v),
        "spreading": rows_from_matrix(&spreading_matrix(&dec)),
        "residuals": r,
        "pass": pass,
    });
    let p = ctx.emit_json("euler.json", &report)?;
    println!("euler: d={} sigma={:?} reconstruction={:.3e} -> {}", s.dim(), dec.sigma, r.reconstruction, p.display());
    Ok(status(pass))
}

fn flow(ctx: &Ctx, a: FlowCmd) -> Result<Status> {
    let spec = flow_spec(&a.flow)?;
    if ctx.dry_run {
        return ctx.dry("flow");
    }
    let s = spec.matrix()?;
    let (dec, scenario) = spec.euler()?;
    let mut generic: Vec<f64> = s.matrix().clone().svd(false, false).singular_values.iter().copied().collect();
    generic.sort_by(|x, y| y.total_cmp(x));
    generic.truncate(s.dim());
    let sv_residual = dec.sigma.iter().zip(&generic).map(|(x, y)| (x - y).abs() / y.max(1.0)).fold(0.0, f64::max);
    let r = dec.residuals(s.matrix());
    let pass = sv_residual <= 1e-10 && r.reconstruction <= 1e-9;
    let report = json!({
        "spec": spec,
        "S": rows_from_matrix(s.matrix()),
        "sigma": dec.sigma,
        "sigma_generic": generic,
        "sigma_residual": sv_residual,
        "U": rows_from_matrix(&dec.u),
        "V": rows_from_matrix(&dec.v),
        "spreading": rows_from_matrix(&spreading_matrix(&dec)),
        "residuals": r,
        "scenario": scenario,
        "pass": pass,
    });
    let p = ctx.emit_json("flow.json", &report)?;
    println!("flow: {:?} labels={:?} sigma={:?} residual={:.3e} -> {}", spec.kind, scenario.labels(), dec.sigma, sv_residual, p.display());
    Ok(status(pass))
}

fn field(a: &FieldArgs) -> Result<(SampledField, SampledField)> {
    let f = match (&a.input, &a.gaussian) {
        (Some(p), _) => SampledField::load(p)?,
        (None, Some(spec)) => {
            let v = parse_list::<f64>(spec, "gaussian")?;
            let (ga, gc) = match v.as_slice() {
                [x] => (*x, 0.0),
                [x, y] => (*x, *y),
                _ => bail!("--gaussian: expected \"a\" or \"a,c\""),
            };
            let grid = Grid::line(a.l.unwrap_or(12.0), a.n.unwrap_or(256))?;
            GaussianChirp::new(ga, gc)?.sample(&grid)
        }
        (None, None) => bail!("missing required --input or --gaussian"),
    };
    let g = GaussianChirp::new(a.window.unwrap_or(PI), 0.0)?.sample(f.grid());
    Ok((f, g))
}

fn tf_csv(t: &TfArray) -> String {
    let mut s = String::from("j,l,x,xi,re,im,abs\n");
    let n = t.n();
    for j in 0..n {
        for l in 0..n {
            let v = t.at(j, l);
            let _ = writeln!(
                s,
                "{j},{l},{},{},{},{},{}",
                fmt_g17(t.x(j)),
                fmt_g17(t.xi(l)),
                fmt_g17(v.re),
                fmt_g17(v.im),
                fmt_g17(v.norm())
            );
        }
    }
    s
}

fn stft_cmd(ctx: &Ctx, a: FieldArgs) -> Result<Status> {
    let (f, g) = field(&a)?;
    if f.grid().dim() != 1 {
        bail!("stft: the full-grid transform needs a one-axis field");
    }
    if ctx.dry_run {
        return ctx.dry("stft");
    }
    let v = stft_full(&f, &g)?;
    let residual = stft_fundamental_identity_check(&f, &g)?;
    let p = ctx.emit("stft.csv", &tf_csv(&v))?;
    let peak = v.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("stft: n={} max|V|={:.6e} fundamental-identity={:.3e} -> {}", f.grid().n(0), peak, residual, p.display());
    Ok(Status::Ok)
}

fn wigner_cmd(ctx: &Ctx, a: FieldArgs) -> Result<Status> {
    let (f, _) = field(&a)?;
    if f.grid().dim() != 1 {
        bail!("wigner: needs a one-axis field");
    }
    if ctx.dry_run {
        return ctx.dry("wigner");
    }
    let w = wigner(&f, &f)?;
    let (m1, m2) = wigner_marginal_checks(&f, &f)?;
    let p = ctx.emit("wigner.csv", &tf_csv(&w))?;
    println!("wigner: n={} marginals=({m1:.3e}, {m2:.3e}) -> {}", f.grid().n(0), p.display());
    Ok(Status::Ok)
}

fn gabor(ctx: &Ctx, a: GaborArgs) -> Result<Status> {
    let spec = flow_spec(&a.flow)?;
    let (l, n) = (a.l.unwrap_or(16.0), a.n.unwrap_or(256));
    let (half, step) = (a.half.unwrap_or(2.0), a.step.unwrap_or(0.125));
    let (s, eps) = (a.s.unwrap_or(0.5), a.eps.unwrap_or(PI));
    GSClass::new(s, eps)?;
    if !(half > 0.0 && step > 0.0) {
        bail!("--half and --step must be positive");
    }
    let grid = Grid::line(l, n)?;
    let fine = Grid::line(l, 2 * n)?;
    if spec.matrix()?.dim() != 1 {
        bail!("gabor: the lattice is one-dimensional; use a flow with d = 1");
    }
    if ctx.dry_run {
        return ctx.dry("gabor");
    }
    let lattice = phase_lattice(half, step);
    let window = |g: &Grid| GaussianChirp::standard().sample(g);
    let base = gabor_matrix(&spec, &window(&grid), &window(&grid), &lattice, &lattice)?;
    let refined = gabor_matrix(&spec, &window(&fine), &window(&fine), &lattice, &lattice)?;
    let dec = base.decomposition.clone();
    let gms = [base, refined];
    let report = match a.delta {
        Some(d) => verify_spreading_bound_with_delta(&gms, &dec, s, eps, d)?,
        None => verify_spreading_bound(&gms, &dec, s, eps)?,
    };
    let mut mag = Vec::new();
    gms[0].write_magnitude_csv(&mut mag)?;
    ctx.emit("gabor_magnitude.csv", &String::from_utf8(mag)?)?;
    let mut margins = Vec::new();
    write_margin_csv(&gms[0], &dec, s, report.delta, &mut margins)?;
    ctx.emit("gabor_margins.csv", &String::from_utf8(margins)?)?;
    let p = ctx.emit_json("gabor.json", &report)?;
    println!(
        "gabor: route={} delta={} C={:.6e} refined={:?} pass={} -> {}",
        report.branch,
        report.delta,
        report.c,
        report.c_refined,
        report.pass,
        p.display()
    );
    Ok(status(report.pass))
}

fn read_samples(path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() >= 2 => {
                let (z, f) = v.split_at(v.len() - 1);
                out.push((z.to_vec(), f[0]));
            }
            Ok(_) => bail!("{}: line {}: expected at least two columns", path.display(), k + 1),
            Err(_) if k == 0 => continue,
            Err(e) => bail!("{}: line {}: {e}", path.display(), k + 1),
        }
    }
    Ok(out)
}

fn decay_fit(ctx: &Ctx, a: DecayFitArgs) -> Result<Status> {
    let path = require(&a.input, "input")?;
    let s = require(&a.s, "s")?;
    let samples = read_samples(&path)?;
    if ctx.dry_run {
        return ctx.dry("decay-fit");
    }
    let fit = fit_decay(&samples, s)?;
    let p = ctx.emit_json("decay_fit.json", &fit)?;
    println!("decay-fit: s={} C={:.6e} delta={:.6e} support={} -> {}", fit.s, fit.c, fit.delta, fit.support, p.display());
    Ok(Status::Ok)
}

fn confine(ctx: &Ctx, a: ConfineArgs) -> Result<Status> {
    let (s, eps) = (require(&a.s, "s")?, require(&a.eps, "eps")?);
    let (sigma_min, d) = match (a.sigma_min, &a.flow.flow, &a.flow.spec) {
        (Some(v), _, _) => (v, a.flow.d.unwrap_or(1)),
        (None, None, None) => bail!("missing required --sigma-min (or a flow)"),
        _ => {
            let spec = flow_spec(&a.flow)?;
            let (dec, _) = spec.euler()?;
            (dec.sigma_min(), dec.dim())
        }
    };
    let c = confinement_epsilon(s, eps, sigma_min, d)?;
    if ctx.dry_run {
        return ctx.dry("confine");
    }
    let report = json!({
        "s": s,
        "eps": eps,
        "sigma_min": sigma_min,
        "d": d,
        "confinement": c,
        "stft_class": stft_class_report(s, eps, sigma_min, d)?,
        "corollary": corollary_epsilon(s, eps, sigma_min, d)?,
    });
    let p = ctx.emit_json("confine.json", &report)?;
    println!("confine: branch={} eps'={} attained={} -> {}", c.branch, fmt_g17(c.eps_prime), c.attained, p.display());
    Ok(Status::Ok)
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> Result<Status> {
    let name = a.lemma.clone().unwrap_or_else(|| "all".into());
    let lemmas = if name == "all" { Lemma::all() } else { vec![Lemma::parse(&name)?] };
    let cfg = SweepConfig { trials: a.trials.unwrap_or(0), seed: a.seed.unwrap_or(SweepConfig::default().seed), ..Default::default() };
    cfg.validate()?;
    if ctx.dry_run {
        return ctx.dry("verify");
    }
    let mut any = false;
    for l in lemmas {
        let r = run_sweep(l, &cfg)?;
        any |= r.violations > 0;
        let p = ctx.emit_json(&format!("verify-{}.json", r.lemma), &r)?;
        println!(
            "verify: {} trials={} violations={} inconclusive={} worst_margin={:.3e} seed={} -> {}",
            r.lemma,
            r.trials,
            r.violations,
            r.inconclusive,
            r.worst_margin,
            r.seed,
            p.display()
        );
    }
    Ok(status(!any))
}

fn constants(ctx: &Ctx, a: ConstantsArgs) -> Result<Status> {
    let (s, eps) = (require(&a.s, "s")?, require(&a.eps, "eps")?);
    let d = a.d.unwrap_or(1);
    GSClass::new(s, eps)?;
    if d == 0 {
        bail!("--d must be positive");
    }
    if ctx.dry_run {
        return ctx.dry("constants");
    }
    let mut report = json!({
        "s": s,
        "eps": eps,
        "d": d,
        "delta_threshold_stft": delta_threshold_stft(s, eps)?,
        "delta_sd": delta_sd(s, eps, d)?,
        "psi_s": psi_s(eps, s, d)?,
        "c_eps_s": c_eps_s(eps, s)?,
    });
    if let Some(p) = a.p {
        report["angular_min_max"] = json!(angular_min_max(p, 100_000));
        if let Some(k) = a.k {
            report["combine_bounds"] = json!(combine_bounds(k, 0.0, p)?);
        }
    }
    if let Some(ca) = a.counterexample {
        report["counterexample"] = serde_json::to_value(counterexample_report(ca)?)?;
    }
    let p = ctx.emit_json("constants.json", &report)?;
    println!("constants: s={s} eps={eps} d={d} -> {}", p.display());
    Ok(Status::Ok)
}

fn spreading_plot(ctx: &Ctx, a: PlotArgs) -> Result<Status> {
    let spec = flow_spec(&a.flow)?;
    let times = match (&a.times, &a.times_alpha) {
        (Some(t), None) => parse_list::<f64>(t, "times")?,
        (None, Some(al)) => {
            let w = *spec.omega.first().ok_or_else(|| anyhow!("--times-alpha needs --omega"))?;
            parse_list::<f64>(al, "times-alpha")?.into_iter().map(|x| x * PI / w).collect()
        }
        (Some(_), Some(_)) => bail!("give either --times or --times-alpha"),
        (None, None) => bail!("missing required --times or --times-alpha"),
    };
    if ctx.dry_run {
        return ctx.dry("spreading-plot");
    }
    let frames = spreading_frames(&spec, &times)?;
    let title = format!("{:?}: unit disk under D'U", spec.kind);
    ctx.emit("spreading.svg", &render_svg(&frames, &title))?;
    let rows: Vec<Value> = frames
        .iter()
        .map(|f| {
            json!({
                "t": f.t,
                "sigma": f.sigma,
                "map": f.map,
                "major": f.major,
                "minor": f.minor,
                "distance_to_unit_disk": f.distance_to_unit_polygon(),
            })
        })
        .collect();
    let p = ctx.emit_json("spreading.json", &rows)?;
    let sig: Vec<String> = frames.iter().map(|f| format!("{:.6}", f.sigma)).collect();
    println!("spreading-plot: {} frames sigma=[{}] -> {}", frames.len(), sig.join(", "), p.display());
    Ok(Status::Ok)
}
