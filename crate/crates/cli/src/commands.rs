use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use cq_reliability::channel::{entropy, load_channel, spectrum, ChannelError, ChannelSpec, Prior};
use cq_reliability::classical::{
    bhattacharyya_sum, diagonal_embedding, expurgated_classical_rhs, gallager_random_rhs, minimize_over_grid,
    operator_bhattacharyya, operator_gallager_bracket, pure_state_operators, DiagonalChannel,
};
use cq_reliability::exponents::binary::{binary_cross_check, binary_report};
use cq_reliability::exponents::{
    capacity, curve, expurgated_rhs, mu, region_report, zero_rate_exponent, CurveMode, ExponentError, ExtendedReal,
};
use cq_reliability::srm::{verify_expurgation, verify_random_coding, SrmError};

use crate::args::{parse_grid, BinaryArgs, ChannelArgs, ClassicalArgs, CurveArgs, Format, VerifyArgs};

/// Largest deviation accepted by the pure-state cross-check.
const CROSS_CHECK_TOL: f64 = 1e-10;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable file, parse or validation failure.
    Input(String),
    /// A numerical routine failed on valid input.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Linalg(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ExponentError> for CliError {
    fn from(e: ExponentError) -> Self {
        match e {
            ExponentError::Channel(c) => c.into(),
            ExponentError::InvalidArgument(_) | ExponentError::Domain(_) => CliError::Input(e.to_string()),
            ExponentError::Optimize(_) | ExponentError::UnboundedParameter { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SrmError> for CliError {
    fn from(e: SrmError) -> Self {
        match e {
            SrmError::Channel(c) => c.into(),
            SrmError::Exponent(x) => x.into(),
            SrmError::Linalg(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Rendered command output and whether its checks passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

/// Presentation units. Values are computed in nats.
#[derive(Clone, Copy)]
pub struct Units {
    pub bits: bool,
}

impl Units {
    fn name(self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn of(self, x: f64) -> f64 {
        if self.bits {
            x / std::f64::consts::LN_2
        } else {
            x
        }
    }

    fn extended(self, x: ExtendedReal) -> Value {
        match x {
            ExtendedReal::Finite(v) => json!(self.of(v)),
            ExtendedReal::Infinite => json!("inf"),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_channel(path: &Path) -> Result<ChannelSpec, CliError> {
    Ok(load_channel(&read(path)?)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn structured_only(format: Format, command: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Input(format!("{command} has no csv output; use --format structured")));
    }
    Ok(())
}

enum PriorChoice {
    Fixed(Prior),
    Optimize,
}

fn resolve_prior(spec: Option<&str>, a: usize, declared: Prior) -> Result<PriorChoice, CliError> {
    let prior = match spec {
        None => declared,
        Some("uniform") => Prior::uniform(a),
        Some("optimize") => return Ok(PriorChoice::Optimize),
        Some(path) => Prior::from_document(&read(Path::new(path))?)?,
    };
    prior.check_len(a)?;
    Ok(PriorChoice::Fixed(prior))
}

fn fixed_or_capacity(choice: PriorChoice, ch: &ChannelSpec) -> Result<Prior, CliError> {
    Ok(match choice {
        PriorChoice::Fixed(p) => p,
        PriorChoice::Optimize => capacity(ch)?.prior,
    })
}

pub fn cmd_capacity(args: &ChannelArgs, units: Units, format: Format) -> Result<Outcome, CliError> {
    structured_only(format, "capacity")?;
    let ch = read_channel(&args.channel)?;
    let rep = capacity(&ch)?;
    Ok(Outcome::ok(pretty(&json!({
        "capacity": units.of(rep.capacity),
        "units": units.name(),
        "prior": rep.prior.weights(),
        "search": {
            "grid_step": rep.search.grid_step,
            "lattice_points": rep.search.lattice_points,
            "lattice_value": units.of(rep.search.lattice_value),
            "refined": rep.search.refined,
        },
    }))))
}

pub fn cmd_zero_rate(args: &ChannelArgs, units: Units, format: Format) -> Result<Outcome, CliError> {
    structured_only(format, "zero-rate")?;
    let ch = read_channel(&args.channel)?;
    let rep = zero_rate_exponent(&ch)?;
    let mut doc = json!({
        "zero_rate_exponent": units.extended(rep.value),
        "units": units.name(),
        "prior": rep.prior.as_ref().map(|p| p.weights()),
        "witness": rep.witness.map(|(i, k)| [i, k]),
    });
    if let Some(search) = rep.search {
        doc["search"] = json!({
            "grid_step": search.grid_step,
            "lattice_points": search.lattice_points,
            "refined": search.refined,
        });
    }
    Ok(Outcome::ok(pretty(&doc)))
}

pub fn cmd_curve(args: &CurveArgs, units: Units, format: Format) -> Result<Outcome, CliError> {
    let ch = read_channel(&args.channel)?;
    let a = ch.alphabet_size();
    let (mode, default_rmax) = match resolve_prior(args.prior.as_deref(), a, ch.prior_or_uniform())? {
        PriorChoice::Fixed(p) => {
            let h = entropy(&spectrum(&ch, &p)?);
            (CurveMode::Prior(p), h)
        }
        PriorChoice::Optimize => (CurveMode::Envelope, capacity(&ch)?.capacity),
    };
    let rmax = args.rmax.unwrap_or(default_rmax);
    let c = curve(&ch, &mode, args.rmin, rmax, args.points)?;

    if format == Format::Csv {
        let mut out = String::from("R,E_r,E_ex,region\n");
        for p in &c.points {
            let e_ex = match p.e_ex {
                ExtendedReal::Finite(v) => format!("{:.16e}", units.of(v)),
                ExtendedReal::Infinite => "inf".to_string(),
            };
            writeln!(out, "{:.16e},{:.16e},{},{}", units.of(p.rate), units.of(p.e_r), e_ex, p.region.as_str())
                .expect("writing to a string cannot fail");
        }
        return Ok(Outcome::ok(out));
    }

    let points: Vec<Value> = c
        .points
        .iter()
        .map(|p| {
            json!({
                "rate": units.of(p.rate),
                "e_r": units.of(p.e_r),
                "e_ex": units.extended(p.e_ex),
                "region": p.region.as_str(),
                "r_region": p.r_region.as_str(),
                "ex_region": p.ex_region.as_str(),
                "ex_below_resolution": p.ex_below_resolution,
            })
        })
        .collect();
    let mut doc = json!({ "units": units.name(), "points": points });
    match &mode {
        CurveMode::Prior(p) => {
            let r = region_report(&ch, p)?;
            doc["mode"] = json!("prior");
            doc["prior"] = json!(p.weights());
            doc["knees"] = json!({
                "mu1": units.of(r.mu1),
                "mu_prime1": units.of(r.mu_prime1),
                "mu_tilde_prime1": units.of(r.mut_prime1),
                "mu_tilde1": units.of(r.mut1),
                "entropy": units.of(r.capacity_at_prior),
                "ordering": r.ordering,
            });
        }
        CurveMode::Envelope => doc["mode"] = json!("envelope"),
    }
    Ok(Outcome::ok(pretty(&doc)))
}

pub fn cmd_binary(args: &BinaryArgs, units: Units, format: Format) -> Result<Outcome, CliError> {
    structured_only(format, "binary")?;
    let rep = binary_report(args.epsilon)?;
    let check = binary_cross_check(args.epsilon)?;
    let s = rep.scalars;
    let curve = |pts: &[(f64, f64)]| pts.iter().map(|&(x, v)| json!([x, units.of(v)])).collect::<Vec<_>>();
    let eigenvalues: Vec<Value> = rep.eigenvalues.iter().map(|e| json!([e.pi, e.lambda1, e.lambda2])).collect();
    Ok(Outcome::ok(pretty(&json!({
        "epsilon": rep.epsilon,
        "units": units.name(),
        "scalars": {
            "capacity": units.of(s.capacity),
            "mu1": units.of(s.mu1),
            "mu_prime1": units.of(s.mu_prime1),
            "mu_tilde_prime1": units.of(s.mu_tilde_prime1),
            "zero_rate_exponent": units.of(s.zero_rate),
        },
        "cross_check_max_deviation": check.max_deviation,
        "eigenvalues": eigenvalues,
        "mu": curve(&rep.mu),
        "mu_tilde": curve(&rep.mu_tilde),
    }))))
}

pub fn cmd_verify(args: &VerifyArgs, format: Format) -> Result<Outcome, CliError> {
    structured_only(format, "verify")?;
    let s_grid = parse_grid(&args.s_grid).map_err(CliError::Input)?;
    let ch = read_channel(&args.channel)?;
    let prior =
        fixed_or_capacity(resolve_prior(args.prior.as_deref(), ch.alphabet_size(), ch.prior_or_uniform())?, &ch)?;
    let rc = verify_random_coding(&ch, &prior, args.code_size, args.n, args.samples, args.seed, &s_grid)?;
    let ex = args
        .r
        .map(|r| verify_expurgation(&ch, &prior, args.code_size, args.n, args.samples, args.seed, r))
        .transpose()?;
    let passed = rc.passed && ex.as_ref().is_none_or(|e| e.passed);
    Ok(Outcome {
        text: pretty(&json!({
            "random_coding": rc,
            "expurgation": ex,
            "passed": passed,
        })),
        passed,
    })
}

pub fn cmd_classical(args: &ClassicalArgs, format: Format) -> Result<Outcome, CliError> {
    let text = read(&args.channel)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))?;
    let s_grid = parse_grid(&args.s_grid).map_err(CliError::Input)?;
    let ex_grid = parse_grid(&args.ex_s_grid).map_err(CliError::Input)?;
    if doc.get("rows").is_some() {
        let dc = DiagonalChannel::from_document(&text)?;
        let a = dc.alphabet_size();
        let prior = match resolve_prior(args.prior.as_deref(), a, Prior::uniform(a))? {
            PriorChoice::Fixed(p) => p,
            PriorChoice::Optimize => {
                return Err(CliError::Input("classical mode takes a fixed prior".into()));
            }
        };
        classical_tables(&dc, &prior, args, &s_grid, &ex_grid, format)
    } else {
        structured_only(format, "classical cross-check")?;
        let ch = load_channel(&text)?;
        let prior =
            fixed_or_capacity(resolve_prior(args.prior.as_deref(), ch.alphabet_size(), ch.prior_or_uniform())?, &ch)?;
        cross_check(&ch, &prior, args, &s_grid, &ex_grid)
    }
}

fn classical_tables(
    dc: &DiagonalChannel,
    prior: &Prior,
    args: &ClassicalArgs,
    s_grid: &[f64],
    ex_grid: &[f64],
    format: Format,
) -> Result<Outcome, CliError> {
    let (m, n) = (args.code_size, args.n);
    let random: Vec<(f64, f64)> =
        s_grid.iter().map(|&s| Ok((s, gallager_random_rhs(dc, prior, m, n, s)?))).collect::<Result<_, CliError>>()?;
    let expurgated: Vec<(f64, f64)> = ex_grid
        .iter()
        .map(|&s| Ok((s, expurgated_classical_rhs(dc, prior, m, n, s)?)))
        .collect::<Result<_, CliError>>()?;
    if format == Format::Csv {
        let mut out = String::from("bound,s,rhs\n");
        for (name, rows) in [("random", &random), ("expurgated", &expurgated)] {
            for (s, v) in rows {
                writeln!(out, "{name},{s:.16e},{v:.16e}").expect("writing to a string cannot fail");
            }
        }
        return Ok(Outcome::ok(out));
    }
    let best_random = minimize_over_grid(s_grid, |s| gallager_random_rhs(dc, prior, m, n, s))?;
    let best_ex = minimize_over_grid(ex_grid, |s| expurgated_classical_rhs(dc, prior, m, n, s))?;
    let table = |rows: &[(f64, f64)]| rows.iter().map(|&(s, v)| json!({"s": s, "rhs": v})).collect::<Vec<_>>();
    Ok(Outcome::ok(pretty(&json!({
        "mode": "classical",
        "code_size": m,
        "block_length": n,
        "prior": prior.weights(),
        "random_coding": table(&random),
        "random_coding_min": best_random,
        "expurgated": table(&expurgated),
        "expurgated_min": best_ex,
    }))))
}

fn cross_check(
    ch: &ChannelSpec,
    prior: &Prior,
    args: &ClassicalArgs,
    s_grid: &[f64],
    ex_grid: &[f64],
) -> Result<Outcome, CliError> {
    let ops = pure_state_operators(ch)?;
    let a = ops.len();
    let mut bracket_dev: f64 = 0.0;
    for &s in s_grid {
        let bracket = operator_gallager_bracket(&ops, prior, s)?;
        bracket_dev = bracket_dev.max((bracket - (-mu(ch, prior, s)?).exp()).abs());
    }
    let mut overlap_dev: f64 = 0.0;
    let mut coefficients = vec![vec![0.0; a]; a];
    for i in 0..a {
        for k in 0..a {
            let b = operator_bhattacharyya(&ops[i], &ops[k]).map_err(ChannelError::from)?;
            overlap_dev = overlap_dev.max((b - ch.overlap_sq(i, k)).abs());
            coefficients[i][k] = b.max(0.0);
        }
    }
    let (m, n) = (args.code_size, args.n);
    let w = prior.weights();
    let mut rhs_dev: f64 = 0.0;
    for &s in ex_grid {
        let mut sum = 0.0;
        for i in 0..a {
            for k in 0..a {
                sum += w[i] * w[k] * coefficients[i][k].powf(1.0 / s);
            }
        }
        let operator_rhs = (4.0 * (m - 1) as f64 * sum.powi(n as i32)).powf(s);
        let reference = expurgated_rhs(ch, prior, m, n, s)?;
        rhs_dev = rhs_dev.max((operator_rhs - reference).abs() / reference.abs().max(1.0));
    }
    // commuting inputs also go through the row formulas
    let embedded = match diagonal_embedding(ch, prior)? {
        Some(dc) => {
            let mut dev: f64 = 0.0;
            for &s in ex_grid {
                let reference = bhattacharyya_sum(&dc, prior, s)?;
                let quantum = expurgated_rhs(ch, prior, 2, 1, s)?.powf(1.0 / s) / 4.0;
                dev = dev.max((reference - quantum).abs());
            }
            Some(dev)
        }
        None => None,
    };
    let max_deviation = [bracket_dev, overlap_dev, rhs_dev, embedded.unwrap_or(0.0)].into_iter().fold(0.0, f64::max);
    let passed = max_deviation < CROSS_CHECK_TOL;
    Ok(Outcome {
        text: pretty(&json!({
            "mode": "pure-state-cross-check",
            "prior": prior.weights(),
            "bracket_deviation": bracket_dev,
            "bhattacharyya_deviation": overlap_dev,
            "expurgated_rhs_deviation": rhs_dev,
            "row_embedding_deviation": embedded,
            "max_deviation": max_deviation,
            "tolerance": CROSS_CHECK_TOL,
            "passed": passed,
        })),
        passed,
    })
}
