use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use latqmc::algebra::{find_irreducible, Poly};
use latqmc::cbc::{cbc, default_lambda_grid, CbcOptions, CbcTarget, Method};
use latqmc::io::{format_f64, parse_space, read_vector, space_to_json, write_vector, SCHEMA_VERSION};
use latqmc::points::{digital_shift_digits, shifted_lattice_points, tent_transform, LatticeRule, PolyLatticeRule, Rule, Shift};
use latqmc::qmc::{convergence_study, integrate, BernoulliProduct, Randomization, StudyMode};
use latqmc::spaces::{Family, SpaceSpec};
use latqmc::wce::{p_alpha, poly_figure_of_merit, wce_bruteforce, wce_omega, zaremba_index, DualSearchBox};
use latqmc::weights::WeightScheme;

mod selftest;

#[derive(Parser)]
#[command(name = "latqmc", version, about = "Lattice and polynomial lattice rules for QMC integration")]
struct Cli {
    /// Worker threads (overrides QMC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Component-by-component construction.
    Cbc(CbcArgs),
    /// Print the points of a rule as CSV.
    Points(PointsArgs),
    /// Worst-case error of a rule.
    Wce(WceArgs),
    /// Zaremba index / P_alpha (lattice) or figure of merit and t-value (polynomial).
    Rho(RhoArgs),
    /// Randomized integration of the Bernoulli product test function.
    Integrate(IntegrateArgs),
    /// Convergence study over a list of point counts.
    Study(StudyArgs),
    /// Run the built-in oracle-equivalence checks.
    Selftest,
}

#[derive(Args, Clone)]
struct TargetArgs {
    /// Rank-1 lattice rule with N points.
    #[arg(long, conflicts_with = "polylattice")]
    lattice: Option<u64>,
    /// Polynomial lattice rule: base, m and optionally precision n.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    polylattice: Option<Vec<u32>>,
    /// Modulus as integer encoding of its coefficients (default: the first
    /// irreducible polynomial of degree n).
    #[arg(long = "P")]
    modulus: Option<u64>,
}

#[derive(Args, Clone)]
struct RuleArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Generating vector components.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    z: Option<Vec<u64>>,
    /// Vector file written by `cbc --out`.
    #[arg(long, conflicts_with_all = ["lattice", "polylattice", "z"])]
    vector: Option<PathBuf>,
}

#[derive(Args)]
struct CbcArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Dimension.
    #[arg(long)]
    s: usize,
    /// Space description: a JSON file or inline JSON.
    #[arg(long)]
    space: Option<String>,
    /// FFT-based search (default).
    #[arg(long, conflicts_with = "naive")]
    fast: bool,
    /// Direct quadratic-cost search.
    #[arg(long)]
    naive: bool,
    /// λ values for the theorem bound (default 1, 1.25, … below αq).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    lambda_grid: Option<Vec<f64>>,
    /// Write the generating vector here (the report still goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RandArg {
    None,
    Shift,
    DigitalShift,
    Tent,
}

impl From<RandArg> for Randomization {
    fn from(r: RandArg) -> Self {
        match r {
            RandArg::None => Randomization::None,
            RandArg::Shift => Randomization::Shift,
            RandArg::DigitalShift => Randomization::DigitalShift,
            RandArg::Tent => Randomization::Tent,
        }
    }
}

#[derive(Args)]
struct PointsArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Randomization applied to the points.
    #[arg(long, value_enum, default_value = "none")]
    randomize: RandArg,
    /// Seed for the random shifts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WceArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Space description: a JSON file or inline JSON.
    #[arg(long)]
    space: Option<String>,
    /// Also enumerate the dual lattice with |h_j| (or h_j) below this bound.
    #[arg(long)]
    hmax: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RhoArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Smoothness for P_alpha (lattice rules).
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Product weight per coordinate for the Zaremba index.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Truncation bound for the dual-lattice search.
    #[arg(long)]
    hmax: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Coefficients c_j of f(x) = Π (1 + c_j B₂(x_j)); one value is repeated.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.5")]
    coeffs: Vec<f64>,
    /// Randomization (default: shift for lattice rules, digital-shift for polynomial rules).
    #[arg(long, value_enum)]
    randomize: Option<RandArg>,
    /// Number of independent random shifts.
    #[arg(long, default_value_t = 16)]
    shifts: usize,
    /// Seed for the random shifts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyModeArg {
    Wce,
    Integrate,
}

#[derive(Args)]
struct StudyArgs {
    /// Increasing list of prime point counts (lattice rules).
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "ms")]
    sizes: Option<Vec<u64>>,
    /// Increasing list of m for polynomial rules with b^m points.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    ms: Option<Vec<u32>>,
    /// Base for --ms.
    #[arg(long, default_value_t = 2)]
    base: u32,
    /// Dimension.
    #[arg(long)]
    s: usize,
    /// Space description: a JSON file or inline JSON.
    #[arg(long)]
    space: Option<String>,
    /// Worst-case error or randomized integration of the test function.
    #[arg(long, value_enum, default_value = "wce")]
    mode: StudyModeArg,
    /// Test-function coefficients for --mode integrate.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.5")]
    coeffs: Vec<f64>,
    /// Number of independent random shifts.
    #[arg(long, default_value_t = 16)]
    shifts: usize,
    /// Seed for the random shifts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage problems exit with 1, failed computations with 2.
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<latqmc::Error> for Failure {
    fn from(e: latqmc::Error) -> Self {
        match e {
            latqmc::Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn read_text(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(mut v: Value) -> String {
    v.as_object_mut()
        .expect("reports are objects")
        .insert("schema_version".into(), json!(SCHEMA_VERSION));
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn poly_modulus(base: u32, degree: u32, given: Option<u64>) -> CliResult<Poly> {
    Ok(match given {
        Some(p) => Poly::from_int(base, p)?,
        None => find_irreducible(base, degree)?,
    })
}

fn target(t: &TargetArgs) -> CliResult<CbcTarget> {
    match (t.lattice, &t.polylattice) {
        (Some(n), None) => {
            if t.modulus.is_some() {
                return usage("--P only applies to --polylattice");
            }
            Ok(CbcTarget::Lattice { n })
        }
        (None, Some(v)) => {
            let (b, m, n) = match v.as_slice() {
                [b, m] => (*b, *m, *m),
                [b, m, n] => (*b, *m, *n),
                _ => return usage("--polylattice expects b,m or b,m,n"),
            };
            let modulus = poly_modulus(b, n, t.modulus)?;
            Ok(CbcTarget::Polynomial { modulus, m, precision: n })
        }
        _ => usage("one of --lattice or --polylattice is required"),
    }
}

fn rule(r: &RuleArgs) -> CliResult<Rule> {
    if let Some(path) = &r.vector {
        return Ok(read_vector(&read_text(path)?)?);
    }
    let z = r.z.clone().ok_or_else(|| Failure::Usage("--z or --vector is required".into()))?;
    Ok(match target(&r.target)? {
        CbcTarget::Lattice { n } => Rule::Lattice(LatticeRule::new(n, z)?),
        CbcTarget::Polynomial { modulus, m, precision } => {
            let b = modulus.base();
            let z = z.iter().map(|&c| Poly::from_int(b, c)).collect::<latqmc::Result<Vec<_>>>()?;
            Rule::Polynomial(PolyLatticeRule::new(b, modulus, m, precision, z)?)
        }
    })
}

/// Reads `--space` (file or inline JSON); defaults to Korobov α=2, p=2 for
/// lattice rules and Walsh α=2, p=∞ for polynomial rules, with γ_j = 0.9^j.
fn space(arg: &Option<String>, s: usize, walsh: bool) -> CliResult<SpaceSpec> {
    match arg {
        Some(a) => {
            let text = if a.trim_start().starts_with('{') { a.clone() } else { read_text(&PathBuf::from(a))? };
            Ok(parse_space(&text, s)?)
        }
        None => {
            let w = WeightScheme::product_geometric(0.9, s);
            Ok(if walsh {
                SpaceSpec::new(Family::Walsh, 2.0, f64::INFINITY, w)
            } else {
                SpaceSpec::new(Family::Korobov, 2.0, 2.0, w)
            })
        }
    }
}

fn rule_json(rule: &Rule) -> Value {
    match rule {
        Rule::Lattice(r) => json!({"kind": "lattice", "n": r.n_points(), "s": r.dimension(), "z": r.z()}),
        Rule::Polynomial(r) => json!({
            "kind": "polylattice",
            "base": r.base(),
            "m": r.m(),
            "precision": r.precision(),
            "modulus": r.modulus().to_int(),
            "modulus_poly": r.modulus().to_string(),
            "n_points": r.n_points(),
            "s": r.dimension(),
            "z": r.z().iter().map(Poly::to_int).collect::<Vec<_>>(),
        }),
    }
}

fn run_cbc(a: &CbcArgs) -> CliResult<()> {
    let t = target(&a.target)?;
    let sp = space(&a.space, a.s, matches!(t, CbcTarget::Polynomial { .. }))?;
    let method = if a.naive { Method::Naive } else { Method::Fast };
    let lambdas = a.lambda_grid.clone().unwrap_or_else(|| default_lambda_grid(&sp));
    let r = cbc(&t, a.s, &sp, &CbcOptions { method, lambdas })?;
    if let Some(path) = &a.out {
        fs::write(path, write_vector(&r.rule))
            .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
    }
    let text = report(json!({
        "command": "cbc",
        "method": r.method,
        "rule": rule_json(&r.rule),
        "space": space_to_json(&sp),
        "z": r.z,
        "errors": r.errors,
        "error_powers": r.error_powers,
        "thetas": r.thetas,
        "bounds": r.bounds,
        "timings_seconds": r.timings,
    }));
    emit(&text, &None)
}

fn randomized_points(rule: &Rule, how: Randomization, seed: u64) -> CliResult<Vec<Vec<f64>>> {
    let s = rule.dimension();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(match (how, rule) {
        (Randomization::None, _) => rule.points(),
        (Randomization::Shift | Randomization::Tent, Rule::Lattice(r)) => {
            let Shift::Real(d) = Shift::random_real(s, &mut rng) else { unreachable!() };
            let mut pts = shifted_lattice_points(r, &d)?;
            if how == Randomization::Tent {
                for x in pts.iter_mut().flatten() {
                    *x = tent_transform(*x)?;
                }
            }
            pts
        }
        (Randomization::DigitalShift, Rule::Polynomial(r)) => {
            let Shift::Digital { base, digits } = Shift::random_digital(s, r.precision() as usize, r.base(), &mut rng) else {
                unreachable!()
            };
            let raw: Vec<Vec<u64>> = (0..r.n_points()).map(|k| r.digit_point(k)).collect();
            let scale = r.scale() as f64;
            digital_shift_digits(&raw, &digits, base)?
                .into_iter()
                .map(|row| row.into_iter().map(|y| y as f64 / scale).collect())
                .collect()
        }
        _ => {
            return Err(latqmc::Error::IncompatibleRandomization(
                "shift needs a lattice rule, digital-shift a polynomial rule".into(),
            )
            .into())
        }
    })
}

fn run_points(a: &PointsArgs) -> CliResult<()> {
    let r = rule(&a.rule)?;
    let pts = randomized_points(&r, a.randomize.into(), a.seed)?;
    let mut text = String::new();
    for row in pts {
        text.push_str(&row.iter().map(|&x| format_f64(x)).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    emit(&text, &a.out)
}

fn run_wce(a: &WceArgs) -> CliResult<()> {
    let r = rule(&a.rule)?;
    let sp = space(&a.space, r.dimension(), matches!(r, Rule::Polynomial(_)))?;
    let e = wce_omega(&r, &sp)?;
    let mut v = json!({
        "command": "wce",
        "rule": rule_json(&r),
        "space": space_to_json(&sp),
        "wce": e,
    });
    if let Some(h) = a.hmax {
        let bf = wce_bruteforce(&r, &sp, DualSearchBox::new(h)?)?;
        v["bruteforce"] = json!({
            "h_max": h,
            "value": bf.value,
            "tail": bf.tail,
            "dual_count": bf.dual_count,
        });
    }
    emit(&report(v), &a.out)
}

fn run_rho(a: &RhoArgs) -> CliResult<()> {
    let r = rule(&a.rule)?;
    let v = match &r {
        Rule::Lattice(l) => {
            let bx = match a.hmax {
                Some(h) => DualSearchBox::new(h)?,
                None => DualSearchBox::default_for(&r),
            };
            let z = zaremba_index(l, &WeightScheme::product_constant(a.gamma, l.dimension()), bx)?;
            let pa = p_alpha(l, a.alpha, bx)?;
            json!({
                "command": "rho",
                "rule": rule_json(&r),
                "h_max": bx.h_max,
                "zaremba_rho": z.rho,
                "zaremba_argmin": z.argmin,
                "alpha": a.alpha,
                "p_alpha": pa,
            })
        }
        Rule::Polynomial(p) => {
            let f = poly_figure_of_merit(p)?;
            json!({
                "command": "rho",
                "rule": rule_json(&r),
                "rho": f.rho,
                "t_value": f.t_value,
                "argmin": f.argmin,
            })
        }
    };
    emit(&report(v), &a.out)
}

fn test_function(coeffs: &[f64], s: usize) -> CliResult<BernoulliProduct> {
    Ok(BernoulliProduct::new(match coeffs.len() {
        1 => vec![coeffs[0]; s],
        n if n == s => coeffs.to_vec(),
        n => return usage(format!("--coeffs has {n} entries for dimension {s}")),
    }))
}

fn run_integrate(a: &IntegrateArgs) -> CliResult<()> {
    let r = rule(&a.rule)?;
    let f = test_function(&a.coeffs, r.dimension())?;
    let how = a.randomize.map(Randomization::from).unwrap_or(match r {
        Rule::Lattice(_) => Randomization::Shift,
        Rule::Polynomial(_) => Randomization::DigitalShift,
    });
    let est = integrate(&|x: &[f64]| f.eval(x), &r, how, a.shifts, a.seed)?;
    let v = json!({
        "command": "integrate",
        "rule": rule_json(&r),
        "randomization": how,
        "coeffs": f.c,
        "exact": f.integral(),
        "estimate": est,
        "error": (est.mean - f.integral()).abs(),
    });
    emit(&report(v), &a.out)
}

fn run_study(a: &StudyArgs) -> CliResult<()> {
    let (targets, walsh) = match (&a.sizes, &a.ms) {
        (Some(ns), None) => (ns.iter().map(|&n| CbcTarget::Lattice { n }).collect::<Vec<_>>(), false),
        (None, Some(ms)) => (
            ms.iter()
                .map(|&m| Ok(CbcTarget::Polynomial { modulus: find_irreducible(a.base, m)?, m, precision: m }))
                .collect::<CliResult<Vec<_>>>()?,
            true,
        ),
        _ => return usage("one of --sizes or --ms is required"),
    };
    let sp = space(&a.space, a.s, walsh)?;
    let f = test_function(&a.coeffs, a.s)?;
    let eval = |x: &[f64]| f.eval(x);
    let mode = match a.mode {
        StudyModeArg::Wce => StudyMode::WorstCase,
        StudyModeArg::Integrate => StudyMode::Integration {
            f: &eval,
            exact: f.integral(),
            randomization: if walsh { Randomization::DigitalShift } else { Randomization::Shift },
            shifts: a.shifts,
            seed: a.seed,
        },
    };
    let st = convergence_study(&sp, &mode, &targets, a.s)?;
    if let Some(path) = &a.csv {
        let mut text = String::from("n,error\n");
        for row in &st.rows {
            text.push_str(&format!("{},{}\n", row.n, format_f64(row.error)));
        }
        fs::write(path, text).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
    }
    let v = json!({
        "command": "study",
        "space": space_to_json(&sp),
        "s": a.s,
        "rows": st.rows,
        "slope": st.slope,
        "degenerate": st.degenerate,
    });
    emit(&report(v), &a.out)
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("QMC_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("QMC_THREADS={v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return usage("thread count must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Compute(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Cbc(a) => run_cbc(a),
        Command::Points(a) => run_points(a),
        Command::Wce(a) => run_wce(a),
        Command::Rho(a) => run_rho(a),
        Command::Integrate(a) => run_integrate(a),
        Command::Study(a) => run_study(a),
        Command::Selftest => {
            if selftest::run() {
                Ok(())
            } else {
                Err(Failure::Compute("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: latqmc <cbc|points|wce|rho|integrate|study|selftest> [options]  (see --help)");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
