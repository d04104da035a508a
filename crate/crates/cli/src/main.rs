use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtl_core::cache;
use qtl_core::cuspidal::{self, OperatorFamily};
use qtl_core::expr::{self, ParsedElement};
use qtl_core::io::{self, CuspidalDump, ModuleDescription, VwDescription};
use qtl_core::liealg;
use qtl_core::matrep;
use qtl_core::repn::{self, GLdGLNModule, GRepresentation};
use qtl_core::suites::{self, RunConfig, Suite};
use qtl_core::{gtilde, CycloNum, Error, ExpVec, TorusSpec};

#[derive(Parser)]
#[command(name = "qtl", version, about = "Exact computations for rational quantum tori and their cuspidal modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Torus summaries
    Torus {
        #[command(subcommand)]
        action: TorusCmd,
    },
    /// Brackets in D, W_d or G̃
    Bracket {
        #[command(subcommand)]
        action: BracketCmd,
    },
    /// Run verification suites
    Verify(VerifyArgs),
    /// Graded G̃-modules and cuspidal modules
    Module {
        #[command(subcommand)]
        action: ModuleCmd,
    },
    /// Write a matrix as a JSON grid
    Export(ExportArgs),
    /// Build or reload the G̃ structure-constant table
    Cache(CacheArgs),
}

#[derive(Args, Clone)]
struct TorusArgs {
    /// Torus spec file, e.g. {"d":2,"z":1,"k":[2]}
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in torus: e1, e2, e3, comm2
    #[arg(long)]
    preset: Option<String>,
}

impl TorusArgs {
    fn resolve(&self) -> Result<Option<TorusSpec>, Error> {
        match (&self.spec, &self.preset) {
            (Some(p), _) => Ok(Some(TorusSpec::from_json(&std::fs::read_to_string(p)?)?)),
            (None, Some(name)) => suites::preset(name).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<TorusSpec, Error> {
        self.resolve()?.ok_or_else(|| Error::InvalidInput("pass --spec FILE or --preset NAME".into()))
    }
}

#[derive(Subcommand)]
enum TorusCmd {
    Info(TorusArgs),
}

#[derive(Subcommand)]
enum BracketCmd {
    /// Evaluates [A, B]; the algebra follows from the symbols used
    Eval {
        #[command(flatten)]
        torus: TorusArgs,
        a: String,
        b: String,
        /// Work modulo filtration degree ≥ K (G̃ only)
        #[arg(long, default_value_t = 4)]
        trunc: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// A suite name, or `jacobi` together with --algebra
    target: Option<String>,
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long = "suite")]
    suites: Vec<String>,
    #[arg(long = "spec")]
    specs: Vec<PathBuf>,
    #[arg(long = "preset")]
    presets: Vec<String>,
    /// RunConfig as JSON; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    box_radius: Option<i64>,
    #[arg(long)]
    degree_bound: Option<usize>,
    #[arg(long)]
    jacobi_degree: Option<usize>,
    #[arg(long)]
    flip_sigma: bool,
    /// Report file; the JSON goes to stdout otherwise
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModuleSource {
    #[command(flatten)]
    torus: TorusArgs,
    /// G̃-module description file
    #[arg(long)]
    module: Option<PathBuf>,
    /// (V, W) description file
    #[arg(long)]
    vw: Option<PathBuf>,
    /// Built-in (V, W): natural or trivial V with the graded regular W
    #[arg(long)]
    vw_preset: Option<String>,
}

enum Source {
    Rep(TorusSpec, GRepresentation),
    Vw(TorusSpec, GLdGLNModule),
}

impl ModuleSource {
    fn load(&self) -> Result<Source, Error> {
        let given = self.torus.resolve()?;
        let pick = |embedded: Option<TorusSpec>| -> Result<TorusSpec, Error> {
            given
                .clone()
                .or(embedded)
                .ok_or_else(|| Error::InvalidInput("the file names no torus; pass --spec or --preset".into()))
        };
        if let Some(p) = &self.module {
            let desc: ModuleDescription = io::read_json(p)?;
            let spec = pick(desc.spec()?)?;
            let rep = desc.to_representation(&spec)?;
            return Ok(Source::Rep(spec, rep));
        }
        if let Some(p) = &self.vw {
            let desc: VwDescription = io::read_json(p)?;
            let spec = pick(desc.spec()?)?;
            let vw = desc.to_module(&spec)?;
            return Ok(Source::Vw(spec, vw));
        }
        if let Some(name) = &self.vw_preset {
            let spec = pick(None)?;
            let vw = match name.as_str() {
                "natural" => suites::natural_regular(&spec),
                "trivial" => suites::trivial_regular(&spec),
                _ => return Err(Error::InvalidInput(format!("unknown (V, W) preset `{name}`"))),
            };
            return Ok(Source::Vw(spec, vw));
        }
        Err(Error::InvalidInput("pass --module, --vw or --vw-preset".into()))
    }

    fn representation(&self) -> Result<(TorusSpec, GRepresentation), Error> {
        match self.load()? {
            Source::Rep(s, r) => Ok((s, r)),
            Source::Vw(s, vw) => {
                let r = repn::pullback(&s, &vw)?;
                Ok((s, r))
            }
        }
    }
}

#[derive(Args, Clone)]
struct WeightArgs {
    /// One entry of α per occurrence, in the scalar syntax (`1/3`, `z^1`, `[0,1]`); default 0
    #[arg(long, allow_hyphen_values = true)]
    alpha: Vec<String>,
    #[arg(long = "box", default_value_t = 2)]
    box_radius: i64,
}

impl WeightArgs {
    fn alpha(&self, spec: &TorusSpec) -> Result<Vec<CycloNum>, Error> {
        if self.alpha.is_empty() {
            return Ok(vec![CycloNum::zero(spec.field()); spec.d()]);
        }
        self.alpha.iter().map(|a| expr::parse_scalar_text(spec.field(), a)).collect()
    }
}

#[derive(Subcommand)]
enum ModuleCmd {
    /// Materialize a cuspidal module on a box and dump it
    Build {
        #[command(flatten)]
        source: ModuleSource,
        #[command(flatten)]
        weights: WeightArgs,
        /// Use F^α(V, W) directly instead of the functor image
        #[arg(long)]
        tensor_field: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check the G̃-module relations
    Verify {
        #[command(flatten)]
        source: ModuleSource,
        /// Check brackets up to this filtration degree (default: the cutoff)
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Split an irreducible module with trivial G̃₊ action into V ⊗ W
    Decompose {
        #[command(flatten)]
        source: ModuleSource,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Functor, coefficient extraction, and back
    Roundtrip {
        #[command(flatten)]
        source: ModuleSource,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 3)]
        degree_bound: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare the functor image of a (V, W) pair with F^α(V, W)
    Compare {
        #[command(flatten)]
        source: ModuleSource,
        #[command(flatten)]
        weights: WeightArgs,
    },
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: ModuleSource,
    /// X^n for this exponent, e.g. 1,1
    #[arg(long, allow_hyphen_values = true, conflicts_with = "key")]
    power: Option<String>,
    /// ρ of a G̃ basis symbol, e.g. "XD(1,0;1)"
    #[arg(long)]
    key: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CacheArgs {
    #[command(flatten)]
    torus: TorusArgs,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    /// Defaults to $QTL_CACHE_DIR, then .qtl-cache
    #[arg(long)]
    dir: Option<PathBuf>,
}

/// Exit status 1: the computation ran and a check failed.
struct CheckFailed(String);

enum Failure {
    Check(CheckFailed),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure::Check(CheckFailed(msg.into()))
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::InvalidSpec(_)
            | Error::InvalidInput(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::MalformedBasisKey(_)
            | Error::FieldMismatch(..)
            | Error::DimensionMismatch(_)
            | Error::InvalidModuleData(_)
            | Error::ExponentNotInR(_)
    )
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_text<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn torus_info(spec: &TorusSpec) {
    let n = spec.n();
    println!("d={}, z={}, k={:?}, L={}", spec.d(), spec.z(), spec.k(), spec.order());
    if spec.z() == 0 {
        println!("commutative torus, R=ℤ^{}", spec.d());
    } else {
        let r: Vec<String> = (0..spec.d())
            .map(|i| match spec.period(i) {
                1 => "ℤ".to_string(),
                p => format!("{p}ℤ"),
            })
            .collect();
        println!("N={n}, |Γ|={}, R = {}", n * n, r.join("×"));
    }
    let gens: Vec<String> = spec.r_generators().iter().map(|g| format!("t^{g}")).collect();
    println!("R generators: {}", spec.r_generators().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
    println!("center generators: {}", gens.join(" "));
    println!("Γ₀ classes: {}", spec.gamma0().len());
}

fn bracket_eval(spec: &TorusSpec, a: &str, b: &str, trunc: usize) -> Result<(), Failure> {
    let out = match (expr::parse_any(spec, a)?, expr::parse_any(spec, b)?) {
        (ParsedElement::D(x), ParsedElement::D(y)) => expr::format_element(&liealg::bracket_d(spec, &x, &y)?),
        (ParsedElement::Witt(x), ParsedElement::Witt(y)) => expr::format_element(&liealg::bracket_wd(&x, &y)),
        (ParsedElement::G(x), ParsedElement::G(y)) => expr::format_element(&gtilde::bracket_g(spec, &x, &y, trunc)?),
        _ => return Err(Error::InvalidInput("both elements must lie in the same algebra".into()).into()),
    };
    println!("{out}");
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(p) => io::read_json::<RunConfig>(p)?,
        None => RunConfig::default(),
    };
    let mut suites: Vec<Suite> = args.suites.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    if let Some(t) = &args.target {
        let s = match (t.as_str(), args.algebra.as_deref()) {
            ("jacobi", Some("gtilde")) => Suite::JacobiGtilde,
            ("jacobi", Some("d" | "wd")) => Suite::Brackets,
            ("jacobi", other) => {
                return Err(Error::InvalidInput(format!("--algebra must be gtilde, d or wd, got {other:?}")).into())
            }
            (name, _) => name.parse()?,
        };
        suites.push(s);
    }
    if !suites.is_empty() {
        config.suites = suites;
    }
    let mut tori = Vec::new();
    for p in &args.specs {
        tori.push(TorusSpec::from_json(&std::fs::read_to_string(p)?)?.to_file());
    }
    for name in &args.presets {
        tori.push(suites::preset(name)?.to_file());
    }
    if !tori.is_empty() {
        config.tori = tori;
    }
    if let Some(x) = args.seed {
        config.seed = x;
    }
    if let Some(x) = args.samples {
        config.samples = x;
        config.hom_samples = x;
    }
    if let Some(x) = args.box_radius {
        config.box_radius = x;
    }
    if let Some(x) = args.degree_bound {
        config.degree_bound = x;
    }
    if let Some(x) = args.jacobi_degree {
        config.jacobi_degree = x;
    }
    config.flip_sigma |= args.flip_sigma;
    let reports = suites::run_all(&config)?;
    for r in &reports {
        eprintln!("{}", r.summary());
        for f in &r.failures {
            eprintln!("  {}: {}", f.case, f.counterexample);
        }
    }
    emit(args.output.as_deref(), &suites::reports_json(&reports))?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(fail(format!("{failed} of {} suite runs failed", reports.len())));
    }
    Ok(())
}

fn module_cmd(cmd: &ModuleCmd) -> Result<(), Failure> {
    match cmd {
        ModuleCmd::Build { source, weights, tensor_field, output } => {
            let module = if *tensor_field {
                let Source::Vw(spec, vw) = source.load()? else {
                    return Err(Error::InvalidInput("--tensor-field needs --vw or --vw-preset".into()).into());
                };
                let alpha = weights.alpha(&spec)?;
                cuspidal::tensor_field_module(&spec, alpha, vw, weights.box_radius)?
            } else {
                let (spec, rep) = source.representation()?;
                let alpha = weights.alpha(&spec)?;
                cuspidal::build_module(&spec, alpha, rep, weights.box_radius)?
            };
            let dump: CuspidalDump = io::dump_module(&module)?;
            let mult = cuspidal::weight_multiplicities(&module, weights.box_radius);
            eprintln!(
                "{} weights on box {}, multiplicity {}",
                dump.weights.len(),
                weights.box_radius,
                mult.uniform().map_or("non-uniform".into(), |m| m.to_string())
            );
            emit(output.as_deref(), &json_text(&dump))
        }
        ModuleCmd::Verify { source, degree } => {
            let (spec, rep) = source.representation()?;
            let bound = degree.unwrap_or(rep.cutoff.max(1));
            let report = repn::verify_representation(&spec, &rep, bound)?;
            let comm = repn::commutant(&rep).len();
            println!("dimension {}, cutoff {}, annihilated from degree {}", rep.dim(), rep.cutoff, repn::min_annihilation_degree(&rep));
            println!("{} bracket pairs checked up to degree {bound}; commutant dimension {comm}", report.pairs_checked);
            match report.failure {
                Some(msg) => Err(fail(msg)),
                None => {
                    println!("module relations hold");
                    Ok(())
                }
            }
        }
        ModuleCmd::Decompose { source, output } => {
            let (spec, rep) = source.representation()?;
            let dec = match repn::decompose_tensor(&spec, &rep, None) {
                Ok(d) => d,
                Err(e @ (Error::NotIrreducible(_) | Error::InvalidRepresentation(_) | Error::SplittingNeedsFieldExtension(_))) => {
                    return Err(fail(e.to_string()))
                }
                Err(e) => return Err(e.into()),
            };
            eprintln!("dim V = {}, dim W = {}", dec.module.v.dim(), dec.module.w.dim());
            emit(output.as_deref(), &json_text(&VwDescription::from_module(&spec, &dec.module)))
        }
        ModuleCmd::Roundtrip { source, weights, degree_bound, output } => {
            let (spec, rep) = source.representation()?;
            let alpha = weights.alpha(&spec)?;
            let module = cuspidal::build_module(&spec, alpha.clone(), rep.clone(), weights.box_radius)?;
            let fam = OperatorFamily::from_module(&module, *degree_bound);
            let coeffs = match cuspidal::extract_coefficients(&fam, &spec, &alpha) {
                Ok(c) => c,
                Err(e @ (Error::DegreeBoundViolated(_) | Error::ConstantTermMismatch(_))) => return Err(fail(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let back = match cuspidal::coefficients_to_representation(&coeffs, &spec) {
                Ok(b) => b,
                Err(e @ Error::RelationViolated(_)) => return Err(fail(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            if let Some(p) = output {
                io::write_json(p, &ModuleDescription::from_representation(&spec, &back))?;
            }
            let same = back.space == rep.space
                && back.nonzero().count() == rep.nonzero().count()
                && back.nonzero().all(|(k, m)| rep.get(k) == Some(m));
            if same {
                println!("round trip reproduces the module ({} nonzero generators)", back.nonzero().count());
                Ok(())
            } else {
                Err(fail("recovered module differs from the input"))
            }
        }
        ModuleCmd::Compare { source, weights } => {
            let Source::Vw(spec, vw) = source.load()? else {
                return Err(Error::InvalidInput("compare needs --vw or --vw-preset".into()).into());
            };
            let alpha = weights.alpha(&spec)?;
            let r = weights.box_radius;
            let a = cuspidal::build_module(&spec, alpha.clone(), repn::pullback(&spec, &vw)?, r)?;
            let b = cuspidal::tensor_field_module(&spec, alpha, vw, r)?;
            if cuspidal::modules_equal_on_box(&a, &b, r)? {
                println!("functor image equals F^α(V, W) on box {r}");
                Ok(())
            } else {
                Err(fail(format!("functor image differs from F^α(V, W) on box {r}")))
            }
        }
    }
}

fn export(args: &ExportArgs) -> Result<(), Failure> {
    let m = if let Some(p) = &args.power {
        let spec = args.source.torus.require()?;
        let n: Vec<i64> = p
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("invalid exponent `{p}`"))))
            .collect::<Result<_, _>>()?;
        if n.len() != spec.d() {
            return Err(Error::DimensionMismatch(format!("exponent needs {} entries", spec.d())).into());
        }
        matrep::x_power(&spec, &ExpVec(n))
    } else if let Some(key) = &args.key {
        let (spec, rep) = args.source.representation()?;
        rep.rho(&expr::parse_g(&spec, key)?)
    } else {
        return Err(Error::InvalidInput("pass --power or --key".into()).into());
    };
    emit(args.output.as_deref(), &json_text(&io::matrix_to_grid(&m)))
}

fn cache_cmd(args: &CacheArgs) -> Result<(), Failure> {
    let spec = args.torus.require()?;
    let dir = cache::resolve_dir(args.dir.as_deref());
    let table = cache::structure_constants(&spec, args.max_degree, &dir)?;
    println!(
        "{:?}: {} entries, sha256 {} ({})",
        table.status,
        table.len(),
        table.file.checksum,
        table.path.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Torus { action: TorusCmd::Info(t) } => {
            torus_info(&t.require()?);
            Ok(())
        }
        Command::Bracket { action: BracketCmd::Eval { torus, a, b, trunc } } => bracket_eval(&torus.require()?, a, b, *trunc),
        Command::Verify(args) => verify(args),
        Command::Module { action } => module_cmd(action),
        Command::Export(args) => export(args),
        Command::Cache(args) => cache_cmd(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(CheckFailed(msg))) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
