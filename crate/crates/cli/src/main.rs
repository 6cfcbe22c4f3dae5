//! `orderlat` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use orderlat::catalog::{self, Family};
use orderlat::codes::{balancedness_audit, CodeParams};
use orderlat::export::{self, LatticeHeader};
use orderlat::lattice;
use orderlat::residue::{self, SplittingMap};
use orderlat::search::{self, LiftContext, Sampling, SearchConfig, SearchMode, TestFunction, TestKind};
use orderlat::special;

#[derive(Parser)]
#[command(name = "orderlat", version, about = "Lattices lifted from codes over orders in division algebras")]
struct Cli {
    /// Worker threads for search and mc-average.
    #[arg(long, env = "ORDERLAT_WORKERS", global = true)]
    workers: Option<usize>,
    /// Directory receiving report.json and any other output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the available families.
    FamilyList,
    /// Derived constants of one family.
    FamilyInfo(FamilyArgs),
    /// Split prime for a family, or a prime congruent to 1 modulo m.
    PrimeFind(PrimeArgs),
    /// Balancedness of codes and det/nrd compatibility of the reduction.
    Audit(AuditArgs),
    /// Code-average of a primitive lattice sum.
    McAverage(McArgs),
    /// Search lifted lattices for a dense packing.
    Search(SearchArgs),
    /// Density targets, order bounds and effective conditions.
    Bounds(BoundsArgs),
    /// Reload a lattice file and recompute its invariants.
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Serialize)]
struct FamilyArgs {
    /// hurwitz, cyclotomic, cyclo-quat, dihedral or hurwitz-rank.
    #[arg(long)]
    family: String,
    #[arg(long)]
    m: Option<u64>,
    /// Rank of the module `O^t`.
    #[arg(long)]
    t: Option<usize>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family> {
        Ok(Family::parse(&self.family, self.m, self.t)?)
    }

    fn rank(&self) -> Result<usize> {
        let fam = self.family()?;
        match (fam.fixed_t(), self.t) {
            (Some(t), _) => Ok(t),
            (None, Some(t)) => Ok(t),
            (None, None) => bail!("--t is required for family {}", self.family),
        }
    }
}

#[derive(Args, Serialize)]
struct PrimeArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    m: Option<u64>,
    /// Smallest admissible split prime.
    #[arg(long, default_value_t = 3)]
    min_prime: u64,
    /// Search for p ≡ 1 (mod CONGRUENCE) instead of a family split prime.
    #[arg(long, conflicts_with = "family")]
    congruence: Option<u64>,
    /// Decimal lower bound for the congruence search.
    #[arg(long, requires = "congruence", conflicts_with = "effective")]
    lower: Option<String>,
    /// Start the congruence search at (m·φ(m)²)^{2φ(m)}.
    #[arg(long, requires = "congruence")]
    effective: bool,
}

#[derive(Args, Serialize)]
struct AuditArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    prime: u64,
    /// Random elements for the det/nrd check (skipped when the family does not split at the prime).
    #[arg(long, default_value_t = 10_000)]
    det_samples: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TestArg {
    Indicator,
    RogersRadial,
}

impl From<TestArg> for TestKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Indicator => TestKind::Indicator,
            TestArg::RogersRadial => TestKind::RogersRadial,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args, Serialize)]
struct McArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    prime: u64,
    #[arg(long, value_enum, default_value_t = TestArg::Indicator)]
    test: TestArg,
    /// Radius of the test function at covolume Vol(O^t).
    #[arg(long, conflicts_with = "ratio")]
    radius: Option<f64>,
    /// Choose the radius so that ∫f / (ζ(d) Vol(O^t)) equals this value.
    #[arg(long)]
    ratio: Option<f64>,
    /// Random codes to average over; all codes when omitted.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    prime: u64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    mode: ModeArg,
    /// Maximum number of codes to evaluate.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = TestArg::Indicator)]
    test: TestArg,
    /// Also write percode.csv.
    #[arg(long)]
    csv: bool,
    /// Checkpoint file, resumed from when it matches the configuration.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Also evaluate the effective conditions at this prime.
    #[arg(long)]
    prime: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Constant c in the rank condition p > c·t².
    #[arg(long, default_value_t = 1.0)]
    rank_constant: f64,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// Integer basis, one row per line.
    #[arg(long)]
    lattice: PathBuf,
    /// JSON header written next to the basis.
    #[arg(long)]
    header: PathBuf,
}

/// What a command produced, before it is written out.
struct Report {
    command: &'static str,
    config: Value,
    result: Value,
    files: Vec<(&'static str, String)>,
    exit: u8,
}

impl Report {
    fn new(command: &'static str, config: impl Serialize, result: impl Serialize) -> Result<Self> {
        Ok(Report {
            command,
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
            files: Vec::new(),
            exit: 0,
        })
    }
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn family_list() -> Result<Report> {
    let names: Vec<Value> = Family::all_names()
        .iter()
        .map(|n| {
            let needs = match *n {
                "hurwitz" => "",
                "hurwitz-rank" => "--t",
                _ => "--m",
            };
            json!({ "name": n, "requires": needs })
        })
        .collect();
    Report::new("family-list", json!({}), names)
}

fn family_info(args: FamilyArgs) -> Result<Report> {
    let fam = args.family()?;
    let split = residue::find_split_prime(&fam, 3)?;
    let mut result = json!({ "info": fam.info(), "smallest_split_prime": split.p });
    if fam.dim() > BUILD_DIM_CAP {
        result["order"] = json!(format!("not built: dimension {} exceeds {BUILD_DIM_CAP}", fam.dim()));
        return Report::new("family-info", &args, result);
    }
    let built = fam.build().with_context(|| format!("building {fam}"))?;
    result["g0_order_enumerated"] = json!(built.group.order());
    result["form"] = json!(built.form.value_int()?);
    result["discriminant"] = json!(catalog::order_discriminant(&built)?);
    Report::new("family-info", &args, result)
}

fn prime_find(args: PrimeArgs) -> Result<Report> {
    if let Some(m) = args.congruence {
        let lower = if args.effective {
            catalog::effective_prime_lower_bound(m)
        } else {
            let s = args.lower.as_deref().unwrap_or("2");
            s.parse::<BigUint>().with_context(|| format!("--lower {s} is not a decimal integer"))?
        };
        let p = catalog::find_congruence_prime(m, &lower)?;
        let result = json!({
            "p": p.to_string(),
            "offset": (&p - &lower).to_string(),
            "digits": p.to_string().len(),
            "residue_mod_m": (&p % m).to_string(),
        });
        return Report::new("prime-find", &args, result);
    }
    let Some(name) = &args.family else {
        bail!("prime-find needs --family or --congruence");
    };
    let fam = Family::parse(name, args.m, None)?;
    let split = residue::find_split_prime(&fam, args.min_prime)?;
    Report::new("prime-find", &args, split)
}

fn audit(args: AuditArgs) -> Result<Report> {
    use rand::SeedableRng;
    let fam = args.family.family()?;
    let t = args.family.rank()?;
    let seed = seed_or_random(args.seed);
    let params = CodeParams::new(fam.n(), t, args.k, args.prime)?;
    let balance = balancedness_audit(params, search::EXHAUSTIVE_CAP)?;
    let det = if fam.splits_at(args.prime) {
        let built = fam.build()?;
        let map = SplittingMap::build(&built.order, args.prime)?;
        map.certify(&built.order)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Some(residue::det_compat_audit(&built.order, &map, args.det_samples, 50, &mut rng)?)
    } else {
        None
    };
    let ok = balance.uniform && det.as_ref().map_or(true, |d| d.violations.is_empty());
    let config = json!({ "args": &args, "seed": seed });
    let mut rep = Report::new("audit", config, json!({ "balancedness": balance, "det_compat": det, "ok": ok }))?;
    if !ok {
        rep.exit = 1;
    }
    Ok(rep)
}

fn mc_average(args: McArgs, workers: Option<usize>) -> Result<Report> {
    let fam = args.family.family()?;
    let t = args.family.rank()?;
    let seed = seed_or_random(args.seed);
    let ctx = LiftContext::new(fam, t, args.k, args.prime)?;
    let kind = TestKind::from(args.test);
    let d = ctx.dim;
    let r = match (args.radius, args.ratio) {
        (Some(r), _) => r,
        (None, Some(ratio)) => {
            // ∫f scales like r^d.
            let unit = search::integral(&TestFunction::new(kind, 1.0, d, t));
            ((ratio * special::zeta(d as f64)).ln() + ctx.ln_vol - unit.ln()) / d as f64
        }
        .exp(),
        (None, None) => bail!("mc-average needs --radius or --ratio"),
    };
    let f = TestFunction::new(kind, r, d, t);
    let sampling = match args.samples {
        Some(samples) => Sampling::Random { samples },
        None => Sampling::Exhaustive,
    };
    let est = search::mc_average(&ctx, &f, sampling, seed, workers)?;
    let config = json!({ "args": &args, "seed": seed, "radius": r, "sampling": sampling });
    let result = json!({ "estimate": est, "beta": ctx.beta, "dimension": d, "code_count": ctx.params.count() });
    Report::new("mc-average", config, result)
}

fn run_search(args: SearchArgs, workers: Option<usize>) -> Result<Report> {
    let fam = args.family.family()?;
    let config = SearchConfig {
        family: fam,
        t: args.family.rank()?,
        k: args.k,
        p: args.prime,
        mode: match args.mode {
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Sampled => SearchMode::Sampled,
        },
        test: args.test.into(),
        epsilon: args.epsilon,
        seed: seed_or_random(args.seed),
        budget: args.budget,
    };
    let res = search::density_search_resumable(&config, workers, args.checkpoint.as_deref())?;
    let mut files = Vec::new();
    if args.csv {
        files.push(("percode.csv", export::outcomes_csv(&res.outcomes)));
    }
    if let Some(idx) = res.best_index {
        let lat = search::lattice_for_index(&config, idx)?;
        files.push(("lattice.txt", export::matrix_text(&lat.basis)));
        files.push(("lattice.json", serde_json::to_string_pretty(&LatticeHeader::of(&lat))? + "\n"));
    }
    if let Some(b) = &res.balanced_best {
        files.push(("balanced.txt", b.lattice.basis_text()));
    }
    let summary = json!({
        "family": fam,
        "p": config.p,
        "t": config.t,
        "k": config.k,
        "seed": config.seed,
        "mode_used": res.mode_used,
        "dimension": res.dimension,
        "g0_order": res.g0_order,
        "beta": res.beta,
        "target_radius": res.target_radius,
        "target_radius_sq_unscaled": res.target_radius_sq_unscaled,
        "target_density": res.target_density,
        "bound_minkowski_hlawka": res.bound_minkowski_hlawka,
        "codes_total": res.codes_total.map(|c| c.to_string()),
        "codes_tried": res.codes_tried,
        "hits": res.hits,
        "hit": res.hit,
        "best_index": res.best_index,
        "best": res.best,
        "best_certified": res.best_certified,
        "balanced_best": res.balanced_best.as_ref().map(|b| json!({
            "index": b.index,
            "lambda1_sq": b.lambda1_sq,
            "exceeds_radius": b.exceeds_radius,
            "density": b.density,
            "ln_det_ratio": b.ln_det_ratio,
            "minima": b.minima,
        })),
    });
    let mut rep = Report::new("search", &config, summary)?;
    rep.files = files;
    if !res.hit {
        rep.exit = 2;
    }
    Ok(rep)
}

/// Families up to this dimension are built for the order-level bounds.
const BUILD_DIM_CAP: usize = 64;

fn bounds(args: BoundsArgs) -> Result<Report> {
    let fam = args.family.family()?;
    let t = args.family.rank()?;
    let asym = catalog::asymptotic_bounds(&fam, t)?;
    let mut result = json!({ "asymptotic": asym });
    if fam.dim() > BUILD_DIM_CAP {
        result["order_level"] = json!(format!("skipped: dimension {} exceeds {BUILD_DIM_CAP}", fam.dim()));
        return Report::new("bounds", &args, result);
    }
    let built = fam.build()?;
    let disc = catalog::order_discriminant(&built)?;
    let ln_norm = lattice::ln_norm(&built.order, &built.form);
    let disc_value = disc
        .formula
        .as_deref()
        .unwrap_or(&disc.reduced_trace_pairing)
        .split('/')
        .next()
        .unwrap_or("1")
        .parse()
        .context("discriminant")?;
    let dim = built.order.dim;
    result["discriminant"] = json!(disc);
    result["order_bounds"] = json!(lattice::order_bounds(dim, ln_norm, &disc_value));
    if let Some(p) = args.prime {
        let eff = search::effective_conditions(&built, p, args.epsilon, Some(t), args.rank_constant)?;
        result["effective"] = json!(eff);
        result["bad_point_bound"] = json!(lattice::bad_point_bound(dim, built.order.n, built.order.m, ln_norm, p));
    }
    Report::new("bounds", &args, result)
}

fn verify(args: VerifyArgs) -> Result<Report> {
    let header: LatticeHeader = serde_json::from_str(
        &fs::read_to_string(&args.header).with_context(|| format!("reading {}", args.header.display()))?,
    )
    .context("parsing lattice header")?;
    let text = fs::read_to_string(&args.lattice).with_context(|| format!("reading {}", args.lattice.display()))?;
    let lat = export::load_lattice(&header, &text)?;
    let index_ok = export::index_of(&header)? == lat.index();
    let density = lat.density()?;
    let stable = match header.family {
        Some(f) => {
            let b = f.build()?;
            Some(lat.is_group_stable(&b.order, &b.group))
        }
        None => None,
    };
    let result = json!({
        "gram_det": lat.gram_det().to_string(),
        "index": lat.index().to_string(),
        "index_matches": index_ok,
        "group_stable": stable,
        "density": density,
    });
    let mut rep = Report::new("verify", &args, result)?;
    if !index_ok || stable == Some(false) {
        rep.exit = 1;
    }
    Ok(rep)
}

fn emit(rep: &Report, out: Option<&Path>) -> Result<()> {
    let body = json!({
        "schema": export::SCHEMA,
        "command": rep.command,
        "config": rep.config,
        "result": rep.result,
    });
    let text = serde_json::to_string_pretty(&body)? + "\n";
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.json"), &text)?;
        for (name, content) in &rep.files {
            fs::write(dir.join(name), content).with_context(|| format!("writing {name}"))?;
        }
    }
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    let workers = cli.workers;
    let rep = match cli.command {
        Command::FamilyList => family_list()?,
        Command::FamilyInfo(a) => family_info(a)?,
        Command::PrimeFind(a) => prime_find(a)?,
        Command::Audit(a) => audit(a)?,
        Command::McAverage(a) => mc_average(a, workers)?,
        Command::Search(a) => run_search(a, workers)?,
        Command::Bounds(a) => bounds(a)?,
        Command::Verify(a) => verify(a)?,
    };
    emit(&rep, cli.out.as_deref())?;
    Ok(rep.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
