//! Averaging and search drivers over families of lifted codes.

use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aminima;
use crate::catalog::{BuiltFamily, Family};
use crate::codes::{sample_code, Code, CodeEnumerator, CodeParams};
use crate::error::{Error, Result};
use crate::exact;
use crate::ff;
use crate::lattice::{self, DensityReport, Gram, LatticeInstance};
use crate::residue::SplittingMap;
use crate::special;

/// Largest code family searched exhaustively.
pub const EXHAUSTIVE_CAP: u128 = 1_000_000;
/// Codes per checkpoint shard.
pub const SHARD_SIZE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Indicator,
    RogersRadial,
}

/// A radial test function on `R^d`, `d = D t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: TestKind,
    pub r: f64,
    pub d: usize,
    pub t: usize,
}

impl TestFunction {
    pub fn new(kind: TestKind, r: f64, d: usize, t: usize) -> Self {
        TestFunction { kind, r, d, t }
    }

    /// Value at a point of Euclidean norm `x`.
    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            TestKind::Indicator => f64::from(u8::from(x <= self.r)),
            TestKind::RogersRadial => {
                let (d, t) = (self.d as f64, self.t as f64);
                let inner = self.r * ((1.0 - t) / d).exp();
                if x < inner {
                    t / d
                } else if x <= self.support() {
                    1.0 / d - (x / self.r).ln()
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius of the support.
    pub fn support(&self) -> f64 {
        match self.kind {
            TestKind::Indicator => self.r,
            TestKind::RogersRadial => self.r * (1.0 / self.d as f64).exp(),
        }
    }

    pub fn integral(&self) -> f64 {
        integral(self)
    }
}

/// `∫ f`: `V_d r^d` for the indicator, `V_d r^d e(1 - e^{-t}) / d` for the
/// radial function.
pub fn integral(f: &TestFunction) -> f64 {
    if f.r <= 0.0 {
        return 0.0;
    }
    let base = special::ln_ball_volume(f.d) + f.d as f64 * f.r.ln();
    let factor = match f.kind {
        TestKind::Indicator => 1.0,
        TestKind::RogersRadial => {
            std::f64::consts::E * (1.0 - (-(f.t as f64)).exp()) / f.d as f64
        }
    };
    base.exp() * factor
}

/// Radius solving the mode's volume equation at covolume `vol`.
pub fn target_radius(kind: TestKind, epsilon: f64, g0: u64, vol: f64, d: usize, t: usize) -> f64 {
    target_radius_ln(kind, epsilon, g0, vol.ln(), d, t)
}

pub fn target_radius_ln(kind: TestKind, epsilon: f64, g0: u64, ln_vol: f64, d: usize, t: usize) -> f64 {
    if epsilon >= 1.0 {
        return 0.0;
    }
    let mut rhs = (1.0 - epsilon).ln() + (g0 as f64).ln() + special::zeta(d as f64).ln() + ln_vol;
    if kind == TestKind::RogersRadial {
        let tf = t as f64;
        rhs += tf.ln() - (std::f64::consts::E * (1.0 - (-tf).exp())).ln();
    }
    ((rhs - special::ln_ball_volume(d)) / d as f64).exp()
}

/// Guaranteed density for a hit: `(1-ε)|G₀|ζ(d)/2^d`, with the extra
/// `t / (e(1-e^{-t}))` factor for the radial mode.
pub fn target_density(kind: TestKind, epsilon: f64, g0: u64, d: usize, t: usize) -> f64 {
    let mut v = (1.0 - epsilon) * g0 as f64 * special::zeta(d as f64) * (-(d as f64) * std::f64::consts::LN_2).exp();
    if kind == TestKind::RogersRadial {
        let tf = t as f64;
        v *= tf / (std::f64::consts::E * (1.0 - (-tf).exp()));
    }
    v
}

fn norm_bound(support: f64, scale: f64) -> Result<i128> {
    let b = (support / scale).powi(2);
    if !b.is_finite() || b > 1e30 {
        return Err(Error::Overflow("support radius".into()));
    }
    Ok(b.floor() as i128)
}

/// `Σ f(scale · x)` over primitive `x ∈ Λ`, both signs.
pub fn lattice_sum(f: &TestFunction, instance: &LatticeInstance, scale: f64) -> Result<f64> {
    let bound = norm_bound(f.support(), scale)?;
    let vecs = instance.short_vectors(bound, lattice::ENUM_CAP)?;
    Ok(vecs
        .iter()
        .filter(|v| LatticeInstance::is_primitive(&v.coords))
        .map(|v| 2.0 * f.value(scale * (v.norm as f64).sqrt()))
        .fold(0.0, |a, b| a + b))
}

/// Primitive vectors (both signs) with `q(x) <= bound`.
pub fn primitive_count(instance: &LatticeInstance, bound: i128) -> Result<u64> {
    instance.primitive_count(bound, lattice::ENUM_CAP)
}

/// Everything needed to lift codes of one parameter set.
#[derive(Debug, Clone)]
pub struct LiftContext {
    pub built: BuiltFamily,
    pub map: SplittingMap,
    pub params: CodeParams,
    pub form_gram: Gram,
    /// `β_p`
    pub beta: f64,
    /// `ln Vol(O^t)` for the family form.
    pub ln_vol: f64,
    pub dim: usize,
}

impl LiftContext {
    pub fn new(family: Family, t: usize, k: usize, p: u64) -> Result<Self> {
        let built = family.build()?;
        Self::from_built(built, t, k, p)
    }

    pub fn from_built(built: BuiltFamily, t: usize, k: usize, p: u64) -> Result<Self> {
        if let Some(ft) = built.family.fixed_t() {
            if ft != t {
                return Err(Error::InvalidParams(format!("{} fixes t = {ft}", built.family)));
            }
        }
        let n = built.order.n;
        let params = CodeParams::new(n, t, k, p)?;
        let map = SplittingMap::build(&built.order, p)?;
        let form_gram = built.form.gram_int()?;
        let m = built.order.m;
        let ln_vol = 0.5 * t as f64 * exact::ln_bigint(&exact::det_integer(&form_gram));
        Ok(LiftContext {
            beta: lattice::beta_scale(p, n, m, t, k),
            dim: built.order.dim * t,
            built,
            map,
            params,
            form_gram,
            ln_vol,
        })
    }

    pub fn lift(&self, code: &Code) -> Result<LatticeInstance> {
        lattice::lift_code(&self.built.order, &self.map, code, &self.built.form, Some(self.built.family))
    }

    pub fn g0(&self) -> u64 {
        self.built.group.order() as u64
    }

    pub fn form_f64(&self) -> Result<Vec<f64>> {
        Ok(self.built.form.value_int()?.iter().map(|&x| x as f64).collect())
    }
}

/// Which codes to visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Exhaustive,
    Random { samples: u64 },
}

/// Deterministic code source: enumeration order, or one RNG stream per
/// sample index.
enum CodeSource {
    All(CodeEnumerator),
    Random { params: CodeParams, seed: u64 },
}

impl CodeSource {
    fn get(&self, index: u64) -> Code {
        match self {
            CodeSource::All(e) => e.get(index as u128),
            CodeSource::Random { params, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(index);
                sample_code(*params, &mut rng)
            }
        }
    }
}

fn run_parallel<T, F>(workers: Option<usize>, range: Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| range.into_par_iter().map(f).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    /// `(ζ(d) Vol(O^t))^{-1} ∫ f`
    pub target: f64,
    pub min: f64,
    pub max: f64,
}

impl McEstimate {
    fn from_values(values: &[f64], target: f64) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n.max(1.0) + 0.0;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr: (var / n.max(1.0)).sqrt(),
            samples: values.len() as u64,
            target,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Per-code values of the primitive lattice sum at scale `β_p`.
pub fn lattice_sums(
    ctx: &LiftContext,
    f: &TestFunction,
    sampling: Sampling,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<f64>> {
    let (source, count) = match sampling {
        Sampling::Exhaustive => {
            let e = CodeEnumerator::new(ctx.params, EXHAUSTIVE_CAP)?;
            let n = e.len() as u64;
            (CodeSource::All(e), n)
        }
        Sampling::Random { samples } => (CodeSource::Random { params: ctx.params, seed }, samples),
    };
    run_parallel(workers, 0..count, |i| {
        let lat = ctx.lift(&source.get(i))?;
        lattice_sum(f, &lat, ctx.beta)
    })
}

pub fn mc_average(
    ctx: &LiftContext,
    f: &TestFunction,
    sampling: Sampling,
    seed: u64,
    workers: Option<usize>,
) -> Result<McEstimate> {
    if !ctx.params.in_search_range() {
        return Err(Error::InvalidParams(format!(
            "k = {} outside ((n-1)t, nt) for n = {}, t = {}",
            ctx.params.k, ctx.params.n, ctx.params.t
        )));
    }
    let values = lattice_sums(ctx, f, sampling, seed, workers)?;
    let target = integral(f) / (special::zeta(ctx.dim as f64) * ctx.ln_vol.exp());
    Ok(McEstimate::from_values(&values, target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub family: Family,
    pub t: usize,
    pub k: usize,
    pub p: u64,
    pub mode: SearchMode,
    pub test: TestKind,
    pub epsilon: f64,
    pub seed: u64,
    /// Maximum number of codes to evaluate.
    pub budget: Option<u64>,
}

/// What one code produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeOutcome {
    pub index: u64,
    pub code: Vec<u64>,
    pub lambda1_sq: i128,
    pub kissing: usize,
    pub density: f64,
    /// Primitive vectors (both signs) in the closed target ball.
    pub primitive_in_ball: u64,
    pub hit: bool,
    /// Exact squared A-minima (radial mode).
    pub minima_sq: Option<Vec<i128>>,
    /// `Σ_j ln(β min_j / r)` (radial mode).
    pub log_minima_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancedSummary {
    pub index: u64,
    pub lambda1_sq: f64,
    /// `λ₁(Λ̃)² > r²` after rescaling by β.
    pub exceeds_radius: bool,
    pub density: f64,
    pub ln_det_ratio: f64,
    pub minima: Vec<f64>,
    pub lattice: aminima::BalancedLattice,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub config: SearchConfig,
    /// Mode actually run (sampled when exhaustive is infeasible).
    pub mode_used: SearchMode,
    pub dimension: usize,
    pub g0_order: u64,
    pub beta: f64,
    /// Radius `r` at covolume `Vol(O^t)`.
    pub target_radius: f64,
    /// `r² / β²` in the unscaled norm of `Λ₀`.
    pub target_radius_sq_unscaled: f64,
    pub target_density: f64,
    pub bound_minkowski_hlawka: f64,
    pub codes_total: Option<u128>,
    pub codes_tried: u64,
    pub hits: u64,
    pub hit: bool,
    pub best_index: Option<u64>,
    pub best: Option<DensityReport>,
    /// The best hit's minimum exceeds the target radius in exact integers.
    pub best_certified: bool,
    pub balanced_best: Option<BalancedSummary>,
    pub outcomes: Vec<CodeOutcome>,
}

/// Search state saved between shards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: u32,
    pub config: SearchConfig,
    pub next_index: u64,
    pub outcomes: Vec<CodeOutcome>,
}

struct Searcher {
    ctx: LiftContext,
    config: SearchConfig,
    mode_used: SearchMode,
    source: CodeSource,
    total: Option<u128>,
    count: u64,
    r: f64,
    radius_sq_unscaled: f64,
    ball_bound: i128,
}

impl Searcher {
    fn new(config: &SearchConfig) -> Result<Self> {
        if !(0.0..1.0).contains(&config.epsilon) || config.epsilon == 0.0 {
            return Err(Error::InvalidParams("epsilon must lie in (0, 1)".into()));
        }
        let ctx = LiftContext::new(config.family, config.t, config.k, config.p)?;
        if !ctx.params.in_search_range() {
            return Err(Error::InvalidParams(format!(
                "k = {} outside ((n-1)t, nt) for n = {}, t = {}",
                config.k, ctx.params.n, config.t
            )));
        }
        if config.test == TestKind::RogersRadial && config.t < 2 {
            return Err(Error::InvalidParams("the radial mode needs t >= 2".into()));
        }
        let total = ctx.params.count();
        let exhaustive_ok = config.mode == SearchMode::Exhaustive
            && config.t < 3
            && ctx.dim <= lattice::SVP_DIM_CAP
            && total.is_some_and(|n| n <= EXHAUSTIVE_CAP);
        let (mode_used, source, count) = if exhaustive_ok {
            let e = CodeEnumerator::new(ctx.params, EXHAUSTIVE_CAP)?;
            let n = e.len() as u64;
            (SearchMode::Exhaustive, CodeSource::All(e), config.budget.map_or(n, |b| b.min(n)))
        } else {
            let budget = config.budget.unwrap_or(1000);
            (SearchMode::Sampled, CodeSource::Random { params: ctx.params, seed: config.seed }, budget)
        };
        let r = target_radius_ln(config.test, config.epsilon, ctx.g0(), ctx.ln_vol, ctx.dim, config.t);
        let radius_sq_unscaled = (r / ctx.beta).powi(2);
        let ball_bound = norm_bound(r, ctx.beta)?;
        Ok(Searcher { ctx, config: config.clone(), mode_used, source, total, count, r, radius_sq_unscaled, ball_bound })
    }

    fn evaluate(&self, index: u64) -> Result<CodeOutcome> {
        let code = self.source.get(index);
        let lat = self.ctx.lift(&code)?;
        let svp = lat.svp()?;
        let report = lat.density_from_min(svp.min_sq, &svp);
        let g0 = self.ctx.g0();
        let primitive_in_ball = primitive_count(&lat, self.ball_bound)?;
        if primitive_in_ball % g0 != 0 {
            return Err(Error::Invariant(format!(
                "code {index}: {primitive_in_ball} primitive vectors in the target ball, not a multiple of |G₀| = {g0}"
            )));
        }
        let (minima_sq, log_minima_margin, hit) = match self.config.test {
            TestKind::Indicator => (None, None, primitive_in_ball == 0),
            TestKind::RogersRadial => {
                let prof = aminima::successive_minima(&self.ctx.built.order, &lat)?;
                let margin: f64 = prof.minima.iter().map(|m| (self.ctx.beta * m / self.r).ln()).sum();
                let floor = self.r * ((1.0 - self.config.t as f64) / self.ctx.dim as f64).exp();
                let each = prof.minima.iter().all(|m| self.ctx.beta * m >= floor);
                (Some(prof.minima_sq), Some(margin), margin > 0.0 && each)
            }
        };
        Ok(CodeOutcome {
            index,
            code: code.flat(),
            lambda1_sq: svp.min_sq,
            kissing: svp.kissing,
            density: report.density,
            primitive_in_ball,
            hit,
            minima_sq,
            log_minima_margin,
        })
    }

    fn finish(&self, outcomes: Vec<CodeOutcome>) -> Result<SearchResult> {
        let d = self.ctx.dim;
        let g0 = self.ctx.g0();
        let best_of = |pred: &dyn Fn(&CodeOutcome) -> bool| {
            outcomes
                .iter()
                .filter(|o| pred(o))
                .max_by(|a, b| a.density.total_cmp(&b.density).then_with(|| b.index.cmp(&a.index)))
        };
        let best_outcome = best_of(&|o| o.hit).or_else(|| best_of(&|_| true));
        let mut best = None;
        let mut best_certified = false;
        if let Some(o) = best_outcome {
            let lat = self.ctx.lift(&self.source.get(o.index))?;
            let svp = lat.svp()?;
            let mut rep = lat.density_from_min(svp.min_sq, &svp);
            rep.provenance.code_index = Some(o.index as u128);
            best_certified = o.hit && svp.min_sq == o.lambda1_sq && (svp.min_sq as f64) > self.radius_sq_unscaled;
            best = Some(rep);
        }
        let balanced_best = if self.config.test == TestKind::RogersRadial {
            let cand = outcomes
                .iter()
                .filter(|o| o.hit)
                .max_by(|a, b| {
                    let ma = a.log_minima_margin.unwrap_or(f64::NEG_INFINITY);
                    let mb = b.log_minima_margin.unwrap_or(f64::NEG_INFINITY);
                    ma.total_cmp(&mb).then_with(|| b.index.cmp(&a.index))
                });
            match cand {
                Some(o) => Some(self.balance(o)?),
                None => None,
            }
        } else {
            None
        };
        let hits = outcomes.iter().filter(|o| o.hit).count() as u64;
        Ok(SearchResult {
            config: self.config.clone(),
            mode_used: self.mode_used,
            dimension: d,
            g0_order: g0,
            beta: self.ctx.beta,
            target_radius: self.r,
            target_radius_sq_unscaled: self.radius_sq_unscaled,
            target_density: target_density(self.config.test, self.config.epsilon, g0, d, self.config.t),
            bound_minkowski_hlawka: 2.0 * special::zeta(d as f64) * (-(d as f64) * std::f64::consts::LN_2).exp(),
            codes_total: self.total,
            codes_tried: outcomes.len() as u64,
            hits,
            hit: hits > 0,
            best_index: best_outcome.map(|o| o.index),
            best,
            best_certified,
            balanced_best,
            outcomes,
        })
    }

    fn balance(&self, o: &CodeOutcome) -> Result<BalancedSummary> {
        let lat = self.ctx.lift(&self.source.get(o.index))?;
        let order = &self.ctx.built.order;
        let prof = aminima::successive_minima(order, &lat)?;
        let bal = aminima::balance(order, &lat, &prof, &self.ctx.form_f64()?)?;
        let d = self.ctx.dim;
        let ln_det = exact::ln_bigint(&lat.gram_det()) + bal.ln_det_ratio;
        let ln_density = special::ln_ball_volume(d) + d as f64 / 2.0 * (bal.lambda1_sq / 4.0).ln() - 0.5 * ln_det;
        Ok(BalancedSummary {
            index: o.index,
            lambda1_sq: bal.lambda1_sq,
            exceeds_radius: bal.lambda1_sq > self.radius_sq_unscaled,
            density: ln_density.exp(),
            ln_det_ratio: bal.ln_det_ratio,
            minima: prof.minima.clone(),
            lattice: bal,
        })
    }
}

/// Evaluates codes (all of them, or a seeded sample) and reports the
/// densest lattice together with the hit status against the target.
pub fn density_search(config: &SearchConfig, workers: Option<usize>) -> Result<SearchResult> {
    density_search_resumable(config, workers, None)
}

/// As [`density_search`], saving progress every [`SHARD_SIZE`] codes to
/// `checkpoint` and resuming from it when it matches the configuration.
pub fn density_search_resumable(
    config: &SearchConfig,
    workers: Option<usize>,
    checkpoint: Option<&Path>,
) -> Result<SearchResult> {
    let s = Searcher::new(config)?;
    let mut outcomes = Vec::new();
    let mut next = 0u64;
    if let Some(path) = checkpoint {
        if path.exists() {
            let cp: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if cp.config == *config && cp.next_index <= s.count {
                next = cp.next_index;
                outcomes = cp.outcomes;
            }
        }
    }
    while next < s.count {
        let end = (next + SHARD_SIZE).min(s.count);
        outcomes.extend(run_parallel(workers, next..end, |i| s.evaluate(i))?);
        next = end;
        if let Some(path) = checkpoint {
            let cp = Checkpoint { schema: 1, config: config.clone(), next_index: next, outcomes: outcomes.clone() };
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, serde_json::to_vec(&cp)?)?;
            std::fs::rename(&tmp, path)?;
        }
    }
    s.finish(outcomes)
}

/// Evaluates the listed code indices only (used to inspect single codes).
pub fn evaluate_codes(config: &SearchConfig, indices: &[u64]) -> Result<Vec<CodeOutcome>> {
    let s = Searcher::new(config)?;
    indices.iter().map(|&i| s.evaluate(i)).collect()
}

/// Lifted lattice for one code index of a search configuration.
pub fn lattice_for_index(config: &SearchConfig, index: u64) -> Result<LatticeInstance> {
    let s = Searcher::new(config)?;
    let mut lat = s.ctx.lift(&s.source.get(index))?;
    lat.provenance.code_index = Some(index as u128);
    Ok(lat)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveReport {
    pub family: Family,
    pub p: u64,
    pub epsilon: f64,
    /// `|M|² / (|M|² - |M \ GL|²)`
    pub ratio: f64,
    pub ratio_bound: f64,
    pub condition_ratio: bool,
    /// `(n²m)² Vol(O)^{2/(mn²)} |G₀|^{-1/(mn²)}`
    pub volume_lhs: f64,
    /// `p^{1/(mn)}`
    pub volume_rhs: f64,
    pub condition_volume: bool,
    /// `volume_rhs / volume_lhs`
    pub volume_margin: f64,
    pub t: Option<usize>,
    pub rank_constant: f64,
    /// `p > c t²`
    pub condition_rank: Option<bool>,
}

/// `|M_n(F_p)|² / (|M_n(F_p)|² - |M_n(F_p) \ GL_n(F_p)|²)`.
pub fn singular_ratio(n: usize, p: u64) -> f64 {
    let pf = p as f64;
    let gl_frac: f64 = (0..n).map(|i| 1.0 - pf.powi(i as i32 - n as i32)).product();
    let s = 1.0 - gl_frac;
    1.0 / (1.0 - s * s)
}

/// Exact version of [`singular_ratio`] as a reduced fraction, when it fits.
pub fn singular_ratio_exact(n: usize, p: u64) -> Option<(u128, u128)> {
    let m = (p as u128).checked_pow((n * n) as u32)?;
    let gl = ff::gl_order(n as u32, p);
    let s = m - gl;
    let num = m.checked_mul(m)?;
    let den = num - s.checked_mul(s)?;
    let g = num_integer::gcd(num, den);
    Some((num / g, den / g))
}

pub fn effective_conditions(
    built: &BuiltFamily,
    p: u64,
    epsilon: f64,
    t: Option<usize>,
    c: f64,
) -> Result<EffectiveReport> {
    let order = &built.order;
    let (n, m) = (order.n, order.m);
    let dd = (n * n * m) as f64;
    let ratio = singular_ratio(n, p);
    let ratio_bound = 1.0 + epsilon / 3.0;
    let unit = built.unit_form()?.gram_int()?;
    let ln_vol = 0.5 * exact::ln_bigint(&exact::det_integer(&unit));
    let g0 = built.group.order() as f64;
    let volume_lhs = (2.0 * dd.ln() + 2.0 * ln_vol / dd - g0.ln() / dd).exp();
    let volume_rhs = ((p as f64).ln() / (m * n) as f64).exp();
    Ok(EffectiveReport {
        family: built.family,
        p,
        epsilon,
        ratio,
        ratio_bound,
        condition_ratio: ratio < ratio_bound,
        volume_lhs,
        volume_rhs,
        condition_volume: volume_lhs < volume_rhs,
        volume_margin: volume_rhs / volume_lhs,
        t,
        rank_constant: c,
        condition_rank: t.map(|t| p as f64 > c * (t * t) as f64),
    })
}
