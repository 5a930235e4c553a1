//! The lemma-verification harness: a registry of oracle suites, each able to
//! enumerate or sample its instance space and to replay a single instance.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::time::{Duration, Instant};

use creature_core::atoms::split_j;
use creature_core::compound::{glue_purely_stronger, compound_norm, restrict, union_creature, unhalve, CompoundCreature};
use creature_core::counting::{combi_lower_bound, combi_quotient, m_epsilon, nor_div, nor_div_denominator, LognorSpec};
use creature_core::exactnum::{binomial_u64, BigNat, NormValue, Rational};
use creature_core::frame::gen::{
    algebra_config, algebra_frame, full_creature, random_condition, random_possibility, random_strengthening, unhalving_config, unhalving_frame,
    unhalving_instance,
};
use creature_core::frame::toy::ToyConfig;
use creature_core::frame::{leq_check, poss_set, slalom_decode, slalom_encode, wedge, ConditionPrefix, Frame, Index, IndexType, PossVariant, Sublevel};
use creature_core::par;
use creature_core::sacks::{fat_nodes, homogenize_cube, FiniteTree};
use creature_core::subatoms::{check_bigness, BignessMode, Subatom};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::doc::Node;
use crate::error::{usage, CliError};
use crate::spec::{self, fmt_rational, ConditionSpec, CreatureSpec, FamilySpec, FrameSpec, JobSpec};

/// `--key value` pairs and bare `--flag`s following the lemma name.
#[derive(Debug, Clone, Default)]
pub struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(raw: &[String]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        let mut it = raw.iter().peekable();
        while let Some(a) = it.next() {
            let key = a.strip_prefix("--").ok_or_else(|| usage(format!("expected `--key`, got `{a}`")))?;
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => match it.peek() {
                    Some(v) if !v.starts_with("--") => (key.to_string(), it.next().expect("peeked").clone()),
                    _ => (key.to_string(), "true".to_string()),
                },
            };
            if map.insert(key.clone(), value).is_some() {
                return Err(usage(format!("--{key} given twice")));
            }
        }
        Ok(Params { map })
    }

    pub fn from_job(job: &JobSpec) -> Self {
        Params { map: job.params.iter().cloned().collect() }
    }

    pub fn take_global(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn known(&self, keys: &[&str]) -> Result<(), CliError> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(usage(format!("unknown parameter --{k}; this lemma takes {}", list(keys)))),
            None => Ok(()),
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.map.get(key) {
            Some(v) => v.parse().map_err(|_| usage(format!("--{key}: cannot parse `{v}`"))),
            None => Ok(default),
        }
    }

    fn rational(&self, key: &str, default: Rational) -> Result<Rational, CliError> {
        match self.map.get(key) {
            Some(v) => Ok(spec::rational(v)?),
            None => Ok(default),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.get(key, false)
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }
}

fn list(keys: &[&str]) -> String {
    if keys.is_empty() {
        return "no parameters".into();
    }
    keys.iter().map(|k| format!("--{k}")).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone)]
pub struct Ctx {
    pub seed: u64,
}

impl Ctx {
    fn rng(&self, i: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// What a suite reports before timing is attached.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub instances: u64,
    pub exhaustive: bool,
    pub sampled: bool,
    pub counterexamples: Vec<JobSpec>,
    pub failures: u64,
    pub notes: Vec<String>,
}

impl Outcome {
    fn absorb(&mut self, found: impl IntoIterator<Item = Option<JobSpec>>) {
        for f in found {
            self.instances += 1;
            if let Some(job) = f {
                self.failures += 1;
                if self.counterexamples.len() < MAX_REPORTED {
                    self.counterexamples.push(job);
                }
            }
        }
    }
}

const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub lemma: String,
    pub outcome: Outcome,
    pub seed: Option<u64>,
    pub runtime: Duration,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.outcome.failures == 0
    }

    pub fn to_nodes(&self) -> Vec<Node> {
        let o = &self.outcome;
        let mut v = Node::new("verdict")
            .arg(&self.lemma)
            .child(Node::new("result").arg(if self.passed() { "pass" } else { "fail" }))
            .child(Node::new("mode").arg(if o.exhaustive { "exhaustive" } else { "sampled" }))
            .child(Node::new("instances").arg(o.instances));
        if let Some(s) = self.seed {
            v = v.child(Node::new("seed").arg(s));
        }
        v = v.child(Node::new("counterexamples").arg(o.failures)).child(Node::new("runtime_ms").arg(self.runtime.as_millis()));
        let mut out = vec![v];
        out.extend(o.counterexamples.iter().map(|j| {
            let mut j = j.clone();
            j.seed = j.seed.or(self.seed);
            j.to_node()
        }));
        out
    }
}

type RunFn = fn(&Params, &Ctx) -> Result<Outcome, CliError>;
type ReplayFn = fn(&JobSpec) -> Result<Option<String>, CliError>;

pub struct Lemma {
    pub id: &'static str,
    pub about: &'static str,
    pub keys: &'static [&'static str],
    run: RunFn,
    replay: ReplayFn,
}

pub fn registry() -> &'static [Lemma] {
    &REGISTRY
}

static REGISTRY: [Lemma; 13] = [
    Lemma { id: "splitJ", about: "disjoint refinements with mu-drop at most 1", keys: &["ell", "J", "count", "exhaustive-small", "limit"], run: split_run, replay: split_replay },
    Lemma { id: "bigness", about: "B-bigness of a subatomic family", keys: &["family", "I", "b", "B", "poss", "base", "divisor", "plain", "colorings"], run: bigness_run, replay: bigness_replay },
    Lemma { id: "ramsey", about: "homogeneous sets of splitting size n in colored cubes", keys: &["j", "n", "c", "count", "limit"], run: ramsey_run, replay: ramsey_replay },
    Lemma { id: "union", about: "union of creatures keeps half the norm minus one", keys: &["count"], run: union_run, replay: union_replay },
    Lemma { id: "mepsilon", about: "M(delta, ell) heavy sets contain ell with a heavy intersection", keys: &["delta", "ell", "omega", "count"], run: meps_run, replay: meps_replay },
    Lemma { id: "nordiv", about: "removing the covers of a half-sized set drops nor_div by at most 1", keys: &["I", "b", "samples", "count", "limit"], run: nordiv_run, replay: nordiv_replay },
    Lemma { id: "lognor", about: "lognor with identity oracles is monotone and 2-big", keys: &["x"], run: lognor_run, replay: lognor_replay },
    Lemma { id: "combi", about: "binom(2Nk,N)/binom(Nk,N) >= (2-1/k)^N", keys: &["N", "k"], run: combi_run, replay: combi_replay },
    Lemma { id: "gluestronger", about: "gluing purely stronger creatures keeps the least norm", keys: &["count"], run: stronger_run, replay: stronger_replay },
    Lemma { id: "fatnodes", about: "measure-dense trees have many fat nodes", keys: &["depth", "eps", "count"], run: fat_run, replay: fat_replay },
    Lemma { id: "unhalving", about: "unhalving restores large norms below a halved condition", keys: &["count"], run: unhalving_run, replay: unhalving_replay },
    Lemma { id: "slalom", about: "slalom codes decode to the encoded sequence", keys: &["count", "len", "max"], run: slalom_run, replay: slalom_replay },
    Lemma { id: "conditions", about: "the order on conditions is reflexive and transitive; wedge strengthens", keys: &["count"], run: conditions_run, replay: conditions_replay },
];

pub fn find(id: &str) -> Result<&'static Lemma, CliError> {
    REGISTRY
        .iter()
        .find(|l| l.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| usage(format!("unknown lemma `{id}`; known: {}", REGISTRY.iter().map(|l| l.id).collect::<Vec<_>>().join(", "))))
}

pub fn run(id: &str, params: &Params, ctx: &Ctx) -> Result<Verdict, CliError> {
    let lemma = find(id)?;
    params.known(lemma.keys)?;
    let start = Instant::now();
    let outcome = (lemma.run)(params, ctx)?;
    let seed = outcome.sampled.then_some(ctx.seed);
    Ok(Verdict { lemma: lemma.id.to_string(), outcome, seed, runtime: start.elapsed() })
}

/// Re-checks the instance stored in a job; `Some(detail)` if it still fails.
pub fn replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    (find(&job.lemma)?.replay)(job)
}

fn job(lemma: &str, p: &[(&str, String)]) -> JobSpec {
    p.iter().fold(JobSpec::new(lemma), |j, (k, v)| j.param(k, v))
}

fn data_nums(job: &JobSpec, key: &str) -> Result<Vec<Vec<u64>>, CliError> {
    job.data.iter().filter(|n| n.key == key).map(|n| Ok(spec::nums(&n.args)?)).collect()
}

fn data_one(job: &JobSpec, key: &str) -> Result<Vec<u64>, CliError> {
    data_nums(job, key)?.pop().ok_or_else(|| usage(format!("job needs a `{key}` entry")))
}

fn frame_of(job: &JobSpec) -> Result<Frame, CliError> {
    let doc = spec::SpecDocument::from_nodes(&job.data.iter().filter(|n| n.key == "frame").cloned().collect::<Vec<_>>())?;
    doc.frame()
}

fn norm(frame: &Frame, c: &CompoundCreature) -> Result<NormValue, CliError> {
    Ok(compound_norm(frame, c)?.total)
}

// splitJ ---------------------------------------------------------------

fn split_check(ell: u64, sets: &[Vec<u64>]) -> Result<Option<String>, CliError> {
    let out = split_j(ell, sets)?;
    let cap = 3u64.pow(ell as u32 + 1);
    let mut seen = BTreeSet::new();
    for (k, (a, b)) in sets.iter().zip(&out).enumerate() {
        let a: BTreeSet<u64> = a.iter().copied().collect();
        if !b.iter().all(|x| a.contains(x)) {
            return Ok(Some(format!("output {k} leaves its input")));
        }
        if !b.iter().all(|&x| seen.insert(x)) {
            return Ok(Some(format!("output {k} meets an earlier output")));
        }
        if (a.len() as u64).max(1) > cap * (b.len() as u64).max(1) {
            return Ok(Some(format!("output {k}: |A| = {} but |B| = {}", a.len(), b.len())));
        }
    }
    Ok(None)
}

fn split_job(ell: u64, sets: &[Vec<u64>]) -> JobSpec {
    sets.iter().fold(job("splitJ", &[("ell", ell.to_string())]), |j, s| j.data(Node::new("set").args(s)))
}

fn split_instance(ell: u64, sets: &[Vec<u64>]) -> Result<Option<JobSpec>, CliError> {
    Ok(split_check(ell, sets)?.map(|_| split_job(ell, sets)))
}

/// Calls `f` with every vector of `parts` naturals summing to at most `total`.
fn bounded_vectors(parts: usize, total: u64, f: &mut dyn FnMut(&[u64]) -> Result<(), CliError>) -> Result<(), CliError> {
    fn go(parts: usize, left: u64, v: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> Result<(), CliError>) -> Result<(), CliError> {
        if v.len() == parts {
            return f(v);
        }
        for x in 0..=left {
            v.push(x);
            go(parts, left - x, v, f)?;
            v.pop();
        }
        Ok(())
    }
    go(parts, total, &mut Vec::new(), f)
}

/// Sets with the given Venn-region sizes; region `r` holds the points lying
/// in exactly the sets of the bitmask `r + 1`.
fn realize(k: usize, regions: &[u64]) -> Vec<Vec<u64>> {
    let mut sets = vec![Vec::new(); k];
    let mut next = 0;
    for (r, &size) in regions.iter().enumerate() {
        for _ in 0..size {
            for (i, s) in sets.iter_mut().enumerate() {
                if (r + 1) >> i & 1 == 1 {
                    s.push(next);
                }
            }
            next += 1;
        }
    }
    sets
}

fn split_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let ell: u64 = p.get("ell", 3)?;
    let j: u64 = p.get("J", 27)?;
    let limit: u64 = p.get("limit", 10_000_000)?;
    if ell > 8 || j == 0 {
        return Err(usage("need ell <= 8 and J >= 1"));
    }
    let mut out = Outcome::default();
    if p.flag("exhaustive-small")? {
        if j > 27 {
            return Err(usage("--exhaustive-small needs J <= 27"));
        }
        out.exhaustive = true;
        let cap = 3u64.pow(ell as u32 + 1);
        if j <= cap {
            // every set fits under 3^(ell+1): only the sizes matter, since each output may be empty
            let total: u64 = (1..=ell + 1).map(|k| (j + 1).saturating_pow(k as u32)).sum();
            if total > limit {
                return Err(CliError::Budget(format!("{total} size vectors exceed --limit {limit}")));
            }
            for k in 1..=ell as usize + 1 {
                let count = (j + 1).pow(k as u32);
                let found = par::map_range(count, |code| {
                    let sets: Vec<Vec<u64>> = (0..k).map(|i| (0..code / (j + 1).pow(i as u32) % (j + 1)).collect()).collect();
                    split_instance(ell, &sets)
                });
                out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
            }
            out.notes.push("all sets fit under 3^(ell+1), so size vectors cover every instance".into());
        } else {
            for k in 1..=ell as usize + 1 {
                let regions = (1usize << k) - 1;
                let mut found = Vec::new();
                bounded_vectors(regions, j, &mut |v| {
                    found.push(split_instance(ell, &realize(k, v))?);
                    if found.len() as u64 > limit {
                        return Err(CliError::Budget(format!("more than {limit} region profiles")));
                    }
                    Ok(())
                })?;
                out.absorb(found);
            }
            out.notes.push("every Venn-region size profile of up to ell+1 sets".into());
        }
    } else {
        let count: u64 = p.get("count", 1000)?;
        out.sampled = true;
        let found = par::map_range(count, |i| {
            let mut rng = ctx.rng(i);
            let k = rng.gen_range(1..=ell as usize + 1);
            let sets: Vec<Vec<u64>> = (0..k)
                .map(|_| {
                    let d: f64 = rng.gen_range(0.05..1.0);
                    (0..j).filter(|_| rng.gen_bool(d)).collect()
                })
                .collect();
            split_instance(ell, &sets)
        });
        out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    }
    Ok(out)
}

fn split_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    split_check(job.get_num("ell")?, &data_nums(job, "set")?)
}

// bigness ----------------------------------------------------------------

fn family_of(p: &Params) -> Result<(FamilySpec, u64), CliError> {
    let kind = p.str("family").unwrap_or("nm");
    let b: u64 = p.get("b", 2)?;
    let f = if kind == "counting" {
        FamilySpec::Counting { poss: p.get("poss", 8)?, base: p.get("base", 2)?, divisor: p.rational("divisor", Rational::one())? }
    } else {
        FamilySpec::from_args(&[kind.to_string(), p.get::<u32>("I", 2)?.to_string(), b.to_string()])?
    };
    Ok((f, p.get("B", b)?))
}

fn family_params(f: &FamilySpec, colors: u64, plain: bool) -> Vec<(&'static str, String)> {
    let a = f.to_args();
    let mut v = vec![("family", a[0].clone())];
    if let FamilySpec::Counting { .. } = f {
        v.extend([("poss", a[1].clone()), ("base", a[2].clone()), ("divisor", a[3].clone())]);
    } else {
        v.extend([("I", a[1].clone()), ("b", a[2].clone())]);
    }
    v.push(("B", colors.to_string()));
    if plain {
        v.push(("plain", "true".into()));
    }
    v
}

fn bigness_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (f, colors) = family_of(p)?;
    let plain = p.flag("plain")?;
    let fam = f.build()?;
    let mode = if plain { BignessMode::Plain } else { BignessMode::Strong };
    let v = check_bigness(fam.as_ref(), colors, mode, None, p.get("colorings", 1 << 16)?, ctx.seed)?;
    let params = family_params(&f, colors, plain);
    let found = v.counterexamples.iter().map(|c| {
        Some(job("bigness", &params).data(Node::new("subatom").args(c.subatom.poss())).data(Node::new("coloring").args(&c.coloring)))
    });
    let mut out = Outcome { exhaustive: v.exhaustive, sampled: !v.exhaustive, ..Outcome::default() };
    out.absorb(found);
    out.instances = v.colorings_checked;
    out.notes.push(format!("{} subatoms", v.subatoms_checked));
    Ok(out)
}

fn bigness_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let p = Params::from_job(job);
    let (f, colors) = family_of(&p)?;
    let fam = f.build()?;
    let x = Subatom::new(data_one(job, "subatom")?)?;
    let coloring = data_one(job, "coloring")?;
    if coloring.len() != x.len() {
        return Err(usage("coloring length differs from the subatom size"));
    }
    let drop = if p.flag("plain")? { Rational::one() } else { Rational::new(1.into(), colors.into()) };
    let target = fam.norm(&x)?.sub_rational(drop);
    for hue in 0..colors {
        let class: Vec<u64> = x.poss().iter().zip(&coloring).filter(|(_, &c)| c == hue).map(|(&a, _)| a).collect();
        if class.is_empty() {
            continue;
        }
        let candidates: Vec<Vec<u64>> = if fam.monotone() || class.len() > 16 {
            vec![class]
        } else {
            (1..1u64 << class.len()).map(|m| class.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &a)| a).collect()).collect()
        };
        for y in candidates {
            if fam.norm(&Subatom::new(y)?)?.ge(&target)? {
                return Ok(None);
            }
        }
    }
    Ok(Some("no monochromatic subatom keeps the norm".into()))
}

// ramsey -------------------------------------------------------------------

/// Splitting size of a set of `d`-bit codes, bit `i` being the turn at level `i`.
fn splitting_size(set: &[u64], level: u32, d: u32) -> i64 {
    if set.is_empty() {
        return i64::MIN / 2;
    }
    if level == d {
        return 0;
    }
    let (a, b): (Vec<u64>, Vec<u64>) = set.iter().partition(|&&x| x >> level & 1 == 0);
    let (sa, sb) = (splitting_size(&a, level + 1, d), splitting_size(&b, level + 1, d));
    sa.max(sb).max(1 + sa.min(sb))
}

fn ramsey_check(n: u64, c: u64, colors: &[u64]) -> Option<String> {
    let d = (n * c) as u32;
    let color = |pt: &[u64]| colors[pt[0] as usize];
    match homogenize_cube(1, n, c, &color) {
        Err(e) => Some(e.to_string()),
        Ok((sets, hue)) => {
            let set = &sets[0];
            if !set.iter().all(|&x| colors[x as usize] == hue) {
                Some("returned set is not monochromatic".into())
            } else if splitting_size(set, 0, d) < n as i64 {
                Some(format!("splitting size {} < {n}", splitting_size(set, 0, d)))
            } else {
                None
            }
        }
    }
}

fn ramsey_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (j, n, c): (u64, u64, u64) = (p.get("j", 1)?, p.get("n", 1)?, p.get("c", 2)?);
    if j != 1 {
        return Err(usage("only j = 1 cubes are enumerable"));
    }
    if n == 0 || c < 2 || n * c > 6 {
        return Err(usage("need n >= 1, c >= 2 and n c <= 6"));
    }
    let points = 1u64 << (n * c);
    let total = (c as f64).powf(points as f64);
    let limit: u64 = p.get("limit", 1 << 24)?;
    let mut out = Outcome::default();
    let decode = |code: u64| {
        let mut k = code;
        (0..points)
            .map(|_| {
                let v = k % c;
                k /= c;
                v
            })
            .collect::<Vec<u64>>()
    };
    let make = |colors: Vec<u64>| {
        ramsey_check(n, c, &colors).map(|_| job("ramsey", &[("n", n.to_string()), ("c", c.to_string())]).data(Node::new("coloring").args(&colors)))
    };
    if total <= limit as f64 {
        out.exhaustive = true;
        out.absorb(par::map_range(total as u64, |code| make(decode(code))));
    } else {
        out.sampled = true;
        out.absorb(par::map_range(p.get("count", 10_000)?, |i| {
            let mut rng = ctx.rng(i);
            make((0..points).map(|_| rng.gen_range(0..c)).collect())
        }));
    }
    Ok(out)
}

fn ramsey_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let (n, c): (u64, u64) = (job.get_num("n")?, job.get_num("c")?);
    let colors = data_one(job, "coloring")?;
    if colors.len() as u64 != 1 << (n * c) || colors.iter().any(|&x| x >= c) {
        return Err(usage("coloring does not fit the cube"));
    }
    Ok(ramsey_check(n, c, &colors))
}

// union --------------------------------------------------------------------

fn union_frame_spec() -> FrameSpec {
    FrameSpec::from(&ToyConfig { height: 7, j_count: 54, mu_param: 3, nm_len: 6, maxposs: Some(1), ..ToyConfig::default() })
}

fn ix(id: u32, ty: IndexType) -> Index {
    Index::new(id, ty)
}

fn union_check(frame: &Frame, c1: &CompoundCreature, c2: &CompoundCreature) -> Result<Option<String>, CliError> {
    let u = union_creature(frame, c1, c2)?;
    let (n1, n2, nu) = (norm(frame, c1)?, norm(frame, c2)?, norm(frame, &u)?);
    let x = if n1.ge(&n2)? { n2 } else { n1 };
    if !nu.ge(&x.scale(Rational::new(1.into(), 2.into())).sub_rational(Rational::one()))? {
        return Ok(Some(format!("union norm {nu} below x/2 - 1 for x = {x}")));
    }
    let back = restrict(frame, &u, c1.supp())?;
    if !norm(frame, &back)?.ge(&nu)? {
        return Ok(Some("restriction of the union lowered the norm".into()));
    }
    Ok(None)
}

fn union_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let fs = union_frame_spec();
    let frame = fs.build()?;
    let a: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let b: BTreeSet<Index> = [ix(1, IndexType::Sk), ix(1, IndexType::Nm), ix(0, IndexType::Cn)].into();
    let found = par::map_range(p.get("count", 20)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let c1 = full_creature(&frame, &mut rng, 4, 6, &a)?;
        let c2 = full_creature(&frame, &mut rng, 4, 6, &b)?;
        Ok(union_check(&frame, &c1, &c2)?.map(|_| {
            JobSpec::new("union")
                .data(fs.to_node())
                .data(CreatureSpec::from_creature(&c1).to_node())
                .data(CreatureSpec::from_creature(&c2).to_node())
        }))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn creatures_in(job: &JobSpec, frame: &Frame) -> Result<Vec<CompoundCreature>, CliError> {
    let doc = spec::SpecDocument::from_nodes(&job.data.iter().filter(|n| n.key == "creature").cloned().collect::<Vec<_>>())?;
    doc.creatures().iter().map(|c| c.build(frame)).collect()
}

fn union_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let frame = frame_of(job)?;
    let cs = creatures_in(job, &frame)?;
    if cs.len() != 2 {
        return Err(usage("a union job holds two creatures"));
    }
    union_check(&frame, &cs[0], &cs[1])
}

// mepsilon -----------------------------------------------------------------

fn meps_check(delta: &Rational, ell: u64, omega: u32, sets: &[u64]) -> Result<Option<String>, CliError> {
    let (_, eps) = m_epsilon(delta, ell)?;
    let best = subsets_of_size(sets.len(), ell as usize)
        .map(|idx| idx.iter().fold(low_mask(omega), |acc, &i| acc & sets[i]).count_ones())
        .max()
        .unwrap_or(0);
    let measure = Rational::new(best.into(), omega.into());
    Ok((measure < eps).then(|| format!("best intersection of {ell} sets has measure {measure} < {eps}")))
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n).filter(move |m| m.count_ones() as usize == k).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

fn meps_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let delta = p.rational("delta", Rational::new(1.into(), 2.into()))?;
    let ell: u64 = p.get("ell", 2)?;
    let omega: u32 = p.get("omega", 8)?;
    let (m, _) = m_epsilon(&delta, ell)?;
    if m > 20 || omega == 0 || omega > 64 {
        return Err(CliError::Budget(format!("M = {m} sets over {omega} points is outside the enumerable range")));
    }
    let need = (&delta * Rational::from_integer(omega.into())).ceil().to_integer().to_u32().unwrap_or(u32::MAX);
    if need > omega {
        return Err(usage("delta too large for the space"));
    }
    let found = par::map_range(p.get("count", 500)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let sets: Vec<u64> = (0..m)
            .map(|_| loop {
                let s = rng.gen::<u64>() & low_mask(omega);
                if s.count_ones() >= need {
                    break s;
                }
            })
            .collect();
        Ok(meps_check(&delta, ell, omega, &sets)?.map(|_| {
            let base = job("mepsilon", &[("delta", fmt_rational(&delta)), ("ell", ell.to_string()), ("omega", omega.to_string())]);
            sets.iter().fold(base, |j, &s| j.data(Node::new("set").args((0..omega).filter(|b| s >> b & 1 == 1))))
        }))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn meps_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let delta = spec::rational(job.get("delta").ok_or_else(|| usage("job needs `param delta`"))?)?;
    let omega: u32 = job.get_num("omega")?;
    let sets: Vec<u64> = data_nums(job, "set")?.iter().map(|s| s.iter().fold(0u64, |m, &b| m | 1 << b)).collect();
    meps_check(&delta, job.get_num("ell")?, omega, &sets)
}

// nordiv -------------------------------------------------------------------

struct DivSpace {
    len: u32,
    b: u32,
    points: u32,
    poss: Vec<u64>,
    den: u64,
}

impl DivSpace {
    fn new(len: u32, b: u32) -> Result<Self, CliError> {
        if len > 6 || b + 1 > len || b < 3 {
            return Err(usage("need 3 <= b < I <= 6"));
        }
        let points = 1u32 << len;
        let hole = 1u32 << (len - b);
        if binomial_u64(points as u64, hole as u64)? > BigNat::from(1u32 << 16) {
            return Err(CliError::Budget("POSS is too large to enumerate".into()));
        }
        let poss: Vec<u64> =
            subsets_of_size_u64(points, hole).map(|h| !h & low_mask(points)).collect();
        let den = binomial_u64((points / 2) as u64, hole as u64)?.to_u64().expect("small");
        Ok(DivSpace { len, b, points, poss, den })
    }

    /// Checks one half-sized `T` against one chosen family `C ⊆ POSS`.
    fn check(&self, t: u64, chosen: &[bool]) -> Result<Option<String>, CliError> {
        let covers: Vec<bool> = self.poss.iter().map(|&x| x & t == t).collect();
        let n = covers.iter().filter(|&&c| c).count() as u64;
        if n != self.den {
            return Ok(Some(format!("{n} possibilities cover T, expected {}", self.den)));
        }
        let size_c = chosen.iter().filter(|&&x| x).count() as u64;
        let size_d = chosen.iter().zip(&covers).filter(|(&x, &c)| x && !c).count() as u64;
        let nc = nor_div(self.len, self.b, &BigNat::from(size_c))?;
        let nd = nor_div(self.len, self.b, &BigNat::from(size_d))?;
        Ok((nd + 1u32 < nc).then(|| format!("nor_div fell from {size_c} to {size_d} possibilities by more than 1")))
    }
}

fn subsets_of_size_u64(n: u32, k: u32) -> Box<dyn Iterator<Item = u64>> {
    // Gosper's hack over n-bit masks with k ones
    if k == 0 {
        return Box::new(std::iter::once(0));
    }
    if k > n {
        return Box::new(std::iter::empty());
    }
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    let mut cur = Some(low_mask(k));
    Box::new(std::iter::from_fn(move || {
        let x = cur?;
        let c = x & x.wrapping_neg();
        let r = x.wrapping_add(c);
        cur = if r == 0 { None } else { Some((((r ^ x) >> 2) / c) | r) }.filter(|&v| n == 64 || v < limit);
        Some(x)
    }))
}

fn nordiv_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let space = DivSpace::new(p.get("I", 4)?, p.get("b", 3)?)?;
    if nor_div_denominator(space.len, space.b)? != BigNat::from(space.den) {
        return Ok(Outcome {
            instances: 1,
            failures: 1,
            counterexamples: vec![job("nordiv", &[("I", space.len.to_string()), ("b", space.b.to_string())])],
            ..Outcome::default()
        });
    }
    let samples: u64 = p.get("samples", 4)?;
    let limit: u64 = p.get("limit", 1 << 20)?;
    let half = space.points / 2;
    let ts = binomial_u64(space.points as u64, half as u64)?;
    let exhaustive = ts <= BigNat::from(limit);
    let t_list: Vec<u64> = if exhaustive {
        subsets_of_size_u64(space.points, half).collect()
    } else {
        let mut rng = ctx.rng(u64::MAX);
        (0..p.get::<u64>("count", 1000)?)
            .map(|_| {
                let mut pts: Vec<u32> = (0..space.points).collect();
                rand::seq::SliceRandom::shuffle(pts.as_mut_slice(), &mut rng);
                pts[..half as usize].iter().fold(0u64, |m, &b| m | 1 << b)
            })
            .collect()
    };
    let found = par::map_slice(&t_list, |&t| -> Result<Vec<Option<JobSpec>>, CliError> {
        let mut rng = ctx.rng(t);
        // the whole POSS, exactly the covers, and random families
        let mut families: Vec<Vec<bool>> = vec![vec![true; space.poss.len()], space.poss.iter().map(|&x| x & t == t).collect()];
        families.extend((0..samples).map(|_| (0..space.poss.len()).map(|_| rng.gen_bool(0.6)).collect()));
        families
            .iter()
            .map(|c| {
                Ok(space.check(t, c)?.map(|_| {
                    job("nordiv", &[("I", space.len.to_string()), ("b", space.b.to_string())])
                        .data(Node::new("t").args((0..space.points).filter(|i| t >> i & 1 == 1)))
                        .data(Node::new("c").args(c.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i)))
                }))
            })
            .collect()
    });
    let mut out = Outcome { exhaustive: false, sampled: true, ..Outcome::default() };
    for f in found {
        out.absorb(f?);
    }
    out.notes.push(format!("{} half-sized sets{}", t_list.len(), if exhaustive { " (all of them)" } else { "" }));
    Ok(out)
}

fn nordiv_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let space = DivSpace::new(job.get_num("I")?, job.get_num("b")?)?;
    if job.data.is_empty() {
        let den = nor_div_denominator(space.len, space.b)?;
        return Ok((den != BigNat::from(space.den)).then(|| format!("denominator {den}, expected {}", space.den)));
    }
    let t = data_one(job, "t")?.iter().fold(0u64, |m, &b| m | 1 << b);
    let picked: BTreeSet<u64> = data_one(job, "c")?.into_iter().collect();
    let chosen: Vec<bool> = (0..space.poss.len() as u64).map(|i| picked.contains(&i)).collect();
    space.check(t, &chosen)
}

// lognor -------------------------------------------------------------------

fn lognor_run(p: &Params, _ctx: &Ctx) -> Result<Outcome, CliError> {
    let max: u64 = p.get("x", 2048)?;
    if max > 1 << 16 {
        return Err(CliError::Budget("--x above 65536 needs too many splits".into()));
    }
    let spec = LognorSpec::identity();
    let table: Vec<u64> = (0..=max).map(|x| spec.lognor_u64(x)).collect::<Result<_, _>>()?;
    let mut out = Outcome { exhaustive: true, ..Outcome::default() };
    let small = [0u64, 1, 2, 2, 3];
    let start = table.iter().zip(small).take_while(|(a, b)| **a == *b).count();
    if start < small.len().min(table.len()) {
        out.absorb([Some(job("lognor", &[("x", start.to_string()), ("a", "0".into())]))]);
    }
    let found = par::map_range(max + 1, |x| {
        let lx = table[x as usize];
        let mono = x == 0 || table[x as usize - 1] <= lx;
        let bad = (0..=x).find(|&a| table[a as usize].max(table[(x - a) as usize]) + 1 < lx);
        match (mono, bad) {
            (true, None) => Vec::new(),
            (_, a) => vec![job("lognor", &[("x", x.to_string()), ("a", a.unwrap_or(0).to_string())])],
        }
    });
    for f in found {
        out.absorb(f.into_iter().map(Some));
    }
    // every split x = a + (x - a) counts as one instance
    out.instances = (max + 1) * (max + 2) / 2;
    Ok(out)
}

fn lognor_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let (x, a): (u64, u64) = (job.get_num("x")?, job.get_num("a")?);
    if a > x {
        return Err(usage("need a <= x"));
    }
    let spec = LognorSpec::identity();
    let l = |v: u64| spec.lognor_u64(v);
    let small = [0u64, 1, 2, 2, 3];
    if (x as usize) < small.len() && l(x)? != small[x as usize] {
        return Ok(Some(format!("lognor({x}) = {}", l(x)?)));
    }
    if x > 0 && l(x - 1)? > l(x)? {
        return Ok(Some(format!("lognor drops at {x}")));
    }
    Ok((l(a)?.max(l(x - a)?) + 1 < l(x)?).then(|| format!("splitting {x} = {a} + {} loses more than 1", x - a)))
}

// combi --------------------------------------------------------------------

fn combi_check(n: u64, k: u64) -> Result<Option<String>, CliError> {
    let q = combi_quotient(n, k)?;
    let want = Rational::new(binomial_u64(2 * n * k, n)?.into(), binomial_u64(n * k, n)?.into());
    if q != want {
        return Ok(Some(format!("quotient {q} differs from the binomial ratio {want}")));
    }
    Ok((q < combi_lower_bound(n, k)).then(|| "quotient below (2 - 1/k)^N".into()))
}

fn combi_run(p: &Params, _ctx: &Ctx) -> Result<Outcome, CliError> {
    let (nmax, kmax): (u64, u64) = (p.get("N", 64)?, p.get("k", 8)?);
    if kmax < 2 {
        return Err(usage("need k >= 2"));
    }
    let pairs: Vec<(u64, u64)> = (1..=nmax).flat_map(|n| (2..=kmax).map(move |k| (n, k))).collect();
    let found = par::map_slice(&pairs, |&(n, k)| Ok::<_, CliError>(combi_check(n, k)?.map(|_| job("combi", &[("N", n.to_string()), ("k", k.to_string())]))));
    let mut out = Outcome { exhaustive: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn combi_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    combi_check(job.get_num("N")?, job.get_num("k")?)
}

// gluing purely stronger creatures ---------------------------------------

fn stronger_check(frame: &Frame, cs: &[CompoundCreature], ds: &[CompoundCreature]) -> Result<Option<String>, CliError> {
    let glued = match glue_purely_stronger(frame, cs, ds) {
        Ok(g) => g,
        Err(e) => return Ok(Some(e.to_string())),
    };
    let least = NormValue::try_min(&cs.iter().map(|c| norm(frame, c)).collect::<Result<Vec<_>, _>>()?)?.expect("nonempty");
    Ok((!norm(frame, &glued)?.ge(&least)?).then(|| "glued norm below the least input norm".into()))
}

fn shrink_limsup(c: &CompoundCreature, frame: &Frame, rng: &mut ChaCha8Rng) -> Result<CompoundCreature, CliError> {
    let mut grid = c.grid().clone();
    for (i, rows) in grid.iter_mut() {
        if i.ty.is_limsup() {
            for x in rows.iter_mut().flatten().filter(|x| x.len() > 1) {
                let keep = rng.gen_range(x.len().div_ceil(2)..=x.len());
                *x = Subatom::new(x.poss()[..keep].iter().copied())?;
            }
        }
    }
    Ok(CompoundCreature::new(frame, c.m_dn(), c.m_up(), c.columns().clone(), grid, c.halving_all().to_vec())?)
}

fn stronger_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let fs = FrameSpec::from(&unhalving_config());
    let frame = fs.build()?;
    let s: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let found = par::map_range(p.get("count", 10)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let cs = [(3, 4), (4, 6), (6, 7)].iter().map(|&(a, b)| full_creature(&frame, &mut rng, a, b, &s)).collect::<Result<Vec<_>, _>>()?;
        let ds = cs[..2].iter().map(|c| shrink_limsup(c, &frame, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        Ok(stronger_check(&frame, &cs, &ds)?.map(|_| {
            let group = |key: &str, xs: &[CompoundCreature]| xs.iter().fold(Node::new(key), |n, c| n.child(CreatureSpec::from_creature(c).to_node()));
            JobSpec::new("gluestronger").data(fs.to_node()).data(group("cs", &cs)).data(group("ds", &ds))
        }))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn stronger_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let frame = frame_of(job)?;
    let group = |key: &str| -> Result<Vec<CompoundCreature>, CliError> {
        let node = job.data.iter().find(|n| n.key == key).ok_or_else(|| usage(format!("job needs `{key}`")))?;
        let doc = spec::SpecDocument::from_nodes(&node.children)?;
        doc.creatures().iter().map(|c| c.build(&frame)).collect()
    };
    stronger_check(&frame, &group("cs")?, &group("ds")?)
}


// fat nodes ----------------------------------------------------------------

fn fat_check(tree: &FiniteTree, m: u32, eps: &Rational) -> Result<Option<String>, CliError> {
    let rep = fat_nodes(tree, m, eps)?;
    let d = tree.depth();
    let cone = 1u64 << (d - m);
    let mut counts = vec![0u64; 1 << m];
    for &leaf in tree.leaves() {
        counts[(leaf & low_mask(m)) as usize] += 1;
    }
    let one = Rational::one();
    let fat = counts.iter().filter(|&&c| Rational::new(c.into(), cone.into()) >= &one - eps).count() as u64;
    let size = counts.iter().filter(|&&c| c > 0).count() as u64;
    let mu = Rational::new((tree.leaves().len() as u64).into(), (1u64 << d).into());
    let hyp = Rational::new(size.into(), (1u64 << m).into()) - &mu * eps * eps <= mu;
    if rep.fat.len() as u64 != fat || rep.hypothesis != hyp {
        return Ok(Some("fat-node report disagrees with a direct count".into()));
    }
    if hyp {
        let l = Rational::from_integer(fat.into());
        if l < Rational::from_integer((1u64 << m).into()) * &mu * (&one - eps) {
            return Ok(Some(format!("{fat} fat nodes at level {m}, below 2^m mu (1 - eps)")));
        }
        if l < Rational::from_integer(size.into()) * (&one - eps) {
            return Ok(Some(format!("{fat} fat nodes at level {m}, below (1 - eps) |T at level m|")));
        }
    }
    Ok(None)
}

fn fat_job(tree: &FiniteTree, m: u32, eps: &Rational) -> JobSpec {
    job("fatnodes", &[("depth", tree.depth().to_string()), ("m", m.to_string()), ("eps", fmt_rational(eps))])
        .data(Node::new("leaves").args(tree.leaves()))
}

fn fat_all_levels(tree: &FiniteTree, eps: &Rational) -> Result<Vec<Option<JobSpec>>, CliError> {
    (0..=tree.depth()).map(|m| Ok(fat_check(tree, m, eps)?.map(|_| fat_job(tree, m, eps)))).collect()
}

/// Calls `f` with every nondecreasing sequence of `len` values in `0..=max`.
fn profiles(len: usize, max: u64, f: &mut dyn FnMut(&[u64]) -> Result<(), CliError>) -> Result<(), CliError> {
    fn go(len: usize, max: u64, lo: u64, v: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> Result<(), CliError>) -> Result<(), CliError> {
        if v.len() == len {
            return f(v);
        }
        for x in lo..=max {
            v.push(x);
            go(len, max, x, v, f)?;
            v.pop();
        }
        Ok(())
    }
    go(len, max, 0, &mut Vec::new(), f)
}

fn fat_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let depth: u32 = p.get("depth", 6)?;
    let eps = p.rational("eps", Rational::new(1.into(), 4.into()))?;
    if depth == 0 || depth > 12 {
        return Err(usage("need 1 <= depth <= 12"));
    }
    let mut out = Outcome { exhaustive: depth <= 6, ..Outcome::default() };
    for d in 1..=depth.min(4) {
        let found = par::map_range((1u64 << (1 << d)) - 1, |k| -> Result<Vec<Option<JobSpec>>, CliError> {
            let mask = k + 1;
            if 2 * mask.count_ones() < 1 << d {
                return Ok(Vec::new());
            }
            fat_all_levels(&FiniteTree::new(d, (0..1u64 << d).filter(|&x| mask >> x & 1 == 1))?, &eps)
        });
        for f in found {
            out.absorb(f?);
        }
    }
    // beyond depth 4: the checked quantities at level m depend only on the multiset of cone sizes
    for d in 5..=depth.min(6) {
        for m in 0..=d {
            let cone = 1u64 << (d - m);
            let mut found = Vec::new();
            profiles(1 << m, cone, &mut |prof| {
                if 2 * prof.iter().sum::<u64>() < 1 << d {
                    return Ok(());
                }
                let leaves = prof.iter().enumerate().flat_map(|(s, &c)| (0..c).map(move |t| s as u64 | t << m));
                let tree = FiniteTree::new(d, leaves)?;
                found.push(fat_check(&tree, m, &eps)?.map(|_| fat_job(&tree, m, &eps)));
                Ok(())
            })?;
            out.absorb(found);
        }
    }
    if depth > 6 {
        out.sampled = true;
        let count: u64 = p.get("count", 5000)?;
        for d in 7..=depth {
            let found = par::map_range(count, |i| -> Result<Vec<Option<JobSpec>>, CliError> {
                let mut rng = ctx.rng(i ^ (d as u64) << 40);
                let leaves: Vec<u64> = loop {
                    let dens: f64 = rng.gen_range(0.5..1.0);
                    let l: Vec<u64> = (0..1u64 << d).filter(|_| rng.gen_bool(dens)).collect();
                    if 2 * l.len() >= 1 << d {
                        break l;
                    }
                };
                fat_all_levels(&FiniteTree::new(d, leaves)?, &eps)
            });
            for f in found {
                out.absorb(f?);
            }
        }
    }
    Ok(out)
}

fn fat_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let eps = spec::rational(job.get("eps").unwrap_or("1/4"))?;
    let tree = FiniteTree::new(job.get_num("depth")?, data_one(job, "leaves")?)?;
    fat_check(&tree, job.get_num("m")?, &eps)
}

// unhalving ----------------------------------------------------------------

fn unhalving_check(frame: &Frame, q: &ConditionPrefix, h: u64, r: &ConditionPrefix, m: &Rational) -> Result<Option<String>, CliError> {
    let (s, rep) = unhalve(frame, q, h, r, m)?;
    if let Some(c) = rep.clauses.iter().find(|c| !c.holds) {
        return Ok(Some(c.to_string()));
    }
    let mp = &frame.level(h)?.maxposs_below;
    let floor = m - Rational::new(1.into(), num_bigint::BigInt::from(mp.clone()));
    Ok((!norm(frame, &s.creatures()[0])?.ge_rational(&floor)?).then(|| "nor(s, h) below M - 1/maxposs(<h)".into()))
}

fn unhalving_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let fs = FrameSpec::from(&unhalving_config());
    let frame = unhalving_frame();
    let found = par::map_range(p.get("count", 10)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let (q, h, r, m) = unhalving_instance(&frame, &mut rng)?;
        Ok(unhalving_check(&frame, &q, h, &r, &m)?.map(|_| {
            job("unhalving", &[("h", h.to_string()), ("M", fmt_rational(&m))])
                .data(fs.to_node())
                .data(ConditionSpec::from_condition("q", &q).to_node())
                .data(ConditionSpec::from_condition("r", &r).to_node())
        }))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn conditions_in(job: &JobSpec) -> Result<(Frame, Vec<ConditionPrefix>), CliError> {
    let frame = frame_of(job)?;
    let doc = spec::SpecDocument::from_nodes(&job.data.iter().filter(|n| n.key == "condition").cloned().collect::<Vec<_>>())?;
    let ps = doc.conditions().iter().map(|c| c.build(&frame)).collect::<Result<Vec<_>, _>>()?;
    Ok((frame, ps))
}

fn unhalving_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let (frame, ps) = conditions_in(job)?;
    if ps.len() != 2 {
        return Err(usage("an unhalving job holds conditions q and r"));
    }
    let m = spec::rational(job.get("M").ok_or_else(|| usage("job needs `param M`"))?)?;
    unhalving_check(&frame, &ps[0], job.get_num("h")?, &ps[1], &m)
}

// slalom -------------------------------------------------------------------

fn slalom_check(f: &[u64], g: &[u64]) -> Result<Option<String>, CliError> {
    let r = slalom_encode(f, g)?;
    let mut start = 0usize;
    for (k, &gk) in g.iter().enumerate() {
        let end = start + gk as usize + 1;
        if end > r.len() || r[start..end].iter().filter(|&&b| b).count() != 1 {
            return Ok(Some(format!("block {k} does not hold exactly one 1")));
        }
        start = end;
    }
    if start != r.len() {
        return Ok(Some("code has trailing bits".into()));
    }
    Ok((slalom_decode(&r, g)? != f).then(|| "decoding does not return the sequence".into()))
}

fn slalom_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (len, max): (usize, u64) = (p.get("len", 24)?, p.get("max", 30)?);
    if len == 0 {
        return Err(usage("need --len >= 1"));
    }
    let found = par::map_range(p.get("count", 10_000)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let n = rng.gen_range(1..=len);
        let g: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max)).collect();
        let f: Vec<u64> = g.iter().map(|&b| rng.gen_range(0..=b)).collect();
        Ok(slalom_check(&f, &g)?.map(|_| JobSpec::new("slalom").data(Node::new("f").args(&f)).data(Node::new("g").args(&g))))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn slalom_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    slalom_check(&data_one(job, "f")?, &data_one(job, "g")?)
}

// conditions ---------------------------------------------------------------

fn strengthen(frame: &Frame, p: &ConditionPrefix, rng: &mut ChaCha8Rng) -> ConditionPrefix {
    (0..20).find_map(|_| random_strengthening(frame, p, rng).ok()).unwrap_or_else(|| p.clone())
}

fn conditions_check(frame: &Frame, p: &ConditionPrefix, q: &ConditionPrefix, r: &ConditionPrefix) -> Result<Option<String>, CliError> {
    let leq = |a: &ConditionPrefix, b: &ConditionPrefix| -> Result<bool, CliError> { Ok(leq_check(frame, a, b)?.holds()) };
    for (name, x) in [("p", p), ("q", q), ("r", r)] {
        if !leq(x, x)? {
            return Ok(Some(format!("{name} <= {name} fails")));
        }
    }
    if leq(r, q)? && leq(q, p)? && !leq(r, p)? {
        return Ok(Some("r <= q <= p but not r <= p".into()));
    }
    for &ell in &p.w()[..p.w().len() - 1] {
        let set = poss_set(frame, p, Sublevel::sacks(ell), PossVariant::PerIndex)?;
        let eta = random_possibility(&set, &mut ChaCha8Rng::seed_from_u64(ell));
        if !leq(&wedge(frame, p, ell, &eta)?, p)? {
            return Ok(Some(format!("wedge at {ell} is not below p")));
        }
    }
    Ok(None)
}

fn conditions_run(p: &Params, ctx: &Ctx) -> Result<Outcome, CliError> {
    let frame = algebra_frame();
    let fs = FrameSpec::from(&algebra_config());
    let found = par::map_range(p.get("count", 200)?, |i| -> Result<Option<JobSpec>, CliError> {
        let mut rng = ctx.rng(i);
        let a = random_condition(&frame, &mut rng)?;
        let b = strengthen(&frame, &a, &mut rng);
        let c = strengthen(&frame, &b, &mut rng);
        Ok(conditions_check(&frame, &a, &b, &c)?.map(|_| {
            [("p", &a), ("q", &b), ("r", &c)]
                .iter()
                .fold(JobSpec::new("conditions").data(fs.to_node()), |j, (n, x)| j.data(ConditionSpec::from_condition(n, x).to_node()))
        }))
    });
    let mut out = Outcome { sampled: true, ..Outcome::default() };
    out.absorb(found.into_iter().collect::<Result<Vec<_>, _>>()?);
    Ok(out)
}

fn conditions_replay(job: &JobSpec) -> Result<Option<String>, CliError> {
    let (frame, ps) = conditions_in(job)?;
    if ps.len() != 3 {
        return Err(usage("a conditions job holds p, q and r"));
    }
    conditions_check(&frame, &ps[0], &ps[1], &ps[2])
}
