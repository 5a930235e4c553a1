use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use creature_core::compound::{compound_norm, glue, half, unhalve};
use creature_core::exactnum::{set_comparison_budget, NormValue, Rational};
use creature_core::frame::gen::{algebra_config, random_condition, random_creature, unhalving_config, unhalving_instance};
use creature_core::frame::{
    cascade_with_budget, glue_condition, half_condition, leq_check, poss_set, possibility_elements, Frame, Index, IndexType,
    PossVariant,
};
use creature_core::interval::IndexInterval;
use creature_core::par;
use creature_core::sacks::SacksColumn;
use creature_core::subatoms::Subatom;
use num_bigint::BigInt;
use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, CliError};
use crate::spec::{self, fmt_rational, ConditionSpec, CreatureSpec, FrameSpec, Item, SpecDocument};
use crate::verify::{self, Ctx, Params};

#[derive(Debug, Parser)]
#[command(name = "creature", version, about = "Finite creature combinatorics: norms, conditions and lemma checks")]
pub struct Cli {
    /// Bits available to certified norm comparisons.
    #[arg(long, global = true, default_value_t = 512)]
    pub precision: u32,
    /// Bit budget for exact values in the parameter cascade.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub budget: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Seed for sampled instances and generated documents.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Frame mode: small declared frames, or the exact inductive parameters.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Toy,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Factors ordered by index, then sublevel.
    Index,
    /// Factors ordered by sublevel.
    Sublevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Creature,
    Condition,
    Unhalving,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every norm of the creatures, conditions, subatoms and columns in a document.
    Norm { input: Option<PathBuf> },
    /// Print the exact parameter cascade up to a sublevel.
    Cascade {
        /// Last sublevel, as `L,J` with `J = -1` for the Sacks sublevel.
        #[arg(long, default_value = "1,-1", allow_hyphen_values = true)]
        upto: String,
        /// Print `sublevel name kind value` rows instead of a table.
        #[arg(long)]
        machine: bool,
    },
    /// Run a registered lemma check, or replay counterexample jobs.
    Verify {
        /// Lemma id; omit with --list or --replay.
        lemma: Option<String>,
        /// List the registered lemmas.
        #[arg(long)]
        list: bool,
        /// Re-check the `job` entries of a document.
        #[arg(long, value_name = "FILE")]
        replay: Option<PathBuf>,
        /// Lemma parameters, `--key value` or `--flag`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// Glue the stacked creatures of a document, or a condition along --points.
    Glue {
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<u64>>,
    },
    /// Halve each creature, or a condition from level --h on.
    Half {
        input: Option<PathBuf>,
        #[arg(long)]
        h: Option<u64>,
    },
    /// Build s <= q from r <= half(q, h) with norms of q at least M from h on.
    Unhalve {
        input: Option<PathBuf>,
        #[arg(long)]
        h: u64,
        #[arg(long = "M", value_name = "RATIONAL")]
        m: String,
        #[arg(long, default_value = "q")]
        q: String,
        #[arg(long, default_value = "r")]
        r: String,
    },
    /// Size (and optionally the elements) of the possibilities of a condition below a sublevel.
    Poss {
        input: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum, default_value_t = Variant::Index)]
        variant: Variant,
        /// Condition name; defaults to the first condition.
        #[arg(long)]
        condition: Option<String>,
        /// List the elements when there are at most this many.
        #[arg(long, default_value_t = 0)]
        list: u64,
    },
    /// Decide q <= p for two conditions (the first two by default).
    Leq {
        input: Option<PathBuf>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        p: Option<String>,
    },
    /// Print a random document to start from.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut (dyn Read + Send)) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Output { stdout: text, ..Output::default() } } else { Output { stderr: text, code, ..Output::default() } };
        }
    };
    set_comparison_budget(cli.precision);
    let mut out = Output::default();
    let jobs = cli.jobs;
    let res = par::with_jobs(jobs, || execute(&cli, stdin, &mut out));
    match res {
        Ok(code) => out.code = code,
        Err(e) => {
            let _ = writeln!(out.stderr, "error: {e}");
            out.code = e.exit_code();
        }
    }
    out
}

fn read_text(path: &Option<PathBuf>, stdin: &mut (dyn Read + Send)) -> Result<String, CliError> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)?,
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            s
        }
    })
}

fn read_input(path: &Option<PathBuf>, stdin: &mut (dyn Read + Send)) -> Result<SpecDocument, CliError> {
    Ok(SpecDocument::parse(&read_text(path, stdin)?)?)
}

fn toy_only(cli: &Cli) -> Result<(), CliError> {
    if cli.mode == Some(Mode::Exact) {
        return Err(usage("exact frames exist only as the cascade table; declare a toy frame in the document"));
    }
    Ok(())
}

fn execute(cli: &Cli, stdin: &mut (dyn Read + Send), out: &mut Output) -> Result<i32, CliError> {
    let o = &mut out.stdout;
    match &cli.command {
        Command::Cascade { upto, machine } => {
            if cli.mode == Some(Mode::Toy) {
                return Err(usage("the cascade follows the exact parameters; drop --mode toy"));
            }
            let t = cascade_with_budget(spec::sublevel(upto)?, cli.budget)?;
            if *machine {
                for r in t.machine_rows() {
                    writeln!(o, "{r}").expect("write");
                }
            } else {
                write!(o, "{t}").expect("write");
            }
            if let Some(tr) = &t.truncated {
                writeln!(out.stderr, "warning: table truncated: {tr}").expect("write");
            }
            Ok(if t.all_checks_hold() { 0 } else { 1 })
        }
        Command::Verify { lemma, list, replay, params } => {
            if *list {
                for l in verify::registry() {
                    let keys = l.keys.iter().map(|k| format!("--{k}")).collect::<Vec<_>>().join(" ");
                    writeln!(o, "{:<11} {}\n            {keys}", l.id, l.about).expect("write");
                }
                return Ok(0);
            }
            if let Some(path) = replay {
                // verify output can be fed back as is: skip its verdict header
                let text = read_text(&Some(path.clone()), stdin)?;
                let nodes: Vec<_> = crate::doc::parse(&text)?.into_iter().filter(|n| n.key != "verdict").collect();
                let doc = SpecDocument::from_nodes(&nodes)?;
                let jobs = doc.jobs();
                if jobs.is_empty() {
                    return Err(usage("the document holds no `job` entries"));
                }
                let mut failed = 0;
                for (i, j) in jobs.iter().enumerate() {
                    match verify::replay(j)? {
                        Some(why) => {
                            failed += 1;
                            writeln!(o, "job {i} {}: fails: {why}", j.lemma).expect("write");
                        }
                        None => writeln!(o, "job {i} {}: holds", j.lemma).expect("write"),
                    }
                }
                return Ok(if failed > 0 { 1 } else { 0 });
            }
            let id = lemma.as_deref().ok_or_else(|| usage("name a lemma, or pass --list"))?;
            let mut p = Params::parse(params)?;
            // global flags written after the lemma name land here
            let mut seed = cli.seed;
            if let Some(s) = p.take_global("seed") {
                seed = s.parse().map_err(|_| usage("--seed takes an integer"))?;
            }
            if let Some(bits) = p.take_global("precision") {
                set_comparison_budget(bits.parse().map_err(|_| usage("--precision takes an integer"))?);
            }
            let v = match p.take_global("jobs") {
                Some(j) => {
                    let j: usize = j.parse().map_err(|_| usage("--jobs takes an integer"))?;
                    par::with_jobs(j, || verify::run(id, &p, &Ctx { seed }))?
                }
                None => verify::run(id, &p, &Ctx { seed })?,
            };
            o.push_str(&crate::doc::render(&v.to_nodes()));
            for n in &v.outcome.notes {
                writeln!(o, "# {n}").expect("write");
            }
            Ok(if v.passed() { 0 } else { 1 })
        }
        Command::Sample { kind } => {
            toy_only(cli)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut doc = SpecDocument::default();
            match kind {
                SampleKind::Creature => {
                    let cfg = algebra_config();
                    let frame = FrameSpec::from(&cfg).build()?;
                    let supp: BTreeSet<Index> =
                        [Index::new(0, IndexType::Sk), Index::new(0, IndexType::Nm), Index::new(0, IndexType::Nn)].into();
                    let c = random_creature(&frame, &mut rng, 3, 5, &supp)?;
                    doc.push(Item::Frame(FrameSpec::from(&cfg)));
                    doc.push(Item::Creature(CreatureSpec::from_creature(&c)));
                }
                SampleKind::Condition => {
                    let cfg = algebra_config();
                    let frame = FrameSpec::from(&cfg).build()?;
                    let p = random_condition(&frame, &mut rng)?;
                    doc.push(Item::Frame(FrameSpec::from(&cfg)));
                    doc.push(Item::Condition(ConditionSpec::from_condition("p", &p)));
                }
                SampleKind::Unhalving => {
                    let cfg = unhalving_config();
                    let frame = FrameSpec::from(&cfg).build()?;
                    let (q, h, r, m) = unhalving_instance(&frame, &mut rng)?;
                    writeln!(o, "# creature unhalve FILE --h {h} --M {}", fmt_rational(&m)).expect("write");
                    doc.push(Item::Frame(FrameSpec::from(&cfg)));
                    doc.push(Item::Condition(ConditionSpec::from_condition("q", &q)));
                    doc.push(Item::Condition(ConditionSpec::from_condition("r", &r)));
                }
            }
            o.push_str(&doc.render());
            Ok(0)
        }
        Command::Norm { input } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            norm_report(&doc, cli.precision, o)?;
            Ok(0)
        }
        Command::Glue { input, points } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            let frame = doc.frame()?;
            let mut res = SpecDocument::default();
            res.push(Item::Frame(doc.frame_spec().expect("frame checked").clone()));
            match points {
                Some(u) => {
                    let c = first_condition(&doc, None)?;
                    let p = glue_condition(&frame, &c.build(&frame)?, u)?;
                    res.push(Item::Condition(ConditionSpec::from_condition(&c.name, &p)));
                }
                None => {
                    // top-level creatures, or else the creatures of the first condition
                    let specs: Vec<&CreatureSpec> = match doc.creatures() {
                        v if !v.is_empty() => v,
                        _ => doc.conditions().first().map(|c| c.creatures.iter().collect()).unwrap_or_default(),
                    };
                    let parts = specs.iter().map(|c| c.build(&frame)).collect::<Result<Vec<_>, _>>()?;
                    if parts.is_empty() {
                        return Err(usage("no creatures to glue"));
                    }
                    let g = glue(&frame, &parts)?;
                    let least = NormValue::try_min(&parts.iter().map(|c| Ok(compound_norm(&frame, c)?.total)).collect::<Result<Vec<_>, CliError>>()?)?
                        .expect("nonempty");
                    writeln!(o, "# norm {}", exact_form(&compound_norm(&frame, &g)?.total)).expect("write");
                    writeln!(o, "# least input norm {}", exact_form(&least)).expect("write");
                    res.push(Item::Creature(CreatureSpec::from_creature(&g)));
                }
            }
            o.push_str(&res.render());
            Ok(0)
        }
        Command::Half { input, h } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            let frame = doc.frame()?;
            let mut res = SpecDocument::default();
            res.push(Item::Frame(doc.frame_spec().expect("frame checked").clone()));
            match h {
                Some(h) => {
                    let c = first_condition(&doc, None)?;
                    let p = half_condition(&frame, &c.build(&frame)?, *h)?;
                    res.push(Item::Condition(ConditionSpec::from_condition(&c.name, &p)));
                }
                None => {
                    for c in doc.creatures() {
                        let hc = half(&frame, &c.build(&frame)?)?;
                        writeln!(o, "# norm {}", exact_form(&compound_norm(&frame, &hc)?.total)).expect("write");
                        res.push(Item::Creature(CreatureSpec::from_creature(&hc)));
                    }
                }
            }
            o.push_str(&res.render());
            Ok(0)
        }
        Command::Unhalve { input, h, m, q, r } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            let frame = doc.frame()?;
            let m = spec::rational(m)?;
            let qc = doc.condition(q)?.build(&frame)?;
            let rc = doc.condition(r)?.build(&frame)?;
            let (s, rep) = unhalve(&frame, &qc, *h, &rc, &m)?;
            writeln!(o, "# h0 = {}, h1 = {}", rep.h0, rep.h1).expect("write");
            for c in &rep.clauses {
                writeln!(o, "# {c}").expect("write");
            }
            let mut res = SpecDocument::default();
            res.push(Item::Frame(doc.frame_spec().expect("frame checked").clone()));
            res.push(Item::Condition(ConditionSpec::from_condition("s", &s)));
            o.push_str(&res.render());
            Ok(if rep.holds() { 0 } else { 1 })
        }
        Command::Poss { input, at, variant, condition, list } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            let frame = doc.frame()?;
            let p = first_condition(&doc, condition.as_deref())?.build(&frame)?;
            let v = match variant {
                Variant::Index => PossVariant::PerIndex,
                Variant::Sublevel => PossVariant::PerSublevel,
            };
            let u = spec::sublevel(at)?;
            let set = poss_set(&frame, &p, u, v)?;
            let card = set.cardinality();
            writeln!(o, "cardinality {card}").expect("write");
            if *list > 0 && card <= (*list).into() {
                for e in possibility_elements(&set, *list)? {
                    writeln!(o, "element {}", e.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")).expect("write");
                }
            }
            Ok(0)
        }
        Command::Leq { input, q, p } => {
            toy_only(cli)?;
            let doc = read_input(input, stdin)?;
            let frame = doc.frame()?;
            let conds = doc.conditions();
            let pick = |name: &Option<String>, k: usize| -> Result<&ConditionSpec, CliError> {
                match name {
                    Some(n) => doc.condition(n),
                    None => conds.get(k).copied().ok_or_else(|| usage("leq needs two conditions")),
                }
            };
            let (qs, ps) = (pick(q, 0)?, pick(p, 1)?);
            let rep = leq_check(&frame, &qs.build(&frame)?, &ps.build(&frame)?)?;
            for c in &rep.clauses {
                writeln!(o, "{c}").expect("write");
            }
            let holds = rep.holds();
            writeln!(o, "{} {} {}", qs.name, if holds { "<=" } else { "is not <=" }, ps.name).expect("write");
            Ok(if holds { 0 } else { 1 })
        }
    }
}

fn first_condition<'a>(doc: &'a SpecDocument, name: Option<&str>) -> Result<&'a ConditionSpec, CliError> {
    match name {
        Some(n) => doc.condition(n),
        None => doc.conditions().first().copied().ok_or_else(|| usage("the document holds no condition")),
    }
}

/// `q` as a decimal with nine places, rounded down or up.
fn decimal(q: &Rational, up: bool) -> String {
    let scale = BigInt::from(1_000_000_000u64);
    let scaled = q.numer() * &scale;
    let (mut n, r) = scaled.div_mod_floor(q.denom());
    if up && r != BigInt::from(0) {
        n += 1;
    }
    let (i, f) = n.div_mod_floor(&scale);
    format!("{i}.{f:0>9}")
}

fn exact_form(v: &NormValue) -> String {
    match v.exact() {
        Some(q) => fmt_rational(&q),
        None => v.to_string().split(" ~ ").next().unwrap_or_default().to_string(),
    }
}

fn bounds(v: &NormValue, prec: u32) -> String {
    let iv = v.interval(prec);
    format!("[{}, {}]", decimal(&iv.lo, false), decimal(&iv.hi, true))
}

fn line(o: &mut String, name: &str, v: &NormValue, prec: u32) {
    writeln!(o, "  {name:<14} {}  in {}", exact_form(v), bounds(v, prec)).expect("write");
}

fn creature_report(frame: &Frame, c: &CreatureSpec, label: &str, prec: u32, o: &mut String) -> Result<(), CliError> {
    let n = compound_norm(frame, &c.build(frame)?)?;
    writeln!(o, "{label} on [{}, {})", c.m_dn, c.m_up).expect("write");
    line(o, "width", &n.width, prec);
    for (i, s) in &n.sacks {
        writeln!(o, "  {:<14} {s}", format!("sacks {i}")).expect("write");
    }
    for (i, v) in &n.limsup {
        line(o, &format!("limsup {i}"), v, prec);
    }
    for (l, v) in &n.liminf {
        line(o, &format!("liminf {l}"), v, prec);
    }
    line(o, "total", &n.total, prec);
    Ok(())
}

fn norm_report(doc: &SpecDocument, prec: u32, o: &mut String) -> Result<(), CliError> {
    let mut frame: Option<Frame> = None;
    let mut frame_of = |doc: &SpecDocument| -> Result<Frame, CliError> {
        if frame.is_none() {
            frame = Some(doc.frame()?);
        }
        Ok(frame.clone().expect("set"))
    };
    let mut any = false;
    let mut nc = 0;
    for item in &doc.items {
        match item {
            Item::Creature(c) => {
                creature_report(&frame_of(doc)?, c, &format!("creature {nc}"), prec, o)?;
                nc += 1;
            }
            Item::Condition(p) => {
                let f = frame_of(doc)?;
                p.build(&f)?;
                for (k, c) in p.creatures.iter().enumerate() {
                    creature_report(&f, c, &format!("condition {} creature {k}", p.name), prec, o)?;
                }
            }
            Item::Subatom(s) => {
                let fam = s.family.build()?;
                let x = Subatom::new(s.poss.iter().copied())?;
                if !fam.contains(&x) {
                    return Err(usage("subatom lies outside its family's POSS"));
                }
                writeln!(o, "subatom {} of size {}", s.family.to_args().join(" "), x.len()).expect("write");
                line(o, "nor", &fam.norm(&x)?, prec);
            }
            Item::Column(c) => {
                let col = SacksColumn::new(IndexInterval::new(0, c.len), c.branches.iter().copied())?;
                writeln!(o, "column of {} branches on {} bits", col.len(), c.len).expect("write");
                writeln!(o, "  {:<14} {}", "splitting", col.splitting_size()).expect("write");
                writeln!(o, "  {:<14} {}", "nor_sacks", col.nor_sacks(c.big_b, c.m)?).expect("write");
            }
            Item::Frame(_) | Item::Job(_) => continue,
        }
        any = true;
    }
    if !any {
        return Err(usage("nothing to measure: add a creature, condition, subatom or column"));
    }
    Ok(())
}
