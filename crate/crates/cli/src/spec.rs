//! Typed view of a document: frames, creatures, conditions, standalone
//! subatoms and Sacks columns, and verification jobs.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use creature_core::compound::CompoundCreature;
use creature_core::exactnum::Rational;
use creature_core::frame::toy::{uniform_frame, ToyConfig};
use creature_core::frame::{ConditionPrefix, Frame, Index, IndexType, Sublevel, TrunkValue};
use creature_core::interval::IndexInterval;
use creature_core::sacks::SacksColumn;
use creature_core::subatoms::{CnFamily, CountingFamily, FamilyRef, NmFamily, NnFamily, Subatom};
use num_bigint::BigInt;

use crate::doc::{self, schema, DocError, Node};
use crate::error::CliError;

pub fn num<T: FromStr>(s: &str) -> Result<T, DocError> {
    s.parse().map_err(|_| schema(format!("`{s}` is not a valid number here")))
}

pub fn nums<T: FromStr>(args: &[String]) -> Result<Vec<T>, DocError> {
    args.iter().map(|a| num(a)).collect()
}

pub fn rational(s: &str) -> Result<Rational, DocError> {
    let bad = || schema(format!("`{s}` is not a rational"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q == BigInt::from(0) {
                return Err(schema("zero denominator"));
            }
            Ok(Rational::new(p.parse().map_err(|_| bad())?, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn index(s: &str) -> Result<Index, DocError> {
    let bad = || schema(format!("`{s}` is not an index (sk0, nm1, nn2, cn3, ...)"));
    if s.len() < 3 || !s.is_char_boundary(2) {
        return Err(bad());
    }
    let ty = IndexType::parse(&s[..2]).ok_or_else(bad)?;
    Ok(Index::new(s[2..].parse().map_err(|_| bad())?, ty))
}

/// `L,J` or `(L,J)`; `J = -1` is the Sacks sublevel.
pub fn sublevel(s: &str) -> Result<Sublevel, DocError> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (l, j) = t.split_once(',').ok_or_else(|| schema(format!("`{s}` is not a sublevel `L,J`")))?;
    let level: u64 = num(l.trim())?;
    let j: i64 = num(j.trim())?;
    match j {
        -1 => Ok(Sublevel::sacks(level)),
        j if j >= 0 => Ok(Sublevel::subatomic(level, j as u32)),
        _ => Err(schema(format!("sublevel index {j} is below -1"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSpec {
    pub height: u64,
    pub sacks_len: u32,
    pub j_count: u32,
    pub big_b: u64,
    pub sub_big_b: u64,
    pub sacks_arity: u64,
    pub mu_param: u64,
    pub maxposs: Option<u64>,
    pub nm_len: u32,
    pub nm_b: u64,
    pub ls_poss: u64,
    pub ls_base: u64,
    pub ls_divisor: u64,
}

const FRAME_KEYS: [&str; 13] = [
    "height",
    "sacks_len",
    "j_count",
    "big_b",
    "sub_big_b",
    "sacks_arity",
    "mu_param",
    "maxposs",
    "nm_len",
    "nm_b",
    "ls_poss",
    "ls_base",
    "ls_divisor",
];

impl From<&ToyConfig> for FrameSpec {
    fn from(c: &ToyConfig) -> Self {
        FrameSpec {
            height: c.height,
            sacks_len: c.sacks_len,
            j_count: c.j_count,
            big_b: c.big_b,
            sub_big_b: c.sub_big_b,
            sacks_arity: c.sacks_arity,
            mu_param: c.mu_param,
            maxposs: c.maxposs,
            nm_len: c.nm_len,
            nm_b: c.nm_b,
            ls_poss: c.ls_poss,
            ls_base: c.ls_base,
            ls_divisor: c.ls_divisor,
        }
    }
}

impl FrameSpec {
    pub fn config(&self) -> ToyConfig {
        ToyConfig {
            height: self.height,
            sacks_len: self.sacks_len,
            j_count: self.j_count,
            big_b: self.big_b,
            sub_big_b: self.sub_big_b,
            sacks_arity: self.sacks_arity,
            mu_param: self.mu_param,
            maxposs: self.maxposs,
            nm_len: self.nm_len,
            nm_b: self.nm_b,
            ls_poss: self.ls_poss,
            ls_base: self.ls_base,
            ls_divisor: self.ls_divisor,
        }
    }

    pub fn build(&self) -> Result<Frame, CliError> {
        Ok(uniform_frame(&self.config())?)
    }

    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.arity(1)?;
        if n.args[0] != "toy" {
            return Err(schema(format!("only toy frames can be declared, not `{}`", n.args[0])));
        }
        n.only(&FRAME_KEYS)?;
        let mut s = FrameSpec::from(&ToyConfig::default());
        for c in &n.children {
            c.arity(1)?;
            n.one(&c.key)?;
            let a = &c.args[0];
            match c.key.as_str() {
                "height" => s.height = num(a)?,
                "sacks_len" => s.sacks_len = num(a)?,
                "j_count" => s.j_count = num(a)?,
                "big_b" => s.big_b = num(a)?,
                "sub_big_b" => s.sub_big_b = num(a)?,
                "sacks_arity" => s.sacks_arity = num(a)?,
                "mu_param" => s.mu_param = num(a)?,
                "maxposs" => s.maxposs = if a == "recursive" { None } else { Some(num(a)?) },
                "nm_len" => s.nm_len = num(a)?,
                "nm_b" => s.nm_b = num(a)?,
                "ls_poss" => s.ls_poss = num(a)?,
                "ls_base" => s.ls_base = num(a)?,
                "ls_divisor" => s.ls_divisor = num(a)?,
                _ => unreachable!("keys checked"),
            }
        }
        Ok(s)
    }

    pub fn to_node(&self) -> Node {
        let kv = |k: &str, v: String| Node::new(k).arg(v);
        Node::new("frame")
            .arg("toy")
            .child(kv("height", self.height.to_string()))
            .child(kv("sacks_len", self.sacks_len.to_string()))
            .child(kv("j_count", self.j_count.to_string()))
            .child(kv("big_b", self.big_b.to_string()))
            .child(kv("sub_big_b", self.sub_big_b.to_string()))
            .child(kv("sacks_arity", self.sacks_arity.to_string()))
            .child(kv("mu_param", self.mu_param.to_string()))
            .child(kv("maxposs", self.maxposs.map_or("recursive".into(), |m| m.to_string())))
            .child(kv("nm_len", self.nm_len.to_string()))
            .child(kv("nm_b", self.nm_b.to_string()))
            .child(kv("ls_poss", self.ls_poss.to_string()))
            .child(kv("ls_base", self.ls_base.to_string()))
            .child(kv("ls_divisor", self.ls_divisor.to_string()))
    }
}

/// A compound creature: Sacks columns by index, subatoms by index, level and `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreatureSpec {
    pub m_dn: u64,
    pub m_up: u64,
    pub halving: Vec<Rational>,
    pub columns: BTreeMap<Index, Vec<u64>>,
    pub rows: BTreeMap<Index, Vec<Vec<Vec<u64>>>>,
}

impl CreatureSpec {
    pub fn from_creature(c: &CompoundCreature) -> Self {
        CreatureSpec {
            m_dn: c.m_dn(),
            m_up: c.m_up(),
            halving: c.halving_all().to_vec(),
            columns: c.columns().iter().map(|(i, col)| (*i, col.branches().to_vec())).collect(),
            rows: c
                .grid()
                .iter()
                .map(|(i, g)| (*i, g.iter().map(|row| row.iter().map(|x| x.poss().to_vec()).collect()).collect()))
                .collect(),
        }
    }

    pub fn build(&self, frame: &Frame) -> Result<CompoundCreature, CliError> {
        let span = frame.sacks_interval(self.m_dn, self.m_up)?;
        let sacks = self
            .columns
            .iter()
            .map(|(i, b)| Ok((*i, SacksColumn::new(span, b.iter().copied())?)))
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        let grid = self
            .rows
            .iter()
            .map(|(i, rows)| {
                let g = rows
                    .iter()
                    .map(|row| row.iter().map(|p| Subatom::new(p.iter().copied())).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((*i, g))
            })
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        Ok(CompoundCreature::new(frame, self.m_dn, self.m_up, sacks, grid, self.halving.clone())?)
    }

    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.arity(2)?;
        n.only(&["halving", "column", "row"])?;
        let (m_dn, m_up): (u64, u64) = (num(&n.args[0])?, num(&n.args[1])?);
        if m_dn >= m_up {
            return Err(schema(format!("creature on [{m_dn}, {m_up}) is empty")));
        }
        let halving = match n.one("halving")? {
            Some(h) => h.args.iter().map(|a| rational(a)).collect::<Result<_, _>>()?,
            None => vec![Rational::from_integer(0.into()); (m_up - m_dn) as usize],
        };
        let mut columns = BTreeMap::new();
        for c in n.all("column") {
            if c.args.is_empty() {
                return Err(schema("`column` needs an index"));
            }
            if columns.insert(index(&c.args[0])?, nums(&c.args[1..])?).is_some() {
                return Err(schema(format!("column {} given twice", c.args[0])));
            }
        }
        let mut by_level: BTreeMap<Index, BTreeMap<u64, Vec<Vec<u64>>>> = BTreeMap::new();
        for r in n.all("row") {
            r.arity(2)?;
            r.only(&["x"])?;
            let ix = index(&r.args[0])?;
            let level: u64 = num(&r.args[1])?;
            if !(m_dn..m_up).contains(&level) {
                return Err(schema(format!("row {ix} at level {level} lies outside [{m_dn}, {m_up})")));
            }
            let xs = r.all("x").map(|x| nums(&x.args)).collect::<Result<Vec<_>, _>>()?;
            if by_level.entry(ix).or_default().insert(level, xs).is_some() {
                return Err(schema(format!("row {ix} at level {level} given twice")));
            }
        }
        let mut rows = BTreeMap::new();
        for (ix, levels) in by_level {
            if levels.len() as u64 != m_up - m_dn {
                return Err(schema(format!("index {ix} needs one row per level of [{m_dn}, {m_up})")));
            }
            rows.insert(ix, levels.into_values().collect());
        }
        Ok(CreatureSpec { m_dn, m_up, halving, columns, rows })
    }

    pub fn to_node(&self) -> Node {
        let mut n = Node::new("creature").arg(self.m_dn).arg(self.m_up);
        n = n.child(Node::new("halving").args(self.halving.iter().map(fmt_rational)));
        for (i, b) in &self.columns {
            n = n.child(Node::new("column").arg(i).args(b));
        }
        for (i, rows) in &self.rows {
            for (k, row) in rows.iter().enumerate() {
                let mut r = Node::new("row").arg(i).arg(self.m_dn + k as u64);
                for x in row {
                    r = r.child(Node::new("x").args(x));
                }
                n = n.child(r);
            }
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSpec {
    pub name: String,
    pub w: Vec<u64>,
    pub schedule: Vec<Rational>,
    pub trunk: BTreeMap<Index, TrunkValue>,
    pub creatures: Vec<CreatureSpec>,
}

impl ConditionSpec {
    pub fn from_condition(name: &str, p: &ConditionPrefix) -> Self {
        ConditionSpec {
            name: name.to_string(),
            w: p.w().to_vec(),
            schedule: p.schedule().to_vec(),
            trunk: p.trunk().clone(),
            creatures: p.creatures().iter().map(CreatureSpec::from_creature).collect(),
        }
    }

    pub fn build(&self, frame: &Frame) -> Result<ConditionPrefix, CliError> {
        let cs = self.creatures.iter().map(|c| c.build(frame)).collect::<Result<Vec<_>, _>>()?;
        Ok(ConditionPrefix::new(self.w.clone(), cs, self.trunk.clone(), self.schedule.clone())?)
    }

    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.arity(1)?;
        n.only(&["w", "schedule", "trunk", "creature"])?;
        let w = nums(&n.require("w")?.args)?;
        let schedule = match n.one("schedule")? {
            Some(s) => s.args.iter().map(|a| rational(a)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let mut trunk = BTreeMap::new();
        for t in n.all("trunk") {
            if t.args.len() < 2 {
                return Err(schema("`trunk` needs an index and a kind"));
            }
            let ix = index(&t.args[0])?;
            let v = match t.args[1].as_str() {
                "sacks" => {
                    t.arity(3)?;
                    TrunkValue::Sacks(num(&t.args[2])?)
                }
                "sub" => TrunkValue::Subatomic(nums(&t.args[2..])?),
                k => return Err(schema(format!("trunk kind `{k}` is neither `sacks` nor `sub`"))),
            };
            if trunk.insert(ix, v).is_some() {
                return Err(schema(format!("trunk at {ix} given twice")));
            }
        }
        let creatures = n.all("creature").map(CreatureSpec::from_node).collect::<Result<_, _>>()?;
        Ok(ConditionSpec { name: n.args[0].clone(), w, schedule, trunk, creatures })
    }

    pub fn to_node(&self) -> Node {
        let mut n = Node::new("condition").arg(&self.name).child(Node::new("w").args(&self.w));
        if !self.schedule.is_empty() {
            n = n.child(Node::new("schedule").args(self.schedule.iter().map(fmt_rational)));
        }
        for (i, t) in &self.trunk {
            n = n.child(match t {
                TrunkValue::Sacks(bits) => Node::new("trunk").arg(i).arg("sacks").arg(bits),
                TrunkValue::Subatomic(v) => Node::new("trunk").arg(i).arg("sub").args(v),
            });
        }
        for c in &self.creatures {
            n = n.child(c.to_node());
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    Nm { len: u32, b: u64 },
    Nn { len: u32, b: u64 },
    Cn { len: u32, b: u64 },
    Counting { poss: u64, base: u64, divisor: Rational },
}

impl FamilySpec {
    pub fn build(&self) -> Result<FamilyRef, CliError> {
        let iv = |len: u32| IndexInterval::new(0, len);
        Ok(match self {
            FamilySpec::Nm { len, b } => Arc::new(NmFamily::unchecked(iv(*len), *b)?),
            FamilySpec::Nn { len, b } => Arc::new(NnFamily::unchecked(iv(*len), *b)?),
            FamilySpec::Cn { len, b } => Arc::new(CnFamily::unchecked(iv(*len), *b)?),
            FamilySpec::Counting { poss, base, divisor } => Arc::new(CountingFamily::new(*poss, *base, divisor.clone())?),
        })
    }

    pub fn from_args(args: &[String]) -> Result<Self, DocError> {
        let kind = args.first().ok_or_else(|| schema("missing family kind"))?;
        let want = if kind == "counting" { 4 } else { 3 };
        if args.len() != want {
            return Err(schema(format!("family `{kind}` takes {} parameters", want - 1)));
        }
        Ok(match kind.as_str() {
            "nm" => FamilySpec::Nm { len: num(&args[1])?, b: num(&args[2])? },
            "nn" => FamilySpec::Nn { len: num(&args[1])?, b: num(&args[2])? },
            "cn" => FamilySpec::Cn { len: num(&args[1])?, b: num(&args[2])? },
            "counting" => FamilySpec::Counting { poss: num(&args[1])?, base: num(&args[2])?, divisor: rational(&args[3])? },
            k => return Err(schema(format!("unknown family `{k}`"))),
        })
    }

    pub fn to_args(&self) -> Vec<String> {
        match self {
            FamilySpec::Nm { len, b } => vec!["nm".into(), len.to_string(), b.to_string()],
            FamilySpec::Nn { len, b } => vec!["nn".into(), len.to_string(), b.to_string()],
            FamilySpec::Cn { len, b } => vec!["cn".into(), len.to_string(), b.to_string()],
            FamilySpec::Counting { poss, base, divisor } => {
                vec!["counting".into(), poss.to_string(), base.to_string(), fmt_rational(divisor)]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubatomSpec {
    pub family: FamilySpec,
    pub poss: Vec<u64>,
}

impl SubatomSpec {
    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.only(&["x"])?;
        let family = FamilySpec::from_args(&n.args)?;
        Ok(SubatomSpec { family, poss: nums(&n.require("x")?.args)? })
    }

    pub fn to_node(&self) -> Node {
        Node::new("subatom").args(self.family.to_args()).child(Node::new("x").args(&self.poss))
    }
}

/// A standalone Sacks column on `[0, len)` with norm parameters `B` and `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub len: u32,
    pub big_b: u64,
    pub m: u64,
    pub branches: Vec<u64>,
}

impl ColumnSpec {
    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.arity(3)?;
        n.only(&["x"])?;
        Ok(ColumnSpec { len: num(&n.args[0])?, big_b: num(&n.args[1])?, m: num(&n.args[2])?, branches: nums(&n.require("x")?.args)? })
    }

    pub fn to_node(&self) -> Node {
        Node::new("column").arg(self.len).arg(self.big_b).arg(self.m).child(Node::new("x").args(&self.branches))
    }
}

/// A verification job: lemma, parameters, seed and the data of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobSpec {
    pub lemma: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub data: Vec<Node>,
}

impl JobSpec {
    pub fn new(lemma: &str) -> Self {
        JobSpec { lemma: lemma.to_string(), params: Vec::new(), seed: None, data: Vec::new() }
    }

    pub fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.push((k.to_string(), v.to_string()));
        self
    }

    pub fn data(mut self, n: Node) -> Self {
        self.data.push(n);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_num<T: FromStr>(&self, key: &str) -> Result<T, DocError> {
        num(self.get(key).ok_or_else(|| schema(format!("job needs `param {key}`")))?)
    }

    fn from_node(n: &Node) -> Result<Self, DocError> {
        n.arity(1)?;
        let mut job = JobSpec::new(&n.args[0]);
        for c in &n.children {
            match c.key.as_str() {
                "param" => {
                    c.arity(2)?;
                    job.params.push((c.args[0].clone(), c.args[1].clone()));
                }
                "seed" => {
                    c.arity(1)?;
                    job.seed = Some(num(&c.args[0])?);
                }
                _ => job.data.push(c.clone()),
            }
        }
        Ok(job)
    }

    pub fn to_node(&self) -> Node {
        let mut n = Node::new("job").arg(&self.lemma);
        for (k, v) in &self.params {
            n = n.child(Node::new("param").arg(k).arg(v));
        }
        if let Some(s) = self.seed {
            n = n.child(Node::new("seed").arg(s));
        }
        for d in &self.data {
            n = n.child(d.clone());
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Frame(FrameSpec),
    Creature(CreatureSpec),
    Condition(ConditionSpec),
    Subatom(SubatomSpec),
    Column(ColumnSpec),
    Job(JobSpec),
}

impl Item {
    pub fn from_node(n: &Node) -> Result<Self, DocError> {
        Ok(match n.key.as_str() {
            "frame" => Item::Frame(FrameSpec::from_node(n)?),
            "creature" => Item::Creature(CreatureSpec::from_node(n)?),
            "condition" => Item::Condition(ConditionSpec::from_node(n)?),
            "subatom" => Item::Subatom(SubatomSpec::from_node(n)?),
            "column" => Item::Column(ColumnSpec::from_node(n)?),
            "job" => Item::Job(JobSpec::from_node(n)?),
            k => return Err(schema(format!("unknown top-level key `{k}`"))),
        })
    }

    pub fn to_node(&self) -> Node {
        match self {
            Item::Frame(f) => f.to_node(),
            Item::Creature(c) => c.to_node(),
            Item::Condition(c) => c.to_node(),
            Item::Subatom(s) => s.to_node(),
            Item::Column(c) => c.to_node(),
            Item::Job(j) => j.to_node(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecDocument {
    pub items: Vec<Item>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        Self::from_nodes(&doc::parse(text)?)
    }

    pub fn from_nodes(nodes: &[Node]) -> Result<Self, DocError> {
        let items = nodes.iter().map(Item::from_node).collect::<Result<Vec<_>, _>>()?;
        if items.iter().filter(|i| matches!(i, Item::Frame(_))).count() > 1 {
            return Err(schema("at most one frame per document"));
        }
        Ok(SpecDocument { items })
    }

    pub fn render(&self) -> String {
        doc::render(&self.items.iter().map(Item::to_node).collect::<Vec<_>>())
    }

    pub fn push(&mut self, item: Item) {
        self.items.push(item);
    }

    pub fn frame_spec(&self) -> Option<&FrameSpec> {
        self.items.iter().find_map(|i| match i {
            Item::Frame(f) => Some(f),
            _ => None,
        })
    }

    pub fn frame(&self) -> Result<Frame, CliError> {
        self.frame_spec().ok_or_else(|| CliError::Usage("the document declares no frame".into()))?.build()
    }

    pub fn creatures(&self) -> Vec<&CreatureSpec> {
        self.items.iter().filter_map(|i| if let Item::Creature(c) = i { Some(c) } else { None }).collect()
    }

    pub fn conditions(&self) -> Vec<&ConditionSpec> {
        self.items.iter().filter_map(|i| if let Item::Condition(c) = i { Some(c) } else { None }).collect()
    }

    pub fn condition(&self, name: &str) -> Result<&ConditionSpec, CliError> {
        self.conditions()
            .into_iter()
            .find(|c| c.name == name)
            .ok_or_else(|| CliError::Usage(format!("no condition named `{name}`")))
    }

    pub fn jobs(&self) -> Vec<&JobSpec> {
        self.items.iter().filter_map(|i| if let Item::Job(j) = i { Some(j) } else { None }).collect()
    }
}
