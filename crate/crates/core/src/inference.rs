//! Forward-chaining rule engine over group diagrams: finiteness properties
//! (F_n, FP_n over Z and Q, KP_n, K_n), compactness flags and cd/hd intervals
//! are propagated to a fixpoint through a fixed catalogue of closure rules,
//! with derivation certificates and contradiction detection.
//!
//! Graded properties are stored as intervals: the largest level known true
//! (downward closure is built into the representation) and the smallest
//! level known false. Numeric levels are capped at 64 with infinity as a top
//! element, which keeps closure finite; bounds that would exceed the cap are
//! weakened soundly.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::json;

use crate::error::{Error, Result};

pub const LEVEL_CAP: u32 = 64;

/// A finiteness level: 0..=64 or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Fin(u32),
    Inf,
}

impl Level {
    fn clamp(self) -> Level {
        match self {
            Level::Fin(n) if n > LEVEL_CAP => Level::Fin(LEVEL_CAP),
            l => l,
        }
    }

    fn plus(self, k: u32) -> Level {
        match self {
            Level::Fin(n) => Level::Fin(n + k).clamp(),
            Level::Inf => Level::Inf,
        }
    }

    /// Saturating difference; subtracting infinity yields no information (0).
    fn minus(self, other: Level) -> Level {
        match (self, other) {
            (_, Level::Inf) => Level::Fin(0),
            (Level::Inf, _) => Level::Inf,
            (Level::Fin(a), Level::Fin(b)) => Level::Fin(a.saturating_sub(b)),
        }
    }

    fn parse(text: &str) -> Option<Level> {
        if text == "inf" {
            return Some(Level::Inf);
        }
        text.parse::<u32>().ok().filter(|&n| n <= LEVEL_CAP).map(Level::Fin)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Fin(n) => write!(f, "{n}"),
            Level::Inf => write!(f, "inf"),
        }
    }
}

pub fn min_level(a: Level, b: Level) -> Level {
    a.min(b)
}

/// Boolean (tri-state) properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BProp {
    Compact,
    SigmaCompact,
    CompactlyGenerated,
    CompactlyPresented,
    PolyCompactOpenByCyclic,
}

const BPROPS: usize = 5;

impl BProp {
    fn name(self) -> &'static str {
        match self {
            BProp::Compact => "compact",
            BProp::SigmaCompact => "sigma_compact",
            BProp::CompactlyGenerated => "compactly_generated",
            BProp::CompactlyPresented => "compactly_presented",
            BProp::PolyCompactOpenByCyclic => "poly_compact_open_by_cyclic",
        }
    }
}

/// Graded properties; downward closure (P_n implies P_{n-1}) is automatic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GProp {
    F,
    FpZ,
    FpQ,
    KpZ,
    KpQ,
    K,
}

const GPROPS: usize = 6;

impl GProp {
    fn name(self) -> &'static str {
        match self {
            GProp::F => "F",
            GProp::FpZ => "FP over Z",
            GProp::FpQ => "FP over Q",
            GProp::KpZ => "KP over Z",
            GProp::KpQ => "KP over Q",
            GProp::K => "K",
        }
    }
}

/// Provenance sentinel for baseline facts (F_0 etc.) that need no derivation.
const BASELINE: usize = usize::MAX;

#[derive(Debug, Clone)]
struct GroupState {
    bools: [Option<(bool, usize)>; BPROPS],
    /// Largest level known true, per graded property. Baseline Fin(0).
    true_upto: [(Level, usize); GPROPS],
    /// Smallest level known false, if any.
    false_from: [Option<(Level, usize)>; GPROPS],
    cd_lower: (Level, usize),
    cd_upper: (Level, usize),
    hd_lower: (Level, usize),
    hd_upper: (Level, usize),
}

impl GroupState {
    fn new() -> GroupState {
        GroupState {
            bools: [None; BPROPS],
            true_upto: [(Level::Fin(0), BASELINE); GPROPS],
            false_from: [None; GPROPS],
            cd_lower: (Level::Fin(0), BASELINE),
            cd_upper: (Level::Inf, BASELINE),
            hd_lower: (Level::Fin(0), BASELINE),
            hd_upper: (Level::Inf, BASELINE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// extension N G Q: N normal closed in G with quotient Q.
    Extension { n: usize, g: usize, q: usize },
    ClosedCocompact { h: usize, g: usize },
    OpenFiniteIndex { h: usize, g: usize },
    UniformLattice { l: usize, g: usize },
    QuasiIsometric { a: usize, b: usize },
    /// G is a quasi-retract of H.
    QuasiRetract { g: usize, h: usize },
    /// H is a group retract of G.
    GroupRetract { h: usize, g: usize },
    NormalClosed { n: usize, g: usize },
    /// G = B wr_X H. `orbitfin` = largest p with finitely many G-orbits on
    /// X^p; `stabfp` = largest s such that X^p stabilizers have FP_{s-p}.
    Wreath {
        g: usize,
        b: usize,
        h: usize,
        orbitfin: Level,
        stabfp: Level,
    },
}

#[derive(Debug, Clone)]
pub struct Derivation {
    /// Human-readable fact, e.g. "G: F >= 2".
    pub fact: String,
    /// "axiom" or a rule id "R0".."R18".
    pub rule: String,
    pub citation: String,
    /// Indices of premise derivations (baseline facts omitted).
    pub premises: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Contradiction {
    pub fact: String,
    pub derivation_a: usize,
    pub derivation_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Bool(BProp),
    Graded(GProp, Level),
    CdLe(Level),
    CdGe(Level),
    HdLe(Level),
    HdGe(Level),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    True,
    False,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::True => write!(f, "true"),
            Answer::False => write!(f, "false"),
            Answer::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Db {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    groups: Vec<GroupState>,
    pub relations: Vec<Relation>,
    pub derivations: Vec<Derivation>,
    pub queries: Vec<(usize, Query, String)>,
    pub contradiction: Option<Contradiction>,
}

impl Db {
    pub fn new() -> Db {
        Db {
            names: Vec::new(),
            index: BTreeMap::new(),
            groups: Vec::new(),
            relations: Vec::new(),
            derivations: Vec::new(),
            queries: Vec::new(),
            contradiction: None,
        }
    }

    pub fn group_names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::invalid("inference", format!("unknown group {name}")))
    }

    fn add_group(&mut self, name: &str, line: usize) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(Error::Syntax {
                line,
                detail: format!("group {name} redeclared"),
            });
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.groups.push(GroupState::new());
        Ok(id)
    }

    fn push_derivation(
        &mut self,
        fact: String,
        rule: &str,
        citation: &str,
        premises: &[usize],
    ) -> usize {
        let premises = premises.iter().cloned().filter(|&p| p != BASELINE).collect();
        self.derivations.push(Derivation {
            fact,
            rule: rule.to_string(),
            citation: citation.to_string(),
            premises,
        });
        self.derivations.len() - 1
    }

    fn note_contradiction(&mut self, fact: String, a: usize, b: usize) {
        if self.contradiction.is_none() {
            self.contradiction = Some(Contradiction {
                fact,
                derivation_a: a,
                derivation_b: b,
            });
        }
    }

    fn set_bool(
        &mut self,
        g: usize,
        p: BProp,
        val: bool,
        rule: &str,
        citation: &str,
        premises: &[usize],
    ) -> bool {
        if let Some((cur, prov)) = self.groups[g].bools[p as usize] {
            if cur != val {
                let fact = format!("{}: {} = {}", self.names[g], p.name(), val);
                let d = self.push_derivation(fact.clone(), rule, citation, premises);
                self.note_contradiction(fact, prov, d);
            }
            return false;
        }
        let fact = format!("{}: {} = {}", self.names[g], p.name(), val);
        let d = self.push_derivation(fact, rule, citation, premises);
        self.groups[g].bools[p as usize] = Some((val, d));
        true
    }

    fn set_graded_true(
        &mut self,
        g: usize,
        p: GProp,
        level: Level,
        rule: &str,
        citation: &str,
        premises: &[usize],
    ) -> bool {
        let level = level.clamp();
        if level <= self.groups[g].true_upto[p as usize].0 {
            return false;
        }
        let fact = format!("{}: {}_{} = true", self.names[g], p.name(), level);
        let d = self.push_derivation(fact.clone(), rule, citation, premises);
        self.groups[g].true_upto[p as usize] = (level, d);
        if let Some((ff, fprov)) = self.groups[g].false_from[p as usize] {
            if ff <= level {
                self.note_contradiction(fact, fprov, d);
            }
        }
        true
    }

    fn set_graded_false(
        &mut self,
        g: usize,
        p: GProp,
        level: Level,
        rule: &str,
        citation: &str,
        premises: &[usize],
    ) -> bool {
        let level = level.clamp();
        if let Some((ff, _)) = self.groups[g].false_from[p as usize] {
            if ff <= level {
                return false;
            }
        }
        let fact = format!("{}: {}_{} = false", self.names[g], p.name(), level);
        let d = self.push_derivation(fact.clone(), rule, citation, premises);
        self.groups[g].false_from[p as usize] = Some((level, d));
        let (tu, tprov) = self.groups[g].true_upto[p as usize];
        if tu >= level {
            self.note_contradiction(fact, tprov, d);
        }
        true
    }

    fn raise_cd_lower(&mut self, g: usize, level: Level, rule: &str, cit: &str, prem: &[usize]) -> bool {
        if level <= self.groups[g].cd_lower.0 {
            return false;
        }
        let fact = format!("{}: cd_Q >= {level}", self.names[g]);
        let d = self.push_derivation(fact.clone(), rule, cit, prem);
        self.groups[g].cd_lower = (level, d);
        let (u, uprov) = self.groups[g].cd_upper;
        if level > u {
            self.note_contradiction(fact, uprov, d);
        }
        true
    }

    fn drop_cd_upper(&mut self, g: usize, level: Level, rule: &str, cit: &str, prem: &[usize]) -> bool {
        if level >= self.groups[g].cd_upper.0 {
            return false;
        }
        let fact = format!("{}: cd_Q <= {level}", self.names[g]);
        let d = self.push_derivation(fact.clone(), rule, cit, prem);
        self.groups[g].cd_upper = (level, d);
        let (l, lprov) = self.groups[g].cd_lower;
        if l > level {
            self.note_contradiction(fact, lprov, d);
        }
        true
    }

    fn raise_hd_lower(&mut self, g: usize, level: Level, rule: &str, cit: &str, prem: &[usize]) -> bool {
        if level <= self.groups[g].hd_lower.0 {
            return false;
        }
        let fact = format!("{}: hd_Q >= {level}", self.names[g]);
        let d = self.push_derivation(fact.clone(), rule, cit, prem);
        self.groups[g].hd_lower = (level, d);
        let (u, uprov) = self.groups[g].hd_upper;
        if level > u {
            self.note_contradiction(fact, uprov, d);
        }
        true
    }

    fn drop_hd_upper(&mut self, g: usize, level: Level, rule: &str, cit: &str, prem: &[usize]) -> bool {
        if level >= self.groups[g].hd_upper.0 {
            return false;
        }
        let fact = format!("{}: hd_Q <= {level}", self.names[g]);
        let d = self.push_derivation(fact.clone(), rule, cit, prem);
        self.groups[g].hd_upper = (level, d);
        let (l, lprov) = self.groups[g].hd_lower;
        if l > level {
            self.note_contradiction(fact, lprov, d);
        }
        true
    }

    // Accessors used by rules.
    fn get_bool(&self, g: usize, p: BProp) -> Option<(bool, usize)> {
        self.groups[g].bools[p as usize]
    }

    fn true_upto(&self, g: usize, p: GProp) -> (Level, usize) {
        self.groups[g].true_upto[p as usize]
    }

    fn false_from(&self, g: usize, p: GProp) -> Option<(Level, usize)> {
        self.groups[g].false_from[p as usize]
    }

    /// Tri-state answer plus the witnessing derivation index.
    pub fn answer(&self, g: usize, q: &Query) -> (Answer, Option<usize>) {
        let st = &self.groups[g];
        match q {
            Query::Bool(p) => match st.bools[*p as usize] {
                Some((true, d)) => (Answer::True, Some(d)),
                Some((false, d)) => (Answer::False, Some(d)),
                None => (Answer::Unknown, None),
            },
            Query::Graded(p, level) => {
                let (tu, tprov) = st.true_upto[*p as usize];
                if tu >= *level {
                    return (Answer::True, if tprov == BASELINE { None } else { Some(tprov) });
                }
                if let Some((ff, fprov)) = st.false_from[*p as usize] {
                    if ff <= *level {
                        return (Answer::False, Some(fprov));
                    }
                }
                (Answer::Unknown, None)
            }
            Query::CdLe(k) => {
                if st.cd_upper.0 <= *k {
                    let d = st.cd_upper.1;
                    (Answer::True, if d == BASELINE { None } else { Some(d) })
                } else if st.cd_lower.0 > *k {
                    (Answer::False, Some(st.cd_lower.1))
                } else {
                    (Answer::Unknown, None)
                }
            }
            Query::CdGe(k) => {
                if st.cd_lower.0 >= *k {
                    let d = st.cd_lower.1;
                    (Answer::True, if d == BASELINE { None } else { Some(d) })
                } else if st.cd_upper.0 < *k {
                    (Answer::False, Some(st.cd_upper.1))
                } else {
                    (Answer::Unknown, None)
                }
            }
            Query::HdLe(k) => {
                if st.hd_upper.0 <= *k {
                    let d = st.hd_upper.1;
                    (Answer::True, if d == BASELINE { None } else { Some(d) })
                } else if st.hd_lower.0 > *k {
                    (Answer::False, Some(st.hd_lower.1))
                } else {
                    (Answer::Unknown, None)
                }
            }
            Query::HdGe(k) => {
                if st.hd_lower.0 >= *k {
                    let d = st.hd_lower.1;
                    (Answer::True, if d == BASELINE { None } else { Some(d) })
                } else if st.hd_upper.0 < *k {
                    (Answer::False, Some(st.hd_upper.1))
                } else {
                    (Answer::Unknown, None)
                }
            }
        }
    }

    /// Derivation chain (topologically ordered, ending with `idx`).
    pub fn chain(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.derivations.len()];
        fn walk(db: &Db, i: usize, seen: &mut [bool], out: &mut Vec<usize>) {
            if seen[i] {
                return;
            }
            seen[i] = true;
            for &p in &db.derivations[i].premises {
                walk(db, p, seen, out);
            }
            out.push(i);
        }
        walk(self, idx, &mut seen, &mut out);
        out
    }
}

impl Default for Db {
    fn default() -> Self {
        Db::new()
    }
}

// ---------------------------------------------------------------------------
// DSL parser
// ---------------------------------------------------------------------------

fn parse_bprop(text: &str) -> Option<BProp> {
    Some(match text {
        "compact" => BProp::Compact,
        "sigma_compact" => BProp::SigmaCompact,
        "compactly_generated" => BProp::CompactlyGenerated,
        "compactly_presented" => BProp::CompactlyPresented,
        "poly_compact_open_by_cyclic" => BProp::PolyCompactOpenByCyclic,
        _ => return None,
    })
}

/// Parse `PROP [ARGS] ["over" RING]` into a Query (shared by property and
/// query statements).
fn parse_prop(tokens: &[&str], line: usize) -> Result<Query> {
    let syntax = |detail: String| Error::Syntax { line, detail };
    let prop = tokens
        .first()
        .ok_or_else(|| syntax("missing property".into()))?;
    if let Some(b) = parse_bprop(prop) {
        if tokens.len() > 1 {
            return Err(syntax(format!("{prop} takes no arguments")));
        }
        return Ok(Query::Bool(b));
    }
    let level_at = |i: usize| -> Result<Level> {
        let t = tokens
            .get(i)
            .ok_or_else(|| syntax(format!("{prop} needs a numeric argument")))?;
        Level::parse(t).ok_or_else(|| {
            syntax(format!("bad level `{t}` (0..={LEVEL_CAP} or inf)"))
        })
    };
    match *prop {
        "F" | "K" => {
            if tokens.len() != 2 {
                return Err(syntax(format!("usage: {prop} N")));
            }
            let l = level_at(1)?;
            Ok(Query::Graded(if *prop == "F" { GProp::F } else { GProp::K }, l))
        }
        "FP" | "KP" => {
            let l = level_at(1)?;
            let ring = match tokens.get(2..) {
                Some(["over", "Z"]) | Some([]) | None => 'Z',
                Some(["over", "Q"]) => 'Q',
                _ => return Err(syntax(format!("usage: {prop} N [over Z|Q]"))),
            };
            let p = match (*prop, ring) {
                ("FP", 'Z') => GProp::FpZ,
                ("FP", 'Q') => GProp::FpQ,
                ("KP", 'Z') => GProp::KpZ,
                _ => GProp::KpQ,
            };
            Ok(Query::Graded(p, l))
        }
        "cd_le" => Ok(Query::CdLe(level_at(1)?)),
        "cd_ge" => Ok(Query::CdGe(level_at(1)?)),
        "hd_le" => Ok(Query::HdLe(level_at(1)?)),
        "hd_ge" => Ok(Query::HdGe(level_at(1)?)),
        other => Err(syntax(format!("unknown property `{other}`"))),
    }
}

/// Parse the line-oriented DSL:
/// `group NAME | property NAME PROP [ARGS] [over RING] [= BOOL] |
///  relation KIND NAME+ [KEY=VAL...] | query NAME PROP [ARGS] [over RING]`.
/// `#` starts a comment.
pub fn parse(script: &str) -> Result<Db> {
    let mut db = Db::new();
    for (lineno, raw) in script.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.split('#').next().unwrap().trim();
        if text.is_empty() {
            continue;
        }
        let syntax = |detail: String| Error::Syntax { line, detail };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens[0] {
            "group" => {
                if tokens.len() != 2 {
                    return Err(syntax("usage: group NAME".into()));
                }
                db.add_group(tokens[1], line)?;
            }
            "property" => {
                if tokens.len() < 3 {
                    return Err(syntax("usage: property NAME PROP ...".into()));
                }
                let g = db
                    .lookup(tokens[1])
                    .map_err(|_| syntax(format!("unknown group {}", tokens[1])))?;
                // Split off a trailing `= BOOL`.
                let (body, value) = match tokens.iter().position(|&t| t == "=") {
                    Some(i) => {
                        let v = match tokens.get(i + 1) {
                            Some(&"true") => true,
                            Some(&"false") => false,
                            _ => return Err(syntax("expected true/false after =".into())),
                        };
                        if tokens.len() != i + 2 {
                            return Err(syntax("trailing tokens after boolean".into()));
                        }
                        (&tokens[2..i], v)
                    }
                    None => (&tokens[2..], true),
                };
                let q = parse_prop(body, line)?;
                apply_axiom(&mut db, g, &q, value, line)?;
            }
            "relation" => {
                if tokens.len() < 3 {
                    return Err(syntax("usage: relation KIND NAME...".into()));
                }
                let rel = parse_relation(&db, &tokens[1..], line)?;
                db.relations.push(rel);
            }
            "query" => {
                if tokens.len() < 3 {
                    return Err(syntax("usage: query NAME PROP ...".into()));
                }
                let g = db
                    .lookup(tokens[1])
                    .map_err(|_| syntax(format!("unknown group {}", tokens[1])))?;
                let q = parse_prop(&tokens[2..], line)?;
                db.queries.push((g, q, text.to_string()));
            }
            other => return Err(syntax(format!("unknown statement `{other}`"))),
        }
    }
    Ok(db)
}

fn apply_axiom(db: &mut Db, g: usize, q: &Query, value: bool, line: usize) -> Result<()> {
    match q {
        Query::Bool(p) => {
            db.set_bool(g, *p, value, "axiom", "stated", &[]);
        }
        Query::Graded(p, l) => {
            if value {
                db.set_graded_true(g, *p, *l, "axiom", "stated", &[]);
            } else {
                db.set_graded_false(g, *p, *l, "axiom", "stated", &[]);
            }
        }
        Query::CdLe(l) => {
            if !value {
                return Err(Error::Syntax {
                    line,
                    detail: "use cd_ge instead of cd_le = false".into(),
                });
            }
            db.drop_cd_upper(g, *l, "axiom", "stated", &[]);
        }
        Query::CdGe(l) => {
            if !value {
                return Err(Error::Syntax {
                    line,
                    detail: "use cd_le instead of cd_ge = false".into(),
                });
            }
            db.raise_cd_lower(g, *l, "axiom", "stated", &[]);
        }
        Query::HdLe(l) => {
            if !value {
                return Err(Error::Syntax {
                    line,
                    detail: "use hd_ge instead of hd_le = false".into(),
                });
            }
            db.drop_hd_upper(g, *l, "axiom", "stated", &[]);
        }
        Query::HdGe(l) => {
            if !value {
                return Err(Error::Syntax {
                    line,
                    detail: "use hd_le instead of hd_ge = false".into(),
                });
            }
            db.raise_hd_lower(g, *l, "axiom", "stated", &[]);
        }
    }
    Ok(())
}

fn parse_relation(db: &Db, tokens: &[&str], line: usize) -> Result<Relation> {
    let syntax = |detail: String| Error::Syntax { line, detail };
    let name = |t: &str| -> Result<usize> {
        db.lookup(t)
            .map_err(|_| syntax(format!("unknown group {t}")))
    };
    let need = |n: usize| -> Result<()> {
        // count plain (non key=value) arguments
        let plain = tokens[1..].iter().take_while(|t| !t.contains('=')).count();
        if plain != n {
            return Err(syntax(format!("{} expects {n} group name(s)", tokens[0])));
        }
        Ok(())
    };
    match tokens[0] {
        "extension" => {
            need(3)?;
            Ok(Relation::Extension {
                n: name(tokens[1])?,
                g: name(tokens[2])?,
                q: name(tokens[3])?,
            })
        }
        "closed_cocompact" => {
            need(2)?;
            Ok(Relation::ClosedCocompact {
                h: name(tokens[1])?,
                g: name(tokens[2])?,
            })
        }
        "open_finite_index" => {
            need(2)?;
            Ok(Relation::OpenFiniteIndex {
                h: name(tokens[1])?,
                g: name(tokens[2])?,
            })
        }
        "uniform_lattice" => {
            need(2)?;
            Ok(Relation::UniformLattice {
                l: name(tokens[1])?,
                g: name(tokens[2])?,
            })
        }
        "quasi_isometric" => {
            need(2)?;
            Ok(Relation::QuasiIsometric {
                a: name(tokens[1])?,
                b: name(tokens[2])?,
            })
        }
        "quasi_retract" => {
            need(2)?;
            Ok(Relation::QuasiRetract {
                g: name(tokens[1])?,
                h: name(tokens[2])?,
            })
        }
        "group_retract" => {
            need(2)?;
            Ok(Relation::GroupRetract {
                h: name(tokens[1])?,
                g: name(tokens[2])?,
            })
        }
        "normal_closed" => {
            need(2)?;
            Ok(Relation::NormalClosed {
                n: name(tokens[1])?,
                g: name(tokens[2])?,
            })
        }
        "wreath" => {
            need(3)?;
            let mut orbitfin = Level::Fin(0);
            let mut stabfp = Level::Fin(0);
            for t in &tokens[4..] {
                let (k, v) = t
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("bad parameter `{t}`")))?;
                let l = Level::parse(v)
                    .ok_or_else(|| syntax(format!("bad level `{v}`")))?;
                match k {
                    "orbitfin" => orbitfin = l,
                    "stabfp" => stabfp = l,
                    _ => return Err(syntax(format!("unknown parameter `{k}`"))),
                }
            }
            Ok(Relation::Wreath {
                g: name(tokens[1])?,
                b: name(tokens[2])?,
                h: name(tokens[3])?,
                orbitfin,
                stabfp,
            })
        }
        other => Err(syntax(format!("unknown relation kind `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// Rule catalogue
// ---------------------------------------------------------------------------

const C_R0: &str = "compact groups have every finiteness property";
const C_R1: &str = "compact generation/presentation vs F_1/F_2";
const C_R2: &str = "type F_n implies type FP_n";
const C_R3: &str = "FP_n over Z plus compact presentability gives F_n";
const C_R4: &str = "FP_n is equivalent to KP_n";
const C_R5: &str = "FP_n over Z implies FP_n over Q";
const C_R6: &str = "extension theorem";
const C_R7: &str = "closed cocompact subgroup equivalence";
const C_R8: &str = "quasi-isometry invariance";
const C_R9: &str = "quasi-retract theorem (n >= 2)";
const C_R10: &str = "uniform lattice equivalence";
const C_R11: &str = "group retracts inherit compact presentability";
const C_R12: &str = "wreath sufficiency (orbit and stabilizer conditions)";
const C_R13: &str = "wreath necessity for generation/presentation";
const C_R14: &str = "wreath necessity in higher degrees";
const C_R15: &str = "wreath criterion over poly-(compact-open-by-cyclic) tops";
const C_R16: &str = "hd/cd comparison";
const C_R17: &str = "cd subadditivity over extensions";
const C_R18: &str = "type F_n implies type K_n";

const NUM_RULES: usize = 19;

fn apply_rule(db: &mut Db, rule: usize) -> bool {
    let mut changed = false;
    let ng = db.groups.len();
    match rule {
        0 => {
            // R0: compact => sigma-compact, compactly generated/presented,
            // all graded properties at infinity, cd = hd = 0.
            for g in 0..ng {
                if let Some((true, d)) = db.get_bool(g, BProp::Compact) {
                    changed |= db.set_bool(g, BProp::SigmaCompact, true, "R0", C_R0, &[d]);
                    changed |= db.set_bool(g, BProp::CompactlyGenerated, true, "R0", C_R0, &[d]);
                    changed |= db.set_bool(g, BProp::CompactlyPresented, true, "R0", C_R0, &[d]);
                    for p in [GProp::F, GProp::FpZ, GProp::FpQ, GProp::KpZ, GProp::KpQ, GProp::K] {
                        changed |= db.set_graded_true(g, p, Level::Inf, "R0", C_R0, &[d]);
                    }
                    changed |= db.drop_cd_upper(g, Level::Fin(0), "R0", C_R0, &[d]);
                    changed |= db.drop_hd_upper(g, Level::Fin(0), "R0", C_R0, &[d]);
                }
                // Contrapositive: any finite F-failure refutes compactness.
                if let Some((_, d)) = db.false_from(g, GProp::F) {
                    changed |= db.set_bool(g, BProp::Compact, false, "R0", C_R0, &[d]);
                }
            }
        }
        1 => {
            // R1: F_1 <=> compactly generated; F_2 <=> compactly presented.
            for g in 0..ng {
                for (bp, n) in [(BProp::CompactlyGenerated, 1), (BProp::CompactlyPresented, 2)] {
                    match db.get_bool(g, bp) {
                        Some((true, d)) => {
                            changed |=
                                db.set_graded_true(g, GProp::F, Level::Fin(n), "R1", C_R1, &[d]);
                        }
                        Some((false, d)) => {
                            changed |=
                                db.set_graded_false(g, GProp::F, Level::Fin(n), "R1", C_R1, &[d]);
                        }
                        None => {}
                    }
                    let (tu, tprov) = db.true_upto(g, GProp::F);
                    if tu >= Level::Fin(n) {
                        changed |= db.set_bool(g, bp, true, "R1", C_R1, &[tprov]);
                    }
                    if let Some((ff, fprov)) = db.false_from(g, GProp::F) {
                        if ff <= Level::Fin(n) {
                            changed |= db.set_bool(g, bp, false, "R1", C_R1, &[fprov]);
                        }
                    }
                }
            }
        }
        2 => {
            // R2: F_n => FP_n (both rings); contrapositive FP-failure bounds F.
            for g in 0..ng {
                let (tu, d) = db.true_upto(g, GProp::F);
                for p in [GProp::FpZ, GProp::FpQ] {
                    changed |= db.set_graded_true(g, p, tu, "R2", C_R2, &[d]);
                    if let Some((ff, fd)) = db.false_from(g, p) {
                        changed |= db.set_graded_false(g, GProp::F, ff, "R2", C_R2, &[fd]);
                    }
                }
            }
        }
        3 => {
            // R3: FP_n(Z) and compactly presented => F_n, with contrapositives.
            for g in 0..ng {
                if let Some((true, dcp)) = db.get_bool(g, BProp::CompactlyPresented) {
                    let (tu, d) = db.true_upto(g, GProp::FpZ);
                    changed |= db.set_graded_true(g, GProp::F, tu, "R3", C_R3, &[d, dcp]);
                    if let Some((ff, fd)) = db.false_from(g, GProp::F) {
                        changed |=
                            db.set_graded_false(g, GProp::FpZ, ff, "R3", C_R3, &[fd, dcp]);
                    }
                }
                if let Some((ff, fd)) = db.false_from(g, GProp::F) {
                    let (tu, d) = db.true_upto(g, GProp::FpZ);
                    if tu >= ff {
                        changed |= db.set_bool(
                            g,
                            BProp::CompactlyPresented,
                            false,
                            "R3",
                            C_R3,
                            &[fd, d],
                        );
                    }
                }
            }
        }
        4 => {
            // R4: FP_n <=> KP_n over the same ring (both directions).
            for g in 0..ng {
                for (a, b) in [(GProp::FpZ, GProp::KpZ), (GProp::FpQ, GProp::KpQ)] {
                    for (x, y) in [(a, b), (b, a)] {
                        let (tu, d) = db.true_upto(g, x);
                        changed |= db.set_graded_true(g, y, tu, "R4", C_R4, &[d]);
                        if let Some((ff, fd)) = db.false_from(g, x) {
                            changed |= db.set_graded_false(g, y, ff, "R4", C_R4, &[fd]);
                        }
                    }
                }
            }
        }
        5 => {
            // R5: FP_n(Z) => FP_n(Q); contrapositive.
            for g in 0..ng {
                let (tu, d) = db.true_upto(g, GProp::FpZ);
                changed |= db.set_graded_true(g, GProp::FpQ, tu, "R5", C_R5, &[d]);
                if let Some((ff, fd)) = db.false_from(g, GProp::FpQ) {
                    changed |= db.set_graded_false(g, GProp::FpZ, ff, "R5", C_R5, &[fd]);
                }
            }
        }
        6 => {
            // R6: extension N -> G -> Q, over both rings.
            for rel in db.relations.clone() {
                if let Relation::Extension { n, g, q } = rel {
                    for p in [GProp::FpZ, GProp::FpQ] {
                        let (tn, dn) = db.true_upto(n, p);
                        let (tq, dq) = db.true_upto(q, p);
                        let (tg, dg) = db.true_upto(g, p);
                        // N FP_m, Q FP_k => G FP_min(m,k).
                        changed |= db.set_graded_true(
                            g,
                            p,
                            min_level(tn, tq),
                            "R6",
                            C_R6,
                            &[dn, dq],
                        );
                        // G FP_k, N FP_m => Q FP_min(m+1,k).
                        changed |= db.set_graded_true(
                            q,
                            p,
                            min_level(tn.plus(1), tg),
                            "R6",
                            C_R6,
                            &[dn, dg],
                        );
                        // Contrapositives.
                        if let Some((fg, dfg)) = db.false_from(g, p) {
                            if tn >= fg {
                                changed |= db.set_graded_false(q, p, fg, "R6", C_R6, &[dfg, dn]);
                            }
                            if tq >= fg {
                                changed |= db.set_graded_false(n, p, fg, "R6", C_R6, &[dfg, dq]);
                            }
                        }
                        if let Some((fq, dfq)) = db.false_from(q, p) {
                            if tg >= fq {
                                // Q not FP_k but G FP_k: N must fail FP_{k-1}.
                                changed |= db.set_graded_false(
                                    n,
                                    p,
                                    fq.minus(Level::Fin(1)),
                                    "R6",
                                    C_R6,
                                    &[dfq, dg],
                                );
                            }
                            if tn.plus(1) >= fq {
                                changed |= db.set_graded_false(g, p, fq, "R6", C_R6, &[dfq, dn]);
                            }
                        }
                    }
                }
            }
        }
        7 => {
            // R7: closed cocompact subgroup (and open finite index): FP_n
            // equivalence in both directions.
            for rel in db.relations.clone() {
                let (h, g) = match rel {
                    Relation::ClosedCocompact { h, g } => (h, g),
                    Relation::OpenFiniteIndex { h, g } => (h, g),
                    _ => continue,
                };
                for p in [GProp::FpZ, GProp::FpQ] {
                    for (x, y) in [(h, g), (g, h)] {
                        let (tu, d) = db.true_upto(x, p);
                        changed |= db.set_graded_true(y, p, tu, "R7", C_R7, &[d]);
                        if let Some((ff, fd)) = db.false_from(x, p) {
                            changed |= db.set_graded_false(y, p, ff, "R7", C_R7, &[fd]);
                        }
                    }
                }
            }
        }
        8 => {
            // R8: quasi-isometry: F_n and FP_n transfer both ways.
            for rel in db.relations.clone() {
                if let Relation::QuasiIsometric { a, b } = rel {
                    for p in [GProp::F, GProp::FpZ, GProp::FpQ] {
                        for (x, y) in [(a, b), (b, a)] {
                            let (tu, d) = db.true_upto(x, p);
                            changed |= db.set_graded_true(y, p, tu, "R8", C_R8, &[d]);
                            if let Some((ff, fd)) = db.false_from(x, p) {
                                changed |= db.set_graded_false(y, p, ff, "R8", C_R8, &[fd]);
                            }
                        }
                    }
                }
            }
        }
        9 => {
            // R9: quasi-retract G of H inherits F_n/FP_n from H, for n >= 2
            // only.
            for rel in db.relations.clone() {
                if let Relation::QuasiRetract { g, h } = rel {
                    for p in [GProp::F, GProp::FpZ, GProp::FpQ] {
                        let (tu, d) = db.true_upto(h, p);
                        if tu >= Level::Fin(2) {
                            changed |= db.set_graded_true(g, p, tu, "R9", C_R9, &[d]);
                        }
                        if let Some((ff, fd)) = db.false_from(g, p) {
                            if ff >= Level::Fin(2) {
                                changed |= db.set_graded_false(h, p, ff, "R9", C_R9, &[fd]);
                            }
                        }
                    }
                }
            }
        }
        10 => {
            // R10: uniform lattice: F_n/FP_n equivalence both ways.
            for rel in db.relations.clone() {
                if let Relation::UniformLattice { l, g } = rel {
                    for p in [GProp::F, GProp::FpZ, GProp::FpQ] {
                        for (x, y) in [(l, g), (g, l)] {
                            let (tu, d) = db.true_upto(x, p);
                            changed |= db.set_graded_true(y, p, tu, "R10", C_R10, &[d]);
                            if let Some((ff, fd)) = db.false_from(x, p) {
                                changed |= db.set_graded_false(y, p, ff, "R10", C_R10, &[fd]);
                            }
                        }
                    }
                }
            }
        }
        11 => {
            // R11: group retract H of compactly presented G is compactly
            // presented; contrapositive.
            for rel in db.relations.clone() {
                if let Relation::GroupRetract { h, g } = rel {
                    if let Some((true, d)) = db.get_bool(g, BProp::CompactlyPresented) {
                        changed |=
                            db.set_bool(h, BProp::CompactlyPresented, true, "R11", C_R11, &[d]);
                    }
                    if let Some((false, d)) = db.get_bool(h, BProp::CompactlyPresented) {
                        changed |=
                            db.set_bool(g, BProp::CompactlyPresented, false, "R11", C_R11, &[d]);
                    }
                }
            }
        }
        12 => {
            // R12: wreath sufficiency: G F_min(B.F, H.F, orbitfin, stabfp).
            for rel in db.relations.clone() {
                if let Relation::Wreath {
                    g,
                    b,
                    h,
                    orbitfin,
                    stabfp,
                } = rel
                {
                    let (tb, d1) = db.true_upto(b, GProp::F);
                    let (th, d2) = db.true_upto(h, GProp::F);
                    let level = min_level(min_level(tb, th), min_level(orbitfin, stabfp));
                    changed |= db.set_graded_true(g, GProp::F, level, "R12", C_R12, &[d1, d2]);
                }
            }
        }
        13 => {
            // R13: wreath necessity at low degree: compact generation and
            // presentation descend from G to B and H; contrapositives lift
            // failures.
            for rel in db.relations.clone() {
                if let Relation::Wreath { g, b, h, .. } = rel {
                    for bp in [BProp::CompactlyGenerated, BProp::CompactlyPresented] {
                        if let Some((true, d)) = db.get_bool(g, bp) {
                            changed |= db.set_bool(b, bp, true, "R13", C_R13, &[d]);
                            changed |= db.set_bool(h, bp, true, "R13", C_R13, &[d]);
                        }
                        for x in [b, h] {
                            if let Some((false, d)) = db.get_bool(x, bp) {
                                changed |= db.set_bool(g, bp, false, "R13", C_R13, &[d]);
                            }
                        }
                    }
                }
            }
        }
        14 => {
            // R14: wreath necessity in higher degrees: G F_n => B, H F_n.
            for rel in db.relations.clone() {
                if let Relation::Wreath { g, b, h, .. } = rel {
                    let (tg, d) = db.true_upto(g, GProp::F);
                    changed |= db.set_graded_true(b, GProp::F, tg, "R14", C_R14, &[d]);
                    changed |= db.set_graded_true(h, GProp::F, tg, "R14", C_R14, &[d]);
                    for x in [b, h] {
                        if let Some((ff, fd)) = db.false_from(x, GProp::F) {
                            changed |= db.set_graded_false(g, GProp::F, ff, "R14", C_R14, &[fd]);
                        }
                    }
                }
            }
        }
        15 => {
            // R15: for poly-(compact-open-by-cyclic) tops the wreath F_n
            // criterion needs only B and the orbit condition.
            for rel in db.relations.clone() {
                if let Relation::Wreath { g, b, h, orbitfin, .. } = rel {
                    if let Some((true, dh)) = db.get_bool(h, BProp::PolyCompactOpenByCyclic) {
                        let (tb, d) = db.true_upto(b, GProp::F);
                        changed |= db.set_graded_true(
                            g,
                            GProp::F,
                            min_level(tb, orbitfin),
                            "R15",
                            C_R15,
                            &[d, dh],
                        );
                        if let Some((fg, fd)) = db.false_from(g, GProp::F) {
                            if orbitfin >= fg {
                                changed |=
                                    db.set_graded_false(b, GProp::F, fg, "R15", C_R15, &[fd, dh]);
                            }
                        }
                    }
                }
            }
        }
        16 => {
            // R16: hd <= cd; sigma-compact: cd <= hd + 1; FP_inf(Q): cd = hd.
            for g in 0..ng {
                let (hl, dhl) = db.groups[g].hd_lower;
                changed |= db.raise_cd_lower(g, hl, "R16", C_R16, &[dhl]);
                let (cu, dcu) = db.groups[g].cd_upper;
                changed |= db.drop_hd_upper(g, cu, "R16", C_R16, &[dcu]);
                if let Some((true, ds)) = db.get_bool(g, BProp::SigmaCompact) {
                    let (hu, dhu) = db.groups[g].hd_upper;
                    changed |= db.drop_cd_upper(g, hu.plus(1), "R16", C_R16, &[dhu, ds]);
                    let (cl, dcl) = db.groups[g].cd_lower;
                    changed |=
                        db.raise_hd_lower(g, cl.minus(Level::Fin(1)), "R16", C_R16, &[dcl, ds]);
                }
                let (fpq, dfp) = db.true_upto(g, GProp::FpQ);
                if fpq == Level::Inf {
                    let (cl, dcl) = db.groups[g].cd_lower;
                    changed |= db.raise_hd_lower(g, cl, "R16", C_R16, &[dcl, dfp]);
                    let (hu, dhu) = db.groups[g].hd_upper;
                    changed |= db.drop_cd_upper(g, hu, "R16", C_R16, &[dhu, dfp]);
                }
            }
        }
        17 => {
            // R17: cd(G) <= cd(N) + cd(Q) over extensions; lower-bound
            // contrapositives.
            for rel in db.relations.clone() {
                if let Relation::Extension { n, g, q } = rel {
                    let (un, dn) = db.groups[n].cd_upper;
                    let (uq, dq) = db.groups[q].cd_upper;
                    let sum = match (un, uq) {
                        (Level::Fin(a), Level::Fin(b)) => Level::Fin(a + b).clamp(),
                        _ => Level::Inf,
                    };
                    changed |= db.drop_cd_upper(g, sum, "R17", C_R17, &[dn, dq]);
                    let (lg, dlg) = db.groups[g].cd_lower;
                    changed |= db.raise_cd_lower(n, lg.minus(uq), "R17", C_R17, &[dlg, dq]);
                    changed |= db.raise_cd_lower(q, lg.minus(un), "R17", C_R17, &[dlg, dn]);
                }
            }
        }
        18 => {
            // R18: F_n => K_n (one-directional; the converse is open).
            for g in 0..ng {
                let (tu, d) = db.true_upto(g, GProp::F);
                changed |= db.set_graded_true(g, GProp::K, tu, "R18", C_R18, &[d]);
                if let Some((ff, fd)) = db.false_from(g, GProp::K) {
                    changed |= db.set_graded_false(g, GProp::F, ff, "R18", C_R18, &[fd]);
                }
            }
        }
        _ => unreachable!(),
    }
    changed
}

/// Forward chaining to fixpoint in the natural rule order.
pub fn close(db: &mut Db) {
    let order: Vec<usize> = (0..NUM_RULES).collect();
    close_with_order(db, &order);
}

/// Forward chaining with a caller-chosen rule order per pass. On consistent
/// databases the fixpoint is order-independent (tested); only derivation
/// bookkeeping differs. On inconsistent databases the first-derived value of
/// each boolean flag is kept, so bounds may depend on the order, but whether
/// a contradiction is detected does not.
pub fn close_with_order(db: &mut Db, order: &[usize]) {
    loop {
        let mut changed = false;
        for &r in order {
            changed |= apply_rule(db, r);
        }
        if !changed {
            break;
        }
    }
}

/// Snapshot of the bounds of every group, for closure-equality checks.
pub fn state_fingerprint(db: &Db) -> Vec<String> {
    let mut out = Vec::new();
    for (g, st) in db.groups.iter().enumerate() {
        let mut s = format!("{}:", db.names[g]);
        for (i, b) in st.bools.iter().enumerate() {
            if let Some((v, _)) = b {
                s.push_str(&format!(" b{i}={v}"));
            }
        }
        for p in 0..GPROPS {
            s.push_str(&format!(" t{p}={}", st.true_upto[p].0));
            if let Some((ff, _)) = st.false_from[p] {
                s.push_str(&format!(" f{p}={ff}"));
            }
        }
        s.push_str(&format!(
            " cd=[{},{}] hd=[{},{}]",
            st.cd_lower.0, st.cd_upper.0, st.hd_lower.0, st.hd_upper.0
        ));
        out.push(s);
    }
    out
}

/// Text report: query answers with derivation chains, then any contradiction.
pub fn report(db: &Db) -> String {
    let mut out = String::new();
    for (g, q, text) in &db.queries {
        let (ans, prov) = db.answer(*g, q);
        out.push_str(&format!("{text} -> {ans}\n"));
        if let Some(d) = prov {
            for i in db.chain(d) {
                let der = &db.derivations[i];
                out.push_str(&format!("    [{}] {} ({})\n", der.rule, der.fact, der.citation));
            }
        }
    }
    if let Some(c) = &db.contradiction {
        out.push_str(&format!("CONTRADICTION on {}\n", c.fact));
        for (label, d) in [("first", c.derivation_a), ("second", c.derivation_b)] {
            out.push_str(&format!("  {label} chain:\n"));
            for i in db.chain(d) {
                let der = &db.derivations[i];
                out.push_str(&format!("    [{}] {} ({})\n", der.rule, der.fact, der.citation));
            }
        }
    }
    out
}

pub fn report_json(db: &Db) -> serde_json::Value {
    let chain_json = |d: usize| -> serde_json::Value {
        json!(db
            .chain(d)
            .into_iter()
            .map(|i| {
                let der = &db.derivations[i];
                json!({
                    "rule": der.rule,
                    "fact": der.fact,
                    "citation": der.citation,
                })
            })
            .collect::<Vec<_>>())
    };
    let queries: Vec<serde_json::Value> = db
        .queries
        .iter()
        .map(|(g, q, text)| {
            let (ans, prov) = db.answer(*g, q);
            json!({
                "query": text,
                "answer": ans.to_string(),
                "derivation": prov.map(chain_json),
            })
        })
        .collect();
    let contradiction = db.contradiction.as_ref().map(|c| {
        json!({
            "fact": c.fact,
            "first_chain": chain_json(c.derivation_a),
            "second_chain": chain_json(c.derivation_b),
        })
    });
    json!({ "queries": queries, "contradiction": contradiction })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed(script: &str) -> Db {
        let mut db = parse(script).unwrap();
        close(&mut db);
        db
    }

    fn ask(db: &Db, name: &str, prop: &str) -> Answer {
        let g = db.lookup(name).unwrap();
        let toks: Vec<&str> = prop.split_whitespace().collect();
        let q = parse_prop(&toks, 0).unwrap();
        db.answer(g, &q).0
    }

    #[test]
    fn parse_basics() {
        let db = parse("group G\nproperty G F 2").unwrap();
        assert_eq!(db.group_names(), &["G".to_string()]);
        assert_eq!(db.true_upto(0, GProp::F).0, Level::Fin(2));
        assert!(matches!(
            parse("relation extension N G Q"),
            Err(Error::Syntax { .. })
        ));
        let db = parse("group G\nproperty G FP 3 over Q = false").unwrap();
        assert_eq!(db.false_from(0, GProp::FpQ).unwrap().0, Level::Fin(3));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("grp G"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(
            parse("group G\ngroup G"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse("group G\nproperty G bogus 1"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse("group G\nproperty G F 100"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn comments_ignored() {
        let db = closed("# header\ngroup G # trailing\nproperty G compact\n\n");
        assert_eq!(ask(&db, "G", "compact"), Answer::True);
    }

    #[test]
    fn extension_min() {
        let db = closed(
            "group N\ngroup G\ngroup Q\n\
             property N FP 2 over Q\nproperty Q FP 3 over Q\n\
             relation extension N G Q\nquery G FP 2 over Q",
        );
        assert_eq!(ask(&db, "G", "FP 2 over Q"), Answer::True);
        assert_eq!(ask(&db, "G", "FP 3 over Q"), Answer::Unknown);
    }

    #[test]
    fn extension_improved_quotient() {
        let db = closed(
            "group N\ngroup G\ngroup Q\n\
             property G FP 3 over Q\nproperty N FP 1 over Q\n\
             relation extension N G Q",
        );
        assert_eq!(ask(&db, "Q", "FP 2 over Q"), Answer::True);
        assert_eq!(ask(&db, "Q", "FP 3 over Q"), Answer::Unknown);
    }

    #[test]
    fn compact_gives_everything() {
        let db = closed("group G\nproperty G compact");
        assert_eq!(ask(&db, "G", "F inf"), Answer::True);
        assert_eq!(ask(&db, "G", "FP 64 over Z"), Answer::True);
        assert_eq!(ask(&db, "G", "cd_le 0"), Answer::True);
        assert_eq!(ask(&db, "G", "compactly_presented"), Answer::True);
        assert_eq!(ask(&db, "G", "K inf"), Answer::True);
    }

    #[test]
    fn downward_closure() {
        let db = closed("group G\nproperty G F 3");
        assert_eq!(ask(&db, "G", "F 1"), Answer::True);
        assert_eq!(ask(&db, "G", "F 4"), Answer::Unknown);
        assert_eq!(ask(&db, "G", "compactly_generated"), Answer::True);
    }

    #[test]
    fn contradiction_f2_vs_not_cp() {
        let mut db = parse(
            "group G\nproperty G F 2\nproperty G compactly_presented = false",
        )
        .unwrap();
        close(&mut db);
        assert!(db.contradiction.is_some());
        let c = db.contradiction.as_ref().unwrap();
        assert!(!db.chain(c.derivation_a).is_empty());
        assert!(!db.chain(c.derivation_b).is_empty());
    }

    #[test]
    fn fp_z_implies_q_not_conversely() {
        let db = closed("group G\nproperty G FP 3 over Z");
        assert_eq!(ask(&db, "G", "FP 3 over Q"), Answer::True);
        let db = closed("group G\nproperty G FP 3 over Q");
        assert_eq!(ask(&db, "G", "FP 3 over Z"), Answer::Unknown);
        // contrapositive: FP_Q failure pushes down to Z.
        let db = closed("group G\nproperty G FP 2 over Q = false");
        assert_eq!(ask(&db, "G", "FP 2 over Z"), Answer::False);
    }

    #[test]
    fn kp_equivalence() {
        let db = closed("group G\nproperty G KP 4 over Q");
        assert_eq!(ask(&db, "G", "FP 4 over Q"), Answer::True);
        let db = closed("group G\nproperty G FP 4 over Z");
        assert_eq!(ask(&db, "G", "KP 4 over Z"), Answer::True);
    }

    #[test]
    fn quasi_retract_needs_two() {
        let db = closed(
            "group G\ngroup H\nproperty H F 1\nrelation quasi_retract G H",
        );
        assert_eq!(ask(&db, "G", "F 1"), Answer::Unknown);
        let db = closed(
            "group G\ngroup H\nproperty H F 5\nrelation quasi_retract G H",
        );
        assert_eq!(ask(&db, "G", "F 5"), Answer::True);
        assert_eq!(ask(&db, "G", "F 1"), Answer::True);
    }

    #[test]
    fn k_is_one_directional() {
        let db = closed("group G\nproperty G F 3");
        assert_eq!(ask(&db, "G", "K 3"), Answer::True);
        let db = closed("group G\nproperty G K 3");
        assert_eq!(ask(&db, "G", "F 3"), Answer::Unknown);
        // Contrapositive direction is allowed.
        let db = closed("group G\nproperty G K 2 = false");
        assert_eq!(ask(&db, "G", "F 2"), Answer::False);
    }

    #[test]
    fn cocompact_equivalence() {
        let db = closed(
            "group H\ngroup G\nproperty H FP 4 over Q\nrelation closed_cocompact H G",
        );
        assert_eq!(ask(&db, "G", "FP 4 over Q"), Answer::True);
        let db = closed(
            "group H\ngroup G\nproperty G FP 4 over Q = false\nrelation closed_cocompact H G",
        );
        assert_eq!(ask(&db, "H", "FP 4 over Q"), Answer::False);
    }

    #[test]
    fn hd_cd_rules() {
        let db = closed("group G\nproperty G hd_ge 3");
        assert_eq!(ask(&db, "G", "cd_ge 3"), Answer::True);
        let db = closed("group G\nproperty G sigma_compact\nproperty G hd_le 2");
        assert_eq!(ask(&db, "G", "cd_le 3"), Answer::True);
        let db = closed("group G\nproperty G FP inf over Q\nproperty G hd_le 2");
        assert_eq!(ask(&db, "G", "cd_le 2"), Answer::True);
    }

    #[test]
    fn cd_subadditive() {
        let db = closed(
            "group N\ngroup G\ngroup Q\nproperty N cd_le 2\nproperty Q cd_le 3\n\
             relation extension N G Q",
        );
        assert_eq!(ask(&db, "G", "cd_le 5"), Answer::True);
        assert_eq!(ask(&db, "G", "cd_le 4"), Answer::Unknown);
    }

    #[test]
    fn wreath_rules() {
        let db = closed(
            "group G\ngroup B\ngroup H\nproperty B F 3\nproperty H F 4\n\
             relation wreath G B H orbitfin=2 stabfp=3",
        );
        assert_eq!(ask(&db, "G", "F 2"), Answer::True);
        assert_eq!(ask(&db, "G", "F 3"), Answer::Unknown);
        // necessity
        let db = closed(
            "group G\ngroup B\ngroup H\nproperty G F 3\nrelation wreath G B H",
        );
        assert_eq!(ask(&db, "B", "F 3"), Answer::True);
        assert_eq!(ask(&db, "H", "F 3"), Answer::True);
        // poly-(compact-open-by-cyclic) top: stabfp not needed.
        let db = closed(
            "group G\ngroup B\ngroup H\nproperty B F 5\n\
             property H poly_compact_open_by_cyclic\n\
             relation wreath G B H orbitfin=4",
        );
        assert_eq!(ask(&db, "G", "F 4"), Answer::True);
        // generation failure lifts.
        let db = closed(
            "group G\ngroup B\ngroup H\nproperty B compactly_generated = false\n\
             relation wreath G B H",
        );
        assert_eq!(ask(&db, "G", "compactly_generated"), Answer::False);
        assert_eq!(ask(&db, "G", "F 1"), Answer::False);
    }

    #[test]
    fn query_chain_mentions_rule() {
        let db = closed(
            "group N\ngroup G\ngroup Q\nproperty N FP 2 over Q\nproperty Q FP 3 over Q\n\
             relation extension N G Q\nquery G FP 2 over Q",
        );
        let text = report(&db);
        assert!(text.contains("-> true"));
        assert!(text.contains("[R6]"));
        let j = report_json(&db);
        assert_eq!(j["queries"][0]["answer"], "true");
    }

    #[test]
    fn unconstrained_unknown() {
        let db = closed("group G\nquery G F 2");
        assert!(report(&db).contains("-> unknown"));
    }

    #[test]
    fn confluence_small() {
        let script = "group N\ngroup G\ngroup Q\ngroup H\n\
            property N FP 2 over Z\nproperty Q compact\n\
            relation extension N G Q\nrelation quasi_isometric G H\n\
            property H hd_ge 1\nproperty G sigma_compact";
        let mut base = parse(script).unwrap();
        close(&mut base);
        let fp = state_fingerprint(&base);
        // A few fixed alternative orders.
        for shift in 1..NUM_RULES {
            let order: Vec<usize> = (0..NUM_RULES).map(|i| (i + shift) % NUM_RULES).collect();
            let mut db = parse(script).unwrap();
            close_with_order(&mut db, &order);
            assert_eq!(state_fingerprint(&db), fp);
        }
    }

    #[test]
    fn termination_adversarial() {
        // A cycle of extensions with levels at the cap must terminate.
        let script = "group A\ngroup B\ngroup C\n\
            property A FP 64 over Z\nproperty B F inf\n\
            relation extension A B C\nrelation extension B C A\nrelation extension C A B\n\
            relation quasi_isometric A C";
        let mut db = parse(script).unwrap();
        close(&mut db);
        assert!(db.contradiction.is_none());
    }

    #[test]
    fn derivation_replay_well_founded() {
        let db = closed(
            "group N\ngroup G\ngroup Q\nproperty N compact\nproperty Q F 3\n\
             relation extension N G Q",
        );
        for (i, d) in db.derivations.iter().enumerate() {
            for &p in &d.premises {
                assert!(p < i, "premise {p} not before derivation {i}");
            }
        }
        assert_eq!(ask(&db, "G", "FP 3 over Q"), Answer::True);
    }
}
