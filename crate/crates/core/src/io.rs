//! Plain-text file formats for observations, circles, fitted models, truth
//! tables and evaluation reports.
//!
//! Every loader rejects malformed input with the offending line number rather
//! than repairing it. Lines starting with `#` and blank lines are skipped.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Error, Result};
use crate::eval::EvalReport;
use crate::model::{Concordance, HyperObservations, LatentFactors, ModelConfig, PairEntry, PairObservations};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines { path, inner: text.lines().enumerate() }
    }

    fn err<T>(&self, line: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { path: self.path.to_path_buf(), line, msg: msg.into() })
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        for (idx, line) in self.inner.by_ref() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((idx + 1, line));
        }
        None
    }
}

fn parse_num<T: std::str::FromStr>(lines: &Lines, line: usize, field: &str, what: &str) -> Result<T> {
    match field.trim().parse() {
        Ok(v) => Ok(v),
        Err(_) => lines.err(line, format!("bad {what} {field:?}")),
    }
}

/// Parses `key=value` tokens from a header line in the given order.
fn parse_header(lines: &mut Lines, keys: &[&str]) -> Result<(usize, Vec<String>)> {
    let Some((line, text)) = lines.next() else {
        return lines.err(0, format!("missing header `{}`", keys.iter().map(|k| format!("{k}=")).collect::<Vec<_>>().join(" ")));
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != keys.len() {
        return lines.err(line, format!("expected header with {keys:?}, got {text:?}"));
    }
    let mut values = Vec::new();
    for (token, key) in tokens.iter().zip(keys) {
        match token.split_once('=') {
            Some((k, v)) if k == *key => values.push(v.to_string()),
            _ => return lines.err(line, format!("expected `{key}=`, got {token:?}")),
        }
    }
    Ok((line, values))
}

fn parse_tuple(lines: &Lines, line: usize, field: &str, n: usize) -> Result<Vec<usize>> {
    let mut tuple = Vec::new();
    for token in field.split_whitespace() {
        let i: usize = parse_num(lines, line, token, "node index")?;
        if i >= n {
            return lines.err(line, format!("node index {i} out of range for n={n}"));
        }
        tuple.push(i);
    }
    tuple.sort_unstable();
    if tuple.windows(2).any(|w| w[0] == w[1]) {
        return lines.err(line, format!("tuple {tuple:?} repeats a node"));
    }
    Ok(tuple)
}

fn parse_label(lines: &Lines, line: usize, field: &str) -> Result<u8> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => lines.err(line, format!("label must be 0 or 1, got {other:?}")),
    }
}

pub fn load_pairs(path: &Path) -> Result<PairObservations> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (hline, header) = parse_header(&mut lines, &["n"])?;
    let n: usize = parse_num(&lines, hline, &header[0], "node count")?;
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    while let Some((line, text)) = lines.next() {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return lines.err(line, format!("expected `i<TAB>j<TAB>y`, got {text:?}"));
        }
        let tuple = parse_tuple(&lines, line, &format!("{} {}", fields[0], fields[1]), n)?;
        if tuple.len() != 2 {
            return lines.err(line, "self-loop or missing index");
        }
        let y = parse_label(&lines, line, fields[2])?;
        if !seen.insert((tuple[0], tuple[1])) {
            return lines.err(line, format!("duplicate pair ({}, {})", tuple[0], tuple[1]));
        }
        entries.push(PairEntry { i: tuple[0], j: tuple[1], y });
    }
    PairObservations::new(n, entries)
}

pub fn save_pairs(path: &Path, pairs: &PairObservations) -> Result<()> {
    let mut out = format!("n={}\n", pairs.n());
    for e in pairs.entries() {
        writeln!(out, "{}\t{}\t{}", e.i, e.j, e.y).unwrap();
    }
    write(path, &out)
}

fn join(tuple: &[usize]) -> String {
    tuple.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn load_hyper(path: &Path) -> Result<HyperObservations> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (hline, header) = parse_header(&mut lines, &["n", "m"])?;
    let n: usize = parse_num(&lines, hline, &header[0], "node count")?;
    let m: usize = parse_num(&lines, hline, &header[1], "order")?;
    if m < 2 {
        return lines.err(hline, format!("order must be at least 2, got {m}"));
    }
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    while let Some((line, text)) = lines.next() {
        let fields: Vec<&str> = text.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return lines.err(line, format!("expected `i1 ... im<TAB>y[<TAB>w]`, got {text:?}"));
        }
        let tuple = parse_tuple(&lines, line, fields[0], n)?;
        if tuple.len() != m {
            return lines.err(line, format!("tuple has arity {}, expected {m}", tuple.len()));
        }
        let y = parse_label(&lines, line, fields[1])?;
        let w: f64 = match fields.get(2) {
            Some(f) => parse_num(&lines, line, f, "weight")?,
            None => 1.0,
        };
        if !(w > 0.0 && w.is_finite()) {
            return lines.err(line, format!("weight must be positive, got {w}"));
        }
        if !seen.insert(tuple.clone()) {
            return lines.err(line, format!("duplicate tuple {tuple:?}"));
        }
        entries.push((tuple, y, w));
    }
    HyperObservations::from_entries(n, m, entries)
}

pub fn save_hyper(path: &Path, hypers: &HyperObservations) -> Result<()> {
    let mut out = format!("n={} m={}\n", hypers.n(), hypers.m());
    for (e, t) in hypers.tuples().enumerate() {
        let w = hypers.weight(e);
        if w == 1.0 {
            writeln!(out, "{}\t{}", join(t), hypers.label(e)).unwrap();
        } else {
            writeln!(out, "{}\t{}\t{:?}", join(t), hypers.label(e), w).unwrap();
        }
    }
    write(path, &out)
}

/// Ground-truth probabilities for the entries of a test file, in file order.
pub fn save_truth_pairs(path: &Path, pairs: &PairObservations, probs: &[f64]) -> Result<()> {
    if probs.len() != pairs.len() {
        return arg(format!("{} truth values for {} pairs", probs.len(), pairs.len()));
    }
    let mut out = format!("n={}\n", pairs.n());
    for (e, p) in pairs.entries().iter().zip(probs) {
        writeln!(out, "{}\t{}\t{:?}", e.i, e.j, p).unwrap();
    }
    write(path, &out)
}

pub fn save_truth_hyper(path: &Path, hypers: &HyperObservations, probs: &[f64]) -> Result<()> {
    if probs.len() != hypers.len() {
        return arg(format!("{} truth values for {} tuples", probs.len(), hypers.len()));
    }
    let mut out = format!("n={} m={}\n", hypers.n(), hypers.m());
    for (t, p) in hypers.tuples().zip(probs) {
        writeln!(out, "{}\t{:?}", join(t), p).unwrap();
    }
    write(path, &out)
}

fn parse_prob(lines: &Lines, line: usize, field: &str) -> Result<f64> {
    let p: f64 = parse_num(lines, line, field, "probability")?;
    if !(0.0..=1.0).contains(&p) {
        return lines.err(line, format!("probability {p} outside [0, 1]"));
    }
    Ok(p)
}

/// Reads pair truth and aligns it with `pairs`; every pair needs a value.
pub fn load_truth_pairs(path: &Path, pairs: &PairObservations) -> Result<Vec<f64>> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (hline, header) = parse_header(&mut lines, &["n"])?;
    let n: usize = parse_num(&lines, hline, &header[0], "node count")?;
    let mut map = HashMap::new();
    while let Some((line, text)) = lines.next() {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return lines.err(line, format!("expected `i<TAB>j<TAB>prob`, got {text:?}"));
        }
        let t = parse_tuple(&lines, line, &format!("{} {}", fields[0], fields[1]), n)?;
        if t.len() != 2 {
            return lines.err(line, "self-loop or missing index");
        }
        if map.insert((t[0], t[1]), parse_prob(&lines, line, fields[2])?).is_some() {
            return lines.err(line, format!("duplicate pair ({}, {})", t[0], t[1]));
        }
    }
    pairs
        .entries()
        .iter()
        .map(|e| {
            map.get(&(e.i, e.j))
                .copied()
                .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 0, msg: format!("no truth for pair ({}, {})", e.i, e.j) })
        })
        .collect()
}

pub fn load_truth_hyper(path: &Path, hypers: &HyperObservations) -> Result<Vec<f64>> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (hline, header) = parse_header(&mut lines, &["n", "m"])?;
    let n: usize = parse_num(&lines, hline, &header[0], "node count")?;
    let m: usize = parse_num(&lines, hline, &header[1], "order")?;
    let mut map = HashMap::new();
    while let Some((line, text)) = lines.next() {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 2 {
            return lines.err(line, format!("expected `i1 ... im<TAB>prob`, got {text:?}"));
        }
        let t = parse_tuple(&lines, line, fields[0], n)?;
        if t.len() != m {
            return lines.err(line, format!("tuple has arity {}, expected {m}", t.len()));
        }
        let p = parse_prob(&lines, line, fields[1])?;
        if map.insert(t.clone(), p).is_some() {
            return lines.err(line, format!("duplicate tuple {t:?}"));
        }
    }
    hypers
        .tuples()
        .map(|t| {
            map.get(t)
                .copied()
                .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 0, msg: format!("no truth for tuple {t:?}") })
        })
        .collect()
}

/// One index tuple per line, indices separated by whitespace. Header lines
/// containing `=` are skipped, so pair and hyper files can be reused after
/// stripping their label columns.
pub fn load_queries(path: &Path) -> Result<Vec<Vec<usize>>> {
    let text = read(path)?;
    let lines = Lines::new(path, &text);
    let mut out = Vec::new();
    for (line, text) in Lines::new(path, &text) {
        if text.contains('=') {
            continue;
        }
        let mut tuple = Vec::new();
        for token in text.split_whitespace() {
            tuple.push(parse_num::<usize>(&lines, line, token, "node index")?);
        }
        out.push(tuple);
    }
    Ok(out)
}

/// A fitted embedding with the settings needed to score with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub z: LatentFactors,
    pub config: ModelConfig,
    pub concordance: Concordance,
    /// Hyperlink order the model was trained on, when it saw hyperlinks.
    pub order: Option<usize>,
}

/// Header lines `n=`, `r=`, `beta=`, `lambda=`, `cap=`, then one row per
/// node with 17 significant digits per value. A model scored with the plain
/// CP product adds a `concordance=cp` line after the header, and a known
/// hyperlink order an `m=` line.
pub fn save_model(path: &Path, model: &ModelFile) -> Result<()> {
    let z = &model.z;
    let mut out = format!(
        "n={}\nr={}\nbeta={:?}\nlambda={:?}\ncap={:?}\n",
        z.n(),
        z.r(),
        model.config.beta,
        model.config.lambda,
        model.config.cap
    );
    if model.concordance == Concordance::Cp {
        out.push_str("concordance=cp\n");
    }
    if let Some(m) = model.order {
        writeln!(out, "m={m}").unwrap();
    }
    for i in 0..z.n() {
        let row: Vec<String> = z.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    write(path, &out)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let mut header = Vec::new();
    for key in ["n", "r", "beta", "lambda", "cap"] {
        let (line, values) = parse_header(&mut lines, &[key])?;
        header.push((line, values.into_iter().next().unwrap()));
    }
    let n: usize = parse_num(&lines, header[0].0, &header[0].1, "n")?;
    let r: usize = parse_num(&lines, header[1].0, &header[1].1, "r")?;
    let beta: f64 = parse_num(&lines, header[2].0, &header[2].1, "beta")?;
    let lambda: f64 = parse_num(&lines, header[3].0, &header[3].1, "lambda")?;
    let cap: f64 = parse_num(&lines, header[4].0, &header[4].1, "cap")?;
    let mut concordance = Concordance::SignConsistent;
    let mut order = None;
    let mut values = Vec::with_capacity(n * r);
    let mut rows = 0;
    let mut last_line = header[4].0;
    while let Some((line, text)) = lines.next() {
        last_line = line;
        if rows == 0 && values.is_empty() && text.starts_with("concordance=") {
            concordance = match &text["concordance=".len()..] {
                "cp" => Concordance::Cp,
                "sign" => Concordance::SignConsistent,
                other => return lines.err(line, format!("unknown concordance {other:?}")),
            };
            continue;
        }
        if rows == 0 && values.is_empty() && text.starts_with("m=") {
            let m: usize = parse_num(&lines, line, &text[2..], "m")?;
            if m < 2 {
                return lines.err(line, format!("hyperlink order {m} below 2"));
            }
            order = Some(m);
            continue;
        }
        if rows == n {
            return lines.err(line, format!("more than n={n} rows"));
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != r {
            return lines.err(line, format!("row {rows} has {} values, header says r={r}", fields.len()));
        }
        for f in fields {
            let v: f64 = parse_num(&lines, line, f, "value")?;
            if !v.is_finite() {
                return lines.err(line, format!("non-finite value in row {rows}"));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return lines.err(last_line, format!("file ends after row {rows}, header says n={n}"));
    }
    let config = ModelConfig { rank: r, beta, lambda, cap, ..ModelConfig::default() };
    config.validate().or_else(|e| lines.err(header[2].0, e.to_string()))?;
    let z = LatentFactors::from_vec(n, r, values)?;
    Ok(ModelFile { z, config, concordance, order })
}

/// CSV `set,auc,count,mse`, rows in set-name order. An undefined AUC is
/// written as `NA` and a missing MSE as an empty cell.
pub fn report_csv(report: &EvalReport) -> String {
    let mut out = String::from("set,auc,count,mse\n");
    for (name, s) in &report.sets {
        let auc = match &s.auc {
            Ok(a) => format!("{a:?}"),
            Err(_) => "NA".to_string(),
        };
        let mse = s.mse.map(|m| format!("{m:?}")).unwrap_or_default();
        writeln!(out, "{name},{auc},{},{mse}", s.count).unwrap();
    }
    out
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<()> {
    write(path, &report_csv(report))
}

/// Dense 0-based indices for external node ids, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), self.ids.len() - 1);
        self.ids.len() - 1
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Writes `index<TAB>external id` lines.
pub fn save_id_map(path: &Path, map: &IdMap) -> Result<()> {
    let mut out = String::new();
    for (i, id) in map.ids().iter().enumerate() {
        writeln!(out, "{i}\t{id}").unwrap();
    }
    write(path, &out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub name: String,
    /// Sorted, distinct node indices.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirclesData {
    pub n: usize,
    pub circles: Vec<Circle>,
    pub ids: IdMap,
}

impl CirclesData {
    pub fn new(n: usize, circles: Vec<Circle>, ids: IdMap) -> Result<Self> {
        let mut names = HashSet::new();
        for c in &circles {
            if c.members.is_empty() {
                return arg(format!("circle {:?} is empty", c.name));
            }
            if !names.insert(c.name.as_str()) {
                return arg(format!("duplicate circle name {:?}", c.name));
            }
            if c.members.iter().any(|&i| i >= n) || c.members.windows(2).any(|w| w[0] >= w[1]) {
                return arg(format!("circle {:?} members must be sorted, distinct and < {n}", c.name));
            }
        }
        Ok(CirclesData { n, circles, ids })
    }

    /// Removes the largest circle (the first one on ties).
    pub fn drop_largest(&mut self) -> Option<Circle> {
        let (idx, _) = self
            .circles
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, c)| c.members.len())?;
        Some(self.circles.remove(idx))
    }

    /// Circle indices per node, ascending.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (c, circle) in self.circles.iter().enumerate() {
            for &i in &circle.members {
                out[i].push(c);
            }
        }
        out
    }
}

/// Reads `name<TAB>id id ...` lines (members may also be tab separated).
/// External ids are interned into `ids`, which may already hold ids from an
/// edge list; the returned node count covers every interned id.
pub fn load_circles_with(path: &Path, mut ids: IdMap) -> Result<CirclesData> {
    let text = read(path)?;
    let lines = Lines::new(path, &text);
    let mut circles = Vec::new();
    let mut names = HashSet::new();
    for (line, text) in Lines::new(path, &text) {
        let (name, rest) = match text.split_once('\t') {
            Some((name, rest)) => (name.trim(), rest),
            None => (text.trim(), ""),
        };
        if name.is_empty() {
            return lines.err(line, "missing circle name");
        }
        if !names.insert(name.to_string()) {
            return lines.err(line, format!("duplicate circle name {name:?}"));
        }
        let mut members: Vec<usize> = rest.split_whitespace().map(|id| ids.intern(id)).collect();
        if members.is_empty() {
            return lines.err(line, format!("circle {name:?} has no members"));
        }
        members.sort_unstable();
        members.dedup();
        circles.push(Circle { name: name.to_string(), members });
    }
    let n = ids.len();
    CirclesData::new(n, circles, ids)
}

pub fn load_circles(path: &Path) -> Result<CirclesData> {
    load_circles_with(path, IdMap::default())
}

/// Reads an undirected edge list (`a b` per line, whitespace separated)
/// into observed links, interning ids into `ids`. Self-loops and repeated
/// edges are dropped, since public edge lists often list both directions.
pub fn load_edge_list(path: &Path, ids: &mut IdMap) -> Result<Vec<(usize, usize)>> {
    let text = read(path)?;
    let lines = Lines::new(path, &text);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (line, text) in Lines::new(path, &text) {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 2 {
            return lines.err(line, format!("expected two node ids, got {text:?}"));
        }
        let (a, b) = (ids.intern(tokens[0]), ids.intern(tokens[1]));
        if a != b && seen.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Ok(edges)
}

/// Label of an m-tuple under circle decomposition: 1 iff some circle holds
/// every node of the tuple.
pub fn joint_membership(memberships: &[Vec<usize>], tuple: &[usize]) -> u8 {
    let mut common: Vec<usize> = memberships[tuple[0]].clone();
    for &i in &tuple[1..] {
        let other = &memberships[i];
        common.retain(|c| other.binary_search(c).is_ok());
        if common.is_empty() {
            return 0;
        }
    }
    u8::from(!common.is_empty())
}

fn random_tuple(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    let mut t = rand::seq::index::sample(rng, n, m).into_vec();
    t.sort_unstable();
    t
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub const BALANCE_ATTEMPT_FACTOR: usize = 100;

/// Decomposes circles into labelled m-tuples.
///
/// `sample_size = 0` enumerates every m-tuple (feasible for small n and m).
/// Otherwise tuples are drawn uniformly without replacement; with `balance`
/// half of them (rounded up) are positives drawn by choosing a circle in
/// proportion to its m-subset count and then a uniform m-subset of it, and
/// the rest are uniform negatives. Each class gets at most 100 attempts per
/// requested tuple.
pub fn circles_to_tuples(circles: &CirclesData, m: usize, sample_size: usize, balance: bool, seed: u64) -> Result<HyperObservations> {
    let n = circles.n;
    if m < 2 || m > n {
        return arg(format!("tuple order {m} must lie in 2..={n}"));
    }
    let memberships = circles.memberships();
    let mut out = HyperObservations::empty(n, m);
    if sample_size == 0 {
        if binomial(n, m) > 5e7 {
            return arg(format!("exhaustive decomposition of C({n}, {m}) tuples is too large; pass a sample size"));
        }
        let mut t: Vec<usize> = (0..m).collect();
        loop {
            out.push_trusted(&t, joint_membership(&memberships, &t), 1.0);
            // next combination in lexicographic order
            let Some(pos) = (0..m).rev().find(|&p| t[p] < n - m + p) else { break };
            t[pos] += 1;
            for q in pos + 1..m {
                t[q] = t[q - 1] + 1;
            }
        }
        return Ok(out);
    }
    if (sample_size as f64) > binomial(n, m) {
        return Err(Error::Generation(format!("sample size {sample_size} exceeds the C({n}, {m}) available tuples")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(sample_size);
    if !balance {
        while seen.len() < sample_size {
            let t = random_tuple(&mut rng, n, m);
            if seen.insert(t.clone()) {
                out.push_trusted(&t, joint_membership(&memberships, &t), 1.0);
            }
        }
        return Ok(out);
    }
    let want_pos = sample_size.div_ceil(2);
    let want_neg = sample_size - want_pos;
    let sizes: Vec<f64> = circles.circles.iter().map(|c| binomial(c.members.len(), m)).collect();
    let total: f64 = sizes.iter().sum();
    if want_pos > 0 && total == 0.0 {
        return Err(Error::Generation(format!("no circle has {m} members")));
    }
    let mut drawn = 0;
    let mut attempts = 0;
    while drawn < want_pos {
        attempts += 1;
        if attempts > BALANCE_ATTEMPT_FACTOR * want_pos {
            return Err(Error::Generation(format!("found only {drawn} of {want_pos} positive tuples")));
        }
        let mut target = rng.gen::<f64>() * total;
        let mut c = 0;
        while c + 1 < sizes.len() && target >= sizes[c] {
            target -= sizes[c];
            c += 1;
        }
        let members = &circles.circles[c].members;
        if members.len() < m {
            continue;
        }
        let mut t: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), m).into_iter().map(|k| members[k]).collect();
        t.sort_unstable();
        if seen.insert(t.clone()) {
            out.push_trusted(&t, 1, 1.0);
            drawn += 1;
        }
    }
    let (mut drawn, mut attempts) = (0, 0);
    while drawn < want_neg {
        attempts += 1;
        if attempts > BALANCE_ATTEMPT_FACTOR * want_neg {
            return Err(Error::Generation(format!("found only {drawn} of {want_neg} negative tuples")));
        }
        let t = random_tuple(&mut rng, n, m);
        if joint_membership(&memberships, &t) == 0 && seen.insert(t.clone()) {
            out.push_trusted(&t, 0, 1.0);
            drawn += 1;
        }
    }
    Ok(out)
}

/// Three-way hyperlinks from circles: a triple is linked iff at least one
/// circle contains all three nodes.
pub fn circles_to_hyperlinks(circles: &CirclesData, sample_size: usize, balance: bool, seed: u64) -> Result<HyperObservations> {
    circles_to_tuples(circles, 3, sample_size, balance, seed)
}

/// `base` with `suffix` appended to the file name.
pub fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
