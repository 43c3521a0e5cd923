//! Certificates for single `n`, checkpointed range verification and
//! independent re-checking of certificate files.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{factorize, is_prime, WideInt};
use crate::conjectures::in_set_b;
use crate::decimal;
use crate::error::{Error, Result};
use crate::greedy::greedy_decompose;
use crate::identities::{
    check_witness, two_term_for_4_3mod4, type1_from_abc, verify_fraction, Decomposition,
    DecompositionKind, ParamWitness, WitnessFamily,
};
use crate::sieve::{
    class_witness, generate_classes, ClassIndex, CoverClass, SieveConfig, PRIMORIAL_23,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "even-reduce")]
    EvenReduce,
    #[serde(rename = "two-term-3mod4")]
    TwoTerm3Mod4,
    #[serde(rename = "composite-factor")]
    CompositeFactor,
    #[serde(rename = "sieve-class")]
    SieveClass,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "witness-search")]
    WitnessSearch,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::EvenReduce => "even-reduce",
            Method::TwoTerm3Mod4 => "two-term-3mod4",
            Method::CompositeFactor => "composite-factor",
            Method::SieveClass => "sieve-class",
            Method::Greedy => "greedy",
            Method::WitnessSearch => "witness-search",
        }
    }
}

/// What produced a certificate, when it is more than the numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertWitness {
    Param(ParamWitness),
    Class(CoverClass),
}

/// One line of a certificate file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "decimal")]
    pub n: WideInt,
    pub method: Method,
    #[serde(with = "decimal")]
    pub x: WideInt,
    #[serde(with = "decimal")]
    pub y: WideInt,
    #[serde(
        with = "decimal::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub z: Option<WideInt>,
    pub kind: DecompositionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<CertWitness>,
}

impl Certificate {
    fn new(d: Decomposition, method: Method, witness: Option<CertWitness>) -> Self {
        Certificate {
            n: d.n,
            method,
            x: d.x,
            y: d.y,
            z: d.z,
            kind: d.kind,
            witness,
        }
    }

    pub fn decomposition(&self) -> Decomposition {
        Decomposition {
            n: self.n,
            x: self.x,
            y: self.y,
            z: self.z,
            kind: self.kind,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("certificate serialises")
    }
}

/// Knobs for the prime-`n` path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposeConfig {
    /// Class moduli are kept only if they divide this (`None`: all).
    pub modulus_divisor: Option<WideInt>,
    pub param_bound: WideInt,
    pub greedy_steps: u64,
    /// Pair-product cap for the final witness search.
    pub search_bound: WideInt,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            modulus_divisor: Some(PRIMORIAL_23),
            param_bound: 60,
            greedy_steps: 64,
            search_bound: crate::conjectures::DEFAULT_SEARCH_BOUND,
        }
    }
}

impl DecomposeConfig {
    fn describe(&self) -> String {
        format!(
            "divisor={:?};param_bound={};greedy_steps={};search_bound={}",
            self.modulus_divisor, self.param_bound, self.greedy_steps, self.search_bound
        )
    }
}

/// Holds the class table so repeated calls share it.
pub struct Decomposer {
    cfg: DecomposeConfig,
    index: ClassIndex,
}

impl Decomposer {
    pub fn new(cfg: DecomposeConfig) -> Self {
        let classes = generate_classes(&SieveConfig::new(cfg.modulus_divisor, cfg.param_bound));
        Decomposer {
            index: ClassIndex::new(&classes),
            cfg,
        }
    }

    pub fn config(&self) -> &DecomposeConfig {
        &self.cfg
    }

    /// Certificate from the first method that applies:
    ///
    /// 1. even `n`: `4/n = 1/(n/2) + 1/n + 1/n`;
    /// 2. `n ≡ 3 (mod 4)`: the two-term identity;
    /// 3. composite `n`: lift a prime factor's certificate by `n/p`,
    ///    preferring a factor `≡ 3 (mod 4)`;
    /// 4. prime `n`: a covering class of `q = (n−5)/4`, then the greedy
    ///    algorithm, then a direct search for `n = p(α,β,γ)`.
    pub fn decompose(&self, n: WideInt) -> Result<Certificate> {
        if n < 2 {
            return Err(Error::domain(format!("n = {n} is below 2")));
        }
        if n % 2 == 0 {
            let d = Decomposition::three(n, n / 2, n, n);
            return Ok(Certificate::new(d, Method::EvenReduce, None));
        }
        if n % 4 == 3 {
            let d = two_term_for_4_3mod4((n - 3) / 4)?;
            return Ok(Certificate::new(d, Method::TwoTerm3Mod4, None));
        }
        if !is_prime(n) {
            let factors = factorize(n)?;
            let p = factors
                .iter()
                .map(|&(p, _)| WideInt::from(p))
                .find(|p| p % 4 == 3)
                .unwrap_or(WideInt::from(factors[0].0));
            let base = if p % 4 == 3 {
                two_term_for_4_3mod4((p - 3) / 4)?
            } else {
                self.prime(p)?.decomposition()
            };
            let d = base.lift(n / p)?;
            return Ok(Certificate::new(d, Method::CompositeFactor, None));
        }
        self.prime(n)
    }

    fn prime(&self, n: WideInt) -> Result<Certificate> {
        let q = (n - 5) / 4;
        if let Some(c) = self.index.find(q) {
            let (a, b, g) = class_witness(c, q)?;
            let d = type1_from_abc(a + 1, 4 * b + 3, 4 * g + 3)?;
            return Ok(Certificate::new(
                d,
                Method::SieveClass,
                Some(CertWitness::Class(*c)),
            ));
        }
        let trace = greedy_decompose(n, 4, self.cfg.greedy_steps)?;
        if let Some(d) = trace.decomposition() {
            return Ok(Certificate::new(d, Method::Greedy, None));
        }
        let found = if q == 0 {
            Some((0, 0, 0))
        } else {
            in_set_b(q, self.cfg.search_bound)
        };
        if let Some((a, b, g)) = found {
            let w = ParamWitness::new(WitnessFamily::PolP, [a, b, g]);
            if let Some(d) = check_witness(n, &w)? {
                return Ok(Certificate::new(
                    d,
                    Method::WitnessSearch,
                    Some(CertWitness::Param(w)),
                ));
            }
        }
        Err(Error::NotFound(n))
    }
}

/// [`Decomposer::decompose`] with the default configuration.
pub fn decompose(n: WideInt) -> Result<Certificate> {
    static DEFAULT: OnceLock<Decomposer> = OnceLock::new();
    DEFAULT
        .get_or_init(|| Decomposer::new(DecomposeConfig::default()))
        .decompose(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(with = "decimal")]
    pub verified_through: WideInt,
    #[serde(with = "decimal::vec")]
    pub open_items: Vec<WideInt>,
    pub config_hash: String,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Option<Checkpoint>> {
        match fs::read_to_string(path) {
            Ok(s) => Ok(Some(serde_json::from_str(&s)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes to a sibling temp file, then renames over `path`.
    pub fn store(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RangeOptions {
    pub from: WideInt,
    pub to: WideInt,
    pub shards: usize,
    /// Numbers per work unit; a checkpoint is written after every batch of
    /// `shards` units.
    pub chunk: WideInt,
    pub checkpoint: Option<PathBuf>,
    /// Certificate file; `None` writes to stdout.
    pub out: Option<PathBuf>,
}

impl RangeOptions {
    pub fn new(from: WideInt, to: WideInt) -> Self {
        RangeOptions {
            from,
            to,
            shards: 1,
            chunk: 50_000,
            checkpoint: None,
            out: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RangeReport {
    #[serde(with = "decimal")]
    pub from: WideInt,
    #[serde(with = "decimal")]
    pub to: WideInt,
    /// First `n` handled by this run (later than `from` after a resume).
    #[serde(with = "decimal")]
    pub started_at: WideInt,
    pub certified: u64,
    pub per_method: BTreeMap<Method, u64>,
    #[serde(with = "decimal::vec")]
    pub not_found: Vec<WideInt>,
}

/// Identifies a range run; shard count is excluded because it does not
/// change the output.
pub fn config_hash(opts: &RangeOptions, cfg: &DecomposeConfig) -> String {
    let text = format!(
        "esc-verify/1;from={};to={};chunk={};{}",
        opts.from,
        opts.to,
        opts.chunk,
        cfg.describe()
    );
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Opens the certificate file for appending after dropping any line whose
/// `n` exceeds `keep_through`.
fn open_for_resume(path: &Path, keep_through: Option<WideInt>) -> Result<File> {
    let Some(limit) = keep_through else {
        return Ok(File::create(path)?);
    };
    let mut f = OpenOptions::new()
        .read(true)
        .write(true)
        .create(true)
        .truncate(false)
        .open(path)?;
    let mut keep = 0u64;
    {
        let mut reader = BufReader::new(&mut f);
        let mut line = String::new();
        let mut lineno = 0;
        loop {
            line.clear();
            let len = reader.read_line(&mut line)?;
            if len == 0 || !line.ends_with('\n') {
                break;
            }
            lineno += 1;
            let cert: Certificate = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            if cert.n > limit {
                break;
            }
            keep += len as u64;
        }
    }
    f.set_len(keep)?;
    f.seek(SeekFrom::End(0))?;
    Ok(f)
}

/// Certifies every `n` in `[from, to]`. Work runs on `shards` threads in
/// batches; certificates are written in order of `n` and the checkpoint is
/// advanced after each batch. A NOT-FOUND `n` is listed in the report and in
/// the checkpoint's open items, never dropped.
pub fn verify_range(opts: &RangeOptions, dec: &Decomposer) -> Result<RangeReport> {
    if opts.from < 2 || opts.from > opts.to {
        return Err(Error::domain(format!(
            "need 2 <= from <= to, got [{}, {}]",
            opts.from, opts.to
        )));
    }
    if opts.shards == 0 || opts.chunk < 1 {
        return Err(Error::domain("shards and chunk must be positive"));
    }
    let hash = config_hash(opts, dec.config());
    let mut state = Checkpoint {
        verified_through: opts.from - 1,
        open_items: Vec::new(),
        config_hash: hash.clone(),
    };
    let mut resumed = false;
    if let Some(path) = &opts.checkpoint {
        if let Some(cp) = Checkpoint::load(path)? {
            if cp.config_hash != hash {
                return Err(Error::CheckpointMismatch {
                    path: path.clone(),
                    expected: hash,
                    found: cp.config_hash,
                });
            }
            state = cp;
            resumed = true;
        }
    }

    let mut out: Box<dyn Write> = match &opts.out {
        Some(p) => Box::new(BufWriter::new(open_for_resume(
            p,
            resumed.then_some(state.verified_through),
        )?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.shards)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;

    let mut report = RangeReport {
        from: opts.from,
        to: opts.to,
        started_at: state.verified_through + 1,
        not_found: state.open_items.clone(),
        ..RangeReport::default()
    };
    let mut next = state.verified_through + 1;
    while next <= opts.to {
        let mut units = Vec::with_capacity(opts.shards);
        for _ in 0..opts.shards {
            if next > opts.to {
                break;
            }
            let end = (next + opts.chunk - 1).min(opts.to);
            units.push((next, end));
            next = end + 1;
        }
        let results: Vec<Vec<Result<Certificate>>> = pool.install(|| {
            units
                .par_iter()
                .map(|&(a, b)| (a..=b).map(|n| dec.decompose(n)).collect())
                .collect()
        });
        for r in results.into_iter().flatten() {
            match r {
                Ok(c) => {
                    writeln!(out, "{}", c.to_line())?;
                    report.certified += 1;
                    *report.per_method.entry(c.method).or_default() += 1;
                }
                Err(Error::NotFound(n)) => {
                    report.not_found.push(n);
                    state.open_items.push(n);
                }
                Err(e) => return Err(e),
            }
        }
        out.flush()?;
        state.verified_through = next - 1;
        if let Some(path) = &opts.checkpoint {
            state.store(path)?;
        }
    }
    out.flush()?;
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecheckReport {
    pub lines: usize,
    pub passed: usize,
    /// `(line number, n)` of every failing line.
    pub failed: Vec<(usize, String)>,
}

impl RecheckReport {
    pub fn ok(&self) -> bool {
        self.failed.is_empty()
    }
}

fn big_field(v: &serde_json::Value, key: &str, line: usize) -> Result<Option<BigInt>> {
    let parse_err = |msg: String| Error::Parse { line, msg };
    match v.get(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::String(s)) => {
            let digits = s.strip_prefix('-').unwrap_or(s);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(parse_err(format!(
                    "field {key:?} is not a decimal integer: {s:?}"
                )));
            }
            Ok(Some(
                s.parse()
                    .map_err(|e| parse_err(format!("field {key:?}: {e}")))?,
            ))
        }
        Some(other) => Err(parse_err(format!(
            "field {key:?} must be a decimal string, got {other}"
        ))),
    }
}

/// Re-verifies `4/n = 1/x + 1/y (+ 1/z)` for every line using only the
/// recorded integers, in arbitrary precision.
pub fn recheck_reader(reader: impl BufRead) -> Result<RecheckReport> {
    let mut report = RecheckReport::default();
    let four = BigInt::from(4);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let field = |k: &str| {
            big_field(&v, k, lineno)?.ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("missing field {k:?}"),
            })
        };
        let n = field("n")?;
        let mut dens = vec![field("x")?, field("y")?];
        dens.extend(big_field(&v, "z", lineno)?);
        report.lines += 1;
        if verify_fraction(&four, &n, &dens) {
            report.passed += 1;
        } else {
            report.failed.push((lineno, n.to_string()));
        }
    }
    Ok(report)
}

pub fn recheck(path: &Path) -> Result<RecheckReport> {
    recheck_reader(BufReader::new(File::open(path)?))
}
