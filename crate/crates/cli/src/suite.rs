//! The acceptance criteria as self-contained checks. Every check builds its
//! fixtures from built-ins and compares two independent computations.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt::Write;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspwb_core::agespec::{builtin_linear_order, enumerate_d_types};
use cspwb_core::construct::{
    build_pcsp, choose_d, finite_blowup_model, finite_blowup_model_i4, full_power_finite, BuildOptions, PcspTemplate,
    EQUIV, I4, NEQ,
};
use cspwb_core::datalog::{acyclicity_check, blowup_expand, blowup_reduce_star, i4_quotient_reduce};
use cspwb_core::error::Result;
use cspwb_core::fixtures::{antichain, chain, clique, directed_cycle, lt_signature, parity_a1};
use cspwb_core::polyfind::{
    check_essentially_injective, find_full_power_hom, find_pcsp_polymorphism, find_polymorphism, identity_classes,
    lift_homomorphism, preserves, preserves_i4, satisfies_identity, IdentityKind, OperationTable,
};
use cspwb_core::relcore::{all_homomorphisms, decode_tuple, encode_tuple, find_homomorphism, FiniteStructure, StructureBuilder};
use cspwb_core::text::{emit_op, emit_orbit_template, emit_pcsp_summary, emit_structure, emit_type_table};

use crate::config::WorkbenchConfig;

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
    pub artifacts: Vec<(String, String)>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let budget = match self.budget {
            Some(b) => format!("{:.1}s of {}s", self.elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.1}s", self.elapsed.as_secs_f64()),
        };
        format!("criterion {:>2} {verdict} {}: {} [{budget}]", self.id, self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.results.iter().map(CriterionResult::line).collect()
    }
}

struct Check {
    passed: bool,
    detail: String,
    artifacts: Vec<(String, String)>,
}

type CheckFn = fn(&WorkbenchConfig) -> Result<Check>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget_secs: Option<u64>,
    run: CheckFn,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "acyclicity program vs chain homomorphisms", budget_secs: Some(60), run: c1_acyclicity },
    Criterion { id: 2, name: "star reduction vs finite blowup model", budget_secs: Some(120), run: c2_star },
    Criterion { id: 3, name: "I4 quotient reduction vs I4 blowup model", budget_secs: Some(120), run: c3_i4 },
    Criterion { id: 4, name: "identity search regressions", budget_secs: Some(30), run: c4_identities },
    Criterion { id: 5, name: "pipeline on the rational order", budget_secs: Some(600), run: c5_pipeline },
    Criterion { id: 6, name: "full power homomorphisms and lifting", budget_secs: Some(600), run: c6_lifting },
    Criterion { id: 7, name: "endomorphisms of a full power", budget_secs: Some(60), run: c7_endomorphisms },
    Criterion { id: 8, name: "type counts vs weak orders", budget_secs: Some(30), run: c8_types },
    Criterion { id: 9, name: "essential injectivity vs I4", budget_secs: Some(60), run: c9_injectivity },
];

const DETERMINISM_ID: u32 = 10;
const DETERMINISM_NAME: &str = "determinism of emitted artifacts";

fn selected(id: u32, name: &str, filter: Option<&str>) -> bool {
    filter.is_none_or(|f| id.to_string() == f || name.contains(f))
}

fn run_one(c: &Criterion, cfg: &WorkbenchConfig) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.run)(cfg);
    let elapsed = start.elapsed();
    let budget = c.budget_secs.map(Duration::from_secs);
    let (mut passed, mut detail, artifacts) = match outcome {
        Ok(ch) => (ch.passed, ch.detail, ch.artifacts),
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    if budget.is_some_and(|b| elapsed > b) {
        passed = false;
        detail.push_str("; over the time budget");
    }
    CriterionResult { id: c.id, name: c.name, passed, detail, elapsed, budget, artifacts }
}

/// Runs the selected criteria. Criterion 10 reruns 1 to 9 and compares
/// every emitted artifact byte for byte.
pub fn run_suite(cfg: &WorkbenchConfig, filter: Option<&str>) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for c in &CRITERIA {
        if selected(c.id, c.name, filter) {
            let r = run_one(c, cfg);
            if cfg.verbosity > 0 {
                eprintln!("{}", r.line());
            }
            report.results.push(r);
        }
    }
    if selected(DETERMINISM_ID, DETERMINISM_NAME, filter) {
        let start = Instant::now();
        let mut first: Vec<CriterionResult> = report.results.clone();
        if first.len() < CRITERIA.len() {
            first = CRITERIA.iter().map(|c| run_one(c, cfg)).collect();
        }
        let second: Vec<CriterionResult> = CRITERIA.iter().map(|c| run_one(c, cfg)).collect();
        let mut compared = 0usize;
        let mut bytes = 0usize;
        let mut diffs = Vec::new();
        for (a, b) in first.iter().zip(&second) {
            if a.artifacts.len() != b.artifacts.len() {
                diffs.push(format!("criterion {} emitted {} vs {} artifacts", a.id, a.artifacts.len(), b.artifacts.len()));
                continue;
            }
            for ((na, ta), (nb, tb)) in a.artifacts.iter().zip(&b.artifacts) {
                compared += 1;
                bytes += ta.len();
                if na != nb || ta != tb {
                    diffs.push(format!("{na} differs"));
                }
            }
        }
        let produced = first.iter().all(|r| !r.artifacts.is_empty());
        let passed = diffs.is_empty() && produced && compared > 0;
        let detail = if passed {
            format!("{compared} artifacts ({bytes} bytes) identical across two runs")
        } else if !produced {
            "a criterion failed to emit artifacts".to_string()
        } else {
            format!("{} differences: {}", diffs.len(), diffs.join(", "))
        };
        report.results.push(CriterionResult {
            id: DETERMINISM_ID,
            name: DETERMINISM_NAME,
            passed,
            detail,
            elapsed: start.elapsed(),
            budget: None,
            artifacts: Vec::new(),
        });
    }
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| cspwb_core::error::Error::Invalid(format!("cannot create `{}`: {e}", dir.display())))?;
        for r in &report.results {
            for (name, text) in &r.artifacts {
                let path = dir.join(format!("c{}_{name}.txt", r.id));
                std::fs::write(&path, text)
                    .map_err(|e| cspwb_core::error::Error::Invalid(format!("cannot write `{}`: {e}", path.display())))?;
            }
        }
    }
    Ok(report)
}

fn rng_for(cfg: &WorkbenchConfig, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(id))
}

/// Order-sensitive digest of a verdict sequence.
#[derive(Default)]
struct Digest(DefaultHasher);

impl Digest {
    fn add(&mut self, x: impl Hash) {
        x.hash(&mut self.0);
    }

    fn hex(&self) -> String {
        format!("{:016x}", self.0.finish())
    }
}

fn digraph(n: usize, mask: u64) -> FiniteStructure {
    let mut b = StructureBuilder::new(lt_signature(), n);
    for x in 0..n {
        for y in 0..n {
            if mask >> (x * n + y) & 1 == 1 {
                b.add(0, &[x as u32, y as u32]);
            }
        }
    }
    b.build()
}

fn c1_acyclicity(cfg: &WorkbenchConfig) -> Result<Check> {
    let mut digest = Digest::default();
    let (mut total, mut yes, mut bad) = (0usize, 0usize, Vec::new());
    let mut check = |j: &FiniteStructure| -> Result<()> {
        let a = acyclicity_check(j)?;
        let b = find_homomorphism(j, &chain(j.size()), false)?.is_some();
        total += 1;
        yes += a as usize;
        digest.add((a, b));
        if a != b && bad.len() < 5 {
            bad.push(emit_structure(j, "J"));
        }
        Ok(())
    };
    let mut exhaustive = 0;
    for n in 1..=4usize {
        for mask in 0..1u64 << (n * n) {
            check(&digraph(n, mask))?;
            exhaustive += 1;
        }
    }
    let mut rng = rng_for(cfg, 1);
    for _ in 0..100_000 {
        let p: f64 = rng.gen_range(0.0..0.4);
        let mut mask = 0u64;
        for bit in 0..25 {
            if rng.gen_bool(p) {
                mask |= 1 << bit;
            }
        }
        check(&digraph(5, mask))?;
    }
    let detail = format!(
        "{total} digraphs ({exhaustive} exhaustive with |J| <= 4, 100000 sampled with |J| = 5), {yes} acyclic, {} disagreements",
        bad.len()
    );
    let artifact = format!("{detail}\ndigest {}\n{}", digest.hex(), bad.concat());
    Ok(Check { passed: bad.is_empty(), detail, artifacts: vec![("acyclicity".into(), artifact)] })
}

fn up_signature(i4: bool) -> cspwb_core::relcore::Signature {
    let mut s = lt_signature();
    s.push(EQUIV, 2).unwrap();
    s.push(NEQ, 2).unwrap();
    if i4 {
        s.push(I4, 4).unwrap();
    }
    s
}

fn random_up_instance(rng: &mut ChaCha8Rng, i4: bool) -> FiniteStructure {
    let n = rng.gen_range(1..=5usize);
    let p: f64 = rng.gen_range(0.02..0.3);
    let mut b = StructureBuilder::new(up_signature(i4), n);
    for sym in 0..3 {
        for x in 0..n as u32 {
            for y in 0..n as u32 {
                if rng.gen_bool(p) {
                    b.add(sym, &[x, y]);
                }
            }
        }
    }
    if i4 {
        for _ in 0..rng.gen_range(1..=4) {
            let t: Vec<u32> = (0..4).map(|_| rng.gen_range(0..n as u32)).collect();
            b.add(3, &t);
        }
    }
    b.build()
}

fn tau() -> Vec<String> {
    vec!["<".to_string()]
}

fn c2_star(cfg: &WorkbenchConfig) -> Result<Check> {
    let model = finite_blowup_model(&chain(5), 5, &cfg.caps)?;
    let mut rng = rng_for(cfg, 2);
    let mut digest = Digest::default();
    let (mut yes, mut bad) = (0usize, Vec::new());
    for _ in 0..10_000 {
        let j = random_up_instance(&mut rng, false);
        let via = acyclicity_check(&blowup_reduce_star(&j, &tau())?)?;
        let direct = find_homomorphism(&j, &model, false)?.is_some();
        yes += direct as usize;
        digest.add((via, direct));
        if via != direct && bad.len() < 5 {
            bad.push(emit_structure(&j, "J"));
        }
    }
    let detail = format!("10000 instances, {yes} map to the model, {} disagreements", bad.len());
    let artifact = format!("{detail}\ndigest {}\n{}", digest.hex(), bad.concat());
    Ok(Check { passed: bad.is_empty(), detail, artifacts: vec![("star".into(), artifact)] })
}

fn c3_i4(cfg: &WorkbenchConfig) -> Result<Check> {
    let model = finite_blowup_model_i4(&chain(5), 5, &cfg.caps)?;
    let mut rng = rng_for(cfg, 3);
    let mut digest = Digest::default();
    let (mut yes, mut merged, mut bad) = (0usize, 0usize, Vec::new());
    for _ in 0..1_000 {
        let j = random_up_instance(&mut rng, true);
        let q = i4_quotient_reduce(&j)?;
        merged += (q.size() < j.size()) as usize;
        let via = acyclicity_check(&blowup_reduce_star(&q, &tau())?)?;
        let direct = find_homomorphism(&j, &model, false)?.is_some();
        yes += direct as usize;
        digest.add((via, direct, q.size()));
        if via != direct && bad.len() < 5 {
            bad.push(emit_structure(&j, "J"));
        }
    }
    let detail = format!(
        "1000 instances, {yes} map to the model, {merged} shrunk by the quotient, {} disagreements",
        bad.len()
    );
    let artifact = format!("{detail}\ndigest {}\n{}", digest.hex(), bad.concat());
    Ok(Check { passed: bad.is_empty(), detail, artifacts: vec![("i4".into(), artifact)] })
}

fn c4_identities(cfg: &WorkbenchConfig) -> Result<Check> {
    let caps = &cfg.caps;
    let mut notes = Vec::new();
    let mut artifacts = Vec::new();
    let k3 = clique(3);

    // (a) search and an exhaustive pass over all symmetric tables.
    let a_search = find_polymorphism(&k3, &k3, 2, IdentityKind::Commutative, caps)?;
    let unordered: Vec<(u32, u32)> = (0..3).flat_map(|x| (x..3).map(move |y| (x, y))).collect();
    let mut a_exhaustive = 0;
    for code in 0..729u32 {
        let v = decode_tuple(code, 3, 6);
        let f = OperationTable::from_fn(2, 3, |x| {
            let key = (x[0].min(x[1]), x[0].max(x[1]));
            v[unordered.iter().position(|&p| p == key).unwrap()]
        });
        a_exhaustive += preserves(&f, &k3, &k3)? as usize;
    }
    let a = a_search.is_none() && a_exhaustive == 0;
    notes.push(format!("(a) K3 commutative: search none, {a_exhaustive} of 729 symmetric tables preserve"));

    // (b)
    let (_, necklaces) = identity_classes(3, 3, IdentityKind::Cyclic(3))?;
    let b_search = find_polymorphism(&k3, &k3, 3, IdentityKind::Cyclic(3), caps)?;
    let b = b_search.is_none() && necklaces == 11;
    notes.push(format!("(b) K3 cyclic n=3: {necklaces} necklace variables, search none"));

    // (c)
    let a1 = parity_a1();
    let c = match find_polymorphism(&a1, &a1, 3, IdentityKind::Cyclic(3), caps)? {
        Some(f) => {
            let ok = preserves(&f, &a1, &a1)? && satisfies_identity(&f, IdentityKind::Cyclic(3))?;
            artifacts.push(("a1_cyclic3".to_string(), emit_op(&f)));
            ok
        }
        None => false,
    };
    notes.push(format!("(c) A1 cyclic n=3 found and verified: {c}"));

    // (d)
    let c3 = chain(3);
    let d = match find_polymorphism(&c3, &c3, 2, IdentityKind::Commutative, caps)? {
        Some(f) => {
            let ok = preserves(&f, &c3, &c3)? && satisfies_identity(&f, IdentityKind::Commutative)?;
            artifacts.push(("chain3_commutative".to_string(), emit_op(&f)));
            ok
        }
        None => false,
    };
    notes.push(format!("(d) 3-chain commutative found and verified: {d}"));
    let detail = notes.join("; ");
    artifacts.insert(0, ("identities".to_string(), detail.clone() + "\n"));
    Ok(Check { passed: a && b && c && d, detail, artifacts })
}

/// Peak resident memory of this process in bytes, where the OS reports it.
fn peak_memory() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn demo_template(cfg: &WorkbenchConfig) -> Result<PcspTemplate> {
    let opts = BuildOptions { caps: cfg.caps, ..BuildOptions::default() };
    build_pcsp(&builtin_linear_order("<"), &tau(), &chain(3), &opts)
}

fn c5_pipeline(cfg: &WorkbenchConfig) -> Result<Check> {
    let t = demo_template(cfg)?;
    let bhat = cspwb_core::construct::superpose_specs(
        &cspwb_core::construct::blowup_spec(&builtin_linear_order("<"), &tau(), false)?.0,
        &builtin_linear_order(cspwb_core::construct::S_ORDER),
    )?;
    let d = choose_d(&bhat);
    let replay = t.verify();
    let n2 = find_pcsp_polymorphism(&t, 2, IdentityKind::Cyclic(2), &cfg.caps)?;
    let n3 = find_pcsp_polymorphism(&t, 3, IdentityKind::Cyclic(3), &cfg.caps)?;
    let mem = peak_memory();
    let mem_ok = mem.is_some_and(|m| m <= 1 << 30);
    let passed = d == 4 && t.d == 4 && t.s1.size() == 81 && replay && n2.is_none() && n3.is_none() && mem_ok;
    let mem_text = mem.map_or("unmeasured".to_string(), |m| format!("{} MiB", m >> 20));
    let detail = format!(
        "choose_d = {d}, |S1| = {}, |S2| = {} types, replay {}, cyclic n=2 {}, cyclic n=3 {}, peak memory {mem_text} (limit 1024 MiB)",
        t.s1.size(),
        t.s2.size(),
        if replay { "ok" } else { "FAILED" },
        if n2.is_none() { "none" } else { "FOUND" },
        if n3.is_none() { "none" } else { "FOUND" },
    );
    let artifacts = vec![
        ("s1".to_string(), emit_structure(&t.s1, "S1")),
        ("s2".to_string(), emit_orbit_template(&t.s2)),
        ("pcsp".to_string(), emit_pcsp_summary(&t)),
    ];
    Ok(Check { passed, detail, artifacts })
}

fn c6_lifting(cfg: &WorkbenchConfig) -> Result<Check> {
    let t = demo_template(cfg)?;
    let s2 = &t.s2;
    let base = s2.base_signature();
    let (mut total, mut positive, mut bad) = (0usize, 0usize, Vec::new());
    let mut log = String::new();
    for n in 0..=3usize {
        for mask in 0..1u64 << (n * n) {
            let x = digraph(n, mask);
            let y = blowup_expand(&x)?.aligned_to(&base)?;
            let acyclic = acyclicity_check(&blowup_reduce_star(&y, &tau())?)?;
            let hom = find_full_power_hom(&y, s2, &cfg.caps)?;
            total += 1;
            let _ = write!(log, "n={n} mask={mask} acyclic={acyclic} hom={}", hom.is_some());
            if hom.is_some() != acyclic {
                bad.push(format!("n={n} mask={mask}"));
            }
            if let Some(h) = hom {
                positive += 1;
                match lift_homomorphism(&y, &h.map, s2, &cfg.caps) {
                    Ok(cert) if cert.is_positive() => {
                        let _ = write!(log, " classes={} one_types={:?}", cert.x_tilde.size(), cert.one_types);
                    }
                    Ok(_) => bad.push(format!("n={n} mask={mask}: negative certificate")),
                    Err(e) => bad.push(format!("n={n} mask={mask}: {e}")),
                }
            }
            log.push('\n');
        }
    }
    let detail = format!(
        "{total} structures with |X| <= 3 at d = {}, {positive} with a homomorphism, all lifted into the age: {}, {} disagreements",
        t.d,
        bad.is_empty(),
        bad.len()
    );
    let artifact = format!("{detail}\n{log}{}", bad.join("\n"));
    Ok(Check { passed: bad.is_empty(), detail, artifacts: vec![("lifting".into(), artifact)] })
}

fn c7_endomorphisms(cfg: &WorkbenchConfig) -> Result<Check> {
    let d = 2;
    let mut notes = Vec::new();
    let mut passed = true;
    let mut artifact = String::new();
    for (name, a) in [("2-chain", chain(2)), ("2-antichain", antichain(2)), ("2-cycle", directed_cycle(2))] {
        let fp = full_power_finite(&a, d, &cfg.caps)?;
        let direct: BTreeSet<Vec<u32>> = all_homomorphisms(&fp, &fp, false)?.into_iter().collect();
        let m = a.size();
        let componentwise: BTreeSet<Vec<u32>> = all_homomorphisms(&a, &a, false)?
            .into_iter()
            .map(|e| {
                (0..fp.size() as u32)
                    .map(|x| {
                        let t: Vec<u32> = decode_tuple(x, m, d).iter().map(|&c| e[c as usize]).collect();
                        encode_tuple(&t, m)
                    })
                    .collect()
            })
            .collect();
        let same = direct == componentwise;
        passed &= same;
        notes.push(format!("{name}: {} endomorphisms, {} componentwise, equal {same}", direct.len(), componentwise.len()));
        for e in &direct {
            let _ = writeln!(artifact, "{name} {e:?}");
        }
    }
    let detail = notes.join("; ");
    Ok(Check { passed, detail: detail.clone(), artifacts: vec![("endomorphisms".into(), format!("{detail}\n{artifact}"))] })
}

/// Weak orders on `d` labelled points: rank maps onto an initial segment.
fn weak_orders(d: usize) -> usize {
    (0..d.pow(d as u32) as u32)
        .filter(|&code| {
            let r = decode_tuple(code, d, d);
            let used: BTreeSet<u32> = r.iter().copied().collect();
            used.iter().enumerate().all(|(i, &v)| i as u32 == v)
        })
        .count()
}

fn c8_types(cfg: &WorkbenchConfig) -> Result<Check> {
    let lin = builtin_linear_order("<");
    let mut counts = Vec::new();
    let mut oracle = Vec::new();
    let mut artifacts = Vec::new();
    for d in 1..=4 {
        let t = enumerate_d_types(&lin, d, &cfg.caps)?;
        counts.push(t.len());
        oracle.push(weak_orders(d));
        artifacts.push((format!("types_d{d}"), emit_type_table(&t)));
    }
    let passed = counts == oracle && counts == [1, 3, 13, 75];
    let detail = format!("enumerated {counts:?}, weak-order oracle {oracle:?}, expected [1, 3, 13, 75]");
    Ok(Check { passed, detail, artifacts })
}

fn c9_injectivity(cfg: &WorkbenchConfig) -> Result<Check> {
    let mut digest = Digest::default();
    let (mut symmetric, mut sampled, mut injective, mut bad) = (0usize, 0usize, 0usize, Vec::new());
    let mut check = |f: &OperationTable| {
        let a = check_essentially_injective(f);
        let b = preserves_i4(f);
        injective += a as usize;
        digest.add((a, b));
        if a != b && bad.len() < 5 {
            bad.push(emit_op(f));
        }
    };
    let unordered: Vec<(u32, u32)> = (0..3).flat_map(|x| (x..3).map(move |y| (x, y))).collect();
    for code in 0..729u32 {
        let v = decode_tuple(code, 3, 6);
        let f = OperationTable::from_fn(2, 3, |x| {
            let key = (x[0].min(x[1]), x[0].max(x[1]));
            v[unordered.iter().position(|&p| p == key).unwrap()]
        });
        check(&f);
        symmetric += 1;
    }
    let mut rng = rng_for(cfg, 9);
    for _ in 0..100_000 {
        let values = (0..9).map(|_| rng.gen_range(0..3)).collect();
        check(&OperationTable::new(2, 3, 3, values)?);
        sampled += 1;
    }
    let detail = format!(
        "{symmetric} symmetric and {sampled} random binary tables on 3 elements, {injective} essentially injective, {} exceptions",
        bad.len()
    );
    let artifact = format!("{detail}\ndigest {}\n{}", digest.hex(), bad.concat());
    Ok(Check { passed: bad.is_empty(), detail, artifacts: vec![("injectivity".into(), artifact)] })
}
