use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use acyclic_core::codings::{EvConstSeq, Side};
use acyclic_core::graph::Vertex;
use acyclic_core::hierarchy::{self, CertifiedSeq, HierarchyError, OrdinalExpr};
use acyclic_core::reduction::{
    self, DenseOpenOracle, Lemma34Params, ReductionError, SeenOneOracle, TrivialOracle,
};
use acyclic_core::selector::{self, Partition, SelectorInstance, SetMap};
use acyclic_core::testkit::{self, Def31Bounds, Test, TestError};
use acyclic_core::treerel::{self, Relation, ResolutionFamily, TruncTree};

use crate::{Command, OracleChoice, TestSource};

pub enum Failure {
    Usage(String),
    Undecided(String),
}

type Outcome = Result<u8, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<TestError> for Failure {
    fn from(e: TestError) -> Self {
        match e {
            TestError::UndecidedTails => Failure::Undecided(e.to_string()),
            e => usage(e),
        }
    }
}

impl From<HierarchyError> for Failure {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::CertificateUnavailable(_) => Failure::Undecided(e.to_string()),
            HierarchyError::Test(e) => e.into(),
            e => usage(e),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Insufficient(_)
            | ReductionError::Overflow { .. }
            | ReductionError::Exhausted { .. } => Failure::Undecided(e.to_string()),
            ReductionError::Hierarchy(e) => e.into(),
            e => usage(e),
        }
    }
}

// writing to a String cannot fail
macro_rules! out {
    ($out:expr, $($arg:tt)*) => { writeln!($out, $($arg)*).expect("write to string") };
}

pub fn run(command: &Command, out: &mut String) -> Outcome {
    match command {
        Command::GenTest { max_q, out: path } => gen_test(*max_q, path.as_deref(), out),
        Command::CheckTest {
            source,
            max_q,
            bound,
            max_u,
        } => check_test(source, *max_q, *bound, *max_u, out),
        Command::Slice { source, level } => slice(source, *level, out),
        Command::GraphDot { source, level } => {
            let g = testkit::level_graph(&load_test(source)?, *level)?;
            out.push_str(&g.to_dot());
            Ok(0)
        }
        Command::CheckAcyclic { source, max_level } => check_acyclic(source, *max_level, out),
        Command::RectFree { source, max_level } => rect_free(source, *max_level, out),
        Command::Rho { xi, seq } => {
            let y = hierarchy::rho0_pow(&ordinal(xi)?, &CertifiedSeq::new(sequence(seq)?))?;
            out!(out, "{}", y.seq());
            Ok(0)
        }
        Command::HMember { xi, seq } => h_member(xi, seq, out),
        Command::SMember {
            source,
            xi,
            alpha,
            beta,
        } => s_member(source, xi, alpha, beta, out),
        Command::Reduce { oracle, max_rank } => reduce(*oracle, *max_rank, out),
        Command::VerifyL34 {
            oracle,
            depth,
            t_bound,
            m_bound,
            max_prefix,
        } => verify_l34(*oracle, *depth, *t_bound, *m_bound, *max_prefix, out),
        Command::VerifyT35 {
            oracle,
            xi,
            alpha,
            coords,
        } => verify_t35(*oracle, *xi, alpha, *coords, out),
        Command::SelectorDemo { level, t0 } => selector_demo(*level, t0.as_deref(), out),
        Command::RelCheck {
            relations,
            depth,
            alphabet,
        } => rel_check(relations, *depth, *alphabet, out),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_test(source: &TestSource) -> Result<Test, Failure> {
    match &source.file {
        None => Ok(Test::canonical()),
        Some(path) => {
            Test::parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
    }
}

fn ordinal(s: &str) -> Result<OrdinalExpr, Failure> {
    s.parse()
        .map_err(|e| usage(format!("bad ordinal {s:?}: {e}")))
}

fn sequence(s: &str) -> Result<EvConstSeq, Failure> {
    s.parse()
        .map_err(|e| usage(format!("bad sequence {s:?}: {e}")))
}

fn oracle(choice: OracleChoice) -> &'static dyn DenseOpenOracle {
    match choice {
        OracleChoice::Trivial => &TrivialOracle,
        OracleChoice::SeenOne => &SeenOneOracle,
    }
}

fn gen_test(max_q: usize, path: Option<&Path>, out: &mut String) -> Outcome {
    let text = Test::build(max_q)?.to_text(max_q)?;
    match path {
        None => out.push_str(&text),
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            out!(out, "wrote levels 0..={max_q} to {}", path.display());
        }
    }
    Ok(0)
}

fn check_test(
    source: &TestSource,
    max_q: usize,
    bound: u128,
    max_u: usize,
    out: &mut String,
) -> Outcome {
    let test = match source.file {
        None => Test::build(max_q)?,
        Some(_) => load_test(source)?,
    };
    let bounds = Def31Bounds {
        p_max: bound,
        m_max: bound,
        u_len_max: max_u,
    };
    let report = testkit::check_def31(&test, max_q, bounds)?;
    for w in &report.richness {
        out!(
            out,
            "richness p={} m={} u={} level={}",
            w.p,
            w.m,
            w.u,
            w.level
        );
    }
    match report.violation {
        None => {
            out!(out, "ok: levels 0..={max_q} pass clauses a, b and c");
            Ok(0)
        }
        Some(v) => {
            out!(out, "WITNESS: {v}");
            Ok(1)
        }
    }
}

fn slice(source: &TestSource, level: usize, out: &mut String) -> Outcome {
    for pair in testkit::level_slice(&load_test(source)?, level)? {
        out!(out, "{}\t{}", pair.s(), pair.t());
    }
    Ok(0)
}

fn check_acyclic(source: &TestSource, max_level: usize, out: &mut String) -> Outcome {
    let test = load_test(source)?;
    for p in 1..=max_level {
        let g = testkit::level_graph(&test, p)?;
        if let Some(cycle) = g.cycle_names() {
            out!(out, "WITNESS: level={p} cycle={}", cycle.join(","));
            return Ok(1);
        }
        out!(out, "level {p}: {} edges, acyclic", g.graph().edges().len());
    }
    Ok(0)
}

fn rect_free(source: &TestSource, max_level: usize, out: &mut String) -> Outcome {
    let test = load_test(source)?;
    for p in 1..=max_level {
        if let Some(r) = testkit::find_rectangle(&test, p)? {
            out!(
                out,
                "WITNESS: level={p} rectangle={},{},{},{}",
                r[0],
                r[1],
                r[2],
                r[3]
            );
            return Ok(1);
        }
        out!(out, "level {p}: rectangle-free");
    }
    Ok(0)
}

fn h_member(xi: &str, seq: &str, out: &mut String) -> Outcome {
    let xi = ordinal(xi)?;
    let e = CertifiedSeq::new(sequence(seq)?);
    let image = hierarchy::rho0_pow(&xi, &e)?;
    if image.is_zero() {
        out!(out, "true");
        return Ok(0);
    }
    out!(out, "false");
    out!(out, "WITNESS: rho0^{xi}={}", image.seq());
    Ok(1)
}

fn s_member(source: &TestSource, xi: &str, alpha: &str, beta: &str, out: &mut String) -> Outcome {
    let test = load_test(source)?;
    let xi = ordinal(xi)?;
    let (a, b) = (sequence(alpha)?, sequence(beta)?);
    if !testkit::branch_member(&a, &b, &test)? {
        out!(out, "false");
        out!(out, "WITNESS: not-a-branch alpha={a} beta={b}");
        return Ok(1);
    }
    if hierarchy::s_member(&xi, &a, &b, &test)? {
        out!(out, "true");
        return Ok(0);
    }
    let d = acyclic_core::codings::shift(&acyclic_core::codings::symdiff(&a, &b));
    out!(out, "false");
    out!(out, "WITNESS: shifted-difference={d} in-H");
    Ok(1)
}

fn reduce(choice: OracleChoice, max_rank: usize, out: &mut String) -> Outcome {
    let test = Test::canonical();
    let rd = reduction::build_reduction(&test, oracle(choice), max_rank);
    out!(out, "# rank\tw\tlevel\tx_len\tv_len");
    for e in rd.ranks() {
        out!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            e.info.rank,
            e.info.word,
            e.level,
            e.info.x_len,
            e.v_len()
        );
    }
    match rd.frontier() {
        Some(f) if rd.ranks().len() <= max_rank => {
            out!(
                out,
                "# frontier rank={} w={} x_len={}",
                f.info.rank,
                f.info.word,
                f.info.x_len
            );
            Err(Failure::Undecided(f.error.to_string()))
        }
        _ => Ok(0),
    }
}

fn verify_l34(
    choice: OracleChoice,
    depth: usize,
    t_bound: u128,
    m_bound: u128,
    max_prefix: usize,
    out: &mut String,
) -> Outcome {
    let test = Test::canonical();
    let rd = reduction::build_reduction(&test, oracle(choice), 64);
    let params = Lemma34Params {
        depth,
        t_bound,
        m_bound,
    };
    let alphas = reduction::sample_alphas(max_prefix);
    let report = reduction::verify_lemma34(&rd, &params, &alphas)?;
    out!(out, "ranks {} alphas {}", rd.ranks().len(), report.alphas);
    out!(out, "equations {}", report.equations_checked);
    out!(out, "clause a {}", report.clause_a_checked);
    out!(
        out,
        "clause b.i {} ({} beyond depth)",
        report.b1_checked,
        report.b1_out_of_window
    );
    out!(out, "clause b.ii {}", report.b2_checked);
    out!(out, "structural {}", report.structural_checked);
    match report.failure {
        None => {
            out!(out, "ok");
            Ok(0)
        }
        Some(f) => {
            out!(out, "WITNESS: {f}");
            Ok(1)
        }
    }
}

fn verify_t35(
    choice: OracleChoice,
    xi: u64,
    alpha: &str,
    coords: usize,
    out: &mut String,
) -> Outcome {
    let test = Test::canonical();
    let rd = reduction::build_reduction(&test, oracle(choice), 64);
    let alpha = sequence(alpha)?;
    match reduction::identity_mismatch(&rd, &OrdinalExpr::Finite(xi), &alpha, coords)? {
        None => {
            out!(out, "true");
            Ok(0)
        }
        Some((k, lhs)) => {
            out!(out, "false");
            out!(
                out,
                "WITNESS: k={k} alpha-side={} difference-side={}",
                lhs as u8,
                !lhs as u8
            );
            Ok(1)
        }
    }
}

fn selector_demo(level: usize, t0: Option<&str>, out: &mut String) -> Outcome {
    if level == 0 || level > 8 {
        return Err(usage("selector-demo needs 1 <= level <= 8"));
    }
    let g = testkit::level_graph(&Test::canonical(), level)?;
    let inst = SelectorInstance::from_level_graph(&g, 2, 2).map_err(usage)?;
    let t0 = match t0 {
        None => inst.edges()[0],
        Some(spec) => {
            let (s, t) = spec
                .split_once(',')
                .ok_or_else(|| usage("--t0 expects s,t"))?;
            let e = (
                inst.find_label(Side::Zero, s)
                    .ok_or_else(|| usage(format!("no vertex {s}")))?,
                inst.find_label(Side::One, t)
                    .ok_or_else(|| usage(format!("no vertex {t}")))?,
            );
            if !inst.is_edge(e) {
                return Err(usage(format!("({s},{t}) is not an edge of level {level}")));
            }
            e
        }
    };
    let name = |side, i| inst.label(Vertex { side, index: i });
    let edge = |e: &(usize, usize)| format!("({},{})", name(Side::Zero, e.0), name(Side::One, e.1));
    let list = |set: &BTreeSet<(usize, usize)>| set.iter().map(edge).collect::<Vec<_>>().join(" ");
    let part = selector::partition_nhv(&inst, t0).map_err(usage)?;
    out!(out, "t0 {}", edge(&t0));
    out!(out, "H {}", list(&part.h));
    out!(out, "V {}", list(&part.v));
    out!(out, "N {} pairs", part.n.len());
    for side in [Side::Zero, Side::One] {
        let h = Partition::projection(&part.h, side);
        let v = Partition::projection(&part.v, side);
        if let Some(x) = h.intersection(&v).next() {
            out!(
                out,
                "WITNESS: projection side={} shared={}",
                side.bit() as u8,
                name(side, *x)
            );
            return Ok(1);
        }
    }
    out!(out, "projections of H and V are disjoint");

    // Ψ(t) asks for ψ₀ ⊕ ψ₁ to be the last bit of s ⊕ the last bit of t
    let mut phi_bar = SetMap::new();
    let mut psi = SetMap::new();
    for &e in inst.edges() {
        let parity = (e.0 ^ e.1) & 1;
        phi_bar.set(e, [(0, 0), (0, 1), (1, 0), (1, 1)]);
        psi.set(e, [(0, parity), (1, 1 - parity)]);
    }
    match selector::lift_selector(&inst, &psi, &phi_bar) {
        Ok(sel) => {
            if let Some(bad) = sel.violation(&inst, &psi) {
                out!(out, "WITNESS: lifted selector leaves psi at {}", edge(&bad));
                return Ok(1);
            }
            let row = |side, v: &[usize]| {
                v.iter()
                    .enumerate()
                    .map(|(i, x)| format!("{}={x}", name(side, i)))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out!(out, "lifted psi0 {}", row(Side::Zero, &sel.psi0));
            out!(out, "lifted psi1 {}", row(Side::One, &sel.psi1));
            Ok(0)
        }
        Err(e) => {
            out!(out, "WITNESS: {e}");
            Ok(1)
        }
    }
}

fn load_relation(tree: &TruncTree, spec: &str) -> Result<Relation, Failure> {
    match spec {
        "builtin:extension" => Ok(Relation::extension(tree)),
        "builtin:r1" => Ok(Relation::r1(tree)),
        path => Relation::parse(tree, &read(Path::new(path))?)
            .map_err(|e| usage(format!("{path}: {e}"))),
    }
}

fn rel_check(relations: &[String], depth: usize, alphabet: usize, out: &mut String) -> Outcome {
    let tree = TruncTree::new(alphabet, depth).map_err(usage)?;
    let stages = relations
        .iter()
        .map(|spec| load_relation(&tree, spec))
        .collect::<Result<Vec<_>, _>>()?;
    if let [r] = &stages[..] {
        if let Some(f) = treerel::tree_relation_failure(r, &tree) {
            out!(out, "WITNESS: {f}");
            return Ok(1);
        }
        out!(out, "tree relation: yes");
        let ext = Relation::extension(&tree);
        match treerel::is_distinguished(r, &ext, &tree) {
            Ok(d) => out!(
                out,
                "distinguished in extension: {}",
                if d { "yes" } else { "no" }
            ),
            Err(_) => out!(out, "distinguished in extension: not contained"),
        }
        return Ok(0);
    }
    let family = ResolutionFamily::new(stages);
    if let Some(f) = treerel::resolution_family_failure(&family, &tree) {
        out!(out, "WITNESS: {f}");
        return Ok(1);
    }
    out!(out, "resolution family: yes ({} stages)", relations.len());
    if let Some((rho, s, s1, s2)) = treerel::extension_lemma_failure(&family, &tree) {
        out!(
            out,
            "WITNESS: extension-lemma stage={rho} s={} s'={} s''={}",
            treerel::show(&s),
            treerel::show(&s1),
            treerel::show(&s2)
        );
        return Ok(1);
    }
    out!(out, "extension lemma: holds");
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(command: Command) -> (u8, String) {
        let mut out = String::new();
        let code = match run(&command, &mut out) {
            Ok(c) => c,
            Err(Failure::Usage(_)) => 2,
            Err(Failure::Undecided(_)) => 3,
        };
        (code, out)
    }

    #[test]
    fn gen_test_prints_level_six() {
        let (code, out) = run_str(Command::GenTest {
            max_q: 6,
            out: None,
        });
        assert_eq!(code, 0);
        assert!(out.contains("6\t000000\t100000\n"));
    }

    #[test]
    fn h_member_of_zero_sequence() {
        let (code, out) = run_str(Command::HMember {
            xi: "1".into(),
            seq: "0:-".into(),
        });
        assert_eq!(code, 1);
        assert!(out.starts_with("false\nWITNESS: "));
    }

    #[test]
    fn selector_demo_on_level_two() {
        let (code, out) = run_str(Command::SelectorDemo {
            level: 2,
            t0: Some("00,11".into()),
        });
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("H (01,11)\n"));
        assert!(out.contains("V (00,10)\n"));
    }

    #[test]
    fn reduce_reports_the_frontier() {
        let (code, out) = run_str(Command::Reduce {
            oracle: OracleChoice::SeenOne,
            max_rank: 4,
        });
        assert_eq!(code, 3);
        assert!(out.contains("0\t-\t21\t2\t19\n"));
    }
}
