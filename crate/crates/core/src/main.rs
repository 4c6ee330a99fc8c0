//! Command-line interface to the plausible-logic engine.
//!
//! Exit codes: 0 proved / all checks passed, 1 disproved / a check failed,
//! 2 usage errors (including unknown algorithms), 3 unparseable input,
//! 4 non-ground queries, 5 description errors (unsatisfiable axioms,
//! unknown rule references, priority cycles).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use plaus::certificate::{extract_certificate, validate_certificate, Certificate};
use plaus::classical;
use plaus::description::{Algorithm, PlausibleDescription, RuleKind};
use plaus::engine::{self, build_evaluation_rad, EngineError, EvalTarget};
use plaus::lang;
use plaus::syntax::{to_cnf, Atom, Clause, Formula, Literal};
use plaus::truth::truth_value;

const EXIT_FAIL: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NON_GROUND: u8 = 4;
const EXIT_DESCRIPTION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "plaus",
    version,
    about = "Plausible-logic reasoning: defeasible rules, priorities, eight proof algorithms"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and build a description, reporting its size
    Check {
        /// Description file
        file: PathBuf,
    },
    /// Evaluate one query, printing +1 or -1
    Prove {
        file: PathBuf,
        /// Proof algorithm
        #[arg(short, long)]
        alg: AlgArg,
        /// Ground formula to prove
        #[arg(short, long)]
        query: String,
    },
    /// Four-valued truth of a formula: t, f, a or u
    Truth {
        file: PathBuf,
        #[arg(short, long)]
        alg: AlgArg,
        #[arg(short, long)]
        query: String,
    },
    /// Emit the evaluation rad for a query as a certificate
    Rad {
        file: PathBuf,
        #[arg(short, long)]
        alg: AlgArg,
        #[arg(short, long)]
        query: String,
        /// Output format
        #[arg(long, value_enum, default_value_t = RadFormat::Json)]
        format: RadFormat,
        /// Write to a file instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Re-validate a certificate against a description
    Validate {
        file: PathBuf,
        /// Certificate JSON file
        #[arg(long)]
        cert: PathBuf,
    },
    /// Cross-check engine invariants over a query universe
    Audit {
        file: PathBuf,
        /// Which formulas to audit
        #[arg(long, value_enum, default_value_t = UniverseArg::Consequents)]
        universe: UniverseArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Phi,
    Pi,
    Psi,
    Theta,
    #[value(name = "thetap", alias = "theta_prime")]
    Thetap,
    Beta,
    #[value(name = "psip", alias = "psi_prime")]
    Psip,
    #[value(name = "pip", alias = "pi_prime")]
    Pip,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Algorithm {
        match a {
            AlgArg::Phi => Algorithm::Phi,
            AlgArg::Pi => Algorithm::Pi,
            AlgArg::Psi => Algorithm::Psi,
            AlgArg::Theta => Algorithm::Theta,
            AlgArg::Thetap => Algorithm::ThetaPrime,
            AlgArg::Beta => Algorithm::Beta,
            AlgArg::Psip => Algorithm::PsiPrime,
            AlgArg::Pip => Algorithm::PiPrime,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RadFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum UniverseArg {
    /// Every rule-instance consequent and its negation
    Consequents,
    /// Every ground literal over the description's atoms
    Literals,
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CmdError {
            code,
            message: message.into(),
        }
    }
}

fn engine_error(e: EngineError) -> CmdError {
    let code = match &e {
        EngineError::NonGroundQuery { .. } => EXIT_NON_GROUND,
        _ => EXIT_DESCRIPTION,
    };
    CmdError::new(code, e.to_string())
}

fn load_description(path: &PathBuf) -> Result<PlausibleDescription, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let file =
        lang::parse_description(&text).map_err(|e| CmdError::new(EXIT_PARSE, e.to_string()))?;
    file.build()
        .map_err(|e| CmdError::new(EXIT_DESCRIPTION, e.to_string()))
}

fn parse_query(text: &str) -> Result<Formula, CmdError> {
    lang::parse_formula(text).map_err(|e| CmdError::new(EXIT_PARSE, e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CmdError> {
    match cli.cmd {
        Cmd::Check { file } => {
            let desc = load_description(&file)?;
            let mut strict = 0;
            let mut defeasible = 0;
            let mut warning = 0;
            for inst in desc.instances() {
                match inst.rule.kind {
                    RuleKind::Strict => strict += 1,
                    RuleKind::Defeasible => defeasible += 1,
                    RuleKind::Warning => warning += 1,
                }
            }
            println!("constants: {}", desc.constants().len());
            println!("axiom clauses: {}", desc.axioms().len());
            println!(
                "rule instances: {} (strict {strict}, defeasible {defeasible}, warning {warning})",
                desc.instances().len()
            );
            println!("priority pairs: {}", desc.priority_pairs().count());
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Prove { file, alg, query } => {
            let desc = load_description(&file)?;
            let f = parse_query(&query)?;
            let value = engine::eval_p(&desc, alg.into(), &[], &EvalTarget::Formula(f))
                .map_err(engine_error)?;
            if value == 1 {
                println!("+1");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("-1");
                Ok(ExitCode::from(EXIT_FAIL))
            }
        }
        Cmd::Truth { file, alg, query } => {
            let desc = load_description(&file)?;
            let f = parse_query(&query)?;
            let v = truth_value(&desc, alg.into(), &f).map_err(engine_error)?;
            println!("{v}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rad {
            file,
            alg,
            query,
            format,
            out,
        } => {
            let desc = load_description(&file)?;
            let f = parse_query(&query)?;
            let rad = build_evaluation_rad(&desc, alg.into(), &EvalTarget::Formula(f))
                .map_err(engine_error)?;
            let cert = extract_certificate(&desc, &rad);
            let text = match format {
                RadFormat::Json => cert.to_json(),
                RadFormat::Dot => cert.to_dot(),
            };
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| {
                    CmdError::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { file, cert } => {
            let desc = load_description(&file)?;
            let text = fs::read_to_string(&cert).map_err(|e| {
                CmdError::new(EXIT_IO, format!("cannot read {}: {e}", cert.display()))
            })?;
            let cert = Certificate::from_json(&text)
                .map_err(|e| CmdError::new(EXIT_PARSE, format!("bad certificate: {e}")))?;
            match validate_certificate(&desc, &cert) {
                Ok(()) => {
                    println!("certificate valid");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(ExitCode::from(EXIT_FAIL))
                }
            }
        }
        Cmd::Audit { file, universe } => {
            let desc = load_description(&file)?;
            cmd_audit(&desc, universe)
        }
    }
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<Atom>) {
    match f {
        Formula::Lit(l) => {
            out.insert(l.atom.clone());
        }
        Formula::Not(g) => collect_atoms(g, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                collect_atoms(g, out);
            }
        }
    }
}

fn audit_universe(desc: &PlausibleDescription, kind: UniverseArg) -> Vec<Formula> {
    let mut out: BTreeSet<Formula> = BTreeSet::new();
    match kind {
        UniverseArg::Consequents => {
            for inst in desc.instances() {
                out.insert(inst.rule.consequent.clone());
                out.insert(inst.rule.consequent.negate());
            }
        }
        UniverseArg::Literals => {
            let mut atoms: BTreeSet<Atom> = BTreeSet::new();
            for c in desc.axioms() {
                for l in c.literals() {
                    atoms.insert(l.atom.clone());
                }
            }
            for inst in desc.instances() {
                collect_atoms(&inst.rule.consequent, &mut atoms);
                for a in &inst.rule.antecedents {
                    collect_atoms(a, &mut atoms);
                }
            }
            for a in atoms {
                out.insert(Formula::Lit(Literal::pos(a.clone())));
                out.insert(Formula::Lit(Literal::neg(a)));
            }
        }
    }
    out.into_iter().collect()
}

fn cmd_audit(desc: &PlausibleDescription, kind: UniverseArg) -> Result<ExitCode, CmdError> {
    let universe = audit_universe(desc, kind);
    let mut proved: BTreeMap<Algorithm, BTreeSet<Formula>> = BTreeMap::new();
    for alg in Algorithm::ALL {
        proved.insert(
            alg,
            engine::provable_set(desc, alg, &universe).map_err(engine_error)?,
        );
    }

    let mut rows: Vec<(String, bool)> = Vec::new();

    // Coherence: evaluation is a function, so a second pass agrees.
    let mut coherent = true;
    for alg in Algorithm::ALL {
        let again = engine::provable_set(desc, alg, &universe).map_err(engine_error)?;
        coherent &= again == proved[&alg];
    }
    rows.push(("coherence: repeated evaluation agrees".into(), coherent));

    // The proof hierarchy, and its reversal on disproofs.
    let chain = [
        Algorithm::Phi,
        Algorithm::Pi,
        Algorithm::Psi,
        Algorithm::Theta,
        Algorithm::ThetaPrime,
        Algorithm::Beta,
        Algorithm::PsiPrime,
        Algorithm::PiPrime,
    ];
    for pair in chain.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let ok = proved[&lo].is_subset(&proved[&hi]);
        rows.push((format!("proofs({lo}) within proofs({hi})"), ok));
        let lo_dis: BTreeSet<&Formula> = universe.iter().filter(|f| !proved[&lo].contains(f)).collect();
        let hi_dis: BTreeSet<&Formula> = universe.iter().filter(|f| !proved[&hi].contains(f)).collect();
        rows.push((format!("disproofs({hi}) within disproofs({lo})"), hi_dis.is_subset(&lo_dis)));
    }
    rows.push((
        "proofs(theta) equal proofs(theta')".into(),
        proved[&Algorithm::Theta] == proved[&Algorithm::ThetaPrime],
    ));
    if desc.priority_pairs().next().is_none() {
        rows.push((
            "empty priority: proofs(pi) equal proofs(psi)".into(),
            proved[&Algorithm::Pi] == proved[&Algorithm::Psi],
        ));
        rows.push((
            "empty priority: proofs(psi') equal proofs(pi')".into(),
            proved[&Algorithm::PsiPrime] == proved[&Algorithm::PiPrime],
        ));
    }

    // Pairwise consistency of proved formulas for the ambiguity-blocking
    // side of the hierarchy.
    for alg in [
        Algorithm::Phi,
        Algorithm::Pi,
        Algorithm::Psi,
        Algorithm::Theta,
        Algorithm::Beta,
    ] {
        let set: Vec<&Formula> = proved[&alg].iter().collect();
        let mut ok = true;
        'outer: for (i, f) in set.iter().enumerate() {
            for g in &set[i..] {
                let mut clauses: Vec<Clause> = desc.axioms().to_vec();
                clauses.extend(to_cnf(f));
                clauses.extend(to_cnf(g));
                if !classical::is_satisfiable(&clauses) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        rows.push((format!("2-consistency({alg})"), ok));
    }

    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut all_ok = true;
    for (name, ok) in &rows {
        println!("{name:<width$}  {}", if *ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    }
    println!(
        "{} checks over {} queries: {}",
        rows.len(),
        universe.len(),
        if all_ok { "PASS" } else { "FAIL" }
    );
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}
