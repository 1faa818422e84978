//! Command-line front end: tableau proving, brute-force semantic checking,
//! countermodel search, Hilbert-derivation checking and the oracle/tableau
//! agreement fuzzer.
//!
//! Exit codes: 0 proved/valid/accepted, 1 disproved/invalid/rejected,
//! 2 budget exhausted, 3 input error, 4 resource cap exceeded.

use clap::{Args, Parser, Subcommand};
use nmodal::countermodel::{extract_fo_countermodel, extract_prop_countermodel};
use nmodal::formula::{Formula, Signature};
use nmodal::hilbert;
use nmodal::model::{self, BoundedVerdict, FoValuation, ModelError, Structure};
use nmodal::oracle::{self, PropVerdict};
use nmodal::parser::{parse_hilbert_formula, parse_with_inference};
use nmodal::propdag::{random_formula, PropDag, SplitMix64};
use nmodal::tableau::{
    prove_from, prove_prop_dag, Branch, Entry, ProofNode, ProofVerdict, SystematicRun,
    TableauOutcome,
};
use nmodal::truth::Logic;
use serde_json::{json, Value};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(name = "nmodal", version, about = "Prover and model checker for the four-valued non-deterministic modal logics Tm, S4m and S5m")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Logic: tm, s4m or s5m.
    #[arg(long, default_value = "tm")]
    logic: Logic,
    /// First-order mode (the starred systems).
    #[arg(long)]
    fo: bool,
    /// Stage budget per first-order tableau.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Domain-size bound for first-order semantic search.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    max_domain: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Seed for all randomized runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Premise formula; repeatable.
    #[arg(long = "premise")]
    premises: Vec<String>,
    /// Reject generalizations over variables free in a premise.
    #[arg(long)]
    dmt_guard: bool,
    /// Cap on distinct subformulas for the brute-force oracle.
    #[arg(long, default_value_t = oracle::DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Cap on structures examined by the bounded search.
    #[arg(long, default_value_t = model::DEFAULT_STRUCTURE_CAP)]
    structure_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide provability by analytic tableaux (both refutation signs).
    Prove {
        #[command(flatten)]
        common: Common,
        formula: String,
    },
    /// Decide validity semantically: exact brute force propositionally,
    /// bounded countermodel search in first-order mode.
    Check {
        #[command(flatten)]
        common: Common,
        formula: String,
    },
    /// Search for a countermodel and print it.
    Countermodel {
        #[command(flatten)]
        common: Common,
        formula: String,
    },
    /// Check a Hilbert-style derivation file.
    Hilbert {
        #[command(flatten)]
        common: Common,
        file: String,
    },
    /// Cross-check the tableau prover against the brute-force oracle on
    /// seeded random formulas.
    Fuzz {
        #[command(flatten)]
        common: Common,
        /// Number of formulas to generate.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Connective-count bound per formula.
        #[arg(long, default_value_t = 10)]
        max_size: usize,
        /// Number of distinct atoms.
        #[arg(long, default_value_t = 2)]
        atoms: usize,
    },
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is taken by "budget
    // exhausted"; route them to the input-error code instead
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::from(EXIT_OK);
        }
    };
    let code = match cli.command {
        Command::Prove { common, formula } => cmd_prove(&common, &formula),
        Command::Check { common, formula } => cmd_check(&common, &formula, false),
        Command::Countermodel { common, formula } => cmd_check(&common, &formula, true),
        Command::Hilbert { common, file } => cmd_hilbert(&common, &file),
        Command::Fuzz { common, count, max_size, atoms } => {
            cmd_fuzz(&common, count, max_size, atoms)
        }
    };
    ExitCode::from(code)
}

fn input_error(message: impl AsRef<str>) -> u8 {
    eprintln!("error: {}", message.as_ref());
    EXIT_INPUT
}

/// Parses a formula and, when premises are present, all of them over one
/// merged inferred signature.
fn parse_inputs(common: &Common, formula: &str) -> Result<(Vec<Formula>, Formula, Signature), String> {
    let mut sigs = Vec::new();
    let mut premises = Vec::new();
    for text in &common.premises {
        let (f, sig) = parse_with_inference(text).map_err(|e| e.to_string())?;
        premises.push(f);
        sigs.push(sig);
    }
    let (goal, goal_sig) = parse_with_inference(formula).map_err(|e| e.to_string())?;
    sigs.push(goal_sig);
    let mut merged = Signature::new();
    for sig in &sigs {
        for (name, arity) in sig.predicates() {
            match merged.predicate_arity(name) {
                Some(a) if a == arity => {}
                Some(a) => {
                    return Err(format!("predicate {name:?} used with arities {a} and {arity}"))
                }
                None => merged.add_predicate(name, arity).map_err(|e| e.to_string())?,
            }
        }
        for c in sig.constants() {
            if !merged.is_constant(c) {
                merged.add_constant(c).map_err(|e| e.to_string())?;
            }
        }
    }
    let first_order = goal.contains_first_order()
        || premises.iter().any(|p| p.contains_first_order());
    let propositional =
        goal.contains_prop_atom() || premises.iter().any(|p| p.contains_prop_atom());
    if first_order && propositional {
        return Err("premises and goal mix propositional and first-order formulas".to_string());
    }
    if first_order && !common.fo {
        return Err("first-order input requires --fo".to_string());
    }
    Ok((premises, goal, merged))
}

// ---------------------------------------------------------------------------
// prove

fn cmd_prove(common: &Common, formula: &str) -> u8 {
    let (premises, goal, sig) = match parse_inputs(common, formula) {
        Ok(x) => x,
        Err(e) => return input_error(e),
    };
    let outcome = prove_from(common.logic, &premises, &goal, &sig, common.budget as usize);
    let countermodel = outcome.open_branch().map(|branch| branch_countermodel(common, branch));
    match common.format {
        Format::Json => {
            let doc = json!({
                "command": "prove",
                "logic": common.logic.name(),
                "first_order": !outcome.goal.is_propositional(),
                "goal": outcome.goal.to_string(),
                "verdict": verdict_name(outcome.verdict),
                "tableaux": [
                    tableau_json("F", &outcome.run_nec_false),
                    tableau_json("f", &outcome.run_con_false),
                ],
                "countermodel": countermodel.clone().unwrap_or(Value::Null),
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Text => {
            println!("goal: {}", outcome.goal);
            println!("verdict: {}", outcome.verdict);
            for (sign, run) in [("F", &outcome.run_nec_false), ("f", &outcome.run_con_false)] {
                println!();
                println!("tableau {sign}: {} ({} stages)", outcome_name(&run.outcome), run.stages);
                print_tree(&run.tree, 1);
            }
            if let Some(cm) = &countermodel {
                println!();
                println!("countermodel:");
                print_json_block(cm, 1);
            }
        }
    }
    match outcome.verdict {
        ProofVerdict::Proved => EXIT_OK,
        ProofVerdict::NotProved => EXIT_NEGATIVE,
        ProofVerdict::BudgetExhausted => EXIT_BUDGET,
    }
}

fn verdict_name(v: ProofVerdict) -> &'static str {
    match v {
        ProofVerdict::Proved => "proved",
        ProofVerdict::NotProved => "not_proved",
        ProofVerdict::BudgetExhausted => "budget_exhausted",
    }
}

fn outcome_name(o: &TableauOutcome) -> &'static str {
    match o {
        TableauOutcome::Closed => "closed",
        TableauOutcome::OpenFinished(_) => "open",
        TableauOutcome::Exhausted(_) => "exhausted",
    }
}

fn tableau_json(sign: &str, run: &SystematicRun) -> Value {
    json!({
        "sign": sign,
        "outcome": outcome_name(&run.outcome),
        "stages": run.stages,
        "root": node_json(&run.tree),
    })
}

fn node_json(node: &ProofNode) -> Value {
    let (sign, formula, mark) = entry_parts(&node.entry);
    let mut doc = json!({
        "sign": sign,
        "formula": formula,
        "rule": node.rule.map(Value::from).unwrap_or(Value::Null),
        "children": node.children.iter().map(node_json).collect::<Vec<_>>(),
        "closed": node.closed,
    });
    if let Some(mark) = mark {
        doc.as_object_mut().unwrap().insert("mark".to_string(), Value::from(mark));
    }
    doc
}

fn entry_parts(entry: &Entry) -> (String, String, Option<String>) {
    match entry {
        Entry::Signed(sf) => (sf.sign.to_string(), sf.sentence.to_string(), None),
        Entry::Marked(m) => (m.sign.to_string(), m.sentence.to_string(), Some(m.mark.clone())),
    }
}

fn print_tree(node: &ProofNode, depth: usize) {
    let indent = "  ".repeat(depth);
    let rule = node.rule.map(|r| format!("  [{r}]")).unwrap_or_default();
    let closed = if node.closed { "  ✕" } else { "" };
    println!("{indent}{}{rule}{closed}", node.entry);
    for child in &node.children {
        print_tree(child, depth + 1);
    }
}

/// Extracts whatever countermodel the open branch supports.
fn branch_countermodel(common: &Common, branch: &Branch) -> Value {
    let signed = branch.signed_formulas();
    let propositional = signed.iter().all(|sf| sf.sentence.formula().is_propositional());
    if propositional {
        match extract_prop_countermodel(common.logic, &signed) {
            Ok(assignment) => {
                let map: serde_json::Map<String, Value> = assignment
                    .iter()
                    .map(|(f, v)| (f.to_string(), Value::from(v.to_string())))
                    .collect();
                json!({ "assignment": map })
            }
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        match extract_fo_countermodel(common.logic, branch) {
            Ok((structure, valuation)) => countermodel_json(&structure, &valuation),
            Err(e) => json!({ "error": e.to_string() }),
        }
    }
}

fn countermodel_json(structure: &Structure, valuation: &FoValuation) -> Value {
    let mut predicates = serde_json::Map::new();
    let n = structure.domain().len();
    for (p, arity) in structure.predicates() {
        let mut table = serde_json::Map::new();
        let mut tuple = vec![0usize; arity];
        loop {
            let key: Vec<&str> =
                tuple.iter().map(|&e| structure.domain()[e].as_str()).collect();
            let value = structure.pred_value(p, &tuple);
            table.insert(key.join(","), Value::from(value.to_string()));
            let mut i = arity;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < n {
                    break;
                }
                tuple[i] = 0;
            }
            if tuple.iter().all(|&e| e == 0) {
                break;
            }
        }
        predicates.insert(p.to_string(), Value::Object(table));
    }
    let constants: serde_json::Map<String, Value> = structure
        .constants()
        .iter()
        .map(|(c, e)| (c.clone(), Value::from(structure.domain()[*e].clone())))
        .collect();
    let val_map: serde_json::Map<String, Value> = valuation
        .entries()
        .iter()
        .map(|(s, v)| (s.to_string(), Value::from(v.to_string())))
        .collect();
    json!({
        "domain": structure.domain(),
        "predicates": predicates,
        "constants": constants,
        "valuation": val_map,
    })
}

fn print_json_block(value: &Value, depth: usize) {
    let indent = "  ".repeat(depth);
    let text = serde_json::to_string_pretty(value).unwrap();
    for line in text.lines() {
        println!("{indent}{line}");
    }
}

// ---------------------------------------------------------------------------
// check / countermodel

fn cmd_check(common: &Common, formula: &str, countermodel_only: bool) -> u8 {
    let (premises, goal, _sig) = match parse_inputs(common, formula) {
        Ok(x) => x,
        Err(e) => return input_error(e),
    };
    if goal.is_propositional() && premises.iter().all(|p| p.is_propositional()) && !common.fo {
        return check_prop(common, &premises, &goal, countermodel_only);
    }
    if !premises.is_empty() {
        return input_error("first-order checking does not take premises; nest them with ->");
    }
    check_fo(common, &goal, countermodel_only)
}

fn check_prop(common: &Common, premises: &[Formula], goal: &Formula, countermodel_only: bool) -> u8 {
    let result = if premises.is_empty() {
        oracle::is_valid_formula(common.logic, goal, common.node_cap)
    } else {
        oracle::consequence_formulas(common.logic, premises, goal, common.node_cap)
    };
    let (verdict, dag) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RESOURCE;
        }
    };
    match verdict {
        PropVerdict::Valid => {
            match common.format {
                Format::Json => {
                    let doc = json!({
                        "command": if countermodel_only { "countermodel" } else { "check" },
                        "logic": common.logic.name(),
                        "formula": goal.to_string(),
                        "verdict": "valid",
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                }
                Format::Text => println!("valid ({}): {}", common.logic, goal),
            }
            EXIT_OK
        }
        PropVerdict::Invalid(witness) => {
            let map: serde_json::Map<String, Value> = witness
                .render(&dag)
                .into_iter()
                .map(|(f, v)| (f, Value::from(v.to_string())))
                .collect();
            match common.format {
                Format::Json => {
                    let doc = json!({
                        "command": if countermodel_only { "countermodel" } else { "check" },
                        "logic": common.logic.name(),
                        "formula": goal.to_string(),
                        "verdict": "invalid",
                        "witness": { "assignment": map },
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                }
                Format::Text => {
                    println!("invalid ({}): {}", common.logic, goal);
                    println!("witness assignment:");
                    for (f, v) in map {
                        println!("  {f} = {}", v.as_str().unwrap());
                    }
                }
            }
            EXIT_NEGATIVE
        }
    }
}

fn check_fo(common: &Common, goal: &Formula, countermodel_only: bool) -> u8 {
    let command = if countermodel_only { "countermodel" } else { "check" };
    match model::bounded_validity(common.logic, goal, common.max_domain as usize, common.structure_cap) {
        Ok(BoundedVerdict::ValidUpTo(n)) => {
            match common.format {
                Format::Json => {
                    let doc = json!({
                        "command": command,
                        "logic": common.logic.name(),
                        "formula": goal.to_string(),
                        "verdict": "valid_up_to",
                        "max_domain": n,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                }
                Format::Text => {
                    println!("valid up to domain size {n} ({}): {}", common.logic, goal)
                }
            }
            EXIT_OK
        }
        Ok(BoundedVerdict::Countermodel(structure, valuation)) => {
            let cm = countermodel_json(&structure, &valuation);
            match common.format {
                Format::Json => {
                    let doc = json!({
                        "command": command,
                        "logic": common.logic.name(),
                        "formula": goal.to_string(),
                        "verdict": "invalid",
                        "countermodel": cm,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                }
                Format::Text => {
                    println!("invalid ({}): {}", common.logic, goal);
                    println!("countermodel:");
                    print_json_block(&cm, 1);
                }
            }
            EXIT_NEGATIVE
        }
        Err(ModelError::ResourceCap { examined, cap }) => {
            eprintln!("error: structure cap exceeded ({examined} > {cap})");
            EXIT_RESOURCE
        }
        Err(e) => input_error(e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// hilbert

fn cmd_hilbert(common: &Common, file: &str) -> u8 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return input_error(format!("cannot read {file}: {e}")),
    };
    let derivation = match hilbert::parse_derivation(&text) {
        Ok(d) => d,
        Err(e) => return input_error(e.to_string()),
    };
    let mut premises = Vec::new();
    for p in &common.premises {
        match parse_hilbert_formula(p) {
            Ok(f) => premises.push(f),
            Err(e) => return input_error(e.to_string()),
        }
    }
    let result =
        hilbert::check_derivation(common.logic, common.fo, &premises, &derivation, common.dmt_guard);
    match common.format {
        Format::Json => {
            let doc = match &result {
                Ok(()) => json!({
                    "command": "hilbert",
                    "logic": common.logic.name(),
                    "steps": derivation.steps.len(),
                    "verdict": "accepted",
                }),
                Err(r) => json!({
                    "command": "hilbert",
                    "logic": common.logic.name(),
                    "steps": derivation.steps.len(),
                    "verdict": "rejected",
                    "step": r.step,
                    "reason": r.reason,
                }),
            };
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Text => match &result {
            Ok(()) => println!("accepted ({} steps)", derivation.steps.len()),
            Err(r) => println!("{r}"),
        },
    }
    if result.is_ok() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

// ---------------------------------------------------------------------------
// fuzz

fn cmd_fuzz(common: &Common, count: usize, max_size: usize, atoms: usize) -> u8 {
    if atoms == 0 || atoms > 8 {
        return input_error("--atoms must be between 1 and 8");
    }
    if max_size > 60 {
        return input_error("--max-size is capped at 60");
    }
    let start = std::time::Instant::now();
    let mut dag = PropDag::new();
    let mut rng = SplitMix64::new(common.seed);
    let mut mismatches: Vec<Value> = Vec::new();
    let mut valid = 0usize;
    let node_cap = 2 * max_size + atoms + 2;
    for index in 0..count {
        let size = rng.below(max_size as u64 + 1) as usize;
        let root = random_formula(&mut dag, &mut rng, size, atoms);
        let oracle_valid = oracle::is_valid_fast(common.logic, &dag, root, node_cap)
            .expect("generated formulas fit under the cap");
        let proved = prove_prop_dag(common.logic, &dag, root);
        if oracle_valid {
            valid += 1;
        }
        if oracle_valid != proved {
            mismatches.push(json!({
                "index": index,
                "formula": dag.render(root),
                "oracle": if oracle_valid { "valid" } else { "invalid" },
                "prove": if proved { "proved" } else { "not_proved" },
            }));
        }
    }
    let elapsed = start.elapsed();
    match common.format {
        Format::Json => {
            let doc = json!({
                "command": "fuzz",
                "logic": common.logic.name(),
                "count": count,
                "max_size": max_size,
                "atoms": atoms,
                "seed": common.seed,
                "valid": valid,
                "invalid": count - valid,
                "mismatches": mismatches,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Text => {
            println!(
                "fuzz: logic={} count={count} max-size={max_size} atoms={atoms} seed={}",
                common.logic, common.seed
            );
            println!("valid: {valid}  invalid: {}", count - valid);
            println!("mismatches: {}", mismatches.len());
            for m in &mismatches {
                println!(
                    "  MISMATCH {}: {} oracle={} prove={}",
                    m["index"], m["formula"], m["oracle"], m["prove"]
                );
            }
        }
    }
    // timing is non-deterministic; keep it off the report stream
    eprintln!("elapsed: {:.3}s", elapsed.as_secs_f64());
    if mismatches.is_empty() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}
