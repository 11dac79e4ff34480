//! Command-line front end.
//!
//! Every subcommand reads a knowledge base in the exchange format from a
//! file, or from standard input when the path is `-`. Output is
//! deterministic. Exit codes: 0 SAT/true, 1 UNSAT/false, 2 UNKNOWN (a guard
//! fired), 3 input error, 4 the `--oracle-check` cross-verification found a
//! contradiction.

use std::fs;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};

use crate::encodings::inclusions_to_introduction;
use crate::oracle::{find_model_bounded, OracleOutcome};
use crate::parser::{parse_concept, parse_kb};
use crate::semantics::{is_model, Interpretation};
use crate::services::{concept_probe, instance_probe, subsumption_probe, Entailment, Reasoner, Verdict};
use crate::syntax::{render_kb, Concept, IndividualName, KnowledgeBase};
use crate::tableau::{Completion, Guards};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CONTRADICTION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "alcnr", version, about = "Tableau reasoner for ALCNR knowledge bases")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Maximum number of variables the tableau may create
    #[arg(long, global = true, value_name = "N")]
    max_vars: Option<u32>,
    /// Maximum number of constraints in one branch
    #[arg(long, global = true, value_name = "N")]
    max_constraints: Option<usize>,
    /// Maximum number of alternatives tried at branch points
    #[arg(long, global = true, value_name = "N")]
    max_branches: Option<u64>,
    /// Cross-check each verdict against a brute-force search for models of up to K elements
    #[arg(long, global = true, value_name = "K")]
    oracle_check: Option<usize>,
    /// Node budget for --oracle-check
    #[arg(long, global = true, value_name = "N", default_value_t = 2_000_000)]
    oracle_budget: u64,
    /// Write the full derivation log to PATH
    #[arg(long, global = true, value_name = "PATH")]
    trace_file: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide satisfiability of a knowledge base
    CheckSat { kb: String },
    /// Decide satisfiability of a concept with respect to a knowledge base
    ConceptSat { kb: String, concept: String },
    /// Decide whether concept C is subsumed by concept D
    Subsumes { kb: String, c: String, d: String },
    /// Decide whether individual A is an instance of CONCEPT
    Instance { kb: String, a: String, concept: String },
    /// List the individuals entailed to be instances of CONCEPT
    Instances { kb: String, concept: String },
    /// Rewrite the TBox into a single inclusion with a concept name on the left
    Transform { kb: String },
    /// Print the canonical model of a satisfiable knowledge base
    Model { kb: String },
    /// Print the derivation log of the satisfiability check
    Trace { kb: String },
    /// Check that a model file satisfies a knowledge base
    #[command(hide = true)]
    CheckModel { kb: String, model: String },
}

/// Raised for input problems; reported on stderr with exit code 3.
struct InputError(String);

struct Session<'a> {
    opts: Opts,
    stdin: &'a mut dyn Read,
    stderr: &'a mut dyn Write,
    full_trace: bool,
    traces: Vec<(String, Completion)>,
    contradiction: bool,
}

impl Session<'_> {
    fn read(&mut self, path: &str) -> Result<String, InputError> {
        if path == "-" {
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|e| InputError(format!("<stdin>: {e}")))?;
            Ok(s)
        } else {
            fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))
        }
    }

    fn kb(&mut self, path: &str) -> Result<KnowledgeBase, InputError> {
        let text = self.read(path)?;
        let name = if path == "-" { "<stdin>" } else { path };
        parse_kb(&text).map_err(|e| InputError(format!("{name}:{e}")))
    }

    fn reasoner(&self) -> Reasoner {
        let mut g = Guards::default();
        if let Some(n) = self.opts.max_vars {
            g.max_vars = n;
        }
        if let Some(n) = self.opts.max_constraints {
            g.max_constraints = n;
        }
        if let Some(n) = self.opts.max_branches {
            g.max_branches = n;
        }
        if self.full_trace || self.opts.trace_file.is_some() {
            g.trace_capacity = None;
        }
        Reasoner::new(g)
    }

    /// Decides one probe, recording its trace and running the oracle check.
    fn decide(&mut self, label: &str, kb: &KnowledgeBase) -> Verdict {
        let (verdict, done) = self.reasoner().run(kb);
        if let Verdict::Unknown(g) = &verdict {
            let _ = writeln!(self.stderr, "warning: {label}: {g}");
        }
        if let Some(k) = self.opts.oracle_check {
            self.oracle_check(label, kb, &verdict, k);
        }
        self.traces.push((label.to_string(), done));
        verdict
    }

    fn oracle_check(&mut self, label: &str, kb: &KnowledgeBase, verdict: &Verdict, k: usize) {
        // fewer than #individuals elements cannot host a model under UNA
        let outcome = match find_model_bounded(kb, k.min(crate::oracle::MAX_ORACLE_DOMAIN), self.opts.oracle_budget) {
            Ok(o) => o,
            Err(_) => OracleOutcome::NotFound,
        };
        match (&outcome, verdict) {
            (OracleOutcome::Found(m), Verdict::Unsat) => {
                self.contradiction = true;
                let _ = writeln!(
                    self.stderr,
                    "oracle contradiction: {label}: engine says UNSAT but this model was found:\n{}",
                    m.render()
                );
            }
            (OracleOutcome::Found(m), _) if is_model(m, kb) != Ok(true) => {
                self.contradiction = true;
                let _ = writeln!(
                    self.stderr,
                    "oracle contradiction: {label}: oracle returned a non-model"
                );
            }
            (OracleOutcome::BudgetExceeded, _) => {
                let _ = writeln!(self.stderr, "note: {label}: oracle budget exceeded, check inconclusive");
            }
            _ => {}
        }
    }

    fn write_traces(&mut self) -> Result<(), InputError> {
        let Some(path) = self.opts.trace_file.clone() else {
            return Ok(());
        };
        let multi = self.traces.len() > 1;
        let mut out = String::new();
        for (label, done) in &self.traces {
            if multi {
                out.push_str(&format!("# {label}\n"));
            }
            out.push_str(&render_trace(done));
        }
        fs::write(&path, out).map_err(|e| InputError(format!("{path}: {e}")))
    }
}

/// Trace events followed by the search summary.
pub fn render_trace(done: &Completion) -> String {
    let mut out = done.trace.render();
    let st = &done.stats;
    out.push_str(&format!(
        "variables created: {}\nblocking events: {}\nbranches: {}\nsteps: {}\n",
        st.variables_created, st.blocking_events, st.branches, st.steps
    ));
    out
}

fn concept_arg(text: &str) -> Result<Concept, InputError> {
    parse_concept(text).map_err(|e| InputError(format!("concept `{text}`: {e}")))
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Sat(_) => EXIT_TRUE,
        Verdict::Unsat => EXIT_FALSE,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn entailment_code(e: Entailment) -> i32 {
    match e {
        Entailment::True => EXIT_TRUE,
        Entailment::False => EXIT_FALSE,
        Entailment::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn dispatch(cmd: Cmd, sess: &mut Session<'_>, out: &mut String) -> Result<i32, InputError> {
    let code = match cmd {
        Cmd::CheckSat { kb } => {
            let kb = sess.kb(&kb)?;
            let v = sess.decide("check-sat", &kb);
            out.push_str(&format!("{v}\n"));
            verdict_code(&v)
        }
        Cmd::ConceptSat { kb, concept } => {
            let kb = sess.kb(&kb)?;
            let c = concept_arg(&concept)?;
            let v = sess.decide("concept-sat", &concept_probe(&kb, &c));
            out.push_str(&format!("{v}\n"));
            verdict_code(&v)
        }
        Cmd::Subsumes { kb, c, d } => {
            let kb = sess.kb(&kb)?;
            let (c, d) = (concept_arg(&c)?, concept_arg(&d)?);
            let e = Entailment::from_refutation(&sess.decide("subsumes", &subsumption_probe(&kb, &c, &d)));
            out.push_str(&format!("{e}\n"));
            entailment_code(e)
        }
        Cmd::Instance { kb, a, concept } => {
            let kb = sess.kb(&kb)?;
            let c = concept_arg(&concept)?;
            let a = IndividualName::new(a.as_str()).map_err(|e| InputError(e.to_string()))?;
            let probe = instance_probe(&kb, &a, &c).map_err(|e| InputError(e.to_string()))?;
            let e = Entailment::from_refutation(&sess.decide("instance", &probe));
            out.push_str(&format!("{e}\n"));
            entailment_code(e)
        }
        Cmd::Instances { kb, concept } => {
            let kb = sess.kb(&kb)?;
            let c = concept_arg(&concept)?;
            let mut code = EXIT_TRUE;
            for a in kb.individuals() {
                let probe = instance_probe(&kb, &a, &c).expect("individual of the knowledge base");
                match Entailment::from_refutation(&sess.decide(&format!("instance {a}"), &probe)) {
                    Entailment::True => out.push_str(&format!("{a}\n")),
                    Entailment::False => {}
                    Entailment::Unknown(_) => {
                        out.push_str(&format!("? {a}\n"));
                        code = EXIT_UNKNOWN;
                    }
                }
            }
            code
        }
        Cmd::Transform { kb } => {
            let kb = sess.kb(&kb)?;
            out.push_str(&render_kb(&inclusions_to_introduction(&kb)));
            EXIT_TRUE
        }
        Cmd::Model { kb } => {
            let kb = sess.kb(&kb)?;
            let v = sess.decide("model", &kb);
            match &v {
                Verdict::Sat(m) => out.push_str(&m.render()),
                other => out.push_str(&format!("{other}\n")),
            }
            verdict_code(&v)
        }
        Cmd::Trace { kb } => {
            let kb = sess.kb(&kb)?;
            sess.full_trace = true;
            let v = sess.decide("trace", &kb);
            let (_, done) = sess.traces.last().expect("just recorded");
            out.push_str(&render_trace(done));
            out.push_str(&format!("{v}\n"));
            verdict_code(&v)
        }
        Cmd::CheckModel { kb, model } => {
            let kb = sess.kb(&kb)?;
            let text = sess.read(&model)?;
            let m = Interpretation::parse(&text).map_err(|e| InputError(format!("{model}: {e}")))?;
            let ok = is_model(&m, &kb).map_err(|e| InputError(format!("{model}: {e}")))?;
            out.push_str(if ok { "true\n" } else { "false\n" });
            if ok {
                EXIT_TRUE
            } else {
                EXIT_FALSE
            }
        }
    };
    sess.write_traces()?;
    Ok(code)
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_INPUT
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_TRUE
            };
        }
    };
    let mut sess = Session {
        opts: cli.opts,
        stdin,
        stderr,
        full_trace: false,
        traces: Vec::new(),
        contradiction: false,
    };
    let mut out = String::new();
    let code = match dispatch(cli.cmd, &mut sess, &mut out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(sess.stderr, "error: {msg}");
            return EXIT_INPUT;
        }
    };
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    if sess.contradiction {
        EXIT_CONTRADICTION
    } else {
        code
    }
}
