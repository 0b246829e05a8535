//! Command-line front end. [`run`] never touches the process: it returns the
//! exit code and both output streams so the binary and the tests share it.

use std::io::BufRead;

use clap::{Parser, Subcommand, ValueEnum};

use crate::coeff::{lm3_closed_form, vertical_factor_parts, vertical_factorizations, CoeffError, Engine, Method};
use crate::kauffman::{budget_from_env, Oracle, OracleError};
use crate::laurent::Laurent;
use crate::maxseq::{beta, c_prime, max_sequence};
use crate::states::{arc_to_string, enumerate_catalan, Connection, StateError};
use crate::trees::{doubling_star, two_paths, PlaneTree, TreeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "catalan", version, about = "Coefficients of Catalan states of the lattice crossing L(m,n)")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest m*n the brute-force oracle may enumerate (default from ORACLE_BUDGET_BITS, else 20).
    #[arg(long = "budget-bits", global = true)]
    budget_bits: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Tree,
    Oracle,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient of a Catalan state.
    Coeff {
        state: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        trace: bool,
    },
    /// Coefficient by brute-force state sum.
    Oracle { state: String },
    /// All Catalan states of Cat(m,n), one per line.
    Enumerate {
        m: usize,
        n: usize,
        #[arg(long)]
        realizable: bool,
        #[arg(long)]
        coeffs: bool,
    },
    /// Whether a state has a nonzero coefficient.
    Realizable { state: String },
    /// Removable arcs and vertical factorizations of a state.
    Reductions { state: String },
    /// Plucking polynomial of a plane rooted tree with delays.
    Plucking {
        tree: String,
        #[arg(long)]
        factored: bool,
    },
    /// Total weight of the maximal row sequence.
    Beta { state: String },
    /// The maximal row sequence.
    Maxseq { state: String },
    /// Closed-form parameters for a state of Cat(m,3).
    Lm3 { state: String },
    /// Oracle sweep plus the golden examples.
    Selftest {
        #[arg(long = "max-mn", default_value_t = 9)]
        max_mn: usize,
    },
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Failure of one input, already mapped to its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<StateError> for Failure {
    fn from(e: StateError) -> Self {
        Failure { code: EXIT_INVALID, message: e.to_string() }
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        Failure { code: EXIT_INVALID, message: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CoeffError> for Failure {
    fn from(e: CoeffError) -> Self {
        match e {
            CoeffError::Oracle(o) => o.into(),
            CoeffError::Unreachable { .. } => Failure { code: EXIT_BUDGET, message: e.to_string() },
            other => Failure { code: EXIT_INVALID, message: other.to_string() },
        }
    }
}

/// Runs with stdin available for `-` arguments.
pub fn run<I, S>(argv: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdin = std::io::stdin();
    run_with_input(argv, &mut stdin.lock())
}

pub fn run_with_input<I, S>(argv: I, input: &mut dyn BufRead) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let budget = cli.budget_bits.unwrap_or_else(budget_from_env);
    let stdin_lines = if cli.command.reads_stdin() { read_lines(input) } else { Vec::new() };
    let job = || execute(&cli.command, budget, &stdin_lines);
    match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(job),
            Err(e) => Output { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {e}\n") },
        },
        None => job(),
    }
}

impl Command {
    fn reads_stdin(&self) -> bool {
        match self {
            Command::Coeff { state, .. }
            | Command::Oracle { state }
            | Command::Realizable { state }
            | Command::Reductions { state }
            | Command::Beta { state }
            | Command::Maxseq { state }
            | Command::Lm3 { state } => state == "-",
            Command::Plucking { tree, .. } => tree == "-",
            Command::Enumerate { .. } | Command::Selftest { .. } => false,
        }
    }
}

fn read_lines(input: &mut dyn BufRead) -> Vec<String> {
    input.lines().map_while(Result::ok).map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect()
}

/// One argument, or one per stdin line when it is `-`.
fn inputs(arg: &str, stdin_lines: &[String]) -> Vec<String> {
    if arg == "-" {
        stdin_lines.to_vec()
    } else {
        vec![arg.to_string()]
    }
}

fn parse_state(s: &str) -> Result<Connection, Failure> {
    let c: Connection = s.parse()?;
    if !c.is_catalan() {
        return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()).into());
    }
    Ok(c)
}

fn execute(command: &Command, budget: u32, stdin_lines: &[String]) -> Output {
    let engine = Engine::new(Oracle::new(budget));
    let mut out = Output::default();
    let each = |arg: &str, f: &dyn Fn(&str) -> Result<String, Failure>, out: &mut Output| {
        for item in inputs(arg, stdin_lines) {
            match f(&item) {
                Ok(text) => out.stdout.push_str(&text),
                Err(e) => {
                    out.stderr.push_str(&format!("error: {}\n", e.message));
                    out.code = out.code.max(e.code);
                }
            }
        }
    };
    match command {
        Command::Coeff { state, method, trace } => {
            let method = match method {
                MethodArg::Auto => Method::Auto,
                MethodArg::Tree => Method::Tree,
                MethodArg::Oracle => Method::Oracle,
            };
            each(
                state,
                &|s| {
                    let c = parse_state(s)?;
                    let (v, t) = engine.coefficient_with(&c, method)?;
                    let mut text = format!("{v}\n");
                    if *trace {
                        text.push_str(&t.to_string());
                    }
                    Ok(text)
                },
                &mut out,
            );
        }
        Command::Oracle { state } => {
            each(state, &|s| Ok(format!("{}\n", engine.oracle().coefficient(&parse_state(s)?)?)), &mut out)
        }
        Command::Realizable { state } => {
            each(state, &|s| Ok(format!("{}\n", parse_state(s)?.is_realizable()?)), &mut out)
        }
        Command::Reductions { state } => each(state, &|s| reductions(&parse_state(s)?), &mut out),
        Command::Plucking { tree, factored } => each(
            tree,
            &|s| {
                let t: PlaneTree = s.parse()?;
                let q = if *factored { t.plucking_factored() } else { t.plucking() };
                Ok(format!("{}\n", q.render("q")))
            },
            &mut out,
        ),
        Command::Beta { state } => each(state, &|s| Ok(format!("{}\n", beta(&parse_state(s)?)?)), &mut out),
        Command::Maxseq { state } => each(
            state,
            &|s| {
                let seq = max_sequence(&parse_state(s)?)?;
                let b: Vec<String> = seq.b.iter().map(|x| x.to_string()).collect();
                Ok(format!("b=({}) beta={}\n", b.join(","), seq.beta))
            },
            &mut out,
        ),
        Command::Lm3 { state } => {
            each(state, &|s| Ok(format!("{}\n", lm3_closed_form(&engine, &parse_state(s)?)?)), &mut out)
        }
        Command::Enumerate { m, n, realizable, coeffs } => {
            for c in enumerate_catalan(*m, *n) {
                if *realizable && !c.is_realizable().unwrap_or(false) {
                    continue;
                }
                if *coeffs {
                    match engine.value(&c) {
                        Ok(v) => out.stdout.push_str(&format!("{c}\t{v}\n")),
                        Err(e) => {
                            let f = Failure::from(e);
                            out.stderr.push_str(&format!("error: {}\n", f.message));
                            out.code = out.code.max(f.code);
                            break;
                        }
                    }
                } else {
                    out.stdout.push_str(&format!("{c}\n"));
                }
            }
        }
        Command::Selftest { max_mn } => {
            let checks = selftest(&engine, *max_mn);
            let mut ok = true;
            for (name, passed) in &checks {
                ok &= *passed;
                out.stdout.push_str(&format!("{} {name}\n", if *passed { "PASS" } else { "FAIL" }));
            }
            if !ok {
                out.code = EXIT_SELFTEST;
            }
        }
    }
    out
}

fn reductions(c: &Connection) -> Result<String, Failure> {
    let mut text = String::new();
    for arc in c.find_removable_arcs() {
        let (a, b) = c.extended_labels(&arc)?;
        text.push_str(&format!("removable {} factor={}\n", arc_to_string(&arc), Laurent::monomial(1, b - a)));
    }
    for f in vertical_factorizations(c) {
        let (ct, cl) = vertical_factor_parts(c, &f)?;
        text.push_str(&format!("vertical-factor {f} C_T={ct} C_Lambda={cl}\n"));
    }
    if text.is_empty() {
        text.push_str("none\n");
    }
    Ok(text)
}

/// The example state whose coefficient factors through a two-leaf family.
pub const VERTICAL_FACTOR_EXAMPLE: &str =
    "cat(4,6): T1-L1, T2-T5, T3-T4, T6-R1, R2-B2, R3-B5, R4-B6, B4-B3, B1-L4, L3-L2";

/// Named checks: oracle agreement on every state with `m*n <= max_mn`
/// plus the worked examples.
pub fn selftest(engine: &Engine, max_mn: usize) -> Vec<(String, bool)> {
    let mut checks = Vec::new();
    let mut sweep_ok = true;
    let mut count = 0;
    for m in 0..=max_mn {
        for n in 0..=max_mn {
            if m * n > max_mn || m + n == 0 || m + n > max_mn + 1 {
                continue;
            }
            for c in enumerate_catalan(m, n) {
                count += 1;
                let truth = engine.oracle().coefficient(&c);
                let got = engine.value(&c);
                sweep_ok &= matches!((truth, got), (Ok(a), Ok(b)) if a == b);
            }
        }
    }
    checks.push((format!("oracle agreement on {count} states with m*n <= {max_mn}"), sweep_ok));
    let cherry: PlaneTree = "(()())".parse().expect("tree literal");
    checks.push(("plucking of the cherry is 1 + q".into(), cherry.plucking() == Laurent::from_coeffs(0, &[1, 1])));
    let stars_ok = (1..=4u32).all(|k| {
        let expect = &(&Laurent::monomial(1, (k * k) as i64) * &Laurent::from_coeffs(0, &[1, 1]).pow(k + 1))
            * &Laurent::from_coeffs(0, &[1, 1, 1]).pow(k);
        let t = doubling_star(k as usize);
        t.plucking() == expect && t.plucking_factored() == expect
    });
    checks.push(("doubling star plucking q^{k^2}(1+q)^{k+1}(1+q+q^2)^k".into(), stars_ok));
    let binom_ok = (0..=10)
        .all(|n| (0..=10 - n).all(|m| two_paths(n, m).plucking() == Laurent::q_binomial((n + m) as u32, n as i64)));
    checks.push(("two paths give q-binomials".into(), binom_ok));
    let c_prime_ok = (1..=5).all(|k| {
        let c = c_prime(k);
        let ok_beta = beta(&c).ok() == Some(7 * k + 5);
        let ok_seq = max_sequence(&c).is_ok_and(|s| {
            (1..=k).all(|j| s.b[2 * j - 1] == 4) && (1..=k + 1).all(|j| s.b[2 * j - 2] == 3) && s.b[2 * k + 1] == 2
        });
        ok_beta && ok_seq
    });
    checks.push(("beta(C'_k) = 7k+5 with maximal sequence 3,4,...,3,2".into(), c_prime_ok));
    let example: Connection = VERTICAL_FACTOR_EXAMPLE.parse().expect("state literal");
    let expect = Laurent::from_coeffs(-14, &[1, 0, 0, 0, 3, 0, 0, 0, 5, 0, 0, 0, 5, 0, 0, 0, 3, 0, 0, 0, 1]);
    checks.push(("vertical factorization example".into(), engine.value(&example).ok() == Some(expect)));
    let all_negative = (1..=3).all(|n| {
        let r = crate::kauffman::smooth(&crate::kauffman::MarkerGrid::uniform(n, n, false));
        r.loops == 0 && engine.oracle().coefficient(&r.state).ok() == Some(Laurent::monomial(1, -((n * n) as i64)))
    });
    checks.push(("all-negative grid has coefficient A^{-n^2}".into(), all_negative));
    checks
}
