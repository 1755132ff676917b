//! `qcash`: batch driver for the threshold quantum cash simulator.
//!
//! Exit codes: 0 success or accepted note, 1 rejected note, 2 usage or
//! input error, 3 verification failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use qcash_core::eavesdrop::{self, FakeSignal, SweepConfig};
use qcash_core::field::{make_shares, precompute, precompute_cohort, SecretKey, Share};
use qcash_core::protocol::{self, Banknote, ProtocolError};
use qcash_core::qsim::{identity_checks, Variant, TOL};
use qcash_core::rng;
use qcash_core::trojan::{AttackScenario, StateSpec};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qcash", version, about = "Threshold quantum cash simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deal shares for a fresh key and issue a banknote with a cohort.
    Issue(IssueArgs),
    /// Check a banknote with a cohort of share holders.
    Check(CheckArgs),
    /// Run an attack scenario.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Inspect the eavesdropper's state for a chosen probe.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run built-in verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Demonstrations of known protocol behaviour.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write machine-readable records here, one JSON object per line.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IssueArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = Variant::Xor)]
    variant: Variant,
    #[arg(long)]
    out: PathBuf,
    /// Directory for share files; defaults to `shares/` next to the note.
    #[arg(long)]
    shares_dir: Option<PathBuf>,
    /// One-based issuing centers; defaults to `1..=t`.
    #[arg(long, value_delimiter = ',')]
    cohort: Option<Vec<usize>>,
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    note: PathBuf,
    /// Defaults to `shares/` next to the note.
    #[arg(long)]
    shares_dir: Option<PathBuf>,
    /// One-based checking centers; defaults to the last `t`.
    #[arg(long, value_delimiter = ',')]
    cohort: Option<Vec<usize>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum AttackCommand {
    /// Random entangled probes against one pair.
    FakeSignal {
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = Variant::Cyclic)]
        variant: Variant,
        #[arg(long)]
        complex: bool,
        #[command(flatten)]
        common: Common,
    },
    /// A multi-qubit register substituted for a data qubit.
    Trojan {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Send this many copies of a two-qubit state instead.
        #[arg(long)]
        copies: Option<usize>,
        /// `zero`, `conj00`, `random`, `random-complex` or real amplitudes.
        #[arg(long, default_value = "zero")]
        state: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Measure-and-resend on a legal pair; `--trials 0` is exact.
    InterceptResend {
        #[arg(long, default_value_t = Variant::Cyclic)]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum AnalyzeCommand {
    /// Spectrum and entropy bound for a probe such as `a=1` or `a=0.5,e=0.5,...`.
    Eigenvalues {
        #[arg(long)]
        probe: String,
        #[arg(long, default_value_t = Variant::Cyclic)]
        variant: Variant,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Gate identities and unitarity.
    Identities {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum DemoCommand {
    /// Honest round trips under both alphabets with the same cohort.
    Flaw {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Collects report records and the human summary for one command.
struct Output {
    records: Vec<Value>,
    summary: Vec<String>,
    code: i32,
}

impl Output {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            summary: Vec::new(),
            code: EXIT_OK,
        }
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Summaries go to `out`, diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let (result, report) = dispatch(cli.command);
    match result {
        Ok(output) => {
            for line in &output.summary {
                let _ = writeln!(out, "{line}");
            }
            if let Some(path) = report {
                if let Err(e) = write_report(&path, &output.records) {
                    let _ = writeln!(err, "error: {e:#}");
                    return EXIT_USAGE;
                }
            }
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            match e.downcast_ref::<ProtocolError>() {
                Some(ProtocolError::TrojanDetected { .. }) => EXIT_REJECT,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

fn write_report(path: &Path, records: &[Value]) -> Result<()> {
    let mut text = String::new();
    for record in records {
        text.push_str(&serde_json::to_string(record)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing report {}", path.display()))
}

fn dispatch(command: Command) -> (Result<Output>, Option<PathBuf>) {
    match command {
        Command::Issue(args) => {
            let report = args.common.report.clone();
            (issue(args), report)
        }
        Command::Check(args) => {
            let report = args.common.report.clone();
            (check(args), report)
        }
        Command::Attack(AttackCommand::FakeSignal {
            samples,
            variant,
            complex,
            common,
        }) => (
            fake_signal(samples, variant, complex, common.seed),
            common.report,
        ),
        Command::Attack(AttackCommand::Trojan {
            m,
            copies,
            state,
            trials,
            common,
        }) => (
            trojan(m, copies, &state, trials, common.seed),
            common.report,
        ),
        Command::Attack(AttackCommand::InterceptResend {
            variant,
            trials,
            common,
        }) => (
            intercept_resend(variant, trials, common.seed),
            common.report,
        ),
        Command::Analyze(AnalyzeCommand::Eigenvalues {
            probe,
            variant,
            common,
        }) => (eigenvalues(&probe, variant), common.report),
        Command::Verify(VerifyCommand::Identities { common }) => (identities(), common.report),
        Command::Demo(DemoCommand::Flaw { trials, m, common }) => {
            (flaw(trials, m, common.seed), common.report)
        }
    }
}

fn default_shares_dir(note: &Path) -> PathBuf {
    note.parent().unwrap_or(Path::new(".")).join("shares")
}

fn share_path(dir: &Path, center: usize) -> PathBuf {
    dir.join(format!("share-{center}.txt"))
}

fn issue(args: IssueArgs) -> Result<Output> {
    ensure!(args.m >= 1, "m must be at least 1");
    ensure!(
        (1..=args.n).contains(&args.t),
        "need 1 <= t <= n, got t={} n={}",
        args.t,
        args.n
    );
    let cohort = args.cohort.unwrap_or_else(|| (1..=args.t).collect());
    validate_cohort(&cohort, args.t, args.n)?;
    let seed = args.common.seed;
    let label = args.label.unwrap_or_else(|| format!("note-{seed}"));

    let key = SecretKey::random(args.m, &mut rng::stream(seed, 0))?;
    let set = make_shares(&key, &label, args.t, args.n, &mut rng::stream(seed, 1))?;
    let shares = precompute_cohort(&set, &cohort)?;
    let note = protocol::issue(&shares, args.m, args.variant, &mut rng::stream(seed, 2))?;

    let dir = args
        .shares_dir
        .unwrap_or_else(|| default_shares_dir(&args.out));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for share in set.shares() {
        let j = set
            .points()
            .iter()
            .position(|(x, _)| x.bits() == share.x.bits())
            .map_or(0, |k| k + 1);
        let path = share_path(&dir, j);
        fs::write(&path, share.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    fs::write(&args.out, note.to_text())
        .with_context(|| format!("writing {}", args.out.display()))?;

    let mut output = Output::new();
    output.records.push(json!({
        "command": "issue",
        "seed": seed,
        "label": label,
        "t": args.t,
        "n": args.n,
        "m": args.m,
        "variant": args.variant.to_string(),
        "cohort": cohort,
    }));
    output.say(format!(
        "issued `{label}`: m={} variant={} cohort={cohort:?}",
        args.m, args.variant
    ));
    output.say(format!("note   {}", args.out.display()));
    output.say(format!("shares {} ({} files)", dir.display(), args.n));
    Ok(output)
}

fn validate_cohort(cohort: &[usize], t: usize, n: usize) -> Result<()> {
    ensure!(
        cohort.len() == t,
        "cohort has {} centers, threshold is {t}",
        cohort.len()
    );
    let mut sorted = cohort.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    ensure!(sorted.len() == cohort.len(), "cohort repeats a center");
    if let Some(&bad) = cohort.iter().find(|&&j| j == 0 || j > n) {
        bail!("center {bad} outside 1..={n}");
    }
    Ok(())
}

fn check(args: CheckArgs) -> Result<Output> {
    let text = fs::read_to_string(&args.note)
        .with_context(|| format!("reading {}", args.note.display()))?;
    let note = Banknote::from_text(&text)?;
    let dir = args
        .shares_dir
        .unwrap_or_else(|| default_shares_dir(&args.note));
    let first = read_share(&dir, 1).or_else(|_| {
        // Fall back to any share present to learn t and n.
        (2..=64)
            .find_map(|j| read_share(&dir, j).ok())
            .context("no share files found")
    })?;
    let (t, n) = (first.t, first.n);
    let cohort = args.cohort.unwrap_or_else(|| (n + 1 - t..=n).collect());
    validate_cohort(&cohort, t, n)?;
    let shares = cohort
        .iter()
        .map(|&j| read_share(&dir, j))
        .collect::<Result<Vec<_>>>()?;
    for (j, share) in cohort.iter().zip(&shares) {
        ensure!(
            (share.t, share.n, share.m) == (t, n, first.m),
            "share {j} has parameters inconsistent with the rest"
        );
    }
    let xs: Vec<_> = shares.iter().map(|s| s.x).collect();
    let precomputed = shares
        .iter()
        .map(|s| precompute(s, &xs))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = args.common.seed;
    let report = protocol::check(&note, &precomputed, note.variant, &mut rng::stream(seed, 3))?;

    let mut output = Output::new();
    output.records.push(json!({
        "command": "check",
        "seed": seed,
        "label": note.label,
        "variant": note.variant.to_string(),
        "cohort": cohort,
        "outcomes": report.outcomes,
        "basis_used": report.basis_used,
        "pair_accept_probabilities": report.pair_accept_probabilities,
        "accepted": report.accepted,
    }));
    let outcomes: Vec<String> = report.outcomes.iter().map(|c| format!("{c:02b}")).collect();
    output.say(format!("checked `{}` with cohort {cohort:?}", note.label));
    output.say(format!("outcomes {}", outcomes.join(" ")));
    output.say(if report.accepted { "ACCEPT" } else { "REJECT" });
    output.code = if report.accepted {
        EXIT_OK
    } else {
        EXIT_REJECT
    };
    Ok(output)
}

fn read_share(dir: &Path, center: usize) -> Result<Share> {
    let path = share_path(dir, center);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Share::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn fake_signal(samples: u64, variant: Variant, complex: bool, seed: u64) -> Result<Output> {
    ensure!(samples >= 1, "need at least one sample");
    let report = eavesdrop::sweep(&SweepConfig {
        probes: samples,
        seed,
        variant,
        complex,
    })?;
    let mut output = Output::new();
    for record in &report.records {
        output.records.push(json!({
            "command": "attack fake-signal",
            "seed": seed,
            "probe": record.index,
            "entropy_bits": record.entropy_bits,
            "max_deviation": record.max_deviation,
            "trace": record.trace,
            "min_eigenvalue": record.min_eigenvalue,
        }));
    }
    output.records.push(json!({
        "command": "attack fake-signal",
        "seed": seed,
        "summary": true,
        "samples": samples,
        "variant": variant.to_string(),
        "complex": complex,
        "max_entropy_bits": report.max_entropy,
        "min_entropy_bits": report.min_entropy,
        "argmax_probe": report.argmax_probe,
        "max_deviation": report.max_deviation,
    }));
    output.say(format!(
        "{samples} {} probes, variant {variant}",
        if complex { "complex" } else { "real" }
    ));
    output.say(format!("max entropy   {:.3} bits", report.max_entropy));
    output.say(format!("min entropy   {:.3} bits", report.min_entropy));
    output.say(format!("argmax probe  {}", report.argmax_probe));
    output.say(match report.max_deviation {
        Some(d) => format!("eigenvalue max deviation {d:.3e}"),
        None => "closed-form comparison not applicable".to_owned(),
    });
    Ok(output)
}

fn trojan(m: usize, copies: Option<usize>, state: &str, trials: u64, seed: u64) -> Result<Output> {
    ensure!(m >= 1, "m must be at least 1");
    ensure!(copies != Some(0), "copies must be at least 1");
    let state: StateSpec = state.parse()?;
    let scenario = AttackScenario {
        m,
        copies,
        state,
        trials,
        seed,
    };
    let report = scenario.run()?;
    let mut output = Output::new();
    output.records.push(json!({
        "command": "attack trojan",
        "seed": seed,
        "m": m,
        "copies": copies,
        "trials": trials,
        "exact_probability": report.exact_probability,
        "flip_pair": report.flip_pair,
        "sampled_probability": report.sampled_probability,
        "detections": report.detections,
    }));
    match copies {
        Some(c) => output.say(format!("{c} copies over two positions")),
        None => output.say(format!("{m} qubits at one position")),
    }
    output.say(format!(
        "exact detection probability {:.6}",
        report.exact_probability
    ));
    if let Some((p0, p1)) = report.flip_pair {
        output.say(format!("p0 {p0:.6}  p1 {p1:.6}  p0+p1 {:.6}", p0 + p1));
    }
    if let Some(p) = report.sampled_probability {
        output.say(format!(
            "sampled {p:.6} ({} of {trials} trials detected)",
            report.detections
        ));
    }
    Ok(output)
}

fn intercept_resend(variant: Variant, trials: u64, seed: u64) -> Result<Output> {
    let report = eavesdrop::intercept_resend(variant, trials, seed)?;
    let mut output = Output::new();
    output.records.push(json!({
        "command": "attack intercept-resend",
        "seed": seed,
        "variant": variant.to_string(),
        "trials": trials,
        "error_probability": report.error_probability,
        "sigma": report.sigma,
        "mutual_information_bits": report.mutual_information_bits,
    }));
    let mode = if trials == 0 {
        "exact".to_owned()
    } else {
        format!("{trials} trials")
    };
    output.say(format!("intercept-resend, variant {variant}, {mode}"));
    output.say(format!(
        "error probability {:.6} (sigma {:.2e})",
        report.error_probability, report.sigma
    ));
    output.say(format!(
        "mutual information {:.6} bits",
        report.mutual_information_bits
    ));
    Ok(output)
}

fn eigenvalues(probe: &str, variant: Variant) -> Result<Output> {
    let theta = FakeSignal::parse_named(probe)?;
    let report = eavesdrop::spectrum(&theta, variant)?;
    let mut output = Output::new();
    output.records.push(json!({
        "command": "analyze eigenvalues",
        "probe": theta.to_string(),
        "variant": variant.to_string(),
        "numeric": report.numeric,
        "closed_form": report.closed_form,
        "max_deviation": report.max_deviation,
        "entropy_bits": report.entropy_bits,
        "block_traces": report.blocks.traces,
    }));
    output.say(format!("probe {theta}, variant {variant}"));
    let nonzero: Vec<String> = report
        .numeric
        .iter()
        .filter(|&&l| l.abs() > 1e-10)
        .map(|l| format!("{l:.6}"))
        .collect();
    output.say(format!("nonzero eigenvalues {}", nonzero.join(" ")));
    if let Some(cf) = report.closed_form {
        output.say(format!(
            "closed form {:.6} {:.6} {:.6} {:.6}",
            cf[0], cf[1], cf[2], cf[3]
        ));
    }
    if let Some(d) = report.max_deviation {
        output.say(format!("max deviation {d:.3e}"));
    }
    output.say(format!("entropy bound {:.6} bits", report.entropy_bits));
    Ok(output)
}

fn identities() -> Result<Output> {
    let mut output = Output::new();
    let mut all = true;
    for (name, deviation) in identity_checks() {
        let pass = deviation <= TOL;
        all &= pass;
        output.records.push(json!({
            "command": "verify identities",
            "identity": name,
            "deviation": deviation,
            "pass": pass,
        }));
        output.say(format!(
            "{} {name} (deviation {deviation:.2e})",
            if pass { "PASS" } else { "FAIL" }
        ));
    }
    if !all {
        output.code = EXIT_VERIFY;
    }
    Ok(output)
}

fn flaw(trials: u64, m: usize, seed: u64) -> Result<Output> {
    ensure!(trials >= 1, "need at least one trial");
    ensure!(m >= 1, "m must be at least 1");
    let mut output = Output::new();

    let single = SecretKey::from_tuples(&vec![(1, 0); m])?;
    let set = make_shares(&single, "flaw", 1, 1, &mut rng::stream(seed, 0))?;
    let shares = precompute_cohort(&set, &[1])?;
    let note = protocol::issue(&shares, m, Variant::Cyclic, &mut rng::stream(seed, 1))?;
    let example = protocol::check(&note, &shares, Variant::Cyclic, &mut rng::stream(seed, 2))?;
    let outcomes: Vec<String> = example
        .outcomes
        .iter()
        .map(|c| format!("{c:02b}"))
        .collect();
    output.say(format!(
        "single center, code a=01 on every pair, cyclic: outcomes {} -> {}",
        outcomes.join(" "),
        if example.accepted { "ACCEPT" } else { "REJECT" }
    ));

    for variant in Variant::ALL {
        let mut rejected = 0u64;
        for trial in 0..trials {
            let mut r = rng::stream(seed, 16 + trial);
            let n = rand::Rng::random_range(&mut r, 1..=4usize);
            let t = rand::Rng::random_range(&mut r, 1..=n);
            let key = SecretKey::random(m, &mut r)?;
            let set = make_shares(&key, "flaw", t, n, &mut r)?;
            let cohort: Vec<usize> = (1..=t).collect();
            let shares = precompute_cohort(&set, &cohort)?;
            let note = protocol::issue(&shares, m, variant, &mut r)?;
            let report = protocol::check(&note, &shares, variant, &mut r)?;
            rejected += u64::from(!report.accepted);
        }
        let rate = rejected as f64 / trials as f64;
        output.records.push(json!({
            "command": "demo flaw",
            "seed": seed,
            "variant": variant.to_string(),
            "m": m,
            "trials": trials,
            "rejected": rejected,
            "rejection_rate": rate,
        }));
        output.say(format!(
            "{variant}: honest notes rejected {rejected}/{trials} ({rate:.4})"
        ));
    }
    Ok(output)
}
