//! `simgroup`: command-line front end for similarity-structure groups.

mod error;
mod input;
mod report;

use std::collections::HashSet;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use simgroup::checks::{self, TransitionMatrix};
use simgroup::{Element, RandomParams, Structure};

use crate::error::{CliError, Result};
use crate::report::Report;

#[derive(Parser)]
#[command(name = "simgroup", version, about = "Groups of locally similar homeomorphisms of ultrametric spaces")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Include wall time in reports (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Where the group lives: a space file or built-in name, and an optional
/// automaton for decorated structures.
#[derive(Args, Clone)]
struct Target {
    #[arg(long)]
    space: String,
    #[arg(long)]
    automaton: Option<String>,
}

impl Target {
    fn structure(&self) -> Result<Structure> {
        input::structure(&self.space, self.automaton.as_deref())
    }
}

/// Optional space override for commands reading element files.
#[derive(Args, Clone)]
struct ElemTarget {
    /// Defaults to the space named in the element file.
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    automaton: Option<String>,
}

impl ElemTarget {
    fn load(&self, files: &[String]) -> Result<(Structure, Vec<Element>)> {
        input::elements(files, self.space.as_deref(), self.automaton.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a presented space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Subshifts of finite type from 0/1 transition matrices.
    #[command(subcommand)]
    Sft(SftCmd),
    /// Element arithmetic.
    #[command(subcommand)]
    Elem(ElemCmd),
    /// The zipper cocycle.
    #[command(subcommand)]
    Cocycle(CocycleCmd),
    /// Paradoxical decomposition of stabilizer cosets.
    #[command(subcommand)]
    Paradox(ParadoxCmd),
    /// Free subgroups of rank two.
    #[command(subcommand)]
    Pingpong(PingpongCmd),
    /// Infinitely many distinct conjugates.
    #[command(subcommand)]
    Icc(IccCmd),
    /// Weak malnormality of ball stabilizers.
    #[command(subcommand)]
    Malnormal(MalnormalCmd),
    /// Randomized structural probes.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Seeded fuzz harnesses.
    #[command(subcommand)]
    Fuzz(FuzzCmd),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Type classes, finite symbols, minimal ball partition and CSS* verdict.
    Check { file: String },
}

#[derive(Subcommand)]
enum SftCmd {
    /// Print the presentation of the subshift.
    Build {
        matrix: String,
        #[arg(long)]
        name: Option<String>,
    },
    /// Irreducibility and 2-followed symbols.
    Check { matrix: String },
}

#[derive(Subcommand)]
enum ElemCmd {
    /// Product `e1 ∘ e2 ∘ …` (the last factor acts first).
    Compose {
        #[arg(required = true, num_args = 1..)]
        files: Vec<String>,
        /// Also write the resulting element file here.
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        target: ElemTarget,
    },
    Inverse {
        file: String,
        /// Also write the resulting element file here.
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        target: ElemTarget,
    },
    /// Normal form (maximal partition).
    Reduce {
        file: String,
        /// Also write the resulting element file here.
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        target: ElemTarget,
    },
    /// Whether two elements are equal as maps.
    Eq {
        a: String,
        b: String,
        #[command(flatten)]
        target: ElemTarget,
    },
    /// Image of a ball lying inside one region.
    Apply {
        file: String,
        ball: String,
        #[command(flatten)]
        target: ElemTarget,
    },
    Random {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        regions: usize,
        #[arg(long)]
        seed: u64,
        /// Also write the resulting element file here.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum CocycleCmd {
    /// `‖b(g)‖²`.
    Norm {
        file: String,
        #[command(flatten)]
        target: ElemTarget,
    },
    /// The vector `b(g)` over embedding classes.
    Vector {
        file: String,
        #[command(flatten)]
        target: ElemTarget,
    },
    /// Check `b(gh) = π(g) b(h) + b(g)` on random pairs.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ParadoxCmd {
    Build {
        #[command(flatten)]
        target: Target,
    },
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum PingpongCmd {
    Build {
        #[command(flatten)]
        target: Target,
        /// Rotates the roles of the four balls.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
    },
}

#[derive(Subcommand)]
enum IccCmd {
    Conjugates {
        file: String,
        #[arg(long, default_value_t = 25)]
        count: usize,
        #[command(flatten)]
        target: ElemTarget,
    },
}

#[derive(Subcommand)]
enum MalnormalCmd {
    Test {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "0")]
        ball: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ProbeCmd {
    Centralizer {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "0")]
        ball: String,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    FiniteSupport {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum FuzzCmd {
    /// Associativity, inverse and identity laws on random triples.
    GroupLaws {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn elem_json(st: &Structure, g: &Element) -> Value {
    serde_json::to_value(st.element_to_doc(g)).expect("element serializes")
}

fn elem_text(st: &Structure, g: &Element) -> String {
    g.regions()
        .iter()
        .map(|r| {
            let src = if r.src.is_root() { "ε".to_string() } else { r.src.to_string() };
            let dst = if r.dst.is_root() { "ε".to_string() } else { r.dst.to_string() };
            format!("{src} -> {dst} [{}]", st.label_name(r.label))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cmd: Command) -> Result<Report> {
    Ok(match cmd {
        Command::Space(SpaceCmd::Check { file }) => {
            let sp = input::space(&file)?;
            let classes = sp.type_classes();
            let finite: Vec<&str> =
                (0..sp.num_symbols()).filter(|&s| sp.symbol_is_finite(s)).map(|s| sp.symbol_name(s)).collect();
            let partition: Vec<String> = sp.minimal_ball_partition()?.cells().iter().map(|a| a.to_string()).collect();
            let css = checks::verify_css_star(&sp);
            let mut text = format!("space {}\n", sp.name());
            text += &format!(
                "type classes: {}\n",
                classes.iter().map(|(s, k)| format!("{s}:{k}")).collect::<Vec<_>>().join(" ")
            );
            text += &format!("finite symbols: {}\n", if finite.is_empty() { "none".into() } else { finite.join(" ") });
            text += &format!("minimal ball partition: {}\n", partition.join(" "));
            text += &format!("CSS*: {}", verdict(css.passed()));
            if let Some(s) = &css.condition1 {
                text += &format!("\n  condition 1 fails at `{s}`");
            }
            if let Some((k, s)) = &css.condition2 {
                text += &format!("\n  condition 2 fails: no ball of the type of `{k}` below `{s}`");
            }
            let result = json!({
                "type_classes": classes,
                "finite_symbols": finite,
                "minimal_ball_partition": partition,
                "css_star": css,
                "css_star_passed": css.passed(),
            });
            Report::new("space check", result, text).space(sp.name())
        }
        Command::Sft(SftCmd::Build { matrix, name }) => {
            let m = read_matrix(&matrix)?;
            let mut sp = checks::sft_from_matrix(&m);
            if let Some(n) = name {
                sp = sp.with_name(&n);
            }
            let doc = serde_json::to_value(sp.to_doc()).expect("space serializes");
            Report::new("sft build", doc, sp.to_json()).space(sp.name())
        }
        Command::Sft(SftCmd::Check { matrix }) => {
            let m = read_matrix(&matrix)?;
            let irreducible = checks::is_irreducible(&m);
            let split = checks::two_followed_symbols(&m);
            let text = format!(
                "irreducible: {irreducible}\n2-followed symbols (0-indexed rows): {}",
                if split.is_empty() {
                    "none".into()
                } else {
                    split.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
                }
            );
            Report::new("sft check", json!({ "irreducible": irreducible, "two_followed": split }), text)
        }
        Command::Elem(cmd) => run_elem(cmd)?,
        Command::Cocycle(CocycleCmd::Norm { file, target }) => {
            let (st, es) = target.load(&[file])?;
            let n = st.cocycle_norm_sq(&es[0]);
            Report::new("cocycle norm", json!(n), n.to_string()).space(st.space().name())
        }
        Command::Cocycle(CocycleCmd::Vector { file, target }) => {
            let (st, es) = target.load(&[file])?;
            let v = st.cocycle_vector(&es[0]);
            let docs = st.vector_to_doc(&v);
            let text = docs
                .iter()
                .map(|d| {
                    let regions: Vec<String> =
                        d.class.regions.iter().map(|r| format!("{}->{}", r.src, r.dst)).collect();
                    format!("{:+} [{}; {}]", d.coeff, d.class.base, regions.join(" "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            let text = if text.is_empty() { "0".into() } else { text };
            Report::new("cocycle vector", serde_json::to_value(docs).unwrap(), text).space(st.space().name())
        }
        Command::Cocycle(CocycleCmd::Verify { target, pairs, seed }) => {
            let st = target.structure()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut failures = Vec::new();
            for i in 0..pairs {
                let g = st.random_element(&mut rng, RandomParams::default());
                let h = st.random_element(&mut rng, RandomParams::default());
                if !st.verify_cocycle_identity(&g, &h) && failures.len() < 4 {
                    failures.push(json!({ "pair": i, "g": elem_json(&st, &g), "h": elem_json(&st, &h) }));
                }
            }
            let ok = failures.is_empty();
            let text = format!("cocycle identity: {} on {pairs} pairs", verdict(ok));
            Report::new("cocycle verify", json!({ "pairs": pairs, "witnesses": failures }), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(ok)
        }
        Command::Paradox(ParadoxCmd::Build { target }) => {
            let st = target.structure()?;
            let data = st.paradox_data()?;
            let pieces: Vec<Value> = data
                .pieces
                .iter()
                .map(|p| {
                    json!({
                        "ball": p.ball, "sub1": p.sub1, "sub2": p.sub2,
                        "g": elem_json(&st, &p.g), "h": elem_json(&st, &p.h),
                    })
                })
                .collect();
            let mut text = format!("base {}; {} strata", data.base, data.strata().len());
            for p in &data.pieces {
                text += &format!("\nball {}: subballs {} and {}", p.ball, p.sub1, p.sub2);
            }
            Report::new("paradox build", json!({ "base": data.base, "pieces": pieces }), text).space(st.space().name())
        }
        Command::Paradox(ParadoxCmd::Verify { target, samples, seed }) => {
            let st = target.structure()?;
            let data = st.paradox_data()?;
            let r = st.verify_paradox(&data, samples, seed);
            let text = format!(
                "paradox: {} ({} strata, {} translate checks, {} violations, {} coset pairs, {} coset violations)",
                verdict(r.passed()),
                r.strata,
                r.translate_checks,
                r.translate_violations,
                r.coset_pairs,
                r.coset_violations
            );
            Report::new("paradox verify", serde_json::to_value(&r).unwrap(), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(r.passed())
        }
        Command::Pingpong(PingpongCmd::Build { target, seed }) => {
            let st = target.structure()?;
            let pp = st.pingpong_pair(seed)?;
            let balls: Vec<String> = pp.balls.iter().map(|b| b.to_string()).collect();
            let text =
                format!("balls {}\ng:\n{}\nh:\n{}", balls.join(" "), elem_text(&st, &pp.g), elem_text(&st, &pp.h));
            let result = json!({ "balls": balls, "g": elem_json(&st, &pp.g), "h": elem_json(&st, &pp.h) });
            Report::new("pingpong build", result, text).space(st.space().name()).seed(seed)
        }
        Command::Pingpong(PingpongCmd::Verify { target, seed, maxlen }) => {
            let st = target.structure()?;
            let pp = st.pingpong_pair(seed)?;
            let r = st.verify_pingpong(&pp, maxlen);
            let text = format!(
                "ping-pong: {} ({} reduced words up to length {maxlen}, {} trivial)",
                verdict(r.passed()),
                r.words_checked,
                r.identity_words.len()
            );
            Report::new("pingpong verify", serde_json::to_value(&r).unwrap(), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(r.passed())
        }
        Command::Icc(IccCmd::Conjugates { file, count, target }) => {
            let (st, es) = target.load(&[file])?;
            let conj = st.icc_conjugates(&es[0], count)?;
            let distinct = conj.iter().collect::<HashSet<_>>().len();
            let ok = distinct == count;
            let text = format!("{distinct} pairwise distinct conjugates ({})", verdict(ok));
            let result = json!({
                "requested": count,
                "distinct": distinct,
                "conjugates": conj.iter().map(|c| elem_json(&st, c)).collect::<Vec<_>>(),
            });
            Report::new("icc conjugates", result, text).space(st.space().name()).verdict(ok)
        }
        Command::Malnormal(MalnormalCmd::Test { target, ball, samples, seed }) => {
            let st = target.structure()?;
            let b = input::address(&ball)?;
            let g = st.malnormal_witness(&b)?;
            let r = st.malnormal_probe(&b, &g, samples, seed)?;
            let ok = r.counterexamples == 0;
            let text = format!(
                "weak malnormality at {b}: {} ({} samples, {} non-trivial, {} counterexamples)",
                verdict(ok),
                r.samples,
                r.nontrivial_samples,
                r.counterexamples
            );
            let result = json!({ "ball": b, "witness": elem_json(&st, &g), "report": r });
            Report::new("malnormal test", result, text).space(st.space().name()).seed(seed).verdict(ok)
        }
        Command::Probe(ProbeCmd::Centralizer { target, ball, samples, seed }) => {
            let st = target.structure()?;
            let b = input::address(&ball)?;
            let r = st.centralizer_probe(&b, samples, seed)?;
            let text = format!(
                "centralizer probe at {b}: {} ({} positive failures, {} negative failures of {})",
                verdict(r.passed()),
                r.positive_failures,
                r.negative_failures,
                r.negative_samples
            );
            Report::new("probe centralizer", serde_json::to_value(&r).unwrap(), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(r.passed())
        }
        Command::Probe(ProbeCmd::FiniteSupport { target, samples, seed }) => {
            let st = target.structure()?;
            let r = st.finite_support_probe(samples, seed)?;
            let text = format!(
                "finite-support probe: {} (trivial: {}, n = {}, {} closure and {} normality failures)",
                verdict(r.passed()),
                r.lambda_trivial,
                r.n,
                r.closure_failures,
                r.normality_failures
            );
            Report::new("probe finite-support", serde_json::to_value(&r).unwrap(), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(r.passed())
        }
        Command::Fuzz(FuzzCmd::GroupLaws { target, n, seed }) => {
            let st = target.structure()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = RandomParams::default();
            let mut passed = 0;
            let mut witnesses = Vec::new();
            for i in 0..n {
                let f = st.random_element(&mut rng, params);
                let g = st.random_element(&mut rng, params);
                let h = st.random_element(&mut rng, params);
                let id = st.identity();
                let gi = st.inverse(&g);
                let ok = st.compose(&st.compose(&f, &g), &h) == st.compose(&f, &st.compose(&g, &h))
                    && st.is_identity(&st.compose(&g, &gi))
                    && st.is_identity(&st.compose(&gi, &g))
                    && st.compose(&id, &g) == g
                    && st.compose(&g, &id) == g;
                if ok {
                    passed += 1;
                } else if witnesses.len() < 4 {
                    witnesses.push(json!({ "triple": i, "f": elem_json(&st, &f), "g": elem_json(&st, &g), "h": elem_json(&st, &h) }));
                }
            }
            let ok = passed == n;
            let text = format!("{passed}/{n} pass");
            Report::new("fuzz group-laws", json!({ "n": n, "passed": passed, "witnesses": witnesses }), text)
                .space(st.space().name())
                .seed(seed)
                .verdict(ok)
        }
    })
}

fn run_elem(cmd: ElemCmd) -> Result<Report> {
    let single = |name: &str, st: &Structure, g: &Element, out: Option<String>| -> Result<Report> {
        if let Some(path) = out {
            std::fs::write(&path, st.element_to_json(g) + "\n").map_err(|source| CliError::Io { path, source })?;
        }
        Ok(Report::new(name, elem_json(st, g), elem_text(st, g)).space(st.space().name()))
    };
    Ok(match cmd {
        ElemCmd::Compose { files, out, target } => {
            let (st, es) = target.load(&files)?;
            let refs: Vec<&Element> = es.iter().collect();
            single("elem compose", &st, &st.product(&refs), out)?
        }
        ElemCmd::Inverse { file, out, target } => {
            let (st, es) = target.load(&[file])?;
            single("elem inverse", &st, &st.inverse(&es[0]), out)?
        }
        ElemCmd::Reduce { file, out, target } => {
            let (st, es) = target.load(&[file])?;
            single("elem reduce", &st, &st.reduce(&es[0]), out)?
        }
        ElemCmd::Eq { a, b, target } => {
            let (st, es) = target.load(&[a, b])?;
            let eq = st.equals(&es[0], &es[1]);
            Report::new("elem eq", json!(eq), if eq { "equal" } else { "not equal" }.into()).space(st.space().name())
        }
        ElemCmd::Apply { file, ball, target } => {
            let (st, es) = target.load(&[file])?;
            let a = input::address(&ball)?;
            let (img, l) = st.restrict(&es[0], &a)?;
            let shown = if img.is_root() { "ε".to_string() } else { img.to_string() };
            let result = json!({ "ball": a, "image": img, "label": st.label_to_doc(l) });
            Report::new("elem apply", result, format!("{shown} [{}]", st.label_name(l))).space(st.space().name())
        }
        ElemCmd::Random { target, depth, regions, seed, out } => {
            if depth == 0 || regions == 0 {
                return Err(CliError::Usage("--depth and --regions must be positive".into()));
            }
            let st = target.structure()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = st.random_element(&mut rng, RandomParams { max_depth: depth, max_regions: regions });
            single("elem random", &st, &g, out)?.seed(seed)
        }
    })
}

fn read_matrix(path: &str) -> Result<TransitionMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source })?;
    TransitionMatrix::parse(&text).map_err(|e| CliError::input(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command) {
        Ok(mut report) => {
            if cli.timing {
                report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
            }
            let mut text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
                Format::Text => report.text.clone(),
            };
            if let (Format::Text, Some(ms)) = (cli.format, report.wall_time_ms) {
                text += &format!("\n({ms} ms)");
            }
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn root_prints_as_epsilon() {
        let st = Structure::canonical(simgroup::fixtures::binary());
        assert_eq!(elem_text(&st, &st.identity()), "ε -> ε [canonical]");
    }
}
