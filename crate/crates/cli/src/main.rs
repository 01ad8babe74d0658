use std::collections::BTreeSet;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use covsynth::io::{export_dot, write_atomic, ModelFile};
use covsynth::models::{
    build_ac, build_bts, build_bts_a, build_bts_m, build_ce, build_cea, build_oc, build_ocns, build_ocnsa, build_sdown,
    build_sdowna, build_sdowna_bar, Bipartite,
};
use covsynth::pipeline::procedure1;
use covsynth::verification::{check_consistency, enumerate_consistent_supervisors, verify_successful, Bounds, FailureKind};
use covsynth::{synth_attacker, Automaton, Error, Mode, PipelineOptions, StateId};

const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BOUND: u8 = 3;

#[derive(Parser)]
#[command(name = "covsynth", version, about = "Covert sensor-actuator attacker synthesis")]
struct Cli {
    /// Accept unobservable controllable events; results are safe but may not be supremal.
    #[arg(long, global = true)]
    sound_only: bool,
    /// Cap on automatically generated commands.
    #[arg(long, global = true, value_name = "N")]
    max_commands: Option<usize>,
    /// Write every intermediate automaton into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    emit_intermediates: Option<PathBuf>,
    /// Emit Graphviz DOT instead of JSON.
    #[arg(long, global = true)]
    dot: bool,
    /// Output file (standard output when absent).
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Supremal safe command-nondeterministic supervisor of the plant.
    SynthNs { model: PathBuf },
    /// Build the attack-model automata.
    BuildModels {
        model: PathBuf,
        /// Restrict to these automata (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Full pipeline: supremal covert damage-reachable attacker.
    SynthAttacker { model: PathBuf },
    /// Check an attacker against enumerated consistent supervisors.
    Verify {
        attacker: PathBuf,
        model: PathBuf,
        /// Largest supervisor size (defaults to the observation automaton's size plus one).
        #[arg(long)]
        bound: Option<usize>,
        /// Largest number of supervisors.
        #[arg(long, default_value_t = Bounds::DEFAULT_COUNT)]
        max_supervisors: usize,
    },
    /// Check that a supervisor can produce the observations.
    Consistent {
        model: PathBuf,
        #[arg(long, default_value = "supervisor")]
        supervisor: String,
    },
    /// Enumerate safe supervisors consistent with the observations.
    EnumerateSup {
        model: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, default_value_t = Bounds::DEFAULT_COUNT)]
        max_supervisors: usize,
    },
}

fn color() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn report_error(e: &Error) {
    if color() {
        eprintln!("\x1b[1;31merror\x1b[0m: {e}");
    } else {
        eprintln!("error: {e}");
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::TooManyCommands { .. } => EXIT_BOUND,
        _ => EXIT_INPUT,
    }
}

struct Ctx {
    mode: Mode,
    max_commands: Option<usize>,
    intermediates: Option<PathBuf>,
    dot: bool,
    output: Option<PathBuf>,
}

impl Ctx {
    fn load(&self, path: &Path) -> covsynth::Result<ModelFile> {
        ModelFile::load(path, self.max_commands)
    }

    fn emit_text(&self, text: &str) -> covsynth::Result<()> {
        match &self.output {
            Some(p) => write_atomic(p, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Writes a single automaton in the selected format.
    fn emit_one(&self, al: &Arc<covsynth::Alphabet>, name: &str, a: &Automaton, highlight: &BTreeSet<StateId>) -> covsynth::Result<()> {
        if self.dot {
            return self.emit_text(&export_dot(a, name, highlight));
        }
        let mut f = ModelFile::new(al.clone());
        f.insert(name, a)?;
        self.emit_text(&f.to_json()?)
    }

    fn emit_many(&self, al: &Arc<covsynth::Alphabet>, items: &[(String, Automaton)]) -> covsynth::Result<()> {
        if self.dot {
            let text: String = items.iter().map(|(n, a)| export_dot(a, n, &BTreeSet::new())).collect();
            return self.emit_text(&text);
        }
        let mut f = ModelFile::new(al.clone());
        for (n, a) in items {
            f.insert(n.clone(), a)?;
        }
        self.emit_text(&f.to_json()?)
    }

    fn write_intermediates(&self, al: &Arc<covsynth::Alphabet>, items: &[(&str, &Automaton)]) -> covsynth::Result<()> {
        let Some(dir) = &self.intermediates else { return Ok(()) };
        std::fs::create_dir_all(dir)?;
        for (name, a) in items {
            let mut f = ModelFile::new(al.clone());
            f.insert(*name, a)?;
            write_atomic(&dir.join(format!("{name}.json")), f.to_json()?.as_bytes())?;
            if self.dot {
                write_atomic(&dir.join(format!("{name}.dot")), export_dot(a, name, &BTreeSet::new()).as_bytes())?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> covsynth::Result<u8> {
    let ctx = Ctx {
        mode: if cli.sound_only { Mode::SoundOnly } else { Mode::Strict },
        max_commands: cli.max_commands,
        intermediates: cli.emit_intermediates,
        dot: cli.dot,
        output: cli.output,
    };
    match cli.command {
        Command::SynthNs { model } => {
            let m = ctx.load(&model)?;
            match procedure1(m.plant()?, ctx.mode)? {
                Some(ns) => {
                    eprintln!("NS: {} states", ns.automaton.num_states());
                    ctx.emit_one(&m.alphabet, "ns", &ns.automaton, &BTreeSet::new())?;
                    Ok(0)
                }
                None => {
                    eprintln!("no safe supervisor exists");
                    Ok(EXIT_NO)
                }
            }
        }
        Command::BuildModels { model, only } => {
            let m = ctx.load(&model)?;
            let items = build_models(&m, ctx.mode)?;
            let selected: Vec<(String, Automaton)> = if only.is_empty() {
                items
            } else {
                for name in &only {
                    if !items.iter().any(|(n, _)| n == name) {
                        return Err(Error::model("--only", format!("no buildable automaton named `{name}`")));
                    }
                }
                items.into_iter().filter(|(n, _)| only.contains(n)).collect()
            };
            ctx.emit_many(&m.alphabet, &selected)?;
            Ok(0)
        }
        Command::SynthAttacker { model } => {
            let m = ctx.load(&model)?;
            let opts = PipelineOptions {
                mode: ctx.mode,
                keep_intermediates: ctx.intermediates.is_some(),
            };
            let out = synth_attacker(m.plant()?, &m.observations()?, opts)?;
            if let Some(i) = &out.intermediates {
                ctx.write_intermediates(
                    &m.alphabet,
                    &[
                        ("ns", &i.ns.automaton),
                        ("oc", &i.oc),
                        ("ocns", &i.ocns.automaton),
                        ("ocns_a", &i.ocns_a),
                        ("ac", &i.ac),
                        ("ce_a", &i.ce_a),
                        ("sdown", &i.sdown),
                        ("sdown_a", &i.sdown_a),
                        ("sdown_a_bar", &i.sdown_a_bar),
                    ],
                )?;
            }
            if out.sound_incomplete {
                eprintln!("warning: controllable attacker events are unobservable; the attacker may not be supremal");
            }
            eprintln!(
                "sizes: NS {}, OCNS {}, OCNS^A {}, composed plant {}, attacker {} ({:.1?})",
                out.sizes.ns, out.sizes.ocns, out.sizes.ocns_a, out.sizes.plant, out.sizes.attacker, out.elapsed
            );
            match &out.attacker {
                Some(a) => {
                    ctx.emit_one(&m.alphabet, "attacker", a, &out.damage_states)?;
                    Ok(0)
                }
                None => {
                    eprintln!("no solution: {:?}", out.no_solution.expect("reason is set"));
                    Ok(EXIT_NO)
                }
            }
        }
        Command::Verify {
            attacker,
            model,
            bound,
            max_supervisors,
        } => {
            let m = ctx.load(&model)?;
            let af = ctx.load(&attacker)?;
            let a = match af.automata.get("attacker") {
                Some(a) => a,
                None if af.automata.len() == 1 => af.automata.values().next().expect("one automaton"),
                None => return Err(Error::model("automata", "missing automaton `attacker`")),
            };
            let a = a.rebind(&m.alphabet)?;
            let m_o = m.observations()?;
            let bounds = Bounds {
                state_bound: bound.unwrap_or(m_o.num_states() + 1),
                count_bound: max_supervisors,
            };
            let g = m.plant()?;
            let r = verify_successful(&a, g, &m_o, bounds, ctx.mode)?;
            let mut text = format!(
                "supervisors checked: {}\ntruncated: {}\ncounterexamples: {}\n",
                r.supervisors.len(),
                r.truncated,
                r.failures.len()
            );
            for f in &r.failures {
                let kind = match f.kind {
                    FailureKind::Detected => "detected",
                    FailureKind::NoDamage => "no damage",
                };
                text.push_str(&format!("  supervisor {}: {kind}", f.supervisor));
                if let Some(t) = &f.trace {
                    text.push_str(&format!(" after `{}`", t.join(" ")));
                }
                text.push('\n');
            }
            ctx.emit_text(&text)?;
            Ok(if r.is_success() { 0 } else { EXIT_NO })
        }
        Command::Consistent { model, supervisor } => {
            let m = ctx.load(&model)?;
            let ok = check_consistency(m.plant()?, m.get(&supervisor)?, &m.observations()?)?;
            ctx.emit_text(&format!("consistent: {ok}\n"))?;
            Ok(if ok { 0 } else { EXIT_NO })
        }
        Command::EnumerateSup {
            model,
            bound,
            max_supervisors,
        } => {
            let m = ctx.load(&model)?;
            let m_o = m.observations()?;
            let bounds = Bounds {
                state_bound: bound.unwrap_or(m_o.num_states() + 1),
                count_bound: max_supervisors,
            };
            let en = enumerate_consistent_supervisors(m.plant()?, &m_o, bounds, ctx.mode)?;
            let items: Vec<(String, Automaton)> = en
                .supervisors
                .iter()
                .enumerate()
                .map(|(i, s)| (format!("s{i}"), s.clone()))
                .collect();
            ctx.emit_many(&m.alphabet, &items)?;
            eprintln!("{} supervisors{}", items.len(), if en.truncated { " (truncated)" } else { "" });
            Ok(if en.truncated {
                EXIT_BOUND
            } else if items.is_empty() {
                EXIT_NO
            } else {
                0
            })
        }
    }
}

fn build_models(m: &ModelFile, mode: Mode) -> covsynth::Result<Vec<(String, Automaton)>> {
    let al = &m.alphabet;
    let mut out: Vec<(String, Automaton)> = vec![
        ("ac".into(), build_ac(al)),
        ("ce".into(), build_ce(al)),
        ("ce_a".into(), build_cea(al)),
    ];
    if let Ok(sup) = m.get("supervisor") {
        let bts = build_bts(sup)?;
        let bts_m = build_bts_m(&bts, m.plant()?, &build_ce(al))?;
        out.push(("bts_a".into(), build_bts_a(&bts_m)?));
        out.push(("bts".into(), bts.automaton));
        out.push(("bts_m".into(), bts_m.automaton));
    }
    if m.automata.contains_key("observations") {
        let m_o = m.observations()?;
        let oc = build_oc(&m_o);
        let sdown = build_sdown(&m_o);
        let sdown_a = build_sdowna(&sdown)?;
        out.push(("sdown_a_bar".into(), build_sdowna_bar(&sdown_a)?));
        out.push(("sdown".into(), sdown));
        out.push(("sdown_a".into(), sdown_a));
        if m.automata.contains_key("plant") {
            if let Some(ns) = procedure1(m.plant()?, mode)? {
                let ocns: Bipartite = build_ocns(&ns, &oc)?;
                out.push(("ocns_a".into(), build_ocnsa(&ocns)?));
                out.push(("ns".into(), ns.automaton));
                out.push(("ocns".into(), ocns.automaton));
            }
        }
        out.push(("oc".into(), oc));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .write_style(if color() {
            env_logger::WriteStyle::Auto
        } else {
            env_logger::WriteStyle::Never
        })
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report_error(&e);
            ExitCode::from(exit_code_for(&e))
        }
    }
}
