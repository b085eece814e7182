use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use cspwb_core::agespec::enumerate_d_types;
use cspwb_core::construct::{
    blowup_spec, build_pcsp, full_power_finite, superpose_specs, wreath_finite, wreath_spec, BuildOptions,
};
use cspwb_core::datalog::{acyclicity_check, blowup_expand, blowup_reduce_star, i4_quotient_reduce};
use cspwb_core::error::{Error, Result};
use cspwb_core::polyfind::{find_polymorphism, IdentityKind};
use cspwb_core::relcore::find_homomorphism;
use cspwb_core::text::{emit_op, emit_orbit_template, emit_pcsp_summary, emit_spec, emit_structure, emit_type_table};

use crate::builtins::{self, load_spec, load_structure};
use crate::config::WorkbenchConfig;
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "cspwb", version, about = "Finitely bounded templates, full powers and polymorphism search")]
pub struct Cli {
    /// Base seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct specs, structures and templates.
    #[command(subcommand)]
    Build(Build),
    /// Decide template membership problems.
    #[command(subcommand)]
    Solve(Solve),
    /// Apply an instance reduction.
    Reduce {
        kind: ReduceKind,
        #[arg(long)]
        instance: String,
        /// Base symbols kept by `star`.
        #[arg(long, value_delimiter = ',', default_value = "<")]
        tau: Vec<String>,
    },
    /// Search for a polymorphism satisfying identities.
    Polysearch {
        #[arg(long)]
        s1: String,
        /// Target structure; defaults to `s1`.
        #[arg(long)]
        s2: Option<String>,
        #[arg(long)]
        arity: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Cyclic)]
        kind: KindArg,
    },
    /// Print the d-types of a spec.
    Types {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        d: usize,
    },
    /// The acceptance suite.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Debug, Subcommand)]
pub enum Build {
    /// Wreath product of two specs, or of two finite structures.
    Wreath {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The blowup spec of `spec` over the symbols `tau`.
    Blowup {
        #[arg(long)]
        spec: String,
        #[arg(long, value_delimiter = ',')]
        tau: Vec<String>,
        #[arg(long)]
        with_i4: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generic superposition of two specs over disjoint signatures.
    Superpose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The d-th full power of a finite structure.
    Fullpower {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The PCSP template generated from a spec, `tau` and a finite `S`.
    Pcsp {
        #[arg(long)]
        spec: String,
        #[arg(long, value_delimiter = ',')]
        tau: Vec<String>,
        #[arg(long)]
        s: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        with_i4: bool,
        /// Directory receiving `s1.txt`, `s2.txt` and `pcsp.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Solve {
    /// Does the instance map to the template? `qlt` is (Q; <), decided by
    /// the acyclicity program; other templates by search.
    Csp {
        #[arg(long)]
        template: String,
        #[arg(long)]
        instance: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum SuiteCmd {
    Run {
        /// Run the criteria whose number or name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Write the emitted artifacts here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReduceKind {
    Star,
    Expand,
    I4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    None,
    Cyclic,
    Commutative,
    Siggers,
    Olsak,
}

impl KindArg {
    fn identity(self, arity: usize) -> IdentityKind {
        match self {
            KindArg::None => IdentityKind::None,
            KindArg::Cyclic => IdentityKind::Cyclic(arity),
            KindArg::Commutative => IdentityKind::Commutative,
            KindArg::Siggers => IdentityKind::Siggers,
            KindArg::Olsak => IdentityKind::Olsak,
        }
    }
}

/// What a command prints and its exit code.
#[derive(Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }

    fn decision(yes: bool, stdout: String) -> Outcome {
        Outcome { stdout, code: if yes { 0 } else { 1 } }
    }
}

/// Exit code for an error: 3 for a cap, 2 otherwise.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => 3,
        _ => 2,
    }
}

fn write_out(out: &Option<PathBuf>, text: String) -> Result<Outcome> {
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(Outcome::ok(format!("wrote {}\n", path.display())))
        }
        None => Ok(Outcome::ok(text)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write `{}`: {e}", path.display())))
}

fn stage(name: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Invalid(m) => Error::Invalid(format!("{name}: {m}")),
        Error::CapExceeded { what, required, allowed } => {
            Error::CapExceeded { what: format!("{name}: {what}"), required, allowed }
        }
        other => other,
    }
}

fn is_spec_arg(arg: &str) -> bool {
    builtins::spec(arg).is_some()
        || std::fs::read_to_string(arg).is_ok_and(|s| s.split_whitespace().next() == Some("spec"))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = WorkbenchConfig::from_env(cli.seed, cli.verbose)?;
    let caps = &cfg.caps;
    match &cli.command {
        Command::Build(b) => match b {
            Build::Wreath { a, b, out } => {
                if is_spec_arg(a) && is_spec_arg(b) {
                    let w = wreath_spec(&load_spec(a)?, &load_spec(b)?).map_err(stage("wreath"))?;
                    write_out(out, emit_spec(&w))
                } else {
                    let w = wreath_finite(&load_structure(a)?, &load_structure(b)?, caps).map_err(stage("wreath"))?;
                    write_out(out, emit_structure(&w, "wreath"))
                }
            }
            Build::Blowup { spec, tau, with_i4, out } => {
                let (up, tau_up) = blowup_spec(&load_spec(spec)?, tau, *with_i4).map_err(stage("blowup"))?;
                let mut text = emit_spec(&up);
                text.push_str(&format!("# tau_up {}\n", tau_up.join(",")));
                write_out(out, text)
            }
            Build::Superpose { a, b, out } => {
                let s = superpose_specs(&load_spec(a)?, &load_spec(b)?).map_err(stage("superposition"))?;
                write_out(out, emit_spec(&s))
            }
            Build::Fullpower { structure, d, out } => {
                let p = full_power_finite(&load_structure(structure)?, *d, caps).map_err(stage("full power"))?;
                write_out(out, emit_structure(&p, "fullpower"))
            }
            Build::Pcsp { spec, tau, s, d, with_i4, out } => {
                let opts = BuildOptions { with_i4: *with_i4, d_override: *d, caps: *caps };
                let t = build_pcsp(&load_spec(spec)?, tau, &load_structure(s)?, &opts)?;
                let summary = emit_pcsp_summary(&t);
                match out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir)
                            .map_err(|e| Error::Invalid(format!("cannot create `{}`: {e}", dir.display())))?;
                        write_file(&dir.join("s1.txt"), &emit_structure(&t.s1, "S1"))?;
                        write_file(&dir.join("s2.txt"), &emit_orbit_template(&t.s2))?;
                        write_file(&dir.join("pcsp.txt"), &summary)?;
                        Ok(Outcome::ok(format!(
                            "d={} s1={} s2={} (wrote s1.txt, s2.txt, pcsp.txt to {})\n",
                            t.d,
                            t.s1.size(),
                            t.s2.size(),
                            dir.display()
                        )))
                    }
                    None => Ok(Outcome::ok(summary)),
                }
            }
        },
        Command::Solve(Solve::Csp { template, instance }) => {
            let j = load_structure(instance)?;
            if template == "qlt" {
                if j.signature().index_of("<").is_none() || j.signature().len() != 1 {
                    return Err(Error::SignatureMismatch("the (Q; <) template needs instances over `<`/2 only".into()));
                }
                let yes = acyclicity_check(&j)?;
                return Ok(Outcome::decision(yes, if yes { "SAT\n".into() } else { "UNSAT\n".into() }));
            }
            let a = load_structure(template)?;
            match find_homomorphism(&j, &a, false)? {
                Some(h) => {
                    let map: Vec<String> = (0..j.size()).map(|x| format!("{}->{}", j.label(x as u32), a.label(h.map[x]))).collect();
                    Ok(Outcome::decision(true, format!("SAT\n{}\n", map.join(" "))))
                }
                None => Ok(Outcome::decision(false, "UNSAT\n".into())),
            }
        }
        Command::Reduce { kind, instance, tau } => {
            let j = load_structure(instance)?;
            let r = match kind {
                ReduceKind::Star => blowup_reduce_star(&j, tau),
                ReduceKind::Expand => blowup_expand(&j),
                ReduceKind::I4 => i4_quotient_reduce(&j),
            }
            .map_err(stage("reduce"))?;
            Ok(Outcome::ok(emit_structure(&r, "reduced")))
        }
        Command::Polysearch { s1, s2, arity, kind } => {
            let a = load_structure(s1)?;
            let b = match s2 {
                Some(s) => load_structure(s)?,
                None => a.clone(),
            };
            match find_polymorphism(&a, &b, *arity, kind.identity(*arity), caps)? {
                Some(f) => Ok(Outcome::decision(true, emit_op(&f))),
                None => Ok(Outcome::decision(false, "none\n".into())),
            }
        }
        Command::Types { spec, d } => {
            let t = enumerate_d_types(&load_spec(spec)?, *d, caps)?;
            Ok(Outcome::ok(format!("{}\n{}", t.len(), emit_type_table(&t))))
        }
        Command::Suite(SuiteCmd::Run { filter, out }) => {
            let cfg = WorkbenchConfig { out_dir: out.clone(), ..cfg };
            let report = suite::run_suite(&cfg, filter.as_deref())?;
            let text = report.lines().join("\n") + "\n";
            Ok(Outcome { stdout: text, code: if report.all_passed() { 0 } else { 1 } })
        }
    }
}
