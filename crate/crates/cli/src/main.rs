//! Command-line interface: deterministic reports over the graph,
//! divisor, stability, and tree-function text formats.
//!
//! Exit codes: 0 success (or semantic true), 1 semantic false,
//! 2 validation failure, 3 structural or parse failure, 4 resource cap
//! exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vstab_core::bdset;
use vstab_core::error::Error;
use vstab_core::multigraph::{Caps, Multigraph};
use vstab_core::set::EdgeSet;
use vstab_core::spanning;
use vstab_core::strata;
use vstab_core::textio;
use vstab_core::vstability::{self, Classicality, VStability};

const EXIT_FALSE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_STRUCTURAL: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "vstab",
    about = "Exact computations with stability conditions and break divisors on multigraphs",
    version
)]
struct Cli {
    /// Cap for subset enumerations (overrides VSTAB_CAP).
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Emit machine-readable key=value lines.
    #[arg(long, global = true)]
    structured: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basic graph invariants: size, genus, complexity, genus profile.
    Info { graph: PathBuf },
    /// Check the stability axioms; exit 2 with the violations if any.
    Validate { graph: PathBuf, stability: PathBuf },
    /// Search for a general polarization inducing the stability.
    Classical { graph: PathBuf, stability: PathBuf },
    /// Verify the stable-divisor / break-divisor equivalence suite.
    Verify { graph: PathBuf, stability: PathBuf },
    /// List the canonical stability classes up to translation.
    Enumerate {
        graph: PathBuf,
        /// Translate each representative to this total degree.
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Dump the stable divisors stratum by stratum.
    Vset { graph: PathBuf, stability: PathBuf },
    /// Dump the induced tree function and its break divisor strata.
    Bdset { graph: PathBuf, stability: PathBuf },
    /// Canonical translation representative for a chosen spanning tree.
    Canonical {
        graph: PathBuf,
        stability: PathBuf,
        /// Spanning tree as comma-separated edge labels (default: the
        /// lexicographically first one).
        #[arg(long)]
        tree: Option<String>,
    },
    /// Orbit poset, face poset, and stratification polynomials.
    Strata {
        graph: PathBuf,
        stability: PathBuf,
        /// Print only the cover relations as a DOT digraph.
        #[arg(long)]
        dot: bool,
    },
}

/// Scalar report that renders as `key: value` or `key=value` lines.
struct Report {
    structured: bool,
    out: String,
}

impl Report {
    fn new(structured: bool) -> Self {
        Report {
            structured,
            out: String::new(),
        }
    }

    fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        if self.structured {
            let _ = writeln!(self.out, "{key}={value}");
        } else {
            let _ = writeln!(self.out, "{key}: {value}");
        }
    }

    fn raw(&mut self, text: &str) {
        self.out.push_str(text);
    }

    fn print(self) {
        print!("{}", self.out);
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::InvalidStability(_) => EXIT_INVALID,
        _ => EXIT_STRUCTURAL,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(&err))
}

fn load_graph(path: &PathBuf) -> Result<Multigraph, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    textio::parse_graph(&text)
}

fn load_stability(
    g: &Multigraph,
    path: &PathBuf,
    caps: &Caps,
) -> Result<(VStability, Vec<vstability::Violation>), Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    textio::parse_vstability(g, &text, caps)
}

fn effective_caps(flag: Option<usize>) -> Caps {
    if let Some(n) = flag {
        return Caps::with_limit(n);
    }
    if let Ok(env) = std::env::var("VSTAB_CAP") {
        if let Ok(n) = env.parse() {
            return Caps::with_limit(n);
        }
    }
    Caps::default()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_STRUCTURAL,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let caps = effective_caps(cli.cap);
    let structured = cli.structured;
    match run(cli.command, &caps, structured) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn run(command: Command, caps: &Caps, structured: bool) -> Result<ExitCode, Error> {
    match command {
        Command::Info { graph } => {
            let g = load_graph(&graph)?;
            let mut report = Report::new(structured);
            report.field("vertices", g.n_vertices());
            report.field("edges", g.n_edges());
            report.field("genus", g.genus());
            if g.is_connected() {
                report.field("complexity", spanning::complexity(&g)?);
                let profile = spanning::genus_profile(&g, caps)?;
                let line = profile
                    .iter()
                    .map(|(h, c)| format!("{h}={c}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                report.field("genus-profile", line);
                report.field("biconnected-pairs", g.biconnected_pairs(caps)?.len());
            } else {
                report.field("connected", false);
            }
            report.print();
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { graph, stability } => {
            let g = load_graph(&graph)?;
            let (n, mut violations) = load_stability(&g, &stability, caps)?;
            violations.extend(n.validate(&g, caps)?);
            let mut report = Report::new(structured);
            report.field("degree", n.degree());
            report.field("violations", violations.len());
            for v in &violations {
                report.field("violation", v.describe(&g));
            }
            report.field("valid", violations.is_empty());
            report.print();
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INVALID)
            })
        }
        Command::Classical { graph, stability } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let mut report = Report::new(structured);
            match vstability::is_classical(&g, &n, caps)? {
                Classicality::Classical { witness, slack } => {
                    report.field("classical", true);
                    report.field("slack", slack);
                    let phi = (0..g.n_vertices())
                        .map(|v| format!("{}={}", g.vertex_name(v), witness.0[v]))
                        .collect::<Vec<_>>()
                        .join(" ");
                    report.field("polarization", phi);
                    report.print();
                    Ok(ExitCode::SUCCESS)
                }
                Classicality::NotClassical { max_slack } => {
                    report.field("classical", false);
                    match max_slack {
                        Some(s) => report.field("max-slack", s),
                        None => report.field("max-slack", "none (empty closed relaxation)"),
                    }
                    report.print();
                    Ok(ExitCode::from(EXIT_FALSE))
                }
            }
        }
        Command::Verify { graph, stability } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let eq = bdset::verify_equivalence(&g, &n, caps)?;
            let mut report = Report::new(structured);
            report.field("strata-mismatches", eq.mismatches.len());
            for m in &eq.mismatches {
                report.field(
                    "mismatch",
                    format!(
                        "stratum {:?}: {} extra stable, {} extra break",
                        m.kept,
                        m.only_in_vset.len(),
                        m.only_in_bd.len()
                    ),
                );
            }
            report.field("type-sN", eq.flags.strong_n);
            report.field("type-numerical-sN", eq.flags.numerical_strong_n);
            report.field("type-N", eq.flags.n);
            report.field("type-numerical-N", eq.flags.numerical_n);
            report.field("components", eq.component_count);
            report.field("complexity", eq.complexity);
            report.field("roundtrip", eq.roundtrip_ok);
            report.field("verified", eq.passed());
            report.print();
            Ok(if eq.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            })
        }
        Command::Enumerate { graph, degree } => {
            let g = load_graph(&graph)?;
            let classes = vstability::enumerate_up_to_translation(&g, caps)?;
            let mut report = Report::new(structured);
            report.field("classes", classes.len());
            for n in &classes {
                let n = match degree {
                    Some(d) => {
                        // Shift the whole degree difference onto vertex 0.
                        let mut shift = vstab_core::divisor::Divisor::zero(g.n_vertices());
                        shift.0[0] = d - n.degree();
                        n.translate(&shift)
                    }
                    None => n.clone(),
                };
                let classical = matches!(
                    vstability::is_classical(&g, &n, caps)?,
                    Classicality::Classical { .. }
                );
                let values = n
                    .canonical_values()
                    .iter()
                    .map(|(w, v)| {
                        let names: Vec<&str> = w.iter().map(|x| g.vertex_name(x)).collect();
                        format!("{{{}}}={v}", names.join(","))
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                report.field(
                    "class",
                    format!("degree={} classical={} {}", n.degree(), classical, values),
                );
            }
            report.print();
            Ok(ExitCode::SUCCESS)
        }
        Command::Vset { graph, stability } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let p = vstability::vset(&g, &n, caps)?;
            let mut report = Report::new(structured);
            report.raw(&textio::write_upper_set(&g, &p));
            report.print();
            Ok(ExitCode::SUCCESS)
        }
        Command::Bdset { graph, stability } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let i = bdset::tree_function_from_vstability(&g, &n, caps)?;
            let p = bdset::bd_upper_set(&g, &i, caps)?;
            let mut report = Report::new(structured);
            report.raw(&textio::write_tree_function(&g, &i));
            report.raw(&textio::write_upper_set(&g, &p));
            report.print();
            Ok(ExitCode::SUCCESS)
        }
        Command::Canonical {
            graph,
            stability,
            tree,
        } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let tree = match tree {
                Some(spec) => {
                    let mut t = EdgeSet::empty();
                    for label in spec.split(',') {
                        let e = g
                            .edge_by_label(label.trim())
                            .ok_or_else(|| Error::Invalid(format!("unknown edge {label:?}")))?;
                        t.insert(e);
                    }
                    t
                }
                None => spanning::spanning_trees(&g)?[0],
            };
            let (canon, d) = vstability::canonical_form(&g, &n, tree, caps)?;
            let mut report = Report::new(structured);
            let labels: Vec<&str> = tree.iter().map(|e| g.edge(e).label.as_str()).collect();
            report.field("tree", labels.join(","));
            report.field("translation", textio::format_divisor(&g, &d));
            report.raw(&textio::write_vstability(&g, &canon));
            report.print();
            Ok(ExitCode::SUCCESS)
        }
        Command::Strata {
            graph,
            stability,
            dot,
        } => {
            let g = load_graph(&graph)?;
            let (n, violations) = load_stability(&g, &stability, caps)?;
            if !violations.is_empty() {
                return Err(Error::InvalidStability(violations.len()));
            }
            let poset = strata::orbit_poset(&g, &n, caps)?;
            let label = |i: usize| {
                let e = &poset.elements[i];
                let labels: Vec<&str> = e.kept.iter().map(|x| g.edge(x).label.as_str()).collect();
                let kept = if labels.is_empty() {
                    "-".to_string()
                } else {
                    labels.join(",")
                };
                format!("{kept} | {}", textio::format_divisor(&g, &e.divisor))
            };
            if dot {
                let mut out = String::from("digraph strata {\n");
                for i in 0..poset.elements.len() {
                    let _ = writeln!(out, "  \"{}\";", label(i));
                }
                for &(lo, hi) in &poset.covers {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\";", label(hi), label(lo));
                }
                out.push_str("}\n");
                print!("{out}");
                return Ok(ExitCode::SUCCESS);
            }
            let mut report = Report::new(structured);
            report.field("elements", poset.elements.len());
            report.field("covers", poset.covers.len());
            report.field("components", strata::component_count(&g, &n, caps)?);
            report.field(
                "grothendieck-class",
                strata::grothendieck_class(&g, &n, caps)?,
            );
            report.field(
                "perverse-graph-factor",
                strata::perverse_graph_factor(&g, caps)?,
            );
            let faces = strata::mumford_face_poset(&g, &n, caps)?;
            let top_dim = faces.dims.iter().max().copied().unwrap_or(0);
            let top_cells = faces.dims.iter().filter(|&&d| d == top_dim).count();
            report.field("face-poset-top-dim", top_dim);
            report.field("face-poset-top-cells", top_cells);
            for i in 0..poset.elements.len() {
                report.field("orbit", format!("rank={} {}", poset.dims[i], label(i)));
            }
            for &(lo, hi) in &poset.covers {
                report.field("cover", format!("{} > {}", label(hi), label(lo)));
            }
            report.print();
            Ok(ExitCode::SUCCESS)
        }
    }
}
