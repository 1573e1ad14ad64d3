//! Command implementations.
//!
//! Verdict commands (`bisim`, `member`, `coherent`, `slice-filter`,
//! `sheaf-check`) print `true` or `false` and use the exit code for the
//! verdict: 0 for a positive answer, 1 for a negative one.  Anything that
//! fails to parse, resolve or validate exits with 2 and a message on stderr.
//! Generating commands (`minimize`, `coh`, `reindex`, `glue`) print
//! declarations that can be appended to the input document.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use mtypes_core::tree::path_set_coherent;
use mtypes_core::{bisimilar, glue, sheaf_check, PathSequence, Signature};

use crate::ast::{Decl, Over};
use crate::doc::Checked;
use crate::{emit, parse};

#[derive(Parser)]
#[command(name = "mtypes", version, about = "rational trees over finite signatures")]
pub struct Cli {
    /// Document to load (required by every command).
    #[arg(long, global = true, value_name = "FILE")]
    pub doc: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
pub enum Command {
    /// Validate the document and list what it declares.
    Check,
    /// Print the depth-n truncation of the tree at a state.
    Truncate {
        #[arg(long)]
        coalg: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// List the paths from a state that visit at most --max-nodes states.
    Paths {
        #[arg(long)]
        coalg: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        max_nodes: usize,
    },
    /// Decide whether two states, given as COALG.STATE, unfold to the same tree.
    Bisim {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Print the canonical quotient of the part reachable from a state.
    Minimize {
        #[arg(long)]
        coalg: String,
        #[arg(long)]
        state: String,
    },
    /// Print the largest sub-coalgebra of a proto-coalgebra.
    Coh {
        #[arg(long)]
        proto: String,
    },
    /// Decide whether a shape,position,…,shape sequence is a path of the tree.
    Member {
        #[arg(long)]
        coalg: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        seq: String,
    },
    /// Check the path-set coherence clauses on sequences of at most --max-len
    /// shapes, either for the tree at a state or for an explicit set.
    Coherent {
        #[arg(long)]
        coalg: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        sig: Option<String>,
        /// A member sequence; repeat for each accepted sequence.
        #[arg(long)]
        accept: Vec<String>,
        #[arg(long)]
        max_len: usize,
    },
    /// Decide whether every node of the tree carries the root's index.
    SliceFilter {
        #[arg(long)]
        indexed: String,
        #[arg(long)]
        coalg: String,
        #[arg(long)]
        state: String,
    },
    /// Retag an indexed signature along a map of indices (new=old pairs).
    Reindex {
        #[arg(long)]
        indexed: String,
        #[arg(long)]
        map: String,
    },
    /// Decide whether every compatible family for the site has exactly one
    /// amalgamation in the presheaf.
    SheafCheck {
        #[arg(long)]
        site: String,
        #[arg(long)]
        presheaf: String,
    },
    /// Glue a compatible family into one tree over the underlying signature.
    Glue {
        #[arg(long)]
        site: String,
        #[arg(long)]
        family: String,
    },
}

pub fn run(cli: Cli) -> u8 {
    match execute(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn execute(cli: Cli) -> Result<u8, String> {
    let path = cli.doc.ok_or("no document given; pass --doc FILE")?;
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let document = parse::parse(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    let checked = Checked::from_document(&document).map_err(|e| e.to_string())?;

    match cli.command {
        Command::Check => {
            for decl in &document.decls {
                println!("{} {}", decl.kind(), decl.name());
            }
            println!("ok");
            Ok(0)
        }
        Command::Truncate { coalg, state, depth, format } => {
            let entry = checked.coalgebra(&coalg).map_err(|e| e.to_string())?;
            let tree = entry.coalgebra.unfold(&state, depth).map_err(|e| e.to_string())?;
            match format {
                Format::Json => println!("{}", emit::tree_json(&tree)),
                Format::Dot => println!("{}", emit::tree_dot(&tree)),
            }
            Ok(0)
        }
        Command::Paths { coalg, state, max_nodes } => {
            let entry = checked.coalgebra(&coalg).map_err(|e| e.to_string())?;
            let paths =
                entry.coalgebra.paths_from(&state, max_nodes).map_err(|e| e.to_string())?;
            for p in &paths {
                let mut line = p.states()[0].clone();
                for (label, next) in p.labels().iter().zip(&p.states()[1..]) {
                    line.push_str(&format!(" -{label}-> {next}"));
                }
                println!("{line}");
            }
            Ok(0)
        }
        Command::Bisim { left, right } => {
            let (lc, ls) = split_state(&left)?;
            let (rc, rs) = split_state(&right)?;
            let le = checked.coalgebra(lc).map_err(|e| e.to_string())?;
            let re = checked.coalgebra(rc).map_err(|e| e.to_string())?;
            require_state(&le.coalgebra, lc, ls)?;
            require_state(&re.coalgebra, rc, rs)?;
            if le.coalgebra.signature() != re.coalgebra.signature() {
                return Err(format!(
                    "`{lc}` and `{rc}` are over different signatures, states cannot be compared"
                ));
            }
            verdict(bisimilar(&le.coalgebra, ls, &re.coalgebra, rs))
        }
        Command::Minimize { coalg, state } => {
            let entry = checked.coalgebra(&coalg).map_err(|e| e.to_string())?;
            require_state(&entry.coalgebra, &coalg, &state)?;
            let handle = entry.coalgebra.minimize(&state);
            println!("// {coalg}.{state} is state {}", handle.state());
            println!(
                "{}",
                emit::coalgebra_decl(&format!("{coalg}_min"), &entry.over, handle.universe())
            );
            Ok(0)
        }
        Command::Coh { proto } => {
            let (over, p) = checked
                .protos
                .get(&proto)
                .ok_or_else(|| format!("unknown proto-coalgebra `{proto}`"))?;
            let result = p.coh();
            println!("// coherent carrier: [{}]", result.coherent.join(", "));
            println!(
                "{}",
                emit::coalgebra_decl(
                    &format!("{proto}_coh"),
                    &Over::Signature(over.clone()),
                    &result.coalgebra
                )
            );
            Ok(0)
        }
        Command::Member { coalg, state, seq } => {
            let entry = checked.coalgebra(&coalg).map_err(|e| e.to_string())?;
            require_state(&entry.coalgebra, &coalg, &state)?;
            let sequence = sequence(entry.coalgebra.signature(), &seq)?;
            verdict(entry.coalgebra.minimize(&state).path_set_contains(&sequence))
        }
        Command::Coherent { coalg, state, sig, accept, max_len } => {
            let holds = match (&coalg, &state, &sig) {
                (Some(c), Some(s), None) => {
                    if !accept.is_empty() {
                        return Err("--accept only makes sense with --sig".to_string());
                    }
                    let entry = checked.coalgebra(c).map_err(|e| e.to_string())?;
                    require_state(&entry.coalgebra, c, s)?;
                    entry.coalgebra.minimize(s).path_set_coherent(max_len)
                }
                (None, None, Some(name)) => {
                    let signature = checked.signature(name).map_err(|e| e.to_string())?;
                    let set = accept
                        .iter()
                        .map(|s| sequence(signature, s))
                        .collect::<Result<Vec<_>, _>>()?;
                    path_set_coherent(
                        signature,
                        |q| {
                            set.iter()
                                .any(|p| p.shapes() == q.shapes() && p.labels() == q.labels())
                        },
                        max_len,
                    )
                }
                _ => {
                    return Err(
                        "pass either --coalg with --state, or --sig with --accept".to_string()
                    )
                }
            };
            verdict(holds)
        }
        Command::SliceFilter { indexed, coalg, state } => {
            let (_, ix) = checked
                .indexed
                .get(&indexed)
                .ok_or_else(|| format!("unknown indexed signature `{indexed}`"))?;
            let entry = checked.coalgebra(&coalg).map_err(|e| e.to_string())?;
            require_state(&entry.coalgebra, &coalg, &state)?;
            if entry.coalgebra.signature() != ix.base() {
                return Err(format!(
                    "`{coalg}` is not a coalgebra over the base signature of `{indexed}`"
                ));
            }
            verdict(ix.fibre_coherent(&entry.coalgebra.minimize(&state)))
        }
        Command::Reindex { indexed, map } => {
            let (_, ix) = checked
                .indexed
                .get(&indexed)
                .ok_or_else(|| format!("unknown indexed signature `{indexed}`"))?;
            let (index_j, x) = index_map(&map)?;
            let (reindexed, projection) =
                ix.reindex(index_j, &x).map_err(|e| e.to_string())?;
            let base_name = format!("{indexed}_re_base");
            println!("{}", emit::signature_decl(&base_name, reindexed.base()));
            let fibres = reindexed
                .base()
                .shapes()
                .iter()
                .map(|a| (a.clone(), reindexed.fibre_of(a).to_string()))
                .collect();
            println!(
                "{}",
                emit::decl(&Decl::Indexed {
                    name: format!("{indexed}_re"),
                    over: base_name,
                    index: reindexed.index().to_vec(),
                    fibres,
                })
            );
            for a in reindexed.base().shapes() {
                let image = projection.shape_image(a).expect("projection is total");
                println!("// {a} projects to {image}");
            }
            Ok(0)
        }
        Command::SheafCheck { site, presheaf } => {
            let (site_cat, s) = checked
                .sites
                .get(&site)
                .ok_or_else(|| format!("unknown site `{site}`"))?;
            let (psh_cat, x) = checked
                .presheaves
                .get(&presheaf)
                .ok_or_else(|| format!("unknown presheaf `{presheaf}`"))?;
            if site_cat != psh_cat {
                return Err(format!(
                    "site `{site}` is over `{site_cat}` but presheaf `{presheaf}` is over `{psh_cat}`"
                ));
            }
            verdict(sheaf_check(s, x))
        }
        Command::Glue { site, family } => {
            let entry = checked
                .families
                .get(&family)
                .ok_or_else(|| format!("unknown family `{family}`"))?;
            if entry.site != site {
                return Err(format!("family `{family}` was declared over site `{}`", entry.site));
            }
            let s = &checked.sites[&entry.site].1;
            let fmap = &checked.morphisms[&entry.fmap];
            let handle = glue(s, &fmap.map, &entry.family).map_err(|e| e.to_string())?;
            println!("// glued tree is state {}", handle.state());
            println!(
                "{}",
                emit::coalgebra_decl(
                    &format!("{family}_glued"),
                    &Over::Underlying(entry.fmap.clone()),
                    handle.universe()
                )
            );
            Ok(0)
        }
    }
}

fn verdict(holds: bool) -> Result<u8, String> {
    println!("{holds}");
    Ok(if holds { 0 } else { 1 })
}

fn split_state(arg: &str) -> Result<(&str, &str), String> {
    arg.split_once('.')
        .ok_or_else(|| format!("`{arg}`: expected COALGEBRA.STATE"))
}

fn require_state(
    coalg: &mtypes_core::Coalgebra,
    name: &str,
    state: &str,
) -> Result<(), String> {
    if coalg.has_state(state) {
        Ok(())
    } else {
        Err(format!("`{name}` has no state `{state}`"))
    }
}

/// `shape,position,shape,…`: odd length, shapes at the even slots.
fn sequence(sig: &Signature, text: &str) -> Result<PathSequence, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) || parts.len() % 2 == 0 {
        return Err(format!(
            "`{text}`: a sequence alternates shape,position,… and ends with a shape"
        ));
    }
    let shapes = parts.iter().step_by(2).map(|s| s.to_string()).collect();
    let labels = parts.iter().skip(1).step_by(2).map(|s| s.to_string()).collect();
    PathSequence::new(sig, shapes, labels).map_err(|e| format!("`{text}`: {e}"))
}

/// `j0=i0,j1=i1`: the new index set in order with the map to the old one.
fn index_map(text: &str) -> Result<(Vec<String>, BTreeMap<String, String>), String> {
    let mut order = Vec::new();
    let mut map = BTreeMap::new();
    for pair in text.split(',') {
        let (j, i) = pair
            .trim()
            .split_once('=')
            .ok_or_else(|| format!("`{pair}`: expected NEW=OLD"))?;
        if map.insert(j.trim().to_string(), i.trim().to_string()).is_some() {
            return Err(format!("index `{}` mapped twice", j.trim()));
        }
        order.push(j.trim().to_string());
    }
    Ok((order, map))
}
