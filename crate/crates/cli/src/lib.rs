//! Command-line surface. [`run`] parses arguments, dispatches and returns
//! the exit status with the text to print, so it can be driven in tests.

use std::path::Path;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use treerel::decide::{definable_global, definable_local, nodes_equiv_structural, nodes_geq_structural, Verdict};
use treerel::document::{D2, D3, T1};
use treerel::equiv::{node_relation, NodeNotion};
use treerel::oracle::{bounded_equiv, check_node_equivalence, find_defining, find_distinguishing, OracleBudget};
use treerel::rewrite::{downward_core_normalize, dualize, eliminate_proj_inverse, expand_counting};
use treerel::synth::Synthesizer;
use treerel::{check_fragment, eval, Document, Expr, Fragment, FragmentCheck, NodeSet, Relation};

#[derive(Parser, Debug)]
#[command(name = "treerel", version, about = "Relation-algebra XPath fragments over unordered labeled trees")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct DocArg {
    /// Document file, inline s-expression, or one of T1, D2, D3.
    #[arg(long)]
    doc: String,
}

#[derive(Args, Debug, Clone)]
struct FragArg {
    /// Registry key: sd, sd-pos, wd, wd-pos, su, su-pos, xpath, core-xpath, pos-xpath.
    #[arg(long)]
    fragment: String,
    /// Counting bound for parameterized fragments.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum NotionArg {
    DownK,
    Up,
    K,
    DownRel,
    Rel,
    WeakDown,
    Weak,
    UpRel,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Rule {
    ProjInv,
    Counting,
    CoreNormalize,
    Dualize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression.
    Eval {
        #[command(flatten)]
        doc: DocArg,
        #[arg(long)]
        expr: String,
        /// Only the nodes reachable from this node.
        #[arg(long)]
        from: Option<usize>,
    },
    /// Blocks of an equivalence, or the pairs of a preorder.
    Classes {
        #[command(flatten)]
        doc: DocArg,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Structural node equivalence under a fragment or notion.
    Equiv {
        #[command(flatten)]
        doc: DocArg,
        /// Exactly two nodes.
        #[arg(long = "node", num_args = 1, required = true)]
        nodes: Vec<usize>,
        #[arg(long, conflicts_with = "notion")]
        fragment: Option<String>,
        #[arg(long)]
        notion: Option<NotionArg>,
        #[arg(long)]
        k: Option<u32>,
        /// Test the first node against the second in one direction only.
        #[arg(long)]
        directional: bool,
    },
    /// Decide whether a relation is definable.
    Definable {
        #[command(flatten)]
        doc: DocArg,
        #[command(flatten)]
        frag: FragArg,
        /// Relation file or inline pairs such as "1 2,2 1".
        #[arg(long)]
        relation: String,
        /// Also print a witness expression.
        #[arg(long)]
        witness: bool,
    },
    /// Decide whether a node set is definable from a node.
    DefinableLocal {
        #[command(flatten)]
        doc: DocArg,
        #[command(flatten)]
        frag: FragArg,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long)]
        set: String,
        #[arg(long)]
        witness: bool,
    },
    /// A predicate true at exactly one of two nodes.
    Distinguish {
        #[command(flatten)]
        doc: DocArg,
        #[command(flatten)]
        frag: FragArg,
        #[arg(long = "node", num_args = 1, required = true)]
        nodes: Vec<usize>,
        /// Search exhaustively up to this size instead of synthesizing.
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Synthesize an expression for a relation, or for a node set from a node.
    Synthesize {
        #[command(flatten)]
        doc: DocArg,
        #[command(flatten)]
        frag: FragArg,
        #[arg(long, conflicts_with_all = ["set", "from"])]
        relation: Option<String>,
        #[arg(long, requires = "set")]
        from: Option<usize>,
        #[arg(long)]
        set: Option<String>,
    },
    /// Apply a semantics-preserving rewrite.
    Rewrite {
        #[arg(long, value_enum)]
        rule: Rule,
        #[arg(long)]
        expr: String,
        /// Target fragment for proj-inv.
        #[arg(long, default_value = "xpath")]
        fragment: String,
    },
    /// Compare structural equivalences with the bounded oracle.
    OracleCheck {
        #[command(flatten)]
        doc: DocArg,
        /// One fragment; all registry fragments when absent.
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
    },
    /// Smallest expression defining a relation, by exhaustive search.
    OracleDefine {
        #[command(flatten)]
        doc: DocArg,
        #[command(flatten)]
        frag: FragArg,
        #[arg(long)]
        relation: String,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
    },
    /// Check whether an expression belongs to a fragment.
    Check {
        #[command(flatten)]
        frag: FragArg,
        #[arg(long)]
        expr: String,
    },
}

/// Exit status and the text for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn negative(stdout: String) -> Outcome {
        Outcome { code: 1, stdout, stderr: String::new() }
    }
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e:#}\n") },
    }
}

fn load_doc(spec: &str) -> anyhow::Result<Document> {
    let text = match spec {
        "T1" => T1.to_string(),
        "D2" => D2.to_string(),
        "D3" => D3.to_string(),
        s if s.trim_start().starts_with('(') => s.to_string(),
        path => std::fs::read_to_string(path).with_context(|| format!("reading document {path}"))?,
    };
    Ok(Document::parse(&text)?)
}

fn load_relation(doc: &Document, spec: &str) -> anyhow::Result<Relation> {
    let text = if Path::new(spec).is_file() {
        std::fs::read_to_string(spec).with_context(|| format!("reading relation {spec}"))?
    } else {
        spec.to_string()
    };
    Ok(Relation::parse(doc.len(), &text)?)
}

fn fragment(f: &FragArg) -> anyhow::Result<Fragment> {
    Ok(Fragment::by_name(&f.fragment, f.k)?)
}

fn notion(n: NotionArg, k: u32) -> NodeNotion {
    match n {
        NotionArg::DownK => NodeNotion::DownK(k),
        NotionArg::Up => NodeNotion::Upward,
        NotionArg::K => NodeNotion::UpDownK(k),
        NotionArg::DownRel => NodeNotion::DownRelated,
        NotionArg::Rel => NodeNotion::Related,
        NotionArg::WeakDown => NodeNotion::WeakDown,
        NotionArg::Weak => NodeNotion::WeakUpDown,
        NotionArg::UpRel => NodeNotion::UpRelated,
    }
}

fn two(nodes: &[usize]) -> anyhow::Result<(usize, usize)> {
    match nodes {
        [a, b] => Ok((*a, *b)),
        _ => bail!("expected exactly two --node flags"),
    }
}

fn pairs_json(r: &Relation) -> Value {
    Value::Array(r.pairs().map(|(v, w)| json!([v, w])).collect())
}

fn lines(s: String) -> String {
    if s.is_empty() {
        s
    } else {
        s + "\n"
    }
}

fn render_verdict(
    json_out: bool,
    v: &Verdict,
    witness: Option<anyhow::Result<Expr>>,
) -> anyhow::Result<Outcome> {
    let w = witness.transpose()?;
    if json_out {
        let mut obj = json!({
            "definable": v.definable,
            "counterexample": v.counterexample.as_ref().map(|c| c.to_string()),
        });
        if let Some(e) = &w {
            obj["witness"] = json!(e.to_string());
        }
        let text = obj.to_string() + "\n";
        return Ok(if v.definable { Outcome::ok(text) } else { Outcome::negative(text) });
    }
    if v.definable {
        let mut out = "definable\n".to_string();
        if let Some(e) = w {
            out.push_str(&format!("{e}\n"));
        }
        Ok(Outcome::ok(out))
    } else {
        let c = v.counterexample.as_ref().map(|c| c.to_string()).unwrap_or_default();
        Ok(Outcome::negative(format!("not definable\n{c}\n")))
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    let j = cli.json;
    match &cli.command {
        Command::Eval { doc, expr, from } => {
            let d = load_doc(&doc.doc)?;
            let e = Expr::parse(expr)?;
            let r = eval(&e, &d);
            match from {
                Some(v) => {
                    d.check(*v)?;
                    let s = r.row(*v);
                    Ok(Outcome::ok(if j {
                        json!({ "nodes": s.iter().collect::<Vec<_>>() }).to_string() + "\n"
                    } else {
                        format!("{s}\n")
                    }))
                }
                None => Ok(Outcome::ok(if j {
                    json!({ "pairs": pairs_json(&r) }).to_string() + "\n"
                } else {
                    lines(r.to_lines())
                })),
            }
        }
        Command::Classes { doc, notion: n, k } => {
            let d = load_doc(&doc.doc)?;
            let idx = node_relation(&d, notion(*n, *k));
            Ok(Outcome::ok(if j {
                if idx.notion.is_preorder() {
                    json!({ "notion": idx.notion.to_string(), "pairs": pairs_json(&idx.matrix()) }).to_string() + "\n"
                } else {
                    json!({ "notion": idx.notion.to_string(), "blocks": idx.blocks() }).to_string() + "\n"
                }
            } else {
                lines(idx.render())
            }))
        }
        Command::Equiv { doc, nodes, fragment: f, notion: n, k, directional } => {
            let d = load_doc(&doc.doc)?;
            let (a, b) = two(nodes)?;
            d.check(a)?;
            d.check(b)?;
            let yes = match (f, n) {
                (Some(name), _) => {
                    let frag = Fragment::by_name(name, *k)?;
                    if *directional {
                        nodes_geq_structural(&d, a, b, &frag)?
                    } else {
                        nodes_equiv_structural(&d, a, b, &frag)?
                    }
                }
                (None, Some(n)) => {
                    let idx = node_relation(&d, notion(*n, k.unwrap_or(1)));
                    idx.related(a, b) && (*directional || idx.related(b, a))
                }
                (None, None) => bail!("equiv needs --fragment or --notion"),
            };
            let word = match (yes, *directional) {
                (true, false) => "equivalent",
                (false, false) => "not equivalent",
                (true, true) => "related",
                (false, true) => "not related",
            };
            let text = if j { json!({ "result": yes }).to_string() } else { word.to_string() } + "\n";
            Ok(if yes { Outcome::ok(text) } else { Outcome::negative(text) })
        }
        Command::Definable { doc, frag, relation, witness } => {
            let d = load_doc(&doc.doc)?;
            let f = fragment(frag)?;
            let r = load_relation(&d, relation)?;
            let v = definable_global(&d, &r, &f)?;
            let w = (*witness && v.definable)
                .then(|| Synthesizer::new(&d, &f).and_then(|mut s| s.witness(&r)).map_err(Into::into));
            render_verdict(j, &v, w)
        }
        Command::DefinableLocal { doc, frag, from, set, witness } => {
            let d = load_doc(&doc.doc)?;
            let f = fragment(frag)?;
            let s = NodeSet::parse(d.len(), set)?;
            let v = definable_local(&d, *from, &s, &f)?;
            let w = (*witness && v.definable)
                .then(|| Synthesizer::new(&d, &f).and_then(|mut sy| sy.local(*from, &s)).map_err(Into::into));
            render_verdict(j, &v, w)
        }
        Command::Distinguish { doc, frag, nodes, max_size } => {
            let d = load_doc(&doc.doc)?;
            let f = fragment(frag)?;
            let (a, b) = two(nodes)?;
            let found = match max_size {
                Some(m) => find_distinguishing(&d, &f, a, b, &OracleBudget::new(*m))?,
                None => Synthesizer::new(&d, &f)?.distinguisher(a, b)?,
            };
            let text = match (&found, j) {
                (Some(e), false) => format!("{e}\n"),
                (None, false) => "none\n".to_string(),
                (e, true) => json!({ "expr": e.as_ref().map(|e| e.to_string()) }).to_string() + "\n",
            };
            Ok(if found.is_some() { Outcome::ok(text) } else { Outcome::negative(text) })
        }
        Command::Synthesize { doc, frag, relation, from, set } => {
            let d = load_doc(&doc.doc)?;
            let f = fragment(frag)?;
            let mut s = Synthesizer::new(&d, &f)?;
            let e = match (relation, set) {
                (Some(r), None) => s.witness(&load_relation(&d, r)?),
                (None, Some(set)) => s.local(from.unwrap_or(0), &NodeSet::parse(d.len(), set)?),
                _ => bail!("synthesize needs --relation, or --set with an optional --from"),
            };
            match e {
                Ok(e) => Ok(Outcome::ok(if j {
                    json!({ "expr": e.to_string() }).to_string() + "\n"
                } else {
                    format!("{e}\n")
                })),
                Err(err @ (treerel::Error::NotClosed(..) | treerel::Error::Shape(..))) => {
                    Ok(Outcome::negative(format!("not definable: {err}\n")))
                }
                Err(err) => Err(err.into()),
            }
        }
        Command::Rewrite { rule, expr, fragment: f } => {
            let e = Expr::parse(expr)?;
            let out = match rule {
                Rule::ProjInv => eliminate_proj_inverse(&e, &Fragment::by_name(f, None)?)?,
                Rule::Counting => expand_counting(&e)?,
                Rule::CoreNormalize => downward_core_normalize(&e)?,
                Rule::Dualize => dualize(&e)?,
            };
            Ok(Outcome::ok(if j { json!({ "expr": out.to_string() }).to_string() + "\n" } else { format!("{out}\n") }))
        }
        Command::OracleCheck { doc, fragment: f, k, max_size } => {
            let d = load_doc(&doc.doc)?;
            let frags = match f {
                Some(name) => vec![Fragment::by_name(name, *k)?],
                None => Fragment::registry(&[1, 2, 3]),
            };
            let mut report = Vec::new();
            let mut all_ok = true;
            for frag in &frags {
                let bad = check_node_equivalence(&d, frag, *max_size)?;
                let classes = {
                    let m = bounded_equiv(&d, frag, &OracleBudget::new(*max_size));
                    d.nodes().filter(|&v| (0..v).all(|u| !m.contains(u, v))).count()
                };
                all_ok &= bad.is_empty();
                report.push((frag.name.clone(), bad, classes));
            }
            if j {
                let rows: Vec<Value> = report
                    .iter()
                    .map(|(name, bad, classes)| {
                        json!({
                            "fragment": name,
                            "pass": bad.is_empty(),
                            "oracle_classes": classes,
                            "disagreements": bad.iter().map(|x| json!([x.v1, x.v2, x.structural, x.oracle])).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                let text = json!({ "pass": all_ok, "max_size": max_size, "fragments": rows }).to_string() + "\n";
                return Ok(if all_ok { Outcome::ok(text) } else { Outcome::negative(text) });
            }
            let mut out = String::new();
            for (name, bad, classes) in &report {
                if bad.is_empty() {
                    out.push_str(&format!("{name}: PASS ({classes} oracle classes, size <= {max_size})\n"));
                } else {
                    out.push_str(&format!("{name}: FAIL\n"));
                    for x in bad {
                        out.push_str(&format!(
                            "  ({},{}) structural={} oracle={}\n",
                            x.v1, x.v2, x.structural, x.oracle
                        ));
                    }
                }
            }
            out.push_str(if all_ok { "oracle-check: PASS\n" } else { "oracle-check: FAIL\n" });
            Ok(if all_ok { Outcome::ok(out) } else { Outcome::negative(out) })
        }
        Command::OracleDefine { doc, frag, relation, max_size } => {
            let d = load_doc(&doc.doc)?;
            let f = fragment(frag)?;
            let r = load_relation(&d, relation)?;
            let found = find_defining(&d, &f, &r, &OracleBudget::new(*max_size));
            let text = match (&found, j) {
                (Some(e), false) => format!("{e}\n"),
                (None, false) => "none\n".to_string(),
                (e, true) => json!({ "expr": e.as_ref().map(|e| e.to_string()) }).to_string() + "\n",
            };
            Ok(if found.is_some() { Outcome::ok(text) } else { Outcome::negative(text) })
        }
        Command::Check { frag, expr } => {
            let f = fragment(frag)?;
            let e = Expr::parse(expr)?;
            match check_fragment(&e, &f) {
                FragmentCheck::Ok => Ok(Outcome::ok(if j { "{\"ok\":true}\n".into() } else { "ok\n".into() })),
                FragmentCheck::Violation { path, reason } => {
                    let text = if j {
                        json!({ "ok": false, "path": path, "reason": reason }).to_string() + "\n"
                    } else {
                        format!("violation at {path:?}: {reason}\n")
                    };
                    Ok(Outcome::negative(text))
                }
            }
        }
    }
}
