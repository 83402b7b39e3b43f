//! Expression syntax, fragments and the core-shape check.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::document::{is_label_char, Label};
use crate::error::{Error, Result};

/// An expression of the relation algebra over documents.
///
/// Children are reference counted so synthesized expressions may share
/// subterms; the semantics is always that of the unfolded tree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Empty,
    Eps,
    LabelTest(Label),
    Down,
    Up,
    Proj1(Arc<Expr>),
    Proj2(Arc<Expr>),
    Inverse(Arc<Expr>),
    Count(u32, Arc<Expr>),
    Compose(Arc<Expr>, Arc<Expr>),
    Union(Arc<Expr>, Arc<Expr>),
    Intersect(Arc<Expr>, Arc<Expr>),
    Diff(Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn label(l: &str) -> Expr {
        Expr::LabelTest(Label::new(l).expect("valid label"))
    }

    pub fn p1(e: Expr) -> Expr {
        Expr::Proj1(Arc::new(e))
    }

    pub fn p2(e: Expr) -> Expr {
        Expr::Proj2(Arc::new(e))
    }

    pub fn inv(e: Expr) -> Expr {
        Expr::Inverse(Arc::new(e))
    }

    pub fn ch(k: u32, e: Expr) -> Expr {
        Expr::Count(k, Arc::new(e))
    }

    pub fn comp(a: Expr, b: Expr) -> Expr {
        Expr::Compose(Arc::new(a), Arc::new(b))
    }

    pub fn union(a: Expr, b: Expr) -> Expr {
        Expr::Union(Arc::new(a), Arc::new(b))
    }

    pub fn inter(a: Expr, b: Expr) -> Expr {
        Expr::Intersect(Arc::new(a), Arc::new(b))
    }

    pub fn diff(a: Expr, b: Expr) -> Expr {
        Expr::Diff(Arc::new(a), Arc::new(b))
    }

    /// Right-nested composition of a nonempty list.
    pub fn chain(parts: impl IntoIterator<Item = Expr>) -> Expr {
        let mut parts: Vec<Expr> = parts.into_iter().collect();
        let mut acc = parts.pop().expect("nonempty chain");
        while let Some(p) = parts.pop() {
            acc = Expr::comp(p, acc);
        }
        acc
    }

    /// Left-nested union of a list; `0` when empty.
    pub fn union_all(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts.into_iter().reduce(Expr::union).unwrap_or(Expr::Empty)
    }

    /// `↑^m/↓^n`, with `self` for `m = n = 0`.
    pub fn up_down(m: usize, n: usize) -> Expr {
        if m + n == 0 {
            return Expr::Eps;
        }
        Expr::chain(std::iter::repeat_n(Expr::Up, m).chain(std::iter::repeat_n(Expr::Down, n)))
    }

    /// Immediate subexpressions, left to right.
    pub fn children(&self) -> Vec<&Arc<Expr>> {
        match self {
            Expr::Empty | Expr::Eps | Expr::LabelTest(_) | Expr::Down | Expr::Up => vec![],
            Expr::Proj1(a) | Expr::Proj2(a) | Expr::Inverse(a) | Expr::Count(_, a) => vec![a],
            Expr::Compose(a, b) | Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Diff(a, b) => vec![a, b],
        }
    }

    /// Number of constructors of the unfolded tree; `ch_k` counts once.
    pub fn size(&self) -> u64 {
        fn go(e: &Expr, memo: &mut HashMap<*const Expr, u64>) -> u64 {
            let key = e as *const Expr;
            if let Some(&s) = memo.get(&key) {
                return s;
            }
            let s = 1 + e.children().into_iter().map(|c| go(c, memo)).fold(0u64, u64::saturating_add);
            memo.insert(key, s);
            s
        }
        go(self, &mut HashMap::new())
    }

    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = ExprParser { text, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// True if `e` syntactically contains a node of the given kind.
    pub fn contains(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.contains(pred))
    }
}

/// Parses the concrete expression syntax.
pub fn parse_expr(text: &str) -> Result<Expr> {
    Expr::parse(text)
}

/// Prints with minimal parentheses; composition nests to the right and set
/// operators to the left.
pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Set,
    Comp,
    Atom,
}

fn level(e: &Expr) -> Level {
    match e {
        Expr::Union(..) | Expr::Intersect(..) | Expr::Diff(..) => Level::Set,
        Expr::Compose(..) => Level::Comp,
        _ => Level::Atom,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, need: Level) -> fmt::Result {
    if level(e) < need {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Empty => f.write_str("0"),
        Expr::Eps => f.write_str("self"),
        Expr::LabelTest(l) => write!(f, "~{l}"),
        Expr::Down => f.write_str("down"),
        Expr::Up => f.write_str("up"),
        Expr::Proj1(a) => write!(f, "p1({a})"),
        Expr::Proj2(a) => write!(f, "p2({a})"),
        Expr::Inverse(a) => write!(f, "inv({a})"),
        Expr::Count(k, a) => write!(f, "ch{k}({a})"),
        Expr::Compose(a, b) => {
            write_at(f, a, Level::Atom)?;
            f.write_str("/")?;
            write_at(f, b, Level::Comp)
        }
        Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Diff(a, b) => {
            let op = match e {
                Expr::Union(..) => " | ",
                Expr::Intersect(..) => " & ",
                _ => " - ",
            };
            write_at(f, a, Level::Set)?;
            f.write_str(op)?;
            write_at(f, b, Level::Comp)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

struct ExprParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.comp()?;
        loop {
            let op = match self.peek() {
                Some(c @ ('|' | '&' | '-')) => c,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.comp()?;
            acc = match op {
                '|' => Expr::union(acc, rhs),
                '&' => Expr::inter(acc, rhs),
                _ => Expr::diff(acc, rhs),
            };
        }
    }

    fn comp(&mut self) -> Result<Expr> {
        let mut parts = vec![self.atom()?];
        while self.eat('/') {
            parts.push(self.atom()?);
        }
        Ok(Expr::chain(parts))
    }

    fn word(&mut self) -> &'a str {
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn body(&mut self) -> Result<Expr> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.err("unexpected end of expression"),
            Some('(') => self.body(),
            Some('~') => {
                self.pos += 1;
                let rest = &self.text[self.pos..];
                let len: usize = rest
                    .chars()
                    .take_while(|&c| is_label_char(c) && c != '|' && c != '&')
                    .map(char::len_utf8)
                    .sum();
                if len == 0 {
                    return self.err("expected label after '~'");
                }
                self.pos += len;
                Ok(Expr::LabelTest(Label::new(&rest[..len])?))
            }
            Some(c) if c.is_ascii_alphanumeric() => {
                let start = self.pos;
                let w = self.word();
                match w {
                    "0" => Ok(Expr::Empty),
                    "self" => Ok(Expr::Eps),
                    "down" => Ok(Expr::Down),
                    "up" => Ok(Expr::Up),
                    "p1" => Ok(Expr::p1(self.body()?)),
                    "p2" => Ok(Expr::p2(self.body()?)),
                    "inv" => Ok(Expr::inv(self.body()?)),
                    _ if w.len() > 2 && w.starts_with("ch") && w[2..].bytes().all(|b| b.is_ascii_digit()) => {
                        let k: u32 = match w[2..].parse() {
                            Ok(k) => k,
                            Err(_) => {
                                self.pos = start;
                                return self.err("counting bound out of range");
                            }
                        };
                        if k < 1 {
                            self.pos = start;
                            return self.err("ch requires k >= 1");
                        }
                        Ok(Expr::ch(k, self.body()?))
                    }
                    _ => {
                        self.pos = start;
                        self.err(&format!("unknown keyword {w:?}"))
                    }
                }
            }
            Some(_) => self.err("expected an atom"),
        }
    }
}

/// Nonbasic operations a fragment may admit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct OpSet {
    pub down: bool,
    pub up: bool,
    pub proj1: bool,
    pub proj2: bool,
    pub inverse: bool,
    pub intersect: bool,
    pub diff: bool,
}

impl OpSet {
    pub fn is_subset(&self, other: &OpSet) -> bool {
        (!self.down || other.down)
            && (!self.up || other.up)
            && (!self.proj1 || other.proj1)
            && (!self.proj2 || other.proj2)
            && (!self.inverse || other.inverse)
            && (!self.intersect || other.intersect)
            && (!self.diff || other.diff)
    }
}

/// The registered language families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Sd,
    SdPos,
    Wd,
    WdPos,
    Su,
    SuPos,
    XPath,
    CoreXPath,
    PosXPath,
    Custom,
}

/// A language: an operation set, the core flag and a counting bound
/// (0 when counting is absent).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub name: String,
    pub family: Family,
    pub ops: OpSet,
    pub core: bool,
    pub count_bound: u32,
}

const fn ops(down: bool, up: bool, proj1: bool, proj2: bool, inverse: bool, intersect: bool, diff: bool) -> OpSet {
    OpSet { down, up, proj1, proj2, inverse, intersect, diff }
}

impl Fragment {
    fn make(family: Family, k: u32) -> Fragment {
        let (name, ops, core, k) = match family {
            Family::Sd => (format!("sd({k})"), ops(true, false, true, false, false, false, true), false, k),
            Family::SdPos => ("sd-pos".into(), ops(true, false, true, false, false, true, false), false, 0),
            Family::Wd => (format!("wd({k})"), ops(true, false, true, true, false, false, true), false, k),
            Family::WdPos => ("wd-pos".into(), ops(true, false, true, true, false, false, false), false, 0),
            Family::Su => ("su".into(), ops(false, true, true, false, false, false, true), false, 0),
            Family::SuPos => ("su-pos".into(), ops(false, true, true, false, false, true, false), false, 0),
            Family::XPath => (format!("xpath({k})"), ops(true, true, true, true, true, true, true), false, k),
            Family::CoreXPath => (format!("core-xpath({k})"), ops(true, true, true, true, false, true, true), true, k),
            Family::PosXPath => ("pos-xpath".into(), ops(true, true, true, true, true, true, false), false, 0),
            Family::Custom => unreachable!("custom fragments are built with Fragment::custom"),
        };
        Fragment { name, family, ops, core, count_bound: k }
    }

    pub fn sd(k: u32) -> Fragment {
        Fragment::make(Family::Sd, k.max(1))
    }
    pub fn sd_pos() -> Fragment {
        Fragment::make(Family::SdPos, 0)
    }
    pub fn wd(k: u32) -> Fragment {
        Fragment::make(Family::Wd, k.max(1))
    }
    pub fn wd_pos() -> Fragment {
        Fragment::make(Family::WdPos, 0)
    }
    pub fn su() -> Fragment {
        Fragment::make(Family::Su, 0)
    }
    pub fn su_pos() -> Fragment {
        Fragment::make(Family::SuPos, 0)
    }
    pub fn xpath(k: u32) -> Fragment {
        Fragment::make(Family::XPath, k.max(1))
    }
    pub fn core_xpath(k: u32) -> Fragment {
        Fragment::make(Family::CoreXPath, k.max(1))
    }
    pub fn pos_xpath() -> Fragment {
        Fragment::make(Family::PosXPath, 0)
    }

    pub fn custom(name: &str, ops: OpSet, core: bool, count_bound: u32) -> Fragment {
        Fragment { name: name.to_string(), family: Family::Custom, ops, core, count_bound }
    }

    /// The same operations with the core restriction switched on.
    pub fn as_core(&self) -> Fragment {
        Fragment { name: format!("{}/core", self.name), core: true, ..self.clone() }
    }

    /// Looks up a registry key such as `sd`, `sd(2)` or `core-xpath`;
    /// `k` overrides the counting bound of parameterized families.
    pub fn by_name(name: &str, k: Option<u32>) -> Result<Fragment> {
        let unknown = || Error::UnknownFragment(name.to_string());
        let (base, inline_k) = match name.find('(') {
            Some(i) if name.ends_with(')') => {
                let k: u32 = name[i + 1..name.len() - 1].trim().parse().map_err(|_| unknown())?;
                (&name[..i], Some(k))
            }
            Some(_) => return Err(unknown()),
            None => (name, None),
        };
        let k = k.or(inline_k);
        if k == Some(0) {
            return Err(unknown());
        }
        let f = match base {
            "sd" => Fragment::sd(k.unwrap_or(1)),
            "wd" => Fragment::wd(k.unwrap_or(1)),
            "xpath" => Fragment::xpath(k.unwrap_or(3)),
            "core-xpath" => Fragment::core_xpath(k.unwrap_or(2)),
            "sd-pos" | "wd-pos" | "su" | "su-pos" | "pos-xpath" if inline_k.is_some() => return Err(unknown()),
            "sd-pos" => Fragment::sd_pos(),
            "wd-pos" => Fragment::wd_pos(),
            "su" => Fragment::su(),
            "su-pos" => Fragment::su_pos(),
            "pos-xpath" => Fragment::pos_xpath(),
            _ => return Err(unknown()),
        };
        Ok(f)
    }

    /// Every registry fragment, parameterized ones instantiated at each `k`.
    pub fn registry(ks: &[u32]) -> Vec<Fragment> {
        let mut out = Vec::new();
        for &k in ks {
            out.push(Fragment::sd(k));
        }
        out.push(Fragment::sd_pos());
        for &k in ks {
            out.push(Fragment::wd(k));
        }
        out.push(Fragment::wd_pos());
        out.push(Fragment::su());
        out.push(Fragment::su_pos());
        for &k in ks {
            out.push(Fragment::xpath(k));
        }
        for &k in ks {
            out.push(Fragment::core_xpath(k));
        }
        out.push(Fragment::pos_xpath());
        out
    }

    pub fn is_positive(&self) -> bool {
        !self.ops.diff
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Result of [`check_fragment`]: the path is a list of child positions from
/// the root of the expression to the offending node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentCheck {
    Ok,
    Violation { path: Vec<usize>, reason: String },
}

impl FragmentCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, FragmentCheck::Ok)
    }
}

/// Checks that every operator of `e` is admitted by `f`, including the
/// core restriction on intersection and difference.
pub fn check_fragment(e: &Expr, f: &Fragment) -> FragmentCheck {
    let mut path = Vec::new();
    match walk(e, f, false, &mut path) {
        Ok(()) => FragmentCheck::Ok,
        Err(reason) => FragmentCheck::Violation { path, reason },
    }
}

fn walk(e: &Expr, f: &Fragment, in_bool: bool, path: &mut Vec<usize>) -> std::result::Result<(), String> {
    let deny = |what: &str| Err(format!("{what} is not an operation of {}", f.name));
    match e {
        Expr::Empty | Expr::Eps | Expr::LabelTest(_) => return Ok(()),
        Expr::Down if !f.ops.down => return deny("down"),
        Expr::Up if !f.ops.up => return deny("up"),
        Expr::Down | Expr::Up => return Ok(()),
        Expr::Proj1(_) if !f.ops.proj1 => return deny("p1"),
        Expr::Proj2(_) if !f.ops.proj2 => return deny("p2"),
        Expr::Inverse(_) if !f.ops.inverse => return deny("inv"),
        Expr::Count(k, _) if *k < 1 || *k > f.count_bound => {
            return Err(format!("ch{k} exceeds the counting bound of {}", f.name))
        }
        Expr::Intersect(..) if !f.ops.intersect => return deny("intersection"),
        Expr::Diff(..) if !f.ops.diff => return deny("difference"),
        Expr::Intersect(..) | Expr::Diff(..) if f.core && !in_bool => {
            return Err("intersection or difference outside a projection body".into())
        }
        _ => {}
    }
    let child_bool = match e {
        Expr::Proj1(_) | Expr::Proj2(_) => true,
        Expr::Union(..) | Expr::Intersect(..) | Expr::Diff(..) => in_bool,
        _ => false,
    };
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        walk(c, f, child_bool, path)?;
        path.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(p("up/down - self"), Expr::diff(Expr::comp(Expr::Up, Expr::Down), Expr::Eps));
        assert_eq!(p("p1(down/~b)"), Expr::p1(Expr::comp(Expr::Down, Expr::label("b"))));
        assert_eq!(p("ch2(self)"), Expr::ch(2, Expr::Eps));
        assert!(Expr::parse("ch0(self)").is_err());
        assert!(Expr::parse("up/").is_err());
        assert!(Expr::parse("foo").is_err());
        assert!(Expr::parse("(up").is_err());
        assert!(Expr::parse("up)").is_err());
    }

    #[test]
    fn print_examples() {
        assert_eq!(p("up/down - self").to_string(), "up/down - self");
        assert_eq!(Expr::p1(Expr::Eps).to_string(), "p1(self)");
        let ddd = Expr::comp(Expr::Down, Expr::comp(Expr::Down, Expr::Down));
        assert_eq!(ddd.to_string(), "down/down/down");
        let left = Expr::comp(Expr::comp(Expr::Down, Expr::Up), Expr::Down);
        assert_eq!(left.to_string(), "(down/up)/down");
        assert_eq!(p(&left.to_string()), left);
        let nested = Expr::diff(Expr::Down, Expr::union(Expr::Up, Expr::Eps));
        assert_eq!(nested.to_string(), "down - (up | self)");
        assert_eq!(p("a - b | c".replace(['a', 'b', 'c'], "self").as_str()).to_string(), "self - self | self");
    }

    #[test]
    fn precedence() {
        assert_eq!(p("down/up | self"), Expr::union(Expr::comp(Expr::Down, Expr::Up), Expr::Eps));
        assert_eq!(p("down | up & self"), Expr::inter(Expr::union(Expr::Down, Expr::Up), Expr::Eps));
        assert_eq!(p("~a-b/up"), Expr::comp(Expr::label("a-b"), Expr::Up));
    }

    #[test]
    fn sizes() {
        assert_eq!(p("up/down - self").size(), 5);
        assert_eq!(p("ch3(self)").size(), 2);
        let shared = Arc::new(p("down/down"));
        let e = Expr::Union(shared.clone(), shared);
        assert_eq!(e.size(), 7);
    }

    #[test]
    fn fragment_checks() {
        let core = Fragment::core_xpath(2);
        assert!(!check_fragment(&p("up/down - self"), &core).is_ok());
        assert!(check_fragment(&p("p1(self - p1(down))"), &core).is_ok());
        assert!(check_fragment(&p("p1(self - p1(down) | ~a & self)"), &core).is_ok());
        assert!(!check_fragment(&p("p1(down/(self - up))"), &core).is_ok());
        assert!(!check_fragment(&p("up"), &Fragment::sd(1)).is_ok());
        assert!(!check_fragment(&p("ch2(self)"), &Fragment::sd(1)).is_ok());
        assert!(check_fragment(&p("ch2(self)"), &Fragment::sd(2)).is_ok());
        match check_fragment(&p("down/p1(up)"), &Fragment::sd(1)) {
            FragmentCheck::Violation { path, .. } => assert_eq!(path, vec![1, 0]),
            FragmentCheck::Ok => panic!(),
        }
    }

    #[test]
    fn registry_names() {
        assert_eq!(Fragment::by_name("xpath", None).unwrap(), Fragment::xpath(3));
        assert_eq!(Fragment::by_name("core-xpath", None).unwrap(), Fragment::core_xpath(2));
        assert_eq!(Fragment::by_name("sd(2)", None).unwrap(), Fragment::sd(2));
        assert_eq!(Fragment::by_name("sd", Some(3)).unwrap(), Fragment::sd(3));
        assert!(Fragment::by_name("nope", None).is_err());
        assert!(Fragment::by_name("su(2)", None).is_err());
        for f in Fragment::registry(&[1, 2, 3]) {
            assert_eq!(Fragment::by_name(&f.name, None).unwrap(), f);
        }
    }
}
