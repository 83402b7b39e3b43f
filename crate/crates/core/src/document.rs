//! Unordered node-labeled trees with preorder node ids.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Dense node identifier; node 0 is always the root.
pub type NodeId = usize;

/// `T1 = (a (b (c) (c)) (b (c)) (d))`.
pub const T1: &str = "(a (b (c) (c)) (b (c)) (d))";
/// `D2 = (x (x) (x))`.
pub const D2: &str = "(x (x) (x))";
/// `D3 = (x (x (x (x)) (x)) (x (x (x))))`.
pub const D3: &str = "(x (x (x (x)) (x)) (x (x (x))))";

/// Characters that may not occur inside a label token.
pub(crate) fn is_label_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '#' | '/')
}

/// A node label: a nonempty token without whitespace or `( ) # /`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(token: &str) -> Result<Label> {
        if token.is_empty() || !token.chars().all(is_label_char) {
            return Err(Error::InvalidLabel(token.to_string()));
        }
        Ok(Label(Arc::from(token)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Structure queries answered by [`Document::structure_query`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureQuery {
    Depth,
    Height,
    AncestorAt(usize),
    IsRoot,
}

/// Answer to a [`StructureQuery`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureAnswer {
    Int(usize),
    Node(NodeId),
    Flag(bool),
}

/// A document `(V, Ed, r, λ)`. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Document {
    labels: Vec<Label>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    height: Vec<usize>,
    by_label: BTreeMap<Label, Vec<NodeId>>,
}

impl Document {
    /// Parses the s-expression form `tree := "(" label tree* ")"`.
    pub fn parse(text: &str) -> Result<Document> {
        Parser::new(text).document()
    }

    /// Builds a document from a parent array given in preorder
    /// (`parent[0]` is `None`, every other parent precedes its child).
    pub fn from_parents(labels: Vec<Label>, parent: Vec<Option<NodeId>>) -> Result<Document> {
        if labels.is_empty() || labels.len() != parent.len() {
            return Err(Error::Syntax { pos: 0, msg: "empty or inconsistent parent array".into() });
        }
        if parent[0].is_some() {
            return Err(Error::Syntax { pos: 0, msg: "node 0 must be the root".into() });
        }
        let n = labels.len();
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate().skip(1) {
            match *p {
                Some(p) if p < v => children[p].push(v),
                _ => return Err(Error::Syntax { pos: v, msg: "parent must precede child".into() }),
            }
        }
        // Preorder check: each child's subtree is a contiguous run after its parent.
        let doc = Document::assemble(labels, parent, children);
        let mut order = Vec::with_capacity(n);
        doc.preorder(0, &mut order);
        if order.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Syntax { pos: 0, msg: "node ids are not in preorder".into() });
        }
        Ok(doc)
    }

    fn assemble(labels: Vec<Label>, parent: Vec<Option<NodeId>>, children: Vec<Vec<NodeId>>) -> Document {
        let n = labels.len();
        let mut depth = vec![0; n];
        for v in 1..n {
            depth[v] = depth[parent[v].unwrap()] + 1;
        }
        let mut height = vec![0; n];
        for v in (0..n).rev() {
            if let Some(p) = parent[v] {
                height[p] = height[p].max(height[v] + 1);
            }
        }
        let mut by_label: BTreeMap<Label, Vec<NodeId>> = BTreeMap::new();
        for (v, l) in labels.iter().enumerate() {
            by_label.entry(l.clone()).or_default().push(v);
        }
        Document { labels, parent, children, depth, height, by_label }
    }

    fn preorder(&self, v: NodeId, out: &mut Vec<NodeId>) {
        out.push(v);
        for &c in &self.children[v] {
            self.preorder(c, out);
        }
    }

    /// Serializes back to the s-expression form, children in id order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_node(0, &mut out);
        out
    }

    fn write_node(&self, v: NodeId, out: &mut String) {
        out.push('(');
        out.push_str(self.labels[v].as_str());
        for &c in &self.children[v] {
            out.push(' ');
            self.write_node(c, out);
        }
        out.push(')');
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.len()
    }

    pub fn check(&self, v: NodeId) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidNode { node: v, len: self.len() })
        }
    }

    pub fn label(&self, v: NodeId) -> &Label {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn height(&self, v: NodeId) -> usize {
        self.height[v]
    }

    pub fn is_root(&self, v: NodeId) -> bool {
        v == 0
    }

    /// The ancestor `i` parent steps above `v`; `ancestor_at(v, 0) = v`.
    pub fn ancestor_at(&self, v: NodeId, i: usize) -> Result<NodeId> {
        self.check(v)?;
        if i > self.depth[v] {
            return Err(Error::AncestorOutOfRange { node: v, offset: i, depth: self.depth[v] });
        }
        Ok(self.ancestor_unchecked(v, i))
    }

    pub(crate) fn ancestor_unchecked(&self, mut v: NodeId, i: usize) -> NodeId {
        for _ in 0..i {
            v = self.parent[v].expect("offset within depth");
        }
        v
    }

    /// The root path `r = a_0, ..., a_d = v`.
    pub fn root_path(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = Vec::with_capacity(self.depth[v] + 1);
        let mut u = Some(v);
        while let Some(x) = u {
            path.push(x);
            u = self.parent[x];
        }
        path.reverse();
        path
    }

    /// True if `a` is an ancestor of `d` or equal to it.
    pub fn is_ancestor_or_self(&self, a: NodeId, d: NodeId) -> bool {
        self.depth[d] >= self.depth[a] && self.ancestor_unchecked(d, self.depth[d] - self.depth[a]) == a
    }

    /// Least common ancestor.
    pub fn lca(&self, mut v: NodeId, mut w: NodeId) -> NodeId {
        while self.depth[v] > self.depth[w] {
            v = self.parent[v].unwrap();
        }
        while self.depth[w] > self.depth[v] {
            w = self.parent[w].unwrap();
        }
        while v != w {
            v = self.parent[v].unwrap();
            w = self.parent[w].unwrap();
        }
        v
    }

    /// Nodes carrying label `l` (empty if the label does not occur).
    pub fn nodes_with_label(&self, l: &Label) -> &[NodeId] {
        self.by_label.get(l).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The labels occurring in the document, sorted.
    pub fn alphabet(&self) -> Vec<Label> {
        self.by_label.keys().cloned().collect()
    }

    pub fn structure_query(&self, v: NodeId, q: StructureQuery) -> Result<StructureAnswer> {
        self.check(v)?;
        Ok(match q {
            StructureQuery::Depth => StructureAnswer::Int(self.depth[v]),
            StructureQuery::Height => StructureAnswer::Int(self.height[v]),
            StructureQuery::AncestorAt(i) => StructureAnswer::Node(self.ancestor_at(v, i)?),
            StructureQuery::IsRoot => StructureAnswer::Flag(self.is_root(v)),
        })
    }

    /// Descendants of `v` (excluding `v`), a contiguous preorder range.
    pub fn descendants(&self, v: NodeId) -> std::ops::Range<NodeId> {
        let mut end = v + 1;
        while end < self.len() && self.depth[end] > self.depth[v] {
            end += 1;
        }
        v + 1..end
    }
}

impl fmt::Debug for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Document({})", self.serialize())
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl std::str::FromStr for Document {
    type Err = Error;
    fn from_str(s: &str) -> Result<Document> {
        Document::parse(s)
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn document(mut self) -> Result<Document> {
        self.skip_ws();
        if self.peek().is_none() {
            return self.err("empty input");
        }
        let mut labels = Vec::new();
        let mut parent = Vec::new();
        let mut children = Vec::new();
        self.tree(None, &mut labels, &mut parent, &mut children)?;
        self.skip_ws();
        if self.peek().is_some() {
            return self.err("more than one top-level tree");
        }
        Ok(Document::assemble(labels, parent, children))
    }

    fn tree(
        &mut self,
        up: Option<NodeId>,
        labels: &mut Vec<Label>,
        parent: &mut Vec<Option<NodeId>>,
        children: &mut Vec<Vec<NodeId>>,
    ) -> Result<()> {
        self.skip_ws();
        if self.peek() != Some('(') {
            return self.err("expected '('");
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let len: usize = self.text[start..].chars().take_while(|&c| is_label_char(c)).map(char::len_utf8).sum();
        if len == 0 {
            return self.err("expected label");
        }
        self.pos += len;
        let v = labels.len();
        labels.push(Label(Arc::from(&self.text[start..start + len])));
        parent.push(up);
        children.push(Vec::new());
        if let Some(p) = up {
            children[p].push(v);
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some('(') => self.tree(Some(v), labels, parent, children)?,
                Some(')') => {
                    self.pos += 1;
                    return Ok(());
                }
                None => return self.err("unexpected end of input"),
                Some(_) => return self.err("expected '(' or ')'"),
            }
        }
    }
}
