//! The line-oriented document format.
//!
//! Each line is `key arg...`; children are indented two spaces deeper than
//! their parent. `#` starts a comment line. Arguments are identifiers,
//! nonnegative or negative integers, or rationals `p/q`. There are no floats.

use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Schema(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> DocError {
    DocError::Syntax { line, msg: msg.into() }
}

pub fn schema(msg: impl Into<String>) -> DocError {
    DocError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub key: String,
    pub args: Vec<String>,
    pub children: Vec<Node>,
}

impl Node {
    pub fn new(key: impl Into<String>) -> Self {
        Node { key: key.into(), args: Vec::new(), children: Vec::new() }
    }

    pub fn arg(mut self, a: impl ToString) -> Self {
        self.args.push(a.to_string());
        self
    }

    pub fn args<I: IntoIterator<Item = T>, T: ToString>(mut self, items: I) -> Self {
        self.args.extend(items.into_iter().map(|a| a.to_string()));
        self
    }

    pub fn child(mut self, n: Node) -> Self {
        self.children.push(n);
        self
    }

    /// Children with the given key.
    pub fn all<'a>(&'a self, key: &str) -> impl Iterator<Item = &'a Node> + 'a {
        let key = key.to_string();
        self.children.iter().filter(move |c| c.key == key)
    }

    /// The single child with the given key, if any.
    pub fn one(&self, key: &str) -> Result<Option<&Node>, DocError> {
        let mut it = self.all(key);
        let first = it.next();
        if it.next().is_some() {
            return Err(schema(format!("`{}` has more than one `{key}`", self.key)));
        }
        Ok(first)
    }

    pub fn require(&self, key: &str) -> Result<&Node, DocError> {
        self.one(key)?.ok_or_else(|| schema(format!("`{}` needs a `{key}` entry", self.key)))
    }

    /// Rejects children whose key is not listed.
    pub fn only(&self, keys: &[&str]) -> Result<(), DocError> {
        match self.children.iter().find(|c| !keys.contains(&c.key.as_str())) {
            Some(c) => Err(schema(format!("unknown key `{}` under `{}`", c.key, self.key))),
            None => Ok(()),
        }
    }

    pub fn arity(&self, n: usize) -> Result<(), DocError> {
        if self.args.len() != n {
            return Err(schema(format!("`{}` takes {n} argument(s), got {}", self.key, self.args.len())));
        }
        Ok(())
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&self.key);
        for a in &self.args {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
        for c in &self.children {
            c.render_into(depth + 1, out);
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_into(0, &mut s);
        f.write_str(&s)
    }
}

fn valid_token(t: &str) -> bool {
    let ident = t.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    let int = |s: &str| {
        let s = s.strip_prefix('-').unwrap_or(s);
        !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
    };
    let rational = match t.split_once('/') {
        Some((p, q)) => int(p) && !q.is_empty() && q.chars().all(|c| c.is_ascii_digit()),
        None => false,
    };
    ident || int(t) || rational
}

pub fn parse(text: &str) -> Result<Vec<Node>, DocError> {
    // (depth, node) stack of open nodes
    let mut stack: Vec<(usize, Node)> = Vec::new();
    let mut roots = Vec::new();
    fn close(stack: &mut Vec<(usize, Node)>, roots: &mut Vec<Node>, depth: usize) {
        while stack.last().is_some_and(|(d, _)| *d >= depth) {
            let (_, n) = stack.pop().expect("nonempty");
            match stack.last_mut() {
                Some((_, parent)) => parent.children.push(n),
                None => roots.push(n),
            }
        }
    }
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        // `#` starts a comment anywhere; no token may contain it
        let raw = raw.split_once('#').map_or(raw, |(body, _)| body);
        let trimmed = raw.trim_start_matches(' ');
        if trimmed.trim().is_empty() {
            continue;
        }
        if trimmed.starts_with('\t') || raw.contains('\t') {
            return Err(syntax(line, "tabs are not allowed"));
        }
        let indent = raw.len() - trimmed.len();
        if indent % 2 != 0 {
            return Err(syntax(line, "indentation must be a multiple of two spaces"));
        }
        let depth = indent / 2;
        let parent_depth = stack.last().map(|(d, _)| *d);
        if depth > parent_depth.map_or(0, |d| d + 1) {
            return Err(syntax(line, "indented too deeply"));
        }
        close(&mut stack, &mut roots, depth);
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().expect("nonblank line");
        if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || !key.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(syntax(line, format!("bad key `{key}`")));
        }
        let args: Vec<String> = parts.map(str::to_string).collect();
        if let Some(bad) = args.iter().find(|a| !valid_token(a)) {
            let hint = if bad.contains('.') { " (write rationals as p/q)" } else { "" };
            return Err(syntax(line, format!("bad argument `{bad}`{hint}")));
        }
        stack.push((depth, Node { key: key.to_string(), args, children: Vec::new() }));
    }
    close(&mut stack, &mut roots, 0);
    Ok(roots)
}

pub fn render(nodes: &[Node]) -> String {
    let mut out = String::new();
    for n in nodes {
        write!(out, "{n}").expect("string write");
    }
    out
}
