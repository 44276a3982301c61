//! Ordered labeled trees in Penn Treebank bracketed notation.
//!
//! A [`SyntaxTree`] is a plain value: a label and an ordered list of
//! children. Leaves carry surface tokens, inner nodes carry constituent or
//! POS labels. Trees produced by an external parser are read with
//! [`parse_bracketed`] and written back with [`to_bracketed`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Label given to the artificial root joining the sentences of a question.
pub const DEFAULT_ROOT_LABEL: &str = "ROOT";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntaxTree {
    label: String,
    children: Vec<SyntaxTree>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree label must not be empty")]
    EmptyLabel,
    #[error("label {0:?} contains whitespace or parentheses")]
    InvalidLabel(String),
    #[error("a macro-tree needs at least one sentence tree")]
    NoSentences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Unbalanced,
    EmptyLabel,
    TrailingInput,
    ExpectedOpenParen,
    EmptyInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Unbalanced => "unbalanced parentheses",
            ParseErrorKind::EmptyLabel => "empty label",
            ParseErrorKind::TrailingInput => "trailing input after tree",
            ParseErrorKind::ExpectedOpenParen => "expected '('",
            ParseErrorKind::EmptyInput => "empty input",
        };
        f.write_str(s)
    }
}

/// Bracketed-tree syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn valid_label(label: &str) -> Result<(), TreeError> {
    if label.is_empty() {
        return Err(TreeError::EmptyLabel);
    }
    if label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
        return Err(TreeError::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl SyntaxTree {
    /// Builds a leaf (a token, or a childless node).
    pub fn leaf(label: impl Into<String>) -> Result<Self, TreeError> {
        Self::node(label, Vec::new())
    }

    pub fn node(label: impl Into<String>, children: Vec<SyntaxTree>) -> Result<Self, TreeError> {
        let label = label.into();
        valid_label(&label)?;
        Ok(Self { label, children })
    }

    /// Caller guarantees the label is valid.
    pub(crate) fn from_parts(label: String, children: Vec<SyntaxTree>) -> Self {
        debug_assert!(valid_label(&label).is_ok());
        Self { label, children }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[SyntaxTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Total number of nodes, leaves included.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(SyntaxTree::node_count).sum::<usize>()
    }

    /// Leaf labels from left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    /// Visits every node in pre-order.
    pub fn any_node(&self, pred: &mut impl FnMut(&SyntaxTree) -> bool) -> bool {
        pred(self) || self.children.iter().any(|c| c.any_node(pred))
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        f.write_str(&self.label)?;
        for c in &self.children {
            f.write_str(" ")?;
            if c.is_leaf() {
                f.write_str(&c.label)?;
            } else {
                fmt::Display::fmt(c, f)?;
            }
        }
        f.write_str(")")
    }
}

/// Node count of a tree, leaves included.
pub fn node_count(tree: &SyntaxTree) -> usize {
    tree.node_count()
}

/// Canonical single-space bracketed form, e.g. `(S (NP (PRP I)) (VP (VBP go)))`.
pub fn to_bracketed(tree: &SyntaxTree) -> String {
    tree.to_string()
}

/// Joins the sentence parses of one question under a fresh root node.
pub fn macro_tree(sentences: &[SyntaxTree], root_label: &str) -> Result<SyntaxTree, TreeError> {
    if sentences.is_empty() {
        return Err(TreeError::NoSentences);
    }
    valid_label(root_label)?;
    Ok(SyntaxTree::from_parts(root_label.to_string(), sentences.to_vec()))
}

/// Parses one bracketed tree. Whitespace between tokens is insignificant.
pub fn parse_bracketed(text: &str) -> Result<SyntaxTree, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    if p.pos == text.len() {
        return Err(p.err(ParseErrorKind::EmptyInput));
    }
    if p.peek() != Some(b'(') {
        return Err(p.err(ParseErrorKind::ExpectedOpenParen));
    }
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    Ok(tree)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, offset: self.pos }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn atom(&mut self) -> &'a str {
        let rest = &self.src[self.pos..];
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    // Iterative so that deep parser output cannot exhaust the stack.
    fn tree(&mut self) -> Result<SyntaxTree, ParseError> {
        let mut stack: Vec<(String, Vec<SyntaxTree>)> = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.err(ParseErrorKind::Unbalanced)),
                Some(b'(') => {
                    self.pos += 1;
                    self.skip_ws();
                    let label = self.atom();
                    if label.is_empty() {
                        return Err(self.err(ParseErrorKind::EmptyLabel));
                    }
                    stack.push((label.to_string(), Vec::new()));
                }
                Some(b')') => {
                    let Some((label, children)) = stack.pop() else {
                        return Err(self.err(ParseErrorKind::Unbalanced));
                    };
                    self.pos += 1;
                    let node = SyntaxTree::from_parts(label, children);
                    match stack.last_mut() {
                        Some((_, siblings)) => siblings.push(node),
                        None => return Ok(node),
                    }
                }
                Some(_) => {
                    let token = self.atom();
                    match stack.last_mut() {
                        Some((_, siblings)) => {
                            siblings.push(SyntaxTree::from_parts(token.to_string(), Vec::new()))
                        }
                        None => return Err(self.err(ParseErrorKind::ExpectedOpenParen)),
                    }
                }
            }
        }
    }
}
