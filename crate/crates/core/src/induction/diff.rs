use serde::{Deserialize, Serialize};

use crate::ast::{structural_equal, AstNode, Path};

/// One edit. Paths and indices refer to the tree as it is when the edit is
/// applied, after all earlier edits of the script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    Replace {
        path: Path,
        old: AstNode,
        new: AstNode,
    },
    Insert {
        path: Path,
        index: usize,
        subtree: AstNode,
    },
    Delete {
        path: Path,
        index: usize,
    },
}

impl Edit {
    /// Deepest node the edit touches: the replaced node, or the parent of an
    /// insertion or deletion.
    pub fn anchor(&self) -> &Path {
        match self {
            Edit::Replace { path, .. } | Edit::Insert { path, .. } | Edit::Delete { path, .. } => {
                path
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffScript {
    pub edits: Vec<Edit>,
}

impl DiffScript {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Longest common prefix of all edit anchors.
    pub fn common_anchor(&self) -> Option<Path> {
        let mut it = self.edits.iter().map(Edit::anchor);
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, p| {
            acc.iter()
                .zip(p)
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| *a)
                .collect()
        }))
    }

    /// Applies the script to `source`. Fails on a path that does not exist.
    pub fn replay(&self, source: &AstNode) -> Result<AstNode, String> {
        let mut tree = source.clone();
        for e in &self.edits {
            let missing = || format!("edit path {:?} not in tree", e.anchor());
            match e {
                Edit::Replace { path, new, .. } => {
                    *tree.get_mut(path).ok_or_else(missing)? = new.clone()
                }
                Edit::Insert {
                    path,
                    index,
                    subtree,
                } => {
                    let node = tree.get_mut(path).ok_or_else(missing)?;
                    if *index > node.children.len() {
                        return Err(missing());
                    }
                    node.children.insert(*index, subtree.clone());
                }
                Edit::Delete { path, index } => {
                    let node = tree.get_mut(path).ok_or_else(missing)?;
                    if *index >= node.children.len() {
                        return Err(missing());
                    }
                    node.children.remove(*index);
                }
            }
        }
        Ok(tree)
    }
}

/// Top-down edit script from `source` to `target`: equal subtrees match,
/// children are aligned by longest common subsequence, and unmatched children
/// between anchors are paired left to right.
pub fn tree_diff(source: &AstNode, target: &AstNode) -> DiffScript {
    let mut script = DiffScript::default();
    diff(source, target, &mut Vec::new(), &mut script.edits);
    script
}

fn diff(a: &AstNode, b: &AstNode, path: &mut Path, out: &mut Vec<Edit>) {
    if structural_equal(a, b) {
        return;
    }
    if a.kind != b.kind || a.token != b.token {
        out.push(Edit::Replace {
            path: path.clone(),
            old: a.clone(),
            new: b.clone(),
        });
        return;
    }
    let anchors = lcs(&a.children, &b.children);
    let (mut i, mut j, mut k) = (0, 0, 0);
    let ends = anchors
        .iter()
        .copied()
        .chain(std::iter::once((a.children.len(), b.children.len())));
    for (ai, bj) in ends {
        while i < ai && j < bj {
            path.push(k);
            diff(&a.children[i], &b.children[j], path, out);
            path.pop();
            i += 1;
            j += 1;
            k += 1;
        }
        while i < ai {
            out.push(Edit::Delete {
                path: path.clone(),
                index: k,
            });
            i += 1;
        }
        while j < bj {
            out.push(Edit::Insert {
                path: path.clone(),
                index: k,
                subtree: b.children[j].clone(),
            });
            j += 1;
            k += 1;
        }
        if ai < a.children.len() {
            i += 1;
            j += 1;
            k += 1;
        }
    }
}

fn lcs(a: &[AstNode], b: &[AstNode]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut t = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i][j] = if structural_equal(&a[i], &b[j]) {
                t[i + 1][j + 1] + 1
            } else {
                t[i + 1][j].max(t[i][j + 1])
            };
        }
    }
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < n && j < m {
        if structural_equal(&a[i], &b[j]) {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if t[i + 1][j] >= t[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}
