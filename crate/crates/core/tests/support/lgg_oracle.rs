//! Reference induction by exhaustive search: every antichain of skeleton
//! positions is tried as the hole set, and the best rule that replays all
//! demonstrations wins. Ranking: most target nodes copied from the source,
//! then fewest holes, then the smallest sorted hole list.

use std::cmp::Reverse;

use sqlmigrate::ast::Path;
use sqlmigrate::baseline::Converter;
use sqlmigrate::engine::{TransformRule, LEARNED_PRIORITY};
use sqlmigrate::induction::{
    assemble, changed_sites, check_replay, cover, ChangedSite, Demonstration, Draft, Skeleton,
};

/// Hole sets are capped to keep the search finite on wide trees.
pub const MAX_ANTICHAINS: usize = 1 << 20;

fn children<'a>(
    candidates: &'a [Path],
    parent: &'a [usize],
) -> impl Iterator<Item = &'a Path> + 'a {
    candidates
        .iter()
        .filter(move |c| c.len() == parent.len() + 1 && c.starts_with(parent))
}

/// All antichains below `parent`, including the empty one.
fn antichains(candidates: &[Path], parent: &[usize]) -> Vec<Vec<Path>> {
    let mut acc: Vec<Vec<Path>> = vec![vec![]];
    for child in children(candidates, parent) {
        let mut options = antichains(candidates, child);
        options.push(vec![child.clone()]);
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for a in &acc {
            for o in &options {
                let mut joined = a.clone();
                joined.extend(o.iter().cloned());
                next.push(joined);
            }
        }
        assert!(next.len() <= MAX_ANTICHAINS, "too many hole sets");
        acc = next;
    }
    acc
}

fn coverage(draft: &Draft, site: &ChangedSite) -> usize {
    match draft {
        Draft::Copy(p) => site.source.get(p).map_or(0, |n| n.node_count()),
        Draft::Node { children, .. } => children.iter().map(|c| coverage(c, site)).sum(),
    }
}

pub fn changed_size(converter: &Converter, demos: &[Demonstration]) -> Option<usize> {
    let sites = changed_sites(converter, demos).ok()?;
    sites
        .iter()
        .map(|s| s.source.node_count().max(s.target.node_count()))
        .max()
}

type Ranked = ((Reverse<usize>, usize, Vec<Path>), TransformRule);

pub fn lgg_oracle(converter: &Converter, demos: &[Demonstration]) -> Result<TransformRule, String> {
    let sites = changed_sites(converter, demos).map_err(|e| e.to_string())?;
    let skeleton = Skeleton::build(&sites).map_err(|e| e.to_string())?;
    let candidates: Vec<Path> = skeleton.candidates().cloned().collect();
    let forced: Vec<Path> = skeleton.forced().cloned().collect();
    let mut best: Option<Ranked> = None;
    for mut holes in antichains(&candidates, &[]) {
        holes.sort();
        if !forced
            .iter()
            .all(|f| holes.iter().any(|h| f.starts_with(h)))
        {
            continue;
        }
        let mut used = Vec::new();
        let Ok(draft) = cover(&sites, &skeleton, &|p| holes.contains(p), &mut used) else {
            continue;
        };
        let rule = assemble(converter, demos, &sites, &holes, &draft, LEARNED_PRIORITY);
        if check_replay(converter, &rule, demos).is_err() {
            continue;
        }
        let key = (Reverse(coverage(&draft, &sites[0])), holes.len(), holes);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, rule));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| "no hole set reproduces the demonstrations".to_string())
}
