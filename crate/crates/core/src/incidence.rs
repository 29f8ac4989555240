//! Checks shared by point–line geometries and clique covers: both are
//! families of blocks over a vertex set with a vertex → blocks index.

use rayon::prelude::*;

pub(crate) trait BlockSystem: Sync {
    fn num_points(&self) -> usize;
    fn num_blocks(&self) -> usize;
    /// Sorted member ids of block `b`.
    fn block(&self, b: usize) -> &[u32];
    /// Sorted ids of the blocks containing `v`.
    fn blocks_of(&self, v: usize) -> &[u32];
}

/// Two points lying together in two distinct blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct RepeatedPair {
    pub points: [u32; 2],
    pub blocks: [u32; 2],
}

/// Three points pairwise joined by three distinct blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct BlockTriangle {
    pub points: [u32; 3],
    pub blocks: [u32; 3],
}

const UNSET: u32 = u32::MAX;

/// Least point (by id) that shares two blocks with some other point.
pub(crate) fn find_repeated_pair<S: BlockSystem>(sys: &S) -> (Option<RepeatedPair>, u64) {
    let n = sys.num_points();
    let found = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![UNSET; n], vec![UNSET; n]),
            |(stamp, via), v| {
                let mut work = 0u64;
                for &b in sys.blocks_of(v) {
                    for &w in sys.block(b as usize) {
                        work += 1;
                        if w as usize == v {
                            continue;
                        }
                        if stamp[w as usize] == v as u32 {
                            let hit = RepeatedPair {
                                points: [v as u32, w],
                                blocks: [via[w as usize], b],
                            };
                            return (Some(hit), work);
                        }
                        stamp[w as usize] = v as u32;
                        via[w as usize] = b;
                    }
                }
                (None, work)
            },
        )
        .collect::<Vec<_>>();
    let work = found.iter().map(|r| r.1).sum();
    (found.into_iter().find_map(|r| r.0), work)
}

/// Looks for a vertex outside block K that is joined to two members of K.
/// With no repeated pairs this is exactly a triangle of three distinct blocks.
/// Cost is Σ_K |K| · (blocks per member) · |block|, i.e. O(n q³) for W(q).
pub(crate) fn find_block_triangle<S: BlockSystem>(sys: &S) -> (Option<BlockTriangle>, u64) {
    let n = sys.num_points();
    let results = (0..sys.num_blocks())
        .into_par_iter()
        .map_init(
            || Scratch {
                inside: vec![UNSET; n],
                stamp: vec![UNSET; n],
                from: vec![(UNSET, UNSET); n],
            },
            |s, k| triangle_through_block(sys, k, s),
        )
        .collect::<Vec<_>>();
    let work = results.iter().map(|r| r.1).sum();
    (results.into_iter().find_map(|r| r.0), work)
}

struct Scratch {
    inside: Vec<u32>,
    stamp: Vec<u32>,
    from: Vec<(u32, u32)>,
}

fn triangle_through_block<S: BlockSystem>(
    sys: &S,
    k: usize,
    s: &mut Scratch,
) -> (Option<BlockTriangle>, u64) {
    let members = sys.block(k);
    let tag = k as u32;
    for &m in members {
        s.inside[m as usize] = tag;
    }
    let mut work = 0u64;
    for &b in members {
        for &k1 in sys.blocks_of(b as usize) {
            if k1 as usize == k {
                continue;
            }
            for &a in sys.block(k1 as usize) {
                work += 1;
                let ai = a as usize;
                if a == b || s.inside[ai] == tag {
                    continue;
                }
                if s.stamp[ai] == tag {
                    let (b_prev, k_prev) = s.from[ai];
                    if b_prev != b {
                        let hit = BlockTriangle {
                            points: [a, b_prev, b],
                            blocks: [k_prev, tag, k1],
                        };
                        return (Some(hit), work);
                    }
                } else {
                    s.stamp[ai] = tag;
                    s.from[ai] = (b, k1);
                }
            }
        }
    }
    (None, work)
}
