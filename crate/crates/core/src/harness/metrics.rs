use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::routing::Algorithm;

/// One routed pair under one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteMetrics {
    pub graph_id: u64,
    pub n: usize,
    pub u: f64,
    pub pair_id: usize,
    pub src: usize,
    pub dst: usize,
    pub algorithm: Algorithm,
    pub delivered: bool,
    pub path_hops: Option<u32>,
    pub preferred_hops: Option<u32>,
    pub total_messages: u64,
    pub causal_latency: Option<u32>,
    pub shortest_planar_hops: u32,
    pub shortest_full_hops: u32,
}

impl RouteMetrics {
    /// Hops a repeat message would take: the preferred path where one is
    /// learned, the delivered path otherwise.
    pub fn repeat_hops(&self) -> Option<u32> {
        self.preferred_hops.or(self.path_hops)
    }
}

/// Smallest number of session messages after which the bi-directional
/// algorithm's total cost is no larger than the single-direction one's.
/// `None` when the preferred path is no shorter.
pub fn break_even(
    messages_bi: u64,
    messages_single: u64,
    hops_single: u64,
    hops_preferred: u64,
) -> Option<u64> {
    if hops_preferred >= hops_single {
        return None;
    }
    let overhead = messages_bi.saturating_sub(messages_single);
    let saving = hops_single - hops_preferred;
    Some(1 + overhead.div_ceil(saving))
}

/// Break-even on averaged figures: the smallest integer `k ≥ 1` for which
/// the same inequality holds.
pub fn break_even_mean(
    messages_bi: f64,
    messages_single: f64,
    hops_single: f64,
    hops_preferred: f64,
) -> Option<f64> {
    if hops_preferred >= hops_single {
        return None;
    }
    let overhead = (messages_bi - messages_single).max(0.0);
    Some(1.0 + (overhead / (hops_single - hops_preferred)).ceil())
}

/// A single-direction algorithm measured against a bi-directional one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub single: Algorithm,
    pub bi: Algorithm,
    /// Also charge the traceback to the bi-directional algorithm's first
    /// message. Session rows already include it.
    pub charge_traceback: bool,
    /// Only count pairs where greedy forwarding hit a local minimum, so
    /// face traversal was used at all.
    pub stuck_only: bool,
}

pub const COMPARISONS: [Comparison; 3] = [
    Comparison {
        single: Algorithm::Face2,
        bi: Algorithm::TwoFace,
        charge_traceback: true,
        stuck_only: false,
    },
    Comparison {
        single: Algorithm::Gfg,
        bi: Algorithm::G2fg,
        charge_traceback: true,
        stuck_only: true,
    },
    Comparison {
        single: Algorithm::Face2,
        bi: Algorithm::Session,
        charge_traceback: false,
        stuck_only: false,
    },
];

/// Paired figures for one routed pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairComparison {
    pub single_hops: u32,
    pub preferred_hops: u32,
    pub single_messages: u64,
    /// First-message cost of the bi-directional side, overhead included.
    pub bi_messages: u64,
    pub break_even_k: Option<u64>,
}

impl PairComparison {
    pub fn new(c: &Comparison, single: &RouteMetrics, bi: &RouteMetrics) -> Option<Self> {
        let single_hops = single.path_hops?;
        let preferred_hops = bi.repeat_hops()?;
        // a single greedy token sends exactly one message per hop
        if c.stuck_only && bi.total_messages <= u64::from(bi.path_hops?) {
            return None;
        }
        let traceback = if c.charge_traceback {
            u64::from(preferred_hops)
        } else {
            0
        };
        let bi_messages = bi.total_messages + traceback;
        Some(PairComparison {
            single_hops,
            preferred_hops,
            single_messages: single.total_messages,
            bi_messages,
            break_even_k: break_even(
                bi_messages,
                single.total_messages,
                u64::from(single_hops),
                u64::from(preferred_hops),
            ),
        })
    }

    pub fn hop_ratio(&self) -> f64 {
        f64::from(self.single_hops) / f64::from(self.preferred_hops.max(1))
    }
}

/// Averages over a set of paired comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    pub pairs: usize,
    pub mean_single_hops: f64,
    pub mean_preferred_hops: f64,
    /// Mean over pairs of single-direction hops over preferred hops.
    pub mean_hop_ratio: f64,
    /// (single − bi) / bi on the mean hop counts.
    pub improvement: f64,
    pub mean_single_messages: f64,
    pub mean_bi_messages: f64,
    /// Mean bi − single first-message cost.
    pub overhead: f64,
    /// Break-even of the mean figures.
    pub break_even_k: Option<f64>,
    /// Mean of per-pair break-even over pairs where it is defined.
    pub mean_pair_break_even_k: Option<f64>,
    pub break_even_defined: usize,
}

impl ComparisonStats {
    pub fn of(pcs: &[PairComparison]) -> Option<Self> {
        if pcs.is_empty() {
            return None;
        }
        let single = mean(pcs.iter().map(|p| f64::from(p.single_hops)))?;
        let pref = mean(pcs.iter().map(|p| f64::from(p.preferred_hops)))?;
        let ms = mean(pcs.iter().map(|p| p.single_messages as f64))?;
        let mb = mean(pcs.iter().map(|p| p.bi_messages as f64))?;
        let ks: Vec<f64> = pcs
            .iter()
            .filter_map(|p| p.break_even_k)
            .map(|k| k as f64)
            .collect();
        Some(ComparisonStats {
            pairs: pcs.len(),
            mean_single_hops: single,
            mean_preferred_hops: pref,
            mean_hop_ratio: mean(pcs.iter().map(PairComparison::hop_ratio))?,
            improvement: if pref > 0.0 {
                (single - pref) / pref
            } else {
                0.0
            },
            mean_single_messages: ms,
            mean_bi_messages: mb,
            overhead: mb - ms,
            break_even_k: break_even_mean(mb, ms, single, pref),
            break_even_defined: ks.len(),
            mean_pair_break_even_k: mean(ks),
        })
    }
}

/// Per-cell summary of one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub u: f64,
    pub single: Algorithm,
    pub bi: Algorithm,
    #[serde(flatten)]
    pub stats: ComparisonStats,
}

/// Per-cell summary of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub n: usize,
    pub u: f64,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub delivered: usize,
    pub mean_path_hops: Option<f64>,
    pub mean_messages: f64,
    pub mean_latency: Option<f64>,
    /// Mean of repeat hops over shortest hops on the routed graph.
    pub mean_stretch: Option<f64>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

type CellKey = (usize, u64);

fn cell_key(m: &RouteMetrics) -> CellKey {
    (m.n, m.u.to_bits())
}

type ByAlgorithm<'a> = BTreeMap<Algorithm, &'a RouteMetrics>;

/// Rows of each (graph, pair) keyed by algorithm, grouped per cell.
fn group(rows: &[RouteMetrics]) -> BTreeMap<CellKey, BTreeMap<(u64, usize), ByAlgorithm<'_>>> {
    let mut out: BTreeMap<_, BTreeMap<_, BTreeMap<_, _>>> = BTreeMap::new();
    for m in rows {
        out.entry(cell_key(m))
            .or_default()
            .entry((m.graph_id, m.pair_id))
            .or_default()
            .insert(m.algorithm, m);
    }
    out
}

/// Paired comparisons of every pair where both algorithms delivered.
pub fn pair_comparisons(rows: &[RouteMetrics], c: &Comparison) -> Vec<PairComparison> {
    group(rows)
        .values()
        .flat_map(|cell| cell.values())
        .filter_map(|by_alg| PairComparison::new(c, by_alg.get(&c.single)?, by_alg.get(&c.bi)?))
        .collect()
}

/// Comparison figures pooled over every row.
pub fn pooled(rows: &[RouteMetrics], c: &Comparison) -> Option<ComparisonStats> {
    ComparisonStats::of(&pair_comparisons(rows, c))
}

pub fn aggregate(rows: &[RouteMetrics]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for ((n, u_bits), cell) in group(rows) {
        for c in &COMPARISONS {
            let pcs: Vec<PairComparison> = cell
                .values()
                .filter_map(|by_alg| {
                    PairComparison::new(c, by_alg.get(&c.single)?, by_alg.get(&c.bi)?)
                })
                .collect();
            if let Some(stats) = ComparisonStats::of(&pcs) {
                out.push(AggregateRow {
                    n,
                    u: f64::from_bits(u_bits),
                    single: c.single,
                    bi: c.bi,
                    stats,
                });
            }
        }
    }
    out
}

pub fn summarize(rows: &[RouteMetrics]) -> Vec<AlgorithmSummary> {
    let mut by: BTreeMap<(CellKey, Algorithm), Vec<&RouteMetrics>> = BTreeMap::new();
    for m in rows {
        by.entry((cell_key(m), m.algorithm)).or_default().push(m);
    }
    by.into_iter()
        .map(|(((n, u_bits), algorithm), ms)| {
            let on_full = algorithm.uses_full_graph();
            AlgorithmSummary {
                n,
                u: f64::from_bits(u_bits),
                algorithm,
                runs: ms.len(),
                delivered: ms.iter().filter(|m| m.delivered).count(),
                mean_path_hops: mean(ms.iter().filter_map(|m| m.path_hops).map(f64::from)),
                mean_messages: mean(ms.iter().map(|m| m.total_messages as f64)).unwrap_or(0.0),
                mean_latency: mean(ms.iter().filter_map(|m| m.causal_latency).map(f64::from)),
                mean_stretch: mean(ms.iter().filter_map(|m| {
                    let short = if on_full {
                        m.shortest_full_hops
                    } else {
                        m.shortest_planar_hops
                    };
                    Some(f64::from(m.repeat_hops()?) / f64::from(short.max(1)))
                })),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn break_even_examples() {
        assert_eq!(break_even(50, 50, 10, 10), None);
        assert_eq!(break_even(40, 20, 15, 5), Some(3));
        // cheaper from the first message
        assert_eq!(break_even(10, 20, 15, 5), Some(1));
        assert_eq!(break_even(30, 20, 10, 12), None);
    }

    #[test]
    fn break_even_is_the_crossover() {
        for mb in 0..60u64 {
            for ms in 0..30u64 {
                for hs in 1..12u64 {
                    for hp in 0..hs {
                        let k = break_even(mb, ms, hs, hp).unwrap();
                        let cost = |k: u64, m: u64, h: u64| m + (k - 1) * h;
                        assert!(cost(k, mb, hp) <= cost(k, ms, hs));
                        assert!(k == 1 || cost(k - 1, mb, hp) > cost(k - 1, ms, hs));
                    }
                }
            }
        }
    }
}
