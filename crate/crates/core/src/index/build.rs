use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BuildContext, MissingPolicy};
use crate::error::{Error, Result};
use crate::impute::{fill_from_observed, fill_with_mean};
use crate::model::{
    Diagnostic, DiagnosticKind, IndexResult, Method, Polarity, RegionId, RegionScores, Score, SubIndexKind,
    SubIndexScore, ThemeScore, TimeKey, VariableScore, WeightTable,
};
use crate::stats::spatial_percentile;

struct PreparedVar {
    kind: SubIndexKind,
    theme_id: String,
    variable_id: String,
    weight: f64,
    /// Polarity-adjusted values, `[time][region]`.
    values: Vec<Vec<Option<f64>>>,
}

struct PreparedTheme {
    kind: SubIndexKind,
    theme_id: String,
    vars: Vec<usize>,
}

/// Dense, polarity-adjusted view of a build context.
struct Prepared {
    regions: Vec<RegionId>,
    times: Vec<TimeKey>,
    vars: Vec<PreparedVar>,
    themes: Vec<PreparedTheme>,
}

impl Prepared {
    fn new(ctx: &BuildContext, weights: Option<&WeightTable>) -> Prepared {
        let mut regions = BTreeSet::new();
        let mut times = BTreeSet::new();
        for (_, _, var) in ctx.spec.variables() {
            let panel = &ctx.panels[&var.variable_id];
            regions.extend(panel.regions());
            times.extend(panel.time_keys());
        }
        let regions: Vec<RegionId> = regions.into_iter().collect();
        let times: Vec<TimeKey> = times.into_iter().collect();
        let region_idx: BTreeMap<&RegionId, usize> = regions.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let time_idx: BTreeMap<&TimeKey, usize> = times.iter().enumerate().map(|(i, t)| (t, i)).collect();

        let mut vars = Vec::new();
        let mut themes = Vec::new();
        for kind in SubIndexKind::ALL {
            for theme in &ctx.spec.sub_index(kind).themes {
                let mut idxs = Vec::new();
                for var in &theme.variables {
                    let panel = &ctx.panels[&var.variable_id];
                    let mut values = vec![vec![None; regions.len()]; times.len()];
                    for (r, t, v) in panel.iter() {
                        let v = match var.polarity {
                            Polarity::RiskIncreasing => v,
                            Polarity::RiskDecreasing => v.map(|x| -x),
                        };
                        values[time_idx[t]][region_idx[r]] = v;
                    }
                    let weight = weights
                        .and_then(|w| w.get(kind, &theme.theme_id, &var.variable_id))
                        .unwrap_or(1.0);
                    idxs.push(vars.len());
                    vars.push(PreparedVar {
                        kind,
                        theme_id: theme.theme_id.clone(),
                        variable_id: var.variable_id.clone(),
                        weight,
                        values,
                    });
                }
                themes.push(PreparedTheme {
                    kind,
                    theme_id: theme.theme_id.clone(),
                    vars: idxs,
                });
            }
        }
        Prepared {
            regions,
            times,
            vars,
            themes,
        }
    }
}

enum Filler<'a> {
    Propagate,
    Mean,
    Draw(&'a mut ChaCha8Rng),
}

impl Filler<'_> {
    /// Filled row and which entries were filled.
    fn fill(&mut self, row: &[Option<f64>]) -> (Vec<Option<f64>>, Vec<bool>) {
        let filled = match self {
            Filler::Propagate => row.to_vec(),
            Filler::Mean => fill_with_mean(row),
            Filler::Draw(rng) => fill_from_observed(row, *rng),
        };
        let imputed = row.iter().zip(&filled).map(|(a, b)| a.is_none() && b.is_some()).collect();
        (filled, imputed)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Reduce {
    Sum,
    Mean,
}

fn combine(row: &[Option<f64>], weights: &[f64], reduce: Reduce) -> Option<f64> {
    let mut sum = 0.0;
    for (v, w) in row.iter().zip(weights) {
        sum += w * (*v)?;
    }
    Some(match reduce {
        Reduce::Sum => sum,
        Reduce::Mean => sum / row.len() as f64,
    })
}

/// Scores of every region at one time slice.
pub type SliceScores = Vec<RegionScores>;

fn score_slice(
    prep: &Prepared,
    t: usize,
    method: Method,
    filler: &mut Filler,
    diagnostics: &mut Vec<Diagnostic>,
    index_id: &str,
) -> SliceScores {
    let n_regions = prep.regions.len();
    let var_pct: Vec<Vec<Option<f64>>> = prep.vars.iter().map(|v| spatial_percentile(&v.values[t])).collect();
    let usable: Vec<bool> = var_pct.iter().map(|p| p.iter().any(Option::is_some)).collect();

    let mut theme_scores: Vec<Vec<ThemeScore>> = vec![Vec::new(); n_regions];
    let mut sub_raw: [Vec<Option<f64>>; 3] = Default::default();

    for kind in SubIndexKind::ALL {
        let themes: Vec<&PreparedTheme> = prep.themes.iter().filter(|th| th.kind == kind).collect();
        let raw = if method == Method::EqualSum {
            let vars: Vec<usize> = themes.iter().flat_map(|th| th.vars.iter().copied()).collect();
            let ones = vec![1.0; vars.len()];
            (0..n_regions)
                .map(|i| {
                    let row: Vec<Option<f64>> = vars.iter().map(|&v| var_pct[v][i]).collect();
                    combine(&filler.fill(&row).0, &ones, Reduce::Sum)
                })
                .collect()
        } else {
            // Per-theme inner means, re-ranked across regions.
            let mut theme_pcts: Vec<Vec<Option<f64>>> = Vec::new();
            for th in &themes {
                let vars: Vec<usize> = th.vars.iter().copied().filter(|&v| usable[v]).collect();
                if vars.is_empty() {
                    diagnostics.push(Diagnostic::new(
                        DiagnosticKind::ThemeDropped,
                        format!("{index_id} {}: theme `{}` has no usable variable", prep.times[t], th.theme_id),
                    ));
                    for scores in theme_scores.iter_mut() {
                        scores.push(ThemeScore {
                            sub_index: kind,
                            theme_id: th.theme_id.clone(),
                            inner: None,
                            percentile: Score::default(),
                            usable_variables: 0,
                        });
                    }
                    continue;
                }
                let weights: Vec<f64> = vars.iter().map(|&v| prep.vars[v].weight).collect();
                let inner: Vec<Option<f64>> = (0..n_regions)
                    .map(|i| {
                        let row: Vec<Option<f64>> = vars.iter().map(|&v| var_pct[v][i]).collect();
                        combine(&filler.fill(&row).0, &weights, Reduce::Mean)
                    })
                    .collect();
                let pct = spatial_percentile(&inner);
                for (i, scores) in theme_scores.iter_mut().enumerate() {
                    scores.push(ThemeScore {
                        sub_index: kind,
                        theme_id: th.theme_id.clone(),
                        inner: inner[i],
                        percentile: Score::observed(pct[i]),
                        usable_variables: vars.len(),
                    });
                }
                theme_pcts.push(pct);
            }
            if theme_pcts.is_empty() {
                vec![None; n_regions]
            } else {
                let ones = vec![1.0; theme_pcts.len()];
                (0..n_regions)
                    .map(|i| {
                        let row: Vec<Option<f64>> = theme_pcts.iter().map(|p| p[i]).collect();
                        let (filled, imputed) = filler.fill(&row);
                        // Record filled theme percentiles on the region's theme scores.
                        let mut k = 0;
                        for ts in theme_scores[i].iter_mut().filter(|ts| ts.sub_index == kind) {
                            if ts.usable_variables == 0 {
                                continue;
                            }
                            if imputed[k] {
                                ts.percentile = Score {
                                    value: filled[k],
                                    imputed: true,
                                };
                            }
                            k += 1;
                        }
                        combine(&filled, &ones, Reduce::Mean)
                    })
                    .collect()
            }
        };
        sub_raw[kind.ordinal()] = raw;
    }

    let sub_pct: Vec<Vec<Option<f64>>> = sub_raw.iter().map(|s| spatial_percentile(s)).collect();
    let overall_reduce = match method {
        Method::EqualSum => Reduce::Sum,
        _ => Reduce::Mean,
    };

    (0..n_regions)
        .zip(theme_scores)
        .map(|(i, themes)| {
            let row: Vec<Option<f64>> = sub_pct.iter().map(|p| p[i]).collect();
            let (filled, imputed) = filler.fill(&row);
            let overall = combine(&filled, &[1.0; 3], overall_reduce);
            let sub_indices = SubIndexKind::ALL.map(|kind| {
                let k = kind.ordinal();
                SubIndexScore {
                    kind,
                    raw: sub_raw[k][i],
                    percentile: Score {
                        value: filled[k],
                        imputed: imputed[k],
                    },
                }
            });
            let variables = prep
                .vars
                .iter()
                .enumerate()
                .map(|(v, pv)| VariableScore {
                    sub_index: pv.kind,
                    theme_id: pv.theme_id.clone(),
                    variable_id: pv.variable_id.clone(),
                    percentile: var_pct[v][i],
                    weight: if method == Method::Weighted { pv.weight } else { 1.0 },
                    usable: usable[v],
                })
                .collect();
            RegionScores {
                overall,
                sub_indices,
                themes,
                variables,
            }
        })
        .collect()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn mean_of(values: impl Iterator<Item = Option<f64>>, m: usize) -> Option<f64> {
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Some(sum / m as f64)
}

/// Element-wise average of `m` builds of the same slice.
fn average_runs(runs: Vec<SliceScores>) -> SliceScores {
    let m = runs.len();
    let mut iter = runs.into_iter();
    let mut first = iter.next().expect("at least one run");
    if m == 1 {
        return first;
    }
    let rest: Vec<SliceScores> = iter.collect();
    for (i, base) in first.iter_mut().enumerate() {
        let all = || std::iter::once(&*base).chain(rest.iter().map(|r| &r[i]));
        let overall = mean_of(all().map(|s| s.overall), m);
        let subs: Vec<(Option<f64>, Option<f64>, bool)> = (0..3)
            .map(|k| {
                (
                    mean_of(all().map(|s| s.sub_indices[k].raw), m),
                    mean_of(all().map(|s| s.sub_indices[k].percentile.value), m),
                    all().any(|s| s.sub_indices[k].percentile.imputed),
                )
            })
            .collect();
        let themes: Vec<(Option<f64>, Option<f64>, bool)> = (0..base.themes.len())
            .map(|p| {
                (
                    mean_of(all().map(|s| s.themes[p].inner), m),
                    mean_of(all().map(|s| s.themes[p].percentile.value), m),
                    all().any(|s| s.themes[p].percentile.imputed),
                )
            })
            .collect();
        base.overall = overall;
        for (k, (raw, pct, imputed)) in subs.into_iter().enumerate() {
            base.sub_indices[k].raw = raw;
            base.sub_indices[k].percentile = Score { value: pct, imputed };
        }
        for (p, (inner, pct, imputed)) in themes.into_iter().enumerate() {
            base.themes[p].inner = inner;
            base.themes[p].percentile = Score { value: pct, imputed };
        }
    }
    first
}

fn run(ctx: &BuildContext, method: Method, weights: Option<&WeightTable>) -> Result<IndexResult> {
    let weights = if method == Method::Weighted {
        let w = weights.ok_or_else(|| Error::InvalidInput("weighted build needs a weight table".into()))?;
        w.check_covers(&ctx.spec)?;
        Some(w)
    } else {
        None
    };
    let prep = Prepared::new(ctx, weights);
    let mut diagnostics = Vec::new();
    let mut records = BTreeMap::new();
    let index_id = ctx.spec.index_id.as_str();

    for t in 0..prep.times.len() {
        let slice = match ctx.missing_policy {
            MissingPolicy::Propagate => score_slice(&prep, t, method, &mut Filler::Propagate, &mut diagnostics, index_id),
            MissingPolicy::MeanFill => score_slice(&prep, t, method, &mut Filler::Mean, &mut diagnostics, index_id),
            MissingPolicy::MultipleImpute { m, seed } => {
                let runs = (0..m)
                    .map(|j| {
                        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(j as u64) ^ splitmix(!(t as u64))));
                        let mut sink = Vec::new();
                        let diags = if j == 0 { &mut diagnostics } else { &mut sink };
                        score_slice(&prep, t, method, &mut Filler::Draw(&mut rng), diags, index_id)
                    })
                    .collect();
                average_runs(runs)
            }
        };
        for (region, scores) in prep.regions.iter().zip(slice) {
            records.insert((region.clone(), prep.times[t]), scores);
        }
    }

    Ok(IndexResult {
        index_id: ctx.spec.index_id.clone(),
        method,
        level: ctx.level(),
        resolution: ctx.resolution(),
        mortality_category: weights.map(|w| w.mortality_category),
        records,
        diagnostics,
    })
}

/// Builds the index with the method named by the context's spec.
pub fn build_index(ctx: &BuildContext) -> Result<IndexResult> {
    run(ctx, ctx.spec.method, ctx.weights.as_ref())
}

/// Equal-weight rank-sum index, `VI = Σ_k f(S_k)` with `S_k = Σ_n f(x_n)`.
pub fn equal_sum_index(ctx: &BuildContext) -> Result<IndexResult> {
    run(ctx, Method::EqualSum, None)
}

/// Themed index, `VI = mean_k f(S_k)` with `S_k` the mean of re-ranked theme means.
pub fn themed_index(ctx: &BuildContext) -> Result<IndexResult> {
    run(ctx, Method::EqualThemed, None)
}

/// Weighted themed index using `weights` for the inner variable percentiles.
pub fn weighted_index(ctx: &BuildContext, weights: &WeightTable) -> Result<IndexResult> {
    run(ctx, Method::Weighted, Some(weights))
}

fn sub_index_values(result: &IndexResult, kind: SubIndexKind) -> BTreeMap<(RegionId, TimeKey), Option<f64>> {
    result
        .records
        .iter()
        .map(|(k, s)| (k.clone(), s.sub_index(kind).raw))
        .collect()
}

/// `S_k` per (region, time) under the equal-sum method.
pub fn equal_sum_subindex(ctx: &BuildContext, kind: SubIndexKind) -> Result<BTreeMap<(RegionId, TimeKey), Option<f64>>> {
    Ok(sub_index_values(&equal_sum_index(ctx)?, kind))
}

/// `S_k` per (region, time) under the themed method.
pub fn themed_subindex(ctx: &BuildContext, kind: SubIndexKind) -> Result<BTreeMap<(RegionId, TimeKey), Option<f64>>> {
    Ok(sub_index_values(&themed_index(ctx)?, kind))
}

/// `WS_k` per (region, time) under the weighted method.
pub fn weighted_subindex(
    ctx: &BuildContext,
    kind: SubIndexKind,
    weights: &WeightTable,
) -> Result<BTreeMap<(RegionId, TimeKey), Option<f64>>> {
    Ok(sub_index_values(&weighted_index(ctx, weights)?, kind))
}
