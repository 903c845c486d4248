//! Named method catalogue: every identifier maps to a method plus a parameter binding, with
//! `key=value` overrides checked against the method's own parameter list.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{RankError, Result};
use crate::evalproto::Ranker;
use crate::graph::{
    self, EdgeWeight, HodgeOptions, NashScore, PairwiseStat, RankCentralityOptions, SerialComparison,
    TieHandling,
};
use crate::irt::{self, DynamicOptions, DynamicVariant, IrtModel, JmleOptions, MmlOptions};
use crate::mc::{self, McmcOptions, ThompsonOptions};
use crate::metrics;
use crate::paired::{self, DavidsonLuceOptions, DavidsonOptions, Estimation, MmOptions, PairedOptions};
use crate::ranking::{Ranking, ScoreVector, TieRule, Warning, WarningKind};
use crate::rating::{self, EloOptions, GlickoOptions, TiePolicy, TrueSkillOptions};
use crate::tensor::{pairwise_counts, setwise_events, PriorOutcomes, ResponseTensor};
use crate::voting::{self, Strength, VoteTiePolicy};

/// The default catalogue, in reporting order.
pub const METHOD_IDS: [&str; 72] = [
    "avg",
    "pass_at_k_2",
    "pass_hat_k_2",
    "mg_pass_at_k_2",
    "bayes",
    "bayes_greedy",
    "bayes_ci",
    "inverse_difficulty",
    "elo_tie_skip",
    "elo_tie_draw",
    "elo_tie_correct_draw_only",
    "glicko_tie_skip",
    "glicko_tie_draw",
    "glicko_tie_correct_draw_only",
    "trueskill",
    "bradley_terry",
    "bradley_terry_map",
    "bradley_terry_davidson",
    "bradley_terry_davidson_map",
    "rao_kupper",
    "rao_kupper_map",
    "thompson",
    "bayesian_mcmc",
    "plackett_luce",
    "plackett_luce_map",
    "bradley_terry_luce",
    "bradley_terry_luce_map",
    "borda",
    "copeland",
    "win_rate",
    "minimax_variant_margin_tie_ignore",
    "minimax_variant_margin_tie_half",
    "minimax_variant_winning_votes_tie_ignore",
    "minimax_variant_winning_votes_tie_half",
    "schulze_tie_ignore",
    "schulze_tie_half",
    "ranked_pairs_strength_margin_tie_ignore",
    "ranked_pairs_strength_margin_tie_half",
    "ranked_pairs_strength_winning_votes_tie_ignore",
    "ranked_pairs_strength_winning_votes_tie_half",
    "kemeny_young_tie_ignore",
    "kemeny_young_tie_half",
    "nanson_rank_ties_average",
    "nanson_rank_ties_max",
    "baldwin_rank_ties_average",
    "baldwin_rank_ties_max",
    "majority_judgment",
    "rasch",
    "rasch_map",
    "rasch_2pl",
    "rasch_2pl_map",
    "rasch_3pl",
    "rasch_3pl_map",
    "rasch_mml",
    "rasch_mml_credible",
    "dynamic_irt_linear",
    "dynamic_irt_growth",
    "pagerank",
    "spectral",
    "alpharank",
    "nash_vs_equilibrium",
    "nash_advantage_vs_equilibrium",
    "rank_centrality_tie_ignore",
    "rank_centrality_tie_half",
    "serial_rank_prob_diff",
    "serial_rank_sign",
    "hodge_rank_binary_total",
    "hodge_rank_binary_decisive",
    "hodge_rank_binary_uniform",
    "hodge_rank_log_odds_total",
    "hodge_rank_log_odds_decisive",
    "hodge_rank_log_odds_uniform",
];

/// Resolvable identifiers outside the default catalogue.
pub const EXTRA_IDS: [&str; 3] = ["g_pass_at_k_tau", "davidson_luce", "davidson_luce_map"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Metric,
    PairwiseRating,
    Probabilistic,
    Voting,
    Irt,
    GraphGame,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Metric => "metric",
            Family::PairwiseRating => "pairwise_rating",
            Family::Probabilistic => "probabilistic",
            Family::Voting => "voting",
            Family::Irt => "irt",
            Family::GraphGame => "graph_game",
        }
    }
}

pub fn family_of(id: &str) -> Option<Family> {
    let f = match id {
        "avg" | "pass_at_k_2" | "pass_hat_k_2" | "mg_pass_at_k_2" | "g_pass_at_k_tau" | "bayes"
        | "bayes_greedy" | "bayes_ci" | "inverse_difficulty" => Family::Metric,
        _ if id.starts_with("elo_") || id.starts_with("glicko_") || id == "trueskill" => {
            Family::PairwiseRating
        }
        _ if id.starts_with("bradley_terry")
            || id.starts_with("rao_kupper")
            || id.starts_with("plackett_luce")
            || id.starts_with("davidson_luce")
            || id == "thompson"
            || id == "bayesian_mcmc" =>
        {
            Family::Probabilistic
        }
        _ if id.starts_with("rasch") || id.starts_with("dynamic_irt") => Family::Irt,
        "pagerank" | "spectral" | "alpharank" => Family::GraphGame,
        _ if id.starts_with("nash_")
            || id.starts_with("rank_centrality")
            || id.starts_with("serial_rank")
            || id.starts_with("hodge_rank") =>
        {
            Family::GraphGame
        }
        "borda" | "copeland" | "win_rate" | "majority_judgment" => Family::Voting,
        _ if id.starts_with("minimax_")
            || id.starts_with("schulze_")
            || id.starts_with("ranked_pairs_")
            || id.starts_with("kemeny_young_")
            || id.starts_with("nanson_")
            || id.starts_with("baldwin_") =>
        {
            Family::Voting
        }
        _ => return None,
    };
    METHOD_IDS
        .iter()
        .chain(EXTRA_IDS.iter())
        .any(|&m| m == id)
        .then_some(f)
}

/// Tunable parameters and their defaults. Choices encoded in the identifier itself (tie
/// handling, variants) are not overridable.
fn default_params(id: &str) -> Vec<(&'static str, &'static str)> {
    const MAP: (&str, &str) = ("prior", "1.0");
    const ITER: (&str, &str) = ("max_iter", "500");
    match id {
        "pass_at_k_2" | "pass_hat_k_2" | "mg_pass_at_k_2" => vec![("k", "2")],
        "g_pass_at_k_tau" => vec![("k", "2"), ("tau", "0.5")],
        "bayes" => vec![("quantile", "none")],
        "bayes_ci" => vec![("quantile", "0.05")],
        "inverse_difficulty" => vec![("clip_low", "0.01"), ("clip_high", "0.99")],
        _ if id.starts_with("elo_") => vec![("k", "0.05"), ("initial_rating", "1500.0")],
        _ if id.starts_with("glicko_") => vec![
            ("initial_rating", "1500.0"),
            ("initial_rd", "350.0"),
            ("c", "0.0"),
            ("rd_max", "350.0"),
        ],
        "trueskill" => vec![
            ("mu_initial", "25.0"),
            ("sigma_initial", "8.333333333333334"),
            ("beta", "4.166666666666667"),
            ("tau", "0.00333333333"),
            ("tau_per_match", "false"),
        ],
        "bradley_terry" | "bradley_terry_davidson" | "bradley_terry_luce" | "davidson_luce" => vec![ITER],
        "bradley_terry_map"
        | "bradley_terry_davidson_map"
        | "bradley_terry_luce_map"
        | "davidson_luce_map"
        | "plackett_luce_map" => vec![MAP, ITER],
        "rao_kupper" => vec![("tie_strength", "1.1"), ITER],
        "rao_kupper_map" => vec![("tie_strength", "1.1"), MAP, ITER],
        "plackett_luce" => vec![ITER, ("tol", "1e-08")],
        "thompson" => vec![
            ("n_samples", "10000"),
            ("prior_alpha", "1.0"),
            ("prior_beta", "1.0"),
            ("seed", "42"),
        ],
        "bayesian_mcmc" => vec![
            ("n_samples", "5000"),
            ("burnin", "1000"),
            ("prior_var", "1.0"),
            ("seed", "42"),
            ("proposal_std", "0.1"),
        ],
        _ if id.starts_with("kemeny_young_") => vec![("max_exact", "16")],
        "rasch" | "rasch_2pl" => vec![ITER],
        "rasch_map" | "rasch_2pl_map" => vec![MAP, ITER],
        "rasch_3pl" => vec![ITER, ("fix_guessing", "none")],
        "rasch_3pl_map" => vec![MAP, ITER, ("fix_guessing", "none")],
        "rasch_mml" => vec![("max_iter", "100"), ("em_iter", "20"), ("n_quadrature", "21")],
        "rasch_mml_credible" => vec![
            ("quantile", "0.05"),
            ("max_iter", "100"),
            ("em_iter", "20"),
            ("n_quadrature", "21"),
        ],
        "dynamic_irt_linear" | "dynamic_irt_growth" => vec![ITER, ("slope_penalty", "1.0")],
        "pagerank" => vec![("damping", "0.85")],
        "spectral" => vec![("max_iter", "10000"), ("tol", "1e-12")],
        "alpharank" => vec![("alpha", "1.0"), ("population_size", "50")],
        _ if id.starts_with("rank_centrality") => vec![("smoothing", "0.0"), ("teleport", "0.0")],
        _ if id.starts_with("hodge_rank_log_odds") => vec![("epsilon", "0.5")],
        _ => vec![],
    }
}

struct Params<'a> {
    id: &'a str,
    map: &'a BTreeMap<String, String>,
}

impl Params<'_> {
    fn raw(&self, key: &str) -> &str {
        self.map.get(key).map(String::as_str).unwrap_or_default()
    }

    fn bad(&self, key: &str, what: &str) -> RankError {
        RankError::config(format!(
            "parameter `{key}` of `{}` must be {what}, got `{}`",
            self.id,
            self.raw(key)
        ))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.raw(key)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.bad(key, "a finite number"))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            "none" | "None" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.raw(key)
            .parse::<usize>()
            .map_err(|_| self.bad(key, "a non-negative integer"))
    }

    fn u64(&self, key: &str) -> Result<u64> {
        self.raw(key)
            .parse::<u64>()
            .map_err(|_| self.bad(key, "a non-negative integer"))
    }

    fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "True" | "1" => Ok(true),
            "false" | "False" | "0" => Ok(false),
            _ => Err(self.bad(key, "true or false")),
        }
    }

    fn paired(&self, map: bool) -> Result<PairedOptions> {
        let estimation = if map {
            Estimation::Map {
                prior_var: self.f64("prior")?,
            }
        } else {
            Estimation::Ml
        };
        Ok(PairedOptions {
            estimation,
            max_iter: self.usize("max_iter")?,
        })
    }
}

/// Fully parsed method configuration.
enum Variant {
    Avg,
    InverseDifficulty(f64, f64),
    PassAtK(usize),
    PassHatK(usize),
    MgPassAtK(usize),
    GPassAtKTau(usize, f64),
    Bayes(Option<f64>),
    BayesGreedy,
    Elo(EloOptions),
    Glicko(GlickoOptions),
    TrueSkill(TrueSkillOptions),
    BradleyTerry(PairedOptions),
    Davidson(DavidsonOptions),
    RaoKupper(f64, PairedOptions),
    Thompson(ThompsonOptions),
    Mcmc(McmcOptions),
    PlackettLuce(MmOptions),
    PlackettLuceMap(f64, usize),
    Btl(PairedOptions),
    DavidsonLuce(DavidsonLuceOptions),
    Borda,
    Copeland,
    WinRate,
    Minimax(Strength, VoteTiePolicy),
    Schulze(VoteTiePolicy),
    RankedPairs(Strength, VoteTiePolicy),
    Kemeny(VoteTiePolicy, usize),
    Nanson(TieRule),
    Baldwin(TieRule),
    MajorityJudgment,
    Jmle(JmleOptions),
    Mml(MmlOptions),
    Dynamic(DynamicOptions),
    PageRank(f64),
    Spectral(usize, f64),
    AlphaRank(f64, usize),
    Nash(NashScore),
    RankCentrality(RankCentralityOptions),
    Serial(SerialComparison),
    Hodge(HodgeOptions),
}

fn tie_suffix(id: &str) -> Result<VoteTiePolicy> {
    id.rsplit("_tie_").next().unwrap_or_default().parse()
}

fn build_variant(id: &str, p: &Params) -> Result<Variant> {
    use Variant::*;
    let variant = match id {
        "avg" => Avg,
        "inverse_difficulty" => InverseDifficulty(p.f64("clip_low")?, p.f64("clip_high")?),
        "pass_at_k_2" => PassAtK(p.usize("k")?),
        "pass_hat_k_2" => PassHatK(p.usize("k")?),
        "mg_pass_at_k_2" => MgPassAtK(p.usize("k")?),
        "g_pass_at_k_tau" => GPassAtKTau(p.usize("k")?, p.f64("tau")?),
        "bayes" | "bayes_ci" => Bayes(p.opt_f64("quantile")?),
        "bayes_greedy" => BayesGreedy,
        _ if id.starts_with("elo_tie_") => Elo(EloOptions {
            k: p.f64("k")?,
            initial_rating: p.f64("initial_rating")?,
            tie_policy: id["elo_tie_".len()..].parse::<TiePolicy>()?,
        }),
        _ if id.starts_with("glicko_tie_") => Glicko(GlickoOptions {
            initial_rating: p.f64("initial_rating")?,
            initial_rd: p.f64("initial_rd")?,
            c: p.f64("c")?,
            rd_max: p.f64("rd_max")?,
            tie_policy: id["glicko_tie_".len()..].parse::<TiePolicy>()?,
        }),
        "trueskill" => TrueSkill(TrueSkillOptions {
            mu0: p.f64("mu_initial")?,
            sigma0: p.f64("sigma_initial")?,
            beta: p.f64("beta")?,
            tau: p.f64("tau")?,
            tau_per_match: p.bool("tau_per_match")?,
        }),
        "bradley_terry" => BradleyTerry(p.paired(false)?),
        "bradley_terry_map" => BradleyTerry(p.paired(true)?),
        "bradley_terry_davidson" => Davidson(p.paired(false)?.into()),
        "bradley_terry_davidson_map" => Davidson(p.paired(true)?.into()),
        "rao_kupper" => RaoKupper(p.f64("tie_strength")?, p.paired(false)?),
        "rao_kupper_map" => RaoKupper(p.f64("tie_strength")?, p.paired(true)?),
        "thompson" => Thompson(ThompsonOptions {
            n_samples: p.usize("n_samples")?,
            prior_alpha: p.f64("prior_alpha")?,
            prior_beta: p.f64("prior_beta")?,
            seed: p.u64("seed")?,
        }),
        "bayesian_mcmc" => Mcmc(McmcOptions {
            n_samples: p.usize("n_samples")?,
            burnin: p.usize("burnin")?,
            prior_var: p.f64("prior_var")?,
            seed: p.u64("seed")?,
            proposal_std: p.f64("proposal_std")?,
        }),
        "plackett_luce" => PlackettLuce(MmOptions {
            max_iter: p.usize("max_iter")?,
            tol: p.f64("tol")?,
            ..MmOptions::default()
        }),
        "plackett_luce_map" => PlackettLuceMap(p.f64("prior")?, p.usize("max_iter")?),
        "bradley_terry_luce" => Btl(p.paired(false)?),
        "bradley_terry_luce_map" => Btl(p.paired(true)?),
        "davidson_luce" => DavidsonLuce(p.paired(false)?.into()),
        "davidson_luce_map" => DavidsonLuce(p.paired(true)?.into()),
        "borda" => Borda,
        "copeland" => Copeland,
        "win_rate" => WinRate,
        "majority_judgment" => MajorityJudgment,
        _ if id.starts_with("minimax_variant_") => {
            let rest = &id["minimax_variant_".len()..];
            let variant = rest.split("_tie_").next().unwrap_or_default().parse()?;
            Minimax(variant, tie_suffix(id)?)
        }
        _ if id.starts_with("schulze_tie_") => Schulze(tie_suffix(id)?),
        _ if id.starts_with("ranked_pairs_strength_") => {
            let rest = &id["ranked_pairs_strength_".len()..];
            let strength = rest.split("_tie_").next().unwrap_or_default().parse()?;
            RankedPairs(strength, tie_suffix(id)?)
        }
        _ if id.starts_with("kemeny_young_tie_") => Kemeny(tie_suffix(id)?, p.usize("max_exact")?),
        _ if id.starts_with("nanson_rank_ties_") => Nanson(id["nanson_rank_ties_".len()..].parse()?),
        _ if id.starts_with("baldwin_rank_ties_") => Baldwin(id["baldwin_rank_ties_".len()..].parse()?),
        "rasch" | "rasch_map" | "rasch_2pl" | "rasch_2pl_map" | "rasch_3pl" | "rasch_3pl_map" => {
            let model = if id.starts_with("rasch_2pl") {
                IrtModel::TwoPl
            } else if id.starts_with("rasch_3pl") {
                IrtModel::ThreePl
            } else {
                IrtModel::OnePl
            };
            let mut opts = JmleOptions::new(model, p.paired(id.ends_with("_map"))?.estimation);
            opts.max_iter = p.usize("max_iter")?;
            if model == IrtModel::ThreePl {
                opts.fix_guessing = p.opt_f64("fix_guessing")?;
            }
            Jmle(opts)
        }
        "rasch_mml" | "rasch_mml_credible" => Mml(MmlOptions {
            em_iter: p.usize("em_iter")?,
            n_quadrature: p.usize("n_quadrature")?,
            max_iter: p.usize("max_iter")?,
            quantile: if id == "rasch_mml" {
                None
            } else {
                Some(p.f64("quantile")?)
            },
        }),
        "dynamic_irt_linear" | "dynamic_irt_growth" => Dynamic(DynamicOptions {
            variant: id["dynamic_irt_".len()..].parse::<DynamicVariant>()?,
            max_iter: p.usize("max_iter")?,
            slope_penalty: p.f64("slope_penalty")?,
        }),
        "pagerank" => PageRank(p.f64("damping")?),
        "spectral" => Spectral(p.usize("max_iter")?, p.f64("tol")?),
        "alpharank" => AlphaRank(p.f64("alpha")?, p.usize("population_size")?),
        "nash_vs_equilibrium" | "nash_advantage_vs_equilibrium" => Nash(id["nash_".len()..].parse()?),
        _ if id.starts_with("rank_centrality_tie_") => RankCentrality(RankCentralityOptions {
            tie_handling: id["rank_centrality_tie_".len()..].parse::<TieHandling>()?,
            smoothing: p.f64("smoothing")?,
            teleport: p.f64("teleport")?,
        }),
        _ if id.starts_with("serial_rank_") => Serial(id["serial_rank_".len()..].parse()?),
        _ if id.starts_with("hodge_rank_") => {
            let rest = &id["hodge_rank_".len()..];
            let (stat, weight) = rest
                .rsplit_once('_')
                .ok_or_else(|| RankError::UnknownMethod(id.to_string()))?;
            Hodge(HodgeOptions {
                stat: stat.parse::<PairwiseStat>()?,
                weight: weight.parse::<EdgeWeight>()?,
                epsilon: if stat == "log_odds" {
                    p.f64("epsilon")?
                } else {
                    graph::DEFAULT_LOG_ODDS_EPSILON
                },
            })
        }
        _ => return Err(RankError::UnknownMethod(id.to_string())),
    };
    Ok(variant)
}

/// Scores, ranking and warnings of one method run. The score vector carries the registry id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutput {
    pub scores: ScoreVector,
    pub ranking: Ranking,
    pub warnings: Vec<Warning>,
}

/// A resolved method with its parameter binding.
#[derive(Debug, Clone)]
pub struct Method {
    id: &'static str,
    family: Family,
    params: BTreeMap<String, String>,
    prior: Option<Arc<PriorOutcomes>>,
}

impl Method {
    pub fn resolve(id: &str) -> Result<Self> {
        let id: &'static str = METHOD_IDS
            .iter()
            .chain(EXTRA_IDS.iter())
            .copied()
            .find(|&m| m == id)
            .ok_or_else(|| RankError::UnknownMethod(id.to_string()))?;
        let family = family_of(id).ok_or_else(|| RankError::UnknownMethod(id.to_string()))?;
        let params = default_params(id)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let m = Self {
            id,
            family,
            params,
            prior: None,
        };
        m.variant()?;
        Ok(m)
    }

    /// Applies `key=value` overrides; unknown keys and unparsable values are configuration errors.
    pub fn with_params<K: AsRef<str>, V: AsRef<str>>(mut self, overrides: &[(K, V)]) -> Result<Self> {
        for (k, v) in overrides {
            let (k, v) = (k.as_ref(), v.as_ref());
            match self.params.get_mut(k) {
                Some(slot) => *slot = v.to_string(),
                None => {
                    let known: Vec<&str> = self.params.keys().map(String::as_str).collect();
                    return Err(RankError::config(format!(
                        "`{}` has no parameter `{k}` (available: {})",
                        self.id,
                        if known.is_empty() {
                            "none".to_string()
                        } else {
                            known.join(", ")
                        }
                    )));
                }
            }
        }
        self.variant()?;
        Ok(self)
    }

    /// Overrides the RNG seed of sampling methods; returns whether the method has one.
    pub fn set_seed(&mut self, seed: u64) -> bool {
        match self.params.get_mut("seed") {
            Some(slot) => {
                *slot = seed.to_string();
                true
            }
            None => false,
        }
    }

    pub fn with_prior(mut self, prior: Arc<PriorOutcomes>) -> Self {
        self.prior = Some(prior);
        self
    }

    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    fn variant(&self) -> Result<Variant> {
        build_variant(
            self.id,
            &Params {
                id: self.id,
                map: &self.params,
            },
        )
    }

    /// Smallest trial count the method is defined for.
    pub fn required_trials(&self) -> usize {
        match self.variant() {
            Ok(
                Variant::PassAtK(k)
                | Variant::PassHatK(k)
                | Variant::MgPassAtK(k)
                | Variant::GPassAtKTau(k, _),
            ) => k.max(2),
            _ => 1,
        }
    }

    pub fn run(&self, r: &ResponseTensor) -> Result<MethodOutput> {
        let mut warnings = Vec::new();
        let mut ranking = None;
        let scores = match self.variant()? {
            Variant::Avg => metrics::avg(r)?,
            Variant::InverseDifficulty(lo, hi) => metrics::inverse_difficulty(r, (lo, hi))?,
            Variant::PassAtK(k) => metrics::pass_at_k(r, k)?,
            Variant::PassHatK(k) => metrics::pass_hat_k(r, k)?,
            Variant::MgPassAtK(k) => metrics::mg_pass_at_k(r, k)?,
            Variant::GPassAtKTau(k, tau) => metrics::g_pass_at_k_tau(r, k, tau)?,
            Variant::Bayes(q) => {
                let w = metrics::default_weights(r.num_categories());
                metrics::bayes(r, &w, None, q)?.0
            }
            Variant::BayesGreedy => {
                let w = metrics::default_weights(r.num_categories());
                match &self.prior {
                    Some(p) => metrics::bayes_greedy(r, &w, p)?.0,
                    None => {
                        warnings.push(Warning::new(
                            WarningKind::MissingPrior,
                            "no prior outcomes supplied; using the uniform Dirichlet baseline",
                        ));
                        let empty = PriorOutcomes::empty(r.questions(), r.num_categories());
                        metrics::bayes_greedy(r, &w, &empty)?.0
                    }
                }
            }
            Variant::Elo(o) => rating::elo(r, &o)?,
            Variant::Glicko(o) => rating::glicko(r, &o)?.scores,
            Variant::TrueSkill(o) => rating::trueskill(r, &o)?.scores,
            Variant::BradleyTerry(o) => take(paired::bradley_terry(&pairwise_counts(r)?, &o)?, &mut warnings),
            Variant::Davidson(o) => take(paired::davidson(&pairwise_counts(r)?, &o)?, &mut warnings),
            Variant::RaoKupper(kappa, o) => take(
                paired::rao_kupper(&pairwise_counts(r)?, kappa, &o)?,
                &mut warnings,
            ),
            Variant::Thompson(o) => mc::thompson(r, &o)?,
            Variant::Mcmc(o) => mc::bayesian_mcmc_bt(r, &o)?.scores,
            Variant::PlackettLuce(o) => {
                let fit = paired::plackett_luce_mm(&pairwise_counts(r)?, &o)?;
                warnings.extend(fit.warnings);
                fit.scores
            }
            Variant::PlackettLuceMap(v, it) => take(
                paired::plackett_luce_map(&pairwise_counts(r)?, v, it)?,
                &mut warnings,
            ),
            Variant::Btl(o) => take(
                paired::bradley_terry_luce(&setwise_events(r)?, &o)?,
                &mut warnings,
            ),
            Variant::DavidsonLuce(o) => take(paired::davidson_luce(&setwise_events(r)?, &o)?, &mut warnings),
            Variant::Borda => voting::borda(r)?,
            Variant::Copeland => voting::copeland(r)?,
            Variant::WinRate => voting::win_rate(r)?,
            Variant::Minimax(v, t) => voting::minimax(r, v, t)?,
            Variant::Schulze(t) => voting::schulze(r, t)?,
            Variant::RankedPairs(s, t) => voting::ranked_pairs(r, s, t)?,
            Variant::Kemeny(t, max) => voting::kemeny_young(r, t, max)?.scores,
            Variant::Nanson(rule) => {
                let res = voting::nanson(r, rule)?;
                ranking = Some(res.ranking.clone());
                res.scores(self.id)
            }
            Variant::Baldwin(rule) => {
                let res = voting::baldwin(r, rule)?;
                ranking = Some(res.ranking.clone());
                res.scores(self.id)
            }
            Variant::MajorityJudgment => voting::majority_judgment(r)?.scores,
            Variant::Jmle(o) => {
                let fit = irt::rasch_jmle(r, &o)?;
                warnings.extend(fit.warnings);
                fit.scores
            }
            Variant::Mml(o) => {
                let fit = irt::rasch_mml(r, &o)?;
                warnings.extend(fit.warnings);
                fit.scores
            }
            Variant::Dynamic(o) => {
                let fit = irt::dynamic_irt(r, &o)?;
                warnings.extend(fit.warnings);
                fit.scores
            }
            Variant::PageRank(d) => graph::pagerank(r, d)?,
            Variant::Spectral(it, tol) => {
                let fit = graph::spectral(r, it, tol)?;
                if !fit.converged {
                    warnings.push(Warning::new(
                        WarningKind::NonConvergence,
                        format!("power iteration stopped after {} iterations", fit.iterations),
                    ));
                }
                fit.scores
            }
            Variant::AlphaRank(a, m) => graph::alpharank(r, a, m)?,
            Variant::Nash(s) => graph::nash(r, s)?.scores,
            Variant::RankCentrality(o) => graph::rank_centrality(r, &o)?,
            Variant::Serial(c) => {
                let fit = graph::serial_rank(r, c)?;
                warnings.extend(fit.warnings);
                ranking = Some(fit.ranking);
                fit.scores
            }
            Variant::Hodge(o) => graph::hodge_rank(r, &o)?.scores,
        };
        let scores = ScoreVector::new(self.id, scores.scores);
        let ranking = match ranking {
            Some(rk) => rk,
            None => scores.to_ranking()?,
        };
        Ok(MethodOutput {
            scores,
            ranking,
            warnings,
        })
    }
}

fn take(fit: paired::PairedFit, warnings: &mut Vec<Warning>) -> ScoreVector {
    warnings.extend(fit.warnings);
    fit.scores
}

impl Ranker for Method {
    fn id(&self) -> String {
        self.id.to_string()
    }

    fn min_trials(&self) -> usize {
        self.required_trials()
    }

    fn rank(&self, r: &ResponseTensor) -> Result<Ranking> {
        Ok(self.run(r)?.ranking)
    }
}

/// Every default method, resolved with default parameters.
pub fn all_methods() -> Vec<Method> {
    METHOD_IDS
        .iter()
        .map(|id| Method::resolve(id).expect("catalogue ids resolve"))
        .collect()
}
