//! Synthetic corpora and event streams with planted ground truth.
//!
//! Every generator is a pure function of its config, seed included.

use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::events::EventRecord;
use crate::rng::{self, Domain, StreamRng};
use crate::topics::{top_word_indices, TopicModel};

/// Lowercase pseudo-word `prefix` + base-26 spelling of `i`.
pub fn pseudo_word(prefix: &str, i: usize) -> String {
    let mut letters = Vec::new();
    let mut n = i;
    loop {
        letters.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    // pad so every word of a block has the same length
    while letters.len() < 3 {
        letters.push(b'a');
    }
    letters.reverse();
    format!("{prefix}{}", String::from_utf8(letters).expect("ascii"))
}

fn block(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| pseudo_word(prefix, i)).collect()
}

fn doc_length(rng: &mut StreamRng, mean: f64) -> Result<usize> {
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("mean document length: {e}")))?;
    Ok((poisson.sample(rng) as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    /// Names of the convergent pair (A, B) and the distinct class C.
    pub class_names: [String; 3],
    pub class_sizes: [usize; 3],
    pub core_vocab: usize,
    pub a_vocab: usize,
    pub b_vocab: usize,
    pub c_vocab: usize,
    pub ab_vocab: usize,
    /// Share of A's and B's class-specific mass drawn from the shared AB block.
    pub gamma: f64,
    /// Probability that a token comes from the core block.
    pub core_share: f64,
    pub mean_doc_len: f64,
    pub seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            class_names: ["A".into(), "B".into(), "C".into()],
            class_sizes: [36, 327, 213],
            core_vocab: 300,
            a_vocab: 60,
            b_vocab: 60,
            c_vocab: 60,
            ab_vocab: 60,
            gamma: 0.9,
            core_share: 0.75,
            mean_doc_len: 40.0,
            seed: 0,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.core_share) {
            return Err(Error::InvalidParameter(
                "gamma and core_share must lie in [0, 1]".into(),
            ));
        }
        if self.class_sizes.contains(&0) {
            return Err(Error::InvalidParameter("class sizes must be positive".into()));
        }
        let signal = 1.0 - self.core_share;
        let needs = [
            ("core", self.core_vocab, self.core_share),
            ("A-only", self.a_vocab, signal * (1.0 - self.gamma)),
            ("B-only", self.b_vocab, signal * (1.0 - self.gamma)),
            ("C-only", self.c_vocab, signal),
            ("AB", self.ab_vocab, signal * self.gamma),
        ];
        if let Some((name, _, _)) = needs.iter().find(|(_, size, weight)| *size == 0 && *weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} vocabulary is empty but has positive weight"
            )));
        }
        if self.mean_doc_len.is_nan() || self.mean_doc_len <= 0.0 {
            return Err(Error::InvalidParameter("mean_doc_len must be positive".into()));
        }
        Ok(())
    }

    /// Generating distribution of class `c` (0 = A, 1 = B, 2 = C) over
    /// [`ConvergenceConfig::vocabulary`].
    pub fn class_distribution(&self, c: usize) -> Vec<f64> {
        let signal = 1.0 - self.core_share;
        let sizes = [self.core_vocab, self.a_vocab, self.b_vocab, self.c_vocab, self.ab_vocab];
        let own = match c {
            0 => [0.0, signal * (1.0 - self.gamma), 0.0, 0.0, signal * self.gamma],
            1 => [0.0, 0.0, signal * (1.0 - self.gamma), 0.0, signal * self.gamma],
            _ => [0.0, 0.0, 0.0, signal, 0.0],
        };
        let mut p = Vec::new();
        for (b, &size) in sizes.iter().enumerate() {
            let mass = if b == 0 { self.core_share } else { own[b] };
            p.extend(std::iter::repeat_n(
                if size > 0 { mass / size as f64 } else { 0.0 },
                size,
            ));
        }
        p
    }

    /// Core, A-only, B-only, C-only and AB blocks, in that order.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut v = block("core", self.core_vocab);
        v.extend(block("alfa", self.a_vocab));
        v.extend(block("brav", self.b_vocab));
        v.extend(block("chal", self.c_vocab));
        v.extend(block("mixd", self.ab_vocab));
        v
    }
}

/// Labeled, undated corpus of three classes, A and B converging with `gamma`.
pub fn gen_convergence_corpus(cfg: &ConvergenceConfig) -> Result<Corpus> {
    cfg.validate()?;
    let vocab = cfg.vocabulary();
    let mut rng = rng::stream(cfg.seed, Domain::Scenario, 1);
    let mut docs = Vec::new();
    for c in 0..3 {
        let dist = WeightedIndex::new(cfg.class_distribution(c)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for i in 0..cfg.class_sizes[c] {
            let len = doc_length(&mut rng, cfg.mean_doc_len)?;
            let words: Vec<&str> = (0..len).map(|_| vocab[dist.sample(&mut rng)].as_str()).collect();
            docs.push(
                Document::new(format!("{}-{i:04}", cfg.class_names[c]), words.join(" "))
                    .with_label(&cfg.class_names[c]),
            );
        }
    }
    Corpus::new(docs)
}

/// One planted topic group with a linear prevalence trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicGroup {
    pub name: String,
    pub topics: usize,
    /// Group prevalence at the first and the last period.
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftConfig {
    /// Planted groups; any prevalence left over goes to `residual_topics`.
    pub groups: Vec<TopicGroup>,
    pub residual_topics: usize,
    pub words_per_topic: usize,
    /// Zipf exponent of word weights within a topic; 0 is uniform.
    pub zipf: f64,
    pub periods: usize,
    pub docs_per_period: usize,
    /// Days per period.
    pub period_days: u32,
    pub start_date: NaiveDate,
    pub mean_doc_len: f64,
    /// Dirichlet concentration of document mixtures around the prevalences.
    pub concentration: f64,
    pub seed: u64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            groups: vec![
                TopicGroup {
                    name: "local".into(),
                    topics: 2,
                    start: 0.2,
                    end: 0.6,
                },
                TopicGroup {
                    name: "transnational".into(),
                    topics: 2,
                    start: 0.5,
                    end: 0.2,
                },
            ],
            residual_topics: 1,
            words_per_topic: 30,
            zipf: 1.0,
            periods: 10,
            docs_per_period: 200,
            period_days: 120,
            start_date: NaiveDate::from_ymd_opt(2009, 1, 1).expect("valid date"),
            mean_doc_len: 60.0,
            concentration: 5.0,
            seed: 0,
        }
    }
}

/// Output of [`gen_drift_corpus`].
#[derive(Debug, Clone)]
pub struct DriftCorpus {
    pub corpus: Corpus,
    /// Group name of every planted topic (`residual` for leftovers).
    pub topic_groups: Vec<String>,
    /// Vocabulary of every planted topic, most probable word first.
    pub topic_words: Vec<Vec<String>>,
    /// Planted group prevalence per period: `(midpoint day index, [group
    /// prevalences])`, groups in config order followed by residual.
    pub truth: Vec<(u32, Vec<f64>)>,
}

impl DriftConfig {
    fn group_prevalence(&self, period: usize) -> Vec<f64> {
        let f = if self.periods > 1 {
            period as f64 / (self.periods - 1) as f64
        } else {
            0.0
        };
        let mut p: Vec<f64> = self.groups.iter().map(|g| g.start + (g.end - g.start) * f).collect();
        p.push(1.0 - p.iter().sum::<f64>());
        p
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.groups {
            if !(0.0..=1.0).contains(&g.start) || !(0.0..=1.0).contains(&g.end) {
                return Err(Error::InvalidParameter(format!(
                    "trajectory of `{}` leaves [0, 1]",
                    g.name
                )));
            }
            if g.topics == 0 {
                return Err(Error::InvalidParameter(format!("group `{}` has no topics", g.name)));
            }
        }
        for period in [0, self.periods.saturating_sub(1)] {
            let p = self.group_prevalence(period);
            let rest = *p.last().expect("residual");
            if rest < -1e-12 || (self.residual_topics == 0 && rest > 1e-12) {
                return Err(Error::InvalidParameter(
                    "group prevalences must sum to at most 1, and to exactly 1 without residual topics".into(),
                ));
            }
        }
        if self.periods == 0 || self.docs_per_period == 0 || self.words_per_topic == 0 || self.period_days == 0 {
            return Err(Error::InvalidParameter(
                "periods, docs, words and period length must be positive".into(),
            ));
        }
        if !(self.concentration > 0.0 && self.mean_doc_len > 0.0) {
            return Err(Error::InvalidParameter(
                "concentration and mean_doc_len must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn n_topics(&self) -> usize {
        self.groups.iter().map(|g| g.topics).sum::<usize>() + self.residual_topics
    }
}

/// Dated corpus whose topic mixtures follow the planted group trajectories.
pub fn gen_drift_corpus(cfg: &DriftConfig) -> Result<DriftCorpus> {
    cfg.validate()?;
    let k = cfg.n_topics();
    let mut topic_groups = Vec::new();
    for g in &cfg.groups {
        topic_groups.extend(std::iter::repeat_n(g.name.clone(), g.topics));
    }
    topic_groups.extend(std::iter::repeat_n("residual".to_string(), cfg.residual_topics));
    let topic_words: Vec<Vec<String>> = (0..k)
        .map(|t| block(&format!("t{}", pseudo_word("", t)), cfg.words_per_topic))
        .collect();
    let weights: Vec<f64> = (0..cfg.words_per_topic)
        .map(|r| 1.0 / ((r + 1) as f64).powf(cfg.zipf))
        .collect();
    let word_dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut docs = Vec::new();
    let mut truth = Vec::new();
    let origin_day = |period: usize| 1 + period as u32 * cfg.period_days;
    for period in 0..cfg.periods {
        let groups = cfg.group_prevalence(period);
        truth.push((origin_day(period) + cfg.period_days / 2, groups.clone()));
        // split each group's prevalence evenly over its topics
        let mut prevalence = Vec::with_capacity(k);
        for (g, spec) in cfg.groups.iter().enumerate() {
            prevalence.extend(std::iter::repeat_n(groups[g] / spec.topics as f64, spec.topics));
        }
        if cfg.residual_topics > 0 {
            let rest = groups.last().copied().unwrap_or(0.0).max(0.0);
            prevalence.extend(std::iter::repeat_n(
                rest / cfg.residual_topics as f64,
                cfg.residual_topics,
            ));
        }
        let alpha: Vec<f64> = prevalence.iter().map(|p| (p * cfg.concentration).max(1e-3)).collect();
        let gammas: Vec<Gamma<f64>> = alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::InvalidParameter(format!("mixture prior: {e}"))))
            .collect::<Result<_>>()?;
        let mut rng = rng::stream(cfg.seed, Domain::Scenario, 100 + period as u64);
        for i in 0..cfg.docs_per_period {
            // Dirichlet draw via normalized gammas
            let mut theta: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
            if theta.iter().sum::<f64>() <= 0.0 {
                theta = prevalence.clone();
            }
            let topic_dist = WeightedIndex::new(&theta).map_err(|e| Error::Numeric(e.to_string()))?;
            let len = doc_length(&mut rng, cfg.mean_doc_len)?;
            let words: Vec<&str> = (0..len)
                .map(|_| topic_words[topic_dist.sample(&mut rng)][word_dist.sample(&mut rng)].as_str())
                .collect();
            let day = origin_day(period) + rng.random_range(0..cfg.period_days);
            let date = cfg.start_date + Duration::days(day as i64 - 1);
            docs.push(Document::new(format!("p{period:03}-{i:04}"), words.join(" ")).with_date(date));
        }
    }
    // pin the corpus origin to the configured start date
    if let Some(first) = docs.first_mut() {
        first.date = Some(cfg.start_date);
    }
    Ok(DriftCorpus {
        corpus: Corpus::new(docs)?,
        topic_groups,
        topic_words,
        truth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventStreamConfig {
    pub categories: Vec<String>,
    /// Category proportions before and after the breakpoint.
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
    /// Index of the first post-breakpoint period.
    pub breakpoint_period: usize,
    pub periods: usize,
    pub events_per_period: usize,
    pub start_year: i32,
    pub actor: String,
    pub seed: u64,
}

impl Default for EventStreamConfig {
    fn default() -> Self {
        Self {
            categories: ["state", "sectarian", "tribal", "rival_jihadist"]
                .map(String::from)
                .to_vec(),
            pre: vec![0.6, 0.2, 0.15, 0.05],
            post: vec![0.3, 0.5, 0.15, 0.05],
            breakpoint_period: 3,
            periods: 8,
            events_per_period: 500,
            start_year: 2008,
            actor: "AQAP".into(),
            seed: 0,
        }
    }
}

impl EventStreamConfig {
    /// Date of the first post-breakpoint period.
    pub fn breakpoint(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.start_year + self.breakpoint_period as i32, 1, 1).expect("valid year")
    }

    pub fn validate(&self) -> Result<()> {
        for p in [&self.pre, &self.post] {
            if p.len() != self.categories.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.categories.len(),
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "proportions must lie in [0, 1] and sum to 1".into(),
                ));
            }
        }
        if self.breakpoint_period == 0 || self.breakpoint_period >= self.periods {
            return Err(Error::InvalidParameter(
                "the breakpoint needs periods on both sides".into(),
            ));
        }
        Ok(())
    }
}

/// Yearly periods of categorical draws from the planted proportions.
pub fn gen_event_stream(cfg: &EventStreamConfig) -> Result<Vec<EventRecord>> {
    cfg.validate()?;
    let mut events = Vec::with_capacity(cfg.periods * cfg.events_per_period);
    for period in 0..cfg.periods {
        let p = if period < cfg.breakpoint_period {
            &cfg.pre
        } else {
            &cfg.post
        };
        let dist = WeightedIndex::new(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = rng::stream(cfg.seed, Domain::Events, period as u64);
        let year = cfg.start_year + period as i32;
        let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
        let days = (NaiveDate::from_ymd_opt(year + 1, 1, 1).expect("valid year") - jan1).num_days();
        let mut batch: Vec<EventRecord> = (0..cfg.events_per_period)
            .map(|_| EventRecord {
                date: jan1 + Duration::days(rng.random_range(0..days)),
                actor: cfg.actor.clone(),
                category: cfg.categories[dist.sample(&mut rng)].clone(),
            })
            .collect();
        batch.sort_by_key(|e| e.date);
        events.extend(batch);
    }
    Ok(events)
}

/// Matches fitted topics to planted word lists by top-word overlap.
///
/// Returns, for each planted topic, the fitted topic whose top `m` words
/// overlap it most (each fitted topic used at most once, greedily by overlap,
/// ties to lower indices), with the overlap size.
pub fn align_topics(model: &TopicModel, planted: &[Vec<String>], m: usize) -> Result<Vec<(usize, usize)>> {
    let tops: Vec<Vec<&str>> = (0..model.k)
        .map(|t| {
            Ok(top_word_indices(model, t, m)?
                .into_iter()
                .map(|w| model.terms[w].as_str())
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (p, words) in planted.iter().enumerate() {
        let head: Vec<&str> = words.iter().take(m).map(String::as_str).collect();
        for (t, top) in tops.iter().enumerate() {
            let overlap = top.iter().filter(|w| head.contains(w)).count();
            pairs.push((overlap, p, t));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<Option<(usize, usize)>> = vec![None; planted.len()];
    let mut used = vec![false; model.k];
    for (overlap, p, t) in pairs {
        if out[p].is_none() && !used[t] {
            out[p] = Some((t, overlap));
            used[t] = true;
        }
    }
    Ok(out.into_iter().map(|x| x.unwrap_or((usize::MAX, 0))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{dyad_proportions, shift_statistic, CategoryMap, Period};

    #[test]
    fn pseudo_words_are_alphabetic_and_distinct() {
        let words = block("core", 800);
        assert!(words.iter().all(|w| w.chars().all(|c| c.is_ascii_lowercase())));
        let set: std::collections::BTreeSet<_> = words.iter().collect();
        assert_eq!(set.len(), 800);
        assert_eq!(pseudo_word("x", 0), "xaaa");
        assert_eq!(pseudo_word("x", 27), "xabb");
    }

    #[test]
    fn class_distributions() {
        let cfg = ConvergenceConfig::default();
        for c in 0..3 {
            assert!((cfg.class_distribution(c).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let zero = ConvergenceConfig {
            gamma: 0.0,
            ..cfg.clone()
        };
        let (a, b) = (zero.class_distribution(0), zero.class_distribution(1));
        let core = zero.core_vocab;
        assert!(a[core..].iter().zip(&b[core..]).all(|(x, y)| x * y == 0.0));
        let one = ConvergenceConfig { gamma: 1.0, ..cfg };
        assert_eq!(one.class_distribution(0), one.class_distribution(1));
    }

    #[test]
    fn convergence_corpus_shape_and_determinism() {
        let cfg = ConvergenceConfig {
            class_sizes: [5, 7, 6],
            ..ConvergenceConfig::default()
        };
        let a = gen_convergence_corpus(&cfg).unwrap();
        assert_eq!(a.len(), 18);
        assert_eq!(a.classes(), vec!["A", "B", "C"]);
        assert_eq!(a, gen_convergence_corpus(&cfg).unwrap());
        let other = gen_convergence_corpus(&ConvergenceConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn empty_weighted_block_is_rejected() {
        let cfg = ConvergenceConfig {
            ab_vocab: 0,
            ..ConvergenceConfig::default()
        };
        assert!(gen_convergence_corpus(&cfg).is_err());
        assert!(gen_convergence_corpus(&ConvergenceConfig { gamma: 0.0, ..cfg }).is_ok());
        assert!(gen_convergence_corpus(&ConvergenceConfig {
            gamma: 1.5,
            ..ConvergenceConfig::default()
        })
        .is_err());
    }

    #[test]
    fn gamma_zero_nearest_centroid_separates() {
        let cfg = ConvergenceConfig {
            gamma: 0.0,
            class_sizes: [100, 100, 100],
            ..ConvergenceConfig::default()
        };
        let corpus = gen_convergence_corpus(&cfg).unwrap();
        let vocab = cfg.vocabulary();
        let index: std::collections::HashMap<&str, usize> =
            vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let dists: Vec<Vec<f64>> = (0..3).map(|c| cfg.class_distribution(c)).collect();
        let mut correct = 0;
        for doc in corpus.documents() {
            let ll: Vec<f64> = dists
                .iter()
                .map(|p| doc.text.split(' ').map(|w| p[index[w]].max(1e-12).ln()).sum())
                .collect();
            let best = (0..3).max_by(|&a, &b| ll[a].total_cmp(&ll[b])).unwrap();
            correct += usize::from(cfg.class_names[best] == *doc.label.as_ref().unwrap());
        }
        assert!(correct as f64 / 300.0 > 0.95);
    }

    #[test]
    fn drift_truth_and_validation() {
        let cfg = DriftConfig {
            docs_per_period: 5,
            ..DriftConfig::default()
        };
        let d = gen_drift_corpus(&cfg).unwrap();
        assert_eq!(d.corpus.len(), 50);
        assert_eq!(d.topic_words.len(), 5);
        assert_eq!(d.truth[0].1[..2], [0.2, 0.5]);
        assert!((d.truth[9].1[0] - 0.6).abs() < 1e-12 && (d.truth[9].1[1] - 0.2).abs() < 1e-12);
        assert_eq!(d.corpus.oldest_date(), Some(cfg.start_date));
        let bad = DriftConfig {
            groups: vec![TopicGroup {
                name: "x".into(),
                topics: 1,
                start: 0.2,
                end: 1.4,
            }],
            ..DriftConfig::default()
        };
        assert!(gen_drift_corpus(&bad).is_err());
        let flat = DriftConfig {
            groups: vec![TopicGroup {
                name: "x".into(),
                topics: 1,
                start: 0.3,
                end: 0.3,
            }],
            docs_per_period: 2,
            ..DriftConfig::default()
        };
        let d = gen_drift_corpus(&flat).unwrap();
        assert!(d.truth.iter().all(|(_, p)| p[0] == 0.3));
    }

    #[test]
    fn event_stream_step() {
        let cfg = EventStreamConfig::default();
        let events = gen_event_stream(&cfg).unwrap();
        assert_eq!(events.len(), 4000);
        assert_eq!(events, gen_event_stream(&cfg).unwrap());
        let s = dyad_proportions(&events, Period::Year, &CategoryMap::default()).unwrap();
        let delta = shift_statistic(&s, cfg.breakpoint(), "sectarian").unwrap();
        assert!((delta - 0.3).abs() < 0.05, "{delta}");
        let null = EventStreamConfig {
            post: cfg.pre.clone(),
            ..cfg.clone()
        };
        let s = dyad_proportions(&gen_event_stream(&null).unwrap(), Period::Year, &CategoryMap::default()).unwrap();
        assert!(shift_statistic(&s, cfg.breakpoint(), "sectarian").unwrap().abs() < 0.05);
        assert!(gen_event_stream(&EventStreamConfig {
            pre: vec![0.5, 0.6, 0.0, 0.0],
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn alignment_of_exact_model() {
        let terms: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let m =
            TopicModel::from_parts(terms, vec![vec![0.0, 0.0, 0.6, 0.4], vec![0.5, 0.5, 0.0, 0.0]], vec![]).unwrap();
        let planted = vec![vec!["a".to_string(), "b".into()], vec!["c".to_string(), "d".into()]];
        assert_eq!(align_topics(&m, &planted, 2).unwrap(), vec![(1, 2), (0, 2)]);
    }
}
