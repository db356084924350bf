//! Held-out perplexity, polarity classification, lexicon scores, distances and
//! qualitative reports.

mod classify;
mod distance;
mod perplexity;
mod report;

pub use classify::{
    classification_metrics, classify_labelled, classify_polarity, ClassificationReport, LabelledPrediction,
    SentimentWords,
};
pub use distance::{
    affinity_vector, hellinger, hellinger_matrix, score_against, sentiment_score, sentiment_scores, SentimentScores,
};
pub use perplexity::{perplexity, DocLogProb, FoldInConfig, HeldOutModel, PerplexityReport, TestDoc, UniformModel};
pub use report::{
    aspect_distances, aspect_target_distribution, brand_comparison, contrastive_tweets, live_aspect_labels, rank,
    top_opinion_words, top_target_words, AspectCell, BrandReport, ContrastiveTweet, OpinionCount, Ranked,
    TargetOpinions,
};
