//! Score and map agreement statistics.

mod corpus;
mod corr;
mod logistic;

pub use corpus::{
    evaluate_corpus, render_table, CorpusReport, Correlation, EntryScores, Failure, GroupReport,
    MapAggregate, NrScores,
};
pub use corr::{average_ranks, map_compare, plcc, srocc, MapComparison};
pub use logistic::rmse_after_fit;
