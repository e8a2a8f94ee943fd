//! Pareto archive, evolutionary engines, hierarchical search, hypervolume and final oracle
//! re-evaluation.

mod archive;
mod engines;
mod evaluate;
mod final_eval;
mod hierarchical;
mod hypervolume;
mod objective;
mod operators;
mod sort;

pub use archive::{Member, ParetoArchive};
pub use engines::{
    es_moo, hill_climber, nsga2, random_search, EsParams, GenerationRecord, GenerationTrace, HillParams, HillResult, NsgaParams,
    NsgaResult, RandomParams, SearchResult,
};
pub use evaluate::{EvalSource, Evaluator, FnEvaluator, MappedEvaluator, OracleEvaluator, SurrogateEvaluator};
pub use final_eval::{final_evaluation, FinalReport, Residual};
pub use hierarchical::{hierarchical_search, split_budget, HierarchicalResult, StageMode};
pub use hypervolume::{hypervolume, hypervolume_with_senses};
pub use objective::{default_objectives, dominates, dominates_min, to_min, Objective, Sense};
pub use operators::{default_rate, mutate, random_genome, uniform_crossover, Choices};
pub use sort::{crowding_distance, non_dominated_sort, rank_and_crowding, select_top_k};
