//! Round-robin tournaments, the self/opponent/domain benchmarks and
//! Bonferroni-corrected Welch tests.

mod report;
mod significance;
mod sum;
mod tournament;

pub use report::{AgentScore, BenchmarkReport, DomainScore, LongRow, PValueRow};
pub use significance::{bonferroni_threshold, significance, welch_t_test, Comparison, WelchResult, FAMILY_ALPHA};
pub use sum::{compensated_sum, mean, std_dev};
pub use tournament::{run_tournament, SessionRecord, Tournament, TournamentSpec, UtilityTensor};
