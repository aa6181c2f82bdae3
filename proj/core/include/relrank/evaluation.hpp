#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relrank/dataio.hpp"

namespace relrank {

// --- correlation -----------------------------------------------------------

// Standard Pearson r. nullopt when n < 2 or either side has zero variance
// (excluded from macro averages, never silently zeroed).
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Spearman rho: Pearson on average-ranked data (ties get fractional ranks).
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Pearson restricted to the k items ranked highest by the ground truth
// scores (ties by index). k >= n degenerates to plain Pearson.
std::optional<double> pearson_at_k(std::span<const double> predicted,
                                   std::span<const double> truth, std::size_t k);

// --- NDCG -------------------------------------------------------------------

enum class NdcgGain {
    // 2^grade - 1 with grades capped at 31 to stay within double range;
    // the proxy ground truth grades run up to 100.
    Exponential,
    Linear,
};

// `predicted_order` lists item indices best-first; `grades` is indexed by
// item. Gain discounted by log2(rank + 1), normalized by the ideal DCG.
// All-zero grades define the value as 0.
double ndcg_at_k(std::span<const std::size_t> predicted_order,
                 std::span<const double> grades, std::size_t k,
                 NdcgGain gain = NdcgGain::Exponential);

// --- proxy ground truth -------------------------------------------------------

// Per source: candidates ordered by navigation count (ties by id), graded by
// reversed rank order (top candidate of n gets grade n, the last grade 1).
struct GroundTruth {
    struct Entry {
        EntityId candidate = 0;
        long long count = 0;
        double grade = 0.0;
    };
    // Truth-ranked best-first per source.
    std::map<EntityId, std::vector<Entry>> sources;
    std::vector<EntityId> skipped; // seeds with no navigations at the period
};

GroundTruth build_proxy_groundtruth(std::span<const NavigationRecord> records,
                                    std::span<const EntityId> seeds, int period,
                                    std::size_t top_n = 100);

void save_groundtruth(const GroundTruth& truth, const std::string& path);
GroundTruth load_groundtruth(const std::string& path);

// --- report -------------------------------------------------------------------

struct RankedCandidate {
    EntityId candidate = 0;
    double score = 0.0;
};

// Predicted rankings per source, best-first.
using RankingSet = std::map<EntityId, std::vector<RankedCandidate>>;

struct MetricRow {
    std::string metric;    // "pearson", "spearman", "ndcg"
    std::size_t cutoff;    // 0 means "all"
    double macro = 0.0;    // mean over sources where the metric is defined
    std::size_t defined = 0;
    std::size_t undefined = 0;
};

struct EvalOptions {
    std::vector<std::size_t> pearson_cutoffs = {10, 30, 50};
    std::vector<std::size_t> ndcg_cutoffs = {3, 10, 20};
    NdcgGain gain = NdcgGain::Exponential;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    std::size_t sources_evaluated = 0;

    const MetricRow* find(const std::string& metric, std::size_t cutoff) const;
    std::string summary() const;
};

// Joins each predicted ranking with the ground truth on the candidate ids
// and macro-averages every metric over sources.
MetricReport evaluate_rankings(const RankingSet& rankings, const GroundTruth& truth,
                               const EvalOptions& options = {});

// Machine-readable table: metric <TAB> cutoff <TAB> macro <TAB> n_defined
// [<TAB> label]; `append` supports per-configuration dumps (e.g. one row set
// per decay rate) for plotting.
void write_metric_report(const MetricReport& report, const std::string& path,
                         const std::string& label = "", bool append = false);

// Ranking file rows: source_id <TAB> rank <TAB> candidate_id <TAB> score.
void save_rankings(const RankingSet& rankings, const std::string& path);
RankingSet load_rankings(const std::string& path);

// --- significance ----------------------------------------------------------------

struct TTestResult {
    double t = 0.0;
    std::size_t df = 0;
    double p_two_sided = 1.0;
};

// Paired t-test over per-source metric vectors. nullopt when fewer than two
// pairs or the differences have zero variance.
std::optional<TTestResult> paired_t_test(std::span<const double> a,
                                         std::span<const double> b);

} // namespace relrank
