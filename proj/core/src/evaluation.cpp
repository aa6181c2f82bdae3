#include "relrank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace relrank {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Average ranks, 1-based; ties share the mean of their rank run.
std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double ndcg_gain(double grade, NdcgGain gain) {
    if (gain == NdcgGain::Linear) return grade;
    return std::pow(2.0, std::min(grade, 31.0)) - 1.0;
}

// Regularized incomplete beta via the standard continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-12;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(ln_beta + a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

} // namespace

// --- correlation -----------------------------------------------------------------

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
    if (x.size() < 2) return std::nullopt;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

std::optional<double> pearson_at_k(std::span<const double> predicted,
                                   std::span<const double> truth, std::size_t k) {
    if (predicted.size() != truth.size()) throw DimensionError("pearson_at_k: length mismatch");
    const std::size_t n = truth.size();
    if (k >= n) return pearson(predicted, truth);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (truth[a] != truth[b]) return truth[a] > truth[b];
        return a < b;
    });
    std::vector<double> px, tx;
    px.reserve(k);
    tx.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        px.push_back(predicted[order[i]]);
        tx.push_back(truth[order[i]]);
    }
    return pearson(px, tx);
}

// --- NDCG ----------------------------------------------------------------------

double ndcg_at_k(std::span<const std::size_t> predicted_order,
                 std::span<const double> grades, std::size_t k, NdcgGain gain) {
    const std::size_t n = grades.size();
    if (predicted_order.size() != n) {
        throw DimensionError("ndcg_at_k: order must cover every item exactly once");
    }
    const std::size_t depth = std::min(k, n);
    double dcg = 0.0;
    for (std::size_t r = 0; r < depth; ++r) {
        const std::size_t item = predicted_order[r];
        if (item >= n) throw DimensionError("ndcg_at_k: item index out of range");
        dcg += ndcg_gain(grades[item], gain) / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<double> ideal(grades.begin(), grades.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < depth; ++r) {
        idcg += ndcg_gain(ideal[r], gain) / std::log2(static_cast<double>(r) + 2.0);
    }
    if (idcg <= 0.0) return 0.0;
    return dcg / idcg;
}

// --- proxy ground truth ------------------------------------------------------------

GroundTruth build_proxy_groundtruth(std::span<const NavigationRecord> records,
                                    std::span<const EntityId> seeds, int period,
                                    std::size_t top_n) {
    GroundTruth truth;
    std::vector<NavigationRecord> in_period;
    for (const NavigationRecord& rec : records) {
        if (rec.period == period && !rec.is_external()) in_period.push_back(rec);
    }
    for (EntityId seed : seeds) {
        // Reuse the count aggregation with no minimum threshold: the proxy
        // grades cover the most navigated targets regardless of volume.
        auto candidates = candidate_set(seed, in_period, 1, top_n);
        if (candidates.empty()) {
            truth.skipped.push_back(seed);
            continue;
        }
        const std::size_t n = candidates.size();
        std::vector<GroundTruth::Entry> entries;
        entries.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            entries.push_back({candidates[i].id, candidates[i].count,
                               static_cast<double>(n - i)});
        }
        truth.sources.emplace(seed, std::move(entries));
    }
    return truth;
}

void save_groundtruth(const GroundTruth& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [seed, entries] : truth.sources) {
        for (const auto& e : entries) {
            out << seed << '\t' << e.candidate << '\t' << e.count << '\t' << e.grade << '\n';
        }
    }
}

GroundTruth load_groundtruth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    GroundTruth truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        EntityId seed = 0;
        GroundTruth::Entry e;
        if (!(row >> seed >> e.candidate >> e.count >> e.grade)) {
            throw FormatError(path + ": bad ground-truth row: " + line);
        }
        truth.sources[seed].push_back(e);
    }
    return truth;
}

// --- report -------------------------------------------------------------------------

const MetricRow* MetricReport::find(const std::string& metric, std::size_t cutoff) const {
    for (const MetricRow& row : rows) {
        if (row.metric == metric && row.cutoff == cutoff) return &row;
    }
    return nullptr;
}

std::string MetricReport::summary() const {
    std::ostringstream out;
    out << "evaluated sources: " << sources_evaluated << "\n";
    for (const MetricRow& row : rows) {
        out << "  " << row.metric;
        if (row.cutoff > 0) {
            out << "@" << row.cutoff;
        } else {
            out << "-all";
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", row.macro);
        out << ": " << buf << " (defined on " << row.defined << " sources";
        if (row.undefined > 0) out << ", undefined on " << row.undefined;
        out << ")\n";
    }
    return out.str();
}

MetricReport evaluate_rankings(const RankingSet& rankings, const GroundTruth& truth,
                               const EvalOptions& options) {
    struct Accumulator {
        double sum = 0.0;
        std::size_t defined = 0;
        std::size_t undefined = 0;

        void add(std::optional<double> v) {
            if (v) {
                sum += *v;
                ++defined;
            } else {
                ++undefined;
            }
        }
    };

    std::map<std::pair<std::string, std::size_t>, Accumulator> acc;
    std::size_t evaluated = 0;

    for (const auto& [source, predicted] : rankings) {
        const auto truth_it = truth.sources.find(source);
        if (truth_it == truth.sources.end()) continue;
        const auto& truth_entries = truth_it->second;

        // Join on candidate ids; keep the truth-side ordering stable.
        std::map<EntityId, double> predicted_score;
        for (const RankedCandidate& rc : predicted) predicted_score[rc.candidate] = rc.score;
        std::vector<double> pred, counts, grades;
        for (const auto& e : truth_entries) {
            const auto it = predicted_score.find(e.candidate);
            if (it == predicted_score.end()) continue;
            pred.push_back(it->second);
            counts.push_back(static_cast<double>(e.count));
            grades.push_back(e.grade);
        }
        if (pred.size() < 2) continue;
        ++evaluated;

        acc[{"pearson", 0}].add(pearson(pred, counts));
        for (std::size_t k : options.pearson_cutoffs) {
            acc[{"pearson", k}].add(pearson_at_k(pred, counts, k));
        }
        acc[{"spearman", 0}].add(spearman(pred, counts));

        // NDCG of the predicted order against the proxy grades.
        std::vector<std::size_t> order(pred.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pred[a] > pred[b];
        });
        for (std::size_t k : options.ndcg_cutoffs) {
            acc[{"ndcg", k}].add(ndcg_at_k(order, grades, k, options.gain));
        }
    }

    MetricReport report;
    report.sources_evaluated = evaluated;
    auto emit = [&](const std::string& metric, std::size_t cutoff) {
        const auto it = acc.find({metric, cutoff});
        if (it == acc.end()) return;
        MetricRow row;
        row.metric = metric;
        row.cutoff = cutoff;
        row.defined = it->second.defined;
        row.undefined = it->second.undefined;
        row.macro = it->second.defined > 0
                        ? it->second.sum / static_cast<double>(it->second.defined)
                        : 0.0;
        report.rows.push_back(std::move(row));
    };
    for (std::size_t k : options.pearson_cutoffs) emit("pearson", k);
    emit("pearson", 0);
    emit("spearman", 0);
    for (std::size_t k : options.ndcg_cutoffs) emit("ndcg", k);
    return report;
}

void write_metric_report(const MetricReport& report, const std::string& path,
                         const std::string& label, bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (const MetricRow& row : report.rows) {
        out << row.metric << '\t' << (row.cutoff == 0 ? "all" : std::to_string(row.cutoff))
            << '\t' << format_double(row.macro) << '\t' << row.defined;
        if (!label.empty()) out << '\t' << label;
        out << '\n';
    }
}

void save_rankings(const RankingSet& rankings, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [source, candidates] : rankings) {
        std::size_t rank = 1;
        for (const RankedCandidate& rc : candidates) {
            out << source << '\t' << rank++ << '\t' << rc.candidate << '\t'
                << format_double(rc.score) << '\n';
        }
    }
}

RankingSet load_rankings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    RankingSet rankings;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        EntityId source = 0;
        std::size_t rank = 0;
        RankedCandidate rc;
        if (!(row >> source >> rank >> rc.candidate >> rc.score)) {
            throw FormatError(path + ": bad ranking row: " + line);
        }
        rankings[source].push_back(rc);
    }
    return rankings;
}

// --- significance -----------------------------------------------------------------

std::optional<TTestResult> paired_t_test(std::span<const double> a,
                                         std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("paired_t_test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);
    if (var <= 0.0) return std::nullopt;
    TTestResult result;
    result.df = n - 1;
    result.t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(result.df);
    result.p_two_sided = incomplete_beta(df / 2.0, 0.5, df / (df + result.t * result.t));
    return result;
}

} // namespace relrank
