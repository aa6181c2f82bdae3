#include "relrank/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace relrank {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    const std::string buf(s);
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::string sanitize_field(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

} // namespace

// --- periods -----------------------------------------------------------------

int parse_period(const std::string& text) {
    const auto dash = text.find('-');
    if (dash == std::string::npos) {
        int idx = 0;
        if (!parse_int(std::string_view(text), idx)) {
            throw FormatError("bad period '" + text + "' (expected YYYY-MM or integer)");
        }
        return idx;
    }
    int year = 0, month = 0;
    if (!parse_int(std::string_view(text).substr(0, dash), year) ||
        !parse_int(std::string_view(text).substr(dash + 1), month) || month < 1 ||
        month > 12) {
        throw FormatError("bad period '" + text + "' (expected YYYY-MM)");
    }
    return (year - 2001) * 12 + (month - 1);
}

std::string format_period(int period) {
    int year = 2001 + period / 12;
    int month = period % 12;
    if (month < 0) {
        month += 12;
        year -= 1;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month + 1);
    return buf;
}

// --- entities ----------------------------------------------------------------

std::string canonical_title(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    bool in_gap = false;
    for (std::size_t i = begin; i < end; ++i) {
        const char c = raw[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_gap = true;
            continue;
        }
        if (in_gap) {
            out.push_back('_');
            in_gap = false;
        }
        out.push_back(c);
    }
    return out;
}

EntityId EntityCatalog::intern(std::string_view title) {
    std::string canon = canonical_title(title);
    if (canon.empty()) throw FormatError("cannot intern an empty entity title");
    auto it = title_to_id_.find(canon);
    if (it != title_to_id_.end()) return it->second;
    const EntityId id = next_id_++;
    title_to_id_.emplace(canon, id);
    index_of_.emplace(id, entities_.size());
    entities_.push_back(Entity{id, std::move(canon), {}, {}});
    return id;
}

EntityId EntityCatalog::insert_with_id(EntityId id, std::string_view title) {
    std::string canon = canonical_title(title);
    if (canon.empty()) throw FormatError("cannot insert an empty entity title");
    if (index_of_.count(id)) throw FormatError("duplicate entity id " + std::to_string(id));
    if (title_to_id_.count(canon)) throw FormatError("duplicate entity title " + canon);
    title_to_id_.emplace(canon, id);
    index_of_.emplace(id, entities_.size());
    entities_.push_back(Entity{id, std::move(canon), {}, {}});
    next_id_ = std::max(next_id_, id + 1);
    return id;
}

std::optional<EntityId> EntityCatalog::find(std::string_view title) const {
    auto it = title_to_id_.find(canonical_title(title));
    if (it == title_to_id_.end()) return std::nullopt;
    return it->second;
}

Entity& EntityCatalog::entity(EntityId id) {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) throw DomainError("unknown entity id " + std::to_string(id));
    return entities_[it->second];
}

const Entity& EntityCatalog::entity(EntityId id) const {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) throw DomainError("unknown entity id " + std::to_string(id));
    return entities_[it->second];
}

void EntityCatalog::set_abstract(EntityId id, std::string text) {
    entity(id).abstract_text = std::move(text);
}

void EntityCatalog::set_links(EntityId id, std::vector<EntityId> links) {
    std::vector<EntityId> kept;
    kept.reserve(links.size());
    for (EntityId target : links) {
        if (target != id) kept.push_back(target);
    }
    entity(id).links = std::move(kept);
}

// --- clickstream ----------------------------------------------------------------

namespace {

constexpr std::string_view kExternalPrefix = "other-";

bool is_external_tag(std::string_view prev) {
    return prev.substr(0, kExternalPrefix.size()) == kExternalPrefix;
}

} // namespace

std::vector<NavigationRecord> parse_clickstream(std::istream& in, int period,
                                                EntityCatalog& catalog,
                                                ClickstreamStats* stats,
                                                const ClickstreamOptions& options) {
    if (!in.good()) throw IoError("clickstream stream is not readable");

    std::vector<NavigationRecord> records;
    ClickstreamStats local;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++local.lines;
        const auto fields = split(line, '\t');
        auto reject = [&] {
            ++local.malformed;
            if (local.malformed_samples.size() < 5) local.malformed_samples.push_back(line);
        };
        if (fields.size() != 4) {
            reject();
            continue;
        }
        const std::string_view prev = fields[0];
        const std::string_view curr = fields[1];
        const std::string_view type = fields[2];
        long long count = 0;
        if (prev.empty() || curr.empty() || type.empty() ||
            !parse_int(fields[3], count) || count < 0) {
            reject();
            continue;
        }
        if (is_external_tag(prev)) {
            NavigationRecord rec;
            rec.source = kExternalSource;
            rec.source_tag = canonical_title(prev);
            rec.target = catalog.intern(curr);
            rec.period = period;
            rec.count = count;
            records.push_back(std::move(rec));
            ++local.records;
        } else if (type == "link") {
            NavigationRecord rec;
            rec.source = catalog.intern(prev);
            rec.target = catalog.intern(curr);
            rec.period = period;
            rec.count = count;
            records.push_back(std::move(rec));
            ++local.records;
        } else {
            // Well-formed but not a navigation we retain (e.g. type `other`).
            ++local.ignored;
        }
    }
    if (in.bad()) throw IoError("I/O failure while reading clickstream");

    if (local.malformed > options.malformed_grace && local.lines > 0 &&
        static_cast<double>(local.malformed) / static_cast<double>(local.lines) >
            options.max_malformed_fraction) {
        std::string msg = "clickstream rejected: " + std::to_string(local.malformed) +
                          " of " + std::to_string(local.lines) + " lines malformed;";
        for (const std::string& s : local.malformed_samples) msg += "\n  sample: " + s;
        throw FormatError(msg);
    }
    if (stats) *stats = std::move(local);
    return records;
}

void write_clickstream(std::span<const NavigationRecord> records,
                       const EntityCatalog& catalog, std::ostream& out) {
    for (const NavigationRecord& rec : records) {
        if (rec.is_external()) {
            out << rec.source_tag << '\t' << catalog.entity(rec.target).title
                << "\texternal\t" << rec.count << '\n';
        } else {
            out << catalog.entity(rec.source).title << '\t'
                << catalog.entity(rec.target).title << "\tlink\t" << rec.count << '\n';
        }
    }
}

// --- dataset construction ----------------------------------------------------------

std::vector<EntityId> select_seeds(std::span<const NavigationRecord> records,
                                   std::size_t k,
                                   const std::set<std::string>& search_engines,
                                   bool* truncated) {
    std::map<EntityId, long long> totals;
    for (const NavigationRecord& rec : records) {
        if (!rec.is_external()) continue;
        const std::string engine = rec.source_tag.substr(kExternalPrefix.size());
        if (!search_engines.count(engine)) continue;
        totals[rec.target] += rec.count;
    }
    std::vector<std::pair<EntityId, long long>> ranked(totals.begin(), totals.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (truncated) *truncated = ranked.size() < k;
    if (ranked.size() > k) ranked.resize(k);
    std::vector<EntityId> seeds;
    seeds.reserve(ranked.size());
    for (const auto& [id, count] : ranked) seeds.push_back(id);
    return seeds;
}

std::vector<Candidate> candidate_set(EntityId seed,
                                     std::span<const NavigationRecord> records,
                                     long long min_count, std::size_t top_n) {
    std::map<EntityId, long long> totals;
    for (const NavigationRecord& rec : records) {
        if (rec.is_external() || rec.source != seed) continue;
        totals[rec.target] += rec.count;
    }
    std::vector<Candidate> candidates;
    for (const auto& [id, count] : totals) {
        if (count >= min_count) candidates.push_back({id, count});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.id < b.id;
    });
    if (candidates.size() > top_n) candidates.resize(top_n);
    return candidates;
}

double supervision_probability(double y_pos, double y_neg) {
    if (y_pos < 0 || y_neg < 0) throw DomainError("navigation counts must be non-negative");
    if (y_pos + y_neg <= 0) {
        throw DomainError("supervision probability undefined for two zero counts");
    }
    return y_pos / (y_pos + y_neg);
}

std::vector<TrainingTriple> build_triples(std::span<const EntityId> seeds,
                                          std::span<const NavigationRecord> records,
                                          int period, const TripleSampling& sampling,
                                          Rng& rng) {
    std::vector<NavigationRecord> in_period;
    for (const NavigationRecord& rec : records) {
        if (rec.period == period) in_period.push_back(rec);
    }

    std::vector<TrainingTriple> triples;
    for (EntityId seed : seeds) {
        const auto candidates =
            candidate_set(seed, in_period, sampling.min_count, sampling.top_n);
        if (candidates.size() < 2) continue;

        // Candidates are sorted by count descending, so every valid ordered
        // pair is (i, j) with i before j and strictly larger count.
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                if (candidates[i].count > candidates[j].count &&
                    candidates[j].count > 0) {
                    pairs.emplace_back(i, j);
                }
            }
        }
        if (candidates.size() > sampling.all_pairs_threshold &&
            pairs.size() > sampling.budget) {
            // Partial Fisher-Yates: the first `budget` slots become a uniform
            // sample without replacement.
            for (std::size_t i = 0; i < sampling.budget; ++i) {
                const std::size_t j = i + rng.below(pairs.size() - i);
                std::swap(pairs[i], pairs[j]);
            }
            pairs.resize(sampling.budget);
            std::sort(pairs.begin(), pairs.end());
        }
        for (const auto& [i, j] : pairs) {
            TrainingTriple t;
            t.source = seed;
            t.pos = candidates[i].id;
            t.neg = candidates[j].id;
            t.prob = supervision_probability(static_cast<double>(candidates[i].count),
                                             static_cast<double>(candidates[j].count));
            t.period = period;
            triples.push_back(t);
        }
    }
    return triples;
}

// --- temporal signals -----------------------------------------------------------

void PageviewStore::add(EntityId entity, int period, double count, std::size_t dim) {
    if (dim >= dims_) throw DimensionError("pageview dim out of range");
    cells_[dim][{entity, period}] += count;
}

double PageviewStore::get(EntityId entity, int period, std::size_t dim) const {
    if (dim >= dims_) return 0.0;
    auto it = cells_[dim].find({entity, period});
    return it == cells_[dim].end() ? 0.0 : it->second;
}

bool PageviewStore::has_entity(EntityId entity) const {
    for (const auto& m : cells_) {
        auto it = m.lower_bound({entity, std::numeric_limits<int>::min()});
        if (it != m.end() && it->first.first == entity) return true;
    }
    return false;
}

std::optional<std::pair<int, int>> PageviewStore::period_range() const {
    std::optional<std::pair<int, int>> range;
    for (const auto& m : cells_) {
        for (const auto& [key, _] : m) {
            if (!range) {
                range = {key.second, key.second};
            } else {
                range->first = std::min(range->first, key.second);
                range->second = std::max(range->second, key.second);
            }
        }
    }
    return range;
}

SeriesNormalization series_normalization_from_string(const std::string& s) {
    if (s == "none") return SeriesNormalization::None;
    if (s == "log_zscore") return SeriesNormalization::LogZscore;
    throw ConfigError("unknown series normalization: " + s);
}

std::string to_string(SeriesNormalization n) {
    return n == SeriesNormalization::None ? "none" : "log_zscore";
}

TimeSeries build_time_series(const PageviewStore& store, EntityId entity,
                             int end_period, std::size_t t_len, std::size_t dims,
                             SeriesNormalization norm) {
    if (t_len == 0 || dims == 0) throw DimensionError("time series needs T >= 1, D >= 1");
    TimeSeries series;
    series.end_period = end_period;
    series.values = Tensor({dims, t_len});
    series.missing = !store.has_entity(entity);
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t k = 0; k < t_len; ++k) {
            const int period = end_period - static_cast<int>(t_len - 1 - k);
            series.values.at(d, k) = static_cast<Real>(store.get(entity, period, d));
        }
    }
    if (norm == SeriesNormalization::LogZscore) {
        for (std::size_t d = 0; d < dims; ++d) {
            double mean = 0.0;
            for (std::size_t k = 0; k < t_len; ++k) {
                auto& cell = series.values.at(d, k);
                cell = static_cast<Real>(std::log1p(static_cast<double>(cell)));
                mean += cell;
            }
            mean /= static_cast<double>(t_len);
            double var = 0.0;
            for (std::size_t k = 0; k < t_len; ++k) {
                const double diff = series.values.at(d, k) - mean;
                var += diff * diff;
            }
            var /= static_cast<double>(t_len);
            if (var <= 0.0) {
                for (std::size_t k = 0; k < t_len; ++k) series.values.at(d, k) = Real(0);
            } else {
                const double inv_std = 1.0 / std::sqrt(var);
                for (std::size_t k = 0; k < t_len; ++k) {
                    series.values.at(d, k) =
                        static_cast<Real>((series.values.at(d, k) - mean) * inv_std);
                }
            }
        }
    }
    return series;
}

// --- splits ---------------------------------------------------------------------

DatasetSplit split_seeds(std::span<const EntityId> seeds,
                         std::array<double, 3> ratios, std::uint64_t rng_seed) {
    double sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw ConfigError("split ratios must be non-negative");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1 (got " + format_double(sum) + ")");
    }

    std::vector<EntityId> shuffled(seeds.begin(), seeds.end());
    Rng rng(rng_seed);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(shuffled[i - 1], shuffled[j]);
    }

    const std::size_t n = shuffled.size();
    std::size_t n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
    std::size_t n_dev = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_dev = std::min(n_dev, n - n_train);

    DatasetSplit split;
    split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
    split.dev.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_dev);
    split.test.assign(shuffled.begin() + n_train + n_dev, shuffled.end());
    return split;
}

// --- normalized corpus files ---------------------------------------------------------

void save_entities(const EntityCatalog& catalog, const std::string& path) {
    auto out = open_output(path);
    std::vector<const Entity*> sorted;
    sorted.reserve(catalog.size());
    for (const Entity& e : catalog.entities()) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(),
              [](const Entity* a, const Entity* b) { return a->id < b->id; });
    for (const Entity* e : sorted) {
        out << e->id << '\t' << e->title << '\t' << sanitize_field(e->abstract_text) << '\n';
    }
}

void load_entities(const std::string& path, EntityCatalog& catalog) {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto first = line.find('\t');
        const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
        if (second == std::string::npos) throw FormatError(path + ": bad entity row: " + line);
        EntityId id = 0;
        if (!parse_int(std::string_view(line).substr(0, first), id)) {
            throw FormatError(path + ": bad entity id in: " + line);
        }
        catalog.insert_with_id(id, line.substr(first + 1, second - first - 1));
        catalog.set_abstract(id, line.substr(second + 1));
    }
}

void save_links(const EntityCatalog& catalog, const std::string& path) {
    auto out = open_output(path);
    std::vector<const Entity*> sorted;
    for (const Entity& e : catalog.entities()) {
        if (!e.links.empty()) sorted.push_back(&e);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const Entity* a, const Entity* b) { return a->id < b->id; });
    for (const Entity* e : sorted) {
        out << e->id << '\t';
        for (std::size_t i = 0; i < e->links.size(); ++i) {
            if (i) out << ' ';
            out << e->links[i];
        }
        out << '\n';
    }
}

void load_links(const std::string& path, EntityCatalog& catalog) {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError(path + ": bad links row: " + line);
        EntityId id = 0;
        if (!parse_int(std::string_view(line).substr(0, tab), id)) {
            throw FormatError(path + ": bad entity id in: " + line);
        }
        std::vector<EntityId> targets;
        std::istringstream rest(line.substr(tab + 1));
        EntityId t = 0;
        while (rest >> t) targets.push_back(t);
        catalog.set_links(id, std::move(targets));
    }
}

void save_navigations(std::span<const NavigationRecord> records, const std::string& path) {
    auto out = open_output(path);
    for (const NavigationRecord& rec : records) {
        if (rec.is_external()) {
            out << rec.source_tag;
        } else {
            out << rec.source;
        }
        out << '\t' << rec.target << '\t' << rec.period << '\t' << rec.count << '\n';
    }
}

std::vector<NavigationRecord> load_navigations(const std::string& path) {
    auto in = open_input(path);
    std::vector<NavigationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 4) throw FormatError(path + ": bad navigation row: " + line);
        NavigationRecord rec;
        if (is_external_tag(fields[0])) {
            rec.source = kExternalSource;
            rec.source_tag = std::string(fields[0]);
        } else if (!parse_int(fields[0], rec.source)) {
            throw FormatError(path + ": bad source in: " + line);
        }
        if (!parse_int(fields[1], rec.target) || !parse_int(fields[2], rec.period) ||
            !parse_int(fields[3], rec.count) || rec.count < 0) {
            throw FormatError(path + ": bad navigation row: " + line);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void save_pageviews(const PageviewStore& store, const std::string& path) {
    auto out = open_output(path);
    for (std::size_t d = 0; d < store.dims(); ++d) {
        for (const auto& [key, count] : store.cells(d)) {
            out << key.first << '\t' << key.second << '\t' << format_double(count);
            if (store.dims() > 1) out << '\t' << d;
            out << '\n';
        }
    }
}

PageviewStore load_pageviews(const std::string& path, std::size_t dims) {
    auto in = open_input(path);
    PageviewStore store(dims);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3 && fields.size() != 4) {
            throw FormatError(path + ": bad pageview row: " + line);
        }
        EntityId id = 0;
        int period = 0;
        double count = 0;
        std::size_t dim = 0;
        if (!parse_int(fields[0], id) || !parse_int(fields[1], period) ||
            !parse_double(fields[2], count) ||
            (fields.size() == 4 && !parse_int(fields[3], dim))) {
            throw FormatError(path + ": bad pageview row: " + line);
        }
        store.add(id, period, count, dim);
    }
    return store;
}

void save_triples(std::span<const TrainingTriple> triples, const std::string& path) {
    auto out = open_output(path);
    for (const TrainingTriple& t : triples) {
        out << t.source << '\t' << t.pos << '\t' << t.neg << '\t' << format_double(t.prob)
            << '\t' << t.period << '\n';
    }
}

std::vector<TrainingTriple> load_triples(const std::string& path) {
    auto in = open_input(path);
    std::vector<TrainingTriple> triples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 5) throw FormatError(path + ": bad triple row: " + line);
        TrainingTriple t;
        if (!parse_int(fields[0], t.source) || !parse_int(fields[1], t.pos) ||
            !parse_int(fields[2], t.neg) || !parse_double(fields[3], t.prob) ||
            !parse_int(fields[4], t.period)) {
            throw FormatError(path + ": bad triple row: " + line);
        }
        if (t.pos == t.neg || t.prob <= 0.0 || t.prob >= 1.0) {
            throw FormatError(path + ": invalid triple (needs pos != neg, 0 < prob < 1): " +
                              line);
        }
        triples.push_back(t);
    }
    return triples;
}

void save_split(const DatasetSplit& split, const std::string& path) {
    auto out = open_output(path);
    for (EntityId id : split.train) out << id << "\ttrain\n";
    for (EntityId id : split.dev) out << id << "\tdev\n";
    for (EntityId id : split.test) out << id << "\ttest\n";
}

DatasetSplit load_split(const std::string& path) {
    auto in = open_input(path);
    DatasetSplit result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 2) throw FormatError(path + ": bad split row: " + line);
        EntityId id = 0;
        if (!parse_int(fields[0], id)) throw FormatError(path + ": bad split row: " + line);
        if (fields[1] == "train") {
            result.train.push_back(id);
        } else if (fields[1] == "dev") {
            result.dev.push_back(id);
        } else if (fields[1] == "test") {
            result.test.push_back(id);
        } else {
            throw FormatError(path + ": unknown split label in: " + line);
        }
    }
    return result;
}

// --- raw input readers -----------------------------------------------------------

void load_abstracts_file(const std::string& path, EntityCatalog& catalog) {
    // Same layout as the normalized entities file.
    load_entities(path, catalog);
}

void load_links_file(const std::string& path, EntityCatalog& catalog) {
    load_links(path, catalog);
}

void load_raw_pageviews(const std::string& path, EntityCatalog& catalog,
                        PageviewStore& store) {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
        const auto fields = split(line, sep);
        if (fields.size() != 3) throw FormatError(path + ": bad pageview row: " + line);
        double count = 0;
        if (!parse_double(fields[2], count) || count < 0) {
            throw FormatError(path + ": bad pageview count in: " + line);
        }
        const EntityId id = catalog.intern(fields[0]);
        store.add(id, parse_period(std::string(fields[1])), count, 0);
    }
}

} // namespace relrank
