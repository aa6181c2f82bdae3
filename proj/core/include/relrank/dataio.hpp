#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relrank/common.hpp"
#include "relrank/rng.hpp"
#include "relrank/tensor.hpp"

namespace relrank {

// --- periods -----------------------------------------------------------------

// Month index: (year - 2001) * 12 + (month - 1). Total order over periods,
// locale independent.
int parse_period(const std::string& text);
std::string format_period(int period);

// --- entities ----------------------------------------------------------------

struct Entity {
    EntityId id = 0;
    std::string title;
    std::string abstract_text;
    std::vector<EntityId> links; // ordered link profile, no self-references
};

// Title canonicalization: trim, collapse inner whitespace to '_'.
std::string canonical_title(std::string_view raw);

// Owns entities and the title -> id mapping. Ids are dense surrogates
// assigned in interning order unless loaded from a normalized corpus.
class EntityCatalog {
public:
    EntityId intern(std::string_view title);
    EntityId insert_with_id(EntityId id, std::string_view title);
    std::optional<EntityId> find(std::string_view title) const;

    Entity& entity(EntityId id);
    const Entity& entity(EntityId id) const;
    bool contains(EntityId id) const { return index_of_.count(id) > 0; }

    void set_abstract(EntityId id, std::string text);
    // Drops self-references, keeps order.
    void set_links(EntityId id, std::vector<EntityId> links);

    std::size_t size() const { return entities_.size(); }
    const std::vector<Entity>& entities() const { return entities_; }

private:
    std::vector<Entity> entities_;
    std::unordered_map<std::string, EntityId> title_to_id_;
    std::unordered_map<EntityId, std::size_t> index_of_;
    EntityId next_id_ = 1;
};

// --- navigation --------------------------------------------------------------

inline constexpr EntityId kExternalSource = -1;

struct NavigationRecord {
    EntityId source = kExternalSource; // kExternalSource for off-site origins
    std::string source_tag;            // e.g. "other-google" when external
    EntityId target = 0;
    int period = 0;
    long long count = 0;

    bool is_external() const { return source == kExternalSource; }
};

struct ClickstreamStats {
    std::size_t lines = 0;
    std::size_t records = 0;
    std::size_t malformed = 0;
    std::size_t ignored = 0; // well-formed rows of types we do not retain
    std::vector<std::string> malformed_samples;
};

struct ClickstreamOptions {
    // A dump is rejected when more than this fraction of its lines is
    // malformed, once past the grace count (small hand-built fixtures with a
    // couple of bad rows still parse).
    double max_malformed_fraction = 0.01;
    std::size_t malformed_grace = 10;
};

// Parses tab-separated `prev<TAB>curr<TAB>type<TAB>count` rows. Rows of type
// `link` become entity->entity navigations; rows whose prev starts with
// `other-` become external navigations. Malformed rows are counted, sampled
// and skipped.
std::vector<NavigationRecord> parse_clickstream(std::istream& in, int period,
                                                EntityCatalog& catalog,
                                                ClickstreamStats* stats = nullptr,
                                                const ClickstreamOptions& options = {});

// Re-serializes records in the clickstream layout (lossless for the retained
// fields: endpoints, type, count).
void write_clickstream(std::span<const NavigationRecord> records,
                       const EntityCatalog& catalog, std::ostream& out);

// --- dataset construction ------------------------------------------------------

// Top-k entities by summed navigation count from the given search engines
// (matched against the tag after the `other-` prefix). Ties break by entity
// id ascending. Returns all qualifying entities when fewer than k exist.
std::vector<EntityId> select_seeds(std::span<const NavigationRecord> records,
                                   std::size_t k,
                                   const std::set<std::string>& search_engines,
                                   bool* truncated = nullptr);

struct Candidate {
    EntityId id = 0;
    long long count = 0;
};

// Targets navigated from `seed` with count >= min_count, ordered by count
// descending then id ascending, truncated to top_n.
std::vector<Candidate> candidate_set(EntityId seed,
                                     std::span<const NavigationRecord> records,
                                     long long min_count = 10,
                                     std::size_t top_n = 100);

// P = y_pos / (y_pos + y_neg). Both zero -> DomainError.
double supervision_probability(double y_pos, double y_neg);

struct TrainingTriple {
    EntityId source = 0;
    EntityId pos = 0;
    EntityId neg = 0;
    double prob = 0.0; // strictly inside (0, 1)
    int period = 0;
};

struct TripleSampling {
    long long min_count = 10;
    std::size_t top_n = 100;
    // All ordered pairs when a seed has at most `all_pairs_threshold`
    // candidates, otherwise a uniform sample of `budget` pairs.
    std::size_t all_pairs_threshold = 50;
    std::size_t budget = 2000;
};

// Ordered preference pairs from each seed's candidate set at `period`.
// Pairs with equal counts carry no signal and are excluded, which also keeps
// every probability strictly inside (0, 1).
std::vector<TrainingTriple> build_triples(std::span<const EntityId> seeds,
                                          std::span<const NavigationRecord> records,
                                          int period, const TripleSampling& sampling,
                                          Rng& rng);

// --- temporal signals -----------------------------------------------------------

// Monthly signal counts per entity; dimension 0 is the view count, further
// dimensions hold optional extra properties.
class PageviewStore {
public:
    explicit PageviewStore(std::size_t dims = 1) : dims_(dims) {}

    std::size_t dims() const { return dims_; }
    void add(EntityId entity, int period, double count, std::size_t dim = 0);
    double get(EntityId entity, int period, std::size_t dim = 0) const;
    bool has_entity(EntityId entity) const;
    std::optional<std::pair<int, int>> period_range() const;

    const std::map<std::pair<EntityId, int>, double>& cells(std::size_t dim) const {
        return cells_[dim];
    }

private:
    std::size_t dims_;
    // dim -> (entity, period) -> count; ordered for deterministic output
    std::vector<std::map<std::pair<EntityId, int>, double>> cells_{dims_};
};

enum class SeriesNormalization { None, LogZscore };

SeriesNormalization series_normalization_from_string(const std::string& s);
std::string to_string(SeriesNormalization n);

struct TimeSeries {
    Tensor values; // (D, T)
    int end_period = 0;
    bool missing = false; // entity absent from the source entirely
};

// D x T matrix whose last column is `end_period`. Missing months impute to
// zero. LogZscore: per-cell log1p, then per-signal z-score over the window;
// zero-variance rows map to all zeros.
TimeSeries build_time_series(const PageviewStore& store, EntityId entity,
                             int end_period, std::size_t t_len, std::size_t dims,
                             SeriesNormalization norm = SeriesNormalization::LogZscore);

// --- splits ---------------------------------------------------------------------

struct DatasetSplit {
    std::vector<EntityId> train;
    std::vector<EntityId> dev;
    std::vector<EntityId> test;
};

// Deterministic shuffled partition. Ratios must sum to 1 within 1e-9.
DatasetSplit split_seeds(std::span<const EntityId> seeds,
                         std::array<double, 3> ratios, std::uint64_t rng_seed);

// --- normalized corpus files ------------------------------------------------------

// Formats (all UTF-8, tab-separated, one record per line):
//   entities.tsv:    id <TAB> title <TAB> abstract
//   links.tsv:       id <TAB> space-separated target ids
//   navigations.tsv: source-id-or-tag <TAB> target id <TAB> period <TAB> count
//   pageviews.tsv:   entity id <TAB> period <TAB> count [<TAB> dim]
//   triples.tsv:     source <TAB> pos <TAB> neg <TAB> prob <TAB> period
//   splits.tsv:      entity id <TAB> train|dev|test
void save_entities(const EntityCatalog& catalog, const std::string& path);
void load_entities(const std::string& path, EntityCatalog& catalog);
void save_links(const EntityCatalog& catalog, const std::string& path);
void load_links(const std::string& path, EntityCatalog& catalog);
void save_navigations(std::span<const NavigationRecord> records, const std::string& path);
std::vector<NavigationRecord> load_navigations(const std::string& path);
void save_pageviews(const PageviewStore& store, const std::string& path);
PageviewStore load_pageviews(const std::string& path, std::size_t dims = 1);
void save_triples(std::span<const TrainingTriple> triples, const std::string& path);
std::vector<TrainingTriple> load_triples(const std::string& path);
void save_split(const DatasetSplit& split, const std::string& path);
DatasetSplit load_split(const std::string& path);

// Raw input readers (documented fixture formats):
//   abstracts: id <TAB> title <TAB> abstract
//   links:     id <TAB> space-separated target ids
//   pageviews: title <SEP> period <SEP> count, SEP = tab or comma
void load_abstracts_file(const std::string& path, EntityCatalog& catalog);
void load_links_file(const std::string& path, EntityCatalog& catalog);
void load_raw_pageviews(const std::string& path, EntityCatalog& catalog, PageviewStore& store);

} // namespace relrank
