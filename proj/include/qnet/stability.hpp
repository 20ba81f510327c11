#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnet/scoring.hpp"

namespace qnet {

/// One logged measurement of a link's secret-key rate.
struct SkrSample {
    double timestamp_s{};  // seconds since epoch
    std::string link_id;
    double skr_bps{};
};

/// Downtime to exclude from every statistic, half-open [start, end).
struct MaskInterval {
    double start_s{};
    double end_s{};
    std::string reason;
};

/// Per-link binned SKR means over a common origin (bin i covers
/// [i*width, (i+1)*width)). A bin is masked when it overlaps any mask
/// interval; masked bins take no part in failure detection or summaries.
class SkrTrace {
public:
    explicit SkrTrace(double bin_width_s = 600.0);

    double bin_width_s() const { return bin_width_s_; }
    std::int64_t bin_of(double timestamp_s) const;
    double bin_start_s(std::int64_t bin) const { return static_cast<double>(bin) * bin_width_s_; }

    /// Accumulate one sample into its bin. Rejects negative or non-finite
    /// SKRs and empty link ids with std::invalid_argument.
    void add_sample(const SkrSample& sample);
    /// Register downtime. Rejects intervals with end <= start.
    void add_mask(MaskInterval mask);

    bool empty() const { return bins_.empty(); }
    std::int64_t first_bin() const;  // throws std::domain_error when empty
    std::int64_t last_bin() const;

    std::vector<std::string> links() const;
    const std::vector<MaskInterval>& masks() const { return masks_; }

    bool bin_masked(std::int64_t bin) const;
    /// Mean SKR of a link in a bin; nullopt when the link has no samples
    /// there (treated as downtime for that link, never as failure).
    std::optional<double> link_mean(const std::string& link_id, std::int64_t bin) const;

private:
    struct Accum {
        double sum{};
        std::size_t count{};
    };

    double bin_width_s_;
    std::map<std::string, std::map<std::int64_t, Accum>> bins_;  // link -> bin -> accum
    std::vector<MaskInterval> masks_;
};

struct IngestResult {
    SkrTrace trace;
    std::size_t accepted{};
    std::size_t rejected{};
    std::vector<std::string> errors;  // first few reasons, for diagnostics
};

/// One JSON object per line with fields timestamp, link, skr_bps. Malformed
/// lines are counted and skipped, never fatal.
IngestResult ingest_jsonl(std::istream& in, double bin_width_s = 600.0);

/// CSV with a header naming timestamp, link and skr_bps columns (any order).
/// A header without those columns is std::invalid_argument; bad rows are
/// counted and skipped.
IngestResult ingest_csv(std::istream& in, double bin_width_s = 600.0);

/// Mask file: JSON array of {start_s, end_s, reason} or CSV with a
/// start_s,end_s[,reason] header. Detected by the first non-space byte.
std::vector<MaskInterval> parse_masks(std::istream& in);

/// Earliest unmasked bin where any link's mean falls below the threshold;
/// the returned time is that bin's start. nullopt when no bin fails.
std::optional<double> detect_failure(const SkrTrace& trace, double fail_threshold_bps = 0.1);

/// How the headline full-period value of a summary row is aggregated.
enum class FullPeriodAggregation {
    scoring_of_means,    // score each link's time-averaged SKR, then combine
    mean_of_bin_scores,  // arithmetic mean of the per-bin AE-SKR series
};

/// One row of the summary: a selector's per-bin AE-SKR series plus the
/// full/max/min figures over the pre-failure window.
struct SelectorSummary {
    std::string selector;
    Aeskr full_period;
    Aeskr max_bin;
    Aeskr min_bin;
    std::vector<std::pair<double, Aeskr>> series;  // (bin start s, value), includes post-failure
};

struct StabilitySummary {
    double bin_width_s{};
    std::optional<double> failure_time_s;
    std::size_t bins_summarized{};  // unmasked bins before the failure bin
    FullPeriodAggregation aggregation{FullPeriodAggregation::scoring_of_means};
    std::vector<SelectorSummary> rows;  // per user, per scenario, full network
};

/// Per-user, per-scenario and full-network summaries over the pre-failure
/// window (every unmasked bin when nothing fails). Selectors matching no
/// logged link are omitted rather than reported. Throws std::domain_error
/// when the pre-failure window holds no unmasked data at all.
StabilitySummary summarize(const SkrTrace& trace, const UserDirectory& users,
                           const ScoreFunction& score,
                           FullPeriodAggregation aggregation = FullPeriodAggregation::scoring_of_means,
                           double fail_threshold_bps = 0.1);

}  // namespace qnet
