#include "qnet/stability.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qnet {

namespace {

constexpr std::size_t kMaxStoredErrors = 8;

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<double> parse_double(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

void reject(IngestResult& result, size_t line_no, const std::string& why) {
    ++result.rejected;
    if (result.errors.size() < kMaxStoredErrors)
        result.errors.push_back("line " + std::to_string(line_no) + ": " + why);
}

void accept_sample(IngestResult& result, size_t line_no, double t, const std::string& link,
                   double skr) {
    try {
        result.trace.add_sample({t, link, skr});
        ++result.accepted;
    } catch (const std::invalid_argument& e) {
        reject(result, line_no, e.what());
    }
}

}  // namespace

SkrTrace::SkrTrace(double bin_width_s) : bin_width_s_(bin_width_s) {
    if (!(bin_width_s > 0.0) || !std::isfinite(bin_width_s))
        throw std::invalid_argument("bin width must be positive and finite");
}

std::int64_t SkrTrace::bin_of(double timestamp_s) const {
    return static_cast<std::int64_t>(std::floor(timestamp_s / bin_width_s_));
}

void SkrTrace::add_sample(const SkrSample& sample) {
    if (sample.link_id.empty()) throw std::invalid_argument("sample has an empty link id");
    if (!std::isfinite(sample.timestamp_s))
        throw std::invalid_argument("sample timestamp is not finite");
    if (!std::isfinite(sample.skr_bps) || sample.skr_bps < 0.0)
        throw std::invalid_argument("sample SKR must be finite and non-negative");
    Accum& a = bins_[sample.link_id][bin_of(sample.timestamp_s)];
    a.sum += sample.skr_bps;
    ++a.count;
}

void SkrTrace::add_mask(MaskInterval mask) {
    if (!(mask.end_s > mask.start_s))
        throw std::invalid_argument("mask interval must have end > start");
    masks_.push_back(std::move(mask));
}

std::int64_t SkrTrace::first_bin() const {
    if (bins_.empty()) throw std::domain_error("trace is empty");
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    for (const auto& [link, by_bin] : bins_) first = std::min(first, by_bin.begin()->first);
    return first;
}

std::int64_t SkrTrace::last_bin() const {
    if (bins_.empty()) throw std::domain_error("trace is empty");
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (const auto& [link, by_bin] : bins_) last = std::max(last, by_bin.rbegin()->first);
    return last;
}

std::vector<std::string> SkrTrace::links() const {
    std::vector<std::string> ids;
    ids.reserve(bins_.size());
    for (const auto& [link, by_bin] : bins_) ids.push_back(link);
    return ids;
}

bool SkrTrace::bin_masked(std::int64_t bin) const {
    const double start = bin_start_s(bin);
    const double end = start + bin_width_s_;
    for (const MaskInterval& m : masks_)
        if (m.start_s < end && m.end_s > start) return true;
    return false;
}

std::optional<double> SkrTrace::link_mean(const std::string& link_id, std::int64_t bin) const {
    auto link_it = bins_.find(link_id);
    if (link_it == bins_.end()) return std::nullopt;
    auto bin_it = link_it->second.find(bin);
    if (bin_it == link_it->second.end()) return std::nullopt;
    return bin_it->second.sum / static_cast<double>(bin_it->second.count);
}

IngestResult ingest_jsonl(std::istream& in, double bin_width_s) {
    IngestResult result;
    result.trace = SkrTrace(bin_width_s);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject(result, line_no, "not a JSON object");
            continue;
        }
        if (!j.contains("timestamp") || !j["timestamp"].is_number() || !j.contains("link") ||
            !j["link"].is_string() || !j.contains("skr_bps") || !j["skr_bps"].is_number()) {
            reject(result, line_no, "missing or mistyped timestamp/link/skr_bps");
            continue;
        }
        accept_sample(result, line_no, j["timestamp"].get<double>(), j["link"].get<std::string>(),
                      j["skr_bps"].get<double>());
    }
    return result;
}

IngestResult ingest_csv(std::istream& in, double bin_width_s) {
    IngestResult result;
    result.trace = SkrTrace(bin_width_s);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("CSV trace is empty");
    auto header = split_csv_row(trim(line));
    int t_col = -1, link_col = -1, skr_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        std::string name = lower(trim(header[i]));
        if (name == "timestamp") t_col = static_cast<int>(i);
        if (name == "link") link_col = static_cast<int>(i);
        if (name == "skr_bps") skr_col = static_cast<int>(i);
    }
    if (t_col < 0 || link_col < 0 || skr_col < 0)
        throw std::invalid_argument("CSV header must name timestamp, link and skr_bps columns");

    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto row = split_csv_row(trim(line));
        size_t needed = static_cast<size_t>(std::max({t_col, link_col, skr_col})) + 1;
        if (row.size() < needed) {
            reject(result, line_no, "too few columns");
            continue;
        }
        auto t = parse_double(row[t_col]);
        auto skr = parse_double(row[skr_col]);
        std::string link = trim(row[link_col]);
        if (!t || !skr) {
            reject(result, line_no, "non-numeric timestamp or skr_bps");
            continue;
        }
        accept_sample(result, line_no, *t, link, *skr);
    }
    return result;
}

std::vector<MaskInterval> parse_masks(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<MaskInterval> masks;
    std::string body = trim(text);
    if (body.empty()) return masks;

    if (body.front() == '[') {
        auto j = nlohmann::json::parse(body);  // malformed mask file is fatal
        for (const auto& item : j) {
            MaskInterval m;
            m.start_s = item.at("start_s").get<double>();
            m.end_s = item.at("end_s").get<double>();
            m.reason = item.value("reason", std::string{});
            masks.push_back(std::move(m));
        }
        return masks;
    }

    std::istringstream lines(body);
    std::string line;
    if (!std::getline(lines, line)) return masks;
    auto header = split_csv_row(trim(line));
    int start_col = -1, end_col = -1, reason_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        std::string name = lower(trim(header[i]));
        if (name == "start_s") start_col = static_cast<int>(i);
        if (name == "end_s") end_col = static_cast<int>(i);
        if (name == "reason") reason_col = static_cast<int>(i);
    }
    if (start_col < 0 || end_col < 0)
        throw std::invalid_argument("mask CSV header must name start_s and end_s columns");
    while (std::getline(lines, line)) {
        if (trim(line).empty()) continue;
        auto row = split_csv_row(trim(line));
        auto start = row.size() > static_cast<size_t>(start_col) ? parse_double(row[start_col])
                                                                 : std::nullopt;
        auto end =
            row.size() > static_cast<size_t>(end_col) ? parse_double(row[end_col]) : std::nullopt;
        if (!start || !end) throw std::invalid_argument("mask CSV row has non-numeric bounds");
        MaskInterval m{*start, *end, ""};
        if (reason_col >= 0 && row.size() > static_cast<size_t>(reason_col))
            m.reason = trim(row[reason_col]);
        masks.push_back(std::move(m));
    }
    return masks;
}

std::optional<double> detect_failure(const SkrTrace& trace, double fail_threshold_bps) {
    if (trace.empty()) return std::nullopt;
    const auto links = trace.links();
    for (std::int64_t bin = trace.first_bin(); bin <= trace.last_bin(); ++bin) {
        if (trace.bin_masked(bin)) continue;
        for (const std::string& link : links) {
            auto mean = trace.link_mean(link, bin);
            if (mean && *mean < fail_threshold_bps) return trace.bin_start_s(bin);
        }
    }
    return std::nullopt;
}

namespace {

bool aeskr_less(const Aeskr& x, const Aeskr& y) {
    if (x.is_failed()) return !y.is_failed();
    if (y.is_failed()) return false;
    return x.bps() < y.bps();
}

}  // namespace

StabilitySummary summarize(const SkrTrace& trace, const UserDirectory& users,
                           const ScoreFunction& score, FullPeriodAggregation aggregation,
                           double fail_threshold_bps) {
    if (trace.empty()) throw std::domain_error("trace is empty");

    StabilitySummary summary;
    summary.bin_width_s = trace.bin_width_s();
    summary.aggregation = aggregation;
    summary.failure_time_s = detect_failure(trace, fail_threshold_bps);

    const std::int64_t first = trace.first_bin();
    const std::int64_t last = trace.last_bin();
    // the failure bin itself and everything after it are outside the summary
    const std::int64_t summary_end =
        summary.failure_time_s ? trace.bin_of(*summary.failure_time_s) : last + 1;

    std::vector<std::pair<std::string, UserPair>> links;
    for (const std::string& id : trace.links()) links.emplace_back(id, users.resolve_link_id(id));

    std::vector<std::int64_t> unmasked_bins;
    for (std::int64_t bin = first; bin <= last; ++bin)
        if (!trace.bin_masked(bin)) unmasked_bins.push_back(bin);
    for (std::int64_t bin : unmasked_bins) {
        if (bin >= summary_end) break;
        bool any = false;
        for (const auto& [id, pair] : links)
            if (trace.link_mean(id, bin)) {
                any = true;
                break;
            }
        if (any) ++summary.bins_summarized;
    }
    if (summary.bins_summarized == 0)
        throw std::domain_error("no unmasked data before the failure; nothing to summarize");

    for (const Selector& selector : standard_selectors(users)) {
        std::vector<std::string> mine;
        for (const auto& [id, pair] : links)
            if (selector.matches(pair, users)) mine.push_back(id);
        if (mine.empty()) continue;  // e.g. a network with no D-D links has no D-D row

        SelectorSummary row;
        row.selector = selector.label();
        row.max_bin = Aeskr::failed();
        row.min_bin = Aeskr::failed();
        bool any_prefail = false;
        std::vector<Aeskr> prefail_values;
        for (std::int64_t bin : unmasked_bins) {
            std::vector<double> means;
            for (const std::string& id : mine) {
                auto mean = trace.link_mean(id, bin);
                if (mean) means.push_back(*mean);
            }
            if (means.empty()) continue;  // the whole subgroup is down: masked bin
            Aeskr value = aeskr(means, score);
            row.series.emplace_back(trace.bin_start_s(bin), value);
            if (bin < summary_end) {
                prefail_values.push_back(value);
                if (!any_prefail) {
                    row.max_bin = row.min_bin = value;
                    any_prefail = true;
                } else {
                    if (aeskr_less(row.max_bin, value)) row.max_bin = value;
                    if (aeskr_less(value, row.min_bin)) row.min_bin = value;
                }
            }
        }
        if (!any_prefail) continue;  // nothing to report for this subgroup

        if (aggregation == FullPeriodAggregation::scoring_of_means) {
            std::vector<double> link_means;
            for (const std::string& id : mine) {
                double sum = 0.0;
                size_t n = 0;
                for (std::int64_t bin : unmasked_bins) {
                    if (bin >= summary_end) break;
                    if (auto mean = trace.link_mean(id, bin)) {
                        sum += *mean;
                        ++n;
                    }
                }
                if (n > 0) link_means.push_back(sum / static_cast<double>(n));
            }
            row.full_period = aeskr(link_means, score);
        } else {
            bool failed = false;
            double sum = 0.0;
            for (const Aeskr& v : prefail_values) {
                if (v.is_failed()) {
                    failed = true;
                    break;
                }
                sum += v.bps();
            }
            row.full_period = failed
                                  ? Aeskr::failed()
                                  : Aeskr::of(sum / static_cast<double>(prefail_values.size()));
        }
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

}  // namespace qnet
