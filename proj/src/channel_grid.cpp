#include "qnet/channel_grid.hpp"

#include <string>

namespace qnet {

namespace {

[[noreturn]] void throw_out_of_grid(const char* what, int value, int lo, int hi) {
    throw std::out_of_range(std::string(what) + " " + std::to_string(value) +
                            " outside grid range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
}

}  // namespace

LogicalChannel GridConfig::itu_to_lc(ItuChannel itu) const {
    if (!contains_itu(itu.index)) throw_out_of_grid("ITU channel", itu.index, min_itu, max_itu);
    return LogicalChannel{itu.index - center_itu};
}

ItuChannel GridConfig::lc_to_itu(LogicalChannel ch) const {
    if (!contains_lc(ch.lc)) throw_out_of_grid("logical channel", ch.lc, min_lc(), max_lc());
    return ItuChannel{ch.lc + center_itu};
}

double GridConfig::lc_frequency_thz(LogicalChannel ch) const {
    ItuChannel itu = lc_to_itu(ch);
    return 190.0 + 0.1 * itu.index;
}

LogicalChannel GridConfig::conjugate(LogicalChannel ch) const {
    if (!contains_lc(ch.lc)) throw_out_of_grid("logical channel", ch.lc, min_lc(), max_lc());
    if (ch.lc == 0)
        throw std::domain_error("LC 0 is the degenerate centre channel and has no distinct conjugate");
    return LogicalChannel{-ch.lc};
}

bool GridConfig::is_split(LogicalChannel ch) const {
    if (!contains_lc(ch.lc)) throw_out_of_grid("logical channel", ch.lc, min_lc(), max_lc());
    return ch.lc != 0 && std::abs(ch.lc) >= split_min_abs_lc;
}

bool GridConfig::is_split(ConjugatePair pair) const {
    return is_split(LogicalChannel{pair.k});
}

std::vector<ConjugatePair> GridConfig::conjugate_pairs() const {
    std::vector<ConjugatePair> pairs;
    for (int k = 1; contains_lc(k) && contains_lc(-k); ++k) pairs.push_back(ConjugatePair{k});
    return pairs;
}

void GridConfig::validate() const {
    if (min_itu > max_itu) throw std::invalid_argument("grid: min_itu > max_itu");
    if (!contains_itu(center_itu)) throw std::invalid_argument("grid: centre channel outside range");
    if (split_min_abs_lc < 1) throw std::invalid_argument("grid: split_min_abs_lc must be >= 1");
}

}  // namespace qnet
