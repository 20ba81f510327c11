#pragma once

#include <stdexcept>
#include <vector>

namespace qnet {

/// A channel on the 100 GHz ITU DWDM grid. Channel n sits at 190 + 0.1*n THz.
struct ItuChannel {
    int index{};
    friend bool operator==(ItuChannel, ItuChannel) = default;
};

/// Logical channel label, centred on the source's degenerate channel (LC 0).
/// LC +k and LC -k carry entangled partner photons.
struct LogicalChannel {
    int lc{};
    friend bool operator==(LogicalChannel, LogicalChannel) = default;
    friend auto operator<=>(LogicalChannel, LogicalChannel) = default;
};

/// The entangled pair of channels (+k, -k), k >= 1.
struct ConjugatePair {
    int k{};
    friend bool operator==(ConjugatePair, ConjugatePair) = default;
    friend auto operator<=>(ConjugatePair, ConjugatePair) = default;
};

/// Description of the DWDM grid used by one source: which ITU channels exist,
/// which channel is the degenerate centre, and which logical channels carry a
/// 1-to-4 splitter.
///
/// Defaults describe a 31-channel source: ITU 19..49 centred on ITU 34
/// (193.4 THz), with splitters on every channel where |LC| >= 6.
struct GridConfig {
    int min_itu{19};
    int max_itu{49};
    int center_itu{34};
    int split_min_abs_lc{6};

    int min_lc() const { return min_itu - center_itu; }
    int max_lc() const { return max_itu - center_itu; }

    bool contains_itu(int index) const { return index >= min_itu && index <= max_itu; }
    bool contains_lc(int lc) const { return lc >= min_lc() && lc <= max_lc(); }

    LogicalChannel itu_to_lc(ItuChannel itu) const;
    ItuChannel lc_to_itu(LogicalChannel ch) const;

    /// Centre frequency of a logical channel in THz.
    double lc_frequency_thz(LogicalChannel ch) const;

    /// The entangled partner of a channel. LC 0 pairs with itself and is
    /// rejected.
    LogicalChannel conjugate(LogicalChannel ch) const;

    /// Whether the channel passes through a 1-to-4 splitter.
    bool is_split(LogicalChannel ch) const;
    bool is_split(ConjugatePair pair) const;

    /// Users a single copy of this channel can be fanned out to.
    int port_capacity(LogicalChannel ch) const { return is_split(ch) ? 4 : 1; }

    /// All conjugate pairs with both members on the grid, ascending k.
    std::vector<ConjugatePair> conjugate_pairs() const;

    void validate() const;
};

}  // namespace qnet
