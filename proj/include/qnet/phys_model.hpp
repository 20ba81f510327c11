#pragma once

#include <map>
#include <string>
#include <vector>

#include "qnet/topology.hpp"

namespace qnet {

/// Entangled-pair source: pairs/s emitted into each conjugate channel pair at
/// the source output, before any splitting, with an optional per-pair
/// relative brightness (default uniform).
struct SourceModel {
    double pair_rate_per_channel{1e6};
    std::map<int, double> channel_spectrum;  // k -> relative brightness

    double mu_for_pair(int k) const {
        auto it = channel_spectrum.find(k);
        return pair_rate_per_channel * (it == channel_spectrum.end() ? 1.0 : it->second);
    }

    void validate() const;
};

/// One user's measurement chain.
struct ReceiverModel {
    double detector_efficiency{1.0};
    double dark_count_rate{0.0};  // counts/s across the receiver
    double internal_loss_db{0.0};
    double visibility{1.0};  // polarisation visibility against the shared reference

    void validate() const;
};

/// 1-to-4 splitter loss: exactly 1/4 per side by default, or the nominal
/// 6.00 dB figure when exact_quarter is off.
struct SplitterModel {
    bool exact_quarter{true};

    double per_side_transmission() const;
};

struct ProtocolParams {
    double sifting_factor{0.5};       // passive 50/50 basis choice
    double ec_efficiency{1.1};        // f_EC >= 1
    double coincidence_window_s{5e-10};

    void validate() const;
};

struct LinkRates {
    double singles_a{};            // counts/s at the first (canonically ordered) user
    double singles_b{};
    double true_coincidences{};    // counts/s
    double accidentals{};          // counts/s
    double qber{};                 // fraction in [0, 0.5]
    double sifted_rate{};          // bits/s
    double skr{};                  // bits/s, clamped at 0
};

/// dB attenuation to a transmission fraction.
double db_to_transmission(double db);

/// Overall transmission of one granted channel copy from the source output to
/// a click: splitter (if the channel is split), one-way deployed fibre,
/// receiver internal loss, detector efficiency.
double channel_transmission(const User& user, LogicalChannel channel, const ReceiverModel& receiver,
                            const GridConfig& grid, const SplitterModel& splitter);

/// Total singles rate at a user: every granted channel plus dark counts.
double singles_rate(const User& user, const ChannelAssignment& assignment, const SourceModel& source,
                    const ReceiverModel& receiver, const SplitterModel& splitter);

struct CoincidenceRates {
    double true_coincidences{};
    double accidentals{};
};

/// True coincidences summed over every conjugate pair serving the link, and
/// accidental coincidences from the two users' full singles rates within the
/// coincidence window. Throws std::invalid_argument when no pair serves the
/// link.
CoincidenceRates coincidence_rates(const User& a, const User& b, const ChannelAssignment& assignment,
                                   const SourceModel& source, const ReceiverModel& receiver_a,
                                   const ReceiverModel& receiver_b, const SplitterModel& splitter,
                                   const ProtocolParams& params);

/// Intrinsic error rate from polarisation visibility: (1 - V) / 2.
double visibility_to_qber(double visibility);

/// QBER of a mix of correlated coincidences (at the intrinsic error rate) and
/// accidentals (error rate 1/2). Throws std::domain_error when both rates are
/// zero.
double link_qber(double true_coincidences, double accidentals, double intrinsic_error);

/// Shannon binary entropy in bits, h(0) = h(1) = 0.
double binary_entropy(double q);

/// Asymptotic BBM92 secret-key rate:
///   sifting * (true + accidentals) * max(0, 1 - f_EC*h(q) - h(q)).
double bbm92_skr(double true_coincidences, double accidentals, double qber,
                 const ProtocolParams& params);

/// Full per-link evaluation. The link's intrinsic error combines both users'
/// visibilities as (1 - Va*Vb) / 2.
LinkRates evaluate_link(const User& a, const User& b, const ChannelAssignment& assignment,
                        const SourceModel& source, const ReceiverModel& receiver_a,
                        const ReceiverModel& receiver_b, const SplitterModel& splitter,
                        const ProtocolParams& params);

}  // namespace qnet
