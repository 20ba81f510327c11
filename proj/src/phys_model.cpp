#include "qnet/phys_model.hpp"

#include <cmath>
#include <stdexcept>

namespace qnet {

void SourceModel::validate() const {
    if (pair_rate_per_channel < 0) throw std::invalid_argument("source: pair rate must be >= 0");
    for (const auto& [k, b] : channel_spectrum)
        if (b <= 0) throw std::invalid_argument("source: relative brightness must be > 0");
}

void ReceiverModel::validate() const {
    if (detector_efficiency < 0 || detector_efficiency > 1)
        throw std::invalid_argument("receiver: detector efficiency outside [0, 1]");
    if (dark_count_rate < 0) throw std::invalid_argument("receiver: dark count rate must be >= 0");
    if (internal_loss_db < 0) throw std::invalid_argument("receiver: internal loss must be >= 0 dB");
    if (visibility < 0 || visibility > 1)
        throw std::invalid_argument("receiver: visibility outside [0, 1]");
}

double SplitterModel::per_side_transmission() const {
    return exact_quarter ? 0.25 : db_to_transmission(6.0);
}

void ProtocolParams::validate() const {
    if (sifting_factor <= 0 || sifting_factor > 1)
        throw std::invalid_argument("protocol: sifting factor outside (0, 1]");
    if (ec_efficiency < 1) throw std::invalid_argument("protocol: f_EC must be >= 1");
    if (coincidence_window_s <= 0)
        throw std::invalid_argument("protocol: coincidence window must be > 0");
}

double db_to_transmission(double db) { return std::pow(10.0, -db / 10.0); }

double channel_transmission(const User& user, LogicalChannel channel, const ReceiverModel& receiver,
                            const GridConfig& grid, const SplitterModel& splitter) {
    double t = 1.0;
    if (grid.is_split(channel)) t *= splitter.per_side_transmission();
    if (user.attachment == Attachment::deployed) t *= db_to_transmission(user.deployed_loss_db);
    t *= db_to_transmission(receiver.internal_loss_db);
    t *= receiver.detector_efficiency;
    return t;
}

double singles_rate(const User& user, const ChannelAssignment& assignment, const SourceModel& source,
                    const ReceiverModel& receiver, const SplitterModel& splitter) {
    double rate = receiver.dark_count_rate;
    for (LogicalChannel ch : assignment.channels_of(user.id))
        rate += source.mu_for_pair(std::abs(ch.lc)) *
                channel_transmission(user, ch, receiver, assignment.grid(), splitter);
    return rate;
}

CoincidenceRates coincidence_rates(const User& a, const User& b, const ChannelAssignment& assignment,
                                   const SourceModel& source, const ReceiverModel& receiver_a,
                                   const ReceiverModel& receiver_b, const SplitterModel& splitter,
                                   const ProtocolParams& params) {
    const GridConfig& grid = assignment.grid();
    double true_c = 0.0;
    bool served = false;
    for (LogicalChannel ch : assignment.channels_of(a.id)) {
        LogicalChannel partner{-ch.lc};
        if (!assignment.holds(b.id, partner)) continue;
        served = true;
        true_c += source.mu_for_pair(std::abs(ch.lc)) *
                  channel_transmission(a, ch, receiver_a, grid, splitter) *
                  channel_transmission(b, partner, receiver_b, grid, splitter);
    }
    if (!served)
        throw std::invalid_argument("no conjugate pair serves link " + UserPair(a.id, b.id).id());
    double singles_a = singles_rate(a, assignment, source, receiver_a, splitter);
    double singles_b = singles_rate(b, assignment, source, receiver_b, splitter);
    return {true_c, singles_a * singles_b * params.coincidence_window_s};
}

double visibility_to_qber(double visibility) {
    if (visibility < 0 || visibility > 1) throw std::domain_error("visibility outside [0, 1]");
    return (1.0 - visibility) / 2.0;
}

double link_qber(double true_coincidences, double accidentals, double intrinsic_error) {
    if (true_coincidences < 0 || accidentals < 0) throw std::domain_error("negative coincidence rate");
    double total = true_coincidences + accidentals;
    if (total <= 0) throw std::domain_error("QBER undefined with zero coincidence rate");
    return (intrinsic_error * true_coincidences + 0.5 * accidentals) / total;
}

double binary_entropy(double q) {
    if (q < 0 || q > 1) throw std::domain_error("entropy argument outside [0, 1]");
    if (q == 0.0 || q == 1.0) return 0.0;
    return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double bbm92_skr(double true_coincidences, double accidentals, double qber,
                 const ProtocolParams& params) {
    double sifted = params.sifting_factor * (true_coincidences + accidentals);
    double h = binary_entropy(qber);
    double key_fraction = 1.0 - params.ec_efficiency * h - h;
    return sifted * std::max(0.0, key_fraction);
}

LinkRates evaluate_link(const User& a, const User& b, const ChannelAssignment& assignment,
                        const SourceModel& source, const ReceiverModel& receiver_a,
                        const ReceiverModel& receiver_b, const SplitterModel& splitter,
                        const ProtocolParams& params) {
    LinkRates rates;
    // canonical order keeps singles_a/singles_b stable regardless of call order
    const bool swap = UserPair(a.id, b.id).a != a.id;
    const User& first = swap ? b : a;
    const User& second = swap ? a : b;
    const ReceiverModel& rx_first = swap ? receiver_b : receiver_a;
    const ReceiverModel& rx_second = swap ? receiver_a : receiver_b;

    CoincidenceRates c =
        coincidence_rates(first, second, assignment, source, rx_first, rx_second, splitter, params);
    rates.singles_a = singles_rate(first, assignment, source, rx_first, splitter);
    rates.singles_b = singles_rate(second, assignment, source, rx_second, splitter);
    rates.true_coincidences = c.true_coincidences;
    rates.accidentals = c.accidentals;
    double intrinsic = visibility_to_qber(rx_first.visibility * rx_second.visibility);
    rates.qber = link_qber(c.true_coincidences, c.accidentals, intrinsic);
    rates.sifted_rate = params.sifting_factor * (c.true_coincidences + c.accidentals);
    rates.skr = bbm92_skr(c.true_coincidences, c.accidentals, rates.qber, params);
    return rates;
}

}  // namespace qnet
