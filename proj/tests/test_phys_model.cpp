#include "qnet/phys_model.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "qnet/channel_grid.hpp"

using namespace qnet;

namespace {

const User kLocalA{"ann", Attachment::local, 0.0};
const User kLocalB{"ben", Attachment::local, 0.0};
const User kDeployed{"dee", Attachment::deployed, 0.725};

ChannelAssignment plan_with(const GridConfig& grid,
                            std::vector<std::pair<std::string, int>> grants) {
    ChannelAssignment plan{grid};
    for (const auto& [user, lc] : grants) plan.add_grant(user, LogicalChannel{lc});
    return plan;
}

}  // namespace

TEST_CASE("dB figures convert to transmission fractions") {
    CHECK(db_to_transmission(0.0) == 1.0);
    CHECK(db_to_transmission(6.0) == doctest::Approx(0.251188643150958).epsilon(1e-15));
    CHECK(db_to_transmission(0.725) == doctest::Approx(0.8462525688072693).epsilon(1e-15));
    CHECK(db_to_transmission(12.0) == doctest::Approx(0.06309573444801933).epsilon(1e-15));
    CHECK(db_to_transmission(10.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(db_to_transmission(3.0) > db_to_transmission(4.0));
}

TEST_CASE("splitter transmission is an exact quarter by default") {
    SplitterModel exact;
    CHECK(exact.per_side_transmission() == 0.25);
    SplitterModel nominal{false};
    CHECK(nominal.per_side_transmission() ==
          doctest::Approx(0.251188643150958).epsilon(1e-15));
}

TEST_CASE("model parameter validation") {
    CHECK_NOTHROW(SourceModel{}.validate());
    SourceModel bad_rate;
    bad_rate.pair_rate_per_channel = -1.0;
    CHECK_THROWS_AS(bad_rate.validate(), std::invalid_argument);
    SourceModel bad_spectrum;
    bad_spectrum.channel_spectrum[3] = 0.0;
    CHECK_THROWS_AS(bad_spectrum.validate(), std::invalid_argument);

    CHECK_NOTHROW(ReceiverModel{}.validate());
    ReceiverModel r;
    r.detector_efficiency = 1.5;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = ReceiverModel{};
    r.dark_count_rate = -1.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = ReceiverModel{};
    r.internal_loss_db = -0.1;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = ReceiverModel{};
    r.visibility = 1.2;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);

    CHECK_NOTHROW(ProtocolParams{}.validate());
    ProtocolParams p;
    p.sifting_factor = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProtocolParams{};
    p.ec_efficiency = 0.9;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProtocolParams{};
    p.coincidence_window_s = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("channel transmission multiplies the loss mechanisms in play") {
    GridConfig grid;
    SplitterModel splitter;
    ReceiverModel ideal;

    // Local user, unsplit channel, ideal receiver: nothing in the way.
    CHECK(channel_transmission(kLocalA, LogicalChannel{2}, ideal, grid, splitter) == 1.0);
    // Split channel costs exactly a quarter.
    CHECK(channel_transmission(kLocalA, LogicalChannel{6}, ideal, grid, splitter) == 0.25);
    CHECK(channel_transmission(kLocalA, LogicalChannel{-6}, ideal, grid, splitter) == 0.25);
    // Deployed fibre applies its one-way dB figure.
    CHECK(channel_transmission(kDeployed, LogicalChannel{2}, ideal, grid, splitter) ==
          doctest::Approx(0.8462525688072693).epsilon(1e-15));
    CHECK(channel_transmission(kDeployed, LogicalChannel{6}, ideal, grid, splitter) ==
          doctest::Approx(0.25 * 0.8462525688072693).epsilon(1e-15));
    // The deployed loss figure is ignored for users on local fibre.
    User local_with_loss{"odd", Attachment::local, 3.0};
    CHECK(channel_transmission(local_with_loss, LogicalChannel{2}, ideal, grid, splitter) == 1.0);

    ReceiverModel lossy;
    lossy.internal_loss_db = 12.0;
    lossy.detector_efficiency = 0.8;
    CHECK(channel_transmission(kLocalA, LogicalChannel{2}, lossy, grid, splitter) ==
          doctest::Approx(0.8 * 0.06309573444801933).epsilon(1e-15));
}

TEST_CASE("singles rates add channels, splitter shares and dark counts") {
    GridConfig grid;
    SplitterModel splitter;
    ReceiverModel ideal;
    SourceModel source;  // 1e6 pairs/s per conjugate pair

    auto plan = plan_with(grid, {{"ann", 2}});
    CHECK(singles_rate(kLocalA, plan, source, ideal, splitter) == 1e6);

    ReceiverModel dark = ideal;
    dark.dark_count_rate = 500.0;
    CHECK(singles_rate(kLocalA, plan, source, dark, splitter) == 1000500.0);

    auto two = plan_with(grid, {{"ann", 2}, {"ann", 6}});
    CHECK(singles_rate(kLocalA, two, source, ideal, splitter) == 1.25e6);

    SourceModel shaped = source;
    shaped.channel_spectrum[6] = 0.5;
    CHECK(singles_rate(kLocalA, two, shaped, ideal, splitter) == 1.125e6);

    // A user with no channels still sees dark counts.
    CHECK(singles_rate(kLocalB, plan, source, dark, splitter) == 500.0);
}

TEST_CASE("coincidences accumulate over every serving conjugate pair") {
    GridConfig grid;
    SplitterModel splitter;
    ReceiverModel ideal;
    SourceModel source;
    ProtocolParams params;

    auto one = plan_with(grid, {{"ann", 2}, {"ben", -2}});
    auto c1 = coincidence_rates(kLocalA, kLocalB, one, source, ideal, ideal, splitter, params);
    CHECK(c1.true_coincidences == 1e6);
    CHECK(c1.accidentals == 1e6 * 1e6 * 5e-10);

    // The opposite orientation gives the identical answer.
    auto flipped = plan_with(grid, {{"ann", -2}, {"ben", 2}});
    auto c2 = coincidence_rates(kLocalA, kLocalB, flipped, source, ideal, ideal, splitter, params);
    CHECK(c2.true_coincidences == c1.true_coincidences);
    CHECK(c2.accidentals == c1.accidentals);

    // Two serving pairs double the true rate (and quadruple accidentals).
    auto two = plan_with(grid, {{"ann", 2}, {"ben", -2}, {"ann", 3}, {"ben", -3}});
    auto c3 = coincidence_rates(kLocalA, kLocalB, two, source, ideal, ideal, splitter, params);
    CHECK(c3.true_coincidences == 2e6);
    CHECK(c3.accidentals == 4.0 * c1.accidentals);

    auto none = plan_with(grid, {{"ann", 2}, {"ben", 3}});
    CHECK_THROWS_AS(coincidence_rates(kLocalA, kLocalB, none, source, ideal, ideal, splitter, params),
                    std::invalid_argument);
}

TEST_CASE("accidentals follow singles x singles x window") {
    GridConfig grid;
    SplitterModel splitter;
    ReceiverModel ideal;
    ProtocolParams params;
    SourceModel source;
    source.pair_rate_per_channel = 4.5e5;

    auto plan = plan_with(grid, {{"ann", 1}, {"ben", -1}});
    auto c = coincidence_rates(kLocalA, kLocalB, plan, source, ideal, ideal, splitter, params);
    CHECK(c.accidentals == 101.25);  // (4.5e5)^2 * 5e-10, exact in doubles
}

TEST_CASE("a split pair costs exactly a factor 16 in true coincidences") {
    GridConfig grid;
    SplitterModel splitter;  // exact quarters
    ReceiverModel ideal;
    SourceModel source;
    ProtocolParams params;

    auto unsplit = plan_with(grid, {{"ann", 2}, {"ben", -2}});
    auto split = plan_with(grid, {{"ann", 6}, {"ben", -6}});
    auto cu = coincidence_rates(kLocalA, kLocalB, unsplit, source, ideal, ideal, splitter, params);
    auto cs = coincidence_rates(kLocalA, kLocalB, split, source, ideal, ideal, splitter, params);
    CHECK(cs.true_coincidences == 0.0625 * cu.true_coincidences);  // bitwise: powers of two
    CHECK(cs.true_coincidences / cu.true_coincidences == 0.0625);

    SplitterModel nominal{false};  // 6.00 dB per side is slightly better than 1/4
    auto cn = coincidence_rates(kLocalA, kLocalB, split, source, ideal, ideal, nominal, params);
    CHECK(cn.true_coincidences > cs.true_coincidences);
}

TEST_CASE("true coincidences scale linearly and accidentals quadratically with brightness") {
    GridConfig grid;
    SplitterModel splitter;
    ReceiverModel rx;
    rx.detector_efficiency = 0.85;
    rx.internal_loss_db = 1.3;
    ProtocolParams params;

    auto plan = plan_with(grid, {{"dee", 2}, {"ben", -2}, {"dee", 7}, {"ben", -7}});
    SourceModel base;
    base.pair_rate_per_channel = 7.3e5;
    SourceModel doubled;
    doubled.pair_rate_per_channel = 2.0 * 7.3e5;

    auto c1 = coincidence_rates(kDeployed, kLocalB, plan, base, rx, rx, splitter, params);
    auto c2 = coincidence_rates(kDeployed, kLocalB, plan, doubled, rx, rx, splitter, params);
    CHECK(c2.true_coincidences == 2.0 * c1.true_coincidences);
    CHECK(c2.accidentals == 4.0 * c1.accidentals);
}

TEST_CASE("visibility maps to the intrinsic error rate") {
    CHECK(visibility_to_qber(1.0) == 0.0);
    CHECK(visibility_to_qber(0.0) == 0.5);
    CHECK(visibility_to_qber(0.99505) == (1.0 - 0.99505) / 2.0);
    CHECK(visibility_to_qber(0.99505) == doctest::Approx(0.002475).epsilon(1e-12));
    CHECK_THROWS_AS(visibility_to_qber(-0.1), std::domain_error);
    CHECK_THROWS_AS(visibility_to_qber(1.1), std::domain_error);
}

TEST_CASE("QBER mixes intrinsic errors with half-random accidentals") {
    CHECK(link_qber(900.0, 100.0, 0.01) == doctest::Approx(0.059).epsilon(1e-15));
    CHECK(link_qber(1000.0, 0.0, 0.02) == 0.02);
    CHECK(link_qber(0.0, 1000.0, 0.02) == 0.5);
    CHECK_THROWS_AS(link_qber(0.0, 0.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(link_qber(-1.0, 10.0, 0.01), std::domain_error);
}

TEST_CASE("binary entropy behaves like Shannon's h2") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-15));
    for (double q : {0.01, 0.2, 0.37, 0.49})
        CHECK(binary_entropy(q) == doctest::Approx(binary_entropy(1.0 - q)).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("the key rate clamps at zero and respects the sifting factor") {
    ProtocolParams params;  // f_EC = 1.1
    CHECK(bbm92_skr(1000.0, 0.0, 0.0, params) == 500.0);
    CHECK(bbm92_skr(1000.0, 0.0, 0.4, params) == 0.0);
    // Single transition from positive to zero as the error rate grows.
    int transitions = 0;
    bool last = bbm92_skr(1000.0, 0.0, 0.0, params) > 0.0;
    for (int i = 1; i <= 500; ++i) {
        bool now = bbm92_skr(1000.0, 0.0, 0.5 * i / 500.0, params) > 0.0;
        if (now != last) ++transitions;
        last = now;
    }
    CHECK(transitions == 1);
}

TEST_CASE("with perfect error correction the key rate dies near 11% QBER") {
    ProtocolParams params;
    params.ec_efficiency = 1.0;
    auto positive = [&](double q) { return bbm92_skr(1e6, 0.0, q, params) > 0.0; };
    double lo = 0.05, hi = 0.2;
    REQUIRE(positive(lo));
    REQUIRE_FALSE(positive(hi));
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (positive(mid) ? lo : hi) = mid;
    }
    CHECK(hi > 0.108);
    CHECK(hi < 0.113);
    CHECK(hi == doctest::Approx(0.11002786443835955).epsilon(1e-9));
}

TEST_CASE("evaluate_link agrees with its parts and is symmetric in call order") {
    GridConfig grid;
    SplitterModel splitter;
    SourceModel source;
    ProtocolParams params;
    ReceiverModel rx_a;
    rx_a.visibility = 0.99;
    rx_a.dark_count_rate = 300.0;
    ReceiverModel rx_b;
    rx_b.visibility = 0.98;
    rx_b.detector_efficiency = 0.9;

    auto plan = plan_with(grid, {{"dee", 6}, {"ben", -6}, {"dee", 2}, {"ben", -2}});
    LinkRates fwd = evaluate_link(kDeployed, kLocalB, plan, source, rx_a, rx_b, splitter, params);
    LinkRates rev = evaluate_link(kLocalB, kDeployed, plan, source, rx_b, rx_a, splitter, params);
    CHECK(fwd.singles_a == rev.singles_a);
    CHECK(fwd.singles_b == rev.singles_b);
    CHECK(fwd.true_coincidences == rev.true_coincidences);
    CHECK(fwd.accidentals == rev.accidentals);
    CHECK(fwd.qber == rev.qber);
    CHECK(fwd.skr == rev.skr);

    // Rebuild the figure from the component functions.
    auto c = coincidence_rates(kLocalB, kDeployed, plan, source, rx_b, rx_a, splitter, params);
    CHECK(fwd.true_coincidences == c.true_coincidences);
    CHECK(fwd.accidentals == c.accidentals);
    double intrinsic = visibility_to_qber(0.99 * 0.98);
    CHECK(fwd.qber == link_qber(c.true_coincidences, c.accidentals, intrinsic));
    CHECK(fwd.sifted_rate == params.sifting_factor * (c.true_coincidences + c.accidentals));
    CHECK(fwd.skr == bbm92_skr(c.true_coincidences, c.accidentals, fwd.qber, params));
    CHECK(fwd.skr > 0.0);
    CHECK(fwd.skr < fwd.sifted_rate);
}

TEST_CASE("noisier links yield lower key rates") {
    GridConfig grid;
    SplitterModel splitter;
    SourceModel source;
    ProtocolParams params;
    ReceiverModel clean;
    ReceiverModel noisy;
    noisy.visibility = 0.95;
    noisy.dark_count_rate = 2e5;

    auto plan = plan_with(grid, {{"ann", 2}, {"ben", -2}});
    LinkRates good = evaluate_link(kLocalA, kLocalB, plan, source, clean, clean, splitter, params);
    LinkRates bad = evaluate_link(kLocalA, kLocalB, plan, source, noisy, noisy, splitter, params);
    CHECK(bad.qber > good.qber);
    CHECK(bad.skr < good.skr);
}
