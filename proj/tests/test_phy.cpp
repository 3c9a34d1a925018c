#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "got/phy.hpp"

using namespace got;

namespace {

// independent oracle for the normal tail: composite Simpson over the density,
// step small enough for ~5e-11 accuracy, truncated 12 sigma past the edge;
// callers mirror negative arguments through Q(x) = 1 - Q(-x)
double q_tail_quadrature(double x) {
    REQUIRE(x >= 0.0);
    const double b = x + 12.0;
    const int n = 4800;  // even
    const double h = (b - x) / n;
    auto pdf = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    double acc = pdf(x) + pdf(b);
    for (int i = 1; i < n; ++i) acc += pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

ScenarioConfig single_loop(double distance) {
    ScenarioConfig cfg = default_scenario();
    cfg.n_loops = 1;
    cfg.distances = {distance};
    cfg.source_transitions.resize(1);
    return cfg;
}

}  // namespace

TEST_CASE("fbl_error pinned values") {
    const double gamma_half = std::pow(2.0, 0.8) - 1.0;  // capacity exactly n/m
    CHECK(fbl_error(gamma_half, 160, 200) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fbl_error(0.0, 160, 200) == 1.0);
    CHECK(fbl_error(3.0, 160, 200) < 1e-30);
    CHECK(fbl_error(3.0, 160, 200) > 0.0);
}

TEST_CASE("fbl_error agrees with a quadrature oracle for the normal tail") {
    // spot the full formula against an independent tail integral
    const int n = 160, m = 200;
    for (double gamma : {0.3, 0.5, 0.7411, 0.9, 1.2, 2.0}) {
        const double cap = std::log2(1.0 + gamma);
        const double disp =
            (1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma))) * std::numbers::log2e * std::numbers::log2e;
        const double arg = (cap - double(n) / m) / std::sqrt(disp / m);
        if (std::abs(arg) > 8.0) continue;  // quadrature oracle range
        const double expect = arg >= 0 ? q_tail_quadrature(arg) : 1.0 - q_tail_quadrature(-arg);
        CHECK(std::abs(fbl_error(gamma, n, m) - expect) < 1e-10);
    }
}

TEST_CASE("fbl_error monotone in gamma and in message length") {
    double prev = 1.0;
    for (int i = 1; i <= 200; ++i) {
        const double gamma = 10.0 * i / 200.0;
        const double e = fbl_error(gamma, 160, 200);
        CHECK(e <= prev + 1e-15);
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
        prev = e;
    }
    prev = 0.0;
    for (int n = 10; n <= 400; n += 10) {
        const double e = fbl_error(1.0, n, 200);
        CHECK(e >= prev - 1e-15);
        prev = e;
    }
}

TEST_CASE("fbl_error clamp never fires over the working range") {
    reset_fbl_clamp_count();
    for (int i = 0; i <= 2000; ++i) fbl_error(i * 0.01, 160, 200);
    CHECK(fbl_clamp_count() == 0);
}

TEST_CASE("sinr_vector hand examples") {
    CHECK(sinr_vector({4.0, 1.0}, 1.0) == std::vector<double>{2.0, 1.0});
    CHECK(sinr_vector({5.0}, 1.0) == std::vector<double>{5.0});
    CHECK(sinr_vector({1.0, 1.0}, 1.0) == std::vector<double>{0.5, 1.0});
    CHECK(sinr_vector({}, 1.0).empty());
}

TEST_CASE("decode_errors conventions") {
    auto prefix = decode_errors({0.1, 0.2}, SicConvention::kPrefix);
    CHECK(prefix[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(prefix[1] == doctest::Approx(0.28).epsilon(1e-15));
    auto literal = decode_errors({0.1, 0.2}, SicConvention::kPaperLiteral);
    CHECK(literal[0] == doctest::Approx(0.28).epsilon(1e-15));
    CHECK(literal[1] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(decode_errors({0.0, 0.0}, SicConvention::kPrefix) == std::vector<double>{0.0, 0.0});
    CHECK(decode_errors({0.0, 0.0}, SicConvention::kPaperLiteral) == std::vector<double>{0.0, 0.0});

    // prefix chaining never improves along the decoding order
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> rounds(4);
        for (auto& r : rounds) r = rng.uniform01();
        auto overall = decode_errors(rounds, SicConvention::kPrefix);
        for (size_t i = 1; i < overall.size(); ++i) CHECK(overall[i] >= overall[i - 1] - 1e-15);
    }
}

TEST_CASE("sample_fading has the right mean gain and is seed-deterministic") {
    SUBCASE("unit distance") {
        ScenarioConfig cfg = single_loop(1.0);
        Rng rng(42);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) sum += sample_fading(rng, cfg).gains[0];
        CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("distance 2, path loss 2") {
        ScenarioConfig cfg = single_loop(2.0);
        Rng rng(43);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) sum += sample_fading(rng, cfg).gains[0];
        CHECK(std::abs(sum / n - 0.25) < 0.005);
    }
    SUBCASE("determinism") {
        ScenarioConfig cfg = default_scenario();
        Rng a(7), b(7);
        for (int i = 0; i < 100; ++i)
            CHECK(sample_fading(a, cfg).gains == sample_fading(b, cfg).gains);
    }
}

TEST_CASE("slot_decode") {
    ScenarioConfig cfg = default_scenario();
    Rng rng(11);

    SUBCASE("no transmission means no success") {
        ChannelDraw draw{{1.0, 1.0}};
        auto out = slot_decode({0.0, 0.0}, draw, cfg, rng);
        CHECK(out.per_user_error_prob == std::vector<double>{1.0, 1.0});
        CHECK(out.success_mask == std::vector<uint8_t>{0, 0});
        CHECK(out.sic_order.empty());
    }
    SUBCASE("documented tie-break: equal received power decodes loop 0 first") {
        ChannelDraw draw{{4.0, 1.0}};
        auto out = slot_decode({2.0, 8.0}, draw, cfg, rng);  // both receive 8.0
        CHECK(out.sic_order == std::vector<int>{0, 1});
    }
    SUBCASE("long-run success rate matches the error probability") {
        // pin the SINR at the 50% point through a crafted gain
        const double gamma_half = std::pow(2.0, 0.8) - 1.0;
        const double p = 10.0;
        ChannelDraw draw{{gamma_half * cfg.noise_power / p, 0.0}};
        int succ = 0;
        const int n = 40'000;
        for (int i = 0; i < n; ++i) {
            auto out = slot_decode({p, 0.0}, draw, cfg, rng);
            CHECK(out.per_user_error_prob[0] == doctest::Approx(0.5).epsilon(1e-9));
            succ += out.success_mask[0];
        }
        CHECK(std::abs(double(succ) / n - 0.5) < 0.01);
    }
    SUBCASE("empirical success frequency tracks per-user error with two users") {
        ChannelDraw draw{{0.35, 0.40}};
        const std::vector<double> powers{6.0, 4.0};
        auto probe = slot_decode(powers, draw, cfg, rng);
        int succ0 = 0, succ1 = 0;
        const int n = 40'000;
        for (int i = 0; i < n; ++i) {
            auto out = slot_decode(powers, draw, cfg, rng);
            succ0 += out.success_mask[0];
            succ1 += out.success_mask[1];
        }
        for (int u = 0; u < 2; ++u) {
            const double p_succ = 1.0 - probe.per_user_error_prob[u];
            const double se = std::sqrt(std::max(p_succ * (1 - p_succ), 1e-9) / n);
            const double got_rate = u == 0 ? double(succ0) / n : double(succ1) / n;
            CHECK(std::abs(got_rate - p_succ) < 5 * se + 1e-4);
        }
    }
    SUBCASE("single transmitter decodes identically under NOMA and OMA") {
        ScenarioConfig oma = cfg;
        oma.access_mode = AccessMode::kOma;
        ChannelDraw draw{{0.7, 0.0}};
        Rng r1(5), r2(5);
        auto a = slot_decode({8.0, 0.0}, draw, cfg, r1);
        auto b = slot_decode({8.0, 0.0}, draw, oma, r2);
        CHECK(a.per_user_error_prob == b.per_user_error_prob);
        CHECK(a.sinr == b.sinr);
        CHECK(a.success_mask == b.success_mask);
    }
    SUBCASE("OMA rejects two transmitters") {
        ScenarioConfig oma = cfg;
        oma.access_mode = AccessMode::kOma;
        ChannelDraw draw{{1.0, 1.0}};
        CHECK_THROWS_AS(slot_decode({1.0, 1.0}, draw, oma, rng), std::invalid_argument);
    }
    SUBCASE("forced error override") {
        ChannelDraw draw{{1.0, 1.0}};
        std::vector<double> forced{0.0, 1.0};
        for (int i = 0; i < 50; ++i) {
            auto out = slot_decode({0.0, 5.0}, draw, cfg, rng, &forced);
            CHECK(out.success_mask[0] == 1);  // silent loop forced decodable
            CHECK(out.success_mask[1] == 0);
        }
        std::vector<double> off{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};
        auto out = slot_decode({0.0, 0.0}, draw, cfg, rng, &off);
        CHECK(out.success_mask == std::vector<uint8_t>{0, 0});
    }
}

TEST_CASE("expected_error") {
    ScenarioConfig cfg = default_scenario();
    SUBCASE("zero power is certain failure") {
        auto est = expected_error(0.0, 0, cfg, 1000, 1);
        CHECK(est.mean == 1.0);
        CHECK(est.std_err == 0.0);
    }
    SUBCASE("huge power decodes essentially always") {
        auto est = expected_error(1e9, 0, cfg, 100'000, 2);
        CHECK(est.mean < 1e-4);
    }
    SUBCASE("estimates reproduce across seeds within 3 standard errors") {
        const double p = cfg.p_max();
        auto a = expected_error(p, 0, cfg, 1'000'000, 101);
        auto b = expected_error(p, 0, cfg, 1'000'000, 202);
        CHECK(a.std_err > 0.0);
        CHECK(std::abs(a.mean - b.mean) < 3.0 * std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err));
    }
    SUBCASE("deterministic given the seed") {
        auto a = expected_error(5.0, 1, cfg, 10'000, 7);
        auto b = expected_error(5.0, 1, cfg, 10'000, 7);
        CHECK(a.mean == b.mean);
        CHECK(a.std_err == b.std_err);
    }
}
