#include "got/phy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace got {

namespace {

std::atomic<uint64_t> g_clamp_count{0};

double clamp01_counted(double p) {
    if (p < 0.0 || p > 1.0) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return std::clamp(p, 0.0, 1.0);
    }
    return p;
}

// standard normal tail, |error| well below 1e-10 over the useful range
double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace

uint64_t fbl_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }
void reset_fbl_clamp_count() { g_clamp_count.store(0, std::memory_order_relaxed); }

ChannelDraw sample_fading(Rng& rng, const ScenarioConfig& cfg) {
    ChannelDraw draw;
    draw.gains.resize(cfg.n_loops);
    for (int i = 0; i < cfg.n_loops; ++i)
        draw.gains[i] = std::pow(cfg.distances[i], -cfg.path_loss_exp) * rng.exponential();
    return draw;
}

std::vector<double> sinr_vector(const std::vector<double>& received_powers_desc, double noise) {
    const size_t n = received_powers_desc.size();
    std::vector<double> gamma(n);
    double interference = 0.0;
    for (size_t i = n; i-- > 0;) {
        gamma[i] = received_powers_desc[i] / (interference + noise);
        interference += received_powers_desc[i];
    }
    return gamma;
}

double fbl_error(double gamma, int n_bits, int m_symbols) {
    const double rate = static_cast<double>(n_bits) / m_symbols;
    if (!(gamma > 0.0)) return rate > 0.0 ? 1.0 : 0.5;

    const double log2e = std::numbers::log2e;
    const double capacity = std::log2(1.0 + gamma);
    const double s = 1.0 + gamma;
    const double dispersion = (1.0 - 1.0 / (s * s)) * log2e * log2e;
    const double denom = std::sqrt(dispersion / m_symbols);
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        // dispersion degenerates: the normal approximation collapses to a step
        if (capacity > rate) return 0.0;
        if (capacity < rate) return 1.0;
        return 0.5;
    }
    return clamp01_counted(q_function((capacity - rate) / denom));
}

std::vector<double> decode_errors(const std::vector<double>& per_round_errors,
                                  SicConvention convention) {
    const size_t n = per_round_errors.size();
    std::vector<double> overall(n);
    if (convention == SicConvention::kPrefix) {
        double ok = 1.0;  // probability every round so far decoded
        for (size_t i = 0; i < n; ++i) {
            ok *= 1.0 - per_round_errors[i];
            overall[i] = 1.0 - ok;
        }
    } else {
        double ok = 1.0;
        for (size_t i = n; i-- > 0;) {
            ok *= 1.0 - per_round_errors[i];
            overall[i] = 1.0 - ok;
        }
    }
    return overall;
}

DecodeOutcome slot_decode(const std::vector<double>& powers, const ChannelDraw& draw,
                          const ScenarioConfig& cfg, Rng& rng,
                          const std::vector<double>* forced_error) {
    const int n = cfg.n_loops;
    DecodeOutcome out;
    out.per_user_error_prob.assign(n, 1.0);
    out.success_mask.assign(n, 0);
    out.sinr.assign(n, 0.0);

    for (int i = 0; i < n; ++i)
        if (powers[i] > 0.0) out.sic_order.push_back(i);

    if (cfg.access_mode == AccessMode::kOma && out.sic_order.size() > 1)
        throw std::invalid_argument("OMA slot with more than one transmitter");

    // strongest received power first; equal powers decode lower loop index first
    std::stable_sort(out.sic_order.begin(), out.sic_order.end(), [&](int a, int b) {
        return powers[a] * draw.gains[a] > powers[b] * draw.gains[b];
    });
    std::vector<double> rx(out.sic_order.size());
    for (size_t k = 0; k < out.sic_order.size(); ++k)
        rx[k] = powers[out.sic_order[k]] * draw.gains[out.sic_order[k]];

    const std::vector<double> gamma = sinr_vector(rx, cfg.noise_power);
    std::vector<double> per_round(gamma.size());
    for (size_t k = 0; k < gamma.size(); ++k)
        per_round[k] = fbl_error(gamma[k], cfg.msg_len_bits, cfg.block_len_symbols);
    const std::vector<double> overall = decode_errors(per_round, cfg.sic_convention);

    for (size_t k = 0; k < out.sic_order.size(); ++k) {
        out.sinr[out.sic_order[k]] = gamma[k];
        out.per_user_error_prob[out.sic_order[k]] = overall[k];
    }

    // success draws consumed in ascending loop order so replays are exact
    for (int i = 0; i < n; ++i) {
        bool decodable = powers[i] > 0.0;
        if (forced_error && std::isfinite((*forced_error)[i])) {
            out.per_user_error_prob[i] = std::clamp((*forced_error)[i], 0.0, 1.0);
            decodable = true;
        }
        if (decodable) out.success_mask[i] = rng.uniform01() >= out.per_user_error_prob[i];
    }
    return out;
}

ErrorEstimate expected_error(double power, int loop, const ScenarioConfig& cfg,
                             int64_t n_samples, uint64_t seed) {
    if (!(power > 0.0)) return {1.0, 0.0};
    Rng rng(seed);
    const double base = std::pow(cfg.distances[loop], -cfg.path_loss_exp);
    double sum = 0.0, sumsq = 0.0;
    for (int64_t k = 0; k < n_samples; ++k) {
        const double gamma = power * base * rng.exponential() / cfg.noise_power;
        const double eps = fbl_error(gamma, cfg.msg_len_bits, cfg.block_len_symbols);
        sum += eps;
        sumsq += eps * eps;
    }
    ErrorEstimate est;
    est.mean = sum / n_samples;
    if (n_samples > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / n_samples) / (n_samples - 1));
        est.std_err = std::sqrt(var / n_samples);
    }
    return est;
}

}  // namespace got
