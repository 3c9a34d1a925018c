#pragma once

#include <cstdint>
#include <vector>

#include "got/rng.hpp"
#include "got/scenario.hpp"

namespace got {

// One slot's quasi-static fading realization: |h|^2 per loop.
struct ChannelDraw {
    std::vector<double> gains;
};

struct DecodeOutcome {
    std::vector<double> per_user_error_prob;  // overall error per loop; 1 for silent loops
    std::vector<uint8_t> success_mask;        // sampled decode success per loop
    std::vector<double> sinr;                 // post-SIC SINR per loop; 0 for silent loops
    std::vector<int> sic_order;               // transmitting loops in decoding order
};

// Rayleigh block fading: gains[i] = d_i^-tau * E with E a unit-mean exponential.
ChannelDraw sample_fading(Rng& rng, const ScenarioConfig& cfg);

// Per-round SINRs for powers already in decoding order (non-increasing):
// gamma_i = p_i / (sum of weaker powers + noise).
std::vector<double> sinr_vector(const std::vector<double>& received_powers_desc, double noise);

// Decoding error probability of an (n-bit, m-symbol) code at SINR gamma under the
// normal approximation: Q((C(gamma) - n/m) / sqrt(V(gamma)/m)). When the dispersion
// term degenerates the 0/1 limit is returned by the sign of C(gamma) - n/m.
double fbl_error(double gamma, int n_bits, int m_symbols);

// Chains per-round errors into overall per-user errors, in decoding order.
// kPrefix: failing any earlier (stronger) round fails everything after it.
// kPaperLiteral: suffix product over the weaker rounds instead.
std::vector<double> decode_errors(const std::vector<double>& per_round_errors,
                                  SicConvention convention);

// Full slot: received powers, SIC ordering (received power desc, ties by loop
// index), per-user error chain, and sampled successes. powers are watts; silent
// loops get error 1 / SINR 0 / no RNG draw. forced_error, when non-null, holds one
// entry per loop: a finite value in [0,1] overrides that loop's error probability
// (and makes even a silent loop decodable); NaN leaves the loop alone. In OMA mode
// more than one positive power throws std::invalid_argument.
DecodeOutcome slot_decode(const std::vector<double>& powers, const ChannelDraw& draw,
                          const ScenarioConfig& cfg, Rng& rng,
                          const std::vector<double>* forced_error = nullptr);

struct ErrorEstimate {
    double mean = 1.0;
    double std_err = 0.0;
};

// Monte Carlo estimate of the fading-averaged decoding error for a single loop
// transmitting alone at `power` watts. Deterministic given the seed; power <= 0
// returns exactly {1, 0}.
ErrorEstimate expected_error(double power, int loop, const ScenarioConfig& cfg,
                             int64_t n_samples, uint64_t seed);

// Probabilities leaving [0,1] before the final clamp are counted here so tests
// can assert the clamp never fires in anger.
uint64_t fbl_clamp_count();
void reset_fbl_clamp_count();

}  // namespace got
