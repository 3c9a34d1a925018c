#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace got {

enum class AccessMode { kNoma, kOma };
enum class SicConvention { kPrefix, kPaperLiteral };

// D3QN hyperparameters. Epsilon decays linearly from epsilon_start to epsilon_end
// over the first epsilon_decay_frac of the episodes, then stays constant.
struct AgentConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    double discount = 0.95;
    int sync_every = 100;  // gradient steps between target-network syncs
    double epsilon_start = 0.4;
    double epsilon_end = 0.01;
    double epsilon_decay_frac = 0.8;
    bool epsilon_constant = false;
    int episodes = 300;
    int replay_capacity = 3000;
    int hidden = 128;
    double grad_clip = 0.0;  // global L2 cap on gradients; 0 disables

    bool operator==(const AgentConfig&) const = default;
};

// Full experiment configuration; immutable after validation, safe to share
// read-only across concurrent runs.
struct ScenarioConfig {
    int n_loops = 2;
    int n_states = 2;      // |X|
    int n_actuations = 2;  // |C|
    int n_contexts = 2;    // |V|

    // source_transitions[loop][actuation]: n_states x n_states row-stochastic
    // matrix, row-major; entry [from*n_states + to] = Pr(to | from, actuation).
    std::vector<std::vector<std::vector<double>>> source_transitions;
    std::vector<double> context_transitions;  // n_contexts x n_contexts, row-major
    std::vector<double> status_cost;          // C1, n_states x n_contexts, row-major
    std::vector<double> actuation_cost;       // C3, one entry per actuation

    double alpha = 0.2;  // transmission-cost weight
    double beta = 1.0;   // actuation-cost weight

    std::vector<double> distances;  // per loop, strictly positive, non-decreasing
    double path_loss_exp = 2.0;
    int msg_len_bits = 160;       // n
    int block_len_symbols = 200;  // m
    double noise_power = 1.0;     // sigma^2, linear
    int power_levels = 20;        // M; transmit powers are level*p_max/M
    double snr_db = 17.0;         // p_max = noise_power * 10^(snr_db/10)
    int aoi_cap = 20;
    int episode_len = 400;

    AccessMode access_mode = AccessMode::kNoma;
    SicConvention sic_convention = SicConvention::kPrefix;
    bool context_observable = true;  // hide for ablations
    bool belief_extra_step = false;  // literal (aoi+1)-factor belief product, comparison only
    bool genie_obs = false;          // feature vector carries the true source state

    uint64_t seed = 1;
    AgentConfig agent;

    double p_max() const { return noise_power * std::pow(10.0, snr_db / 10.0); }

    double source_prob(int loop, int actuation, int from, int to) const {
        return source_transitions[loop][actuation][from * n_states + to];
    }
    double context_prob(int a, int b) const { return context_transitions[a * n_contexts + b]; }
    double c1(int state, int context) const { return status_cost[state * n_contexts + context]; }
    double c3(int actuation) const { return actuation_cost[actuation]; }

    bool operator==(const ScenarioConfig&) const = default;
};

struct ValidationIssue {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool passed() const { return issues.empty(); }
    std::string to_string() const;
};

// Checks every invariant and reports all violations with field paths; never
// stops at the first error.
ValidationReport validate(const ScenarioConfig& cfg);

// The default two-loop setup (Table-1 values of the modeled network).
ScenarioConfig default_scenario();

// Transmit power in watts for a discrete level in [0, M]; level 0 is silence.
// Throws std::out_of_range outside [0, M].
double power_of_level(int level, const ScenarioConfig& cfg);

// Line-oriented "key = value" text form. Serialization uses shortest
// round-trip float formatting so write-then-read reproduces the config exactly.
std::string serialize_scenario(const ScenarioConfig& cfg);

// Parses text; issues (unknown keys, malformed values) are appended to the
// report. The returned config is best-effort and only usable if report passes
// and validate() passes.
ScenarioConfig parse_scenario(const std::string& text, ValidationReport& report);

ScenarioConfig load_scenario_file(const std::string& path, ValidationReport& report);
void save_scenario_file(const std::string& path, const ScenarioConfig& cfg);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace got
