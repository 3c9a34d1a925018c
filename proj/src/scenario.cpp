#include "got/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace got {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) os << i.field << ": " << i.message << "\n";
    return os.str();
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    // per-actuation chains: c1 leaves the bad state absorbing, c2 repairs it
    const std::vector<double> p_c1 = {0.95, 0.05,  //
                                      0.0, 1.0};
    const std::vector<double> p_c2 = {0.95, 0.05,  //
                                      0.5, 0.5};
    cfg.source_transitions = {{p_c1, p_c2}, {p_c1, p_c2}};
    cfg.context_transitions = {0.5, 0.5,  //
                               0.5, 0.5};
    cfg.status_cost = {0.0, 0.0,  //
                       1.0, 3.0};
    cfg.actuation_cost = {0.0, 1.0};
    cfg.distances = {2.0, 5.0};
    return cfg;
}

double power_of_level(int level, const ScenarioConfig& cfg) {
    if (level < 0 || level > cfg.power_levels)
        throw std::out_of_range("power level " + std::to_string(level) + " outside [0, " +
                                std::to_string(cfg.power_levels) + "]");
    return static_cast<double>(level) * cfg.p_max() / cfg.power_levels;
}

namespace {

void check_stochastic_row(ValidationReport& rep, const std::string& field,
                          const double* row, int n) {
    bool in_range = true;
    for (int i = 0; i < n; ++i) {
        if (!(row[i] >= 0.0 && row[i] <= 1.0)) {
            rep.issues.push_back({field, "entry " + format_double(row[i]) + " outside [0,1]"});
            in_range = false;
        }
    }
    if (!in_range) return;  // a bad entry already explains the broken sum
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += row[i];
    if (std::abs(sum - 1.0) > 1e-12)
        rep.issues.push_back({field, "row sum " + format_double(sum) + " ≠ 1"});
}

}  // namespace

ValidationReport validate(const ScenarioConfig& cfg) {
    ValidationReport rep;
    auto bad = [&rep](const std::string& field, const std::string& msg) {
        rep.issues.push_back({field, msg});
    };

    if (cfg.n_loops < 1) bad("n_loops", "must be >= 1");
    if (cfg.n_states < 1) bad("n_states", "must be >= 1");
    if (cfg.n_actuations < 1) bad("n_actuations", "must be >= 1");
    if (cfg.n_contexts < 1) bad("n_contexts", "must be >= 1");
    const bool dims_ok = cfg.n_loops >= 1 && cfg.n_states >= 1 && cfg.n_actuations >= 1 &&
                         cfg.n_contexts >= 1;

    if (dims_ok) {
        if (static_cast<int>(cfg.source_transitions.size()) != cfg.n_loops) {
            bad("source_transitions", "expected one matrix set per loop");
        } else {
            for (int l = 0; l < cfg.n_loops; ++l) {
                if (static_cast<int>(cfg.source_transitions[l].size()) != cfg.n_actuations) {
                    bad("source_transitions." + std::to_string(l),
                        "expected one matrix per actuation");
                    continue;
                }
                for (int k = 0; k < cfg.n_actuations; ++k) {
                    const auto& m = cfg.source_transitions[l][k];
                    const std::string base =
                        "source_transitions." + std::to_string(l) + "." + std::to_string(k);
                    if (static_cast<int>(m.size()) != cfg.n_states * cfg.n_states) {
                        bad(base, "wrong matrix size");
                        continue;
                    }
                    for (int r = 0; r < cfg.n_states; ++r)
                        check_stochastic_row(rep, base + "." + std::to_string(r),
                                             m.data() + r * cfg.n_states, cfg.n_states);
                }
            }
        }

        if (static_cast<int>(cfg.context_transitions.size()) != cfg.n_contexts * cfg.n_contexts) {
            bad("context_transitions", "wrong matrix size");
        } else {
            for (int r = 0; r < cfg.n_contexts; ++r)
                check_stochastic_row(rep, "context_transitions." + std::to_string(r),
                                     cfg.context_transitions.data() + r * cfg.n_contexts,
                                     cfg.n_contexts);
        }

        if (static_cast<int>(cfg.status_cost.size()) != cfg.n_states * cfg.n_contexts) {
            bad("status_cost", "expected n_states x n_contexts entries");
        } else {
            for (size_t i = 0; i < cfg.status_cost.size(); ++i)
                if (!(cfg.status_cost[i] >= 0.0))
                    bad("status_cost." + std::to_string(i / cfg.n_contexts),
                        "must be >= 0, got " + format_double(cfg.status_cost[i]));
        }
        if (static_cast<int>(cfg.actuation_cost.size()) != cfg.n_actuations) {
            bad("actuation_cost", "expected one entry per actuation");
        } else {
            for (double c : cfg.actuation_cost)
                if (!(c >= 0.0)) bad("actuation_cost", "must be >= 0, got " + format_double(c));
        }

        if (static_cast<int>(cfg.distances.size()) != cfg.n_loops) {
            bad("distances", "expected one entry per loop");
        } else {
            bool positive = true;
            for (double d : cfg.distances)
                if (!(d > 0.0)) positive = false;
            if (!positive) {
                bad("distances", "must be strictly positive");
            } else if (!std::is_sorted(cfg.distances.begin(), cfg.distances.end())) {
                bad("distances", "must be listed in non-decreasing order");
            }
        }
    }

    if (!(cfg.alpha >= 0.0)) bad("alpha", "alpha must be ≥ 0");
    if (!(cfg.beta >= 0.0)) bad("beta", "beta must be ≥ 0");
    if (!(cfg.path_loss_exp > 0.0)) bad("path_loss_exp", "must be > 0");
    if (cfg.msg_len_bits < 1) bad("msg_len_bits", "must be >= 1");
    if (cfg.block_len_symbols < 1) bad("block_len_symbols", "must be >= 1");
    if (!(cfg.noise_power > 0.0)) bad("noise_power", "must be > 0");
    if (cfg.power_levels < 1) bad("power_levels", "must be >= 1");
    if (!std::isfinite(cfg.snr_db)) bad("snr_db", "must be finite");
    if (cfg.aoi_cap < 1) bad("aoi_cap", "must be >= 1");
    if (cfg.episode_len < 1) bad("episode_len", "must be >= 1");

    const AgentConfig& a = cfg.agent;
    if (!(a.learning_rate > 0.0)) bad("agent.learning_rate", "must be > 0");
    const bool batch_ok = a.batch_size >= 1;
    const bool cap_ok = a.replay_capacity >= 1;
    if (!batch_ok) bad("agent.batch_size", "must be >= 1");
    if (!cap_ok) bad("agent.replay_capacity", "must be >= 1");
    if (batch_ok && cap_ok && a.batch_size > a.replay_capacity)
        bad("agent.batch_size", "must be <= agent.replay_capacity");
    if (!(a.discount >= 0.0 && a.discount < 1.0)) bad("agent.discount", "must be in [0,1)");
    if (a.sync_every < 1) bad("agent.sync_every", "must be >= 1");
    if (!(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0))
        bad("agent.epsilon_start", "must be in [0,1]");
    if (!(a.epsilon_end >= 0.0 && a.epsilon_end <= a.epsilon_start))
        bad("agent.epsilon_end", "must be in [0, epsilon_start]");
    if (!(a.epsilon_decay_frac > 0.0 && a.epsilon_decay_frac <= 1.0))
        bad("agent.epsilon_decay_frac", "must be in (0,1]");
    if (a.episodes < 1) bad("agent.episodes", "must be >= 1");
    if (a.hidden < 1) bad("agent.hidden", "must be >= 1");
    if (!(a.grad_clip >= 0.0)) bad("agent.grad_clip", "must be >= 0");

    return rep;
}

// ---------------------------------------------------------------------------
// text form
// ---------------------------------------------------------------------------

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_double(v[i]);
    }
    return out;
}

const char* mode_name(AccessMode m) { return m == AccessMode::kNoma ? "noma" : "oma"; }
const char* sic_name(SicConvention s) {
    return s == SicConvention::kPrefix ? "prefix" : "paper_literal";
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "# scenario configuration\n";
    os << "# distances in meters, powers in linear watts, probabilities dimensionless\n";
    os << "n_loops = " << cfg.n_loops << "\n";
    os << "n_states = " << cfg.n_states << "\n";
    os << "n_actuations = " << cfg.n_actuations << "\n";
    os << "n_contexts = " << cfg.n_contexts << "\n";
    os << "\n# source_transitions.<loop>.<actuation>.<from-state> = one row of Pr(to-state)\n";
    for (int l = 0; l < cfg.n_loops; ++l)
        for (int k = 0; k < cfg.n_actuations; ++k)
            for (int r = 0; r < cfg.n_states; ++r) {
                const auto& m = cfg.source_transitions[l][k];
                std::vector<double> row(m.begin() + r * cfg.n_states,
                                        m.begin() + (r + 1) * cfg.n_states);
                os << "source_transitions." << l << "." << k << "." << r << " = "
                   << join_doubles(row) << "\n";
            }
    os << "\n# context_transitions.<from-context> = one row of Pr(to-context)\n";
    for (int r = 0; r < cfg.n_contexts; ++r) {
        std::vector<double> row(cfg.context_transitions.begin() + r * cfg.n_contexts,
                                cfg.context_transitions.begin() + (r + 1) * cfg.n_contexts);
        os << "context_transitions." << r << " = " << join_doubles(row) << "\n";
    }
    os << "\n# status_cost.<state> = C1 per context; actuation_cost = C3 per actuation\n";
    for (int s = 0; s < cfg.n_states; ++s) {
        std::vector<double> row(cfg.status_cost.begin() + s * cfg.n_contexts,
                                cfg.status_cost.begin() + (s + 1) * cfg.n_contexts);
        os << "status_cost." << s << " = " << join_doubles(row) << "\n";
    }
    os << "actuation_cost = " << join_doubles(cfg.actuation_cost) << "\n";
    os << "\nalpha = " << format_double(cfg.alpha) << "          # transmission-cost weight\n";
    os << "beta = " << format_double(cfg.beta) << "            # actuation-cost weight\n";
    os << "\ndistances = " << join_doubles(cfg.distances) << "   # meters, non-decreasing\n";
    os << "path_loss_exp = " << format_double(cfg.path_loss_exp) << "\n";
    os << "msg_len_bits = " << cfg.msg_len_bits << "\n";
    os << "block_len_symbols = " << cfg.block_len_symbols << "\n";
    os << "noise_power = " << format_double(cfg.noise_power) << "     # watts\n";
    os << "power_levels = " << cfg.power_levels << "\n";
    os << "snr_db = " << format_double(cfg.snr_db)
       << "        # p_max = noise_power * 10^(snr_db/10)\n";
    os << "aoi_cap = " << cfg.aoi_cap << "\n";
    os << "episode_len = " << cfg.episode_len << "\n";
    os << "\naccess_mode = " << mode_name(cfg.access_mode) << "   # noma | oma\n";
    os << "sic_convention = " << sic_name(cfg.sic_convention) << "   # prefix | paper_literal\n";
    os << "context_observable = " << (cfg.context_observable ? "true" : "false") << "\n";
    os << "belief_extra_step = " << (cfg.belief_extra_step ? "true" : "false") << "\n";
    os << "genie_obs = " << (cfg.genie_obs ? "true" : "false") << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "\nagent.learning_rate = " << format_double(cfg.agent.learning_rate) << "\n";
    os << "agent.batch_size = " << cfg.agent.batch_size << "\n";
    os << "agent.discount = " << format_double(cfg.agent.discount) << "\n";
    os << "agent.sync_every = " << cfg.agent.sync_every << "   # gradient steps\n";
    os << "agent.epsilon_start = " << format_double(cfg.agent.epsilon_start) << "\n";
    os << "agent.epsilon_end = " << format_double(cfg.agent.epsilon_end) << "\n";
    os << "agent.epsilon_decay_frac = " << format_double(cfg.agent.epsilon_decay_frac) << "\n";
    os << "agent.epsilon_constant = " << (cfg.agent.epsilon_constant ? "true" : "false") << "\n";
    os << "agent.episodes = " << cfg.agent.episodes << "\n";
    os << "agent.replay_capacity = " << cfg.agent.replay_capacity << "\n";
    os << "agent.hidden = " << cfg.agent.hidden << "\n";
    os << "agent.grad_clip = " << format_double(cfg.agent.grad_clip) << "   # 0 disables\n";
    return os.str();
}

namespace {

struct KeyValue {
    std::string key;
    std::string value;
    int line;
};

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

bool parse_int(const std::string& s, long long& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

bool parse_u64(const std::string& s, uint64_t& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, ValidationReport& report) {
    ScenarioConfig cfg = default_scenario();

    std::vector<KeyValue> kvs;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            report.issues.push_back(
                {"line " + std::to_string(lineno), "expected 'key = value', got '" + line + "'"});
            continue;
        }
        kvs.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno});
    }

    auto issue = [&report](const KeyValue& kv, const std::string& msg) {
        report.issues.push_back({kv.key + " (line " + std::to_string(kv.line) + ")", msg});
    };

    // dimensions first so the matrix containers can be sized before fills
    for (const auto& kv : kvs) {
        long long v;
        if (kv.key == "n_loops" && parse_int(kv.value, v)) cfg.n_loops = static_cast<int>(v);
        if (kv.key == "n_states" && parse_int(kv.value, v)) cfg.n_states = static_cast<int>(v);
        if (kv.key == "n_actuations" && parse_int(kv.value, v))
            cfg.n_actuations = static_cast<int>(v);
        if (kv.key == "n_contexts" && parse_int(kv.value, v)) cfg.n_contexts = static_cast<int>(v);
    }
    if (cfg.n_loops >= 1 && cfg.n_states >= 1 && cfg.n_actuations >= 1 && cfg.n_contexts >= 1) {
        cfg.source_transitions.assign(
            cfg.n_loops, std::vector<std::vector<double>>(
                             cfg.n_actuations, std::vector<double>(cfg.n_states * cfg.n_states, 0.0)));
        cfg.context_transitions.assign(cfg.n_contexts * cfg.n_contexts, 0.0);
        cfg.status_cost.assign(cfg.n_states * cfg.n_contexts, 0.0);
        cfg.actuation_cost.assign(cfg.n_actuations, 0.0);
        cfg.distances.assign(cfg.n_loops, 1.0);
    }

    for (const auto& kv : kvs) {
        const std::string& k = kv.key;
        const std::string& v = kv.value;
        long long iv;
        double dv;
        uint64_t uv;

        auto want_int = [&](int& target) {
            if (parse_int(v, iv)) target = static_cast<int>(iv);
            else issue(kv, "expected integer, got '" + v + "'");
        };
        auto want_double = [&](double& target) {
            if (parse_double(v, dv)) target = dv;
            else issue(kv, "expected number, got '" + v + "'");
        };
        auto want_bool = [&](bool& target) {
            if (v == "true") target = true;
            else if (v == "false") target = false;
            else issue(kv, "expected true|false, got '" + v + "'");
        };
        auto want_row = [&](std::vector<double>& target, size_t offset, size_t n) {
            auto toks = split_ws(v);
            if (toks.size() != n) {
                issue(kv, "expected " + std::to_string(n) + " values, got " +
                              std::to_string(toks.size()));
                return;
            }
            for (size_t i = 0; i < n; ++i) {
                double x;
                if (!parse_double(toks[i], x)) {
                    issue(kv, "expected number, got '" + toks[i] + "'");
                    return;
                }
                if (offset + i < target.size()) target[offset + i] = x;
            }
        };

        if (k == "n_loops" || k == "n_states" || k == "n_actuations" || k == "n_contexts") {
            // already consumed in the dimension pass; still flag bad values
            if (!parse_int(v, iv)) issue(kv, "expected integer, got '" + v + "'");
        } else if (k == "alpha") want_double(cfg.alpha);
        else if (k == "beta") want_double(cfg.beta);
        else if (k == "path_loss_exp") want_double(cfg.path_loss_exp);
        else if (k == "msg_len_bits") want_int(cfg.msg_len_bits);
        else if (k == "block_len_symbols") want_int(cfg.block_len_symbols);
        else if (k == "noise_power") want_double(cfg.noise_power);
        else if (k == "power_levels") want_int(cfg.power_levels);
        else if (k == "snr_db") want_double(cfg.snr_db);
        else if (k == "aoi_cap") want_int(cfg.aoi_cap);
        else if (k == "episode_len") want_int(cfg.episode_len);
        else if (k == "seed") {
            if (parse_u64(v, uv)) cfg.seed = uv;
            else issue(kv, "expected unsigned integer, got '" + v + "'");
        } else if (k == "access_mode") {
            if (v == "noma") cfg.access_mode = AccessMode::kNoma;
            else if (v == "oma") cfg.access_mode = AccessMode::kOma;
            else issue(kv, "expected noma|oma, got '" + v + "'");
        } else if (k == "sic_convention") {
            if (v == "prefix") cfg.sic_convention = SicConvention::kPrefix;
            else if (v == "paper_literal") cfg.sic_convention = SicConvention::kPaperLiteral;
            else issue(kv, "expected prefix|paper_literal, got '" + v + "'");
        } else if (k == "context_observable") want_bool(cfg.context_observable);
        else if (k == "belief_extra_step") want_bool(cfg.belief_extra_step);
        else if (k == "genie_obs") want_bool(cfg.genie_obs);
        else if (k == "distances") want_row(cfg.distances, 0, cfg.distances.size());
        else if (k == "actuation_cost") want_row(cfg.actuation_cost, 0, cfg.actuation_cost.size());
        else if (k == "agent.learning_rate") want_double(cfg.agent.learning_rate);
        else if (k == "agent.batch_size") want_int(cfg.agent.batch_size);
        else if (k == "agent.discount") want_double(cfg.agent.discount);
        else if (k == "agent.sync_every") want_int(cfg.agent.sync_every);
        else if (k == "agent.epsilon_start") want_double(cfg.agent.epsilon_start);
        else if (k == "agent.epsilon_end") want_double(cfg.agent.epsilon_end);
        else if (k == "agent.epsilon_decay_frac") want_double(cfg.agent.epsilon_decay_frac);
        else if (k == "agent.epsilon_constant") want_bool(cfg.agent.epsilon_constant);
        else if (k == "agent.episodes") want_int(cfg.agent.episodes);
        else if (k == "agent.replay_capacity") want_int(cfg.agent.replay_capacity);
        else if (k == "agent.hidden") want_int(cfg.agent.hidden);
        else if (k == "agent.grad_clip") want_double(cfg.agent.grad_clip);
        else if (k.rfind("source_transitions.", 0) == 0) {
            int l, a, r;
            char dot1, dot2;
            std::istringstream ks(k.substr(std::string("source_transitions.").size()));
            if (ks >> l >> dot1 >> a >> dot2 >> r && dot1 == '.' && dot2 == '.' && ks.eof() &&
                l >= 0 && l < cfg.n_loops && a >= 0 && a < cfg.n_actuations && r >= 0 &&
                r < cfg.n_states) {
                want_row(cfg.source_transitions[l][a], static_cast<size_t>(r) * cfg.n_states,
                         cfg.n_states);
            } else {
                issue(kv, "unknown key");
            }
        } else if (k.rfind("context_transitions.", 0) == 0) {
            int r;
            std::istringstream ks(k.substr(std::string("context_transitions.").size()));
            if (ks >> r && ks.eof() && r >= 0 && r < cfg.n_contexts)
                want_row(cfg.context_transitions, static_cast<size_t>(r) * cfg.n_contexts,
                         cfg.n_contexts);
            else issue(kv, "unknown key");
        } else if (k.rfind("status_cost.", 0) == 0) {
            int s;
            std::istringstream ks(k.substr(std::string("status_cost.").size()));
            if (ks >> s && ks.eof() && s >= 0 && s < cfg.n_states)
                want_row(cfg.status_cost, static_cast<size_t>(s) * cfg.n_contexts, cfg.n_contexts);
            else issue(kv, "unknown key");
        } else {
            issue(kv, "unknown key");
        }
    }
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path, ValidationReport& report) {
    std::ifstream in(path);
    if (!in) {
        report.issues.push_back({path, "cannot open file"});
        return default_scenario();
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), report);
}

void save_scenario_file(const std::string& path, const ScenarioConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_scenario(cfg);
}

}  // namespace got
