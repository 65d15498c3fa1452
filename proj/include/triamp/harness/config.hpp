// Copyright 2026 The triamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Experiment description and its flat "key = value" file format.
//
// Lines are "key = value"; '#' starts a comment; blank lines are ignored.
// Lists are comma separated, complex numbers are written like 0.4+0.3j.

#include "triamp/channel.hpp"
#include "triamp/replica.hpp"
#include "triamp/system_config.hpp"
#include "triamp/tri_amp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace triamp::harness {

inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> algos{"tri-amp", "bigamp-lmmse", "replica"};
    return algos;
}

struct ExperimentSpec {
    SystemConfig sys;
    ChannelEnsemble ensemble;
    std::optional<double> snr_db;            // overrides sys.sigma2 when set

    std::vector<double> snr_list;            // sweep-snr axis
    std::vector<int> tp_list;                // sweep-pilots axis
    std::optional<int> T_d;                  // fixed data length for the pilot sweep
    std::vector<double> rho_list;            // phase-diagram axes
    std::vector<int> t_list;                 // phase-diagram and min-pilots axis

    int trials = 100;
    int workers = 1;
    std::uint64_t seed = 1;
    std::vector<std::string> algorithms{"tri-amp", "bigamp-lmmse", "replica"};
    std::string out;
    bool record_time = false;

    AmpOptions amp{};
    ReplicaOptions replica{};
    ReplicaMode replica_mode = ReplicaMode::full;

    double success_mse_db = -20.0;
    double success_ser = 1e-4;

    int minpilot_trials = 10;
    int minpilot_required = 8;
    double minpilot_mse_db = -60.0;
    double minpilot_tol = 1e-14;
    int minpilot_max_iters = 3000;

    bool has_algorithm(std::string_view a) const {
        return std::find(algorithms.begin(), algorithms.end(), a) != algorithms.end();
    }

    /// Noise variance of the base point.
    double base_sigma2() const { return snr_db ? sigma_from_snr(sys, *snr_db) : sys.sigma2; }

    void validate() const {
        sys.validate();
        ensemble.validate();
        amp.validate();
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (algorithms.empty()) throw ConfigError("algorithms must not be empty");
        for (const auto& a : algorithms) {
            const auto& k = known_algorithms();
            if (std::find(k.begin(), k.end(), a) == k.end()) {
                throw ConfigError("unknown algorithm '" + a + "' (expected tri-amp, bigamp-lmmse or replica)");
            }
        }
        if (!(replica.relaxation > 0.0 && replica.relaxation <= 1.0)) {
            throw ConfigError("replica_relaxation must lie in (0, 1]");
        }
        if (replica.quad_nodes < 1) throw ConfigError("quad_nodes must be >= 1");
        if (minpilot_trials < 1 || minpilot_required < 1 || minpilot_required > minpilot_trials) {
            throw ConfigError("need 1 <= minpilot_required <= minpilot_trials");
        }
        for (int tp : tp_list) {
            if (tp < 0) throw ConfigError("tp_list entries must be >= 0");
        }
        for (double r : rho_list) {
            if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rho_list entries must lie in [0, 1]");
        }
        for (int t : t_list) {
            if (t < 1) throw ConfigError("t_list entries must be >= 1");
        }
        if (T_d && *T_d < 0) throw ConfigError("T_d must be >= 0");
    }

    bool operator==(const ExperimentSpec&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigError("expected a number, got '" + s + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("expected true/false, got '" + s + "'");
}

/// Accepts "a", "bj", "a+bj", "a-bj" (j or i as the imaginary unit).
inline Complex parse_complex(const std::string& raw) {
    std::string s;
    for (char c : raw) {
        if (c != ' ') s.push_back(c);
    }
    if (s.empty()) throw ConfigError("expected a complex number");
    if (s.back() != 'j' && s.back() != 'i') return {parse_double(s), 0.0};
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_part = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_double(t[0] == '+' ? t.substr(1) : t);
    };
    if (split == std::string::npos) return {0.0, imag_part(s)};
    return {parse_double(s.substr(0, split)), imag_part(s.substr(split))};
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_complex(Complex c) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", c.real(), c.imag());
    return buf;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& v, Fmt&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

inline InitMode parse_init_mode(const std::string& s) {
    if (s == "random-prior") return InitMode::random_prior;
    if (s == "zero-mean") return InitMode::zero_mean;
    if (s == "oracle-truth") return InitMode::oracle_truth;
    throw ConfigError("unknown init_mode '" + s + "' (random-prior, zero-mean, oracle-truth)");
}

inline DirectLink parse_direct_link(const std::string& s) {
    if (s == "present") return DirectLink::present;
    if (s == "absent") return DirectLink::absent;
    throw ConfigError("unknown direct_link '" + s + "' (present, absent)");
}

inline ReplicaMode parse_replica_mode(const std::string& s) {
    if (s == "full") return ReplicaMode::full;
    if (s == "no-direct-link") return ReplicaMode::no_direct_link;
    if (s == "no-ris") return ReplicaMode::no_ris;
    throw ConfigError("unknown replica_mode '" + s + "' (full, no-direct-link, no-ris)");
}

inline EnsembleKind parse_ensemble(const std::string& s) {
    if (s == "iid") return EnsembleKind::iid;
    if (s == "correlated") return EnsembleKind::correlated;
    throw ConfigError("unknown ensemble '" + s + "' (iid, correlated)");
}

struct Key {
    std::string name;
    std::function<void(ExperimentSpec&, const std::string&)> set;
    std::function<std::string(const ExperimentSpec&)> get;
};

inline std::string fmt_bool(bool b) { return b ? "true" : "false"; }

inline const std::vector<Key>& config_keys() {
    using S = ExperimentSpec;
    using Str = const std::string&;
    auto ints = [](const std::vector<int>& v) { return join(v, [](int x) { return std::to_string(x); }); };
    auto dbls = [](const std::vector<double>& v) { return join(v, fmt_double); };
    auto int_list = [](Str s) {
        std::vector<int> out;
        for (const auto& item : split_list(s)) out.push_back(parse_int<int>(item));
        return out;
    };
    auto dbl_list = [](Str s) {
        std::vector<double> out;
        for (const auto& item : split_list(s)) out.push_back(parse_double(item));
        return out;
    };
    static const std::vector<Key> keys{
        {"M", [](S& e, Str v) { e.sys.M = parse_int<int>(v); }, [](const S& e) { return std::to_string(e.sys.M); }},
        {"N", [](S& e, Str v) { e.sys.N = parse_int<int>(v); }, [](const S& e) { return std::to_string(e.sys.N); }},
        {"K", [](S& e, Str v) { e.sys.K = parse_int<int>(v); }, [](const S& e) { return std::to_string(e.sys.K); }},
        {"T", [](S& e, Str v) { e.sys.T = parse_int<int>(v); }, [](const S& e) { return std::to_string(e.sys.T); }},
        {"T_p", [](S& e, Str v) { e.sys.T_p = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.sys.T_p); }},
        {"rho", [](S& e, Str v) { e.sys.rho = parse_double(v); }, [](const S& e) { return fmt_double(e.sys.rho); }},
        {"sigma2", [](S& e, Str v) { e.sys.sigma2 = parse_double(v); },
         [](const S& e) { return fmt_double(e.sys.sigma2); }},
        {"snr_db", [](S& e, Str v) { e.snr_db = v.empty() ? std::nullopt : std::optional(parse_double(v)); },
         [](const S& e) { return e.snr_db ? fmt_double(*e.snr_db) : std::string(); }},
        {"q_g", [](S& e, Str v) { e.sys.q_g = parse_double(v); }, [](const S& e) { return fmt_double(e.sys.q_g); }},
        {"q_f", [](S& e, Str v) { e.sys.q_f = parse_double(v); }, [](const S& e) { return fmt_double(e.sys.q_f); }},
        {"q_h", [](S& e, Str v) { e.sys.q_h = parse_double(v); }, [](const S& e) { return fmt_double(e.sys.q_h); }},
        {"constellation", [](S& e, Str v) { e.sys.constellation = parse_constellation(v); },
         [](const S& e) { return std::string(to_string(e.sys.constellation)); }},
        {"ensemble", [](S& e, Str v) { e.ensemble.kind = parse_ensemble(v); },
         [](const S& e) { return std::string(to_string(e.ensemble.kind)); }},
        {"c_gl", [](S& e, Str v) { e.ensemble.c_gl = parse_complex(v); },
         [](const S& e) { return fmt_complex(e.ensemble.c_gl); }},
        {"c_gr", [](S& e, Str v) { e.ensemble.c_gr = parse_complex(v); },
         [](const S& e) { return fmt_complex(e.ensemble.c_gr); }},
        {"c_f", [](S& e, Str v) { e.ensemble.c_f = parse_complex(v); },
         [](const S& e) { return fmt_complex(e.ensemble.c_f); }},
        {"c_h", [](S& e, Str v) { e.ensemble.c_h = parse_complex(v); },
         [](const S& e) { return fmt_complex(e.ensemble.c_h); }},
        {"snr_list", [=](S& e, Str v) { e.snr_list = dbl_list(v); }, [=](const S& e) { return dbls(e.snr_list); }},
        {"tp_list", [=](S& e, Str v) { e.tp_list = int_list(v); }, [=](const S& e) { return ints(e.tp_list); }},
        {"T_d", [](S& e, Str v) { e.T_d = v.empty() ? std::nullopt : std::optional(parse_int<int>(v)); },
         [](const S& e) { return e.T_d ? std::to_string(*e.T_d) : std::string(); }},
        {"rho_list", [=](S& e, Str v) { e.rho_list = dbl_list(v); }, [=](const S& e) { return dbls(e.rho_list); }},
        {"t_list", [=](S& e, Str v) { e.t_list = int_list(v); }, [=](const S& e) { return ints(e.t_list); }},
        {"trials", [](S& e, Str v) { e.trials = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.trials); }},
        {"workers", [](S& e, Str v) { e.workers = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.workers); }},
        {"seed", [](S& e, Str v) { e.seed = parse_int<std::uint64_t>(v); },
         [](const S& e) { return std::to_string(e.seed); }},
        {"algorithms", [](S& e, Str v) { e.algorithms = split_list(v); },
         [](const S& e) { return join(e.algorithms, [](const std::string& a) { return a; }); }},
        {"out", [](S& e, Str v) { e.out = v; }, [](const S& e) { return e.out; }},
        {"record_time", [](S& e, Str v) { e.record_time = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.record_time); }},
        {"beta", [](S& e, Str v) { e.amp.beta = parse_double(v); }, [](const S& e) { return fmt_double(e.amp.beta); }},
        {"max_iters", [](S& e, Str v) { e.amp.max_iters = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.amp.max_iters); }},
        {"tol", [](S& e, Str v) { e.amp.tol = parse_double(v); }, [](const S& e) { return fmt_double(e.amp.tol); }},
        {"init_mode", [](S& e, Str v) { e.amp.init_mode = parse_init_mode(v); },
         [](const S& e) { return std::string(to_string(e.amp.init_mode)); }},
        {"init_scale", [](S& e, Str v) { e.amp.init_scale = parse_double(v); },
         [](const S& e) { return fmt_double(e.amp.init_scale); }},
        {"direct_link", [](S& e, Str v) { e.amp.direct_link = parse_direct_link(v); },
         [](const S& e) { return std::string(to_string(e.amp.direct_link)); }},
        {"restart_on_divergence", [](S& e, Str v) { e.amp.restart_on_divergence = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.restart_on_divergence); }},
        {"var_floor", [](S& e, Str v) { e.amp.var_floor = parse_double(v); },
         [](const S& e) { return fmt_double(e.amp.var_floor); }},
        {"blowup_ratio", [](S& e, Str v) { e.amp.blowup_ratio = parse_double(v); },
         [](const S& e) { return fmt_double(e.amp.blowup_ratio); }},
        {"damp_residuals", [](S& e, Str v) { e.amp.damping.residuals = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.damping.residuals); }},
        {"damp_channels", [](S& e, Str v) { e.amp.damping.channels = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.damping.channels); }},
        {"damp_data", [](S& e, Str v) { e.amp.damping.data = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.damping.data); }},
        {"damp_cascade", [](S& e, Str v) { e.amp.damping.cascade = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.damping.cascade); }},
        {"damp_variances", [](S& e, Str v) { e.amp.damping.variances = parse_bool(v); },
         [](const S& e) { return fmt_bool(e.amp.damping.variances); }},
        {"replica_mode", [](S& e, Str v) { e.replica_mode = parse_replica_mode(v); },
         [](const S& e) { return std::string(to_string(e.replica_mode)); }},
        {"replica_relaxation", [](S& e, Str v) { e.replica.relaxation = parse_double(v); },
         [](const S& e) { return fmt_double(e.replica.relaxation); }},
        {"replica_tol", [](S& e, Str v) { e.replica.tol = parse_double(v); },
         [](const S& e) { return fmt_double(e.replica.tol); }},
        {"replica_max_iters", [](S& e, Str v) { e.replica.max_iters = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.replica.max_iters); }},
        {"quad_nodes", [](S& e, Str v) { e.replica.quad_nodes = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.replica.quad_nodes); }},
        {"success_mse_db", [](S& e, Str v) { e.success_mse_db = parse_double(v); },
         [](const S& e) { return fmt_double(e.success_mse_db); }},
        {"success_ser", [](S& e, Str v) { e.success_ser = parse_double(v); },
         [](const S& e) { return fmt_double(e.success_ser); }},
        {"minpilot_trials", [](S& e, Str v) { e.minpilot_trials = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.minpilot_trials); }},
        {"minpilot_required", [](S& e, Str v) { e.minpilot_required = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.minpilot_required); }},
        {"minpilot_mse_db", [](S& e, Str v) { e.minpilot_mse_db = parse_double(v); },
         [](const S& e) { return fmt_double(e.minpilot_mse_db); }},
        {"minpilot_tol", [](S& e, Str v) { e.minpilot_tol = parse_double(v); },
         [](const S& e) { return fmt_double(e.minpilot_tol); }},
        {"minpilot_max_iters", [](S& e, Str v) { e.minpilot_max_iters = parse_int<int>(v); },
         [](const S& e) { return std::to_string(e.minpilot_max_iters); }},
    };
    return keys;
}

inline std::string suggest_key(std::string_view unknown) {
    std::string best;
    std::size_t best_dist = 4;
    for (const auto& k : config_keys()) {
        std::size_t d = edit_distance(unknown, k.name);
        if (k.name.starts_with(unknown) && !unknown.empty()) d = std::min<std::size_t>(d, 1);
        if (d < best_dist) {
            best_dist = d;
            best = k.name;
        }
    }
    return best;
}

}  // namespace detail

/// Parses config text. `origin` names the source in error messages.
inline ExperimentSpec parse_config(std::istream& in, const std::string& origin = "<config>") {
    ExperimentSpec spec;
    std::vector<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto where = origin + ":" + std::to_string(lineno) + ": ";
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + body + "'");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        const auto& keys = detail::config_keys();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
        if (it == keys.end()) {
            std::string msg = where + "unknown key '" + key + "'";
            const auto hint = detail::suggest_key(key);
            if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
            throw ConfigError(msg);
        }
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ConfigError(where + "duplicate key '" + key + "'");
        }
        seen.push_back(key);
        try {
            it->set(spec, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    return spec;
}

inline ExperimentSpec parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

/// Every key with its current value, in a form parse_config reads back.
inline std::string emit_config(const ExperimentSpec& spec) {
    std::string out;
    for (const auto& k : detail::config_keys()) {
        out += k.name + " = " + k.get(spec) + "\n";
    }
    return out;
}

}  // namespace triamp::harness
