#include "crn/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace crn {

using json = nlohmann::json;

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::dqn: return "dqn";
        case PolicyKind::random: return "random";
        case PolicyKind::harvest_transmit: return "harvest_transmit";
    }
    return "dqn";
}

PolicyKind policy_kind_from_string(std::string_view name) {
    if (name == "dqn") return PolicyKind::dqn;
    if (name == "random") return PolicyKind::random;
    if (name == "harvest_transmit") return PolicyKind::harvest_transmit;
    throw ConfigError(ConfigError::Kind::invalid, "policy",
                      "policy: unknown policy '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
    throw ConfigError(ConfigError::Kind::invalid, key, key + ": " + what);
}

// Re-raise a validate() diagnostic of the form "key: message" as a ConfigError.
[[noreturn]] void rethrow_as_config_error(const std::invalid_argument& e, const std::string& prefix) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    const std::string key = colon == std::string::npos ? prefix : msg.substr(0, colon);
    throw ConfigError(ConfigError::Kind::invalid, key, (prefix.empty() ? "" : prefix + ".") + msg);
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        env.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_as_config_error(e, "env");
    }
    try {
        agent.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_as_config_error(e, "agent");
    }
    if (policy == PolicyKind::dqn) {
        const auto& sizes = agent.net.layer_sizes;
        if (sizes.front() != kFeatureCount)
            invalid("net", "input width must be " + std::to_string(kFeatureCount));
        if (sizes.back() != env.action_count())
            invalid("net", "output width must equal the action count " +
                               std::to_string(env.action_count()));
    }
    if (seeds.empty()) invalid("seeds", "at least one seed is required");
    if (sweep) {
        if (!is_sweep_parameter(sweep->parameter))
            invalid("sweep", "unknown parameter '" + sweep->parameter + "'");
        if (sweep->values.empty()) invalid("sweep", "values must not be empty");
        for (double v : sweep->values) {
            EnvConfig probe = env;
            apply_parameter(probe, sweep->parameter, v);
            try {
                probe.validate();
            } catch (const std::invalid_argument& e) {
                rethrow_as_config_error(e, "sweep");
            }
        }
    }
    if (output_dir.empty()) invalid("output_dir", "must not be empty");
}

// Sweep parameters -------------------------------------------------------------

namespace {

struct LinkAlias {
    std::string_view name;
    std::array<LinkRole, 2> roles;
    std::size_t role_count;
    bool cascade;  // cascade level, otherwise distance
};

constexpr std::array<LinkAlias, 8> kLinkAliases = {{
    {"N_m", {LinkRole::main_s, LinkRole::eh_s_p}, 2, true},
    {"N_e", {LinkRole::wiretap_se, LinkRole::wiretap_se}, 1, true},
    {"d_s", {LinkRole::main_s, LinkRole::eh_s_p}, 2, false},
    {"d_se", {LinkRole::wiretap_se, LinkRole::wiretap_se}, 1, false},
    {"d_sp", {LinkRole::su_to_pu_sp, LinkRole::su_to_pu_sp}, 1, false},
    {"d_pr", {LinkRole::pu_to_su_pr, LinkRole::pu_to_su_pr}, 1, false},
    {"d_p", {LinkRole::pu_pu_p, LinkRole::pu_pu_p}, 1, false},
    {"d_j", {LinkRole::jam_j, LinkRole::jam_j}, 1, false},
}};

constexpr std::array<std::string_view, 12> kScalarParams = {
    "N", "xi", "T_s", "N_0", "theta", "eta", "E_max", "C_max", "C_init", "zeta", "I_th", "P_p_max",
};

int as_count(std::string_view name, double value) {
    if (value != std::floor(value)) invalid(std::string(name), "must be an integer");
    return static_cast<int>(value);
}

}  // namespace

bool is_sweep_parameter(std::string_view name) {
    if (name == "PL") return true;
    if (std::find(kScalarParams.begin(), kScalarParams.end(), name) != kScalarParams.end())
        return true;
    return std::any_of(kLinkAliases.begin(), kLinkAliases.end(),
                       [&](const LinkAlias& a) { return a.name == name; });
}

void apply_parameter(EnvConfig& env, std::string_view name, double value) {
    if (name == "N") env.N = as_count(name, value);
    else if (name == "xi") env.xi = as_count(name, value);
    else if (name == "T_s") env.T_s = value;
    else if (name == "N_0") env.N_0 = value;
    else if (name == "theta") env.theta = value;
    else if (name == "eta") env.eta = value;
    else if (name == "E_max") env.E_max = value;
    else if (name == "C_max") env.C_max = value;
    else if (name == "C_init") env.C_init = value;
    else if (name == "zeta") env.zeta = value;
    else if (name == "I_th") env.I_th = value;
    else if (name == "P_p_max") env.P_p_max = value;
    else if (name == "PL") {
        for (auto& l : env.links) l.path_loss_exponent = value;
    } else {
        const auto it = std::find_if(kLinkAliases.begin(), kLinkAliases.end(),
                                     [&](const LinkAlias& a) { return a.name == name; });
        if (it == kLinkAliases.end()) invalid("sweep", "unknown parameter '" + std::string(name) + "'");
        for (std::size_t r = 0; r < it->role_count; ++r) {
            auto& link = env.link(it->roles[r]);
            if (it->cascade) link.cascade_level = as_count(name, value);
            else link.distance = value;
        }
    }
}

// JSON -------------------------------------------------------------------------

namespace {

class Reader {
public:
    Reader(const json& obj, std::string scope) : obj_(obj), scope_(std::move(scope)) {
        if (!obj_.is_object()) invalid(scope_.empty() ? "config" : scope_, "must be an object");
    }

    void check_keys(std::initializer_list<std::string_view> allowed) const {
        for (const auto& [key, _] : obj_.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                invalid(key, "unknown key" + (scope_.empty() ? "" : " in '" + scope_ + "'"));
        }
    }

    void real(const char* key, double& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number()) invalid(key, "must be a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) invalid(key, "must be an integer");
            const auto raw = v->get<long long>();
            if (raw < 0 && std::is_unsigned_v<Int>) invalid(key, "must be >= 0");
            out = static_cast<Int>(raw);
        }
    }

    void string(const char* key, std::string& out) const {
        if (const json* v = find(key)) {
            if (!v->is_string()) invalid(key, "must be a string");
            out = v->get<std::string>();
        }
    }

    [[nodiscard]] const json* find(const char* key) const {
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

private:
    const json& obj_;
    std::string scope_;
};

void read_links(const json& links, EnvConfig& env) {
    Reader r(links, "links");
    for (const auto& [name, spec] : links.items()) {
        LinkRole role;
        try {
            role = link_role_from_string(name);
        } catch (const std::invalid_argument&) {
            invalid(name, "unknown link role in 'links'");
        }
        LinkSpec& link = env.link(role);
        Reader lr(spec, name);
        lr.check_keys({"cascade_level", "distance", "path_loss_exponent"});
        lr.integer("cascade_level", link.cascade_level);
        lr.real("distance", link.distance);
        lr.real("path_loss_exponent", link.path_loss_exponent);
    }
}

void read_env(const json& j, EnvConfig& env) {
    Reader r(j, "env");
    r.check_keys({"N", "xi", "T_s", "N_0", "theta", "eta", "E_max", "C_max", "C_init", "zeta",
                  "I_th", "P_p_max", "power_levels", "links", "mode"});
    r.integer("N", env.N);
    r.integer("xi", env.xi);
    r.real("T_s", env.T_s);
    r.real("N_0", env.N_0);
    r.real("theta", env.theta);
    r.real("eta", env.eta);
    r.real("E_max", env.E_max);
    r.real("C_max", env.C_max);
    r.real("C_init", env.C_init);
    r.real("zeta", env.zeta);
    r.real("I_th", env.I_th);
    r.real("P_p_max", env.P_p_max);
    if (const json* v = r.find("power_levels")) {
        if (!v->is_array()) invalid("power_levels", "must be an array of numbers");
        env.power_levels.clear();
        for (const auto& x : *v) {
            if (!x.is_number()) invalid("power_levels", "must be an array of numbers");
            env.power_levels.push_back(x.get<double>());
        }
    }
    if (const json* v = r.find("links")) read_links(*v, env);
    if (const json* v = r.find("mode")) {
        if (!v->is_string()) invalid("mode", "must be a string");
        try {
            env.mode = reward_mode_from_string(v->get<std::string>());
        } catch (const std::invalid_argument& e) {
            invalid("mode", e.what());
        }
    }
}

void read_agent(const json& j, AgentConfig& agent) {
    Reader r(j, "agent");
    r.check_keys({"nu", "alpha", "epsilon_max", "epsilon_min", "r_d", "buffer_capacity",
                  "batch_size", "warmup", "target_sync_period", "episodes", "net"});
    r.real("nu", agent.nu);
    r.real("alpha", agent.alpha);
    r.real("epsilon_max", agent.epsilon_max);
    r.real("epsilon_min", agent.epsilon_min);
    r.real("r_d", agent.r_d);
    r.integer("buffer_capacity", agent.buffer_capacity);
    r.integer("batch_size", agent.batch_size);
    r.integer("warmup", agent.warmup);
    r.integer("target_sync_period", agent.target_sync_period);
    r.integer("episodes", agent.episodes);
    if (const json* v = r.find("net")) {
        if (!v->is_array()) invalid("net", "must be an array of layer widths");
        agent.net.layer_sizes.clear();
        for (const auto& x : *v) {
            if (!x.is_number_unsigned()) invalid("net", "layer widths must be positive integers");
            agent.net.layer_sizes.push_back(x.get<std::size_t>());
        }
    }
}

json links_to_json(const EnvConfig& env) {
    json out = json::object();
    for (const auto& l : env.links) {
        out[std::string(to_string(l.role))] = {
            {"cascade_level", l.cascade_level},
            {"distance", l.distance},
            {"path_loss_exponent", l.path_loss_exponent},
        };
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigError::Kind::parse, "",
                          "parse error in " + origin + ": " + std::string(e.what()));
    }
    Reader top(j, "");
    top.check_keys({"preset", "env", "agent", "policy", "seeds", "sweep", "output_dir"});

    ExperimentConfig cfg;
    if (const json* p = top.find("preset")) {
        if (!p->is_string()) invalid("preset", "must be a string");
        cfg = make_preset(p->get<std::string>()).config;
    }
    if (const json* v = top.find("env")) read_env(*v, cfg.env);
    if (const json* v = top.find("agent")) read_agent(*v, cfg.agent);
    if (const json* v = top.find("policy")) {
        if (!v->is_string()) invalid("policy", "must be a string");
        cfg.policy = policy_kind_from_string(v->get<std::string>());
    }
    if (const json* v = top.find("seeds")) {
        if (!v->is_array()) invalid("seeds", "must be an array of non-negative integers");
        cfg.seeds.clear();
        for (const auto& s : *v) {
            if (!s.is_number_unsigned()) invalid("seeds", "must be an array of non-negative integers");
            cfg.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    if (const json* v = top.find("sweep")) {
        if (v->is_null()) {
            cfg.sweep.reset();
        } else {
            Reader sr(*v, "sweep");
            sr.check_keys({"parameter", "values"});
            Sweep sw;
            sr.string("parameter", sw.parameter);
            if (const json* vals = sr.find("values")) {
                if (!vals->is_array()) invalid("sweep", "values must be an array of numbers");
                for (const auto& x : *vals) {
                    if (!x.is_number()) invalid("sweep", "values must be an array of numbers");
                    sw.values.push_back(x.get<double>());
                }
            }
            cfg.sweep = std::move(sw);
        }
    }
    top.string("output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError(ConfigError::Kind::missing_file, "",
                          "config file not found or unreadable: " + path.string());
    }
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    if (!c.preset.empty()) j["preset"] = c.preset;
    j["env"] = {
        {"N", c.env.N},
        {"xi", c.env.xi},
        {"T_s", c.env.T_s},
        {"N_0", c.env.N_0},
        {"theta", c.env.theta},
        {"eta", c.env.eta},
        {"E_max", c.env.E_max},
        {"C_max", c.env.C_max},
        {"C_init", c.env.C_init},
        {"zeta", c.env.zeta},
        {"I_th", c.env.I_th},
        {"P_p_max", c.env.P_p_max},
        {"power_levels", c.env.power_levels},
        {"links", links_to_json(c.env)},
        {"mode", std::string(to_string(c.env.mode))},
    };
    j["agent"] = {
        {"nu", c.agent.nu},
        {"alpha", c.agent.alpha},
        {"epsilon_max", c.agent.epsilon_max},
        {"epsilon_min", c.agent.epsilon_min},
        {"r_d", c.agent.r_d},
        {"buffer_capacity", c.agent.buffer_capacity},
        {"batch_size", c.agent.batch_size},
        {"warmup", c.agent.warmup},
        {"target_sync_period", c.agent.target_sync_period},
        {"episodes", c.agent.episodes},
        {"net", c.agent.net.layer_sizes},
    };
    j["policy"] = std::string(to_string(c.policy));
    j["seeds"] = c.seeds;
    if (c.sweep) {
        j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    } else {
        j["sweep"] = nullptr;
    }
    j["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

std::vector<Curve> expand_curves(const ExperimentConfig& config) {
    const std::string base = config.preset.empty() ? "run" : config.preset;
    if (!config.sweep) {
        return {Curve{base, "", 0.0, config.env, config.policy}};
    }
    std::vector<Curve> out;
    for (double v : config.sweep->values) {
        Curve c;
        c.id = base + "_" + config.sweep->parameter + format_real(v);
        c.param_name = config.sweep->parameter;
        c.param_value = v;
        c.env = config.env;
        apply_parameter(c.env, c.param_name, v);
        c.policy = config.policy;
        out.push_back(std::move(c));
    }
    return out;
}

// Presets ----------------------------------------------------------------------
//
// Caption values come first; grids the figures do not state are reconstructed:
//   fig1  N_m in {1,2,3}
//   fig2  theta in {0.1..0.9} x eta in {0.5, 0.9}
//   fig3  (xi, d_s) in {(2,15), (10,15), (20,15), (10,5)}
//   fig4  I_th in {1e-9..1e-2} (one per decade) x C_max in {0.5, 1.0} J, C_init = C_max / 2
//   fig5  I_th in {1e-9..1e-2}
//   fig6/fig7  dqn, random, harvest_transmit

namespace {

constexpr std::array<std::string_view, 7> kPresetNames = {"fig1", "fig2", "fig3", "fig4",
                                                          "fig5", "fig6", "fig7"};

std::vector<double> ith_grid() {
    std::vector<double> g;
    for (int e = -9; e <= -2; ++e) g.push_back(std::pow(10.0, e));
    return g;
}

EnvConfig base_env(int n_m, int n_e, double d_s, int xi, double theta, double eta) {
    EnvConfig env;
    apply_parameter(env, "N_m", n_m);
    apply_parameter(env, "N_e", n_e);
    apply_parameter(env, "d_s", d_s);
    env.xi = xi;
    env.theta = theta;
    env.eta = eta;
    env.I_th = 0.01;
    return env;
}

Curve make_curve(std::string id, std::string param, double value, EnvConfig env,
                 PolicyKind policy = PolicyKind::dqn) {
    return Curve{std::move(id), std::move(param), value, std::move(env), policy};
}

std::vector<Curve> policy_comparison(const std::string& name, const EnvConfig& env) {
    std::vector<Curve> out;
    for (PolicyKind k : {PolicyKind::dqn, PolicyKind::random, PolicyKind::harvest_transmit}) {
        out.push_back(make_curve(name + "_" + std::string(to_string(k)), "policy",
                                 static_cast<double>(k), env, k));
    }
    return out;
}

}  // namespace

std::span<const std::string_view> preset_names() { return kPresetNames; }

Preset make_preset(std::string_view name) {
    Preset p;
    p.name = std::string(name);
    ExperimentConfig& cfg = p.config;
    cfg.preset = p.name;
    cfg.seeds = {1, 2, 3, 4, 5};
    cfg.output_dir = "results/" + p.name;

    if (name == "fig1") {
        cfg.env = base_env(1, 2, 2.0, 2, 0.9, 0.9);
        cfg.sweep = Sweep{"N_m", {1, 2, 3}};
        p.curves = expand_curves(cfg);
    } else if (name == "fig2") {
        cfg.env = base_env(1, 2, 12.0, 6, 0.5, 0.9);
        std::vector<double> thetas;
        for (int i = 1; i <= 9; ++i) thetas.push_back(i / 10.0);
        cfg.sweep = Sweep{"theta", thetas};
        for (double eta : {0.5, 0.9}) {
            for (double theta : thetas) {
                EnvConfig env = cfg.env;
                env.eta = eta;
                env.theta = theta;
                p.curves.push_back(make_curve(
                    "fig2_eta" + format_real(eta) + "_theta" + format_real(theta), "theta", theta,
                    env));
            }
        }
    } else if (name == "fig3") {
        cfg.env = base_env(4, 3, 15.0, 2, 0.4, 0.1);
        cfg.sweep = Sweep{"xi", {2, 10, 20}};
        p.curves = expand_curves(cfg);
        for (auto& c : p.curves) c.id = "fig3_xi" + format_real(c.param_value) + "_ds15";
        EnvConfig near = cfg.env;
        near.xi = 10;
        apply_parameter(near, "d_s", 5.0);
        p.curves.push_back(make_curve("fig3_xi10_ds5", "xi", 10, near));
    } else if (name == "fig4") {
        cfg.env = base_env(1, 1, 15.0, 2, 0.6, 0.9);
        cfg.sweep = Sweep{"I_th", ith_grid()};
        for (double c_max : {0.5, 1.0}) {
            for (double ith : ith_grid()) {
                EnvConfig env = cfg.env;
                env.C_max = c_max;
                env.C_init = c_max / 2.0;
                env.I_th = ith;
                p.curves.push_back(make_curve(
                    "fig4_Cmax" + format_real(c_max) + "_Ith" + format_real(ith), "I_th", ith, env));
            }
        }
    } else if (name == "fig5") {
        cfg.env = base_env(1, 1, 15.0, 2, 0.4, 0.9);
        cfg.sweep = Sweep{"I_th", ith_grid()};
        p.curves = expand_curves(cfg);
    } else if (name == "fig6") {
        cfg.env = base_env(2, 2, 15.0, 2, 0.8, 0.9);
        p.curves = policy_comparison(p.name, cfg.env);
    } else if (name == "fig7") {
        cfg.env = base_env(1, 2, 15.0, 2, 0.6, 0.9);
        cfg.env.mode = RewardMode::throughput;
        p.curves = policy_comparison(p.name, cfg.env);
    } else {
        throw ConfigError(ConfigError::Kind::invalid, "preset",
                          "preset: unknown preset '" + std::string(name) + "' (expected fig1..fig7)");
    }
    return p;
}

// Running ----------------------------------------------------------------------

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t curve_index) {
    return master_seed * 10007u + curve_index;
}

double tail_mean(std::span<const EpisodeStats> stats, std::size_t window) {
    if (stats.empty()) return 0.0;
    const std::size_t n = std::min(window, stats.size());
    double sum = 0.0;
    for (std::size_t i = stats.size() - n; i < stats.size(); ++i) sum += stats[i].mean_reward;
    return sum / static_cast<double>(n);
}

namespace {

CurveRun execute(const Curve& curve, std::size_t index, const AgentConfig& agent,
                 std::uint64_t seed) {
    CurveRun run;
    run.run_id = curve.id;
    run.param_name = curve.param_name;
    run.param_value = curve.param_value;
    run.policy = curve.policy;
    run.seed = seed;
    const std::uint64_t stream = run_seed(seed, index);
    if (curve.policy == PolicyKind::dqn) {
        TrainingResult r = run_training(curve.env, agent, stream);
        run.stats = std::move(r.episodes);
        run.params = std::move(r.params);
    } else {
        BaselinePolicy policy(curve.policy == PolicyKind::random ? BaselineKind::random
                                                                 : BaselineKind::harvest_transmit);
        run.stats = run_policy(policy, curve.env, agent.episodes, stream);
    }
    return run;
}

std::string stem(const CurveRun& run) { return run.run_id + "_seed" + std::to_string(run.seed); }

}  // namespace

ExperimentResult run_curves(std::span<const Curve> curves, const AgentConfig& agent,
                            std::span<const std::uint64_t> seeds, const RunOptions& options) {
    if (seeds.empty()) throw ConfigError(ConfigError::Kind::invalid, "seeds", "seeds: none given");
    for (const auto& c : curves) c.env.validate();
    agent.validate();

    if (options.write_files) {
        std::error_code ec;
        std::filesystem::create_directories(options.output_dir, ec);
        if (ec || !std::filesystem::is_directory(options.output_dir))
            throw std::runtime_error("cannot create output directory '" +
                                     options.output_dir.string() + "'");
    }

    const std::size_t jobs = curves.size() * seeds.size();
    ExperimentResult result;
    result.runs.resize(jobs);
    std::vector<std::exception_ptr> errors(jobs);

    // Runs are independent; each owns its environment, agent and stream.
#pragma omp parallel for schedule(dynamic, 1)
    for (long job = 0; job < static_cast<long>(jobs); ++job) {
        const std::size_t ci = static_cast<std::size_t>(job) / seeds.size();
        const std::size_t si = static_cast<std::size_t>(job) % seeds.size();
        try {
            CurveRun run = execute(curves[ci], ci, agent, seeds[si]);
            if (options.write_files) {
                write_csv(run.stats, run.run_id, run.seed, options.output_dir / (stem(run) + ".csv"));
                if (options.save_checkpoints && run.params)
                    nn::save_params(options.output_dir / (stem(run) + ".params"), *run.params);
            }
            if (options.on_run_done) {
#pragma omp critical(crn_progress)
                options.on_run_done(run);
            }
            result.runs[static_cast<std::size_t>(job)] = std::move(run);
        } catch (...) {
            errors[static_cast<std::size_t>(job)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (const auto& run : result.runs) {
        result.summary.push_back({run.run_id, run.seed, run.param_name, run.param_value,
                                  tail_mean(run.stats, kSummaryWindow)});
    }
    if (options.write_files) write_summary_csv(result.summary, options.output_dir / "summary.csv");
    return result;
}

ExperimentResult run_preset(std::string_view name, std::span<const std::uint64_t> seeds,
                            const std::filesystem::path& output_dir, std::optional<int> episodes,
                            std::function<void(const CurveRun&)> on_run_done) {
    Preset p = make_preset(name);
    if (episodes) p.config.agent.episodes = *episodes;
    RunOptions options;
    options.output_dir = output_dir;
    options.on_run_done = std::move(on_run_done);
    return run_curves(p.curves, p.config.agent, seeds, options);
}

// CSV --------------------------------------------------------------------------

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& s, const std::filesystem::path& path) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(path.string() + ": bad number '" + s + "'");
    return v;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 std::string_view header) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(is, line) || line != header)
        throw std::runtime_error(path.string() + ": expected header '" + std::string(header) + "'");
    const std::size_t width = split(std::string(header)).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != width)
            throw std::runtime_error(path.string() + ": row with " + std::to_string(cells.size()) +
                                     " fields, expected " + std::to_string(width));
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void write_csv(std::span<const EpisodeStats> records, std::string_view run_id, std::uint64_t seed,
               const std::filesystem::path& path) {
    auto os = open_for_write(path);
    os << kCurveCsvHeader << '\n';
    for (const auto& r : records) {
        os << run_id << ',' << seed << ',' << r.episode << ',' << format_real(r.total_reward) << ','
           << format_real(r.mean_reward) << ',' << format_real(r.epsilon) << ','
           << format_real(r.mean_loss) << '\n';
    }
    finish(os, path);
}

void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
    auto os = open_for_write(path);
    os << kSummaryCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.run_id << ',' << r.seed << ',' << r.param_name << ',' << format_real(r.param_value)
           << ',' << format_real(r.final_mean_reward) << '\n';
    }
    finish(os, path);
}

std::vector<EpisodeStats> read_curve_csv(const std::filesystem::path& path) {
    std::vector<EpisodeStats> out;
    for (const auto& c : read_table(path, kCurveCsvHeader)) {
        EpisodeStats s;
        s.episode = static_cast<int>(parse_real(c[2], path));
        s.total_reward = parse_real(c[3], path);
        s.mean_reward = parse_real(c[4], path);
        s.epsilon = parse_real(c[5], path);
        s.mean_loss = parse_real(c[6], path);
        out.push_back(s);
    }
    return out;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::vector<SummaryRow> out;
    for (const auto& c : read_table(path, kSummaryCsvHeader)) {
        out.push_back({c[0], static_cast<std::uint64_t>(parse_real(c[1], path)), c[2],
                       parse_real(c[3], path), parse_real(c[4], path)});
    }
    return out;
}

}  // namespace crn
