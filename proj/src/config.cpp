#include "petal/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "petal/checkpoint.hpp"

namespace petal {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad numeric value for " + key + ": '" + text + "'");
    }
}

long long parse_int(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad integer value for " + key + ": '" + text + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw DataError("bad boolean value for " + key + ": '" + text + "' (use true/false)");
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
    std::string out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(seeds[i]);
    }
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw DataError("empty seed entry in " + key);
        seeds.push_back(static_cast<std::uint64_t>(parse_int(key, item)));
    }
    if (seeds.empty()) throw DataError(key + " needs at least one seed");
    return seeds;
}

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

// One row per config key; serialization order is this table's order. `ref`
// is a generic lambda returning a reference to the field, so each row is
// written once and used for both directions.
const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto dbl = [&f](std::string key, auto ref) {
            f.push_back(Field{
                key, [ref](const ExperimentConfig& c) { return format_double(ref(c)); },
                [key, ref](ExperimentConfig& c, const std::string& v) {
                    ref(c) = parse_double(key, v);
                }});
        };
        auto integer = [&f](std::string key, auto ref) {
            f.push_back(Field{
                key, [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); },
                [key, ref](ExperimentConfig& c, const std::string& v) {
                    ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(
                        parse_int(key, v));
                }});
        };
        auto boolean = [&f](std::string key, auto ref) {
            f.push_back(Field{
                key,
                [ref](const ExperimentConfig& c) {
                    return std::string(ref(c) ? "true" : "false");
                },
                [key, ref](ExperimentConfig& c, const std::string& v) {
                    ref(c) = parse_bool(key, v);
                }});
        };
        auto text = [&f](std::string key, auto ref) {
            f.push_back(Field{key,
                              [ref](const ExperimentConfig& c) { return std::string(ref(c)); },
                              [ref](ExperimentConfig& c, const std::string& v) { ref(c) = v; }});
        };

        dbl("train.alpha", [](auto& c) -> auto& { return c.train.alpha; });
        dbl("train.gamma", [](auto& c) -> auto& { return c.train.gamma; });
        dbl("train.xi", [](auto& c) -> auto& { return c.train.xi; });
        integer("train.epochs", [](auto& c) -> auto& { return c.train.epochs; });
        integer("train.seed", [](auto& c) -> auto& { return c.train.seed; });
        dbl("train.eta_base", [](auto& c) -> auto& { return c.train.eta_base; });
        dbl("train.eta_decay", [](auto& c) -> auto& { return c.train.eta_decay; });
        boolean("train.residual_gradients",
                [](auto& c) -> auto& { return c.train.residual_gradients; });
        boolean("train.freeze_shared", [](auto& c) -> auto& { return c.train.freeze_shared; });

        text("paths.corpus_dir", [](auto& c) -> auto& { return c.paths.corpus_dir; });
        text("paths.profile_dir", [](auto& c) -> auto& { return c.paths.profile_dir; });
        text("paths.template_file", [](auto& c) -> auto& { return c.paths.template_file; });
        text("paths.checkpoint_dir", [](auto& c) -> auto& { return c.paths.checkpoint_dir; });
        text("paths.report_dir", [](auto& c) -> auto& { return c.paths.report_dir; });

        integer("layout.n_source_users",
                [](auto& c) -> auto& { return c.layout.n_source_users; });
        integer("layout.n_target_users",
                [](auto& c) -> auto& { return c.layout.n_target_users; });
        integer("layout.source_dialogues",
                [](auto& c) -> auto& { return c.layout.source_dialogues; });
        integer("layout.target_train_dialogues",
                [](auto& c) -> auto& { return c.layout.target_train_dialogues; });
        integer("layout.target_test_dialogues",
                [](auto& c) -> auto& { return c.layout.target_test_dialogues; });
        f.push_back(Field{"layout.seeds",
                          [](const ExperimentConfig& c) { return join_seeds(c.layout.seeds); },
                          [](ExperimentConfig& c, const std::string& v) {
                              c.layout.seeds = parse_seeds("layout.seeds", v);
                          }});

        text("baseline.kind", [](auto& c) -> auto& { return c.baseline.kind; });
        dbl("baseline.prior_lambda", [](auto& c) -> auto& { return c.baseline.prior_lambda; });
        integer("baseline.bandit_budget",
                [](auto& c) -> auto& { return c.baseline.bandit_budget; });

        dbl("sim.rho", [](auto& c) -> auto& { return c.sim.rho; });
        integer("sim.max_turns", [](auto& c) -> auto& { return c.sim.max_turns; });
        dbl("sim.ask_all_weight", [](auto& c) -> auto& { return c.sim.ask_all_weight; });
        dbl("sim.wrong_roster_prob", [](auto& c) -> auto& { return c.sim.wrong_roster_prob; });
        dbl("sim.test_wrong_roster_prob",
            [](auto& c) -> auto& { return c.sim.test_wrong_roster_prob; });

        integer("model.d", [](auto& c) -> auto& { return c.model.d; });
        integer("model.v", [](auto& c) -> auto& { return c.model.v; });
        dbl("model.init_std", [](auto& c) -> auto& { return c.model.init_std; });

        dbl("reward.confirm", [](auto& c) -> auto& { return c.rewards.confirm; });
        dbl("reward.decline", [](auto& c) -> auto& { return c.rewards.decline; });
        dbl("reward.inform", [](auto& c) -> auto& { return c.rewards.inform; });
        dbl("reward.payment", [](auto& c) -> auto& { return c.rewards.payment; });
        dbl("reward.per_turn", [](auto& c) -> auto& { return c.rewards.per_turn; });
        dbl("reward.illogical", [](auto& c) -> auto& { return c.rewards.illogical; });

        integer("eval.episodes_per_user",
                [](auto& c) -> auto& { return c.eval.episodes_per_user; });
        return f;
    }();
    return table;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

void validate(const ExperimentConfig& c) {
    auto positive = [](const char* key, double v) {
        if (!(v > 0)) throw DataError(std::string(key) + " must be positive");
    };
    positive("train.alpha", c.train.alpha);
    positive("model.d", c.model.d);
    positive("layout.n_source_users", c.layout.n_source_users);
    positive("layout.n_target_users", c.layout.n_target_users);
    positive("layout.source_dialogues", c.layout.source_dialogues);
    positive("layout.target_train_dialogues", c.layout.target_train_dialogues);
    positive("layout.target_test_dialogues", c.layout.target_test_dialogues);
    positive("sim.max_turns", c.sim.max_turns);
    positive("eval.episodes_per_user", c.eval.episodes_per_user);
    if (c.train.epochs < 0) throw DataError("train.epochs must be non-negative");
    if (c.layout.seeds.empty()) throw DataError("layout.seeds must be non-empty");
    if (c.model.v < 0) throw DataError("model.v must be >= 0");
    if (c.train.gamma < 0 || c.train.gamma > 1) throw DataError("train.gamma must be in [0,1]");
    if (c.train.xi < 0 || c.train.xi > 1) throw DataError("train.xi must be in [0,1]");
    if (c.sim.rho < 0 || c.sim.rho > 1) throw DataError("sim.rho must be in [0,1]");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    static const std::map<std::string, const Field*> by_key = [] {
        std::map<std::string, const Field*> m;
        for (const Field& field : fields()) m[field.key] = &field;
        return m;
    }();

    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(line_no) + " has no '=': " + stripped);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw DataError("unknown config key '" + key + "' on line " + std::to_string(line_no));
        }
        it->second->set(config, value);
    }
    validate(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    for (const Field& field : fields()) {
        out += field.key;
        out += " = ";
        out += field.get(config);
        out += '\n';
    }
    return out;
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write config file: " + path);
    out << serialize_config(config);
    if (!out) throw DataError("failed writing config file: " + path);
}

std::string config_hash(const ExperimentConfig& config) {
    // Storage locations do not change what a checkpoint means, so paths.*
    // stay out of the hash; everything else participates.
    std::string hashed;
    for (const Field& field : fields()) {
        if (field.key.rfind("paths.", 0) == 0) continue;
        hashed += field.key;
        hashed += " = ";
        hashed += field.get(config);
        hashed += '\n';
    }
    return hash_text(hashed);
}

SimConfig sim_config_of(const ExperimentConfig& config) {
    SimConfig s;
    s.rho = config.sim.rho;
    s.max_turns = config.sim.max_turns;
    s.rewards = config.rewards;
    return s;
}

ScriptMix script_mix_of(const ExperimentConfig& config) {
    ScriptMix mix;
    mix.ask_all_weight = config.sim.ask_all_weight;
    mix.wrong_roster_prob = config.sim.wrong_roster_prob;
    return mix;
}

}  // namespace petal
