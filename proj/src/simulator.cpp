#include "petal/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace petal {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_placeholder(const std::string& token) {
    return token.size() > 2 && token.front() == '{' && token.back() == '}';
}

std::string placeholder_name(const std::string& token) {
    return token.substr(1, token.size() - 2);
}

// tokenize() would strip the placeholder braces, so patterns are split on
// whitespace first and only the non-placeholder pieces get normalized.
std::vector<std::string> split_pattern(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string piece;
    while (in >> piece) {
        if (is_placeholder(piece)) {
            out.push_back(piece);
            continue;
        }
        for (const std::string& tok : tokenize(piece)) out.push_back(tok);
    }
    return out;
}

// Splices the value tokens in place of the "{values}" placeholder.
std::vector<std::string> splice_values(const std::vector<std::string>& pattern,
                                       const std::vector<std::string>& values) {
    std::vector<std::string> out;
    out.reserve(pattern.size() + values.size());
    for (const std::string& tok : pattern) {
        if (is_placeholder(tok)) {
            const std::string name = placeholder_name(tok);
            if (name == "values" || name == "value") {
                out.insert(out.end(), values.begin(), values.end());
                continue;
            }
        }
        out.push_back(tok);
    }
    return out;
}

std::string assignment_key(const ChoiceAssignment& a) {
    std::string key;
    for (const auto& v : a) {
        key += v.has_value() ? std::to_string(*v) : std::string("-");
        key += ',';
    }
    return key;
}

bool assignment_complete(const ChoiceAssignment& a) {
    if (a.empty()) return false;
    return std::all_of(a.begin(), a.end(), [](const auto& v) { return v.has_value(); });
}

}  // namespace

DialogueAct DialogueAct::greet() { return DialogueAct{}; }

DialogueAct DialogueAct::ack() {
    DialogueAct act;
    act.type = ActType::AckInform;
    return act;
}

DialogueAct DialogueAct::ask(int slot) {
    DialogueAct act;
    act.type = ActType::AskSlot;
    act.slot = slot;
    return act;
}

DialogueAct DialogueAct::suggest(ChoiceAssignment proposal, bool roster) {
    DialogueAct act;
    act.type = ActType::Suggest;
    act.proposal = std::move(proposal);
    act.roster = roster;
    return act;
}

DialogueAct DialogueAct::request_payment() {
    DialogueAct act;
    act.type = ActType::RequestPayment;
    return act;
}

bool DialogueAct::same_content(const DialogueAct& other) const {
    return type == other.type && slot == other.slot && proposal == other.proposal;
}

const std::vector<std::string>& Templates::pattern(const std::string& name) const {
    auto it = patterns.find(name);
    if (it == patterns.end()) throw DataError("missing template: " + name);
    return it->second;
}

Templates default_templates(const std::vector<ChoiceSetDef>& sets) {
    Templates t;
    auto set_pattern = [&t](const std::string& name, const std::string& text) {
        t.patterns[name] = split_pattern(text);
    };
    set_pattern("greet", "hello how can i help you");
    set_pattern("ack", "okay noted");
    set_pattern("payment", "shall we proceed with the payment");
    set_pattern("user_open", "i want a cup of coffee");
    set_pattern("user_inform", "i want {values}");
    set_pattern("user_confirm", "yes {values}");
    set_pattern("user_decline", "no i want {values}");
    set_pattern("user_payment", "payment completed");
    set_pattern("user_complaint_known", "you already know that");
    set_pattern("user_complaint_not_done", "we are not done yet");
    set_pattern("user_complaint_repeat", "please repeat that");

    const std::map<std::string, std::string> asks = {
        {"coffee_type", "which coffee would you like"},
        {"temperature", "would you like it warm or cold"},
        {"size", "what size would you like"},
        {"address", "where should we deliver it"},
    };
    for (const ChoiceSetDef& s : sets) {
        auto it = asks.find(s.name);
        set_pattern("ask_" + s.name,
                    it != asks.end() ? it->second : "please tell me the " + s.name);
    }

    // Value order in Suggest surfaces: size temperature coffee_type first
    // ("tall hot americano"), anything else in set order.
    std::vector<std::string> order;
    for (const std::string& name : {"size", "temperature", "coffee_type"}) {
        for (const ChoiceSetDef& s : sets) {
            if (s.name == name) order.push_back(name);
        }
    }
    for (const ChoiceSetDef& s : sets) {
        if (std::find(order.begin(), order.end(), s.name) == order.end()) {
            order.push_back(s.name);
        }
    }
    std::vector<std::string> suggest = tokenize("how about");
    std::vector<std::string> suggest_full = tokenize("same as before");
    for (const std::string& name : order) {
        suggest.push_back("{" + name + "}");
        suggest_full.push_back("{" + name + "}");
    }
    t.patterns["suggest"] = suggest;
    t.patterns["suggest_full"] = suggest_full;
    return t;
}

void save_templates(const std::filesystem::path& path, const Templates& templates) {
    ordered_json j = ordered_json::object();
    for (const auto& [name, pattern] : templates.patterns) j[name] = join_tokens(pattern);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open template file for writing: " + path.string());
    out << j.dump(2) << '\n';
}

Templates load_templates(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open template file: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::parse_error& e) {
        throw DataError("template file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DataError("template file root is not an object");
    Templates t;
    for (const auto& [name, pattern] : j.items()) {
        if (!pattern.is_string()) throw DataError("template " + name + " is not a string");
        t.patterns[name] = split_pattern(pattern.get<std::string>());
    }
    return t;
}

Domain make_domain(std::vector<ChoiceSetDef> sets, Templates templates) {
    Domain domain;
    domain.choices = ChoiceIndex(sets);
    domain.sets = std::move(sets);
    domain.templates = std::move(templates);

    std::set<std::string> set_names;
    for (const ChoiceSetDef& s : domain.sets) set_names.insert(s.name);

    for (const auto& [name, pattern] : domain.templates.patterns) {
        for (const std::string& tok : pattern) {
            if (is_placeholder(tok)) {
                const std::string inner = placeholder_name(tok);
                if (inner != "value" && inner != "values" && set_names.count(inner) == 0) {
                    throw DataError("template " + name + " has unknown placeholder " + tok);
                }
                continue;
            }
            if (domain.choices.lookup(tok).has_value()) {
                throw DataError("template word '" + tok + "' collides with a choice value");
            }
            domain.vocab.add(tok);
        }
    }
    for (const ChoiceSetDef& s : domain.sets) {
        for (const std::string& v : s.values) domain.vocab.add(v);
    }
    return domain;
}

Domain coffee_domain() {
    std::vector<ChoiceSetDef> sets = {
        {"coffee_type", {"latte", "cappuccino", "americano", "mocha", "macchiato", "espresso"}},
        {"temperature", {"hot", "iced"}},
        {"size", {"tall", "grande", "venti"}},
        {"address", {"office", "home", "campus", "airport", "library", "station"}},
    };
    Templates templates = default_templates(sets);
    return make_domain(std::move(sets), std::move(templates));
}

std::vector<std::string> render_act(const DialogueAct& act, const Domain& domain) {
    const Templates& t = domain.templates;
    switch (act.type) {
        case ActType::Greet:
            return t.pattern("greet");
        case ActType::AckInform:
            return t.pattern("ack");
        case ActType::RequestPayment:
            return t.pattern("payment");
        case ActType::AskSlot: {
            if (act.slot < 0 || act.slot >= domain.choices.num_sets()) {
                throw DataError("ask act has an out-of-range slot");
            }
            return t.pattern("ask_" + domain.sets[static_cast<std::size_t>(act.slot)].name);
        }
        case ActType::Suggest: {
            if (act.proposal.size() != static_cast<std::size_t>(domain.choices.num_sets())) {
                throw DataError("suggest proposal has wrong arity");
            }
            const std::vector<std::string>& pattern =
                t.pattern(act.roster ? "suggest_full" : "suggest");
            std::vector<std::string> out;
            out.reserve(pattern.size());
            for (const std::string& tok : pattern) {
                if (is_placeholder(tok)) {
                    const std::string inner = placeholder_name(tok);
                    auto matches = [&](const ChoiceSetDef& s) { return s.name == inner; };
                    auto it = std::find_if(domain.sets.begin(), domain.sets.end(), matches);
                    if (it == domain.sets.end()) continue;
                    const int j = static_cast<int>(it - domain.sets.begin());
                    const auto& v = act.proposal[static_cast<std::size_t>(j)];
                    if (v.has_value()) out.push_back(domain.choices.value_token(j, *v));
                    continue;
                }
                out.push_back(tok);
            }
            return out;
        }
    }
    throw DataError("unknown dialogue act");
}

std::optional<DialogueAct> parse_act(const std::vector<std::string>& tokens,
                                     const Domain& domain) {
    auto try_match = [&](const DialogueAct& act) -> bool {
        return tokens == render_act(act, domain);
    };
    if (try_match(DialogueAct::greet())) return DialogueAct::greet();
    if (try_match(DialogueAct::ack())) return DialogueAct::ack();
    if (try_match(DialogueAct::request_payment())) return DialogueAct::request_payment();
    for (int j = 0; j < domain.choices.num_sets(); ++j) {
        if (try_match(DialogueAct::ask(j))) return DialogueAct::ask(j);
    }
    ChoiceAssignment proposal;
    try {
        proposal = extract_proposed_choices(tokens, domain.choices);
    } catch (const DataError&) {
        return std::nullopt;
    }
    bool any = std::any_of(proposal.begin(), proposal.end(),
                           [](const auto& v) { return v.has_value(); });
    if (!any) return std::nullopt;
    DialogueAct plain = DialogueAct::suggest(proposal, false);
    if (try_match(plain)) return plain;
    DialogueAct roster = DialogueAct::suggest(std::move(proposal), true);
    if (try_match(roster)) return roster;
    return std::nullopt;
}

OrderIntent sample_intent(const UserProfile& profile, const ChoiceIndex& choices,
                          std::mt19937_64& rng) {
    if (profile.preferences.size() != static_cast<std::size_t>(choices.num_sets())) {
        throw DataError("profile " + profile.user_id + " has wrong preference arity");
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    OrderIntent intent(static_cast<std::size_t>(choices.num_sets()));
    for (int j = 0; j < choices.num_sets(); ++j) {
        const auto& pref = profile.preferences[static_cast<std::size_t>(j)];
        if (pref.has_value() && coin(rng) < profile.rho) {
            intent[static_cast<std::size_t>(j)] = *pref;
        } else {
            std::uniform_int_distribution<int> pick(0, choices.set_size(j) - 1);
            intent[static_cast<std::size_t>(j)] = pick(rng);
        }
    }
    return intent;
}

CoffeeEnv::CoffeeEnv(Domain domain, UserProfile profile, SimConfig config,
                     std::vector<ChoiceAssignment> rosters)
    : domain_(std::move(domain)),
      profile_(std::move(profile)),
      config_(std::move(config)),
      rosters_(std::move(rosters)) {
    const auto n = static_cast<std::size_t>(domain_.choices.num_sets());
    if (profile_.preferences.empty()) profile_.preferences.resize(n);
    if (profile_.preferences.size() != n) {
        throw DataError("profile " + profile_.user_id + " has wrong preference arity");
    }
    for (const ChoiceAssignment& roster : rosters_) {
        if (roster.size() != n) throw DataError("roster has wrong arity");
    }
    if (config_.max_turns <= 0) throw DataError("max_turns must be positive");
}

History CoffeeEnv::reset(std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(domain_.choices.num_sets());
    if (forced_intent_.has_value()) {
        intent_ = *forced_intent_;
        forced_intent_.reset();
        if (intent_.size() != n) throw DataError("forced intent has wrong arity");
        for (std::size_t j = 0; j < n; ++j) {
            if (intent_[j] < 0 || intent_[j] >= domain_.choices.set_size(static_cast<int>(j))) {
                throw DataError("forced intent value out of range");
            }
        }
    } else {
        intent_ = sample_intent(profile_, domain_.choices, rng);
    }
    state_ = EpisodeState{};
    state_.delta.assign(n, 1);
    state_.agreed.assign(n, std::nullopt);
    state_.ask_counts.assign(n, 0);
    history_ = History{};
    history_.user.push_back(utter(domain_.templates.pattern("user_open")));
    turn_rewards_.clear();
    last_reward_ = 0.0;
    started_ = true;
    return history_;
}

void CoffeeEnv::force_intent(OrderIntent intent) { forced_intent_ = std::move(intent); }

std::vector<DialogueAct> candidate_acts_for(const Domain& domain, const std::vector<int>& delta,
                                            const std::vector<ChoiceAssignment>& rosters) {
    const int n = domain.choices.num_sets();
    if (delta.size() != static_cast<std::size_t>(n)) {
        throw DataError("delta length does not match the number of choice sets");
    }
    std::vector<DialogueAct> acts;
    acts.push_back(DialogueAct::greet());
    acts.push_back(DialogueAct::ack());
    for (int j = 0; j < n; ++j) acts.push_back(DialogueAct::ask(j));
    for (int j = 0; j < n; ++j) {
        if (delta[static_cast<std::size_t>(j)] == 0) continue;
        for (int v = 0; v < domain.choices.set_size(j); ++v) {
            ChoiceAssignment proposal(static_cast<std::size_t>(n));
            proposal[static_cast<std::size_t>(j)] = v;
            acts.push_back(DialogueAct::suggest(std::move(proposal), false));
        }
    }
    std::set<std::string> seen;
    for (const ChoiceAssignment& roster : rosters) {
        ChoiceAssignment projected(static_cast<std::size_t>(n));
        bool any = false;
        for (int j = 0; j < n; ++j) {
            if (delta[static_cast<std::size_t>(j)] == 1 &&
                roster[static_cast<std::size_t>(j)].has_value()) {
                projected[static_cast<std::size_t>(j)] = roster[static_cast<std::size_t>(j)];
                any = true;
            }
        }
        if (!any) continue;
        if (!seen.insert(assignment_key(projected)).second) continue;
        acts.push_back(DialogueAct::suggest(std::move(projected), true));
    }
    acts.push_back(DialogueAct::request_payment());
    return acts;
}

std::vector<DialogueAct> CoffeeEnv::candidate_acts() const {
    if (!started_) throw DataError("environment was not reset");
    return candidate_acts_for(domain_, state_.delta, rosters_);
}

std::vector<Utterance> CoffeeEnv::candidates() const {
    const std::vector<DialogueAct> acts = candidate_acts();
    std::vector<Utterance> out;
    out.reserve(acts.size());
    for (const DialogueAct& act : acts) out.push_back(utter(render_act(act, domain_)));
    return out;
}

Utterance CoffeeEnv::utter(const std::vector<std::string>& tokens) const {
    return make_utterance(tokens, domain_.vocab);
}

Utterance CoffeeEnv::react(const DialogueAct& act) {
    const RewardSchedule& rw = config_.rewards;
    const int n = domain_.choices.num_sets();
    double r_g = rw.per_turn;
    double r_p = 0.0;
    std::vector<std::string> tokens;

    switch (act.type) {
        case ActType::Greet:
            tokens = domain_.templates.pattern("user_open");
            break;
        case ActType::AckInform:
            break;  // the user waits
        case ActType::AskSlot: {
            const auto j = static_cast<std::size_t>(act.slot);
            state_.ask_counts[j] += 1;
            if (state_.delta[j] == 0) {
                r_g += rw.illogical;
                tokens = domain_.templates.pattern("user_complaint_known");
                break;
            }
            state_.agreed[j] = intent_[j];
            state_.delta[j] = 0;
            r_g += rw.inform;
            tokens = splice_values(
                domain_.templates.pattern("user_inform"),
                {domain_.choices.value_token(act.slot, intent_[j])});
            break;
        }
        case ActType::Suggest: {
            std::vector<int> open_proposed;
            for (int j = 0; j < n; ++j) {
                if (act.proposal[static_cast<std::size_t>(j)].has_value() &&
                    state_.delta[static_cast<std::size_t>(j)] == 1) {
                    open_proposed.push_back(j);
                }
            }
            if (open_proposed.empty()) {
                r_g += rw.illogical;
                tokens = domain_.templates.pattern("user_complaint_known");
                break;
            }
            std::vector<int> wrong;
            for (int j : open_proposed) {
                if (*act.proposal[static_cast<std::size_t>(j)] !=
                    intent_[static_cast<std::size_t>(j)]) {
                    wrong.push_back(j);
                }
            }
            if (wrong.empty()) {
                std::vector<std::string> values;
                for (int j : open_proposed) {
                    const auto js = static_cast<std::size_t>(j);
                    state_.agreed[js] = intent_[js];
                    state_.delta[js] = 0;
                    values.push_back(domain_.choices.value_token(j, intent_[js]));
                }
                r_p += rw.confirm;
                r_g += rw.inform * static_cast<double>(open_proposed.size());
                tokens = splice_values(domain_.templates.pattern("user_confirm"), values);
            } else {
                std::vector<std::string> values;
                for (int j : wrong) {
                    const auto js = static_cast<std::size_t>(j);
                    state_.agreed[js] = intent_[js];
                    state_.delta[js] = 0;
                    values.push_back(domain_.choices.value_token(j, intent_[js]));
                }
                r_p += rw.decline;
                r_g += rw.inform * static_cast<double>(wrong.size());
                tokens = splice_values(domain_.templates.pattern("user_decline"), values);
            }
            break;
        }
        case ActType::RequestPayment: {
            const bool all_agreed =
                std::all_of(state_.delta.begin(), state_.delta.end(),
                            [](int d) { return d == 0; });
            if (all_agreed) {
                state_.paid = true;
                r_g += rw.payment;
                tokens = domain_.templates.pattern("user_payment");
            } else {
                r_g += rw.illogical;
                tokens = domain_.templates.pattern("user_complaint_not_done");
            }
            break;
        }
    }

    state_.r_general += r_g;
    state_.r_personal += r_p;
    state_.r_total += r_g + r_p;
    last_reward_ = r_g + r_p;
    turn_rewards_.push_back(last_reward_);
    return utter(tokens);
}

void CoffeeEnv::step(const Utterance& action, std::mt19937_64& rng) {
    (void)rng;  // the simulated user reacts deterministically given the intent
    if (done()) throw DataError("step on a finished episode");
    state_.turn += 1;
    const std::optional<DialogueAct> act = parse_act(action.tokens, domain_);
    Utterance reaction;
    if (act.has_value()) {
        reaction = react(*act);
    } else {
        const RewardSchedule& rw = config_.rewards;
        state_.r_general += rw.per_turn + rw.illogical;
        state_.r_total += rw.per_turn + rw.illogical;
        last_reward_ = rw.per_turn + rw.illogical;
        turn_rewards_.push_back(last_reward_);
        reaction = utter(domain_.templates.pattern("user_complaint_repeat"));
    }
    history_.agent.push_back(action);
    history_.user.push_back(reaction);
}

double CoffeeEnv::last_reward() const { return last_reward_; }

bool CoffeeEnv::done() const {
    if (!started_) return true;
    return state_.paid || state_.turn >= config_.max_turns;
}

EpisodeLog run_episode(CoffeeEnv& env, const PolicyFn& policy, std::mt19937_64& rng,
                       const OrderIntent* forced_intent) {
    if (forced_intent != nullptr) env.force_intent(*forced_intent);
    env.reset(rng);
    while (!env.done()) {
        const std::vector<Utterance> cands = env.candidates();
        const int idx = policy(env, cands);
        if (idx < 0 || idx >= static_cast<int>(cands.size())) {
            throw DataError("policy selected an out-of-range candidate");
        }
        env.step(cands[static_cast<std::size_t>(idx)], rng);
    }
    EpisodeLog log;
    log.dialogue.user_id = env.profile().user_id;
    const History& h = env.history();
    const std::vector<double>& rewards = env.turn_rewards();
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        Turn turn;
        turn.user = h.user[i];
        turn.agent = h.agent[i];
        turn.reward = rewards[i];
        log.dialogue.turns.push_back(std::move(turn));
    }
    log.total_reward = env.state().r_total;
    log.length = static_cast<int>(rewards.size());
    bool matches = env.state().paid;
    for (std::size_t j = 0; j < env.intent().size() && matches; ++j) {
        matches = env.state().agreed[j].has_value() && *env.state().agreed[j] == env.intent()[j];
    }
    log.success = matches;
    return log;
}

PolicyFn greedy_policy(const PolicyParams& params, const std::string& user_id) {
    return [params, user_id](const CoffeeEnv& env, const std::vector<Utterance>& cands) {
        const std::vector<double> scores =
            score_candidates(env.history(), cands, params, user_id, env.domain().choices);
        return argmax_first(scores);
    };
}

namespace {

int find_act(const std::vector<DialogueAct>& acts, const DialogueAct& wanted) {
    for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i].same_content(wanted)) return static_cast<int>(i);
    }
    throw DataError("scripted act is not among the candidates");
}

}  // namespace

PolicyFn ask_all_script() {
    return [](const CoffeeEnv& env, const std::vector<Utterance>&) {
        const std::vector<DialogueAct> acts = env.candidate_acts();
        const std::vector<int>& delta = env.state().delta;
        for (std::size_t j = 0; j < delta.size(); ++j) {
            if (delta[j] == 1) return find_act(acts, DialogueAct::ask(static_cast<int>(j)));
        }
        return find_act(acts, DialogueAct::request_payment());
    };
}

PolicyFn roster_script(ChoiceAssignment roster) {
    return [roster](const CoffeeEnv& env, const std::vector<Utterance>&) {
        const std::vector<DialogueAct> acts = env.candidate_acts();
        const std::vector<int>& delta = env.state().delta;
        ChoiceAssignment projected(delta.size());
        bool any_open_roster = false;
        bool any_open = false;
        for (std::size_t j = 0; j < delta.size(); ++j) {
            if (delta[j] == 0) continue;
            any_open = true;
            if (roster[j].has_value()) {
                projected[j] = roster[j];
                any_open_roster = true;
            }
        }
        if (!any_open) return find_act(acts, DialogueAct::request_payment());
        if (any_open_roster) {
            return find_act(acts, DialogueAct::suggest(std::move(projected), true));
        }
        for (std::size_t j = 0; j < delta.size(); ++j) {
            if (delta[j] == 1) return find_act(acts, DialogueAct::ask(static_cast<int>(j)));
        }
        throw DataError("roster script found no open slot");
    };
}

std::vector<ChoiceAssignment> known_rosters(const std::vector<UserProfile>& profiles) {
    std::vector<ChoiceAssignment> out;
    std::set<std::string> seen;
    for (const UserProfile& p : profiles) {
        if (!assignment_complete(p.preferences)) continue;
        if (seen.insert(assignment_key(p.preferences)).second) out.push_back(p.preferences);
    }
    return out;
}

Corpus generate_offline_corpus(const Domain& domain, const std::vector<UserProfile>& profiles,
                               const std::vector<ChoiceAssignment>& rosters,
                               const SimConfig& config, const ScriptMix& mix, int n_dialogues,
                               std::uint64_t seed) {
    if (n_dialogues < 1) throw DataError("need at least one dialogue to generate");
    if (profiles.empty()) throw DataError("no profiles to generate dialogues for");
    Corpus corpus;
    corpus.vocabulary = domain.vocab;
    corpus.choice_sets = domain.sets;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n_dialogues; ++i) {
        const UserProfile& profile = profiles[static_cast<std::size_t>(i) % profiles.size()];
        const bool own_complete = assignment_complete(profile.preferences);

        PolicyFn script;
        if (rosters.empty() || coin(rng) < mix.ask_all_weight) {
            script = ask_all_script();
        } else {
            const bool wrong = coin(rng) < mix.wrong_roster_prob;
            ChoiceAssignment roster;
            if (!wrong && own_complete) {
                roster = profile.preferences;
            } else {
                std::vector<ChoiceAssignment> others;
                for (const ChoiceAssignment& r : rosters) {
                    if (!own_complete || r != profile.preferences) others.push_back(r);
                }
                if (others.empty()) others = rosters;
                std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
                roster = others[pick(rng)];
            }
            script = roster_script(std::move(roster));
        }

        CoffeeEnv env(domain, profile, config, rosters);
        EpisodeLog log = run_episode(env, script, rng);
        corpus.dialogues.push_back(std::move(log.dialogue));
    }
    return corpus;
}

std::vector<UserProfile> generate_profiles(const Domain& domain, int n_preferenced,
                                           bool include_no_preference, double rho,
                                           const std::string& id_prefix, std::uint64_t seed,
                                           const std::vector<ChoiceAssignment>& avoid) {
    const int n = domain.choices.num_sets();
    std::mt19937_64 rng(seed);
    std::set<std::string> used;
    for (const ChoiceAssignment& a : avoid) used.insert(assignment_key(a));

    auto user_id = [&id_prefix](int index) {
        std::ostringstream out;
        out << id_prefix << (index < 10 ? "0" : "") << index;
        return out.str();
    };

    std::vector<UserProfile> profiles;
    for (int u = 0; u < n_preferenced; ++u) {
        ChoiceAssignment tuple(static_cast<std::size_t>(n));
        bool ok = false;
        for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
            for (int j = 0; j < n; ++j) {
                std::uniform_int_distribution<int> pick(0, domain.choices.set_size(j) - 1);
                tuple[static_cast<std::size_t>(j)] = pick(rng);
            }
            ok = used.insert(assignment_key(tuple)).second;
        }
        if (!ok) throw DataError("could not sample a distinct preference tuple");
        UserProfile p;
        p.user_id = user_id(u);
        p.preferences = tuple;
        p.rho = rho;
        profiles.push_back(std::move(p));
    }
    if (include_no_preference) {
        UserProfile p;
        p.user_id = user_id(n_preferenced);
        p.preferences.assign(static_cast<std::size_t>(n), std::nullopt);
        p.rho = rho;
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void save_profiles(const std::filesystem::path& path, const std::vector<UserProfile>& profiles,
                   const ChoiceIndex& choices) {
    ordered_json arr = ordered_json::array();
    for (const UserProfile& p : profiles) {
        ordered_json item;
        item["user_id"] = p.user_id;
        if (std::any_of(p.preferences.begin(), p.preferences.end(),
                        [](const auto& v) { return v.has_value(); })) {
            ordered_json prefs = ordered_json::object();
            for (int j = 0; j < choices.num_sets(); ++j) {
                const auto& v = p.preferences[static_cast<std::size_t>(j)];
                if (v.has_value()) prefs[choices.set(j).name] = choices.value_token(j, *v);
            }
            item["preferences"] = std::move(prefs);
        } else {
            item["preferences"] = nullptr;
        }
        item["rho"] = p.rho;
        arr.push_back(std::move(item));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open profile file for writing: " + path.string());
    out << arr.dump(2) << '\n';
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path,
                                       const ChoiceIndex& choices) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open profile file: " + path.string());
    ordered_json arr;
    try {
        in >> arr;
    } catch (const ordered_json::parse_error& e) {
        throw DataError("profile file is not valid JSON: " + std::string(e.what()));
    }
    if (!arr.is_array()) throw DataError("profile file root is not an array");
    std::vector<UserProfile> profiles;
    for (const ordered_json& item : arr) {
        UserProfile p;
        p.user_id = item.at("user_id").get<std::string>();
        p.rho = item.value("rho", 0.8);
        if (p.rho < 0.0 || p.rho > 1.0) {
            throw DataError("profile " + p.user_id + " has rho outside [0, 1]");
        }
        p.preferences.assign(static_cast<std::size_t>(choices.num_sets()), std::nullopt);
        const ordered_json& prefs = item.at("preferences");
        if (!prefs.is_null()) {
            if (!prefs.is_object()) {
                throw DataError("profile " + p.user_id + " preferences must be object or null");
            }
            for (const auto& [name, value] : prefs.items()) {
                const int j = choices.set_index(name);
                const auto found = choices.lookup(value.get<std::string>());
                if (!found.has_value() || found->first != j) {
                    throw DataError("profile " + p.user_id + " has invalid value for " + name);
                }
                p.preferences[static_cast<std::size_t>(j)] = found->second;
            }
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

}  // namespace petal
