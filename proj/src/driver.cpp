#include "petal/driver.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "petal/checkpoint.hpp"

namespace petal {

namespace {

namespace fs = std::filesystem;

std::vector<ChoiceAssignment> all_known_rosters(const std::vector<UserProfile>& source,
                                                const std::vector<UserProfile>& target) {
    std::vector<UserProfile> both = source;
    both.insert(both.end(), target.begin(), target.end());
    return known_rosters(both);
}

Corpus load_corpus_at(const fs::path& path) {
    if (!fs::exists(path)) {
        throw DataError("missing input file: " + path.string() + " (run gen-data first?)");
    }
    return load_corpus(path.string());
}

Checkpoint load_checkpoint_for(const ExperimentConfig& config, const fs::path& path) {
    if (!fs::exists(path)) {
        throw DataError("missing checkpoint: " + path.string() +
                        " (run train-source / transfer first?)");
    }
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.config_hash != config_hash(config)) {
        throw DataError("checkpoint " + path.string() +
                        " was produced under a different config");
    }
    return ckpt;
}

std::map<std::string, PolicyParams> load_target_checkpoints(const ExperimentConfig& config,
                                                            BaselineKind kind,
                                                            const std::vector<std::string>& users) {
    std::map<std::string, PolicyParams> params;
    for (const std::string& user : users) {
        params.emplace(user,
                       load_checkpoint_for(config, target_checkpoint_path(config, kind, user))
                           .params);
    }
    return params;
}

}  // namespace

fs::path source_profile_path(const ExperimentConfig& config) {
    return fs::path(config.paths.profile_dir) / "source_profiles.json";
}

fs::path target_profile_path(const ExperimentConfig& config) {
    return fs::path(config.paths.profile_dir) / "target_profiles.json";
}

fs::path source_corpus_path(const ExperimentConfig& config) {
    return fs::path(config.paths.corpus_dir) / "source.jsonl";
}

fs::path target_train_path(const ExperimentConfig& config) {
    return fs::path(config.paths.corpus_dir) / "target_train.jsonl";
}

fs::path target_test_path(const ExperimentConfig& config) {
    return fs::path(config.paths.corpus_dir) / "target_test.jsonl";
}

fs::path source_checkpoint_path(const ExperimentConfig& config, BaselineKind kind) {
    return fs::path(config.paths.checkpoint_dir) / (to_string(kind) + "_source.json");
}

fs::path target_checkpoint_path(const ExperimentConfig& config, BaselineKind kind,
                                const std::string& user_id) {
    return fs::path(config.paths.checkpoint_dir) / (to_string(kind) + "_" + user_id + ".json");
}

Domain load_domain(const ExperimentConfig& config) {
    const Domain defaults = coffee_domain();
    const fs::path template_path(config.paths.template_file);
    if (fs::exists(template_path)) {
        return make_domain(defaults.choices.sets(), load_templates(template_path));
    }
    return defaults;
}

PolicyParams fresh_init(const ExperimentConfig& config, const Vocabulary& vocab,
                        bool shared_preferences) {
    int v = vocab.size();
    if (config.model.v > 0) {
        if (config.model.v < v) {
            throw DataError("model.v = " + std::to_string(config.model.v) +
                            " is smaller than the vocabulary (" + std::to_string(v) + ")");
        }
        v = config.model.v;
    }
    const Domain defaults = coffee_domain();
    PolicyParams params = PolicyParams::init(v, config.model.d, defaults.choices.set_sizes(),
                                             config.model.init_std, config.train.seed,
                                             config.train.xi);
    params.shared_preferences = shared_preferences;
    return params;
}

std::vector<BaselineKind> baselines_for(const std::string& token) {
    if (token == "all") {
        return {BaselineKind::NoneTL,   BaselineKind::All,      BaselineKind::Sim,
                BaselineKind::Bandit,   BaselineKind::PriorSim, BaselineKind::PriorAll,
                BaselineKind::PETAL};
    }
    return {baseline_from_string(token)};
}

void cmd_gen_data(const ExperimentConfig& config) {
    const fs::path template_path(config.paths.template_file);
    Domain domain;
    if (fs::exists(template_path)) {
        domain = load_domain(config);
    } else {
        domain = coffee_domain();
        if (template_path.has_parent_path()) fs::create_directories(template_path.parent_path());
        save_templates(template_path, domain.templates);
    }

    if (config.layout.n_source_users < 2) {
        throw DataError("layout.n_source_users must be at least 2");
    }

    const std::uint64_t seed = config.train.seed;
    const std::vector<UserProfile> source_profiles =
        generate_profiles(domain, config.layout.n_source_users - 1, true, config.sim.rho, "src_",
                          hash_stream(seed, "profiles", 0, 0));
    std::vector<ChoiceAssignment> avoid = known_rosters(source_profiles);
    const std::vector<UserProfile> target_profiles =
        generate_profiles(domain, config.layout.n_target_users, false, config.sim.rho, "tgt_",
                          hash_stream(seed, "profiles", 1, 0), avoid);

    fs::create_directories(config.paths.profile_dir);
    save_profiles(source_profile_path(config), source_profiles, domain.choices);
    save_profiles(target_profile_path(config), target_profiles, domain.choices);

    const SimConfig sim = sim_config_of(config);
    const ScriptMix train_mix = script_mix_of(config);
    ScriptMix test_mix = train_mix;
    test_mix.wrong_roster_prob = config.sim.test_wrong_roster_prob;

    const std::vector<ChoiceAssignment> source_rosters = known_rosters(source_profiles);
    const std::vector<ChoiceAssignment> rosters = all_known_rosters(source_profiles,
                                                                    target_profiles);

    fs::create_directories(config.paths.corpus_dir);
    const Corpus source = generate_offline_corpus(domain, source_profiles, source_rosters, sim,
                                                  train_mix, config.layout.source_dialogues,
                                                  hash_stream(seed, "corpus", 0, 0));
    save_corpus(source, source_corpus_path(config).string());

    const int n_train = config.layout.n_target_users * config.layout.target_train_dialogues;
    const Corpus train = generate_offline_corpus(domain, target_profiles, rosters, sim, train_mix,
                                                 n_train, hash_stream(seed, "corpus", 1, 0));
    save_corpus(train, target_train_path(config).string());

    const int n_test = config.layout.n_target_users * config.layout.target_test_dialogues;
    const Corpus test = generate_offline_corpus(domain, target_profiles, rosters, sim, test_mix,
                                                n_test, hash_stream(seed, "corpus", 2, 0));
    save_corpus(test, target_test_path(config).string());
}

void cmd_train_source(const ExperimentConfig& config, BaselineKind kind) {
    const Corpus source = load_corpus_at(source_corpus_path(config));
    const ChoiceIndex choices(source.choice_sets);

    PolicyParams params;
    switch (kind) {
        case BaselineKind::PETAL: {
            const PolicyParams init = fresh_init(config, source.vocabulary, false);
            params = train_source_model(source, init, config.train, choices).params;
            break;
        }
        case BaselineKind::All:
        case BaselineKind::PriorAll: {
            const PolicyParams init = fresh_init(config, source.vocabulary, true);
            params = pooled_source_policy(source, init, config.train, choices);
            break;
        }
        default:
            // Source work for these kinds depends on the target user and runs
            // during transfer; the checkpoint records the initialization.
            params = fresh_init(config, source.vocabulary, true);
            break;
    }

    fs::create_directories(config.paths.checkpoint_dir);
    save_checkpoint(source_checkpoint_path(config, kind), params, config_hash(config));
}

void cmd_transfer(const ExperimentConfig& config, BaselineKind kind) {
    const Corpus train = load_corpus_at(target_train_path(config));
    const ChoiceIndex choices(train.choice_sets);
    fs::create_directories(config.paths.checkpoint_dir);

    // The heavyweight kinds continue from the source checkpoint; the rest
    // restart from the corpus-dependent source data.
    const bool needs_source_corpus =
        kind == BaselineKind::Sim || kind == BaselineKind::Bandit ||
        kind == BaselineKind::PriorSim || kind == BaselineKind::PriorAll;
    Corpus source;
    if (needs_source_corpus) source = load_corpus_at(source_corpus_path(config));

    for (const std::string& user : corpus_users(train)) {
        const Corpus user_train = user_subset(train, user);
        PolicyParams params;
        switch (kind) {
            case BaselineKind::PETAL: {
                SourceModel model;
                model.params =
                    load_checkpoint_for(config, source_checkpoint_path(config, kind)).params;
                params = transfer_to_target(user_train, model, config.train, choices);
                break;
            }
            case BaselineKind::All: {
                params =
                    load_checkpoint_for(config, source_checkpoint_path(config, kind)).params;
                train_offline(user_train, params, config.train, choices);
                break;
            }
            case BaselineKind::NoneTL: {
                params = train_none_tl(user_train, fresh_init(config, train.vocabulary, true),
                                       config.train, choices);
                break;
            }
            case BaselineKind::Sim: {
                params = train_sim(source, user_train,
                                   fresh_init(config, train.vocabulary, true), config.train,
                                   choices);
                break;
            }
            case BaselineKind::Bandit: {
                params = train_bandit(source, user_train,
                                      fresh_init(config, train.vocabulary, true), config.train,
                                      choices, config.baseline.bandit_budget,
                                      hash_stream(config.train.seed, user, 0, 0));
                break;
            }
            case BaselineKind::PriorSim:
            case BaselineKind::PriorAll: {
                params = train_prior(source, user_train,
                                     fresh_init(config, train.vocabulary, true), config.train,
                                     choices, kind, config.baseline.prior_lambda);
                break;
            }
        }
        save_checkpoint(target_checkpoint_path(config, kind, user), params,
                        config_hash(config));
    }
}

std::vector<ReportEntry> cmd_eval_offline(const ExperimentConfig& config,
                                          const std::vector<BaselineKind>& kinds) {
    const Corpus test = load_corpus_at(target_test_path(config));
    const ChoiceIndex choices(test.choice_sets);
    const std::vector<std::string> users = corpus_users(test);

    std::vector<ReportEntry> entries;
    for (BaselineKind kind : kinds) {
        ReportEntry entry;
        entry.baseline = to_string(kind);
        entry.auc = auc_evaluate_per_user(load_target_checkpoints(config, kind, users), test,
                                          config.layout.seeds, choices);
        entries.push_back(std::move(entry));
    }
    emit_report(entries, config.paths.report_dir);
    return entries;
}

std::vector<ReportEntry> cmd_eval_online(const ExperimentConfig& config,
                                         const std::vector<BaselineKind>& kinds) {
    const Domain domain = load_domain(config);
    const std::vector<UserProfile> source_profiles =
        load_profiles(source_profile_path(config), domain.choices);
    const std::vector<UserProfile> target_profiles =
        load_profiles(target_profile_path(config), domain.choices);
    const std::vector<ChoiceAssignment> rosters =
        all_known_rosters(source_profiles, target_profiles);
    const SimConfig sim = sim_config_of(config);

    std::vector<std::string> users;
    for (const UserProfile& p : target_profiles) users.push_back(p.user_id);
    std::sort(users.begin(), users.end());

    std::vector<ReportEntry> entries;
    for (BaselineKind kind : kinds) {
        ReportEntry entry;
        entry.baseline = to_string(kind);
        entry.online = online_evaluate(load_target_checkpoints(config, kind, users), domain,
                                       target_profiles, rosters, sim,
                                       config.eval.episodes_per_user, config.layout.seeds);
        entries.push_back(std::move(entry));
    }
    emit_report(entries, config.paths.report_dir);
    return entries;
}

int cmd_chat(const ExperimentConfig& config, const fs::path& checkpoint_path,
             const std::string& user_id, std::istream& in, std::ostream& out) {
    if (!fs::exists(checkpoint_path)) {
        throw DataError("missing checkpoint: " + checkpoint_path.string());
    }
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const Domain domain = load_domain(config);
    if (ckpt.params.v < domain.vocab.size()) {
        throw DataError("checkpoint vocabulary is smaller than the domain vocabulary");
    }

    std::vector<ChoiceAssignment> rosters;
    {
        std::vector<UserProfile> known;
        for (const fs::path& path :
             {source_profile_path(config), target_profile_path(config)}) {
            if (!fs::exists(path)) continue;
            const std::vector<UserProfile> profiles = load_profiles(path, domain.choices);
            known.insert(known.end(), profiles.begin(), profiles.end());
        }
        rosters = known_rosters(known);
    }

    History history;
    std::string line;
    while (std::getline(in, line)) {
        if (line == "/quit") break;
        if (line == "/reset") {
            history = History{};
            out << "(reset)\n";
            continue;
        }

        // Words outside the domain vocabulary are dropped; choice detection
        // and the belief only ever see known tokens.
        std::vector<std::string> known_tokens;
        for (const std::string& token : tokenize(line)) {
            if (domain.vocab.contains(token)) known_tokens.push_back(token);
        }
        history.user.push_back(make_utterance(known_tokens, domain.vocab));

        const std::vector<int> delta =
            delta_indicators(detect_choices(history, domain.choices));
        const std::vector<DialogueAct> acts = candidate_acts_for(domain, delta, rosters);
        std::vector<Utterance> candidates;
        candidates.reserve(acts.size());
        for (const DialogueAct& act : acts) {
            candidates.push_back(make_utterance(render_act(act, domain), domain.vocab));
        }

        const std::vector<double> scores =
            score_candidates(history, candidates, ckpt.params, user_id, domain.choices);
        const Utterance& reply = candidates[static_cast<std::size_t>(argmax_first(scores))];
        history.agent.push_back(reply);
        out << "agent> " << join_tokens(reply.tokens) << "\n";
    }
    return 0;
}

}  // namespace petal
