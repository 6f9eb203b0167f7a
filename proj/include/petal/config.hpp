#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "petal/learner.hpp"
#include "petal/simulator.hpp"

namespace petal {

// Everything a pipeline run needs, loadable from a flat `key = value` text
// file with dotted keys (`train.alpha = 0.0001`). Unknown keys are errors so
// typos fail loudly.
struct ExperimentConfig {
    TrainConfig train;  // applies to every training phase, source and target

    struct Paths {
        std::string corpus_dir = "data/corpora";
        std::string profile_dir = "data/profiles";
        std::string template_file = "data/templates.json";
        std::string checkpoint_dir = "checkpoints";
        std::string report_dir = "reports";
    } paths;

    struct Layout {
        int n_source_users = 11;  // 10 preferenced + 1 without preferences
        int n_target_users = 5;
        int source_dialogues = 5000;        // total across source users
        int target_train_dialogues = 20;    // per target user
        int target_test_dialogues = 300;    // per target user
        std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    } layout;

    struct Baseline {
        std::string kind = "PETAL";
        double prior_lambda = 0.01;
        int bandit_budget = 16;
    } baseline;

    struct Sim {
        double rho = 0.8;
        int max_turns = 20;
        double ask_all_weight = 0.5;
        double wrong_roster_prob = 0.5;       // train-corpus roster scripts
        double test_wrong_roster_prob = 0.0;  // test corpora log clean behavior
    } sim;

    struct Model {
        int d = 50;
        int v = 0;  // 0: use the domain vocabulary size; else pad up to v
        double init_std = 0.1;
    } model;

    RewardSchedule rewards;

    struct Eval {
        int episodes_per_user = 60;  // online episodes per target user per seed
    } eval;
};

// Parse from config-file text. Defaults apply for absent keys; unknown keys,
// malformed lines, and unparsable values throw DataError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

// Canonical text form: every key, fixed order, doubles at round-trip
// precision. parse(serialize(c)) reproduces c bit-exactly.
std::string serialize_config(const ExperimentConfig& config);

void save_config(const ExperimentConfig& config, const std::string& path);

// Hash of the canonical serialization; stamped into checkpoints.
std::string config_hash(const ExperimentConfig& config);

// Shared knob plumbing.
SimConfig sim_config_of(const ExperimentConfig& config);
ScriptMix script_mix_of(const ExperimentConfig& config);

}  // namespace petal
