#pragma once

#include "petal/simulator.hpp"

namespace petal {

std::uint64_t splitmix64(std::uint64_t x);

// Stable rng seed for one evaluation unit, so results do not depend on the
// order users/dialogues are visited in.
std::uint64_t hash_stream(std::uint64_t seed, const std::string& user, std::uint64_t a,
                          std::uint64_t b);

// Rank of the ground-truth reply among 10 distractors under q_total:
// (#strictly lower + 0.5 * #tied) / 10.
double auc_turn(const PolicyParams& params, const std::string& user_id, const History& history,
                const Utterance& truth, const std::vector<Utterance>& distractors,
                const ChoiceIndex& choices);

struct AucResult {
    std::vector<std::uint64_t> seeds;
    std::map<std::string, std::vector<double>> per_user;  // user -> mean AUC per seed
    std::vector<double> per_seed;                         // overall mean per seed
    double mean = 0.0;
    double stddev = 0.0;
};

// Per turn: 10 distractors drawn without replacement from all agent replies
// in the corpus minus the ground-truth instance (duplicate surfaces tie).
// Per dialogue: mean over turns; per user: mean over dialogues; per seed:
// mean over users; mean/stddev across seeds.
AucResult auc_evaluate(const PolicyParams& params, const Corpus& test,
                       const std::vector<std::uint64_t>& seeds, const ChoiceIndex& choices);

// Same protocol, but each dialogue is scored with its own user's policy
// (distractors still pool over the whole corpus). Every corpus user needs an
// entry.
AucResult auc_evaluate_per_user(const std::map<std::string, PolicyParams>& params_per_user,
                                const Corpus& test, const std::vector<std::uint64_t>& seeds,
                                const ChoiceIndex& choices);

struct OnlineMetrics {
    double mean_reward = 0.0;
    double success_rate = 0.0;
    double mean_length = 0.0;
};

struct OnlineResult {
    std::vector<std::uint64_t> seeds;
    std::vector<OnlineMetrics> per_seed;
    OnlineMetrics mean;
    OnlineMetrics stddev;
};

// Greedy episodes (no exploration) per target user per seed; metrics pooled
// over every user's episodes within a seed, then mean/std across seeds.
OnlineResult online_evaluate(const std::map<std::string, PolicyParams>& policy_per_user,
                             const Domain& domain, const std::vector<UserProfile>& profiles,
                             const std::vector<ChoiceAssignment>& rosters,
                             const SimConfig& sim_config, int episodes_per_user,
                             const std::vector<std::uint64_t>& seeds);

struct ReportEntry {
    std::string baseline;
    std::optional<AucResult> auc;
    std::optional<OnlineResult> online;
};

// auc.csv: baseline,seed,user,mean_auc. online.csv: baseline,seed,metric,value.
void emit_report(const std::vector<ReportEntry>& entries, const std::filesystem::path& dir);

}  // namespace petal
