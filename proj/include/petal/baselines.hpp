#pragma once

#include "petal/transfer.hpp"

namespace petal {

enum class BaselineKind { NoneTL, All, Sim, Bandit, PriorSim, PriorAll, PETAL };

std::string to_string(BaselineKind kind);
// Exact kind names only ("All" is a baseline; the CLI's lowercase "all"
// token meaning "run every baseline" is handled by the driver, not here).
BaselineKind baseline_from_string(const std::string& name);

Corpus user_subset(const Corpus& corpus, const std::string& user_id);
std::vector<std::string> corpus_users(const Corpus& corpus);  // sorted unique
Corpus merge_corpora(const Corpus& a, const Corpus& b);       // dialogues of a then b

// Concatenated per-set value histograms (each set normalized to sum 1) of the
// orders a user settled in their dialogues.
Eigen::VectorXd choice_histogram(const Corpus& corpus, const std::string& user_id,
                                 const ChoiceIndex& choices);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct SimilarityReport {
    std::string selected_user;
    std::map<std::string, double> scores;  // per source user
};

// Source user most similar to the target corpus's (single) user; ties break
// toward the lowest user_id.
SimilarityReport most_similar_source_user(const Corpus& source, const Corpus& target_user,
                                          const ChoiceIndex& choices);

// UCB1 over a fixed set of arms: each arm once, then highest upper bound,
// ties toward the lowest arm index.
class Ucb1 {
  public:
    explicit Ucb1(int arms);
    int select() const;
    void update(int arm, double reward);
    long long total_pulls() const { return total_; }
    const std::vector<long long>& counts() const { return counts_; }
    double mean(int arm) const;

  private:
    std::vector<long long> counts_;
    std::vector<double> sums_;
    long long total_ = 0;
};

struct BanditReport {
    std::vector<std::string> arm_users;
    std::vector<long long> pull_counts;
    std::string selected_user;
};

// Fresh policy trained on target data only.
PolicyParams train_none_tl(const Corpus& target, const PolicyParams& init,
                           const TrainConfig& config, const ChoiceIndex& choices);

// Pooled source training with one shared preference vector; factored out so
// the PriorAll prior is this exact policy.
PolicyParams pooled_source_policy(const Corpus& source, const PolicyParams& init,
                                  const TrainConfig& config, const ChoiceIndex& choices);

// Pooled source training, then target training, single shared preference.
PolicyParams train_all(const Corpus& source, const Corpus& target, const PolicyParams& init,
                       const TrainConfig& config, const ChoiceIndex& choices);

// Trains on the most similar source user's data pooled with the target
// user's data.
PolicyParams train_sim(const Corpus& source, const Corpus& target_user,
                       const PolicyParams& init, const TrainConfig& config,
                       const ChoiceIndex& choices, SimilarityReport* report = nullptr);

// UCB1 over per-source-user policies; each pull scores one arm on a random
// target dialogue by negative mean squared TD error; the winner is adapted
// on the target user's data.
PolicyParams train_bandit(const Corpus& source, const Corpus& target_user,
                          const PolicyParams& init, const TrainConfig& config,
                          const ChoiceIndex& choices, int budget, std::uint64_t seed,
                          BanditReport* report = nullptr);

// Source-trained prior (PriorAll: pooled source; PriorSim: the most similar
// user's data) used as initialization with an L2 pull of strength lambda
// toward it after every target update.
PolicyParams train_prior(const Corpus& source, const Corpus& target, const PolicyParams& init,
                         const TrainConfig& config, const ChoiceIndex& choices,
                         BaselineKind mode, double lambda,
                         SimilarityReport* sim_report = nullptr);

// The transfer pipeline: per-user source training, shared-parameter copy,
// target adaptation with per-user preferences.
PolicyParams train_petal(const Corpus& source, const Corpus& target, const PolicyParams& init,
                         const TrainConfig& config, const ChoiceIndex& choices);

}  // namespace petal
