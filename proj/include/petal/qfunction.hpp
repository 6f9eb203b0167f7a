#pragma once

#include <map>
#include <random>
#include <span>

#include "petal/belief.hpp"
#include "petal/corpus.hpp"

namespace petal {

// Unconstrained logits per choice set; softmax of logits_j is the
// categorical preference vector p_uj. Zero logits mean uniform.
struct PersonalPreferences {
    std::vector<Eigen::VectorXd> logits;

    static PersonalPreferences uniform(const std::vector<int>& set_sizes);
    Eigen::VectorXd probs(int set) const;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// All learnable parameters: shared projection M, general weights W and
// personal-reward scale w_p, plus one preference bundle per user. A policy
// with shared_preferences routes every user to a single bundle.
struct PolicyParams {
    int d = 0;
    int v = 0;
    double xi = 0.8;
    std::vector<int> set_sizes;
    ProjectionMatrix M;   // v x d
    Eigen::MatrixXd W;    // d x 4d
    double w_p = 0.0;
    bool shared_preferences = false;
    std::map<std::string, PersonalPreferences> prefs;

    static PolicyParams init(int v, int d, std::vector<int> set_sizes, double init_std,
                             std::uint64_t seed, double xi);

    std::string pref_key(const std::string& user_id) const;
    PersonalPreferences& prefs_for(const std::string& user_id);  // inserts uniform logits
    const PersonalPreferences* find_prefs(const std::string& user_id) const;
    // Categorical probability of value in set for this user; uniform when the
    // user has no preference bundle yet. Never mutates.
    double pref_prob(const std::string& user_id, int set, int value) const;

    long long general_parameter_count() const;  // |vec(W)| + |M| = 4d^2 + vd
    long long shared_parameter_count() const;   // general + 1 for w_p
};

double q_general(const BeliefState& b, const Eigen::RowVectorXd& action, const Eigen::MatrixXd& w);

// Kronecker product of row vectors, ordered so that
// kron(b, a) . vec_columnwise(W) == a W b^T.
Eigen::RowVectorXd kron(const Eigen::RowVectorXd& b, const Eigen::RowVectorXd& a);

Eigen::VectorXd vec_columnwise(const Eigen::MatrixXd& w);

// w_p * sum_j p_uj(c_ij) delta(C_j, H) over the sets the reply proposes.
double q_personal(const History& history, const Utterance& reply, const PolicyParams& params,
                  const std::string& user_id, const ChoiceIndex& choices);

double q_total(const History& history, const Utterance& reply, const PolicyParams& params,
               const std::string& user_id, const ChoiceIndex& choices);

// Exact analytic gradients of q_total with respect to each parameter group.
// dM collects the chain paths through the action embedding and through every
// projected utterance inside the belief state.
struct QGrad {
    Eigen::MatrixXd dM;   // v x d
    Eigen::MatrixXd dW;   // d x 4d
    double dwp = 0.0;
    std::vector<Eigen::VectorXd> dlogits;  // per choice set, zero-size when untouched
};

QGrad grad_q(const History& history, const Utterance& reply, const PolicyParams& params,
             const std::string& user_id, const ChoiceIndex& choices);

// Scores every candidate against one shared belief state. Identical math to
// q_total, with W b^T computed once.
std::vector<double> score_candidates(const History& history,
                                     const std::vector<Utterance>& candidates,
                                     const PolicyParams& params, const std::string& user_id,
                                     const ChoiceIndex& choices);

int argmax_first(std::span<const double> values);

struct ActionChoice {
    int index = 0;
    bool was_random = false;
};

// Epsilon-greedy over the candidate set: with probability eta a uniformly
// random candidate, otherwise the q_total argmax with first-index tie-break.
ActionChoice select_action(const History& history, const std::vector<Utterance>& candidates,
                           const PolicyParams& params, const std::string& user_id, double eta,
                           std::mt19937_64& rng, const ChoiceIndex& choices);

}  // namespace petal
