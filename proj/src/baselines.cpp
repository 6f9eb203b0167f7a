#include "petal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace petal {

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::NoneTL: return "NoneTL";
        case BaselineKind::All: return "All";
        case BaselineKind::Sim: return "Sim";
        case BaselineKind::Bandit: return "Bandit";
        case BaselineKind::PriorSim: return "PriorSim";
        case BaselineKind::PriorAll: return "PriorAll";
        case BaselineKind::PETAL: return "PETAL";
    }
    throw DataError("unknown baseline kind");
}

BaselineKind baseline_from_string(const std::string& name) {
    for (BaselineKind kind : {BaselineKind::NoneTL, BaselineKind::All, BaselineKind::Sim,
                              BaselineKind::Bandit, BaselineKind::PriorSim,
                              BaselineKind::PriorAll, BaselineKind::PETAL}) {
        if (to_string(kind) == name) return kind;
    }
    throw DataError("unknown baseline: " + name);
}

Corpus user_subset(const Corpus& corpus, const std::string& user_id) {
    Corpus out;
    out.vocabulary = corpus.vocabulary;
    out.choice_sets = corpus.choice_sets;
    for (const Dialogue& d : corpus.dialogues) {
        if (d.user_id == user_id) out.dialogues.push_back(d);
    }
    return out;
}

std::vector<std::string> corpus_users(const Corpus& corpus) {
    std::set<std::string> users;
    for (const Dialogue& d : corpus.dialogues) users.insert(d.user_id);
    return {users.begin(), users.end()};
}

Corpus merge_corpora(const Corpus& a, const Corpus& b) {
    if (a.vocabulary.tokens() != b.vocabulary.tokens()) {
        throw DataError("cannot merge corpora with different vocabularies");
    }
    Corpus out = a;
    out.dialogues.insert(out.dialogues.end(), b.dialogues.begin(), b.dialogues.end());
    return out;
}

Eigen::VectorXd choice_histogram(const Corpus& corpus, const std::string& user_id,
                                 const ChoiceIndex& choices) {
    const int n = choices.num_sets();
    std::vector<Eigen::VectorXd> counts;
    counts.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) counts.push_back(Eigen::VectorXd::Zero(choices.set_size(j)));

    for (const Dialogue& d : corpus.dialogues) {
        if (d.user_id != user_id) continue;
        History full;
        for (const Turn& turn : d.turns) {
            full.user.push_back(turn.user);
            full.agent.push_back(turn.agent);
        }
        const ChoiceAssignment chosen = detect_choices(full, choices);
        for (int j = 0; j < n; ++j) {
            const auto& v = chosen[static_cast<std::size_t>(j)];
            if (v.has_value()) counts[static_cast<std::size_t>(j)](*v) += 1.0;
        }
    }

    int total_dim = 0;
    for (int j = 0; j < n; ++j) total_dim += choices.set_size(j);
    Eigen::VectorXd hist(total_dim);
    int offset = 0;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd& c = counts[static_cast<std::size_t>(j)];
        const double sum = c.sum();
        if (sum > 0.0) c /= sum;
        hist.segment(offset, c.size()) = c;
        offset += static_cast<int>(c.size());
    }
    return hist;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DataError("cosine similarity size mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

SimilarityReport most_similar_source_user(const Corpus& source, const Corpus& target_user,
                                          const ChoiceIndex& choices) {
    const std::vector<std::string> targets = corpus_users(target_user);
    if (targets.size() != 1) {
        throw DataError("similarity selection expects a single-user target corpus");
    }
    const Eigen::VectorXd target_hist = choice_histogram(target_user, targets.front(), choices);

    SimilarityReport report;
    double best = -2.0;
    for (const std::string& user : corpus_users(source)) {
        const double score =
            cosine_similarity(choice_histogram(source, user, choices), target_hist);
        report.scores[user] = score;
        if (score > best) {  // sorted iteration, so ties keep the lowest user_id
            best = score;
            report.selected_user = user;
        }
    }
    if (report.selected_user.empty()) throw DataError("source corpus has no users");
    return report;
}

Ucb1::Ucb1(int arms) {
    if (arms <= 0) throw DataError("bandit needs at least one arm");
    counts_.assign(static_cast<std::size_t>(arms), 0);
    sums_.assign(static_cast<std::size_t>(arms), 0.0);
}

int Ucb1::select() const {
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        if (counts_[a] == 0) return static_cast<int>(a);
    }
    int best = 0;
    double best_bound = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        const double mean = sums_[a] / static_cast<double>(counts_[a]);
        const double bound =
            mean + std::sqrt(2.0 * std::log(static_cast<double>(total_)) /
                             static_cast<double>(counts_[a]));
        if (bound > best_bound) {
            best_bound = bound;
            best = static_cast<int>(a);
        }
    }
    return best;
}

void Ucb1::update(int arm, double reward) {
    counts_.at(static_cast<std::size_t>(arm)) += 1;
    sums_.at(static_cast<std::size_t>(arm)) += reward;
    total_ += 1;
}

double Ucb1::mean(int arm) const {
    if (counts_.at(static_cast<std::size_t>(arm)) == 0) return 0.0;
    return sums_[static_cast<std::size_t>(arm)] /
           static_cast<double>(counts_[static_cast<std::size_t>(arm)]);
}

PolicyParams train_none_tl(const Corpus& target, const PolicyParams& init,
                           const TrainConfig& config, const ChoiceIndex& choices) {
    PolicyParams params = init;
    params.shared_preferences = true;
    if (!target.dialogues.empty() && config.epochs > 0) {
        train_offline(target, params, config, choices);
    }
    return params;
}

PolicyParams pooled_source_policy(const Corpus& source, const PolicyParams& init,
                                  const TrainConfig& config, const ChoiceIndex& choices) {
    PolicyParams params = init;
    params.shared_preferences = true;
    if (!source.dialogues.empty() && config.epochs > 0) {
        train_offline(source, params, config, choices);
    }
    return params;
}

PolicyParams train_all(const Corpus& source, const Corpus& target, const PolicyParams& init,
                       const TrainConfig& config, const ChoiceIndex& choices) {
    PolicyParams params = pooled_source_policy(source, init, config, choices);
    if (!target.dialogues.empty() && config.epochs > 0) {
        train_offline(target, params, config, choices);
    }
    return params;
}

PolicyParams train_sim(const Corpus& source, const Corpus& target_user,
                       const PolicyParams& init, const TrainConfig& config,
                       const ChoiceIndex& choices, SimilarityReport* report) {
    SimilarityReport sim = most_similar_source_user(source, target_user, choices);
    if (report != nullptr) *report = sim;
    const Corpus pooled =
        merge_corpora(user_subset(source, sim.selected_user), target_user);
    PolicyParams params = init;
    params.shared_preferences = true;
    if (!pooled.dialogues.empty() && config.epochs > 0) {
        train_offline(pooled, params, config, choices);
    }
    return params;
}

namespace {

// Negative mean squared TD error of a policy on one dialogue.
double dialogue_fit(const PolicyParams& params, const Dialogue& dialogue, double gamma,
                    const ChoiceIndex& choices) {
    double sq = 0.0;
    int n = 0;
    for (const Transition& t : dialogue_transitions(dialogue)) {
        const double delta = td_error_offline(t, params, dialogue.user_id, gamma, choices);
        sq += delta * delta;
        ++n;
    }
    return n > 0 ? -sq / static_cast<double>(n) : 0.0;
}

}  // namespace

PolicyParams train_bandit(const Corpus& source, const Corpus& target_user,
                          const PolicyParams& init, const TrainConfig& config,
                          const ChoiceIndex& choices, int budget, std::uint64_t seed,
                          BanditReport* report) {
    const std::vector<std::string> users = corpus_users(source);
    if (users.empty()) throw DataError("source corpus has no users");
    if (target_user.dialogues.empty()) throw DataError("bandit needs target dialogues");

    std::vector<PolicyParams> arms;
    arms.reserve(users.size());
    for (const std::string& user : users) {
        arms.push_back(
            pooled_source_policy(user_subset(source, user), init, config, choices));
    }

    Ucb1 bandit(static_cast<int>(users.size()));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, target_user.dialogues.size() - 1);
    const int pulls = std::max(budget, static_cast<int>(users.size()));
    for (int i = 0; i < pulls; ++i) {
        const int arm = bandit.select();
        const Dialogue& dialogue = target_user.dialogues[pick(rng)];
        bandit.update(arm, dialogue_fit(arms[static_cast<std::size_t>(arm)], dialogue,
                                        config.gamma, choices));
    }

    int best = 0;
    for (std::size_t a = 1; a < users.size(); ++a) {
        if (bandit.mean(static_cast<int>(a)) > bandit.mean(best)) best = static_cast<int>(a);
    }
    if (report != nullptr) {
        report->arm_users = users;
        report->pull_counts = bandit.counts();
        report->selected_user = users[static_cast<std::size_t>(best)];
    }

    PolicyParams params = arms[static_cast<std::size_t>(best)];
    if (!target_user.dialogues.empty() && config.epochs > 0) {
        train_offline(target_user, params, config, choices);
    }
    return params;
}

namespace {

void pull_toward(PolicyParams& params, const PolicyParams& prior, double factor) {
    params.M = prior.M + (params.M - prior.M) / factor;
    params.W = prior.W + (params.W - prior.W) / factor;
    params.w_p = prior.w_p + (params.w_p - prior.w_p) / factor;
    for (auto& [key, bundle] : params.prefs) {
        auto it = prior.prefs.find(key);
        if (it == prior.prefs.end()) continue;
        for (std::size_t j = 0; j < bundle.logits.size(); ++j) {
            bundle.logits[j] =
                it->second.logits[j] + (bundle.logits[j] - it->second.logits[j]) / factor;
        }
    }
}

// train_offline's exact loop with an L2 proximal pull toward the prior after
// every update; lambda = 0 reproduces train_offline bit for bit.
PolicyParams proximal_train(const Corpus& corpus, const PolicyParams& prior,
                            const TrainConfig& config, double lambda,
                            const ChoiceIndex& choices) {
    PolicyParams params = prior;
    if (corpus.dialogues.empty() || config.epochs <= 0) return params;
    const double factor = 1.0 + config.alpha * lambda;
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(corpus.dialogues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const Dialogue& dialogue = corpus.dialogues[idx];
            for (const Transition& t : dialogue_transitions(dialogue)) {
                sgd_update(params, t, dialogue.user_id, config, choices);
                if (lambda != 0.0) pull_toward(params, prior, factor);
            }
        }
    }
    return params;
}

}  // namespace

PolicyParams train_prior(const Corpus& source, const Corpus& target, const PolicyParams& init,
                         const TrainConfig& config, const ChoiceIndex& choices,
                         BaselineKind mode, double lambda, SimilarityReport* sim_report) {
    PolicyParams prior;
    if (mode == BaselineKind::PriorAll) {
        prior = pooled_source_policy(source, init, config, choices);
    } else if (mode == BaselineKind::PriorSim) {
        SimilarityReport sim = most_similar_source_user(source, target, choices);
        if (sim_report != nullptr) *sim_report = sim;
        prior = pooled_source_policy(user_subset(source, sim.selected_user), init, config,
                                     choices);
    } else {
        throw DataError("train_prior mode must be PriorSim or PriorAll");
    }
    return proximal_train(target, prior, config, lambda, choices);
}

PolicyParams train_petal(const Corpus& source, const Corpus& target, const PolicyParams& init,
                         const TrainConfig& config, const ChoiceIndex& choices) {
    PolicyParams src_init = init;
    src_init.shared_preferences = false;
    const SourceModel model = train_source_model(source, src_init, config, choices);
    return transfer_to_target(target, model, config, choices);
}

}  // namespace petal
