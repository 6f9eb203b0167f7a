#include "petal/qfunction.hpp"

#include <algorithm>
#include <cmath>

namespace petal {

namespace {

constexpr const char* kSharedPrefKey = "__shared__";

}  // namespace

PersonalPreferences PersonalPreferences::uniform(const std::vector<int>& set_sizes) {
    PersonalPreferences p;
    p.logits.reserve(set_sizes.size());
    for (int n : set_sizes) p.logits.push_back(Eigen::VectorXd::Zero(n));
    return p;
}

Eigen::VectorXd PersonalPreferences::probs(int set) const {
    return softmax(logits.at(static_cast<std::size_t>(set)));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    if (logits.size() == 0) throw DataError("softmax of empty logits");
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    const double z = e.sum();
    if (!std::isfinite(z) || z <= 0.0) throw NumericError("softmax normalizer is not finite");
    return e / z;
}

PolicyParams PolicyParams::init(int v, int d, std::vector<int> set_sizes, double init_std,
                                std::uint64_t seed, double xi) {
    if (v <= 0 || d <= 0) throw DataError("policy dimensions must be positive");
    PolicyParams p;
    p.d = d;
    p.v = v;
    p.xi = xi;
    p.set_sizes = std::move(set_sizes);
    p.M = gaussian_projection(v, d, init_std, seed);
    p.W = Eigen::MatrixXd::Zero(d, 4 * d);
    p.w_p = 0.0;
    return p;
}

std::string PolicyParams::pref_key(const std::string& user_id) const {
    return shared_preferences ? std::string(kSharedPrefKey) : user_id;
}

PersonalPreferences& PolicyParams::prefs_for(const std::string& user_id) {
    const std::string key = pref_key(user_id);
    auto it = prefs.find(key);
    if (it == prefs.end()) it = prefs.emplace(key, PersonalPreferences::uniform(set_sizes)).first;
    return it->second;
}

const PersonalPreferences* PolicyParams::find_prefs(const std::string& user_id) const {
    auto it = prefs.find(pref_key(user_id));
    return it == prefs.end() ? nullptr : &it->second;
}

double PolicyParams::pref_prob(const std::string& user_id, int set, int value) const {
    const int n = set_sizes.at(static_cast<std::size_t>(set));
    if (value < 0 || value >= n) throw DataError("choice value out of range for preference lookup");
    if (const PersonalPreferences* p = find_prefs(user_id)) {
        return p->probs(set)(value);
    }
    return 1.0 / static_cast<double>(n);
}

long long PolicyParams::general_parameter_count() const {
    return 4LL * d * d + static_cast<long long>(v) * d;
}

long long PolicyParams::shared_parameter_count() const { return general_parameter_count() + 1; }

double q_general(const BeliefState& b, const Eigen::RowVectorXd& action, const Eigen::MatrixXd& w) {
    const Eigen::RowVectorXd bc = b.concat();
    if (action.size() != w.rows() || bc.size() != w.cols()) {
        throw DataError("q_general shape mismatch between action, W, and belief");
    }
    const double q = (action * w).dot(bc);
    if (!std::isfinite(q)) throw NumericError("q_general produced a non-finite value");
    return q;
}

Eigen::RowVectorXd kron(const Eigen::RowVectorXd& b, const Eigen::RowVectorXd& a) {
    Eigen::RowVectorXd out(b.size() * a.size());
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        out.segment(j * a.size(), a.size()) = b(j) * a;
    }
    return out;
}

Eigen::VectorXd vec_columnwise(const Eigen::MatrixXd& w) {
    return Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
}

namespace {

// One proposed, still-open choice (set, value) with its preference probability.
struct PersonalTerm {
    int set = 0;
    int value = 0;
    double prob = 0.0;
};

std::vector<PersonalTerm> personal_terms(const History& history, const Utterance& reply,
                                         const PolicyParams& params, const std::string& user_id,
                                         const ChoiceIndex& choices) {
    const ChoiceAssignment proposed = extract_proposed_choices(reply.tokens, choices);
    std::vector<PersonalTerm> terms;
    bool any = false;
    for (std::size_t j = 0; j < proposed.size(); ++j) {
        if (proposed[j].has_value()) {
            any = true;
            break;
        }
    }
    if (!any) return terms;
    const std::vector<int> delta = delta_indicators(detect_choices(history, choices));
    for (std::size_t j = 0; j < proposed.size(); ++j) {
        if (!proposed[j].has_value() || delta[j] == 0) continue;
        PersonalTerm t;
        t.set = static_cast<int>(j);
        t.value = *proposed[j];
        t.prob = params.pref_prob(user_id, t.set, t.value);
        terms.push_back(t);
    }
    return terms;
}

double personal_value(const std::vector<PersonalTerm>& terms, double w_p) {
    double s = 0.0;
    for (const PersonalTerm& t : terms) s += t.prob;
    return w_p * s;
}

}  // namespace

double q_personal(const History& history, const Utterance& reply, const PolicyParams& params,
                  const std::string& user_id, const ChoiceIndex& choices) {
    return personal_value(personal_terms(history, reply, params, user_id, choices), params.w_p);
}

double q_total(const History& history, const Utterance& reply, const PolicyParams& params,
               const std::string& user_id, const ChoiceIndex& choices) {
    const BeliefState b = belief_from_history(history, params.M, params.xi);
    const Eigen::RowVectorXd a = project(reply.bow, params.M);
    return q_general(b, a, params.W) + q_personal(history, reply, params, user_id, choices);
}

QGrad grad_q(const History& history, const Utterance& reply, const PolicyParams& params,
             const std::string& user_id, const ChoiceIndex& choices) {
    const int d = params.d;
    const BeliefAccumulator acc = accumulate_history(history, params.M, params.xi);
    const Eigen::RowVectorXd bc = acc.state.concat();
    const Eigen::RowVectorXd a = project(reply.bow, params.M);

    QGrad g;
    g.dW.noalias() = a.transpose() * bc;  // d x 4d

    // Action path: q depends on M through a = sum of reply rows of M.
    g.dM = Eigen::MatrixXd::Zero(params.v, d);
    const Eigen::RowVectorXd bw = bc * params.W.transpose();  // 1 x d
    for (int r : reply.bow.indices) g.dM.row(r) += bw;

    // Belief path: each block of b is a bag-of-words weight vector times M.
    const Eigen::RowVectorXd aw = a * params.W;  // 1 x 4d
    g.dM.noalias() += acc.x0 * aw.segment(0, d);
    for (int r : acc.x1.indices) g.dM.row(r) += aw.segment(d, d);
    g.dM.noalias() += acc.x2 * aw.segment(2 * d, d);
    for (int r : acc.x3.indices) g.dM.row(r) += aw.segment(3 * d, d);

    // Personal path: dwp is the delta-gated preference mass; logits get the
    // softmax Jacobian row for the proposed value, scaled by w_p.
    g.dlogits.assign(params.set_sizes.size(), Eigen::VectorXd());
    const std::vector<PersonalTerm> terms = personal_terms(history, reply, params, user_id, choices);
    if (!terms.empty()) {
        const PersonalPreferences* p = params.find_prefs(user_id);
        for (const PersonalTerm& t : terms) {
            g.dwp += t.prob;
            const int n = params.set_sizes[static_cast<std::size_t>(t.set)];
            Eigen::VectorXd probs =
                p ? p->probs(t.set) : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
            Eigen::VectorXd dl = -t.prob * probs;
            dl(t.value) += t.prob;
            g.dlogits[static_cast<std::size_t>(t.set)] = params.w_p * dl;
        }
    }
    return g;
}

std::vector<double> score_candidates(const History& history,
                                     const std::vector<Utterance>& candidates,
                                     const PolicyParams& params, const std::string& user_id,
                                     const ChoiceIndex& choices) {
    const BeliefState b = belief_from_history(history, params.M, params.xi);
    const Eigen::VectorXd wb = params.W * b.concat().transpose();  // d x 1, shared by candidates
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const Utterance& cand : candidates) {
        const Eigen::RowVectorXd a = project(cand.bow, params.M);
        const double q = a.dot(wb) + q_personal(history, cand, params, user_id, choices);
        if (!std::isfinite(q)) throw NumericError("candidate score is not finite");
        scores.push_back(q);
    }
    return scores;
}

int argmax_first(std::span<const double> values) {
    if (values.empty()) throw DataError("argmax over empty candidate list");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

ActionChoice select_action(const History& history, const std::vector<Utterance>& candidates,
                           const PolicyParams& params, const std::string& user_id, double eta,
                           std::mt19937_64& rng, const ChoiceIndex& choices) {
    if (candidates.empty()) throw DataError("select_action requires at least one candidate");
    ActionChoice choice;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eta) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(candidates.size()) - 1);
        choice.index = pick(rng);
        choice.was_random = true;
        return choice;
    }
    const std::vector<double> scores =
        score_candidates(history, candidates, params, user_id, choices);
    choice.index = argmax_first(scores);
    choice.was_random = false;
    return choice;
}

}  // namespace petal
