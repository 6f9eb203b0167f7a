#include "petal/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace petal {

namespace {

double q_of(const History& h, const Utterance& a, const PolicyParams& params,
            const std::string& user_id, const ChoiceIndex& choices) {
    return q_total(h, a, params, user_id, choices);
}

// Index of the best next candidate, shared by the online TD error and the
// residual-gradient path so both use the same action.
int best_next_candidate(const Transition& t, const PolicyParams& params,
                        const std::string& user_id, const ChoiceIndex& choices) {
    if (t.next_candidates.empty()) {
        throw DataError("online transition has an empty candidate set");
    }
    const std::vector<double> scores =
        score_candidates(t.next_history, t.next_candidates, params, user_id, choices);
    return argmax_first(scores);
}

bool params_all_finite(const PolicyParams& params) {
    if (!params.M.allFinite() || !params.W.allFinite() || !std::isfinite(params.w_p)) return false;
    for (const auto& [key, bundle] : params.prefs) {
        for (const Eigen::VectorXd& l : bundle.logits) {
            if (!l.allFinite()) return false;
        }
    }
    return true;
}

void apply_scaled_grad(PolicyParams& params, const QGrad& g, double scale,
                       const std::string& user_id, bool freeze_shared) {
    if (!freeze_shared) {
        params.M.noalias() += scale * g.dM;
        params.W.noalias() += scale * g.dW;
        params.w_p += scale * g.dwp;
    }
    bool any_logit = false;
    for (const Eigen::VectorXd& dl : g.dlogits) {
        if (dl.size() > 0) {
            any_logit = true;
            break;
        }
    }
    if (!any_logit) return;
    PersonalPreferences& prefs = params.prefs_for(user_id);
    for (std::size_t j = 0; j < g.dlogits.size(); ++j) {
        if (g.dlogits[j].size() > 0) prefs.logits[j] += scale * g.dlogits[j];
    }
}

}  // namespace

double td_error_offline(const Transition& t, const PolicyParams& params,
                        const std::string& user_id, double gamma, const ChoiceIndex& choices) {
    const double q = q_of(t.history, t.action, params, user_id, choices);
    if (t.terminal) return t.reward - q;
    if (!t.next_action.has_value()) {
        throw DataError("offline transition is missing its next action");
    }
    const double q_next = q_of(t.next_history, *t.next_action, params, user_id, choices);
    return t.reward + gamma * q_next - q;
}

double td_error_online(const Transition& t, const PolicyParams& params, const std::string& user_id,
                       double gamma, const ChoiceIndex& choices) {
    const double q = q_of(t.history, t.action, params, user_id, choices);
    if (t.terminal) return t.reward - q;
    const std::vector<double> scores =
        score_candidates(t.next_history, t.next_candidates, params, user_id, choices);
    if (scores.empty()) throw DataError("online transition has an empty candidate set");
    const double best = *std::max_element(scores.begin(), scores.end());
    return t.reward + gamma * best - q;
}

namespace {

long long& sgd_update_counter() {
    static long long n = 0;
    return n;
}

}  // namespace

long long sgd_update_count() { return sgd_update_counter(); }

void sgd_update(PolicyParams& params, const Transition& t, const std::string& user_id,
                const TrainConfig& config, const ChoiceIndex& choices) {
    sgd_update_counter() += 1;
    const bool online = !t.terminal && !t.next_action.has_value();
    const double delta = online
                             ? td_error_online(t, params, user_id, config.gamma, choices)
                             : td_error_offline(t, params, user_id, config.gamma, choices);
    if (!std::isfinite(delta)) {
        throw NumericError("TD error diverged to a non-finite value during training");
    }
    const QGrad g = grad_q(t.history, t.action, params, user_id, choices);
    apply_scaled_grad(params, g, config.alpha * delta, user_id, config.freeze_shared);
    if (config.residual_gradients && !t.terminal) {
        const Utterance& next = online
                                    ? t.next_candidates[static_cast<std::size_t>(
                                          best_next_candidate(t, params, user_id, choices))]
                                    : *t.next_action;
        const QGrad gn = grad_q(t.next_history, next, params, user_id, choices);
        apply_scaled_grad(params, gn, -config.alpha * delta * config.gamma, user_id,
                          config.freeze_shared);
    }
}

double exploration_rate(double beta, double base, double decay) {
    if (beta < 0.0) throw DataError("exploration_rate requires beta >= 0");
    return base * std::exp(-beta / decay);
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open trace file for writing: " + path.string());
    out << "epoch,dialogues_seen,mean_squared_td_error,eta\n";
    out.precision(17);
    for (const TraceRow& row : trace.rows) {
        out << row.epoch << ',' << row.dialogues_seen << ',' << row.mean_squared_td_error << ','
            << row.eta << '\n';
    }
    if (!out) throw DataError("failed writing trace file: " + path.string());
}

std::vector<Transition> dialogue_transitions(const Dialogue& dialogue) {
    std::vector<Transition> out;
    const int n = static_cast<int>(dialogue.turns.size());
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Turn& turn = dialogue.turns[static_cast<std::size_t>(i)];
        if (!turn.reward.has_value()) {
            throw DataError("dialogue for " + dialogue.user_id + " has a turn without a reward");
        }
        Transition t;
        t.history = history_at(dialogue, i);
        t.action = turn.agent;
        t.reward = *turn.reward;
        if (i + 1 < n) {
            t.next_history = history_at(dialogue, i + 1);
            t.next_action = dialogue.turns[static_cast<std::size_t>(i + 1)].agent;
            t.terminal = false;
        } else {
            t.terminal = true;
        }
        out.push_back(std::move(t));
    }
    return out;
}

TrainTrace train_offline(const Corpus& corpus, PolicyParams& params, const TrainConfig& config,
                         const ChoiceIndex& choices) {
    if (corpus.dialogues.empty()) throw DataError("cannot train on an empty corpus");
    TrainTrace trace;
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(corpus.dialogues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    long long beta = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sq_sum = 0.0;
        long long count = 0;
        for (std::size_t idx : order) {
            const Dialogue& dialogue = corpus.dialogues[idx];
            for (const Transition& t : dialogue_transitions(dialogue)) {
                const double delta =
                    td_error_offline(t, params, dialogue.user_id, config.gamma, choices);
                sq_sum += delta * delta;
                ++count;
                sgd_update(params, t, dialogue.user_id, config, choices);
            }
            ++beta;
        }
        if (!params_all_finite(params)) {
            throw NumericError("parameters diverged to non-finite values in epoch " +
                               std::to_string(epoch));
        }
        TraceRow row;
        row.epoch = epoch;
        row.dialogues_seen = beta;
        row.mean_squared_td_error = count > 0 ? sq_sum / static_cast<double>(count) : 0.0;
        row.eta = exploration_rate(static_cast<double>(beta), config.eta_base, config.eta_decay);
        trace.rows.push_back(row);
    }
    return trace;
}

TrainTrace train_online(DialogueEnv& env, PolicyParams& params, const std::string& user_id,
                        const TrainConfig& config, int n_dialogues, const ChoiceIndex& choices,
                        long long beta0) {
    TrainTrace trace;
    std::mt19937_64 rng(config.seed);
    long long beta = beta0;
    for (int episode = 0; episode < n_dialogues; ++episode) {
        History h = env.reset(rng);
        const double eta =
            exploration_rate(static_cast<double>(beta), config.eta_base, config.eta_decay);
        double sq_sum = 0.0;
        long long count = 0;
        while (!env.done()) {
            const std::vector<Utterance> cands = env.candidates();
            const ActionChoice pick =
                select_action(h, cands, params, user_id, eta, rng, choices);
            const Utterance action = cands[static_cast<std::size_t>(pick.index)];
            env.step(action, rng);
            Transition t;
            t.history = h;
            t.action = action;
            t.reward = env.last_reward();
            t.next_history = env.history();
            t.terminal = env.done();
            if (!t.terminal) t.next_candidates = env.candidates();
            const double delta =
                td_error_online(t, params, user_id, config.gamma, choices);
            sq_sum += delta * delta;
            ++count;
            sgd_update(params, t, user_id, config, choices);
            h = env.history();
        }
        ++beta;
        if (!params_all_finite(params)) {
            throw NumericError("parameters diverged to non-finite values in episode " +
                               std::to_string(episode));
        }
        TraceRow row;
        row.epoch = episode;
        row.dialogues_seen = beta;
        row.mean_squared_td_error = count > 0 ? sq_sum / static_cast<double>(count) : 0.0;
        row.eta = eta;
        trace.rows.push_back(row);
    }
    return trace;
}

}  // namespace petal
