#pragma once

#include <filesystem>
#include <optional>

#include "petal/qfunction.hpp"

namespace petal {

// One SARSA step. Offline transitions carry the next logged action; online
// transitions carry the candidate set available at the next turn instead.
struct Transition {
    History history;
    Utterance action;
    double reward = 0.0;
    History next_history;
    std::optional<Utterance> next_action;
    std::vector<Utterance> next_candidates;
    bool terminal = false;
};

struct TrainConfig {
    double alpha = 0.0001;
    double gamma = 0.9;
    double xi = 0.8;
    int epochs = 1;
    std::uint64_t seed = 0;
    double eta_base = 0.2;
    double eta_decay = 1000.0;
    bool residual_gradients = false;  // descend the full squared-TD gradient
    bool freeze_shared = false;       // update only per-user logits
};

double td_error_offline(const Transition& t, const PolicyParams& params,
                        const std::string& user_id, double gamma, const ChoiceIndex& choices);

double td_error_online(const Transition& t, const PolicyParams& params, const std::string& user_id,
                       double gamma, const ChoiceIndex& choices);

// One gradient step on (delta_td)^2 with the target frozen:
// theta += alpha * delta * grad Q(H_i, A_i). Picks the offline or online TD
// error from the transition's own shape. Touches M, W, w_p and the acting
// user's logits only.
void sgd_update(PolicyParams& params, const Transition& t, const std::string& user_id,
                const TrainConfig& config, const ChoiceIndex& choices);

double exploration_rate(double beta, double base = 0.2, double decay = 1000.0);

// Number of sgd_update invocations since process start; lets tests confirm
// that every training path funnels through the one shared update.
long long sgd_update_count();

struct TraceRow {
    int epoch = 0;
    long long dialogues_seen = 0;
    double mean_squared_td_error = 0.0;
    double eta = 0.0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
};

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

// Builds the SARSA transitions of one logged dialogue, oldest first. Every
// turn must carry a reward; the final turn is terminal.
std::vector<Transition> dialogue_transitions(const Dialogue& dialogue);

TrainTrace train_offline(const Corpus& corpus, PolicyParams& params, const TrainConfig& config,
                         const ChoiceIndex& choices);

// What an environment must provide for on-policy training and evaluation.
// reset() starts an episode and returns the opening history (user has spoken);
// candidates() reflects the current episode state; step() applies the chosen
// reply and returns the reward, the extended history, and the terminal flag.
class DialogueEnv {
  public:
    virtual ~DialogueEnv() = default;
    virtual History reset(std::mt19937_64& rng) = 0;
    virtual std::vector<Utterance> candidates() const = 0;
    virtual void step(const Utterance& action, std::mt19937_64& rng) = 0;
    virtual double last_reward() const = 0;
    virtual const History& history() const = 0;
    virtual bool done() const = 0;
};

// Runs n_dialogues on-policy episodes with eta-greedy exploration, updating
// params after every transition. beta starts at beta0 and counts completed
// dialogues; the returned trace has one row per episode.
TrainTrace train_online(DialogueEnv& env, PolicyParams& params, const std::string& user_id,
                        const TrainConfig& config, int n_dialogues, const ChoiceIndex& choices,
                        long long beta0 = 0);

}  // namespace petal
