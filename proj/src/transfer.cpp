#include "petal/transfer.hpp"

#include <algorithm>
#include <map>

namespace petal {

SourceModel train_source_model(const Corpus& source, const PolicyParams& init,
                               const TrainConfig& config, const ChoiceIndex& choices) {
    if (source.dialogues.empty()) throw DataError("source corpus is empty");

    // Dialogue indices per user, in corpus order; users in sorted order.
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < source.dialogues.size(); ++i) {
        by_user[source.dialogues[i].user_id].push_back(i);
    }

    SourceModel model;
    model.params = init;
    std::mt19937_64 rng(config.seed);
    long long beta = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::vector<std::size_t>> queues;
        queues.reserve(by_user.size());
        for (auto& [user, indices] : by_user) {
            std::vector<std::size_t> q = indices;
            std::shuffle(q.begin(), q.end(), rng);
            queues.push_back(std::move(q));
        }
        std::size_t longest = 0;
        for (const auto& q : queues) longest = std::max(longest, q.size());

        double sq_sum = 0.0;
        long long count = 0;
        for (std::size_t round = 0; round < longest; ++round) {
            for (const auto& q : queues) {
                if (round >= q.size()) continue;
                const Dialogue& dialogue = source.dialogues[q[round]];
                for (const Transition& t : dialogue_transitions(dialogue)) {
                    const double delta = td_error_offline(t, model.params, dialogue.user_id,
                                                          config.gamma, choices);
                    sq_sum += delta * delta;
                    ++count;
                    sgd_update(model.params, t, dialogue.user_id, config, choices);
                }
                ++beta;
            }
        }
        TraceRow row;
        row.epoch = epoch;
        row.dialogues_seen = beta;
        row.mean_squared_td_error = count > 0 ? sq_sum / static_cast<double>(count) : 0.0;
        row.eta = exploration_rate(static_cast<double>(beta), config.eta_base, config.eta_decay);
        model.trace.rows.push_back(row);
    }
    return model;
}

PolicyParams transfer_to_target(const Corpus& target, const SourceModel& source,
                                const TrainConfig& config, const ChoiceIndex& choices,
                                TrainTrace* trace_out) {
    PolicyParams params = source.params;
    params.prefs.clear();  // source-user preferences stay in the source domain
    if (!target.dialogues.empty() && config.epochs > 0) {
        TrainTrace trace = train_offline(target, params, config, choices);
        if (trace_out != nullptr) *trace_out = std::move(trace);
    } else if (trace_out != nullptr) {
        *trace_out = TrainTrace{};
    }
    return params;
}

}  // namespace petal
