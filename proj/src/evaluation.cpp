#include "petal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "petal/baselines.hpp"

namespace petal {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::uint64_t hash_stream(std::uint64_t seed, const std::string& user, std::uint64_t a,
                          std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ fnv1a(user));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

double auc_turn(const PolicyParams& params, const std::string& user_id, const History& history,
                const Utterance& truth, const std::vector<Utterance>& distractors,
                const ChoiceIndex& choices) {
    if (distractors.size() != 10) {
        throw DataError("auc_turn requires exactly 10 distractors, got " +
                        std::to_string(distractors.size()));
    }
    std::vector<Utterance> all;
    all.reserve(11);
    all.push_back(truth);
    all.insert(all.end(), distractors.begin(), distractors.end());
    const std::vector<double> scores =
        score_candidates(history, all, params, user_id, choices);
    const double truth_score = scores.front();
    double credit = 0.0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] < truth_score) {
            credit += 1.0;
        } else if (scores[i] == truth_score) {
            credit += 0.5;
        }
    }
    return credit / 10.0;
}

AucResult auc_evaluate_per_user(const std::map<std::string, PolicyParams>& params_per_user,
                                const Corpus& test, const std::vector<std::uint64_t>& seeds,
                                const ChoiceIndex& choices) {
    if (seeds.empty()) throw DataError("auc_evaluate needs at least one seed");
    if (test.dialogues.empty()) throw DataError("auc_evaluate needs a non-empty corpus");

    // Pool of agent-reply instances: (dialogue index, turn index).
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t d = 0; d < test.dialogues.size(); ++d) {
        for (std::size_t i = 0; i < test.dialogues[d].turns.size(); ++i) {
            pool.emplace_back(d, i);
        }
    }
    if (pool.size() < 11) {
        throw DataError("corpus has fewer than 11 agent replies; cannot sample distractors");
    }
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> instance_of;
    for (std::size_t k = 0; k < pool.size(); ++k) instance_of[pool[k]] = k;

    const std::vector<std::string> users = corpus_users(test);
    for (const std::string& user : users) {
        if (params_per_user.find(user) == params_per_user.end()) {
            throw DataError("no policy for corpus user " + user);
        }
    }

    AucResult result;
    result.seeds = seeds;

    for (std::uint64_t seed : seeds) {
        double user_sum = 0.0;
        for (const std::string& user : users) {
            const PolicyParams& params = params_per_user.at(user);
            double dialogue_sum = 0.0;
            int dialogue_count = 0;
            for (std::size_t d = 0; d < test.dialogues.size(); ++d) {
                const Dialogue& dialogue = test.dialogues[d];
                if (dialogue.user_id != user || dialogue.turns.empty()) continue;
                double turn_sum = 0.0;
                for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
                    const std::size_t truth_instance = instance_of.at({d, i});
                    std::mt19937_64 rng(hash_stream(seed, user, d, i));
                    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
                    std::set<std::size_t> chosen;
                    std::vector<Utterance> distractors;
                    while (distractors.size() < 10) {
                        const std::size_t k = pick(rng);
                        if (k == truth_instance || !chosen.insert(k).second) continue;
                        const auto& [pd, pi] = pool[k];
                        distractors.push_back(test.dialogues[pd].turns[pi].agent);
                    }
                    turn_sum += auc_turn(params, user, history_at(dialogue, static_cast<int>(i)),
                                         dialogue.turns[i].agent, distractors, choices);
                }
                dialogue_sum += turn_sum / static_cast<double>(dialogue.turns.size());
                ++dialogue_count;
            }
            const double user_mean =
                dialogue_count > 0 ? dialogue_sum / static_cast<double>(dialogue_count) : 0.0;
            result.per_user[user].push_back(user_mean);
            user_sum += user_mean;
        }
        result.per_seed.push_back(user_sum / static_cast<double>(users.size()));
    }

    double sum = 0.0;
    for (double v : result.per_seed) sum += v;
    result.mean = sum / static_cast<double>(result.per_seed.size());
    double sq = 0.0;
    for (double v : result.per_seed) sq += (v - result.mean) * (v - result.mean);
    result.stddev = std::sqrt(sq / static_cast<double>(result.per_seed.size()));
    return result;
}

AucResult auc_evaluate(const PolicyParams& params, const Corpus& test,
                       const std::vector<std::uint64_t>& seeds, const ChoiceIndex& choices) {
    std::map<std::string, PolicyParams> per_user;
    for (const std::string& user : corpus_users(test)) per_user.emplace(user, params);
    return auc_evaluate_per_user(per_user, test, seeds, choices);
}

OnlineResult online_evaluate(const std::map<std::string, PolicyParams>& policy_per_user,
                             const Domain& domain, const std::vector<UserProfile>& profiles,
                             const std::vector<ChoiceAssignment>& rosters,
                             const SimConfig& sim_config, int episodes_per_user,
                             const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw DataError("online_evaluate needs at least one seed");
    if (profiles.empty()) throw DataError("online_evaluate needs target profiles");
    if (episodes_per_user < 1) throw DataError("episodes_per_user must be positive");

    // Sorted user order; metrics are sums, so visit order cannot matter.
    std::vector<UserProfile> ordered = profiles;
    std::sort(ordered.begin(), ordered.end(),
              [](const UserProfile& a, const UserProfile& b) { return a.user_id < b.user_id; });

    OnlineResult result;
    result.seeds = seeds;
    for (std::uint64_t seed : seeds) {
        double reward_sum = 0.0;
        double success_sum = 0.0;
        double length_sum = 0.0;
        long long episodes = 0;
        for (const UserProfile& profile : ordered) {
            auto it = policy_per_user.find(profile.user_id);
            if (it == policy_per_user.end()) {
                throw DataError("no policy for target user " + profile.user_id);
            }
            const PolicyFn policy = greedy_policy(it->second, profile.user_id);
            CoffeeEnv env(domain, profile, sim_config, rosters);
            for (int e = 0; e < episodes_per_user; ++e) {
                std::mt19937_64 rng(
                    hash_stream(seed, profile.user_id, static_cast<std::uint64_t>(e), 0));
                const EpisodeLog log = run_episode(env, policy, rng);
                reward_sum += log.total_reward;
                success_sum += log.success ? 1.0 : 0.0;
                length_sum += static_cast<double>(log.length);
                ++episodes;
            }
        }
        OnlineMetrics m;
        m.mean_reward = reward_sum / static_cast<double>(episodes);
        m.success_rate = success_sum / static_cast<double>(episodes);
        m.mean_length = length_sum / static_cast<double>(episodes);
        result.per_seed.push_back(m);
    }

    const auto n = static_cast<double>(result.per_seed.size());
    for (const OnlineMetrics& m : result.per_seed) {
        result.mean.mean_reward += m.mean_reward / n;
        result.mean.success_rate += m.success_rate / n;
        result.mean.mean_length += m.mean_length / n;
    }
    for (const OnlineMetrics& m : result.per_seed) {
        result.stddev.mean_reward += (m.mean_reward - result.mean.mean_reward) *
                                     (m.mean_reward - result.mean.mean_reward) / n;
        result.stddev.success_rate += (m.success_rate - result.mean.success_rate) *
                                      (m.success_rate - result.mean.success_rate) / n;
        result.stddev.mean_length += (m.mean_length - result.mean.mean_length) *
                                     (m.mean_length - result.mean.mean_length) / n;
    }
    result.stddev.mean_reward = std::sqrt(result.stddev.mean_reward);
    result.stddev.success_rate = std::sqrt(result.stddev.success_rate);
    result.stddev.mean_length = std::sqrt(result.stddev.mean_length);
    return result;
}

void emit_report(const std::vector<ReportEntry>& entries, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    // Each file is written only when some entry carries that result kind, so
    // an offline-only run does not clobber an earlier online report (and vice
    // versa) when both land in the same directory.
    const bool any_auc = std::any_of(entries.begin(), entries.end(),
                                     [](const ReportEntry& e) { return e.auc.has_value(); });
    const bool any_online = std::any_of(entries.begin(), entries.end(),
                                        [](const ReportEntry& e) { return e.online.has_value(); });

    if (any_auc) {
        std::ofstream auc(dir / "auc.csv", std::ios::binary);
        if (!auc) throw DataError("cannot open auc.csv for writing");
        auc.precision(17);
        auc << "baseline,seed,user,mean_auc\n";
        for (const ReportEntry& entry : entries) {
            if (!entry.auc.has_value()) continue;
            const AucResult& r = *entry.auc;
            for (std::size_t s = 0; s < r.seeds.size(); ++s) {
                for (const auto& [user, values] : r.per_user) {
                    auc << entry.baseline << ',' << r.seeds[s] << ',' << user << ','
                        << values.at(s) << '\n';
                }
            }
        }
        if (!auc) throw DataError("failed writing auc.csv");
    }

    if (any_online) {
        std::ofstream online(dir / "online.csv", std::ios::binary);
        if (!online) throw DataError("cannot open online.csv for writing");
        online.precision(17);
        online << "baseline,seed,metric,value\n";
        for (const ReportEntry& entry : entries) {
            if (!entry.online.has_value()) continue;
            const OnlineResult& r = *entry.online;
            for (std::size_t s = 0; s < r.seeds.size(); ++s) {
                const OnlineMetrics& m = r.per_seed[s];
                online << entry.baseline << ',' << r.seeds[s] << ",mean_reward," << m.mean_reward
                       << '\n';
                online << entry.baseline << ',' << r.seeds[s] << ",success_rate,"
                       << m.success_rate << '\n';
                online << entry.baseline << ',' << r.seeds[s] << ",mean_length," << m.mean_length
                       << '\n';
            }
        }
        if (!online) throw DataError("failed writing online.csv");
    }
}

}  // namespace petal
