// Acceptance gate. Each numbered criterion prints exactly one PASS/FAIL line;
// run with criterion indices as arguments, or with none for the full battery.
// Exit status is the number of failed criteria, capped at 1 for shells.

#include "petal/checkpoint.hpp"
#include "petal/driver.hpp"
#include "petal/transfer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace petal;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kIdentityTol = 1e-9;    // algebraic identities
constexpr double kGradientTol = 1e-4;    // relative error vs central differences
constexpr double kFdStep = 1e-5;
constexpr double kRewardTol = 1e-12;     // scripted episode totals
constexpr double kEtaTol = 1e-15;
constexpr double kTransferTol = 1e-12;   // shared-Q equality after transfer
constexpr double kNullBand = 0.05;       // random-policy AUC distance from 0.5
constexpr int kNullDraws = 10;           // independent random policies averaged for the null
constexpr double kSuccessMargin = 0.05;  // study success-rate gap
constexpr double kLengthMargin = 1.0;    // study dialogue-length gap (agent turns)
constexpr double kAucFloor = 0.55;
constexpr double kCaseStudyRate = 0.8;
constexpr double kStudyBudgetSeconds = 600.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

std::vector<std::string> random_tokens(const std::vector<std::string>& pool,
                                       std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<int> len(lo, hi);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<std::string> out;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) out.push_back(pool[pick(rng)]);
    return out;
}

// ---------------------------------------------------------------- C1

Outcome c1() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int d = 7;
    auto rand_row = [&](int n) {
        Eigen::RowVectorXd r(n);
        for (int k = 0; k < n; ++k) r(k) = gauss(rng);
        return r;
    };

    double worst_kron = 0.0;
    for (int i = 0; i < 100; ++i) {
        BeliefState b;
        b.o_hist = rand_row(d);
        b.o_cur = rand_row(d);
        b.a_hist = rand_row(d);
        b.a_last = rand_row(d);
        const Eigen::RowVectorXd a = rand_row(d);
        Eigen::MatrixXd w(d, 4 * d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < 4 * d; ++c) w(r, c) = gauss(rng);
        const double direct = q_general(b, a, w);
        const double via = kron(b.concat(), a).dot(vec_columnwise(w));
        worst_kron = std::max(worst_kron, std::abs(direct - via));
    }
    if (!(worst_kron < kIdentityTol)) {
        return {false, "Kronecker identity off by " + fmt(worst_kron)};
    }

    Vocabulary vocab({"a", "b", "c", "d", "e", "f", "g", "h"});
    const int v = vocab.size();
    const int bd = 5;
    const double xi = 0.8;
    const ProjectionMatrix m = gaussian_projection(v, bd, 0.3, 42);
    double worst_belief = 0.0;
    for (int length = 1; length <= 12; ++length) {
        History h;
        for (int k = 0; k < length; ++k)
            h.user.push_back(make_utterance(random_tokens(vocab.tokens(), rng, 1, 4), vocab));
        for (int k = 0; k + 1 < length; ++k)
            h.agent.push_back(make_utterance(random_tokens(vocab.tokens(), rng, 1, 4), vocab));

        const BeliefState inc = accumulate_history(h, m, xi).state;
        const int i = length - 1;
        Eigen::RowVectorXd o_hist = Eigen::RowVectorXd::Zero(bd);
        Eigen::RowVectorXd a_hist = Eigen::RowVectorXd::Zero(bd);
        Eigen::RowVectorXd a_last = Eigen::RowVectorXd::Zero(bd);
        for (int k = 0; k <= i - 1; ++k)
            o_hist += std::pow(xi, i - 1 - k) * project(h.user[k].bow, m);
        for (int k = 0; k <= i - 2; ++k)
            a_hist += std::pow(xi, i - 2 - k) * project(h.agent[k].bow, m);
        if (i >= 1) a_last = project(h.agent[i - 1].bow, m);
        const Eigen::RowVectorXd o_cur = project(h.user[i].bow, m);

        worst_belief = std::max({worst_belief,
                                 (inc.o_hist - o_hist).cwiseAbs().maxCoeff(),
                                 (inc.o_cur - o_cur).cwiseAbs().maxCoeff(),
                                 (inc.a_hist - a_hist).cwiseAbs().maxCoeff(),
                                 (inc.a_last - a_last).cwiseAbs().maxCoeff()});
    }
    if (!(worst_belief < kIdentityTol)) {
        return {false, "belief incremental-vs-batch off by " + fmt(worst_belief)};
    }

    const PolicyParams counted = PolicyParams::init(1500, 50, {5, 3, 3, 4}, 0.1, 1, 0.8);
    if (counted.general_parameter_count() != 85000) {
        return {false, "parameter count at d=50, v=1500 is " +
                           std::to_string(counted.general_parameter_count()) + ", want 85000"};
    }
    return {true, "kron err " + fmt(worst_kron) + ", belief err " + fmt(worst_belief) +
                      ", 4d^2+vd = 85000"};
}

// ---------------------------------------------------------------- C2

Outcome c2() {
    const std::vector<ChoiceSetDef> sets = {{"color", {"red", "blue"}},
                                            {"temp", {"hot", "iced"}}};
    const ChoiceIndex choices(sets);
    Vocabulary vocab(
        {"red", "blue", "hot", "iced", "um", "well", "lets", "see", "how", "about"});
    const std::vector<std::string> neutral = {"um", "well", "lets", "see"};
    const int v = vocab.size();
    const int d = 5;

    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 0.3);
    std::uniform_real_distribution<double> unif(0.2, 0.8);

    double worst = 0.0;
    std::string worst_group = "none";
    for (int inst = 0; inst < 50; ++inst) {
        PolicyParams params = PolicyParams::init(v, d, choices.set_sizes(), 0.3,
                                                 100 + static_cast<std::uint64_t>(inst), 0.8);
        for (int r = 0; r < params.W.rows(); ++r)
            for (int c = 0; c < params.W.cols(); ++c) params.W(r, c) = gauss(rng);
        params.w_p = unif(rng);
        PersonalPreferences& prefs = params.prefs_for("u");
        for (Eigen::VectorXd& l : prefs.logits)
            for (int c = 0; c < l.size(); ++c) l(c) = gauss(rng);

        History h;
        const int turns = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < turns; ++k)
            h.user.push_back(make_utterance(random_tokens(neutral, rng, 1, 3), vocab));
        for (int k = 0; k + 1 < turns; ++k)
            h.agent.push_back(make_utterance(random_tokens(neutral, rng, 1, 3), vocab));
        const Utterance reply = make_utterance({"how", "about", "red", "hot"}, vocab);

        const QGrad grad = grad_q(h, reply, params, "u", choices);
        auto q_of = [&](const PolicyParams& p) { return q_total(h, reply, p, "u", choices); };
        auto probe = [&](double analytic, auto&& bump, const char* group) {
            PolicyParams plus = params;
            bump(plus, kFdStep);
            PolicyParams minus = params;
            bump(minus, -kFdStep);
            const double fd = (q_of(plus) - q_of(minus)) / (2.0 * kFdStep);
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            const double rel = std::abs(fd - analytic) / denom;
            if (rel > worst) {
                worst = rel;
                worst_group = group;
            }
        };

        probe(grad.dwp, [](PolicyParams& p, double step) { p.w_p += step; }, "w_p");
        for (int t = 0; t < 10; ++t) {
            const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
            const int c = static_cast<int>(rng() % static_cast<std::uint64_t>(4 * d));
            probe(grad.dW(r, c),
                  [r, c](PolicyParams& p, double step) { p.W(r, c) += step; }, "W");
        }
        for (int t = 0; t < 10; ++t) {
            const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
            const int c = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
            probe(grad.dM(r, c),
                  [r, c](PolicyParams& p, double step) { p.M(r, c) += step; }, "M");
        }
        for (std::size_t j = 0; j < grad.dlogits.size(); ++j) {
            if (grad.dlogits[j].size() == 0) continue;
            for (int c = 0; c < grad.dlogits[j].size(); ++c) {
                probe(grad.dlogits[j](c),
                      [j, c](PolicyParams& p, double step) {
                          p.prefs_for("u").logits[j](c) += step;
                      },
                      "logits");
            }
        }
    }
    const bool ok = worst < kGradientTol;
    return {ok, "max relative error " + fmt(worst) + " (group " + worst_group + ")"};
}

// ---------------------------------------------------------------- C3

Outcome c3() {
    const Domain domain = coffee_domain();
    const int n = domain.choices.num_sets();
    UserProfile profile;
    profile.user_id = "u0";
    profile.rho = 1.0;
    profile.preferences.assign(n, std::nullopt);
    ChoiceAssignment roster(n);
    OrderIntent intent(n);
    for (int j = 0; j < n; ++j) {
        profile.preferences[j] = 0;
        roster[j] = 0;
        intent[j] = 0;
    }
    const SimConfig sim;

    CoffeeEnv ask_env(domain, profile, sim, {roster});
    std::mt19937_64 rng1(1);
    const EpisodeLog ask = run_episode(ask_env, ask_all_script(), rng1, &intent);
    if (!(std::abs(ask.total_reward - 1.15) < kRewardTol && ask.length == 5 && ask.success)) {
        return {false, "ask-all episode total " + fmt(ask.total_reward) + " over " +
                           std::to_string(ask.length) + " turns, want 1.15 over 5"};
    }

    CoffeeEnv sug_env(domain, profile, sim, {roster});
    std::mt19937_64 rng2(2);
    const EpisodeLog sug = run_episode(sug_env, roster_script(roster), rng2, &intent);
    if (!(std::abs(sug.total_reward - 1.60) < kRewardTol && sug.length == 2 && sug.success)) {
        return {false, "suggest-then-pay episode total " + fmt(sug.total_reward) + " over " +
                           std::to_string(sug.length) + " turns, want 1.60 over 2"};
    }
    return {true, "ask-all 1.15 in 5 turns, suggest-then-pay 1.60 in 2 turns (exact)"};
}

// ---------------------------------------------------------------- C4

Outcome c4() {
    if (exploration_rate(0.0) != 0.2) {
        return {false, "eta(0) = " + fmt(exploration_rate(0.0)) + ", want 0.2"};
    }
    const double at_decay = exploration_rate(1000.0);
    if (!(std::abs(at_decay - 0.2 / std::exp(1.0)) < kEtaTol)) {
        return {false, "eta(1000) = " + fmt(at_decay) + ", want 0.2/e"};
    }
    for (int beta = 0; beta < 5000; ++beta) {
        if (!(exploration_rate(beta + 1.0) < exploration_rate(beta))) {
            return {false, "eta not strictly decreasing at beta = " + std::to_string(beta)};
        }
    }
    return {true, "eta(0) = 0.2, eta(1000) = 0.2/e, strictly decreasing"};
}

// ---------------------------------------------------------------- C5

Outcome c5() {
    const Domain domain = coffee_domain();
    const ChoiceIndex& choices = domain.choices;
    const std::vector<UserProfile> source_profiles =
        generate_profiles(domain, 3, true, 0.8, "s_", 11);
    const std::vector<ChoiceAssignment> source_rosters = known_rosters(source_profiles);
    const std::vector<UserProfile> target_profiles =
        generate_profiles(domain, 2, false, 0.8, "t_", 12, source_rosters);

    std::vector<UserProfile> everyone = source_profiles;
    everyone.insert(everyone.end(), target_profiles.begin(), target_profiles.end());
    const std::vector<ChoiceAssignment> rosters = known_rosters(everyone);

    const SimConfig sim;
    const ScriptMix mix;
    const Corpus source =
        generate_offline_corpus(domain, source_profiles, source_rosters, sim, mix, 80, 21);
    const Corpus target =
        generate_offline_corpus(domain, target_profiles, rosters, sim, mix, 10, 22);

    TrainConfig tc;
    tc.alpha = 0.005;
    tc.epochs = 1;
    const PolicyParams init = PolicyParams::init(domain.vocab.size(), 12, choices.set_sizes(),
                                                 0.1, 3, 0.8);
    const SourceModel model = train_source_model(source, init, tc, choices);

    TrainConfig frozen = tc;
    frozen.epochs = 0;  // pre-adaptation snapshot
    const PolicyParams transferred = transfer_to_target(target, model, frozen, choices);

    auto qg_of = [](const PolicyParams& p, const History& h, const Utterance& reply) {
        const BeliefState b = accumulate_history(h, p.M, p.xi).state;
        const Eigen::RowVectorXd a = project(reply.bow, p.M);
        return q_general(b, a, p.W);
    };

    std::mt19937_64 rng(9);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        History h;
        const int turns = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < turns; ++k)
            h.user.push_back(
                make_utterance(random_tokens(domain.vocab.tokens(), rng, 1, 5), domain.vocab));
        for (int k = 0; k + 1 < turns; ++k)
            h.agent.push_back(
                make_utterance(random_tokens(domain.vocab.tokens(), rng, 1, 5), domain.vocab));
        const Utterance reply =
            make_utterance(random_tokens(domain.vocab.tokens(), rng, 1, 5), domain.vocab);
        worst = std::max(worst, std::abs(qg_of(model.params, h, reply) -
                                         qg_of(transferred, h, reply)));
    }
    if (!(worst < kTransferTol)) {
        return {false, "post-transfer q_general differs by " + fmt(worst)};
    }

    if (!transferred.prefs.empty()) {
        return {false, "transferred policy carries " +
                           std::to_string(transferred.prefs.size()) +
                           " preference bundles, want none"};
    }
    for (const UserProfile& p : everyone) {
        if (transferred.find_prefs(p.user_id) != nullptr) {
            return {false, "preference bundle for " + p.user_id + " leaked through transfer"};
        }
    }
    for (const UserProfile& p : target_profiles) {
        for (int j = 0; j < choices.num_sets(); ++j) {
            const int size = static_cast<int>(choices.sets()[j].values.size());
            for (int c = 0; c < size; ++c) {
                const double prob = transferred.pref_prob(p.user_id, j, c);
                if (std::abs(prob - 1.0 / size) > kTransferTol) {
                    return {false, "target preference not uniform: p(" + p.user_id + "," +
                                       std::to_string(j) + "," + std::to_string(c) +
                                       ") = " + fmt(prob)};
                }
            }
        }
    }
    return {true, "shared Q identical (max diff " + fmt(worst) +
                      "), target prefs uniform, source logits not copied"};
}

// ---------------------------------------------------------------- shared study plumbing

ExperimentConfig desk_config(const fs::path& root) {
    ExperimentConfig c;  // layout/sim/model/eval defaults are the study protocol
    c.paths.corpus_dir = (root / "corpora").string();
    c.paths.profile_dir = (root / "profiles").string();
    c.paths.template_file = (root / "templates.json").string();
    c.paths.checkpoint_dir = (root / "ckpt").string();
    c.paths.report_dir = (root / "report").string();
    c.train.alpha = 0.005;
    c.train.epochs = 15;
    c.train.seed = 5;
    return c;
}

void build_policies(const ExperimentConfig& config, const std::vector<BaselineKind>& kinds) {
    cmd_gen_data(config);
    for (BaselineKind kind : kinds) {
        cmd_train_source(config, kind);
        cmd_transfer(config, kind);
    }
}

// ---------------------------------------------------------------- C6

Outcome c6() {
    const auto start = std::chrono::steady_clock::now();
    const fs::path root = fs::temp_directory_path() / "petal_acceptance_c6";
    fs::remove_all(root);
    const ExperimentConfig config = desk_config(root);
    const std::vector<BaselineKind> kinds = {BaselineKind::PETAL, BaselineKind::All,
                                             BaselineKind::NoneTL};
    build_policies(config, kinds);
    const std::vector<ReportEntry> entries = cmd_eval_online(config, kinds);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const OnlineMetrics petal = entries[0].online->mean;
    const OnlineMetrics all = entries[1].online->mean;
    const OnlineMetrics none = entries[2].online->mean;

    const bool reward_order =
        petal.mean_reward > all.mean_reward && all.mean_reward > none.mean_reward;
    const bool success_gap = petal.success_rate >= all.success_rate + kSuccessMargin;
    const bool length_gap = petal.mean_length <= all.mean_length - kLengthMargin;
    const bool in_budget = elapsed < kStudyBudgetSeconds;

    std::ostringstream detail;
    detail << "reward P/A/N " << fmt(petal.mean_reward) << "/" << fmt(all.mean_reward) << "/"
           << fmt(none.mean_reward) << ", success P/A " << fmt(petal.success_rate) << "/"
           << fmt(all.success_rate) << ", length P/A " << fmt(petal.mean_length) << "/"
           << fmt(all.mean_length) << ", " << fmt(elapsed) << "s";
    return {reward_order && success_gap && length_gap && in_budget, detail.str()};
}

// ---------------------------------------------------------------- C7

Outcome c7() {
    const fs::path root = fs::temp_directory_path() / "petal_acceptance_c7";
    fs::remove_all(root);
    const ExperimentConfig config = desk_config(root);
    build_policies(config, {BaselineKind::PETAL, BaselineKind::All});

    const Domain domain = load_domain(config);
    const int n = domain.choices.num_sets();
    const std::vector<UserProfile> source_profiles =
        load_profiles(source_profile_path(config), domain.choices);
    const std::vector<UserProfile> target_profiles =
        load_profiles(target_profile_path(config), domain.choices);
    std::vector<UserProfile> everyone = source_profiles;
    everyone.insert(everyone.end(), target_profiles.begin(), target_profiles.end());
    const std::vector<ChoiceAssignment> rosters = known_rosters(everyone);
    const SimConfig sim = sim_config_of(config);

    int trials = 0;
    int good = 0;
    int petal_good = 0;
    int all_good = 0;
    for (const UserProfile& user : target_profiles) {
        const PolicyParams petal =
            load_checkpoint(target_checkpoint_path(config, BaselineKind::PETAL, user.user_id))
                .params;
        const PolicyParams all =
            load_checkpoint(target_checkpoint_path(config, BaselineKind::All, user.user_id))
                .params;
        OrderIntent intent(n);
        for (int j = 0; j < n; ++j) intent[j] = *user.preferences[j];

        for (std::uint64_t seed : config.layout.seeds) {
            ++trials;

            CoffeeEnv petal_env(domain, user, sim, rosters);
            std::mt19937_64 petal_rng(hash_stream(seed, user.user_id, 101, 0));
            const EpisodeLog lp =
                run_episode(petal_env, greedy_policy(petal, user.user_id), petal_rng, &intent);
            bool petal_ok = lp.success && lp.length <= 3 && !lp.dialogue.turns.empty();
            if (petal_ok) {
                const std::optional<DialogueAct> act =
                    parse_act(lp.dialogue.turns[0].agent.tokens, domain);
                petal_ok = act.has_value() && act->type == ActType::Suggest &&
                           static_cast<int>(act->proposal.size()) == n;
                if (petal_ok) {
                    for (int j = 0; j < n; ++j) {
                        petal_ok = petal_ok && act->proposal[j].has_value() &&
                                   *act->proposal[j] == intent[j];
                    }
                }
            }

            CoffeeEnv all_env(domain, user, sim, rosters);
            std::mt19937_64 all_rng(hash_stream(seed, user.user_id, 102, 0));
            const EpisodeLog la =
                run_episode(all_env, greedy_policy(all, user.user_id), all_rng, &intent);
            std::set<int> asked;
            for (const Turn& turn : la.dialogue.turns) {
                const std::optional<DialogueAct> act = parse_act(turn.agent.tokens, domain);
                if (act.has_value() && act->type == ActType::AskSlot) asked.insert(act->slot);
            }
            const bool all_ok = la.length >= 5 && static_cast<int>(asked.size()) == n;

            if (petal_ok) ++petal_good;
            if (all_ok) ++all_good;
            if (petal_ok && all_ok) ++good;
        }
    }
    const double rate = trials > 0 ? static_cast<double>(good) / trials : 0.0;
    std::ostringstream detail;
    detail << good << "/" << trials << " trials show the full pattern (suggest-side " << petal_good
           << "/" << trials << ", ask-side " << all_good << "/" << trials << ")";
    return {rate >= kCaseStudyRate, detail.str()};
}

// ---------------------------------------------------------------- C8

Outcome c8() {
    const fs::path root = fs::temp_directory_path() / "petal_acceptance_c8";
    fs::remove_all(root);
    const ExperimentConfig config = desk_config(root);
    build_policies(config, {BaselineKind::PETAL, BaselineKind::All});
    const std::vector<ReportEntry> entries =
        cmd_eval_offline(config, {BaselineKind::PETAL, BaselineKind::All});
    const AucResult& petal = *entries[0].auc;
    const AucResult& all = *entries[1].auc;

    // Null distribution: policies whose scores carry no learned signal (general
    // weights drawn at random, personal term off).  A single draw has correlated
    // per-corpus noise, so average several independent draws.
    const Corpus test = load_corpus(target_test_path(config).string());
    const ChoiceIndex choices(test.choice_sets);
    double null_sum = 0.0;
    double null_sq = 0.0;
    for (int draw = 0; draw < kNullDraws; ++draw) {
        PolicyParams random_policy =
            PolicyParams::init(test.vocabulary.size(), config.model.d, choices.set_sizes(),
                               config.model.init_std, 99 + draw, config.train.xi);
        std::mt19937_64 wrng(990 + draw);
        std::normal_distribution<double> gauss(0.0, 0.1);
        for (int r = 0; r < random_policy.W.rows(); ++r)
            for (int c = 0; c < random_policy.W.cols(); ++c) random_policy.W(r, c) = gauss(wrng);
        random_policy.w_p = 0.0;
        const double mean = auc_evaluate(random_policy, test, config.layout.seeds, choices).mean;
        null_sum += mean;
        null_sq += mean * mean;
    }
    const double null_mean = null_sum / kNullDraws;
    const double null_std = std::sqrt(std::max(0.0, null_sq / kNullDraws - null_mean * null_mean));

    const bool order = petal.mean > all.mean && all.mean > kAucFloor;
    const bool null_ok = std::abs(null_mean - 0.5) <= kNullBand;
    std::ostringstream detail;
    detail << "AUC PETAL " << fmt(petal.mean) << "+/-" << fmt(petal.stddev) << ", All "
           << fmt(all.mean) << "+/-" << fmt(all.stddev) << ", random " << fmt(null_mean)
           << "+/-" << fmt(null_std);
    return {order && null_ok, detail.str()};
}

// ---------------------------------------------------------------- C9

ExperimentConfig tiny_config(const fs::path& root) {
    ExperimentConfig c;
    c.paths.corpus_dir = (root / "corpora").string();
    c.paths.profile_dir = (root / "profiles").string();
    c.paths.template_file = (root / "templates.json").string();
    c.paths.checkpoint_dir = (root / "ckpt").string();
    c.paths.report_dir = (root / "report").string();
    c.train.alpha = 0.005;
    c.train.epochs = 1;
    c.train.seed = 5;
    c.layout.n_source_users = 3;
    c.layout.n_target_users = 2;
    c.layout.source_dialogues = 40;
    c.layout.target_train_dialogues = 4;
    c.layout.target_test_dialogues = 6;
    c.layout.seeds = {1, 2};
    c.sim.max_turns = 8;
    c.model.d = 8;
    c.eval.episodes_per_user = 2;
    return c;
}

Outcome c9() {
    auto run_all = [](const fs::path& root) {
        const ExperimentConfig config = tiny_config(root);
        const std::vector<BaselineKind> kinds = baselines_for("all");
        cmd_gen_data(config);
        for (BaselineKind kind : kinds) {
            cmd_train_source(config, kind);
            cmd_transfer(config, kind);
        }
        (void)cmd_eval_offline(config, kinds);
        (void)cmd_eval_online(config, kinds);
    };

    const fs::path root_a = fs::temp_directory_path() / "petal_acceptance_c9a";
    const fs::path root_b = fs::temp_directory_path() / "petal_acceptance_c9b";
    fs::remove_all(root_a);
    fs::remove_all(root_b);
    run_all(root_a);
    run_all(root_b);

    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };

    int files = 0;
    for (const fs::directory_entry& entry : fs::recursive_directory_iterator(root_a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const fs::path rel = fs::relative(entry.path(), root_a);
        const fs::path twin = root_b / rel;
        if (!fs::exists(twin)) {
            return {false, rel.string() + " missing from the second run"};
        }
        if (slurp(entry.path()) != slurp(twin)) {
            return {false, rel.string() + " differs between identical runs"};
        }
    }
    int files_b = 0;
    for (const fs::directory_entry& entry : fs::recursive_directory_iterator(root_b)) {
        if (entry.is_regular_file()) ++files_b;
    }
    if (files == 0 || files != files_b) {
        return {false, "artifact counts differ: " + std::to_string(files) + " vs " +
                           std::to_string(files_b)};
    }
    return {true, std::to_string(files) +
                      " artifacts byte-identical across two runs (every stage, all baselines)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    using Criterion = Outcome (*)();
    const Criterion criteria[9] = {c1, c2, c3, c4, c5, c6, c7, c8, c9};

    int failures = 0;
    for (int k : which) {
        if (k < 1 || k > 9) {
            std::cout << "C" << k << " FAIL - no such criterion\n";
            ++failures;
            continue;
        }
        Outcome outcome;
        try {
            outcome = criteria[k - 1]();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "C" << k << (outcome.pass ? " PASS" : " FAIL") << " - " << outcome.detail
                  << "\n";
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
