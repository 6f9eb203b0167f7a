#include "petal/belief.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace petal {

ProjectionMatrix gaussian_projection(int v, int d, double std_dev, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std_dev);
    ProjectionMatrix m(v, d);
    for (int r = 0; r < v; ++r) {
        for (int c = 0; c < d; ++c) m(r, c) = normal(rng);
    }
    return m;
}

ProjectionMatrix load_projection(const std::string& path, const Vocabulary& vocab, int d,
                                 double fallback_std, std::uint64_t seed) {
    ProjectionMatrix m = gaussian_projection(vocab.size(), d, fallback_std, seed);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        auto row = vocab.find(token);
        Eigen::RowVectorXd values(d);
        for (int c = 0; c < d; ++c) {
            if (!(fields >> values(c))) {
                throw DataError("embedding line " + std::to_string(line_number) +
                                ": expected " + std::to_string(d) + " values for " + token);
            }
        }
        if (row) m.row(*row) = values;
    }
    return m;
}

BeliefState BeliefState::zero(int d) {
    BeliefState b;
    b.o_hist = Eigen::RowVectorXd::Zero(d);
    b.o_cur = Eigen::RowVectorXd::Zero(d);
    b.a_hist = Eigen::RowVectorXd::Zero(d);
    b.a_last = Eigen::RowVectorXd::Zero(d);
    return b;
}

Eigen::RowVectorXd BeliefState::concat() const {
    Eigen::RowVectorXd b(4 * dim());
    b << o_hist, o_cur, a_hist, a_last;
    return b;
}

Eigen::RowVectorXd project(const BowVector& x, const ProjectionMatrix& m) {
    if (x.v != m.rows()) throw DataError("bow/projection shape mismatch");
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(m.cols());
    for (int k : x.indices) out += m.row(k);
    return out;
}

BeliefAccumulator BeliefAccumulator::initial(int v, int d) {
    BeliefAccumulator acc;
    acc.v = v;
    acc.x0 = Eigen::VectorXd::Zero(v);
    acc.x2 = Eigen::VectorXd::Zero(v);
    acc.x1.v = v;
    acc.x3.v = v;
    acc.state = BeliefState::zero(d);
    return acc;
}

void BeliefAccumulator::step(const BowVector& new_user, const BowVector* prev_agent,
                             const ProjectionMatrix& m, double xi) {
    if (turn < 0) {
        if (prev_agent != nullptr) throw DataError("first belief step cannot have an agent reply");
        x1 = new_user;
        x3 = BowVector{v, {}};
        state.o_cur = project(new_user, m);
        turn = 0;
        return;
    }
    if (prev_agent == nullptr) throw DataError("belief step after turn 0 needs the agent reply");

    // o^h_{i-1} = xi * o^h_{i-2} + o_{i-1};  a^h_{i-2} = xi * a^h_{i-3} + a_{i-2}
    x0 *= xi;
    for (int k : x1.indices) x0(k) += 1.0;
    x2 *= xi;
    for (int k : x3.indices) x2(k) += 1.0;
    state.o_hist = xi * state.o_hist + state.o_cur;
    state.a_hist = xi * state.a_hist + state.a_last;

    x1 = new_user;
    x3 = *prev_agent;
    state.o_cur = project(new_user, m);
    state.a_last = project(*prev_agent, m);
    ++turn;
}

BeliefState belief_step(const BeliefState& prev, const BowVector& new_user,
                        const BowVector* prev_agent, const ProjectionMatrix& m, double xi) {
    BeliefState next;
    if (prev_agent == nullptr) {
        next = BeliefState::zero(static_cast<int>(m.cols()));
        next.o_cur = project(new_user, m);
        return next;
    }
    next.o_hist = xi * prev.o_hist + prev.o_cur;
    next.o_cur = project(new_user, m);
    next.a_hist = xi * prev.a_hist + prev.a_last;
    next.a_last = project(*prev_agent, m);
    return next;
}

BeliefAccumulator accumulate_history(const History& history, const ProjectionMatrix& m,
                                     double xi) {
    if (history.user.empty()) throw DataError("history has no user utterance");
    if (history.agent.size() + 1 != history.user.size()) {
        throw DataError("history must alternate user/agent with a trailing user utterance");
    }
    BeliefAccumulator acc =
        BeliefAccumulator::initial(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (size_t i = 0; i < history.user.size(); ++i) {
        const BowVector* prev_agent = (i == 0) ? nullptr : &history.agent[i - 1].bow;
        acc.step(history.user[i].bow, prev_agent, m, xi);
    }
    return acc;
}

BeliefState belief_from_history(const History& history, const ProjectionMatrix& m, double xi) {
    return accumulate_history(history, m, xi).state;
}

}  // namespace petal
