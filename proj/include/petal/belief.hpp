#pragma once

#include <Eigen/Dense>

#include "petal/corpus.hpp"

namespace petal {

// State projection matrix, shape v x d. Row r is the embedding of token r.
using ProjectionMatrix = Eigen::MatrixXd;

ProjectionMatrix gaussian_projection(int v, int d, double std_dev, std::uint64_t seed);

// Plain-text embedding file, one line per token: `token v_1 ... v_d`.
// Tokens missing from the file keep their seeded Gaussian row.
ProjectionMatrix load_projection(const std::string& path, const Vocabulary& vocab, int d,
                                 double fallback_std, std::uint64_t seed);

// Belief state at turn i: [o^h_{i-1}, o_i, a^h_{i-2}, a_{i-1}], each block
// of length d. Empty discounted sums are zero vectors.
struct BeliefState {
    Eigen::RowVectorXd o_hist;
    Eigen::RowVectorXd o_cur;
    Eigen::RowVectorXd a_hist;
    Eigen::RowVectorXd a_last;

    static BeliefState zero(int d);
    Eigen::RowVectorXd concat() const;  // length 4d
    int dim() const { return static_cast<int>(o_cur.size()); }
};

Eigen::RowVectorXd project(const BowVector& x, const ProjectionMatrix& m);

// Bag-of-words-space weights behind each belief block, kept alongside the
// projected vectors so gradients through M can be reconstructed. x0/x2 are
// the discounted sums of past user/agent bows; x1/x3 the current user bow
// and the last agent bow.
struct BeliefAccumulator {
    int v = 0;
    Eigen::VectorXd x0;  // length v
    Eigen::VectorXd x2;  // length v
    BowVector x1;
    BowVector x3;
    BeliefState state;
    int turn = -1;  // index i of the latest user utterance, -1 before O_0

    static BeliefAccumulator initial(int v, int d);

    // Advance from turn i-1 to i: fold the previous current-utterance and
    // last-reply blocks into the discounted histories with factor xi, then
    // install O_i and A_{i-1}. prev_agent must be null exactly at i = 0.
    void step(const BowVector& new_user, const BowVector* prev_agent,
              const ProjectionMatrix& m, double xi);
};

BeliefState belief_step(const BeliefState& prev, const BowVector& new_user,
                        const BowVector* prev_agent, const ProjectionMatrix& m, double xi);

BeliefAccumulator accumulate_history(const History& history, const ProjectionMatrix& m,
                                     double xi);

BeliefState belief_from_history(const History& history, const ProjectionMatrix& m, double xi);

}  // namespace petal
