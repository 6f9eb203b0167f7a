#pragma once

#include <iosfwd>

#include "petal/baselines.hpp"
#include "petal/config.hpp"
#include "petal/evaluation.hpp"

namespace petal {

// File layout under the config's directories. Everything downstream of
// gen-data addresses artifacts through these.
std::filesystem::path source_profile_path(const ExperimentConfig& config);
std::filesystem::path target_profile_path(const ExperimentConfig& config);
std::filesystem::path source_corpus_path(const ExperimentConfig& config);
std::filesystem::path target_train_path(const ExperimentConfig& config);
std::filesystem::path target_test_path(const ExperimentConfig& config);
std::filesystem::path source_checkpoint_path(const ExperimentConfig& config, BaselineKind kind);
std::filesystem::path target_checkpoint_path(const ExperimentConfig& config, BaselineKind kind,
                                             const std::string& user_id);

// The coffee ordering domain, with templates taken from the config's template
// file when it exists (gen-data writes the defaults there).
Domain load_domain(const ExperimentConfig& config);

// Untrained policy: Gaussian projection, zero weights. v comes from the
// domain vocabulary, padded up to model.v when that is larger.
PolicyParams fresh_init(const ExperimentConfig& config, const Vocabulary& vocab,
                        bool shared_preferences);

// "all" -> every baseline in report order; otherwise the single named kind.
std::vector<BaselineKind> baselines_for(const std::string& token);

// Profiles, templates, and the three logged corpora (source, target train,
// target test). Target test logs use the clean script mix.
void cmd_gen_data(const ExperimentConfig& config);

// Source-stage checkpoint for one baseline. PETAL trains per-user
// preferences over a shared core; All and PriorAll train the pooled policy;
// the remaining kinds store the fresh initialization (their source stage
// depends on the target user and runs during transfer).
void cmd_train_source(const ExperimentConfig& config, BaselineKind kind);

// Per-target-user checkpoints for one baseline.
void cmd_transfer(const ExperimentConfig& config, BaselineKind kind);

// Reply ranking on the target test corpus; writes auc.csv and returns the
// entries for inspection.
std::vector<ReportEntry> cmd_eval_offline(const ExperimentConfig& config,
                                          const std::vector<BaselineKind>& kinds);

// Greedy simulated episodes per target user; writes online.csv.
std::vector<ReportEntry> cmd_eval_online(const ExperimentConfig& config,
                                         const std::vector<BaselineKind>& kinds);

// Line-oriented REPL against a trained checkpoint: each input line gets one
// greedy reply; `/reset` clears the history; `/quit` (or EOF) ends the
// session. Returns the process exit code.
int cmd_chat(const ExperimentConfig& config, const std::filesystem::path& checkpoint_path,
             const std::string& user_id, std::istream& in, std::ostream& out);

}  // namespace petal
