#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace petal {

// Malformed or inconsistent input data (bad files, unknown tokens, ...).
// Mapped to exit code 2 by the CLI.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite numbers where finite ones are required. Exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Lowercases, strips punctuation and splits on whitespace.
std::vector<std::string> tokenize(const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens);

class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens);

    // Appends a token if unseen; returns its index either way.
    int add(const std::string& token);

    int index_of(const std::string& token) const;  // throws DataError if unknown
    std::optional<int> find(const std::string& token) const;
    const std::string& token_at(int index) const;
    bool contains(const std::string& token) const { return index_.count(token) > 0; }
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

// Binary bag-of-words over a fixed vocabulary, stored as the sorted list of
// set indices. Repetitions collapse to a single 1.
struct BowVector {
    int v = 0;
    std::vector<int> indices;  // sorted, unique, each in [0, v)

    bool operator==(const BowVector& other) const = default;
    std::vector<double> dense() const;
};

BowVector bow_encode(const std::vector<std::string>& tokens, const Vocabulary& vocab);

struct Utterance {
    std::vector<std::string> tokens;
    BowVector bow;
};

struct Turn {
    Utterance user;
    Utterance agent;
    std::optional<double> reward;  // total reward, present in logged corpora
};

struct Dialogue {
    std::string user_id;
    std::vector<Turn> turns;
};

// A slot the agent must fill, with its finite set of value tokens.
struct ChoiceSetDef {
    std::string name;
    std::vector<std::string> values;
};

// Reverse index from value token to (choice set, value position). Value
// tokens are disjoint across sets, so the mapping is unambiguous.
class ChoiceIndex {
  public:
    ChoiceIndex() = default;
    explicit ChoiceIndex(std::vector<ChoiceSetDef> sets);

    int num_sets() const { return static_cast<int>(sets_.size()); }
    const std::vector<ChoiceSetDef>& sets() const { return sets_; }
    const ChoiceSetDef& set(int j) const { return sets_.at(j); }
    int set_size(int j) const { return static_cast<int>(sets_.at(j).values.size()); }
    std::vector<int> set_sizes() const;

    // (set index, value index) for a value token, or nullopt for other tokens.
    std::optional<std::pair<int, int>> lookup(const std::string& token) const;
    const std::string& value_token(int set, int value) const;
    int set_index(const std::string& name) const;

  private:
    std::vector<ChoiceSetDef> sets_;
    std::unordered_map<std::string, std::pair<int, int>> by_token_;
};

// Per choice set, the chosen/proposed value index, if any.
using ChoiceAssignment = std::vector<std::optional<int>>;

// Dialogue history H_i: user utterances O_0..O_i and agent replies
// A_0..A_{i-1}, so user.size() == agent.size() + 1 when it is the agent's
// turn to reply.
struct History {
    std::vector<Utterance> user;
    std::vector<Utterance> agent;
};

struct Corpus {
    Vocabulary vocabulary;
    std::vector<ChoiceSetDef> choice_sets;
    std::vector<Dialogue> dialogues;
};

// The most recent value of each choice set mentioned in a user utterance,
// scanning utterances oldest to newest and tokens left to right. Agent
// replies never participate.
ChoiceAssignment detect_choices(const History& history, const ChoiceIndex& choices);

// delta(C_j, H) = 1 while the user has not yet fixed a value for set j.
std::vector<int> delta_indicators(const ChoiceAssignment& chosen);

// Value proposed for each choice set in a single agent reply. Two distinct
// values of one set in the same reply is an error.
ChoiceAssignment extract_proposed_choices(const std::vector<std::string>& reply_tokens,
                                          const ChoiceIndex& choices);

Utterance make_utterance(const std::vector<std::string>& tokens, const Vocabulary& vocab);

// History prefix for deciding turn i: O_0..O_i, A_0..A_{i-1}.
History history_at(const Dialogue& dialogue, int turn_index);

// JSONL corpus file. First line is a header object with "vocab" and
// "choice_sets"; each following line is one dialogue. When the header
// omits "vocab", the vocabulary is built in first-appearance order.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

}  // namespace petal
