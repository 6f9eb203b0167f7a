#include "petal/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace petal {

using json = nlohmann::ordered_json;

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || c == '_') {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
    for (auto& t : tokens) {
        if (index_.count(t) > 0) throw DataError("duplicate vocabulary token: " + t);
        index_.emplace(t, static_cast<int>(tokens_.size()));
        tokens_.push_back(std::move(t));
    }
}

int Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(token);
    return id;
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) throw DataError("token not in vocabulary: " + token);
    return it->second;
}

std::optional<int> Vocabulary::find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::token_at(int index) const {
    if (index < 0 || index >= size()) throw DataError("vocabulary index out of range");
    return tokens_[static_cast<size_t>(index)];
}

std::vector<double> BowVector::dense() const {
    std::vector<double> out(static_cast<size_t>(v), 0.0);
    for (int k : indices) out[static_cast<size_t>(k)] = 1.0;
    return out;
}

BowVector bow_encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    BowVector bow;
    bow.v = vocab.size();
    bow.indices.reserve(tokens.size());
    for (const auto& t : tokens) bow.indices.push_back(vocab.index_of(t));
    std::sort(bow.indices.begin(), bow.indices.end());
    bow.indices.erase(std::unique(bow.indices.begin(), bow.indices.end()), bow.indices.end());
    return bow;
}

ChoiceIndex::ChoiceIndex(std::vector<ChoiceSetDef> sets) : sets_(std::move(sets)) {
    for (int j = 0; j < num_sets(); ++j) {
        const auto& set = sets_[static_cast<size_t>(j)];
        if (set.values.empty()) throw DataError("choice set has no values: " + set.name);
        for (int k = 0; k < static_cast<int>(set.values.size()); ++k) {
            const auto& token = set.values[static_cast<size_t>(k)];
            auto [it, inserted] = by_token_.emplace(token, std::make_pair(j, k));
            if (!inserted) throw DataError("choice value token appears in two sets: " + token);
        }
    }
}

std::vector<int> ChoiceIndex::set_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(sets_.size());
    for (const auto& s : sets_) sizes.push_back(static_cast<int>(s.values.size()));
    return sizes;
}

std::optional<std::pair<int, int>> ChoiceIndex::lookup(const std::string& token) const {
    auto it = by_token_.find(token);
    if (it == by_token_.end()) return std::nullopt;
    return it->second;
}

const std::string& ChoiceIndex::value_token(int set, int value) const {
    return sets_.at(set).values.at(value);
}

int ChoiceIndex::set_index(const std::string& name) const {
    for (int j = 0; j < num_sets(); ++j) {
        if (sets_[static_cast<size_t>(j)].name == name) return j;
    }
    throw DataError("no such choice set: " + name);
}

ChoiceAssignment detect_choices(const History& history, const ChoiceIndex& choices) {
    ChoiceAssignment chosen(static_cast<size_t>(choices.num_sets()));
    for (const auto& utterance : history.user) {
        for (const auto& token : utterance.tokens) {
            if (auto hit = choices.lookup(token)) {
                chosen[static_cast<size_t>(hit->first)] = hit->second;
            }
        }
    }
    return chosen;
}

std::vector<int> delta_indicators(const ChoiceAssignment& chosen) {
    std::vector<int> delta(chosen.size());
    for (size_t j = 0; j < chosen.size(); ++j) delta[j] = chosen[j].has_value() ? 0 : 1;
    return delta;
}

ChoiceAssignment extract_proposed_choices(const std::vector<std::string>& reply_tokens,
                                          const ChoiceIndex& choices) {
    ChoiceAssignment proposed(static_cast<size_t>(choices.num_sets()));
    for (const auto& token : reply_tokens) {
        if (auto hit = choices.lookup(token)) {
            auto& slot = proposed[static_cast<size_t>(hit->first)];
            if (slot.has_value() && *slot != hit->second) {
                throw DataError("ambiguous proposal: reply contains two values of choice set " +
                                choices.set(hit->first).name);
            }
            slot = hit->second;
        }
    }
    return proposed;
}

Utterance make_utterance(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    Utterance u;
    u.tokens = tokens;
    u.bow = bow_encode(tokens, vocab);
    return u;
}

History history_at(const Dialogue& dialogue, int turn_index) {
    if (turn_index < 0 || turn_index >= static_cast<int>(dialogue.turns.size())) {
        throw DataError("turn index out of range");
    }
    History h;
    for (int k = 0; k <= turn_index; ++k) {
        h.user.push_back(dialogue.turns[static_cast<size_t>(k)].user);
        if (k < turn_index) h.agent.push_back(dialogue.turns[static_cast<size_t>(k)].agent);
    }
    return h;
}

namespace {

std::vector<std::string> to_token_list(const json& array, int line) {
    if (!array.is_array()) {
        throw DataError("line " + std::to_string(line) + ": expected a token array");
    }
    std::vector<std::string> tokens;
    for (const auto& item : array) {
        if (!item.is_string()) {
            throw DataError("line " + std::to_string(line) + ": token is not a string");
        }
        tokens.push_back(item.get<std::string>());
    }
    return tokens;
}

json parse_line(const std::string& line, int line_number) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);

    Corpus corpus;
    bool have_header = false;
    bool declared_vocab = false;
    std::vector<json> dialogue_records;
    std::vector<int> dialogue_lines;

    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record = parse_line(line, line_number);
        if (!record.is_object()) {
            throw DataError("line " + std::to_string(line_number) + ": expected a JSON object");
        }
        if (!have_header && (record.contains("vocab") || record.contains("choice_sets"))) {
            have_header = true;
            if (record.contains("vocab")) {
                corpus.vocabulary = Vocabulary(to_token_list(record["vocab"], line_number));
                declared_vocab = true;
            }
            if (record.contains("choice_sets")) {
                for (const auto& set : record["choice_sets"]) {
                    ChoiceSetDef def;
                    def.name = set.at("name").get<std::string>();
                    def.values = to_token_list(set.at("values"), line_number);
                    corpus.choice_sets.push_back(std::move(def));
                }
            }
            continue;
        }
        dialogue_records.push_back(std::move(record));
        dialogue_lines.push_back(line_number);
    }
    if (dialogue_records.empty()) throw DataError("no dialogues in corpus file: " + path);

    // First pass when no vocabulary was declared: tokens in first-appearance order.
    if (!declared_vocab) {
        for (size_t r = 0; r < dialogue_records.size(); ++r) {
            const auto& record = dialogue_records[r];
            for (const auto& turn : record.at("turns")) {
                for (const auto& t : to_token_list(turn.at("user"), dialogue_lines[r]))
                    corpus.vocabulary.add(t);
                for (const auto& t : to_token_list(turn.at("agent"), dialogue_lines[r]))
                    corpus.vocabulary.add(t);
            }
        }
    }

    for (size_t r = 0; r < dialogue_records.size(); ++r) {
        const auto& record = dialogue_records[r];
        int line_no = dialogue_lines[r];
        Dialogue dialogue;
        try {
            dialogue.user_id = record.at("user_id").get<std::string>();
            for (const auto& turn_json : record.at("turns")) {
                Turn turn;
                auto user_tokens = to_token_list(turn_json.at("user"), line_no);
                auto agent_tokens = to_token_list(turn_json.at("agent"), line_no);
                for (const auto& t : user_tokens) {
                    if (!corpus.vocabulary.contains(t)) {
                        throw DataError("line " + std::to_string(line_no) +
                                        ": token not in declared vocabulary: " + t);
                    }
                }
                for (const auto& t : agent_tokens) {
                    if (!corpus.vocabulary.contains(t)) {
                        throw DataError("line " + std::to_string(line_no) +
                                        ": token not in declared vocabulary: " + t);
                    }
                }
                turn.user = make_utterance(user_tokens, corpus.vocabulary);
                turn.agent = make_utterance(agent_tokens, corpus.vocabulary);
                if (turn_json.contains("reward") && !turn_json["reward"].is_null()) {
                    turn.reward = turn_json["reward"].get<double>();
                }
                dialogue.turns.push_back(std::move(turn));
            }
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (dialogue.turns.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": dialogue has no turns");
        }
        corpus.dialogues.push_back(std::move(dialogue));
    }

    for (const auto& set : corpus.choice_sets) {
        for (const auto& value : set.values) {
            if (!corpus.vocabulary.contains(value)) {
                throw DataError("choice value not in vocabulary: " + value);
            }
        }
    }
    ChoiceIndex validate_disjoint(corpus.choice_sets);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path);

    json header;
    header["vocab"] = corpus.vocabulary.tokens();
    header["choice_sets"] = json::array();
    for (const auto& set : corpus.choice_sets) {
        header["choice_sets"].push_back({{"name", set.name}, {"values", set.values}});
    }
    out << header.dump() << "\n";

    for (const auto& dialogue : corpus.dialogues) {
        json record;
        record["user_id"] = dialogue.user_id;
        record["turns"] = json::array();
        for (const auto& turn : dialogue.turns) {
            json t;
            t["user"] = turn.user.tokens;
            t["agent"] = turn.agent.tokens;
            t["reward"] = turn.reward.has_value() ? json(*turn.reward) : json(nullptr);
            record["turns"].push_back(std::move(t));
        }
        out << record.dump() << "\n";
    }
}

}  // namespace petal
