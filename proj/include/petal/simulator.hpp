#pragma once

#include <functional>

#include "petal/learner.hpp"

namespace petal {

// Reward constants; defaults follow the schedule the model is trained
// against. confirm/decline are personal components, the rest general.
struct RewardSchedule {
    double confirm = 0.3;
    double decline = -0.2;
    double inform = 0.1;
    double payment = 1.0;
    double per_turn = -0.05;
    double illogical = -0.2;
};

struct SimConfig {
    double rho = 0.8;  // default preference-follow probability for new profiles
    int max_turns = 20;
    RewardSchedule rewards;
};

// preferences has one entry per choice set; nullopt means no preference.
struct UserProfile {
    std::string user_id;
    ChoiceAssignment preferences;
    double rho = 0.8;
};

// The value the simulated user wants this episode, per choice set.
using OrderIntent = std::vector<int>;

enum class ActType { Greet, AckInform, AskSlot, Suggest, RequestPayment };

struct DialogueAct {
    ActType type = ActType::Greet;
    int slot = -1;              // AskSlot only
    ChoiceAssignment proposal;  // Suggest only; at most one value per set
    bool roster = false;        // Suggest rendered via the "same as before" template

    static DialogueAct greet();
    static DialogueAct ack();
    static DialogueAct ask(int slot);
    static DialogueAct suggest(ChoiceAssignment proposal, bool roster = false);
    static DialogueAct request_payment();

    bool same_content(const DialogueAct& other) const;  // ignores the roster flag
};

// Act name -> token pattern. Placeholders are literal "{<set name>}" tokens
// (plus "{value}"/"{values}" in user patterns) and are substituted or dropped
// at render time.
struct Templates {
    std::map<std::string, std::vector<std::string>> patterns;

    const std::vector<std::string>& pattern(const std::string& name) const;
};

Templates default_templates(const std::vector<ChoiceSetDef>& sets);
void save_templates(const std::filesystem::path& path, const Templates& templates);
Templates load_templates(const std::filesystem::path& path);

// Static environment pieces: choice sets, the closed vocabulary over template
// words and choice values, and the surface templates.
struct Domain {
    std::vector<ChoiceSetDef> sets;
    Vocabulary vocab;
    ChoiceIndex choices;
    Templates templates;
};

// Validates that no static template word collides with a choice value (so
// Ask/Suggest surfaces round-trip through extract_proposed_choices) and
// builds the vocabulary.
Domain make_domain(std::vector<ChoiceSetDef> sets, Templates templates);

// The coffee-ordering domain: coffee_type, temperature, size, address.
Domain coffee_domain();

std::vector<std::string> render_act(const DialogueAct& act, const Domain& domain);

// Inverse of render_act over agent acts; nullopt when the tokens match no
// template rendering.
std::optional<DialogueAct> parse_act(const std::vector<std::string>& tokens,
                                     const Domain& domain);

OrderIntent sample_intent(const UserProfile& profile, const ChoiceIndex& choices,
                          std::mt19937_64& rng);

struct EpisodeState {
    int turn = 0;  // agent turns taken
    std::vector<int> delta;
    ChoiceAssignment agreed;
    std::vector<int> ask_counts;
    bool paid = false;
    double r_general = 0.0;
    double r_personal = 0.0;
    double r_total = 0.0;
};

// One simulated user on one episode. Candidate replies are deterministic in
// the episode state: greet, ack, an ask per set, every single-value Suggest
// over the still-open sets, each known roster projected onto the open sets,
// and the payment request.
// The fixed agent candidate menu for a given open-set pattern: greet, ack,
// one ask per set, every single-value suggestion over open sets, roster
// suggestions projected onto open sets (deduplicated), request payment.
std::vector<DialogueAct> candidate_acts_for(const Domain& domain, const std::vector<int>& delta,
                                            const std::vector<ChoiceAssignment>& rosters);

class CoffeeEnv : public DialogueEnv {
  public:
    CoffeeEnv(Domain domain, UserProfile profile, SimConfig config,
              std::vector<ChoiceAssignment> rosters);

    History reset(std::mt19937_64& rng) override;
    std::vector<Utterance> candidates() const override;
    void step(const Utterance& action, std::mt19937_64& rng) override;
    double last_reward() const override;
    const History& history() const override { return history_; }
    bool done() const override;

    // The next reset uses this intent instead of sampling one.
    void force_intent(OrderIntent intent);

    std::vector<DialogueAct> candidate_acts() const;
    const EpisodeState& state() const { return state_; }
    const OrderIntent& intent() const { return intent_; }
    const Domain& domain() const { return domain_; }
    const UserProfile& profile() const { return profile_; }
    const SimConfig& config() const { return config_; }
    const std::vector<double>& turn_rewards() const { return turn_rewards_; }

  private:
    Utterance utter(const std::vector<std::string>& tokens) const;
    Utterance react(const DialogueAct& act);  // applies rewards and state changes

    Domain domain_;
    UserProfile profile_;
    SimConfig config_;
    std::vector<ChoiceAssignment> rosters_;
    OrderIntent intent_;
    std::optional<OrderIntent> forced_intent_;
    EpisodeState state_;
    History history_;
    std::vector<double> turn_rewards_;
    double last_reward_ = 0.0;
    bool started_ = false;
};

struct EpisodeLog {
    Dialogue dialogue;  // per-turn total rewards filled in
    double total_reward = 0.0;
    bool success = false;  // paid and agreed values equal the intent
    int length = 0;        // agent turns
};

// Picks a candidate index given the live environment and its candidate list.
using PolicyFn = std::function<int(const CoffeeEnv&, const std::vector<Utterance>&)>;

EpisodeLog run_episode(CoffeeEnv& env, const PolicyFn& policy, std::mt19937_64& rng,
                       const OrderIntent* forced_intent = nullptr);

// Greedy argmax over q_total; used for evaluation (no exploration).
PolicyFn greedy_policy(const PolicyParams& params, const std::string& user_id);

// Scripted generators standing in for logged human agents.
PolicyFn ask_all_script();
// Suggests the roster (projected onto open sets) until nothing of it is left
// open, then asks the remaining open slots, then requests payment.
PolicyFn roster_script(ChoiceAssignment roster);

// Complete preference tuples available to an environment as "same as before"
// candidates, deduplicated in first-appearance order.
std::vector<ChoiceAssignment> known_rosters(const std::vector<UserProfile>& profiles);

struct ScriptMix {
    double ask_all_weight = 0.5;    // probability of the ask-all script
    double wrong_roster_prob = 0.5; // within the roster script: someone else's roster
};

// Logs n scripted episodes (profiles round-robin) with per-turn rewards.
Corpus generate_offline_corpus(const Domain& domain, const std::vector<UserProfile>& profiles,
                               const std::vector<ChoiceAssignment>& rosters,
                               const SimConfig& config, const ScriptMix& mix, int n_dialogues,
                               std::uint64_t seed);

// Random complete-preference profiles, pairwise distinct and distinct from
// every tuple in avoid; optionally appends one no-preference user.
std::vector<UserProfile> generate_profiles(const Domain& domain, int n_preferenced,
                                           bool include_no_preference, double rho,
                                           const std::string& id_prefix, std::uint64_t seed,
                                           const std::vector<ChoiceAssignment>& avoid = {});

void save_profiles(const std::filesystem::path& path, const std::vector<UserProfile>& profiles,
                   const ChoiceIndex& choices);
std::vector<UserProfile> load_profiles(const std::filesystem::path& path,
                                       const ChoiceIndex& choices);

}  // namespace petal
