#include <doctest.h>

#include "petal/config.hpp"

#include <filesystem>
#include <fstream>

using namespace petal;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("an empty config text yields the documented defaults") {
    ExperimentConfig c = parse_config("");
    CHECK(c.train.alpha == 0.0001);
    CHECK(c.train.gamma == 0.9);
    CHECK(c.train.xi == 0.8);
    CHECK(c.train.epochs == 1);
    CHECK(c.train.eta_base == 0.2);
    CHECK(c.train.eta_decay == 1000.0);
    CHECK_FALSE(c.train.residual_gradients);
    CHECK_FALSE(c.train.freeze_shared);
    CHECK(c.layout.n_source_users == 11);
    CHECK(c.layout.n_target_users == 5);
    CHECK(c.layout.source_dialogues == 5000);
    CHECK(c.layout.target_train_dialogues == 20);
    CHECK(c.layout.target_test_dialogues == 300);
    CHECK(c.layout.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(c.baseline.kind == "PETAL");
    CHECK(c.baseline.prior_lambda == 0.01);
    CHECK(c.baseline.bandit_budget == 16);
    CHECK(c.sim.rho == 0.8);
    CHECK(c.sim.max_turns == 20);
    CHECK(c.sim.ask_all_weight == 0.5);
    CHECK(c.sim.wrong_roster_prob == 0.5);
    CHECK(c.sim.test_wrong_roster_prob == 0.0);
    CHECK(c.model.d == 50);
    CHECK(c.model.v == 0);
    CHECK(c.model.init_std == 0.1);
    CHECK(c.rewards.confirm == 0.3);
    CHECK(c.rewards.decline == -0.2);
    CHECK(c.rewards.inform == 0.1);
    CHECK(c.rewards.payment == 1.0);
    CHECK(c.rewards.per_turn == -0.05);
    CHECK(c.rewards.illogical == -0.2);
    CHECK(c.eval.episodes_per_user == 60);
}

TEST_CASE("serialize and parse are inverse down to the byte") {
    ExperimentConfig c;
    c.train.alpha = 0.0125;
    c.train.epochs = 7;
    c.train.residual_gradients = true;
    c.layout.seeds = {42, 7, 9001};
    c.baseline.kind = "PriorSim";
    c.paths.corpus_dir = "/tmp/somewhere/else";
    c.sim.rho = 0.65;
    c.model.v = 2000;
    c.rewards.payment = 2.5;

    const std::string text = serialize_config(c);
    ExperimentConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.train.alpha == c.train.alpha);
    CHECK(back.layout.seeds == c.layout.seeds);
    CHECK(back.baseline.kind == c.baseline.kind);
    CHECK(back.paths.corpus_dir == c.paths.corpus_dir);
    CHECK(back.rewards.payment == c.rewards.payment);

    // Defaults round-trip too.
    CHECK(serialize_config(parse_config(serialize_config(ExperimentConfig{}))) ==
          serialize_config(ExperimentConfig{}));
}

TEST_CASE("parsing tolerates comments, blanks, and loose whitespace") {
    ExperimentConfig c = parse_config(
        "# a comment\n"
        "\n"
        "   train.alpha   =    0.5  \n"
        "\t# another\n"
        "sim.max_turns=9\n");
    CHECK(c.train.alpha == 0.5);
    CHECK(c.sim.max_turns == 9);
}

TEST_CASE("unknown keys and malformed lines name the offending line") {
    try {
        (void)parse_config("train.alpha = 0.1\ntrain.alphaa = 0.2\n");
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("train.alphaa") != std::string::npos);
        CHECK(what.find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_config("just words without an equals sign\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.alpha = not_a_number\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.epochs = 2.5\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.residual_gradients = yes\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("layout.seeds = 1,,2\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("layout.seeds = \n"), DataError);
}

TEST_CASE("validation rejects out-of-range values") {
    CHECK_THROWS_AS((void)parse_config("train.alpha = 0\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.alpha = -0.1\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.epochs = -1\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.gamma = 1.5\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("train.xi = -0.2\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("sim.rho = 2\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("sim.max_turns = 0\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("model.d = 0\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("model.v = -5\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("layout.n_target_users = 0\n"), DataError);
    CHECK_THROWS_AS((void)parse_config("eval.episodes_per_user = 0\n"), DataError);
}

TEST_CASE("config files load and save through the filesystem") {
    ExperimentConfig c;
    c.train.alpha = 0.025;
    c.layout.seeds = {11, 13};
    TempFile tmp("petal_config_test.cfg");
    save_config(c, tmp.path.string());
    ExperimentConfig back = load_config(tmp.path.string());
    CHECK(serialize_config(back) == serialize_config(c));
    CHECK_THROWS_AS((void)load_config("/nonexistent/petal.cfg"), DataError);
}

TEST_CASE("the config hash ignores storage paths but nothing else") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.paths.corpus_dir = "/an/entirely/different/place";
    b.paths.report_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));

    ExperimentConfig c;
    c.train.alpha = 0.0002;
    CHECK(config_hash(a) != config_hash(c));

    ExperimentConfig d;
    d.layout.seeds = {1, 2, 3, 4, 5, 6};
    CHECK(config_hash(a) != config_hash(d));

    ExperimentConfig e;
    e.rewards.payment = 1.25;
    CHECK(config_hash(a) != config_hash(e));
}

TEST_CASE("sim and script-mix plumbing copies the configured knobs") {
    ExperimentConfig c;
    c.sim.rho = 0.55;
    c.sim.max_turns = 12;
    c.sim.ask_all_weight = 0.25;
    c.sim.wrong_roster_prob = 0.75;
    c.rewards.payment = 3.0;

    SimConfig sim = sim_config_of(c);
    CHECK(sim.rho == 0.55);
    CHECK(sim.max_turns == 12);
    CHECK(sim.rewards.payment == 3.0);

    ScriptMix mix = script_mix_of(c);
    CHECK(mix.ask_all_weight == 0.25);
    CHECK(mix.wrong_roster_prob == 0.75);
}
