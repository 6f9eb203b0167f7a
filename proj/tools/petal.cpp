#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "petal/driver.hpp"

namespace {

petal::ExperimentConfig resolve_config(const std::string& config_path, bool seed_given,
                                       std::uint64_t seed, const std::string& out_dir) {
    petal::ExperimentConfig config;
    if (!config_path.empty()) config = petal::load_config(config_path);
    if (seed_given) config.train.seed = seed;
    if (!out_dir.empty()) {
        const std::filesystem::path base(out_dir);
        config.paths.corpus_dir = (base / "corpora").string();
        config.paths.profile_dir = (base / "profiles").string();
        config.paths.template_file = (base / "templates.json").string();
        config.paths.checkpoint_dir = (base / "checkpoints").string();
        config.paths.report_dir = (base / "reports").string();
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized task-oriented dialogue policies: data generation, training, "
                 "transfer, evaluation, and chat"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    std::string baseline = "PETAL";
    app.add_option("--config", config_path, "Experiment config file (flat key = value)");
    app.add_option("--seed", seed, "Override train.seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--out", out_dir, "Root directory for generated artifacts");
    app.add_option("--baseline", baseline,
                   "Baseline kind (NoneTL, All, Sim, Bandit, PriorSim, PriorAll, PETAL) or "
                   "'all' to run every one");

    CLI::App* gen = app.add_subcommand("gen-data", "Generate profiles, templates and corpora");
    CLI::App* train_source =
        app.add_subcommand("train-source", "Train the source-stage model for a baseline");
    CLI::App* transfer =
        app.add_subcommand("transfer", "Adapt the source model to each target user");
    CLI::App* eval_offline =
        app.add_subcommand("eval-offline", "Reply-ranking evaluation on the test corpus");
    CLI::App* eval_online =
        app.add_subcommand("eval-online", "Simulated-dialogue evaluation per target user");
    CLI::App* chat = app.add_subcommand("chat", "Interactive session against a checkpoint");

    std::string chat_checkpoint;
    std::string chat_user;
    chat->add_option("checkpoint", chat_checkpoint, "Trained checkpoint file")->required();
    chat->add_option("user", chat_user, "User id whose preferences apply")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const petal::ExperimentConfig config =
            resolve_config(config_path, seed_given, seed, out_dir);

        if (gen->parsed()) {
            petal::cmd_gen_data(config);
        } else if (train_source->parsed()) {
            for (petal::BaselineKind kind : petal::baselines_for(baseline)) {
                petal::cmd_train_source(config, kind);
            }
        } else if (transfer->parsed()) {
            for (petal::BaselineKind kind : petal::baselines_for(baseline)) {
                petal::cmd_transfer(config, kind);
            }
        } else if (eval_offline->parsed()) {
            petal::cmd_eval_offline(config, petal::baselines_for(baseline));
        } else if (eval_online->parsed()) {
            petal::cmd_eval_online(config, petal::baselines_for(baseline));
        } else if (chat->parsed()) {
            return petal::cmd_chat(config, chat_checkpoint, chat_user, std::cin, std::cout);
        }
        return 0;
    } catch (const petal::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const petal::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
