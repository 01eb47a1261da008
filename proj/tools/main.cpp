// Command-line front end for the SRS positioning pipeline. Every
// subcommand reads and writes the artifact directory given by --out, so
// stages can be run one at a time or all at once with `run`.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srsgroup/evaluation.hpp"

using namespace srsgroup;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string scenario = "los";
    std::string out = "artifacts";
    std::string profile;
    std::optional<std::uint64_t> seed;
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--config", args.config_path, "experiment config JSON (default: built-in)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--scenario", args.scenario, "built-in config to start from")
        ->check(CLI::IsMember({"los", "nlos"}));
    cmd->add_option("--out", args.out, "artifact directory");
    cmd->add_option("--seed", args.seed, "override the master seed");
    cmd->add_option("--profile", args.profile, "training profile")
        ->check(CLI::IsMember({"desk", "full"}));
    cmd->add_flag("--serial", args.serial, "disable OpenMP parallelism");
}

ExperimentConfig resolve_config(const CommonArgs& args)
{
    ExperimentConfig cfg = args.config_path.empty()
                               ? default_experiment(scenario_from_name(args.scenario))
                               : load_experiment_config(args.config_path);
    if (args.seed)
        cfg.seed = *args.seed;
    if (!args.profile.empty())
        apply_profile(cfg, args.profile);
    cfg.validate();
    return cfg;
}

std::string artifact(const CommonArgs& args, const std::string& name)
{
    return args.out + "/" + name;
}

void require_artifact(const CommonArgs& args, const std::string& name, const char* producer)
{
    if (!std::filesystem::exists(artifact(args, name)))
        throw std::runtime_error(name + " not found in " + args.out + " (run `" + producer +
                                 "` first)");
}

void split_from_disk(const CommonArgs& args, const ExperimentConfig& cfg,
                     std::vector<Snapshot>& train, std::vector<Snapshot>& test)
{
    require_artifact(args, "snapshots.csv", "preprocess");
    auto snaps = import_snapshots_csv(artifact(args, "snapshots.csv"));
    split_chronological(snaps, cfg.test_fraction, train, test);
}

void print_metrics(const std::string& variant, const std::vector<MetricsReport>& reports)
{
    for (const auto& r : reports)
        std::printf("  %-8s %-20s n=%-6d rmse_dist=%8.3f m  rmse_heading=%7.2f deg\n",
                    variant.c_str(), r.label.c_str(), r.n, r.rmse_dist, r.rmse_heading);
}

int cmd_simulate(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    std::filesystem::create_directories(args.out);
    auto tracks = stage_simulate(cfg);
    export_trajectories_csv(artifact(args, "trajectories.csv"), tracks);
    std::size_t poses = 0;
    for (const auto& t : tracks)
        poses += t.poses.size();
    std::printf("simulate: %zu users, %zu poses -> %s\n", tracks.size(), poses,
                artifact(args, "trajectories.csv").c_str());
    return 0;
}

int cmd_preprocess(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    require_artifact(args, "trajectories.csv", "simulate");
    auto tracks = import_trajectories_csv(artifact(args, "trajectories.csv"));
    auto snaps = stage_preprocess(cfg, tracks, !args.serial);
    export_snapshots_csv(artifact(args, "snapshots.csv"), snaps);
    std::printf("preprocess: %zu snapshots x %zu features -> %s\n", snaps.size(),
                snaps.empty() ? 0 : snaps.front().features.size(),
                artifact(args, "snapshots.csv").c_str());
    return 0;
}

int cmd_train(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    std::vector<Snapshot> train_snaps, test_snaps;
    split_from_disk(args, cfg, train_snaps, test_snaps);
    std::vector<double> losses;
    Positioner pos = stage_train(cfg, train_snaps, &losses);
    save_positioner(artifact(args, "model"), pos);
    CsvWriter out(artifact(args, "train_losses.csv"), {"epoch", "loss"});
    for (std::size_t i = 0; i < losses.size(); ++i)
        out.write_row({std::to_string(i), format_double(losses[i])});
    std::printf("train: %zu samples, %d epochs, loss %.6f -> %.6f, %zu parameters\n",
                train_snaps.size(), cfg.train.epochs, losses.front(), losses.back(),
                pos.model.parameter_count());
    return 0;
}

int cmd_predict(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    std::vector<Snapshot> train_snaps, test_snaps;
    split_from_disk(args, cfg, train_snaps, test_snaps);
    require_artifact(args, "model.json", "train");
    Positioner pos = load_positioner(artifact(args, "model"));
    auto preds = stage_predict(cfg, pos, test_snaps, !args.serial);
    auto smoothed = smooth_predictions(preds);
    export_predictions_csv(artifact(args, "predictions.csv"), preds);
    export_predictions_csv(artifact(args, "predictions_smoothed.csv"), smoothed);
    std::printf("predict: %zu test snapshots -> %s (+ smoothed)\n", preds.size(),
                artifact(args, "predictions.csv").c_str());
    return 0;
}

int cmd_cluster(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    require_artifact(args, "predictions_smoothed.csv", "predict");
    auto records = import_predictions_csv(artifact(args, "predictions_smoothed.csv"));
    for (const auto& params : cfg.clustering) {
        auto assigns = stage_cluster(cfg, params, records, !args.serial);
        const std::string name = assignments_filename(params);
        export_assignments_csv(artifact(args, name), assigns);
        std::printf("cluster: %s %s -> %zu instants -> %s\n", cluster_method_name(params.method),
                    format_double(params.eps_or_threshold()).c_str(), assigns.size(),
                    artifact(args, name).c_str());
    }
    return 0;
}

int cmd_evaluate(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    require_artifact(args, "predictions.csv", "predict");
    require_artifact(args, "predictions_smoothed.csv", "predict");
    auto preds = import_predictions_csv(artifact(args, "predictions.csv"));
    auto smoothed = import_predictions_csv(artifact(args, "predictions_smoothed.csv"));
    auto raw_m = metrics_by_pattern(preds, cfg.patterns);
    auto sm_m = metrics_by_pattern(smoothed, cfg.patterns);

    const std::string scen = scenario_name(cfg.scene.scenario);
    CsvWriter out(artifact(args, "metrics.csv"),
                  {"scenario", "variant", "pattern", "n", "rmse_x", "rmse_y", "rmse_dist",
                   "rmse_heading", "r2_x", "r2_y", "r2_heading"});
    append_metrics_csv(out, scen, "raw", raw_m);
    append_metrics_csv(out, scen, "smoothed", sm_m);
    export_cdf(artifact(args, "cdf_position_raw.csv"), position_errors(preds));
    export_cdf(artifact(args, "cdf_position_smoothed.csv"), position_errors(smoothed));
    export_cdf(artifact(args, "cdf_heading_raw.csv"), heading_errors(preds));
    export_cdf(artifact(args, "cdf_heading_smoothed.csv"), heading_errors(smoothed));

    std::printf("evaluate (%s):\n", scen.c_str());
    print_metrics("raw", raw_m);
    print_metrics("smoothed", sm_m);
    return 0;
}

int cmd_run(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    ExperimentResult res = run_experiment(cfg, args.out, !args.serial);
    std::printf("run %s: %d snapshots (%d train / %d test) -> %s\n", cfg.name.c_str(),
                res.n_snapshots, res.n_train, res.n_test, res.out_dir.c_str());
    print_metrics("raw", res.raw_metrics);
    print_metrics("smoothed", res.smoothed_metrics);
    return 0;
}

int cmd_config(const CommonArgs& args)
{
    ExperimentConfig cfg = resolve_config(args);
    std::printf("%s", experiment_config_to_json(cfg).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"beam-domain SRS positioning and user-grouping testbed"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(const CommonArgs&);
    };
    const Entry entries[] = {
        {"simulate", "generate user trajectories", cmd_simulate},
        {"preprocess", "synthesize channels and build amplitude snapshots", cmd_preprocess},
        {"train", "fit the position/heading regressor", cmd_train},
        {"predict", "run inference on the held-out tail", cmd_predict},
        {"cluster", "group users per time instant", cmd_cluster},
        {"evaluate", "compute metrics and error CDFs", cmd_evaluate},
        {"run", "full pipeline: simulate through evaluate", cmd_run},
        {"config", "print the resolved experiment config", cmd_config},
    };

    CommonArgs args;
    int rc = 0;
    for (const Entry& e : entries) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, args);
        cmd->callback([&rc, &args, fn = e.fn] { rc = fn(args); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
