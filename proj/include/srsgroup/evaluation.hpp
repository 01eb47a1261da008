#ifndef SRSGROUP_EVALUATION_HPP
#define SRSGROUP_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "srsgroup/clustering.hpp"
#include "srsgroup/io.hpp"
#include "srsgroup/positioning.hpp"
#include "srsgroup/scene.hpp"

namespace srsgroup {

// Everything one experiment run depends on. The master seed drives every
// random stage (trajectory jitter, reflection phases, reception mask,
// receiver noise, weight init, shuffling); scene.rng_seed and train.seed
// are overridden with it so one knob reproduces the whole run.
struct ExperimentConfig {
    std::string name = "desk";
    ScenarioConfig scene;
    ArrayConfig array;
    std::vector<Pattern> patterns = all_patterns(); // one lap per entry, two users per lap
    double snr_db = 20.0;
    double p_miss = 0.1;
    int downsample_stride = 3;
    PositioningModelSpec model;
    TrainOptions train;
    double test_fraction = 0.2;
    NormalizationConfig normalization;
    std::vector<ClusterParams> clustering;
    std::uint64_t seed = 1;

    int n_users() const { return 2 * static_cast<int>(patterns.size()); }
    void validate() const; // throws std::invalid_argument
};

ExperimentConfig default_experiment(Scenario s);

// "desk" caps training at 50 epochs for quick turnaround; "full" runs the
// complete 200-epoch schedule.
void apply_profile(ExperimentConfig& cfg, std::string_view profile);

// Canonical JSON round-trip (sorted keys, fixed formatting) so equal
// configs serialize to equal bytes; the hash covers exactly that text.
std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);
void save_experiment_config(const std::string& path, const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct MetricsReport {
    std::string label = "all"; // pattern name, or "all" for the pooled row
    int n = 0;
    double rmse_x = 0.0;
    double rmse_y = 0.0;
    double rmse_dist = 0.0;    // 2-D Euclidean error
    double rmse_heading = 0.0; // degrees, wrapped difference
    double r2_x = 0.0;
    double r2_y = 0.0;
    double r2_heading = 0.0;
    bool r2_x_valid = false; // false when the truth has zero variance
    bool r2_y_valid = false;
    bool r2_heading_valid = false;
};

// Prediction/truth pairs come aligned inside each record. Heading R^2
// uses wrapped residuals against the spread of the raw truth angles.
MetricsReport compute_metrics(const std::vector<PredictionRecord>& records);

// One report per pattern (users 2k and 2k+1 belong to patterns[k]) plus
// the pooled "all" row.
std::vector<MetricsReport> metrics_by_pattern(const std::vector<PredictionRecord>& records,
                                              const std::vector<Pattern>& patterns);

void export_metrics_csv(const std::string& path, const std::string& scenario,
                        const std::string& variant, const std::vector<MetricsReport>& reports);
void append_metrics_csv(CsvWriter& out, const std::string& scenario, const std::string& variant,
                        const std::vector<MetricsReport>& reports);

// Empirical distribution: rows (error, k/n) over the sorted errors, last
// probability exactly 1.
void export_cdf(const std::string& path, std::vector<double> errors);

std::vector<double> position_errors(const std::vector<PredictionRecord>& records);
std::vector<double> heading_errors(const std::vector<PredictionRecord>& records);

// Pipeline stages. Each one is pure in-memory compute; run_experiment
// strings them together and persists the artifacts.
std::vector<UserTrack> stage_simulate(const ExperimentConfig& cfg);
std::vector<Snapshot> stage_preprocess(const ExperimentConfig& cfg,
                                       const std::vector<UserTrack>& tracks, bool parallel = true);
Positioner stage_train(const ExperimentConfig& cfg, const std::vector<Snapshot>& train_snaps,
                       std::vector<double>* losses = nullptr);
std::vector<PredictionRecord> stage_predict(const ExperimentConfig& cfg, Positioner& pos,
                                            const std::vector<Snapshot>& test_snaps,
                                            bool parallel = true);
std::vector<ClusterAssignment> stage_cluster(const ExperimentConfig& cfg,
                                             const ClusterParams& params,
                                             const std::vector<PredictionRecord>& records,
                                             bool parallel = true);

std::string assignments_filename(const ClusterParams& params);

struct ExperimentResult {
    std::string out_dir;
    std::uint64_t hash = 0;
    int n_snapshots = 0;
    int n_train = 0;
    int n_test = 0;
    std::vector<MetricsReport> raw_metrics;      // direct network output
    std::vector<MetricsReport> smoothed_metrics; // after the running average
};

// simulate -> preprocess -> train -> predict -> smooth -> cluster ->
// metrics, writing every intermediate plus manifest.json into out_dir.
// Failures carry the stage name; artifacts written so far are kept. The
// manifest holds no timestamps, so a rerun with the same config and seed
// reproduces every file byte for byte.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                bool parallel = true);

} // namespace srsgroup

#endif
