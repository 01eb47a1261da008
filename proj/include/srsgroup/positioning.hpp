#ifndef SRSGROUP_POSITIONING_HPP
#define SRSGROUP_POSITIONING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "srsgroup/neural.hpp"
#include "srsgroup/srs.hpp"

namespace srsgroup {

struct ConvSpec {
    int filters = 0;
    int kernel = 0;
};

// Regressor topology: an optional two-stage convolution front end over the
// (layer, beam) snapshot, then a halving dense pyramid down to the pose
// outputs. Defaults give 2 conv and 8 dense layers.
struct PositioningModelSpec {
    enum class HeadingEncoding { SinCos, Degrees };

    bool use_cnn = true;
    int input_channels = 2;
    std::vector<ConvSpec> conv_layers{{16, 5}, {32, 3}};
    std::vector<int> dense_widths{512, 256, 128, 64, 64, 32, 16}; // hidden widths
    HeadingEncoding heading = HeadingEncoding::SinCos;

    // x, y plus either (sin, cos) or a single scaled degree output
    int output_dim() const { return heading == HeadingEncoding::SinCos ? 4 : 3; }
    void validate() const;
};

// Per-column standardization with training statistics. Constant columns
// keep their mean and a unit denominator.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stdev;

    void fit(const Matrix& x);
    void transform(Matrix& x) const;
};

struct TargetStats {
    double x_mean = 0.0, x_std = 1.0;
    double y_mean = 0.0, y_std = 1.0;
};

struct PredictionRecord {
    double t = 0.0;
    int user = 0;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0; // degrees, [0, 360)
    double x_true = 0.0;
    double y_true = 0.0;
    double heading_true = 0.0;
    bool smoothed = false;
};

// Trained regressor with everything needed to map a raw snapshot to a
// pose: feature scaler (over log-amplitudes) and target statistics.
struct Positioner {
    PositioningModelSpec spec;
    int n_features = 0;
    Model model;
    Scaler scaler;
    TargetStats targets;
};

Model build_model(const PositioningModelSpec& spec, int n_features, std::uint64_t seed);

// 20*log10(amplitude + 1e-12) per feature, one row per snapshot.
Matrix snapshot_features(const std::vector<Snapshot>& snaps);

TargetStats fit_target_stats(const std::vector<Snapshot>& snaps);
Matrix encode_targets(const std::vector<Snapshot>& snaps, const PositioningModelSpec& spec,
                      const TargetStats& stats);

// First (1 - test_fraction) of every user's stream, in time order, goes to
// train; the tail goes to test.
void split_chronological(const std::vector<Snapshot>& snaps, double test_fraction,
                         std::vector<Snapshot>& train, std::vector<Snapshot>& test);

Positioner train_positioner(const std::vector<Snapshot>& train_snaps,
                            const PositioningModelSpec& spec, const TrainOptions& opt,
                            std::vector<double>* losses = nullptr);

// Network outputs back to meters and degrees: positions de-standardized,
// heading from atan2(sin, cos) or from the scaled-degrees output, wrapped
// into [0, 360).
void decode_prediction(const PositioningModelSpec& spec, const TargetStats& stats,
                       const double* outputs, PredictionRecord& rec);

// Batched inference in fixed 256-snapshot chunks; with parallel set the
// chunks run on per-thread model copies. Chunking is identical either way
// so both paths produce bitwise-equal records.
std::vector<PredictionRecord> predict_batch(Positioner& pos, const std::vector<Snapshot>& snaps,
                                            bool parallel = true);

// Running average with the previous smoothed value per user, positions
// componentwise and heading on the circle. The first record of each user
// passes through unchanged.
std::vector<PredictionRecord> smooth_predictions(const std::vector<PredictionRecord>& records);

// Wrapped absolute heading difference in [0, 180].
double heading_error(double pred_deg, double truth_deg);

void export_predictions_csv(const std::string& path, const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> import_predictions_csv(const std::string& path);

void save_positioner(const std::string& path_prefix, Positioner& pos);
Positioner load_positioner(const std::string& path_prefix);

} // namespace srsgroup

#endif
